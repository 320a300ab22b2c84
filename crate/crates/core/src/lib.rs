//! Metamorphic-relation prediction from method-level source-code metrics.
//!
//! The pipeline has five stages, each exposed as a module and as a CLI
//! subcommand of the `mrpred` binary:
//!
//! 1. [`miner`] — segment Java/C++/Python sources into methods and compute
//!    21 per-method code metrics (lines, tokens, operators, operands,
//!    cyclomatic complexity, signature shape).
//! 2. [`dataset`] — join metric CSVs with per-method metamorphic-relation
//!    labels and encode the categorical columns into a numeric matrix.
//! 3. [`learn`] — five seeded binary classifiers (random forest, decision
//!    tree, Gaussian naive Bayes, linear SVM, logistic regression) with
//!    Gini feature importances for the tree models.
//! 4. [`eval`] — stratified k-fold cross-validation reporting accuracy,
//!    precision, recall, F1 and AUC-ROC.
//! 5. [`analysis`] — importance ranking averaged over repeated forest fits,
//!    top-n feature-subset sweeps, the full MR×classifier×subset grid, and
//!    a comparison against published CFG-kernel baselines.
//!
//! Everything downstream of mining is deterministic given a seed: identical
//! inputs and seeds produce byte-identical artifacts.

pub mod analysis;
pub mod cli;
pub mod dataset;
pub mod eval;
pub mod learn;
pub mod miner;

/// Tool version embedded into every output artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
