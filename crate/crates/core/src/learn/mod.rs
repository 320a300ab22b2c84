//! The five binary classifiers with deterministic, seeded training.
//!
//! Tree models (random forest, decision tree) consume raw features and carry
//! normalized Gini importances; the scaler-equipped kinds (Gaussian naive
//! Bayes, linear SVM, logistic regression) standardize features with
//! statistics fit on training data only and frozen into the model.

mod bayes;
mod forest;
mod linear;
mod scaler;
mod tree;

pub use linear::{logistic_loss_grad, svm_objective};
pub use scaler::Scaler;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError, MrKind};
use bayes::GnbState;
use forest::ForestState;
use linear::LinearState;
use tree::{TreeBuilder, TreeState};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("degenerate training data: {0}")]
    DegenerateData(String),
    #[error("row has {got} features, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Dataset(DatasetError),
}

impl LearnError {
    pub fn from_dataset(e: DatasetError) -> Self {
        LearnError::Dataset(e)
    }
}

/// The five classifier families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    #[serde(rename = "RF")]
    RandomForest,
    #[serde(rename = "DT")]
    DecisionTree,
    #[serde(rename = "GNB")]
    GaussianNb,
    #[serde(rename = "SVM_LINEAR")]
    SvmLinear,
    #[serde(rename = "LR")]
    LogisticRegression,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::RandomForest,
        ClassifierKind::DecisionTree,
        ClassifierKind::GaussianNb,
        ClassifierKind::SvmLinear,
        ClassifierKind::LogisticRegression,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::RandomForest => "RF",
            ClassifierKind::DecisionTree => "DT",
            ClassifierKind::GaussianNb => "GNB",
            ClassifierKind::SvmLinear => "SVM_LINEAR",
            ClassifierKind::LogisticRegression => "LR",
        }
    }

    /// Short CLI spelling: rf, dt, gnb, svm, lr.
    pub fn parse_cli(s: &str) -> Option<ClassifierKind> {
        match s.to_ascii_lowercase().as_str() {
            "rf" => Some(ClassifierKind::RandomForest),
            "dt" => Some(ClassifierKind::DecisionTree),
            "gnb" => Some(ClassifierKind::GaussianNb),
            "svm" | "svm_linear" => Some(ClassifierKind::SvmLinear),
            "lr" | "lg" => Some(ClassifierKind::LogisticRegression),
            _ => None,
        }
    }

    fn uses_scaler(self) -> bool {
        matches!(
            self,
            ClassifierKind::GaussianNb | ClassifierKind::SvmLinear | ClassifierKind::LogisticRegression
        )
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How many candidate features a forest samples per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeaturesPerSplit {
    /// floor(sqrt(d)), the usual forest default.
    Sqrt,
    /// Every feature (bagging only).
    All,
    Count(usize),
}

impl FeaturesPerSplit {
    fn resolve(self, d: usize) -> usize {
        match self {
            FeaturesPerSplit::Sqrt => (d as f64).sqrt().floor().max(1.0) as usize,
            FeaturesPerSplit::All => d.max(1),
            FeaturesPerSplit::Count(m) => m.clamp(1, d.max(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub rf_trees: usize,
    pub rf_features_per_split: FeaturesPerSplit,
    /// None means unlimited depth.
    pub dt_max_depth: Option<usize>,
    pub dt_min_split: usize,
    /// Factor multiplied by the largest feature variance at fit time.
    pub gnb_var_smoothing: f64,
    pub svm_c: f64,
    pub svm_max_iter: usize,
    pub lr_l2: f64,
    pub lr_tol: f64,
    pub lr_max_iter: usize,
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            rf_trees: 100,
            rf_features_per_split: FeaturesPerSplit::Sqrt,
            dt_max_depth: None,
            dt_min_split: 2,
            gnb_var_smoothing: 1e-9,
            svm_c: 1.0,
            svm_max_iter: 10_000,
            lr_l2: 1.0,
            lr_tol: 1e-6,
            lr_max_iter: 1000,
            seed: 42,
        }
    }
}

impl HyperParams {
    pub fn with_seed(seed: u64) -> Self {
        HyperParams { seed, ..Default::default() }
    }
}

/// Kind-specific fitted parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelState {
    Forest(ForestState),
    Tree(TreeState),
    Gaussian(GnbState),
    Svm(LinearState),
    Logistic(LinearState),
}

/// One fitted binary classifier plus its preprocessing state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ClassifierKind,
    pub params: HyperParams,
    pub scaler: Option<Scaler>,
    pub feature_names: Vec<String>,
    pub model_state: ModelState,
    /// Normalized Gini importances; tree models only.
    pub importances: Option<Vec<f64>>,
    /// Non-fatal training diagnostics, e.g. a non-convergence flag.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Train one classifier for one MR on the full dataset.
pub fn train(
    kind: ClassifierKind,
    ds: &Dataset,
    mr: MrKind,
    params: &HyperParams,
) -> Result<TrainedModel, LearnError> {
    let y = ds.labels_for(mr);
    train_on(kind, &ds.rows, &y, &ds.feature_names, params)
}

/// Train on an explicit matrix; used directly by cross-validation folds.
pub fn train_on(
    kind: ClassifierKind,
    x: &[Vec<f64>],
    y: &[u8],
    feature_names: &[String],
    params: &HyperParams,
) -> Result<TrainedModel, LearnError> {
    if x.len() < 2 {
        return Err(LearnError::DegenerateData(format!("{} training rows", x.len())));
    }
    let n_pos = y.iter().filter(|&&v| v == 1).count();
    if n_pos == 0 || n_pos == y.len() {
        return Err(LearnError::DegenerateData("single-class training data".into()));
    }

    let mut warnings = Vec::new();
    let (scaler, scaled);
    let features: &[Vec<f64>] = if kind.uses_scaler() {
        let s = Scaler::fit(x);
        scaled = s.transform(x);
        scaler = Some(s);
        &scaled
    } else {
        scaler = None;
        x
    };

    let d = features.first().map_or(0, |r| r.len());
    let (model_state, importances) = match kind {
        ClassifierKind::RandomForest => {
            let m = params.rf_features_per_split.resolve(d);
            let fit = forest::fit_forest(
                features,
                y,
                params.rf_trees,
                m,
                params.dt_max_depth,
                params.dt_min_split,
                params.seed,
            );
            let imp = normalize_importances(fit.raw_importances)?;
            (ModelState::Forest(fit.state), Some(imp))
        }
        ClassifierKind::DecisionTree => {
            let builder =
                TreeBuilder::new(features, y, params.dt_max_depth, params.dt_min_split, None);
            let (state, raw) = builder.fit((0..features.len()).collect());
            let imp = normalize_importances(raw)?;
            (ModelState::Tree(state), Some(imp))
        }
        ClassifierKind::GaussianNb => {
            let state = bayes::fit_gnb(features, y, params.gnb_var_smoothing);
            (ModelState::Gaussian(state), None)
        }
        ClassifierKind::SvmLinear => {
            let fit = linear::fit_svm(features, y, params.svm_c, params.svm_max_iter);
            warnings.extend(fit.warning);
            (ModelState::Svm(fit.state), None)
        }
        ClassifierKind::LogisticRegression => {
            let fit =
                linear::fit_logistic(features, y, params.lr_l2, params.lr_tol, params.lr_max_iter);
            warnings.extend(fit.warning);
            (ModelState::Logistic(fit.state), None)
        }
    };

    Ok(TrainedModel {
        kind,
        params: params.clone(),
        scaler,
        feature_names: feature_names.to_vec(),
        model_state,
        importances,
        warnings,
    })
}

fn normalize_importances(raw: Vec<f64>) -> Result<Vec<f64>, LearnError> {
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(LearnError::DegenerateData(
            "no informative split found; features may be constant".into(),
        ));
    }
    Ok(raw.into_iter().map(|v| v / total).collect())
}

impl TrainedModel {
    fn check_row(&self, row: &[f64]) -> Result<(), LearnError> {
        if row.len() != self.feature_names.len() {
            return Err(LearnError::DimensionMismatch {
                expected: self.feature_names.len(),
                got: row.len(),
            });
        }
        Ok(())
    }

    /// Confidence in the positive class: vote/leaf fraction for tree models,
    /// posterior probability for GNB and LR, signed decision value for SVM.
    pub fn predict_score(&self, row: &[f64]) -> Result<f64, LearnError> {
        self.check_row(row)?;
        let scaled;
        let row: &[f64] = match &self.scaler {
            Some(s) => {
                scaled = s.transform_row(row);
                &scaled
            }
            None => row,
        };
        Ok(match &self.model_state {
            ModelState::Forest(f) => f.vote_fraction(row),
            ModelState::Tree(t) => t.leaf_fraction(row),
            ModelState::Gaussian(g) => g.posterior_pos(row),
            ModelState::Svm(l) => l.decision(row),
            ModelState::Logistic(l) => 1.0 / (1.0 + (-l.decision(row)).exp()),
        })
    }

    /// Default decision threshold: 0 on the SVM decision value, 0.5 on
    /// probabilities and vote fractions.
    pub fn default_threshold(&self) -> f64 {
        match self.kind {
            ClassifierKind::SvmLinear => 0.0,
            _ => 0.5,
        }
    }

    /// Hard 0/1 label; a score exactly at the threshold goes positive.
    pub fn predict_label(&self, row: &[f64], threshold: f64) -> Result<u8, LearnError> {
        Ok(u8::from(self.predict_score(row)? >= threshold))
    }

    pub fn predict_label_default(&self, row: &[f64]) -> Result<u8, LearnError> {
        self.predict_label(row, self.default_threshold())
    }

    /// Normalized mean-decrease-in-Gini importances (tree models only).
    pub fn feature_importances(&self) -> Result<&[f64], LearnError> {
        self.importances.as_deref().ok_or_else(|| {
            LearnError::Unsupported(format!(
                "feature importances are only defined for RF and DT, not {}",
                self.kind
            ))
        })
    }

    /// Self-describing JSON document for persistence.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model state serializes")
    }

    pub fn from_json(text: &str) -> Result<TrainedModel, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|i| format!("f{i}")).collect()
    }

    /// 1-D linearly separable data: class = x > 0.
    fn separable() -> (Vec<Vec<f64>>, Vec<u8>) {
        let x: Vec<Vec<f64>> = (-8..8).map(|i| vec![i as f64 + 0.5]).collect();
        let y: Vec<u8> = (-8..8).map(|i| u8::from(i as f64 + 0.5 > 0.0)).collect();
        (x, y)
    }

    #[test]
    fn every_kind_separates_separable_data() {
        let (x, y) = separable();
        for kind in ClassifierKind::ALL {
            let model = train_on(kind, &x, &y, &names(1), &HyperParams::with_seed(7)).unwrap();
            let correct = x
                .iter()
                .zip(&y)
                .filter(|(row, &label)| model.predict_label_default(row).unwrap() == label)
                .count();
            assert_eq!(correct, x.len(), "{kind} failed to separate training data");
        }
    }

    #[test]
    fn single_class_is_degenerate() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0]];
        let y = vec![1, 1, 1];
        for kind in ClassifierKind::ALL {
            let err = train_on(kind, &x, &y, &names(1), &HyperParams::default()).unwrap_err();
            assert!(matches!(err, LearnError::DegenerateData(_)), "{kind}");
        }
    }

    #[test]
    fn constant_features_degenerate_for_trees() {
        let x = vec![vec![3.0]; 8];
        let y: Vec<u8> = (0..8).map(|i| u8::from(i % 2 == 0)).collect();
        for kind in [ClassifierKind::RandomForest, ClassifierKind::DecisionTree] {
            let err = train_on(kind, &x, &y, &names(1), &HyperParams::with_seed(1)).unwrap_err();
            assert!(matches!(err, LearnError::DegenerateData(_)), "{kind}");
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let (x, y) = separable();
        let model = train_on(
            ClassifierKind::DecisionTree,
            &x,
            &y,
            &names(1),
            &HyperParams::default(),
        )
        .unwrap();
        let err = model.predict_score(&[1.0, 2.0]).unwrap_err();
        assert!(matches!(err, LearnError::DimensionMismatch { expected: 1, got: 2 }));
    }

    #[test]
    fn dt_scores_its_training_rows_by_leaf_fraction() {
        let (x, y) = separable();
        let model =
            train_on(ClassifierKind::DecisionTree, &x, &y, &names(1), &HyperParams::default())
                .unwrap();
        // Pure leaves: each training row scores exactly its own label.
        for (row, &label) in x.iter().zip(&y) {
            assert_eq!(model.predict_score(row).unwrap(), f64::from(label));
        }
    }

    #[test]
    fn rf_unanimous_vote_scores_one() {
        let (x, y) = separable();
        let model =
            train_on(ClassifierKind::RandomForest, &x, &y, &names(1), &HyperParams::with_seed(3))
                .unwrap();
        assert_eq!(model.predict_score(&[7.5]).unwrap(), 1.0);
    }

    #[test]
    fn label_thresholds() {
        let (x, y) = separable();
        let lr = train_on(
            ClassifierKind::LogisticRegression,
            &x,
            &y,
            &names(1),
            &HyperParams::default(),
        )
        .unwrap();
        // score 0.7 vs threshold 0.5 -> 1; exact tie goes positive.
        assert_eq!(u8::from(0.7 >= lr.default_threshold()), 1);
        let svm =
            train_on(ClassifierKind::SvmLinear, &x, &y, &names(1), &HyperParams::default())
                .unwrap();
        assert_eq!(svm.default_threshold(), 0.0);
        // A negative decision value labels 0.
        assert_eq!(svm.predict_label(&[-5.0], 0.0).unwrap(), 0);
        let score = lr.predict_score(&x[0]).unwrap();
        assert_eq!(lr.predict_label(&x[0], score).unwrap(), 1);
    }

    #[test]
    fn importances_unsupported_for_flat_models() {
        let (x, y) = separable();
        for kind in
            [ClassifierKind::GaussianNb, ClassifierKind::SvmLinear, ClassifierKind::LogisticRegression]
        {
            let model = train_on(kind, &x, &y, &names(1), &HyperParams::default()).unwrap();
            assert!(matches!(model.feature_importances(), Err(LearnError::Unsupported(_))));
        }
    }

    #[test]
    fn single_informative_feature_takes_all_importance() {
        // Feature 0 alone determines the label; feature 1 is a constant shuffle.
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, (i * 13 % 7) as f64]).collect();
        let y: Vec<u8> = (0..30).map(|i| u8::from(i >= 15)).collect();
        let model =
            train_on(ClassifierKind::DecisionTree, &x, &y, &names(2), &HyperParams::default())
                .unwrap();
        let imp = model.feature_importances().unwrap();
        assert_eq!(imp[0], 1.0);
        assert_eq!(imp[1], 0.0);
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn duplicated_column_importance_sums_match_single_column_fit() {
        let base: Vec<Vec<f64>> = (0..24).map(|i| vec![i as f64, (i % 5) as f64]).collect();
        let y: Vec<u8> = (0..24).map(|i| u8::from(i >= 12)).collect();
        let dup: Vec<Vec<f64>> =
            base.iter().map(|r| vec![r[0], r[0], r[1]]).collect();

        let params = HyperParams::with_seed(11);
        let single =
            train_on(ClassifierKind::DecisionTree, &base, &y, &names(2), &params).unwrap();
        let doubled = train_on(ClassifierKind::DecisionTree, &dup, &y, &names(3), &params).unwrap();
        let si = single.feature_importances().unwrap();
        let di = doubled.feature_importances().unwrap();
        // Ties break to the lower index, so the pair sum equals the single fit.
        assert!((si[0] - (di[0] + di[1])).abs() < 1e-9);

        let rf_single =
            train_on(ClassifierKind::RandomForest, &base, &y, &names(2), &params).unwrap();
        let rf_doubled =
            train_on(ClassifierKind::RandomForest, &dup, &y, &names(3), &params).unwrap();
        let rs = rf_single.feature_importances().unwrap();
        let rd = rf_doubled.feature_importances().unwrap();
        assert!(
            (rs[0] - (rd[0] + rd[1])).abs() < 0.15,
            "forest pair importance {} vs single {}",
            rd[0] + rd[1],
            rs[0]
        );
    }

    #[test]
    fn gnb_posteriors_sum_to_one_over_classes() {
        let (x, y) = separable();
        let model =
            train_on(ClassifierKind::GaussianNb, &x, &y, &names(1), &HyperParams::default())
                .unwrap();
        for row in &x {
            let p = model.predict_score(row).unwrap();
            assert!(p >= 0.0 && p <= 1.0);
        }
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let x: Vec<Vec<f64>> =
            (0..40).map(|i| vec![(i % 13) as f64, (i * 17 % 23) as f64, i as f64]).collect();
        let y: Vec<u8> = (0..40).map(|i| u8::from((i * 7 % 10) >= 5)).collect();
        for kind in ClassifierKind::ALL {
            let params = HyperParams::with_seed(99);
            let a = train_on(kind, &x, &y, &names(3), &params).unwrap();
            let b = train_on(kind, &x, &y, &names(3), &params).unwrap();
            assert_eq!(a, b, "{kind} must be deterministic");
        }
    }

    #[test]
    fn tree_labels_invariant_to_feature_scaling() {
        let x: Vec<Vec<f64>> =
            (0..30).map(|i| vec![(i % 6) as f64, (i * 11 % 17) as f64]).collect();
        let y: Vec<u8> = (0..30).map(|i| u8::from((i % 6) >= 3)).collect();
        let scaled_x: Vec<Vec<f64>> = x.iter().map(|r| vec![r[0] * 1000.0, r[1]]).collect();
        for kind in [ClassifierKind::DecisionTree, ClassifierKind::RandomForest] {
            let params = HyperParams::with_seed(5);
            let a = train_on(kind, &x, &y, &names(2), &params).unwrap();
            let b = train_on(kind, &scaled_x, &y, &names(2), &params).unwrap();
            for (row, srow) in x.iter().zip(&scaled_x) {
                assert_eq!(
                    a.predict_label_default(row).unwrap(),
                    b.predict_label_default(srow).unwrap(),
                    "{kind} label changed under positive feature scaling"
                );
            }
        }
    }

    #[test]
    fn scaler_kinds_invariant_to_affine_rescaling() {
        let x: Vec<Vec<f64>> =
            (0..24).map(|i| vec![i as f64, (i * 5 % 7) as f64]).collect();
        let y: Vec<u8> = (0..24).map(|i| u8::from(i >= 12)).collect();
        let rescaled: Vec<Vec<f64>> =
            x.iter().map(|r| vec![r[0] * 3.0 + 100.0, r[1] * 0.25 - 2.0]).collect();
        for kind in
            [ClassifierKind::GaussianNb, ClassifierKind::SvmLinear, ClassifierKind::LogisticRegression]
        {
            let params = HyperParams::with_seed(5);
            let a = train_on(kind, &x, &y, &names(2), &params).unwrap();
            let b = train_on(kind, &rescaled, &y, &names(2), &params).unwrap();
            for (row, srow) in x.iter().zip(&rescaled) {
                assert_eq!(
                    a.predict_label_default(row).unwrap(),
                    b.predict_label_default(srow).unwrap(),
                    "{kind} label changed under per-feature affine rescaling"
                );
            }
        }
    }

    #[test]
    fn json_round_trip_reproduces_predictions_bitwise() {
        let x: Vec<Vec<f64>> =
            (0..30).map(|i| vec![(i as f64).sin() * 3.0, i as f64]).collect();
        let y: Vec<u8> = (0..30).map(|i| u8::from(i >= 15)).collect();
        for kind in ClassifierKind::ALL {
            let model = train_on(kind, &x, &y, &names(2), &HyperParams::with_seed(21)).unwrap();
            let json = model.to_json();
            let back = TrainedModel::from_json(&json).unwrap();
            assert_eq!(model, back);
            for row in &x {
                let a = model.predict_score(row).unwrap();
                let b = back.predict_score(row).unwrap();
                assert_eq!(a.to_bits(), b.to_bits(), "{kind} score changed after round trip");
            }
        }
    }
}
