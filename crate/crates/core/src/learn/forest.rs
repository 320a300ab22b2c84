//! Random forest: bagged Gini trees with per-split feature subsampling.
//!
//! One seeded generator drives all randomness and is consumed tree-major:
//! tree 0's bootstrap draw, then every feature draw made while growing tree
//! 0, then tree 1's bootstrap, and so on. Identical seeds therefore rebuild
//! identical forests.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{TreeBuilder, TreeState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestState {
    pub trees: Vec<TreeState>,
    pub n_features: usize,
}

impl ForestState {
    /// Share of trees voting positive; each tree votes its leaf majority
    /// (fraction >= 0.5 counts positive).
    pub fn vote_fraction(&self, row: &[f64]) -> f64 {
        let votes = self
            .trees
            .iter()
            .filter(|t| t.leaf_fraction(row) >= 0.5)
            .count();
        votes as f64 / self.trees.len().max(1) as f64
    }
}

pub struct ForestFit {
    pub state: ForestState,
    /// Raw Gini importances summed over trees, not yet normalized.
    pub raw_importances: Vec<f64>,
}

pub fn fit_forest(
    x: &[Vec<f64>],
    y: &[u8],
    n_trees: usize,
    features_per_split: usize,
    max_depth: Option<usize>,
    min_split: usize,
    seed: u64,
) -> ForestFit {
    let n = x.len();
    let d = x.first().map_or(0, |r| r.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut trees = Vec::with_capacity(n_trees);
    let mut raw = vec![0.0; d];
    for _ in 0..n_trees {
        let bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let builder =
            TreeBuilder::new(x, y, max_depth, min_split, Some((&mut rng, features_per_split)));
        let (tree, importances) = builder.fit(bootstrap);
        for (acc, v) in raw.iter_mut().zip(&importances) {
            *acc += v;
        }
        trees.push(tree);
    }
    ForestFit { state: ForestState { trees, n_features: d }, raw_importances: raw }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable() -> (Vec<Vec<f64>>, Vec<u8>) {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, (i * 7 % 11) as f64]).collect();
        let y: Vec<u8> = (0..40).map(|i| u8::from(i >= 20)).collect();
        (x, y)
    }

    #[test]
    fn same_seed_same_forest() {
        let (x, y) = separable();
        let a = fit_forest(&x, &y, 20, 1, None, 2, 9);
        let b = fit_forest(&x, &y, 20, 1, None, 2, 9);
        assert_eq!(a.state, b.state);
        assert_eq!(a.raw_importances, b.raw_importances);
        let c = fit_forest(&x, &y, 20, 1, None, 2, 10);
        assert_ne!(a.state, c.state);
    }

    #[test]
    fn unanimous_forest_scores_one() {
        let (x, y) = separable();
        let fit = fit_forest(&x, &y, 50, 2, None, 2, 1);
        assert_eq!(fit.state.vote_fraction(&[39.0, 0.0]), 1.0);
        assert_eq!(fit.state.vote_fraction(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn informative_feature_dominates_importance() {
        let (x, y) = separable();
        let fit = fit_forest(&x, &y, 50, 1, None, 2, 3);
        assert!(fit.raw_importances[0] > fit.raw_importances[1] * 3.0);
    }
}
