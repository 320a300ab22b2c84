//! CART-style binary classification tree with Gini impurity.
//!
//! Splits are chosen by maximum impurity decrease; ties break to the lowest
//! feature index and then the lowest threshold, so fitting is fully
//! deterministic. A node splits whenever it is impure, large enough and some
//! candidate feature still varies — a zero-gain split is taken rather than
//! stopping, which lets the unconstrained tree drive training error to zero
//! on consistently labeled data.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        n_pos: usize,
        n_total: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeState {
    pub nodes: Vec<TreeNode>,
    pub n_features: usize,
}

impl TreeState {
    /// Positive-class fraction of the leaf this row falls into.
    pub fn leaf_fraction(&self, row: &[f64]) -> f64 {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                TreeNode::Leaf { n_pos, n_total } => {
                    return *n_pos as f64 / (*n_total).max(1) as f64;
                }
                TreeNode::Split { feature, threshold, left, right } => {
                    node = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn has_splits(&self) -> bool {
        self.nodes.iter().any(|n| matches!(n, TreeNode::Split { .. }))
    }
}

fn gini(n_pos: usize, n_total: usize) -> f64 {
    if n_total == 0 {
        return 0.0;
    }
    let p = n_pos as f64 / n_total as f64;
    2.0 * p * (1.0 - p)
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Grows one tree and accumulates raw Gini importances (impurity decrease
/// weighted by node fraction) into `importances`.
pub struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [u8],
    max_depth: Option<usize>,
    min_split: usize,
    /// When set: (rng, m) — sample m candidate features per split.
    subsample: Option<(&'a mut ChaCha8Rng, usize)>,
    n_root: usize,
    pub importances: Vec<f64>,
    nodes: Vec<TreeNode>,
}

impl<'a> TreeBuilder<'a> {
    pub fn new(
        x: &'a [Vec<f64>],
        y: &'a [u8],
        max_depth: Option<usize>,
        min_split: usize,
        subsample: Option<(&'a mut ChaCha8Rng, usize)>,
    ) -> Self {
        let d = x.first().map_or(0, |r| r.len());
        TreeBuilder {
            x,
            y,
            max_depth,
            min_split,
            subsample,
            n_root: 0,
            importances: vec![0.0; d],
            nodes: Vec::new(),
        }
    }

    /// Fit on the given row indices (a bootstrap sample for forests, all rows
    /// for a plain tree).
    pub fn fit(mut self, rows: Vec<usize>) -> (TreeState, Vec<f64>) {
        let d = self.x.first().map_or(0, |r| r.len());
        self.n_root = rows.len();
        self.grow(rows, 0);
        (TreeState { nodes: self.nodes, n_features: d }, self.importances)
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let n = rows.len();
        let n_pos = rows.iter().filter(|&&r| self.y[r] == 1).count();
        let make_leaf = |nodes: &mut Vec<TreeNode>| {
            nodes.push(TreeNode::Leaf { n_pos, n_total: n });
            nodes.len() - 1
        };

        let depth_capped = self.max_depth.is_some_and(|cap| depth >= cap);
        if n_pos == 0 || n_pos == n || n < self.min_split || depth_capped {
            return make_leaf(&mut self.nodes);
        }

        let candidates = self.candidate_features();
        let best = self.best_split(&rows, n_pos, &candidates);
        let Some(best) = best else {
            return make_leaf(&mut self.nodes);
        };

        self.importances[best.feature] += (n as f64 / self.n_root as f64) * best.gain;

        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.into_iter().partition(|&r| self.x[r][best.feature] <= best.threshold);

        let node = self.nodes.len();
        self.nodes.push(TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: 0,
            right: 0,
        });
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        if let TreeNode::Split { left: l, right: r, .. } = &mut self.nodes[node] {
            *l = left;
            *r = right;
        }
        node
    }

    /// Candidate features for one split, ascending. Forests sample without
    /// replacement; the sorted order keeps tie-breaking by feature index.
    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.importances.len();
        match &mut self.subsample {
            None => (0..d).collect(),
            Some((rng, m)) => {
                let m = (*m).min(d);
                let mut pool: Vec<usize> = (0..d).collect();
                for i in 0..m {
                    let j = rng.gen_range(i..d);
                    pool.swap(i, j);
                }
                let mut picked = pool[..m].to_vec();
                picked.sort_unstable();
                picked
            }
        }
    }

    fn best_split(&self, rows: &[usize], n_pos: usize, candidates: &[usize]) -> Option<BestSplit> {
        let n = rows.len();
        let parent = gini(n_pos, n);
        let mut best: Option<BestSplit> = None;

        for &f in candidates {
            let mut vals: Vec<(f64, u8)> =
                rows.iter().map(|&r| (self.x[r][f], self.y[r])).collect();
            vals.sort_by(|a, b| a.0.total_cmp(&b.0));

            let mut left_n = 0usize;
            let mut left_pos = 0usize;
            for i in 0..n - 1 {
                left_n += 1;
                left_pos += vals[i].1 as usize;
                if vals[i].0 == vals[i + 1].0 {
                    continue;
                }
                let right_n = n - left_n;
                let right_pos = n_pos - left_pos;
                let weighted = (left_n as f64 / n as f64) * gini(left_pos, left_n)
                    + (right_n as f64 / n as f64) * gini(right_pos, right_n);
                let gain = parent - weighted;
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(BestSplit {
                        feature: f,
                        threshold: (vals[i].0 + vals[i + 1].0) / 2.0,
                        gain,
                    });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit_plain(x: &[Vec<f64>], y: &[u8]) -> (TreeState, Vec<f64>) {
        TreeBuilder::new(x, y, None, 2, None).fit((0..x.len()).collect())
    }

    #[test]
    fn single_threshold_split() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let y: Vec<u8> = (0..8).map(|i| u8::from(i >= 4)).collect();
        let (tree, imp) = fit_plain(&x, &y);
        assert!(tree.has_splits());
        for (row, &label) in x.iter().zip(&y) {
            assert_eq!(tree.leaf_fraction(row), f64::from(label));
        }
        assert!((imp[0] - 0.5).abs() < 1e-12, "root split gain is the full parent gini");
    }

    #[test]
    fn xor_is_learned_through_zero_gain_split() {
        let x = vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ];
        let y = vec![0, 1, 1, 0];
        let (tree, _) = fit_plain(&x, &y);
        for (row, &label) in x.iter().zip(&y) {
            assert_eq!(tree.leaf_fraction(row), f64::from(label));
        }
    }

    #[test]
    fn ties_prefer_lowest_feature_index() {
        // Both columns are identical and fully informative.
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, i as f64]).collect();
        let y: Vec<u8> = (0..6).map(|i| u8::from(i >= 3)).collect();
        let (tree, imp) = fit_plain(&x, &y);
        match &tree.nodes[0] {
            TreeNode::Split { feature, .. } => assert_eq!(*feature, 0),
            other => panic!("expected root split, got {other:?}"),
        }
        assert_eq!(imp[1], 0.0);
    }

    #[test]
    fn constant_features_give_leaf_only_tree() {
        let x = vec![vec![1.0], vec![1.0], vec![1.0], vec![1.0]];
        let y = vec![0, 1, 0, 1];
        let (tree, imp) = fit_plain(&x, &y);
        assert!(!tree.has_splits());
        assert_eq!(imp, vec![0.0]);
        assert_eq!(tree.leaf_fraction(&[1.0]), 0.5);
    }

    #[test]
    fn max_depth_limits_growth() {
        let x: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64]).collect();
        let y: Vec<u8> = (0..16).map(|i| u8::from(i % 2 == 0)).collect();
        let (tree, _) = TreeBuilder::new(&x, &y, Some(1), 2, None).fit((0..16).collect());
        let depth_one_nodes = tree.nodes.len();
        assert!(depth_one_nodes <= 3, "depth-1 tree has at most 3 nodes, got {depth_one_nodes}");
    }
}
