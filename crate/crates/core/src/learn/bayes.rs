//! Gaussian naive Bayes on standardized features.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbState {
    pub log_prior_pos: f64,
    pub log_prior_neg: f64,
    pub mean_pos: Vec<f64>,
    pub var_pos: Vec<f64>,
    pub mean_neg: Vec<f64>,
    pub var_neg: Vec<f64>,
    /// Variance smoothing actually added: `factor * max feature variance`.
    pub epsilon: f64,
}

fn class_stats(x: &[Vec<f64>], rows: &[usize], d: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for &r in rows {
        for (m, &v) in mean.iter_mut().zip(&x[r]) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = vec![0.0; d];
    for &r in rows {
        for ((s, &v), &m) in var.iter_mut().zip(&x[r]).zip(&mean) {
            let dlt = v - m;
            *s += dlt * dlt;
        }
    }
    for s in &mut var {
        *s /= n;
    }
    (mean, var)
}

pub fn fit_gnb(x: &[Vec<f64>], y: &[u8], smoothing_factor: f64) -> GnbState {
    let d = x.first().map_or(0, |r| r.len());
    let n = x.len();
    let pos: Vec<usize> = (0..n).filter(|&i| y[i] == 1).collect();
    let neg: Vec<usize> = (0..n).filter(|&i| y[i] == 0).collect();

    let all: Vec<usize> = (0..n).collect();
    let (_, total_var) = class_stats(x, &all, d);
    let max_var = total_var.iter().cloned().fold(0.0f64, f64::max);
    // All-constant data would leave every variance at zero; fall back to the
    // bare factor so densities stay finite and scores reduce to the priors.
    let epsilon = if max_var > 0.0 { smoothing_factor * max_var } else { smoothing_factor };

    let (mean_pos, mut var_pos) = class_stats(x, &pos, d);
    let (mean_neg, mut var_neg) = class_stats(x, &neg, d);
    for v in var_pos.iter_mut().chain(var_neg.iter_mut()) {
        *v += epsilon;
    }

    GnbState {
        log_prior_pos: (pos.len() as f64 / n as f64).ln(),
        log_prior_neg: (neg.len() as f64 / n as f64).ln(),
        mean_pos,
        var_pos,
        mean_neg,
        var_neg,
        epsilon,
    }
}

fn log_likelihood(row: &[f64], mean: &[f64], var: &[f64]) -> f64 {
    const LN_2PI: f64 = 1.8378770664093453;
    row.iter()
        .zip(mean)
        .zip(var)
        .map(|((&v, &m), &s2)| {
            let dlt = v - m;
            -0.5 * (LN_2PI + s2.ln()) - dlt * dlt / (2.0 * s2)
        })
        .sum()
}

impl GnbState {
    /// Posterior probability of the positive class; the two posteriors sum
    /// to 1 up to floating-point rounding.
    pub fn posterior_pos(&self, row: &[f64]) -> f64 {
        let a = self.log_prior_pos + log_likelihood(row, &self.mean_pos, &self.var_pos);
        let b = self.log_prior_neg + log_likelihood(row, &self.mean_neg, &self.var_neg);
        let m = a.max(b);
        let ea = (a - m).exp();
        let eb = (b - m).exp();
        ea / (ea + eb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_means_match_sample_means() {
        let x = vec![
            vec![1.0, 2.0],
            vec![3.0, 4.0],
            vec![10.0, 20.0],
            vec![12.0, 22.0],
        ];
        let y = vec![0, 0, 1, 1];
        let gnb = fit_gnb(&x, &y, 1e-9);
        assert!((gnb.mean_neg[0] - 2.0).abs() < 1e-9);
        assert!((gnb.mean_neg[1] - 3.0).abs() < 1e-9);
        assert!((gnb.mean_pos[0] - 11.0).abs() < 1e-9);
        assert!((gnb.mean_pos[1] - 21.0).abs() < 1e-9);
    }

    #[test]
    fn posteriors_sum_to_one() {
        let x = vec![vec![0.0], vec![0.5], vec![4.0], vec![5.0]];
        let y = vec![0, 0, 1, 1];
        let gnb = fit_gnb(&x, &y, 1e-9);
        for row in [[0.2], [2.0], [4.7], [100.0]] {
            let p = gnb.posterior_pos(&row);
            let a = gnb.log_prior_pos + log_likelihood(&row, &gnb.mean_pos, &gnb.var_pos);
            let b = gnb.log_prior_neg + log_likelihood(&row, &gnb.mean_neg, &gnb.var_neg);
            let m = a.max(b);
            let q = (b - m).exp() / ((a - m).exp() + (b - m).exp());
            assert!((p + q - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn separated_clusters_classify_cleanly() {
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![if i < 10 { i as f64 * 0.1 } else { 10.0 + i as f64 * 0.1 }])
            .collect();
        let y: Vec<u8> = (0..20).map(|i| u8::from(i >= 10)).collect();
        let gnb = fit_gnb(&x, &y, 1e-9);
        assert!(gnb.posterior_pos(&[11.0]) > 0.99);
        assert!(gnb.posterior_pos(&[0.3]) < 0.01);
    }

    #[test]
    fn constant_features_fall_back_to_priors() {
        let x = vec![vec![1.0]; 4];
        let y = vec![0, 0, 0, 1];
        let gnb = fit_gnb(&x, &y, 1e-9);
        let p = gnb.posterior_pos(&[1.0]);
        assert!((p - 0.25).abs() < 1e-9);
    }
}
