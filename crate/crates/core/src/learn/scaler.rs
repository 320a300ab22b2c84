//! Per-feature z-score standardization, fit on training data only and frozen
//! into the model.

use serde::{Deserialize, Serialize};

/// Per-feature (mean, stddev) pairs. Population standard deviation; constant
/// features transform to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: &[Vec<f64>]) -> Scaler {
        let n = x.len() as f64;
        let d = x.first().map_or(0, |r| r.len());
        let mut mean = vec![0.0; d];
        for row in x {
            for (m, &v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; d];
        for row in x {
            for ((s, &v), &m) in var.iter_mut().zip(row).zip(&mean) {
                let dlt = v - m;
                *s += dlt * dlt;
            }
        }
        let std = var.into_iter().map(|s| (s / n).sqrt()).collect();
        Scaler { mean, std }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((&v, &m), &s)| if s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|r| self.transform_row(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mean_unit_variance_after_transform() {
        let x = vec![vec![1.0, 10.0], vec![2.0, 10.0], vec![3.0, 10.0], vec![6.0, 10.0]];
        let scaler = Scaler::fit(&x);
        let z = scaler.transform(&x);
        for col in 0..2 {
            let mean: f64 = z.iter().map(|r| r[col]).sum::<f64>() / z.len() as f64;
            assert!(mean.abs() < 1e-12);
        }
        // Constant column maps to exactly zero.
        assert!(z.iter().all(|r| r[1] == 0.0));
        let var: f64 = z.iter().map(|r| r[0] * r[0]).sum::<f64>() / z.len() as f64;
        assert!((var - 1.0).abs() < 1e-12);
    }
}
