use serde::{Deserialize, Serialize};

use super::{argmax, FeatureRow, LabeledDataset, NUM_CLASSES, NUM_FEATURES};
use crate::error::{Error, Result};

const RIDGE: f64 = 1e-8;

type Matrix = [[f64; NUM_FEATURES]; NUM_FEATURES];

/// Linear discriminant analysis with a pooled, ridge-regularized covariance.
///
/// The discriminant of class `k` is `xᵀΣ⁻¹μ_k − ½μ_kᵀΣ⁻¹μ_k + ln π_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    /// Class means; `None` for classes absent from the training data.
    pub means: [Option<FeatureRow>; NUM_CLASSES],
    pub covariance: Matrix,
    pub precision: Matrix,
    pub priors: [f64; NUM_CLASSES],
}

impl LdaModel {
    pub fn train(dataset: &LabeledDataset) -> Result<LdaModel> {
        let counts = dataset.class_counts();
        let present = counts.iter().filter(|&&c| c > 0).count();
        if present < 2 {
            return Err(Error::Training("lda needs at least two classes".into()));
        }
        let n = dataset.len();
        if n <= present {
            return Err(Error::Training(format!("lda needs more than {present} samples, got {n}")));
        }

        let mut sums = [[0.0; NUM_FEATURES]; NUM_CLASSES];
        for (row, label) in dataset.features.iter().zip(&dataset.labels) {
            for j in 0..NUM_FEATURES {
                sums[label.index()][j] += row[j];
            }
        }
        let mut means = [None; NUM_CLASSES];
        for k in 0..NUM_CLASSES {
            if counts[k] > 0 {
                means[k] = Some(sums[k].map(|s| s / counts[k] as f64));
            }
        }

        let mut cov = [[0.0; NUM_FEATURES]; NUM_FEATURES];
        for (row, label) in dataset.features.iter().zip(&dataset.labels) {
            let mu = means[label.index()].expect("mean of a present class");
            for a in 0..NUM_FEATURES {
                for b in 0..NUM_FEATURES {
                    cov[a][b] += (row[a] - mu[a]) * (row[b] - mu[b]);
                }
            }
        }
        let dof = (n - present) as f64;
        for (a, row) in cov.iter_mut().enumerate() {
            for v in row.iter_mut() {
                *v /= dof;
            }
            row[a] += RIDGE;
        }

        let priors = counts.map(|c| c as f64 / n as f64);
        LdaModel::from_parameters(means, cov, priors)
    }

    /// Builds a model from explicit means, covariance and priors.
    pub fn from_parameters(
        means: [Option<FeatureRow>; NUM_CLASSES],
        covariance: Matrix,
        priors: [f64; NUM_CLASSES],
    ) -> Result<LdaModel> {
        let precision = invert_spd(&covariance)
            .ok_or_else(|| Error::Training("pooled covariance is singular even after ridge".into()))?;
        Ok(LdaModel {
            means,
            covariance,
            precision,
            priors,
        })
    }

    /// Discriminant scores; absent classes score `-inf`.
    pub fn scores(&self, x: &FeatureRow) -> [f64; NUM_CLASSES] {
        let mut out = [f64::NEG_INFINITY; NUM_CLASSES];
        for k in 0..NUM_CLASSES {
            let (Some(mu), prior) = (self.means[k], self.priors[k]) else {
                continue;
            };
            if prior <= 0.0 {
                continue;
            }
            let w = mat_vec(&self.precision, &mu);
            out[k] = dot(x, &w) - 0.5 * dot(&mu, &w) + prior.ln();
        }
        out
    }

    pub fn predict(&self, x: &FeatureRow) -> (usize, [f64; NUM_CLASSES]) {
        let s = self.scores(x);
        (argmax(&s), s)
    }
}

fn dot(a: &FeatureRow, b: &FeatureRow) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(m: &Matrix, v: &FeatureRow) -> FeatureRow {
    let mut out = [0.0; NUM_FEATURES];
    for i in 0..NUM_FEATURES {
        out[i] = dot(&m[i], v);
    }
    out
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
fn invert_spd(a: &Matrix) -> Option<Matrix> {
    const N: usize = NUM_FEATURES;
    let mut l = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 0.0) || !d.is_finite() {
                    return None;
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    let mut inv = [[0.0; N]; N];
    for col in 0..N {
        // L y = e_col, then Lᵀ x = y
        let mut y = [0.0; N];
        for i in 0..N {
            let e = if i == col { 1.0 } else { 0.0 };
            let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
            y[i] = (e - s) / l[i][i];
        }
        let mut x = [0.0; N];
        for i in (0..N).rev() {
            let s: f64 = (i + 1..N).map(|k| l[k][i] * x[k]).sum();
            x[i] = (y[i] - s) / l[i][i];
        }
        for i in 0..N {
            inv[i][col] = x[i];
        }
    }
    Some(inv)
}
