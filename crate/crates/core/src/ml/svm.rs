//! One-vs-one soft-margin SVM trained by SMO with second-order working-set
//! selection.

use serde::{Deserialize, Serialize};

use super::{FeatureRow, LabeledDataset, NUM_CLASSES};
use crate::error::{Error, Result};

const KKT_TOLERANCE: f64 = 1e-3;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Rbf { gamma: f64 },
    Linear,
}

impl Kernel {
    pub fn eval(&self, a: &FeatureRow, b: &FeatureRow) -> f64 {
        match *self {
            Kernel::Rbf { gamma } => {
                let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d).exp()
            }
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        }
    }
}

/// A binary machine separating `positive` (decision > 0) from `negative`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub positive: usize,
    pub negative: usize,
    pub support_vectors: Vec<FeatureRow>,
    /// `α_i·y_i` for each support vector.
    pub coefficients: Vec<f64>,
    /// Decision value is `Σ coef_i K(sv_i, x) − rho`.
    pub rho: f64,
}

impl BinarySvm {
    pub fn decision(&self, kernel: &Kernel, x: &FeatureRow) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, c)| c * kernel.eval(sv, x))
            .sum::<f64>()
            - self.rho
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub c: f64,
    pub kernel: Kernel,
    /// One machine per pair of classes present in training, `positive < negative`.
    pub machines: Vec<BinarySvm>,
    /// Fallback when training saw a single class.
    pub sole_class: Option<usize>,
}

impl SvmModel {
    pub fn train(dataset: &LabeledDataset, c: f64, kernel: Kernel) -> Result<SvmModel> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Hyperparameter(format!("svm: C must be positive, got {c}")));
        }
        if let Kernel::Rbf { gamma } = kernel {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::Hyperparameter(format!("svm: gamma must be positive, got {gamma}")));
            }
        }
        let labels = dataset.class_indices();
        let counts = dataset.class_counts();
        let present: Vec<usize> = (0..NUM_CLASSES).filter(|&k| counts[k] > 0).collect();
        let mut machines = Vec::new();
        for (a_pos, &a) in present.iter().enumerate() {
            for &b in &present[a_pos + 1..] {
                let (rows, y): (Vec<FeatureRow>, Vec<f64>) = dataset
                    .features
                    .iter()
                    .zip(&labels)
                    .filter(|(_, &l)| l == a || l == b)
                    .map(|(r, &l)| (*r, if l == a { 1.0 } else { -1.0 }))
                    .unzip();
                machines.push(train_binary(&rows, &y, c, &kernel, a, b));
            }
        }
        Ok(SvmModel {
            c,
            kernel,
            machines,
            sole_class: (present.len() == 1).then(|| present[0]),
        })
    }

    pub fn decision_values(&self, x: &FeatureRow) -> Vec<f64> {
        self.machines.iter().map(|m| m.decision(&self.kernel, x)).collect()
    }

    /// Pairwise majority vote; vote ties go to the lowest class index.
    pub fn predict(&self, x: &FeatureRow) -> (usize, [f64; NUM_CLASSES]) {
        let mut votes = [0.0; NUM_CLASSES];
        if let Some(k) = self.sole_class {
            votes[k] = 1.0;
        }
        for m in &self.machines {
            let winner = if m.decision(&self.kernel, x) > 0.0 { m.positive } else { m.negative };
            votes[winner] += 1.0;
        }
        (super::argmax(&votes), votes)
    }
}

/// Dual C-SVC solved by SMO (maximal-gain second-order pair selection).
fn train_binary(rows: &[FeatureRow], y: &[f64], c: f64, kernel: &Kernel, positive: usize, negative: usize) -> BinarySvm {
    let n = rows.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.eval(&rows[i], &rows[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    let kd: Vec<f64> = (0..n).map(|i| k[i * n + i]).collect();
    // Q_ij = y_i y_j K_ij
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let at_upper = |a: f64| a >= c;
    let at_lower = |a: f64| a <= 0.0;

    let max_iter = (100 * n).max(10_000_000);
    for _ in 0..max_iter {
        // i: maximal violating index in I_up
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let up = if y[t] > 0.0 { !at_upper(alpha[t]) } else { !at_lower(alpha[t]) };
            if up && -y[t] * grad[t] >= g_max {
                g_max = -y[t] * grad[t];
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else { break };

        let mut g_max2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best_obj = f64::INFINITY;
        for t in 0..n {
            let low = if y[t] > 0.0 { !at_lower(alpha[t]) } else { !at_upper(alpha[t]) };
            if !low {
                continue;
            }
            let yg = y[t] * grad[t];
            if yg >= g_max2 {
                g_max2 = yg;
            }
            let diff = g_max + yg;
            if diff > 0.0 {
                let mut quad = kd[i] + kd[t] - 2.0 * k[i * n + t];
                if quad <= 0.0 {
                    quad = TAU;
                }
                let obj = -(diff * diff) / quad;
                if obj <= best_obj {
                    best_obj = obj;
                    j_sel = Some(t);
                }
            }
        }
        let Some(j) = j_sel else { break };
        if g_max + g_max2 < KKT_TOLERANCE {
            break;
        }

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = kd[i] + kd[j] + 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = kd[i] + kd[j] - 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += q(i, t) * di + q(j, t) * dj;
        }
    }

    // rho from free vectors, or the midpoint of the feasible interval
    let (mut upper, mut lower) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_count) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if at_upper(alpha[t]) {
            if y[t] < 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if at_lower(alpha[t]) {
            if y[t] > 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            free_sum += yg;
            free_count += 1;
        }
    }
    let rho = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        0.5 * (upper + lower)
    };

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for t in 0..n {
        if alpha[t] > 0.0 {
            support_vectors.push(rows[t]);
            coefficients.push(alpha[t] * y[t]);
        }
    }
    BinarySvm {
        positive,
        negative,
        support_vectors,
        coefficients,
        rho,
    }
}
