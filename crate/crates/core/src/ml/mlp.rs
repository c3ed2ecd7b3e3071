use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FeatureRow, LabeledDataset, NUM_CLASSES, NUM_FEATURES};
use crate::error::{Error, Result};

/// Single-hidden-layer perceptron: logistic hidden units, softmax output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub hidden: usize,
    /// `hidden × NUM_FEATURES`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// `NUM_CLASSES × hidden`, row-major.
    pub w2: Vec<f64>,
    pub b2: [f64; NUM_CLASSES],
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl MlpModel {
    pub fn zeros(hidden: usize) -> MlpModel {
        MlpModel {
            hidden,
            w1: vec![0.0; hidden * NUM_FEATURES],
            b1: vec![0.0; hidden],
            w2: vec![0.0; NUM_CLASSES * hidden],
            b2: [0.0; NUM_CLASSES],
        }
    }

    /// All weights and biases drawn from U(−0.5, 0.5).
    pub fn random(hidden: usize, seed: u64) -> MlpModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = MlpModel::zeros(hidden);
        for p in m.parameters_mut() {
            *p = rng.gen_range(-0.5..0.5);
        }
        m
    }

    pub fn parameter_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.w1.iter().chain(&self.b1).chain(&self.w2).chain(&self.b2).copied().collect()
    }

    pub fn parameters_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.w1
            .iter_mut()
            .chain(self.b1.iter_mut())
            .chain(self.w2.iter_mut())
            .chain(self.b2.iter_mut())
    }

    pub fn set_parameters(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.parameter_count());
        for (p, v) in self.parameters_mut().zip(values) {
            *p = *v;
        }
    }

    fn hidden_activations(&self, x: &FeatureRow) -> Vec<f64> {
        (0..self.hidden)
            .map(|h| {
                let row = &self.w1[h * NUM_FEATURES..(h + 1) * NUM_FEATURES];
                let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b1[h];
                logistic(z)
            })
            .collect()
    }

    fn output_probabilities(&self, hidden: &[f64]) -> [f64; NUM_CLASSES] {
        let mut z = [0.0; NUM_CLASSES];
        for (k, zk) in z.iter_mut().enumerate() {
            let row = &self.w2[k * self.hidden..(k + 1) * self.hidden];
            *zk = row.iter().zip(hidden).map(|(w, a)| w * a).sum::<f64>() + self.b2[k];
        }
        let top = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e = z.map(|v| (v - top).exp());
        let total: f64 = e.iter().sum();
        e.map(|v| v / total)
    }

    pub fn probabilities(&self, x: &FeatureRow) -> [f64; NUM_CLASSES] {
        self.output_probabilities(&self.hidden_activations(x))
    }

    /// Mean cross-entropy over the batch and its gradient, laid out like
    /// [`MlpModel::parameters`].
    pub fn loss_and_gradient(&self, rows: &[FeatureRow], labels: &[usize]) -> (f64, Vec<f64>) {
        let h = self.hidden;
        let n = rows.len() as f64;
        let mut g_w1 = vec![0.0; h * NUM_FEATURES];
        let mut g_b1 = vec![0.0; h];
        let mut g_w2 = vec![0.0; NUM_CLASSES * h];
        let mut g_b2 = [0.0; NUM_CLASSES];
        let mut loss = 0.0;
        for (x, &y) in rows.iter().zip(labels) {
            let a = self.hidden_activations(x);
            let p = self.output_probabilities(&a);
            loss -= p[y].ln();
            let mut dz = p;
            dz[y] -= 1.0;
            let mut da = vec![0.0; h];
            for k in 0..NUM_CLASSES {
                let dzk = dz[k] / n;
                g_b2[k] += dzk;
                for j in 0..h {
                    g_w2[k * h + j] += dzk * a[j];
                    da[j] += self.w2[k * h + j] * dzk;
                }
            }
            for j in 0..h {
                let dpre = da[j] * a[j] * (1.0 - a[j]);
                g_b1[j] += dpre;
                for f in 0..NUM_FEATURES {
                    g_w1[j * NUM_FEATURES + f] += dpre * x[f];
                }
            }
        }
        let mut grad = g_w1;
        grad.extend(g_b1);
        grad.extend(g_w2);
        grad.extend(g_b2);
        (loss / n, grad)
    }

    /// Full-batch gradient descent from a seeded random start.
    pub fn train(dataset: &LabeledDataset, hidden: usize, learning_rate: f64, epochs: usize, seed: u64) -> Result<MlpModel> {
        if hidden == 0 || !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::Hyperparameter(format!(
                "mlp: hidden size must be >= 1 and learning rate positive (hidden={hidden}, lr={learning_rate})"
            )));
        }
        let labels = dataset.class_indices();
        let mut model = MlpModel::random(hidden, seed);
        let mut params = model.parameters();
        for epoch in 0..epochs {
            let (loss, grad) = model.loss_and_gradient(&dataset.features, &labels);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            for (p, g) in params.iter_mut().zip(&grad) {
                *p -= learning_rate * g;
            }
            model.set_parameters(&params);
        }
        let (loss, _) = model.loss_and_gradient(&dataset.features, &labels);
        if !loss.is_finite() || params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFiniteLoss { epoch: epochs });
        }
        Ok(model)
    }
}
