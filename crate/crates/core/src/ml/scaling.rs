use serde::{Deserialize, Serialize};

use super::{FeatureRow, LabeledDataset, NUM_FEATURES};

/// Per-column z-score parameters (population standard deviation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub mean: [f64; NUM_FEATURES],
    pub sd: [f64; NUM_FEATURES],
}

impl Scaling {
    /// Fits column means and population standard deviations; constant
    /// columns get `sd = 1`.
    pub fn fit(rows: &[FeatureRow]) -> Scaling {
        let n = rows.len().max(1) as f64;
        let mut mean = [0.0; NUM_FEATURES];
        for row in rows {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut sd = [0.0; NUM_FEATURES];
        for row in rows {
            for j in 0..NUM_FEATURES {
                sd[j] += (row[j] - mean[j]).powi(2);
            }
        }
        for s in &mut sd {
            *s = (*s / n).sqrt();
            if !(*s > 0.0) {
                *s = 1.0;
            }
        }
        Scaling { mean, sd }
    }

    pub fn apply(&self, row: &FeatureRow) -> FeatureRow {
        let mut out = [0.0; NUM_FEATURES];
        for j in 0..NUM_FEATURES {
            out[j] = (row[j] - self.mean[j]) / self.sd[j];
        }
        out
    }
}

/// Z-scores every column and records the scaling on the returned dataset.
pub fn standardize(dataset: &LabeledDataset) -> LabeledDataset {
    let scaling = Scaling::fit(&dataset.features);
    LabeledDataset {
        features: dataset.features.iter().map(|r| scaling.apply(r)).collect(),
        labels: dataset.labels.clone(),
        scaling: Some(scaling),
    }
}
