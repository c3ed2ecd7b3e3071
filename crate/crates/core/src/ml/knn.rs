use serde::{Deserialize, Serialize};

use super::{FeatureRow, LabeledDataset, NUM_CLASSES};
use crate::error::{Error, Result};

/// K-nearest-neighbor vote over stored (scaled) training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub rows: Vec<FeatureRow>,
    pub labels: Vec<usize>,
}

impl KnnModel {
    pub fn train(dataset: &LabeledDataset, k: usize) -> Result<KnnModel> {
        if k == 0 || k > dataset.len() {
            return Err(Error::Hyperparameter(format!(
                "knn: K = {k} must lie in [1, {}]",
                dataset.len()
            )));
        }
        Ok(KnnModel {
            k,
            rows: dataset.features.clone(),
            labels: dataset.class_indices(),
        })
    }

    /// Training-row indices of the K nearest neighbors, nearest first;
    /// equal distances are ordered by row index.
    pub fn neighbors(&self, x: &FeatureRow) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let dist: f64 = r.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                (dist, i)
            })
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, cmp);
            d.truncate(self.k);
        }
        d.sort_unstable_by(cmp);
        d.into_iter().map(|(_, i)| i).collect()
    }

    /// Majority class among the neighbors and the vote fractions. A vote
    /// tie goes to the tied class whose member is nearest.
    pub fn predict(&self, x: &FeatureRow) -> (usize, [f64; NUM_CLASSES]) {
        let neighbors = self.neighbors(x);
        let mut votes = [0usize; NUM_CLASSES];
        for &i in &neighbors {
            votes[self.labels[i]] += 1;
        }
        let top = *votes.iter().max().expect("at least one class");
        let class = neighbors
            .iter()
            .map(|&i| self.labels[i])
            .find(|&c| votes[c] == top)
            .expect("a neighbor holds the top vote");
        let k = neighbors.len() as f64;
        (class, votes.map(|v| v as f64 / k))
    }
}
