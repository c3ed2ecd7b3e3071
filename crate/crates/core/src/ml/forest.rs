//! Bagged random forests of Gini trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, DecisionTree};
use super::{argmax, FeatureRow, LabeledDataset, NUM_CLASSES, NUM_FEATURES};
use crate::error::{Error, Result};

/// How each tree's training sample is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// `n` draws with replacement.
    Bootstrap,
    /// Every sample exactly once.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub feature_subset: usize,
    pub min_leaf: usize,
    pub seed: u64,
    pub sampling: Sampling,
    pub trees: Vec<DecisionTree>,
}

/// Per-tree generator: the master seed with the tree index as stream, so a
/// tree's randomness does not depend on how trees are scheduled.
fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64);
    rng
}

pub fn train_forest(
    dataset: &LabeledDataset,
    n_trees: usize,
    feature_subset: usize,
    min_leaf: usize,
    seed: u64,
    sampling: Sampling,
) -> Result<RandomForest> {
    if n_trees == 0 {
        return Err(Error::Hyperparameter("n_trees must be at least 1".into()));
    }
    if !(1..=NUM_FEATURES).contains(&feature_subset) {
        return Err(Error::Hyperparameter(format!(
            "feature_subset must be in 1..={NUM_FEATURES}, got {feature_subset}"
        )));
    }
    if min_leaf == 0 {
        return Err(Error::Hyperparameter("min_leaf must be at least 1".into()));
    }
    let labels = dataset.class_indices();
    let n = dataset.len();
    let trees = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(seed, t);
            let sample: Vec<usize> = match sampling {
                Sampling::Bootstrap => (0..n).map(|_| rng.gen_range(0..n)).collect(),
                Sampling::Identity => (0..n).collect(),
            };
            grow(&dataset.features, &labels, &sample, feature_subset, min_leaf, &mut rng)
        })
        .collect();
    Ok(RandomForest {
        feature_subset,
        min_leaf,
        seed,
        sampling,
        trees,
    })
}

impl RandomForest {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn votes(&self, x: &FeatureRow) -> [usize; NUM_CLASSES] {
        let mut votes = [0; NUM_CLASSES];
        for tree in &self.trees {
            votes[tree.predict(x)] += 1;
        }
        votes
    }

    /// Majority class and per-class vote counts; ties to the lowest index.
    pub fn predict(&self, x: &FeatureRow) -> (usize, [f64; NUM_CLASSES]) {
        let votes = self.votes(x).map(|v| v as f64);
        (argmax(&votes), votes)
    }

    /// Summed Gini decrease per feature over all trees, divided by the
    /// number of trees.
    pub fn gini_importance(&self) -> [f64; NUM_FEATURES] {
        let mut total = [0.0; NUM_FEATURES];
        for tree in &self.trees {
            for (t, d) in total.iter_mut().zip(tree.gini_decrease()) {
                *t += d;
            }
        }
        total.map(|t| t / self.trees.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::train_tree;
    use crate::transport::Solver;

    fn blobs() -> LabeledDataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..30 {
            let t = i as f64 / 10.0;
            rows.push([t, 2.0 * t, (i % 4) as f64]);
            labels.push(match i % 3 {
                0 => Solver::Dsa,
                1 => Solver::Nda,
                _ => Solver::Richardson,
            });
        }
        LabeledDataset::new(rows, labels).unwrap()
    }

    #[test]
    fn single_identity_tree_matches_train_tree() {
        let ds = blobs();
        let forest = train_forest(&ds, 1, 3, 1, 9, Sampling::Identity).unwrap();
        let tree = train_tree(&ds, 3, 1, &mut tree_rng(9, 0));
        assert_eq!(forest.trees[0], tree);
        for x in &ds.features {
            assert_eq!(forest.predict(x).0, tree.predict(x));
        }
    }

    #[test]
    fn prediction_is_a_voted_class() {
        let ds = blobs();
        let forest = train_forest(&ds, 15, 1, 1, 4, Sampling::Bootstrap).unwrap();
        for x in &ds.features {
            let (c, votes) = forest.predict(x);
            assert!(votes[c] > 0.0);
            assert_eq!(votes.iter().sum::<f64>(), 15.0);
        }
    }

    #[test]
    fn rejects_bad_hyperparameters() {
        let ds = blobs();
        assert!(train_forest(&ds, 0, 1, 1, 0, Sampling::Bootstrap).is_err());
        assert!(train_forest(&ds, 5, 4, 1, 0, Sampling::Bootstrap).is_err());
        assert!(train_forest(&ds, 5, 1, 0, 0, Sampling::Bootstrap).is_err());
    }

    #[test]
    fn importance_is_nonnegative() {
        let forest = train_forest(&blobs(), 20, 2, 1, 1, Sampling::Bootstrap).unwrap();
        assert!(forest.gini_importance().iter().all(|&v| v >= 0.0));
    }
}
