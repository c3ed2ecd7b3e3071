//! Classifiers that map `(sn_order, num_cells, scattering_ratio)` to the
//! best solver.
//!
//! Class indices follow [`Solver::index`] (dsa, nda, richardson), which is
//! also the order used to break vote and score ties.

mod forest;
mod knn;
mod lda;
mod mlp;
mod persist;
mod scaling;
mod svm;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{CaseRecord, Criterion};
use crate::error::{Error, Result};
use crate::transport::Solver;

pub use forest::{train_forest, RandomForest, Sampling};
pub use knn::KnnModel;
pub use lda::LdaModel;
pub use mlp::MlpModel;
pub use persist::{load_model, read_model, save_model, write_model, MODEL_FORMAT, MODEL_VERSION};
pub use scaling::{standardize, Scaling};
pub use svm::{Kernel, SvmModel};
pub use tree::{gini, train_tree, DecisionTree, TreeNode};

pub const NUM_FEATURES: usize = 3;
pub const NUM_CLASSES: usize = 3;
pub const FEATURE_NAMES: [&str; NUM_FEATURES] = ["sn_order", "num_cells", "scattering_ratio"];

pub type FeatureRow = [f64; NUM_FEATURES];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub features: Vec<FeatureRow>,
    pub labels: Vec<Solver>,
    pub scaling: Option<Scaling>,
}

impl LabeledDataset {
    pub fn new(features: Vec<FeatureRow>, labels: Vec<Solver>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Dimension("dataset must contain at least one sample".into()));
        }
        if features.len() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        Ok(LabeledDataset {
            features,
            labels,
            scaling: None,
        })
    }

    /// Features and the `criterion` label column of benchmark records.
    pub fn from_records(records: &[CaseRecord], criterion: Criterion) -> Result<Self> {
        let labels = records
            .iter()
            .map(|r| {
                r.label(criterion).ok_or(Error::Unlabeled {
                    sn_order: r.sn_order,
                    num_cells: r.num_cells,
                    scattering_ratio: r.scattering_ratio,
                    criterion: criterion.name(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        LabeledDataset::new(records.iter().map(CaseRecord::features).collect(), labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0; NUM_CLASSES];
        for l in &self.labels {
            counts[l.index()] += 1;
        }
        counts
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            features: indices.iter().map(|&i| self.features[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            scaling: self.scaling.clone(),
        }
    }

    pub(crate) fn class_indices(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.index()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lda,
    Knn,
    Svm,
    Mlp,
    Rf,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [ModelKind::Lda, ModelKind::Knn, ModelKind::Svm, ModelKind::Mlp, ModelKind::Rf];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Lda => "lda",
            ModelKind::Knn => "knn",
            ModelKind::Svm => "svm",
            ModelKind::Mlp => "mlp",
            ModelKind::Rf => "rf",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown model kind '{s}' (expected one of lda, knn, svm, mlp, rf)"))
    }
}

/// A model kind together with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Lda,
    Knn {
        k: usize,
    },
    Svm {
        c: f64,
        gamma: f64,
    },
    Mlp {
        hidden: usize,
        learning_rate: f64,
        epochs: usize,
        seed: u64,
    },
    Rf {
        n_trees: usize,
        feature_subset: usize,
        min_leaf: usize,
        seed: u64,
    },
}

impl ModelSpec {
    /// Default hyperparameters for `kind`; `seed` only matters for mlp and rf.
    pub fn defaults(kind: ModelKind, seed: u64) -> ModelSpec {
        match kind {
            ModelKind::Lda => ModelSpec::Lda,
            ModelKind::Knn => ModelSpec::Knn { k: 5 },
            ModelKind::Svm => ModelSpec::Svm {
                c: 1.0,
                gamma: 1.0 / NUM_FEATURES as f64,
            },
            ModelKind::Mlp => ModelSpec::Mlp {
                hidden: 5,
                learning_rate: 0.05,
                epochs: 2000,
                seed,
            },
            ModelKind::Rf => ModelSpec::Rf {
                n_trees: 500,
                feature_subset: 1,
                min_leaf: 1,
                seed,
            },
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Lda => ModelKind::Lda,
            ModelSpec::Knn { .. } => ModelKind::Knn,
            ModelSpec::Svm { .. } => ModelKind::Svm,
            ModelSpec::Mlp { .. } => ModelKind::Mlp,
            ModelSpec::Rf { .. } => ModelKind::Rf,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            ModelSpec::Mlp { seed, .. } | ModelSpec::Rf { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Hyperparameter(m));
        match *self {
            ModelSpec::Lda => Ok(()),
            ModelSpec::Knn { k } if k == 0 => bad("knn: K must be at least 1".into()),
            ModelSpec::Knn { .. } => Ok(()),
            ModelSpec::Svm { c, gamma } if !(c > 0.0 && c.is_finite()) || !(gamma > 0.0 && gamma.is_finite()) => {
                bad(format!("svm: C and gamma must be positive (C={c}, gamma={gamma})"))
            }
            ModelSpec::Svm { .. } => Ok(()),
            ModelSpec::Mlp { hidden, learning_rate, .. } if hidden == 0 || !(learning_rate > 0.0) => bad(format!(
                "mlp: hidden size must be >= 1 and learning rate positive (hidden={hidden}, lr={learning_rate})"
            )),
            ModelSpec::Mlp { .. } => Ok(()),
            ModelSpec::Rf {
                n_trees,
                feature_subset,
                min_leaf,
                ..
            } if n_trees == 0 || feature_subset == 0 || feature_subset > NUM_FEATURES || min_leaf == 0 => bad(format!(
                "rf: need n_trees >= 1, 1 <= feature_subset <= {NUM_FEATURES}, min_leaf >= 1 \
                 (got {n_trees}, {feature_subset}, {min_leaf})"
            )),
            ModelSpec::Rf { .. } => Ok(()),
        }
    }
}

/// Kind-specific fitted parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum ModelParams {
    Lda(LdaModel),
    Knn(KnnModel),
    Svm(SvmModel),
    Mlp(MlpModel),
    Rf(RandomForest),
}

/// A fitted classifier and the feature scaling it expects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    /// Applied to raw features before the kind-specific predictor; absent
    /// for forests, which consume raw features.
    pub scaling: Option<Scaling>,
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub params: ModelParams,
}

/// Predicted class with optional per-class scores (index = class index).
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: Solver,
    pub scores: Option<[f64; NUM_CLASSES]>,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self.params {
            ModelParams::Lda(_) => ModelKind::Lda,
            ModelParams::Knn(_) => ModelKind::Knn,
            ModelParams::Svm(_) => ModelKind::Svm,
            ModelParams::Mlp(_) => ModelKind::Mlp,
            ModelParams::Rf(_) => ModelKind::Rf,
        }
    }

    pub fn predict(&self, raw: &FeatureRow) -> Prediction {
        let row = match &self.scaling {
            Some(s) => s.apply(raw),
            None => *raw,
        };
        let (class, scores) = match &self.params {
            ModelParams::Lda(m) => {
                let (c, s) = m.predict(&row);
                (c, Some(s))
            }
            ModelParams::Knn(m) => {
                let (c, s) = m.predict(&row);
                (c, Some(s))
            }
            ModelParams::Svm(m) => {
                let (c, s) = m.predict(&row);
                (c, Some(s))
            }
            ModelParams::Mlp(m) => {
                let p = m.probabilities(&row);
                (argmax(&p), Some(p))
            }
            ModelParams::Rf(m) => {
                let (c, s) = m.predict(&row);
                (c, Some(s))
            }
        };
        Prediction {
            class: Solver::from_index(class).expect("class index in range"),
            scores,
        }
    }

    pub fn predict_class(&self, raw: &FeatureRow) -> Solver {
        self.predict(raw).class
    }
}

/// Fits `spec` on raw (unscaled) features.
///
/// Distance- and gradient-based models are trained on z-scored features and
/// carry the scaling; forests are trained on raw features.
pub fn fit(dataset: &LabeledDataset, spec: &ModelSpec) -> Result<TrainedModel> {
    spec.validate()?;
    if let ModelSpec::Rf {
        n_trees,
        feature_subset,
        min_leaf,
        seed,
    } = *spec
    {
        let forest = train_forest(dataset, n_trees, feature_subset, min_leaf, seed, Sampling::Bootstrap)?;
        return Ok(TrainedModel {
            scaling: None,
            seed: Some(seed),
            params: ModelParams::Rf(forest),
        });
    }

    let scaled = standardize(dataset);
    let params = match *spec {
        ModelSpec::Lda => ModelParams::Lda(LdaModel::train(&scaled)?),
        ModelSpec::Knn { k } => ModelParams::Knn(KnnModel::train(&scaled, k)?),
        ModelSpec::Svm { c, gamma } => ModelParams::Svm(SvmModel::train(&scaled, c, Kernel::Rbf { gamma })?),
        ModelSpec::Mlp {
            hidden,
            learning_rate,
            epochs,
            seed,
        } => ModelParams::Mlp(MlpModel::train(&scaled, hidden, learning_rate, epochs, seed)?),
        ModelSpec::Rf { .. } => unreachable!("handled above"),
    };
    Ok(TrainedModel {
        scaling: scaled.scaling,
        seed: spec.seed(),
        params,
    })
}

/// Mean decrease in Gini impurity per feature for a forest model.
pub fn gini_importance(model: &TrainedModel) -> Result<[f64; NUM_FEATURES]> {
    match &model.params {
        ModelParams::Rf(forest) => Ok(forest.gini_importance()),
        _ => Err(Error::WrongModel(format!(
            "Gini importance requires an rf model, got {}",
            model.kind()
        ))),
    }
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
