use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slabsel::dataset::Criterion;
use slabsel::ml::{ModelKind, ModelSpec};

#[derive(Debug, Parser)]
#[command(name = "slabsel", version, about = "Benchmark slab transport solvers and recommend the best one")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve every grid case with all three solvers and write the labeled dataset.
    Generate(GenerateArgs),
    /// Fit one classifier on the full dataset and save it.
    Train(TrainArgs),
    /// Repeated stratified cross-validation of one or all classifiers.
    Evaluate(EvaluateArgs),
    /// Predict the best solver for a single problem configuration.
    Recommend(RecommendArgs),
    /// Write plot-ready distribution, feature-space and importance files.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Label {
    Sweeps,
    Runtime,
}

impl From<Label> for Criterion {
    fn from(l: Label) -> Criterion {
        match l {
            Label::Sweeps => Criterion::Sweeps,
            Label::Runtime => Criterion::Runtime,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(short, long, env = "SLABSEL_DATASET", default_value = "slabsel_dataset.csv")]
    pub output: PathBuf,
    /// Comma-separated S_N orders (default 2,4,8,16,32).
    #[arg(long, value_delimiter = ',')]
    pub sn_orders: Option<Vec<usize>>,
    /// Comma-separated cell counts (default 4,8,...,1024).
    #[arg(long, value_delimiter = ',')]
    pub cells: Option<Vec<usize>>,
    /// Comma-separated scattering ratios (default 0.00,0.01,...,1.00).
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-5)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_sweeps: usize,
    /// Worker threads for solving cases.
    #[arg(short, long, default_value_t = 1)]
    pub jobs: usize,
    /// Solve cases one at a time so recorded runtimes are not skewed by
    /// contention; overrides --jobs unless set to false.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub time_serial: bool,
}

/// Hyperparameter overrides; unset values keep the per-kind defaults.
#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    /// Master seed for stochastic trainers (mlp, rf) and fold assignment.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// KNN neighbour count.
    #[arg(long)]
    pub k: Option<usize>,
    /// SVM box constraint.
    #[arg(long = "svm-c")]
    pub svm_c: Option<f64>,
    /// SVM RBF kernel width.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// MLP hidden layer size.
    #[arg(long)]
    pub hidden: Option<usize>,
    /// MLP gradient-descent step.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// MLP epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Forest size.
    #[arg(long)]
    pub trees: Option<usize>,
    /// Features searched per tree node.
    #[arg(long)]
    pub feature_subset: Option<usize>,
    /// Minimum samples per tree leaf.
    #[arg(long)]
    pub min_leaf: Option<usize>,
}

impl ModelArgs {
    pub fn spec(&self, kind: ModelKind) -> ModelSpec {
        let mut spec = ModelSpec::defaults(kind, self.seed);
        match &mut spec {
            ModelSpec::Lda => {}
            ModelSpec::Knn { k } => *k = self.k.unwrap_or(*k),
            ModelSpec::Svm { c, gamma } => {
                *c = self.svm_c.unwrap_or(*c);
                *gamma = self.gamma.unwrap_or(*gamma);
            }
            ModelSpec::Mlp {
                hidden,
                learning_rate,
                epochs,
                ..
            } => {
                *hidden = self.hidden.unwrap_or(*hidden);
                *learning_rate = self.learning_rate.unwrap_or(*learning_rate);
                *epochs = self.epochs.unwrap_or(*epochs);
            }
            ModelSpec::Rf {
                n_trees,
                feature_subset,
                min_leaf,
                ..
            } => {
                *n_trees = self.trees.unwrap_or(*n_trees);
                *feature_subset = self.feature_subset.unwrap_or(*feature_subset);
                *min_leaf = self.min_leaf.unwrap_or(*min_leaf);
            }
        }
        spec
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(short, long, env = "SLABSEL_DATASET", default_value = "slabsel_dataset.csv")]
    pub data: PathBuf,
    /// One of lda, knn, svm, mlp, rf.
    #[arg(short, long)]
    pub model: ModelKind,
    #[arg(short, long, value_enum, default_value_t = Label::Sweeps)]
    pub label: Label,
    #[arg(short, long, env = "SLABSEL_MODEL", default_value = "slabsel_model.json")]
    pub output: PathBuf,
    #[command(flatten)]
    pub params: ModelArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(short, long, env = "SLABSEL_DATASET", default_value = "slabsel_dataset.csv")]
    pub data: PathBuf,
    /// One of lda, knn, svm, mlp, rf.
    #[arg(short, long, required_unless_present = "all", conflicts_with = "all")]
    pub model: Option<ModelKind>,
    /// Evaluate all five model kinds.
    #[arg(long)]
    pub all: bool,
    #[arg(short, long, value_enum, default_value_t = Label::Sweeps)]
    pub label: Label,
    #[arg(long, default_value_t = 4)]
    pub folds: usize,
    #[arg(long, default_value_t = 25)]
    pub repeats: usize,
    /// Evaluation report (JSON).
    #[arg(long, env = "SLABSEL_EVAL_REPORT", default_value = "slabsel_evaluation.json")]
    pub report: PathBuf,
    /// Per-fold metrics (CSV).
    #[arg(long, env = "SLABSEL_EVAL_FOLDS", default_value = "slabsel_folds.csv")]
    pub folds_csv: PathBuf,
    #[command(flatten)]
    pub params: ModelArgs,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[arg(short, long, env = "SLABSEL_MODEL", default_value = "slabsel_model.json")]
    pub model: PathBuf,
    #[arg(long)]
    pub sn_order: usize,
    #[arg(long)]
    pub cells: usize,
    #[arg(long)]
    pub ratio: f64,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(short, long, env = "SLABSEL_DATASET", default_value = "slabsel_dataset.csv")]
    pub data: PathBuf,
    #[arg(short, long, env = "SLABSEL_REPORT_DIR", default_value = "slabsel_report")]
    pub out_dir: PathBuf,
    /// Forest model for importance and tree export.
    #[arg(short, long, env = "SLABSEL_MODEL")]
    pub model: Option<PathBuf>,
    /// Tree of the forest to export.
    #[arg(long, default_value_t = 0)]
    pub tree: usize,
    /// Split levels shown in the tree export.
    #[arg(long, default_value_t = 3)]
    pub tree_depth: usize,
}
