//! Cross-validated classifier evaluation.

mod cv;
mod metrics;
mod report;

pub use cv::{rank_models, repeated_stratified_kfold, stratified_folds, CvConfig, EvalReport, FoldMetrics};
pub use metrics::{accuracy, cohen_kappa, confusion_matrix, kappa_from_confusion, precision, Confusion};
pub use report::{write_fold_csv, write_report_json, FOLD_CSV_HEADER};
