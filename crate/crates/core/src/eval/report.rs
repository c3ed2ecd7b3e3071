use std::io::Write;

use super::cv::EvalReport;
use crate::dataset::format_g17;
use crate::error::Result;

/// Pretty-printed JSON document for one evaluation run.
pub fn write_report_json<W: Write>(mut out: W, report: &EvalReport) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub const FOLD_CSV_HEADER: [&str; 8] = ["model", "repeat", "fold", "n_train", "n_test", "accuracy", "kappa", "seconds"];

/// One row per train/test evaluation, for every report given.
pub fn write_fold_csv<W: Write>(out: W, reports: &[EvalReport]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(FOLD_CSV_HEADER)?;
    for r in reports {
        for f in &r.folds {
            w.write_record([
                r.model.name().to_string(),
                f.repeat.to_string(),
                f.fold.to_string(),
                f.n_train.to_string(),
                f.n_test.to_string(),
                format_g17(f.accuracy),
                format_g17(f.kappa),
                format_g17(f.seconds),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{repeated_stratified_kfold, CvConfig};
    use crate::ml::{LabeledDataset, ModelSpec};
    use crate::transport::Solver;

    fn report() -> EvalReport {
        let rows: Vec<_> = (0..12).map(|i| [i as f64, 0.0, 1.0]).collect();
        let labels = (0..12).map(|i| if i < 6 { Solver::Dsa } else { Solver::Nda }).collect();
        let ds = LabeledDataset::new(rows, labels).unwrap();
        repeated_stratified_kfold(&ds, &ModelSpec::Knn { k: 1 }, &CvConfig { folds: 2, repeats: 2, seed: 1 }).unwrap()
    }

    #[test]
    fn json_round_trips() {
        let r = report();
        let mut buf = Vec::new();
        write_report_json(&mut buf, &r).unwrap();
        let back: EvalReport = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, r);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"model\": \"knn\""));
        assert!(text.contains("\"confusion\""));
    }

    #[test]
    fn fold_csv_has_one_row_per_evaluation() {
        let mut buf = Vec::new();
        write_fold_csv(&mut buf, &[report()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], FOLD_CSV_HEADER.join(","));
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("knn,0,0,6,6,"));
        assert!(!text.contains('\r'));
    }
}
