//! Single-file JSON model format.
//!
//! ```json
//! {"format": "slabsel-model", "version": 1, "model": {"scaling": ..., "seed": ..., "kind": "rf", "params": ...}}
//! ```
//!
//! Floats are written with shortest round-trip formatting and parsed exactly,
//! so a loaded model predicts bit-identically to the saved one.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TrainedModel;
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "slabsel-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize)]
struct EnvelopeOut<'a> {
    format: &'a str,
    version: u32,
    model: &'a TrainedModel,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Deserialize)]
struct EnvelopeIn {
    model: TrainedModel,
}

pub fn write_model<W: Write>(out: W, model: &TrainedModel) -> Result<()> {
    let mut out = BufWriter::new(out);
    serde_json::to_writer(
        &mut out,
        &EnvelopeOut {
            format: MODEL_FORMAT,
            version: MODEL_VERSION,
            model,
        },
    )?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn read_model<R: Read>(input: R) -> Result<TrainedModel> {
    let mut text = String::new();
    BufReader::new(input).read_to_string(&mut text)?;
    let header: Header =
        serde_json::from_str(&text).map_err(|e| Error::ModelFormat(format!("not a model file: {e}")))?;
    if header.format != MODEL_FORMAT {
        return Err(Error::ModelFormat(format!(
            "unexpected format '{}' (expected '{MODEL_FORMAT}')",
            header.format
        )));
    }
    if header.version != MODEL_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported model version {} (expected {MODEL_VERSION})",
            header.version
        )));
    }
    let envelope: EnvelopeIn =
        serde_json::from_str(&text).map_err(|e| Error::ModelFormat(format!("malformed model: {e}")))?;
    Ok(envelope.model)
}

pub fn save_model(path: &Path, model: &TrainedModel) -> Result<()> {
    write_model(File::create(path)?, model)
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    read_model(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::{fit, LabeledDataset, ModelKind, ModelSpec};
    use crate::transport::Solver;

    fn data() -> LabeledDataset {
        let rows: Vec<_> = (0..24).map(|i| [(i % 4) as f64, (i / 4) as f64, 0.1 * i as f64]).collect();
        let labels = (0..24)
            .map(|i| match (i / 8) % 3 {
                0 => Solver::Dsa,
                1 => Solver::Nda,
                _ => Solver::Richardson,
            })
            .collect();
        LabeledDataset::new(rows, labels).unwrap()
    }

    #[test]
    fn every_kind_round_trips() {
        let ds = data();
        for kind in ModelKind::ALL {
            let spec = match ModelSpec::defaults(kind, 3) {
                ModelSpec::Rf { feature_subset, min_leaf, seed, .. } => ModelSpec::Rf {
                    n_trees: 10,
                    feature_subset,
                    min_leaf,
                    seed,
                },
                ModelSpec::Mlp { hidden, learning_rate, seed, .. } => ModelSpec::Mlp {
                    hidden,
                    learning_rate,
                    epochs: 50,
                    seed,
                },
                s => s,
            };
            let model = fit(&ds, &spec).unwrap();
            let mut buf = Vec::new();
            write_model(&mut buf, &model).unwrap();
            let back = read_model(buf.as_slice()).unwrap();
            assert_eq!(back, model, "{kind}");
            for x in &ds.features {
                assert_eq!(back.predict(x), model.predict(x));
            }
        }
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(matches!(read_model(&b"{\"a\":1}"[..]), Err(Error::ModelFormat(_))));
        let wrong = br#"{"format":"other","version":1,"model":{}}"#;
        assert!(matches!(read_model(&wrong[..]), Err(Error::ModelFormat(_))));
        let future = br#"{"format":"slabsel-model","version":9,"model":{}}"#;
        let err = read_model(&future[..]).unwrap_err().to_string();
        assert!(err.contains("version 9"));
    }
}
