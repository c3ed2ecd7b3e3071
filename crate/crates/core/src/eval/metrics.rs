use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ml::NUM_CLASSES;

/// Counts with rows = truth and columns = prediction, by class index.
pub type Confusion = [[u64; NUM_CLASSES]; NUM_CLASSES];

fn check_lengths(truth: usize, predicted: usize) -> Result<()> {
    if truth != predicted {
        return Err(Error::Metric(format!(
            "{truth} true labels but {predicted} predictions"
        )));
    }
    if truth == 0 {
        return Err(Error::Metric("no labels to score".into()));
    }
    Ok(())
}

/// Fraction of positions where the prediction equals the truth.
pub fn accuracy<T: PartialEq>(truth: &[T], predicted: &[T]) -> Result<f64> {
    check_lengths(truth.len(), predicted.len())?;
    let hits = truth.iter().zip(predicted).filter(|(t, p)| t == p).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Cohen's kappa `(p_a − p_e)/(1 − p_e)`.
///
/// When chance agreement is certain (`p_e = 1`, one class on both sides)
/// the result is 1 for perfect agreement and 0 otherwise.
pub fn cohen_kappa<T: Ord>(truth: &[T], predicted: &[T]) -> Result<f64> {
    check_lengths(truth.len(), predicted.len())?;
    let n = truth.len() as f64;
    let mut marginals: BTreeMap<&T, (u64, u64)> = BTreeMap::new();
    let mut hits = 0u64;
    for (t, p) in truth.iter().zip(predicted) {
        marginals.entry(t).or_default().0 += 1;
        marginals.entry(p).or_default().1 += 1;
        hits += u64::from(t == p);
    }
    let p_a = hits as f64 / n;
    let p_e = marginals.values().map(|&(a, b)| (a as f64 / n) * (b as f64 / n)).sum::<f64>();
    Ok(kappa(p_a, p_e))
}

fn kappa(p_a: f64, p_e: f64) -> f64 {
    if p_e >= 1.0 {
        if p_a >= 1.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (p_a - p_e) / (1.0 - p_e)
    }
}

pub fn confusion_matrix(truth: &[usize], predicted: &[usize]) -> Result<Confusion> {
    check_lengths(truth.len(), predicted.len())?;
    let mut m = [[0; NUM_CLASSES]; NUM_CLASSES];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t >= NUM_CLASSES || p >= NUM_CLASSES {
            return Err(Error::Metric(format!("class index out of range: truth {t}, prediction {p}")));
        }
        m[t][p] += 1;
    }
    Ok(m)
}

/// Accuracy and kappa of the predictions summarized by `m`.
pub fn kappa_from_confusion(m: &Confusion) -> Result<(f64, f64)> {
    let n: u64 = m.iter().flatten().sum();
    if n == 0 {
        return Err(Error::Metric("empty confusion matrix".into()));
    }
    let n = n as f64;
    let hits: u64 = (0..NUM_CLASSES).map(|k| m[k][k]).sum();
    let p_a = hits as f64 / n;
    let p_e = (0..NUM_CLASSES)
        .map(|k| {
            let row: u64 = m[k].iter().sum();
            let col: u64 = m.iter().map(|r| r[k]).sum();
            (row as f64 / n) * (col as f64 / n)
        })
        .sum::<f64>();
    Ok((p_a, kappa(p_a, p_e)))
}

/// Per predicted class, the share of its predictions that were right; 0 for
/// classes never predicted.
pub fn precision(m: &Confusion) -> [f64; NUM_CLASSES] {
    std::array::from_fn(|k| {
        let col: u64 = m.iter().map(|r| r[k]).sum();
        if col == 0 {
            0.0
        } else {
            m[k][k] as f64 / col as f64
        }
    })
}
