use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{confusion_matrix, kappa_from_confusion, precision, Confusion};
use crate::dataset::Criterion;
use crate::error::{Error, Result};
use crate::ml::{fit, LabeledDataset, ModelKind, ModelSpec, NUM_CLASSES};
use crate::transport::Solver;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 4,
            repeats: 25,
            seed: 0,
        }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 || self.repeats < 1 {
            return Err(Error::Hyperparameter(format!(
                "cross-validation needs folds >= 2 and repeats >= 1 (got {} and {})",
                self.folds, self.repeats
            )));
        }
        Ok(())
    }

    pub fn evaluations(&self) -> usize {
        self.folds * self.repeats
    }
}

/// Fold index for every sample.
///
/// Members of each class are shuffled and dealt round-robin into the folds;
/// the dealing position carries over from one class to the next so total
/// fold sizes also differ by at most one.
pub fn stratified_folds(labels: &[usize], folds: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let mut members: [Vec<usize>; NUM_CLASSES] = Default::default();
    for (i, &c) in labels.iter().enumerate() {
        members[c].push(i);
    }
    for (c, m) in members.iter().enumerate() {
        if !m.is_empty() && m.len() < folds {
            return Err(Error::Stratification {
                class: Solver::from_index(c).map_or_else(|| c.to_string(), |s| s.to_string()),
                count: m.len(),
                folds,
            });
        }
    }
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for m in members.iter_mut() {
        m.shuffle(rng);
        for &i in m.iter() {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub repeat: usize,
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub accuracy: f64,
    pub kappa: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: ModelKind,
    pub spec: ModelSpec,
    pub cv: CvConfig,
    /// Label column the dataset was built from, when known.
    pub label: Option<Criterion>,
    pub n_samples: usize,
    pub accuracy_mean: f64,
    pub accuracy_sd: f64,
    pub kappa_mean: f64,
    pub kappa_sd: f64,
    /// Class order of the confusion rows/columns and the precision vector.
    pub classes: [Solver; NUM_CLASSES],
    /// Rows are true classes, columns predicted, summed over all test folds.
    pub confusion: Confusion,
    pub precision: [f64; NUM_CLASSES],
    /// Summed train and test time over all evaluations.
    pub modeling_seconds: f64,
    pub folds: Vec<FoldMetrics>,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Repeated stratified k-fold cross-validation of `spec` on `dataset`.
///
/// Repeat `r` partitions with the master seed on stream `r`. Means and
/// sample standard deviations are over all `folds × repeats` evaluations.
pub fn repeated_stratified_kfold(dataset: &LabeledDataset, spec: &ModelSpec, cv: &CvConfig) -> Result<EvalReport> {
    cv.validate()?;
    spec.validate()?;
    let labels = dataset.class_indices();
    let mut splits = Vec::with_capacity(cv.evaluations());
    for repeat in 0..cv.repeats {
        let mut rng = ChaCha8Rng::seed_from_u64(cv.seed);
        rng.set_stream(repeat as u64);
        let assignment = stratified_folds(&labels, cv.folds, &mut rng)?;
        for fold in 0..cv.folds {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| assignment[i] == fold);
            splits.push((repeat, fold, train, test));
        }
    }

    let outcomes = splits
        .par_iter()
        .map(|(repeat, fold, train, test)| -> Result<(FoldMetrics, Confusion)> {
            let start = Instant::now();
            let model = fit(&dataset.subset(train), spec)?;
            let predicted: Vec<usize> = test
                .iter()
                .map(|&i| model.predict_class(&dataset.features[i]).index())
                .collect();
            let seconds = start.elapsed().as_secs_f64();
            let truth: Vec<usize> = test.iter().map(|&i| labels[i]).collect();
            let confusion = confusion_matrix(&truth, &predicted)?;
            let (accuracy, kappa) = kappa_from_confusion(&confusion)?;
            let metrics = FoldMetrics {
                repeat: *repeat,
                fold: *fold,
                n_train: train.len(),
                n_test: test.len(),
                accuracy,
                kappa,
                seconds,
            };
            Ok((metrics, confusion))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut confusion = [[0; NUM_CLASSES]; NUM_CLASSES];
    for (_, m) in &outcomes {
        for (row, fold_row) in confusion.iter_mut().zip(m) {
            for (a, b) in row.iter_mut().zip(fold_row) {
                *a += b;
            }
        }
    }
    let folds: Vec<FoldMetrics> = outcomes.into_iter().map(|(f, _)| f).collect();
    let (accuracy_mean, accuracy_sd) = mean_sd(&folds.iter().map(|f| f.accuracy).collect::<Vec<_>>());
    let (kappa_mean, kappa_sd) = mean_sd(&folds.iter().map(|f| f.kappa).collect::<Vec<_>>());
    Ok(EvalReport {
        model: spec.kind(),
        spec: spec.clone(),
        cv: *cv,
        label: None,
        n_samples: dataset.len(),
        accuracy_mean,
        accuracy_sd,
        kappa_mean,
        kappa_sd,
        classes: Solver::ALL,
        confusion,
        precision: precision(&confusion),
        modeling_seconds: folds.iter().map(|f| f.seconds).sum(),
        folds,
    })
}

/// Best first: higher mean accuracy, then higher mean kappa, then model name.
pub fn rank_models(mut reports: Vec<EvalReport>) -> Vec<EvalReport> {
    reports.sort_by(|a, b| {
        b.accuracy_mean
            .total_cmp(&a.accuracy_mean)
            .then(b.kappa_mean.total_cmp(&a.kappa_mean))
            .then_with(|| a.model.name().cmp(b.model.name()))
    });
    reports
}

#[cfg(test)]
mod tests {
    use super::*;

    fn threshold_data(n: usize) -> LabeledDataset {
        let rows: Vec<_> = (0..n).map(|i| [(i % 7) as f64, i as f64, ((i * 37) % 11) as f64]).collect();
        let labels = (0..n)
            .map(|i| match i * 3 / n {
                0 => Solver::Dsa,
                1 => Solver::Nda,
                _ => Solver::Richardson,
            })
            .collect();
        LabeledDataset::new(rows, labels).unwrap()
    }

    #[test]
    fn folds_are_stratified() {
        let labels: Vec<usize> = (0..103).map(|i| if i < 60 { 0 } else if i < 90 { 1 } else { 2 }).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = stratified_folds(&labels, 4, &mut rng).unwrap();
        for (class, size) in [(0, 60.0), (1, 30.0), (2, 13.0)] {
            for f in 0..4 {
                let count = (0..labels.len()).filter(|&i| labels[i] == class && a[i] == f).count() as f64;
                assert!((count - size / 4.0).abs() < 1.0);
            }
        }
        let sizes: Vec<usize> = (0..4).map(|f| a.iter().filter(|&&x| x == f).count()).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn deficient_class_is_named() {
        let labels = [0, 0, 0, 0, 2, 2];
        let err = stratified_folds(&labels, 4, &mut ChaCha8Rng::seed_from_u64(0)).unwrap_err();
        assert!(err.to_string().contains("richardson"), "{err}");
    }

    #[test]
    fn protocol_counts_and_invariants() {
        let ds = threshold_data(60);
        let cv = CvConfig { folds: 3, repeats: 4, seed: 11 };
        let r = repeated_stratified_kfold(&ds, &ModelSpec::Knn { k: 1 }, &cv).unwrap();
        assert_eq!(r.folds.len(), 12);
        let total: u64 = r.confusion.iter().flatten().sum();
        assert_eq!(total, 4 * 60);
        let (acc, _) = kappa_from_confusion(&r.confusion).unwrap();
        let weighted = r.folds.iter().map(|f| f.accuracy * f.n_test as f64).sum::<f64>() / total as f64;
        assert!((acc - weighted).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_report() {
        let ds = threshold_data(45);
        let cv = CvConfig { folds: 3, repeats: 2, seed: 3 };
        let spec = ModelSpec::Lda;
        let mut a = repeated_stratified_kfold(&ds, &spec, &cv).unwrap();
        let mut b = repeated_stratified_kfold(&ds, &spec, &cv).unwrap();
        for r in [&mut a, &mut b] {
            r.modeling_seconds = 0.0;
            r.folds.iter_mut().for_each(|f| f.seconds = 0.0);
        }
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_config() {
        let ds = threshold_data(30);
        for cv in [CvConfig { folds: 1, repeats: 1, seed: 0 }, CvConfig { folds: 2, repeats: 0, seed: 0 }] {
            assert!(repeated_stratified_kfold(&ds, &ModelSpec::Lda, &cv).is_err());
        }
    }

    fn report(model: ModelKind, acc: f64, kappa: f64) -> EvalReport {
        EvalReport {
            model,
            spec: ModelSpec::defaults(model, 0),
            cv: CvConfig::default(),
            label: None,
            n_samples: 1,
            accuracy_mean: acc,
            accuracy_sd: 0.0,
            kappa_mean: kappa,
            kappa_sd: 0.0,
            classes: Solver::ALL,
            confusion: [[0; 3]; 3],
            precision: [0.0; 3],
            modeling_seconds: 0.0,
            folds: Vec::new(),
        }
    }

    #[test]
    fn ranking_order() {
        let r = rank_models(vec![report(ModelKind::Lda, 0.9, 0.5), report(ModelKind::Knn, 0.95, 0.1)]);
        assert_eq!(r[0].model, ModelKind::Knn);
        let r = rank_models(vec![report(ModelKind::Lda, 0.9, 0.8), report(ModelKind::Svm, 0.9, 0.9)]);
        assert_eq!(r[0].model, ModelKind::Svm);
        let r = rank_models(vec![report(ModelKind::Svm, 0.9, 0.9), report(ModelKind::Knn, 0.9, 0.9)]);
        assert_eq!(r[0].model, ModelKind::Knn);
        assert_eq!(rank_models(vec![report(ModelKind::Rf, 0.5, 0.5)]).len(), 1);
    }
}
