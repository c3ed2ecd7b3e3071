//! Python bindings: transport solves, dataset generation, model training,
//! persistence, prediction and cross-validation.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use slabsel::dataset::{self, label_best, Criterion, FeatureGrid, TieBreak};
use slabsel::eval::{self, CvConfig};
use slabsel::ml::{self, LabeledDataset, ModelKind, ModelSpec, TrainedModel};
use slabsel::quadrature;
use slabsel::transport::{self, SlabProblem, Solver};
use slabsel::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Parse { .. } | Error::ModelFormat(_) => {
            PyIOError::new_err(e.to_string())
        }
        Error::ZeroPivot { .. } | Error::NoConvergedSolver { .. } | Error::Training(_) | Error::NonFiniteLoss { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

fn load_labeled(path: PathBuf, label: &str) -> PyResult<LabeledDataset> {
    let records = dataset::read_csv_file(&path).map_err(to_py)?;
    LabeledDataset::from_records(&records, parse::<Criterion>(label)?).map_err(to_py)
}

/// Gauss-Legendre nodes and weights of an even order, ascending nodes.
#[pyfunction]
fn gauss_legendre(order: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let q = quadrature::gauss_legendre(order).map_err(to_py)?;
    Ok((q.nodes().to_vec(), q.weights().to_vec()))
}

/// Solves one slab problem with `solver` ("richardson", "dsa" or "nda").
#[pyfunction]
#[pyo3(signature = (solver, sn_order, num_cells, scattering_ratio, *, width=10.0, sigma_t=1.0, source=6.0, tolerance=1e-5, max_sweeps=10_000))]
#[allow(clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    solver: &str,
    sn_order: usize,
    num_cells: usize,
    scattering_ratio: f64,
    width: f64,
    sigma_t: f64,
    source: f64,
    tolerance: f64,
    max_sweeps: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let solver: Solver = parse(solver)?;
    let problem = SlabProblem {
        width,
        sigma_t,
        scattering_ratio,
        source,
        num_cells,
        sn_order,
        tolerance,
        max_sweeps,
    };
    problem.validate().map_err(to_py)?;
    let q = quadrature::gauss_legendre(sn_order).map_err(to_py)?;
    let out = py.detach(|| transport::solve(solver, &problem, &q)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("solver", out.solver.name())?;
    d.set_item("sweeps", out.sweeps)?;
    d.set_item("converged", out.converged)?;
    d.set_item("runtime_seconds", out.runtime_seconds)?;
    d.set_item("final_error", out.final_error)?;
    d.set_item("balance_residual", transport::particle_balance(&problem, &out.state))?;
    d.set_item("scalar_flux", out.state.scalar_flux)?;
    Ok(d)
}

/// Generates and labels the benchmark grid, writes it to `path` and returns
/// the number of cases. Omitted axes use the default grid.
#[pyfunction]
#[pyo3(signature = (path, *, sn_orders=None, cell_counts=None, ratios=None, tolerance=1e-5, max_sweeps=10_000, jobs=1))]
fn generate_dataset(
    py: Python<'_>,
    path: PathBuf,
    sn_orders: Option<Vec<usize>>,
    cell_counts: Option<Vec<usize>>,
    ratios: Option<Vec<f64>>,
    tolerance: f64,
    max_sweeps: usize,
    jobs: usize,
) -> PyResult<usize> {
    let d = FeatureGrid::default();
    let grid = FeatureGrid {
        sn_orders: sn_orders.unwrap_or(d.sn_orders),
        cell_counts: cell_counts.unwrap_or(d.cell_counts),
        scattering_ratios: ratios.unwrap_or(d.scattering_ratios),
    };
    let template = SlabProblem {
        tolerance,
        max_sweeps,
        ..SlabProblem::default()
    };
    py.detach(|| -> Result<usize, Error> {
        let mut records = dataset::generate(&grid, &template, jobs)?;
        label_best(&mut records, Criterion::Sweeps, &TieBreak::default())?;
        label_best(&mut records, Criterion::Runtime, &TieBreak::default())?;
        dataset::write_csv_file(&records, &path)?;
        Ok(records.len())
    })
    .map_err(to_py)
}

/// `(solver, count, percent)` per label for a dataset file.
#[pyfunction]
#[pyo3(signature = (path, label="sweeps"))]
fn label_distribution(path: PathBuf, label: &str) -> PyResult<Vec<(String, usize, f64)>> {
    let records = dataset::read_csv_file(&path).map_err(to_py)?;
    Ok(dataset::label_distribution(&records, parse(label)?)
        .into_iter()
        .map(|(s, n, p)| (s.name().to_string(), n, p))
        .collect())
}

#[pyfunction]
fn accuracy(truth: Vec<String>, predicted: Vec<String>) -> PyResult<f64> {
    eval::accuracy(&truth, &predicted).map_err(to_py)
}

#[pyfunction]
fn cohen_kappa(truth: Vec<String>, predicted: Vec<String>) -> PyResult<f64> {
    eval::cohen_kappa(&truth, &predicted).map_err(to_py)
}

#[allow(clippy::too_many_arguments)]
fn build_spec(
    kind: &str,
    seed: u64,
    k: Option<usize>,
    svm_c: Option<f64>,
    gamma: Option<f64>,
    hidden: Option<usize>,
    learning_rate: Option<f64>,
    epochs: Option<usize>,
    trees: Option<usize>,
    feature_subset: Option<usize>,
    min_leaf: Option<usize>,
) -> PyResult<ModelSpec> {
    let mut spec = ModelSpec::defaults(parse::<ModelKind>(kind)?, seed);
    match &mut spec {
        ModelSpec::Lda => {}
        ModelSpec::Knn { k: kk } => *kk = k.unwrap_or(*kk),
        ModelSpec::Svm { c, gamma: g } => {
            *c = svm_c.unwrap_or(*c);
            *g = gamma.unwrap_or(*g);
        }
        ModelSpec::Mlp {
            hidden: h,
            learning_rate: lr,
            epochs: e,
            ..
        } => {
            *h = hidden.unwrap_or(*h);
            *lr = learning_rate.unwrap_or(*lr);
            *e = epochs.unwrap_or(*e);
        }
        ModelSpec::Rf {
            n_trees,
            feature_subset: fs,
            min_leaf: ml,
            ..
        } => {
            *n_trees = trees.unwrap_or(*n_trees);
            *fs = feature_subset.unwrap_or(*fs);
            *ml = min_leaf.unwrap_or(*ml);
        }
    }
    spec.validate().map_err(to_py)?;
    Ok(spec)
}

/// A trained solver recommender.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: TrainedModel,
}

#[pymethods]
impl PyModel {
    /// Trains `kind` (lda, knn, svm, mlp, rf) on a dataset file.
    #[staticmethod]
    #[pyo3(signature = (path, kind, label="sweeps", *, seed=1, k=None, svm_c=None, gamma=None, hidden=None, learning_rate=None, epochs=None, trees=None, feature_subset=None, min_leaf=None))]
    #[allow(clippy::too_many_arguments)]
    fn train(
        py: Python<'_>,
        path: PathBuf,
        kind: &str,
        label: &str,
        seed: u64,
        k: Option<usize>,
        svm_c: Option<f64>,
        gamma: Option<f64>,
        hidden: Option<usize>,
        learning_rate: Option<f64>,
        epochs: Option<usize>,
        trees: Option<usize>,
        feature_subset: Option<usize>,
        min_leaf: Option<usize>,
    ) -> PyResult<PyModel> {
        let spec = build_spec(kind, seed, k, svm_c, gamma, hidden, learning_rate, epochs, trees, feature_subset, min_leaf)?;
        let data = load_labeled(path, label)?;
        let inner = py.detach(|| ml::fit(&data, &spec)).map_err(to_py)?;
        Ok(PyModel { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<PyModel> {
        Ok(PyModel {
            inner: ml::load_model(&path).map_err(to_py)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        ml::save_model(&path, &self.inner).map_err(to_py)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().name()
    }

    /// Best solver name and per-class scores (dsa, nda, richardson).
    fn predict(&self, sn_order: usize, num_cells: usize, scattering_ratio: f64) -> PyResult<(String, Option<Vec<f64>>)> {
        if sn_order == 0 || num_cells == 0 || !(0.0..=1.0).contains(&scattering_ratio) {
            return Err(PyValueError::new_err(
                "sn_order and num_cells must be positive and scattering_ratio in [0, 1]",
            ));
        }
        let p = self.inner.predict(&[sn_order as f64, num_cells as f64, scattering_ratio]);
        Ok((p.class.name().to_string(), p.scores.map(|s| s.to_vec())))
    }

    /// Mean decrease in Gini impurity per feature (forests only).
    fn gini_importance(&self) -> PyResult<Vec<(&'static str, f64)>> {
        let imp = ml::gini_importance(&self.inner).map_err(to_py)?;
        Ok(ml::FEATURE_NAMES.into_iter().zip(imp).collect())
    }

    fn __repr__(&self) -> String {
        format!("Model(kind='{}')", self.kind())
    }
}

/// Repeated stratified k-fold cross-validation; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (path, kind, label="sweeps", *, folds=4, repeats=25, seed=1, k=None, svm_c=None, gamma=None, hidden=None, learning_rate=None, epochs=None, trees=None, feature_subset=None, min_leaf=None))]
#[allow(clippy::too_many_arguments)]
fn evaluate<'py>(
    py: Python<'py>,
    path: PathBuf,
    kind: &str,
    label: &str,
    folds: usize,
    repeats: usize,
    seed: u64,
    k: Option<usize>,
    svm_c: Option<f64>,
    gamma: Option<f64>,
    hidden: Option<usize>,
    learning_rate: Option<f64>,
    epochs: Option<usize>,
    trees: Option<usize>,
    feature_subset: Option<usize>,
    min_leaf: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = build_spec(kind, seed, k, svm_c, gamma, hidden, learning_rate, epochs, trees, feature_subset, min_leaf)?;
    let data = load_labeled(path, label)?;
    let cv = CvConfig { folds, repeats, seed };
    let mut report = py
        .detach(|| eval::repeated_stratified_kfold(&data, &spec, &cv))
        .map_err(to_py)?;
    report.label = Some(parse(label)?);
    let text = serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pymodule]
fn slabsel_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(gauss_legendre, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(generate_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(label_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(cohen_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_class::<PyModel>()?;
    Ok(())
}
