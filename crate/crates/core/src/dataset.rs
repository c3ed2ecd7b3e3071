//! Benchmark generation over the feature grid, best-solver labeling and the
//! dataset CSV format.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::transport::{solve, SlabProblem, Solver};

/// Column header of the dataset CSV.
pub const CSV_HEADER: [&str; 14] = [
    "sn_order",
    "num_cells",
    "scattering_ratio",
    "rich_sweeps",
    "dsa_sweeps",
    "nda_sweeps",
    "rich_runtime_s",
    "dsa_runtime_s",
    "nda_runtime_s",
    "rich_converged",
    "dsa_converged",
    "nda_converged",
    "best_sweeps",
    "best_runtime",
];

/// Column order of the per-solver groups in the CSV.
const CSV_SOLVERS: [Solver; 3] = [Solver::Richardson, Solver::Dsa, Solver::Nda];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureGrid {
    pub sn_orders: Vec<usize>,
    pub cell_counts: Vec<usize>,
    pub scattering_ratios: Vec<f64>,
}

impl Default for FeatureGrid {
    /// S_N ∈ {2,...,32}, cells ∈ {4,...,1024}, c ∈ {0.00, 0.01, ..., 1.00}: 4545 cases.
    fn default() -> Self {
        FeatureGrid {
            sn_orders: vec![2, 4, 8, 16, 32],
            cell_counts: (2..=10).map(|p| 1usize << p).collect(),
            scattering_ratios: (0..=100).map(|k| k as f64 / 100.0).collect(),
        }
    }
}

impl FeatureGrid {
    pub fn len(&self) -> usize {
        self.sn_orders.len() * self.cell_counts.len() * self.scattering_ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points as `(sn_order, num_cells, scattering_ratio)`, S_N outermost.
    pub fn points(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for &n in &self.sn_orders {
            for &cells in &self.cell_counts {
                for &c in &self.scattering_ratios {
                    out.push((n, cells, c));
                }
            }
        }
        out
    }
}

/// Measured cost of one solver on one case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverRun {
    pub sweeps: usize,
    pub runtime_seconds: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub sn_order: usize,
    pub num_cells: usize,
    pub scattering_ratio: f64,
    /// Indexed by [`Solver::index`].
    pub runs: [SolverRun; 3],
    pub best_by_sweeps: Option<Solver>,
    pub best_by_runtime: Option<Solver>,
}

impl CaseRecord {
    pub fn run(&self, solver: Solver) -> &SolverRun {
        &self.runs[solver.index()]
    }

    pub fn label(&self, criterion: Criterion) -> Option<Solver> {
        match criterion {
            Criterion::Sweeps => self.best_by_sweeps,
            Criterion::Runtime => self.best_by_runtime,
        }
    }

    pub fn features(&self) -> [f64; 3] {
        [self.sn_order as f64, self.num_cells as f64, self.scattering_ratio]
    }
}

/// Cost measure used to pick the best solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Sweeps,
    Runtime,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Sweeps => "sweeps",
            Criterion::Runtime => "runtime",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sweeps" => Ok(Criterion::Sweeps),
            "runtime" => Ok(Criterion::Runtime),
            other => Err(format!("unknown label criterion '{other}' (expected sweeps or runtime)")),
        }
    }
}

/// Preference order applied to exact ties, most preferred first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TieBreak(pub [Solver; 3]);

impl Default for TieBreak {
    /// Cheapest work per sweep first: richardson, dsa, nda.
    fn default() -> Self {
        TieBreak([Solver::Richardson, Solver::Dsa, Solver::Nda])
    }
}

/// Solves every grid point with all three solvers.
///
/// `jobs > 1` solves cases concurrently; leave it at 1 when runtimes will be
/// used for labeling so timings are not distorted by contention.
pub fn generate(grid: &FeatureGrid, template: &SlabProblem, jobs: usize) -> Result<Vec<CaseRecord>> {
    let points = grid.points();
    let run_case = |&(n, cells, c): &(usize, usize, f64)| -> Result<CaseRecord> {
        let problem = SlabProblem {
            sn_order: n,
            num_cells: cells,
            scattering_ratio: c,
            ..template.clone()
        };
        problem.validate()?;
        let quadrature = gauss_legendre(n)?;
        let mut runs = [SolverRun {
            sweeps: 0,
            runtime_seconds: 0.0,
            converged: false,
        }; 3];
        for solver in Solver::ALL {
            let out = solve(solver, &problem, &quadrature)?;
            runs[solver.index()] = SolverRun {
                sweeps: out.sweeps,
                runtime_seconds: out.runtime_seconds,
                converged: out.converged,
            };
        }
        Ok(CaseRecord {
            sn_order: n,
            num_cells: cells,
            scattering_ratio: c,
            runs,
            best_by_sweeps: None,
            best_by_runtime: None,
        })
    };

    if jobs <= 1 {
        points.iter().map(run_case).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidProblem(format!("cannot start {jobs} worker threads: {e}")))?;
        pool.install(|| points.par_iter().map(run_case).collect())
    }
}

/// The converged solver minimizing `criterion`, ties resolved by `tie_break`.
pub fn best_solver(record: &CaseRecord, criterion: Criterion, tie_break: &TieBreak) -> Result<Solver> {
    let mut best: Option<(Solver, f64)> = None;
    for &solver in &tie_break.0 {
        let run = record.run(solver);
        if !run.converged {
            continue;
        }
        let cost = match criterion {
            Criterion::Sweeps => run.sweeps as f64,
            Criterion::Runtime => run.runtime_seconds,
        };
        // strict comparison keeps the earlier (preferred) solver on ties
        if best.map_or(true, |(_, c)| cost < c) {
            best = Some((solver, cost));
        }
    }
    best.map(|(s, _)| s).ok_or(Error::NoConvergedSolver {
        sn_order: record.sn_order,
        num_cells: record.num_cells,
        scattering_ratio: record.scattering_ratio,
    })
}

/// Fills the label column for `criterion` on every record.
pub fn label_best(records: &mut [CaseRecord], criterion: Criterion, tie_break: &TieBreak) -> Result<()> {
    for record in records.iter_mut() {
        let best = best_solver(record, criterion, tie_break)?;
        match criterion {
            Criterion::Sweeps => record.best_by_sweeps = Some(best),
            Criterion::Runtime => record.best_by_runtime = Some(best),
        }
    }
    Ok(())
}

/// Count and percentage of each label, in class order (dsa, nda, richardson).
/// Unlabeled records are not counted.
pub fn label_distribution(records: &[CaseRecord], criterion: Criterion) -> Vec<(Solver, usize, f64)> {
    let mut counts = [0usize; 3];
    for label in records.iter().filter_map(|r| r.label(criterion)) {
        counts[label.index()] += 1;
    }
    let total: usize = counts.iter().sum();
    Solver::ALL
        .iter()
        .map(|&s| {
            let n = counts[s.index()];
            let pct = if total == 0 { 0.0 } else { 100.0 * n as f64 / total as f64 };
            (s, n, pct)
        })
        .collect()
}

/// Formats `x` like C's `%.17g`.
pub fn format_g17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_fraction(format!("{:.*}", decimals, x))
    } else {
        let m = trim_fraction(mantissa.to_string());
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_fraction(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Writes labeled records in the dataset CSV schema.
pub fn write_csv<W: Write>(records: &[CaseRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let label = |criterion: Criterion| {
            r.label(criterion).ok_or(Error::Unlabeled {
                sn_order: r.sn_order,
                num_cells: r.num_cells,
                scattering_ratio: r.scattering_ratio,
                criterion: criterion.name(),
            })
        };
        let best_sweeps = label(Criterion::Sweeps)?;
        let best_runtime = label(Criterion::Runtime)?;
        let mut row = vec![
            r.sn_order.to_string(),
            r.num_cells.to_string(),
            format_g17(r.scattering_ratio),
        ];
        row.extend(CSV_SOLVERS.iter().map(|&s| r.run(s).sweeps.to_string()));
        row.extend(CSV_SOLVERS.iter().map(|&s| format_g17(r.run(s).runtime_seconds)));
        row.extend(CSV_SOLVERS.iter().map(|&s| if r.run(s).converged { "1" } else { "0" }.to_string()));
        row.push(best_sweeps.to_string());
        row.push(best_runtime.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(records: &[CaseRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(records, std::io::BufWriter::new(file))
}

/// Parses the dataset CSV. `source` names the input in error messages.
pub fn read_csv<R: Read>(input: R, source: &Path) -> Result<Vec<CaseRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let parse_err = |line: u64, message: String| Error::Parse {
        path: source.to_path_buf(),
        line,
        message,
    };

    let mut records = Vec::new();
    let mut row = csv::StringRecord::new();
    let mut first = true;
    loop {
        let more = reader.read_record(&mut row).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        if !more {
            break;
        }
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != CSV_HEADER.len() {
            return Err(parse_err(
                line,
                format!("expected {} columns, found {}", CSV_HEADER.len(), row.len()),
            ));
        }
        if first {
            first = false;
            if row.iter().ne(CSV_HEADER.iter().copied()) {
                return Err(parse_err(line, format!("header must be: {}", CSV_HEADER.join(","))));
            }
            continue;
        }
        records.push(parse_row(&row).map_err(|m| parse_err(line, m))?);
    }
    if first {
        return Err(parse_err(1, "missing header row".into()));
    }
    Ok(records)
}

pub fn read_csv_file(path: &Path) -> Result<Vec<CaseRecord>> {
    let file = std::fs::File::open(path)?;
    read_csv(std::io::BufReader::new(file), path)
}

fn parse_row(row: &csv::StringRecord) -> std::result::Result<CaseRecord, String> {
    fn field<T: FromStr>(row: &csv::StringRecord, i: usize) -> std::result::Result<T, String> {
        row[i]
            .parse()
            .map_err(|_| format!("column {} ('{}'): cannot parse '{}'", i + 1, CSV_HEADER[i], &row[i]))
    }
    fn flag(row: &csv::StringRecord, i: usize) -> std::result::Result<bool, String> {
        match &row[i] {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(format!("column {} ('{}'): expected 0 or 1, found '{other}'", i + 1, CSV_HEADER[i])),
        }
    }

    let scattering_ratio: f64 = field(row, 2)?;
    if !(0.0..=1.0).contains(&scattering_ratio) {
        return Err(format!("scattering_ratio {scattering_ratio} outside [0, 1]"));
    }
    let mut runs = [SolverRun {
        sweeps: 0,
        runtime_seconds: 0.0,
        converged: false,
    }; 3];
    for (k, solver) in CSV_SOLVERS.iter().enumerate() {
        runs[solver.index()] = SolverRun {
            sweeps: field(row, 3 + k)?,
            runtime_seconds: field(row, 6 + k)?,
            converged: flag(row, 9 + k)?,
        };
    }
    Ok(CaseRecord {
        sn_order: field(row, 0)?,
        num_cells: field(row, 1)?,
        scattering_ratio,
        runs,
        best_by_sweeps: Some(field(row, 12)?),
        best_by_runtime: Some(field(row, 13)?),
    })
}
