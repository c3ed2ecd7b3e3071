//! One-speed slab transport with vacuum boundaries and three iterative
//! solvers: plain source iteration, diffusion synthetic acceleration and
//! nonlinear diffusion acceleration.

mod dsa;
mod nda;
mod richardson;
mod sweep;
mod tridiag;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::AngularQuadrature;

pub use dsa::solve_dsa;
pub use nda::solve_nda;
pub use richardson::solve_richardson;
pub use sweep::{sweep, SweepResult};
pub use tridiag::thomas_solve;

/// Iterative transport solver, ordered alphabetically.
///
/// The ordinal is also the class index used by the classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Dsa,
    Nda,
    Richardson,
}

impl Solver {
    pub const ALL: [Solver; 3] = [Solver::Dsa, Solver::Nda, Solver::Richardson];

    pub fn name(self) -> &'static str {
        match self {
            Solver::Dsa => "dsa",
            Solver::Nda => "nda",
            Solver::Richardson => "richardson",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Solver> {
        Solver::ALL.get(i).copied()
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "dsa" => Ok(Solver::Dsa),
            "nda" => Ok(Solver::Nda),
            "richardson" => Ok(Solver::Richardson),
            other => Err(format!("unknown solver '{other}' (expected richardson, dsa or nda)")),
        }
    }
}

/// A fixed-source slab problem with uniform material, mesh and source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlabProblem {
    /// Slab width in cm.
    pub width: f64,
    /// Total cross section in 1/cm.
    pub sigma_t: f64,
    /// Scattering ratio `c = σ_s/σ_t`.
    pub scattering_ratio: f64,
    /// Uniform isotropic source.
    pub source: f64,
    pub num_cells: usize,
    pub sn_order: usize,
    /// Relative L2 stopping tolerance on successive scalar fluxes.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for SlabProblem {
    /// The benchmark configuration: 10 cm slab, σ_t = 1, Q = 6, tolerance 1e-5.
    fn default() -> Self {
        SlabProblem {
            width: 10.0,
            sigma_t: 1.0,
            scattering_ratio: 0.0,
            source: 6.0,
            num_cells: 16,
            sn_order: 8,
            tolerance: 1e-5,
            max_sweeps: 10_000,
        }
    }
}

impl SlabProblem {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidProblem(msg));
        if !(self.width > 0.0 && self.width.is_finite()) {
            return fail(format!("width must be positive, got {}", self.width));
        }
        if !(self.sigma_t > 0.0 && self.sigma_t.is_finite()) {
            return fail(format!("sigma_t must be positive, got {}", self.sigma_t));
        }
        if !(0.0..=1.0).contains(&self.scattering_ratio) {
            return fail(format!("scattering ratio must lie in [0, 1], got {}", self.scattering_ratio));
        }
        if !(self.source >= 0.0 && self.source.is_finite()) {
            return fail(format!("source must be non-negative, got {}", self.source));
        }
        if !(self.tolerance > 0.0) {
            return fail(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if self.num_cells == 0 {
            return fail("num_cells must be positive".into());
        }
        if self.sn_order == 0 || self.sn_order % 2 != 0 {
            return fail(format!("S_N order must be a positive even integer, got {}", self.sn_order));
        }
        if self.max_sweeps == 0 {
            return fail("max_sweeps must be positive".into());
        }
        Ok(())
    }

    pub fn cell_width(&self) -> f64 {
        self.width / self.num_cells as f64
    }

    pub fn sigma_s(&self) -> f64 {
        self.scattering_ratio * self.sigma_t
    }

    pub fn sigma_a(&self) -> f64 {
        self.sigma_t - self.sigma_s()
    }

    pub fn diffusion_coefficient(&self) -> f64 {
        1.0 / (3.0 * self.sigma_t)
    }

    /// Emission density `(σ_s/2)·φ_i + Q/2` for a given scalar flux.
    pub fn emission(&self, scalar_flux: &[f64]) -> Vec<f64> {
        let half_s = 0.5 * self.sigma_s();
        let half_q = 0.5 * self.source;
        scalar_flux.iter().map(|phi| half_s * phi + half_q).collect()
    }
}

/// Iteration state materialized by a solver.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransportState {
    pub scalar_flux: Vec<f64>,
    /// `(num_cells + 1) × N`, row-major by edge.
    pub edge_angular_flux: Vec<f64>,
    pub edge_current: Vec<f64>,
    /// Last diffusion correction (DSA only).
    pub correction: Vec<f64>,
    /// Last consistency parameters at the edges (NDA only).
    pub d_hat: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub solver: Solver,
    pub sweeps: usize,
    pub runtime_seconds: f64,
    pub converged: bool,
    pub final_error: f64,
    pub state: TransportState,
}

impl SolveOutcome {
    pub fn scalar_flux(&self) -> &[f64] {
        &self.state.scalar_flux
    }
}

/// Runs the requested solver on `problem`.
pub fn solve(solver: Solver, problem: &SlabProblem, quadrature: &AngularQuadrature) -> Result<SolveOutcome> {
    match solver {
        Solver::Richardson => solve_richardson(problem, quadrature),
        Solver::Dsa => solve_dsa(problem, quadrature),
        Solver::Nda => solve_nda(problem, quadrature),
    }
}

/// Relative L2 change between successive scalar-flux iterates.
pub(crate) fn relative_change(new: &[f64], old: &[f64]) -> f64 {
    let (mut diff, mut norm) = (0.0, 0.0);
    for (a, b) in new.iter().zip(old) {
        diff += (a - b) * (a - b);
        norm += a * a;
    }
    if diff == 0.0 {
        0.0
    } else if norm == 0.0 {
        f64::INFINITY
    } else {
        (diff / norm).sqrt()
    }
}

pub(crate) fn check_inputs(problem: &SlabProblem, quadrature: &AngularQuadrature) -> Result<()> {
    problem.validate()?;
    if quadrature.order() != problem.sn_order {
        return Err(Error::InvalidProblem(format!(
            "quadrature order {} does not match S_N order {}",
            quadrature.order(),
            problem.sn_order
        )));
    }
    Ok(())
}

/// Drives an outer iteration `φ^k -> φ^{k+1}` until the relative change
/// drops below tolerance; each call of `step` performs exactly one sweep.
pub(crate) fn iterate<F>(
    solver: Solver,
    problem: &SlabProblem,
    quadrature: &AngularQuadrature,
    mut step: F,
) -> Result<SolveOutcome>
where
    F: FnMut(&[f64]) -> Result<TransportState>,
{
    let start = Instant::now();
    check_inputs(problem, quadrature)?;
    let mut phi = vec![0.0; problem.num_cells];
    let mut state = TransportState::default();
    let mut error = f64::INFINITY;
    let mut sweeps = 0;
    while sweeps < problem.max_sweeps {
        state = step(&phi)?;
        sweeps += 1;
        error = relative_change(&state.scalar_flux, &phi);
        phi.clone_from(&state.scalar_flux);
        if error < problem.tolerance {
            break;
        }
    }
    Ok(SolveOutcome {
        solver,
        sweeps,
        runtime_seconds: start.elapsed().as_secs_f64(),
        converged: error < problem.tolerance,
        final_error: error,
        state,
    })
}

/// Relative particle-balance residual `|Q·W − (σ_a Σφ_iΔx + J_R − J_L)| / (Q·W)`.
///
/// With `Q = 0` the absolute residual is returned.
pub fn particle_balance(problem: &SlabProblem, state: &TransportState) -> f64 {
    let dx = problem.cell_width();
    let absorption: f64 = problem.sigma_a() * state.scalar_flux.iter().sum::<f64>() * dx;
    let leakage = match (state.edge_current.first(), state.edge_current.last()) {
        (Some(left), Some(right)) => right - left,
        _ => 0.0,
    };
    let produced = problem.source * problem.width;
    let residual = (produced - (absorption + leakage)).abs();
    if produced == 0.0 {
        residual
    } else {
        residual / produced
    }
}
