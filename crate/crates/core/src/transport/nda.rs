use super::{iterate, sweep, thomas_solve, SlabProblem, SolveOutcome, Solver, TransportState};
use crate::error::Result;
use crate::quadrature::AngularQuadrature;

const EDGE_FLUX_FLOOR: f64 = 1e-300;

/// Nonlinear diffusion acceleration: each outer iteration is one high-order
/// sweep followed by a drift-diffusion low-order solve whose consistency
/// parameters come from that sweep.
///
/// The consistency parameter at edge `i+1/2` is
/// `D̂ = (J + D·(φ_{i+1} − φ_i)/Δx) / ((φ_{i+1} + φ_i)/2)` with zero ghost
/// fluxes outside the slab. Dividing by the same two-cell average that the
/// drift term multiplies makes the low-order current equal the swept current
/// whenever `φ^LO = φ^HO`, so the converged low-order flux is the transport
/// solution.
pub fn solve_nda(problem: &SlabProblem, quadrature: &AngularQuadrature) -> Result<SolveOutcome> {
    let cells = problem.num_cells;
    let dx = problem.cell_width();
    let d = problem.diffusion_coefficient();
    let diff = d / (dx * dx);
    let sigma_a = problem.sigma_a();

    iterate(Solver::Nda, problem, quadrature, |phi_lo| {
        let swept = sweep(problem, quadrature, &problem.emission(phi_lo));
        let ho = &swept.scalar_flux;
        let cell = |i: isize| if i < 0 || i as usize >= cells { 0.0 } else { ho[i as usize] };

        let d_hat: Vec<f64> = (0..=cells)
            .map(|e| {
                let (left, right) = (cell(e as isize - 1), cell(e as isize));
                let denom = 0.5 * (left + right);
                if denom.abs() < EDGE_FLUX_FLOOR {
                    0.0
                } else {
                    (swept.edge_current[e] + d * (right - left) / dx) / denom
                }
            })
            .collect();

        let half_dx = 0.5 / dx;
        let mut lower = Vec::with_capacity(cells.saturating_sub(1));
        let mut upper = Vec::with_capacity(cells.saturating_sub(1));
        let mut diag = Vec::with_capacity(cells);
        for i in 0..cells {
            let (west, east) = (d_hat[i], d_hat[i + 1]);
            diag.push(2.0 * diff + (east - west) * half_dx + sigma_a);
            if i + 1 < cells {
                upper.push(-diff + east * half_dx);
            }
            if i > 0 {
                lower.push(-diff - west * half_dx);
            }
        }
        let rhs = vec![problem.source; cells];
        let scalar_flux = thomas_solve(&lower, &diag, &upper, &rhs)?;
        Ok(TransportState {
            scalar_flux,
            edge_angular_flux: swept.edge_angular_flux,
            edge_current: swept.edge_current,
            correction: Vec::new(),
            d_hat,
        })
    })
}
