use super::{iterate, sweep, SlabProblem, SolveOutcome, Solver, TransportState};
use crate::error::Result;
use crate::quadrature::AngularQuadrature;

/// Source iteration: sweep with the scattering source of the previous iterate.
pub fn solve_richardson(problem: &SlabProblem, quadrature: &AngularQuadrature) -> Result<SolveOutcome> {
    iterate(Solver::Richardson, problem, quadrature, |phi| {
        let swept = sweep(problem, quadrature, &problem.emission(phi));
        Ok(TransportState {
            scalar_flux: swept.scalar_flux,
            edge_angular_flux: swept.edge_angular_flux,
            edge_current: swept.edge_current,
            ..TransportState::default()
        })
    })
}
