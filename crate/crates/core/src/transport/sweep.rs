use super::SlabProblem;
use crate::quadrature::AngularQuadrature;

/// Result of one discrete-ordinates transport sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Cell-centered scalar flux.
    pub scalar_flux: Vec<f64>,
    /// Edge angular flux, `(num_cells + 1) × N`, row-major by edge.
    pub edge_angular_flux: Vec<f64>,
    /// Net current at each of the `num_cells + 1` edges.
    pub edge_current: Vec<f64>,
}

impl SweepResult {
    /// Scalar flux at edge `e`, integrated from the edge angular fluxes.
    pub fn edge_scalar_flux(&self, quadrature: &AngularQuadrature, e: usize) -> f64 {
        let n = quadrature.order();
        self.edge_angular_flux[e * n..(e + 1) * n]
            .iter()
            .zip(quadrature.weights())
            .map(|(psi, w)| w * psi)
            .sum()
    }
}

/// One diamond-difference sweep with vacuum inflow at both faces.
///
/// `emission[i]` is the full isotropic emission density of cell `i`,
/// `(σ_s/2)·φ_i + Q/2`.
pub fn sweep(problem: &SlabProblem, quadrature: &AngularQuadrature, emission: &[f64]) -> SweepResult {
    let cells = problem.num_cells;
    assert_eq!(emission.len(), cells, "emission density needs one value per cell");
    let order = quadrature.order();
    let dx = problem.cell_width();
    let half_sigma = 0.5 * problem.sigma_t;

    let mut scalar_flux = vec![0.0; cells];
    let mut edge_psi = vec![0.0; (cells + 1) * order];

    for (n, &mu) in quadrature.nodes().iter().enumerate() {
        let w = quadrature.weights()[n];
        let streaming = mu.abs() / dx;
        let keep = streaming - half_sigma;
        let inv = 1.0 / (streaming + half_sigma);
        let mut psi_in = 0.0;
        if mu > 0.0 {
            edge_psi[n] = 0.0;
            for i in 0..cells {
                let psi_out = (keep * psi_in + emission[i]) * inv;
                scalar_flux[i] += w * 0.5 * (psi_in + psi_out);
                edge_psi[(i + 1) * order + n] = psi_out;
                psi_in = psi_out;
            }
        } else {
            edge_psi[cells * order + n] = 0.0;
            for i in (0..cells).rev() {
                let psi_out = (keep * psi_in + emission[i]) * inv;
                scalar_flux[i] += w * 0.5 * (psi_in + psi_out);
                edge_psi[i * order + n] = psi_out;
                psi_in = psi_out;
            }
        }
    }

    let edge_current = edge_psi
        .chunks_exact(order)
        .map(|psi| {
            psi.iter()
                .zip(quadrature.nodes().iter().zip(quadrature.weights()))
                .map(|(p, (mu, w))| w * mu * p)
                .sum()
        })
        .collect();

    SweepResult {
        scalar_flux,
        edge_angular_flux: edge_psi,
        edge_current,
    }
}
