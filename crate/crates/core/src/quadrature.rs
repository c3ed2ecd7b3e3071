//! Gauss–Legendre angular quadrature for discrete-ordinates sweeps.

use crate::error::{Error, Result};

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;

/// A symmetric angular quadrature on [-1, 1] with nodes in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularQuadrature {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl AngularQuadrature {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Iterator over `(index, mu, weight)` for directions with `mu > 0`.
    pub fn positive(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        let half = self.order / 2;
        (half..self.order).map(move |n| (n, self.nodes[n], self.weights[n]))
    }

    /// Iterator over `(index, mu, weight)` for directions with `mu < 0`.
    pub fn negative(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        (0..self.order / 2).map(move |n| (n, self.nodes[n], self.weights[n]))
    }

    /// Approximates `∫_{-1}^{1} f(μ) dμ`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&mu, &w)| w * f(mu))
            .sum()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    let nf = n as f64;
    let dp = nf * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Builds the `order`-point Gauss–Legendre rule.
///
/// Roots of `P_N` are found by Newton iteration from the asymptotic guesses
/// `cos(π(i - 1/4)/(N + 1/2))`; only the positive half is computed and the
/// negative half is mirrored, so the rule is exactly symmetric.
pub fn gauss_legendre(order: usize) -> Result<AngularQuadrature> {
    if order == 0 || order % 2 != 0 {
        return Err(Error::QuadratureOrder(order));
    }
    let n = order;
    let half = n / 2;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..half {
        // i = 0 gives the largest root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < NEWTON_TOL {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    Ok(AngularQuadrature {
        order,
        nodes,
        weights,
    })
}
