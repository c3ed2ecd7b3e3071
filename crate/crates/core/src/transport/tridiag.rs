use crate::error::{Error, Result};

const PIVOT_FLOOR: f64 = 1e-300;

/// Solves a tridiagonal system with the Thomas algorithm.
///
/// `lower[i]` multiplies `x[i]` in row `i + 1`; `upper[i]` multiplies
/// `x[i + 1]` in row `i`.
pub fn thomas_solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::Dimension("tridiagonal system must have n >= 1".into()));
    }
    if lower.len() != n - 1 || upper.len() != n - 1 || rhs.len() != n {
        return Err(Error::Dimension(format!(
            "tridiagonal sizes lower={}, diag={}, upper={}, rhs={}",
            lower.len(),
            n,
            upper.len(),
            rhs.len()
        )));
    }

    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];

    let mut pivot = diag[0];
    if pivot.abs() < PIVOT_FLOOR {
        return Err(Error::ZeroPivot { row: 0, pivot });
    }
    if n > 1 {
        c_prime[0] = upper[0] / pivot;
    }
    d_prime[0] = rhs[0] / pivot;

    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * c_prime[i - 1];
        if pivot.abs() < PIVOT_FLOOR {
            return Err(Error::ZeroPivot { row: i, pivot });
        }
        if i < n - 1 {
            c_prime[i] = upper[i] / pivot;
        }
        d_prime[i] = (rhs[i] - lower[i - 1] * d_prime[i - 1]) / pivot;
    }

    let mut x = d_prime;
    for i in (0..n - 1).rev() {
        x[i] -= c_prime[i] * x[i + 1];
    }
    Ok(x)
}
