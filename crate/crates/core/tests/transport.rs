use slabsel::quadrature::gauss_legendre;
use slabsel::transport::{
    particle_balance, solve, solve_dsa, solve_nda, solve_richardson, sweep, thomas_solve, SlabProblem, Solver,
};

fn problem(n: usize, cells: usize, c: f64) -> SlabProblem {
    SlabProblem {
        sn_order: n,
        num_cells: cells,
        scattering_ratio: c,
        ..SlabProblem::default()
    }
}

fn linf_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

/// Dense Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let m = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= m * a[k][j];
            }
            b[i] -= m * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

#[test]
fn thomas_matches_dense_elimination() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for n in [1usize, 2, 5, 17, 64] {
        let lower: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let upper: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let diag: Vec<f64> = (0..n).map(|_| 2.5 + rng.gen_range(0.0..1.0)).collect();
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            dense[i][i] = diag[i];
            if i + 1 < n {
                dense[i][i + 1] = upper[i];
                dense[i + 1][i] = lower[i];
            }
        }
        let x = thomas_solve(&lower, &diag, &upper, &rhs).unwrap();
        let oracle = dense_solve(dense, rhs);
        for (a, b) in x.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12, "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn pure_absorber_converges_in_two_sweeps() {
    for (n, cells) in [(2, 4), (8, 128), (32, 1024)] {
        let p = problem(n, cells, 0.0);
        let q = gauss_legendre(n).unwrap();
        let rich = solve_richardson(&p, &q).unwrap();
        let dsa = solve_dsa(&p, &q).unwrap();
        let nda = solve_nda(&p, &q).unwrap();
        assert_eq!(rich.sweeps, 2);
        assert_eq!(dsa.sweeps, 2);
        assert!(nda.sweeps <= 3);
        assert_eq!(rich.final_error, 0.0);
        // no scattering: DSA correction vanishes identically
        assert_eq!(rich.scalar_flux(), dsa.scalar_flux());
        assert!(dsa.state.correction.iter().all(|&f| f == 0.0));
    }
}

#[test]
fn first_sweep_is_the_uncollided_solution() {
    let p = problem(8, 64, 0.0);
    let q = gauss_legendre(8).unwrap();
    let swept = sweep(&p, &q, &p.emission(&vec![0.0; 64]));
    let rich = solve_richardson(&p, &q).unwrap();
    assert_eq!(swept.scalar_flux, rich.state.scalar_flux);
}

#[test]
fn richardson_sweeps_grow_with_scattering() {
    let q = gauss_legendre(8).unwrap();
    let counts: Vec<usize> = [0.1, 0.5, 0.99]
        .iter()
        .map(|&c| solve_richardson(&problem(8, 128, c), &q).unwrap().sweeps)
        .collect();
    assert!(counts[0] < counts[1] && counts[1] < counts[2], "{counts:?}");
}

#[test]
fn accelerators_beat_source_iteration_at_high_scattering() {
    let p = problem(8, 128, 0.99);
    let q = gauss_legendre(8).unwrap();
    let rich = solve_richardson(&p, &q).unwrap();
    let dsa = solve_dsa(&p, &q).unwrap();
    let nda = solve_nda(&p, &q).unwrap();
    assert!(rich.converged && dsa.converged && nda.converged);
    assert!(dsa.sweeps <= 30, "dsa {}", dsa.sweeps);
    assert!(nda.sweeps <= 40, "nda {}", nda.sweeps);
    assert!(nda.sweeps.abs_diff(dsa.sweeps) <= 10);
    assert!(rich.sweeps > 5 * dsa.sweeps);
}

#[test]
fn converged_fluxes_agree() {
    let q = gauss_legendre(8).unwrap();
    let p = problem(8, 128, 0.9);
    let rich = solve_richardson(&p, &q).unwrap();
    let dsa = solve_dsa(&p, &q).unwrap();
    assert!(linf_rel(dsa.scalar_flux(), rich.scalar_flux()) < 1e-3);

    let p = problem(8, 64, 0.5);
    let rich = solve_richardson(&p, &q).unwrap();
    let nda = solve_nda(&p, &q).unwrap();
    assert!(linf_rel(nda.scalar_flux(), rich.scalar_flux()) < 1e-3);
}

#[test]
fn nda_consistency_parameters_reproduce_swept_current() {
    // At convergence the low-order edge current built from D̂ equals the
    // high-order current from the last sweep.
    let p = problem(4, 32, 0.7);
    let q = gauss_legendre(4).unwrap();
    let out = solve_nda(&p, &q).unwrap();
    let phi = out.scalar_flux();
    let dx = p.cell_width();
    let d = p.diffusion_coefficient();
    let at = |i: isize| if i < 0 || i as usize >= phi.len() { 0.0 } else { phi[i as usize] };
    for e in 0..=phi.len() {
        let (l, r) = (at(e as isize - 1), at(e as isize));
        let j_lo = -d * (r - l) / dx + out.state.d_hat[e] * 0.5 * (l + r);
        let j_ho = out.state.edge_current[e];
        assert!((j_lo - j_ho).abs() < 1e-3 * j_ho.abs().max(1.0), "edge {e}: {j_lo} vs {j_ho}");
    }
}

#[test]
fn pure_scatterer_leaks_the_whole_source() {
    let p = problem(8, 128, 1.0);
    let q = gauss_legendre(8).unwrap();
    for solver in Solver::ALL {
        let out = solve(solver, &p, &q).unwrap();
        assert!(out.converged);
        let leak = out.state.edge_current[128] - out.state.edge_current[0];
        assert!((leak - 60.0).abs() / 60.0 < 1e-3, "{solver}: leakage {leak}");
        assert!(particle_balance(&p, &out.state) < 1e-3);
    }
}

#[test]
fn balance_in_a_pure_absorber_on_a_fine_mesh() {
    let p = problem(32, 1024, 0.0);
    let q = gauss_legendre(32).unwrap();
    let out = solve_richardson(&p, &q).unwrap();
    assert!(particle_balance(&p, &out.state) <= 1e-3);
}

#[test]
fn zero_source_balance_is_absolute() {
    let p = SlabProblem { source: 0.0, ..problem(4, 8, 0.5) };
    let q = gauss_legendre(4).unwrap();
    let out = solve_richardson(&p, &q).unwrap();
    assert!(out.converged);
    assert_eq!(out.sweeps, 1);
    assert_eq!(particle_balance(&p, &out.state), 0.0);
}

#[test]
fn sweep_cap_reports_unconverged() {
    let p = SlabProblem { max_sweeps: 5, ..problem(8, 64, 0.99) };
    let q = gauss_legendre(8).unwrap();
    let out = solve_richardson(&p, &q).unwrap();
    assert!(!out.converged);
    assert_eq!(out.sweeps, 5);
    assert!(out.final_error >= p.tolerance);
}

#[test]
fn solvers_are_deterministic() {
    let p = problem(16, 64, 0.8);
    let q = gauss_legendre(16).unwrap();
    for solver in Solver::ALL {
        let a = solve(solver, &p, &q).unwrap();
        let b = solve(solver, &p, &q).unwrap();
        assert_eq!(a.sweeps, b.sweeps);
        assert_eq!(a.state, b.state);
    }
}

#[test]
fn mismatched_quadrature_is_rejected() {
    let p = problem(8, 16, 0.5);
    let q = gauss_legendre(4).unwrap();
    assert!(solve_richardson(&p, &q).is_err());
}

#[test]
fn converged_flux_is_positive_on_resolved_meshes() {
    let q = gauss_legendre(8).unwrap();
    for solver in Solver::ALL {
        let out = solve(solver, &problem(8, 128, 0.9), &q).unwrap();
        assert!(out.scalar_flux().iter().all(|&v| v > 0.0));
    }
}
