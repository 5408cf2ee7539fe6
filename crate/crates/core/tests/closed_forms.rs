//! Exactly solvable corners of the parameter plane.

use approx::assert_abs_diff_eq;
use rabi_core::solve::limits;
use rabi_core::{solve_point, RabiParams, SolverConfig};

fn solve(delta: f64, g: f64) -> rabi_core::PointSolution {
    solve_point(&RabiParams::normalized(delta, g).unwrap(), &SolverConfig::default()).unwrap()
}

#[test]
fn vanishing_splitting_gives_displaced_vacua() {
    for g in [0.5_f64, 1.0, 2.0] {
        let s = solve(1e-6, g);
        let (e, exact) = limits::zero_splitting(g);
        assert_abs_diff_eq!(s.root.energy, e, epsilon = 1e-5);
        assert_abs_diff_eq!(s.stats.mean_n, exact.mean_n, epsilon = 1e-4);
        assert_abs_diff_eq!(s.stats.var_n, exact.var_n, epsilon = 1e-4);
        assert_abs_diff_eq!(s.stats.overlap, exact.overlap, epsilon = 1e-3);
        assert_abs_diff_eq!(s.stats.r, 0.0, epsilon = 1e-3);
        assert_abs_diff_eq!(s.stats.product, 0.5, epsilon = 1e-4);
        assert_abs_diff_eq!(s.stats.mean_x.abs(), exact.mean_x, epsilon = 1e-4);
    }
}

#[test]
fn zero_coupling_is_exact() {
    for delta in [0.1, 1.0, 7.5] {
        let s = solve(delta, 0.0);
        let (e, exact) = limits::zero_coupling(delta);
        assert_abs_diff_eq!(s.root.energy, e, epsilon = 1e-12);
        assert_abs_diff_eq!(s.stats.mean_n, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.stats.r, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.stats.product, 0.5, epsilon = 1e-12);
        assert_eq!(s.stats.mandel_q(), None);
        for (a, b) in s.stats.values().into_iter().zip(exact.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}

#[test]
fn weak_coupling_perturbation() {
    // second order through |1,↑⟩: E = -Δ - g²/(1+2Δ), ⟨n⟩ = g²/(1+2Δ)²
    let (delta, g) = (1.0_f64, 0.01_f64);
    let s = solve(delta, g);
    assert_abs_diff_eq!(s.root.energy, -delta - g * g / (1.0 + 2.0 * delta), epsilon = 1e-8);
    approx::assert_relative_eq!(
        s.stats.mean_n,
        g * g / ((1.0 + 2.0 * delta) * (1.0 + 2.0 * delta)),
        max_relative = 1e-3
    );
}
