//! Spectral-function route to the Rabi spectrum.
//!
//! The coefficients `K_n(x)` follow the forward three-term recurrence
//!
//! ```text
//! n K_n = f_{n-1}(x) K_{n-1} - K_{n-2},    K_{-1} = 0, K_0 = 1,
//! f_n(x) = 2g + (n - x + Δ² / (x - n)) / (2g),
//! ```
//!
//! with `J_n = Δ / (x - n) K_n`. Eigenvalues are the zeros `x_m` of
//! `G±(x) = Σ (K_n ∓ J_n) gⁿ`, with energies `E_m = x_m - g²`. `G±` has simple
//! poles at the non-negative integers, so scanning never places a grid point
//! within `pole_guard` of one and never reports a sign change that straddles
//! a pole.

pub mod extended;
mod scan;

use serde::{Deserialize, Serialize};

pub use scan::{bracket_roots, ground_solution, refine_root, spectral_roots};

use crate::error::{RabiError, Result};
use crate::params::{Parity, RabiParams};

/// Closest approach to an integer pole at which the recurrence is still
/// evaluated. Closer points are rejected with [`RabiError::PoleProximity`].
pub const MIN_POLE_DISTANCE: f64 = 1e-150;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    /// Scan grids are deflected at least this far off every integer pole.
    pub pole_guard: f64,
    /// Deepest approach to a pole when scanning the sliver next to it.
    pub pole_floor: f64,
    pub series_tolerance: f64,
    /// Consecutive sub-tolerance terms required before the series is cut.
    pub tail_run: usize,
    pub n_cap: usize,
    /// Bound on `|G(x_root)|` relative to the largest series term.
    pub root_tolerance: f64,
    pub scan_points: usize,
    /// Below this coupling the decoupled closed form is used.
    pub g_min: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            pole_guard: 1e-6,
            pole_floor: 1e-150,
            series_tolerance: 1e-14,
            tail_run: 4,
            n_cap: 400,
            root_tolerance: 1e-12,
            scan_points: 64,
            g_min: 1e-3,
        }
    }
}

/// `K_0..K_N` and `J_0..J_N` evaluated at a trial point `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub x: f64,
    pub k: Vec<f64>,
    pub j: Vec<f64>,
    pub n_used: usize,
    /// `(|K_N| + |J_N|) g^N` for the last stored index.
    pub tail_estimate: f64,
    delta: f64,
    g: f64,
}

impl CoefficientTable {
    pub fn params(&self) -> (f64, f64) {
        (self.delta, self.g)
    }

    /// Largest normalized defect of `n K_n = f_{n-1} K_{n-1} - K_{n-2}` over
    /// the stored indices.
    pub fn recurrence_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 1..self.k.len() {
            let km2 = if n >= 2 { self.k[n - 2] } else { 0.0 };
            let lhs = n as f64 * self.k[n];
            let fk = f_coefficient(self.delta, self.g, self.x, n - 1) * self.k[n - 1];
            let scale = lhs.abs().max(fk.abs()).max(1.0);
            worst = worst.max((lhs - fk + km2).abs() / scale);
        }
        worst
    }

    /// Largest relative deviation of `K_n` from a double-double re-evaluation.
    pub fn extended_deviation(&self) -> f64 {
        let reference = extended::recompute_k(self.delta, self.g, self.x, self.n_used);
        self.k
            .iter()
            .zip(&reference)
            .map(|(&k, &r)| {
                let scale = r.abs().max(f64::MIN_POSITIVE);
                (k - r).abs() / scale
            })
            .fold(0.0, f64::max)
    }
}

/// `f_n(x) = 2g + (n - x + Δ²/(x - n)) / (2g)`.
#[inline]
pub fn f_coefficient(delta: f64, g: f64, x: f64, n: usize) -> f64 {
    let nf = n as f64;
    2.0 * g + (nf - x + delta * delta / (x - nf)) / (2.0 * g)
}

fn check_pole(x: f64, n_max: usize) -> Result<()> {
    let nearest = x.round();
    if nearest >= 0.0 && nearest <= n_max as f64 && (x - nearest).abs() < MIN_POLE_DISTANCE {
        return Err(RabiError::PoleProximity { x, pole: nearest as u32 });
    }
    Ok(())
}

/// Streams `(K_n, J_n)` for `n = 0, 1, ...`.
#[derive(Debug, Clone)]
pub(crate) struct Recurrence {
    delta: f64,
    g: f64,
    x: f64,
    n: usize,
    k_prev: f64,
    k_prev2: f64,
}

impl Recurrence {
    pub(crate) fn new(params: &RabiParams, x: f64) -> Self {
        Self { delta: params.delta, g: params.g, x, n: 0, k_prev: 0.0, k_prev2: 0.0 }
    }
}

impl Iterator for Recurrence {
    type Item = (f64, f64);

    fn next(&mut self) -> Option<(f64, f64)> {
        let n = self.n;
        let k = if n == 0 {
            1.0
        } else {
            let f = f_coefficient(self.delta, self.g, self.x, n - 1);
            (f * self.k_prev - self.k_prev2) / n as f64
        };
        self.k_prev2 = self.k_prev;
        self.k_prev = k;
        self.n += 1;
        let j = self.delta / (self.x - n as f64) * k;
        Some((k, j))
    }
}

pub fn compute_coefficients(params: &RabiParams, x: f64, n_max: usize) -> Result<CoefficientTable> {
    if params.g == 0.0 {
        return Err(RabiError::ZeroCoupling);
    }
    check_pole(x, n_max)?;
    let (k, j): (Vec<f64>, Vec<f64>) = Recurrence::new(params, x).take(n_max + 1).unzip();
    let gn = params.g.powi(n_max as i32);
    let tail_estimate = (k[n_max].abs() + j[n_max].abs()) * gn;
    Ok(CoefficientTable { x, k, j, n_used: n_max, tail_estimate, delta: params.delta, g: params.g })
}

/// One evaluation of `G±(x)` with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GValue {
    pub value: f64,
    /// Index of the last summed term.
    pub n_used: usize,
    pub max_term: f64,
    /// Magnitude of the last summed term.
    pub tail_estimate: f64,
}

impl GValue {
    pub fn relative(&self) -> f64 {
        self.value / self.max_term
    }
}

#[inline]
fn series_term(parity: Parity, k: f64, j: f64) -> f64 {
    match parity {
        Parity::Plus => k - j,
        Parity::Minus => k + j,
    }
}

/// Truncated `G±(x)`; the sum stops once `tail_run` consecutive terms fall
/// below `series_tolerance` times the running maximum.
pub fn g_function(params: &RabiParams, x: f64, parity: Parity, cfg: &SpectralConfig) -> Result<GValue> {
    if params.g == 0.0 {
        return Err(RabiError::ZeroCoupling);
    }
    check_pole(x, cfg.n_cap)?;
    let mut sum = 0.0;
    let mut max_term: f64 = 0.0;
    let mut run = 0;
    let mut gn = 1.0;
    for (n, (k, j)) in Recurrence::new(params, x).enumerate().take(cfg.n_cap + 1) {
        let term = series_term(parity, k, j) * gn;
        if !term.is_finite() {
            return Err(RabiError::NonFinite { x });
        }
        sum += term;
        max_term = max_term.max(term.abs());
        if term.abs() < cfg.series_tolerance * max_term {
            run += 1;
        } else {
            run = 0;
        }
        if run >= cfg.tail_run {
            return Ok(GValue { value: sum, n_used: n, max_term, tail_estimate: term.abs() });
        }
        gn *= params.g;
    }
    Err(RabiError::SeriesNoConverge { x, n_cap: cfg.n_cap })
}

/// `G±(x)` summed over exactly `n_terms` terms, without a tail criterion.
pub fn g_function_fixed(params: &RabiParams, x: f64, parity: Parity, n_terms: usize) -> Result<f64> {
    if params.g == 0.0 {
        return Err(RabiError::ZeroCoupling);
    }
    check_pole(x, n_terms)?;
    let mut gn = 1.0;
    let mut sum = 0.0;
    for (k, j) in Recurrence::new(params, x).take(n_terms) {
        sum += series_term(parity, k, j) * gn;
        gn *= params.g;
    }
    Ok(sum)
}

/// How a [`SpectralRoot`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    Spectral,
    /// `g` below `g_min`: ground state `|0⟩ ⊗ |↓⟩` with `E = -Δ`.
    DecoupledLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootWarning {
    /// The root sits within `pole_guard` of an integer; it may be a
    /// degenerate (Juddian) point or a near-degenerate cat doublet.
    JuddianSuspect { pole: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralRoot {
    pub x_root: f64,
    /// Low-order part of the root: the zero lies at `x_root + x_correction`
    /// to double-double accuracy.
    pub x_correction: f64,
    pub parity: Parity,
    /// Ordinal of the root among the roots of its parity in the scanned window.
    pub index_m: usize,
    pub energy: f64,
    /// `|G(x_root + x_correction)|` relative to the largest series term.
    pub residual: f64,
    pub kind: RootKind,
    pub warning: Option<RootWarning>,
}

impl SpectralRoot {
    pub(crate) fn decoupled(params: &RabiParams) -> Self {
        let energy = -params.delta;
        Self {
            x_root: energy + params.g * params.g,
            x_correction: 0.0,
            parity: Parity::Minus,
            index_m: 0,
            energy,
            residual: 0.0,
            kind: RootKind::DecoupledLimit,
            warning: None,
        }
    }

    pub fn same_source(&self, other: &SpectralRoot) -> bool {
        self.x_root.to_bits() == other.x_root.to_bits()
            && self.x_correction.to_bits() == other.x_correction.to_bits()
            && self.parity == other.parity
            && self.kind == other.kind
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(delta: f64, g: f64) -> RabiParams {
        RabiParams::normalized(delta, g).unwrap()
    }

    #[test]
    fn first_coefficients_by_hand() {
        let t = compute_coefficients(&p(1.0, 0.5), -1.0, 1).unwrap();
        assert_eq!(t.k[0], 1.0);
        // f_0(-1) = 1 + (0 + 1 - 1) = 1
        assert!((t.k[1] - 1.0).abs() < 1e-15);
        assert_eq!(t.j[0], -1.0);
        assert_eq!(t.k.len(), 2);
    }

    #[test]
    fn j_relation_holds() {
        let params = p(0.7, 1.3);
        let t = compute_coefficients(&params, -0.35, 30).unwrap();
        for n in 0..=30 {
            let expect = params.delta / (t.x - n as f64) * t.k[n];
            assert!((t.j[n] - expect).abs() <= 1e-15 * expect.abs());
        }
    }

    #[test]
    fn zero_coupling_rejected() {
        let params = p(1.0, 0.0);
        assert_eq!(compute_coefficients(&params, -0.5, 4), Err(RabiError::ZeroCoupling));
        assert_eq!(g_function(&params, -0.5, Parity::Minus, &SpectralConfig::default()), Err(RabiError::ZeroCoupling));
    }

    #[test]
    fn exact_pole_rejected() {
        let err = compute_coefficients(&p(1.0, 1.0), 3.0, 10).unwrap_err();
        assert_eq!(err, RabiError::PoleProximity { x: 3.0, pole: 3 });
        // poles beyond the table length are irrelevant
        assert!(compute_coefficients(&p(1.0, 1.0), 3.0, 2).is_ok());
    }

    #[test]
    fn midpoint_between_poles_is_finite() {
        let v = g_function(&p(1.0, 1.0), 0.5, Parity::Minus, &SpectralConfig::default()).unwrap();
        assert!(v.value.is_finite());
    }

    #[test]
    fn small_parameters_converge_quickly() {
        let params = p(0.1, 0.1);
        let cfg = SpectralConfig::default();
        let x = -params.delta - 0.5;
        let v = g_function(&params, x, Parity::Minus, &cfg).unwrap();
        assert!(v.n_used < 50, "n_used = {}", v.n_used);
        let doubled = SpectralConfig { n_cap: 2 * cfg.n_cap, ..cfg };
        let w = g_function(&params, x, Parity::Minus, &doubled).unwrap();
        assert!((v.value - w.value).abs() <= 1e-12 * v.value.abs());
    }

    #[test]
    fn cap_reached_reports_no_convergence() {
        let cfg = SpectralConfig { n_cap: 5, ..Default::default() };
        let err = g_function(&p(1.0, 3.0), -0.5, Parity::Plus, &cfg).unwrap_err();
        assert!(matches!(err, RabiError::SeriesNoConverge { n_cap: 5, .. }));
    }

    #[test]
    fn decoupled_root_energy() {
        let r = SpectralRoot::decoupled(&p(1.0, 0.0));
        assert_eq!(r.energy, -1.0);
        assert_eq!(r.parity, Parity::Minus);
        assert_eq!(r.kind, RootKind::DecoupledLimit);
    }
}
