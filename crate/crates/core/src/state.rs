//! Photonic branch states as real coefficient vectors over displaced number
//! states `|α, n⟩ = D(α)|n⟩`.
//!
//! Both branches live in the `+g` frame:
//!
//! ```text
//! |Δ,g,+⟩ ∝ Σ a_n |g,n⟩,          a_n = (-1)^n √(n!) K_n(x)
//! |Δ,g,-⟩ ∝ Σ (-1)^n b_n |g,n⟩,   b_n = √(n!) J_n(x)
//! ```
//!
//! so overlaps and cross moments need no displaced-state overlap kernels.
//! Global prefactors are dropped; every state is unit-normalized.

use serde::{Deserialize, Serialize};

use crate::error::{RabiError, Result};
use crate::params::{Branch, RabiParams};
use crate::spectral::extended::{compute_coefficients_extended, DoubleDouble, ExtendedRecurrence};
use crate::spectral::{CoefficientTable, RootKind, SpectralRoot};

/// Real amplitudes `c_n` over `D(α)|n⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockVector {
    pub coeffs: Vec<f64>,
    pub frame_displacement: f64,
}

impl FockVector {
    pub fn new(coeffs: Vec<f64>, frame_displacement: f64) -> Self {
        Self { coeffs, frame_displacement }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Scales to unit norm and returns the norm it had before.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            self.coeffs.iter_mut().for_each(|c| *c /= n);
        }
        n
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect(), self.frame_displacement)
    }

    /// Sum of two vectors in the same frame, shorter one zero-padded.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        check_frames(self, other)?;
        let len = self.len().max(other.len());
        let coeffs = (0..len)
            .map(|i| self.coeffs.get(i).copied().unwrap_or(0.0) + other.coeffs.get(i).copied().unwrap_or(0.0))
            .collect();
        Ok(Self::new(coeffs, self.frame_displacement))
    }
}

fn check_frames(u: &FockVector, v: &FockVector) -> Result<()> {
    if u.frame_displacement.to_bits() != v.frame_displacement.to_bits() {
        return Err(RabiError::FrameMismatch { left: u.frame_displacement, right: v.frame_displacement });
    }
    Ok(())
}

/// Frame lowering operator: `(a v)_n = √(n+1) v_{n+1}`.
pub fn apply_lowering(v: &FockVector) -> FockVector {
    let coeffs = v.coeffs.iter().enumerate().skip(1).map(|(n, c)| (n as f64).sqrt() * c).collect();
    FockVector::new(coeffs, v.frame_displacement)
}

/// Frame raising operator: `(a† v)_{n+1} = √(n+1) v_n`.
pub fn apply_raising(v: &FockVector) -> FockVector {
    let mut coeffs = Vec::with_capacity(v.len() + 1);
    coeffs.push(0.0);
    coeffs.extend(v.coeffs.iter().enumerate().map(|(n, c)| ((n + 1) as f64).sqrt() * c));
    FockVector::new(coeffs, v.frame_displacement)
}

pub fn inner(u: &FockVector, v: &FockVector) -> Result<f64> {
    check_frames(u, v)?;
    Ok(u.coeffs.iter().zip(&v.coeffs).map(|(a, b)| a * b).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateConfig {
    /// Largest relative tail accepted; also the depth the coefficients must
    /// reach before a rise counts as the onset of the growing solution.
    pub state_tail_tolerance: f64,
    /// Relative size below which coefficients count as negligible.
    pub negligible: f64,
    /// Consecutive negligible coefficients that end the expansion.
    pub negligible_run: usize,
    pub n_cap: usize,
}

impl Default for StateConfig {
    fn default() -> Self {
        Self { state_tail_tolerance: 1e-10, negligible: 1e-14, negligible_run: 4, n_cap: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchState {
    pub vector: FockVector,
    pub branch: Branch,
    pub source_root: SpectralRoot,
    pub truncation_n: usize,
    /// Relative magnitude of the last retained raw coefficient.
    pub tail_norm: f64,
    /// Norm of the raw coefficients before normalization.
    pub raw_norm: f64,
    /// Raw `a_n` or `(-1)^n b_n`, unnormalized.
    pub raw: Vec<f64>,
    pub table: Option<CoefficientTable>,
}

/// `½ ln n!` for `n = 0..=len-1`.
fn half_log_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut acc = 0.0;
    for n in 0..len {
        if n > 0 {
            acc += 0.5 * (n as f64).ln();
        }
        out.push(acc);
    }
    out
}

/// Raw branch coefficient from the table entry at index `n`.
pub fn raw_coefficient(table: &CoefficientTable, n: usize, branch: Branch, half_log_fact: f64) -> f64 {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let base = match branch {
        Branch::Plus => table.k[n],
        Branch::Minus => table.j[n],
    };
    sign * half_log_fact.exp() * base
}

/// Decides where the expansion is cut: after a run of negligible
/// coefficients, or at the local minimum where a sufficiently decayed
/// sequence starts to grow again (the forward recurrence picking up its
/// dominant solution).
#[derive(Debug)]
struct TailWatch {
    peak: f64,
    run: usize,
    last: [f64; 2],
    n: usize,
    tail_tolerance: f64,
    negligible: f64,
    negligible_run: usize,
}

impl TailWatch {
    fn new(cfg: &StateConfig) -> Self {
        Self {
            peak: 0.0,
            run: 0,
            last: [f64::INFINITY; 2],
            n: 0,
            tail_tolerance: cfg.state_tail_tolerance,
            negligible: cfg.negligible,
            negligible_run: cfg.negligible_run,
        }
    }

    /// Feeds `|raw_n|`; returns the last index to keep once decided.
    fn push(&mut self, m: f64) -> Option<usize> {
        let n = self.n;
        self.n += 1;
        self.peak = self.peak.max(m);
        let [m2, m1] = self.last;
        self.last = [m1, m];
        if n >= 2 && m > m1 && m1 < m2 && m1 < self.tail_tolerance * self.peak {
            return Some(n - 1);
        }
        if m < self.negligible * self.peak {
            self.run += 1;
            if self.run >= self.negligible_run {
                return Some(n);
            }
        } else {
            self.run = 0;
        }
        None
    }
}

pub fn build_branch_state(
    params: &RabiParams,
    root: &SpectralRoot,
    branch: Branch,
    cfg: &StateConfig,
) -> Result<BranchState> {
    if root.kind == RootKind::DecoupledLimit {
        return Ok(decoupled_branch(root, branch));
    }
    let mut watch = TailWatch::new(cfg);
    let mut magnitudes = Vec::new();
    let mut cut = None;
    let mut half_log = 0.0;
    let x = DoubleDouble::from_pair(root.x_root, root.x_correction);
    for (n, (k, j)) in ExtendedRecurrence::new(params.delta, params.g, x).enumerate().take(cfg.n_cap + 1) {
        if n > 0 {
            half_log += 0.5 * (n as f64).ln();
        }
        let base = match branch {
            Branch::Plus => k.to_f64(),
            Branch::Minus => j.to_f64(),
        };
        let m = (half_log.exp() * base).abs();
        if !m.is_finite() {
            break;
        }
        magnitudes.push(m);
        if let Some(c) = watch.push(m) {
            cut = Some(c);
            break;
        }
    }
    let cut = match cut {
        Some(c) => c,
        None => {
            // cap reached or overflow: accept the deepest point if it decayed enough
            let (n_min, m_min) =
                magnitudes.iter().copied().enumerate().skip(1).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap_or((0, 0.0));
            let peak = magnitudes[..=n_min].iter().copied().fold(0.0, f64::max);
            if !(m_min < cfg.state_tail_tolerance * peak) {
                return Err(RabiError::TailDivergence { n_cap: cfg.n_cap, threshold: cfg.state_tail_tolerance });
            }
            n_min
        }
    };
    build_branch_state_with_len(params, root, branch, cut + 1)
}

/// Same construction with the retained length fixed by the caller.
pub fn build_branch_state_with_len(
    params: &RabiParams,
    root: &SpectralRoot,
    branch: Branch,
    len: usize,
) -> Result<BranchState> {
    if root.kind == RootKind::DecoupledLimit {
        return Ok(decoupled_branch(root, branch));
    }
    let len = len.max(1);
    let table = compute_coefficients_extended(params, root.x_root, root.x_correction, len - 1)?;
    let logs = half_log_factorials(len);
    let raw: Vec<f64> = (0..len).map(|n| raw_coefficient(&table, n, branch, logs[n])).collect();
    let peak = raw.iter().map(|r| r.abs()).fold(0.0, f64::max);
    build_truncated(params, root, branch, table, raw, len, peak)
}

fn build_truncated(
    params: &RabiParams,
    root: &SpectralRoot,
    branch: Branch,
    mut table: CoefficientTable,
    mut raw: Vec<f64>,
    len: usize,
    peak: f64,
) -> Result<BranchState> {
    raw.truncate(len);
    table.k.truncate(len);
    table.j.truncate(len);
    table.n_used = len - 1;
    let tail_norm = raw[len - 1].abs() / peak;
    let mut vector = FockVector::new(raw.clone(), params.g);
    let raw_norm = vector.normalize();
    Ok(BranchState {
        vector,
        branch,
        source_root: *root,
        truncation_n: len,
        tail_norm,
        raw_norm,
        raw,
        table: Some(table),
    })
}

/// `g → 0`: the ground state is `|0⟩ ⊗ |↓⟩` and `|↓⟩ = (|+⟩ - |−⟩)/√2`, so
/// both branches are the vacuum, with opposite signs.
fn decoupled_branch(root: &SpectralRoot, branch: Branch) -> BranchState {
    let sign = match branch {
        Branch::Plus => 1.0,
        Branch::Minus => -1.0,
    };
    BranchState {
        vector: FockVector::new(vec![sign], 0.0),
        branch,
        source_root: *root,
        truncation_n: 1,
        tail_norm: 0.0,
        raw_norm: std::f64::consts::FRAC_1_SQRT_2,
        raw: vec![sign * std::f64::consts::FRAC_1_SQRT_2],
        table: None,
    }
}
