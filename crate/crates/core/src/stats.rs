//! Photon statistics of the projected branch states.
//!
//! States are stored in a frame displaced by `α`, so the laboratory
//! annihilation operator acts as `a = ã + α` with `ã` the frame operator.
//! Quadratures are `x = (a + a†)/√2` and `p = (a - a†)/(i√2)`.

use serde::{Deserialize, Serialize};

use crate::error::{RabiError, Result};
use crate::state::{apply_lowering, apply_raising, inner, BranchState, FockVector};

/// Laboratory-frame moments of a real state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabMoments {
    /// `⟨a⟩`
    pub a: f64,
    /// `⟨a²⟩`
    pub a2: f64,
    /// `⟨a†a⟩`
    pub n: f64,
    /// `⟨(a†a)²⟩`
    pub n2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonStatistics {
    pub mean_n: f64,
    pub var_n: f64,
    /// `Δn² - ⟨n⟩`; positive means super-Poissonian.
    pub q_excess: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub dx: f64,
    pub dp: f64,
    pub product: f64,
    /// Squeezing parameter `-½ ln(Δp/Δx)`.
    pub r: f64,
    /// Magnitude of the overlap between the two branch states.
    pub overlap: f64,
    pub cov_xp: f64,
}

/// `a v` in the laboratory frame, `(ã + α) v`.
fn lab_lower(v: &FockVector) -> FockVector {
    let mut out = v.scaled(v.frame_displacement);
    for (o, l) in out.coeffs.iter_mut().zip(apply_lowering(v).coeffs) {
        *o += l;
    }
    out
}

/// `a† v` in the laboratory frame, `(ã† + α) v`.
fn lab_raise(v: &FockVector) -> FockVector {
    let mut out = apply_raising(v);
    for (o, c) in out.coeffs.iter_mut().zip(&v.coeffs) {
        *o += v.frame_displacement * c;
    }
    out
}

pub fn lab_moments_of(v: &FockVector) -> LabMoments {
    let av = lab_lower(v);
    let aav = lab_lower(&av);
    let nv = lab_raise(&av);
    // same frame by construction
    let a = inner(v, &av).unwrap_or(f64::NAN);
    let a2 = inner(v, &aav).unwrap_or(f64::NAN);
    LabMoments { a, a2, n: av.norm_sqr(), n2: nv.norm_sqr() }
}

pub fn lab_moments(state: &BranchState) -> LabMoments {
    lab_moments_of(&state.vector)
}

/// Variances measured about the frame origin; they do not depend on the
/// displacement, and avoid cancelling `⟨x²⟩` against `⟨x⟩²`.
fn frame_quadrature_variances(v: &FockVector) -> (f64, f64) {
    let low = apply_lowering(v);
    let lowlow = apply_lowering(&low);
    let a = inner(v, &FockVector::new(low.coeffs.clone(), v.frame_displacement)).unwrap_or(f64::NAN);
    let a2 = inner(v, &lowlow).unwrap_or(f64::NAN);
    let n = low.norm_sqr();
    let x_mean = std::f64::consts::SQRT_2 * a;
    let x2 = (2.0 * a2 + 2.0 * n + 1.0) / 2.0;
    let p2 = (2.0 * n + 1.0 - 2.0 * a2) / 2.0;
    (x2 - x_mean * x_mean, p2)
}

impl PhotonStatistics {
    /// Panel from laboratory moments of the reported branch, quadrature
    /// variances, and the branch overlap.
    pub fn from_parts(m: &LabMoments, var_x: f64, var_p: f64, overlap: f64) -> Self {
        let mean_x = std::f64::consts::SQRT_2 * m.a;
        // real amplitudes: Im⟨a⟩ and Im⟨a²⟩ vanish identically
        let mean_p = 0.0;
        let cov_xp = 0.0 - mean_x * mean_p;
        let dx = var_x.max(0.0).sqrt();
        let dp = var_p.max(0.0).sqrt();
        let var_n = m.n2 - m.n * m.n;
        Self {
            mean_n: m.n,
            var_n,
            q_excess: var_n - m.n,
            mean_x,
            mean_p,
            dx,
            dp,
            product: dx * dp,
            r: -0.5 * (dp / dx).ln(),
            overlap: overlap.abs(),
            cov_xp,
        }
    }

    /// Panel computed with the laboratory-frame formulas
    /// `Δx² = ⟨x²⟩ - ⟨x⟩²`, `Δp² = ⟨p²⟩`.
    pub fn from_moments(m: &LabMoments, overlap: f64) -> Self {
        let mean_x = std::f64::consts::SQRT_2 * m.a;
        let x2 = (2.0 * m.a2 + 2.0 * m.n + 1.0) / 2.0;
        let p2 = (2.0 * m.n + 1.0 - 2.0 * m.a2) / 2.0;
        Self::from_parts(m, x2 - mean_x * mean_x, p2, overlap)
    }

    /// `Q = (Δn² - ⟨n⟩)/⟨n⟩`, undefined for an (almost) empty mode.
    pub fn mandel_q(&self) -> Option<f64> {
        (self.mean_n >= 1e-12).then(|| self.q_excess / self.mean_n)
    }

    /// Field names in a fixed order, matching [`PhotonStatistics::values`].
    pub const FIELDS: [&'static str; 11] =
        ["mean_n", "var_n", "q_excess", "mean_x", "mean_p", "dx", "dp", "product", "r", "overlap", "cov_xp"];

    pub fn values(&self) -> [f64; 11] {
        [
            self.mean_n,
            self.var_n,
            self.q_excess,
            self.mean_x,
            self.mean_p,
            self.dx,
            self.dp,
            self.product,
            self.r,
            self.overlap,
            self.cov_xp,
        ]
    }
}

/// Statistics of one branch alone (overlap set to 1).
pub fn branch_statistics(state: &BranchState) -> PhotonStatistics {
    let m = lab_moments(state);
    let (vx, vp) = frame_quadrature_variances(&state.vector);
    PhotonStatistics::from_parts(&m, vx, vp, 1.0)
}

/// Full panel reported on the minus branch, with the overlap of the two.
pub fn photon_statistics(plus: &BranchState, minus: &BranchState) -> Result<PhotonStatistics> {
    if !plus.source_root.same_source(&minus.source_root) {
        return Err(RabiError::RootMismatch);
    }
    let overlap = inner(&plus.vector, &minus.vector)?;
    let m = lab_moments(minus);
    let (vx, vp) = frame_quadrature_variances(&minus.vector);
    Ok(PhotonStatistics::from_parts(&m, vx, vp, overlap))
}

/// `(ΔI)² = Δx² cos²φ + Δp² sin²φ` for `I = (a e^{-iφ} + a† e^{iφ})/√2`.
pub fn quadrature_variance(stats: &PhotonStatistics, phi: f64) -> Result<f64> {
    if stats.cov_xp.abs() > 1e-8 {
        return Err(RabiError::CrossTermViolation { cov: stats.cov_xp });
    }
    let (s, c) = phi.sin_cos();
    Ok(stats.dx * stats.dx * c * c + stats.dp * stats.dp * s * s)
}

/// `Var(I)` by applying `I` to the state directly. With real amplitudes,
/// `I|ψ⟩ = [cos φ (a + a†)|ψ⟩ + i sin φ (a† - a)|ψ⟩] / √2`.
pub fn direct_quadrature_variance(v: &FockVector, phi: f64) -> f64 {
    let av = lab_lower(v);
    let adv = lab_raise(v);
    let len = av.len().max(adv.len());
    let get = |w: &FockVector, i: usize| w.coeffs.get(i).copied().unwrap_or(0.0);
    let (s, c) = phi.sin_cos();
    let mut re_sq = 0.0;
    let mut im_sq = 0.0;
    let mut mean = 0.0;
    for i in 0..len {
        let re = c * (get(&av, i) + get(&adv, i)) / std::f64::consts::SQRT_2;
        let im = s * (get(&adv, i) - get(&av, i)) / std::f64::consts::SQRT_2;
        re_sq += re * re;
        im_sq += im * im;
        mean += get(v, i) * re;
    }
    re_sq + im_sq - mean * mean
}
