use crate::error::{RabiError, Result};
use crate::params::{Parity, RabiParams};

use super::extended::{g_function_extended, DoubleDouble};
use super::{g_function, RootKind, RootWarning, SpectralConfig, SpectralRoot};

/// Sign of `G` at `x`, or `None` where the series cannot be evaluated.
fn sample(params: &RabiParams, parity: Parity, x: f64, cfg: &SpectralConfig) -> Option<f64> {
    g_function(params, x, parity, cfg).ok().map(|v| v.value).filter(|v| v.is_finite())
}

#[inline]
fn sign_change(a: f64, b: f64) -> bool {
    (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0) || a == 0.0 || b == 0.0
}

/// Evenly spaced grid over `[lo, hi]`, pushed off every integer by at least
/// `guard`, sorted and deduplicated.
fn deflected_grid(lo: f64, hi: f64, points: usize, guard: f64) -> Vec<f64> {
    let points = points.max(2);
    let step = (hi - lo) / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points)
        .map(|i| if i + 1 == points { hi } else { lo + step * i as f64 })
        .filter_map(|x| {
            let n = x.round();
            if (x - n).abs() >= guard {
                return Some(x);
            }
            let left = n - guard;
            let right = n + guard;
            if x <= n && left >= lo {
                Some(left)
            } else if right <= hi {
                Some(right)
            } else if left >= lo {
                Some(left)
            } else {
                None
            }
        })
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Sign changes inside the sliver between `pole ∓ guard` and `pole ∓ floor`,
/// sampled geometrically towards the pole.
fn pole_sliver(
    params: &RabiParams,
    parity: Parity,
    pole: f64,
    from_left: bool,
    cfg: &SpectralConfig,
    out: &mut Vec<(f64, f64)>,
) {
    let side = if from_left { -1.0 } else { 1.0 };
    let mut dist = cfg.pole_guard;
    let mut prev: Option<(f64, f64)> = None;
    while dist >= cfg.pole_floor {
        let x = pole + side * dist;
        if let Some(v) = sample(params, parity, x, cfg) {
            if let Some((px, pv)) = prev {
                if sign_change(pv, v) {
                    out.push(if px < x { (px, x) } else { (x, px) });
                }
            }
            prev = Some((x, v));
        }
        dist *= 1e-2;
    }
}

/// Brackets of sign changes of `G±` over `[x_lo, x_hi]` that contain no pole.
pub fn bracket_roots(
    params: &RabiParams,
    parity: Parity,
    x_lo: f64,
    x_hi: f64,
    scan_points: usize,
    cfg: &SpectralConfig,
) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if !(x_lo < x_hi) || params.g == 0.0 {
        return out;
    }
    let guard = cfg.pole_guard;
    let grid = deflected_grid(x_lo, x_hi, scan_points, guard);
    let values: Vec<Option<f64>> = grid.iter().map(|&x| sample(params, parity, x, cfg)).collect();

    for i in 1..grid.len() {
        let (a, b) = (grid[i - 1], grid[i]);
        let first_pole = a.floor() + 1.0;
        if first_pole >= b {
            if let (Some(fa), Some(fb)) = (values[i - 1], values[i]) {
                if sign_change(fa, fb) {
                    out.push((a, b));
                }
            }
            continue;
        }
        // split the cell at every pole it contains; only pole-free pieces count
        let mut left = (a, values[i - 1]);
        let mut pole = first_pole;
        while pole < b {
            let right_end = pole - guard;
            if right_end > left.0 {
                let fr = sample(params, parity, right_end, cfg);
                if let (Some(fl), Some(fr)) = (left.1, fr) {
                    if sign_change(fl, fr) {
                        out.push((left.0, right_end));
                    }
                }
            }
            let start = pole + guard;
            left = (start, if start < b { sample(params, parity, start, cfg) } else { None });
            pole += 1.0;
        }
        if left.0 < b {
            if let (Some(fl), Some(fb)) = (left.1, values[i]) {
                if sign_change(fl, fb) {
                    out.push((left.0, b));
                }
            }
        }
    }

    // slivers next to every pole whose guard zone the range reaches
    let first = (x_lo - guard).ceil().max(0.0);
    let mut pole = first;
    while pole <= x_hi + guard {
        if x_lo < pole - guard && x_hi >= pole - guard * (1.0 + 1e-9) {
            pole_sliver(params, parity, pole, true, cfg, &mut out);
        }
        if x_lo <= pole + guard * (1.0 + 1e-9) && x_hi > pole + guard {
            pole_sliver(params, parity, pole, false, cfg, &mut out);
        }
        pole += 1.0;
    }

    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    out
}

/// Below this relative size the 64-bit value of `G` may carry the wrong sign.
const SIGN_TRUST: f64 = 1e-6;

/// `G(x)` relative to its largest term; double-double when the 64-bit value
/// is too small to trust.
fn trusted_value(params: &RabiParams, parity: Parity, x: f64, cfg: &SpectralConfig) -> Result<f64> {
    let v = g_function(params, x, parity, cfg)?;
    if v.relative().abs() > SIGN_TRUST {
        return Ok(v.relative());
    }
    let (e, max_term) = g_function_extended(params, x.into(), parity, cfg.tail_run, cfg.n_cap)?;
    Ok(e.to_f64() / max_term)
}

/// Bisection of a sign-changing bracket down to adjacent floating point
/// numbers. When both ends share a sign and differ by more than a factor of
/// four, the geometric mean is used so roots hugging a pole resolve in
/// relative precision. A final double-double secant step between the two
/// adjacent ends supplies `x_correction`.
pub fn refine_root(
    params: &RabiParams,
    parity: Parity,
    bracket: (f64, f64),
    cfg: &SpectralConfig,
) -> Result<SpectralRoot> {
    let (mut a, mut b) = if bracket.0 <= bracket.1 { bracket } else { (bracket.1, bracket.0) };
    let mut fa = trusted_value(params, parity, a, cfg)?;
    let mut fb = trusted_value(params, parity, b, cfg)?;
    if !sign_change(fa, fb) {
        return Err(RabiError::BracketInvalid { lo: a, hi: b });
    }

    for _ in 0..4096 {
        if fa == 0.0 {
            b = a;
            break;
        }
        if fb == 0.0 {
            a = b;
            break;
        }
        let same_sign = (a < 0.0 && b < 0.0) || (a > 0.0 && b > 0.0);
        let (lo_abs, hi_abs) = (a.abs().min(b.abs()), a.abs().max(b.abs()));
        let m =
            if same_sign && hi_abs > 4.0 * lo_abs { a.signum() * (lo_abs * hi_abs).sqrt() } else { a + 0.5 * (b - a) };
        if !(m > a && m < b) {
            break;
        }
        let fm = trusted_value(params, parity, m, cfg)?;
        if (fm < 0.0) == (fa < 0.0) && fm != 0.0 {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }

    let ext = |x: f64| g_function_extended(params, x.into(), parity, cfg.tail_run, cfg.n_cap);
    let (ga, _) = ext(a)?;
    let (gb, _) = ext(b)?;
    let (x_root, x_correction) = if a == b || ga.hi == 0.0 {
        (a, 0.0)
    } else if gb.hi == 0.0 {
        (b, 0.0)
    } else {
        // zero of the chord through (a, G(a)) and (b, G(b))
        let da = DoubleDouble::from(a);
        let root = da + (DoubleDouble::from(b) - da) * (ga / (ga - gb));
        let x_root = root.to_f64();
        (x_root, (root - DoubleDouble::from(x_root)).to_f64())
    };
    let (g_root, max_term) =
        g_function_extended(params, DoubleDouble::from_pair(x_root, x_correction), parity, cfg.tail_run, cfg.n_cap)?;
    let residual = g_root.hi.abs() / max_term;
    if !(residual < cfg.root_tolerance) {
        return Err(RabiError::RootResidual { x: x_root, residual });
    }
    let nearest = x_root.round();
    let warning = (nearest >= 0.0 && (x_root - nearest).abs() < cfg.pole_guard)
        .then_some(RootWarning::JuddianSuspect { pole: nearest as u32 });

    Ok(SpectralRoot {
        x_root,
        x_correction,
        parity,
        index_m: 0,
        energy: x_root - params.g * params.g,
        residual,
        kind: RootKind::Spectral,
        warning,
    })
}

/// Every root of `G±` found in `[x_lo, x_hi]`, ordered, with `index_m` set.
pub fn spectral_roots(
    params: &RabiParams,
    parity: Parity,
    x_lo: f64,
    x_hi: f64,
    cfg: &SpectralConfig,
) -> Result<Vec<SpectralRoot>> {
    bracket_roots(params, parity, x_lo, x_hi, cfg.scan_points, cfg)
        .into_iter()
        .enumerate()
        .map(|(i, br)| {
            refine_root(params, parity, br, cfg).map(|mut r| {
                r.index_m = i;
                r
            })
        })
        .collect()
}

/// Leftmost bracket in `[lo, 0)`: linear scan first, then the sliver
/// below the pole at zero.
fn lowest_bracket(params: &RabiParams, parity: Parity, lo: f64, cfg: &SpectralConfig) -> Option<(f64, f64)> {
    let hi = -cfg.pole_guard;
    let grid = deflected_grid(lo, hi, cfg.scan_points, cfg.pole_guard);
    let mut prev: Option<(f64, f64)> = None;
    for &x in &grid {
        if let Some(v) = sample(params, parity, x, cfg) {
            if let Some((px, pv)) = prev {
                if sign_change(pv, v) {
                    return Some((px, x));
                }
            }
            prev = Some((x, v));
        }
    }
    let mut sliver = Vec::new();
    pole_sliver(params, parity, 0.0, true, cfg, &mut sliver);
    sliver.into_iter().min_by(|p, q| p.0.total_cmp(&q.0))
}

/// Lowest eigenvalue over both parity sectors.
///
/// Every eigenvalue obeys `E >= -Δ - g²`, so `x = E + g²` lies in
/// `[-Δ, 0)` for the ground state; the scan covers `[-Δ - 1, 0)` and widens
/// once before giving up.
pub fn ground_solution(params: &RabiParams, cfg: &SpectralConfig) -> Result<SpectralRoot> {
    if params.g < cfg.g_min {
        return Ok(SpectralRoot::decoupled(params));
    }
    let mut lo = -params.delta - 1.0;
    for _attempt in 0..2 {
        let mut best: Option<SpectralRoot> = None;
        for parity in Parity::BOTH {
            if let Some(br) = lowest_bracket(params, parity, lo, cfg) {
                let root = refine_root(params, parity, br, cfg)?;
                if best.is_none_or(|b| root.energy < b.energy) {
                    best = Some(root);
                }
            }
        }
        if let Some(root) = best {
            return Ok(root);
        }
        lo -= params.delta + 1.0;
    }
    Err(RabiError::NoRootFound { lo, hi: 0.0 })
}
