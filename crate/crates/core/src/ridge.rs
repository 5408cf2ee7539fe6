//! Ridge of a swept field: per-`g` argmax over `Δ` and its quadratic fit.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{RabiError, Result};
use crate::solve::SolverConfig;
use crate::sweep::{sweep_point, Method, SweepRecord};

/// Distinct sorted values of one coordinate.
fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Checks that records cover every `(Δ, g)` pair exactly once and returns the
/// axes.
pub fn grid_axes(records: &[SweepRecord]) -> Result<(Vec<f64>, Vec<f64>)> {
    let deltas = distinct(records.iter().map(|r| r.delta));
    let gs = distinct(records.iter().map(|r| r.g));
    if deltas.len() * gs.len() != records.len() {
        return Err(RabiError::NonRectangularGrid(format!(
            "{} records for {} Δ values × {} g values",
            records.len(),
            deltas.len(),
            gs.len()
        )));
    }
    let mut seen = vec![false; records.len()];
    for r in records {
        let i = deltas.binary_search_by(|d| d.total_cmp(&r.delta)).expect("value from the same set");
        let j = gs.binary_search_by(|g| g.total_cmp(&r.g)).expect("value from the same set");
        let k = i * gs.len() + j;
        if seen[k] {
            return Err(RabiError::NonRectangularGrid(format!("duplicate point (Δ={}, g={})", r.delta, r.g)));
        }
        seen[k] = true;
    }
    Ok((deltas, gs))
}

/// Abscissa of the vertex of the parabola through three points.
pub fn parabola_vertex((x0, y0): (f64, f64), (x1, y1): (f64, f64), (x2, y2): (f64, f64)) -> Option<f64> {
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if !(curvature < 0.0) {
        return None;
    }
    // p(x) = y0 + d01 (x - x0) + curvature (x - x0)(x - x1)
    Some(0.5 * (x0 + x1) - d01 / (2.0 * curvature))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ridge {
    /// `(g, Δ*)` per accepted column.
    pub points: Vec<(f64, f64)>,
    /// `g` of columns whose maximum sits on the `Δ` boundary.
    pub excluded: Vec<f64>,
}

/// Per `g` column, the `Δ` maximizing `field`, refined through the three grid
/// points around the discrete maximum.
pub fn extract_ridge(records: &[SweepRecord], field: &str) -> Result<Ridge> {
    let (deltas, gs) = grid_axes(records)?;
    let mut columns: Vec<Vec<(f64, f64)>> = vec![Vec::new(); gs.len()];
    for r in records {
        if let Some(v) = r.field(field)?.filter(|v| v.is_finite()) {
            let j = gs.binary_search_by(|g| g.total_cmp(&r.g)).expect("value from the same set");
            columns[j].push((r.delta, v));
        }
    }
    let short: Vec<f64> = gs.iter().zip(&columns).filter(|(_, c)| c.len() < 3).map(|(&g, _)| g).collect();
    if !short.is_empty() || deltas.len() < 3 {
        return Err(RabiError::GridIncomplete { columns: if short.is_empty() { gs } else { short } });
    }

    let mut ridge = Ridge { points: Vec::new(), excluded: Vec::new() };
    for (&g, col) in gs.iter().zip(columns.iter_mut()) {
        col.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (k, _) = col
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(b.0.cmp(&a.0)))
            .expect("column has at least three points");
        if k == 0 || k + 1 == col.len() {
            ridge.excluded.push(g);
            continue;
        }
        let delta_star = parabola_vertex(col[k - 1], col[k], col[k + 1])
            .map(|x| x.clamp(col[k - 1].0, col[k + 1].0))
            .unwrap_or(col[k].0);
        ridge.points.push((g, delta_star));
    }
    Ok(ridge)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeFit {
    pub points: Vec<(f64, f64)>,
    /// `(c2, c1, c0)` of `Δ* ≈ c2 g² + c1 g + c0`.
    pub coeffs: [f64; 3],
    pub rms_residual: f64,
    /// Critical curve `Δ = 2g²`.
    pub reference_curve: [f64; 3],
}

impl RidgeFit {
    pub fn evaluate(&self, g: f64) -> f64 {
        let [c2, c1, c0] = self.coeffs;
        (c2 * g + c1) * g + c0
    }

    /// Gradient of the residual sum of squares at the fitted coefficients.
    pub fn gradient(&self) -> [f64; 3] {
        let mut grad = [0.0; 3];
        for &(g, d) in &self.points {
            let e = self.evaluate(g) - d;
            grad[0] += 2.0 * e * g * g;
            grad[1] += 2.0 * e * g;
            grad[2] += 2.0 * e;
        }
        grad
    }
}

/// Least squares on the monomials `(g², g, 1)` via the normal equations.
pub fn fit_quadratic(points: &[(f64, f64)]) -> Result<RidgeFit> {
    if points.len() < 3 || distinct(points.iter().map(|p| p.0)).len() < 3 {
        return Err(RabiError::DegenerateFit);
    }
    // centre and scale g so the normal matrix stays well conditioned
    let n = points.len() as f64;
    let mean = points.iter().map(|p| p.0).sum::<f64>() / n;
    let scale = points.iter().map(|p| (p.0 - mean).abs()).fold(0.0, f64::max);
    let mut ata = Matrix3::zeros();
    let mut aty = Vector3::zeros();
    for &(g, d) in points {
        let t = (g - mean) / scale;
        let row = Vector3::new(t * t, t, 1.0);
        ata += row * row.transpose();
        aty += row * d;
    }
    let chol = ata.cholesky().ok_or(RabiError::DegenerateFit)?;
    let b = chol.solve(&aty);
    if b.iter().any(|v| !v.is_finite()) {
        return Err(RabiError::DegenerateFit);
    }
    // back to monomials in g: t = (g - m)/s
    let (s2, m) = (scale * scale, mean);
    let c2 = b[0] / s2;
    let c1 = b[1] / scale - 2.0 * b[0] * m / s2;
    let c0 = b[0] * m * m / s2 - b[1] * m / scale + b[2];
    let mut fit =
        RidgeFit { points: points.to_vec(), coeffs: [c2, c1, c0], rms_residual: 0.0, reference_curve: [2.0, 0.0, 0.0] };
    let sse: f64 = points.iter().map(|&(g, d)| (fit.evaluate(g) - d).powi(2)).sum();
    fit.rms_residual = (sse / n).sqrt();
    Ok(fit)
}

/// Re-solves each ridge point by golden-section search over
/// `[Δ* - width, Δ* + width]` at fixed `g`.
pub fn refine_ridge(
    points: &[(f64, f64)],
    width: f64,
    field: &str,
    method: Method,
    cfg: &SolverConfig,
) -> Result<Vec<(f64, f64)>> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let value = |d: f64, g: f64| -> Result<f64> {
        Ok(sweep_point(d, g, method, cfg).field(field)?.unwrap_or(f64::NEG_INFINITY))
    };
    points
        .iter()
        .map(|&(g, d0)| {
            let mut a = (d0 - width).max(f64::MIN_POSITIVE);
            let mut b = d0 + width;
            let mut c = b - INV_PHI * (b - a);
            let mut d = a + INV_PHI * (b - a);
            let (mut fc, mut fd) = (value(c, g)?, value(d, g)?);
            while b - a > 1e-6 * (1.0 + d0.abs()) {
                if fc > fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - INV_PHI * (b - a);
                    fc = value(c, g)?;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + INV_PHI * (b - a);
                    fd = value(d, g)?;
                }
            }
            Ok((g, 0.5 * (a + b)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Phase;
    use crate::stats::PhotonStatistics;

    fn synthetic(deltas: &[f64], gs: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<SweepRecord> {
        let mut out = Vec::new();
        for &d in deltas {
            for &g in gs {
                let v = f(d, g);
                let stats = PhotonStatistics {
                    mean_n: 0.0,
                    var_n: 0.0,
                    q_excess: 0.0,
                    mean_x: 0.0,
                    mean_p: 0.0,
                    dx: 1.0,
                    dp: 1.0,
                    product: 1.0,
                    r: v,
                    overlap: 0.0,
                    cov_xp: 0.0,
                };
                out.push(SweepRecord {
                    delta: d,
                    g,
                    lambda: g * (2.0 / d).sqrt(),
                    phase: Phase::Normal,
                    root: None,
                    stats: Some(stats),
                    truncation_n: None,
                    method: Method::Spectral,
                    error: None,
                });
            }
        }
        out
    }

    #[test]
    fn constructed_maximum_is_exact() {
        let deltas: Vec<f64> = (0..60).map(|i| 0.1 + 0.3 * i as f64).collect();
        let gs = [1.0, 1.5, 2.0, 2.5];
        let recs = synthetic(&deltas, &gs, |d, g| -(d - 2.0 * g * g).powi(2));
        let ridge = extract_ridge(&recs, "r").unwrap();
        assert!(ridge.excluded.is_empty());
        for (g, d) in ridge.points {
            assert!((d - 2.0 * g * g).abs() < 1e-9, "g = {g}: {d}");
        }
    }

    #[test]
    fn boundary_columns_are_excluded() {
        let deltas = [1.0, 2.0, 3.0, 4.0];
        let recs = synthetic(&deltas, &[1.0, 2.0, 3.0], |d, g| if g == 3.0 { d } else { -(d - 2.5).powi(2) });
        let ridge = extract_ridge(&recs, "r").unwrap();
        assert_eq!(ridge.excluded, vec![3.0]);
        assert_eq!(ridge.points.len(), 2);
    }

    #[test]
    fn short_columns_are_rejected() {
        let recs = synthetic(&[1.0, 2.0], &[1.0, 2.0], |d, _| d);
        assert!(matches!(extract_ridge(&recs, "r"), Err(RabiError::GridIncomplete { .. })));
    }

    #[test]
    fn non_rectangular_is_rejected() {
        let mut recs = synthetic(&[1.0, 2.0, 3.0], &[1.0, 2.0], |d, _| d);
        recs.pop();
        assert!(matches!(grid_axes(&recs), Err(RabiError::NonRectangularGrid(_))));
    }

    #[test]
    fn exact_recovery() {
        for coeffs in [[2.0, 0.0, 0.0], [2.0, -1.5, 0.6]] {
            let pts: Vec<(f64, f64)> = (0..9)
                .map(|i| {
                    let g = 1.0 + 0.25 * i as f64;
                    (g, coeffs[0] * g * g + coeffs[1] * g + coeffs[2])
                })
                .collect();
            let fit = fit_quadratic(&pts).unwrap();
            for (a, b) in fit.coeffs.iter().zip(coeffs) {
                assert!((a - b).abs() < 1e-10, "{:?}", fit.coeffs);
            }
            assert!(fit.rms_residual < 1e-10);
            assert!(fit.gradient().iter().all(|v| v.abs() < 1e-8));
        }
    }

    #[test]
    fn collinear_g_is_degenerate() {
        assert!(matches!(fit_quadratic(&[(1.0, 1.0), (1.0, 2.0), (2.0, 3.0)]), Err(RabiError::DegenerateFit)));
        assert!(matches!(fit_quadratic(&[(1.0, 1.0), (2.0, 2.0)]), Err(RabiError::DegenerateFit)));
    }
}
