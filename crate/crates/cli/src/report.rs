//! Text and JSON renderings of command results.

use rabi_core::io::fmt_float;
use rabi_core::oracle::OracleResult;
use rabi_core::ridge::{Ridge, RidgeFit};
use rabi_core::stats::PhotonStatistics;
use rabi_core::PointSolution;
use serde_json::{json, Map, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Empirical ridge curve `Δ ≈ 2g² - 1.5g + 0.6`.
pub const EMPIRICAL_RIDGE: [f64; 3] = [2.0, -1.5, 0.6];

pub fn stats_json(stats: &PhotonStatistics) -> Value {
    let mut m = Map::new();
    for (name, v) in PhotonStatistics::FIELDS.iter().zip(stats.values()) {
        m.insert((*name).to_string(), json!(v));
    }
    m.insert("mandel_q".into(), json!(stats.mandel_q()));
    Value::Object(m)
}

pub fn stats_lines(stats: &PhotonStatistics) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> =
        PhotonStatistics::FIELDS.iter().zip(stats.values()).map(|(n, v)| ((*n).to_string(), fmt_float(v))).collect();
    out.push(("mandel_q".into(), stats.mandel_q().map(fmt_float).unwrap_or_default()));
    out
}

pub fn solution_json(sol: &PointSolution) -> Value {
    let p = &sol.params;
    json!({
        "params": {
            "delta": p.delta,
            "g": p.g,
            "lambda": p.lambda(),
            "phase": p.phase().as_str(),
        },
        "root": {
            "x_root": sol.root.x_root,
            "x_correction": sol.root.x_correction,
            "energy": sol.root.energy,
            "residual": sol.root.residual,
            "parity": sol.root.parity.as_str(),
            "index_m": sol.root.index_m,
            "kind": sol.root.kind,
            "warning": sol.root.warning,
        },
        "stats": stats_json(&sol.stats),
        "truncation": {
            "truncation_n": sol.minus.truncation_n,
            "plus_truncation_n": sol.plus.truncation_n,
            "minus_tail_norm": sol.minus.tail_norm,
            "plus_tail_norm": sol.plus.tail_norm,
            "raw_norm_ratio": sol.plus.raw_norm / sol.minus.raw_norm,
        },
    })
}

pub fn solution_lines(sol: &PointSolution) -> Vec<(String, String)> {
    let p = &sol.params;
    let mut out = vec![
        ("delta".to_string(), fmt_float(p.delta)),
        ("g".into(), fmt_float(p.g)),
        ("lambda".into(), fmt_float(p.lambda())),
        ("phase".into(), p.phase().as_str().into()),
        ("parity".into(), sol.root.parity.as_str().into()),
        ("x_root".into(), fmt_float(sol.root.x_root)),
        ("energy".into(), fmt_float(sol.root.energy)),
        ("residual".into(), fmt_float(sol.root.residual)),
    ];
    if let Some(w) = sol.root.warning {
        out.push(("warning".into(), format!("{w:?}")));
    }
    out.extend(stats_lines(&sol.stats));
    out.push(("truncation_n".into(), sol.minus.truncation_n.to_string()));
    out.push(("plus_truncation_n".into(), sol.plus.truncation_n.to_string()));
    out.push(("minus_tail_norm".into(), fmt_float(sol.minus.tail_norm)));
    out.push(("plus_tail_norm".into(), fmt_float(sol.plus.tail_norm)));
    out
}

pub fn oracle_json(o: &OracleResult) -> Value {
    json!({
        "e0": o.e0,
        "parity": o.parity.as_str(),
        "parity_expect": o.parity_expect,
        "n_max_used": o.n_max_used,
        "stats": stats_json(&o.stats),
    })
}

pub fn oracle_lines(o: &OracleResult) -> Vec<(String, String)> {
    let mut out = vec![
        ("e0".to_string(), fmt_float(o.e0)),
        ("parity".into(), o.parity.as_str().into()),
        ("parity_expect".into(), fmt_float(o.parity_expect)),
        ("n_max_used".into(), o.n_max_used.to_string()),
    ];
    out.extend(stats_lines(&o.stats));
    out
}

/// Field-by-field `|spectral - oracle|`, energy first.
pub fn deltas(sol: &PointSolution, o: &OracleResult) -> Vec<(String, f64)> {
    let mut out = vec![("energy".to_string(), (sol.root.energy - o.e0).abs())];
    for (name, (a, b)) in PhotonStatistics::FIELDS.iter().zip(sol.stats.values().into_iter().zip(o.stats.values())) {
        out.push(((*name).to_string(), (a - b).abs()));
    }
    out
}

pub fn print_lines(lines: &[(String, String)]) {
    let width = lines.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in lines {
        println!("{k:<width$}  {v}");
    }
}

fn curve(c: [f64; 3], g: f64) -> f64 {
    (c[0] * g + c[1]) * g + c[2]
}

/// RMS distance between the fitted curve and a reference over the ridge points.
pub fn curve_distance(fit: &RidgeFit, reference: [f64; 3]) -> f64 {
    let n = fit.points.len().max(1) as f64;
    (fit.points.iter().map(|&(g, _)| (fit.evaluate(g) - curve(reference, g)).powi(2)).sum::<f64>() / n).sqrt()
}

pub fn ridge_json(ridge: &Ridge, fit: &RidgeFit, field: &str, refined: bool) -> Value {
    json!({
        "field": field,
        "refined": refined,
        "points": fit.points.iter().map(|&(g, d)| json!({"g": g, "delta": d})).collect::<Vec<_>>(),
        "excluded_columns": ridge.excluded,
        "coeffs": fit.coeffs,
        "rms_residual": fit.rms_residual,
        "reference_curves": {
            "critical": {"coeffs": fit.reference_curve, "rms_distance": curve_distance(fit, fit.reference_curve)},
            "empirical": {"coeffs": EMPIRICAL_RIDGE, "rms_distance": curve_distance(fit, EMPIRICAL_RIDGE)},
        },
    })
}

pub fn print_ridge(ridge: &Ridge, fit: &RidgeFit, field: &str, refined: bool) {
    println!("ridge of `{field}`{}: {} points", if refined { " (refined)" } else { "" }, fit.points.len());
    println!("{:>12}  {:>12}  {:>12}", "g", "delta*", "2g^2");
    for &(g, d) in &fit.points {
        println!("{:>12.6}  {:>12.6}  {:>12.6}", g, d, 2.0 * g * g);
    }
    if !ridge.excluded.is_empty() {
        let list: Vec<String> = ridge.excluded.iter().map(|g| fmt_float(*g)).collect();
        println!("excluded (boundary maximum) g: {}", list.join(", "));
    }
    let [c2, c1, c0] = fit.coeffs;
    println!("fit: delta* = {c2:.6} g^2 + {c1:.6} g + {c0:.6}");
    println!("rms residual: {}", fmt_float(fit.rms_residual));
    for (name, reference) in [("2g^2", fit.reference_curve), ("2g^2 - 1.5g + 0.6", EMPIRICAL_RIDGE)] {
        let d: Vec<String> = fit.coeffs.iter().zip(reference).map(|(a, b)| format!("{:+.4}", a - b)).collect();
        println!(
            "vs {name}: coefficient differences ({}), rms curve distance {}",
            d.join(", "),
            fmt_float(curve_distance(fit, reference))
        );
    }
}
