//! Self-contained SVG heatmap of one swept field.
//!
//! `g` runs left to right and `Δ` bottom to top; each record is one cell.
//! Colors interpolate linearly between fixed stops over `[min, max]` of the
//! field; points without a value are drawn grey. Output depends only on the
//! input records.

use std::fmt::Write as _;

use crate::error::{RabiError, Result};
use crate::ridge::grid_axes;
use crate::sweep::{SweepRecord, NUMERIC_FIELDS};

const PLOT_W: f64 = 640.0;
const PLOT_H: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;
const LEGEND_W: f64 = 20.0;
const LEGEND_GAP: f64 = 30.0;
const MISSING: &str = "#9e9e9e";

/// Perceptually ordered stops, dark to bright.
const STOPS: [(u8, u8, u8); 5] = [(68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37)];

/// Hex colour at `t ∈ [0, 1]`.
pub fn colormap(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let pos = t * (STOPS.len() - 1) as f64;
    let i = (pos.floor() as usize).min(STOPS.len() - 2);
    let f = pos - i as f64;
    let lerp = |a: u8, b: u8| (f64::from(a) + (f64::from(b) - f64::from(a)) * f).round() as u8;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    format!("#{:02x}{:02x}{:02x}", lerp(a.0, b.0), lerp(a.1, b.1), lerp(a.2, b.2))
}

fn label(v: f64) -> String {
    format!("{v:.4}")
}

pub fn render_heatmap(records: &[SweepRecord], field: &str) -> Result<String> {
    if !NUMERIC_FIELDS.contains(&field) {
        return Err(RabiError::UnknownField(field.to_string()));
    }
    if records.is_empty() {
        return Err(RabiError::NonRectangularGrid("no records".into()));
    }
    let (deltas, gs) = grid_axes(records)?;
    let values: Vec<Option<f64>> =
        records.iter().map(|r| r.field(field).map(|v| v.filter(|x| x.is_finite()))).collect::<Result<_>>()?;
    let (lo, hi) =
        values.iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let have_range = lo.is_finite();
    let scale = |v: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };

    let cell_w = PLOT_W / gs.len() as f64;
    let cell_h = PLOT_H / deltas.len() as f64;
    let width = MARGIN_L + PLOT_W + LEGEND_GAP + LEGEND_W + 80.0;
    let height = MARGIN_T + PLOT_H + MARGIN_B;

    let mut s = String::new();
    let w = &mut s;
    // writes to a String cannot fail
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<title>{field}</title>"#);
    let _ = writeln!(w, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(w, r#"<g id="cells" shape-rendering="crispEdges">"#);
    for (r, v) in records.iter().zip(&values) {
        let i = deltas.binary_search_by(|d| d.total_cmp(&r.delta)).expect("axis value");
        let j = gs.binary_search_by(|g| g.total_cmp(&r.g)).expect("axis value");
        let x = MARGIN_L + j as f64 * cell_w;
        let y = MARGIN_T + PLOT_H - (i + 1) as f64 * cell_h;
        let fill = v.map_or_else(|| MISSING.to_string(), |v| colormap(scale(v)));
        let _ = writeln!(w, r#"<rect x="{x:.3}" y="{y:.3}" width="{cell_w:.3}" height="{cell_h:.3}" fill="{fill}"/>"#);
    }
    let _ = writeln!(w, "</g>");

    // axes
    let x0 = MARGIN_L;
    let y0 = MARGIN_T + PLOT_H;
    let _ =
        writeln!(w, r#"<rect x="{x0}" y="{MARGIN_T}" width="{PLOT_W}" height="{PLOT_H}" fill="none" stroke="black"/>"#);
    for k in [0, gs.len() - 1] {
        let (x, g) = (MARGIN_L + (k as f64 + 0.5) * cell_w, gs[k]);
        let _ = writeln!(w, r#"<text x="{x:.3}" y="{:.3}" text-anchor="middle">{}</text>"#, y0 + 18.0, label(g));
    }
    for k in [0, deltas.len() - 1] {
        let (y, d) = (y0 - (k as f64 + 0.5) * cell_h, deltas[k]);
        let _ = writeln!(
            w,
            r#"<text x="{:.3}" y="{y:.3}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            x0 - 6.0,
            label(d)
        );
    }
    let _ =
        writeln!(w, r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">g</text>"#, MARGIN_L + PLOT_W / 2.0, y0 + 40.0);
    let _ = writeln!(
        w,
        r#"<text x="20" y="{:.3}" text-anchor="middle" transform="rotate(-90 20 {:.3})">Δ</text>"#,
        MARGIN_T + PLOT_H / 2.0,
        MARGIN_T + PLOT_H / 2.0
    );

    // legend: gradient bar with min at the bottom and max at the top
    let lx = MARGIN_L + PLOT_W + LEGEND_GAP;
    let _ = writeln!(w, r#"<defs><linearGradient id="scale" x1="0" y1="1" x2="0" y2="0">"#);
    for (k, _) in STOPS.iter().enumerate() {
        let t = k as f64 / (STOPS.len() - 1) as f64;
        let _ = writeln!(w, r#"<stop offset="{t:.3}" stop-color="{}"/>"#, colormap(t));
    }
    let _ = writeln!(w, "</linearGradient></defs>");
    let _ = writeln!(w, r#"<g id="legend">"#);
    let _ = writeln!(
        w,
        r#"<rect x="{lx}" y="{MARGIN_T}" width="{LEGEND_W}" height="{PLOT_H}" fill="url(#scale)" stroke="black"/>"#
    );
    let (min_label, max_label) =
        if have_range { (label(lo), label(hi)) } else { ("n/a".to_string(), "n/a".to_string()) };
    let _ = writeln!(w, r#"<text x="{:.3}" y="{:.3}">max {max_label}</text>"#, lx + LEGEND_W + 6.0, MARGIN_T + 10.0);
    let _ = writeln!(w, r#"<text x="{:.3}" y="{:.3}">min {min_label}</text>"#, lx + LEGEND_W + 6.0, y0);
    let _ = writeln!(w, "</g>");
    let _ = writeln!(w, "</svg>");
    Ok(s)
}
