//! Static SVG rendering of sweep results.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::dynamics::{Bipartition, Subsystem};
use crate::error::{Error, Result};
use crate::params::AxisUnit;
use crate::sweep::{PointStatus, SweepResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Lines,
    Contour,
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lines" => Ok(PlotKind::Lines),
            "contour" => Ok(PlotKind::Contour),
            other => Err(Error::param("plot", format!("unknown plot kind `{other}`"))),
        }
    }
}

const LEVELS: usize = 10;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 300.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn axis_label(param: &str, unit: Option<AxisUnit>) -> String {
    match unit {
        Some(AxisUnit::OmegaM) => format!("{param} / omega_m"),
        _ if param.starts_with("temperature") => format!("{param} (K)"),
        _ => param.to_string(),
    }
}

/// Series style: the three macroscopic pairs get fixed colours and dashes.
fn series_style(b: Bipartition, k: usize) -> (&'static str, &'static str) {
    use Subsystem::*;
    let pair = if b.first() <= b.second() {
        (b.first(), b.second())
    } else {
        (b.second(), b.first())
    };
    match pair {
        (Mo, Ae) => ("#1f4fd8", "8,3,2,3"),
        (Ae, Lc) => ("#d62728", ""),
        (Mo, Lc) => ("#000000", "6,4"),
        _ => {
            const EXTRA: [&str; 3] = ["#2ca02c", "#9467bd", "#8c564b"];
            (EXTRA[k % EXTRA.len()], "2,2")
        }
    }
}

/// Sequential colour ramp from pale yellow to dark blue, `t` in [0, 1].
fn ramp(t: f64) -> String {
    const STOPS: [(f64, [f64; 3]); 4] = [
        (0.0, [255.0, 247.0, 188.0]),
        (0.35, [127.0, 205.0, 187.0]),
        (0.7, [44.0, 127.0, 184.0]),
        (1.0, [12.0, 44.0, 132.0]),
    ];
    let t = t.clamp(0.0, 1.0);
    let i = STOPS.iter().rposition(|(s, _)| *s <= t).unwrap_or(0).min(STOPS.len() - 2);
    let (s0, c0) = STOPS[i];
    let (s1, c1) = STOPS[i + 1];
    let u = (t - s0) / (s1 - s0);
    let mix = |k: usize| (c0[k] + u * (c1[k] - c0[k])).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(0), mix(1), mix(2))
}

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut t = first;
    while t <= hi + 1e-9 * step {
        ticks.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    ticks
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

pub fn render_svg(result: &SweepResult, kind: PlotKind) -> Result<String> {
    match (kind, result.dims()) {
        (PlotKind::Lines, 1) => Ok(render_lines(result)),
        (PlotKind::Contour, 2) => Ok(render_contours(result)),
        (PlotKind::Lines, d) => Err(Error::Contract(format!(
            "a line plot needs a 1-D sweep, got {d}-D"
        ))),
        (PlotKind::Contour, d) => Err(Error::Contract(format!(
            "a contour plot needs a 2-D sweep, got {d}-D"
        ))),
    }
}

pub fn emit_plot(result: &SweepResult, kind: PlotKind, path: impl AsRef<Path>) -> Result<()> {
    let svg = render_svg(result, kind)?;
    let path = path.as_ref();
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

fn svg_open(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">
<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#
    );
}

fn render_lines(result: &SweepResult) -> String {
    let xs: Vec<f64> = result.points.iter().map(|p| p.axis1).collect();
    let (x0, x1) = (result.axis1.start.min(result.axis1.stop), result.axis1.start.max(result.axis1.stop));
    let ymax = result
        .points
        .iter()
        .flat_map(|p| p.log_negativity.iter().flatten())
        .fold(0.0f64, |m, v| m.max(*v));
    let ymax = if ymax > 0.0 { ymax * 1.08 } else { 1.0 };
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - y / ymax * ph;

    let mut out = String::new();
    svg_open(&mut out, W, H);
    let _ = writeln!(
        out,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##
    );
    for t in nice_ticks(x0, x1, 8) {
        let x = sx(t);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 19.0,
            escape(&tick_label(t))
        );
    }
    for t in nice_ticks(0.0, ymax, 5) {
        let y = sy(t);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#444"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            escape(&tick_label(t))
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 12.0,
        escape(&axis_label(&result.axis1.param, Some(result.axis1_unit)))
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">E_N</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (k, b) in result.bipartitions.iter().enumerate() {
        let (colour, dash) = series_style(*b, k);
        // a gap in the data (unstable or failed point) breaks the line
        let mut segments: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for (p, &x) in result.points.iter().zip(&xs) {
            match p.log_negativity[k] {
                Some(v) => segments.last_mut().unwrap().push((sx(x), sy(v))),
                None => {
                    if !segments.last().unwrap().is_empty() {
                        segments.push(Vec::new());
                    }
                }
            }
        }
        for seg in segments.iter().filter(|s| !s.is_empty()) {
            let pts: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let dash_attr = if dash.is_empty() {
                String::new()
            } else {
                format!(r#" stroke-dasharray="{dash}""#)
            };
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1.8"{dash_attr} points="{}"/>"#,
                pts.join(" ")
            );
        }
        let ly = TOP + 14.0 + 20.0 * k as f64;
        let lx = W - RIGHT + 15.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.1}" y2="{ly}" stroke="{colour}" stroke-width="1.8"{}/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 30.0,
            if dash.is_empty() { String::new() } else { format!(r#" stroke-dasharray="{dash}""#) },
            lx + 36.0,
            ly + 4.0,
            escape(&b.to_string())
        );
    }
    out.push_str("</svg>\n");
    out
}

struct Panel {
    title: String,
    /// Row-major values matching `result.points`; `None` is drawn white.
    values: Vec<Option<f64>>,
    lo: f64,
    hi: f64,
}

fn render_contours(result: &SweepResult) -> String {
    let mut panels: Vec<Panel> = Vec::new();
    for (k, b) in result.bipartitions.iter().enumerate() {
        let values: Vec<Option<f64>> = result
            .points
            .iter()
            .map(|p| p.log_negativity[k].filter(|v| *v > 0.0))
            .collect();
        let hi = values.iter().flatten().fold(0.0f64, |m, v| m.max(*v));
        panels.push(Panel {
            title: format!("E_N {b}"),
            values,
            lo: 0.0,
            hi,
        });
    }
    if result.record_stability {
        let values: Vec<Option<f64>> = result
            .points
            .iter()
            .map(|p| if p.status == PointStatus::Ok { p.margin } else { None })
            .collect();
        let lo = values.iter().flatten().fold(f64::INFINITY, |m, v| m.min(*v));
        let hi = values.iter().flatten().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
        panels.push(Panel {
            title: "max Re(eigenvalue) / omega_m".into(),
            values,
            lo: if lo.is_finite() { lo } else { 0.0 },
            hi: if hi.is_finite() { hi } else { 0.0 },
        });
    }

    let a1 = &result.axis1;
    let a2 = result.axis2.as_ref().expect("2-D result");
    let n1 = a1.count;
    let n2 = a2.count;
    let cols = panels.len().clamp(1, 2);
    let rows = panels.len().div_ceil(cols).max(1);
    let cell_w = PANEL_W + LEFT + RIGHT;
    let cell_h = PANEL_H + TOP + BOTTOM;
    let total_w = cell_w * cols as f64;
    let total_h = cell_h * rows as f64;

    let mut out = String::new();
    svg_open(&mut out, total_w, total_h);
    let (x_lo, x_hi) = (a1.start, a1.stop);
    let (y_lo, y_hi) = (a2.start, a2.stop);
    let dx = PANEL_W / n1 as f64;
    let dy = PANEL_H / n2 as f64;

    for (idx, panel) in panels.iter().enumerate() {
        let ox = (idx % cols) as f64 * cell_w + LEFT;
        let oy = (idx / cols) as f64 * cell_h + TOP;
        let _ = writeln!(out, r#"<g transform="translate({ox} {oy})">"#);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="-10" text-anchor="middle" font-size="13">{}</text>"#,
            PANEL_W / 2.0,
            escape(&panel.title)
        );
        let span = panel.hi - panel.lo;
        for (i, p) in panel.values.iter().enumerate() {
            let Some(v) = *p else { continue };
            let t = if span > 0.0 { (v - panel.lo) / span } else { 1.0 };
            // quantize into filled levels
            let level = ((t * LEVELS as f64).ceil() as usize).clamp(1, LEVELS);
            let colour = ramp(level as f64 / LEVELS as f64);
            let (i1, i2) = (i / n2, i % n2);
            let x = i1 as f64 * dx;
            let y = PANEL_H - (i2 + 1) as f64 * dy;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{colour}"/>"#,
                dx + 0.3,
                dy + 0.3
            );
        }
        let _ = writeln!(
            out,
            r##"<rect x="0" y="0" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#444"/>"##
        );
        for t in nice_ticks(x_lo.min(x_hi), x_lo.max(x_hi), 5) {
            let x = (t - x_lo) / (x_hi - x_lo) * PANEL_W;
            let _ = writeln!(
                out,
                r##"<line x1="{x:.2}" y1="{PANEL_H}" x2="{x:.2}" y2="{:.1}" stroke="#444"/><text x="{x:.2}" y="{:.1}" text-anchor="middle">{}</text>"##,
                PANEL_H + 5.0,
                PANEL_H + 18.0,
                escape(&tick_label(t))
            );
        }
        for t in nice_ticks(y_lo.min(y_hi), y_lo.max(y_hi), 5) {
            let y = PANEL_H - (t - y_lo) / (y_hi - y_lo) * PANEL_H;
            let _ = writeln!(
                out,
                r##"<line x1="-5" y1="{y:.2}" x2="0" y2="{y:.2}" stroke="#444"/><text x="-8" y="{:.2}" text-anchor="end">{}</text>"##,
                y + 4.0,
                escape(&tick_label(t))
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            PANEL_W / 2.0,
            PANEL_H + 38.0,
            escape(&axis_label(&a1.param, Some(result.axis1_unit)))
        );
        let _ = writeln!(
            out,
            r#"<text x="-50" y="{:.1}" text-anchor="middle" transform="rotate(-90 -50 {:.1})">{}</text>"#,
            PANEL_H / 2.0,
            PANEL_H / 2.0,
            escape(&axis_label(&a2.param, result.axis2_unit))
        );
        // colour bar
        let bx = PANEL_W + 20.0;
        let bh = PANEL_H / LEVELS as f64;
        for l in 1..=LEVELS {
            let y = PANEL_H - l as f64 * bh;
            let _ = writeln!(
                out,
                r#"<rect x="{bx}" y="{y:.2}" width="16" height="{bh:.2}" fill="{}"/>"#,
                ramp(l as f64 / LEVELS as f64)
            );
        }
        let _ = writeln!(
            out,
            r##"<rect x="{bx}" y="0" width="16" height="{PANEL_H}" fill="none" stroke="#444"/><text x="{:.1}" y="10">{}</text><text x="{:.1}" y="{PANEL_H}">{}</text>"##,
            bx + 20.0,
            escape(&tick_label(panel.hi)),
            bx + 20.0,
            escape(&tick_label(panel.lo))
        );
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{EffectiveInput, ParamConfig};
    use crate::sweep::{run_sweep, SweepSpec};

    fn spec(axis2: Option<&str>) -> SweepSpec {
        SweepSpec {
            base: ParamConfig::Effective(EffectiveInput::figure_base()),
            axis1: "delta_at:-4:4:9".parse().unwrap(),
            axis2: axis2.map(|s| s.parse().unwrap()),
            bipartitions: Bipartition::macroscopic().to_vec(),
            record_stability: true,
        }
    }

    #[test]
    fn kind_must_match_dimension() {
        let one = run_sweep(&spec(None)).unwrap();
        assert!(render_svg(&one, PlotKind::Lines).is_ok());
        assert!(matches!(render_svg(&one, PlotKind::Contour), Err(Error::Contract(_))));
        let two = run_sweep(&spec(Some("g_om_eff:0:0.8:4"))).unwrap();
        assert!(render_svg(&two, PlotKind::Contour).is_ok());
        assert!(render_svg(&two, PlotKind::Lines).is_err());
    }

    #[test]
    fn line_plot_has_one_series_per_pair() {
        let one = run_sweep(&spec(None)).unwrap();
        let svg = render_svg(&one, PlotKind::Lines).unwrap();
        for b in Bipartition::macroscopic() {
            assert!(svg.contains(&format!(">{b}<")), "{b}");
        }
        assert!(svg.contains("delta_at / omega_m"));
    }

    #[test]
    fn decoupled_contour_has_no_cells() {
        let mut s = spec(Some("temperature:0.01:0.2:3"));
        let ParamConfig::Effective(base) = &mut s.base else { unreachable!() };
        base.g_om_eff = 0.0;
        base.g_lc_eff = 0.0;
        base.g_at_eff = 0.0;
        s.record_stability = false;
        let r = run_sweep(&s).unwrap();
        let svg = render_svg(&r, PlotKind::Contour).unwrap();
        // background, then per panel a frame, the colour bar and its frame
        assert_eq!(svg.matches("<rect").count(), 1 + 3 * (LEVELS + 2));
        assert!(!svg.contains("max Re"));
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(0.0), "#fff7bc");
        assert_eq!(ramp(1.0), "#0c2c84");
    }

    #[test]
    fn ticks_cover_range() {
        let t = nice_ticks(-4.0, 4.0, 8);
        assert_eq!(t.first(), Some(&-4.0));
        assert_eq!(t.last(), Some(&4.0));
    }
}
