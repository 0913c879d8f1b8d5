//! Minimal line plots as standalone SVG.

use std::fmt::Write;

use anyhow::{bail, Result};
use pareidolia::Curve;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 52.0;
const TICKS: usize = 5;

#[derive(Debug, Clone, Default)]
pub struct SvgOptions {
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
}

#[derive(Debug, Clone)]
pub struct Svg {
    pub document: String,
    pub warnings: Vec<String>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let t = if log { v.log10() } else { v };
            lo = lo.min(t);
            hi = hi.max(t);
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            lo -= 0.5;
            hi += 0.5;
        }
        Axis { lo, hi, log }
    }

    fn frac(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        (t - self.lo) / (self.hi - self.lo)
    }

    fn tick_values(&self) -> Vec<f64> {
        (0..TICKS)
            .map(|i| {
                let t = self.lo + (self.hi - self.lo) * i as f64 / (TICKS - 1) as f64;
                if self.log {
                    10f64.powf(t)
                } else {
                    t
                }
            })
            .collect()
    }
}

fn px(x: &Axis, v: f64) -> f64 {
    LEFT + x.frac(v) * (WIDTH - LEFT - RIGHT)
}

fn py(y: &Axis, v: f64) -> f64 {
    HEIGHT - BOTTOM - y.frac(v) * (HEIGHT - TOP - BOTTOM)
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        return format!("{v:.2e}");
    }
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders `curve` as one polyline with an optional confidence band.
///
/// The band is drawn iff some point has a positive half-width. Points that
/// cannot be placed on a logarithmic axis (non-positive or non-finite) are
/// dropped and reported in `warnings`, as are non-finite values on linear
/// axes.
pub fn render_svg(curve: &Curve, opts: &SvgOptions) -> Result<Svg> {
    if curve.is_empty() {
        bail!("cannot plot an empty curve");
    }
    let mut warnings = Vec::new();
    let usable = |v: f64, log: bool| v.is_finite() && (!log || v > 0.0);
    let points: Vec<_> = curve
        .points()
        .iter()
        .filter(|p| {
            let ok = usable(p.x, opts.log_x) && usable(p.y, opts.log_y);
            if !ok {
                warnings.push(format!("dropped point ({}, {}) from plot", p.x, p.y));
            }
            ok
        })
        .collect();
    if points.is_empty() {
        bail!("no plottable points left in curve");
    }

    let band = points.iter().any(|p| p.ci_half_width.is_some_and(|h| h > 0.0));
    let lower_floor = points.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let bounds = |p: &pareidolia::CurvePoint| {
        let h = p.ci_half_width.filter(|h| h.is_finite()).unwrap_or(0.0);
        let lo = p.y - h;
        // A band reaching zero or below is clipped on a log axis.
        let lo = if opts.log_y && lo <= 0.0 { lower_floor } else { lo };
        (lo, p.y + h)
    };
    let x_axis = Axis::new(points.iter().map(|p| p.x), opts.log_x);
    let y_axis = if band {
        Axis::new(
            points.iter().flat_map(|p| {
                let (lo, hi) = bounds(p);
                [lo, hi]
            }),
            opts.log_y,
        )
    } else {
        Axis::new(points.iter().map(|p| p.y), opts.log_y)
    };

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    )?;
    writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#)?;
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    writeln!(
        s,
        r#"<path d="M{x0:.2},{y0:.2} L{x0:.2},{y1:.2} L{x1:.2},{y1:.2}" fill="none" stroke="black"/>"#
    )?;

    for v in x_axis.tick_values() {
        let x = px(&x_axis, v);
        writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y1:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y1 + 4.0,
            y1 + 16.0,
            tick_label(v)
        )?;
    }
    for v in y_axis.tick_values() {
        let y = py(&y_axis, v);
        writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 4.0,
            x0 - 6.0,
            y + 4.0,
            tick_label(v)
        )?;
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(&opts.x_label)
    )?;
    writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&opts.y_label)
    )?;

    if band {
        let mut coords = Vec::with_capacity(2 * points.len());
        for p in &points {
            coords.push(format!("{:.2},{:.2}", px(&x_axis, p.x), py(&y_axis, bounds(p).1)));
        }
        for p in points.iter().rev() {
            coords.push(format!("{:.2},{:.2}", px(&x_axis, p.x), py(&y_axis, bounds(p).0)));
        }
        writeln!(
            s,
            r##"<polygon points="{}" fill="#4a7bd0" fill-opacity="0.25" stroke="none"/>"##,
            coords.join(" ")
        )?;
    }
    let line: Vec<String> = points
        .iter()
        .map(|p| format!("{:.2},{:.2}", px(&x_axis, p.x), py(&y_axis, p.y)))
        .collect();
    writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#1f3f8f" stroke-width="1.5"/>"##,
        line.join(" ")
    )?;
    s.push_str("</svg>\n");
    Ok(Svg {
        document: s,
        warnings,
    })
}
