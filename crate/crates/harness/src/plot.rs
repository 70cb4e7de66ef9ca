//! SVG line charts of post-update return against iteration.

use std::fmt::Write as _;

use crate::runlog::RunLog;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlotError {
    #[error("nothing to plot")]
    NoRuns,
    #[error("run `{0}` has fewer than two rows")]
    TooShort(String),
    #[error("run `{0}` contains a non-finite value")]
    NonFinite(String),
}

pub const WIDTH: f64 = 720.0;
pub const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// A named series of `(x, y)` points.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn post_return(log: &RunLog) -> Self {
        Self { name: log.name.clone(), points: log.rows.iter().map(|m| (m.iteration as f64, m.post_return_mean)).collect() }
    }
}

/// `[lo, hi]` widened by 5% of the span on each side; a zero span is
/// replaced by `max(|v|, 1)`.
pub fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = if hi > lo { hi - lo } else { lo.abs().max(1.0) };
    (lo - 0.05 * span, hi + 0.05 * span)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

pub fn render(series: &[Series], title: &str) -> Result<String, PlotError> {
    if series.is_empty() {
        return Err(PlotError::NoRuns);
    }
    for s in series {
        if s.points.len() < 2 {
            return Err(PlotError::TooShort(s.name.clone()));
        }
        if s.points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(PlotError::NonFinite(s.name.clone()));
        }
    }
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    let (x_lo, x_hi) = padded(x_lo, x_hi);
    let (y_lo, y_hi) = padded(y_lo, y_hi);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(w, r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="14">{}</text>"#, LEFT + plot_w / 2.0, escape(title));
    let _ = writeln!(
        w,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x_lo + f * (x_hi - x_lo), y_lo + f * (y_hi - y_lo));
        let (gx, gy) = (px(xv), py(yv));
        let _ = writeln!(w, r##"<line x1="{gx:.2}" y1="{TOP}" x2="{gx:.2}" y2="{:.2}" stroke="#dddddd"/>"##, TOP + plot_h);
        let _ = writeln!(w, r##"<line x1="{LEFT}" y1="{gy:.2}" x2="{:.2}" y2="{gy:.2}" stroke="#dddddd"/>"##, LEFT + plot_w);
        let _ = writeln!(w, r#"<text x="{gx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + plot_h + 16.0, label(xv));
        let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, gy + 4.0, label(yv));
    }
    let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">iteration</text>"#, LEFT + plot_w / 2.0, HEIGHT - 12.0);
    let _ = writeln!(
        w,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">post-update return</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(w, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(w, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="3"/>"#, lx + 20.0);
        let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.name));
    }
    let _ = writeln!(w, "</svg>");
    Ok(svg)
}

/// Chart of every run's post-update return.
pub fn plot_runs(runs: &[RunLog]) -> Result<String, PlotError> {
    let series: Vec<Series> = runs.iter().map(Series::post_return).collect();
    render(&series, "post-update return")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(name: &str, ys: &[f64]) -> Series {
        Series { name: name.into(), points: ys.iter().enumerate().map(|(i, &y)| (i as f64, y)).collect() }
    }

    #[test]
    fn constant_series_is_flat_and_padded() {
        let svg = render(&[series("flat", &[2.0, 2.0, 2.0])], "t").unwrap();
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
        let ys: Vec<&str> = pts.split(' ').map(|p| p.split(',').nth(1).unwrap()).collect();
        assert!(ys.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(padded(2.0, 2.0), (1.9, 2.1));
        assert_eq!(padded(0.0, 10.0), (-0.5, 10.5));
        // the flat line sits mid-height
        let mid = TOP + (HEIGHT - TOP - BOTTOM) / 2.0;
        assert_eq!(ys[0], format!("{mid:.2}"));
    }

    #[test]
    fn legend_lists_every_run() {
        let svg = render(&[series("ours", &[0.0, 1.0]), series("maml <vpg>", &[1.0, 0.5])], "t").unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">ours</text>"));
        assert!(svg.contains(">maml &lt;vpg&gt;</text>"));
    }

    #[test]
    fn output_is_deterministic() {
        let s = [series("a", &[0.3, 0.1, 0.7]), series("b", &[1.0, -1.0, 0.0])];
        assert_eq!(render(&s, "x").unwrap(), render(&s, "x").unwrap());
    }

    #[test]
    fn bad_inputs_error() {
        assert_eq!(render(&[], "t"), Err(PlotError::NoRuns));
        assert_eq!(render(&[series("one", &[1.0])], "t"), Err(PlotError::TooShort("one".into())));
        assert_eq!(render(&[series("nan", &[1.0, f64::NAN])], "t"), Err(PlotError::NonFinite("nan".into())));
    }
}
