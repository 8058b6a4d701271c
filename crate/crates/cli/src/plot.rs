//! Log-log scatter of a rate report with its fitted line.

use std::fmt::Write as _;
use std::path::Path;

use stochmls::lab::{fit_loglog_slope, RateReport, SlopeFit};

use crate::artifacts::write_atomic;
use crate::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 70.0;

/// SVG text for `points` on log-log axes. Needs at least two points with
/// positive coordinates. Without `fit`, a fit is attempted (it needs four
/// points); the annotation reads `slope=n/a` if there is none.
pub fn render_svg(
    points: &[(f64, f64)],
    fit: Option<SlopeFit>,
    x_label: &str,
    y_label: &str,
) -> Result<String, CliError> {
    if points.len() < 2 {
        return Err(CliError::Runtime(format!("a plot needs at least 2 points, got {}", points.len())));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(CliError::Runtime("log-log plot needs positive finite coordinates".into()));
    }
    let fit = fit.or_else(|| fit_loglog_slope(points).ok());
    let lx: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
        (lo - pad, hi + pad)
    };
    let (x0, x1) = range(&lx);
    let (y0, y1) = range(&ly);
    let sx = |v: f64| MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        right - left,
        bottom - top
    );
    // tick labels at the data extremes
    for (v, anchor) in [(lx[0], "start"), (lx[lx.len() - 1], "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="{anchor}">{:.3e}</text>"#,
            sx(v),
            bottom + 16.0,
            10f64.powf(v)
        );
    }
    let (ymin, ymax) = ly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    for v in [ymin, ymax] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{:.3e}</text>"#,
            left - 4.0,
            sy(v) + 4.0,
            10f64.powf(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    if let Some(f) = fit {
        // intercept is in natural log; convert the line to log10 space
        let line = |v: f64| (f.intercept + f.slope * v * std::f64::consts::LN_10) / std::f64::consts::LN_10;
        let (a, b) = (lx[0].min(lx[lx.len() - 1]), lx[0].max(lx[lx.len() - 1]));
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="steelblue" stroke-width="1.5"/>"#,
            sx(a),
            sy(line(a)),
            sx(b),
            sy(line(b))
        );
    }
    for (x, y) in lx.iter().zip(&ly) {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="black"/>"#, sx(*x), sy(*y));
    }
    let annotation = match fit {
        Some(f) => format!("slope={:.3} ± {:.3}", f.slope, f.stderr),
        None => "slope=n/a".to_string(),
    };
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="14">{annotation}</text>"#, left + 8.0, top + 20.0);
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn report_svg(report: &RateReport) -> Result<String, CliError> {
    let points: Vec<(f64, f64)> = report.points.iter().map(|p| (p.x, p.aggregate)).collect();
    let y_label = format!("{} of {}", report.aggregation.name(), report.experiment);
    render_svg(&points, report.fit, report.regressor.name(), &y_label)
}

/// Writes the plot of `report` to `path`; nothing is written on error.
pub fn emit_plot(report: &RateReport, path: &Path) -> Result<(), CliError> {
    let svg = report_svg(report)?;
    write_atomic(path, svg.as_bytes())
}
