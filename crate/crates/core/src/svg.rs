//! Static SVG histograms of standardized statistics, each overlaid with the
//! standard normal density. Output depends only on the input values.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::montecarlo::ReplicateTable;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 40.0;
const BIN_WIDTH: f64 = 0.25;

/// Renders one histogram of `values` as an SVG document.
pub fn histogram_svg(title: &str, values: &[f64]) -> String {
    let finite: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    let lo = finite.iter().copied().fold(-4.0, f64::min).floor();
    let hi = finite.iter().copied().fold(4.0, f64::max).ceil();
    let bins = ((hi - lo) / BIN_WIDTH).round() as usize;
    let mut counts = vec![0usize; bins];
    for &x in &finite {
        let b = (((x - lo) / BIN_WIDTH) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let total = finite.len().max(1) as f64;
    let density: Vec<f64> = counts.iter().map(|&c| c as f64 / (total * BIN_WIDTH)).collect();
    let peak = density.iter().copied().fold(1.0 / (2.0 * PI).sqrt(), f64::max) * 1.05;

    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let sx = |x: f64| MARGIN + (x - lo) / (hi - lo) * plot_w;
    let sy = |y: f64| HEIGHT - MARGIN - y / peak * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{} (n = {})</text>"#,
        WIDTH / 2.0,
        escape(title),
        finite.len()
    );
    for (b, &d) in density.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        let x0 = sx(lo + b as f64 * BIN_WIDTH);
        let x1 = sx(lo + (b + 1) as f64 * BIN_WIDTH);
        let _ = writeln!(
            out,
            r##"<rect x="{x0:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#8fb3d9" stroke="#3c6e9f" stroke-width="0.5"/>"##,
            sy(d),
            x1 - x0,
            sy(0.0) - sy(d)
        );
    }
    let steps = 200;
    let mut points = String::new();
    for j in 0..=steps {
        let x = lo + (hi - lo) * j as f64 / steps as f64;
        let y = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        let _ = write!(points, "{:.2},{:.2} ", sx(x), sy(y));
    }
    let _ = writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#c0392b" stroke-width="2"/>"##,
        points.trim_end()
    );
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        sy(0.0),
        WIDTH - MARGIN,
        sy(0.0)
    );
    let mut tick = lo;
    while tick <= hi + 1e-9 {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="middle">{tick}</text>"#,
            sx(tick),
            sy(0.0) + 14.0
        );
        tick += 1.0;
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `z{k}.svg` into `dir` for every z column of the table and returns
/// the paths. A table without z values produces no files.
pub fn render_histograms(table: &ReplicateTable, dir: &Path) -> Result<Vec<PathBuf>> {
    let width = table.rows.first().map_or(0, |r| r.z.len());
    if width == 0 {
        return Ok(Vec::new());
    }
    fs::create_dir_all(dir)?;
    let first = table.k_max() + 1 - width;
    let mut paths = Vec::with_capacity(width);
    for j in 0..width {
        let k = first + j;
        let path = dir.join(format!("z{k}.svg"));
        fs::write(&path, histogram_svg(&format!("z{k}"), &table.z_column(j)))?;
        paths.push(path);
    }
    Ok(paths)
}
