//! Self-contained SVG emission; no external renderer. Numeric results never
//! depend on anything in this module.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::ranking::Method;

use super::sweep::{ErrorBarData, SummaryRow};

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("summary does not cover a rectangular (eta, p) grid")]
    NonRectangularGrid,
    #[error("no rows for method {0}")]
    EmptySelection(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Which summary statistic a heatmap shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryMetric {
    RelLinf,
    RhoMax,
    RhoMean,
}

impl SummaryMetric {
    pub fn name(&self) -> &'static str {
        match self {
            SummaryMetric::RelLinf => "rel_linf",
            SummaryMetric::RhoMax => "rho_max",
            SummaryMetric::RhoMean => "rho_mean",
        }
    }

    fn pick(&self, row: &SummaryRow) -> Option<f64> {
        match self {
            SummaryMetric::RelLinf => row.rel_linf_mean,
            SummaryMetric::RhoMax => row.rho_max_mean,
            SummaryMetric::RhoMean => row.rho_mean_mean,
        }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;

/// Iso-SNR contour levels drawn over the heatmaps, with their stroke colors.
const SNR_CONTOURS: [(f64, &str); 3] = [(0.5, "#cc2222"), (0.8, "#22aa22"), (1.7, "#2244cc")];

fn gray(value: f64) -> String {
    // black = 1, white = 0
    let clamped = value.clamp(0.0, 1.0);
    let level = ((1.0 - clamped) * 255.0).round() as u8;
    format!("#{level:02x}{level:02x}{level:02x}")
}

/// Piecewise-linear position of `v` through the sorted cell-center values.
fn pos_of(v: f64, values: &[f64], centers: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    if v <= values[0] || v >= values[values.len() - 1] {
        // allow half a cell of overhang at the edges
        if values.len() == 1 {
            return None;
        }
    }
    if v < values[0] || v > values[values.len() - 1] {
        return None;
    }
    let ix = values.partition_point(|&x| x <= v).min(values.len() - 1);
    if ix == 0 {
        return Some(centers[0]);
    }
    let (v0, v1) = (values[ix - 1], values[ix]);
    let (c0, c1) = (centers[ix - 1], centers[ix]);
    if v1 == v0 {
        return Some(c0);
    }
    Some(c0 + (v - v0) / (v1 - v0) * (c1 - c0))
}

/// Render a grayscale heatmap of `metric` over the (p, eta) grid for one
/// method, with iso-SNR contour overlays. Requires a complete rectangular
/// grid; every (eta, p) pair must appear exactly once with a value.
pub fn render_heatmap(
    rows: &[SummaryRow],
    metric: SummaryMetric,
    method: Method,
) -> Result<String, PlotError> {
    let selected: Vec<&SummaryRow> = rows.iter().filter(|r| r.method == method).collect();
    if selected.is_empty() {
        return Err(PlotError::EmptySelection(method.to_string()));
    }

    let mut ps: Vec<f64> = selected.iter().map(|r| r.p).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    let mut etas: Vec<f64> = selected.iter().map(|r| r.eta).collect();
    etas.sort_by(f64::total_cmp);
    etas.dedup();

    if selected.len() != ps.len() * etas.len() {
        return Err(PlotError::NonRectangularGrid);
    }
    let mut grid = vec![vec![None; ps.len()]; etas.len()];
    for row in &selected {
        let px = ps.iter().position(|&v| v == row.p).expect("p present");
        let ey = etas.iter().position(|&v| v == row.eta).expect("eta present");
        if grid[ey][px].is_some() {
            return Err(PlotError::NonRectangularGrid);
        }
        grid[ey][px] = Some(metric.pick(row).ok_or(PlotError::NonRectangularGrid)?);
    }

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let cw = plot_w / ps.len() as f64;
    let ch = plot_h / etas.len() as f64;

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = write!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/><text x="{}" y="24" font-size="16" text-anchor="middle" font-family="sans-serif">mean {} ({})</text>"#,
        WIDTH / 2.0,
        metric.name(),
        method
    );

    for (ey, row) in grid.iter().enumerate() {
        for (px, value) in row.iter().enumerate() {
            let v = value.expect("grid verified complete");
            let x = MARGIN_L + px as f64 * cw;
            // eta increases upward
            let y = MARGIN_T + plot_h - (ey as f64 + 1.0) * ch;
            let _ = write!(
                svg,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="{}"/>"#,
                gray(v)
            );
        }
    }

    // axis tick labels (subsampled when dense)
    let stride = |len: usize| (len / 10).max(1);
    for (px, &p) in ps.iter().enumerate().step_by(stride(ps.len())) {
        let x = MARGIN_L + (px as f64 + 0.5) * cw;
        let _ = write!(
            svg,
            r#"<text x="{x:.2}" y="{}" font-size="11" text-anchor="middle" font-family="sans-serif">{p:.2}</text>"#,
            MARGIN_T + plot_h + 18.0
        );
    }
    for (ey, &eta) in etas.iter().enumerate().step_by(stride(etas.len())) {
        let y = MARGIN_T + plot_h - (ey as f64 + 0.5) * ch;
        let _ = write!(
            svg,
            r#"<text x="{}" y="{y:.2}" font-size="11" text-anchor="end" font-family="sans-serif">{eta:.2}</text>"#,
            MARGIN_L - 8.0
        );
    }
    let _ = write!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle" font-family="sans-serif">p</text><text x="18" y="{}" font-size="13" text-anchor="middle" font-family="sans-serif" transform="rotate(-90 18 {})">eta</text>"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 18.0,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    );

    // iso-SNR contours: snr = K * eta * sqrt(p) within one n, so
    // eta(p) = level / (K sqrt(p)).
    let sample = selected[0];
    let k = sample.snr / (sample.eta * sample.p.sqrt());
    let p_centers: Vec<f64> = (0..ps.len())
        .map(|i| MARGIN_L + (i as f64 + 0.5) * cw)
        .collect();
    let eta_centers: Vec<f64> = (0..etas.len())
        .map(|i| MARGIN_T + plot_h - (i as f64 + 0.5) * ch)
        .collect();
    if k.is_finite() && k > 0.0 {
        for (level, color) in SNR_CONTOURS {
            let mut points = Vec::new();
            let steps = 240;
            for s in 0..=steps {
                let p = ps[0] + (ps[ps.len() - 1] - ps[0]) * s as f64 / steps as f64;
                let eta = level / (k * p.sqrt());
                let (Some(x), Some(y)) = (
                    pos_of(p, &ps, &p_centers),
                    pos_of(eta, &etas, &eta_centers),
                ) else {
                    continue;
                };
                points.push(format!("{x:.2},{y:.2}"));
            }
            if points.len() > 1 {
                let _ = write!(
                    svg,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
                    points.join(" ")
                );
                let first = points[0].split(',').collect::<Vec<_>>();
                let _ = write!(
                    svg,
                    r#"<text x="{}" y="{}" font-size="11" fill="{color}" font-family="sans-serif">SNR={level}</text>"#,
                    first[0], first[1]
                );
            }
        }
    }

    let _ = write!(
        svg,
        r#"<text x="{}" y="{}" font-size="11" font-family="sans-serif">white = 0, black = 1</text></svg>"#,
        MARGIN_L,
        MARGIN_T - 10.0
    );
    Ok(svg)
}

pub fn emit_heatmap(
    rows: &[SummaryRow],
    metric: SummaryMetric,
    method: Method,
    path: &Path,
) -> Result<(), PlotError> {
    let svg = render_heatmap(rows, metric, method)?;
    std::fs::write(path, svg)?;
    Ok(())
}

/// Render per-entry min/max whiskers of the signed errors around the
/// population reference curve (drawn in red).
pub fn render_errorbar(data: &ErrorBarData) -> String {
    let n = data.reference.len();
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;

    // whisker endpoints: reference + min/max error per entry
    let mut lows = data.reference.clone();
    let mut highs = data.reference.clone();
    for (i, r) in data.reference.iter().enumerate() {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for trial in &data.errors {
            lo = lo.min(trial[i]);
            hi = hi.max(trial[i]);
        }
        if data.errors.is_empty() {
            lo = 0.0;
            hi = 0.0;
        }
        lows[i] = r + lo;
        highs[i] = r + hi;
    }

    let y_min = lows.iter().cloned().fold(f64::INFINITY, f64::min);
    let y_max = highs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (y_max - y_min).max(1e-12);
    let x_of = |i: usize| MARGIN_L + plot_w * i as f64 / (n.max(2) - 1) as f64;
    let y_of = |v: f64| MARGIN_T + plot_h * (1.0 - (v - y_min) / span);

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}"><rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = write!(
        svg,
        r#"<text x="{}" y="24" font-size="15" text-anchor="middle" font-family="sans-serif">entrywise error bars, n={} SNR={:.2} ({} trials)</text>"#,
        WIDTH / 2.0,
        data.n,
        data.snr,
        data.errors.len()
    );

    for i in 0..n {
        let x = x_of(i);
        let _ = write!(
            svg,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#888888" stroke-width="1"/>"##,
            y_of(lows[i]),
            y_of(highs[i])
        );
    }
    let curve: Vec<String> = data
        .reference
        .iter()
        .enumerate()
        .map(|(i, &v)| format!("{:.2},{:.2}", x_of(i), y_of(v)))
        .collect();
    let _ = write!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#cc2222" stroke-width="1.6"/>"##,
        curve.join(" ")
    );
    let _ = write!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle" font-family="sans-serif">entry index</text></svg>"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 18.0
    );
    svg
}

pub fn emit_errorbar(data: &ErrorBarData, path: &Path) -> Result<(), PlotError> {
    std::fs::write(path, render_errorbar(data))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(eta: f64, p: f64, value: f64) -> SummaryRow {
        SummaryRow {
            n: 100,
            p,
            eta,
            method: Method::Unnormalized,
            count: 5,
            failures: 0,
            snr: 2.0 * eta * p.sqrt(),
            rel_linf_mean: Some(value),
            rel_linf_std: Some(0.0),
            rho_max_mean: Some(value),
            rho_max_std: Some(0.0),
            rho_mean_mean: Some(value),
            rho_mean_std: Some(0.0),
        }
    }

    fn grid(value: f64) -> Vec<SummaryRow> {
        let mut rows = Vec::new();
        for &eta in &[0.25, 0.5, 0.75, 1.0] {
            for &p in &[0.25, 0.5, 0.75, 1.0] {
                rows.push(row(eta, p, value));
            }
        }
        rows
    }

    #[test]
    fn zero_metric_renders_all_white_cells() {
        let svg = render_heatmap(&grid(0.0), SummaryMetric::RelLinf, Method::Unnormalized).unwrap();
        assert_eq!(svg.matches("fill=\"#ffffff\"").count(), 16);
        assert_eq!(svg.matches("fill=\"#000000\"").count(), 0);
    }

    #[test]
    fn one_metric_renders_all_black_cells() {
        let svg = render_heatmap(&grid(1.0), SummaryMetric::RelLinf, Method::Unnormalized).unwrap();
        assert_eq!(svg.matches("fill=\"#000000\"").count(), 16);
    }

    #[test]
    fn contours_are_drawn_and_labeled() {
        let svg = render_heatmap(&grid(0.5), SummaryMetric::RhoMax, Method::Unnormalized).unwrap();
        // with K = 2.0, the SNR = 0.5 and 0.8 curves pass through the grid
        assert!(svg.contains("SNR=0.5"));
        assert!(svg.contains("polyline"));
    }

    #[test]
    fn missing_cell_is_a_grid_error() {
        let mut rows = grid(0.5);
        rows.pop();
        assert!(matches!(
            render_heatmap(&rows, SummaryMetric::RelLinf, Method::Unnormalized),
            Err(PlotError::NonRectangularGrid)
        ));
    }

    #[test]
    fn errorbar_whiskers_collapse_without_error() {
        let data = ErrorBarData {
            n: 8,
            eta: 1.0,
            p: 1.0,
            snr: 3.0,
            reference: (0..8).map(|i| i as f64 / 8.0 - 0.4).collect(),
            errors: vec![vec![0.0; 8]; 3],
        };
        let svg = render_errorbar(&data);
        // all whisker lines are zero-length: y1 == y2
        for cap in svg.split("<line ").skip(1) {
            let y1 = cap.split("y1=\"").nth(1).unwrap().split('"').next().unwrap();
            let y2 = cap.split("y2=\"").nth(1).unwrap().split('"').next().unwrap();
            assert_eq!(y1, y2);
        }
        assert!(svg.contains("#cc2222"));
    }
}
