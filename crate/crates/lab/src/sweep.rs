//! `sweep`: ten norms per corpus weight, log-log slope fits and a plot.

use rayon::prelude::*;

use haarmul_core::paraproduct::QLabel;
use haarmul_core::weight::corpus;

use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::norms::{measure_row, norm_options, sigma_for, sweep_columns, SweepRow};
use crate::output::{num, write_csv, write_file};
use crate::Outcome;

/// Rows below this characteristic are left out of the fits.
pub const FIT_MIN_A2: f64 = 2.0;
/// Cap on `norm / (|sigma|_inf [w]_A2)` for every operator.
pub const RATIO_CAP: f64 = 8.0;
pub const SLOPE_CAP: f64 = 1.05;
/// Tighter cap for the two compositions with a square-root bound.
pub const SQRT_SLOPE_CAP: f64 = 0.55;
pub const SQRT_TERMS: [&str; 2] = ["q_10_01", "q_00_00"];

/// Column names of the ten measured operators.
pub fn operator_columns() -> Vec<String> {
    let mut v: Vec<String> = QLabel::all().iter().map(|q| q.name()).collect();
    v.push("conjugated".into());
    v
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fit {
    pub operator: String,
    pub slope: f64,
    pub intercept: f64,
    pub rows: usize,
    /// Largest `norm / (|sigma|_inf [w]_A2)` over all usable rows.
    pub max_ratio: f64,
    pub slope_cap: Option<f64>,
}

impl Fit {
    pub fn pass(&self) -> bool {
        let slope_ok = match self.slope_cap {
            Some(cap) => self.slope.is_nan() || self.slope <= cap,
            None => true,
        };
        slope_ok && self.max_ratio <= RATIO_CAP
    }
}

/// Least-squares line through `(x, y)`; `NaN` with fewer than two distinct `x`.
pub fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    if points.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn fit_rows(rows: &[SweepRow]) -> Vec<Fit> {
    operator_columns()
        .into_iter()
        .map(|op| {
            let usable = rows.iter().filter(|r| r.status() == "ok" && r.sigma_norm > 0.0);
            let max_ratio = usable.clone().filter_map(|r| r.norm(&op).map(|v| v / (r.sigma_norm * r.a2))).fold(0.0, f64::max);
            let points: Vec<(f64, f64)> = usable
                .filter(|r| r.a2 >= FIT_MIN_A2)
                .filter_map(|r| r.norm(&op).filter(|&v| v > 0.0).map(|v| (r.a2.ln(), (v / r.sigma_norm).ln())))
                .collect();
            let (slope, intercept) = least_squares(&points);
            let slope_cap = match op.as_str() {
                "conjugated" => None,
                o if SQRT_TERMS.contains(&o) => Some(SQRT_SLOPE_CAP),
                _ => Some(SLOPE_CAP),
            };
            Fit { operator: op, slope, intercept, rows: points.len(), max_ratio, slope_cap }
        })
        .collect()
}

pub fn fit_csv(fits: &[Fit]) -> String {
    fits.iter()
        .map(|f| {
            format!(
                "{},{},{},{},{},{},{}\n",
                f.operator,
                num(f.slope),
                num(f.intercept),
                f.rows,
                num(f.max_ratio),
                f.slope_cap.map(num).unwrap_or_else(|| "none".into()),
                if f.pass() { "pass" } else { "fail" }
            )
        })
        .collect()
}

const COLORS: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

/// Log-log plot of `norm / |sigma|_inf` against `[w]_A2` with the fitted lines.
pub fn render_svg(rows: &[SweepRow], fits: &[Fit]) -> String {
    let (w, h, m) = (760.0, 520.0, 60.0);
    let pts: Vec<(usize, f64, f64)> = operator_columns()
        .iter()
        .enumerate()
        .flat_map(|(k, op)| {
            rows.iter()
                .filter(|r| r.sigma_norm > 0.0)
                .filter_map(move |r| r.norm(op).filter(|&v| v > 0.0).map(|v| (k, r.a2.log10(), (v / r.sigma_norm).log10())))
        })
        .collect();
    let fold = |f: fn(f64, f64) -> f64, init: f64, sel: fn(&(usize, f64, f64)) -> f64| pts.iter().map(sel).fold(init, f);
    let (x0, x1) = (fold(f64::min, 0.0, |p| p.1), fold(f64::max, 1.0, |p| p.1));
    let (y0, y1) = (fold(f64::min, 0.0, |p| p.2) - 0.1, fold(f64::max, 1.0, |p| p.2) + 0.1);
    let sx = |x: f64| m + (x - x0) / (x1 - x0).max(1e-9) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0).max(1e-9) * (h - 2.0 * m);
    let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"11\">\n");
    s.push_str(&format!("<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"));
    s.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{0}\" stroke=\"black\"/>\n",
        h - m,
        w - m
    ));
    for t in (x0.floor() as i32)..=(x1.ceil() as i32) {
        let x = sx(t as f64);
        if x >= m - 0.5 && x <= w - m + 0.5 {
            s.push_str(&format!("<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">1e{t}</text>\n", h - m + 16.0));
        }
    }
    for t in (y0.floor() as i32)..=(y1.ceil() as i32) {
        let y = sy(t as f64);
        if y >= m - 0.5 && y <= h - m + 0.5 {
            s.push_str(&format!("<text x=\"{:.1}\" y=\"{y:.1}\" text-anchor=\"end\">1e{t}</text>\n", m - 6.0));
        }
    }
    s.push_str(&format!("<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">[w]_A2</text>\n", w / 2.0, h - 16.0));
    s.push_str(&format!("<text x=\"16\" y=\"{:.1}\" transform=\"rotate(-90 16 {:.1})\" text-anchor=\"middle\">norm / |sigma|_inf</text>\n", h / 2.0, h / 2.0));
    for &(k, x, y) in &pts {
        s.push_str(&format!("<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{}\"/>\n", sx(x), sy(y), COLORS[k]));
    }
    let ln10 = std::f64::consts::LN_10;
    for (k, f) in fits.iter().enumerate() {
        if f.slope.is_finite() {
            let xa = FIT_MIN_A2.log10().max(x0);
            let ya = (f.intercept + f.slope * xa * ln10) / ln10;
            let yb = (f.intercept + f.slope * x1 * ln10) / ln10;
            s.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{}\" stroke-width=\"1.2\"/>\n",
                sx(xa),
                sy(ya),
                sx(x1),
                sy(yb),
                COLORS[k]
            ));
        }
        let ly = m + 14.0 * k as f64;
        s.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{}\"/><text x=\"{:.1}\" y=\"{:.1}\">{} slope {:.3}</text>\n",
            m + 10.0,
            ly - 9.0,
            COLORS[k],
            m + 24.0,
            ly,
            f.operator,
            f.slope
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Corpus rows in corpus order; members are measured in parallel.
pub fn sweep_rows(config: &ExperimentConfig) -> LabResult<(Vec<SweepRow>, Vec<String>)> {
    let c = corpus::<f64>(&config.corpus_spec())?;
    let grid = config.corpus_spec();
    let sigma = sigma_for(config.sigma, haarmul_core::GridSpec::new(grid.dim, grid.depth)?, config.seed);
    let opts = norm_options(config);
    let rows = c
        .members
        .par_iter()
        .map(|m| measure_row(&m.id, m.recipe.family.name(), m.recipe.family.seed(), &m.weight, &sigma, &opts))
        .collect::<LabResult<Vec<_>>>()?;
    Ok((rows, c.warnings))
}

pub fn cmd_sweep(config: &ExperimentConfig) -> LabResult<Outcome> {
    let (rows, warnings) = sweep_rows(config)?;
    write_sweep(config, &rows, &warnings)
}

/// Writes the rows, the fit summary and the plot.
pub fn write_sweep(config: &ExperimentConfig, rows: &[SweepRow], warnings: &[String]) -> LabResult<Outcome> {
    let fits = fit_rows(rows);
    let body: String = rows.iter().map(|r| format!("{}\n", r.to_csv())).collect();
    let mut files = vec![
        write_csv(config, "sweep.csv", "sweep", &sweep_columns(), &body)?,
        write_csv(config, "fit.csv", "sweep fit", "operator,slope,intercept,rows,max_ratio,slope_cap,status", &fit_csv(&fits))?,
    ];
    if config.svg {
        files.push(write_file(&config.out.join("sweep.svg"), &render_svg(rows, &fits))?);
    }
    let triangle_ok = rows.iter().all(|r| r.triangle_ok() != Some(false));
    let passed = triangle_ok && fits.iter().all(Fit::pass);
    let mut summary = format!("{} rows, triangle inequality {}", rows.len(), if triangle_ok { "holds" } else { "VIOLATED" });
    for f in &fits {
        summary.push_str(&format!(
            "\n  {:<11} slope {:>8.4}  max ratio {:>8.4}  {}",
            f.operator,
            f.slope,
            f.max_ratio,
            if f.pass() { "pass" } else { "FAIL" }
        ));
    }
    for r in rows.iter().filter(|r| r.status() != "ok") {
        summary.push_str(&format!("\n  {} flagged: {}", r.weight_id, r.status()));
    }
    for w in warnings {
        summary.push_str(&format!("\nwarning: {w}"));
    }
    Ok(Outcome { passed, files, summary })
}
