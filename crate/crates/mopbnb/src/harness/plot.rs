//! Static SVG figures: objective-space frontier scatter, domain-space
//! partition boxes annotated with pruning iterations, and metric-vs-
//! evaluations curves. Output bytes depend only on the bundle contents.

use super::bundle::ResultsBundle;
use crate::domain::RegionStatus;
use crate::error::{Error, Result};
use crate::problems::true_frontier;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Frontier,
    Partition,
    MetricCurves,
}

impl std::str::FromStr for PlotKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frontier" => Ok(PlotKind::Frontier),
            "partition" => Ok(PlotKind::Partition),
            "metric-curves" | "metric_curves" => Ok(PlotKind::MetricCurves),
            other => Err(Error::config(format!(
                "unknown plot kind {other:?} (frontier | partition | metric-curves)"
            ))),
        }
    }
}

const W: f64 = 720.0;
const H: f64 = 540.0;
const MARGIN: f64 = 60.0;
const CURVE_COLORS: [&str; 6] = [
    "#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#ff7f0e", "#17becf",
];

struct Canvas {
    body: String,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Canvas {
    fn new(x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let mut c = Canvas {
            body: String::new(),
            x_range,
            y_range,
        };
        let _ = writeln!(
            c.body,
            "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>"
        );
        c
    }

    fn x(&self, v: f64) -> f64 {
        let (lo, hi) = self.x_range;
        MARGIN + (v - lo) / (hi - lo) * (W - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        let (lo, hi) = self.y_range;
        H - MARGIN - (v - lo) / (hi - lo) * (H - 2.0 * MARGIN)
    }

    fn axes(&mut self, x_label: &str, y_label: &str) {
        let x0 = MARGIN;
        let x1 = W - MARGIN;
        let y0 = H - MARGIN;
        let y1 = MARGIN;
        let _ = write!(
            self.body,
            "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
             <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
        );
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = self.x_range.0 + t * (self.x_range.1 - self.x_range.0);
            let yv = self.y_range.0 + t * (self.y_range.1 - self.y_range.0);
            let xp = self.x(xv);
            let yp = self.y(yv);
            let _ = write!(
                self.body,
                "<line x1=\"{xp:.2}\" y1=\"{y0}\" x2=\"{xp:.2}\" y2=\"{}\" stroke=\"black\"/>\n\
                 <text x=\"{xp:.2}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{xv:.3}</text>\n",
                y0 + 5.0,
                y0 + 18.0
            );
            let _ = write!(
                self.body,
                "<line x1=\"{}\" y1=\"{yp:.2}\" x2=\"{x0}\" y2=\"{yp:.2}\" stroke=\"black\"/>\n\
                 <text x=\"{}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{yv:.3}</text>\n",
                x0 - 5.0,
                x0 - 8.0,
                yp + 4.0
            );
        }
        let _ = write!(
            self.body,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">{x_label}</text>\n\
             <text x=\"16\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{y_label}</text>\n",
            W / 2.0,
            H - 16.0,
            H / 2.0,
            H / 2.0
        );
    }

    fn title(&mut self, text: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{:.1}\" y=\"28\" font-size=\"15\" text-anchor=\"middle\">{text}</text>",
            W / 2.0
        );
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n{}</svg>\n",
            self.body
        )
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(1e-9);
    (lo - pad, hi + pad)
}

/// Emits the requested figures next to the bundles. Frontier and partition
/// plots describe a single bundle; metric curves overlay one curve per
/// bundle and metric.
pub fn emit_plots(
    bundles: &[ResultsBundle],
    kind: PlotKind,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    if bundles.is_empty() {
        return Err(Error::config(
            "plotting needs at least one bundle".to_string(),
        ));
    }
    std::fs::create_dir_all(out_dir)?;
    match kind {
        PlotKind::Frontier => {
            if bundles.len() != 1 {
                return Err(Error::config(
                    "frontier plot takes exactly one bundle".to_string(),
                ));
            }
            let path = out_dir.join("frontier.svg");
            std::fs::write(&path, frontier_svg(&bundles[0])?)?;
            Ok(vec![path])
        }
        PlotKind::Partition => {
            if bundles.len() != 1 {
                return Err(Error::config(
                    "partition plot takes exactly one bundle".to_string(),
                ));
            }
            let path = out_dir.join("partition.svg");
            std::fs::write(&path, partition_svg(&bundles[0])?)?;
            Ok(vec![path])
        }
        PlotKind::MetricCurves => {
            let mut written = Vec::new();
            for (metric, label) in [(1usize, "M1"), (2, "M2"), (3, "M3")] {
                let path = out_dir.join(format!("{}_curves.svg", label.to_lowercase()));
                std::fs::write(&path, metric_curves_svg(bundles, metric, label)?)?;
                written.push(path);
            }
            Ok(written)
        }
    }
}

fn frontier_svg(bundle: &ResultsBundle) -> Result<String> {
    let cfg = &bundle.config;
    // cap the drawn oracle points; the metric oracle itself stays dense
    let drawn_res = cfg.oracle.frontier_resolution.clamp(2, 1500);
    let oracle = true_frontier(&cfg.problem.id, cfg.problem.n, drawn_res)?;
    let archive: Vec<&crate::engine::ArchiveEntry> = bundle
        .runs
        .first()
        .map(|r| r.final_archive.iter().collect())
        .unwrap_or_default();

    let xs = oracle
        .iter()
        .map(|v| v[0])
        .chain(archive.iter().map(|e| e.estimate[0]));
    let ys = oracle
        .iter()
        .map(|v| v[1])
        .chain(archive.iter().map(|e| e.estimate[1]));
    let mut canvas = Canvas::new(padded_range(xs), padded_range(ys));
    canvas.title(&format!(
        "{} n={}: estimated front of {} (run 0) over the true frontier",
        cfg.problem.id, cfg.problem.n, cfg.optimizer.id.0
    ));
    canvas.axes("f1", "f2");
    for v in &oracle {
        let _ = writeln!(
            canvas.body,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.2\" fill=\"#1f77b4\"/>",
            canvas.x(v[0]),
            canvas.y(v[1])
        );
    }
    for e in &archive {
        let _ = writeln!(
            canvas.body,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.6\" fill=\"#d62728\" fill-opacity=\"0.8\"/>",
            canvas.x(e.estimate[0]),
            canvas.y(e.estimate[1])
        );
    }
    Ok(canvas.finish())
}

fn partition_svg(bundle: &ResultsBundle) -> Result<String> {
    let cfg = &bundle.config;
    let run = bundle
        .runs
        .first()
        .ok_or_else(|| Error::config("bundle holds no runs".to_string()))?;
    let leaves: Vec<_> = run
        .final_regions
        .iter()
        .filter(|r| r.status != RegionStatus::Split)
        .collect();
    let two_continuous = leaves
        .first()
        .map(|r| r.bounds.continuous.len() == 2 && r.bounds.integer.is_empty())
        .unwrap_or(false);
    if !two_continuous {
        return Err(Error::Unsupported(format!(
            "partition plots need a two-dimensional continuous domain; {} n={} does not qualify",
            cfg.problem.id, cfg.problem.n
        )));
    }
    let xr = padded_range(
        leaves
            .iter()
            .flat_map(|r| [r.bounds.continuous[0].0, r.bounds.continuous[0].1]),
    );
    let yr = padded_range(
        leaves
            .iter()
            .flat_map(|r| [r.bounds.continuous[1].0, r.bounds.continuous[1].1]),
    );
    let mut canvas = Canvas::new(xr, yr);
    canvas.title(&format!(
        "{} n=2: final partition of {} (run 0); numbers mark the pruning iteration",
        cfg.problem.id, cfg.optimizer.id.0
    ));
    canvas.axes("x1", "x2");
    for r in &leaves {
        let (x_lo, x_hi) = r.bounds.continuous[0];
        let (y_lo, y_hi) = r.bounds.continuous[1];
        let x = canvas.x(x_lo);
        let y = canvas.y(y_hi);
        let w = canvas.x(x_hi) - x;
        let h = canvas.y(y_lo) - y;
        let fill = match r.status {
            RegionStatus::Active => "#9ecae9",
            _ => "none",
        };
        let _ = writeln!(
            canvas.body,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\" stroke=\"#444444\" stroke-width=\"0.8\"/>"
        );
        if let Some(k) = r.pruned_at {
            let font = (h * 0.5).min(w * 0.4).clamp(5.0, 14.0);
            let _ = writeln!(
                canvas.body,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"{font:.1}\" text-anchor=\"middle\">{k}</text>",
                x + w / 2.0,
                y + h / 2.0 + font / 3.0
            );
        }
    }
    Ok(canvas.finish())
}

fn metric_curves_svg(bundles: &[ResultsBundle], metric: usize, label: &str) -> Result<String> {
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for b in bundles {
        let pts: Vec<(f64, f64)> = b
            .aggregate
            .iter()
            .filter_map(|row| {
                let v = match metric {
                    1 => row.m1_mean,
                    2 => row.m2_mean,
                    _ => row.m3_mean,
                };
                v.map(|v| (row.evals_mean, v))
            })
            .collect();
        series.push((b.config.optimizer.id.0.clone(), pts));
    }
    let xs = series.iter().flat_map(|(_, pts)| pts.iter().map(|p| p.0));
    let ys = series.iter().flat_map(|(_, pts)| pts.iter().map(|p| p.1));
    let mut canvas = Canvas::new(padded_range(xs), padded_range(ys));
    let problem = &bundles[0].config.problem;
    canvas.title(&format!(
        "{label} vs evaluations on {} n={}",
        problem.id, problem.n
    ));
    canvas.axes("cumulative evaluations", label);
    for (i, (name, pts)) in series.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let color = CURVE_COLORS[i % CURVE_COLORS.len()];
        let path: String = pts
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", canvas.x(*x), canvas.y(*y)))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            canvas.body,
            "<polyline points=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>"
        );
        let _ = writeln!(
            canvas.body,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"{color}\">{name}</text>",
            W - MARGIN - 110.0,
            MARGIN + 16.0 * (i as f64 + 1.0)
        );
    }
    Ok(canvas.finish())
}
