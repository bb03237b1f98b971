//! Bundle persistence: delimited per-run trajectories, final archives and
//! region trees, recomputable aggregates, and a JSON manifest. Given the
//! same config and base seed every output byte is identical except the
//! manifest timestamp.

use super::config::ExperimentConfig;
use crate::domain::{BoxBounds, MixedPoint, ObjectiveVector, RegionStatus, Subregion};
use crate::engine::{ArchiveEntry, IterationRecord, RunTrajectory};
use crate::error::{Error, Result};
use crate::metrics::QualityThreshold;
use crate::rng;
use std::path::{Path, PathBuf};

pub const TRAJECTORY_HEADER: [&str; 11] = [
    "run_id",
    "iteration",
    "evals",
    "active_regions",
    "pruned_regions",
    "archive_size",
    "r_k",
    "n_k",
    "m1",
    "m2",
    "m3",
];

/// An executed experiment: config echo, per-run trajectories, and the
/// cross-run aggregate derived from them.
pub struct ResultsBundle {
    pub config: ExperimentConfig,
    pub runs: Vec<RunTrajectory>,
    pub aggregate: Vec<AggregateRow>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub iteration: u32,
    pub runs: usize,
    pub evals_mean: f64,
    pub evals_std: f64,
    pub m1_mean: Option<f64>,
    pub m1_std: Option<f64>,
    pub m2_mean: Option<f64>,
    pub m2_std: Option<f64>,
    pub m3_mean: Option<f64>,
    pub m3_std: Option<f64>,
}

fn fmt(v: f64) -> String {
    // shortest round-trip representation; parsing restores the exact bits
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn parse_f64(s: &str, context: &str) -> Result<f64> {
    s.parse()
        .map_err(|e| Error::parse(context, format!("{e}: {s:?}")))
}

fn parse_opt(s: &str, context: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(s, context).map(Some)
    }
}

pub fn write_bundle(bundle: &ResultsBundle, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.toml"), bundle.config.to_toml())?;
    write_trajectories(&bundle.runs, &dir.join("trajectories.csv"))?;
    write_archives(&bundle.runs, &dir.join("archives.csv"))?;
    write_regions(&bundle.runs, &dir.join("regions.csv"))?;
    write_aggregate(&bundle.aggregate, &dir.join("aggregate.csv"))?;
    let manifest = serde_json::json!({
        "format_version": 1,
        "tool": format!("mopbnb {}", env!("CARGO_PKG_VERSION")),
        "created_unix": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        "optimizer": bundle.config.optimizer.id.0,
        "problem": bundle.config.problem.id,
        "n": bundle.config.problem.n,
        "sigma": bundle.config.noise.sigma,
        "runs": bundle.config.run.runs,
        "base_seed": bundle.config.run.base_seed,
        "notes": bundle.notes,
        "files": ["config.toml", "trajectories.csv", "archives.csv", "regions.csv", "aggregate.csv"],
    });
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).unwrap() + "\n",
    )?;
    Ok(())
}

fn write_trajectories(runs: &[RunTrajectory], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRAJECTORY_HEADER).map_err(csv_err)?;
    for run in runs {
        for r in &run.records {
            w.write_record([
                run.run_id.to_string(),
                r.iteration.to_string(),
                r.evals.to_string(),
                r.active_regions.to_string(),
                r.pruned_regions.to_string(),
                r.archive_size.to_string(),
                fmt_opt(r.r_k),
                r.n_k.map(|v| v.to_string()).unwrap_or_default(),
                fmt_opt(r.m1),
                fmt_opt(r.m2),
                fmt_opt(r.m3),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_archives(runs: &[RunTrajectory], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let (n1, n2, m) = runs
        .iter()
        .flat_map(|r| r.final_archive.first())
        .map(|e| (e.x.continuous.len(), e.x.integer.len(), e.estimate.len()))
        .next()
        .unwrap_or((0, 0, 0));
    let mut header = vec!["run_id".to_string(), "sample_id".to_string()];
    header.extend((0..n1).map(|i| format!("xc{i}")));
    header.extend((0..n2).map(|i| format!("xi{i}")));
    header.extend((0..m).map(|i| format!("est{i}")));
    w.write_record(&header).map_err(csv_err)?;
    for run in runs {
        for e in &run.final_archive {
            let mut rec = vec![run.run_id.to_string(), e.sample_id.to_string()];
            rec.extend(e.x.continuous.iter().map(|v| fmt(*v)));
            rec.extend(e.x.integer.iter().map(|v| v.to_string()));
            rec.extend(e.estimate.values().iter().map(|v| fmt(*v)));
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn status_str(s: RegionStatus) -> &'static str {
    match s {
        RegionStatus::Active => "active",
        RegionStatus::Pruned => "pruned",
        RegionStatus::Split => "split",
    }
}

fn write_regions(runs: &[RunTrajectory], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let (n1, n2) = runs
        .iter()
        .flat_map(|r| r.final_regions.first())
        .map(|r| (r.bounds.continuous.len(), r.bounds.integer.len()))
        .next()
        .unwrap_or((0, 0));
    let mut header = vec![
        "run_id".to_string(),
        "region_id".to_string(),
        "parent_id".to_string(),
        "status".to_string(),
        "pruned_at".to_string(),
        "samples".to_string(),
    ];
    for i in 0..n1 {
        header.push(format!("c{i}_lo"));
        header.push(format!("c{i}_hi"));
    }
    for i in 0..n2 {
        header.push(format!("i{i}_lo"));
        header.push(format!("i{i}_hi"));
    }
    w.write_record(&header).map_err(csv_err)?;
    for run in runs {
        for r in &run.final_regions {
            let mut rec = vec![
                run.run_id.to_string(),
                r.id.to_string(),
                r.parent_id.map(|p| p.to_string()).unwrap_or_default(),
                status_str(r.status).to_string(),
                r.pruned_at.map(|k| k.to_string()).unwrap_or_default(),
                r.sample_ids.len().to_string(),
            ];
            for &(lo, hi) in &r.bounds.continuous {
                rec.push(fmt(lo));
                rec.push(fmt(hi));
            }
            for &(lo, hi) in &r.bounds.integer {
                rec.push(lo.to_string());
                rec.push(hi.to_string());
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_aggregate(rows: &[AggregateRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "iteration",
        "runs",
        "evals_mean",
        "evals_std",
        "m1_mean",
        "m1_std",
        "m2_mean",
        "m2_std",
        "m3_mean",
        "m3_std",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.iteration.to_string(),
            r.runs.to_string(),
            fmt(r.evals_mean),
            fmt(r.evals_std),
            fmt_opt(r.m1_mean),
            fmt_opt(r.m1_std),
            fmt_opt(r.m2_mean),
            fmt_opt(r.m2_std),
            fmt_opt(r.m3_mean),
            fmt_opt(r.m3_std),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::parse("csv output", e)
}

fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::parse(path.display().to_string(), e))
}

/// Reads a bundle directory back into memory for plotting and comparison.
pub fn load_bundle(dir: &Path) -> Result<ResultsBundle> {
    let config = ExperimentConfig::from_file(&dir.join("config.toml"))?;
    let notes = load_notes(&dir.join("manifest.json")).unwrap_or_default();

    let mut runs: Vec<RunTrajectory> = Vec::new();
    let mut by_run: std::collections::BTreeMap<u64, Vec<IterationRecord>> = Default::default();
    let mut reader = csv_reader(&dir.join("trajectories.csv"))?;
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::parse("trajectories.csv", e))?;
        let run_id: u64 = rec[0].parse().map_err(|e| Error::parse("run_id", e))?;
        by_run.entry(run_id).or_default().push(IterationRecord {
            iteration: rec[1].parse().map_err(|e| Error::parse("iteration", e))?,
            evals: rec[2].parse().map_err(|e| Error::parse("evals", e))?,
            active_regions: rec[3]
                .parse()
                .map_err(|e| Error::parse("active_regions", e))?,
            pruned_regions: rec[4]
                .parse()
                .map_err(|e| Error::parse("pruned_regions", e))?,
            archive_size: rec[5]
                .parse()
                .map_err(|e| Error::parse("archive_size", e))?,
            r_k: parse_opt(&rec[6], "r_k")?,
            n_k: if rec[7].is_empty() {
                None
            } else {
                Some(rec[7].parse().map_err(|e| Error::parse("n_k", e))?)
            },
            m1: parse_opt(&rec[8], "m1")?,
            m2: parse_opt(&rec[9], "m2")?,
            m3: parse_opt(&rec[10], "m3")?,
        });
    }
    for (run_id, records) in by_run {
        let total_evals = records.last().map(|r| r.evals).unwrap_or(0);
        runs.push(RunTrajectory {
            run_id,
            seed: rng::run_seed(config.run.base_seed, run_id),
            optimizer: config.optimizer.id.0.clone(),
            records,
            final_archive: Vec::new(),
            final_regions: Vec::new(),
            total_evals,
        });
    }

    load_archives(&dir.join("archives.csv"), &config, &mut runs)?;
    load_regions(&dir.join("regions.csv"), &mut runs)?;
    let aggregate = load_aggregate(&dir.join("aggregate.csv"))?;
    Ok(ResultsBundle {
        config,
        runs,
        aggregate,
        notes,
    })
}

fn load_notes(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)?;
    let v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::parse("manifest.json", e))?;
    Ok(v["notes"]
        .as_array()
        .map(|a| {
            a.iter()
                .filter_map(|x| x.as_str().map(String::from))
                .collect()
        })
        .unwrap_or_default())
}

fn load_archives(path: &Path, config: &ExperimentConfig, runs: &mut [RunTrajectory]) -> Result<()> {
    let mut reader = csv_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::parse("archives.csv", e))?
        .clone();
    let n1 = headers.iter().filter(|h| h.starts_with("xc")).count();
    let n2 = headers.iter().filter(|h| h.starts_with("xi")).count();
    let m = headers.iter().filter(|h| h.starts_with("est")).count();
    let _ = config;
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::parse("archives.csv", e))?;
        let run_id: usize = rec[0].parse().map_err(|e| Error::parse("run_id", e))?;
        let sample_id: u64 = rec[1].parse().map_err(|e| Error::parse("sample_id", e))?;
        let mut col = 2;
        let mut continuous = Vec::with_capacity(n1);
        for _ in 0..n1 {
            continuous.push(parse_f64(&rec[col], "archive x")?);
            col += 1;
        }
        let mut integer = Vec::with_capacity(n2);
        for _ in 0..n2 {
            integer.push(
                rec[col]
                    .parse()
                    .map_err(|e| Error::parse("archive xi", e))?,
            );
            col += 1;
        }
        let mut est = Vec::with_capacity(m);
        for _ in 0..m {
            est.push(parse_f64(&rec[col], "archive estimate")?);
            col += 1;
        }
        if let Some(run) = runs.get_mut(run_id) {
            run.final_archive.push(ArchiveEntry {
                sample_id,
                x: MixedPoint {
                    continuous,
                    integer,
                },
                estimate: ObjectiveVector::new(est)?,
            });
        }
    }
    Ok(())
}

fn load_regions(path: &Path, runs: &mut [RunTrajectory]) -> Result<()> {
    let mut reader = csv_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::parse("regions.csv", e))?
        .clone();
    let n1 = headers
        .iter()
        .filter(|h| h.ends_with("_lo") && h.starts_with('c'))
        .count();
    let n2 = headers
        .iter()
        .filter(|h| h.ends_with("_lo") && h.starts_with('i'))
        .count();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::parse("regions.csv", e))?;
        let run_id: usize = rec[0].parse().map_err(|e| Error::parse("run_id", e))?;
        let id: u64 = rec[1].parse().map_err(|e| Error::parse("region_id", e))?;
        let parent_id = if rec[2].is_empty() {
            None
        } else {
            Some(rec[2].parse().map_err(|e| Error::parse("parent_id", e))?)
        };
        let status = match &rec[3] {
            "active" => RegionStatus::Active,
            "pruned" => RegionStatus::Pruned,
            "split" => RegionStatus::Split,
            other => return Err(Error::parse("region status", format!("unknown {other:?}"))),
        };
        let pruned_at = if rec[4].is_empty() {
            None
        } else {
            Some(rec[4].parse().map_err(|e| Error::parse("pruned_at", e))?)
        };
        let mut col = 6;
        let mut continuous = Vec::with_capacity(n1);
        for _ in 0..n1 {
            let lo = parse_f64(&rec[col], "region bound")?;
            let hi = parse_f64(&rec[col + 1], "region bound")?;
            continuous.push((lo, hi));
            col += 2;
        }
        let mut integer = Vec::with_capacity(n2);
        for _ in 0..n2 {
            let lo = rec[col]
                .parse()
                .map_err(|e| Error::parse("region bound", e))?;
            let hi = rec[col + 1]
                .parse()
                .map_err(|e| Error::parse("region bound", e))?;
            integer.push((lo, hi));
            col += 2;
        }
        if let Some(run) = runs.get_mut(run_id) {
            run.final_regions.push(Subregion {
                id,
                parent_id,
                bounds: BoxBounds {
                    continuous,
                    integer,
                },
                status,
                pruned_at,
                sample_ids: Vec::new(),
            });
        }
    }
    Ok(())
}

fn load_aggregate(path: &Path) -> Result<Vec<AggregateRow>> {
    let mut reader = csv_reader(path)?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::parse("aggregate.csv", e))?;
        rows.push(AggregateRow {
            iteration: rec[0].parse().map_err(|e| Error::parse("iteration", e))?,
            runs: rec[1].parse().map_err(|e| Error::parse("runs", e))?,
            evals_mean: parse_f64(&rec[2], "evals_mean")?,
            evals_std: parse_f64(&rec[3], "evals_std")?,
            m1_mean: parse_opt(&rec[4], "m1_mean")?,
            m1_std: parse_opt(&rec[5], "m1_std")?,
            m2_mean: parse_opt(&rec[6], "m2_mean")?,
            m2_std: parse_opt(&rec[7], "m2_std")?,
            m3_mean: parse_opt(&rec[8], "m3_mean")?,
            m3_std: parse_opt(&rec[9], "m3_std")?,
        });
    }
    Ok(rows)
}

/// Delimited table of final-iteration mean +- std per optimizer. All bundles
/// must describe the same problem instance.
pub fn compare_table(bundles: &[ResultsBundle]) -> Result<String> {
    if bundles.is_empty() {
        return Err(Error::config(
            "compare needs at least one bundle".to_string(),
        ));
    }
    let first = &bundles[0].config.problem;
    for b in bundles {
        if b.config.problem.id != first.id || b.config.problem.n != first.n {
            return Err(Error::config(format!(
                "bundles mix problems: {}(n={}) vs {}(n={})",
                first.id, first.n, b.config.problem.id, b.config.problem.n
            )));
        }
    }
    let fm = |v: Option<f64>, s: Option<f64>| match (v, s) {
        (Some(v), Some(s)) => format!("{v:.6} ± {s:.6}"),
        _ => "-".to_string(),
    };
    let mut out = String::from(
        "optimizer\tproblem\tn\tsigma\truns\tevals (mean ± std)\tM1 (mean ± std)\tM2 (mean ± std)\tM3 (mean ± std)\n",
    );
    for b in bundles {
        let last = b
            .aggregate
            .last()
            .ok_or_else(|| Error::config("bundle has no aggregate rows".to_string()))?;
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{:.1} ± {:.1}\t{}\t{}\t{}\n",
            b.config.optimizer.id.0,
            b.config.problem.id,
            b.config.problem.n,
            b.config.noise.sigma,
            last.runs,
            last.evals_mean,
            last.evals_std,
            fm(last.m1_mean, last.m1_std),
            fm(last.m2_mean, last.m2_std),
            fm(last.m3_mean, last.m3_std),
        ));
    }
    Ok(out)
}

/// Writes a precomputed frontier grid and quality threshold to cache files.
pub fn write_oracle_cache(
    dir: &Path,
    frontier: &[ObjectiveVector],
    threshold: Option<&QualityThreshold>,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let fpath = dir.join("frontier.csv");
    let mut w = csv::Writer::from_path(&fpath)?;
    let m = frontier.first().map(|v| v.len()).unwrap_or(0);
    w.write_record((0..m).map(|i| format!("f{i}")))
        .map_err(csv_err)?;
    for v in frontier {
        w.write_record(v.values().iter().map(|x| fmt(*x)))
            .map_err(csv_err)?;
    }
    w.flush()?;
    written.push(fpath);
    if let Some(t) = threshold {
        let tpath = dir.join("threshold.json");
        let json = serde_json::json!({
            "delta": t.delta,
            "y_delta": t.y_delta,
            "mc_points": t.mc_points,
            "rng_seed": t.rng_seed,
        });
        std::fs::write(&tpath, serde_json::to_string_pretty(&json).unwrap() + "\n")?;
        written.push(tpath);
    }
    Ok(written)
}
