//! Command-line front end: run experiments, plot bundles, compare bundles,
//! and precompute metric oracles. Exit codes: 0 success, 2 configuration
//! error, 3 I/O error.

use clap::{Args, Parser, Subcommand};
use mopbnb::error::Error;
use mopbnb::harness::{self, ExperimentConfig, PlotKind};
use mopbnb::metrics::{estimate_y_delta, FrontierOracle};
use mopbnb::problems::{noisy_by_id, true_frontier, NoiseSpec};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "mopbnb",
    version,
    about = "Multi-objective probabilistic branch and bound benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a seeded multi-run experiment and write a results bundle.
    Run(RunArgs),
    /// Render figures from a results bundle.
    Plot(PlotArgs),
    /// Tabulate final metrics across bundles of the same problem.
    Compare(CompareArgs),
    /// Precompute a frontier grid and quality threshold to cache files.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file (TOML); flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    /// mopbnb-so | mopbnb-wr | uniform | nsga2
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    iters: Option<u32>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Output directory for the results bundle.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Bundle directories (metric-curves accepts several, one curve each).
    #[arg(required = true)]
    bundles: Vec<PathBuf>,
    /// frontier | partition | metric-curves
    #[arg(long, default_value = "frontier")]
    kind: String,
    /// Output directory; defaults to `<first bundle>/plots`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(required = true)]
    bundles: Vec<PathBuf>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 10_000)]
    resolution: usize,
    /// Also estimate y(delta, S) at this delta via Monte Carlo.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    mc_points: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    init_thread_pool();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Plot(args) => cmd_plot(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Oracle(args) => cmd_oracle(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

/// MOPBNB_THREADS limits the worker pool; unset uses every core.
fn init_thread_pool() {
    #[cfg(feature = "parallel")]
    if let Ok(v) = std::env::var("MOPBNB_THREADS") {
        if let Ok(threads) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Error> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(p) = args.problem {
        cfg.problem.id = p;
    }
    if let Some(n) = args.dim {
        cfg.problem.n = n;
    }
    if let Some(o) = args.optimizer {
        cfg.optimizer.id = mopbnb::harness::config::OptimizerId(o);
    }
    if let Some(i) = args.iters {
        cfg.run.iterations = i;
        cfg.optimizer.nsga2.generations = i;
    }
    if let Some(r) = args.runs {
        cfg.run.runs = r;
    }
    if let Some(s) = args.seed {
        cfg.run.base_seed = s;
    }
    if let Some(s) = args.sigma {
        cfg.noise.sigma = s;
    }
    if let Some(out) = args.out {
        cfg.run.out_dir = Some(out.display().to_string());
    }
    let out_dir = cfg.run.out_dir.clone().ok_or_else(|| {
        Error::config("no output directory: set run.out_dir or pass --out".to_string())
    })?;

    let bundle = harness::run_experiment(&cfg)?;
    harness::write_bundle(&bundle, std::path::Path::new(&out_dir))?;
    let last = bundle.aggregate.last();
    println!(
        "wrote {} runs of {} on {} n={} to {}",
        bundle.runs.len(),
        cfg.optimizer.id.0,
        cfg.problem.id,
        cfg.problem.n,
        out_dir
    );
    if let Some(row) = last {
        println!(
            "final checkpoint: evals {:.1} ± {:.1}, M1 {}, M2 {}, M3 {}",
            row.evals_mean,
            row.evals_std,
            fmt_opt(row.m1_mean),
            fmt_opt(row.m2_mean),
            fmt_opt(row.m3_mean),
        );
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}"))
        .unwrap_or_else(|| "-".to_string())
}

fn cmd_plot(args: PlotArgs) -> Result<(), Error> {
    let kind: PlotKind = args.kind.parse()?;
    let bundles: Vec<_> = args
        .bundles
        .iter()
        .map(|p| harness::load_bundle(p))
        .collect::<Result<_, _>>()?;
    let out = args.out.unwrap_or_else(|| args.bundles[0].join("plots"));
    let files = harness::emit_plots(&bundles, kind, &out)?;
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), Error> {
    let bundles: Vec<_> = args
        .bundles
        .iter()
        .map(|p| harness::load_bundle(p))
        .collect::<Result<_, _>>()?;
    let table = harness::compare_table(&bundles)?;
    match args.out {
        Some(path) => {
            std::fs::write(&path, &table)?;
            println!("wrote {}", path.display());
        }
        None => print!("{table}"),
    }
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<(), Error> {
    let frontier = true_frontier(&args.problem, args.dim, args.resolution)?;
    let threshold = match args.delta {
        Some(delta) => {
            let oracle = FrontierOracle::new(frontier.clone(), &args.problem, args.resolution)?;
            let problem = noisy_by_id(&args.problem, args.dim, NoiseSpec::new(0.0)?)?;
            Some(estimate_y_delta(
                &problem,
                delta,
                args.mc_points,
                &oracle,
                args.seed,
            )?)
        }
        None => None,
    };
    let files = harness::write_oracle_cache(&args.out, &frontier, threshold.as_ref())?;
    for f in files {
        println!("wrote {}", f.display());
    }
    if let Some(t) = threshold {
        println!("y({}, S) = {}", t.delta, t.y_delta);
    }
    Ok(())
}
