use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use nhtrack::bench::{
    build_tracker, emit_results, run_experiment, step_records_csv, track, ExperimentSpec,
    OutputFormat, Sweep, SweepParam,
};
use nhtrack::rng;
use nhtrack::trackers::{NhParams, TrackerKind};
use nhtrack::world::{simulate, WorldConfig};

#[derive(Parser)]
#[command(name = "nhtrack", version, about = "Robust 1D tracking benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo RMSE table over outlier fractions.
    Bench(BenchArgs),
    /// Draw one trace and optionally run trackers over it, step by step.
    Simulate(SimulateArgs),
    /// Re-run the NH tracker over a range of sigma-star or alpha values.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct Common {
    /// Pulse half width W.
    #[arg(long, default_value_t = 50)]
    half_width: usize,
    /// Steps per trial T.
    #[arg(long, default_value_t = 200)]
    horizon: usize,
    /// NH pool size N.
    #[arg(long, default_value_t = 100)]
    actions: usize,
    /// NH discount alpha.
    #[arg(long, default_value_t = 0.02)]
    alpha: f64,
    /// NH resampling variance sigma-star.
    #[arg(long, default_value_t = 400.0)]
    sigma_star: f64,
    /// Transition std sigma-d of the Bayes filter and particle filter.
    #[arg(long, default_value_t = 2.0)]
    sigma_d: f64,
    /// Number of particles.
    #[arg(long, default_value_t = 100)]
    particles: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Noise scale(s), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    sigma_o: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,0.01,0.05,0.10,0.15,0.20"
    )]
    rho_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "nh,bayes,pf")]
    trackers: Vec<TrackerKind>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 1.0)]
    sigma_o: f64,
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trial index under `--seed`, matching the numbering used by `bench`.
    #[arg(long, default_value_t = 0)]
    trial: u64,
    #[arg(long)]
    out: PathBuf,
    /// Include all grid measurements in the trace CSV.
    #[arg(long)]
    frames: bool,
    /// Also run these trackers and write `<out-stem>_<tracker>.csv` beside `--out`.
    #[arg(long, value_delimiter = ',')]
    track: Vec<TrackerKind>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    param: SweepParam,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    sigma_o: f64,
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    common: Common,
}

fn base_spec(c: &Common) -> ExperimentSpec {
    ExperimentSpec {
        world: WorldConfig {
            half_width: c.half_width,
            horizon: c.horizon,
            ..WorldConfig::default()
        },
        nh: NhParams {
            n_actions: c.actions,
            discount: c.alpha,
            resample_var: c.sigma_star,
        },
        transition_sigma: c.sigma_d,
        n_particles: c.particles,
        ..ExperimentSpec::default()
    }
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn bench(args: BenchArgs) -> Result<()> {
    let spec = ExperimentSpec {
        trackers: args.trackers,
        trials: args.trials,
        sigma_o_list: args.sigma_o,
        rho_list: args.rho_list,
        base_seed: args.seed,
        workers: args.workers,
        ..base_spec(&args.common)
    };
    let result = run_experiment(&spec)?;
    report(&emit_results(&result, &args.out, args.format)?);
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let spec = ExperimentSpec {
        trials: args.trials,
        sigma_o_list: vec![args.sigma_o],
        rho_list: vec![args.rho],
        sweep: Some(Sweep {
            param: args.param,
            values: args.values,
        }),
        base_seed: args.seed,
        workers: args.workers,
        ..base_spec(&args.common)
    };
    let result = run_experiment(&spec)?;
    report(&emit_results(&result, &args.out, args.format)?);
    Ok(())
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    out.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn simulate_cmd(args: SimulateArgs) -> Result<()> {
    let spec = base_spec(&args.common);
    let world = WorldConfig {
        noise_scale: args.sigma_o,
        outlier_frac: args.rho,
        seed: rng::trial_seed(args.seed, args.trial),
        ..spec.world.clone()
    };
    let trace = simulate(&world)?;
    let mut buf = Vec::new();
    trace.write_csv(&mut buf, args.frames)?;
    fs::write(&args.out, buf).with_context(|| format!("writing {}", args.out.display()))?;
    let mut written = vec![args.out.clone()];
    for kind in args.track {
        let mut tracker = build_tracker(&spec, kind, &world, None)?;
        let records = track(tracker.as_mut(), &trace);
        let path = sibling(&args.out, kind.as_str());
        fs::write(&path, step_records_csv(kind, &records))
            .with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    report(&written);
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Bench(a) => bench(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Sweep(a) => sweep(a),
    }
}
