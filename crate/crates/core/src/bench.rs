//! Seeded Monte Carlo runner: simulate a world per trial, run the requested
//! trackers over the same trace, aggregate RMSE per cell, emit CSV/markdown.

use std::fmt::{self, Write as _};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::frame::MeasurementFrame;
use crate::loss::{Identity, LossConfig, LossConfigError};
use crate::rng;
use crate::trackers::{
    BayesParams, Diagnostics, GridPosterior, NhParams, NhTracker, ParticleFilter, PfParams,
    Tracker, TrackerKind,
};
use crate::world::{simulate, Trace, WorldConfig, WorldError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("length mismatch: {estimates} estimates vs {truths} truths")]
    LengthMismatch { estimates: usize, truths: usize },
    #[error("cannot compute RMSE of an empty sequence")]
    Empty,
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("trial {trial} (sigma_o={sigma_o}, rho={rho}) failed: {source}")]
    Trial {
        trial: usize,
        sigma_o: f64,
        rho: f64,
        #[source]
        source: Box<BenchError>,
    },
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Loss(#[from] LossConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Root mean squared error between two equal-length sequences.
pub fn rmse(estimates: &[f64], truths: &[f64]) -> Result<f64, BenchError> {
    if estimates.len() != truths.len() {
        return Err(BenchError::LengthMismatch {
            estimates: estimates.len(),
            truths: truths.len(),
        });
    }
    if estimates.is_empty() {
        return Err(BenchError::Empty);
    }
    let sse: f64 = estimates
        .iter()
        .zip(truths)
        .map(|(e, t)| (e - t) * (e - t))
        .sum();
    Ok((sse / estimates.len() as f64).sqrt())
}

/// NH parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    SigmaStar,
    Alpha,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::SigmaStar => "sigma-star",
            SweepParam::Alpha => "alpha",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sigma-star" | "sigma_star" => Ok(SweepParam::SigmaStar),
            "alpha" => Ok(SweepParam::Alpha),
            other => Err(format!(
                "unknown sweep parameter `{other}` (expected sigma-star or alpha)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// World template; `noise_scale`, `outlier_frac` and `seed` are
    /// overwritten per cell and trial.
    pub world: WorldConfig,
    pub trackers: Vec<TrackerKind>,
    pub trials: usize,
    pub sigma_o_list: Vec<f64>,
    pub rho_list: Vec<f64>,
    /// When set, only NH runs, once per sweep value, on shared traces.
    pub sweep: Option<Sweep>,
    pub base_seed: u64,
    pub nh: NhParams,
    pub transition_sigma: f64,
    pub n_particles: usize,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            world: WorldConfig::default(),
            trackers: TrackerKind::ALL.to_vec(),
            trials: 100,
            sigma_o_list: vec![1.0],
            rho_list: vec![0.0, 0.01, 0.05, 0.10, 0.15, 0.20],
            sweep: None,
            base_seed: 0,
            nh: NhParams::default(),
            transition_sigma: 2.0,
            n_particles: 100,
            workers: None,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::Invalid(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.rho_list.is_empty() || self.rho_list.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return bad("rho values must be in [0, 1]");
        }
        if self.sigma_o_list.is_empty()
            || self
                .sigma_o_list
                .iter()
                .any(|s| !(*s > 0.0 && s.is_finite()))
        {
            return bad("sigma_o values must be positive");
        }
        if self.trackers.is_empty() && self.sweep.is_none() {
            return bad("no trackers requested");
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return bad("sweep needs at least one value");
            }
            let ok = match s.param {
                SweepParam::Alpha => s.values.iter().all(|a| (0.0..1.0).contains(a)),
                SweepParam::SigmaStar => s.values.iter().all(|v| *v >= 0.0 && v.is_finite()),
            };
            if !ok {
                return bad("sweep value out of range");
            }
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1");
        }
        Ok(())
    }

    fn world_for(&self, sigma_o: f64, rho: f64, trial: usize) -> WorldConfig {
        WorldConfig {
            noise_scale: sigma_o,
            outlier_frac: rho,
            seed: rng::trial_seed(self.base_seed, trial as u64),
            ..self.world.clone()
        }
    }

    /// Tracker configurations run per trial: one per tracker, or one NH run
    /// per sweep value.
    fn runs(&self) -> Vec<(TrackerKind, Option<f64>)> {
        match &self.sweep {
            Some(s) => s
                .values
                .iter()
                .map(|&v| (TrackerKind::Nh, Some(v)))
                .collect(),
            None => self.trackers.iter().map(|&k| (k, None)).collect(),
        }
    }

    fn nh_params(&self, sweep_value: Option<f64>) -> NhParams {
        let mut p = self.nh;
        if let (Some(s), Some(v)) = (&self.sweep, sweep_value) {
            match s.param {
                SweepParam::SigmaStar => p.resample_var = v,
                SweepParam::Alpha => p.discount = v,
            }
        }
        p
    }
}

/// Builds a tracker of the given kind for one trial. The NH and PF random
/// streams are derived from the trial seed, separately from the world's.
pub fn build_tracker(
    spec: &ExperimentSpec,
    kind: TrackerKind,
    world: &WorldConfig,
    sweep_value: Option<f64>,
) -> Result<Box<dyn Tracker>, BenchError> {
    let sigma_o = world.noise_scale;
    Ok(match kind {
        TrackerKind::Nh => {
            let loss = LossConfig::new(world.half_width, sigma_o, world.grid)?;
            Box::new(NhTracker::new(
                loss,
                spec.nh_params(sweep_value),
                Identity,
                rng::stream(world.seed, rng::NH_STREAM),
            ))
        }
        TrackerKind::Bayes => {
            let params = BayesParams {
                transition_sigma: spec.transition_sigma,
                like_sigma: sigma_o,
                half_width: world.half_width,
            };
            Box::new(GridPosterior::point_mass(world.grid, 0, params))
        }
        TrackerKind::Pf => {
            let params = PfParams {
                n_particles: spec.n_particles,
                transition_sigma: spec.transition_sigma,
                like_sigma: sigma_o,
                half_width: world.half_width,
            };
            Box::new(ParticleFilter::new(
                world.grid,
                0.0,
                params,
                rng::stream(world.seed, rng::PF_STREAM),
            ))
        }
    })
}

/// One row of a per-step tracker trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub true_state: f64,
    pub estimate: f64,
    pub diagnostics: Diagnostics,
}

/// Runs a tracker over a trace, returning estimates and per-step records.
pub fn track(tracker: &mut dyn Tracker, trace: &Trace) -> Vec<StepRecord> {
    trace
        .frames
        .iter()
        .zip(&trace.true_states)
        .enumerate()
        .map(|(t, (frame, &z)): (usize, (&MeasurementFrame, &f64))| {
            let estimate = tracker.step(frame);
            StepRecord {
                t: t + 1,
                true_state: z,
                estimate,
                diagnostics: tracker.diagnostics(),
            }
        })
        .collect()
}

/// RMSE of one tracker run within a trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunResult {
    pub tracker: TrackerKind,
    pub sweep_value: Option<f64>,
    pub rmse: f64,
}

/// Simulates trial `trial` of cell `(sigma_o, rho)` and runs every requested
/// tracker on that single trace.
pub fn run_trial(
    spec: &ExperimentSpec,
    sigma_o: f64,
    rho: f64,
    trial: usize,
) -> Result<Vec<RunResult>, BenchError> {
    let inner = || -> Result<Vec<RunResult>, BenchError> {
        let world = spec.world_for(sigma_o, rho, trial);
        let trace = simulate(&world)?;
        spec.runs()
            .into_iter()
            .map(|(kind, sweep_value)| {
                let mut tracker = build_tracker(spec, kind, &world, sweep_value)?;
                let estimates: Vec<f64> = track(tracker.as_mut(), &trace)
                    .iter()
                    .map(|r| r.estimate)
                    .collect();
                Ok(RunResult {
                    tracker: kind,
                    sweep_value,
                    rmse: rmse(&estimates, &trace.true_states)?,
                })
            })
            .collect()
    };
    inner().map_err(|e| BenchError::Trial {
        trial,
        sigma_o,
        rho,
        source: Box::new(e),
    })
}

/// Aggregated RMSEs of one (tracker, σ_o, ρ, sweep value) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub tracker: TrackerKind,
    pub sigma_o: f64,
    pub rho: f64,
    pub sweep_value: Option<f64>,
    /// Per-trial RMSE in trial order.
    pub rmses: Vec<f64>,
    pub mean_rmse: f64,
    /// Sample standard deviation; 0 for a single trial.
    pub std_rmse: f64,
}

impl CellResult {
    fn from_rmses(
        tracker: TrackerKind,
        sigma_o: f64,
        rho: f64,
        sweep_value: Option<f64>,
        rmses: Vec<f64>,
    ) -> Self {
        let (mean_rmse, std_rmse) = mean_std(&rmses);
        Self {
            tracker,
            sigma_o,
            rho,
            sweep_value,
            rmses,
            mean_rmse,
            std_rmse,
        }
    }

    pub fn trials(&self) -> usize {
        self.rmses.len()
    }
}

/// Mean and sample (n−1) standard deviation; the deviation is 0 when n = 1.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub sweep_param: Option<SweepParam>,
    /// Ordered by tracker, σ_o, ρ ascending, sweep value.
    pub cells: Vec<CellResult>,
}

impl AggregateResult {
    pub fn cell(&self, tracker: TrackerKind, sigma_o: f64, rho: f64) -> Option<&CellResult> {
        self.cells.iter().find(|c| {
            c.tracker == tracker && c.sigma_o == sigma_o && c.rho == rho && c.sweep_value.is_none()
        })
    }

    pub fn sweep_cell(&self, sigma_o: f64, rho: f64, value: f64) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.sigma_o == sigma_o && c.rho == rho && c.sweep_value == Some(value))
    }
}

/// Runs every trial of every cell and aggregates. Trials run in parallel;
/// the result does not depend on scheduling or worker count.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<AggregateResult, BenchError> {
    spec.validate()?;
    let mut sigmas = spec.sigma_o_list.clone();
    sigmas.sort_by(f64::total_cmp);
    sigmas.dedup();
    let mut rhos = spec.rho_list.clone();
    rhos.sort_by(f64::total_cmp);
    rhos.dedup();

    let jobs: Vec<(f64, f64, usize)> = sigmas
        .iter()
        .flat_map(|&s| {
            rhos.iter()
                .flat_map(move |&r| (0..spec.trials).map(move |t| (s, r, t)))
        })
        .collect();

    let run_all = || -> Result<Vec<Vec<RunResult>>, BenchError> {
        jobs.par_iter()
            .map(|&(s, r, t)| run_trial(spec, s, r, t))
            .collect()
    };
    let per_job = match spec.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| BenchError::Invalid(e.to_string()))?
            .install(run_all)?,
        None => run_all()?,
    };

    let runs = spec.runs();
    let mut cells = Vec::new();
    for k in 0..runs.len() {
        let (tracker, sweep_value) = runs[k];
        for &s in &sigmas {
            for &r in &rhos {
                let rmses: Vec<f64> = jobs
                    .iter()
                    .zip(&per_job)
                    .filter(|((js, jr, _), _)| *js == s && *jr == r)
                    .map(|(_, res)| res[k].rmse)
                    .collect();
                cells.push(CellResult::from_rmses(tracker, s, r, sweep_value, rmses));
            }
        }
    }
    // stable order: tracker, σ_o, ρ, sweep value
    cells.sort_by(|a, b| {
        a.tracker
            .cmp(&b.tracker)
            .then(a.sigma_o.total_cmp(&b.sigma_o))
            .then(a.rho.total_cmp(&b.rho))
            .then(
                a.sweep_value
                    .unwrap_or(0.0)
                    .total_cmp(&b.sweep_value.unwrap_or(0.0)),
            )
    });
    Ok(AggregateResult {
        sweep_param: spec.sweep.as_ref().map(|s| s.param),
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Md,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "md" => Ok(OutputFormat::Md),
            other => Err(format!("unknown format `{other}` (expected csv or md)")),
        }
    }
}

pub const TRIALS_HEADER: &str = "tracker,sigma_o,rho,sweep_param,sweep_value,trial,rmse";
pub const SUMMARY_HEADER: &str = "tracker,sigma_o,rho,mean_rmse,std_rmse,trials";
pub const SWEEP_SUMMARY_HEADER: &str =
    "tracker,sigma_o,rho,sweep_param,sweep_value,mean_rmse,std_rmse,trials";

/// Long-form per-trial CSV.
pub fn trials_csv(result: &AggregateResult) -> String {
    let mut out = String::new();
    writeln!(out, "{TRIALS_HEADER}").unwrap();
    let param = result.sweep_param.map(|p| p.as_str()).unwrap_or("");
    for c in &result.cells {
        let value = c.sweep_value.map(|v| v.to_string()).unwrap_or_default();
        for (t, r) in c.rmses.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.tracker, c.sigma_o, c.rho, param, value, t, r
            )
            .unwrap();
        }
    }
    out
}

/// Summary CSV. Sweep results carry two extra columns for the parameter.
pub fn summary_csv(result: &AggregateResult) -> String {
    let mut out = String::new();
    match result.sweep_param {
        None => {
            writeln!(out, "{SUMMARY_HEADER}").unwrap();
            for c in &result.cells {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    c.tracker,
                    c.sigma_o,
                    c.rho,
                    c.mean_rmse,
                    c.std_rmse,
                    c.trials()
                )
                .unwrap();
            }
        }
        Some(p) => {
            writeln!(out, "{SWEEP_SUMMARY_HEADER}").unwrap();
            for c in &result.cells {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    c.tracker,
                    c.sigma_o,
                    c.rho,
                    p,
                    c.sweep_value.unwrap_or(f64::NAN),
                    c.mean_rmse,
                    c.std_rmse,
                    c.trials()
                )
                .unwrap();
            }
        }
    }
    out
}

/// One table per σ_o: rows ρ, one column per tracker (or sweep value),
/// cells `mean ± std` to two decimals.
pub fn markdown(result: &AggregateResult) -> String {
    let mut sigmas: Vec<f64> = result.cells.iter().map(|c| c.sigma_o).collect();
    sigmas.sort_by(f64::total_cmp);
    sigmas.dedup();
    let mut rhos: Vec<f64> = result.cells.iter().map(|c| c.rho).collect();
    rhos.sort_by(f64::total_cmp);
    rhos.dedup();
    let mut columns: Vec<(TrackerKind, Option<f64>)> = Vec::new();
    for c in &result.cells {
        if !columns.contains(&(c.tracker, c.sweep_value)) {
            columns.push((c.tracker, c.sweep_value));
        }
    }
    let label = |(k, v): &(TrackerKind, Option<f64>)| match (v, result.sweep_param) {
        (Some(v), Some(p)) => format!("{} {}={}", k.as_str().to_uppercase(), p, v),
        _ => match k {
            TrackerKind::Nh => "NH".to_string(),
            TrackerKind::Bayes => "Bayes".to_string(),
            TrackerKind::Pf => "PF".to_string(),
        },
    };

    let mut out = String::new();
    for (n, &s) in sigmas.iter().enumerate() {
        if n > 0 {
            out.push('\n');
        }
        writeln!(out, "### sigma_o = {s}\n").unwrap();
        write!(out, "| rho |").unwrap();
        for col in &columns {
            write!(out, " {} |", label(col)).unwrap();
        }
        writeln!(out).unwrap();
        write!(out, "|---:|").unwrap();
        for _ in &columns {
            write!(out, "---:|").unwrap();
        }
        writeln!(out).unwrap();
        for &r in &rhos {
            write!(out, "| {r:.2} |").unwrap();
            for &(k, v) in &columns {
                let cell = result
                    .cells
                    .iter()
                    .find(|c| c.tracker == k && c.sweep_value == v && c.sigma_o == s && c.rho == r);
                match cell {
                    Some(c) => write!(out, " {:.2} ± {:.2} |", c.mean_rmse, c.std_rmse).unwrap(),
                    None => write!(out, " |").unwrap(),
                }
            }
            writeln!(out).unwrap();
        }
    }
    out
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf, BenchError> {
    fs::write(&path, contents).map_err(|source| BenchError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes results into `dir`: `trials.csv` and `summary.csv` for CSV,
/// `summary.md` for markdown. Returns the paths written.
pub fn emit_results(
    result: &AggregateResult,
    dir: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>, BenchError> {
    fs::create_dir_all(dir).map_err(|source| BenchError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    match format {
        OutputFormat::Csv => Ok(vec![
            write_file(dir.join("trials.csv"), &trials_csv(result))?,
            write_file(dir.join("summary.csv"), &summary_csv(result))?,
        ]),
        OutputFormat::Md => Ok(vec![write_file(dir.join("summary.md"), &markdown(result))?]),
    }
}

/// Per-step tracker trace: `t,true_state,estimate` plus diagnostics columns
/// for NH (`deleted,c_t`) and PF (`ess,collapsed`).
pub fn step_records_csv(kind: TrackerKind, records: &[StepRecord]) -> String {
    let mut out = String::new();
    let extra = match kind {
        TrackerKind::Nh => ",deleted,c_t",
        TrackerKind::Pf => ",ess,collapsed",
        TrackerKind::Bayes => "",
    };
    writeln!(out, "t,true_state,estimate{extra}").unwrap();
    for r in records {
        write!(out, "{},{},{}", r.t, r.true_state, r.estimate).unwrap();
        match r.diagnostics {
            Diagnostics::Nh { deleted, c } => {
                let c = c.map(|c| c.to_string()).unwrap_or_default();
                write!(out, ",{deleted},{c}").unwrap();
            }
            Diagnostics::Pf { ess, collapsed } => {
                write!(out, ",{ess},{}", collapsed as u8).unwrap();
            }
            Diagnostics::None => {}
        }
        writeln!(out).unwrap();
    }
    out
}
