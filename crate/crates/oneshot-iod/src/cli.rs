//! Command-line front end.
//!
//! Values are resolved flag first, then scenario file, then built-in default.
//! Diagnostics go to stderr; results go to files under `--out` or, for the
//! single-artifact commands, to stdout when `--out` is omitted.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use oneshot_core::{simulate, EstimatorConfig, NoiseModel};

use crate::error::{AppError, Result};
use crate::montecarlo::{
    self, bias_from_records, crlb_table, ellipsoid_report, parse_estimators, rmse_sweep, run_level,
    sigma_comparison_from_records, single_estimate, EstimatorKind, ExperimentSpec, DEFAULT_HISTOGRAM_BINS,
};
use crate::report;
use crate::scenario_file::{
    confidence_or_default, load_scenario, Scenario, DEFAULT_BIAS_RUNS, DEFAULT_RUNS, DEFAULT_SIGMA_GRID,
};

#[derive(Debug, Parser)]
#[command(
    name = "oneshot-iod",
    version,
    about = "One-shot orbit determination from multistatic radar delay and Doppler measurements",
    long_about = "One-shot orbit determination from multistatic radar delay and Doppler measurements.\n\n\
        Units are fixed: meters, meters per second, seconds and hertz, ECEF frame. \
        Flags override scenario-file values, which override built-in defaults."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one noisy measurement set and write measurements.csv.
    Simulate(SimulateArgs),
    /// Estimate the target state from one measurement set.
    Estimate(EstimateArgs),
    /// RMSE sweep over delay noise levels; writes rmse.csv and crlb.csv.
    Montecarlo(MontecarloArgs),
    /// Cramér–Rao bounds on position and velocity; writes crlb.csv.
    Crlb(CrlbArgs),
    /// Bias and uncertainty study at one noise level; writes bias.csv and sigma_diff.csv.
    Bias(BiasArgs),
    /// Position confidence ellipsoids of one run; writes ellipsoid.json.
    Ellipsoid(EllipsoidArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario file (JSON). Defaults to the built-in European three-transmitter, five-receiver network.
    #[arg(long, value_name = "PATH")]
    pub scenario: Option<PathBuf>,

    /// Delay noise standard deviation in seconds (s); Doppler std is sqrt(doppler_scale)*sigma_t in Hz.
    #[arg(long, value_name = "SECONDS", value_parser = parse_sigma_t)]
    pub sigma_t: Option<f64>,

    /// Seed of the noise generator (unsigned 64-bit integer).
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    /// Run index selecting the noise substream (unsigned integer).
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub run_index: u64,

    /// Output directory for measurements.csv (tau_s in s, doppler_hz in Hz). Prints to stdout if omitted.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    /// Measurement file (CSV: i, j, tau_s in s, doppler_hz in Hz). Simulated from the scenario if omitted.
    #[arg(long, value_name = "PATH")]
    pub measurements: Option<PathBuf>,

    /// Run index selecting the noise substream when simulating (unsigned integer).
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub run_index: u64,

    /// Estimators to run, comma separated: wls (two-stage weighted least squares), tri (trilateration).
    #[arg(long, value_name = "LIST", value_parser = parse_estimator_list)]
    pub estimators: Option<EstimatorList>,

    /// Output directory for estimate.json (positions in m, velocities in m/s). Prints to stdout if omitted.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MontecarloArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    /// Comma-separated delay noise levels in seconds (s), strictly increasing. --sigma-t runs a single level.
    #[arg(long, value_name = "SECONDS,...", value_delimiter = ',', conflicts_with = "sigma_t")]
    pub sigma_grid: Option<Vec<f64>>,

    /// Monte Carlo runs per noise level (>= 1).
    #[arg(long, value_name = "N", value_parser = parse_runs)]
    pub runs: Option<usize>,

    /// Estimators to run, comma separated: wls, tri.
    #[arg(long, value_name = "LIST", value_parser = parse_estimator_list)]
    pub estimators: Option<EstimatorList>,

    /// Output directory for rmse.csv (RMSE in m and m/s) and crlb.csv.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CrlbArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    /// Comma-separated delay noise levels in seconds (s). Defaults to --sigma-t, else the scenario grid.
    #[arg(long, value_name = "SECONDS,...", value_delimiter = ',', conflicts_with = "sigma_t")]
    pub sigma_grid: Option<Vec<f64>>,

    /// Output directory for crlb.csv (bounds in m and m/s). Prints to stdout if omitted.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BiasArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    /// Monte Carlo runs (>= 100).
    #[arg(long, value_name = "N", value_parser = parse_runs)]
    pub runs: Option<usize>,

    /// Estimators to run, comma separated: wls, tri. sigma_diff.csv needs both.
    #[arg(long, value_name = "LIST", value_parser = parse_estimator_list)]
    pub estimators: Option<EstimatorList>,

    /// Output directory for bias.csv, bias_hist.csv, sigma_diff.csv and sigma_diff_hist.csv (errors in m and m/s).
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EllipsoidArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    /// Run index selecting the noise substream (unsigned integer).
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub run_index: u64,

    /// Confidence level, a probability in (0, 1). Default 0.95.
    #[arg(long, value_name = "P", value_parser = parse_probability)]
    pub confidence: Option<f64>,

    /// Estimators to run, comma separated: wls, tri.
    #[arg(long, value_name = "LIST", value_parser = parse_estimator_list)]
    pub estimators: Option<EstimatorList>,

    /// Output directory for ellipsoid.json (semi-axes in m, volume in m^3). Prints to stdout if omitted.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

fn parse_sigma_t(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err("must be a finite number >= 0".into())
    }
}

fn parse_runs(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err("must be an integer >= 1".into()),
    }
}

fn parse_probability(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(p) if p > 0.0 && p < 1.0 => Ok(p),
        _ => Err("must be a probability in (0, 1)".into()),
    }
}

/// Comma-separated estimator selection as one flag value.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorList(pub Vec<EstimatorKind>);

fn parse_estimator_list(s: &str) -> std::result::Result<EstimatorList, String> {
    parse_estimators(s).map(EstimatorList)
}

/// Scenario with `--sigma-t` and `--seed` applied.
fn resolve_scenario(args: &ScenarioArgs) -> Result<Scenario> {
    let base = match &args.scenario {
        Some(path) => load_scenario(path)?,
        None => Scenario::builtin(),
    };
    let noise = NoiseModel::new(
        args.sigma_t.unwrap_or(base.noise.sigma_t),
        base.noise.doppler_variance_scale,
        args.seed.unwrap_or(base.noise.seed),
    )?;
    Ok(base.with_noise(noise))
}

fn estimator_config(s: &Scenario) -> EstimatorConfig {
    let mut c = EstimatorConfig::default();
    if let Some(p) = s.file.experiment.stage1_passes {
        c.stage1_passes = p;
    }
    c
}

fn estimators_or(flag: &Option<EstimatorList>, s: &Scenario, default: &str) -> Result<Vec<EstimatorKind>> {
    if let Some(list) = flag {
        return Ok(list.0.clone());
    }
    let joined = match &s.file.experiment.estimators {
        Some(names) => names.join(","),
        None => default.to_string(),
    };
    parse_estimators(&joined).map_err(|r| AppError::validation("experiment.estimators", r))
}

fn sigma_grid_for(sigma_t_flag: Option<f64>, grid_flag: &Option<Vec<f64>>, s: &Scenario) -> Vec<f64> {
    if let Some(st) = sigma_t_flag {
        return vec![st];
    }
    grid_flag
        .clone()
        .or_else(|| s.file.experiment.sigma_grid.clone())
        .unwrap_or_else(|| DEFAULT_SIGMA_GRID.to_vec())
}

/// Writes `bytes` to `dir/name`, or to stdout when no directory is given.
fn emit(dir: Option<&Path>, name: &str, bytes: &[u8]) -> Result<()> {
    match dir {
        Some(d) => {
            let path = d.join(name);
            report::write_artifact(&path, bytes)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| AppError::io("<stdout>", e))
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Montecarlo(a) => cmd_montecarlo(a),
        Command::Crlb(a) => cmd_crlb(a),
        Command::Bias(a) => cmd_bias(a),
        Command::Ellipsoid(a) => cmd_ellipsoid(a),
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let s = resolve_scenario(&a.scenario)?;
    let meas = simulate(&s.network, &s.truth, &s.noise, a.run_index)?;
    emit(a.out.as_deref(), "measurements.csv", &report::measurements_csv(&s.network, &meas))
}

fn cmd_estimate(a: EstimateArgs) -> Result<()> {
    let s = resolve_scenario(&a.scenario)?;
    let config = estimator_config(&s);
    let kinds = estimators_or(&a.estimators, &s, "wls")?;
    let mut estimates = Vec::new();
    let run_index = match &a.measurements {
        Some(path) => {
            if kinds.contains(&EstimatorKind::Trilateration) {
                return Err(AppError::validation(
                    "estimators",
                    "tri needs simulated ranges and cannot run from a measurement file",
                ));
            }
            let meas = report::read_measurements(path, &s.network, s.noise.sigma_t, s.noise.doppler_variance_scale)?;
            let est = oneshot_core::estimator::estimate_with(&s.network, &meas, &config)?;
            estimates.push((EstimatorKind::Wls, est));
            None
        }
        None => {
            for &k in &kinds {
                estimates.push((k, single_estimate(&s, &s.noise, a.run_index, k, &config)?));
            }
            Some(a.run_index)
        }
    };
    for (k, e) in &estimates {
        let err = (e.state.position - s.truth.position).norm();
        eprintln!("{k}: position error {err:.3e} m");
    }
    let doc = report::estimates_document(s.noise.sigma_t, run_index, &estimates);
    emit(a.out.as_deref(), "estimate.json", &report::json_bytes(&doc))
}

fn cmd_montecarlo(a: MontecarloArgs) -> Result<()> {
    let s = resolve_scenario(&a.scenario)?;
    let grid = sigma_grid_for(a.scenario.sigma_t, &a.sigma_grid, &s);
    let runs = a.runs.or(s.file.experiment.runs).unwrap_or(DEFAULT_RUNS);
    let kinds = estimators_or(&a.estimators, &s, "wls,tri")?;
    let spec = ExperimentSpec::new(grid, runs, kinds, estimator_config(&s))?;
    let rows = rmse_sweep(&s, &spec)?;
    for r in rows.iter().filter(|r| r.flagged) {
        eprintln!(
            "warning: sigma_t = {:e} s, {} {}: {} of {} runs failed",
            r.sigma_t,
            r.estimator,
            r.stage.name(),
            r.failures,
            r.failures + r.successes
        );
    }
    emit(Some(&a.out), "rmse.csv", &report::rmse_csv(&rows))?;
    let bounds = crlb_table(&s, &spec.sigma_grid)?;
    emit(Some(&a.out), "crlb.csv", &report::crlb_csv(&bounds))
}

fn cmd_crlb(a: CrlbArgs) -> Result<()> {
    let s = resolve_scenario(&a.scenario)?;
    let grid = sigma_grid_for(a.scenario.sigma_t, &a.sigma_grid, &s);
    montecarlo::validate_sigma_grid(&grid).map_err(|r| AppError::validation("sigma_grid", r))?;
    let rows = crlb_table(&s, &grid)?;
    emit(a.out.as_deref(), "crlb.csv", &report::crlb_csv(&rows))
}

fn cmd_bias(a: BiasArgs) -> Result<()> {
    let s = resolve_scenario(&a.scenario)?;
    let runs = a.runs.or(s.file.experiment.bias_runs).unwrap_or(DEFAULT_BIAS_RUNS);
    if runs < montecarlo::MIN_BIAS_RUNS {
        return Err(AppError::validation(
            "runs",
            format!("{runs} is below the minimum of {} for a bias study", montecarlo::MIN_BIAS_RUNS),
        ));
    }
    let kinds = estimators_or(&a.estimators, &s, "wls,tri")?;
    let config = estimator_config(&s);
    let sigma_t = s.noise.sigma_t;
    let records = run_level(&s, &s.noise, runs, &kinds, &config);
    let reports: Vec<_> = kinds
        .iter()
        .map(|&k| bias_from_records(sigma_t, &records, k, DEFAULT_HISTOGRAM_BINS))
        .collect();
    emit(Some(&a.out), "bias.csv", &report::bias_csv(&reports))?;
    emit(Some(&a.out), "bias_hist.csv", &report::bias_hist_csv(&reports))?;
    if kinds.len() == 2 {
        let cmp = sigma_comparison_from_records(sigma_t, &records, DEFAULT_HISTOGRAM_BINS);
        emit(Some(&a.out), "sigma_diff.csv", &report::sigma_diff_csv(&cmp))?;
        emit(Some(&a.out), "sigma_diff_hist.csv", &report::sigma_diff_hist_csv(&cmp))?;
    } else {
        eprintln!("sigma_diff.csv skipped: needs both estimators");
    }
    Ok(())
}

fn cmd_ellipsoid(a: EllipsoidArgs) -> Result<()> {
    let s = resolve_scenario(&a.scenario)?;
    let confidence = a.confidence.unwrap_or_else(|| confidence_or_default(&s.file));
    let kinds = estimators_or(&a.estimators, &s, "wls,tri")?;
    let r = ellipsoid_report(&s, &s.noise, a.run_index, &kinds, confidence, &estimator_config(&s))?;
    emit(a.out.as_deref(), "ellipsoid.json", &report::json_bytes(&report::ellipsoid_document(&r)))
}
