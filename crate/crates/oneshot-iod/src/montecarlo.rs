//! Monte Carlo experiments: RMSE sweep, bias study, uncertainty comparison.
//!
//! Every run draws its noise from its own ChaCha20 stream (`run_index`), and
//! both estimators see the same draws. Runs execute on the rayon pool and are
//! collected in run order, so results do not depend on scheduling.

use std::fmt;

use oneshot_core::crlb::crlb;
use oneshot_core::ellipsoid::{ellipsoid_export, Ellipsoid};
use oneshot_core::estimator::estimate_with;
use oneshot_core::trilateration::{derive_ranges, trilaterate};
use oneshot_core::{simulate, EstimateWithCovariance, EstimatorConfig, NoiseModel, StateVector};
use rayon::prelude::*;

use crate::error::{AppError, Result};
use crate::scenario_file::Scenario;

/// Share of failed runs above which a level is flagged.
pub const FAILURE_FLAG_FRACTION: f64 = 0.10;
pub const MIN_BIAS_RUNS: usize = 100;
pub const DEFAULT_HISTOGRAM_BINS: usize = 61;
/// Histogram half-width in standard deviations.
pub const HISTOGRAM_SPAN_STD: f64 = 4.0;

pub const AXES: [&str; 6] = ["x", "y", "z", "vx", "vy", "vz"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    Wls,
    Trilateration,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Wls => "wls",
            EstimatorKind::Trilateration => "tri",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses a comma list such as `wls,tri`. Order and duplicates are
/// normalized away.
pub fn parse_estimators(list: &str) -> std::result::Result<Vec<EstimatorKind>, String> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let kind = match name.to_ascii_lowercase().as_str() {
            "wls" => EstimatorKind::Wls,
            "tri" | "trilateration" => EstimatorKind::Trilateration,
            other => return Err(format!("unknown estimator {other:?} (expected wls or tri)")),
        };
        out.push(kind);
    }
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err("no estimator selected".into());
    }
    Ok(out)
}

pub fn validate_sigma_grid(grid: &[f64]) -> std::result::Result<(), String> {
    if grid.is_empty() {
        return Err("empty".into());
    }
    if let Some(s) = grid.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(format!("{s} is not strictly positive"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err("must be strictly increasing".into());
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Delay noise levels, s.
    pub sigma_grid: Vec<f64>,
    pub runs: usize,
    pub estimators: Vec<EstimatorKind>,
    pub config: EstimatorConfig,
}

impl ExperimentSpec {
    pub fn new(
        sigma_grid: Vec<f64>,
        runs: usize,
        estimators: Vec<EstimatorKind>,
        config: EstimatorConfig,
    ) -> Result<Self> {
        validate_sigma_grid(&sigma_grid).map_err(|r| AppError::validation("sigma_grid", r))?;
        if runs == 0 {
            return Err(AppError::validation("runs", "must be >= 1"));
        }
        if estimators.is_empty() {
            return Err(AppError::validation("estimators", "no estimator selected"));
        }
        if config.stage1_passes == 0 {
            return Err(AppError::validation("stage1_passes", "must be >= 1"));
        }
        Ok(Self {
            sigma_grid,
            runs,
            estimators,
            config,
        })
    }
}

/// One estimator's result on one run.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Success {
        state: StateVector,
        /// Estimate minus truth, per axis.
        errors: [f64; 6],
        /// Reported standard deviations, per axis.
        sigma: [f64; 6],
    },
    Failure {
        code: &'static str,
        message: String,
    },
}

impl Outcome {
    fn from_estimate(state: StateVector, sigma: [f64; 6], truth: &StateVector) -> Self {
        let (e, t) = (state.to_array(), truth.to_array());
        Outcome::Success {
            state,
            errors: std::array::from_fn(|k| e[k] - t[k]),
            sigma,
        }
    }

    fn from_error(e: &AppError) -> Self {
        Outcome::Failure {
            code: error_code(e),
            message: e.to_string(),
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success { .. })
    }

    pub fn errors(&self) -> Option<&[f64; 6]> {
        match self {
            Outcome::Success { errors, .. } => Some(errors),
            Outcome::Failure { .. } => None,
        }
    }

    pub fn sigma(&self) -> Option<&[f64; 6]> {
        match self {
            Outcome::Success { sigma, .. } => Some(sigma),
            Outcome::Failure { .. } => None,
        }
    }
}

pub fn error_code(e: &AppError) -> &'static str {
    use oneshot_core::Error as E;
    match e {
        AppError::Core(E::Validation { .. }) | AppError::Validation { .. } => "validation",
        AppError::Core(E::DegenerateGeometry(_)) => "degenerate_geometry",
        AppError::Core(E::Estimation { .. }) => "estimation",
        AppError::Core(E::NoIntersection(_)) => "no_intersection",
        _ => "io",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_index: u64,
    /// Final WLS state.
    pub wls: Option<Outcome>,
    /// WLS state after stage 1 only; its `sigma` is not meaningful and is NaN.
    pub wls_stage1: Option<Outcome>,
    pub tri: Option<Outcome>,
}

/// Both estimators on run `run_index` of `noise`.
pub fn run_once(
    scenario: &Scenario,
    noise: &NoiseModel,
    run_index: u64,
    estimators: &[EstimatorKind],
    config: &EstimatorConfig,
) -> RunRecord {
    let truth = &scenario.truth;
    let mut record = RunRecord {
        run_index,
        wls: None,
        wls_stage1: None,
        tri: None,
    };
    if estimators.contains(&EstimatorKind::Wls) {
        let result = simulate(&scenario.network, truth, noise, run_index)
            .and_then(|m| estimate_with(&scenario.network, &m, config))
            .map_err(AppError::from);
        match result {
            Ok(est) => {
                record.wls = Some(Outcome::from_estimate(est.state, est.std_devs(), truth));
                record.wls_stage1 = Some(Outcome::from_estimate(est.stage1_state, [f64::NAN; 6], truth));
            }
            Err(e) => {
                record.wls = Some(Outcome::from_error(&e));
                record.wls_stage1 = Some(Outcome::from_error(&e));
            }
        }
    }
    if estimators.contains(&EstimatorKind::Trilateration) {
        let result = derive_ranges(&scenario.network, truth, noise, run_index)
            .and_then(|rs| trilaterate(&rs))
            .map_err(AppError::from);
        record.tri = Some(match result {
            Ok(est) => Outcome::from_estimate(est.state, est.std_devs(), truth),
            Err(e) => Outcome::from_error(&e),
        });
    }
    record
}

/// `runs` runs at one noise level, in run order.
pub fn run_level(
    scenario: &Scenario,
    noise: &NoiseModel,
    runs: usize,
    estimators: &[EstimatorKind],
    config: &EstimatorConfig,
) -> Vec<RunRecord> {
    (0..runs as u64)
        .into_par_iter()
        .map(|r| run_once(scenario, noise, r, estimators, config))
        .collect()
}

fn noise_at(scenario: &Scenario, sigma_t: f64) -> Result<NoiseModel> {
    Ok(scenario.noise.with_sigma_t(sigma_t)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Final,
    Stage1,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Final => "final",
            Stage::Stage1 => "stage1",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseRow {
    pub sigma_t: f64,
    pub estimator: EstimatorKind,
    pub stage: Stage,
    pub pos_rmse_m: f64,
    pub vel_rmse_mps: f64,
    pub crlb_pos_m: f64,
    pub crlb_vel_mps: f64,
    pub successes: usize,
    pub failures: usize,
    /// More than [`FAILURE_FLAG_FRACTION`] of the runs failed.
    pub flagged: bool,
}

/// `√(mean ‖error‖²)` over the position and velocity blocks of the
/// successful outcomes, with success and failure counts.
pub fn rmse<'a>(outcomes: impl IntoIterator<Item = &'a Outcome>) -> (f64, f64, usize, usize) {
    let (mut sp, mut sv, mut ok, mut failed) = (0.0, 0.0, 0usize, 0usize);
    for o in outcomes {
        match o.errors() {
            Some(e) => {
                sp += e[0] * e[0] + e[1] * e[1] + e[2] * e[2];
                sv += e[3] * e[3] + e[4] * e[4] + e[5] * e[5];
                ok += 1;
            }
            None => failed += 1,
        }
    }
    let n = ok as f64;
    ((sp / n).sqrt(), (sv / n).sqrt(), ok, failed)
}

fn rmse_row(
    sigma_t: f64,
    estimator: EstimatorKind,
    stage: Stage,
    outcomes: Vec<&Outcome>,
    bound: (f64, f64),
) -> RmseRow {
    let (pos, vel, successes, failures) = rmse(outcomes);
    let total = (successes + failures) as f64;
    RmseRow {
        sigma_t,
        estimator,
        stage,
        pos_rmse_m: pos,
        vel_rmse_mps: vel,
        crlb_pos_m: bound.0,
        crlb_vel_mps: bound.1,
        successes,
        failures,
        flagged: failures as f64 > FAILURE_FLAG_FRACTION * total,
    }
}

/// RMSE of every enabled estimator (and the stage-1 WLS state) at every
/// noise level, with the CRLB alongside.
pub fn rmse_sweep(scenario: &Scenario, spec: &ExperimentSpec) -> Result<Vec<RmseRow>> {
    let mut rows = Vec::new();
    for &sigma_t in &spec.sigma_grid {
        let noise = noise_at(scenario, sigma_t)?;
        let bound = crlb(&scenario.network, &scenario.truth, &noise)?;
        let bound = (bound.position_bound_m, bound.velocity_bound_mps);
        let records = run_level(scenario, &noise, spec.runs, &spec.estimators, &spec.config);
        for &kind in &spec.estimators {
            match kind {
                EstimatorKind::Wls => {
                    let fin = records.iter().filter_map(|r| r.wls.as_ref()).collect();
                    rows.push(rmse_row(sigma_t, kind, Stage::Final, fin, bound));
                    let s1 = records.iter().filter_map(|r| r.wls_stage1.as_ref()).collect();
                    rows.push(rmse_row(sigma_t, kind, Stage::Stage1, s1, bound));
                }
                EstimatorKind::Trilateration => {
                    let tri = records.iter().filter_map(|r| r.tri.as_ref()).collect();
                    rows.push(rmse_row(sigma_t, kind, Stage::Final, tri, bound));
                }
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrlbRow {
    pub sigma_t: f64,
    pub pos_bound_m: f64,
    pub vel_bound_mps: f64,
}

pub fn crlb_table(scenario: &Scenario, sigma_grid: &[f64]) -> Result<Vec<CrlbRow>> {
    sigma_grid
        .iter()
        .map(|&sigma_t| {
            let b = crlb(&scenario.network, &scenario.truth, &noise_at(scenario, sigma_t)?)?;
            Ok(CrlbRow {
                sigma_t,
                pos_bound_m: b.position_bound_m,
                vel_bound_mps: b.velocity_bound_mps,
            })
        })
        .collect()
}

/// Fixed-width histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Samples outside the edges.
    pub outside: u64,
}

impl Histogram {
    /// `bins` equal bins over `[center − span, center + span]`. A zero span
    /// collapses every sample into the middle bin.
    pub fn centered(samples: &[f64], center: f64, span: f64, bins: usize) -> Self {
        let bins = bins.max(1);
        let lo = center - span;
        let width = 2.0 * span / bins as f64;
        let edges = (0..=bins).map(|k| lo + width * k as f64).collect();
        let mut counts = vec![0u64; bins];
        let mut outside = 0;
        for &s in samples {
            if !(width > 0.0) {
                counts[bins / 2] += 1;
                continue;
            }
            let pos = (s - lo) / width;
            if pos >= 0.0 && pos < bins as f64 {
                counts[pos as usize] += 1;
            } else if pos == bins as f64 {
                counts[bins - 1] += 1;
            } else {
                outside += 1;
            }
        }
        Histogram {
            edges,
            counts,
            outside,
        }
    }
}

/// Sample mean, standard deviation (n − 1) and skewness of one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisStats {
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    pub histogram: Histogram,
}

impl AxisStats {
    pub fn from_samples(samples: &[f64], bins: usize) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let (m2, m3) = samples.iter().fold((0.0, 0.0), |(a, b), &s| {
            let d = s - mean;
            (a + d * d, b + d * d * d)
        });
        let std = if samples.len() > 1 { (m2 / (n - 1.0)).sqrt() } else { 0.0 };
        let pop_var = m2 / n;
        let skewness = if pop_var > 0.0 { (m3 / n) / pop_var.powf(1.5) } else { 0.0 };
        let histogram = Histogram::centered(samples, mean, HISTOGRAM_SPAN_STD * std, bins);
        Self {
            mean,
            std,
            skewness,
            histogram,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub sigma_t: f64,
    pub estimator: EstimatorKind,
    pub successes: usize,
    pub failures: usize,
    /// x, y, z, vx, vy, vz.
    pub axes: [AxisStats; 6],
}

impl BiasReport {
    /// `4·std/√S` for each axis.
    pub fn mean_bounds(&self) -> [f64; 6] {
        let root_s = (self.successes as f64).sqrt();
        std::array::from_fn(|k| 4.0 * self.axes[k].std / root_s)
    }
}

fn axis_columns<'a>(rows: impl Iterator<Item = &'a [f64; 6]>) -> [Vec<f64>; 6] {
    let mut cols: [Vec<f64>; 6] = Default::default();
    for r in rows {
        for k in 0..6 {
            cols[k].push(r[k]);
        }
    }
    cols
}

fn check_bias_runs(runs: usize) -> Result<()> {
    if runs < MIN_BIAS_RUNS {
        return Err(AppError::validation(
            "runs",
            format!("{runs} is below the minimum of {MIN_BIAS_RUNS} for a bias study"),
        ));
    }
    Ok(())
}

/// Per-axis error statistics from already computed runs.
pub fn bias_from_records(
    sigma_t: f64,
    records: &[RunRecord],
    estimator: EstimatorKind,
    bins: usize,
) -> BiasReport {
    let outcomes: Vec<&Outcome> = records
        .iter()
        .filter_map(|r| match estimator {
            EstimatorKind::Wls => r.wls.as_ref(),
            EstimatorKind::Trilateration => r.tri.as_ref(),
        })
        .collect();
    let successes = outcomes.iter().filter(|o| o.is_success()).count();
    let cols = axis_columns(outcomes.iter().filter_map(|o| o.errors()));
    BiasReport {
        sigma_t,
        estimator,
        successes,
        failures: outcomes.len() - successes,
        axes: std::array::from_fn(|k| AxisStats::from_samples(&cols[k], bins)),
    }
}

/// Per-axis mean, standard deviation, skewness and histogram of the
/// estimation error over `runs` runs at `sigma_t`.
pub fn bias_study(
    scenario: &Scenario,
    sigma_t: f64,
    runs: usize,
    estimators: &[EstimatorKind],
    config: &EstimatorConfig,
) -> Result<Vec<BiasReport>> {
    check_bias_runs(runs)?;
    let noise = noise_at(scenario, sigma_t)?;
    let records = run_level(scenario, &noise, runs, estimators, config);
    Ok(estimators
        .iter()
        .map(|&k| bias_from_records(sigma_t, &records, k, DEFAULT_HISTOGRAM_BINS))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaAxis {
    /// Mean of `σ_WLS − σ_Tri`.
    pub mean_diff: f64,
    pub mean_sigma_wls: f64,
    pub mean_sigma_tri: f64,
    /// Mean of `σ_Tri / σ_WLS`.
    pub mean_ratio: f64,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaComparison {
    pub sigma_t: f64,
    /// Runs where both estimators succeeded.
    pub pairs: usize,
    pub axes: [SigmaAxis; 6],
}

/// Per-axis comparison of reported standard deviations over paired runs.
pub fn compare_sigmas(sigma_t: f64, wls: &[[f64; 6]], tri: &[[f64; 6]], bins: usize) -> SigmaComparison {
    let pairs = wls.len().min(tri.len());
    let n = pairs as f64;
    let axes = std::array::from_fn(|k| {
        let diffs: Vec<f64> = (0..pairs).map(|r| wls[r][k] - tri[r][k]).collect();
        let stats = AxisStats::from_samples(&diffs, bins);
        SigmaAxis {
            mean_diff: stats.mean,
            mean_sigma_wls: wls[..pairs].iter().map(|s| s[k]).sum::<f64>() / n,
            mean_sigma_tri: tri[..pairs].iter().map(|s| s[k]).sum::<f64>() / n,
            mean_ratio: (0..pairs).map(|r| tri[r][k] / wls[r][k]).sum::<f64>() / n,
            histogram: stats.histogram,
        }
    });
    SigmaComparison { sigma_t, pairs, axes }
}

pub fn sigma_comparison_from_records(sigma_t: f64, records: &[RunRecord], bins: usize) -> SigmaComparison {
    let (mut wls, mut tri) = (Vec::new(), Vec::new());
    for r in records {
        if let (Some(a), Some(b)) = (
            r.wls.as_ref().and_then(Outcome::sigma),
            r.tri.as_ref().and_then(Outcome::sigma),
        ) {
            wls.push(*a);
            tri.push(*b);
        }
    }
    compare_sigmas(sigma_t, &wls, &tri, bins)
}

/// Mean per-axis `σ_WLS − σ_Tri` over `runs` paired runs at `sigma_t`.
pub fn uncertainty_comparison(
    scenario: &Scenario,
    sigma_t: f64,
    runs: usize,
    config: &EstimatorConfig,
) -> Result<SigmaComparison> {
    if runs == 0 {
        return Err(AppError::validation("runs", "must be >= 1"));
    }
    let noise = noise_at(scenario, sigma_t)?;
    let both = [EstimatorKind::Wls, EstimatorKind::Trilateration];
    let records = run_level(scenario, &noise, runs, &both, config);
    Ok(sigma_comparison_from_records(sigma_t, &records, DEFAULT_HISTOGRAM_BINS))
}

/// Single-run estimate of one estimator.
pub fn single_estimate(
    scenario: &Scenario,
    noise: &NoiseModel,
    run_index: u64,
    estimator: EstimatorKind,
    config: &EstimatorConfig,
) -> Result<EstimateWithCovariance> {
    let (net, truth) = (&scenario.network, &scenario.truth);
    Ok(match estimator {
        EstimatorKind::Wls => estimate_with(net, &simulate(net, truth, noise, run_index)?, config)?,
        EstimatorKind::Trilateration => trilaterate(&derive_ranges(net, truth, noise, run_index)?)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidReport {
    pub sigma_t: f64,
    pub run_index: u64,
    pub confidence: f64,
    pub ellipsoids: Vec<(EstimatorKind, Ellipsoid)>,
}

/// Position confidence ellipsoids of each estimator on one run.
pub fn ellipsoid_report(
    scenario: &Scenario,
    noise: &NoiseModel,
    run_index: u64,
    estimators: &[EstimatorKind],
    confidence: f64,
    config: &EstimatorConfig,
) -> Result<EllipsoidReport> {
    let ellipsoids = estimators
        .iter()
        .map(|&k| {
            let est = single_estimate(scenario, noise, run_index, k, config)?;
            Ok((k, ellipsoid_export(&est, confidence)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EllipsoidReport {
        sigma_t: noise.sigma_t,
        run_index,
        confidence,
        ellipsoids,
    })
}
