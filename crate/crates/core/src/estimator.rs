//! Closed-form two-stage weighted least squares state estimation.
//!
//! Stage 1 linearizes the delay and Doppler equations by treating the
//! transmitter ranges `γᵢ = ‖x − tᵢ‖` and range-rates `βᵢ = ρᵢᵀv` as extra
//! unknowns, giving the linear model `B Δα ≈ b − A y` over
//! `y = (x, v, γ₁..γ_M, β₁..β_M)`. It is solved once with `W = Q_α⁻¹` and then
//! re-solved with `W = (B Q_α Bᵀ)⁻¹`, `B` evaluated at the previous pass.
//!
//! Stage 2 restores the relations between `γ`, `β` and `(x, v)` that stage 1
//! ignored. It solves `B₂ Δỹ ≈ h − G z` for the correction `z = (Δx, Δv)`
//! with `W₂ = (B₂ cov(ỹ) B₂ᵀ)⁻¹`; the final state is `x̃ − Δx`, `ṽ − Δv`, and
//! its covariance is `Σ = (Lᵀ Q_α⁻¹ L)⁻¹` with `L = B⁻¹ A B₂⁻¹ G`.
//!
//! All weights are built from `Q_α / σ_t²`, which leaves the solutions
//! unchanged and keeps the zero-noise case well defined; covariances are
//! multiplied back by `σ_t²`.

use alloc::{format, vec::Vec};
use nalgebra::{DMatrix, DVector, Matrix6, Vector3};

use crate::linalg::{self, solve_square, WlsSolution, Weighting};
use crate::measurement::{line_of_sight, MeasurementSet};
use crate::scenario::{RadarNetwork, StateVector};
use crate::{Error, Result, SPEED_OF_LIGHT};

const C: f64 = SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimatorConfig {
    /// Stage-1 weighting passes; the first uses `Q_α⁻¹`, later ones
    /// `(B Q_α Bᵀ)⁻¹` at the previous pass's state.
    pub stage1_passes: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { stage1_passes: 2 }
    }
}

/// Stage-1 unknown `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    /// Transmitter ranges, m.
    pub gamma: DVector<f64>,
    /// Transmitter range-rates, m/s.
    pub beta: DVector<f64>,
}

impl AugmentedState {
    /// Exact `y` for a known state.
    pub fn from_state(network: &RadarNetwork, state: &StateVector) -> Result<Self> {
        let m = network.m();
        let mut gamma = DVector::zeros(m);
        let mut beta = DVector::zeros(m);
        for (i, t) in network.transmitters().iter().enumerate() {
            let (rho, d) = line_of_sight(&state.position, &t.position, "transmitter")?;
            gamma[i] = d;
            beta[i] = rho.dot(&state.velocity);
        }
        Ok(Self {
            position: state.position,
            velocity: state.velocity,
            gamma,
            beta,
        })
    }

    pub fn from_vector(y: &DVector<f64>, m: usize) -> Self {
        Self {
            position: y.fixed_rows::<3>(0).into_owned(),
            velocity: y.fixed_rows::<3>(3).into_owned(),
            gamma: y.rows(6, m).into_owned(),
            beta: y.rows(6 + m, m).into_owned(),
        }
    }

    pub fn to_vector(&self) -> DVector<f64> {
        let m = self.gamma.len();
        let mut y = DVector::zeros(6 + 2 * m);
        y.fixed_rows_mut::<3>(0).copy_from(&self.position);
        y.fixed_rows_mut::<3>(3).copy_from(&self.velocity);
        y.rows_mut(6, m).copy_from(&self.gamma);
        y.rows_mut(6 + m, m).copy_from(&self.beta);
        y
    }

    pub fn state(&self) -> StateVector {
        StateVector {
            position: self.position,
            velocity: self.velocity,
        }
    }

    /// Largest `|γᵢ − ‖x − tᵢ‖|` and `|βᵢ − ρᵢᵀv|` over the transmitters.
    pub fn consistency_residuals(&self, network: &RadarNetwork) -> (f64, f64) {
        let mut worst = (0.0_f64, 0.0_f64);
        for (i, t) in network.transmitters().iter().enumerate() {
            let d = self.position - t.position;
            let r = d.norm();
            worst.0 = worst.0.max((self.gamma[i] - r).abs());
            if r > 0.0 {
                worst.1 = worst.1.max((self.beta[i] - d.dot(&self.velocity) / r).abs());
            }
        }
        worst
    }
}

/// Stage-1 linear model `b ≈ A y`.
#[derive(Debug, Clone)]
pub struct Stage1System {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

fn check_layout(network: &RadarNetwork, m: &MeasurementSet) -> Result<()> {
    if m.channels() != network.channels() {
        return Err(Error::validation(
            "measurements",
            format!(
                "{} channels for a network with M·N = {}",
                m.channels(),
                network.channels()
            ),
        ));
    }
    Ok(())
}

/// Assembles `A = [A_τ; A_f]` and `b = [b_τ; b_f]`.
pub fn build_stage1(network: &RadarNetwork, meas: &MeasurementSet) -> Result<Stage1System> {
    check_layout(network, meas)?;
    let (m, n) = (network.m(), network.n());
    let mn = m * n;
    let mut a = DMatrix::zeros(2 * mn, 6 + 2 * m);
    let mut b = DVector::zeros(2 * mn);
    for (i, tx) in network.transmitters().iter().enumerate() {
        let t = &tx.position;
        let fc = tx.carrier_frequency_hz;
        for (j, s) in network.receivers().iter().enumerate() {
            let k = i * n + j;
            let tau = meas.tau[k];
            let f = meas.doppler[k];
            let baseline = 2.0 * (t - s);

            b[k] = C * C * tau * tau + t.norm_squared() - s.norm_squared();
            a.fixed_view_mut::<1, 3>(k, 0).copy_from(&baseline.transpose());
            a[(k, 6 + i)] = 2.0 * C * tau;

            let row = mn + k;
            b[row] = 2.0 * C * C * tau * f;
            a.fixed_view_mut::<1, 3>(row, 3).copy_from(&(baseline * fc).transpose());
            a[(row, 6 + i)] = 2.0 * C * f;
            a[(row, 6 + m + i)] = 2.0 * C * fc * tau;
        }
    }
    Ok(Stage1System { a, b })
}

/// Noise coupling matrix `B = 2c [[B_τ, 0], [B_f1, B_f2]]` of `B Δα ≈ b − A y`,
/// evaluated at `state`. `B_τ = B_f2 = I_M ⊗ diag(r⁰)` and
/// `B_f1 = diag(f_c) ⊗ diag(ṙ⁰)` with `r⁰`, `ṙ⁰` the receiver ranges and
/// range-rates.
pub fn build_noise_matrix(network: &RadarNetwork, state: &StateVector) -> Result<DMatrix<f64>> {
    let (m, n) = (network.m(), network.n());
    let mn = m * n;
    let mut ranges = Vec::with_capacity(n);
    let mut rates = Vec::with_capacity(n);
    for s in network.receivers() {
        let (rho, r) = line_of_sight(&state.position, s, "receiver")?;
        ranges.push(r);
        rates.push(rho.dot(&state.velocity));
    }
    let mut b = DMatrix::zeros(2 * mn, 2 * mn);
    for (i, tx) in network.transmitters().iter().enumerate() {
        for j in 0..n {
            let k = i * n + j;
            b[(k, k)] = 2.0 * C * ranges[j];
            b[(mn + k, k)] = 2.0 * C * tx.carrier_frequency_hz * rates[j];
            b[(mn + k, mn + k)] = 2.0 * C * ranges[j];
        }
    }
    Ok(b)
}

/// `F` with `F Fᵀ = B (Q_α/σ_t²) Bᵀ`.
fn stage1_weight_factor(
    network: &RadarNetwork,
    state: &StateVector,
    shape: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let mut f = build_noise_matrix(network, state)?;
    for (mut col, q) in f.column_iter_mut().zip(shape.iter()) {
        col *= libm::sqrt(*q);
    }
    Ok(f)
}

/// Output of stage 1.
#[derive(Debug, Clone)]
pub struct Stage1Estimate {
    pub state: AugmentedState,
    /// `cov(ỹ) = (AᵀW_αA)⁻¹`, in physical units (scaled by `σ_t²`).
    pub covariance: DMatrix<f64>,
    /// Last pass, with covariances normalized to `σ_t = 1`.
    pub solution: WlsSolution,
    /// Condition number of each pass.
    pub pass_conditions: Vec<f64>,
    pub system: Stage1System,
}

pub fn estimate_stage1(
    network: &RadarNetwork,
    meas: &MeasurementSet,
    config: &EstimatorConfig,
) -> Result<Stage1Estimate> {
    if config.stage1_passes == 0 {
        return Err(Error::validation("stage1_passes", "at least one pass is required"));
    }
    let system = build_stage1(network, meas)?;
    let shape = meas.noise_shape();
    let mut solution = linalg::wls_solve(&system.a, &system.b, Weighting::DiagonalVariance(&shape))?;
    let mut pass_conditions = Vec::with_capacity(config.stage1_passes);
    pass_conditions.push(solution.condition);
    for _ in 1..config.stage1_passes {
        let guess = AugmentedState::from_vector(&solution.solution, network.m()).state();
        let factor = stage1_weight_factor(network, &guess, &shape)?;
        solution = linalg::wls_solve(&system.a, &system.b, Weighting::CovarianceFactor(&factor))?;
        pass_conditions.push(solution.condition);
    }
    let state = AugmentedState::from_vector(&solution.solution, network.m());
    if let Some(i) = state.gamma.iter().position(|&g| !(g > 0.0)) {
        return Err(Error::estimation(
            format!("stage 1 produced non-positive range to transmitter {}: {}", i + 1, state.gamma[i]),
            solution.condition,
        ));
    }
    let var_t = meas.sigma_t * meas.sigma_t;
    Ok(Stage1Estimate {
        state,
        covariance: &solution.covariance * var_t,
        solution,
        pass_conditions,
        system,
    })
}

/// Stage-2 linear model `B₂ Δỹ ≈ h − G z`.
#[derive(Debug, Clone)]
pub struct Stage2System {
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
    pub b2: DMatrix<f64>,
}

pub fn build_stage2(transmitters: &[Vector3<f64>], y1: &AugmentedState) -> Result<Stage2System> {
    let m = transmitters.len();
    if y1.gamma.len() != m || y1.beta.len() != m {
        return Err(Error::validation(
            "stage2",
            format!("{} transmitters but y has {} ranges", m, y1.gamma.len()),
        ));
    }
    if !y1.to_vector().iter().all(|v| v.is_finite()) {
        return Err(Error::estimation("stage-1 solution is not finite", f64::INFINITY));
    }
    if let Some(i) = y1.gamma.iter().position(|&g| !(g > 0.0)) {
        return Err(Error::estimation(
            format!("non-positive range to transmitter {}", i + 1),
            f64::INFINITY,
        ));
    }
    let rows = 2 * m + 6;
    let (x, v) = (&y1.position, &y1.velocity);
    let mut g = DMatrix::zeros(rows, 6);
    let mut h = DVector::zeros(rows);
    let mut b2 = DMatrix::zeros(rows, 6 + 2 * m);
    for (i, t) in transmitters.iter().enumerate() {
        let d = x - t;
        let gamma = y1.gamma[i];
        let beta = y1.beta[i];
        let dist = d.norm();

        // γ̃² − ‖x̃ − t‖², factored to avoid cancellation
        h[i] = (gamma - dist) * (gamma + dist);
        g.fixed_view_mut::<1, 3>(i, 0).copy_from(&(d * -2.0).transpose());
        b2[(i, 6 + i)] = 2.0 * gamma;

        h[m + i] = gamma * beta - d.dot(v);
        g.fixed_view_mut::<1, 3>(m + i, 0).copy_from(&(-v).transpose());
        g.fixed_view_mut::<1, 3>(m + i, 3).copy_from(&(-d).transpose());
        b2[(m + i, 6 + i)] = beta;
        b2[(m + i, 6 + m + i)] = gamma;
    }
    for k in 0..6 {
        g[(2 * m + k, k)] = -1.0;
        b2[(2 * m + k, k)] = 1.0;
    }
    Ok(Stage2System { g, h, b2 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// Condition number of the last stage-1 pass (equilibrated normal matrix).
    pub cond_stage1: f64,
    pub cond_stage2: f64,
    /// Condition number of `LᵀQ_α⁻¹L`.
    pub cond_sigma: f64,
    /// `‖AᵀW(b − Aỹ)‖ / ‖AᵀWb‖` for the last stage-1 pass.
    pub stage1_normal_residual: f64,
    pub stage2_normal_residual: f64,
    /// Largest `|γ̃ᵢ − ‖x̃ − tᵢ‖|` after stage 1, m.
    pub gamma_inconsistency: f64,
    /// Largest `|β̃ᵢ − ρᵢᵀṽ|` after stage 1, m/s.
    pub beta_inconsistency: f64,
    /// `‖Δx‖`, m.
    pub position_correction: f64,
    /// `‖Δv‖`, m/s.
    pub velocity_correction: f64,
}

/// Final estimate and its 6×6 covariance (position block in m², velocity
/// block in (m/s)²).
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateWithCovariance {
    pub state: StateVector,
    pub sigma: Matrix6<f64>,
    pub stage1_state: StateVector,
    pub diagnostics: Option<Diagnostics>,
}

impl EstimateWithCovariance {
    /// Per-axis standard deviations `√Σₖₖ`.
    pub fn std_devs(&self) -> [f64; 6] {
        core::array::from_fn(|k| libm::sqrt(self.sigma[(k, k)].max(0.0)))
    }
}

/// Both stages with the default configuration.
pub fn estimate(network: &RadarNetwork, meas: &MeasurementSet) -> Result<EstimateWithCovariance> {
    estimate_with(network, meas, &EstimatorConfig::default())
}

pub fn estimate_with(
    network: &RadarNetwork,
    meas: &MeasurementSet,
    config: &EstimatorConfig,
) -> Result<EstimateWithCovariance> {
    let stage1 = estimate_stage1(network, meas, config)?;
    let (gamma_inconsistency, beta_inconsistency) = stage1.state.consistency_residuals(network);

    let tx: Vec<Vector3<f64>> = network.transmitters().iter().map(|t| t.position).collect();
    let stage2 = build_stage2(&tx, &stage1.state)?;
    // W₂⁻¹ = B₂ cov(ỹ) B₂ᵀ = (B₂ S)(B₂ S)ᵀ
    let w2_factor = &stage2.b2 * &stage1.solution.covariance_factor;
    let correction = linalg::wls_solve(&stage2.g, &stage2.h, Weighting::CovarianceFactor(&w2_factor))?;
    let z = &correction.solution;
    let dx = z.fixed_rows::<3>(0).into_owned();
    let dv = z.fixed_rows::<3>(3).into_owned();
    let state = StateVector {
        position: stage1.state.position - dx,
        velocity: stage1.state.velocity - dv,
    };
    if !state.to_array().iter().all(|v| v.is_finite()) {
        return Err(Error::estimation("corrected state is not finite", correction.condition));
    }

    // L = B⁻¹ A B₂⁻¹ G; whitening by Q_α^{-1/2} folds into the factor B Q^{1/2}.
    let b2_inv_g = solve_square(&stage2.b2, &stage2.g)?;
    let a_l = &stage1.system.a * b2_inv_g;
    let shape = meas.noise_shape();
    let factor = stage1_weight_factor(network, &state, &shape)?;
    let zero = DVector::zeros(a_l.nrows());
    let (lw, zw) = linalg::whiten(&a_l, &zero, Weighting::CovarianceFactor(&factor))?;
    let sigma_solution = linalg::solve_whitened(&lw, &zw)?;
    let var_t = meas.sigma_t * meas.sigma_t;
    let sigma = Matrix6::from_fn(|r, c| sigma_solution.covariance[(r, c)] * var_t);

    Ok(EstimateWithCovariance {
        state,
        sigma,
        stage1_state: stage1.state.state(),
        diagnostics: Some(Diagnostics {
            cond_stage1: stage1.solution.condition,
            cond_stage2: correction.condition,
            cond_sigma: sigma_solution.condition,
            stage1_normal_residual: stage1.solution.normal_residual,
            stage2_normal_residual: correction.normal_residual,
            gamma_inconsistency,
            beta_inconsistency,
            position_correction: dx.norm(),
            velocity_correction: dv.norm(),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{noiseless, simulate};
    use crate::scenario::{builtin_scenario, Transmitter};
    use alloc::vec;

    fn tiny_network() -> RadarNetwork {
        // M = N = 1 is below the rank condition, so build the layout by hand
        // through a valid network and slice out the first channel.
        let t = Transmitter::new(Vector3::new(1.0, 0.0, 0.0), 1.0).unwrap();
        let rx = vec![
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(0.0, 2.0, 0.0),
            Vector3::new(0.0, 3.0, 0.0),
            Vector3::new(0.0, 0.0, 4.0),
        ];
        RadarNetwork::new(vec![t], rx).unwrap()
    }

    #[test]
    fn stage1_rows_by_substitution() {
        let net = tiny_network();
        let tau = DVector::from_vec(vec![1.0, 0.5, 0.5, 0.5]);
        let f = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let meas = MeasurementSet::new(tau, f, 0.0, 1e11).unwrap();
        let sys = build_stage1(&net, &meas).unwrap();
        // b_τ = c²·1 + 1 − 1, b_f = 2c²·1·1
        assert_eq!(sys.b[0], C * C);
        assert_eq!(sys.b[4], 2.0 * C * C);
        let row: Vec<f64> = sys.a.row(0).iter().copied().collect();
        assert_eq!(row, vec![2.0, -2.0, 0.0, 0.0, 0.0, 0.0, 2.0 * C, 0.0]);
        let frow: Vec<f64> = sys.a.row(4).iter().copied().collect();
        assert_eq!(frow, vec![0.0, 0.0, 0.0, 2.0, -2.0, 0.0, 2.0 * C, 2.0 * C]);
    }

    #[test]
    fn noise_matrix_structure() {
        let net = tiny_network();
        // target at distance 1 from receiver 0, at rest
        let state = StateVector::new(Vector3::new(0.0, 1.0, 1.0), Vector3::zeros()).unwrap();
        let b = build_noise_matrix(&net, &state).unwrap();
        assert_eq!(b.shape(), (8, 8));
        assert_eq!(b[(0, 0)], 2.0 * C);
        assert_eq!(b[(4, 4)], 2.0 * C);
        assert_eq!(b[(4, 0)], 0.0);
        assert!(b.view((0, 4), (4, 4)).iter().all(|&v| v == 0.0));
        // off-diagonal entries inside each block vanish
        assert_eq!(b[(0, 1)], 0.0);
        assert_eq!(b[(5, 4)], 0.0);

        let on_receiver = StateVector::new(Vector3::new(0.0, 1.0, 0.0), Vector3::zeros()).unwrap();
        assert!(matches!(
            build_noise_matrix(&net, &on_receiver),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn noise_matrix_entries_at_truth() {
        let (net, truth, _) = builtin_scenario();
        let b = build_noise_matrix(&net, &truth).unwrap();
        let mn = net.channels();
        for (i, tx) in net.transmitters().iter().enumerate() {
            for (j, s) in net.receivers().iter().enumerate() {
                let k = i * net.n() + j;
                let d = truth.position - s;
                let r = d.norm();
                let rdot = d.dot(&truth.velocity) / r;
                assert_eq!(b[(k, k)], 2.0 * C * r);
                assert!((b[(mn + k, k)] - 2.0 * C * tx.carrier_frequency_hz * rdot).abs()
                    <= 1e-12 * b[(mn + k, k)].abs());
            }
        }
    }

    #[test]
    fn exact_data_satisfies_stage1_relation() {
        let (net, truth, noise) = builtin_scenario();
        let (tau, f) = noiseless(&net, &truth).unwrap();
        let meas = MeasurementSet::new(tau, f, 0.0, noise.doppler_variance_scale).unwrap();
        let sys = build_stage1(&net, &meas).unwrap();
        let y = AugmentedState::from_state(&net, &truth).unwrap().to_vector();
        let resid = &sys.b - &sys.a * y;
        assert!(resid.norm() <= 1e-6 * sys.b.norm(), "{}", resid.norm() / sys.b.norm());
    }

    #[test]
    fn consistent_stage1_gives_zero_h() {
        let (net, truth, _) = builtin_scenario();
        let y = AugmentedState::from_state(&net, &truth).unwrap();
        let tx: Vec<_> = net.transmitters().iter().map(|t| t.position).collect();
        let s2 = build_stage2(&tx, &y).unwrap();
        for i in 0..net.m() {
            assert!(s2.h[i].abs() <= 1e-9 * y.gamma[i] * y.gamma[i]);
            assert!(s2.h[net.m() + i].abs() <= 1e-9 * y.gamma[i] * truth.velocity.norm());
        }
        assert!(s2.h.rows(2 * net.m(), 6).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stage2_rows_by_substitution() {
        let y = AugmentedState {
            position: Vector3::new(1.0, 0.0, 0.0),
            velocity: Vector3::new(0.0, 1.0, 0.0),
            gamma: DVector::from_vec(vec![1.0]),
            beta: DVector::from_vec(vec![0.5]),
        };
        let s2 = build_stage2(&[Vector3::zeros()], &y).unwrap();
        let g_beta: Vec<f64> = s2.g.row(1).iter().copied().collect();
        assert_eq!(g_beta, vec![0.0, -1.0, 0.0, -1.0, 0.0, 0.0]);
        let g_gamma: Vec<f64> = s2.g.row(0).iter().copied().collect();
        assert_eq!(g_gamma, vec![-2.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(s2.g.view((2, 0), (6, 6)).into_owned(), -DMatrix::<f64>::identity(6, 6));
        assert_eq!(s2.b2.view((2, 0), (6, 6)).into_owned(), DMatrix::<f64>::identity(6, 6));
        assert_eq!(s2.b2[(0, 6)], 2.0);
        assert_eq!(s2.b2[(1, 6)], 0.5);
        assert_eq!(s2.b2[(1, 7)], 1.0);
    }

    #[test]
    fn stage2_rejects_non_positive_range() {
        let y = AugmentedState {
            position: Vector3::new(1.0, 0.0, 0.0),
            velocity: Vector3::zeros(),
            gamma: DVector::from_vec(vec![-1.0]),
            beta: DVector::from_vec(vec![0.0]),
        };
        assert!(matches!(
            build_stage2(&[Vector3::zeros()], &y),
            Err(Error::Estimation { .. })
        ));
    }

    #[test]
    fn zero_noise_recovers_truth() {
        let (net, truth, noise) = builtin_scenario();
        let meas = simulate(&net, &truth, &noise.with_sigma_t(0.0).unwrap(), 0).unwrap();
        let est = estimate(&net, &meas).unwrap();
        assert!((est.state.position - truth.position).norm() <= 1e-3);
        assert!((est.state.velocity - truth.velocity).norm() <= 1e-6);
        assert!(est.sigma.iter().all(|&v| v == 0.0));
        let s1 = estimate_stage1(&net, &meas, &EstimatorConfig::default()).unwrap();
        assert!((s1.state.position - truth.position).norm() <= 1e-3);
        for (i, t) in net.transmitters().iter().enumerate() {
            assert!((s1.state.gamma[i] - (s1.state.position - t.position).norm()).abs() <= 1e-3);
        }
    }

    #[test]
    fn rejects_mismatched_measurements() {
        let (net, _, _) = builtin_scenario();
        let meas = MeasurementSet::new(DVector::zeros(3), DVector::zeros(3), 0.0, 1.0).unwrap();
        assert!(estimate(&net, &meas).unwrap_err().is_validation());
        let zero_passes = EstimatorConfig { stage1_passes: 0 };
        let ok = simulate(&net, &builtin_scenario().1, &builtin_scenario().2, 0).unwrap();
        assert!(estimate_with(&net, &ok, &zero_passes).is_err());
    }
}
