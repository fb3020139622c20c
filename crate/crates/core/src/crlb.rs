//! Cramér–Rao lower bound for the delay/Doppler measurement model.

use alloc::format;
use nalgebra::{DMatrix, DVector, Matrix3, Matrix6};

use crate::linalg;
use crate::measurement::line_of_sight;
use crate::scenario::{NoiseModel, RadarNetwork, StateVector};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// `(2MN)×6` matrix of partial derivatives of `(τ, f)` with respect to
/// `(x, v)`, rows in the measurement ordering.
pub fn measurement_jacobian(network: &RadarNetwork, state: &StateVector) -> Result<DMatrix<f64>> {
    let (n, mn) = (network.n(), network.channels());
    let mut jac = DMatrix::zeros(2 * mn, 6);
    let v = &state.velocity;
    let projector = |rho: &nalgebra::Vector3<f64>, dist: f64| (Matrix3::identity() - rho * rho.transpose()) / dist;
    for (i, tx) in network.transmitters().iter().enumerate() {
        let (rho_t, d_t) = line_of_sight(&state.position, &tx.position, "transmitter")?;
        let scale = tx.carrier_frequency_hz / SPEED_OF_LIGHT;
        for (j, s) in network.receivers().iter().enumerate() {
            let (rho_s, d_s) = line_of_sight(&state.position, s, "receiver")?;
            let k = i * n + j;
            let sum = rho_t + rho_s;
            jac.fixed_view_mut::<1, 3>(k, 0)
                .copy_from(&(sum / SPEED_OF_LIGHT).transpose());
            jac.fixed_view_mut::<1, 3>(mn + k, 3)
                .copy_from(&(sum * scale).transpose());
            let d_pos = v.transpose() * (projector(&rho_t, d_t) + projector(&rho_s, d_s)) * scale;
            jac.fixed_view_mut::<1, 3>(mn + k, 0).copy_from(&d_pos);
        }
    }
    Ok(jac)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherInformation {
    /// `JᵀQ_α⁻¹J`.
    pub matrix: Matrix6<f64>,
    pub jacobian: DMatrix<f64>,
}

pub fn fisher_information(
    network: &RadarNetwork,
    state: &StateVector,
    noise: &NoiseModel,
) -> Result<FisherInformation> {
    let jacobian = measurement_jacobian(network, state)?;
    let mn = network.channels();
    let var_t = noise.sigma_t * noise.sigma_t;
    let inv_var = DVector::from_fn(2 * mn, |k, _| {
        if k < mn {
            1.0 / var_t
        } else {
            1.0 / (noise.doppler_variance_scale * var_t)
        }
    });
    let weighted = DMatrix::from_fn(2 * mn, 6, |r, c| jacobian[(r, c)] * inv_var[r]);
    let full = linalg::symmetrize(&(jacobian.transpose() * weighted));
    Ok(FisherInformation {
        matrix: Matrix6::from_fn(|r, c| full[(r, c)]),
        jacobian,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrlbBounds {
    /// `√trace` of the position block, m.
    pub position_bound_m: f64,
    /// `√trace` of the velocity block, m/s.
    pub velocity_bound_mps: f64,
    pub inverse_fim: Matrix6<f64>,
}

/// Inverse Fisher information at `state` and the RMSE-comparable scalar bounds.
///
/// The inverse is computed by whitening the Jacobian with the unit-variance
/// noise shape and scaling by `σ_t²` afterwards, so it is exact in `σ_t`.
pub fn crlb(network: &RadarNetwork, state: &StateVector, noise: &NoiseModel) -> Result<CrlbBounds> {
    if !(noise.sigma_t > 0.0) {
        return Err(Error::validation("noise.sigma_t_s", "the bound needs sigma_t > 0"));
    }
    let jacobian = measurement_jacobian(network, state)?;
    let mn = network.channels();
    let shape = DVector::from_fn(2 * mn, |k, _| if k < mn { 1.0 } else { noise.doppler_variance_scale });
    let zero = DVector::zeros(2 * mn);
    let (jw, zw) = linalg::whiten(&jacobian, &zero, linalg::Weighting::DiagonalVariance(&shape))?;
    let solved = linalg::solve_whitened(&jw, &zw).map_err(|e| match e {
        Error::Estimation { condition, .. } => Error::estimation(
            format!("singular Fisher information, null direction {:?}", null_direction(&jw)),
            condition,
        ),
        other => other,
    })?;
    let var_t = noise.sigma_t * noise.sigma_t;
    let inverse_fim = Matrix6::from_fn(|r, c| solved.covariance[(r, c)] * var_t);
    let pos_trace: f64 = (0..3).map(|k| inverse_fim[(k, k)]).sum();
    let vel_trace: f64 = (3..6).map(|k| inverse_fim[(k, k)]).sum();
    Ok(CrlbBounds {
        position_bound_m: libm::sqrt(pos_trace),
        velocity_bound_mps: libm::sqrt(vel_trace),
        inverse_fim,
    })
}

/// Right singular vector of the smallest singular value.
fn null_direction(jw: &DMatrix<f64>) -> [f64; 6] {
    let svd = jw.clone().svd(false, true);
    let mut out = [f64::NAN; 6];
    if let Some(vt) = svd.v_t {
        let (k, _) = svd.singular_values.argmin();
        for (o, v) in out.iter_mut().zip(vt.row(k).iter()) {
            *o = *v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::builtin_scenario;
    use nalgebra::Vector3;

    #[test]
    fn delay_rows_ignore_velocity() {
        let (net, truth, _) = builtin_scenario();
        let j = measurement_jacobian(&net, &truth).unwrap();
        assert!(j.view((0, 3), (15, 3)).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn doppler_position_block_vanishes_at_rest() {
        let (net, truth, _) = builtin_scenario();
        let still = StateVector::new(truth.position, Vector3::zeros()).unwrap();
        let j = measurement_jacobian(&net, &still).unwrap();
        assert!(j.view((15, 0), (15, 3)).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bounds_scale_linearly_with_sigma() {
        let (net, truth, noise) = builtin_scenario();
        let a = crlb(&net, &truth, &noise.with_sigma_t(1e-9).unwrap()).unwrap();
        let b = crlb(&net, &truth, &noise.with_sigma_t(1e-8).unwrap()).unwrap();
        assert!((b.position_bound_m / a.position_bound_m - 10.0).abs() < 1e-9);
        assert!((b.velocity_bound_mps / a.velocity_bound_mps - 10.0).abs() < 1e-9);
    }

    #[test]
    fn inverse_fim_inverts_fim() {
        let (net, truth, noise) = builtin_scenario();
        let fim = fisher_information(&net, &truth, &noise).unwrap();
        let bounds = crlb(&net, &truth, &noise).unwrap();
        let prod = fim.matrix * bounds.inverse_fim;
        // mixed units make the raw identity check loose; compare per column
        for c in 0..6 {
            for r in 0..6 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((prod[(r, c)] - expect).abs() < 1e-5, "{r},{c}: {}", prod[(r, c)]);
            }
        }
    }

    #[test]
    fn zero_sigma_is_rejected() {
        let (net, truth, noise) = builtin_scenario();
        assert!(crlb(&net, &truth, &noise.with_sigma_t(0.0).unwrap()).is_err());
    }
}
