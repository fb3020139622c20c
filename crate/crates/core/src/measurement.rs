//! Bistatic delay and Doppler models and their seeded noisy simulation.

use alloc::{format, vec::Vec};
use nalgebra::{DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::scenario::{NoiseModel, RadarNetwork, StateVector, Transmitter};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Distances below this (m) are treated as the target sitting on a station.
const MIN_STATION_DISTANCE: f64 = 1e-6;

/// Stacked delays and Doppler shifts, transmitter-major (`i * N + j`), with
/// the diagonal noise model they were drawn under.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    /// Delays, s.
    pub tau: DVector<f64>,
    /// Doppler shifts, Hz.
    pub doppler: DVector<f64>,
    /// Delay noise standard deviation, s.
    pub sigma_t: f64,
    /// Doppler variance over delay variance.
    pub doppler_variance_scale: f64,
}

impl MeasurementSet {
    pub fn new(
        tau: DVector<f64>,
        doppler: DVector<f64>,
        sigma_t: f64,
        doppler_variance_scale: f64,
    ) -> Result<Self> {
        if tau.len() != doppler.len() {
            return Err(Error::validation(
                "measurements",
                format!("{} delays but {} Doppler shifts", tau.len(), doppler.len()),
            ));
        }
        if !tau.iter().chain(doppler.iter()).all(|v| v.is_finite()) {
            return Err(Error::validation("measurements", "non-finite value"));
        }
        if !(sigma_t.is_finite() && sigma_t >= 0.0) {
            return Err(Error::validation("measurements.sigma_t", "must be >= 0"));
        }
        if !(doppler_variance_scale.is_finite() && doppler_variance_scale > 0.0) {
            return Err(Error::validation("measurements.doppler_scale", "must be > 0"));
        }
        Ok(Self {
            tau,
            doppler,
            sigma_t,
            doppler_variance_scale,
        })
    }

    pub fn channels(&self) -> usize {
        self.tau.len()
    }

    /// Diagonal of `Q_α`: `M·N` delay variances followed by `M·N` Doppler variances.
    pub fn q_alpha_diag(&self) -> DVector<f64> {
        let var_t = self.sigma_t * self.sigma_t;
        self.noise_shape() * var_t
    }

    /// `Q_α / σ_t²`, well defined even when `σ_t = 0`.
    pub fn noise_shape(&self) -> DVector<f64> {
        let mn = self.channels();
        DVector::from_fn(2 * mn, |k, _| {
            if k < mn {
                1.0
            } else {
                self.doppler_variance_scale
            }
        })
    }
}

fn station_distance(x: &Vector3<f64>, station: &Vector3<f64>, what: &str) -> Result<f64> {
    let d = (x - station).norm();
    if d.is_finite() && d > MIN_STATION_DISTANCE {
        Ok(d)
    } else {
        Err(Error::DegenerateGeometry(format!(
            "target within {MIN_STATION_DISTANCE} m of {what}"
        )))
    }
}

/// Unit line-of-sight vector from `station` to `x`, and the distance.
pub(crate) fn line_of_sight(
    x: &Vector3<f64>,
    station: &Vector3<f64>,
    what: &str,
) -> Result<(Vector3<f64>, f64)> {
    let d = station_distance(x, station, what)?;
    Ok(((x - station) / d, d))
}

/// Transmitter → target → receiver travel time, s.
pub fn true_delay(x: &Vector3<f64>, t: &Vector3<f64>, s: &Vector3<f64>) -> Result<f64> {
    let dt = station_distance(x, t, "transmitter")?;
    let ds = station_distance(x, s, "receiver")?;
    Ok((dt + ds) / SPEED_OF_LIGHT)
}

/// Doppler shift, Hz, of the transmitter's carrier after reflection off a
/// target moving with the state's velocity.
pub fn true_doppler(state: &StateVector, t: &Transmitter, s: &Vector3<f64>) -> Result<f64> {
    let (rho_t, _) = line_of_sight(&state.position, &t.position, "transmitter")?;
    let (rho_s, _) = line_of_sight(&state.position, s, "receiver")?;
    let v = &state.velocity;
    Ok(t.carrier_frequency_hz / SPEED_OF_LIGHT * (rho_t.dot(v) + rho_s.dot(v)))
}

/// Noise-free delays and Doppler shifts for every channel.
pub fn noiseless(network: &RadarNetwork, truth: &StateVector) -> Result<(DVector<f64>, DVector<f64>)> {
    let mn = network.channels();
    let mut tau = DVector::zeros(mn);
    let mut doppler = DVector::zeros(mn);
    for (i, t) in network.transmitters().iter().enumerate() {
        for (j, s) in network.receivers().iter().enumerate() {
            let k = i * network.n() + j;
            tau[k] = true_delay(&truth.position, &t.position, s)?;
            doppler[k] = true_doppler(truth, t, s)?;
        }
    }
    Ok((tau, doppler))
}

/// Unit-variance draws for one Monte Carlo run: `channels` delay draws then
/// `channels` Doppler draws.
///
/// The stream is ChaCha20 keyed by `seed` with stream id `run_index`, so runs
/// are independent of each other and of evaluation order.
pub fn standard_normal_draws(seed: u64, run_index: u64, channels: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(run_index);
    let delay = (0..channels).map(|_| rng.sample(StandardNormal)).collect();
    let doppler = (0..channels).map(|_| rng.sample(StandardNormal)).collect();
    (delay, doppler)
}

/// Noisy measurement set for run `run_index`.
pub fn simulate(
    network: &RadarNetwork,
    truth: &StateVector,
    noise: &NoiseModel,
    run_index: u64,
) -> Result<MeasurementSet> {
    let (mut tau, mut doppler) = noiseless(network, truth)?;
    let (dt, df) = standard_normal_draws(noise.seed, run_index, network.channels());
    let sigma_f = noise.sigma_f();
    for k in 0..network.channels() {
        tau[k] += noise.sigma_t * dt[k];
        doppler[k] += sigma_f * df[k];
    }
    Ok(MeasurementSet {
        tau,
        doppler,
        sigma_t: noise.sigma_t,
        doppler_variance_scale: noise.doppler_variance_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::builtin_scenario;

    #[test]
    fn delay_of_two_light_seconds() {
        let t = Vector3::new(0.0, 0.0, 0.0);
        let s = Vector3::new(2.0 * SPEED_OF_LIGHT, 0.0, 0.0);
        let x = Vector3::new(SPEED_OF_LIGHT, 0.0, 0.0);
        assert_eq!(true_delay(&x, &t, &s).unwrap(), 2.0);
        assert_eq!(true_delay(&x, &s, &t).unwrap(), 2.0);
    }

    #[test]
    fn delay_rejects_target_on_station() {
        let p = Vector3::new(1.0, 2.0, 3.0);
        assert!(matches!(
            true_delay(&p, &p, &Vector3::zeros()),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn doppler_special_cases() {
        let tx = Transmitter::new(Vector3::zeros(), SPEED_OF_LIGHT).unwrap();
        let x = Vector3::new(5.0, 0.0, 0.0);
        let still = StateVector::new(x, Vector3::zeros()).unwrap();
        assert_eq!(true_doppler(&still, &tx, &Vector3::new(0.0, 1.0, 0.0)).unwrap(), 0.0);
        // colocated transmitter and receiver, collinear motion
        let moving = StateVector::new(x, Vector3::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(true_doppler(&moving, &tx, &Vector3::zeros()).unwrap(), 2.0);
        // motion orthogonal to both lines of sight
        let across = StateVector::new(x, Vector3::new(0.0, 0.0, 3.0)).unwrap();
        let s = Vector3::new(0.0, 1.0, 0.0);
        assert!(true_doppler(&across, &tx, &s).unwrap().abs() < 1e-15);
    }

    #[test]
    fn zero_noise_is_exact_and_runs_are_reproducible() {
        let (net, truth, noise) = builtin_scenario();
        let quiet = noise.with_sigma_t(0.0).unwrap();
        let m = simulate(&net, &truth, &quiet, 7).unwrap();
        let (tau, f) = noiseless(&net, &truth).unwrap();
        assert_eq!(m.tau, tau);
        assert_eq!(m.doppler, f);
        assert!(m.q_alpha_diag().iter().all(|&q| q == 0.0));

        let a = simulate(&net, &truth, &noise, 3).unwrap();
        let b = simulate(&net, &truth, &noise, 3).unwrap();
        assert_eq!(a, b);
        let c = simulate(&net, &truth, &noise, 4).unwrap();
        assert_ne!(a.tau, c.tau);
    }

    #[test]
    fn q_alpha_layout() {
        let (net, truth, noise) = builtin_scenario();
        let m = simulate(&net, &truth, &noise, 0).unwrap();
        let q = m.q_alpha_diag();
        assert_eq!(q.len(), 30);
        assert!(q.rows(0, 15).iter().all(|&v| v == 1e-18));
        assert!(q.rows(15, 15).iter().all(|&v| (v - 1e-7).abs() < 1e-22));
    }
}
