//! Radar network, target state and noise configuration.

use alloc::{format, vec::Vec};
use nalgebra::Vector3;

use crate::geodesy::{geodetic_to_ecef, EcefPosition, GeodeticCoordinate};
use crate::{Error, Result};

/// Default ratio between Doppler variance (Hz²) and delay variance (s²).
pub const DEFAULT_DOPPLER_VARIANCE_SCALE: f64 = 1e11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmitter {
    pub position: EcefPosition,
    pub carrier_frequency_hz: f64,
}

impl Transmitter {
    pub fn new(position: EcefPosition, carrier_frequency_hz: f64) -> Result<Self> {
        if !(carrier_frequency_hz.is_finite() && carrier_frequency_hz > 0.0) {
            return Err(Error::validation(
                "carrier_frequency_hz",
                format!("{carrier_frequency_hz} must be positive"),
            ));
        }
        if !position.iter().all(|c| c.is_finite()) {
            return Err(Error::validation("transmitter.position", "not finite"));
        }
        Ok(Self {
            position,
            carrier_frequency_hz,
        })
    }
}

/// `M` transmitters and `N` receivers.
///
/// Measurements are indexed transmitter-major: channel `(i, j)` (zero-based)
/// lives at `i * N + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarNetwork {
    transmitters: Vec<Transmitter>,
    receivers: Vec<EcefPosition>,
}

impl RadarNetwork {
    pub fn new(transmitters: Vec<Transmitter>, receivers: Vec<EcefPosition>) -> Result<Self> {
        let m = transmitters.len();
        let n = receivers.len();
        if m == 0 || n == 0 || 2 * m * n < 6 + 2 * m {
            return Err(Error::validation(
                "network",
                format!(
                    "network too small: M={m}, N={n} gives {} equations for {} unknowns",
                    2 * m * n,
                    6 + 2 * m
                ),
            ));
        }
        for (j, s) in receivers.iter().enumerate() {
            if !s.iter().all(|c| c.is_finite()) {
                return Err(Error::validation(
                    format!("network.receivers[{j}]"),
                    "not finite",
                ));
            }
        }
        let positions: Vec<(EcefPosition, &str, usize)> = transmitters
            .iter()
            .enumerate()
            .map(|(i, t)| (t.position, "transmitters", i))
            .chain(receivers.iter().enumerate().map(|(j, s)| (*s, "receivers", j)))
            .collect();
        for (a, pa) in positions.iter().enumerate() {
            for pb in &positions[a + 1..] {
                if (pa.0 - pb.0).norm() == 0.0 {
                    return Err(Error::validation(
                        format!("network.{}[{}]", pb.1, pb.2),
                        format!("coincides with network.{}[{}]", pa.1, pa.2),
                    ));
                }
            }
        }
        Ok(Self {
            transmitters,
            receivers,
        })
    }

    pub fn transmitters(&self) -> &[Transmitter] {
        &self.transmitters
    }

    pub fn receivers(&self) -> &[EcefPosition] {
        &self.receivers
    }

    /// Number of transmitters, `M`.
    pub fn m(&self) -> usize {
        self.transmitters.len()
    }

    /// Number of receivers, `N`.
    pub fn n(&self) -> usize {
        self.receivers.len()
    }

    /// Number of bistatic channels, `M·N`.
    pub fn channels(&self) -> usize {
        self.m() * self.n()
    }

    /// Same network with one more receiver appended.
    pub fn with_receiver(&self, receiver: EcefPosition) -> Result<Self> {
        let mut receivers = self.receivers.clone();
        receivers.push(receiver);
        Self::new(self.transmitters.clone(), receivers)
    }
}

/// Target position (m) and velocity (m/s) in ECEF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
}

impl StateVector {
    pub fn new(position: Vector3<f64>, velocity: Vector3<f64>) -> Result<Self> {
        if !position.iter().chain(velocity.iter()).all(|c| c.is_finite()) {
            return Err(Error::validation("target", "state components must be finite"));
        }
        Ok(Self { position, velocity })
    }

    pub fn to_array(&self) -> [f64; 6] {
        let (x, v) = (self.position, self.velocity);
        [x.x, x.y, x.z, v.x, v.y, v.z]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Delay noise standard deviation, s.
    pub sigma_t: f64,
    /// Doppler variance is `doppler_variance_scale · sigma_t²` (Hz²).
    pub doppler_variance_scale: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(sigma_t: f64, doppler_variance_scale: f64, seed: u64) -> Result<Self> {
        if !(sigma_t.is_finite() && sigma_t >= 0.0) {
            return Err(Error::validation("noise.sigma_t_s", format!("{sigma_t} must be >= 0")));
        }
        if !(doppler_variance_scale.is_finite() && doppler_variance_scale > 0.0) {
            return Err(Error::validation(
                "noise.doppler_scale",
                format!("{doppler_variance_scale} must be > 0"),
            ));
        }
        Ok(Self {
            sigma_t,
            doppler_variance_scale,
            seed,
        })
    }

    pub fn with_sigma_t(self, sigma_t: f64) -> Result<Self> {
        Self::new(sigma_t, self.doppler_variance_scale, self.seed)
    }

    /// Doppler noise standard deviation, Hz.
    pub fn sigma_f(&self) -> f64 {
        libm::sqrt(self.doppler_variance_scale) * self.sigma_t
    }
}

/// Geodetic latitude, longitude and carrier frequency of the built-in transmitters.
pub const BUILTIN_TRANSMITTERS: [(f64, f64, f64); 3] = [
    (37.182, -5.605, 1215e6),
    (44.335, 7.638, 1280e6),
    (51.616, 7.129, 1330e6),
];

/// Geodetic latitude and longitude of the built-in receivers.
pub const BUILTIN_RECEIVERS: [(f64, f64); 5] = [
    (40.000, -3.600),
    (42.000, 2.300),
    (46.000, 4.300),
    (49.300, -1.300),
    (42.000, 6.300),
];

pub const BUILTIN_TARGET_POSITION: [f64; 3] =
    [-2_370_406.314_061_29, -3_691_689.104_089_81, 4_901_428.880_949_2];
pub const BUILTIN_TARGET_VELOCITY: [f64; 3] = [-3_931.046_491, 6_498.676_921, 4_665.980_697];

/// The three-transmitter, five-receiver European network with the LEO target
/// and `sigma_t = 1e-9 s`. Stations sit on the ellipsoid surface.
pub fn builtin_scenario() -> (RadarNetwork, StateVector, NoiseModel) {
    let transmitters = BUILTIN_TRANSMITTERS
        .iter()
        .map(|&(lat, lon, fc)| Transmitter {
            position: geodetic_to_ecef(
                &GeodeticCoordinate::on_surface(lat, lon).expect("table coordinates in range"),
            ),
            carrier_frequency_hz: fc,
        })
        .collect();
    let receivers = BUILTIN_RECEIVERS
        .iter()
        .map(|&(lat, lon)| {
            geodetic_to_ecef(
                &GeodeticCoordinate::on_surface(lat, lon).expect("table coordinates in range"),
            )
        })
        .collect();
    let network = RadarNetwork::new(transmitters, receivers).expect("built-in network is valid");
    let truth = StateVector {
        position: Vector3::from(BUILTIN_TARGET_POSITION),
        velocity: Vector3::from(BUILTIN_TARGET_VELOCITY),
    };
    let noise = NoiseModel {
        sigma_t: 1e-9,
        doppler_variance_scale: DEFAULT_DOPPLER_VARIANCE_SCALE,
        seed: 0x5E_ED0F_0B17,
    };
    (network, truth, noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn builtin_scenario_shape() {
        let (net, truth, noise) = builtin_scenario();
        assert_eq!(net.m(), 3);
        assert_eq!(net.n(), 5);
        let fc: Vec<f64> = net.transmitters().iter().map(|t| t.carrier_frequency_hz).collect();
        assert_eq!(fc, vec![1215e6, 1280e6, 1330e6]);
        assert_eq!(truth.position.z, 4_901_428.880_949_2);
        assert_eq!(truth.velocity.x, -3931.046491);
        assert_eq!(noise.doppler_variance_scale, 1e11);
    }

    #[test]
    fn station_radii_between_polar_and_equatorial() {
        let (net, _, _) = builtin_scenario();
        let all = net
            .transmitters()
            .iter()
            .map(|t| t.position)
            .chain(net.receivers().iter().copied());
        for p in all {
            let r = p.norm();
            assert!((crate::geodesy::WGS84_B - 1.0..=crate::geodesy::WGS84_A + 1.0).contains(&r));
        }
    }

    #[test]
    fn rejects_small_networks() {
        let t = Transmitter::new(Vector3::new(1.0, 0.0, 0.0), 1.0).unwrap();
        let err = RadarNetwork::new(vec![], vec![Vector3::new(0.0, 1.0, 0.0)]).unwrap_err();
        assert!(alloc::string::ToString::to_string(&err).contains("network too small"));
        // M=1 needs N >= 4
        let rx: Vec<_> = (1..=3).map(|k| Vector3::new(0.0, k as f64, 0.0)).collect();
        assert!(RadarNetwork::new(vec![t], rx.clone()).is_err());
        let mut rx4 = rx;
        rx4.push(Vector3::new(0.0, 0.0, 9.0));
        assert!(RadarNetwork::new(vec![t], rx4).is_ok());
    }

    #[test]
    fn rejects_coincident_stations_and_bad_values() {
        let p = Vector3::new(1.0, 2.0, 3.0);
        let t = Transmitter::new(p, 1.0).unwrap();
        let rx = vec![p, Vector3::new(0.0, 1.0, 0.0), Vector3::new(0.0, 2.0, 0.0), Vector3::new(0.0, 3.0, 0.0)];
        assert!(RadarNetwork::new(vec![t], rx).is_err());
        assert!(Transmitter::new(p, 0.0).is_err());
        assert!(NoiseModel::new(-1.0, 1e11, 0).is_err());
        assert!(NoiseModel::new(1e-9, 0.0, 0).is_err());
        assert!(StateVector::new(Vector3::new(f64::INFINITY, 0.0, 0.0), Vector3::zeros()).is_err());
    }
}
