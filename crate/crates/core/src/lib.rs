//! One-shot initial orbit determination from simultaneous multistatic radar
//! time-delay and Doppler-shift measurements.
//!
//! The crate is `no_std` (it needs `alloc`) and carries only the numerical
//! core: station geodesy, the bistatic measurement models and their seeded
//! simulation, the closed-form two-stage weighted least squares estimator,
//! a three-station trilateration baseline, the Cramér–Rao lower bound and
//! confidence-ellipsoid geometry. File formats, Monte Carlo orchestration and
//! the command line live in the `oneshot-iod` companion crate.
//!
//! All quantities are SI: meters, meters per second, seconds and hertz, in
//! the Earth-centered Earth-fixed frame.
#![no_std]

extern crate alloc;

pub mod crlb;
pub mod ellipsoid;
mod error;
pub mod estimator;
pub mod geodesy;
pub mod linalg;
pub mod measurement;
pub mod scenario;
pub mod trilateration;

pub use error::{Error, Result};
pub use estimator::{estimate, estimate_stage1, EstimateWithCovariance, EstimatorConfig};
pub use geodesy::{geodetic_to_ecef, EcefPosition, GeodeticCoordinate};
pub use measurement::{simulate, true_delay, true_doppler, MeasurementSet};
pub use scenario::{builtin_scenario, NoiseModel, RadarNetwork, StateVector, Transmitter};

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
