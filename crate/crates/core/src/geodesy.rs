//! WGS-84 geodetic to Earth-centered Earth-fixed conversion.

use alloc::format;
use nalgebra::Vector3;

use crate::{Error, Result};

/// WGS-84 semi-major axis, m.
pub const WGS84_A: f64 = 6_378_137.0;
/// WGS-84 inverse flattening.
pub const WGS84_INV_F: f64 = 298.257_223_563;
/// WGS-84 flattening.
pub const WGS84_F: f64 = 1.0 / WGS84_INV_F;
/// WGS-84 semi-minor axis, m.
pub const WGS84_B: f64 = WGS84_A * (1.0 - WGS84_F);
/// First eccentricity squared.
pub const WGS84_E2: f64 = WGS84_F * (2.0 - WGS84_F);

/// Cartesian ECEF position in meters.
pub type EcefPosition = Vector3<f64>;

/// Latitude/longitude in degrees and altitude above the ellipsoid in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodeticCoordinate {
    latitude_deg: f64,
    longitude_deg: f64,
    altitude_m: f64,
}

impl GeodeticCoordinate {
    pub fn new(latitude_deg: f64, longitude_deg: f64, altitude_m: f64) -> Result<Self> {
        if !latitude_deg.is_finite() || !(-90.0..=90.0).contains(&latitude_deg) {
            return Err(Error::validation(
                "latitude_deg",
                format!("{latitude_deg} outside [-90, 90]"),
            ));
        }
        if !longitude_deg.is_finite() || !(-180.0..=180.0).contains(&longitude_deg) {
            return Err(Error::validation(
                "longitude_deg",
                format!("{longitude_deg} outside [-180, 180]"),
            ));
        }
        if !altitude_m.is_finite() {
            return Err(Error::validation("altitude_m", "not finite"));
        }
        Ok(Self {
            latitude_deg,
            longitude_deg,
            altitude_m,
        })
    }

    /// Station on the ellipsoid surface.
    pub fn on_surface(latitude_deg: f64, longitude_deg: f64) -> Result<Self> {
        Self::new(latitude_deg, longitude_deg, 0.0)
    }

    pub fn latitude_deg(&self) -> f64 {
        self.latitude_deg
    }

    pub fn longitude_deg(&self) -> f64 {
        self.longitude_deg
    }

    pub fn altitude_m(&self) -> f64 {
        self.altitude_m
    }
}

/// Converts a geodetic coordinate to ECEF on the WGS-84 ellipsoid.
pub fn geodetic_to_ecef(g: &GeodeticCoordinate) -> EcefPosition {
    let lat = g.latitude_deg.to_radians();
    let lon = g.longitude_deg.to_radians();
    let (sin_lat, cos_lat) = (libm::sin(lat), libm::cos(lat));
    let (sin_lon, cos_lon) = (libm::sin(lon), libm::cos(lon));
    // prime vertical radius of curvature
    let n = WGS84_A / libm::sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat);
    let h = g.altitude_m;
    Vector3::new(
        (n + h) * cos_lat * cos_lon,
        (n + h) * cos_lat * sin_lon,
        (n * (1.0 - WGS84_E2) + h) * sin_lat,
    )
}
