#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Vector3};
use oneshot_core::{geodetic_to_ecef, GeodeticCoordinate, RadarNetwork, StateVector, Transmitter};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Column-scaled conjugate gradient on the least-squares normal equations
/// (CGLS). Independent of the SVD path used by the library.
pub fn cgls(a: &DMatrix<f64>, b: &DVector<f64>, max_iter: usize) -> DVector<f64> {
    let d: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    let scaled = DMatrix::from_fn(a.nrows(), a.ncols(), |r, c| a[(r, c)] / d[c]);
    let mut x = DVector::zeros(a.ncols());
    let mut r = b.clone();
    let mut s = scaled.transpose() * &r;
    let mut p = s.clone();
    let mut gamma = s.norm_squared();
    let gamma0 = gamma;
    for _ in 0..max_iter {
        // stop once ‖Aᵀr‖ has dropped by 1e-13; iterating further loses conjugacy
        if gamma <= 1e-26 * gamma0 {
            break;
        }
        let q = &scaled * &p;
        let alpha = gamma / q.norm_squared();
        x += &p * alpha;
        r -= &q * alpha;
        s = scaled.transpose() * &r;
        let next = s.norm_squared();
        p = &s + &p * (next / gamma);
        gamma = next;
    }
    DVector::from_fn(a.ncols(), |k, _| x[k] / d[k])
}

pub fn rel(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

pub fn surface(lat: f64, lon: f64) -> Vector3<f64> {
    geodetic_to_ecef(&GeodeticCoordinate::on_surface(lat, lon).unwrap())
}

pub fn wrap_lon(lon: f64) -> f64 {
    (lon + 540.0).rem_euclid(360.0) - 180.0
}

/// A regional network of 3 transmitters and `4..=6` receivers under a LEO
/// target at 300 to 1200 km altitude moving at orbital speed.
pub fn random_leo_scenario(seed: u64) -> (RadarNetwork, StateVector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lat0: f64 = rng.random_range(-55.0..55.0);
    let lon0: f64 = rng.random_range(-180.0..180.0);
    let spread = 8.0;
    let station = |rng: &mut ChaCha8Rng| {
        let lat = lat0 + rng.random_range(-spread..spread);
        let lon = wrap_lon(lon0 + rng.random_range(-spread..spread) / lat0.to_radians().cos());
        surface(lat, lon)
    };
    let tx: Vec<Transmitter> = (0..3)
        .map(|_| {
            let fc = rng.random_range(0.4e9..2.0e9);
            Transmitter::new(station(&mut rng), fc).unwrap()
        })
        .collect();
    let n = rng.random_range(4..=6);
    let rx: Vec<Vector3<f64>> = (0..n).map(|_| station(&mut rng)).collect();

    let lat = lat0 + rng.random_range(-4.0..4.0);
    let lon = wrap_lon(lon0 + rng.random_range(-4.0..4.0));
    let alt = rng.random_range(300e3..1200e3);
    let position = geodetic_to_ecef(&GeodeticCoordinate::new(lat, lon, alt).unwrap());
    let up = position.normalize();
    let east = Vector3::z().cross(&up).normalize();
    let north = up.cross(&east);
    let heading: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let speed = rng.random_range(7.0e3..7.8e3);
    let velocity = (east * heading.cos() + north * heading.sin()) * speed + up * rng.random_range(-200.0..200.0);
    (
        RadarNetwork::new(tx, rx).unwrap(),
        StateVector::new(position, velocity).unwrap(),
    )
}
