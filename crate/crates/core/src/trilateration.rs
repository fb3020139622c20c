//! Three-station range/range-rate trilateration baseline.
//!
//! Position comes from the closed-form intersection of three spheres,
//! polished with Gauss–Newton on the range residuals; velocity from the 3×3
//! system `ρᵢᵀv = ṙᵢ`. The covariance is the first-order propagation of
//! independent range and range-rate noise through both solves.

use alloc::format;
use nalgebra::{Matrix3, Matrix6, Vector3};

use crate::estimator::EstimateWithCovariance;
use crate::geodesy::WGS84_A;
use crate::measurement::{line_of_sight, standard_normal_draws};
use crate::scenario::{NoiseModel, RadarNetwork, StateVector};
use crate::{Error, Result, SPEED_OF_LIGHT};

const MAX_GAUSS_NEWTON_STEPS: usize = 10;

/// Three monostatic ranges and range-rates with their noise levels.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeSet {
    pub station_positions: [Vector3<f64>; 3],
    /// m
    pub ranges: [f64; 3],
    /// m/s
    pub range_rates: [f64; 3],
    pub sigma_r: f64,
    pub sigma_rdot: f64,
}

impl RangeSet {
    pub fn new(
        station_positions: [Vector3<f64>; 3],
        ranges: [f64; 3],
        range_rates: [f64; 3],
        sigma_r: f64,
        sigma_rdot: f64,
    ) -> Result<Self> {
        if let Some(k) = ranges.iter().position(|&r| !(r.is_finite() && r > 0.0)) {
            return Err(Error::validation(
                format!("ranges[{k}]"),
                format!("{} must be positive", ranges[k]),
            ));
        }
        if !range_rates.iter().all(|v| v.is_finite()) {
            return Err(Error::validation("range_rates", "not finite"));
        }
        if !(sigma_r >= 0.0 && sigma_rdot >= 0.0) {
            return Err(Error::validation("sigma", "noise levels must be >= 0"));
        }
        let [p1, p2, p3] = station_positions;
        let e1 = p2 - p1;
        let e2 = p3 - p1;
        let scale = e1.norm_squared().max(e2.norm_squared());
        if !(e1.cross(&e2).norm() > 1e-9 * scale) {
            return Err(Error::validation("station_positions", "stations are collinear"));
        }
        Ok(Self {
            station_positions,
            ranges,
            range_rates,
            sigma_r,
            sigma_rdot,
        })
    }
}

/// Range and range-rate noise levels `(c·σ_t, c·√scale·σ_t / f̄_c)`.
pub fn range_noise(noise: &NoiseModel, mean_carrier_hz: f64) -> (f64, f64) {
    let sigma_r = SPEED_OF_LIGHT * noise.sigma_t;
    let sigma_rdot = SPEED_OF_LIGHT * noise.sigma_f() / mean_carrier_hz;
    (sigma_r, sigma_rdot)
}

/// Ranges and range-rates at the first three transmitter sites for run
/// `run_index`.
///
/// The noise reuses the unit draws of the delay/Doppler simulation for the
/// same run (channel `(i, 1)` for station `i`), so both estimators see common
/// random numbers.
pub fn derive_ranges(
    network: &RadarNetwork,
    truth: &StateVector,
    noise: &NoiseModel,
    run_index: u64,
) -> Result<RangeSet> {
    if network.m() < 3 {
        return Err(Error::validation(
            "network.transmitters",
            format!("trilateration needs 3 transmitters, network has {}", network.m()),
        ));
    }
    let tx = &network.transmitters()[..3];
    let mean_fc = tx.iter().map(|t| t.carrier_frequency_hz).sum::<f64>() / 3.0;
    let (sigma_r, sigma_rdot) = range_noise(noise, mean_fc);
    let (dz, fz) = standard_normal_draws(noise.seed, run_index, network.channels());
    let mut ranges = [0.0; 3];
    let mut rates = [0.0; 3];
    for (i, t) in tx.iter().enumerate() {
        let (rho, d) = line_of_sight(&truth.position, &t.position, "transmitter")?;
        let k = i * network.n();
        ranges[i] = d + sigma_r * dz[k];
        rates[i] = rho.dot(&truth.velocity) + sigma_rdot * fz[k];
    }
    RangeSet::new(
        [tx[0].position, tx[1].position, tx[2].position],
        ranges,
        rates,
        sigma_r,
        sigma_rdot,
    )
}

/// Both intersection points of three spheres, mirror images across the
/// plane of the centers.
pub fn sphere_intersections(centers: &[Vector3<f64>; 3], radii: &[f64; 3]) -> Result<[Vector3<f64>; 2]> {
    let [p1, p2, p3] = centers;
    let [r1, r2, r3] = *radii;
    let d = (p2 - p1).norm();
    let ex = (p2 - p1) / d;
    let i = ex.dot(&(p3 - p1));
    let ey_raw = p3 - p1 - ex * i;
    let ey = ey_raw.normalize();
    let ez = ex.cross(&ey);
    let j = ey.dot(&(p3 - p1));

    let x = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
    let y = (r1 * r1 - r3 * r3 + i * i + j * j) / (2.0 * j) - i * x / j;
    let z2 = r1 * r1 - x * x - y * y;
    if !(z2 >= 0.0) {
        return Err(Error::NoIntersection(format!(
            "spheres miss each other by {:.3e} m²",
            -z2
        )));
    }
    let z = libm::sqrt(z2);
    let base = p1 + ex * x + ey * y;
    Ok([base + ez * z, base - ez * z])
}

/// Picks the root outside the WGS-84 equatorial sphere; when both are
/// outside, the one with the smaller geocentric radius.
///
/// Three ranges cannot tell the mirror images apart, so with nearly
/// collinear stations (a steep station plane) the lower root can be the
/// wrong one.
fn select_root(roots: &[Vector3<f64>; 2]) -> Result<Vector3<f64>> {
    let exterior: [bool; 2] = [roots[0].norm() > WGS84_A, roots[1].norm() > WGS84_A];
    match exterior {
        [true, false] => Ok(roots[0]),
        [false, true] => Ok(roots[1]),
        [true, true] => Ok(if roots[0].norm() <= roots[1].norm() {
            roots[0]
        } else {
            roots[1]
        }),
        [false, false] => Err(Error::NoIntersection(
            "both intersection points lie inside the Earth".into(),
        )),
    }
}

fn line_of_sight_matrix(stations: &[Vector3<f64>; 3], x: &Vector3<f64>) -> Result<(Matrix3<f64>, [f64; 3])> {
    let mut r = Matrix3::zeros();
    let mut dist = [0.0; 3];
    for (k, p) in stations.iter().enumerate() {
        let (rho, d) = line_of_sight(x, p, "station")?;
        r.set_row(k, &rho.transpose());
        dist[k] = d;
    }
    Ok((r, dist))
}

fn solve_velocity(los: &Matrix3<f64>, rates: &[f64; 3]) -> Result<Vector3<f64>> {
    los.lu()
        .solve(&Vector3::from(*rates))
        .filter(|v| v.iter().all(|c| c.is_finite()))
        .ok_or_else(|| Error::estimation("lines of sight are coplanar", f64::INFINITY))
}

pub fn trilaterate(rs: &RangeSet) -> Result<EstimateWithCovariance> {
    let stations = &rs.station_positions;
    let roots = sphere_intersections(stations, &rs.ranges)?;
    let closed_form = select_root(&roots)?;

    let mut x = closed_form;
    for _ in 0..MAX_GAUSS_NEWTON_STEPS {
        let (jac, dist) = line_of_sight_matrix(stations, &x)?;
        let resid = Vector3::new(dist[0] - rs.ranges[0], dist[1] - rs.ranges[1], dist[2] - rs.ranges[2]);
        let step = match jac.lu().solve(&resid) {
            Some(s) if s.iter().all(|c| c.is_finite()) => s,
            _ => break,
        };
        x -= step;
        if step.norm() <= 1e-12 * x.norm() {
            break;
        }
    }

    let (los, dist) = line_of_sight_matrix(stations, &x)?;
    let velocity = solve_velocity(&los, &rs.range_rates)?;
    let los_inv = los
        .try_inverse()
        .ok_or_else(|| Error::estimation("lines of sight are coplanar", f64::INFINITY))?;

    // δṙ = H δx + R δv with rows of H = vᵀ(I − ρρᵀ)/d
    let mut h = Matrix3::zeros();
    for k in 0..3 {
        let rho = los.row(k).transpose();
        let proj = (Matrix3::identity() - rho * rho.transpose()) / dist[k];
        h.set_row(k, &(velocity.transpose() * proj));
    }
    let mut t = Matrix6::zeros();
    t.fixed_view_mut::<3, 3>(0, 0).copy_from(&los_inv);
    t.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-los_inv * h * los_inv));
    t.fixed_view_mut::<3, 3>(3, 3).copy_from(&los_inv);
    let (vr, vrd) = (rs.sigma_r * rs.sigma_r, rs.sigma_rdot * rs.sigma_rdot);
    let meas_cov = Matrix6::from_diagonal(&nalgebra::Vector6::new(vr, vr, vr, vrd, vrd, vrd));
    let sigma = t * meas_cov * t.transpose();
    let sigma = (sigma + sigma.transpose()) * 0.5;

    let (los0, _) = line_of_sight_matrix(stations, &closed_form)?;
    let closed_velocity = solve_velocity(&los0, &rs.range_rates)?;
    Ok(EstimateWithCovariance {
        state: StateVector {
            position: x,
            velocity,
        },
        sigma,
        stage1_state: StateVector {
            position: closed_form,
            velocity: closed_velocity,
        },
        diagnostics: None,
    })
}
