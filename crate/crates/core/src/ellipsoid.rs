//! Position confidence ellipsoids.

use alloc::format;
use nalgebra::{Matrix3, Vector3};

use crate::estimator::EstimateWithCovariance;
use crate::{Error, Result};

/// Default confidence level of exported ellipsoids.
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Upper tail `P(X > x)` of the chi-square distribution with 3 degrees of
/// freedom.
pub fn chi2_3_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let half = 0.5 * x;
    libm::erfc(libm::sqrt(half)) + libm::sqrt(2.0 * x / core::f64::consts::PI) * libm::exp(-half)
}

pub fn chi2_3_cdf(x: f64) -> f64 {
    1.0 - chi2_3_sf(x)
}

/// Quantile of the chi-square distribution with 3 degrees of freedom.
pub fn chi2_3_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::validation("confidence", format!("{p} must lie in (0, 1)")));
    }
    let tail = 1.0 - p;
    let (mut lo, mut hi) = (0.0_f64, 16.0_f64);
    while chi2_3_sf(hi) > tail {
        hi *= 2.0;
    }
    // sf is monotone; bisect to full double precision
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if chi2_3_sf(mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipsoid {
    pub center: Vector3<f64>,
    /// Semi-axis lengths in m, largest first.
    pub semi_axes: [f64; 3],
    /// Columns are the unit axis directions matching `semi_axes`.
    pub rotation: Matrix3<f64>,
    pub confidence: f64,
}

impl Ellipsoid {
    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * core::f64::consts::PI * self.semi_axes.iter().product::<f64>()
    }
}

/// Flips `v` so that its largest-magnitude component is positive.
fn canonical_sign(v: Vector3<f64>) -> Vector3<f64> {
    let k = v.iamax();
    if v[k] < 0.0 {
        -v
    } else {
        v
    }
}

/// Confidence ellipsoid of a 3×3 position covariance.
///
/// Semi-axis `k` is `√(χ²₃(confidence)·λₖ)`. The first two axes follow the
/// largest-component-positive sign convention and the third completes a
/// right-handed frame.
pub fn ellipsoid_from_covariance(
    center: Vector3<f64>,
    covariance: &Matrix3<f64>,
    confidence: f64,
) -> Result<Ellipsoid> {
    let q = chi2_3_quantile(confidence)?;
    if !covariance.iter().all(|v| v.is_finite()) {
        return Err(Error::validation("covariance", "not finite"));
    }
    let sym = (covariance + covariance.transpose()) * 0.5;
    if (covariance - sym).amax() > 1e-9 * covariance.amax() {
        return Err(Error::validation("covariance", "not symmetric"));
    }
    let eig = sym.symmetric_eigen();
    let trace = sym.trace();
    if let Some(l) = eig.eigenvalues.iter().find(|&&l| l < -1e-9 * trace.abs()) {
        return Err(Error::validation(
            "covariance",
            format!("not positive semidefinite (eigenvalue {l:.3e})"),
        ));
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let semi_axes = order.map(|k| libm::sqrt(q * eig.eigenvalues[k].max(0.0)));
    let a0 = canonical_sign(eig.eigenvectors.column(order[0]).into_owned());
    let a1 = canonical_sign(eig.eigenvectors.column(order[1]).into_owned());
    let a2 = a0.cross(&a1);
    Ok(Ellipsoid {
        center,
        semi_axes,
        rotation: Matrix3::from_columns(&[a0, a1, a2]),
        confidence,
    })
}

/// Position ellipsoid of an estimate.
pub fn ellipsoid_export(estimate: &EstimateWithCovariance, confidence: f64) -> Result<Ellipsoid> {
    let block: Matrix3<f64> = estimate.sigma.fixed_view::<3, 3>(0, 0).into_owned();
    ellipsoid_from_covariance(estimate.state.position, &block, confidence)
}
