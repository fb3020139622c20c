//! CSV and JSON artifacts.
//!
//! CSV floats are written with 17 significant digits (`{:.16e}`). JSON uses
//! the shortest representation that parses back to the same double.
//!
//! | file | columns |
//! |------|---------|
//! | `measurements.csv` | `i, j, tau_s, doppler_hz` (1-based station indices) |
//! | `rmse.csv` | `sigma_t_s, estimator, stage, pos_rmse_m, vel_rmse_mps, crlb_pos_m, crlb_vel_mps, successes, failures, flagged` |
//! | `crlb.csv` | `sigma_t_s, pos_bound_m, vel_bound_mps` |
//! | `bias.csv` | `sigma_t_s, estimator, axis, unit, mean, std, skewness, mean_bound, successes, failures` |
//! | `bias_hist.csv` | `estimator, axis, bin, lower, upper, count` |
//! | `sigma_diff.csv` | `sigma_t_s, axis, unit, mean_diff, mean_sigma_wls, mean_sigma_tri, mean_ratio, pairs` |
//! | `sigma_diff_hist.csv` | `axis, bin, lower, upper, count` |

use std::fs;
use std::path::Path;

use nalgebra::DVector;
use oneshot_core::ellipsoid::Ellipsoid;
use oneshot_core::{EstimateWithCovariance, MeasurementSet, RadarNetwork, StateVector};
use serde_json::{json, Value};

use crate::error::{AppError, Result};
use crate::montecarlo::{
    BiasReport, CrlbRow, EllipsoidReport, EstimatorKind, Histogram, RmseRow, SigmaComparison, AXES,
};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn unit(axis: usize) -> &'static str {
    if axis < 3 {
        "m"
    } else {
        "m/s"
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        w.write_record(&r).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

pub fn measurements_csv(network: &RadarNetwork, meas: &MeasurementSet) -> Vec<u8> {
    let n = network.n();
    let rows = (0..meas.channels()).map(|k| {
        vec![
            (k / n + 1).to_string(),
            (k % n + 1).to_string(),
            fmt_f64(meas.tau[k]),
            fmt_f64(meas.doppler[k]),
        ]
    });
    csv_bytes(&["i", "j", "tau_s", "doppler_hz"], rows)
}

/// Reads a measurement file written by [`measurements_csv`]. Rows may come
/// in any order but every `(i, j)` channel must appear exactly once.
pub fn read_measurements(
    path: &Path,
    network: &RadarNetwork,
    sigma_t: f64,
    doppler_scale: f64,
) -> Result<MeasurementSet> {
    let csv_err = |message: String| AppError::Csv {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(e.to_string()))?;
    let headers = reader.headers().map_err(|e| csv_err(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["i", "j", "tau_s", "doppler_hz"] {
        return Err(csv_err("expected header i,j,tau_s,doppler_hz".into()));
    }
    let (m, n) = (network.m(), network.n());
    let mut tau = vec![None; m * n];
    let mut doppler = vec![0.0; m * n];
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(e.to_string()))?;
        let row = line + 2;
        let field = |c: usize| rec.get(c).unwrap_or("").trim();
        let idx = |c: usize, max: usize| -> Result<usize> {
            match field(c).parse::<usize>() {
                Ok(v) if (1..=max).contains(&v) => Ok(v - 1),
                _ => Err(csv_err(format!("row {row}: station index {:?} out of 1..={max}", field(c)))),
            }
        };
        let num = |c: usize| -> Result<f64> {
            field(c)
                .parse::<f64>()
                .map_err(|_| csv_err(format!("row {row}: {:?} is not a number", field(c))))
        };
        let k = idx(0, m)? * n + idx(1, n)?;
        if tau[k].is_some() {
            return Err(csv_err(format!("row {row}: duplicate channel")));
        }
        tau[k] = Some(num(2)?);
        doppler[k] = num(3)?;
    }
    if let Some(k) = tau.iter().position(Option::is_none) {
        return Err(csv_err(format!("missing channel i={}, j={}", k / n + 1, k % n + 1)));
    }
    let tau = DVector::from_iterator(m * n, tau.into_iter().flatten());
    Ok(MeasurementSet::new(tau, DVector::from_vec(doppler), sigma_t, doppler_scale)?)
}

pub fn rmse_csv(rows: &[RmseRow]) -> Vec<u8> {
    let header = [
        "sigma_t_s",
        "estimator",
        "stage",
        "pos_rmse_m",
        "vel_rmse_mps",
        "crlb_pos_m",
        "crlb_vel_mps",
        "successes",
        "failures",
        "flagged",
    ];
    csv_bytes(
        &header,
        rows.iter().map(|r| {
            vec![
                fmt_f64(r.sigma_t),
                r.estimator.name().into(),
                r.stage.name().into(),
                fmt_f64(r.pos_rmse_m),
                fmt_f64(r.vel_rmse_mps),
                fmt_f64(r.crlb_pos_m),
                fmt_f64(r.crlb_vel_mps),
                r.successes.to_string(),
                r.failures.to_string(),
                r.flagged.to_string(),
            ]
        }),
    )
}

pub fn crlb_csv(rows: &[CrlbRow]) -> Vec<u8> {
    csv_bytes(
        &["sigma_t_s", "pos_bound_m", "vel_bound_mps"],
        rows.iter()
            .map(|r| vec![fmt_f64(r.sigma_t), fmt_f64(r.pos_bound_m), fmt_f64(r.vel_bound_mps)]),
    )
}

fn histogram_rows<'a>(prefix: Vec<String>, h: &'a Histogram) -> impl Iterator<Item = Vec<String>> + 'a {
    h.counts.iter().enumerate().map(move |(b, c)| {
        let mut row = prefix.clone();
        row.extend([
            b.to_string(),
            fmt_f64(h.edges[b]),
            fmt_f64(h.edges[b + 1]),
            c.to_string(),
        ]);
        row
    })
}

pub fn bias_csv(reports: &[BiasReport]) -> Vec<u8> {
    let header = [
        "sigma_t_s",
        "estimator",
        "axis",
        "unit",
        "mean",
        "std",
        "skewness",
        "mean_bound",
        "successes",
        "failures",
    ];
    let rows = reports.iter().flat_map(|r| {
        let bounds = r.mean_bounds();
        (0..6).map(move |k| {
            let a = &r.axes[k];
            vec![
                fmt_f64(r.sigma_t),
                r.estimator.name().into(),
                AXES[k].into(),
                unit(k).into(),
                fmt_f64(a.mean),
                fmt_f64(a.std),
                fmt_f64(a.skewness),
                fmt_f64(bounds[k]),
                r.successes.to_string(),
                r.failures.to_string(),
            ]
        })
    });
    csv_bytes(&header, rows)
}

pub fn bias_hist_csv(reports: &[BiasReport]) -> Vec<u8> {
    let rows = reports.iter().flat_map(|r| {
        (0..6).flat_map(move |k| {
            histogram_rows(vec![r.estimator.name().into(), AXES[k].into()], &r.axes[k].histogram)
        })
    });
    csv_bytes(&["estimator", "axis", "bin", "lower", "upper", "count"], rows)
}

pub fn sigma_diff_csv(c: &SigmaComparison) -> Vec<u8> {
    let header = [
        "sigma_t_s",
        "axis",
        "unit",
        "mean_diff",
        "mean_sigma_wls",
        "mean_sigma_tri",
        "mean_ratio",
        "pairs",
    ];
    let rows = c.axes.iter().enumerate().map(|(k, a)| {
        vec![
            fmt_f64(c.sigma_t),
            AXES[k].into(),
            unit(k).into(),
            fmt_f64(a.mean_diff),
            fmt_f64(a.mean_sigma_wls),
            fmt_f64(a.mean_sigma_tri),
            fmt_f64(a.mean_ratio),
            c.pairs.to_string(),
        ]
    });
    csv_bytes(&header, rows)
}

pub fn sigma_diff_hist_csv(c: &SigmaComparison) -> Vec<u8> {
    let rows = c
        .axes
        .iter()
        .enumerate()
        .flat_map(|(k, a)| histogram_rows(vec![AXES[k].into()], &a.histogram));
    csv_bytes(&["axis", "bin", "lower", "upper", "count"], rows)
}

fn state_json(s: &StateVector) -> Value {
    json!({
        "position_m": s.position.as_slice(),
        "velocity_mps": s.velocity.as_slice(),
    })
}

/// Estimate as JSON; `sigma` is the 6×6 covariance in row-major order.
pub fn estimate_json(est: &EstimateWithCovariance) -> Value {
    let sigma: Vec<f64> = (0..6).flat_map(|r| (0..6).map(move |c| (r, c))).map(|rc| est.sigma[rc]).collect();
    let diagnostics = est.diagnostics.as_ref().map(|d| {
        json!({
            "cond_stage1": d.cond_stage1,
            "cond_stage2": d.cond_stage2,
            "cond_sigma": d.cond_sigma,
            "stage1_normal_residual": d.stage1_normal_residual,
            "stage2_normal_residual": d.stage2_normal_residual,
            "gamma_inconsistency_m": d.gamma_inconsistency,
            "beta_inconsistency_mps": d.beta_inconsistency,
            "position_correction_m": d.position_correction,
            "velocity_correction_mps": d.velocity_correction,
        })
    });
    json!({
        "state": state_json(&est.state),
        "std_devs": est.std_devs(),
        "sigma": sigma,
        "stage1_state": state_json(&est.stage1_state),
        "diagnostics": diagnostics,
    })
}

pub fn estimates_document(
    sigma_t: f64,
    run_index: Option<u64>,
    estimates: &[(EstimatorKind, EstimateWithCovariance)],
) -> Value {
    let mut map = serde_json::Map::new();
    for (k, e) in estimates {
        map.insert(k.name().into(), estimate_json(e));
    }
    json!({
        "sigma_t_s": sigma_t,
        "run_index": run_index,
        "estimates": map,
    })
}

/// `rotation` is row-major; its columns are the axis directions.
pub fn ellipsoid_json(e: &Ellipsoid) -> Value {
    let rotation: Vec<f64> = (0..3).flat_map(|r| (0..3).map(move |c| (r, c))).map(|rc| e.rotation[rc]).collect();
    json!({
        "center_m": e.center.as_slice(),
        "semi_axes_m": e.semi_axes,
        "rotation": rotation,
        "volume_m3": e.volume(),
    })
}

pub fn ellipsoid_document(r: &EllipsoidReport) -> Value {
    let mut map = serde_json::Map::new();
    for (k, e) in &r.ellipsoids {
        map.insert(k.name().into(), ellipsoid_json(e));
    }
    json!({
        "sigma_t_s": r.sigma_t,
        "run_index": r.run_index,
        "confidence": r.confidence,
        "ellipsoids": map,
    })
}

pub fn json_bytes(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("JSON values always serialize");
    out.push(b'\n');
    out
}

pub fn write_artifact(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| AppError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario_file::Scenario;
    use oneshot_core::simulate;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(7.33e-2).parse::<f64>().unwrap(), 7.33e-2);
    }

    #[test]
    fn measurements_round_trip() {
        let s = Scenario::builtin();
        let meas = simulate(&s.network, &s.truth, &s.noise, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_artifact(&path, &measurements_csv(&s.network, &meas)).unwrap();
        let back = read_measurements(&path, &s.network, meas.sigma_t, meas.doppler_variance_scale).unwrap();
        assert_eq!(back, meas);
    }

    #[test]
    fn missing_channel_is_reported() {
        let s = Scenario::builtin();
        let meas = simulate(&s.network, &s.truth, &s.noise, 0).unwrap();
        let text = String::from_utf8(measurements_csv(&s.network, &meas)).unwrap();
        let truncated: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, truncated).unwrap();
        let err = read_measurements(&path, &s.network, 1e-9, 1e11).unwrap_err();
        assert!(err.to_string().contains("missing channel"), "{err}");
    }
}
