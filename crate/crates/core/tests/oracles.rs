//! Frozen reference values and independent numerical oracles.

mod common;

use common::{cgls, rel};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use oneshot_core::crlb::{crlb, fisher_information, measurement_jacobian};
use oneshot_core::ellipsoid::{chi2_3_cdf, chi2_3_quantile, ellipsoid_from_covariance};
use oneshot_core::estimator::{build_noise_matrix, build_stage1, estimate_with};
use oneshot_core::linalg::{wls_solve, Weighting};
use oneshot_core::measurement::{noiseless, standard_normal_draws};
use oneshot_core::trilateration::derive_ranges;
use oneshot_core::{
    builtin_scenario, estimate_stage1, simulate, true_delay, true_doppler, EstimatorConfig, StateVector,
    SPEED_OF_LIGHT,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

// 50-digit evaluation of the bistatic formulas for the first transmitter and
// receiver of the built-in scenario.
const TAU_11: f64 = 0.054_063_838_597_853_535_964_577_38;
const DOPPLER_11: f64 = 11_894.773_970_554_062_130_198_49;

#[test]
fn first_channel_matches_extended_precision() {
    let (net, truth, _) = builtin_scenario();
    let t = &net.transmitters()[0];
    let s = net.receivers()[0];
    let tau = true_delay(&truth.position, &t.position, &s).unwrap();
    let f = true_doppler(&truth, t, &s).unwrap();
    assert!((tau - TAU_11).abs() <= 1e-14 * TAU_11, "{tau:e}");
    assert!((f - DOPPLER_11).abs() <= 1e-11 * DOPPLER_11, "{f:e}");
}

#[test]
fn jacobian_matches_central_differences() {
    let (net, truth, _) = builtin_scenario();
    let j = measurement_jacobian(&net, &truth).unwrap();
    let mn = net.channels();
    // steps sized to each component's scale
    let steps = [1.0, 1.0, 1.0, 1e-2, 1e-2, 1e-2];
    for c in 0..6 {
        let perturbed = |h: f64| {
            let mut a = truth.to_array();
            a[c] += h;
            let s = StateVector::new(Vector3::new(a[0], a[1], a[2]), Vector3::new(a[3], a[4], a[5])).unwrap();
            noiseless(&net, &s).unwrap()
        };
        let (tp, fp) = perturbed(steps[c]);
        let (tm, fm) = perturbed(-steps[c]);
        let fd_tau = (&tp - &tm) / (2.0 * steps[c]);
        let fd_f = (&fp - &fm) / (2.0 * steps[c]);
        let col = j.column(c);
        let an_tau = col.rows(0, mn).into_owned();
        let an_f = col.rows(mn, mn).into_owned();
        // the delay block has no velocity dependence: both sides are zero there
        if c < 3 {
            assert!(rel(&an_tau, &fd_tau) <= 1e-6, "tau col {c}: {}", rel(&an_tau, &fd_tau));
        } else {
            assert_eq!(an_tau.amax(), 0.0);
            assert_eq!(fd_tau.amax(), 0.0);
        }
        assert!(rel(&an_f, &fd_f) <= 1e-6, "doppler col {c}: {}", rel(&an_f, &fd_f));
    }
}

fn whiten_diag(a: &DMatrix<f64>, b: &DVector<f64>, shape: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let aw = DMatrix::from_fn(a.nrows(), a.ncols(), |r, c| a[(r, c)] / shape[r].sqrt());
    let bw = DVector::from_fn(b.len(), |r, _| b[r] / shape[r].sqrt());
    (aw, bw)
}

#[test]
fn stage1_matches_iterative_minimizer() {
    let (net, truth, noise) = builtin_scenario();
    let meas = simulate(&net, &truth, &noise, 5).unwrap();
    let sys = build_stage1(&net, &meas).unwrap();
    let shape = meas.noise_shape();

    // pass 1: W = Q⁻¹
    let one = estimate_stage1(&net, &meas, &EstimatorConfig { stage1_passes: 1 }).unwrap();
    let (aw, bw) = whiten_diag(&sys.a, &sys.b, &shape);
    let y1 = cgls(&aw, &bw, 500);
    let lib1 = one.state.to_vector();
    assert!(rel(&lib1, &y1) <= 1e-8, "pass 1: {:e}", rel(&lib1, &y1));

    // pass 2: W = (B Q Bᵀ)⁻¹ at the pass-1 state, whitened by an explicit inverse
    let two = estimate_stage1(&net, &meas, &EstimatorConfig::default()).unwrap();
    let b = build_noise_matrix(&net, &one.state.state()).unwrap();
    let f = DMatrix::from_fn(b.nrows(), b.ncols(), |r, c| b[(r, c)] * shape[c].sqrt());
    let f_inv = f.try_inverse().unwrap();
    let y2 = cgls(&(&f_inv * &sys.a), &(&f_inv * &sys.b), 500);
    let lib2 = two.state.to_vector();
    assert!(rel(&lib2, &y2) <= 1e-8, "pass 2: {:e}", rel(&lib2, &y2));
    // and blockwise, so the large γ entries cannot mask the velocity block
    let v_lib = lib2.rows(3, 3).into_owned();
    let v_cg = y2.rows(3, 3).into_owned();
    assert!(rel(&v_lib, &v_cg) <= 1e-8, "velocity: {:e}", rel(&v_lib, &v_cg));
}

#[test]
fn small_wls_matches_iterative_minimizer() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..20 {
        let a = DMatrix::from_fn(8, 4, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::from_fn(8, |_, _| rng.random_range(-1.0..1.0));
        let l = DMatrix::from_fn(8, 8, |r, c| if r == c { 1.0 + rng.random::<f64>() } else if r > c { 0.3 * rng.random_range(-1.0..1.0) } else { 0.0 });
        let w = &l * l.transpose();
        let lib = wls_solve(&a, &b, Weighting::Weight(&w)).unwrap().solution;
        // minimize ‖Lᵀ(b − A y)‖² with W = L Lᵀ
        let oracle = cgls(&(l.transpose() * &a), &(l.transpose() * &b), 200);
        assert!(rel(&lib, &oracle) <= 1e-8, "trial {trial}: {:e}", rel(&lib, &oracle));
    }
}

#[test]
fn delay_noise_variance() {
    let (net, truth, noise) = builtin_scenario();
    let (tau0, f0) = noiseless(&net, &truth).unwrap();
    let mn = net.channels();
    let runs = 100_000 / mn + 1;
    let (mut st, mut sf, mut n) = (0.0, 0.0, 0.0);
    for r in 0..runs as u64 {
        let m = simulate(&net, &truth, &noise, r).unwrap();
        for k in 0..mn {
            st += (m.tau[k] - tau0[k]).powi(2);
            sf += (m.doppler[k] - f0[k]).powi(2);
            n += 1.0;
        }
    }
    let var_t = st / n;
    let var_f = sf / n;
    assert!((var_t / 1e-18 - 1.0).abs() <= 0.03, "{var_t:e}");
    assert!((var_f / (1e11 * 1e-18) - 1.0).abs() <= 0.03, "{var_f:e}");
}

#[test]
fn range_noise_std() {
    let (net, truth, noise) = builtin_scenario();
    let t1 = net.transmitters()[0].position;
    let d = (truth.position - t1).norm();
    let runs = 100_000u64;
    let ss: f64 = (0..runs)
        .map(|r| (derive_ranges(&net, &truth, &noise, r).unwrap().ranges[0] - d).powi(2))
        .sum();
    let std = (ss / runs as f64).sqrt();
    let expected = SPEED_OF_LIGHT * 1e-9;
    assert!((std / expected - 1.0).abs() <= 0.03, "{std}");
}

#[test]
fn range_noise_reuses_measurement_draws() {
    let (net, truth, noise) = builtin_scenario();
    let (dz, _) = standard_normal_draws(noise.seed, 9, net.channels());
    let rs = derive_ranges(&net, &truth, &noise, 9).unwrap();
    for i in 0..3 {
        let d = (truth.position - net.transmitters()[i].position).norm();
        let expected = d + SPEED_OF_LIGHT * noise.sigma_t * dz[i * net.n()];
        assert!((rs.ranges[i] - expected).abs() <= 1e-9 * d);
    }
}

#[test]
fn chi_square_quantile_matches_statrs() {
    let reference = ChiSquared::new(3.0).unwrap();
    for &p in &[1e-6, 0.01, 0.3, 0.5, 0.9, 0.95, 0.9537, 0.99, 0.999_9] {
        let ours = chi2_3_quantile(p).unwrap();
        let theirs = reference.inverse_cdf(p);
        assert!((ours - theirs).abs() <= 1e-9 * theirs, "p={p}: {ours} vs {theirs}");
        assert!((chi2_3_cdf(ours) - reference.cdf(ours)).abs() <= 1e-12);
    }
}

#[test]
fn unit_covariance_ellipsoid() {
    // χ²₃ = 8 exactly at this confidence
    let p = ChiSquared::new(3.0).unwrap().cdf(8.0);
    let e = ellipsoid_from_covariance(Vector3::zeros(), &Matrix3::identity(), p).unwrap();
    for a in e.semi_axes {
        assert!((a - 8f64.sqrt()).abs() <= 1e-9, "{a}");
    }
    // at the rounded level 0.9537 the quantile is 7.986, not 8
    let e = ellipsoid_from_covariance(Vector3::zeros(), &Matrix3::identity(), 0.9537).unwrap();
    let oracle = ChiSquared::new(3.0).unwrap().inverse_cdf(0.9537).sqrt();
    for a in e.semi_axes {
        assert!((a - oracle).abs() <= 1e-9);
        assert!((a - 8f64.sqrt()).abs() <= 3e-3);
    }
}

#[test]
fn crlb_matches_direct_fim_inverse() {
    let (net, truth, noise) = builtin_scenario();
    let b = crlb(&net, &truth, &noise).unwrap();
    let fim = fisher_information(&net, &truth, &noise).unwrap().matrix;
    // scale to unit diagonal before inverting
    let d = nalgebra::Vector6::from_fn(|k, _| fim[(k, k)].sqrt());
    let scaled = nalgebra::Matrix6::from_fn(|r, c| fim[(r, c)] / (d[r] * d[c]));
    let inv = scaled.try_inverse().unwrap();
    let direct = nalgebra::Matrix6::from_fn(|r, c| inv[(r, c)] / (d[r] * d[c]));
    let pos: f64 = (0..3).map(|k| direct[(k, k)]).sum::<f64>().sqrt();
    let vel: f64 = (3..6).map(|k| direct[(k, k)]).sum::<f64>().sqrt();
    assert!((b.position_bound_m / pos - 1.0).abs() <= 1e-6, "{} vs {pos}", b.position_bound_m);
    assert!((b.velocity_bound_mps / vel - 1.0).abs() <= 1e-6);
}

#[test]
fn stage1_correction_is_small() {
    let (net, truth, noise) = builtin_scenario();
    let mut corr: Vec<f64> = (0..101)
        .map(|r| {
            let m = simulate(&net, &truth, &noise, r).unwrap();
            let est = estimate_with(&net, &m, &EstimatorConfig::default()).unwrap();
            est.diagnostics.unwrap().position_correction / truth.position.norm()
        })
        .collect();
    corr.sort_by(f64::total_cmp);
    let median = corr[50];
    assert!(median < 1e-4, "median relative correction {median:e}");
}
