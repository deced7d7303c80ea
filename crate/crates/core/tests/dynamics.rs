mod common;

use common::fixture;
use crnlc::cfrm::{cf_rm, Variant};
use crnlc::conjugacy::{verify_linear_conjugacy, VerifyOptions};
use crnlc::ode::{compare_trajectories, integrate, IntegrateOptions, Method};

#[test]
fn schmitz_conserves_total_carbon() {
    let sys = fixture("schmitz.net");
    let x0 = [1.0, 0.8, 1.2, 0.9, 1.1, 0.7];
    let traj = integrate(&sys, &x0, 50.0, &IntegrateOptions::default()).unwrap();
    let total: f64 = x0.iter().sum();
    let drift = traj
        .states
        .iter()
        .map(|x| (x.iter().sum::<f64>() - total).abs())
        .fold(0.0, f64::max);
    assert!(drift < 1e-6, "drift {drift}");
}

#[test]
fn transform_follows_the_same_trajectory() {
    let sys = fixture("schmitz.net");
    let target = cf_rm(&sys, Variant::Generic).target;
    let x0 = [1.0; 6];
    let a = integrate(&sys, &x0, 20.0, &IntegrateOptions::default()).unwrap();
    let b = integrate(&target, &x0, 20.0, &IntegrateOptions::default()).unwrap();
    let gap = compare_trajectories(&a, &b, &[1.0; 6]).unwrap();
    assert!(gap < 1e-6, "gap {gap}");
}

#[test]
fn sparse_realization_tracks_scaled_source() {
    let a = fixture("schmitz_cf.net");
    let b = fixture("sparse.net");
    let c = [2.28, 1.14, 1.14, 1.14, 4.56, 4.56];
    let res = verify_linear_conjugacy(&a, &b, &c, &VerifyOptions::default()).unwrap();
    let gap = res.trajectory.unwrap();
    assert!(gap < 1e-4, "gap {gap}");

    let traj = integrate(&b, &[1.0; 6], 50.0, &IntegrateOptions::default()).unwrap();
    let csv = traj.to_csv();
    assert!(csv.lines().all(|l| l.split(',').count() == 7));
}

#[test]
fn fixed_step_agrees_with_adaptive() {
    let sys = fixture("ab.net");
    let rk4 = IntegrateOptions {
        method: Method::Rk4 { step: 0.01 },
        report_points: 11,
    };
    let adaptive = IntegrateOptions {
        report_points: 11,
        ..IntegrateOptions::default()
    };
    let a = integrate(&sys, &[1.0, 0.5], 5.0, &rk4).unwrap();
    let b = integrate(&sys, &[1.0, 0.5], 5.0, &adaptive).unwrap();
    assert!(compare_trajectories(&a, &b, &[1.0, 1.0]).unwrap() < 1e-8);
    let exact = (-5.0f64).exp();
    assert!((b.final_state()[0] - exact).abs() < 1e-7);
}
