mod common;

use common::optimal;
use fpm::design::{links_from_design, DesignParams, LinkSet};
use fpm::sensitivity::{kinematic_sensitivity, sweep_landscape, workspace_flatness_curve, SensitivityConfig, SweepGrid};

fn quick(seed: u64) -> SensitivityConfig {
    SensitivityConfig { n_points: 30, n_instances: 20, seed, ..Default::default() }
}

#[test]
fn integer_design_is_worse_than_optimal() {
    let opt = kinematic_sensitivity(&optimal(), &quick(1)).unwrap();
    let int = kinematic_sensitivity(&LinkSet::nominal(1.0, 2.0, 3.0, 3.0), &quick(1)).unwrap();
    assert!(int.s_k > 3.0 * opt.s_k, "{} vs {}", int.s_k, opt.s_k);
}

#[test]
fn independent_of_thread_count() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| kinematic_sensitivity(&optimal(), &quick(9)).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn scale_free() {
    let a = kinematic_sensitivity(&optimal(), &quick(2)).unwrap();
    let big = links_from_design(&DesignParams::optimal(250.0)).unwrap();
    let b = kinematic_sensitivity(&big, &quick(2)).unwrap();
    assert!((a.s_k - b.s_k).abs() < 1e-6 * a.s_k, "{} vs {}", a.s_k, b.s_k);
}

#[test]
fn flatness_grows_with_workspace() {
    let curve = workspace_flatness_curve(&optimal(), &quick(4), &[0.1, 0.2, 0.4]).unwrap();
    assert!(curve.windows(2).all(|w| w[1].flatness_rmse >= w[0].flatness_rmse), "{curve:?}");
}

#[test]
fn small_sweep_is_reproducible() {
    let grid = SweepGrid::square(4, std::f64::consts::FRAC_PI_2);
    let cfg = SensitivityConfig { n_points: 20, n_instances: 6, seed: 7, ..Default::default() };
    let a = sweep_landscape(&grid, &cfg).unwrap().to_csv();
    let b = sweep_landscape(&grid, &cfg).unwrap().to_csv();
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 17);
}
