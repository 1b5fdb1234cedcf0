//! Full-matrix gradient descent against the per-eigenvalue scalar dynamics in a rotated basis.

mod common;

use factorflow::dynamics::InitKind;

const TOL: f64 = 1e-10;

#[test]
fn identical_init_decouples() {
    for depth in [2, 3, 4] {
        let dev = common::decoupling_deviation(InitKind::Identical { alpha: 0.5 }, depth, 11);
        assert!(dev <= TOL, "N = {depth}: deviation {dev:e}");
    }
}

#[test]
fn perturbed_init_decouples() {
    for depth in [2, 3, 4] {
        let dev = common::decoupling_deviation(InitKind::Perturbed { alpha: 0.5, beta: 0.1 }, depth, 12);
        assert!(dev <= TOL, "N = {depth}: deviation {dev:e}");
    }
}

#[test]
fn single_depth_is_linear_regression() {
    let dev = common::decoupling_deviation(InitKind::Identical { alpha: 0.3 }, 1, 13);
    assert!(dev <= TOL, "deviation {dev:e}");
}
