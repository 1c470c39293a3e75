mod common;

use hplattice::hardy::{hardy_norm_maximal, MaximalGrid};
use hplattice::{LatticePoint, Window};

#[test]
fn riesz_and_maximal_norms_are_comparable() {
    let ratios = common::riesz_maximal_ratios();
    let c = ratios.iter().fold(1.0f64, |c, r| c.max(*r).max(1.0 / r));
    assert!(c <= 10.0, "empirical equivalence constant {c} from {ratios:?}");
}

#[test]
fn maximal_total_stable_under_window_doubling() {
    for seed in [1u64, 2] {
        let b = common::h1_atom(2, 1, seed);
        let total = |radius: u64| {
            let out = Window::centered(&LatticePoint::origin(2), radius);
            hardy_norm_maximal(&b, 1.0, &MaximalGrid::for_window(&out), &out).unwrap().total.windowed
        };
        let (small, large) = (total(64), total(128));
        let change = (large - small).abs() / large;
        assert!(change < 0.02, "seed {seed}: {small} → {large} ({change:.4})");
    }
}
