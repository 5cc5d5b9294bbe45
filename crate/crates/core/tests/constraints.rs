use cgda_core::constraints::{
    apply_penalty, build_box, feasible_velocity, BoundingBox, ConstraintSet, PenaltyStrategy, VelocityLimit, VelocityNorm,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 3)
}

#[test]
fn random_points_against_axis_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let solutions: Vec<[f64; 3]> = (0..20).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
    let d = 0.1;
    let bbox = build_box(&solutions, d).unwrap();
    for _ in 0..1000 {
        let p = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
        let inside = (0..3).all(|k| {
            let lo = solutions.iter().map(|s| s[k]).fold(f64::INFINITY, f64::min) - d;
            let hi = solutions.iter().map(|s| s[k]).fold(f64::NEG_INFINITY, f64::max) + d;
            lo <= p[k] && p[k] <= hi
        });
        assert_eq!(bbox.contains(&p), inside);
    }
}

proptest! {
    #[test]
    fn larger_dilatation_is_a_superset(pts in prop::collection::vec(point(), 1..6), q in point(), d in 0.0f64..0.5, extra in 0.0f64..0.5) {
        let small = build_box(&pts, d).unwrap();
        let big = build_box(&pts, d + extra).unwrap();
        if small.contains(&q) {
            prop_assert!(big.contains(&q));
        }
        for p in &pts {
            prop_assert!(small.contains(p));
        }
        prop_assert!(build_box(&pts, f64::INFINITY).unwrap().contains(&q));
    }

    #[test]
    fn velocity_is_symmetric(a in point(), b in point(), v in 0.01f64..5.0) {
        for norm in [VelocityNorm::MaxAbs, VelocityNorm::L2] {
            let limit = VelocityLimit::with_norm(v, norm).unwrap();
            prop_assert_eq!(feasible_velocity(&limit, &a, &b).unwrap(), feasible_velocity(&limit, &b, &a).unwrap());
        }
    }

    #[test]
    fn penalties_never_reward_infeasibility(raw in 0.0f64..100.0, p in 1.0f64..10.0) {
        for s in [PenaltyStrategy::Death, PenaltyStrategy::Static(p), PenaltyStrategy::Additive(p), PenaltyStrategy::Multiplicative(p)] {
            prop_assert_eq!(apply_penalty(&s, raw, true), raw);
            prop_assert!(apply_penalty(&s, raw, false) >= raw);
        }
    }
}

#[test]
fn max_abs_is_inclusive() {
    let limit = VelocityLimit::new(5.0).unwrap();
    assert!(feasible_velocity(&limit, &[0.0, 0.0], &[5.0, -5.0]).unwrap());
    assert!(!feasible_velocity(&limit, &[0.0, 0.0], &[5.0, -5.000001]).unwrap());
    let l2 = VelocityLimit::with_norm(5.0, VelocityNorm::L2).unwrap();
    assert!(!feasible_velocity(&l2, &[0.0, 0.0], &[5.0, -5.0]).unwrap());
    assert!(VelocityLimit::new(0.0).is_err());
    assert!(feasible_velocity(&limit, &[0.0], &[0.0, 1.0]).is_err());
}

#[test]
fn wax_circle_box_side() {
    let pts: Vec<[f64; 3]> = (0..64)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / 64.0;
            [0.3 + 0.15 * a.cos(), 0.25 + 0.15 * a.sin(), -0.4]
        })
        .collect();
    let BoundingBox::Bounded { min, max } = build_box(&pts, 0.05).unwrap() else { panic!("finite box expected") };
    assert!((max[0] - min[0] - 0.40).abs() < 1e-12);
    assert!((max[1] - min[1] - 0.40).abs() < 1e-12);
    assert!((max[2] - min[2] - 0.10).abs() < 1e-12);
}

#[test]
fn invalid_boxes() {
    assert!(build_box::<f64, [f64; 3]>(&[], 0.1).is_err());
    assert!(build_box(&[[0.0f64, 0.0]], -0.1).is_err());
    assert!(build_box(&[vec![0.0f64, 0.0], vec![1.0]], 0.1).is_err());
}

#[test]
fn first_goal_skips_velocity() {
    let set = ConstraintSet { bounding_box: BoundingBox::Unbounded, velocity: VelocityLimit::new(1.0).unwrap(), penalty: PenaltyStrategy::Death };
    assert!(set.is_feasible(&[0.0; 3], None, &[50.0, 50.0]));
    assert!(!set.is_feasible(&[0.0; 3], Some(&[0.0, 0.0]), &[50.0, 50.0]));
}
