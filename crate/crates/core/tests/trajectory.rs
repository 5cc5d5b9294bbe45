use cgda_core::trajectory::{
    compute_goal_count, fit_rbf, generalize, resample, sample_action, Demonstration, FeatureTrajectory, Kernel, RbfInterpolant,
    TrajectoryError,
};
use num_rational::Ratio;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rational_goal_count_is_floor(dn in 1i64..10_000, dd in 1i64..100, tn in 1i64..10_000, td in 1i64..100) {
        let d = Ratio::new(dn, dd);
        let t = Ratio::new(tn, td);
        // floor((dn/dd) / (tn/td)) = floor(dn*td / (dd*tn))
        let expected = (dn * td).div_euclid(dd * tn);
        match compute_goal_count(d, t) {
            Ok(n) => prop_assert_eq!(n as i64, expected),
            Err(TrajectoryError::DegenerateAction) => prop_assert_eq!(expected, 0),
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interpolant_passes_through_nodes(
        m in 1usize..=3,
        n in 1usize..=12,
        seed in prop::collection::vec(-10.0f64..10.0, 36),
    ) {
        let cols: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|f| seed[(j * m + f) % seed.len()] + j as f64).collect()).collect();
        let traj = FeatureTrajectory::from_columns(&cols).unwrap();
        let rbf = fit_rbf(&traj).unwrap();
        for (node, col) in rbf.nodes().iter().zip(&cols) {
            for (got, want) in rbf.eval(*node).iter().zip(col) {
                prop_assert!((got - want).abs() <= 1e-8, "residual {}", (got - want).abs());
            }
        }
    }

    #[test]
    fn resample_matches_linear_oracle(
        values in prop::collection::vec(-5.0f64..5.0, 2..10),
        gaps in prop::collection::vec(0.1f64..2.0, 10),
        n in 1usize..15,
    ) {
        let mut t = 0.0;
        let samples: Vec<(f64, Vec<f64>)> = values.iter().enumerate().map(|(i, &v)| {
            if i > 0 { t += gaps[i - 1]; }
            (t, vec![v])
        }).collect();
        let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let demo = Demonstration::from_samples(samples).unwrap();
        let out = resample(&demo, n).unwrap();
        let total = times[times.len() - 1];
        for k in 0..n {
            let u = if n == 1 { 1.0 } else { k as f64 / (n - 1) as f64 };
            let tt = u * total;
            let hi = times.iter().position(|&x| x >= tt).unwrap_or(times.len() - 1).max(1);
            let lo = hi - 1;
            let w = (tt - times[lo]) / (times[hi] - times[lo]);
            let want = values[lo] + (values[hi] - values[lo]) * w;
            prop_assert!((out.get(0, k) - want).abs() <= 1e-9);
        }
    }

    #[test]
    fn goal_count_is_monotone_in_duration(d in 1.0f64..100.0, extra in 0.0f64..50.0, t in 0.1f64..5.0) {
        if let (Ok(a), Ok(b)) = (compute_goal_count(d, t), compute_goal_count(d + extra, t)) {
            prop_assert!(a <= b);
        }
    }
}

#[test]
fn two_node_system_by_hand() {
    let traj = FeatureTrajectory::from_columns([[1.0], [3.0]]).unwrap();
    let rbf = fit_rbf(&traj).unwrap();
    // Shape 2, nodes 0 and 1: off-diagonal entry exp(-4).
    let a = (-4.0f64).exp();
    let det = 1.0 - a * a;
    let w0 = (1.0 - a * 3.0) / det;
    let w1 = (3.0 - a * 1.0) / det;
    assert!((rbf.weight(0, 0) - w0).abs() < 1e-12);
    assert!((rbf.weight(0, 1) - w1).abs() < 1e-12);
    let t = 0.37;
    let want = w0 * (-(2.0f64 * t).powi(2)).exp() + w1 * (-(2.0f64 * (1.0 - t)).powi(2)).exp();
    assert!((rbf.eval(t)[0] - want).abs() < 1e-12);
}

#[test]
fn identical_demos_generalize_to_their_resampling() {
    let demo = Demonstration::from_samples((0..20).map(|k| (k as f64 * 0.5, vec![(k as f64).sin(), k as f64]))).unwrap();
    let action = generalize(&[demo.clone(), demo.clone(), demo.clone()], 1.0).unwrap();
    assert_eq!(action.goal_count(), 9);
    let single = resample(&demo, 9).unwrap();
    for (a, b) in action.trajectory().as_column_major().iter().zip(single.as_column_major()) {
        assert!((a - b).abs() < 1e-12);
    }
    let first = sample_action(&action, 0.0).unwrap();
    assert!((first[1] - 0.0).abs() < 1e-8);
    assert!(sample_action(&action, 1.5).is_err());
}

#[test]
fn resampling_at_own_grid_is_identity() {
    let traj = FeatureTrajectory::from_columns([[0.0, 1.0], [2.0, -1.0], [4.0, 0.5], [5.0, 0.0]]).unwrap();
    let demo = Demonstration::from_trajectory(&traj).unwrap();
    assert_eq!(resample(&demo, 4).unwrap(), traj);
}

#[test]
fn duplicate_nodes_are_singular() {
    let traj = FeatureTrajectory::from_columns([[1.0], [2.0]]).unwrap();
    let err = RbfInterpolant::fit_nodes(vec![0.5, 0.5], &traj, Kernel::Gaussian { shape: 2.0 }).unwrap_err();
    assert!(matches!(err, TrajectoryError::SingularSystem { .. }));
}

#[test]
fn csv_round_trip() {
    let demo = Demonstration::from_samples([(0.0, vec![0.1, -2.5]), (0.25, vec![1e-7, 3.0]), (1.0, vec![0.3, 0.0])]).unwrap();
    let mut buf = Vec::new();
    demo.write_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf.clone()).unwrap().starts_with("t,f1,f2\n"));
    assert_eq!(Demonstration::<f64>::read_csv(&buf[..]).unwrap(), demo);
    assert!(Demonstration::<f64>::read_csv("x,f1\n0,1\n1,2\n".as_bytes()).is_err());
    assert!(Demonstration::<f64>::read_csv("t,f1\n0,1\n0,2\n".as_bytes()).is_err());
}

#[test]
fn single_precision_pipeline() {
    let demo = Demonstration::<f32>::from_samples((0..10).map(|k| (k as f32, vec![k as f32 * 0.1]))).unwrap();
    let action = generalize(&[demo], 3.0f32).unwrap();
    assert_eq!(action.goal_count(), 3);
    let rbf = action.interpolant();
    for (node, col) in rbf.nodes().iter().zip(action.trajectory().columns()) {
        assert!((rbf.eval(*node)[0] - col[0]).abs() < 1e-4);
    }
}
