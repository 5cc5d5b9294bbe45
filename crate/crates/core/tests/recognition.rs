use cgda_core::recognition::{cost_matrix, discrepancy, discrepancy_par, optimal_path_cost, per_dimension_costs, CostMatrix};
use cgda_core::trajectory::FeatureTrajectory;
use proptest::prelude::*;

/// Cheapest monotone path by exhaustive enumeration.
fn brute_force(cm: &CostMatrix<i64>) -> i64 {
    fn walk(cm: &CostMatrix<i64>, i: usize, j: usize) -> i64 {
        let here = cm.get(i, j);
        if i + 1 == cm.rows() && j + 1 == cm.cols() {
            return here;
        }
        let mut best = i64::MAX;
        if i + 1 < cm.rows() && j + 1 < cm.cols() {
            best = best.min(walk(cm, i + 1, j + 1));
        }
        if i + 1 < cm.rows() {
            best = best.min(walk(cm, i + 1, j));
        }
        if j + 1 < cm.cols() {
            best = best.min(walk(cm, i, j + 1));
        }
        here + best
    }
    walk(cm, 0, 0)
}

fn seq() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-5i64..=5, 1..=6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dp_matches_enumeration(o in seq(), x in seq()) {
        let cm = cost_matrix(&o, &x).unwrap();
        let (path, cost) = optimal_path_cost(&cm);
        prop_assert_eq!(cost, brute_force(&cm));
        // The reported path is monotone, contiguous and sums to the cost.
        let steps = path.steps();
        prop_assert_eq!(steps[0], (0, 0));
        prop_assert_eq!(*steps.last().unwrap(), (x.len() - 1, o.len() - 1));
        for w in steps.windows(2) {
            let (di, dj) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            prop_assert!(matches!((di, dj), (1, 0) | (0, 1) | (1, 1)));
        }
        prop_assert_eq!(steps.iter().map(|&(i, j)| cm.get(i, j)).sum::<i64>(), cost);
    }

    #[test]
    fn transpose_keeps_cost(o in seq(), x in seq()) {
        let cm = cost_matrix(&o, &x).unwrap();
        prop_assert_eq!(optimal_path_cost(&cm).1, optimal_path_cost(&cm.transpose()).1);
    }

    #[test]
    fn self_alignment_is_free(rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 4), 1..4)) {
        let t = FeatureTrajectory::from_rows(&rows).unwrap();
        prop_assert_eq!(discrepancy(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn constant_offset_costs_the_offset(v in prop::collection::vec(-10.0f64..10.0, 1..8), delta in 0.0f64..3.0) {
        // For constant sequences every cell costs |delta|.
        let c = v[0];
        let a = vec![c; v.len()];
        let b: Vec<f64> = a.iter().map(|x| x + delta).collect();
        let ta = FeatureTrajectory::from_rows(&[a]).unwrap();
        let tb = FeatureTrajectory::from_rows(&[b]).unwrap();
        let d = discrepancy(&ta, &tb).unwrap();
        prop_assert!((d - delta).abs() <= 1e-12);
    }

    #[test]
    fn parallel_matches_sequential(rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 5), 1..5),
                                   other in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 5), 1..5)) {
        let m = rows.len().min(other.len());
        let a = FeatureTrajectory::from_rows(&rows[..m]).unwrap();
        let b = FeatureTrajectory::from_rows(&other[..m]).unwrap();
        prop_assert_eq!(discrepancy(&a, &b).unwrap().to_bits(), discrepancy_par(&a, &b).unwrap().to_bits());
        let sum: f64 = per_dimension_costs(&a, &b).unwrap().iter().sum();
        prop_assert_eq!(sum.to_bits(), discrepancy(&a, &b).unwrap().to_bits());
    }
}

#[test]
fn hand_worked_alignment() {
    // o = [0, 1, 2], x = [0, 2]: best path (0,0) (1,1) (1,2) costs 0 + 1 + 0.
    let cm = cost_matrix(&[0i64, 1, 2], &[0, 2]).unwrap();
    let (path, cost) = optimal_path_cost(&cm);
    assert_eq!(cost, 1);
    assert_eq!(path.len(), 3);
}

#[test]
fn mismatched_shapes_are_rejected() {
    let a = FeatureTrajectory::from_rows(&[vec![1.0, 2.0]]).unwrap();
    let b = FeatureTrajectory::from_rows(&[vec![1.0, 2.0], vec![0.0, 0.0]]).unwrap();
    assert!(discrepancy(&a, &b).is_err());
    assert!(cost_matrix::<f64>(&[], &[1.0]).is_err());
}
