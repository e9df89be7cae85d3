use bionet_core::metrics::{accuracy, precision_recall_f1, roc_curve, ConfusionMatrix};
use bionet_core::rng::SearchRng;
use proptest::prelude::*;

mod oracles;
use oracles::pairwise_auc;

#[test]
fn hand_example() {
    let cm = ConfusionMatrix::from_rows(&[vec![50, 10], vec![5, 35]]).unwrap();
    let m = precision_recall_f1(&cm, 0).unwrap();
    assert!((accuracy(&cm).unwrap() - 0.85).abs() < 1e-4);
    assert!((m.precision - 0.9091).abs() < 1e-4);
    assert!((m.recall - 0.8333).abs() < 1e-4);
    assert!((m.f1 - 0.8696).abs() < 1e-4);
}

#[test]
fn auc_matches_pairwise_estimator() {
    let mut rng = SearchRng::new(99);
    let mut done = 0;
    while done < 50 {
        let n = 2 + rng.below(200);
        // half the instances use a coarse grid so ties occur
        let coarse = done % 2 == 0;
        let scores: Vec<f64> = (0..n)
            .map(|_| {
                if coarse {
                    rng.below(5) as f64
                } else {
                    rng.unit()
                }
            })
            .collect();
        let positive: Vec<bool> = (0..n).map(|_| rng.chance(0.4)).collect();
        if positive.iter().all(|&p| p) || !positive.iter().any(|&p| p) {
            continue;
        }
        let curve = roc_curve(&scores, &positive).unwrap();
        assert!((curve.auc - pairwise_auc(&scores, &positive)).abs() < 1e-9);
        done += 1;
    }
}

proptest! {
    #[test]
    fn metrics_bounded_and_permutation_invariant(
        cells in prop::collection::vec(0u64..50, 9),
    ) {
        prop_assume!(cells.iter().sum::<u64>() > 0);
        let rows: Vec<Vec<u64>> = cells.chunks(3).map(<[u64]>::to_vec).collect();
        let cm = ConfusionMatrix::from_rows(&rows).unwrap();
        let acc = accuracy(&cm).unwrap();
        prop_assert!((0.0..=1.0).contains(&acc));
        let order = [2, 0, 1];
        let p = cm.permuted(&order);
        prop_assert!((accuracy(&p).unwrap() - acc).abs() < 1e-12);
        for c in 0..3 {
            let m = precision_recall_f1(&cm, c).unwrap();
            for v in [m.precision, m.recall, m.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let lo = m.precision.min(m.recall);
            let hi = m.precision.max(m.recall);
            prop_assert!(m.f1 >= lo * (1.0 - 1e-12) - 1e-12 || m.f1 == 0.0);
            prop_assert!(m.f1 <= hi + 1e-12);
            let new_c = order.iter().position(|&o| o == c).unwrap();
            let mp = precision_recall_f1(&p, new_c).unwrap();
            prop_assert!((mp.f1 - m.f1).abs() < 1e-12);
        }
    }

    #[test]
    fn roc_monotone_and_auc_bounded(
        data in prop::collection::vec((0u16..100, any::<bool>()), 2..80),
    ) {
        let scores: Vec<f64> = data.iter().map(|&(s, _)| f64::from(s)).collect();
        let positive: Vec<bool> = data.iter().map(|&(_, p)| p).collect();
        prop_assume!(positive.iter().any(|&p| p) && positive.iter().any(|&p| !p));
        let c = roc_curve(&scores, &positive).unwrap();
        prop_assert!(c.points.windows(2).all(|w| w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr));
        let last = c.points.last().unwrap();
        prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        prop_assert!((0.0..=1.0).contains(&c.auc));
    }
}
