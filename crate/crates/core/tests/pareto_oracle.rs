use bionet_core::rng::SearchRng;
use bionet_core::search::pareto::{
    crowding_distance, nondominated_sort, nsga2_select, spea2_select,
};
use proptest::prelude::*;

mod oracles;
use oracles::{brute_dominates, brute_fronts, instance};

#[test]
fn fronts_match_brute_force_on_100_instances() {
    let mut rng = SearchRng::new(2024);
    for _ in 0..100 {
        let pts = instance(&mut rng, 50);
        assert_eq!(nondominated_sort(&pts), brute_fronts(&pts));
    }
}

#[test]
fn continuous_points_match_brute_force() {
    let mut rng = SearchRng::new(7);
    for _ in 0..50 {
        let pts: Vec<[f64; 2]> = (0..50).map(|_| [rng.unit(), -rng.unit()]).collect();
        assert_eq!(nondominated_sort(&pts), brute_fronts(&pts));
    }
}

proptest! {
    #[test]
    fn fronts_partition_and_respect_dominance(raw in prop::collection::vec((0u8..8, 0u8..8), 0..60)) {
        let pts: Vec<[f64; 2]> = raw.iter().map(|&(a, b)| [f64::from(a), f64::from(b)]).collect();
        let fronts = nondominated_sort(&pts);
        let mut seen: Vec<usize> = fronts.iter().flatten().copied().collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..pts.len()).collect::<Vec<_>>());
        let rank = |i: usize| fronts.iter().position(|f| f.contains(&i)).unwrap();
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                if brute_dominates(&pts[i], &pts[j]) {
                    prop_assert!(rank(i) < rank(j));
                }
            }
        }
    }

    #[test]
    fn crowding_boundaries_infinite(raw in prop::collection::vec((0u8..50, 0u8..50), 3..40)) {
        let pts: Vec<[f64; 2]> = raw.iter().map(|&(a, b)| [f64::from(a), -f64::from(b)]).collect();
        let front = &nondominated_sort(&pts)[0];
        let d = crowding_distance(&pts, front);
        prop_assert_eq!(d.len(), front.len());
        prop_assert!(d.iter().all(|&v| v >= 0.0));
        if front.len() <= 2 {
            prop_assert!(d.iter().all(|v| v.is_infinite()));
        } else {
            prop_assert!(d.iter().filter(|v| v.is_infinite()).count() >= 2);
        }
    }

    #[test]
    fn environmental_selection_sizes(raw in prop::collection::vec((0u8..20, 0u8..20), 1..60), frac in 0.0f64..=1.0) {
        let pts: Vec<[f64; 2]> = raw.iter().map(|&(a, b)| [f64::from(a), f64::from(b)]).collect();
        let size = ((pts.len() as f64) * frac) as usize;
        for sel in [nsga2_select(&pts, size), spea2_select(&pts, size)] {
            prop_assert_eq!(sel.len(), size);
            prop_assert!(sel.windows(2).all(|w| w[0] < w[1]));
        }
        // Whenever the first front fits, NSGA-II keeps all of it.
        let first = &nondominated_sort(&pts)[0];
        if first.len() <= size {
            let kept = nsga2_select(&pts, size);
            prop_assert!(first.iter().all(|i| kept.contains(i)));
        }
    }
}
