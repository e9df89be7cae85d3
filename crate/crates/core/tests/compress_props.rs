use std::collections::BTreeSet;

use bionet_core::compress::{
    compression_ratio, decompress, prune, prune_count, quantize, storage_bytes, CodebookMode,
    PruneMode, PruneScope, PruneSpec, QuantSpec, Tensor, TensorStore,
};
use bionet_core::rng::SearchRng;
use proptest::prelude::*;

fn random_store(rng: &mut SearchRng, shapes: &[(&str, Vec<usize>)]) -> TensorStore {
    TensorStore::new(
        shapes
            .iter()
            .map(|(name, shape)| {
                let n = shape.iter().product();
                let values = (0..n).map(|_| (rng.unit() * 2.0 - 1.0) as f32).collect();
                Tensor::new(*name, shape.clone(), values).unwrap()
            })
            .collect(),
    )
    .unwrap()
}

fn distinct(values: &[f32]) -> usize {
    values
        .iter()
        .map(|v| v.to_bits())
        .collect::<BTreeSet<_>>()
        .len()
}

#[test]
fn ninety_percent_q4_on_1e5_weights() {
    for seed in 0..5 {
        let mut rng = SearchRng::new(seed);
        let store = random_store(&mut rng, &[("w", vec![100, 1000])]);
        let spec = PruneSpec::new(0.9, PruneMode::ClassBlind).unwrap();
        let (pruned, mask) = prune(&store, &spec).unwrap();
        assert_eq!(mask[0].iter().filter(|&&m| m).count(), 90_000);
        let cs = quantize(&pruned, &QuantSpec::new(4).unwrap()).unwrap();
        assert_eq!(
            storage_bytes(&cs),
            10 + 2 + 1 + 1 + 1 + 8 + 12_500 + 64 + 5_000
        );
        let ratio = compression_ratio(&store, &cs);
        assert!(ratio >= 20.0 && (ratio - 22.7).abs() < 0.1, "{ratio}");
        let back = decompress(&cs).unwrap();
        assert!(distinct(&back.tensors()[0].values) <= 16 + 1);
    }
}

fn store_strategy() -> impl Strategy<Value = TensorStore> {
    prop::collection::vec(
        (1usize..6, 1usize..12, prop::bool::ANY).prop_flat_map(|(r, c, matrix)| {
            let shape = if matrix { vec![r, c] } else { vec![r * c] };
            prop::collection::vec(-4.0f32..4.0, r * c).prop_map(move |v| (shape.clone(), v))
        }),
        1..5,
    )
    .prop_map(|ts| {
        TensorStore::new(
            ts.into_iter()
                .enumerate()
                .map(|(i, (shape, values))| Tensor::new(format!("t{i}"), shape, values).unwrap())
                .collect(),
        )
        .unwrap()
    })
}

fn zeros(store: &TensorStore) -> usize {
    store
        .tensors()
        .iter()
        .flat_map(|t| &t.values)
        .filter(|&&v| v == 0.0)
        .count()
}

proptest! {
    #[test]
    fn prune_counts_exact(store in store_strategy(), fraction in 0.0f64..=1.0, blind in any::<bool>()) {
        let mode = if blind { PruneMode::ClassBlind } else { PruneMode::LayerWise };
        let spec = PruneSpec::new(fraction, mode).unwrap().with_scope(PruneScope::All);
        let (_, mask) = prune(&store, &spec).unwrap();
        let pruned: Vec<usize> = mask.iter().map(|m| m.iter().filter(|&&z| z).count()).collect();
        match mode {
            PruneMode::ClassBlind => {
                prop_assert_eq!(pruned.iter().sum::<usize>(), prune_count(fraction, store.element_count()));
            }
            PruneMode::LayerWise => {
                for (t, &k) in store.tensors().iter().zip(&pruned) {
                    prop_assert_eq!(k, prune_count(fraction, t.len()));
                }
            }
        }
    }

    #[test]
    fn pruned_magnitudes_below_survivors(store in store_strategy(), fraction in 0.0f64..=1.0) {
        let spec = PruneSpec::new(fraction, PruneMode::ClassBlind).unwrap().with_scope(PruneScope::All);
        let (_, mask) = prune(&store, &spec).unwrap();
        let mut cut = f32::MIN;
        let mut kept = f32::MAX;
        for (t, m) in store.tensors().iter().zip(&mask) {
            for (&v, &z) in t.values.iter().zip(m) {
                if z { cut = cut.max(v.abs()) } else { kept = kept.min(v.abs()) }
            }
        }
        prop_assert!(cut <= kept);
    }

    #[test]
    fn prune_monotone_in_fraction(store in store_strategy(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = (a.min(b), a.max(b));
        let run = |x| prune(&store, &PruneSpec::new(x, PruneMode::ClassBlind).unwrap().with_scope(PruneScope::All)).unwrap();
        let (small, ms) = run(lo);
        let (big, mb) = run(hi);
        prop_assert!(zeros(&small) <= zeros(&big));
        for (s, b) in ms.iter().zip(&mb) {
            prop_assert!(s.iter().zip(b).all(|(&x, &y)| !x || y));
        }
    }

    #[test]
    fn quantized_values_bounded(store in store_strategy(), bits in 1u8..=6, centroid in any::<bool>(), seed in any::<u64>()) {
        let mut spec = QuantSpec::new(bits).unwrap();
        spec.seed = seed;
        if centroid { spec.codebook = CodebookMode::Centroid; }
        let cs = quantize(&store, &spec).unwrap();
        let back = decompress(&cs).unwrap();
        prop_assert_eq!(back.element_count(), store.element_count());
        for (orig, t) in store.tensors().iter().zip(back.tensors()) {
            let nz: Vec<f32> = t.values.iter().copied().filter(|&v| v != 0.0).collect();
            prop_assert!(distinct(&nz) <= 1 << bits);
            // zeros stay zero and non-zeros stay within the original range
            let lo = orig.values.iter().copied().fold(f32::MAX, f32::min);
            let hi = orig.values.iter().copied().fold(f32::MIN, f32::max);
            for (&o, &q) in orig.values.iter().zip(&t.values) {
                if o == 0.0 { prop_assert_eq!(q, 0.0); }
                if q != 0.0 { prop_assert!(q >= lo - 1e-5 && q <= hi + 1e-5); }
            }
        }
        prop_assert!(storage_bytes(&cs) > 0);
    }
}
