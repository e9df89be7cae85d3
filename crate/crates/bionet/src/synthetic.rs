//! Deterministic stand-ins for real recordings and weight files.

use bionet_core::compress::{Tensor, TensorStore};
use bionet_core::rng::SearchRng;
use bionet_core::wfdb::{Annotation, Channel, LabelledRecord, Record, WINDOW_LEN};

/// Annotation codes drawn for synthetic beats, with weights out of 100.
const BEATS: [(u8, u32); 4] = [(1, 80), (5, 10), (8, 6), (3, 4)];

fn beat_code(rng: &mut SearchRng) -> u8 {
    let mut roll = rng.below(100) as u32;
    for (code, weight) in BEATS {
        if roll < weight {
            return code;
        }
        roll -= weight;
    }
    1
}

/// A one-lead 360 Hz record of exactly `windows` analysis windows with a
/// beat every 200 to 250 samples, so every window holds at least one. Most beats are normal; the rest are PVC,
/// atrial premature and right bundle branch beats.
pub fn synthetic_record(name: &str, windows: usize, seed: u64) -> LabelledRecord {
    let mut rng = SearchRng::new(seed);
    let len = windows * WINDOW_LEN;
    let mut samples: Vec<i16> = (0..len).map(|_| rng.below(21) as i16 - 10).collect();
    let mut annotations = Vec::new();
    let mut t = 40 + rng.below(100);
    while t < len {
        let code = beat_code(&mut rng);
        let height = if code == 5 { 900 } else { 600 };
        for (k, s) in samples[t.saturating_sub(6)..(t + 6).min(len)]
            .iter_mut()
            .enumerate()
        {
            let d = k as i32 - 6;
            *s += (height - 90 * d.abs()).max(0) as i16;
        }
        annotations.push(Annotation::new(t as u64, code));
        t += 200 + rng.below(50);
    }
    LabelledRecord {
        record: Record {
            name: name.to_string(),
            sampling_rate: 360.0,
            channels: vec![Channel {
                name: "MLII".into(),
                gain: 200.0,
                baseline: 0,
            }],
            samples: vec![samples],
        },
        annotations,
    }
}

fn gaussian(rng: &mut SearchRng) -> f64 {
    let u1 = rng.unit().max(f64::MIN_POSITIVE);
    let u2 = rng.unit();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// One `n × 1` weight matrix named `w` with N(0, 0.05²) entries.
pub fn synthetic_store(n: usize, seed: u64) -> TensorStore {
    let mut rng = SearchRng::new(seed);
    let values = (0..n).map(|_| (0.05 * gaussian(&mut rng)) as f32).collect();
    let t = Tensor::new("w", vec![n, 1], values).expect("shape matches values");
    TensorStore::new(vec![t]).expect("single tensor")
}
