//! Brute-force reference implementations shared by the property tests and
//! the acceptance run.

#![allow(dead_code)]

use bionet_core::rng::SearchRng;
use bionet_core::wfdb::Annotation;

/// Independent parameter counter: walks tensor shapes op by op and sums
/// the element counts of every stored tensor.
enum Op {
    Conv { k: u64, out: u64 },
    Norm,
    Act,
    Drop,
    Residual { from: usize },
    Lstm { h: u64 },
    Dense { out: u64 },
}

fn program(b: u64, x: u64, z: u64, classes: u64) -> Vec<Op> {
    let mut ops = vec![Op::Conv { k: 16, out: 32 }, Op::Norm, Op::Act];
    for i in 0..b {
        let f = 32 * 2u64.pow((i / x) as u32);
        let from = ops.len();
        ops.extend([
            Op::Conv { k: 16, out: f },
            Op::Norm,
            Op::Act,
            Op::Drop,
            Op::Conv { k: 16, out: f },
            Op::Norm,
            Op::Residual { from },
            Op::Act,
        ]);
    }
    ops.push(Op::Lstm { h: 1 << z });
    ops.push(Op::Dense { out: classes });
    ops
}

pub fn tensor(dims: &[u64]) -> u64 {
    dims.iter().product()
}

pub fn oracle_params(b: u64, x: u64, z: u64, classes: u64) -> u64 {
    let ops = program(b, x, z, classes);
    // channels entering op i
    let mut ch = vec![1u64];
    let mut total = 0;
    for (i, op) in ops.iter().enumerate() {
        let c = ch[i];
        let (stored, out) = match *op {
            Op::Conv { k, out } => (tensor(&[out, c, k]) + tensor(&[out]), out),
            Op::Norm => (4 * tensor(&[c]), c),
            Op::Act | Op::Drop => (0, c),
            Op::Residual { from } => {
                let cin = ch[from];
                if cin == c {
                    (0, c)
                } else {
                    (tensor(&[c, cin, 1]) + tensor(&[c]), c)
                }
            }
            Op::Lstm { h } => {
                // input, forget, cell, output gates
                let gate = tensor(&[h, c]) + tensor(&[h, h]) + tensor(&[h]);
                (4 * gate, h)
            }
            Op::Dense { out } => (tensor(&[out, c]) + tensor(&[out]), out),
        };
        total += stored;
        ch.push(out);
    }
    total
}

pub fn brute_dominates(a: &[f64; 2], b: &[f64; 2]) -> bool {
    let mut strictly = false;
    for k in 0..2 {
        if a[k] < b[k] {
            return false;
        }
        if a[k] > b[k] {
            strictly = true;
        }
    }
    strictly
}

/// Peels fronts by repeatedly taking the points nobody remaining dominates.
pub fn brute_fronts(points: &[[f64; 2]]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = (0..points.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| {
                !left
                    .iter()
                    .any(|&j| brute_dominates(&points[j], &points[i]))
            })
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

pub fn instance(rng: &mut SearchRng, n: usize) -> Vec<[f64; 2]> {
    // coarse grid so ties and duplicates occur
    (0..n)
        .map(|_| [rng.below(12) as f64 / 11.0, -(rng.below(12) as f64)])
        .collect()
}

/// P(score_pos > score_neg) + ½·P(tie) over all positive/negative pairs.
pub fn pairwise_auc(scores: &[f64], positive: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &pi) in positive.iter().enumerate() {
        for (j, &pj) in positive.iter().enumerate() {
            if pi && !pj {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

pub fn synthetic_stream(rng: &mut SearchRng) -> Vec<Annotation> {
    let n = 1 + rng.below(40);
    let mut t = 0u64;
    (0..n)
        .map(|_| {
            t += match rng.below(4) {
                0 => 0,
                1 => 1 + rng.below(1023) as u64,
                2 => 1024 + rng.below(200_000) as u64,
                _ => rng.below(400) as u64,
            };
            let mut a = Annotation::new(t, 1 + rng.below(49) as u8);
            if rng.chance(0.2) {
                a.subtype = rng.below(8) as u16;
            }
            if rng.chance(0.1) {
                a.chan = rng.below(3) as u16;
            }
            if rng.chance(0.1) {
                a.num = rng.below(5) as u16;
            }
            if rng.chance(0.25) {
                let len = rng.below(12);
                a.aux = Some((0..len).map(|_| b'A' + rng.below(26) as u8).collect());
            }
            a
        })
        .collect()
}
