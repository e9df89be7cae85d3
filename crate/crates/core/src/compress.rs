//! Magnitude pruning, k-means quantization and compressed-storage
//! accounting.
//!
//! Pruning zeroes the `floor(x·n)` smallest-magnitude weights, either per
//! tensor (layer-wise) or across all prunable tensors at once (class-blind).
//! Ties are broken by tensor order, then element index, so masks are nested
//! as `x` grows.
//!
//! Quantization clusters each tensor's non-zero values with 1-D k-means
//! into at most `2^q` clusters, orders the clusters by centroid and maps
//! them onto an equally spaced codebook running from the tensor's minimum
//! (code `00…0`) to its maximum (code `11…1`).
//!
//! A [`CompressedStore`] keeps, per tensor, a 1-bit-per-element sparsity
//! bitmap, the codebook and packed `q`-bit codes for the non-zero elements.
//! [`storage_bytes`] is the exact size of its serialized container:
//!
//! ```text
//! "BNXC" u16 version u32 count
//! per tensor: u16 name_len, name, u8 q, u8 rank, u32 dims[rank],
//!             bitmap ceil(n/8), codebook 2^q × f32 (omitted when nnz = 0),
//!             codes ceil(nnz·q/8)
//! ```

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::rng::SearchRng;

pub const CONTAINER_MAGIC: [u8; 4] = *b"BNXC";
pub const STORE_MAGIC: [u8; 4] = *b"BNXW";
pub const FORMAT_VERSION: u16 = 1;
/// Magic + version + tensor count.
pub const FILE_HEADER_BYTES: u64 = 4 + 2 + 4;

const KMEANS_MAX_ITERS: usize = 100;
const KMEANS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompressError {
    #[error("tensor {name:?}: shape holds {expected} elements but {actual} values given")]
    ShapeMismatch {
        name: String,
        expected: usize,
        actual: usize,
    },
    #[error("duplicate tensor name {0:?}")]
    DuplicateName(String),
    #[error("prune fraction must lie in [0, 1], got {0}")]
    Fraction(f64),
    #[error("quantization bits must lie in [1, 8], got {0}")]
    Bits(u8),
    #[error("tensor {name:?} is corrupt: {reason}")]
    Corrupt { name: String, reason: &'static str },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    /// Row-major values.
    pub values: Vec<f32>,
}

impl Tensor {
    pub fn new(
        name: impl Into<String>,
        shape: Vec<usize>,
        values: Vec<f32>,
    ) -> Result<Self, CompressError> {
        let name = name.into();
        let expected = shape.iter().product::<usize>();
        if expected != values.len() {
            return Err(CompressError::ShapeMismatch {
                name,
                expected,
                actual: values.len(),
            });
        }
        Ok(Self {
            name,
            shape,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Named weight tensors in a fixed order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TensorStore {
    tensors: Vec<Tensor>,
}

impl TensorStore {
    pub fn new(tensors: Vec<Tensor>) -> Result<Self, CompressError> {
        for (i, t) in tensors.iter().enumerate() {
            if tensors[..i].iter().any(|o| o.name == t.name) {
                return Err(CompressError::DuplicateName(t.name.clone()));
            }
            if t.shape.iter().product::<usize>() != t.values.len() {
                return Err(CompressError::ShapeMismatch {
                    name: t.name.clone(),
                    expected: t.shape.iter().product(),
                    actual: t.values.len(),
                });
            }
        }
        Ok(Self { tensors })
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn into_tensors(self) -> Vec<Tensor> {
        self.tensors
    }

    pub fn element_count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    /// Dense 32-bit footprint, the baseline for compression ratios.
    pub fn dense_bytes(&self) -> u64 {
        4 * self.element_count() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PruneMode {
    /// Each tensor loses its own smallest `x` fraction.
    #[default]
    LayerWise,
    /// The smallest `x` fraction over all prunable tensors together.
    ClassBlind,
}

/// Which tensors pruning may touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PruneScope {
    /// Only weight matrices and kernels (rank ≥ 2); biases and batchnorm
    /// vectors are left alone.
    #[default]
    Weights,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruneSpec {
    pub fraction: f64,
    pub mode: PruneMode,
    pub scope: PruneScope,
}

impl PruneSpec {
    pub fn new(fraction: f64, mode: PruneMode) -> Result<Self, CompressError> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(CompressError::Fraction(fraction));
        }
        Ok(Self {
            fraction,
            mode,
            scope: PruneScope::default(),
        })
    }

    pub fn with_scope(mut self, scope: PruneScope) -> Self {
        self.scope = scope;
        self
    }

    fn applies_to(&self, t: &Tensor) -> bool {
        match self.scope {
            PruneScope::All => true,
            PruneScope::Weights => t.shape.len() >= 2,
        }
    }
}

/// Number of elements zeroed out of `n` at fraction `x`: `floor(x·n)`,
/// tolerant of representation error in decimal fractions.
pub fn prune_count(fraction: f64, n: usize) -> usize {
    let raw = fraction * n as f64;
    let k = libm::floor(raw + 1e-9 * libm::fmax(1.0, raw));
    (k as usize).min(n)
}

/// Per-tensor pruning mask; `true` marks a zeroed element.
pub type PruneMask = Vec<Vec<bool>>;

pub fn prune(
    store: &TensorStore,
    spec: &PruneSpec,
) -> Result<(TensorStore, PruneMask), CompressError> {
    if !(0.0..=1.0).contains(&spec.fraction) {
        return Err(CompressError::Fraction(spec.fraction));
    }
    let mut mask: PruneMask = store.tensors.iter().map(|t| vec![false; t.len()]).collect();
    let prunable: Vec<usize> = (0..store.tensors.len())
        .filter(|&i| spec.applies_to(&store.tensors[i]))
        .collect();

    let mut zero = |candidates: &mut Vec<(usize, usize)>| {
        candidates.sort_by(|&(ta, ea), &(tb, eb)| {
            let a = libm::fabsf(store.tensors[ta].values[ea]);
            let b = libm::fabsf(store.tensors[tb].values[eb]);
            a.total_cmp(&b).then(ta.cmp(&tb)).then(ea.cmp(&eb))
        });
        let k = prune_count(spec.fraction, candidates.len());
        for &(t, e) in &candidates[..k] {
            mask[t][e] = true;
        }
    };

    match spec.mode {
        PruneMode::LayerWise => {
            for &t in &prunable {
                let mut c: Vec<(usize, usize)> =
                    (0..store.tensors[t].len()).map(|e| (t, e)).collect();
                zero(&mut c);
            }
        }
        PruneMode::ClassBlind => {
            let mut c: Vec<(usize, usize)> = prunable
                .iter()
                .flat_map(|&t| (0..store.tensors[t].len()).map(move |e| (t, e)))
                .collect();
            zero(&mut c);
        }
    }

    let tensors = store
        .tensors
        .iter()
        .zip(&mask)
        .map(|(t, m)| Tensor {
            name: t.name.clone(),
            shape: t.shape.clone(),
            values: t
                .values
                .iter()
                .zip(m)
                .map(|(&v, &z)| if z { 0.0 } else { v })
                .collect(),
        })
        .collect();
    Ok((TensorStore { tensors }, mask))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CodebookMode {
    /// Equally spaced values from the tensor minimum to its maximum.
    #[default]
    EquallySpaced,
    /// Each cluster reconstructs to its own centroid (comparison variant).
    Centroid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantSpec {
    pub bits: u8,
    pub codebook: CodebookMode,
    /// Seed of the k-means++ initialization stream.
    pub seed: u64,
}

impl QuantSpec {
    pub fn new(bits: u8) -> Result<Self, CompressError> {
        if !(1..=8).contains(&bits) {
            return Err(CompressError::Bits(bits));
        }
        Ok(Self {
            bits,
            codebook: CodebookMode::default(),
            seed: 0,
        })
    }

    pub fn levels(&self) -> usize {
        1 << self.bits
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub bits: u8,
    /// One bit per element, little-endian within bytes; set = non-zero.
    pub bitmap: Vec<u8>,
    /// `2^bits` entries, or empty when every element is zero.
    pub codebook: Vec<f32>,
    /// Packed codes of the non-zero elements, little-endian bit order.
    pub codes: Vec<u8>,
}

impl CompressedTensor {
    pub fn element_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn nonzero_count(&self) -> usize {
        self.bitmap.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Serialized size of this tensor's record.
    pub fn encoded_bytes(&self) -> u64 {
        let n = self.element_count() as u64;
        let nnz = self.nonzero_count() as u64;
        let codebook = if nnz == 0 { 0 } else { 4u64 << self.bits };
        2 + self.name.len() as u64
            + 1
            + 1
            + 4 * self.shape.len() as u64
            + n.div_ceil(8)
            + codebook
            + (nnz * u64::from(self.bits)).div_ceil(8)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompressedStore {
    pub tensors: Vec<CompressedTensor>,
}

/// Exact serialized size of `cs`, header included.
pub fn storage_bytes(cs: &CompressedStore) -> u64 {
    FILE_HEADER_BYTES
        + cs.tensors
            .iter()
            .map(CompressedTensor::encoded_bytes)
            .sum::<u64>()
}

/// Dense bytes of `store` divided by the compressed size.
pub fn compression_ratio(store: &TensorStore, cs: &CompressedStore) -> f64 {
    store.dense_bytes() as f64 / storage_bytes(cs) as f64
}

/// 1-D k-means with k-means++ seeding. Returns centroids sorted ascending
/// and the cluster index (into the sorted centroids) of every value.
pub fn kmeans_1d(values: &[f64], k: usize, rng: &mut SearchRng) -> (Vec<f64>, Vec<usize>) {
    if values.is_empty() || k == 0 {
        return (Vec::new(), Vec::new());
    }
    let k = k.min(values.len());

    let mut centroids = Vec::with_capacity(k);
    centroids.push(values[rng.below(values.len())]);
    let mut d2: Vec<f64> = values.iter().map(|v| sq(v - centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            values[rng.below(values.len())]
        } else {
            let target = rng.unit() * total;
            let mut acc = 0.0;
            let mut pick = values.len() - 1;
            for (i, d) in d2.iter().enumerate() {
                acc += d;
                if acc > target {
                    pick = i;
                    break;
                }
            }
            values[pick]
        };
        centroids.push(next);
        for (d, v) in d2.iter_mut().zip(values) {
            *d = d.min(sq(v - next));
        }
    }
    centroids.sort_by(f64::total_cmp);

    let mut assign = vec![0usize; values.len()];
    for _ in 0..KMEANS_MAX_ITERS {
        for (a, v) in assign.iter_mut().zip(values) {
            *a = nearest(&centroids, *v);
        }
        let mut sum = vec![0.0; k];
        let mut count = vec![0usize; k];
        for (&a, v) in assign.iter().zip(values) {
            sum[a] += v;
            count[a] += 1;
        }
        let mut moved = 0.0f64;
        for c in 0..k {
            if count[c] > 0 {
                let next = sum[c] / count[c] as f64;
                moved = moved.max(libm::fabs(next - centroids[c]));
                centroids[c] = next;
            }
        }
        if moved < KMEANS_TOLERANCE {
            break;
        }
        // 1-D centroids stay ordered under Lloyd updates unless empty
        // clusters linger; re-sort to keep the invariant regardless
        centroids.sort_by(f64::total_cmp);
    }
    for (a, v) in assign.iter_mut().zip(values) {
        *a = nearest(&centroids, *v);
    }
    (centroids, assign)
}

fn sq(x: f64) -> f64 {
    x * x
}

fn nearest(centroids: &[f64], v: f64) -> usize {
    let mut best = 0;
    for (i, c) in centroids.iter().enumerate().skip(1) {
        if libm::fabs(v - c) < libm::fabs(v - centroids[best]) {
            best = i;
        }
    }
    best
}

/// Codebook slot of cluster `i` out of `k` used clusters on `levels` slots:
/// the identity when `k = levels`, otherwise spread evenly so the lowest
/// cluster keeps slot 0 and the highest the top slot.
fn slot_for_cluster(i: usize, k: usize, levels: usize) -> usize {
    if k <= 1 {
        0
    } else if k == levels {
        i
    } else {
        (i * (levels - 1) + (k - 1) / 2) / (k - 1)
    }
}

fn pack_codes(codes: &[usize], bits: u8) -> Vec<u8> {
    let total = codes.len() * usize::from(bits);
    let mut out = vec![0u8; total.div_ceil(8)];
    let mut pos = 0;
    for &code in codes {
        for b in 0..usize::from(bits) {
            if (code >> b) & 1 == 1 {
                out[pos / 8] |= 1 << (pos % 8);
            }
            pos += 1;
        }
    }
    out
}

fn unpack_codes(packed: &[u8], bits: u8, count: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(count);
    let mut pos = 0;
    for _ in 0..count {
        let mut code = 0usize;
        for b in 0..usize::from(bits) {
            if (packed[pos / 8] >> (pos % 8)) & 1 == 1 {
                code |= 1 << b;
            }
            pos += 1;
        }
        out.push(code);
    }
    out
}

fn quantize_tensor(t: &Tensor, spec: &QuantSpec, rng: &mut SearchRng) -> CompressedTensor {
    let n = t.len();
    let mut bitmap = vec![0u8; n.div_ceil(8)];
    let mut nonzero = Vec::new();
    for (i, &v) in t.values.iter().enumerate() {
        if v != 0.0 {
            bitmap[i / 8] |= 1 << (i % 8);
            nonzero.push(f64::from(v));
        }
    }
    if nonzero.is_empty() {
        return CompressedTensor {
            name: t.name.clone(),
            shape: t.shape.clone(),
            bits: spec.bits,
            bitmap,
            codebook: Vec::new(),
            codes: Vec::new(),
        };
    }

    let levels = spec.levels();
    let mut distinct = nonzero.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let k = levels.min(distinct.len());
    let (lo, hi) = (distinct[0], distinct[distinct.len() - 1]);

    let (centroids, assign) = kmeans_1d(&nonzero, k, rng);
    let used = centroids.len();
    let slots: Vec<usize> = (0..used)
        .map(|i| slot_for_cluster(i, used, levels))
        .collect();

    let codebook: Vec<f32> = match spec.codebook {
        CodebookMode::EquallySpaced => (0..levels)
            .map(|i| {
                if levels == 1 || hi == lo {
                    lo as f32
                } else {
                    (lo + i as f64 * (hi - lo) / (levels - 1) as f64) as f32
                }
            })
            .collect(),
        CodebookMode::Centroid => {
            let mut cb = vec![0.0f32; levels];
            for (c, &s) in centroids.iter().zip(&slots) {
                cb[s] = *c as f32;
            }
            cb
        }
    };
    let codes: Vec<usize> = assign.iter().map(|&c| slots[c]).collect();

    CompressedTensor {
        name: t.name.clone(),
        shape: t.shape.clone(),
        bits: spec.bits,
        bitmap,
        codebook,
        codes: pack_codes(&codes, spec.bits),
    }
}

/// Quantizes every tensor with a uniform bit width. Each tensor gets its
/// own k-means stream derived from `spec.seed` and its position, so results
/// do not depend on processing order.
pub fn quantize(store: &TensorStore, spec: &QuantSpec) -> Result<CompressedStore, CompressError> {
    if !(1..=8).contains(&spec.bits) {
        return Err(CompressError::Bits(spec.bits));
    }
    Ok(CompressedStore {
        tensors: store
            .tensors
            .iter()
            .enumerate()
            .map(|(i, t)| quantize_tensor(t, spec, &mut SearchRng::fork(spec.seed, i as u64)))
            .collect(),
    })
}

/// Rebuilds dense tensors: zeros where the bitmap is clear, codebook values
/// elsewhere.
pub fn decompress(cs: &CompressedStore) -> Result<TensorStore, CompressError> {
    let mut tensors = Vec::with_capacity(cs.tensors.len());
    for ct in &cs.tensors {
        let corrupt = |reason| CompressError::Corrupt {
            name: ct.name.clone(),
            reason,
        };
        if !(1..=8).contains(&ct.bits) {
            return Err(corrupt("bit width outside [1, 8]"));
        }
        let n = ct.element_count();
        if ct.bitmap.len() != n.div_ceil(8) {
            return Err(corrupt("bitmap length does not match shape"));
        }
        if n % 8 != 0 && ct.bitmap.last().is_some_and(|b| b >> (n % 8) != 0) {
            return Err(corrupt("bitmap has bits past the last element"));
        }
        let nnz = ct.nonzero_count();
        let expected_codebook = if nnz == 0 { 0 } else { 1usize << ct.bits };
        if ct.codebook.len() != expected_codebook {
            return Err(corrupt("codebook length does not match bit width"));
        }
        if ct.codes.len() != (nnz * usize::from(ct.bits)).div_ceil(8) {
            return Err(corrupt("code stream length does not match non-zero count"));
        }
        let codes = unpack_codes(&ct.codes, ct.bits, nnz);
        let mut values = vec![0.0f32; n];
        let mut next = codes.into_iter();
        for (i, v) in values.iter_mut().enumerate() {
            if (ct.bitmap[i / 8] >> (i % 8)) & 1 == 1 {
                *v = ct.codebook[next.next().expect("counted")];
            }
        }
        tensors.push(Tensor {
            name: ct.name.clone(),
            shape: ct.shape.clone(),
            values,
        });
    }
    TensorStore::new(tensors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(values: &[f32]) -> TensorStore {
        TensorStore::new(vec![
            Tensor::new("w", vec![values.len()], values.to_vec()).unwrap()
        ])
        .unwrap()
    }

    #[test]
    fn class_blind_half() {
        let store = flat(&[0.5, -0.1, 0.3, -0.8, 0.05, 0.9]);
        let spec = PruneSpec::new(0.5, PruneMode::ClassBlind)
            .unwrap()
            .with_scope(PruneScope::All);
        let (out, mask) = prune(&store, &spec).unwrap();
        assert_eq!(out.tensors()[0].values, vec![0.5, 0.0, 0.0, -0.8, 0.0, 0.9]);
        assert_eq!(mask[0].iter().filter(|&&m| m).count(), 3);
    }

    #[test]
    fn prune_extremes() {
        let store = flat(&[0.5, -0.1, 0.3]);
        let all = PruneScope::All;
        let (out, _) = prune(
            &store,
            &PruneSpec::new(0.0, PruneMode::LayerWise)
                .unwrap()
                .with_scope(all),
        )
        .unwrap();
        assert_eq!(out, store);
        let (out, _) = prune(
            &store,
            &PruneSpec::new(1.0, PruneMode::LayerWise)
                .unwrap()
                .with_scope(all),
        )
        .unwrap();
        assert!(out.tensors()[0].values.iter().all(|&v| v == 0.0));
        assert!(PruneSpec::new(1.2, PruneMode::LayerWise).is_err());
    }

    #[test]
    fn vectors_exempt_by_default() {
        let store = TensorStore::new(vec![
            Tensor::new("w", vec![2, 2], vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
            Tensor::new("b", vec![2], vec![0.01, 0.02]).unwrap(),
        ])
        .unwrap();
        let (out, _) = prune(&store, &PruneSpec::new(0.5, PruneMode::ClassBlind).unwrap()).unwrap();
        assert_eq!(out.tensors()[0].values, vec![0.0, 0.0, 0.3, 0.4]);
        assert_eq!(out.tensors()[1].values, vec![0.01, 0.02]);
    }

    #[test]
    fn prune_count_is_floor() {
        assert_eq!(prune_count(0.5, 7), 3);
        assert_eq!(prune_count(0.9, 100_000), 90_000);
        assert_eq!(prune_count(0.29, 100), 29);
        assert_eq!(prune_count(0.7, 10), 7);
        assert_eq!(prune_count(1.0, 3), 3);
    }

    #[test]
    fn one_bit_example() {
        let store = flat(&[-1.0, -0.9, 0.9, 1.0]);
        let cs = quantize(&store, &QuantSpec::new(1).unwrap()).unwrap();
        let back = decompress(&cs).unwrap();
        assert_eq!(back.tensors()[0].values, vec![-1.0, -1.0, 1.0, 1.0]);
        assert_eq!(back.tensors()[0].shape, vec![4]);
    }

    #[test]
    fn equally_spaced_values_are_lossless() {
        let store = flat(&[0.5, -1.5, 1.5, 0.0, -0.5, 0.5]);
        // four distinct non-zero values on a uniform grid, q = 2
        let cs = quantize(&store, &QuantSpec::new(2).unwrap()).unwrap();
        assert_eq!(decompress(&cs).unwrap(), store);
        // two distinct values survive any larger q
        let store = flat(&[0.3, -0.7, 0.3, 0.3]);
        let cs = quantize(&store, &QuantSpec::new(5).unwrap()).unwrap();
        assert_eq!(decompress(&cs).unwrap(), store);
    }

    #[test]
    fn all_zero_tensor_has_no_codebook() {
        let store = flat(&[0.0; 9]);
        let cs = quantize(&store, &QuantSpec::new(3).unwrap()).unwrap();
        assert!(cs.tensors[0].codebook.is_empty());
        assert!(cs.tensors[0].codes.is_empty());
        assert_eq!(decompress(&cs).unwrap(), store);
    }

    #[test]
    fn storage_formula_example() {
        // 1e5 elements, 90% pruned, q = 4
        let n = 100_000usize;
        let values: Vec<f32> = (0..n)
            .map(|i| {
                if i % 10 == 0 {
                    1.0 + (i % 7) as f32
                } else {
                    0.0
                }
            })
            .collect();
        let store =
            TensorStore::new(vec![Tensor::new("w", vec![1000, 100], values).unwrap()]).unwrap();
        let cs = quantize(&store, &QuantSpec::new(4).unwrap()).unwrap();
        let header = FILE_HEADER_BYTES + 2 + 1 + 1 + 1 + 8;
        assert_eq!(storage_bytes(&cs), 12_500 + 64 + 5_000 + header);
        let ratio = compression_ratio(&store, &cs);
        assert!((ratio - 400_000.0 / (17_564 + header) as f64).abs() < 1e-12);
    }

    #[test]
    fn corrupt_store_detected() {
        let store = flat(&[0.1, 0.2, 0.3]);
        let mut cs = quantize(&store, &QuantSpec::new(2).unwrap()).unwrap();
        cs.tensors[0].codes.push(0);
        assert!(matches!(
            decompress(&cs),
            Err(CompressError::Corrupt { .. })
        ));
        let mut cs = quantize(&store, &QuantSpec::new(2).unwrap()).unwrap();
        cs.tensors[0].bitmap[0] |= 0b1000_0000;
        assert!(decompress(&cs).is_err());
    }

    #[test]
    fn kmeans_separates_groups() {
        let values = [1.0, 1.1, 0.9, 5.0, 5.1, 4.9];
        let (c, a) = kmeans_1d(&values, 2, &mut SearchRng::new(3));
        assert!((c[0] - 1.0).abs() < 1e-9 && (c[1] - 5.0).abs() < 1e-9);
        assert_eq!(a, vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn slot_spreading() {
        assert_eq!(slot_for_cluster(0, 2, 8), 0);
        assert_eq!(slot_for_cluster(1, 2, 8), 7);
        assert_eq!(
            (0..4)
                .map(|i| slot_for_cluster(i, 4, 4))
                .collect::<Vec<_>>(),
            vec![0, 1, 2, 3]
        );
        assert_eq!(slot_for_cluster(0, 1, 4), 0);
    }
}
