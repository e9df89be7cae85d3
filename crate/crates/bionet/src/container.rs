//! Binary weight containers.
//!
//! Both formats open with a 10-byte header: 4-byte magic, `u16` version,
//! `u32` tensor count, all little-endian.
//!
//! Dense stores (`BNXW`), per tensor:
//! `u16 name_len | name | u8 rank | u32 dims[rank] | f32 values[n]`.
//!
//! Compressed stores (`BNXC`), per tensor:
//! `u16 name_len | name | u8 bits | u8 rank | u32 dims[rank] | bitmap |
//! codebook | codes`, where the bitmap holds `ceil(n/8)` bytes (bit i of
//! byte i/8 set for a non-zero element), the codebook holds `2^bits` `f32`
//! values and is absent when no element is non-zero, and the codes pack
//! `bits`-wide indices of the non-zero elements LSB first into
//! `ceil(nnz·bits/8)` bytes.
//!
//! The encoded size of a compressed store always equals
//! [`bionet_core::compress::storage_bytes`].

use std::io::{Cursor, Read, Write};

use bionet_core::compress::{
    CompressError, CompressedStore, CompressedTensor, Tensor, TensorStore, CONTAINER_MAGIC,
    FORMAT_VERSION, STORE_MAGIC,
};
use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

#[derive(Debug, thiserror::Error)]
pub enum ContainerError {
    #[error("bad magic {found:?}, expected {expected:?}")]
    Magic { found: [u8; 4], expected: [u8; 4] },
    #[error("unsupported container version {0}")]
    Version(u16),
    #[error("container truncated")]
    Truncated,
    #[error("{0} trailing bytes after last tensor")]
    Trailing(usize),
    #[error("tensor name is not UTF-8")]
    Name,
    #[error("tensor name longer than 65535 bytes")]
    NameTooLong,
    #[error(transparent)]
    Compress(#[from] CompressError),
}

impl From<std::io::Error> for ContainerError {
    fn from(_: std::io::Error) -> Self {
        // only reachable from reads past the end of an in-memory buffer
        Self::Truncated
    }
}

fn write_header(out: &mut Vec<u8>, magic: &[u8; 4], count: usize) {
    out.extend_from_slice(magic);
    out.write_u16::<LE>(FORMAT_VERSION).unwrap();
    out.write_u32::<LE>(count as u32).unwrap();
}

fn read_header(r: &mut Cursor<&[u8]>, expected: &[u8; 4]) -> Result<usize, ContainerError> {
    let mut found = [0u8; 4];
    r.read_exact(&mut found)?;
    if &found != expected {
        return Err(ContainerError::Magic {
            found,
            expected: *expected,
        });
    }
    let version = r.read_u16::<LE>()?;
    if version != FORMAT_VERSION {
        return Err(ContainerError::Version(version));
    }
    Ok(r.read_u32::<LE>()? as usize)
}

fn write_name(out: &mut Vec<u8>, name: &str) -> Result<(), ContainerError> {
    let len = u16::try_from(name.len()).map_err(|_| ContainerError::NameTooLong)?;
    out.write_u16::<LE>(len).unwrap();
    out.extend_from_slice(name.as_bytes());
    Ok(())
}

fn read_name(r: &mut Cursor<&[u8]>) -> Result<String, ContainerError> {
    let len = r.read_u16::<LE>()? as usize;
    let bytes = take(r, len)?;
    String::from_utf8(bytes).map_err(|_| ContainerError::Name)
}

fn write_shape(out: &mut Vec<u8>, shape: &[usize]) {
    out.write_u8(shape.len() as u8).unwrap();
    for &d in shape {
        out.write_u32::<LE>(d as u32).unwrap();
    }
}

fn read_shape(r: &mut Cursor<&[u8]>) -> Result<Vec<usize>, ContainerError> {
    let rank = r.read_u8()?;
    (0..rank)
        .map(|_| Ok(r.read_u32::<LE>()? as usize))
        .collect()
}

/// Reads `n` bytes, checking the remaining length first so a corrupt
/// length field cannot trigger a huge allocation.
fn take(r: &mut Cursor<&[u8]>, n: usize) -> Result<Vec<u8>, ContainerError> {
    let left = r.get_ref().len() - r.position() as usize;
    if n > left {
        return Err(ContainerError::Truncated);
    }
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn finish(r: &Cursor<&[u8]>) -> Result<(), ContainerError> {
    let left = r.get_ref().len() - r.position() as usize;
    if left == 0 {
        Ok(())
    } else {
        Err(ContainerError::Trailing(left))
    }
}

pub fn encode_dense(store: &TensorStore) -> Result<Vec<u8>, ContainerError> {
    let mut out = Vec::with_capacity(store.dense_bytes() as usize + 64);
    write_header(&mut out, &STORE_MAGIC, store.tensors().len());
    for t in store.tensors() {
        write_name(&mut out, &t.name)?;
        write_shape(&mut out, &t.shape);
        for &v in &t.values {
            out.write_f32::<LE>(v).unwrap();
        }
    }
    Ok(out)
}

pub fn decode_dense(bytes: &[u8]) -> Result<TensorStore, ContainerError> {
    let mut r = Cursor::new(bytes);
    let count = read_header(&mut r, &STORE_MAGIC)?;
    let mut tensors = Vec::new();
    for _ in 0..count {
        let name = read_name(&mut r)?;
        let shape = read_shape(&mut r)?;
        let n: usize = shape.iter().product();
        let raw = take(&mut r, n.checked_mul(4).ok_or(ContainerError::Truncated)?)?;
        let values = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        tensors.push(Tensor::new(name, shape, values)?);
    }
    finish(&r)?;
    Ok(TensorStore::new(tensors)?)
}

pub fn encode_compressed(store: &CompressedStore) -> Result<Vec<u8>, ContainerError> {
    let mut out = Vec::new();
    write_header(&mut out, &CONTAINER_MAGIC, store.tensors.len());
    for t in &store.tensors {
        write_name(&mut out, &t.name)?;
        out.write_u8(t.bits).unwrap();
        write_shape(&mut out, &t.shape);
        out.write_all(&t.bitmap).unwrap();
        for &c in &t.codebook {
            out.write_f32::<LE>(c).unwrap();
        }
        out.write_all(&t.codes).unwrap();
    }
    Ok(out)
}

/// Parses a `BNXC` container and validates every tensor by decompressing
/// it.
pub fn decode_compressed(bytes: &[u8]) -> Result<CompressedStore, ContainerError> {
    let mut r = Cursor::new(bytes);
    let count = read_header(&mut r, &CONTAINER_MAGIC)?;
    let mut tensors = Vec::new();
    for _ in 0..count {
        let name = read_name(&mut r)?;
        let bits = r.read_u8()?;
        if !(1..=8).contains(&bits) {
            return Err(CompressError::Bits(bits).into());
        }
        let shape = read_shape(&mut r)?;
        let n: usize = shape.iter().product();
        let bitmap = take(&mut r, n.div_ceil(8))?;
        let nnz: usize = bitmap.iter().map(|b| b.count_ones() as usize).sum();
        let codebook = if nnz == 0 {
            Vec::new()
        } else {
            take(&mut r, 4 << bits)?
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect()
        };
        let codes = take(&mut r, (nnz * usize::from(bits)).div_ceil(8))?;
        tensors.push(CompressedTensor {
            name,
            shape,
            bits,
            bitmap,
            codebook,
            codes,
        });
    }
    finish(&r)?;
    let store = CompressedStore { tensors };
    bionet_core::compress::decompress(&store)?;
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bionet_core::compress::{prune, quantize, storage_bytes, PruneMode, PruneSpec, QuantSpec};

    fn store() -> TensorStore {
        TensorStore::new(vec![
            Tensor::new(
                "conv.w",
                vec![4, 2, 3],
                (0..24).map(|i| (i as f32 - 11.5) / 7.0).collect(),
            )
            .unwrap(),
            Tensor::new("conv.b", vec![4], vec![0.1, -0.2, 0.0, 0.4]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn dense_roundtrip() {
        let s = store();
        let bytes = encode_dense(&s).unwrap();
        assert_eq!(&bytes[..4], b"BNXW");
        assert_eq!(decode_dense(&bytes).unwrap(), s);
    }

    #[test]
    fn compressed_size_matches_accounting() {
        let (pruned, _) = prune(
            &store(),
            &PruneSpec::new(0.5, PruneMode::ClassBlind).unwrap(),
        )
        .unwrap();
        for bits in 1..=8 {
            let cs = quantize(&pruned, &QuantSpec::new(bits).unwrap()).unwrap();
            let bytes = encode_compressed(&cs).unwrap();
            assert_eq!(bytes.len() as u64, storage_bytes(&cs));
            assert_eq!(decode_compressed(&bytes).unwrap(), cs);
        }
    }

    #[test]
    fn all_zero_tensor_has_no_codebook() {
        let s = TensorStore::new(vec![Tensor::new("z", vec![10], vec![0.0; 10]).unwrap()]).unwrap();
        let cs = quantize(&s, &QuantSpec::new(4).unwrap()).unwrap();
        let bytes = encode_compressed(&cs).unwrap();
        assert_eq!(bytes.len(), 10 + 2 + 1 + 1 + 1 + 4 + 2);
        assert_eq!(decode_compressed(&bytes).unwrap(), cs);
    }

    #[test]
    fn corruption_detected() {
        let cs = quantize(&store(), &QuantSpec::new(3).unwrap()).unwrap();
        let bytes = encode_compressed(&cs).unwrap();
        assert!(matches!(
            decode_compressed(&bytes[..bytes.len() - 1]),
            Err(ContainerError::Truncated)
        ));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(
            decode_compressed(&extra),
            Err(ContainerError::Trailing(1))
        ));
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(matches!(
            decode_compressed(&magic),
            Err(ContainerError::Magic { .. })
        ));
        let mut version = bytes;
        version[4] = 9;
        assert!(matches!(
            decode_compressed(&version),
            Err(ContainerError::Version(9))
        ));
        assert!(matches!(decode_dense(&[]), Err(ContainerError::Truncated)));
    }
}
