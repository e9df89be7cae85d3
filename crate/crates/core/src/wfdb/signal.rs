use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{Header, WfdbError};

fn sign_extend_12(v: u16) -> i16 {
    ((v << 4) as i16) >> 4
}

/// Decodes `count` samples from a format-212 stream. Every 3 bytes hold two
/// 12-bit two's-complement samples; an odd trailing sample needs only 2
/// bytes.
pub fn decode_212(bytes: &[u8], count: usize) -> Result<Vec<i16>, WfdbError> {
    let needed = 3 * (count / 2) + 2 * (count % 2);
    if bytes.len() < needed {
        return Err(WfdbError::Truncated {
            needed,
            available: bytes.len(),
        });
    }
    let mut out = Vec::with_capacity(count);
    for chunk in bytes[..3 * (count / 2)].chunks_exact(3) {
        let (b0, b1, b2) = (
            u16::from(chunk[0]),
            u16::from(chunk[1]),
            u16::from(chunk[2]),
        );
        out.push(sign_extend_12(((b1 & 0x0F) << 8) | b0));
        out.push(sign_extend_12(((b1 & 0xF0) << 4) | b2));
    }
    if count % 2 == 1 {
        let i = 3 * (count / 2);
        let (b0, b1) = (u16::from(bytes[i]), u16::from(bytes[i + 1]));
        out.push(sign_extend_12(((b1 & 0x0F) << 8) | b0));
    }
    Ok(out)
}

/// Decodes a whole number of triplets into sample pairs.
pub fn decode_212_pairs(bytes: &[u8]) -> Result<Vec<(i16, i16)>, WfdbError> {
    if !bytes.len().is_multiple_of(3) {
        return Err(WfdbError::Truncated {
            needed: bytes.len().div_ceil(3) * 3,
            available: bytes.len(),
        });
    }
    let flat = decode_212(bytes, 2 * (bytes.len() / 3))?;
    Ok(flat.chunks_exact(2).map(|p| (p[0], p[1])).collect())
}

/// Packs samples into format 212. Values must lie in `[-2048, 2047]`.
pub fn encode_212(samples: &[i16]) -> Result<Vec<u8>, WfdbError> {
    if let Some(&value) = samples.iter().find(|&&s| !(-2048..=2047).contains(&s)) {
        return Err(WfdbError::SampleRange { value });
    }
    let mut out = Vec::with_capacity(3 * samples.len().div_ceil(2));
    for pair in samples.chunks(2) {
        let a = (pair[0] as u16) & 0x0FFF;
        match pair.get(1) {
            Some(&s) => {
                let b = (s as u16) & 0x0FFF;
                out.push((a & 0xFF) as u8);
                out.push((((b >> 4) & 0xF0) | (a >> 8)) as u8);
                out.push((b & 0xFF) as u8);
            }
            None => {
                out.push((a & 0xFF) as u8);
                out.push((a >> 8) as u8);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub name: String,
    pub gain: f64,
    pub baseline: i32,
}

/// Decoded record: one raw ADC series per channel, all the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub name: String,
    pub sampling_rate: f64,
    pub channels: Vec<Channel>,
    pub samples: Vec<Vec<i16>>,
}

impl Record {
    /// Decodes all signals of `header` from the raw contents of its signal
    /// files, keyed by file name. Signals sharing a file are interleaved
    /// sample by sample.
    pub fn decode(header: &Header, files: &BTreeMap<String, Vec<u8>>) -> Result<Self, WfdbError> {
        let mut groups: Vec<(&str, Vec<usize>)> = Vec::new();
        for (i, s) in header.signals.iter().enumerate() {
            match groups.iter_mut().find(|(f, _)| *f == s.file_name) {
                Some((_, members)) => members.push(i),
                None => groups.push((&s.file_name, vec![i])),
            }
        }

        let mut samples: Vec<Vec<i16>> = vec![Vec::new(); header.signals.len()];
        for (file, members) in &groups {
            let bytes = files
                .get(*file)
                .ok_or_else(|| WfdbError::MissingFile(String::from(*file)))?;
            let width = members.len();
            let per_signal = match header.num_samples {
                Some(n) => n as usize,
                None => bytes.len() * 2 / 3 / width,
            };
            let flat = decode_212(bytes, per_signal * width)?;
            for (k, &sig) in members.iter().enumerate() {
                samples[sig] = flat.iter().skip(k).step_by(width).copied().collect();
            }
        }

        let len = samples.iter().map(Vec::len).min().unwrap_or(0);
        for s in &mut samples {
            s.truncate(len);
        }
        Ok(Self {
            name: header.record_name.clone(),
            sampling_rate: header.sampling_rate,
            channels: header
                .signals
                .iter()
                .enumerate()
                .map(|(i, s)| Channel {
                    name: s
                        .description
                        .clone()
                        .unwrap_or_else(|| alloc::format!("sig{i}")),
                    gain: s.gain,
                    baseline: s.baseline,
                })
                .collect(),
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
