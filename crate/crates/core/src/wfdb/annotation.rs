//! MIT-format annotation files.
//!
//! The stream is a sequence of little-endian 16-bit words: the top 6 bits
//! are a code, the low 10 bits a value. Codes 1..=49 are annotations whose
//! value is the sample delta from the previous annotation. Special codes:
//!
//! * 59 SKIP: the next 4 bytes hold a 32-bit delta (high word first, each
//!   word little-endian) added before the following annotation.
//! * 60 NUM, 61 SUB, 62 CHN: set the `num`, `subtype` and `chan` fields of
//!   the preceding annotation. `num` and `chan` carry over to later
//!   annotations until changed.
//! * 63 AUX: the value is a byte count; that many bytes follow, padded to
//!   an even length.
//! * A zero word ends the stream.

use alloc::format;
use alloc::vec::Vec;

use super::WfdbError;

const SKIP: u16 = 59;
const NUM: u16 = 60;
const SUB: u16 = 61;
const CHN: u16 = 62;
const AUX: u16 = 63;
const MAX_DELTA: u64 = 0x3FF;

/// `(code, symbol)` for the 41 standard beat and non-beat annotations.
pub const ANNOTATION_CODES: [(u8, char); 41] = [
    (1, 'N'),
    (2, 'L'),
    (3, 'R'),
    (4, 'a'),
    (5, 'V'),
    (6, 'F'),
    (7, 'J'),
    (8, 'A'),
    (9, 'S'),
    (10, 'E'),
    (11, 'j'),
    (12, '/'),
    (13, 'Q'),
    (14, '~'),
    (15, '\u{0}'),
    (16, '|'),
    (17, '\u{0}'),
    (18, 's'),
    (19, 'T'),
    (20, '*'),
    (21, 'D'),
    (22, '"'),
    (23, '='),
    (24, 'p'),
    (25, 'B'),
    (26, '^'),
    (27, 't'),
    (28, '+'),
    (29, 'u'),
    (30, '?'),
    (31, '!'),
    (32, '['),
    (33, ']'),
    (34, 'e'),
    (35, 'n'),
    (36, '@'),
    (37, 'x'),
    (38, 'f'),
    (39, '('),
    (40, ')'),
    (41, 'r'),
];

const BEAT_CODES: [u8; 20] = [
    1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 25, 30, 34, 35, 37, 38, 41,
];

/// Standard symbol of an annotation code; `None` for unassigned codes.
pub fn symbol_for_code(code: u8) -> Option<char> {
    ANNOTATION_CODES
        .iter()
        .find(|(c, _)| *c == code)
        .map(|&(_, s)| s)
        .filter(|&s| s != '\u{0}')
}

/// Whether the code marks a heartbeat (as opposed to rhythm, noise or
/// waveform markers).
pub fn is_beat(code: u8) -> bool {
    BEAT_CODES.contains(&code)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub sample: u64,
    pub code: u8,
    /// Symbol from the standard table; `None` for unknown codes.
    pub symbol: Option<char>,
    pub subtype: u16,
    pub chan: u16,
    pub num: u16,
    pub aux: Option<Vec<u8>>,
}

impl Annotation {
    pub fn new(sample: u64, code: u8) -> Self {
        Self {
            sample,
            code,
            symbol: symbol_for_code(code),
            subtype: 0,
            chan: 0,
            num: 0,
            aux: None,
        }
    }
}

fn bad(msg: impl Into<alloc::string::String>) -> WfdbError {
    WfdbError::Annotation(msg.into())
}

fn read_word(bytes: &[u8], at: usize) -> Option<u16> {
    Some(u16::from_le_bytes([*bytes.get(at)?, *bytes.get(at + 1)?]))
}

pub fn parse_annotations(bytes: &[u8]) -> Result<Vec<Annotation>, WfdbError> {
    let mut out: Vec<Annotation> = Vec::new();
    let mut pos = 0usize;
    let mut time: i64 = 0;
    let (mut chan, mut num) = (0u16, 0u16);

    loop {
        let word = read_word(bytes, pos).ok_or_else(|| bad("stream ends without terminator"))?;
        let at = pos;
        pos += 2;
        let code = word >> 10;
        let value = word & 0x3FF;
        match code {
            0 if value == 0 => return Ok(out),
            SKIP => {
                let hi = read_word(bytes, pos).ok_or_else(|| bad("truncated SKIP"))?;
                let lo = read_word(bytes, pos + 2).ok_or_else(|| bad("truncated SKIP"))?;
                pos += 4;
                time += i64::from(((u32::from(hi) << 16) | u32::from(lo)) as i32);
                if time < 0 {
                    return Err(bad(format!("SKIP at byte {at} moves before sample 0")));
                }
            }
            NUM | SUB | CHN | AUX => {
                let last = out
                    .last_mut()
                    .ok_or_else(|| bad(format!("modifier at byte {at} precedes any annotation")))?;
                match code {
                    NUM => {
                        num = value;
                        last.num = value;
                    }
                    SUB => last.subtype = value,
                    CHN => {
                        chan = value;
                        last.chan = value;
                    }
                    _ => {
                        let len = usize::from(value);
                        let data = bytes
                            .get(pos..pos + len)
                            .ok_or_else(|| bad("truncated AUX payload"))?;
                        last.aux = Some(data.to_vec());
                        pos += len + len % 2;
                    }
                }
            }
            _ => {
                time += i64::from(value);
                let mut a = Annotation::new(time as u64, code as u8);
                a.chan = chan;
                a.num = num;
                out.push(a);
            }
        }
    }
}

/// Writes annotations in the canonical layout read by
/// [`parse_annotations`]. Annotations must be sorted by sample and use
/// codes 1..=58; AUX payloads are limited to 1023 bytes and
/// subtype/chan/num to 10 bits.
pub fn serialize_annotations(anns: &[Annotation]) -> Result<Vec<u8>, WfdbError> {
    let mut out = Vec::new();
    let push = |out: &mut Vec<u8>, code: u16, value: u16| {
        out.extend_from_slice(&((code << 10) | value).to_le_bytes());
    };
    let mut prev = 0u64;
    let (mut chan, mut num) = (0u16, 0u16);
    for (i, a) in anns.iter().enumerate() {
        if !(1..SKIP as u8).contains(&a.code) {
            return Err(bad(format!(
                "annotation {i}: code {} cannot be written",
                a.code
            )));
        }
        if a.sample < prev {
            return Err(bad(format!(
                "annotation {i}: samples must be non-decreasing"
            )));
        }
        if a.subtype > 0x3FF || a.chan > 0x3FF || a.num > 0x3FF {
            return Err(bad(format!("annotation {i}: modifier exceeds 10 bits")));
        }
        let delta = a.sample - prev;
        if delta > MAX_DELTA {
            let d = i32::try_from(delta)
                .map_err(|_| bad(format!("annotation {i}: gap too large")))?
                as u32;
            push(&mut out, SKIP, 0);
            out.extend_from_slice(&((d >> 16) as u16).to_le_bytes());
            out.extend_from_slice(&(d as u16).to_le_bytes());
            push(&mut out, u16::from(a.code), 0);
        } else {
            push(&mut out, u16::from(a.code), delta as u16);
        }
        if a.subtype != 0 {
            push(&mut out, SUB, a.subtype);
        }
        if a.chan != chan {
            push(&mut out, CHN, a.chan);
            chan = a.chan;
        }
        if a.num != num {
            push(&mut out, NUM, a.num);
            num = a.num;
        }
        if let Some(aux) = &a.aux {
            if aux.len() > 0x3FF {
                return Err(bad(format!("annotation {i}: AUX longer than 1023 bytes")));
            }
            push(&mut out, AUX, aux.len() as u16);
            out.extend_from_slice(aux);
            if aux.len() % 2 == 1 {
                out.push(0);
            }
        }
        prev = a.sample;
    }
    push(&mut out, 0, 0);
    Ok(out)
}
