//! The bounded architecture family and its genome.
//!
//! An architecture is fixed by three integers: the number of residual blocks
//! `B ∈ [0, 15]`, the number of blocks between filter doublings
//! `x ∈ [1, 4]`, and the LSTM exponent `z ∈ [4, 8]` (2^z cells). That gives
//! 16 × 4 × 5 = 320 members.
//!
//! The genome is a 9-bit string laid out as `[blocks:4 | interval:2 | lstm:3]`,
//! most significant gene first, each gene most significant bit first. The
//! LSTM gene has 8 codes but only 5 values, so 192 of the 512 genomes decode
//! to nothing.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub const MAX_BLOCKS: u8 = 15;
pub const MIN_INTERVAL: u8 = 1;
pub const MAX_INTERVAL: u8 = 4;
pub const MIN_LSTM_EXP: u8 = 4;
pub const MAX_LSTM_EXP: u8 = 8;

/// Number of bits in a genome.
pub const GENOME_BITS: usize = 9;
/// Number of distinct genomes (valid or not).
pub const GENOME_COUNT: u16 = 1 << GENOME_BITS;

const BLOCK_SHIFT: u16 = 5;
const INTERVAL_SHIFT: u16 = 3;

/// One of the three genes of a chromosome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gene {
    Blocks,
    FilterInterval,
    LstmExp,
}

impl fmt::Display for Gene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gene::Blocks => "blocks",
            Gene::FilterInterval => "filter_interval",
            Gene::LstmExp => "lstm_exp",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArchError {
    #[error("{gene} = {value} is out of range [{min}, {max}]")]
    OutOfRange {
        gene: Gene,
        value: i64,
        min: u8,
        max: u8,
    },
    #[error("chromosome must be {GENOME_BITS} bits, got {0}")]
    GenomeLength(usize),
    #[error("chromosome text may only contain '0' and '1', found {0:?}")]
    GenomeChar(char),
    #[error("malformed architecture text {0:?}, expected \"B=<int>,x=<int>,z=<int>\"")]
    Syntax(String),
}

/// A point in the architecture space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArchParams {
    blocks: u8,
    filter_interval: u8,
    lstm_exp: u8,
}

impl ArchParams {
    pub fn new(blocks: u8, filter_interval: u8, lstm_exp: u8) -> Result<Self, ArchError> {
        check(Gene::Blocks, blocks as i64, 0, MAX_BLOCKS)?;
        check(
            Gene::FilterInterval,
            filter_interval as i64,
            MIN_INTERVAL,
            MAX_INTERVAL,
        )?;
        check(Gene::LstmExp, lstm_exp as i64, MIN_LSTM_EXP, MAX_LSTM_EXP)?;
        Ok(Self {
            blocks,
            filter_interval,
            lstm_exp,
        })
    }

    pub fn blocks(&self) -> u8 {
        self.blocks
    }

    pub fn filter_interval(&self) -> u8 {
        self.filter_interval
    }

    pub fn lstm_exp(&self) -> u8 {
        self.lstm_exp
    }

    /// Hidden width of the LSTM head, `2^z`.
    pub fn lstm_cells(&self) -> u64 {
        1u64 << self.lstm_exp
    }

    pub fn encode(&self) -> Chromosome {
        let bits = (u16::from(self.blocks) << BLOCK_SHIFT)
            | (u16::from(self.filter_interval - MIN_INTERVAL) << INTERVAL_SHIFT)
            | u16::from(self.lstm_exp - MIN_LSTM_EXP);
        Chromosome(bits)
    }

    /// Table key `"B,x,z"` used by lookup tables and caches.
    pub fn key(&self) -> String {
        alloc::format!("{},{},{}", self.blocks, self.filter_interval, self.lstm_exp)
    }
}

fn check(gene: Gene, value: i64, min: u8, max: u8) -> Result<(), ArchError> {
    if value < i64::from(min) || value > i64::from(max) {
        return Err(ArchError::OutOfRange {
            gene,
            value,
            min,
            max,
        });
    }
    Ok(())
}

impl fmt::Display for ArchParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "B={},x={},z={}",
            self.blocks, self.filter_interval, self.lstm_exp
        )
    }
}

impl FromStr for ArchParams {
    type Err = ArchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || ArchError::Syntax(s.into());
        let mut fields = [None::<i64>; 3];
        for part in s.trim().split(',') {
            let (name, value) = part.split_once('=').ok_or_else(syntax)?;
            let slot = match name.trim() {
                "B" => 0,
                "x" => 1,
                "z" => 2,
                _ => return Err(syntax()),
            };
            if fields[slot].is_some() {
                return Err(syntax());
            }
            fields[slot] = Some(value.trim().parse().map_err(|_| syntax())?);
        }
        let [Some(b), Some(x), Some(z)] = fields else {
            return Err(syntax());
        };
        check(Gene::Blocks, b, 0, MAX_BLOCKS)?;
        check(Gene::FilterInterval, x, MIN_INTERVAL, MAX_INTERVAL)?;
        check(Gene::LstmExp, z, MIN_LSTM_EXP, MAX_LSTM_EXP)?;
        Self::new(b as u8, x as u8, z as u8)
    }
}

/// A 9-bit genome. Bit 8 is the first character of the text form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chromosome(u16);

impl Chromosome {
    pub fn from_bits(bits: u16) -> Result<Self, ArchError> {
        if bits >= GENOME_COUNT {
            return Err(ArchError::GenomeLength(16 - bits.leading_zeros() as usize));
        }
        Ok(Self(bits))
    }

    pub fn bits(&self) -> u16 {
        self.0
    }

    /// Raw gene values `(blocks, interval code, lstm code)`.
    pub fn genes(&self) -> (u8, u8, u8) {
        (
            (self.0 >> BLOCK_SHIFT) as u8,
            ((self.0 >> INTERVAL_SHIFT) & 0b11) as u8,
            (self.0 & 0b111) as u8,
        )
    }

    /// Decodes the genome; `None` marks a genome outside the family
    /// (LSTM gene 5, 6 or 7).
    pub fn decode(&self) -> Option<ArchParams> {
        let (blocks, interval, lstm) = self.genes();
        if lstm > MAX_LSTM_EXP - MIN_LSTM_EXP {
            return None;
        }
        Some(ArchParams {
            blocks,
            filter_interval: interval + MIN_INTERVAL,
            lstm_exp: lstm + MIN_LSTM_EXP,
        })
    }

    pub fn is_valid(&self) -> bool {
        self.decode().is_some()
    }

    /// Bit at text position `pos` (0 = leftmost character).
    pub fn bit(&self, pos: usize) -> bool {
        debug_assert!(pos < GENOME_BITS);
        (self.0 >> (GENOME_BITS - 1 - pos)) & 1 == 1
    }

    pub fn flip(&self, pos: usize) -> Self {
        debug_assert!(pos < GENOME_BITS);
        Self(self.0 ^ (1 << (GENOME_BITS - 1 - pos)))
    }

    /// Single-point exchange: the children swap the parents' leading `cut`
    /// bits and keep their own tails. `cut` is in `1..GENOME_BITS`.
    pub fn crossover(&self, other: &Self, cut: usize) -> (Self, Self) {
        debug_assert!((1..GENOME_BITS).contains(&cut));
        let tail_mask: u16 = (1 << (GENOME_BITS - cut)) - 1;
        let head_mask = (GENOME_COUNT - 1) & !tail_mask;
        (
            Self((other.0 & head_mask) | (self.0 & tail_mask)),
            Self((self.0 & head_mask) | (other.0 & tail_mask)),
        )
    }
}

impl fmt::Display for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for pos in 0..GENOME_BITS {
            f.write_str(if self.bit(pos) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Chromosome {
    type Err = ArchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let n = s.chars().count();
        if n != GENOME_BITS {
            return Err(ArchError::GenomeLength(n));
        }
        let mut bits = 0u16;
        for c in s.chars() {
            bits = (bits << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    other => return Err(ArchError::GenomeChar(other)),
                };
        }
        Ok(Self(bits))
    }
}

/// Ordered, duplicate-free set of architectures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchitectureSpace {
    members: Vec<ArchParams>,
}

impl ArchitectureSpace {
    /// All 320 members in lexicographic `(B, x, z)` order.
    pub fn enumerate() -> Self {
        let mut members = Vec::with_capacity(320);
        for b in 0..=MAX_BLOCKS {
            for x in MIN_INTERVAL..=MAX_INTERVAL {
                for z in MIN_LSTM_EXP..=MAX_LSTM_EXP {
                    members.push(ArchParams {
                        blocks: b,
                        filter_interval: x,
                        lstm_exp: z,
                    });
                }
            }
        }
        Self { members }
    }

    /// Builds a space from arbitrary members; sorts and removes duplicates.
    pub fn from_members(mut members: Vec<ArchParams>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[ArchParams] {
        &self.members
    }

    pub fn iter(&self) -> core::slice::Iter<'_, ArchParams> {
        self.members.iter()
    }

    pub fn contains(&self, arch: &ArchParams) -> bool {
        self.members.binary_search(arch).is_ok()
    }

    /// Keeps members satisfying `keep`, preserving order.
    pub fn filter(&self, mut keep: impl FnMut(&ArchParams) -> bool) -> Self {
        Self {
            members: self.members.iter().copied().filter(|a| keep(a)).collect(),
        }
    }
}

impl<'a> IntoIterator for &'a ArchitectureSpace {
    type Item = &'a ArchParams;
    type IntoIter = core::slice::Iter<'a, ArchParams>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}
