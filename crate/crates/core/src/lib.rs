//! Hardware-aware architecture-space exploration for bio-signal DNNs.
//!
//! This crate is `no_std` (it needs `alloc`) and contains every pure piece
//! of the engine:
//!
//! * [`archspace`]: the bounded ResNet+LSTM family, its 9-bit genome and
//!   enumeration.
//! * [`netmodel`]: analytical layer stack, parameter count, storage bytes
//!   and FLOPs for each member of the family.
//! * [`search`]: the weighted cost function, constraint filtering, and the
//!   exhaustive, random, roulette, tournament, NSGA-II and SPEA-2 engines.
//! * [`evaluate`]: the evaluator contract plus the surrogate and lookup-table
//!   backends.
//! * [`metrics`]: confusion-matrix metrics and ROC analysis.
//! * [`compress`]: magnitude pruning, k-means quantization and compressed
//!   storage accounting.
//! * [`wfdb`]: WFDB header, format-212 and MIT annotation parsing, and
//!   windowed dataset construction.
//!
//! File IO, the external trainer protocol, persistent caching and the CLI
//! live in the companion `bionet` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod archspace;
pub mod compress;
pub mod evaluate;
pub mod metrics;
pub mod netmodel;
pub mod rng;
pub mod search;
pub mod wfdb;

pub use archspace::{ArchParams, ArchitectureSpace, Chromosome, Gene};
pub use evaluate::{EvalError, EvalErrorKind, Evaluator};
pub use metrics::{ConfusionMatrix, QualityReport};
pub use netmodel::{NetConfig, NetworkSummary};
