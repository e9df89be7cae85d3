//! WFDB record parsing and windowed dataset construction.
//!
//! Only the pieces needed for MIT-BIH style records are supported: text
//! headers, format-212 signal files and MIT-format annotation files.

mod annotation;
mod dataset;
mod header;
mod signal;

use alloc::string::String;

pub use annotation::{
    is_beat, parse_annotations, serialize_annotations, symbol_for_code, Annotation,
    ANNOTATION_CODES,
};
pub use dataset::{
    build_dataset, split_counts, LabelledRecord, Split, TaskId, TaskSpec, UnmappedPolicy, Window,
    WindowedDataset, WINDOW_LEN,
};
pub use header::{parse_header, Header, SignalSpec};
pub use signal::{decode_212, decode_212_pairs, encode_212, Channel, Record};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WfdbError {
    #[error("header line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("signal {signal}: format {format} is not supported (only 212)")]
    UnsupportedFormat { signal: usize, format: u16 },
    #[error("format 212 data truncated: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("sample {value} does not fit in 12 bits")]
    SampleRange { value: i16 },
    #[error("annotation stream: {0}")]
    Annotation(String),
    #[error("no signal data for file {0:?}")]
    MissingFile(String),
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("task: {0}")]
    Task(String),
}
