//! IO, file formats and orchestration around [`bionet_core`].
//!
//! * [`records`]: WFDB records and annotations on disk.
//! * [`dataset_file`]: the windowed dataset container handed to trainers.
//! * [`container`]: dense and compressed weight containers.
//! * [`protocol`] and [`external`]: the JSON-lines trainer protocol and a
//!   process-pool evaluator speaking it.
//! * [`cache`]: a persistent result cache that makes searches resumable.
//! * [`config`], [`output`] and [`run`]: run configuration, CSV artifacts
//!   and end-to-end search runs.

pub mod cache;
pub mod config;
pub mod container;
pub mod dataset_file;
pub mod external;
pub mod output;
pub mod protocol;
pub mod records;
pub mod run;
pub mod synthetic;

pub use bionet_core as core;
