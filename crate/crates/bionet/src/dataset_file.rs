//! Windowed dataset file (`BNXD`), read by the trainer.
//!
//! Layout, little-endian:
//!
//! ```text
//! "BNXD" | u16 version | u8 task (1..=5) | u16 class_count
//! class_count × (u16 len | UTF-8 label)
//! u16 channels | u16 window_len | u64 seed | u32 train | u32 val | u32 test
//! rows × (u8 split (0 train, 1 val, 2 test) | u16 label |
//!         channels × window_len i16 samples, channel-major)
//! ```
//!
//! Rows appear in window order; the split counts in the header must match
//! the row tags.

use std::io::{Cursor, Read};

use bionet_core::wfdb::{Split, TaskId, WindowedDataset};
use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

pub const DATASET_MAGIC: [u8; 4] = *b"BNXD";
pub const DATASET_VERSION: u16 = 1;

#[derive(Debug, thiserror::Error)]
pub enum DatasetFileError {
    #[error("not a dataset file")]
    Magic,
    #[error("unsupported dataset version {0}")]
    Version(u16),
    #[error("dataset file truncated")]
    Truncated,
    #[error("invalid dataset file: {0}")]
    Invalid(String),
}

impl From<std::io::Error> for DatasetFileError {
    fn from(_: std::io::Error) -> Self {
        Self::Truncated
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub split: Split,
    pub label: u16,
    /// `window_len` samples per channel.
    pub samples: Vec<Vec<i16>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetFile {
    pub task: TaskId,
    pub classes: Vec<String>,
    pub channels: u16,
    pub window_len: u16,
    pub seed: u64,
    pub rows: Vec<Row>,
}

impl DatasetFile {
    pub fn from_dataset(ds: &WindowedDataset) -> Result<Self, DatasetFileError> {
        let rows = ds
            .windows
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let split = ds.split_of(i).ok_or_else(|| {
                    DatasetFileError::Invalid(format!("window {i} is in no split"))
                })?;
                Ok(Row {
                    split,
                    label: w.label as u16,
                    samples: w.samples.clone(),
                })
            })
            .collect::<Result<_, DatasetFileError>>()?;
        let window_len = ds
            .windows
            .first()
            .map_or(0, |w| w.samples.first().map_or(0, Vec::len));
        Ok(Self {
            task: ds.task,
            classes: ds.classes.clone(),
            channels: ds.channels as u16,
            window_len: window_len as u16,
            seed: ds.seed,
            rows,
        })
    }

    pub fn count(&self, split: Split) -> usize {
        self.rows.iter().filter(|r| r.split == split).count()
    }

    pub fn encode(&self) -> Vec<u8> {
        let per_row = 3 + 2 * usize::from(self.channels) * usize::from(self.window_len);
        let mut out = Vec::with_capacity(64 + self.rows.len() * per_row);
        out.extend_from_slice(&DATASET_MAGIC);
        out.write_u16::<LE>(DATASET_VERSION).unwrap();
        out.write_u8(self.task.index()).unwrap();
        out.write_u16::<LE>(self.classes.len() as u16).unwrap();
        for c in &self.classes {
            out.write_u16::<LE>(c.len() as u16).unwrap();
            out.extend_from_slice(c.as_bytes());
        }
        out.write_u16::<LE>(self.channels).unwrap();
        out.write_u16::<LE>(self.window_len).unwrap();
        out.write_u64::<LE>(self.seed).unwrap();
        for split in [Split::Train, Split::Val, Split::Test] {
            out.write_u32::<LE>(self.count(split) as u32).unwrap();
        }
        for row in &self.rows {
            out.write_u8(row.split.tag()).unwrap();
            out.write_u16::<LE>(row.label).unwrap();
            for ch in &row.samples {
                for &s in ch {
                    out.write_i16::<LE>(s).unwrap();
                }
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DatasetFileError> {
        let mut r = Cursor::new(bytes);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != DATASET_MAGIC {
            return Err(DatasetFileError::Magic);
        }
        let version = r.read_u16::<LE>()?;
        if version != DATASET_VERSION {
            return Err(DatasetFileError::Version(version));
        }
        let task_index = r.read_u8()?;
        let task = TaskId::from_index(task_index)
            .ok_or_else(|| DatasetFileError::Invalid(format!("task index {task_index}")))?;
        let class_count = r.read_u16::<LE>()?;
        let mut classes = Vec::with_capacity(usize::from(class_count));
        for _ in 0..class_count {
            let len = usize::from(r.read_u16::<LE>()?);
            let mut buf = vec![0u8; len.min(bytes.len())];
            r.read_exact(&mut buf)?;
            classes.push(
                String::from_utf8(buf)
                    .map_err(|_| DatasetFileError::Invalid("class label is not UTF-8".into()))?,
            );
        }
        let channels = r.read_u16::<LE>()?;
        let window_len = r.read_u16::<LE>()?;
        let seed = r.read_u64::<LE>()?;
        let counts = [
            r.read_u32::<LE>()?,
            r.read_u32::<LE>()?,
            r.read_u32::<LE>()?,
        ];

        let row_bytes = 3 + 2 * usize::from(channels) * usize::from(window_len);
        let left = bytes.len() - r.position() as usize;
        if !left.is_multiple_of(row_bytes) {
            return Err(DatasetFileError::Truncated);
        }
        let mut rows = Vec::with_capacity(left / row_bytes);
        for _ in 0..left / row_bytes {
            let tag = r.read_u8()?;
            let split = Split::from_tag(tag)
                .ok_or_else(|| DatasetFileError::Invalid(format!("split tag {tag}")))?;
            let label = r.read_u16::<LE>()?;
            if usize::from(label) >= classes.len() {
                return Err(DatasetFileError::Invalid(format!(
                    "label {label} outside {class_count} classes"
                )));
            }
            let mut samples = vec![vec![0i16; usize::from(window_len)]; usize::from(channels)];
            for ch in &mut samples {
                r.read_i16_into::<LE>(ch)?;
            }
            rows.push(Row {
                split,
                label,
                samples,
            });
        }
        let file = Self {
            task,
            classes,
            channels,
            window_len,
            seed,
            rows,
        };
        for (split, &expected) in [Split::Train, Split::Val, Split::Test].iter().zip(&counts) {
            if file.count(*split) != expected as usize {
                return Err(DatasetFileError::Invalid(format!(
                    "{} count {} does not match header {expected}",
                    split.name(),
                    file.count(*split)
                )));
            }
        }
        Ok(file)
    }
}
