use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::{is_beat, Annotation, Record, WfdbError};
use crate::rng::SearchRng;

pub const WINDOW_LEN: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TaskId {
    Dnn1,
    Dnn2,
    Dnn3,
    Dnn4,
    Dnn5,
}

impl TaskId {
    pub const ALL: [TaskId; 5] = [Self::Dnn1, Self::Dnn2, Self::Dnn3, Self::Dnn4, Self::Dnn5];

    pub fn name(self) -> &'static str {
        match self {
            Self::Dnn1 => "DNN1",
            Self::Dnn2 => "DNN2",
            Self::Dnn3 => "DNN3",
            Self::Dnn4 => "DNN4",
            Self::Dnn5 => "DNN5",
        }
    }

    pub fn index(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_index(i: u8) -> Option<Self> {
        Self::ALL.get(usize::from(i).checked_sub(1)?).copied()
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskId {
    type Err = WfdbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| WfdbError::Task(format!("unknown task {s:?}")))
    }
}

/// What to do with a beat whose symbol is not in the task's map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnmappedPolicy {
    #[default]
    MapToOther,
    DropWindow,
}

/// Class set and annotation-symbol map of one classification task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSpec {
    pub id: TaskId,
    pub classes: Vec<String>,
    pub symbol_map: Vec<(char, usize)>,
    pub normal: usize,
    /// Catch-all class for beats outside the map, if the task has one.
    pub other: Option<usize>,
    pub unmapped: UnmappedPolicy,
}

impl TaskSpec {
    pub fn preset(id: TaskId) -> Self {
        let (classes, map, other): (&[&str], &[(char, usize)], usize) = match id {
            TaskId::Dnn1 => (&["Normal", "Anomaly"], &[('N', 0)], 1),
            TaskId::Dnn2 => (&["Normal", "PVC", "Other"], &[('N', 0), ('V', 1)], 2),
            TaskId::Dnn3 => (
                &["Normal", "BundleBranch", "Other"],
                &[('N', 0), ('L', 1), ('R', 1)],
                2,
            ),
            TaskId::Dnn4 => (
                &["Normal", "Atrial", "Ventricular", "Other"],
                &[
                    ('N', 0),
                    ('A', 1),
                    ('a', 1),
                    ('J', 1),
                    ('S', 1),
                    ('V', 2),
                    ('E', 2),
                ],
                3,
            ),
            TaskId::Dnn5 => (
                &["Normal", "VFib", "Other"],
                &[('N', 0), ('[', 1), ('!', 1), (']', 1)],
                2,
            ),
        };
        Self {
            id,
            classes: classes.iter().map(|c| c.to_string()).collect(),
            symbol_map: map.to_vec(),
            normal: 0,
            other: Some(other),
            unmapped: UnmappedPolicy::default(),
        }
    }

    pub fn with_policy(mut self, unmapped: UnmappedPolicy) -> Self {
        self.unmapped = unmapped;
        self
    }

    pub fn validate(&self) -> Result<(), WfdbError> {
        let n = self.classes.len();
        if n < 2 {
            return Err(WfdbError::Task(format!(
                "{}: needs at least two classes",
                self.id
            )));
        }
        if self.normal >= n || self.other.is_some_and(|o| o >= n) {
            return Err(WfdbError::Task(format!(
                "{}: class index out of range",
                self.id
            )));
        }
        for (i, &(sym, class)) in self.symbol_map.iter().enumerate() {
            if class >= n {
                return Err(WfdbError::Task(format!(
                    "{}: symbol {sym:?} maps to class {class}",
                    self.id
                )));
            }
            if self.symbol_map[..i].iter().any(|&(s, _)| s == sym) {
                return Err(WfdbError::Task(format!(
                    "{}: symbol {sym:?} mapped twice",
                    self.id
                )));
            }
        }
        Ok(())
    }

    pub fn class_of(&self, symbol: char) -> Option<usize> {
        self.symbol_map
            .iter()
            .find(|&&(s, _)| s == symbol)
            .map(|&(_, c)| c)
    }

    /// Labeling priority: specific classes outrank the catch-all, which
    /// outranks Normal.
    fn priority(&self, class: usize) -> u8 {
        if class == self.normal {
            0
        } else if Some(class) == self.other {
            1
        } else {
            2
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelledRecord {
    pub record: Record,
    pub annotations: Vec<Annotation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        [Self::Train, Self::Val, Self::Test]
            .get(usize::from(tag))
            .copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Train => "train",
            Self::Val => "val",
            Self::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub record: usize,
    pub start: u64,
    pub label: usize,
    /// `WINDOW_LEN` samples per channel.
    pub samples: Vec<Vec<i16>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowedDataset {
    pub task: TaskId,
    pub classes: Vec<String>,
    pub channels: usize,
    pub seed: u64,
    pub windows: Vec<Window>,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub warnings: Vec<String>,
}

impl WindowedDataset {
    pub fn split_of(&self, window: usize) -> Option<Split> {
        [
            (Split::Train, &self.train),
            (Split::Val, &self.val),
            (Split::Test, &self.test),
        ]
        .into_iter()
        .find(|(_, idx)| idx.contains(&window))
        .map(|(s, _)| s)
    }

    pub fn split(&self, split: Split) -> &[usize] {
        match split {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for w in &self.windows {
            counts[w.label] += 1;
        }
        counts
    }
}

/// Train/val/test sizes for `n` windows: 70/10/20 rounded half up, test
/// takes the remainder.
pub fn split_counts(n: usize) -> (usize, usize, usize) {
    let train = (7 * n + 5) / 10;
    let val = ((n + 5) / 10).min(n - train);
    (train, val, n - train - val)
}

enum WindowLabel {
    Class(usize),
    Drop,
    Unlabelled,
}

fn label_window(task: &TaskSpec, anns: &[Annotation]) -> WindowLabel {
    let mut best: Option<(u8, usize)> = None;
    for a in anns {
        let class = match a.symbol.and_then(|s| task.class_of(s)) {
            Some(c) => c,
            None if is_beat(a.code) => match (task.unmapped, task.other) {
                (UnmappedPolicy::MapToOther, Some(o)) => o,
                _ => return WindowLabel::Drop,
            },
            None => continue,
        };
        let p = task.priority(class);
        if best.is_none_or(|(bp, _)| p > bp) {
            best = Some((p, class));
        }
    }
    best.map_or(WindowLabel::Unlabelled, |(_, c)| WindowLabel::Class(c))
}

/// Tiles each record into non-overlapping `WINDOW_LEN` windows from sample
/// 0, labels each from the annotations inside it, drops windows without a
/// label, shuffles with `seed` and splits 70/10/20.
///
/// Records with different channel counts are cut to the smallest count;
/// differing sampling rates are kept as-is. Both produce a warning.
pub fn build_dataset(
    records: &[LabelledRecord],
    task: &TaskSpec,
    seed: u64,
) -> Result<WindowedDataset, WfdbError> {
    task.validate()?;
    if records.is_empty() {
        return Err(WfdbError::Dataset("no records".into()));
    }
    let mut warnings = Vec::new();
    let channels = records
        .iter()
        .map(|r| r.record.samples.len())
        .min()
        .unwrap_or(0);
    if channels == 0 {
        return Err(WfdbError::Dataset("record has no channels".into()));
    }
    if records.iter().any(|r| r.record.samples.len() != channels) {
        warnings.push(format!("channel counts differ; using the first {channels}"));
    }
    let fs = records[0].record.sampling_rate;
    for r in &records[1..] {
        if r.record.sampling_rate != fs {
            warnings.push(format!(
                "record {} sampled at {} Hz, first record at {fs} Hz; not resampled",
                r.record.name, r.record.sampling_rate
            ));
        }
    }

    let mut windows = Vec::new();
    for (ri, lr) in records.iter().enumerate() {
        let rec = &lr.record;
        if rec.samples.iter().any(|s| s.len() != rec.len()) {
            return Err(WfdbError::Dataset(format!(
                "record {}: channel lengths differ",
                rec.name
            )));
        }
        let mut anns = lr.annotations.as_slice();
        for w in 0..rec.len() / WINDOW_LEN {
            let start = (w * WINDOW_LEN) as u64;
            let end = start + WINDOW_LEN as u64;
            let skip = anns.partition_point(|a| a.sample < start);
            anns = &anns[skip..];
            let inside = &anns[..anns.partition_point(|a| a.sample < end)];
            if let WindowLabel::Class(label) = label_window(task, inside) {
                let lo = w * WINDOW_LEN;
                windows.push(Window {
                    record: ri,
                    start,
                    label,
                    samples: rec.samples[..channels]
                        .iter()
                        .map(|s| s[lo..lo + WINDOW_LEN].to_vec())
                        .collect(),
                });
            }
        }
    }
    if windows.is_empty() {
        return Err(WfdbError::Dataset("no labelled windows".into()));
    }

    let mut order: Vec<usize> = (0..windows.len()).collect();
    SearchRng::new(seed).shuffle(&mut order);
    let (train, val, _) = split_counts(order.len());
    let test = order.split_off(train + val);
    let val = order.split_off(train);
    Ok(WindowedDataset {
        task: task.id,
        classes: task.classes.clone(),
        channels,
        seed,
        windows,
        train: order,
        val,
        test,
        warnings,
    })
}
