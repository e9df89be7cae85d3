//! Loading WFDB records from disk.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use bionet_core::wfdb::{parse_annotations, parse_header, LabelledRecord, Record, WfdbError};

#[derive(Debug, thiserror::Error)]
pub enum RecordIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Wfdb { path: PathBuf, source: WfdbError },
    #[error("{0}: header is not UTF-8")]
    Encoding(PathBuf),
}

fn read(path: &Path) -> Result<Vec<u8>, RecordIoError> {
    fs::read(path).map_err(|source| RecordIoError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Reads `<dir>/<name>.hea`, its signal files and `<dir>/<name>.<ann>`.
pub fn load_record(
    dir: &Path,
    name: &str,
    annotator: &str,
) -> Result<LabelledRecord, RecordIoError> {
    let hea = dir.join(format!("{name}.hea"));
    let text = String::from_utf8(read(&hea)?).map_err(|_| RecordIoError::Encoding(hea.clone()))?;
    let header = parse_header(&text).map_err(|source| RecordIoError::Wfdb {
        path: hea.clone(),
        source,
    })?;

    let mut files = BTreeMap::new();
    for s in &header.signals {
        if !files.contains_key(&s.file_name) {
            files.insert(s.file_name.clone(), read(&dir.join(&s.file_name))?);
        }
    }
    let record = Record::decode(&header, &files).map_err(|source| RecordIoError::Wfdb {
        path: hea.clone(),
        source,
    })?;

    let atr = dir.join(format!("{name}.{annotator}"));
    let annotations = parse_annotations(&read(&atr)?)
        .map_err(|source| RecordIoError::Wfdb { path: atr, source })?;
    Ok(LabelledRecord {
        record,
        annotations,
    })
}

/// Writes a single-file format-212 record and its annotation file.
pub fn write_record(
    dir: &Path,
    record: &LabelledRecord,
    annotator: &str,
) -> Result<(), RecordIoError> {
    let rec = &record.record;
    let name = &rec.name;
    let wrap = |path: PathBuf| move |source| RecordIoError::Wfdb { path, source };
    let dat_name = format!("{name}.dat");

    let mut header = format!(
        "{name} {} {} {}\n",
        rec.channels.len(),
        rec.sampling_rate,
        rec.len()
    );
    for ch in &rec.channels {
        header.push_str(&format!(
            "{dat_name} 212 {}({}) 12 0 0 0 0 {}\n",
            ch.gain, ch.baseline, ch.name
        ));
    }
    let interleaved: Vec<i16> = (0..rec.len())
        .flat_map(|i| rec.samples.iter().map(move |s| s[i]))
        .collect();
    let dat = bionet_core::wfdb::encode_212(&interleaved).map_err(wrap(dir.join(&dat_name)))?;
    let atr_path = dir.join(format!("{name}.{annotator}"));
    let atr = bionet_core::wfdb::serialize_annotations(&record.annotations)
        .map_err(wrap(atr_path.clone()))?;

    for (path, bytes) in [
        (dir.join(format!("{name}.hea")), header.into_bytes()),
        (dir.join(&dat_name), dat),
        (atr_path, atr),
    ] {
        fs::write(&path, bytes).map_err(|source| RecordIoError::Io { path, source })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use bionet_core::wfdb::{Annotation, Channel};

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let rec = LabelledRecord {
            record: Record {
                name: "syn".into(),
                sampling_rate: 360.0,
                channels: vec![
                    Channel {
                        name: "MLII".into(),
                        gain: 200.0,
                        baseline: 0,
                    },
                    Channel {
                        name: "V5".into(),
                        gain: 200.0,
                        baseline: 0,
                    },
                ],
                samples: vec![
                    (0..1001).map(|i| (i % 37) as i16).collect(),
                    (0..1001).map(|i| -(i as i16 % 50)).collect(),
                ],
            },
            annotations: vec![Annotation::new(12, 1), Annotation::new(5000, 5)],
        };
        write_record(dir.path(), &rec, "atr").unwrap();
        assert_eq!(load_record(dir.path(), "syn", "atr").unwrap(), rec);
        assert!(matches!(
            load_record(dir.path(), "nope", "atr"),
            Err(RecordIoError::Io { .. })
        ));
    }
}
