//! Persistent, append-only result cache.
//!
//! One CSV row per result:
//! `arch,context,accuracy,per_class,checksum` where `arch` is `B,x,z`,
//! `context` identifies the backend, task and hyperparameters,
//! `per_class` is a JSON array of `[label, precision, recall, f1]` and
//! `checksum` is the first 16 hex digits of the SHA-256 of the other four
//! fields joined by `\x1f`. Rows that fail to parse or checksum are skipped
//! with a warning, so a run killed mid-write resumes cleanly.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use bionet_core::evaluate::{EvalError, Evaluator};
use bionet_core::metrics::{ClassReport, QualityReport};
use bionet_core::ArchParams;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const CACHE_HEADER: &str = "arch,context,accuracy,per_class,checksum";

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// First 16 hex digits of the SHA-256 of `data`.
pub fn short_hash(data: &[u8]) -> String {
    hex::encode(&Sha256::digest(data)[..8])
}

/// Stable identity of a backend configuration, from any serializable
/// description of it.
pub fn context_hash<T: Serialize>(parts: &T) -> String {
    short_hash(
        serde_json::to_string(parts)
            .expect("context serializes")
            .as_bytes(),
    )
}

fn checksum(fields: &[&str]) -> String {
    short_hash(fields.join("\x1f").as_bytes())
}

fn encode_row(arch: &ArchParams, context: &str, q: &QualityReport) -> String {
    let per_class: Vec<(&str, f64, f64, f64)> = q
        .per_class
        .iter()
        .map(|c| (c.label.as_str(), c.precision, c.recall, c.f1))
        .collect();
    let per_class = serde_json::to_string(&per_class).expect("per-class serializes");
    let accuracy = q.accuracy.to_string();
    let key = arch.key();
    let sum = checksum(&[&key, context, &accuracy, &per_class]);
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record([key.as_str(), context, &accuracy, &per_class, &sum])
        .expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn decode_row(line: &str) -> Result<(ArchParams, String, QualityReport), String> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(line.as_bytes());
    let rec = r
        .records()
        .next()
        .ok_or("empty row")?
        .map_err(|e| e.to_string())?;
    if rec.len() != 5 {
        return Err(format!("{} fields, expected 5", rec.len()));
    }
    if checksum(&[&rec[0], &rec[1], &rec[2], &rec[3]]) != rec[4] {
        return Err("checksum mismatch".into());
    }
    let mut parts = rec[0].split(',').map(str::parse::<u8>);
    let mut gene = || {
        parts
            .next()
            .ok_or("short arch key".to_string())?
            .map_err(|e| e.to_string())
    };
    let arch = ArchParams::new(gene()?, gene()?, gene()?).map_err(|e| e.to_string())?;
    let accuracy: f64 = rec[2].parse().map_err(|_| "accuracy is not a number")?;
    let per_class: Vec<(String, f64, f64, f64)> =
        serde_json::from_str(&rec[3]).map_err(|e| e.to_string())?;
    Ok((
        arch,
        rec[1].to_string(),
        QualityReport {
            accuracy,
            per_class: per_class
                .into_iter()
                .map(|(label, precision, recall, f1)| ClassReport {
                    label,
                    precision,
                    recall,
                    f1,
                })
                .collect(),
            roc: None,
        },
    ))
}

/// Cache file plus its in-memory index. Readers share the index; appends
/// are serialized through the file lock.
#[derive(Debug)]
pub struct ResultCache {
    path: PathBuf,
    entries: RwLock<HashMap<(ArchParams, String), QualityReport>>,
    file: Mutex<File>,
    skipped: usize,
}

impl ResultCache {
    /// Opens (creating if absent) the cache at `path` and loads every valid
    /// row.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, CacheError> {
        let path = path.as_ref().to_owned();
        let io = |source| CacheError::Io {
            path: path.clone(),
            source,
        };
        let mut entries = HashMap::new();
        let mut skipped = 0;
        let mut fresh = true;
        if path.exists() {
            let reader = BufReader::new(File::open(&path).map_err(io)?);
            for (n, line) in reader.lines().enumerate() {
                let line = line.map_err(io)?;
                if n == 0 && line == CACHE_HEADER {
                    fresh = false;
                    continue;
                }
                fresh = false;
                if line.trim().is_empty() {
                    continue;
                }
                match decode_row(&line) {
                    Ok((arch, ctx, q)) => {
                        entries.insert((arch, ctx), q);
                    }
                    Err(reason) => {
                        log::warn!("{}:{}: skipping cache row: {reason}", path.display(), n + 1);
                        skipped += 1;
                    }
                }
            }
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io)?;
        if fresh {
            writeln!(file, "{CACHE_HEADER}").map_err(io)?;
        } else {
            // a torn final write leaves no newline; start the next row cleanly
            let len = file.metadata().map_err(io)?.len();
            if len > 0 && std::fs::read(&path).map_err(io)?.last() != Some(&b'\n') {
                writeln!(file).map_err(io)?;
            }
        }
        Ok(Self {
            path,
            entries: RwLock::new(entries),
            file: Mutex::new(file),
            skipped,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Rows dropped while loading.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, arch: &ArchParams, context: &str) -> Option<QualityReport> {
        self.entries
            .read()
            .expect("cache lock")
            .get(&(*arch, context.to_string()))
            .cloned()
    }

    /// Appends and flushes one row, then indexes it.
    pub fn insert(
        &self,
        arch: &ArchParams,
        context: &str,
        q: &QualityReport,
    ) -> Result<(), CacheError> {
        let row = encode_row(arch, context, q);
        {
            let mut f = self.file.lock().expect("cache file lock");
            f.write_all(row.as_bytes())
                .and_then(|_| f.flush())
                .map_err(|source| CacheError::Io {
                    path: self.path.clone(),
                    source,
                })?;
        }
        self.entries
            .write()
            .expect("cache lock")
            .insert((*arch, context.to_string()), q.clone());
        Ok(())
    }
}

/// Serves hits from a [`ResultCache`] and forwards misses to `inner`,
/// recording every success.
pub struct CachedEvaluator<'c, E> {
    inner: E,
    cache: &'c ResultCache,
    context: String,
    pub backend_calls: usize,
    pub hits: usize,
}

impl<'c, E> CachedEvaluator<'c, E> {
    pub fn new(inner: E, cache: &'c ResultCache, context: impl Into<String>) -> Self {
        Self {
            inner,
            cache,
            context: context.into(),
            backend_calls: 0,
            hits: 0,
        }
    }

    pub fn into_inner(self) -> E {
        self.inner
    }

    fn store(&self, arch: &ArchParams, q: &QualityReport) {
        if let Err(e) = self.cache.insert(arch, &self.context, q) {
            log::warn!("{e}; result kept in memory only");
        }
    }
}

impl<E: Evaluator> Evaluator for CachedEvaluator<'_, E> {
    fn evaluate(&mut self, arch: &ArchParams) -> Result<QualityReport, EvalError> {
        if let Some(q) = self.cache.get(arch, &self.context) {
            self.hits += 1;
            return Ok(q);
        }
        self.backend_calls += 1;
        let q = self.inner.evaluate(arch)?;
        self.store(arch, &q);
        Ok(q)
    }

    fn evaluate_batch(&mut self, archs: &[ArchParams]) -> Vec<Result<QualityReport, EvalError>> {
        let mut out: Vec<Option<Result<QualityReport, EvalError>>> = archs
            .iter()
            .map(|a| self.cache.get(a, &self.context).map(Ok))
            .collect();
        self.hits += out.iter().filter(|r| r.is_some()).count();
        let misses: Vec<usize> = (0..archs.len()).filter(|&i| out[i].is_none()).collect();
        if !misses.is_empty() {
            let batch: Vec<ArchParams> = misses.iter().map(|&i| archs[i]).collect();
            self.backend_calls += batch.len();
            for (&i, r) in misses.iter().zip(self.inner.evaluate_batch(&batch)) {
                if let Ok(q) = &r {
                    self.store(&archs[i], q);
                }
                out[i] = Some(r);
            }
        }
        out.into_iter().map(|r| r.expect("filled")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bionet_core::evaluate::{CountingEvaluator, SurrogateEvaluator};
    use bionet_core::NetConfig;

    fn arch(b: u8, x: u8, z: u8) -> ArchParams {
        ArchParams::new(b, x, z).unwrap()
    }

    fn report() -> QualityReport {
        QualityReport {
            accuracy: 0.1 + 0.2,
            per_class: vec![ClassReport {
                label: "N, \"x\"".into(),
                precision: 0.5,
                recall: 1.0 / 3.0,
                f1: 0.4,
            }],
            roc: None,
        }
    }

    #[test]
    fn row_roundtrip_is_exact() {
        let row = encode_row(&arch(5, 2, 6), "ctx", &report());
        let (a, ctx, q) = decode_row(row.trim_end()).unwrap();
        assert_eq!((a, ctx.as_str(), q), (arch(5, 2, 6), "ctx", report()));
    }

    #[test]
    fn reload_reproduces_hits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.csv");
        let cfg = NetConfig::default();
        {
            let cache = ResultCache::open(&path).unwrap();
            let mut ev = CachedEvaluator::new(SurrogateEvaluator::new(cfg, 1), &cache, "s1");
            ev.evaluate(&arch(1, 1, 4)).unwrap();
            ev.evaluate(&arch(1, 1, 4)).unwrap();
            assert_eq!((ev.backend_calls, ev.hits), (1, 1));
        }
        let cache = ResultCache::open(&path).unwrap();
        assert_eq!(cache.len(), 1);
        let mut ev = CachedEvaluator::new(
            CountingEvaluator::new(SurrogateEvaluator::new(cfg, 1)),
            &cache,
            "s1",
        );
        let got = ev.evaluate_batch(&[arch(1, 1, 4), arch(2, 1, 4)]);
        assert!(got.iter().all(Result::is_ok));
        assert_eq!(ev.backend_calls, 1);
        assert_eq!(ev.into_inner().calls, 1);
        // other contexts do not share rows
        assert!(cache.get(&arch(1, 1, 4), "s2").is_none());
    }

    #[test]
    fn corrupt_rows_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.csv");
        let good = encode_row(&arch(3, 1, 5), "c", &report());
        let tampered = good.replace("0.30000000000000004", "0.9");
        std::fs::write(
            &path,
            format!("{CACHE_HEADER}\n{good}{tampered}garbage\n\"{}", &good[..10]),
        )
        .unwrap();
        let cache = ResultCache::open(&path).unwrap();
        assert_eq!(cache.len(), 1);
        assert_eq!(cache.skipped(), 3);
        cache.insert(&arch(4, 1, 5), "c", &report()).unwrap();
        assert_eq!(ResultCache::open(&path).unwrap().len(), 2);
    }
}
