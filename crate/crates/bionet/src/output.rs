//! CSV artifacts.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back yields bit-identical values.

use std::io::{Read, Write};

use bionet_core::evaluate::TableEvaluator;
use bionet_core::metrics::{QualityReport, RocCurve};
use bionet_core::netmodel::NetworkSummary;
use bionet_core::search::{Evaluated, GenerationLog};
use bionet_core::ArchParams;

pub const EVALUATED_HEADER: [&str; 10] = [
    "arch",
    "B",
    "x",
    "z",
    "quality",
    "storage_bytes",
    "flops",
    "fitness",
    "generation",
    "engine",
];

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("table row {row}: {reason}")]
    Table { row: usize, reason: String },
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// One row per evaluated architecture, tagged with the engine that found
/// it; this is also the quality-vs-storage scatter input.
pub fn write_evaluated<W: Write>(
    w: W,
    rows: &[Evaluated],
    engine: &str,
) -> Result<(), OutputError> {
    let mut w = writer(w);
    w.write_record(EVALUATED_HEADER)?;
    for e in rows {
        w.write_record([
            e.arch.key(),
            e.arch.blocks().to_string(),
            e.arch.filter_interval().to_string(),
            e.arch.lstm_exp().to_string(),
            e.quality.to_string(),
            e.storage_bytes.to_string(),
            e.flops.to_string(),
            e.fitness.to_string(),
            e.generation.to_string(),
            engine.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Loads a lookup table from any CSV with `B`, `x`, `z` and `quality`
/// columns (an `evaluated.csv` qualifies). Each row becomes an
/// accuracy-only report.
pub fn read_table<R: Read>(r: R) -> Result<TableEvaluator, OutputError> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| OutputError::Table {
                row: 0,
                reason: format!("missing column {name:?}"),
            })
    };
    let (b, x, z, q) = (col("B")?, col("x")?, col("z")?, col("quality")?);
    let mut table = TableEvaluator::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let bad = |reason: String| OutputError::Table { row, reason };
        let gene = |c: usize| {
            rec[c]
                .trim()
                .parse::<u8>()
                .map_err(|e| bad(format!("{}: {e}", &headers[c])))
        };
        let arch = ArchParams::new(gene(b)?, gene(x)?, gene(z)?).map_err(|e| bad(e.to_string()))?;
        let quality: f64 = rec[q]
            .trim()
            .parse()
            .map_err(|e| bad(format!("quality: {e}")))?;
        table.insert(arch, QualityReport::accuracy_only(quality));
    }
    Ok(table)
}

pub fn write_log<W: Write>(w: W, log: &[GenerationLog]) -> Result<(), OutputError> {
    let mut w = writer(w);
    w.write_record([
        "generation",
        "new_evaluations",
        "unique_total",
        "discarded",
        "best_fitness",
        "mean_fitness",
    ])?;
    for g in log {
        w.write_record([
            g.generation.to_string(),
            g.new_evaluations.to_string(),
            g.unique_total.to_string(),
            g.discarded.to_string(),
            g.best_fitness.to_string(),
            g.mean_fitness.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-layer breakdown followed by a `total` row.
pub fn write_describe<W: Write>(w: W, net: &NetworkSummary) -> Result<(), OutputError> {
    let mut w = writer(w);
    w.write_record(["kind", "in_ch", "out_ch", "out_len", "params", "flops"])?;
    for l in &net.layers {
        w.write_record([
            l.kind.as_str().to_string(),
            l.in_channels.to_string(),
            l.out_channels.to_string(),
            l.output_len.to_string(),
            l.params.to_string(),
            l.flops.to_string(),
        ])?;
    }
    w.write_record([
        "total".to_string(),
        String::new(),
        String::new(),
        String::new(),
        net.param_count.to_string(),
        net.flops.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

pub fn write_space<W: Write>(
    w: W,
    rows: &[(ArchParams, NetworkSummary)],
) -> Result<(), OutputError> {
    let mut w = writer(w);
    w.write_record([
        "arch",
        "B",
        "x",
        "z",
        "genome",
        "params",
        "storage_bytes",
        "flops",
    ])?;
    for (a, n) in rows {
        w.write_record([
            a.key(),
            a.blocks().to_string(),
            a.filter_interval().to_string(),
            a.lstm_exp().to_string(),
            a.encode().to_string(),
            n.param_count.to_string(),
            n.storage_bytes.to_string(),
            n.flops.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `accuracy,<v>` then a `class,precision,recall,f1` table.
pub fn write_metrics<W: Write>(w: W, q: &QualityReport) -> Result<(), OutputError> {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    w.write_record(["accuracy", &q.accuracy.to_string()])?;
    w.write_record(["class", "precision", "recall", "f1"])?;
    for c in &q.per_class {
        w.write_record([
            c.label.clone(),
            c.precision.to_string(),
            c.recall.to_string(),
            c.f1.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_roc<W: Write>(
    w: W,
    labels: &[String],
    curves: &[RocCurve],
) -> Result<(), OutputError> {
    let mut w = writer(w);
    w.write_record(["class", "threshold", "fpr", "tpr"])?;
    for (label, c) in labels.iter().zip(curves) {
        for p in &c.points {
            w.write_record([
                label.clone(),
                p.threshold.to_string(),
                p.fpr.to_string(),
                p.tpr.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use bionet_core::evaluate::{Evaluator, SurrogateEvaluator};
    use bionet_core::search::{exhaustive, Constraints, CostFunction};
    use bionet_core::{ArchitectureSpace, NetConfig};

    #[test]
    fn table_replays_exhaustive_pareto_front() {
        let space = ArchitectureSpace::enumerate();
        let cfg = NetConfig::default();
        let cf = CostFunction::for_space(0.6, 0.4, &space, &cfg).unwrap();
        let first = exhaustive(
            &space,
            &cfg,
            cf,
            &Constraints::default(),
            SurrogateEvaluator::new(cfg, 8),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_evaluated(&mut buf, &first.evaluated, first.engine).unwrap();
        let table = read_table(buf.as_slice()).unwrap();
        assert_eq!(table.len(), 320);
        let replay = exhaustive(&space, &cfg, cf, &Constraints::default(), table).unwrap();
        assert_eq!(replay.pareto, first.pareto);
        assert_eq!(replay.evaluated, first.evaluated);
    }

    #[test]
    fn table_errors_name_the_row() {
        let csv = "B,x,z,quality\n1,1,4,0.9\n1,9,4,0.9\n";
        match read_table(csv.as_bytes()) {
            Err(OutputError::Table { row, .. }) => assert_eq!(row, 2),
            other => panic!("{other:?}"),
        }
        assert!(read_table("B,x,quality\n".as_bytes()).is_err());
        let mut t = read_table("B,x,z,quality\n1,1,4,0.5\n".as_bytes()).unwrap();
        assert_eq!(
            t.evaluate(&ArchParams::new(1, 1, 4).unwrap())
                .unwrap()
                .accuracy,
            0.5
        );
    }

    #[test]
    fn metrics_layout() {
        let cm = bionet_core::ConfusionMatrix::from_rows(&[vec![50, 10], vec![5, 35]]).unwrap();
        let q = QualityReport::from_confusion(&cm, &["N".into(), "A".into()]).unwrap();
        let mut buf = Vec::new();
        write_metrics(&mut buf, &q).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("accuracy,0.85\nclass,precision,recall,f1\nN,0.90909"));
    }
}
