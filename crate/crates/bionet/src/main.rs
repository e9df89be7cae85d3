use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bionet::config::RunConfig;
use bionet::core::compress::{self, PruneMode, PruneScope, PruneSpec, QuantSpec};
use bionet::core::evaluate::{EvalResponse, EvalStatus, SurrogateEvaluator};
use bionet::core::metrics::{roc_per_class, QualityReport};
use bionet::core::netmodel;
use bionet::core::search::{
    filter_by_storage, weighted_search, Constraints, CostFunction, Engine, GaSettings,
};
use bionet::core::wfdb::{build_dataset, Split, TaskId, TaskSpec, UnmappedPolicy};
use bionet::core::{ArchParams, ArchitectureSpace, ConfusionMatrix, Evaluator, NetConfig};
use bionet::dataset_file::DatasetFile;
use bionet::protocol::{decode_request, encode_response};
use bionet::run::{run_search, EXIT_ERROR};
use bionet::{container, output, records, synthetic};

#[derive(Parser)]
#[command(
    name = "bionet",
    version,
    about = "Storage-aware architecture search for bio-signal classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the architecture space.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Per-layer cost breakdown of one architecture.
    #[command(subcommand)]
    Netmodel(NetmodelCmd),
    /// Run a weighted architecture search.
    Search(SearchArgs),
    /// Build a windowed dataset from WFDB records.
    Dataset(DatasetArgs),
    /// Prune and quantize a weight store.
    Compress(CompressArgs),
    /// Accuracy, per-class scores and ROC from saved predictions.
    Metrics(MetricsArgs),
    /// Unique evaluations needed by each engine, over several seeds.
    ExploreCost(ExploreArgs),
    /// Minimal trainer speaking the wire protocol, for testing.
    #[command(hide = true)]
    StubTrainer(StubArgs),
}

#[derive(Subcommand)]
enum SpaceCmd {
    /// One row per member: arch,B,x,z,genome,params,storage_bytes,flops.
    List {
        #[arg(long, default_value_t = 2)]
        classes: usize,
        /// Keep members whose storage is at most this many bytes.
        #[arg(long)]
        s_const_bytes: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Same as `netmodel describe`.
    Describe(DescribeArgs),
}

#[derive(Subcommand)]
enum NetmodelCmd {
    Describe(DescribeArgs),
}

#[derive(Args)]
struct DescribeArgs {
    /// Architecture as `B,x,z` or `B=..,x=..,z=..`.
    #[arg(long, value_parser = parse_arch)]
    arch: ArchParams,
    #[arg(long, default_value_t = 2)]
    classes: usize,
}

#[derive(Args)]
struct SearchArgs {
    /// TOML run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    engine: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    s_const_bytes: Option<u64>,
    #[arg(long)]
    q_const: Option<f64>,
    /// accuracy, precision:<c>, recall:<c> or f1:<c>.
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// surrogate, table:<csv> or external:<command>.
    #[arg(long)]
    evaluator: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DatasetArgs {
    #[arg(long, default_value = "DNN1")]
    task: TaskId,
    /// Directory holding the records.
    #[arg(long, required_unless_present = "synthetic")]
    records: Option<PathBuf>,
    /// Record names; defaults to the `RECORDS` list in the directory.
    #[arg(long, value_delimiter = ',')]
    names: Vec<String>,
    #[arg(long, default_value = "atr")]
    annotator: String,
    /// Use one generated record with this many windows instead.
    #[arg(long, conflicts_with = "records")]
    synthetic: Option<usize>,
    /// Drop windows whose only labels are unmapped instead of calling
    /// them Other.
    #[arg(long)]
    drop_unmapped: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    LayerWise,
    ClassBlind,
}

#[derive(Args)]
struct CompressArgs {
    /// Dense weight container.
    #[arg(long, required_unless_present = "synthetic")]
    input: Option<PathBuf>,
    /// Generate a store of this many weights instead.
    #[arg(long, conflicts_with = "input")]
    synthetic: Option<usize>,
    #[arg(long, default_value_t = 0.9)]
    prune: f64,
    #[arg(long, default_value_t = 4)]
    bits: u8,
    #[arg(long, value_enum, default_value = "class-blind")]
    mode: ModeArg,
    /// Also prune rank-1 tensors such as biases.
    #[arg(long)]
    prune_all: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    /// Square matrix of counts, rows = true class. An optional first line
    /// of labels is allowed.
    #[arg(long)]
    confusion: PathBuf,
    /// Rows of `label,score_0,..,score_{C-1}` with a header.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Where to write the ROC points.
    #[arg(long, requires = "scores")]
    roc_out: Option<PathBuf>,
}

#[derive(Args)]
struct ExploreArgs {
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
}

#[derive(Args)]
struct StubArgs {
    /// Report this accuracy for every request; otherwise the surrogate.
    #[arg(long)]
    accuracy: Option<f64>,
    /// Answer with the wrong id.
    #[arg(long)]
    bad_id: bool,
    /// Stop answering after this many responses.
    #[arg(long)]
    hang_after: Option<usize>,
    /// Answer every request with status failed.
    #[arg(long)]
    fail: bool,
    /// If this file exists it holds a count; answer with status failed
    /// after that many successes.
    #[arg(long)]
    quota_file: Option<PathBuf>,
    /// Append each request's arch key to this file.
    #[arg(long)]
    log: Option<PathBuf>,
}

fn parse_arch(s: &str) -> Result<ArchParams, String> {
    if s.contains('=') {
        return s
            .parse()
            .map_err(|e: bionet::core::archspace::ArchError| e.to_string());
    }
    let genes = s
        .split(',')
        .map(|g| g.trim().parse::<u8>().map_err(|e| format!("{g:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    match genes[..] {
        [b, x, z] => ArchParams::new(b, x, z).map_err(|e| e.to_string()),
        _ => Err(format!("expected B,x,z, got {s:?}")),
    }
}

fn output_sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_space(cmd: SpaceCmd) -> Result<()> {
    match cmd {
        SpaceCmd::List {
            classes,
            s_const_bytes,
            out,
        } => {
            let cfg = NetConfig::with_classes(classes);
            let space = filter_by_storage(&ArchitectureSpace::enumerate(), &cfg, s_const_bytes)?;
            let rows = space
                .iter()
                .map(|a| Ok((*a, netmodel::build(a, &cfg)?)))
                .collect::<Result<Vec<_>>>()?;
            output::write_space(output_sink(out.as_deref())?, &rows)?;
        }
        SpaceCmd::Describe(args) => describe(&args)?,
    }
    Ok(())
}

fn describe(args: &DescribeArgs) -> Result<()> {
    let net = netmodel::build(&args.arch, &NetConfig::with_classes(args.classes))?;
    output::write_describe(io::stdout().lock(), &net)?;
    Ok(())
}

fn cmd_search(args: SearchArgs) -> Result<ExitCode> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = args.task {
        cfg.task = v;
    }
    if let Some(v) = args.engine {
        cfg.engine = v;
    }
    if let Some(v) = args.alpha {
        cfg.weights.alpha = v;
    }
    if let Some(v) = args.beta {
        cfg.weights.beta = v;
    }
    if let Some(v) = args.s_const_bytes {
        cfg.constraints.s_const_bytes = Some(v);
    }
    if let Some(v) = args.q_const {
        cfg.constraints.q_const = Some(v);
    }
    if let Some(v) = args.metric {
        cfg.constraints.metric = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.evaluator {
        cfg.evaluator.backend = v;
    }
    if let Some(v) = args.out {
        cfg.out = Some(v);
    }
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("bionet-out"));
    match run_search(&cfg, &out) {
        Ok(outcome) => {
            let r = &outcome.result;
            eprintln!(
                "{}: {} evaluated, {} on the Pareto front, {} satisfy the constraints",
                r.engine,
                r.evaluated.len(),
                r.pareto.len(),
                r.omega.len()
            );
            if let Some(best) = r.best() {
                eprintln!(
                    "best {} quality {} storage {} B fitness {}",
                    best.arch, best.quality, best.storage_bytes, best.fitness
                );
            }
            if outcome.unsatisfiable() {
                eprintln!("no architecture meets the quality constraint");
            }
            Ok(ExitCode::from(outcome.exit_code() as u8))
        }
        Err(e) => {
            eprintln!("error: {e}");
            Ok(ExitCode::from(e.exit_code() as u8))
        }
    }
}

fn record_names(dir: &Path, names: Vec<String>) -> Result<Vec<String>> {
    if !names.is_empty() {
        return Ok(names);
    }
    let list = dir.join("RECORDS");
    let text =
        std::fs::read_to_string(&list).with_context(|| format!("reading {}", list.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

fn cmd_dataset(args: DatasetArgs) -> Result<()> {
    let policy = if args.drop_unmapped {
        UnmappedPolicy::DropWindow
    } else {
        UnmappedPolicy::MapToOther
    };
    let spec = TaskSpec::preset(args.task).with_policy(policy);
    let recs = match (args.synthetic, &args.records) {
        (Some(n), _) => vec![synthetic::synthetic_record("synthetic", n, args.seed)],
        (None, Some(dir)) => record_names(dir, args.names)?
            .iter()
            .map(|n| records::load_record(dir, n, &args.annotator))
            .collect::<Result<_, _>>()?,
        (None, None) => bail!("either --records or --synthetic is required"),
    };
    let ds = build_dataset(&recs, &spec, args.seed)?;
    for w in &ds.warnings {
        log::warn!("{w}");
    }
    let file = DatasetFile::from_dataset(&ds)?;
    let mut out = io::stdout().lock();
    writeln!(out, "split,windows")?;
    for s in [Split::Train, Split::Val, Split::Test] {
        writeln!(out, "{},{}", s.name(), file.count(s))?;
    }
    for (label, n) in ds.classes.iter().zip(ds.class_counts()) {
        writeln!(out, "class:{label},{n}")?;
    }
    if let Some(p) = args.out {
        std::fs::write(&p, file.encode()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn cmd_compress(args: CompressArgs) -> Result<()> {
    let store = match (&args.input, args.synthetic) {
        (Some(p), _) => {
            let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            container::decode_dense(&bytes)?
        }
        (None, Some(n)) => synthetic::synthetic_store(n, args.seed),
        (None, None) => bail!("either --input or --synthetic is required"),
    };
    let mode = match args.mode {
        ModeArg::LayerWise => PruneMode::LayerWise,
        ModeArg::ClassBlind => PruneMode::ClassBlind,
    };
    let scope = if args.prune_all {
        PruneScope::All
    } else {
        PruneScope::Weights
    };
    let (pruned, _) =
        compress::prune(&store, &PruneSpec::new(args.prune, mode)?.with_scope(scope))?;
    let quant = QuantSpec {
        seed: args.seed,
        ..QuantSpec::new(args.bits)?
    };
    let cs = compress::quantize(&pruned, &quant)?;
    let dense = store.dense_bytes();
    let packed = compress::storage_bytes(&cs);
    println!("dense_bytes,{dense}");
    println!("compressed_bytes,{packed}");
    println!("ratio,{:.2}", compress::compression_ratio(&store, &cs));
    if let Some(p) = args.out {
        std::fs::write(&p, container::encode_compressed(&cs)?)
            .with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

/// Reads a confusion matrix; a first line that is not all integers is
/// taken as class labels.
fn read_confusion(path: &Path) -> Result<(Vec<String>, ConfusionMatrix)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut labels = None;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parsed: Result<Vec<u64>, _> = rec.iter().map(str::parse).collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if i == 0 => labels = Some(rec.iter().map(String::from).collect::<Vec<_>>()),
            Err(e) => bail!("{}: row {}: {e}", path.display(), i + 1),
        }
    }
    let cm = ConfusionMatrix::from_rows(&rows)?;
    let labels = labels.unwrap_or_else(|| (0..cm.classes()).map(|c| format!("class{c}")).collect());
    if labels.len() != cm.classes() {
        bail!("{} labels for {} classes", labels.len(), cm.classes());
    }
    Ok((labels, cm))
}

fn cmd_metrics(args: MetricsArgs) -> Result<()> {
    let (labels, cm) = read_confusion(&args.confusion)?;
    let report = QualityReport::from_confusion(&cm, &labels)?;
    output::write_metrics(io::stdout().lock(), &report)?;
    if let Some(path) = &args.scores {
        let mut rdr =
            csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
        let (mut truth, mut scores) = (Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            let label: usize = rec[0].trim().parse().context("label column")?;
            let row = rec
                .iter()
                .skip(1)
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .context("score columns")?;
            truth.push(label);
            scores.push(row);
        }
        let curves = roc_per_class(&scores, &truth, cm.classes())?;
        let mut out = io::stdout().lock();
        for (l, c) in labels.iter().zip(&curves) {
            writeln!(out, "auc:{l},{}", c.auc)?;
        }
        if let Some(p) = &args.roc_out {
            output::write_roc(output_sink(Some(p))?, &labels, &curves)?;
        }
    }
    Ok(())
}

fn cmd_explore(args: ExploreArgs) -> Result<()> {
    let space = ArchitectureSpace::enumerate();
    let cfg = NetConfig::with_classes(args.classes);
    let cf = CostFunction::for_space(args.alpha, args.beta, &space, &cfg)?;
    let constraints = Constraints::default();
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "engine,seed,unique_evaluations,reduction,best_arch,best_fitness"
    )?;
    for engine in Engine::ALL_GENETIC {
        for seed in 0..args.seeds {
            let r = weighted_search(
                &space,
                &cfg,
                cf,
                &constraints,
                engine,
                &GaSettings::with_seed(seed),
                SurrogateEvaluator::new(cfg, seed),
            )?;
            let best = r.best().expect("non-empty search");
            writeln!(
                out,
                "{},{seed},{},{:.3},{},{}",
                engine.name(),
                r.unique_eval_calls,
                space.len() as f64 / r.unique_eval_calls as f64,
                best.arch.key().replace(',', ":"),
                best.fitness
            )?;
        }
    }
    Ok(())
}

fn cmd_stub(args: StubArgs) -> Result<()> {
    let mut log = match &args.log {
        Some(p) => Some(
            std::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)?,
        ),
        None => None,
    };
    let stdin = io::stdin().lock();
    let mut stdout = io::stdout().lock();
    for (answered, line) in stdin.lines().enumerate() {
        let line = line?;
        let req = decode_request(&line).map_err(anyhow::Error::msg)?;
        if let Some(f) = log.as_mut() {
            writeln!(f, "{}", req.arch.key().replace(',', ":"))?;
        }
        if args.hang_after.is_some_and(|n| answered >= n) {
            std::thread::sleep(std::time::Duration::from_secs(3600));
        }
        let quota = args
            .quota_file
            .as_ref()
            .and_then(|p| std::fs::read_to_string(p).ok())
            .and_then(|s| s.trim().parse::<usize>().ok());
        let status = if args.fail || quota.is_some_and(|n| answered >= n) {
            EvalStatus::Failed("stub configured to fail".into())
        } else {
            let cfg = NetConfig::with_classes(req.task.classes.len().max(2));
            let mut ev = SurrogateEvaluator::new(cfg, 0).with_labels(req.task.classes.clone());
            let mut q = ev.evaluate(&req.arch)?;
            if let Some(a) = args.accuracy {
                q.accuracy = a;
            }
            EvalStatus::Ok(q)
        };
        let id = if args.bad_id { req.id + 1000 } else { req.id };
        writeln!(stdout, "{}", encode_response(&EvalResponse { id, status }))?;
        stdout.flush()?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Space(c) => cmd_space(c)?,
        Command::Netmodel(NetmodelCmd::Describe(a)) => describe(&a)?,
        Command::Search(a) => return cmd_search(a),
        Command::Dataset(a) => cmd_dataset(a)?,
        Command::Compress(a) => cmd_compress(a)?,
        Command::Metrics(a) => cmd_metrics(a)?,
        Command::ExploreCost(a) => cmd_explore(a)?,
        Command::StubTrainer(a) => cmd_stub(a)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
