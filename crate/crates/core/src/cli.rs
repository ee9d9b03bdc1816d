//! Command-line front end: `summary`, `learn-forest`, `learn-dag`, `metrics`,
//! `temporal` and `simulate`.
//!
//! Options can also come from a flat `key=value` file passed with `--config`; keys
//! are the long flag names without dashes prefix (`penalty=200`). Flags given on the
//! command line win. Exit codes: 0 success, 1 usage error, 2 data error.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dag::{self, Dag, SearchConfig};
use crate::dataset::{IndicatorDataset, VarId};
use crate::export;
use crate::forest::{self, Forest};
use crate::ingest::{self, CsvSchema, TransactionLog, VisitCountTable};
use crate::metrics::{MetricsReport, UndirectedGraph};
use crate::stats::ScoreConfig;
use crate::synth::{self, GroundTruthModel};
use crate::temporal;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "visitnet", version, about = "Learn item networks from visit transaction logs")]
pub struct Cli {
    /// Flat key=value configuration file; command-line flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Subject, item and visit counts of a log.
    Summary(CommonArgs),
    /// Minimum-BIC forest (DOT) and its centrality table (TSV).
    LearnForest(CommonArgs),
    /// Hill-climbed DAG (DOT), its score and the physical-order agreement report (TSV).
    LearnDag(CommonArgs),
    /// Centrality table of the minimum-BIC forest.
    Metrics(CommonArgs),
    /// First-visit precedence counts for every pair of main items.
    Temporal(CommonArgs),
    /// Synthetic log drawn from a random ground-truth model.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Main items have more visits than this nearest-rank percentile (default 0.85).
    #[arg(long)]
    pub percentile: Option<f64>,
    /// Keep every item instead of applying the percentile cut.
    #[arg(long)]
    pub all_items: bool,
    /// Add the subscriber-status variable to the learned graph.
    #[arg(long)]
    pub include_status: bool,
    /// Penalty per free parameter (default ln(N)/2).
    #[arg(long)]
    pub penalty: Option<f64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Subjects who visited both ends of an arc needed to call its physical order.
    #[arg(long)]
    pub min_support: Option<u64>,
    /// Field delimiter of the input (single byte, default ',').
    #[arg(long)]
    pub delimiter: Option<char>,
    /// Reject dates outside this year.
    #[arg(long)]
    pub year: Option<i32>,
    /// Arcs toggled per restart.
    #[arg(long)]
    pub perturbation: Option<usize>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Tree,
    Dag,
}

impl FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Args, Debug, Default, Clone)]
pub struct SimulateArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub items: Option<usize>,
    #[arg(long)]
    pub subjects: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub year: Option<i32>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Tree model: probability that the endpoints of an edge agree.
    #[arg(long)]
    pub p_agree: Option<f64>,
    /// DAG model: probability of each arc along a random order.
    #[arg(long)]
    pub density: Option<f64>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn data(e: impl std::fmt::Display) -> Self {
        CliError::Data(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Parsed `--config` file.
#[derive(Debug, Default)]
struct ConfigFile(HashMap<String, String>);

const KNOWN_KEYS: &[&str] = &[
    "input", "out", "percentile", "all-items", "include-status", "penalty", "restarts", "seed", "min-support", "delimiter",
    "year", "perturbation", "max-iterations", "items", "subjects", "model", "p-agree", "density",
];

impl ConfigFile {
    fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn parse(text: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", n + 1)))?;
            let key = k.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("config line {}: unknown key {key:?}", n + 1)));
            }
            map.insert(key, v.trim().to_string());
        }
        Ok(Self(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config: bad value {v:?} for {key}"))),
        }
    }

    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

/// Effective options after merging flags over the config file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub percentile: f64,
    pub all_items: bool,
    pub include_status: bool,
    pub penalty: Option<f64>,
    pub restarts: usize,
    pub seed: u64,
    pub min_support: u64,
    pub delimiter: u8,
    pub year: Option<i32>,
    pub perturbation: usize,
    pub max_iterations: usize,
}

fn resolve(a: CommonArgs, file: &ConfigFile) -> Result<RunConfig> {
    let defaults = SearchConfig::<f64>::default();
    let delimiter: char = file.pick(a.delimiter, "delimiter")?.unwrap_or(',');
    if !delimiter.is_ascii() {
        return Err(CliError::Usage(format!("delimiter {delimiter:?} must be a single ASCII character")));
    }
    let cfg = RunConfig {
        input: file.pick(a.input, "input")?,
        out: file.pick(a.out, "out")?,
        percentile: file.pick(a.percentile, "percentile")?.unwrap_or(0.85),
        all_items: a.all_items || file.get("all-items")?.unwrap_or(false),
        include_status: a.include_status || file.get("include-status")?.unwrap_or(false),
        penalty: file.pick(a.penalty, "penalty")?,
        restarts: file.pick(a.restarts, "restarts")?.unwrap_or(defaults.restarts),
        seed: file.pick(a.seed, "seed")?.unwrap_or(defaults.seed),
        min_support: file.pick(a.min_support, "min-support")?.unwrap_or(30),
        delimiter: delimiter as u8,
        year: file.pick(a.year, "year")?,
        perturbation: file.pick(a.perturbation, "perturbation")?.unwrap_or(defaults.perturbation_size),
        max_iterations: file.pick(a.max_iterations, "max-iterations")?.unwrap_or(defaults.max_iterations),
    };
    if !(0.0..=1.0).contains(&cfg.percentile) {
        return Err(CliError::Usage(format!("percentile {} outside [0, 1]", cfg.percentile)));
    }
    if let Some(k) = cfg.penalty {
        if !k.is_finite() || k < 0.0 {
            return Err(CliError::Usage(format!("penalty {k} must be non-negative")));
        }
    }
    if cfg.perturbation == 0 || cfg.max_iterations == 0 {
        return Err(CliError::Usage("perturbation and max-iterations must be at least 1".into()));
    }
    Ok(cfg)
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = if code == EXIT_OK {
                write!(stdout, "{}", e.render())
            } else {
                write!(stderr, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(stderr, "usage error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Data(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_DATA
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Summary(a) => cmd_summary(&resolve(a, &file)?, stdout),
        Command::LearnForest(a) => cmd_learn_forest(&resolve(a, &file)?, stdout, stderr),
        Command::LearnDag(a) => cmd_learn_dag(&resolve(a, &file)?, stdout, stderr),
        Command::Metrics(a) => cmd_metrics(&resolve(a, &file)?, stdout, stderr),
        Command::Temporal(a) => cmd_temporal(&resolve(a, &file)?, stdout, stderr),
        Command::Simulate(a) => cmd_simulate(a, &file, stdout),
    }
}

fn load_log(cfg: &RunConfig) -> Result<TransactionLog> {
    let path = cfg.input.as_ref().ok_or_else(|| CliError::Usage("--input is required".into()))?;
    let f = fs::File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let schema = CsvSchema { delimiter: cfg.delimiter, year: cfg.year, ..CsvSchema::default() };
    ingest::parse_transactions(std::io::BufReader::new(f), &schema)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn out_dir(cfg_out: &Option<PathBuf>) -> Result<&Path> {
    let dir = cfg_out.as_deref().ok_or_else(|| CliError::Usage("--out is required".into()))?;
    fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Writes to `<out>/<name>` when an output directory is configured, else to stdout.
fn emit(cfg: &RunConfig, name: &str, contents: &str, stdout: &mut dyn Write) -> Result<()> {
    match &cfg.out {
        Some(_) => write_file(out_dir(&cfg.out)?, name, contents),
        None => stdout.write_all(contents.as_bytes()).map_err(CliError::data),
    }
}

/// Main items by percentile. When the strict cut keeps nothing (one item, or all
/// counts tied), every item is kept.
fn main_items(log: &TransactionLog, cfg: &RunConfig, stderr: &mut dyn Write) -> Result<BTreeSet<String>> {
    let counts = VisitCountTable::from_dedup(&ingest::deduplicate(log));
    if counts.is_empty() {
        return Err(CliError::Data("log contains no visits".into()));
    }
    if cfg.all_items {
        return Ok(counts.counts.keys().cloned().collect());
    }
    let items = ingest::select_main_items(&counts, cfg.percentile).map_err(CliError::data)?;
    if items.is_empty() {
        let _ = writeln!(stderr, "note: no item exceeds the percentile cut; using all {} items", counts.counts.len());
        return Ok(counts.counts.keys().cloned().collect());
    }
    Ok(items)
}

fn load_dataset(cfg: &RunConfig, stderr: &mut dyn Write) -> Result<(TransactionLog, IndicatorDataset)> {
    let log = load_log(cfg)?;
    let items = main_items(&log, cfg, stderr)?;
    let ds = ingest::build_indicator_dataset(&log, &items, cfg.include_status).map_err(CliError::data)?;
    Ok((log, ds))
}

fn learn_forest(cfg: &RunConfig, ds: &IndicatorDataset) -> Result<Forest> {
    let vars: Vec<VarId> = ds.variables(cfg.include_status);
    forest::learn_min_bic_forest(ds, &vars, &ScoreConfig::<f64>::bic(ds.n_rows())).map_err(CliError::data)
}

pub fn summary_text(log: &TransactionLog, percentile: f64) -> String {
    let counts = VisitCountTable::from_dedup(&ingest::deduplicate(log));
    let main = ingest::select_main_items(&counts, percentile).unwrap_or_default();
    let mut out = String::new();
    out.push_str(&format!("subjects\t{}\n", log.n_subjects()));
    out.push_str(&format!("items\t{}\n", log.item_universe().len()));
    out.push_str(&format!("records\t{}\n", log.records().len()));
    out.push_str(&format!("visits\t{}\n", counts.total()));
    out.push_str(&format!("main_items\t{}\n", main.len()));
    out.push_str(&format!("main_visits\t{}\n", counts.total_over(&main)));
    out.push_str("item\tcount\tmain\n");
    for (item, c) in &counts.counts {
        out.push_str(&format!("{item}\t{c}\t{}\n", if main.contains(item) { "yes" } else { "no" }));
    }
    out
}

fn cmd_summary(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let log = load_log(cfg)?;
    emit(cfg, "summary.tsv", &summary_text(&log, cfg.percentile), stdout)
}

fn cmd_learn_forest(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let dir = out_dir(&cfg.out)?.to_path_buf();
    let (_, ds) = load_dataset(cfg, stderr)?;
    let f = learn_forest(cfg, &ds)?;
    let report = MetricsReport::<f64>::compute(&UndirectedGraph::from_forest(&f)).sorted();
    write_file(&dir, "forest.dot", &export::forest_dot(&f))?;
    write_file(&dir, "metrics.tsv", &export::metrics_tsv(&report))?;
    let _ = writeln!(
        stdout,
        "subjects={} nodes={} edges={} trees={}",
        ds.n_rows(),
        f.vertices().len(),
        f.edges().len(),
        forest::connected_components(&f).len()
    );
    Ok(())
}

fn cmd_metrics(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let (_, ds) = load_dataset(cfg, stderr)?;
    let f = learn_forest(cfg, &ds)?;
    let report = MetricsReport::<f64>::compute(&UndirectedGraph::from_forest(&f)).sorted();
    emit(cfg, "metrics.tsv", &export::metrics_tsv(&report), stdout)
}

fn cmd_temporal(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let log = load_log(cfg)?;
    let items: Vec<String> = main_items(&log, cfg, stderr)?.into_iter().collect();
    let table = temporal::precedence_table(&ingest::deduplicate(&log), &items);
    emit(cfg, "precedence.tsv", &export::precedence_tsv(&table), stdout)
}

pub fn score_text(result: &dag::HillClimbResult<f64>, penalty: f64) -> String {
    let order: Vec<&str> = dag::statistical_time(&result.dag)
        .into_iter()
        .map(|v| result.dag.names()[v].as_str())
        .collect();
    format!(
        "score\t{}\nempty_score\t{}\npenalty\t{}\narcs\t{}\nstatistical_time\t{}\n",
        result.score,
        result.empty_score,
        penalty,
        result.dag.arcs().len(),
        order.join(" ")
    )
}

fn cmd_learn_dag(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let dir = out_dir(&cfg.out)?.to_path_buf();
    let (log, ds) = load_dataset(cfg, stderr)?;
    let search = SearchConfig {
        penalty: cfg.penalty,
        restarts: cfg.restarts,
        perturbation_size: cfg.perturbation,
        seed: cfg.seed,
        max_iterations: cfg.max_iterations,
        include_status: cfg.include_status,
    };
    let penalty = search.score_config(ds.n_rows()).map_err(CliError::data)?.penalty;
    let result = dag::hill_climb(&ds, &search).map_err(CliError::data)?;
    let report = temporal::conjecture_check(&result.dag, &ingest::deduplicate(&log), cfg.min_support);
    write_file(&dir, "dag.dot", &export::dag_dot(&result.dag, Some(&report)))?;
    write_file(&dir, "score.txt", &score_text(&result, penalty))?;
    write_file(&dir, "agreement.tsv", &export::agreement_tsv(&report))?;
    let fraction = report.agreement_fraction().map(|f| format!("{f:.3}")).unwrap_or_else(|| "n/a".into());
    let _ = writeln!(
        stdout,
        "subjects={} nodes={} arcs={} score={} agreement={}",
        ds.n_rows(),
        result.dag.len(),
        result.dag.arcs().len(),
        result.score,
        fraction
    );
    Ok(())
}

/// Random ground-truth model over `items` variables with a temporal order that is
/// a topological order of its DAG.
pub fn random_model(kind: ModelKind, items: usize, seed: u64, p_agree: f64, density: f64) -> std::result::Result<GroundTruthModel, synth::SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = synth::item_names(items);
    let vars: Vec<VarId> = (0..items).map(VarId).collect();
    let model = match kind {
        ModelKind::Tree => {
            let edges = synth::random_tree_edges(items, &mut rng);
            let f = Forest::new(vars, names, edges.into_iter().map(|(a, b)| (VarId(a), VarId(b))))
                .expect("random tree is a forest");
            GroundTruthModel::symmetric_forest(f, p_agree)?
        }
        ModelKind::Dag => {
            let arcs = synth::random_dag_arcs(items, density, &mut rng);
            let g = Dag::new(vars, names, arcs)?;
            let cpts = synth::random_cpts(&g, 0.05, 0.95, &mut rng);
            GroundTruthModel::dag(g, cpts)?
        }
    };
    let (g, _) = model.as_dag()?;
    let order = dag::statistical_time(&g);
    model.with_temporal_order(order)
}

fn cmd_simulate(a: SimulateArgs, file: &ConfigFile, stdout: &mut dyn Write) -> Result<()> {
    let out: Option<PathBuf> = file.pick(a.out, "out")?;
    let items: usize = file.pick(a.items, "items")?.unwrap_or(10);
    let subjects: usize = file.pick(a.subjects, "subjects")?.unwrap_or(1000);
    let seed: u64 = file.pick(a.seed, "seed")?.unwrap_or(0);
    let year: i32 = file.pick(a.year, "year")?.unwrap_or(2012);
    let kind: ModelKind = file.pick(a.model, "model")?.unwrap_or(ModelKind::Dag);
    let p_agree: f64 = file.pick(a.p_agree, "p-agree")?.unwrap_or(0.9);
    let density: f64 = file.pick(a.density, "density")?.unwrap_or(0.3);
    if items == 0 {
        return Err(CliError::Usage("--items must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p_agree) || !(0.0..=1.0).contains(&density) {
        return Err(CliError::Usage("--p-agree and --density must lie in [0, 1]".into()));
    }
    let dir = out_dir(&out)?.to_path_buf();
    let model = random_model(kind, items, seed, p_agree, density).map_err(CliError::data)?;
    let log = synth::sample_itineraries(&model, subjects, seed, year).map_err(CliError::data)?;

    let mut csv = Vec::new();
    ingest::write_transactions(&log, &mut csv).map_err(CliError::data)?;
    fs::write(dir.join("transactions.csv"), csv).map_err(CliError::data)?;
    let truth = match &model.structure {
        synth::Structure::Forest(f, _) => export::forest_dot(f),
        synth::Structure::Dag(g, _) => export::dag_dot(g, None),
    };
    write_file(&dir, "truth.dot", &truth)?;
    let _ = writeln!(stdout, "subjects={} records={} items={}", subjects, log.records().len(), items);
    Ok(())
}
