//! The `sigcurate` command line: configuration, Gram caching and the four
//! subcommands.
//!
//! A run is described by one JSON [`RunConfig`]; flags override its fields.
//! Outputs go to the configured directory and are written atomically.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::fsutil::write_atomic;
use crate::kernels::{gram, read_cache, write_cache, Backend, GramMatrix, KernelConfig};
use crate::paths::{load_dataset, prepare, DatasetFormat, PathConfig};
use crate::select::{
    entropy_curve, faktual_curate, random_entropy_stats, select, CurveStrategy, Objective,
    ObjectiveKind, Selection, SelectionConfig,
};
use crate::spectra::{SpectrumReport, DEFAULT_MU};

pub const GRAM_FILE: &str = "gram.bin";
pub const GRAM_META_FILE: &str = "gram.meta.json";
pub const GRAM_SUMMARY_FILE: &str = "gram_summary.json";
pub const GRAM_TIMING_FILE: &str = "gram_timing.json";
pub const SPECTRUM_FILE: &str = "spectrum.json";
pub const SELECTION_FILE: &str = "selection.json";
pub const SELECTED_IDS_FILE: &str = "selected_ids.txt";
pub const CURVE_FILE: &str = "curve.csv";

/// Failure of a command, carrying its exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Lib(#[from] Error),
}

impl CliError {
    /// 2 for configuration and input validation problems, 1 for failures
    /// during computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Lib(e) => match e {
                Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 2,
                Error::Malformed { .. }
                | Error::InconsistentChannels { .. }
                | Error::EmptyDataset
                | Error::MissingChannel { .. }
                | Error::InvalidTrajectory { .. }
                | Error::DimensionMismatch(..)
                | Error::InvalidConfig(_)
                | Error::BudgetTooLarge { .. } => 2,
                _ => 1,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CachePolicy {
    /// Reuse a matching cached Gram; compute and store it otherwise.
    Read,
    /// Always compute and store the Gram.
    #[default]
    Write,
    /// Compute without touching the cache.
    Off,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSpec {
    pub path: Option<PathBuf>,
    pub format: DatasetFormat,
}

/// `kind` absent means FAKTUAL curation; a kind selects a single objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub kind: Option<ObjectiveKind>,
    pub mu: f64,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            kind: None,
            mu: DEFAULT_MU,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveConfig {
    /// Increasing budgets; empty means `1..=min(m, n)`.
    pub budgets: Vec<usize>,
    pub random_draws: usize,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            budgets: Vec::new(),
            random_draws: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetSpec,
    pub paths: PathConfig,
    pub kernel: KernelConfig,
    pub objective: ObjectiveConfig,
    pub selection: SelectionConfig,
    pub curve: CurveConfig,
    pub out: PathBuf,
    pub cache: CachePolicy,
    /// Include eigenvalues in spectrum reports.
    pub verbose: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSpec::default(),
            paths: PathConfig::default(),
            kernel: KernelConfig::default(),
            objective: ObjectiveConfig::default(),
            selection: SelectionConfig::default(),
            curve: CurveConfig::default(),
            out: PathBuf::from("sigcurate-out"),
            cache: CachePolicy::default(),
            verbose: false,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }

    pub fn dataset_path(&self) -> CliResult<&Path> {
        self.dataset.path.as_deref().ok_or_else(|| {
            CliError::Config("no dataset path given (dataset.path or --dataset)".into())
        })
    }

    pub fn validate(&self) -> CliResult<()> {
        let path = self.dataset_path()?;
        if !path.exists() {
            return Err(CliError::Config(format!(
                "dataset not found: {}",
                path.display()
            )));
        }
        self.paths.validate()?;
        self.kernel.validate()?;
        self.selection.validate()?;
        Objective::logdet(self.objective.mu).validate()?;
        if self.curve.random_draws == 0 {
            return Err(CliError::Config("random_draws must be >= 1".into()));
        }
        Ok(())
    }

    pub fn objective(&self) -> Option<Objective> {
        self.objective.kind.map(|kind| Objective {
            kind,
            mu: self.objective.mu,
        })
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sigcurate",
    version,
    about = "Signature-kernel diversity metrics and curation of demonstration datasets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the Gram matrix and write it to the cache.
    Gram(Overrides),
    /// Report entropy, Vendi score and log-determinant of the dataset.
    Entropy(Overrides),
    /// Select a budget-m subset.
    Curate(Overrides),
    /// Entropy of curated versus random subsets across budgets.
    Curve(Overrides),
}

impl Command {
    pub fn overrides(&self) -> &Overrides {
        match self {
            Command::Gram(o) | Command::Entropy(o) | Command::Curate(o) | Command::Curve(o) => o,
        }
    }
}

/// Flags overriding fields of the JSON configuration.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// dataset.path
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// dataset.format
    #[arg(long, value_enum)]
    pub format: Option<DatasetFormat>,
    /// kernel.backend
    #[arg(long, value_enum)]
    pub backend: Option<Backend>,
    /// kernel.level
    #[arg(long)]
    pub level: Option<u32>,
    /// kernel.pde_refinement
    #[arg(long)]
    pub refinement: Option<u32>,
    /// kernel.rff_dim
    #[arg(long)]
    pub rff_dim: Option<u32>,
    /// kernel.bandwidth
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// kernel.seed and selection.seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// selection.m
    #[arg(long)]
    pub m: Option<u32>,
    /// selection.p
    #[arg(long)]
    pub p: Option<f64>,
    /// selection.algorithm
    #[arg(long, value_enum)]
    pub algorithm: Option<crate::select::Algorithm>,
    /// selection.epsilon
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// objective.mu
    #[arg(long)]
    pub mu: Option<f64>,
    /// objective.kind; omit for FAKTUAL curation
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveKind>,
    /// out
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// cache
    #[arg(long, value_enum)]
    pub cache: Option<CachePolicy>,
    /// curve.budgets
    #[arg(long, value_delimiter = ',')]
    pub budgets: Option<Vec<usize>>,
    /// curve.random_draws
    #[arg(long)]
    pub random_draws: Option<u32>,
    /// verbose
    #[arg(long)]
    pub verbose: bool,
}

impl Overrides {
    /// Loads `--config` (or defaults) and applies every given flag.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_json_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.dataset {
            cfg.dataset.path = Some(v.clone());
        }
        if let Some(v) = self.format {
            cfg.dataset.format = v;
        }
        if let Some(v) = self.backend {
            cfg.kernel.backend = v;
        }
        if let Some(v) = self.level {
            cfg.kernel.level = v as usize;
        }
        if let Some(v) = self.refinement {
            cfg.kernel.pde_refinement = v;
        }
        if let Some(v) = self.rff_dim {
            cfg.kernel.rff_dim = v as usize;
        }
        if let Some(v) = self.bandwidth {
            cfg.kernel.bandwidth = v;
        }
        if let Some(v) = self.seed {
            cfg.kernel.seed = v;
            cfg.selection.seed = v;
        }
        if let Some(v) = self.m {
            cfg.selection.m = v as usize;
        }
        if let Some(v) = self.p {
            cfg.selection.p = v;
        }
        if let Some(v) = self.algorithm {
            cfg.selection.algorithm = v;
        }
        if let Some(v) = self.epsilon {
            cfg.selection.epsilon = v;
        }
        if let Some(v) = self.mu {
            cfg.objective.mu = v;
        }
        if let Some(v) = self.objective {
            cfg.objective.kind = Some(v);
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.cache {
            cfg.cache = v;
        }
        if let Some(v) = &self.budgets {
            cfg.curve.budgets = v.clone();
        }
        if let Some(v) = self.random_draws {
            cfg.curve.random_draws = v as usize;
        }
        cfg.verbose |= self.verbose;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Everything that determines a Gram; stored next to the cache so stale
/// caches are detected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct GramMeta {
    dataset: DatasetSpec,
    paths: PathConfig,
    kernel: KernelConfig,
    raw_self_kernel_range: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GramSource {
    Computed,
    Cache,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramSummary {
    pub n: usize,
    pub backend: Backend,
    pub normalized: bool,
    pub raw_self_kernel_min: f64,
    pub raw_self_kernel_max: f64,
    pub source: GramSource,
}

/// A Gram together with how it was obtained.
pub struct LoadedGram {
    pub gram: GramMatrix,
    pub summary: GramSummary,
    pub seconds: f64,
}

fn to_json(value: &impl Serialize) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable output");
    bytes.push(b'\n');
    bytes
}

fn ensure_out(cfg: &RunConfig) -> CliResult<()> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    Ok(())
}

fn try_cache(cfg: &RunConfig, ids: &[String]) -> Option<(GramMatrix, GramMeta)> {
    let path = cfg.out.join(GRAM_FILE);
    let meta_path = cfg.out.join(GRAM_META_FILE);
    let miss = |why: String| {
        info!("cache miss: {why}");
        None
    };
    let meta: GramMeta = match std::fs::read(&meta_path) {
        Ok(bytes) => match serde_json::from_slice(&bytes) {
            Ok(m) => m,
            Err(e) => return miss(format!("{}: {e}", meta_path.display())),
        },
        Err(e) => return miss(format!("{}: {e}", meta_path.display())),
    };
    if meta.dataset != cfg.dataset || meta.paths != cfg.paths || meta.kernel != cfg.kernel {
        return miss("cached Gram was computed with a different configuration".into());
    }
    let (gram, header) = match read_cache(&path) {
        Ok(v) => v,
        Err(e) => {
            warn!("ignoring unusable cache: {e}");
            return None;
        }
    };
    if header.backend != cfg.kernel.backend
        || header.seed != cfg.kernel.seed
        || header.normalized != cfg.kernel.normalize
        || gram.ids() != ids
    {
        return miss("cache header or ids do not match the dataset".into());
    }
    Some((gram, meta))
}

fn self_kernel_range(gram: &GramMatrix) -> [f64; 2] {
    let diag: Vec<f64> = match gram.raw_diagonal() {
        Some(d) => d.to_vec(),
        None => gram.entries().diagonal().iter().copied().collect(),
    };
    [
        diag.iter().copied().fold(f64::INFINITY, f64::min),
        diag.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    ]
}

/// Loads the dataset and obtains its Gram according to the cache policy.
pub fn obtain_gram(cfg: &RunConfig) -> CliResult<LoadedGram> {
    let demos = load_dataset(cfg.dataset_path()?, cfg.dataset.format)?;
    let trajectories = prepare(&demos, &cfg.paths)?;
    let ids: Vec<String> = trajectories.iter().map(|t| t.id().to_string()).collect();
    let summary = |gram: &GramMatrix, range: [f64; 2], source| GramSummary {
        n: gram.n(),
        backend: cfg.kernel.backend,
        normalized: gram.is_normalized(),
        raw_self_kernel_min: range[0],
        raw_self_kernel_max: range[1],
        source,
    };

    let start = Instant::now();
    if cfg.cache == CachePolicy::Read {
        if let Some((gram, meta)) = try_cache(cfg, &ids) {
            info!(
                "using cached Gram from {}",
                cfg.out.join(GRAM_FILE).display()
            );
            let summary = summary(&gram, meta.raw_self_kernel_range, GramSource::Cache);
            return Ok(LoadedGram {
                gram,
                summary,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
    }

    let gram = gram(&trajectories, &cfg.kernel)?;
    let seconds = start.elapsed().as_secs_f64();
    info!("computed {}x{} Gram in {seconds:.3}s", gram.n(), gram.n());
    let range = self_kernel_range(&gram);
    if cfg.cache != CachePolicy::Off {
        ensure_out(cfg)?;
        write_cache(
            &cfg.out.join(GRAM_FILE),
            &gram,
            cfg.kernel.backend,
            cfg.kernel.seed,
        )?;
        let meta = GramMeta {
            dataset: cfg.dataset.clone(),
            paths: cfg.paths.clone(),
            kernel: cfg.kernel.clone(),
            raw_self_kernel_range: range,
        };
        write_atomic(&cfg.out.join(GRAM_META_FILE), &to_json(&meta))?;
    }
    Ok(LoadedGram {
        summary: summary(&gram, range, GramSource::Computed),
        gram,
        seconds,
    })
}

/// Computes (or reuses) the Gram and writes its summary. The cache itself is
/// always written unless it was reused.
pub fn cmd_gram(cfg: &RunConfig) -> CliResult<GramSummary> {
    let cfg = RunConfig {
        cache: match cfg.cache {
            CachePolicy::Off => CachePolicy::Write,
            other => other,
        },
        ..cfg.clone()
    };
    let loaded = obtain_gram(&cfg)?;
    ensure_out(&cfg)?;
    write_atomic(&cfg.out.join(GRAM_SUMMARY_FILE), &to_json(&loaded.summary))?;
    let timing = serde_json::json!({ "seconds": loaded.seconds, "source": loaded.summary.source });
    write_atomic(&cfg.out.join(GRAM_TIMING_FILE), &to_json(&timing))?;
    Ok(loaded.summary)
}

pub fn cmd_entropy(cfg: &RunConfig) -> CliResult<SpectrumReport> {
    let loaded = obtain_gram(cfg)?;
    let report = SpectrumReport::compute(&loaded.gram, cfg.objective.mu, cfg.verbose)?;
    ensure_out(cfg)?;
    write_atomic(&cfg.out.join(SPECTRUM_FILE), &to_json(&report))?;
    Ok(report)
}

/// FAKTUAL curation, or single-objective selection when an objective kind is
/// configured. Writes the selection JSON and a one-id-per-line file.
pub fn cmd_curate(cfg: &RunConfig) -> CliResult<Selection> {
    let loaded = obtain_gram(cfg)?;
    let selection = match cfg.objective() {
        Some(obj) => select(&loaded.gram, obj, &cfg.selection)?,
        None => faktual_curate(&loaded.gram, &cfg.selection, cfg.objective.mu)?,
    };
    ensure_out(cfg)?;
    write_atomic(&cfg.out.join(SELECTION_FILE), &to_json(&selection))?;
    let ids: String = selection.ids.iter().map(|id| format!("{id}\n")).collect();
    write_atomic(&cfg.out.join(SELECTED_IDS_FILE), ids.as_bytes())?;
    Ok(selection)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub budget: usize,
    pub entropy_faktual: f64,
    pub entropy_random_mean: f64,
    pub entropy_random_min: f64,
    pub entropy_random_max: f64,
}

pub fn cmd_curve(cfg: &RunConfig) -> CliResult<Vec<CurveRow>> {
    let loaded = obtain_gram(cfg)?;
    let g = &loaded.gram;
    let budgets = if cfg.curve.budgets.is_empty() {
        (1..=cfg.selection.m.min(g.n())).collect()
    } else {
        cfg.curve.budgets.clone()
    };
    let faktual = entropy_curve(
        g,
        &budgets,
        CurveStrategy::Faktual,
        &cfg.selection,
        cfg.objective.mu,
    )?;
    let rows = faktual
        .into_iter()
        .map(|(budget, entropy_faktual)| {
            let stats =
                random_entropy_stats(g, budget, cfg.curve.random_draws, cfg.selection.seed)?;
            Ok(CurveRow {
                budget,
                entropy_faktual,
                entropy_random_mean: stats.mean,
                entropy_random_min: stats.min,
                entropy_random_max: stats.max,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        writer
            .serialize(row)
            .map_err(|e| CliError::Lib(Error::io(cfg.out.join(CURVE_FILE), e.into())))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Lib(Error::io(cfg.out.join(CURVE_FILE), e.into_error())))?;
    ensure_out(cfg)?;
    write_atomic(&cfg.out.join(CURVE_FILE), &bytes)?;
    Ok(rows)
}

/// Caps rayon's global pool at `SIGCURATE_THREADS` when set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("SIGCURATE_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::Config(format!(
            "SIGCURATE_THREADS must be a positive integer, got {value:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot configure thread pool: {e}")))
}

/// Runs a parsed command and returns what it prints on stdout.
pub fn run(cli: &Cli) -> CliResult<String> {
    let cfg = cli.command.overrides().resolve()?;
    let mut out = String::new();
    match &cli.command {
        Command::Gram(_) => out.push_str(&String::from_utf8_lossy(&to_json(&cmd_gram(&cfg)?))),
        Command::Entropy(_) => {
            out.push_str(&String::from_utf8_lossy(&to_json(&cmd_entropy(&cfg)?)))
        }
        Command::Curate(_) => out.push_str(&String::from_utf8_lossy(&to_json(&cmd_curate(&cfg)?))),
        Command::Curve(_) => {
            cmd_curve(&cfg)?;
            let path = cfg.out.join(CURVE_FILE);
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            write!(out, "{text}").expect("string write");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("sigcurate").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn defaults() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.kernel.backend, Backend::TruncatedDp);
        assert_eq!(cfg.kernel.level, 5);
        assert_eq!(cfg.kernel.bandwidth, 1.0);
        assert!(!cfg.paths.augment_time);
        assert!(cfg.paths.standardize);
        assert_eq!(cfg.objective.mu, 1e-6);
        assert_eq!(cfg.selection.p, 0.0);
        assert_eq!(
            cfg.selection.algorithm,
            crate::select::Algorithm::GreedyLocal
        );
        assert_eq!(cfg.selection.epsilon, 0.1);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("d.jsonl");
        std::fs::write(&data, "").unwrap();
        let config = dir.path().join("run.json");
        let json = serde_json::json!({
            "dataset": {"path": data, "format": "jsonl"},
            "kernel": {"level": 3, "bandwidth": 0.5},
            "selection": {"m": 4, "p": 0.5},
        });
        std::fs::write(&config, json.to_string()).unwrap();

        let cli = parse(&[
            "curate",
            "--config",
            config.to_str().unwrap(),
            "--level",
            "7",
            "--seed",
            "9",
            "--budgets",
            "1,2,4",
        ]);
        let cfg = cli.command.overrides().resolve().unwrap();
        assert_eq!(cfg.kernel.level, 7);
        assert_eq!(cfg.kernel.bandwidth, 0.5);
        assert_eq!(cfg.selection.m, 4);
        assert_eq!(cfg.selection.p, 0.5);
        assert_eq!((cfg.kernel.seed, cfg.selection.seed), (9, 9));
        assert_eq!(cfg.curve.budgets, vec![1, 2, 4]);
    }

    #[test]
    fn validation_errors_exit_2() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("d.jsonl");
        std::fs::write(&data, "").unwrap();
        let d = data.to_str().unwrap();
        for args in [
            vec!["curate", "--dataset", d, "--p", "1.5"],
            vec!["curate", "--dataset", d, "--epsilon", "0"],
            vec!["gram", "--dataset", d, "--level", "0"],
            vec!["gram", "--dataset", "/nonexistent/data.jsonl"],
            vec!["gram"],
        ] {
            let err = parse(&args).command.overrides().resolve().unwrap_err();
            assert_eq!(err.exit_code(), 2, "{args:?}: {err}");
        }
        let err = parse(&["gram", "--dataset", "/nonexistent/data.jsonl"])
            .command
            .overrides()
            .resolve()
            .unwrap_err();
        assert!(err.to_string().contains("/nonexistent/data.jsonl"));
    }

    #[test]
    fn unknown_config_fields_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let config = dir.path().join("run.json");
        std::fs::write(&config, r#"{"kernel": {"levle": 3}}"#).unwrap();
        let err = RunConfig::from_json_file(&config).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn runtime_errors_exit_1() {
        let e = CliError::Lib(Error::NonFinite {
            context: "x".into(),
        });
        assert_eq!(e.exit_code(), 1);
        assert_eq!(
            CliError::Lib(Error::BudgetTooLarge { m: 3, n: 2 }).exit_code(),
            2
        );
    }
}
