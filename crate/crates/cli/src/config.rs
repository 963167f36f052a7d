//! Resolved run configurations.
//!
//! Each subcommand starts from defaults, overlays an optional JSON config file
//! (`--config`, same field names as below) and then any flags given on the
//! command line. The result is written to `run_config.json` next to the outputs.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rashomon_core::learners::GridSpec;
use rashomon_core::measures::{GoldParams, SignTolerance};
use rashomon_core::{GridStrategy, MeasureKind, PerformanceMetric, Variant};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Pdi,
    L2,
    L2der,
}

impl From<MeasureArg> for MeasureKind {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::Pdi => MeasureKind::Pdi,
            MeasureArg::L2 => MeasureKind::L2Profiles,
            MeasureArg::L2der => MeasureKind::L2Derivatives,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Full,
    Greedy,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Full => Variant::Full,
            VariantArg::Greedy => Variant::Greedy,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Cv,
    Test,
}

fn load_file<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Config {
        path: path.to_path_buf(),
        source,
    })
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

// ---------------------------------------------------------------- train

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Use the built-in synthetic clinical cohort instead of `--data`.
    #[arg(long)]
    pub demo: bool,
    #[arg(long)]
    pub target: Option<String>,
    /// Raw label treated as the positive class.
    #[arg(long)]
    pub positive_label: Option<String>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub data: Option<PathBuf>,
    pub demo: bool,
    pub target: Option<String>,
    pub positive_label: Option<String>,
    /// Hyperparameter grid; the built-in random-forest/boosting grid when absent.
    pub grid: Option<GridSpec>,
    pub folds: usize,
    pub repeats: usize,
    /// Held-out fraction for the test AUC; 0 disables the split.
    pub test_fraction: f64,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            data: None,
            demo: false,
            target: None,
            positive_label: None,
            grid: None,
            folds: 5,
            repeats: 1,
            test_fraction: 0.2,
            seed: DEFAULT_SEED,
            out: PathBuf::from("rashomon-train"),
        }
    }
}

impl TrainConfig {
    pub fn resolve(args: TrainArgs) -> CliResult<Self> {
        let mut c: TrainConfig = load_file(args.config.as_deref())?;
        if args.data.is_some() {
            c.data = args.data;
        }
        c.demo |= args.demo;
        if args.target.is_some() {
            c.target = args.target;
        }
        if args.positive_label.is_some() {
            c.positive_label = args.positive_label;
        }
        set(&mut c.folds, args.folds);
        set(&mut c.test_fraction, args.test_fraction);
        set(&mut c.seed, args.seed);
        set(&mut c.out, args.out);
        let mut grid = c.grid.take().unwrap_or_else(|| GridSpec::default_grid(c.seed));
        grid.seed = c.seed;
        grid.repeats = c.repeats;
        c.grid = Some(grid);
        if c.demo == c.data.is_some() {
            return Err(CliError::Usage("give exactly one of --data or --demo".into()));
        }
        if c.data.is_some() && c.target.is_none() {
            return Err(CliError::Usage("--target is required with --data".into()));
        }
        if !(0.0..1.0).contains(&c.test_fraction) {
            return Err(CliError::Usage(format!(
                "test fraction {} outside [0, 1)",
                c.test_fraction
            )));
        }
        Ok(c)
    }
}

// ---------------------------------------------------------------- detect

#[derive(Args, Debug)]
pub struct DetectArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model store written by `train`.
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// Profile-exchange file (alternative to `--models`).
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    /// Background data for profiles; defaults to the full dataset saved by `train`.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Number of models to select; defaults to round(sqrt(|R|)), at least 2.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    pub measure: Option<MeasureArg>,
    #[arg(long)]
    pub grid_size: Option<usize>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    /// Performance metric gating Rashomon membership.
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    /// Use this model as the reference instead of the best one.
    #[arg(long)]
    pub reference: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectConfig {
    pub models: Option<PathBuf>,
    pub profiles: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub target: Option<String>,
    pub epsilon: f64,
    pub k: Option<usize>,
    pub measure: MeasureKind,
    pub grid_size: usize,
    pub grid_strategy: GridStrategy,
    pub variant: Variant,
    pub metric: PerformanceMetric,
    pub reference: Option<String>,
    pub center_profiles: bool,
    pub background_rows: Option<usize>,
    pub gold: GoldParams,
    pub sign_tolerance: SignTolerance,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            models: None,
            profiles: None,
            data: None,
            target: None,
            epsilon: 0.04,
            k: None,
            measure: MeasureKind::Pdi,
            grid_size: 101,
            grid_strategy: GridStrategy::Uniform,
            variant: Variant::Full,
            metric: PerformanceMetric::CvMean,
            reference: None,
            center_profiles: false,
            background_rows: None,
            gold: GoldParams::default(),
            sign_tolerance: SignTolerance::default(),
            seed: DEFAULT_SEED,
            out: PathBuf::from("rashomon-detect"),
        }
    }
}

impl DetectConfig {
    pub fn resolve(args: DetectArgs) -> CliResult<Self> {
        let mut c: DetectConfig = load_file(args.config.as_deref())?;
        if args.models.is_some() {
            c.models = args.models;
        }
        if args.profiles.is_some() {
            c.profiles = args.profiles;
        }
        if args.data.is_some() {
            c.data = args.data;
        }
        if args.target.is_some() {
            c.target = args.target;
        }
        set(&mut c.epsilon, args.epsilon);
        if args.k.is_some() {
            c.k = args.k;
        }
        set(&mut c.measure, args.measure.map(Into::into));
        set(&mut c.grid_size, args.grid_size);
        set(&mut c.variant, args.variant.map(Into::into));
        set(
            &mut c.metric,
            args.metric.map(|m| match m {
                MetricArg::Cv => PerformanceMetric::CvMean,
                MetricArg::Test => PerformanceMetric::Test,
            }),
        );
        if args.reference.is_some() {
            c.reference = args.reference;
        }
        set(&mut c.seed, args.seed);
        set(&mut c.out, args.out);
        if c.models.is_some() == c.profiles.is_some() {
            return Err(CliError::Usage("give exactly one of --models or --profiles".into()));
        }
        Ok(c)
    }
}

// ---------------------------------------------------------------- scenarios

#[derive(Args, Debug)]
pub struct ScenarioArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scenario ids to run (default: all eight).
    #[arg(long, value_delimiter = ',')]
    pub scenarios: Option<Vec<u32>>,
    #[arg(long)]
    pub n_pairs: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub grid_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenarios: Vec<u32>,
    pub n_pairs: usize,
    pub sigma: f64,
    pub grid_size: usize,
    pub gold: GoldParams,
    pub sign_tolerance: SignTolerance,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenarios: (1..=8).collect(),
            n_pairs: 100,
            sigma: rashomon_core::scenarios::DEFAULT_SIGMA,
            grid_size: 101,
            gold: GoldParams::default(),
            sign_tolerance: SignTolerance::default(),
            seed: DEFAULT_SEED,
            out: PathBuf::from("rashomon-scenarios"),
        }
    }
}

impl ScenarioConfig {
    pub fn resolve(args: ScenarioArgs) -> CliResult<Self> {
        let mut c: ScenarioConfig = load_file(args.config.as_deref())?;
        set(&mut c.scenarios, args.scenarios);
        set(&mut c.n_pairs, args.n_pairs);
        set(&mut c.sigma, args.sigma);
        set(&mut c.grid_size, args.grid_size);
        set(&mut c.seed, args.seed);
        set(&mut c.out, args.out);
        Ok(c)
    }
}

// ---------------------------------------------------------------- plots

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// Output directory of a previous `detect` run.
    #[arg(long)]
    pub run: PathBuf,
    /// Where to write the SVGs (default: `<run>/plots`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

// ---------------------------------------------------------------- demo data

#[derive(Args, Debug)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 101)]
    pub rows: usize,
    #[arg(long, default_value_t = rashomon_core::demo::DEMO_SEED)]
    pub seed: u64,
    /// CSV file to write.
    #[arg(long)]
    pub out: PathBuf,
}
