//! Flat `key = value` experiment configuration.
//!
//! Precedence, lowest first: built-in defaults, the `--config` file, the
//! `FCGBOOST_OUT_DIR` environment variable (output directory only), then
//! command-line flags. Every key can appear in the file or as `--key`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fcgboost::boost::BaselineScheme;
use fcgboost::data::{ColumnRef, CsvSchema, PositiveSet};
use fcgboost::experiment::{kernel_grid, DEFAULT_CSV_REPETITIONS, DEFAULT_REPETITIONS};
use fcgboost::{AdmmConfig, FitConfig, KernelKind, LossKind, Noise, Scalar, SelectionRule};
use sha2::{Digest, Sha256};

pub const OUT_DIR_ENV: &str = "FCGBOOST_OUT_DIR";

/// Bad configuration value or unknown key. Maps to the usage exit code.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        })
    }
}

impl FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "f32" | "single" => Ok(Precision::F32),
            "f64" | "double" => Ok(Precision::F64),
            _ => Err(format!("unknown precision '{s}' (f32 | f64)")),
        }
    }
}

/// Raw CSV schema strings, kept verbatim so the canonical text round-trips.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSource {
    pub label: String,
    pub positive: String,
    pub features: String,
}

impl Default for CsvSource {
    fn default() -> Self {
        Self {
            label: String::new(),
            positive: "1".to_string(),
            features: String::new(),
        }
    }
}

impl CsvSource {
    pub fn schema(&self) -> Result<CsvSchema, UsageError> {
        if self.label.is_empty() {
            return usage("a CSV data file needs a label column");
        }
        let label = self.label.parse::<ColumnRef>().map_err(|e| UsageError(format!("label: {e}")))?;
        let positive = self
            .positive
            .parse::<PositiveSet>()
            .map_err(|e| UsageError(format!("positive: {e}")))?;
        let features = if self.features.trim().is_empty() || self.features.trim() == "all" {
            None
        } else {
            Some(
                self.features
                    .split(',')
                    .map(|c| c.parse::<ColumnRef>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| UsageError(format!("features: {e}")))?,
            )
        };
        Ok(CsvSchema {
            label,
            positive,
            features,
        })
    }
}

/// Every setting of every subcommand. Commands ignore keys they do not use.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// `None` means 20 for synthetic data and 50 for CSV data.
    pub reps: Option<usize>,
    /// Repetition index used by `synth`, `fit` and `eval`.
    pub rep: usize,
    pub precision: Precision,
    pub m: usize,
    pub noise: Noise,
    /// `None` means synthetic data.
    pub data: Option<PathBuf>,
    pub csv: CsvSource,
    pub split: (f64, f64, f64),
    pub kernels: Vec<KernelKind>,
    /// Text form of `kernels` as given (a family name or a list).
    pub kernel_text: String,
    pub n: usize,
    pub loss: LossKind,
    pub selection: SelectionRule,
    /// `None` means the early-stopping grid for the training size.
    pub k: Option<Vec<usize>>,
    pub gamma: f64,
    pub alpha: f64,
    pub admm_iters: usize,
    pub admm_tol: f64,
    pub stall_tol: f64,
    pub gd_iters: usize,
    /// FCG iteration budget in the scheme comparison.
    pub fcg_steps: usize,
    pub baseline_steps: usize,
    pub nu: f64,
    pub epsilon: f64,
    pub losses: Vec<LossKind>,
    pub n_grid: Vec<usize>,
    pub out: PathBuf,
}

/// Recognized keys in canonical order, with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("seed", "base seed; every sample, split and dictionary seed derives from it"),
    ("reps", "repetitions per cell for compare (default 20 synthetic, 50 csv)"),
    ("rep", "repetition index for synth, fit and eval"),
    ("precision", "f32 | f64"),
    ("m", "synthetic sample size of each of train, validation and test"),
    ("noise", "none | uniform:LEVEL | outlier:TOL,RATIO"),
    ("data", "CSV file; empty for synthetic data"),
    ("label", "label column (index or header name) of the CSV file"),
    ("positive", "label values mapped to +1: 1,2 | 1..4 | >0"),
    ("features", "feature columns of the CSV file, comma separated, or all"),
    ("split", "train,valid,test fractions of the CSV file"),
    ("kernel", "dictionary family (gauss | poly | sigmoid | relu) or kernels like gauss:0.5,gauss:1"),
    ("n", "dictionary size"),
    ("loss", "squared-hinge | square | hinge | cubed-hinge"),
    ("selection", "absolute | signed"),
    ("k", "iteration grid searched on validation, comma separated, or auto"),
    ("gamma", "ADMM augmented Lagrangian parameter"),
    ("alpha", "ADMM proximal weight"),
    ("admm_iters", "ADMM iterations per boosting step"),
    ("admm_tol", "ADMM stopping tolerance (0 runs all iterations)"),
    ("stall_tol", "stop boosting when the best correlation is at most this"),
    ("gd_iters", "gradient descent iteration cap in the solver comparison"),
    ("fcg_steps", "FCG iteration budget in compare --axis schemes"),
    ("baseline_steps", "step budget of each baseline booster"),
    ("nu", "shrinkage factor of the shrinkage baseline"),
    ("epsilon", "step of the epsilon baseline"),
    ("losses", "losses compared by compare --axis losses"),
    ("n_grid", "dictionary sizes compared by compare --axis n"),
    ("out", "output directory"),
];

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            reps: None,
            rep: 0,
            precision: Precision::F64,
            m: 1000,
            noise: Noise::None,
            data: None,
            csv: CsvSource::default(),
            split: (0.6, 0.2, 0.2),
            kernels: kernel_grid("gauss").expect("known family"),
            kernel_text: "gauss".to_string(),
            n: 1000,
            loss: LossKind::SquaredHinge,
            selection: SelectionRule::Absolute,
            k: None,
            gamma: 1.0,
            alpha: 1.0,
            admm_iters: 100,
            admm_tol: 0.0,
            stall_tol: 1e-12,
            gd_iters: 10_000,
            fcg_steps: 500,
            baseline_steps: 5000,
            nu: BaselineScheme::DEFAULT_NU,
            epsilon: BaselineScheme::DEFAULT_EPSILON,
            losses: LossKind::ALL.to_vec(),
            n_grid: vec![250, 500, 1000, 2000],
            out: PathBuf::from("out"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, UsageError>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| UsageError(format!("invalid value '{value}' for {key}: {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, UsageError>
where
    T::Err: fmt::Display,
{
    let items = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect::<Result<Vec<T>, _>>()?;
    if items.is_empty() {
        return usage(format!("{key} needs at least one value"));
    }
    Ok(items)
}

fn positive(key: &str, v: f64) -> Result<f64, UsageError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        usage(format!("{key} must be positive, got {v}"))
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Splits `key = value` lines; `#` starts a comment line.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>, UsageError> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return usage(format!("line {}: expected key = value, got '{line}'", i + 1));
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), UsageError> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "seed" => self.seed = parse(&key, v)?,
            "reps" => {
                self.reps = match v {
                    "" | "auto" => None,
                    _ => match parse::<usize>(&key, v)? {
                        0 => return usage("reps must be at least 1"),
                        r => Some(r),
                    },
                }
            }
            "rep" => self.rep = parse(&key, v)?,
            "precision" => self.precision = parse(&key, v)?,
            "m" => {
                self.m = parse(&key, v)?;
                if self.m < 2 {
                    return usage("m must be at least 2");
                }
            }
            "noise" => self.noise = parse(&key, v)?,
            "data" => self.data = Some(PathBuf::from(v)).filter(|p| !p.as_os_str().is_empty()),
            "label" => self.csv.label = v.to_string(),
            "positive" => self.csv.positive = v.to_string(),
            "features" => self.csv.features = v.to_string(),
            "split" => {
                let f: Vec<f64> = parse_list(&key, v)?;
                if f.len() != 3 || f.iter().any(|x| x.is_nan() || *x <= 0.0) || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return usage(format!("split must be three positive fractions summing to 1, got '{v}'"));
                }
                self.split = (f[0], f[1], f[2]);
            }
            "kernel" => {
                self.kernels = if v.contains(':') || v.contains(',') {
                    parse_list(&key, v)?
                } else {
                    kernel_grid(v).map_err(|e| UsageError(format!("kernel: {e}")))?
                };
                self.kernel_text = v.to_string();
            }
            "n" => {
                self.n = parse(&key, v)?;
                if self.n == 0 {
                    return usage("n must be positive");
                }
            }
            "loss" => self.loss = parse(&key, v)?,
            "selection" => self.selection = parse(&key, v)?,
            "k" => {
                self.k = match v {
                    "" | "auto" => None,
                    _ => Some(parse_list(&key, v)?),
                }
            }
            "gamma" => self.gamma = positive(&key, parse(&key, v)?)?,
            "alpha" => self.alpha = positive(&key, parse(&key, v)?)?,
            "admm_iters" => self.admm_iters = parse(&key, v)?,
            "admm_tol" => self.admm_tol = parse(&key, v)?,
            "stall_tol" => self.stall_tol = parse(&key, v)?,
            "gd_iters" => self.gd_iters = parse(&key, v)?,
            "fcg_steps" => self.fcg_steps = parse(&key, v)?,
            "baseline_steps" => self.baseline_steps = parse(&key, v)?,
            "nu" => self.nu = positive(&key, parse(&key, v)?)?,
            "epsilon" => self.epsilon = positive(&key, parse(&key, v)?)?,
            "losses" => self.losses = parse_list(&key, v)?,
            "n_grid" => {
                self.n_grid = parse_list(&key, v)?;
                if self.n_grid.contains(&0) {
                    return usage("n_grid entries must be positive");
                }
            }
            "out" => self.out = PathBuf::from(v),
            _ => return usage(format!("unknown config key '{key}'")),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), UsageError> {
        for (k, v) in parse_kv(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, UsageError> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config file {}: {e}", path.display())))?;
        self.apply_text(&text)
            .map_err(|e| UsageError(format!("{}: {}", path.display(), e.0)))
    }

    /// Cross-field checks run once all sources are applied.
    pub fn validate(&self) -> Result<(), UsageError> {
        if !self.csv.label.is_empty() {
            self.csv.schema()?;
        }
        if self.admm_iters == 0 {
            return usage("admm_iters must be positive");
        }
        self.admm::<f64>()
            .validate()
            .map_err(|e| UsageError(e.to_string()))?;
        Ok(())
    }

    pub fn repetitions(&self) -> usize {
        self.reps.unwrap_or(if self.data.is_some() {
            DEFAULT_CSV_REPETITIONS
        } else {
            DEFAULT_REPETITIONS
        })
    }

    pub fn admm<T: Scalar>(&self) -> AdmmConfig<T> {
        AdmmConfig {
            gamma: T::lit(self.gamma),
            alpha: T::lit(self.alpha),
            max_iter: self.admm_iters,
            tol: T::lit(self.admm_tol),
        }
    }

    pub fn fit_config<T: Scalar>(&self, loss: LossKind) -> FitConfig<T> {
        FitConfig {
            selection_rule: self.selection,
            solver: self.admm(),
            stall_tol: T::lit(self.stall_tol),
            loss,
            ..FitConfig::new(1)
        }
    }

    pub fn schemes(&self) -> Vec<BaselineScheme> {
        vec![
            BaselineScheme::Orig,
            BaselineScheme::Shrinkage { nu: self.nu },
            BaselineScheme::Epsilon { epsilon: self.epsilon },
        ]
    }

    fn value_of(&self, key: &str) -> String {
        match key {
            "seed" => self.seed.to_string(),
            "reps" => self.reps.map_or("auto".to_string(), |r| r.to_string()),
            "rep" => self.rep.to_string(),
            "precision" => self.precision.to_string(),
            "m" => self.m.to_string(),
            "noise" => self.noise.to_string(),
            "data" => self.data.as_ref().map_or(String::new(), |p| p.display().to_string()),
            "label" => self.csv.label.clone(),
            "positive" => self.csv.positive.clone(),
            "features" => self.csv.features.clone(),
            "split" => format!("{},{},{}", self.split.0, self.split.1, self.split.2),
            "kernel" => self.kernel_text.clone(),
            "n" => self.n.to_string(),
            "loss" => self.loss.to_string(),
            "selection" => match self.selection {
                SelectionRule::Absolute => "absolute".to_string(),
                SelectionRule::Signed => "signed".to_string(),
            },
            "k" => self.k.as_ref().map_or("auto".to_string(), |k| join(k)),
            "gamma" => self.gamma.to_string(),
            "alpha" => self.alpha.to_string(),
            "admm_iters" => self.admm_iters.to_string(),
            "admm_tol" => self.admm_tol.to_string(),
            "stall_tol" => self.stall_tol.to_string(),
            "gd_iters" => self.gd_iters.to_string(),
            "fcg_steps" => self.fcg_steps.to_string(),
            "baseline_steps" => self.baseline_steps.to_string(),
            "nu" => self.nu.to_string(),
            "epsilon" => self.epsilon.to_string(),
            "losses" => join(&self.losses),
            "n_grid" => join(&self.n_grid),
            "out" => self.out.display().to_string(),
            _ => unreachable!("key list and renderer agree"),
        }
    }

    /// Every key in canonical order. Reading it back gives the same config.
    pub fn to_text(&self) -> String {
        KEYS.iter()
            .map(|(k, _)| format!("{k} = {}\n", self.value_of(k)))
            .collect()
    }

    /// Hash of the canonical text without `out` and `rep`; identifies the
    /// experiment independently of where results go and which repetition ran.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (k, _) in KEYS.iter().filter(|(k, _)| !matches!(*k, "out" | "rep")) {
            h.update(format!("{k} = {}\n", self.value_of(k)));
        }
        let full = format!("{:x}", h.finalize());
        full[..16].to_string()
    }
}
