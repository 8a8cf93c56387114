//! Shared experiment protocols: synthetic repetitions, validated trials over
//! a kernel grid, update-scheme comparisons and solver comparisons.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::boost::{
    baseline_fit_with_validation, classify, early_stop_grid, fcg_fit_with_validation_every_k,
    fit_with_validation_design, predict_margin, BaselineScheme, BoostModel, FitConfig, ValidatedFit,
};
use crate::data::{gen_synthetic, test_error, Dataset, Noise, SyntheticConfig};
use crate::dictionary::{Dictionary, KernelKind, DEFAULT_GAUSS_WIDTHS};
use crate::error::{domain, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::solver::{admm_solve, gd_solve, AdmmConfig, AdmmOutput, GdConfig, GdOutput, SolveTrace};

pub const DEFAULT_POLY_DEGREE: u32 = 3;
pub const DEFAULT_REPETITIONS: usize = 20;
pub const DEFAULT_CSV_REPETITIONS: usize = 50;

/// SplitMix64 mix of `base` and `stream`; independent seeds for sub-tasks.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed streams within one repetition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Train = 0,
    Valid = 1,
    Test = 2,
    Dictionary = 3,
    Split = 4,
}

pub fn repetition_seed(seed: u64, rep: usize) -> u64 {
    derive_seed(seed, rep as u64)
}

pub fn stream_seed(seed: u64, rep: usize, stream: Stream) -> u64 {
    derive_seed(repetition_seed(seed, rep), stream as u64)
}

/// Fresh training, validation and test samples for each repetition. Training
/// and validation samples carry `noise`; the test sample is clean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTask {
    pub m_train: usize,
    pub m_valid: usize,
    pub m_test: usize,
    pub noise: Noise,
    pub seed: u64,
}

impl SyntheticTask {
    pub fn new(m: usize, noise: Noise, seed: u64) -> Self {
        Self {
            m_train: m,
            m_valid: m,
            m_test: m,
            noise,
            seed,
        }
    }

    pub fn generate<T: Scalar>(&self, rep: usize) -> Result<Split<T>> {
        let part = |m, noise, stream| {
            gen_synthetic(&SyntheticConfig {
                m,
                noise,
                seed: stream_seed(self.seed, rep, stream),
            })
        };
        Ok(Split {
            train: part(self.m_train, self.noise, Stream::Train)?,
            valid: part(self.m_valid, self.noise, Stream::Valid)?,
            test: part(self.m_test, Noise::None, Stream::Test)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Split<T> {
    pub train: Dataset<T>,
    pub valid: Dataset<T>,
    pub test: Dataset<T>,
}

/// Kernel parameters searched on validation for a family name.
pub fn kernel_grid(family: &str) -> Result<Vec<KernelKind>> {
    Ok(match family {
        "gauss" | "gaussian" => DEFAULT_GAUSS_WIDTHS
            .iter()
            .map(|&width| KernelKind::Gauss { width })
            .collect(),
        "poly" | "polynomial" => vec![KernelKind::Polynomial {
            degree: DEFAULT_POLY_DEGREE,
        }],
        "sigmoid" => vec![KernelKind::Sigmoid],
        "relu" => vec![KernelKind::Relu],
        _ => return domain(format!("unknown dictionary family '{family}'")),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub kernel: KernelKind,
    pub k: usize,
    pub distinct_atoms: usize,
    pub valid_error: f64,
    pub test_error: f64,
    pub train_error: f64,
}

/// Fitted model with the dictionary it refers to.
#[derive(Debug, Clone)]
pub struct Trial<T: Scalar> {
    pub dictionary: Dictionary<T>,
    pub fit: ValidatedFit<T>,
    pub result: TrialResult,
}

pub fn error_on<T: Scalar>(model: &BoostModel<T>, dict: &Dictionary<T>, data: &Dataset<T>) -> Result<f64> {
    let f = predict_margin(model, dict, &data.x)?;
    test_error(&classify(&f), &data.y)
}

/// For each kernel in `kernels`, builds an `n`-atom dictionary from the
/// training inputs and fits FCG with `k` chosen on `grid`; keeps the kernel
/// with the lowest validation error (ties to the earlier kernel). A missing
/// grid means the early-stopping grid for the training size.
pub fn run_trial<T: Scalar>(
    split: &Split<T>,
    kernels: &[KernelKind],
    n: usize,
    cfg: &FitConfig<T>,
    grid: Option<&[usize]>,
    dict_seed: u64,
) -> Result<Trial<T>> {
    if kernels.is_empty() {
        return domain("kernel grid is empty");
    }
    let default_grid;
    let grid = match grid {
        Some(g) => g,
        None => {
            default_grid = early_stop_grid(split.train.len())?;
            &default_grid
        }
    };
    let mut best: Option<(Dictionary<T>, ValidatedFit<T>)> = None;
    for &kernel in kernels {
        let dict = Dictionary::build(&split.train.x, kernel, n, dict_seed)?;
        let a = dict.evaluate(&split.train.x)?;
        let fit = fit_with_validation_design(&a, &split.train.y, &split.valid, &dict, grid, cfg)?;
        if best.as_ref().is_none_or(|(_, b)| fit.valid_error < b.valid_error) {
            best = Some((dict, fit));
        }
    }
    let (dictionary, fit) = best.expect("kernel grid is nonempty");
    let result = TrialResult {
        kernel: dictionary.kind,
        k: fit.k,
        distinct_atoms: fit.model.distinct_atoms(),
        valid_error: fit.valid_error,
        test_error: error_on(&fit.model, &dictionary, &split.test)?,
        train_error: error_on(&fit.model, &dictionary, &split.train)?,
    };
    Ok(Trial {
        dictionary,
        fit,
        result,
    })
}

/// Update rule compared in a scheme comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Method {
    Fcg,
    Baseline { scheme: BaselineScheme },
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::Fcg => "fcg".to_string(),
            Method::Baseline { scheme } => scheme.name().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeResult {
    pub method: String,
    /// Iteration count at the best validation error.
    pub k: usize,
    pub distinct_atoms: usize,
    pub valid_error: f64,
    pub test_error: f64,
    pub train_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeSettings<T> {
    pub fcg: FitConfig<T>,
    /// Step budget of every baseline.
    pub baseline_steps: usize,
}

/// Runs every method on one shared dictionary and design matrix. Each method
/// is stopped at its best validation error over its whole path.
pub fn compare_schemes<T: Scalar>(
    split: &Split<T>,
    dict: &Dictionary<T>,
    methods: &[Method],
    settings: &SchemeSettings<T>,
) -> Result<Vec<SchemeResult>> {
    Ok(compare_schemes_with_fits(split, dict, methods, settings)?
        .into_iter()
        .map(|(result, _)| result)
        .collect())
}

/// [`compare_schemes`] keeping each method's validated fit and training trace.
pub fn compare_schemes_with_fits<T: Scalar>(
    split: &Split<T>,
    dict: &Dictionary<T>,
    methods: &[Method],
    settings: &SchemeSettings<T>,
) -> Result<Vec<(SchemeResult, ValidatedFit<T>)>> {
    let a = dict.evaluate(&split.train.x)?;
    methods
        .iter()
        .map(|&method| {
            let fit = match method {
                Method::Fcg => fcg_fit_with_validation_every_k(&a, &split.train.y, &split.valid, dict, &settings.fcg)?,
                Method::Baseline { scheme } => baseline_fit_with_validation(
                    &a,
                    &split.train.y,
                    &split.valid,
                    dict,
                    scheme,
                    settings.baseline_steps,
                    settings.fcg.loss,
                )?,
            };
            let result = SchemeResult {
                method: method.name(),
                k: fit.k,
                distinct_atoms: fit.model.distinct_atoms(),
                valid_error: fit.valid_error,
                test_error: error_on(&fit.model, dict, &split.test)?,
                train_error: fit_error_on_design(&fit.model, &a, &split.train.y)?,
            };
            Ok((result, fit))
        })
        .collect()
}

fn fit_error_on_design<T: Scalar>(model: &BoostModel<T>, a: &Matrix<T>, y: &[T]) -> Result<f64> {
    test_error(&classify(&model.margins_from_design(a)?), y)
}

/// ADMM and GD run on the same subproblem.
#[derive(Debug, Clone)]
pub struct SolverComparison<T> {
    pub admm: AdmmOutput<T>,
    pub gd: GdOutput<T>,
    /// ADMM objective after its last iteration.
    pub target: T,
    /// Seconds for ADMM to first reach `target`, setup included.
    pub admm_seconds: f64,
    /// Seconds for GD to first reach `target`; `None` if it never does.
    pub gd_seconds: Option<f64>,
    /// GD wall time over its whole run, setup included.
    pub gd_total_seconds: f64,
}

pub fn compare_solvers<T: Scalar>(
    a: &Matrix<T>,
    y: &[T],
    admm: &AdmmConfig<T>,
    gd: &GdConfig<T>,
) -> Result<SolverComparison<T>> {
    // setup (factorization, step-size estimate) is charged to each solver
    let t = Instant::now();
    let admm_out = admm_solve(a, y, admm, None)?;
    let admm_setup = t.elapsed().as_secs_f64() - last_seconds(&admm_out.trace);
    let t = Instant::now();
    let gd_out = gd_solve(a, y, gd)?;
    let gd_total_seconds = t.elapsed().as_secs_f64();
    let gd_setup = gd_total_seconds - last_seconds(&gd_out.trace);
    let target = admm_out.objective();
    let admm_seconds = admm_setup + admm_out.trace.time_to_reach(target).unwrap_or(f64::NAN);
    let gd_seconds = gd_out.trace.time_to_reach(target).map(|s| gd_setup + s);
    Ok(SolverComparison {
        admm: admm_out,
        gd: gd_out,
        target,
        admm_seconds,
        gd_seconds,
        gd_total_seconds,
    })
}

fn last_seconds<T: Scalar>(trace: &SolveTrace<T>) -> f64 {
    trace.records.last().map_or(0.0, |r| r.seconds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

/// Mean and sample standard deviation.
pub fn summarize(values: &[f64]) -> Summary {
    let count = values.len();
    if count == 0 {
        return Summary {
            mean: f64::NAN,
            std: f64::NAN,
            count,
        };
    }
    let mean = values.iter().sum::<f64>() / count as f64;
    let std = if count > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    Summary { mean, std, count }
}
