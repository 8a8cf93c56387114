use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fcgboost::boost::{early_stop_grid, fcg_fit_design, BaselineScheme, BoostModel};
use fcgboost::data::{gen_synthetic, load_csv, split, test_error, Dataset, SyntheticConfig};
use fcgboost::experiment::{
    compare_schemes_with_fits, compare_solvers, run_trial, stream_seed, summarize, Method, SchemeSettings,
    Split, Stream, SyntheticTask, Trial,
};
use fcgboost::solver::{GdConfig, SolveTrace};
use fcgboost::{classify, predict_margin, Dictionary, FitConfig, KernelKind, LossKind, Scalar};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::config::{ExperimentConfig, Precision, UsageError};
use crate::output::{ensure_dir, MetricsLog, TraceFile};

pub const MODEL_FILE_FORMAT: &str = "fcgboost-model-file-v1";

/// Which sample `synth` writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Part {
    Train,
    Valid,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Axis {
    Losses,
    Solvers,
    Schemes,
    K,
    N,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::Losses => "losses",
            Axis::Solvers => "solvers",
            Axis::Schemes => "schemes",
            Axis::K => "k",
            Axis::N => "n",
        }
    }
}

/// Provenance fields every printed row starts with.
fn provenance(command: &str, cfg: &ExperimentConfig, digest: &str, rep: usize) -> Map<String, Value> {
    let mut row = Map::new();
    row.insert("command".into(), json!(command));
    row.insert("config_digest".into(), json!(digest));
    row.insert("seed".into(), json!(cfg.seed));
    row.insert("rep".into(), json!(rep));
    row.insert("precision".into(), json!(cfg.precision.to_string()));
    row
}

/// Training, validation and test samples of one repetition.
enum Source<T: Scalar> {
    Synthetic(SyntheticTask),
    Csv(Dataset<T>),
}

impl<T: Scalar> Source<T> {
    fn open(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(match &cfg.data {
            None => Source::Synthetic(SyntheticTask::new(cfg.m, cfg.noise, cfg.seed)),
            Some(path) => {
                let data = load_csv(path, &cfg.csv.schema()?).with_context(|| format!("loading {}", path.display()))?;
                for w in &data.meta.warnings {
                    eprintln!("warning: {w}");
                }
                Source::Csv(data)
            }
        })
    }

    fn split(&self, cfg: &ExperimentConfig, rep: usize) -> Result<Split<T>> {
        Ok(match self {
            Source::Synthetic(task) => task.generate(rep)?,
            Source::Csv(data) => {
                let (train, valid, test) = split(data, cfg.split, stream_seed(cfg.seed, rep, Stream::Split))?;
                Split { train, valid, test }
            }
        })
    }
}

fn dict_seed(cfg: &ExperimentConfig, rep: usize) -> u64 {
    stream_seed(cfg.seed, rep, Stream::Dictionary)
}

fn trial<T: Scalar>(
    cfg: &ExperimentConfig,
    split: &Split<T>,
    kernels: &[KernelKind],
    n: usize,
    loss: LossKind,
    grid: Option<&[usize]>,
    rep: usize,
) -> Result<Trial<T>> {
    let grid = grid.or(cfg.k.as_deref());
    Ok(run_trial(split, kernels, n, &cfg.fit_config(loss), grid, dict_seed(cfg, rep))?)
}

pub fn synth(cfg: &ExperimentConfig, part: Part, output: Option<PathBuf>) -> Result<()> {
    let digest = cfg.digest();
    let (stream, noise) = match part {
        Part::Train => (Stream::Train, cfg.noise),
        Part::Valid => (Stream::Valid, cfg.noise),
        Part::Test => (Stream::Test, fcgboost::Noise::None),
    };
    let seed = stream_seed(cfg.seed, cfg.rep, stream);
    let data: Dataset<f64> = gen_synthetic(&SyntheticConfig { m: cfg.m, noise, seed })?;
    let path = match output {
        Some(p) => p,
        None => {
            ensure_dir(&cfg.out)?;
            cfg.out.join(format!("synth_{}_rep{}.csv", part_name(part), cfg.rep))
        }
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    data.save(&path).with_context(|| format!("writing {}", path.display()))?;
    let mut row = provenance("synth", cfg, &digest, cfg.rep);
    row.insert("part".into(), json!(part_name(part)));
    row.insert("sample_seed".into(), json!(seed));
    row.insert("rows".into(), json!(data.len()));
    row.insert("noise".into(), json!(noise.to_string()));
    row.insert("realized_noise".into(), json!(data.meta.realized_noise));
    row.insert("path".into(), json!(path.display().to_string()));
    println!("{}", serde_json::to_string(&row)?);
    Ok(())
}

fn part_name(part: Part) -> &'static str {
    match part {
        Part::Train => "train",
        Part::Valid => "valid",
        Part::Test => "test",
    }
}

/// Self-contained fitted model: dictionary, coefficients and the config that
/// produced them.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ModelFile<T> {
    pub format: String,
    pub precision: String,
    pub config: String,
    pub config_digest: String,
    pub seed: u64,
    pub rep: usize,
    pub dictionary: Dictionary<T>,
    pub model: BoostModel<T>,
}

#[derive(Deserialize)]
struct ModelHeader {
    format: String,
    precision: String,
}

pub fn fit(cfg: &ExperimentConfig, model_path: Option<PathBuf>) -> Result<()> {
    match cfg.precision {
        Precision::F32 => fit_as::<f32>(cfg, model_path),
        Precision::F64 => fit_as::<f64>(cfg, model_path),
    }
}

fn fit_as<T: Scalar>(cfg: &ExperimentConfig, model_path: Option<PathBuf>) -> Result<()> {
    let digest = cfg.digest();
    let split = Source::<T>::open(cfg)?.split(cfg, cfg.rep)?;
    let t = trial(cfg, &split, &cfg.kernels, cfg.n, cfg.loss, None, cfg.rep)?;

    ensure_dir(&cfg.out)?;
    let model_path = model_path.unwrap_or_else(|| cfg.out.join("model.json"));
    let file = ModelFile {
        format: MODEL_FILE_FORMAT.to_string(),
        precision: cfg.precision.to_string(),
        config: cfg.to_text(),
        config_digest: digest.clone(),
        seed: cfg.seed,
        rep: cfg.rep,
        dictionary: t.dictionary.clone(),
        model: t.fit.model.clone(),
    };
    std::fs::write(&model_path, serde_json::to_string(&file)?)
        .with_context(|| format!("writing {}", model_path.display()))?;
    let trace_path = cfg.out.join(format!("trace_fit_rep{}.csv", cfg.rep));
    let mut trace = TraceFile::boosting(&trace_path)?;
    trace.push_boosting("fit", cfg.rep, &t.fit.trace)?;

    let r = &t.result;
    let mut row = provenance("fit", cfg, &digest, cfg.rep);
    row.insert("kernel".into(), json!(r.kernel.to_string()));
    row.insert("loss".into(), json!(cfg.loss.to_string()));
    row.insert("k".into(), json!(r.k));
    row.insert("distinct_atoms".into(), json!(r.distinct_atoms));
    row.insert("train_error".into(), json!(r.train_error));
    row.insert("valid_error".into(), json!(r.valid_error));
    row.insert("test_error".into(), json!(r.test_error));
    row.insert("test_accuracy".into(), json!(1.0 - r.test_error));
    row.insert("valid_path".into(), json!(t.fit.path));
    row.insert("model".into(), json!(model_path.display().to_string()));
    MetricsLog::open(&cfg.out)?.emit(&row)
}

/// Evaluates a saved model on `cfg.data` when given, otherwise on the test
/// sample regenerated from the model's own config and repetition. A data file
/// without a `label` setting is read in the `synth` output format.
pub fn eval(cfg: &ExperimentConfig, model_path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(model_path).with_context(|| format!("reading {}", model_path.display()))?;
    let header: ModelHeader =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", model_path.display()))?;
    if header.format != MODEL_FILE_FORMAT {
        bail!("{}: unsupported model format '{}'", model_path.display(), header.format);
    }
    match header.precision.parse::<Precision>().map_err(UsageError)? {
        Precision::F32 => eval_as::<f32>(cfg, &text, model_path),
        Precision::F64 => eval_as::<f64>(cfg, &text, model_path),
    }
}

fn eval_as<T: Scalar>(cfg: &ExperimentConfig, text: &str, model_path: &Path) -> Result<()> {
    let file: ModelFile<T> = serde_json::from_str(text).with_context(|| format!("parsing {}", model_path.display()))?;
    let fit_cfg = ExperimentConfig::from_text(&file.config)
        .with_context(|| format!("{}: stored config", model_path.display()))?;
    let (data, source) = match &cfg.data {
        Some(path) if !cfg.csv.label.is_empty() => (
            load_csv::<T>(path, &cfg.csv.schema()?).with_context(|| format!("loading {}", path.display()))?,
            path.display().to_string(),
        ),
        Some(path) => (
            Dataset::<T>::load(path).with_context(|| format!("loading {}", path.display()))?,
            path.display().to_string(),
        ),
        None => (
            Source::<T>::open(&fit_cfg)?.split(&fit_cfg, file.rep)?.test,
            "test split".to_string(),
        ),
    };
    let margins = predict_margin(&file.model, &file.dictionary, &data.x)?;
    let predicted = classify(&margins);
    let err = test_error(&predicted, &data.y)?;

    let mut row = provenance("eval", &fit_cfg, &file.config_digest, file.rep);
    row.insert("model".into(), json!(model_path.display().to_string()));
    row.insert("data".into(), json!(source));
    row.insert("samples".into(), json!(data.len()));
    row.insert("kernel".into(), json!(file.dictionary.kind.to_string()));
    row.insert("k".into(), json!(file.model.k));
    row.insert("distinct_atoms".into(), json!(file.model.distinct_atoms()));
    row.insert("test_error".into(), json!(err));
    row.insert("test_accuracy".into(), json!(1.0 - err));
    MetricsLog::open(&cfg.out)?.emit(&row)
}

/// Mean and standard deviation of each (cell, metric) over repetitions.
#[derive(Default)]
struct Table {
    cells: Vec<(String, String, Vec<f64>)>,
}

impl Table {
    fn add(&mut self, cell: &str, metric: &str, value: f64) {
        match self.cells.iter_mut().find(|(c, m, _)| c == cell && m == metric) {
            Some((_, _, values)) => values.push(value),
            None => self.cells.push((cell.to_string(), metric.to_string(), vec![value])),
        }
    }

    fn write(&self, path: &Path, axis: &str, digest: &str, seed: u64, reps: usize) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(["axis", "cell", "metric", "mean", "std", "count", "config_digest", "seed", "reps"])?;
        eprintln!("compare {axis}: config_digest={digest} seed={seed} reps={reps}");
        for (cell, metric, values) in &self.cells {
            let s = summarize(values);
            w.write_record([
                axis.to_string(),
                cell.clone(),
                metric.clone(),
                s.mean.to_string(),
                s.std.to_string(),
                s.count.to_string(),
                digest.to_string(),
                seed.to_string(),
                reps.to_string(),
            ])?;
            eprintln!("  {cell:<16} {metric:<16} mean {:.6}  sd {:.6}  n {}", s.mean, s.std, s.count);
        }
        w.flush()?;
        Ok(())
    }
}

pub fn compare(cfg: &ExperimentConfig, axis: Axis) -> Result<()> {
    match cfg.precision {
        Precision::F32 => compare_as::<f32>(cfg, axis),
        Precision::F64 => compare_as::<f64>(cfg, axis),
    }
}

fn compare_as<T: Scalar>(cfg: &ExperimentConfig, axis: Axis) -> Result<()> {
    let digest = cfg.digest();
    let reps = cfg.repetitions();
    let source = Source::<T>::open(cfg)?;
    ensure_dir(&cfg.out)?;
    let mut log = MetricsLog::open(&cfg.out)?;
    let trace_path = cfg.out.join(format!("trace_{}.csv", axis.name()));
    let mut trace = match axis {
        Axis::Solvers => TraceFile::solver(&trace_path)?,
        _ => TraceFile::boosting(&trace_path)?,
    };
    let mut table = Table::default();

    for rep in 0..reps {
        let split = source.split(cfg, rep)?;
        let base = provenance("compare", cfg, &digest, rep);
        let mut rows = Vec::new();
        match axis {
            Axis::Losses => {
                for &loss in &cfg.losses {
                    let t = trial(cfg, &split, &cfg.kernels, cfg.n, loss, None, rep)?;
                    trace.push_boosting(loss.name(), rep, &t.fit.trace)?;
                    rows.push((loss.name().to_string(), trial_metrics(&t)));
                }
            }
            Axis::K => {
                let grid = match &cfg.k {
                    Some(k) => k.clone(),
                    None => early_stop_grid(split.train.len())?,
                };
                for &k in &grid {
                    let t = trial(cfg, &split, &cfg.kernels, cfg.n, cfg.loss, Some(&[k]), rep)?;
                    trace.push_boosting(&k.to_string(), rep, &t.fit.trace)?;
                    rows.push((k.to_string(), trial_metrics(&t)));
                }
            }
            Axis::N => {
                for &n in &cfg.n_grid {
                    let t = trial(cfg, &split, &cfg.kernels, n, cfg.loss, None, rep)?;
                    trace.push_boosting(&n.to_string(), rep, &t.fit.trace)?;
                    rows.push((n.to_string(), trial_metrics(&t)));
                }
            }
            Axis::Schemes => {
                // kernel chosen by validated FCG, then shared by every scheme
                let kernel = match cfg.kernels.as_slice() {
                    [only] => *only,
                    kernels => trial(cfg, &split, kernels, cfg.n, cfg.loss, None, rep)?.result.kernel,
                };
                let dict = Dictionary::build(&split.train.x, kernel, cfg.n, dict_seed(cfg, rep))?;
                let mut methods = vec![Method::Fcg];
                methods.extend(cfg.schemes().into_iter().map(|scheme: BaselineScheme| Method::Baseline { scheme }));
                let settings = SchemeSettings {
                    fcg: FitConfig {
                        k_max: cfg.fcg_steps,
                        ..cfg.fit_config(cfg.loss)
                    },
                    baseline_steps: cfg.baseline_steps,
                };
                for (r, fit) in compare_schemes_with_fits(&split, &dict, &methods, &settings)? {
                    trace.push_boosting(&r.method, rep, &fit.trace)?;
                    let mut m = Map::new();
                    m.insert("kernel".into(), json!(kernel.to_string()));
                    m.insert("k".into(), json!(r.k));
                    m.insert("distinct_atoms".into(), json!(r.distinct_atoms));
                    m.insert("train_error".into(), json!(r.train_error));
                    m.insert("valid_error".into(), json!(r.valid_error));
                    m.insert("test_error".into(), json!(r.test_error));
                    rows.push((r.method, m));
                }
            }
            Axis::Solvers => {
                for (cell, m, solve) in solver_rows(cfg, &split, rep)? {
                    trace.push_solver(cell, rep, &solve)?;
                    rows.push((cell.to_string(), m));
                }
            }
        }
        for (cell, metrics) in rows {
            let mut row = base.clone();
            row.insert("axis".into(), json!(axis.name()));
            row.insert("cell".into(), json!(cell));
            for (key, value) in &metrics {
                if let Some(v) = value.as_f64().filter(|_| key != "kernel") {
                    table.add(&cell, key, v);
                }
            }
            row.extend(metrics);
            log.emit(&row)?;
        }
    }
    table.write(
        &cfg.out.join(format!("compare_{}.csv", axis.name())),
        axis.name(),
        &digest,
        cfg.seed,
        reps,
    )
}

fn trial_metrics<T: Scalar>(t: &Trial<T>) -> Map<String, Value> {
    let r = &t.result;
    let mut m = Map::new();
    m.insert("kernel".into(), json!(r.kernel.to_string()));
    m.insert("k".into(), json!(r.k));
    m.insert("distinct_atoms".into(), json!(r.distinct_atoms));
    m.insert("train_error".into(), json!(r.train_error));
    m.insert("valid_error".into(), json!(r.valid_error));
    m.insert("test_error".into(), json!(r.test_error));
    m
}

/// Cell name, metrics and per-iteration trace of one solver.
type SolverCell<T> = (&'static str, Map<String, Value>, SolveTrace<T>);

/// ADMM and gradient descent on the refit subproblem of the first
/// grid iteration: the design restricted to the atoms FCG selected so far.
fn solver_rows<T: Scalar>(
    cfg: &ExperimentConfig,
    split: &Split<T>,
    rep: usize,
) -> Result<Vec<SolverCell<T>>> {
    let kernel = cfg.kernels[0];
    let dict = Dictionary::build(&split.train.x, kernel, cfg.n, dict_seed(cfg, rep))?;
    let s = match &cfg.k {
        Some(k) => k.iter().copied().filter(|&k| k > 0).min(),
        None => early_stop_grid(split.train.len())?.first().copied(),
    }
    .unwrap_or(1);
    let a = dict.evaluate(&split.train.x)?;
    let fit_cfg = FitConfig {
        k_max: s,
        ..cfg.fit_config(cfg.loss)
    };
    let (model, _) = fcg_fit_design(&a, &split.train.y, &fit_cfg, &dict.digest())?;
    let sub = dict.evaluate_columns(&model.selected, &split.train.x)?;
    let gd = GdConfig {
        max_iter: cfg.gd_iters,
        ..GdConfig::default()
    };
    let c = compare_solvers(&sub, &split.train.y, &cfg.admm(), &gd)?;
    let at = |trace: &SolveTrace<T>, iter: usize| {
        trace
            .records
            .iter()
            .take_while(|r| r.iter <= iter)
            .last()
            .map(|r| r.objective.as_f64())
    };
    let common = |m: &mut Map<String, Value>| {
        m.insert("kernel".into(), json!(kernel.to_string()));
        m.insert("atoms".into(), json!(model.selected.len()));
        m.insert("target".into(), json!(c.target.as_f64()));
    };
    let mut admm = Map::new();
    common(&mut admm);
    admm.insert("iterations".into(), json!(c.admm.trace.records.len()));
    admm.insert("objective".into(), json!(at(&c.admm.trace, cfg.admm_iters)));
    admm.insert("seconds_to_target".into(), json!(c.admm_seconds));
    let mut gdm = Map::new();
    common(&mut gdm);
    gdm.insert("iterations".into(), json!(c.gd.trace.records.len()));
    gdm.insert("objective".into(), json!(at(&c.gd.trace, cfg.admm_iters)));
    gdm.insert("final_objective".into(), json!(c.gd.objective().as_f64()));
    gdm.insert("seconds_to_target".into(), json!(c.gd_seconds));
    Ok(vec![("admm", admm, c.admm.trace), ("gd", gdm, c.gd.trace)])
}

