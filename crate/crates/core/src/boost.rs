//! Fully-corrective greedy boosting and partially-corrective baselines.
//!
//! FCG keeps an ordered support `T^k`. Each iteration adds the atom most
//! correlated with the negative risk gradient, then refits the coefficients
//! of every selected atom jointly with ADMM. Supports are nested, so a single
//! fit to `k_max` yields the models for every smaller `k`.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{test_error, Dataset, Features};
use crate::dictionary::{atom_correlations_into, Dictionary};
use crate::error::{domain, Error, Result};
use crate::linalg::{axpy, Matrix};
use crate::loss::{risk_gradient_into, risk_of_predictions, LossKind};
use crate::scalar::Scalar;
use crate::solver::{admm_with_factor, AdmmConfig, AdmmState, NormalFactor};

pub const MODEL_FORMAT: &str = "fcgboost-model-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// `argmax_j c_j`
    Signed,
    /// `argmax_j |c_j|`
    #[default]
    Absolute,
}

impl FromStr for SelectionRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signed" => Ok(SelectionRule::Signed),
            "absolute" | "abs" => Ok(SelectionRule::Absolute),
            _ => Err(Error::Parse(format!("unknown selection rule '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FitConfig<T> {
    pub k_max: usize,
    pub selection_rule: SelectionRule,
    pub solver: AdmmConfig<T>,
    /// Stop when the best selection score is at most this.
    pub stall_tol: T,
    pub loss: LossKind,
}

impl<T: Scalar> FitConfig<T> {
    pub fn new(k_max: usize) -> Self {
        Self {
            k_max,
            selection_rule: SelectionRule::Absolute,
            solver: AdmmConfig::default(),
            stall_tol: T::lit(1e-12),
            loss: LossKind::SquaredHinge,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return domain("k_max must be at least 1");
        }
        if !(self.stall_tol >= T::zero()) {
            return domain("stall_tol must be nonnegative");
        }
        self.solver.validate()
    }
}

/// `f = Σ_{j ∈ selected} coefficient_j g_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BoostModel<T> {
    pub format: String,
    /// Atom indices in order of first selection; distinct.
    pub selected: Vec<usize>,
    pub coefficients: Vec<T>,
    pub dictionary_digest: String,
    /// Boosting iterations run.
    pub k: usize,
}

impl<T: Scalar> BoostModel<T> {
    pub fn empty(dictionary_digest: impl Into<String>) -> Self {
        Self {
            format: MODEL_FORMAT.to_string(),
            selected: Vec::new(),
            coefficients: Vec::new(),
            dictionary_digest: dictionary_digest.into(),
            k: 0,
        }
    }

    pub fn distinct_atoms(&self) -> usize {
        self.selected.len()
    }

    /// Margins from a full design matrix whose columns are dictionary atoms.
    pub fn margins_from_design(&self, a: &Matrix<T>) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); a.rows()];
        for (&j, &c) in self.selected.iter().zip(&self.coefficients) {
            if j >= a.cols() {
                return domain(format!("atom {j} outside design matrix with {} columns", a.cols()));
            }
            axpy(c, a.col(j), &mut out);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct IterRecord<T> {
    pub k: usize,
    pub atom: usize,
    /// Training empirical risk after the update.
    pub risk: T,
    pub max_corr: T,
    pub solver_iters: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TrainTrace<T> {
    pub records: Vec<IterRecord<T>>,
}

impl<T: Scalar> TrainTrace<T> {
    pub fn risks(&self) -> Vec<T> {
        self.records.iter().map(|r| r.risk).collect()
    }

    /// CSV with columns `k,atom,risk,max_corr,solver_iters,seconds`.
    pub fn write_csv<W: Write>(&self, mut w: W, with_header: bool) -> Result<()> {
        if with_header {
            writeln!(w, "k,atom,risk,max_corr,solver_iters,seconds")?;
        }
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.k, r.atom, r.risk, r.max_corr, r.solver_iters, r.seconds
            )?;
        }
        Ok(())
    }
}

/// Best candidate outside `already` under `rule`; ties go to the smallest index.
pub fn select_atom<T: Scalar>(correlations: &[T], already: &[usize], rule: SelectionRule) -> Result<usize> {
    let mut mask = vec![false; correlations.len()];
    for &j in already {
        if j < mask.len() {
            mask[j] = true;
        }
    }
    select_masked(correlations, &mask, rule).map(|(j, _)| j)
}

fn select_masked<T: Scalar>(correlations: &[T], excluded: &[bool], rule: SelectionRule) -> Result<(usize, T)> {
    let mut best: Option<(usize, T)> = None;
    for (j, &c) in correlations.iter().enumerate() {
        if excluded.get(j).copied().unwrap_or(false) {
            continue;
        }
        let score = match rule {
            SelectionRule::Signed => c,
            SelectionRule::Absolute => c.abs(),
        };
        // strict comparison keeps the first maximizer
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((j, score));
        }
    }
    best.ok_or(Error::Exhausted(correlations.len()))
}

/// Outcome of one boosting step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step<T> {
    Advanced(IterRecord<T>),
    /// No candidate scored above `stall_tol`, or the dictionary is exhausted.
    Stalled,
}

/// Incremental FCG fit over a precomputed training design matrix.
pub struct FcgFitter<'a, T: Scalar> {
    a: &'a Matrix<T>,
    y: &'a [T],
    cfg: FitConfig<T>,
    digest: String,
    selected: Vec<usize>,
    in_support: Vec<bool>,
    support: Matrix<T>,
    factor: NormalFactor<T>,
    coefficients: Vec<T>,
    predictions: Vec<T>,
    risk: T,
    grad: Vec<T>,
    corr: Vec<T>,
    trace: TrainTrace<T>,
    start: Instant,
    stalled: bool,
}

impl<'a, T: Scalar> FcgFitter<'a, T> {
    pub fn new(a: &'a Matrix<T>, y: &'a [T], cfg: FitConfig<T>, dictionary_digest: impl Into<String>) -> Result<Self> {
        cfg.validate()?;
        if y.len() != a.rows() {
            return domain(format!("{} labels for {} design rows", y.len(), a.rows()));
        }
        if a.rows() == 0 || a.cols() == 0 {
            return domain("design matrix must be nonempty");
        }
        let m = a.rows();
        let predictions = vec![T::zero(); m];
        let risk = risk_of_predictions(cfg.loss, &predictions, y);
        let support = Matrix::zeros(m, 0);
        let factor = NormalFactor::new(&support, cfg.solver.gamma, cfg.solver.alpha)?;
        Ok(Self {
            a,
            y,
            cfg,
            digest: dictionary_digest.into(),
            selected: Vec::new(),
            in_support: vec![false; a.cols()],
            support,
            factor,
            coefficients: Vec::new(),
            predictions,
            risk,
            grad: vec![T::zero(); m],
            corr: vec![T::zero(); a.cols()],
            trace: TrainTrace::default(),
            start: Instant::now(),
            stalled: false,
        })
    }

    pub fn k(&self) -> usize {
        self.trace.records.len()
    }

    pub fn risk(&self) -> T {
        self.risk
    }

    pub fn predictions(&self) -> &[T] {
        &self.predictions
    }

    pub fn trace(&self) -> &TrainTrace<T> {
        &self.trace
    }

    pub fn model(&self) -> BoostModel<T> {
        BoostModel {
            format: MODEL_FORMAT.to_string(),
            selected: self.selected.clone(),
            coefficients: self.coefficients.clone(),
            dictionary_digest: self.digest.clone(),
            k: self.k(),
        }
    }

    pub fn into_parts(self) -> (BoostModel<T>, TrainTrace<T>) {
        let model = self.model();
        (model, self.trace)
    }

    pub fn step(&mut self) -> Result<Step<T>> {
        if self.stalled {
            return Ok(Step::Stalled);
        }
        let k = self.k() + 1;
        risk_gradient_into(self.cfg.loss, &self.predictions, self.y, &mut self.grad);
        atom_correlations_into(self.a, &self.grad, &mut self.corr);
        let (j, score) = match select_masked(&self.corr, &self.in_support, self.cfg.selection_rule) {
            Ok(found) => found,
            Err(Error::Exhausted(_)) => {
                self.stalled = true;
                return Ok(Step::Stalled);
            }
            Err(e) => return Err(e),
        };
        if score <= self.cfg.stall_tol {
            self.stalled = true;
            return Ok(Step::Stalled);
        }

        let wrap = |e: Error| Error::Boosting {
            iteration: k,
            source: Box::new(e),
        };
        self.factor.push_column(&self.support, self.a.col(j)).map_err(wrap)?;
        self.selected.push(j);
        self.in_support[j] = true;
        self.support.push_column(self.a.col(j))?;
        let mut u0 = self.coefficients.clone();
        u0.push(T::zero());

        let init = AdmmState::warm(&self.support, u0.clone()).map_err(wrap)?;
        let out = admm_with_factor(
            self.cfg.loss,
            &self.support,
            self.y,
            &self.cfg.solver,
            Some(init),
            &self.factor,
        )
        .map_err(wrap)?;

        // the warm start already attains the previous risk; never accept a worse iterate
        let solved = self.support.matvec(&out.u)?;
        let solved_risk = risk_of_predictions(self.cfg.loss, &solved, self.y);
        if solved_risk <= self.risk {
            self.coefficients = out.u;
            self.predictions = solved;
            self.risk = solved_risk;
        } else {
            self.coefficients = u0;
        }

        let record = IterRecord {
            k,
            atom: j,
            risk: self.risk,
            max_corr: score,
            solver_iters: out.state.iter,
            seconds: self.start.elapsed().as_secs_f64(),
        };
        self.trace.records.push(record);
        Ok(Step::Advanced(record))
    }
}

/// FCG boosting on the design matrix `a` (rows: samples, columns: atoms).
pub fn fcg_fit_design<T: Scalar>(
    a: &Matrix<T>,
    y: &[T],
    cfg: &FitConfig<T>,
    dictionary_digest: &str,
) -> Result<(BoostModel<T>, TrainTrace<T>)> {
    let mut fitter = FcgFitter::new(a, y, *cfg, dictionary_digest)?;
    while fitter.k() < cfg.k_max {
        if let Step::Stalled = fitter.step()? {
            break;
        }
    }
    Ok(fitter.into_parts())
}

/// FCG boosting of `data` over `dict`.
pub fn fcg_fit<T: Scalar>(
    data: &Dataset<T>,
    dict: &Dictionary<T>,
    cfg: &FitConfig<T>,
) -> Result<(BoostModel<T>, TrainTrace<T>)> {
    cfg.validate()?;
    let a = dict.evaluate(&data.x)?;
    fcg_fit_design(&a, &data.y, cfg, &dict.digest())
}

/// `f(x) = Σ_j coefficient_j g_j(x)` for every input row.
pub fn predict_margin<T: Scalar>(model: &BoostModel<T>, dict: &Dictionary<T>, x: &Features<T>) -> Result<Vec<T>> {
    if model.dictionary_digest != dict.digest() {
        return domain(format!(
            "model was fit with dictionary {}, got {}",
            model.dictionary_digest,
            dict.digest()
        ));
    }
    let mut out = vec![T::zero(); x.len()];
    for (&j, &c) in model.selected.iter().zip(&model.coefficients) {
        let col = dict.evaluate_atom(j, x)?;
        axpy(c, &col, &mut out);
    }
    Ok(out)
}

/// Sign with `sgn(0) = +1`.
pub fn classify<T: Scalar>(margins: &[T]) -> Vec<T> {
    margins
        .iter()
        .map(|&t| if t >= T::zero() { T::one() } else { -T::one() })
        .collect()
}

/// `min{1, |t|} sgn(t)`.
pub fn truncate<T: Scalar>(t: T) -> T {
    if t > T::one() {
        T::one()
    } else if t < -T::one() {
        -T::one()
    } else {
        t
    }
}

/// `[c, 2c, 3c, 4c, 5c]` with `c = ⌈√(m / ln m)⌉`.
pub fn early_stop_grid(m: usize) -> Result<Vec<usize>> {
    if m < 2 {
        return domain(format!("early stopping grid needs m >= 2, got {m}"));
    }
    let mf = m as f64;
    let c = (mf / mf.ln()).sqrt().ceil() as usize;
    Ok((1..=5).map(|i| i * c).collect())
}

/// Validation inputs with cached atom columns.
pub struct Validator<'a, T: Scalar> {
    dict: &'a Dictionary<T>,
    data: &'a Dataset<T>,
    columns: HashMap<usize, Vec<T>>,
}

impl<'a, T: Scalar> Validator<'a, T> {
    pub fn new(dict: &'a Dictionary<T>, data: &'a Dataset<T>) -> Result<Self> {
        if data.dim() != dict.dim {
            return domain("validation inputs do not match the dictionary dimension");
        }
        Ok(Self {
            dict,
            data,
            columns: HashMap::new(),
        })
    }

    pub fn column(&mut self, j: usize) -> Result<&[T]> {
        if !self.columns.contains_key(&j) {
            let col = self.dict.evaluate_atom(j, &self.data.x)?;
            self.columns.insert(j, col);
        }
        Ok(&self.columns[&j])
    }

    pub fn margins(&mut self, model: &BoostModel<T>) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.data.len()];
        for (&j, &c) in model.selected.iter().zip(&model.coefficients) {
            axpy(c, self.column(j)?, &mut out);
        }
        Ok(out)
    }

    pub fn error_of_margins(&self, margins: &[T]) -> Result<f64> {
        test_error(&classify(margins), &self.data.y)
    }

    pub fn error(&mut self, model: &BoostModel<T>) -> Result<f64> {
        let margins = self.margins(model)?;
        self.error_of_margins(&margins)
    }
}

#[derive(Debug, Clone)]
pub struct ValidatedFit<T: Scalar> {
    pub model: BoostModel<T>,
    /// Chosen iteration count.
    pub k: usize,
    pub valid_error: f64,
    /// `(k, validation error)` at every candidate examined.
    pub path: Vec<(usize, f64)>,
    pub trace: TrainTrace<T>,
}

/// Fits once to the largest grid value and keeps the model whose validation
/// error is lowest; ties go to the smallest `k`. A grid entry of 0 stands for
/// the empty model. Supports are nested, so a grid value beyond a stall
/// reuses the final model.
pub fn fit_with_validation<T: Scalar>(
    train: &Dataset<T>,
    valid: &Dataset<T>,
    dict: &Dictionary<T>,
    grid: &[usize],
    cfg: &FitConfig<T>,
) -> Result<ValidatedFit<T>> {
    let a = dict.evaluate(&train.x)?;
    fit_with_validation_design(&a, &train.y, valid, dict, grid, cfg)
}

pub fn fit_with_validation_design<T: Scalar>(
    a: &Matrix<T>,
    y: &[T],
    valid: &Dataset<T>,
    dict: &Dictionary<T>,
    grid: &[usize],
    cfg: &FitConfig<T>,
) -> Result<ValidatedFit<T>> {
    if grid.is_empty() {
        return domain("validation grid must be nonempty");
    }
    let mut grid = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    // k = 0 is the empty model; the fitter still needs a positive budget
    let k_max = (*grid.last().expect("nonempty grid")).max(1);
    let cfg = FitConfig { k_max, ..*cfg };
    let mut fitter = FcgFitter::new(a, y, cfg, dict.digest())?;
    let mut validator = Validator::new(dict, valid)?;
    let mut best: Option<(f64, usize, BoostModel<T>)> = None;
    let mut path = Vec::with_capacity(grid.len());
    for &k in &grid {
        while fitter.k() < k {
            if let Step::Stalled = fitter.step()? {
                break;
            }
        }
        let model = fitter.model();
        let err = validator.error(&model)?;
        path.push((k, err));
        if best.as_ref().is_none_or(|(e, _, _)| err < *e) {
            best = Some((err, k, model));
        }
    }
    let (valid_error, k, model) = best.expect("grid is nonempty");
    Ok(ValidatedFit {
        model,
        k,
        valid_error,
        path,
        trace: fitter.trace().clone(),
    })
}

/// Partially-corrective update rules. Each step selects one atom and moves
/// only its coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum BaselineScheme {
    /// Exact line search along the selected atom.
    Orig,
    /// Line-search step scaled by `nu`.
    Shrinkage { nu: f64 },
    /// Fixed step `epsilon` in the direction of the line-search optimum.
    Epsilon { epsilon: f64 },
}

impl BaselineScheme {
    pub const DEFAULT_NU: f64 = 0.1;
    pub const DEFAULT_EPSILON: f64 = 0.01;

    pub fn validate(&self) -> Result<()> {
        match *self {
            BaselineScheme::Shrinkage { nu } if !(nu > 0.0 && nu <= 1.0) => {
                domain(format!("shrinkage factor must be in (0, 1], got {nu}"))
            }
            BaselineScheme::Epsilon { epsilon } if !(epsilon > 0.0 && epsilon.is_finite()) => {
                domain(format!("epsilon step must be positive, got {epsilon}"))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BaselineScheme::Orig => "orig",
            BaselineScheme::Shrinkage { .. } => "shrinkage",
            BaselineScheme::Epsilon { .. } => "epsilon",
        }
    }
}

impl fmt::Display for BaselineScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaselineScheme::Orig => write!(f, "orig"),
            BaselineScheme::Shrinkage { nu } => write!(f, "shrinkage:{nu}"),
            BaselineScheme::Epsilon { epsilon } => write!(f, "epsilon:{epsilon}"),
        }
    }
}

impl FromStr for BaselineScheme {
    type Err = Error;

    /// `orig`, `shrinkage[:NU]`, `epsilon[:EPS]`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = s.split_once(':').map_or((s, None), |(a, b)| (a, Some(b)));
        let num = |default: f64| -> Result<f64> {
            arg.map_or(Ok(default), |v| {
                v.trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("invalid scheme parameter in '{s}'")))
            })
        };
        let scheme = match name.trim() {
            "orig" => BaselineScheme::Orig,
            "shrinkage" | "rs" => BaselineScheme::Shrinkage {
                nu: num(Self::DEFAULT_NU)?,
            },
            "epsilon" | "eps" => BaselineScheme::Epsilon {
                epsilon: num(Self::DEFAULT_EPSILON)?,
            },
            _ => return Err(Error::Parse(format!("unknown scheme '{s}'"))),
        };
        scheme.validate()?;
        Ok(scheme)
    }
}

/// Bisection on the directional derivative of the risk along `g`; returns the
/// minimizer and the number of derivative evaluations.
fn line_search<T: Scalar>(loss: LossKind, predictions: &[T], y: &[T], g: &[T], slope_at_zero: T) -> (T, usize) {
    let inv_m = T::one() / T::lit(y.len() as f64);
    let slope = |beta: T| -> T {
        let mut s = T::zero();
        for ((&f, &yi), &gi) in predictions.iter().zip(y).zip(g) {
            if gi != T::zero() {
                s += loss.derivative_unchecked(yi * (f + beta * gi)) * yi * gi;
            }
        }
        s * inv_m
    };
    if slope_at_zero == T::zero() {
        return (T::zero(), 0);
    }
    // descend in the direction opposite the slope
    let dir = if slope_at_zero < T::zero() { T::one() } else { -T::one() };
    // derivative along dir; negative until the minimizer is passed
    let along = |beta: T| dir * slope(dir * beta);
    let mut evals = 0;
    let mut lo = T::zero();
    let mut hi = T::one();
    while evals < 200 {
        evals += 1;
        if along(hi) >= T::zero() {
            break;
        }
        lo = hi;
        hi = hi + hi;
    }
    let tol = T::lit(1e-10);
    while hi - lo > tol && evals < 400 {
        evals += 1;
        let mid = (lo + hi) / T::two();
        if mid == lo || mid == hi {
            break;
        }
        if along(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (dir * (lo + hi) / T::two(), evals)
}

/// One coefficient update of a baseline step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Update<T> {
    pub atom: usize,
    pub delta: T,
}

/// Incremental partially-corrective boosting (atoms may repeat).
pub struct BaselineFitter<'a, T: Scalar> {
    a: &'a Matrix<T>,
    y: &'a [T],
    scheme: BaselineScheme,
    loss: LossKind,
    rule: SelectionRule,
    stall_tol: T,
    digest: String,
    position: HashMap<usize, usize>,
    selected: Vec<usize>,
    coefficients: Vec<T>,
    predictions: Vec<T>,
    grad: Vec<T>,
    corr: Vec<T>,
    trace: TrainTrace<T>,
    last: Option<Update<T>>,
    start: Instant,
    stalled: bool,
}

impl<'a, T: Scalar> BaselineFitter<'a, T> {
    pub fn new(
        a: &'a Matrix<T>,
        y: &'a [T],
        scheme: BaselineScheme,
        loss: LossKind,
        rule: SelectionRule,
        dictionary_digest: impl Into<String>,
    ) -> Result<Self> {
        scheme.validate()?;
        if y.len() != a.rows() {
            return domain(format!("{} labels for {} design rows", y.len(), a.rows()));
        }
        if a.rows() == 0 || a.cols() == 0 {
            return domain("design matrix must be nonempty");
        }
        Ok(Self {
            a,
            y,
            scheme,
            loss,
            rule,
            stall_tol: T::lit(1e-12),
            digest: dictionary_digest.into(),
            position: HashMap::new(),
            selected: Vec::new(),
            coefficients: Vec::new(),
            predictions: vec![T::zero(); a.rows()],
            grad: vec![T::zero(); a.rows()],
            corr: vec![T::zero(); a.cols()],
            trace: TrainTrace::default(),
            last: None,
            start: Instant::now(),
            stalled: false,
        })
    }

    pub fn k(&self) -> usize {
        self.trace.records.len()
    }

    pub fn last_update(&self) -> Option<Update<T>> {
        self.last
    }

    pub fn predictions(&self) -> &[T] {
        &self.predictions
    }

    pub fn trace(&self) -> &TrainTrace<T> {
        &self.trace
    }

    pub fn model(&self) -> BoostModel<T> {
        BoostModel {
            format: MODEL_FORMAT.to_string(),
            selected: self.selected.clone(),
            coefficients: self.coefficients.clone(),
            dictionary_digest: self.digest.clone(),
            k: self.k(),
        }
    }

    pub fn step(&mut self) -> Result<Step<T>> {
        if self.stalled {
            return Ok(Step::Stalled);
        }
        let k = self.k() + 1;
        risk_gradient_into(self.loss, &self.predictions, self.y, &mut self.grad);
        atom_correlations_into(self.a, &self.grad, &mut self.corr);
        let (j, score) = select_masked(&self.corr, &[], self.rule)?;
        if score <= self.stall_tol {
            self.stalled = true;
            return Ok(Step::Stalled);
        }
        let g = self.a.col(j);
        // d/dβ R(f + β g) at β = 0 is -c_j
        let (beta, evals) = line_search(self.loss, &self.predictions, self.y, g, -self.corr[j]);
        let delta = match self.scheme {
            BaselineScheme::Orig => beta,
            BaselineScheme::Shrinkage { nu } => T::lit(nu) * beta,
            BaselineScheme::Epsilon { epsilon } => T::lit(epsilon) * beta.signum(),
        };
        if !delta.is_finite() {
            return Err(Error::Boosting {
                iteration: k,
                source: Box::new(Error::Numerical {
                    context: "line search",
                    iteration: evals,
                }),
            });
        }
        axpy(delta, g, &mut self.predictions);
        let pos = *self.position.entry(j).or_insert_with(|| {
            self.selected.push(j);
            self.coefficients.push(T::zero());
            self.selected.len() - 1
        });
        self.coefficients[pos] += delta;
        self.last = Some(Update { atom: j, delta });
        let record = IterRecord {
            k,
            atom: j,
            risk: risk_of_predictions(self.loss, &self.predictions, self.y),
            max_corr: score,
            solver_iters: evals,
            seconds: self.start.elapsed().as_secs_f64(),
        };
        self.trace.records.push(record);
        Ok(Step::Advanced(record))
    }
}

/// Runs a baseline scheme for up to `k_max` steps.
pub fn baseline_fit<T: Scalar>(
    data: &Dataset<T>,
    dict: &Dictionary<T>,
    scheme: BaselineScheme,
    k_max: usize,
) -> Result<(BoostModel<T>, TrainTrace<T>)> {
    let a = dict.evaluate(&data.x)?;
    baseline_fit_design(&a, &data.y, scheme, k_max, LossKind::SquaredHinge, &dict.digest())
}

pub fn baseline_fit_design<T: Scalar>(
    a: &Matrix<T>,
    y: &[T],
    scheme: BaselineScheme,
    k_max: usize,
    loss: LossKind,
    dictionary_digest: &str,
) -> Result<(BoostModel<T>, TrainTrace<T>)> {
    if k_max == 0 {
        return domain("k_max must be at least 1");
    }
    let mut fitter = BaselineFitter::new(a, y, scheme, loss, SelectionRule::Absolute, dictionary_digest)?;
    while fitter.k() < k_max {
        if let Step::Stalled = fitter.step()? {
            break;
        }
    }
    let model = fitter.model();
    Ok((model, fitter.trace))
}

/// Runs a baseline for `k_max` steps and returns the iterate with the lowest
/// validation error (ties to the earliest).
pub fn baseline_fit_with_validation<T: Scalar>(
    a: &Matrix<T>,
    y: &[T],
    valid: &Dataset<T>,
    dict: &Dictionary<T>,
    scheme: BaselineScheme,
    k_max: usize,
    loss: LossKind,
) -> Result<ValidatedFit<T>> {
    if k_max == 0 {
        return domain("k_max must be at least 1");
    }
    let mut fitter = BaselineFitter::new(a, y, scheme, loss, SelectionRule::Absolute, dict.digest())?;
    let mut validator = Validator::new(dict, valid)?;
    let mut margins = vec![T::zero(); valid.len()];
    let mut best: Option<(f64, usize, BoostModel<T>)> = None;
    let mut path = Vec::new();
    while fitter.k() < k_max {
        if let Step::Stalled = fitter.step()? {
            break;
        }
        let up = fitter.last_update().expect("advanced step records its update");
        axpy(up.delta, validator.column(up.atom)?, &mut margins);
        let err = validator.error_of_margins(&margins)?;
        path.push((fitter.k(), err));
        if best.as_ref().is_none_or(|(e, _, _)| err < *e) {
            best = Some((err, fitter.k(), fitter.model()));
        }
    }
    let (valid_error, k, model) = best.unwrap_or_else(|| (f64::NAN, 0, fitter.model()));
    Ok(ValidatedFit {
        model,
        k,
        valid_error,
        path,
        trace: fitter.trace().clone(),
    })
}

/// FCG to `k_max`, validating after every iteration.
pub fn fcg_fit_with_validation_every_k<T: Scalar>(
    a: &Matrix<T>,
    y: &[T],
    valid: &Dataset<T>,
    dict: &Dictionary<T>,
    cfg: &FitConfig<T>,
) -> Result<ValidatedFit<T>> {
    let grid: Vec<usize> = (1..=cfg.k_max).collect();
    fit_with_validation_design(a, y, valid, dict, &grid, cfg)
}
