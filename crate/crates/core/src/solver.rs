//! Solvers for the fully-corrective subproblem
//!
//! ```text
//! min_u  F(u) = (1/m) Σ_i φ(y_i (A u)_i)
//! ```
//!
//! over the columns `A` of the currently selected atoms.
//!
//! [`admm_solve`] splits `v = A u` and alternates
//!
//! ```text
//! u ← (γ AᵀA + α I)⁻¹ (Aᵀ(γ v + w) + α u)
//! v_i ← argmin_v φ(y_i v) + (mγ/2)(v - (A u)_i + w_i/γ)²
//! w ← w + γ (v - A u)
//! ```
//!
//! where the `v` step is a closed-form scalar prox. The `u` step reuses one
//! Cholesky factor for the whole solve. [`gd_solve`] is plain gradient
//! descent on `F`, kept as a baseline.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{dot, norm2, norm_inf, power_iteration_gram, Cholesky, Matrix};
use crate::loss::{risk_gradient_into, risk_of_predictions, LossKind};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AdmmConfig<T> {
    /// Augmented Lagrangian parameter.
    pub gamma: T,
    /// Proximal weight on the `u` step.
    pub alpha: T,
    pub max_iter: usize,
    /// Stop once `‖v - Au‖₂ + ‖u - u_prev‖₂ ≤ tol`; `0` runs all `max_iter` steps.
    pub tol: T,
}

impl<T: Scalar> Default for AdmmConfig<T> {
    fn default() -> Self {
        Self {
            gamma: T::one(),
            alpha: T::one(),
            max_iter: 100,
            tol: T::zero(),
        }
    }
}

impl<T: Scalar> AdmmConfig<T> {
    /// Near-exact solves for checks that assume exact refits.
    pub fn high_accuracy() -> Self {
        Self {
            tol: T::lit(1e-10),
            max_iter: 100_000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > T::zero() && self.gamma.is_finite()) {
            return domain(format!("admm gamma must be positive, got {}", self.gamma));
        }
        if !(self.alpha > T::zero() && self.alpha.is_finite()) {
            return domain(format!("admm alpha must be positive, got {}", self.alpha));
        }
        if self.max_iter == 0 {
            return domain("admm max_iter must be at least 1");
        }
        if !(self.tol >= T::zero()) {
            return domain(format!("admm tol must be nonnegative, got {}", self.tol));
        }
        Ok(())
    }
}

/// ADMM iterate: coefficients `u`, split variable `v ≈ Au`, multiplier `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AdmmState<T> {
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub w: Vec<T>,
    pub iter: usize,
}

impl<T: Scalar> AdmmState<T> {
    /// `(u, v, w) = (0, y, 0)`.
    pub fn initial(y: &[T], s: usize) -> Self {
        Self {
            u: vec![T::zero(); s],
            v: y.to_vec(),
            w: vec![T::zero(); y.len()],
            iter: 0,
        }
    }

    /// Warm start from coefficients `u0`: `v = A u0`, `w = 0`.
    pub fn warm(a: &Matrix<T>, u0: Vec<T>) -> Result<Self> {
        let v = a.matvec(&u0)?;
        Ok(Self {
            w: vec![T::zero(); a.rows()],
            v,
            u: u0,
            iter: 0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SolveRecord<T> {
    pub iter: usize,
    pub objective: T,
    /// `‖v - Au‖₂` for ADMM, `‖∇F‖₂` for gradient descent.
    pub residual: T,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SolveTrace<T> {
    pub records: Vec<SolveRecord<T>>,
}

impl<T: Scalar> SolveTrace<T> {
    pub fn last_objective(&self) -> Option<T> {
        self.records.last().map(|r| r.objective)
    }

    /// Seconds elapsed when the objective first dropped to `target` or below.
    pub fn time_to_reach(&self, target: T) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.objective <= target)
            .map(|r| r.seconds)
    }

    /// CSV with columns `iter,objective,primal_residual,seconds`.
    pub fn write_csv<W: Write>(&self, mut w: W, with_header: bool) -> Result<()> {
        if with_header {
            writeln!(w, "iter,objective,primal_residual,seconds")?;
        }
        for r in &self.records {
            writeln!(w, "{},{},{},{}", r.iter, r.objective, r.residual, r.seconds)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AdmmOutput<T> {
    pub u: Vec<T>,
    pub state: AdmmState<T>,
    pub trace: SolveTrace<T>,
    /// Whether the tolerance test fired before `max_iter`.
    pub converged: bool,
}

impl<T: Scalar> AdmmOutput<T> {
    pub fn objective(&self) -> T {
        self.trace.last_objective().unwrap_or_else(T::nan)
    }
}

/// Cholesky factor of `γ AᵀA + α I`, reused by every `u` step of one solve.
#[derive(Debug, Clone)]
pub struct NormalFactor<T> {
    chol: Cholesky<T>,
    gamma: T,
    alpha: T,
}

impl<T: Scalar> NormalFactor<T> {
    pub fn new(a: &Matrix<T>, gamma: T, alpha: T) -> Result<Self> {
        let mut m = a.gram();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                m[(i, j)] *= gamma;
            }
            m[(i, i)] += alpha;
        }
        Ok(Self {
            chol: Cholesky::new(&m)?,
            gamma,
            alpha,
        })
    }

    /// Updates the factor of `a` to that of `[a, col]` in `O(m s + s²)`.
    pub fn push_column(&mut self, a: &Matrix<T>, col: &[T]) -> Result<()> {
        if a.cols() != self.dim() || col.len() != a.rows() {
            return domain("appended column does not match the factored design");
        }
        let cross: Vec<T> = a.columns().map(|c| self.gamma * dot(c, col)).collect();
        let diag = self.gamma * dot(col, col) + self.alpha;
        self.chol.append(&cross, diag)
    }

    pub fn dim(&self) -> usize {
        self.chol.dim()
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        self.chol.solve(rhs)
    }
}

/// Factor `γ AᵀA + α I` once for a fixed design submatrix.
pub fn cache_factorization<T: Scalar>(a: &Matrix<T>, gamma: T, alpha: T) -> Result<NormalFactor<T>> {
    NormalFactor::new(a, gamma, alpha)
}

/// `F(u)` for the given loss.
pub fn subproblem_objective<T: Scalar>(loss: LossKind, a: &Matrix<T>, y: &[T], u: &[T]) -> Result<T> {
    check_problem(a, y)?;
    let au = a.matvec(u)?;
    Ok(risk_of_predictions(loss, &au, y))
}

/// `∇F(u) = Aᵀ r` with `r` the risk gradient at `Au`.
pub fn subproblem_gradient<T: Scalar>(loss: LossKind, a: &Matrix<T>, y: &[T], u: &[T]) -> Result<Vec<T>> {
    check_problem(a, y)?;
    let au = a.matvec(u)?;
    let mut r = vec![T::zero(); y.len()];
    risk_gradient_into(loss, &au, y, &mut r);
    a.tr_matvec(&r)
}

fn check_problem<T: Scalar>(a: &Matrix<T>, y: &[T]) -> Result<()> {
    if a.cols() == 0 {
        return domain("subproblem needs at least one atom");
    }
    if a.rows() == 0 {
        return domain("subproblem needs at least one sample");
    }
    if y.len() != a.rows() {
        return domain(format!(
            "{} labels for a design matrix with {} rows",
            y.len(),
            a.rows()
        ));
    }
    Ok(())
}

/// ADMM on the squared hinge subproblem.
pub fn admm_solve<T: Scalar>(
    a: &Matrix<T>,
    y: &[T],
    cfg: &AdmmConfig<T>,
    init: Option<AdmmState<T>>,
) -> Result<AdmmOutput<T>> {
    admm_solve_with_loss(LossKind::SquaredHinge, a, y, cfg, init)
}

/// ADMM with the `v` step replaced by the prox of another margin loss.
pub fn admm_solve_with_loss<T: Scalar>(
    loss: LossKind,
    a: &Matrix<T>,
    y: &[T],
    cfg: &AdmmConfig<T>,
    init: Option<AdmmState<T>>,
) -> Result<AdmmOutput<T>> {
    check_problem(a, y)?;
    cfg.validate()?;
    let factor = NormalFactor::new(a, cfg.gamma, cfg.alpha)?;
    admm_with_factor(loss, a, y, cfg, init, &factor)
}

pub(crate) fn admm_with_factor<T: Scalar>(
    loss: LossKind,
    a: &Matrix<T>,
    y: &[T],
    cfg: &AdmmConfig<T>,
    init: Option<AdmmState<T>>,
    factor: &NormalFactor<T>,
) -> Result<AdmmOutput<T>> {
    let (m, s) = (a.rows(), a.cols());
    let mut state = init.unwrap_or_else(|| AdmmState::initial(y, s));
    if state.u.len() != s || state.v.len() != m || state.w.len() != m {
        return domain(format!(
            "initial state has shapes u={}, v={}, w={}; expected u={s}, v=w={m}",
            state.u.len(),
            state.v.len(),
            state.w.len()
        ));
    }
    let atw = a.tr_matvec(&state.w)?;
    if norm_inf(&atw) > T::lit(1e-8) * (T::one() + norm_inf(&state.w)) {
        return domain("initial multiplier w must lie in the null space of Aᵀ");
    }
    if factor.dim() != s {
        return domain("factorization does not match the design matrix");
    }

    let gamma = cfg.gamma;
    let prox_weight = T::lit(m as f64) * gamma;
    let inv_gamma = T::one() / gamma;
    let mut rhs_m = vec![T::zero(); m];
    let mut rhs = vec![T::zero(); s];
    let mut au = vec![T::zero(); m];
    let mut diff = vec![T::zero(); m];
    let mut trace = SolveTrace {
        records: Vec::with_capacity(cfg.max_iter.min(10_000)),
    };
    let start = Instant::now();
    let mut converged = false;

    for t in 1..=cfg.max_iter {
        for ((r, &v), &w) in rhs_m.iter_mut().zip(&state.v).zip(&state.w) {
            *r = gamma * v + w;
        }
        a.tr_matvec_into(&rhs_m, &mut rhs);
        for (r, &u) in rhs.iter_mut().zip(&state.u) {
            *r += cfg.alpha * u;
        }
        factor.chol.solve_in_place(&mut rhs);
        let du = {
            let mut acc = T::zero();
            for (&new, &old) in rhs.iter().zip(&state.u) {
                acc += (new - old) * (new - old);
            }
            acc.sqrt()
        };
        std::mem::swap(&mut state.u, &mut rhs);
        if state.u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical {
                context: "admm u-update",
                iteration: t,
            });
        }

        a.matvec_into(&state.u, &mut au);
        for i in 0..m {
            let c = au[i] - inv_gamma * state.w[i];
            state.v[i] = loss.prox_unchecked(y[i], c, prox_weight);
            diff[i] = state.v[i] - au[i];
            state.w[i] += gamma * diff[i];
        }
        state.iter += 1;

        let residual = norm2(&diff);
        let objective = risk_of_predictions(loss, &au, y);
        if !objective.is_finite() || !residual.is_finite() {
            return Err(Error::Numerical {
                context: "admm v/w-update",
                iteration: t,
            });
        }
        trace.records.push(SolveRecord {
            iter: t,
            objective,
            residual,
            seconds: start.elapsed().as_secs_f64(),
        });
        if cfg.tol > T::zero() && residual + du <= cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(AdmmOutput {
        u: state.u.clone(),
        state,
        trace,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub enum StepRule<T> {
    /// `1/L` with `L = (2/m) λ_max(AᵀA)` estimated by power iteration.
    Auto,
    Fixed(T),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GdConfig<T> {
    pub max_iter: usize,
    pub step: StepRule<T>,
    /// Stop once `‖∇F‖₂ ≤ grad_tol`; `0` runs all `max_iter` steps.
    pub grad_tol: T,
}

impl<T: Scalar> Default for GdConfig<T> {
    fn default() -> Self {
        Self {
            max_iter: 100,
            step: StepRule::Auto,
            grad_tol: T::zero(),
        }
    }
}

pub const POWER_ITERATIONS: usize = 20;

#[derive(Debug, Clone)]
pub struct GdOutput<T> {
    pub u: Vec<T>,
    pub step: T,
    pub trace: SolveTrace<T>,
    pub converged: bool,
}

impl<T: Scalar> GdOutput<T> {
    pub fn objective(&self) -> T {
        self.trace.last_objective().unwrap_or_else(T::nan)
    }
}

/// Full-gradient descent on the squared hinge subproblem from `u = 0`.
pub fn gd_solve<T: Scalar>(a: &Matrix<T>, y: &[T], cfg: &GdConfig<T>) -> Result<GdOutput<T>> {
    check_problem(a, y)?;
    if cfg.max_iter == 0 {
        return domain("gd max_iter must be at least 1");
    }
    let loss = LossKind::SquaredHinge;
    let (m, s) = (a.rows(), a.cols());
    let start = Instant::now();
    let step = match cfg.step {
        StepRule::Fixed(h) if h > T::zero() && h.is_finite() => h,
        StepRule::Fixed(h) => return domain(format!("gd step must be positive, got {h}")),
        StepRule::Auto => {
            let lambda = power_iteration_gram(a, POWER_ITERATIONS);
            let lipschitz = T::two() / T::lit(m as f64) * lambda;
            if lipschitz > T::zero() {
                T::one() / lipschitz
            } else {
                T::one()
            }
        }
    };

    let mut u = vec![T::zero(); s];
    let mut au = vec![T::zero(); m];
    let mut r = vec![T::zero(); m];
    let mut grad = vec![T::zero(); s];
    let mut trace = SolveTrace::default();
    let mut converged = false;
    for t in 1..=cfg.max_iter {
        risk_gradient_into(loss, &au, y, &mut r);
        a.tr_matvec_into(&r, &mut grad);
        let gnorm = norm2(&grad);
        if cfg.grad_tol > T::zero() && gnorm <= cfg.grad_tol {
            converged = true;
            break;
        }
        for (ui, &gi) in u.iter_mut().zip(&grad) {
            *ui -= step * gi;
        }
        a.matvec_into(&u, &mut au);
        let objective = risk_of_predictions(loss, &au, y);
        if !objective.is_finite() {
            return Err(Error::Numerical {
                context: "gradient descent",
                iteration: t,
            });
        }
        trace.records.push(SolveRecord {
            iter: t,
            objective,
            residual: gnorm,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(GdOutput {
        u,
        step,
        trace,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incremental_factor_matches_direct() {
        let a = Matrix::from_fn(30, 6, |i, j| ((i * 7 + j * 13) % 11) as f64 / 11.0 - 0.3);
        let mut inc = NormalFactor::new(&Matrix::zeros(30, 0), 1.5, 0.7).unwrap();
        let mut sub = Matrix::zeros(30, 0);
        for j in 0..a.cols() {
            inc.push_column(&sub, a.col(j)).unwrap();
            sub.push_column(a.col(j)).unwrap();
        }
        let direct = NormalFactor::new(&a, 1.5, 0.7).unwrap();
        let rhs: Vec<f64> = (0..6).map(|i| i as f64 - 2.0).collect();
        let (p, q) = (inc.solve(&rhs).unwrap(), direct.solve(&rhs).unwrap());
        for (x, y) in p.iter().zip(&q) {
            assert!((x - y).abs() < 1e-12);
        }
    }
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_instance(seed: u64, m: usize, s: usize) -> (Matrix<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Matrix::from_fn(m, s, |_, _| rng.random_range(-1.0..1.0));
        let y = (0..m)
            .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        (a, y)
    }

    #[test]
    fn perfect_separator_column() {
        let y: Vec<f64> = (0..40).map(|i| if i % 3 == 0 { 1.0 } else { -1.0 }).collect();
        let a = Matrix::from_columns(40, &[y.clone()]).unwrap();
        let out = admm_solve(&a, &y, &AdmmConfig::default(), None).unwrap();
        assert!(out.objective() <= 1e-6, "objective {}", out.objective());
        assert!((out.u[0] - 1.0).abs() < 1e-3 || out.u[0] >= 1.0);

        let gd = gd_solve(&a, &y, &GdConfig::default()).unwrap();
        let objs: Vec<f64> = gd.trace.records.iter().map(|r| r.objective).collect();
        assert!(objs.windows(2).all(|w| w[1] <= w[0]));
        assert!(*objs.last().unwrap() <= 1e-12);
    }

    #[test]
    fn empty_support_rejected() {
        let a = Matrix::<f64>::zeros(5, 0);
        let y = vec![1.0; 5];
        assert!(admm_solve(&a, &y, &AdmmConfig::default(), None).is_err());
        assert!(gd_solve(&a, &y, &GdConfig::default()).is_err());
    }

    #[test]
    fn invalid_config_rejected() {
        let (a, y) = random_instance(0, 10, 2);
        for cfg in [
            AdmmConfig { gamma: 0.0, ..AdmmConfig::default() },
            AdmmConfig { alpha: -1.0, ..AdmmConfig::default() },
            AdmmConfig { max_iter: 0, ..AdmmConfig::default() },
        ] {
            assert!(admm_solve(&a, &y, &cfg, None).is_err());
        }
    }

    #[test]
    fn rejects_multiplier_outside_null_space() {
        let (a, y) = random_instance(1, 10, 2);
        let mut init = AdmmState::initial(&y, 2);
        init.w[0] = 1.0;
        assert!(admm_solve(&a, &y, &AdmmConfig::default(), Some(init)).is_err());
    }

    #[test]
    fn factorization_matches_direct_solve() {
        for seed in 0..5 {
            let (a, _) = random_instance(seed, 50, 8);
            let (gamma, alpha) = (1.3, 0.7);
            let f = cache_factorization(&a, gamma, alpha).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
            let b: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x = f.solve(&b).unwrap();
            // oracle: explicit inverse by Gauss-Jordan elimination
            let mut m = a.gram();
            for i in 0..8 {
                for j in 0..8 {
                    m[(i, j)] *= gamma;
                }
                m[(i, i)] += alpha;
            }
            let inv = gauss_jordan_inverse(&m);
            let direct = inv.matvec(&b).unwrap();
            for (p, q) in x.iter().zip(&direct) {
                assert!((p - q).abs() <= 1e-10);
            }
            assert_eq!(f.solve(&b).unwrap(), x);
        }
    }

    #[test]
    fn zero_design_gives_scaled_identity() {
        let a = Matrix::<f64>::zeros(7, 3);
        let f = cache_factorization(&a, 1.0, 1.0).unwrap();
        assert_eq!(f.solve(&[1.0, -2.0, 3.0]).unwrap(), vec![1.0, -2.0, 3.0]);
        let f = cache_factorization(&a, 1.0, 4.0).unwrap();
        assert_eq!(f.solve(&[4.0, -2.0, 3.0]).unwrap(), vec![1.0, -0.5, 0.75]);
    }

    fn gauss_jordan_inverse(m: &Matrix<f64>) -> Matrix<f64> {
        let n = m.rows();
        let mut a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut row: Vec<f64> = (0..n).map(|j| m[(i, j)]).collect();
                row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
                row
            })
            .collect();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, p);
            let piv = a[c][c];
            a[c].iter_mut().for_each(|v| *v /= piv);
            for r in 0..n {
                if r != c {
                    let f = a[r][c];
                    let pivot_row = a[c].clone();
                    a[r].iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
                }
            }
        }
        Matrix::from_fn(n, n, |i, j| a[i][n + j])
    }

    #[test]
    fn v_update_matches_scalar_oracle() {
        // one ADMM step from the default start, checked coordinate-wise
        let (a, y) = random_instance(3, 30, 4);
        let cfg = AdmmConfig { max_iter: 1, ..AdmmConfig::default() };
        let out = admm_solve(&a, &y, &cfg, None).unwrap();
        let au = a.matvec(&out.u).unwrap();
        let rho = 30.0;
        for i in 0..30 {
            // w⁰ = 0 so c_i = (Au¹)_i
            let c = au[i];
            let obj = |v: f64| LossKind::SquaredHinge.value_unchecked(y[i] * v) + 0.5 * rho * (v - c).powi(2);
            let mut lo = -100.0;
            let mut hi = 100.0;
            for _ in 0..200 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if obj(m1) < obj(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            assert!((out.state.v[i] - 0.5 * (lo + hi)).abs() < 1e-8);
        }
    }

    #[test]
    fn gd_auto_step_is_monotone() {
        for seed in 0..5 {
            let (a, y) = random_instance(seed, 80, 6);
            let out = gd_solve(&a, &y, &GdConfig { max_iter: 300, ..GdConfig::default() }).unwrap();
            let objs: Vec<f64> = out.trace.records.iter().map(|r| r.objective).collect();
            for w in objs.windows(2) {
                assert!(w[1] <= w[0] + 1e-15, "{} > {}", w[1], w[0]);
            }
        }
    }

    #[test]
    fn admm_reaches_stationarity_with_tolerance() {
        let (a, y) = random_instance(11, 120, 10);
        let out = admm_solve(&a, &y, &AdmmConfig::high_accuracy(), None).unwrap();
        assert!(out.converged);
        let g = subproblem_gradient(LossKind::SquaredHinge, &a, &y, &out.u).unwrap();
        assert!(norm_inf(&g) <= 1e-4);
        assert!(out.trace.records.last().unwrap().residual <= 1e-10);
    }

    #[test]
    fn works_in_f32() {
        let y: Vec<f32> = (0..20).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let a = Matrix::from_columns(20, &[y.clone()]).unwrap();
        let out = admm_solve(&a, &y, &AdmmConfig::default(), None).unwrap();
        assert!(out.objective() <= 1e-5);
    }

    #[test]
    fn trace_csv_has_header_and_rows() {
        let (a, y) = random_instance(2, 20, 3);
        let out = admm_solve(&a, &y, &AdmmConfig { max_iter: 5, ..AdmmConfig::default() }, None).unwrap();
        let mut buf = Vec::new();
        out.trace.write_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iter,objective,primal_residual,seconds\n"));
        assert_eq!(text.lines().count(), 6);
    }
}
