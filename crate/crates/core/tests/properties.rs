use fcgboost::boost::{classify, fcg_fit_design, truncate, FitConfig, SelectionRule};
use fcgboost::linalg::{norm_inf, Matrix};
use fcgboost::loss::{risk_gradient, LossKind};
use fcgboost::solver::{admm_solve, gd_solve, subproblem_gradient, subproblem_objective, AdmmConfig, GdConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform `[-1, 1]` design with random labels.
fn instance(seed: u64, m: usize, s: usize) -> (Matrix<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Matrix::from_fn(m, s, |_, _| rng.random_range(-1.0..=1.0));
    let y = (0..m).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    (a, y)
}

/// Some coefficient vector classifies every point correctly.
fn separable(a: &Matrix<f64>, y: &[f64]) -> bool {
    let gd = gd_solve(
        a,
        y,
        &GdConfig {
            max_iter: 2000,
            ..GdConfig::default()
        },
    )
    .unwrap();
    let f = a.matvec(&gd.u).unwrap();
    f.iter().zip(y).all(|(f, y)| f * y > 0.0)
}

fn tight(k_max: usize) -> FitConfig<f64> {
    FitConfig {
        solver: AdmmConfig::high_accuracy(),
        ..FitConfig::new(k_max)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn admm_primal_residual_vanishes(seed in any::<u64>(), s in 1usize..8, ratio in 10usize..25) {
        let (a, y) = instance(seed, s * ratio, s);
        prop_assume!(!separable(&a, &y));
        let cfg = AdmmConfig { max_iter: 10_000, ..AdmmConfig::default() };
        let out = admm_solve(&a, &y, &cfg, None).unwrap();
        let residuals: Vec<f64> = out.trace.records.iter().map(|r| r.residual).collect();
        prop_assert!(residuals.iter().all(|r| r.is_finite()));
        prop_assert!(*residuals.last().unwrap() < 1e-6, "final residual {}", residuals.last().unwrap());
    }

    #[test]
    fn admm_solution_is_stationary_and_beats_gd(seed in any::<u64>(), s in 1usize..8, ratio in 10usize..25) {
        let (a, y) = instance(seed, s * ratio, s);
        prop_assume!(!separable(&a, &y));
        let out = admm_solve(&a, &y, &AdmmConfig::high_accuracy(), None).unwrap();
        let g = subproblem_gradient(LossKind::SquaredHinge, &a, &y, &out.u).unwrap();
        prop_assert!(norm_inf(&g) <= 1e-4, "gradient {}", norm_inf(&g));
        let gd = gd_solve(&a, &y, &GdConfig { max_iter: 5000, ..GdConfig::default() }).unwrap();
        let admm_obj = subproblem_objective(LossKind::SquaredHinge, &a, &y, &out.u).unwrap();
        prop_assert!(admm_obj <= gd.objective() + 1e-9, "admm {} gd {}", admm_obj, gd.objective());
    }

    #[test]
    fn fcg_risk_is_monotone_and_support_grows_by_one(seed in any::<u64>(), n in 2usize..12, k in 1usize..8) {
        let (a, y) = instance(seed, 80, n);
        let (model, trace) = fcg_fit_design(&a, &y, &tight(k), "d").unwrap();
        let risks = trace.risks();
        for w in risks.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "risk rose from {} to {}", w[0], w[1]);
        }
        // one new distinct atom per completed iteration, fewer only on a stall
        prop_assert_eq!(model.selected.len(), trace.records.len());
        prop_assert!(model.selected.len() <= k.min(n));
        let mut sorted = model.selected.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), model.selected.len());
    }

    #[test]
    fn fcg_refit_is_stationary_on_the_support(seed in any::<u64>(), n in 2usize..10, k in 1usize..6) {
        let (a, y) = instance(seed, 120, n);
        prop_assume!(!separable(&a, &y));
        let (model, _) = fcg_fit_design(&a, &y, &tight(k), "d").unwrap();
        let f = model.margins_from_design(&a).unwrap();
        let grad = risk_gradient(LossKind::SquaredHinge, &f, &y).unwrap();
        for &j in &model.selected {
            let c: f64 = a.col(j).iter().zip(&grad).map(|(g, r)| g * r).sum();
            prop_assert!(c.abs() <= 1e-4, "atom {} correlation {}", j, c);
        }
    }

    #[test]
    fn negating_an_atom_keeps_predicted_labels(seed in any::<u64>(), n in 2usize..10, flip in 0usize..10) {
        let (a, y) = instance(seed, 100, n);
        prop_assume!(!separable(&a, &y));
        let cfg = FitConfig { selection_rule: SelectionRule::Absolute, ..tight(4) };
        let (model, _) = fcg_fit_design(&a, &y, &cfg, "d").unwrap();
        let mut flipped = a.clone();
        flipped.negate_column(flip % n);
        let (model_f, _) = fcg_fit_design(&flipped, &y, &cfg, "d").unwrap();
        prop_assert_eq!(&model.selected, &model_f.selected);
        let f = model.margins_from_design(&a).unwrap();
        let g = model_f.margins_from_design(&flipped).unwrap();
        for (p, q) in f.iter().zip(&g) {
            // labels agree wherever the margin is not numerically zero
            if p.abs() > 1e-6 {
                prop_assert_eq!(p.signum(), q.signum());
            }
        }
    }

    #[test]
    fn truncate_is_idempotent_and_keeps_labels(t in -1e6f64..1e6) {
        prop_assert_eq!(truncate(truncate(t)), truncate(t));
        prop_assert_eq!(classify(&[truncate(t)]), classify(&[t]));
        prop_assert!(truncate(t).abs() <= 1.0);
    }
}
