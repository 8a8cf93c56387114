//! Fully-corrective greedy boosting with the squared hinge loss.
//!
//! Each boosting iteration adds one dictionary atom and refits every selected
//! coefficient by ADMM, whose loss step is a closed-form proximal map.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common `f64` and `f32` instantiations.

pub mod boost;
pub mod data;
pub mod dictionary;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod loss;
pub mod scalar;
pub mod solver;

pub use boost::{
    baseline_fit, classify, early_stop_grid, fcg_fit, fit_with_validation, predict_margin, select_atom, truncate,
    BaselineScheme, BoostModel, FcgFitter, FitConfig, IterRecord, SelectionRule, TrainTrace,
};
pub use data::{gen_synthetic, load_csv, split, test_error, CsvSchema, Dataset, Features, Noise, SyntheticConfig};
pub use dictionary::{atom_correlations, build_dictionary, Dictionary, KernelKind};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use loss::{empirical_risk, prox_squared_hinge, risk_gradient, LossKind};
pub use scalar::Scalar;
pub use solver::{admm_solve, cache_factorization, gd_solve, AdmmConfig, AdmmOutput, AdmmState, GdConfig};

pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type Dictionary64 = Dictionary<f64>;
pub type Dictionary32 = Dictionary<f32>;
pub type BoostModel64 = BoostModel<f64>;
pub type BoostModel32 = BoostModel<f32>;
pub type FitConfig64 = FitConfig<f64>;
pub type FitConfig32 = FitConfig<f32>;
pub type AdmmConfig64 = AdmmConfig<f64>;
pub type AdmmConfig32 = AdmmConfig<f32>;
