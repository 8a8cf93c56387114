//! Margin losses `φ(t)` with `t = y f(x)`, their derivatives, empirical risk,
//! and closed-form proximal maps used by the ADMM v-update.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::{positive_part, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    /// `max{0, 1 - t}²`
    #[default]
    SquaredHinge,
    /// `(1 - t)²`
    Square,
    /// `max{0, 1 - t}`
    Hinge,
    /// `max{0, 1 - t}³`
    CubedHinge,
}

impl LossKind {
    pub const ALL: [LossKind; 4] = [
        LossKind::SquaredHinge,
        LossKind::Hinge,
        LossKind::CubedHinge,
        LossKind::Square,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::SquaredHinge => "squared-hinge",
            LossKind::Square => "square",
            LossKind::Hinge => "hinge",
            LossKind::CubedHinge => "cubed-hinge",
        }
    }

    /// Loss value at margin `t`.
    pub fn value<T: Scalar>(self, t: T) -> Result<T> {
        check_finite(t, "margin")?;
        Ok(self.value_unchecked(t))
    }

    #[inline]
    pub fn value_unchecked<T: Scalar>(self, t: T) -> T {
        let r = T::one() - t;
        match self {
            LossKind::SquaredHinge => {
                let h = positive_part(r);
                h * h
            }
            LossKind::Square => r * r,
            LossKind::Hinge => positive_part(r),
            LossKind::CubedHinge => {
                let h = positive_part(r);
                h * h * h
            }
        }
    }

    /// `dφ/dt`. For the hinge the subgradient `0` is chosen at `t = 1`.
    pub fn derivative<T: Scalar>(self, t: T) -> Result<T> {
        check_finite(t, "margin")?;
        Ok(self.derivative_unchecked(t))
    }

    #[inline]
    pub fn derivative_unchecked<T: Scalar>(self, t: T) -> T {
        let r = T::one() - t;
        match self {
            LossKind::SquaredHinge => -T::two() * positive_part(r),
            LossKind::Square => -T::two() * r,
            LossKind::Hinge => {
                if t < T::one() {
                    -T::one()
                } else {
                    T::zero()
                }
            }
            LossKind::CubedHinge => {
                let h = positive_part(r);
                -T::lit(3.0) * h * h
            }
        }
    }

    /// `argmin_u φ(a u) + (ρ/2)(u - b)²`, in closed form for every variant.
    pub fn prox<T: Scalar>(self, a: T, b: T, rho: T) -> Result<T> {
        check_finite(a, "a")?;
        check_finite(b, "b")?;
        if !(rho > T::zero()) || !rho.is_finite() {
            return domain(format!("prox parameter must be positive, got {rho}"));
        }
        Ok(self.prox_unchecked(a, b, rho))
    }

    #[inline]
    pub fn prox_unchecked<T: Scalar>(self, a: T, b: T, rho: T) -> T {
        match self {
            LossKind::SquaredHinge => prox_squared_hinge_unchecked(a, b, rho),
            LossKind::Square => {
                // stationarity of (1 - a u)² + (ρ/2)(u - b)² holds everywhere
                (T::two() * a + rho * b) / (T::two() * a * a + rho)
            }
            LossKind::Hinge => {
                if a == T::zero() || a * b >= T::one() {
                    b
                } else if a * b + a * a / rho < T::one() {
                    b + a / rho
                } else {
                    // the kink a u = 1
                    T::one() / a
                }
            }
            LossKind::CubedHinge => {
                let ab = a * b;
                if a == T::zero() || ab >= T::one() {
                    b
                } else {
                    // z = 1 - a u > 0 solves 3a² z² + ρ z - ρ(1 - ab) = 0;
                    // rationalized root avoids cancellation for small a
                    let c = rho * (T::one() - ab);
                    let disc = rho * rho + T::lit(12.0) * a * a * c;
                    let z = T::two() * c / (rho + disc.sqrt());
                    (T::one() - z) / a
                }
            }
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "squared-hinge" | "sq-hinge" | "hinge2" => Ok(LossKind::SquaredHinge),
            "square" | "squared" | "sq" => Ok(LossKind::Square),
            "hinge" => Ok(LossKind::Hinge),
            "cubed-hinge" | "hinge3" => Ok(LossKind::CubedHinge),
            other => Err(Error::Parse(format!("unknown loss '{other}'"))),
        }
    }
}

#[inline]
fn check_finite<T: Scalar>(x: T, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        domain(format!("{what} must be finite, got {x}"))
    }
}

/// Closed-form minimizer of `max{0, 1 - a u}² + (γ/2)(u - b)²`:
/// `b` when `a = 0` or `ab ≥ 1`, otherwise `(2a + γb) / (2a² + γ)`.
pub fn prox_squared_hinge<T: Scalar>(a: T, b: T, gamma: T) -> Result<T> {
    LossKind::SquaredHinge.prox(a, b, gamma)
}

#[inline]
fn prox_squared_hinge_unchecked<T: Scalar>(a: T, b: T, gamma: T) -> T {
    if a == T::zero() || a * b >= T::one() {
        b
    } else {
        (T::two() * a + gamma * b) / (T::two() * a * a + gamma)
    }
}

/// `(1/m) Σ φ(t_i)`.
pub fn empirical_risk<T: Scalar>(kind: LossKind, margins: &[T]) -> Result<T> {
    if margins.is_empty() {
        return domain("empirical risk of an empty sample");
    }
    let mut total = T::zero();
    for &t in margins {
        total += kind.value(t)?;
    }
    Ok(total / T::lit(margins.len() as f64))
}

/// Risk of predictions `f(x_i)` against labels, without finiteness checks.
pub(crate) fn risk_of_predictions<T: Scalar>(kind: LossKind, predictions: &[T], labels: &[T]) -> T {
    let m = T::lit(predictions.len() as f64);
    predictions
        .iter()
        .zip(labels)
        .map(|(&f, &y)| kind.value_unchecked(y * f))
        .sum::<T>()
        / m
}

/// Gradient of the empirical risk with respect to the prediction vector:
/// component `i` is `(1/m) φ'(y_i f(x_i)) y_i`, so that the functional pairing
/// with a weak learner `g` is `Σ_i grad_i g(x_i)`.
pub fn risk_gradient<T: Scalar>(kind: LossKind, predictions: &[T], labels: &[T]) -> Result<Vec<T>> {
    if predictions.len() != labels.len() {
        return domain(format!(
            "{} predictions but {} labels",
            predictions.len(),
            labels.len()
        ));
    }
    if predictions.is_empty() {
        return domain("risk gradient of an empty sample");
    }
    let mut out = vec![T::zero(); predictions.len()];
    for (&f, &y) in predictions.iter().zip(labels) {
        check_finite(f, "prediction")?;
        check_finite(y, "label")?;
    }
    risk_gradient_into(kind, predictions, labels, &mut out);
    Ok(out)
}

pub(crate) fn risk_gradient_into<T: Scalar>(kind: LossKind, predictions: &[T], labels: &[T], out: &mut [T]) {
    let inv_m = T::one() / T::lit(predictions.len() as f64);
    for ((o, &f), &y) in out.iter_mut().zip(predictions).zip(labels) {
        *o = inv_m * kind.derivative_unchecked(y * f) * y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = hi - inv_phi * (hi - lo);
        let mut d = lo + inv_phi * (hi - lo);
        let (mut fc, mut fd) = (f(c), f(d));
        while hi - lo > tol {
            if fc < fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - inv_phi * (hi - lo);
                fc = f(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + inv_phi * (hi - lo);
                fd = f(d);
            }
        }
        0.5 * (lo + hi)
    }

    fn prox_oracle(kind: LossKind, a: f64, b: f64, rho: f64, radius: f64) -> f64 {
        golden_section(
            |u| kind.value_unchecked(a * u) + 0.5 * rho * (u - b).powi(2),
            -radius,
            radius,
            1e-11,
        )
    }

    #[test]
    fn squared_hinge_values() {
        let k = LossKind::SquaredHinge;
        assert_eq!(k.value(1.0).unwrap(), 0.0);
        assert_eq!(k.value(0.0).unwrap(), 1.0);
        assert_eq!(k.value(-1.0).unwrap(), 4.0);
        assert_eq!(LossKind::Hinge.value(0.5).unwrap(), 0.5);
        assert!(k.value(f64::NAN).is_err());
        assert!(k.value(f64::INFINITY).is_err());
    }

    #[test]
    fn derivative_values() {
        let k = LossKind::SquaredHinge;
        assert_eq!(k.derivative(1.0).unwrap(), 0.0);
        assert_eq!(k.derivative(0.0).unwrap(), -2.0);
        assert_eq!(k.derivative(2.0).unwrap(), 0.0);
        assert_eq!(LossKind::Hinge.derivative(1.0).unwrap(), 0.0);
        assert_eq!(LossKind::Hinge.derivative(0.999).unwrap(), -1.0);
        assert_eq!(LossKind::Square.derivative(2.0).unwrap(), 2.0);
        assert_eq!(LossKind::CubedHinge.derivative(0.0).unwrap(), -3.0);
        assert!(k.derivative(f64::NAN).is_err());
    }

    #[test]
    fn risk_examples() {
        let k = LossKind::SquaredHinge;
        assert_eq!(empirical_risk(k, &[1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(empirical_risk(k, &[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(empirical_risk(k, &[2.0, -1.0]).unwrap(), 2.0);
        assert!(empirical_risk::<f64>(k, &[]).is_err());
    }

    #[test]
    fn gradient_examples() {
        let k = LossKind::SquaredHinge;
        let y = [1.0, -1.0, 1.0, -1.0];
        let g = risk_gradient(k, &[0.0; 4], &y).unwrap();
        for (gi, yi) in g.iter().zip(&y) {
            assert_eq!(*gi, -2.0 * yi / 4.0);
        }
        let g = risk_gradient(k, &[2.0, -1.5, 1.0, -3.0], &y).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
        assert_eq!(risk_gradient(k, &[0.5], &[1.0]).unwrap(), vec![-1.0]);
        assert!(risk_gradient(k, &[0.5, 0.1], &[1.0]).is_err());
    }

    #[test]
    fn prox_examples() {
        assert_eq!(prox_squared_hinge(0.0, 0.7, 1.0).unwrap(), 0.7);
        assert_eq!(prox_squared_hinge(1.0, 2.0, 1.0).unwrap(), 2.0);
        assert!((prox_squared_hinge(1.0f64, 0.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((prox_squared_hinge(-1.0f64, 0.0, 2.0).unwrap() + 0.5).abs() < 1e-15);
        // oracle for the derived examples
        assert!((prox_oracle(LossKind::SquaredHinge, 1.0, 0.0, 2.0, 10.0) - 0.5).abs() < 1e-8);
        assert!((prox_oracle(LossKind::SquaredHinge, -1.0, 0.0, 2.0, 10.0) + 0.5).abs() < 1e-8);
        assert!(prox_squared_hinge(1.0, 0.0, 0.0).is_err());
        assert!(prox_squared_hinge(1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn prox_continuous_at_case_boundary() {
        for &(a, gamma) in &[(0.5, 1.0), (2.0, 3.0), (-1.5, 0.2), (-0.25, 7.0)] {
            let b: f64 = 1.0 / a;
            let interior = (2.0 * a + gamma * b) / (2.0 * a * a + gamma);
            assert!((interior - b).abs() <= 1e-12, "a={a} gamma={gamma}");
        }
    }

    #[test]
    fn prox_works_in_f32() {
        let u: f32 = prox_squared_hinge(1.0f32, 0.0, 2.0).unwrap();
        assert!((u - 0.5).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn prox_matches_golden_section(
            kind in prop::sample::select(LossKind::ALL.to_vec()),
            a in -5.0f64..5.0,
            b in -5.0f64..5.0,
            rho in 1e-3f64..10.0,
        ) {
            let u = kind.prox(a, b, rho).unwrap();
            let oracle = prox_oracle(kind, a, b, rho, 100.0);
            let obj = |u: f64| kind.value_unchecked(a * u) + 0.5 * rho * (u - b).powi(2);
            // compare objective values (robust where the minimizer is flat) and location
            prop_assert!(obj(u) <= obj(oracle) + 1e-12);
            prop_assert!((u - oracle).abs() <= 1e-5, "u={} oracle={}", u, oracle);
        }

        #[test]
        fn derivative_matches_finite_differences(
            kind in prop::sample::select(LossKind::ALL.to_vec()),
            t in -4.0f64..4.0,
        ) {
            let h = 1e-6;
            prop_assume!(kind == LossKind::Square || (t - 1.0).abs() > 2.0 * h);
            let fd = (kind.value_unchecked(t + h) - kind.value_unchecked(t - h)) / (2.0 * h);
            prop_assert!((fd - kind.derivative_unchecked(t)).abs() <= 1e-5);
        }

        #[test]
        fn losses_are_convex(
            kind in prop::sample::select(LossKind::ALL.to_vec()),
            t1 in -5.0f64..5.0,
            t2 in -5.0f64..5.0,
            lambda in 0.0f64..=1.0,
        ) {
            let mid = kind.value_unchecked(lambda * t1 + (1.0 - lambda) * t2);
            let chord = lambda * kind.value_unchecked(t1) + (1.0 - lambda) * kind.value_unchecked(t2);
            prop_assert!(mid <= chord + 1e-12 * (1.0 + chord.abs()));
        }

        #[test]
        fn hinge_family_vanishes_beyond_one(t in 1.0f64..100.0) {
            for kind in [LossKind::SquaredHinge, LossKind::Hinge, LossKind::CubedHinge] {
                prop_assert_eq!(kind.value(t).unwrap(), 0.0);
            }
            prop_assert!(LossKind::Square.value(t).unwrap() >= 0.0);
        }
    }
}
