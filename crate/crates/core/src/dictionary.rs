//! Weak-learner dictionaries and their design matrices.
//!
//! Every atom is scaled by `max(1, max_i |g_j(x_i)|)` over the inputs the
//! dictionary was built from, so evaluated entries on that set lie in `[-1, 1]`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::Features;
use crate::error::{domain, Error, Result};
use crate::linalg::{dot, Matrix};
use crate::scalar::{positive_part, Scalar};

/// Atoms whose empirical sup-norm falls below this are resampled.
pub const DEGENERATE_NORM: f64 = 1e-12;
pub const MAX_RESAMPLE: usize = 100;
/// Serialization format tag.
pub const DICTIONARY_FORMAT: &str = "fcgboost-dictionary-v1";

/// Gaussian widths searched by validation when none is given.
pub const DEFAULT_GAUSS_WIDTHS: [f64; 4] = [0.1, 0.5, 1.0, 5.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum KernelKind {
    /// `exp(-‖x - c‖² / (2σ²))`, centers drawn from the training inputs.
    Gauss { width: f64 },
    /// `(⟨x, c⟩ + 1)^p`, centers drawn from the training inputs.
    Polynomial { degree: u32 },
    /// `tanh(⟨w, x⟩ + b)`, `w` uniform on the sphere, `b ~ U[-1, 1]`.
    Sigmoid,
    /// `max{0, ⟨w, x⟩ + b}`, same sampling as sigmoid.
    Relu,
}

impl KernelKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelKind::Gauss { width } if !(width > 0.0 && width.is_finite()) => {
                domain(format!("gaussian width must be positive, got {width}"))
            }
            KernelKind::Polynomial { degree: 0 } => domain("polynomial degree must be at least 1"),
            _ => Ok(()),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            KernelKind::Gauss { .. } => "gauss",
            KernelKind::Polynomial { .. } => "polynomial",
            KernelKind::Sigmoid => "sigmoid",
            KernelKind::Relu => "relu",
        }
    }

    fn uses_centers(&self) -> bool {
        matches!(self, KernelKind::Gauss { .. } | KernelKind::Polynomial { .. })
    }

    #[inline]
    fn raw_value<T: Scalar>(&self, atom: &Atom<T>, x: &[T]) -> T {
        match *self {
            KernelKind::Gauss { width } => {
                let d2: T = atom
                    .point
                    .iter()
                    .zip(x)
                    .map(|(&c, &v)| (v - c) * (v - c))
                    .sum();
                let s = T::lit(width);
                (-d2 / (T::two() * s * s)).exp()
            }
            KernelKind::Polynomial { degree } => (dot(&atom.point, x) + T::one()).powi(degree as i32),
            KernelKind::Sigmoid => (dot(&atom.point, x) + atom.bias).tanh(),
            KernelKind::Relu => positive_part(dot(&atom.point, x) + atom.bias),
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelKind::Gauss { width } => write!(f, "gauss:{width}"),
            KernelKind::Polynomial { degree } => write!(f, "polynomial:{degree}"),
            KernelKind::Sigmoid => write!(f, "sigmoid"),
            KernelKind::Relu => write!(f, "relu"),
        }
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    /// `gauss:WIDTH`, `polynomial:DEGREE` (alias `poly`), `sigmoid`, `relu`.
    fn from_str(s: &str) -> Result<Self> {
        let (family, arg) = s.split_once(':').unwrap_or((s, ""));
        let bad = || Error::Parse(format!("invalid kernel '{s}'"));
        let kind = match family.trim().to_ascii_lowercase().as_str() {
            "gauss" | "gaussian" => KernelKind::Gauss {
                width: arg.trim().parse().map_err(|_| bad())?,
            },
            "polynomial" | "poly" => KernelKind::Polynomial {
                degree: arg.trim().parse().map_err(|_| bad())?,
            },
            "sigmoid" => KernelKind::Sigmoid,
            "relu" => KernelKind::Relu,
            _ => return Err(bad()),
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// One weak learner's parameters: a center (`bias` unused) or an affine map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Atom<T> {
    pub point: Vec<T>,
    pub bias: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Dictionary<T> {
    pub format: String,
    pub kind: KernelKind,
    pub dim: usize,
    pub atoms: Vec<Atom<T>>,
    pub normalizers: Vec<T>,
    pub seed: u64,
}

impl<T: Scalar> Dictionary<T> {
    /// Samples `n` atoms of the given family from the training inputs `x`.
    pub fn build(x: &Features<T>, kind: KernelKind, n: usize, seed: u64) -> Result<Self> {
        build_dictionary(x, kind, n, seed)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Normalized value of atom `j` at `x`.
    #[inline]
    pub fn atom_value(&self, j: usize, x: &[T]) -> T {
        self.kind.raw_value(&self.atoms[j], x) / self.normalizers[j]
    }

    /// Column `j` of the design matrix over `x`.
    pub fn evaluate_atom(&self, j: usize, x: &Features<T>) -> Result<Vec<T>> {
        self.check_inputs(x)?;
        if j >= self.len() {
            return domain(format!("atom index {j} out of range ({} atoms)", self.len()));
        }
        Ok(x.rows().map(|r| self.atom_value(j, r)).collect())
    }

    /// Dense `m x n` design matrix `A_ij = g_j(x_i)`.
    pub fn evaluate(&self, x: &Features<T>) -> Result<Matrix<T>> {
        self.check_inputs(x)?;
        let m = x.len();
        let mut data = Vec::with_capacity(m * self.len());
        for j in 0..self.len() {
            data.extend(x.rows().map(|r| self.atom_value(j, r)));
        }
        Matrix::from_column_major(m, self.len(), data)
    }

    /// Design matrix restricted to the listed atoms, in order.
    pub fn evaluate_columns(&self, indices: &[usize], x: &Features<T>) -> Result<Matrix<T>> {
        let cols = indices
            .iter()
            .map(|&j| self.evaluate_atom(j, x))
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_columns(x.len(), &cols)
    }

    /// Flips the sign of atom `j` (used to test sign-flip invariance).
    pub fn negate_atom(&mut self, j: usize) {
        self.normalizers[j] = -self.normalizers[j];
    }

    /// Stable FNV-1a digest of the serialized parameters, for provenance.
    pub fn digest(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bytes: &[u8]| {
            for b in bytes {
                h ^= u64::from(*b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        feed(self.kind.to_string().as_bytes());
        feed(&(self.dim as u64).to_le_bytes());
        feed(&self.seed.to_le_bytes());
        for (a, z) in self.atoms.iter().zip(&self.normalizers) {
            for v in &a.point {
                feed(&v.as_f64().to_le_bytes());
            }
            feed(&a.bias.as_f64().to_le_bytes());
            feed(&z.as_f64().to_le_bytes());
        }
        format!("{h:016x}")
    }

    fn check_inputs(&self, x: &Features<T>) -> Result<()> {
        if x.dim() != self.dim {
            return domain(format!(
                "inputs have dimension {}, dictionary expects {}",
                x.dim(),
                self.dim
            ));
        }
        Ok(())
    }
}

/// See [`Dictionary::build`].
pub fn build_dictionary<T: Scalar>(x: &Features<T>, kind: KernelKind, n: usize, seed: u64) -> Result<Dictionary<T>> {
    kind.validate()?;
    if n == 0 {
        return domain("dictionary size must be positive");
    }
    if x.is_empty() {
        return domain("cannot build a dictionary from an empty input set");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut atoms = Vec::with_capacity(n);
    let mut normalizers = Vec::with_capacity(n);
    for j in 0..n {
        let mut accepted = None;
        for _ in 0..MAX_RESAMPLE {
            let atom = sample_atom(&kind, x, &mut rng);
            let sup = x
                .rows()
                .map(|r| kind.raw_value(&atom, r).abs())
                .fold(T::zero(), |a, b| if b > a { b } else { a });
            if sup.is_finite() && sup >= T::lit(DEGENERATE_NORM) {
                accepted = Some((atom, if sup > T::one() { sup } else { T::one() }));
                break;
            }
        }
        let (atom, z) = accepted.ok_or_else(|| {
            Error::Domain(format!(
                "atom {j}: every one of {MAX_RESAMPLE} samples was degenerate on the training inputs"
            ))
        })?;
        atoms.push(atom);
        normalizers.push(z);
    }
    Ok(Dictionary {
        format: DICTIONARY_FORMAT.to_string(),
        kind,
        dim: x.dim(),
        atoms,
        normalizers,
        seed,
    })
}

fn sample_atom<T: Scalar>(kind: &KernelKind, x: &Features<T>, rng: &mut ChaCha8Rng) -> Atom<T> {
    if kind.uses_centers() {
        let i = rng.random_range(0..x.len());
        return Atom {
            point: x.row(i).to_vec(),
            bias: T::zero(),
        };
    }
    // normalized Gaussian vector is uniform on the sphere
    let d = x.dim();
    let mut w: Vec<f64> = loop {
        let w: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        if w.iter().map(|v| v * v).sum::<f64>() > 1e-24 {
            break w;
        }
    };
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.iter_mut().for_each(|v| *v /= norm);
    let bias: f64 = rng.random_range(-1.0..=1.0);
    Atom {
        point: w.into_iter().map(T::lit).collect(),
        bias: T::lit(bias),
    }
}

/// `c_j = -Σ_i grad_i A_ij`, the negative functional pairing of the risk
/// gradient with each atom.
pub fn atom_correlations<T: Scalar>(a: &Matrix<T>, grad: &[T]) -> Result<Vec<T>> {
    if grad.len() != a.rows() {
        return domain(format!(
            "gradient of length {} for a design matrix with {} rows",
            grad.len(),
            a.rows()
        ));
    }
    let mut out = vec![T::zero(); a.cols()];
    atom_correlations_into(a, grad, &mut out);
    Ok(out)
}

pub(crate) fn atom_correlations_into<T: Scalar>(a: &Matrix<T>, grad: &[T], out: &mut [T]) {
    for (o, col) in out.iter_mut().zip(a.columns()) {
        *o = -dot(col, grad);
    }
}
