//! Datasets: synthetic generation around the nonlinear Bayes curve `ζ`,
//! CSV ingestion with label binarization, deterministic splits and metrics.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::{positive_part, Scalar};

/// Row-major `m x d` feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Features<T> {
    data: Vec<T>,
    dim: usize,
}

impl<T: Scalar> Features<T> {
    pub fn new(data: Vec<T>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return domain("feature dimension must be positive");
        }
        if !data.len().is_multiple_of(dim) {
            return domain(format!(
                "{} values do not form rows of dimension {dim}",
                data.len()
            ));
        }
        Ok(Self { data, dim })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return domain(format!("row {i} has {} values, expected {dim}", r.len()));
            }
            data.extend_from_slice(r);
        }
        Self::new(data, dim)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            data,
            dim: self.dim,
        }
    }
}

/// Provenance of a dataset, written as a `key=value` sidecar.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub source: String,
    pub seed: Option<u64>,
    pub noise: String,
    /// Fraction of labels that differ from the noiseless rule (synthetic only).
    pub realized_noise: Option<f64>,
    pub dropped_rows: usize,
    pub warnings: Vec<String>,
}

impl Meta {
    pub fn to_sidecar(&self) -> String {
        let mut out = String::new();
        out.push_str("format=fcgboost-meta-v1\n");
        out.push_str(&format!("source={}\n", self.source));
        if let Some(s) = self.seed {
            out.push_str(&format!("seed={s}\n"));
        }
        out.push_str(&format!("noise={}\n", self.noise));
        if let Some(r) = self.realized_noise {
            out.push_str(&format!("realized_noise={r}\n"));
        }
        out.push_str(&format!("dropped_rows={}\n", self.dropped_rows));
        for w in &self.warnings {
            out.push_str(&format!("warning={}\n", w.replace('\n', " ")));
        }
        out
    }

    pub fn from_sidecar(text: &str) -> Result<Self> {
        let mut meta = Meta::default();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("meta line without '=': {line}")))?;
            let bad = |e: &dyn fmt::Display| Error::Parse(format!("meta {key}: {e}"));
            match key {
                "format" | "" => {}
                "source" => meta.source = value.to_string(),
                "seed" => meta.seed = Some(value.parse().map_err(|e| bad(&e))?),
                "noise" => meta.noise = value.to_string(),
                "realized_noise" => meta.realized_noise = Some(value.parse().map_err(|e| bad(&e))?),
                "dropped_rows" => meta.dropped_rows = value.parse().map_err(|e| bad(&e))?,
                "warning" => meta.warnings.push(value.to_string()),
                _ => {}
            }
        }
        Ok(meta)
    }
}

/// Inputs with `±1` labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Dataset<T> {
    pub x: Features<T>,
    pub y: Vec<T>,
    pub meta: Meta,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(x: Features<T>, y: Vec<T>, meta: Meta) -> Result<Self> {
        if x.is_empty() {
            return domain("dataset must contain at least one sample");
        }
        if x.len() != y.len() {
            return domain(format!("{} inputs but {} labels", x.len(), y.len()));
        }
        if let Some(bad) = y.iter().find(|&&v| v != T::one() && v != -T::one()) {
            return domain(format!("labels must be +1 or -1, found {bad}"));
        }
        if x.data.iter().any(|v| !v.is_finite()) {
            return domain("features contain non-finite values");
        }
        Ok(Self { x, y, meta })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            x: self.x.select_rows(indices),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            meta: self.meta.clone(),
        }
    }

    /// Writes `x1,...,xd,y` rows with a header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim()).map(|j| format!("x{j}")).collect();
        header.push("y".to_string());
        w.write_record(&header)?;
        for (row, y) in self.x.rows().zip(&self.y) {
            let mut rec: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            rec.push(format!("{}", if *y > T::zero() { 1 } else { -1 }));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the CSV to `path` and the meta sidecar to `path.meta`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))?;
        std::fs::write(sidecar_path(path), self.meta.to_sidecar())?;
        Ok(())
    }

    /// Reads a file produced by [`Dataset::save`]: last column is the `±1` label,
    /// features are taken as stored (no rescaling).
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let table = read_table(file)?;
        let width = table.width;
        if width < 2 {
            return domain("dataset file needs at least one feature and a label column");
        }
        let mut rows = Vec::with_capacity(table.rows.len());
        let mut y = Vec::with_capacity(table.rows.len());
        for (line, rec) in table.rows.iter().enumerate() {
            let values: Option<Vec<f64>> = rec.iter().map(|f| parse_field(f)).collect();
            let values = values.ok_or_else(|| Error::Parse(format!("row {line}: missing or non-numeric field")))?;
            if values.len() != width {
                return Err(Error::Parse(format!("row {line}: expected {width} fields, got {}", values.len())));
            }
            let label = values[width - 1];
            if label != 1.0 && label != -1.0 {
                return Err(Error::Parse(format!("row {line}: label must be +1 or -1, got {label}")));
            }
            y.push(T::lit(label));
            rows.push(values[..width - 1].iter().map(|&v| T::lit(v)).collect::<Vec<T>>());
        }
        let meta = match std::fs::read_to_string(sidecar_path(path)) {
            Ok(text) => Meta::from_sidecar(&text)?,
            Err(_) => Meta {
                source: path.display().to_string(),
                ..Meta::default()
            },
        };
        Dataset::new(Features::from_rows(&rows)?, y, meta)
    }
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    s.into()
}

/// Nonlinear Bayes boundary `ζ(t) = ((1 - 2t)₊⁵ (32t² + 10t + 1) + 1) / 2` on `[0, 1]`.
pub fn zeta<T: Scalar>(t: T) -> Result<T> {
    if !(t >= T::zero() && t <= T::one()) {
        return domain(format!("zeta is defined on [0, 1], got {t}"));
    }
    Ok(zeta_unchecked(t))
}

#[inline]
fn zeta_unchecked<T: Scalar>(t: T) -> T {
    let h = positive_part(T::one() - T::two() * t);
    let poly = T::lit(32.0) * t * t + T::lit(10.0) * t + T::one();
    (h.powi(5) * poly + T::one()) / T::two()
}

/// Noiseless label: `+1` iff `x₂ ≥ ζ(x₁)`.
pub fn bayes_label<T: Scalar>(x1: T, x2: T) -> Result<T> {
    Ok(if x2 >= zeta(x1)? { T::one() } else { -T::one() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Noise {
    None,
    /// Each label flipped independently with probability `level`.
    Uniform { level: f64 },
    /// Labels of points farther than `tol` (vertically) from the Bayes curve
    /// flipped with probability `ratio`.
    Outlier { tol: f64, ratio: f64 },
}

impl Noise {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Noise::None => Ok(()),
            Noise::Uniform { level } => {
                if !(0.0..1.0).contains(&level) {
                    return domain(format!("uniform noise level must be in [0, 1), got {level}"));
                }
                Ok(())
            }
            Noise::Outlier { tol, ratio } => {
                if !(tol > 0.0 && tol.is_finite()) {
                    return domain(format!("outlier tol must be positive, got {tol}"));
                }
                if !(0.0..1.0).contains(&ratio) {
                    return domain(format!("outlier ratio must be in [0, 1), got {ratio}"));
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Noise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Noise::None => write!(f, "none"),
            Noise::Uniform { level } => write!(f, "uniform:{level}"),
            Noise::Outlier { tol, ratio } => write!(f, "outlier:{tol},{ratio}"),
        }
    }
}

impl FromStr for Noise {
    type Err = Error;

    /// `none`, `uniform:LEVEL`, `outlier:TOL,RATIO`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid noise spec '{s}' (none | uniform:L | outlier:TOL,RATIO)"));
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let noise = match kind.trim() {
            "none" | "clean" => Noise::None,
            "uniform" => Noise::Uniform {
                level: args.trim().parse().map_err(|_| bad())?,
            },
            "outlier" => {
                let (tol, ratio) = args.split_once(',').ok_or_else(bad)?;
                Noise::Outlier {
                    tol: tol.trim().parse().map_err(|_| bad())?,
                    ratio: ratio.trim().parse().map_err(|_| bad())?,
                }
            }
            _ => return Err(bad()),
        };
        noise.validate()?;
        Ok(noise)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub m: usize,
    pub noise: Noise,
    pub seed: u64,
}

/// Samples `m` points uniformly on `[0,1]²`, labels `+1` iff `x₂ ≥ ζ(x₁)`,
/// then applies the configured label noise.
pub fn gen_synthetic<T: Scalar>(cfg: &SyntheticConfig) -> Result<Dataset<T>> {
    if cfg.m == 0 {
        return domain("synthetic sample size must be positive");
    }
    cfg.noise.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut data = Vec::with_capacity(2 * cfg.m);
    let mut y = Vec::with_capacity(cfg.m);
    let mut flipped = 0usize;
    for _ in 0..cfg.m {
        let x1: f64 = rng.random();
        let x2: f64 = rng.random();
        let boundary = zeta_unchecked(x1);
        let clean = bayes_label(x1, x2)?;
        // one uniform draw per point keeps the sample stream independent of the noise type
        let u: f64 = rng.random();
        let flip = match cfg.noise {
            Noise::None => false,
            Noise::Uniform { level } => u < level,
            Noise::Outlier { tol, ratio } => (x2 - boundary).abs() > tol && u < ratio,
        };
        if flip {
            flipped += 1;
        }
        data.push(T::lit(x1));
        data.push(T::lit(x2));
        y.push(T::lit(if flip { -clean } else { clean }));
    }
    let meta = Meta {
        source: "synthetic".to_string(),
        seed: Some(cfg.seed),
        noise: cfg.noise.to_string(),
        realized_noise: Some(flipped as f64 / cfg.m as f64),
        dropped_rows: 0,
        warnings: Vec::new(),
    };
    Dataset::new(Features::new(data, 2)?, y, meta)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl FromStr for ColumnRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty column reference".into()));
        }
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        })
    }
}

/// Which raw label values map to the positive class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PositiveSet {
    Values(Vec<f64>),
    /// Closed interval `[lo, hi]`.
    Range(f64, f64),
    /// Anything strictly greater than the threshold.
    Above(f64),
}

impl PositiveSet {
    pub fn contains(&self, v: f64) -> bool {
        match self {
            PositiveSet::Values(vals) => vals.contains(&v),
            PositiveSet::Range(lo, hi) => v >= *lo && v <= *hi,
            PositiveSet::Above(t) => v > *t,
        }
    }
}

impl FromStr for PositiveSet {
    type Err = Error;

    /// `1..4` (closed range), `>0`, or a comma list `1,2,3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("invalid positive-label set '{s}'")))
        };
        if let Some(rest) = s.strip_prefix('>') {
            return Ok(PositiveSet::Above(num(rest)?));
        }
        if let Some((lo, hi)) = s.split_once("..") {
            return Ok(PositiveSet::Range(num(lo)?, num(hi)?));
        }
        let vals = s.split(',').map(num).collect::<Result<Vec<_>>>()?;
        Ok(PositiveSet::Values(vals))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub label: ColumnRef,
    pub positive: PositiveSet,
    /// `None` means every column except the label.
    pub features: Option<Vec<ColumnRef>>,
}

struct RawTable {
    header: Option<Vec<String>>,
    rows: Vec<Vec<String>>,
    width: usize,
}

fn parse_field(field: &str) -> Option<f64> {
    let f = field.trim();
    if f.is_empty() || f == "?" || f.eq_ignore_ascii_case("na") || f.eq_ignore_ascii_case("nan") {
        return None;
    }
    f.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn read_table<R: Read>(reader: R) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        records.push(rec.iter().map(str::to_string).collect::<Vec<_>>());
    }
    let header = match records.first() {
        // a header row has at least one non-empty, non-numeric field
        Some(first) if first.iter().any(|f| !f.is_empty() && f.parse::<f64>().is_err() && f != "?") => {
            Some(records.remove(0))
        }
        _ => None,
    };
    let width = header
        .as_ref()
        .map(Vec::len)
        .or_else(|| records.iter().map(Vec::len).max())
        .unwrap_or(0);
    Ok(RawTable {
        header,
        rows: records,
        width,
    })
}

fn resolve_column(col: &ColumnRef, header: Option<&[String]>, width: usize) -> Result<usize> {
    match col {
        ColumnRef::Index(i) if *i < width => Ok(*i),
        ColumnRef::Index(i) => domain(format!("column index {i} out of range (width {width})")),
        ColumnRef::Name(name) => header
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::Domain(format!("no column named '{name}'"))),
    }
}

/// Loads a numeric CSV (optional header), drops incomplete rows, binarizes the
/// label column and min-max scales every feature column to `[0, 1]`.
pub fn load_csv<T: Scalar>(path: &Path, schema: &CsvSchema) -> Result<Dataset<T>> {
    let file = std::fs::File::open(path)?;
    let mut ds = read_csv(file, schema)?;
    ds.meta.source = path.display().to_string();
    Ok(ds)
}

pub fn read_csv<T: Scalar, R: Read>(reader: R, schema: &CsvSchema) -> Result<Dataset<T>> {
    let table = read_table(reader)?;
    let header = table.header.as_deref();
    let label_col = resolve_column(&schema.label, header, table.width)?;
    let feature_cols: Vec<usize> = match &schema.features {
        Some(cols) => cols
            .iter()
            .map(|c| resolve_column(c, header, table.width))
            .collect::<Result<_>>()?,
        None => (0..table.width).filter(|&c| c != label_col).collect(),
    };
    if feature_cols.is_empty() {
        return domain("no feature columns selected");
    }
    if feature_cols.contains(&label_col) {
        return domain("label column is also listed as a feature");
    }

    let mut raw = Vec::new();
    let mut labels = Vec::new();
    let mut dropped = 0usize;
    for rec in &table.rows {
        let get = |c: usize| rec.get(c).and_then(|f| parse_field(f));
        let label = get(label_col);
        let feats: Option<Vec<f64>> = feature_cols.iter().map(|&c| get(c)).collect();
        match (label, feats) {
            (Some(l), Some(f)) => {
                labels.push(if schema.positive.contains(l) { T::one() } else { -T::one() });
                raw.push(f);
            }
            _ => dropped += 1,
        }
    }
    if raw.is_empty() {
        return domain(format!("no usable rows ({dropped} dropped)"));
    }

    let mut warnings = Vec::new();
    if dropped > 0 {
        warnings.push(format!("dropped {dropped} incomplete or non-numeric rows"));
    }
    let d = feature_cols.len();
    let mut data = vec![T::zero(); raw.len() * d];
    for j in 0..d {
        let (lo, hi) = raw
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r[j]), hi.max(r[j])));
        let span = hi - lo;
        if span == 0.0 {
            warnings.push(format!("feature column {} is constant; scaled to 0", feature_cols[j]));
        }
        for (i, r) in raw.iter().enumerate() {
            data[i * d + j] = if span > 0.0 {
                T::lit((r[j] - lo) / span)
            } else {
                T::zero()
            };
        }
    }
    let meta = Meta {
        source: "csv".to_string(),
        seed: None,
        noise: "unknown".to_string(),
        realized_noise: None,
        dropped_rows: dropped,
        warnings,
    };
    Dataset::new(Features::new(data, d)?, labels, meta)
}

/// Shuffled partition into train/valid/test. Valid and test sizes are
/// `⌊f m⌋`; the remainder goes to train.
pub fn split<T: Scalar>(
    data: &Dataset<T>,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<(Dataset<T>, Dataset<T>, Dataset<T>)> {
    let (ft, fv, fs) = fractions;
    if [ft, fv, fs].iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
        return domain("split fractions must be finite and nonnegative");
    }
    if (ft + fv + fs - 1.0).abs() > 1e-9 {
        return domain(format!("split fractions sum to {}, expected 1", ft + fv + fs));
    }
    let m = data.len();
    let n_valid = (fv * m as f64 + 1e-9).floor() as usize;
    let n_test = (fs * m as f64 + 1e-9).floor() as usize;
    if n_valid + n_test >= m || n_valid == 0 || n_test == 0 {
        return domain(format!("split of {m} samples leaves an empty part"));
    }
    let mut idx: Vec<usize> = (0..m).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = m - n_valid - n_test;
    let train = data.subset(&idx[..n_train]);
    let valid = data.subset(&idx[n_train..n_train + n_valid]);
    let test = data.subset(&idx[n_train + n_valid..]);
    Ok((train, valid, test))
}

/// Fraction of disagreeing labels.
pub fn test_error<T: Scalar>(predicted: &[T], truth: &[T]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return domain(format!(
            "{} predictions but {} labels",
            predicted.len(),
            truth.len()
        ));
    }
    if predicted.is_empty() {
        return domain("test error of an empty sample");
    }
    let wrong = predicted.iter().zip(truth).filter(|(p, t)| p != t).count();
    Ok(wrong as f64 / predicted.len() as f64)
}

pub fn accuracy<T: Scalar>(predicted: &[T], truth: &[T]) -> Result<f64> {
    test_error(predicted, truth).map(|e| 1.0 - e)
}

/// Label balance summary, handy for reports.
pub fn label_counts<T: Scalar>(y: &[T]) -> BTreeMap<&'static str, usize> {
    let pos = y.iter().filter(|&&v| v > T::zero()).count();
    BTreeMap::from([("positive", pos), ("negative", y.len() - pos)])
}
