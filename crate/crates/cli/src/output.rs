use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fcgboost::boost::TrainTrace;
use fcgboost::solver::SolveTrace;
use fcgboost::Scalar;
use serde_json::{Map, Value};

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

/// Appends one JSON object per line to `metrics.jsonl` and echoes it to stdout.
pub struct MetricsLog {
    path: PathBuf,
    file: File,
}

impl MetricsLog {
    pub fn open(dir: &Path) -> Result<Self> {
        ensure_dir(dir)?;
        let path = dir.join("metrics.jsonl");
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .with_context(|| format!("opening {}", path.display()))?;
        Ok(Self { path, file })
    }

    pub fn emit(&mut self, row: &Map<String, Value>) -> Result<()> {
        let line = serde_json::to_string(row)?;
        writeln!(self.file, "{line}").with_context(|| format!("writing {}", self.path.display()))?;
        self.file.flush()?;
        println!("{line}");
        Ok(())
    }
}

/// CSV of per-iteration records from several cells and repetitions.
pub struct TraceFile {
    writer: csv::Writer<BufWriter<File>>,
}

impl TraceFile {
    pub fn create(path: &Path, columns: &[&str]) -> Result<Self> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut writer = csv::Writer::from_writer(BufWriter::new(file));
        writer.write_record(columns)?;
        Ok(Self { writer })
    }

    pub fn boosting(path: &Path) -> Result<Self> {
        Self::create(
            path,
            &["cell", "rep", "k", "atom", "risk", "max_corr", "solver_iters", "seconds"],
        )
    }

    pub fn solver(path: &Path) -> Result<Self> {
        Self::create(path, &["cell", "rep", "iter", "objective", "residual", "seconds"])
    }

    pub fn push_boosting<T: Scalar>(&mut self, cell: &str, rep: usize, trace: &TrainTrace<T>) -> Result<()> {
        for r in &trace.records {
            self.writer.write_record([
                cell.to_string(),
                rep.to_string(),
                r.k.to_string(),
                r.atom.to_string(),
                r.risk.to_string(),
                r.max_corr.to_string(),
                r.solver_iters.to_string(),
                r.seconds.to_string(),
            ])?;
        }
        self.writer.flush()?;
        Ok(())
    }

    pub fn push_solver<T: Scalar>(&mut self, cell: &str, rep: usize, trace: &SolveTrace<T>) -> Result<()> {
        for r in &trace.records {
            self.writer.write_record([
                cell.to_string(),
                rep.to_string(),
                r.iter.to_string(),
                r.objective.to_string(),
                r.residual.to_string(),
                r.seconds.to_string(),
            ])?;
        }
        self.writer.flush()?;
        Ok(())
    }
}
