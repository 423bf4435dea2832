use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use nentire_core::config::Tolerances;
use nentire_core::SturmLiouvilleProblem;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const RUNS_FILE: &str = "runs.jsonl";

/// One quantitative check. Hard checks decide the exit status.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "nan_as_null")]
    pub value: f64,
    #[serde(with = "nan_as_null")]
    pub threshold: f64,
    pub pass: bool,
    pub hard: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value <= threshold, hard: true }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value >= threshold, hard: true }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Self { name: name.into(), value: f64::from(u8::from(ok)), threshold: 1.0, pass: ok, hard: true }
    }

    pub fn info(name: &str, value: f64) -> Self {
        Self { name: name.into(), value, threshold: f64::NAN, pass: true, hard: false }
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub outputs: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

impl Outcome {
    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.hard && !c.pass).collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem_hash: String,
    pub problem: serde_json::Value,
    pub command: String,
    pub parameters: serde_json::Value,
    pub outputs: Vec<PathBuf>,
    pub tolerances: Tolerances,
    pub wall_time_s: f64,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub summary: serde_json::Value,
}

pub fn problem_hash(problem: &SturmLiouvilleProblem) -> String {
    let text = serde_json::to_string(&problem.to_config()).expect("problem config serializes");
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

pub fn append(dir: &Path, record: &RunRecord) -> Result<()> {
    let path = dir.join(RUNS_FILE);
    let mut f = OpenOptions::new().create(true).append(true).open(&path).with_context(|| format!("opening {}", path.display()))?;
    writeln!(f, "{}", serde_json::to_string(record)?)?;
    Ok(())
}

/// Records in file order; corrupt lines are reported and skipped.
pub fn load(dir: &Path) -> Result<Vec<RunRecord>> {
    let path = dir.join(RUNS_FILE);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        match serde_json::from_str(line) {
            Ok(r) => out.push(r),
            Err(e) => eprintln!("warning: skipping corrupt record at {}:{}: {e}", path.display(), i + 1),
        }
    }
    Ok(out)
}

/// Writes an RFC-4180 table.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}
