//! Check records and their deterministic JSON / CSV serialization.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::lattice::CertifiedValue;

/// How the two recorded sides of a check are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    LessEq,
    #[serde(rename = "<")]
    Less,
}

impl Relation {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Relation::LessEq => lhs <= rhs,
            Relation::Less => lhs < rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::LessEq => "<=",
            Relation::Less => "<",
        }
    }
}

/// One asserted inequality with both sides and the evidence behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub parameters: BTreeMap<String, Value>,
    pub values: BTreeMap<String, f64>,
    pub enclosures: BTreeMap<String, CertifiedValue>,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub passed: bool,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>) -> Self {
        CheckRecord {
            name: name.into(),
            parameters: BTreeMap::new(),
            values: BTreeMap::new(),
            enclosures: BTreeMap::new(),
            lhs: f64::NAN,
            relation: Relation::LessEq,
            rhs: f64::NAN,
            passed: false,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn value(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }

    pub fn enclosure(mut self, key: &str, c: CertifiedValue) -> Self {
        self.enclosures.insert(key.to_string(), c);
        self
    }

    /// Records `lhs relation rhs`; non-finite sides never pass.
    pub fn compare(mut self, lhs: f64, relation: Relation, rhs: f64) -> Self {
        self.lhs = lhs;
        self.relation = relation;
        self.rhs = rhs;
        self.passed = lhs.is_finite() && rhs.is_finite() && relation.holds(lhs, rhs);
        self
    }

    /// Canonical ordering key: name, then the serialized parameters.
    fn sort_key(&self) -> (String, String) {
        (
            self.name.clone(),
            serde_json::to_string(&self.parameters).unwrap_or_default(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub seed: u64,
    /// The configuration block the suite ran with, plus the tolerances.
    pub config: Value,
    pub checks: Vec<CheckRecord>,
    /// Empirical constants and other aggregate numbers.
    pub summary: BTreeMap<String, f64>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn new(suite: &str, seed: u64, config: Value, mut checks: Vec<CheckRecord>) -> Self {
        checks.sort_by_key(|c| c.sort_key());
        let passed = checks.iter().all(|c| c.passed);
        VerificationReport {
            suite: suite.to_string(),
            seed,
            config,
            checks,
            summary: BTreeMap::new(),
            passed,
        }
    }

    pub fn with_summary(mut self, key: &str, v: f64) -> Self {
        self.summary.insert(key.to_string(), v);
        self
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `{"reports": [...], "passed": bool}` for any number of reports.
pub fn render_json(reports: &[VerificationReport]) -> Result<String> {
    #[derive(Serialize)]
    struct Bundle<'a> {
        reports: &'a [VerificationReport],
        passed: bool,
    }
    let mut s = serde_json::to_string_pretty(&Bundle {
        reports,
        passed: reports.iter().all(|r| r.passed),
    })?;
    s.push('\n');
    Ok(s)
}

/// One row per check: suite, name, parameters, lhs, relation, rhs, passed.
pub fn render_csv(reports: &[VerificationReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["suite", "check", "parameters", "lhs", "relation", "rhs", "passed"])?;
    for r in reports {
        for c in &r.checks {
            w.write_record([
                r.suite.as_str(),
                c.name.as_str(),
                &serde_json::to_string(&c.parameters)?,
                &format!("{:e}", c.lhs),
                c.relation.symbol(),
                &format!("{:e}", c.rhs),
                if c.passed { "true" } else { "false" },
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Writes `<suite>.json` for every report and `summary.csv` for all of them
/// into `dir`. Returns the written paths.
pub fn emit_report(reports: &[VerificationReport], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(reports.len() + 1);
    for r in reports {
        let path = dir.join(format!("{}.json", r.suite));
        fs::write(&path, r.to_json()?)?;
        paths.push(path);
    }
    let csv_path = dir.join("summary.csv");
    fs::write(&csv_path, render_csv(reports)?)?;
    paths.push(csv_path);
    Ok(paths)
}

/// Wall-clock seconds per suite, kept apart from the reports so those stay
/// byte-identical across runs.
pub fn write_timings(dir: &Path, timings: &BTreeMap<String, f64>) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("timings.json");
    fs::write(&path, serde_json::to_string_pretty(timings)? + "\n")?;
    Ok(path)
}
