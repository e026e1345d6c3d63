//! Seeded scenario runner with JSON/CSV report emission.

mod fixtures;
mod scenarios;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::estimators::DeviationReport;
use crate::rng;

pub use fixtures::{geometric_mixture, hitting_family, ramp_product};

/// Offset between the master seed and the default calibration seed.
pub const CALIBRATION_SEED_OFFSET: u64 = 0x9e37_79b9;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    /// Constant `C` of the product-case planner.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Constant `C₀` of the phase-1 planner.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_sweep: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration_trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration_seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn for_scenario(name: &str) -> Self {
        ExperimentConfig {
            scenario: Some(name.to_string()),
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.trials == Some(0) {
            return bad("trials must be at least 1".into());
        }
        if self.calibration_trials == Some(0) {
            return bad("calibration_trials must be at least 1".into());
        }
        for (name, v) in [("eps", self.eps), ("delta", self.delta)] {
            if let Some(x) = v {
                if !(x > 0.0 && x < 1.0) {
                    return bad(format!("{name} = {x} not in (0, 1)"));
                }
            }
        }
        if let Some(nu) = self.nu {
            if !(nu > 0.0 && nu < 0.25) {
                return bad(format!("nu = {nu} not in (0, 1/4)"));
            }
        }
        for (name, v) in [("c", self.c), ("c0", self.c0)] {
            if let Some(x) = v {
                if !(x > 0.0 && x.is_finite()) {
                    return bad(format!("{name} = {x} must be positive"));
                }
            }
        }
        if let Some(grid) = &self.calibration_grid {
            if grid.is_empty() || grid.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return bad("calibration_grid must hold positive constants".into());
            }
        }
        if self.m_sweep.as_ref().is_some_and(|s| s.contains(&0)) || self.m == Some(0) {
            return bad("sample sizes must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub criterion: &'static str,
    pub claim: &'static str,
    /// Name of the planner constant this scenario can calibrate.
    pub constant: Option<&'static str>,
}

pub fn catalog() -> &'static [ScenarioInfo] {
    scenarios::CATALOG
}

pub fn scenario_info(name: &str) -> Result<&'static ScenarioInfo> {
    catalog()
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub m: usize,
    pub mean_dev: f64,
    pub q90_dev: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub scenario: String,
    pub constant: String,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    pub trials: usize,
    pub grid: Vec<f64>,
    /// Observed failure frequency per grid value.
    pub failure_rates: Vec<f64>,
    pub passed: Vec<bool>,
    /// Smallest passing grid value, `None` when unbounded on the grid.
    pub chosen: Option<f64>,
    /// Whether every grid value above the smallest passing one also passed.
    pub monotone: bool,
}

impl Calibration {
    /// The chosen constant, or the grid maximum when nothing passed.
    pub fn value(&self) -> f64 {
        self.chosen
            .unwrap_or_else(|| self.grid.iter().cloned().fold(f64::MIN, f64::max))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: String,
    pub criterion: String,
    pub claim: String,
    pub params: BTreeMap<String, Value>,
    pub passed: bool,
    /// The asserted condition with observed values filled in.
    pub assertion: String,
    /// Monte Carlo slack added to the nominal threshold.
    pub slack: Option<f64>,
    /// Binomial standard deviation of the tested frequency.
    pub binomial_sd: Option<f64>,
    pub metrics: BTreeMap<String, f64>,
    pub reports: Vec<DeviationReport>,
    pub curve: Vec<CurvePoint>,
    pub table: Option<Table>,
    pub calibration: Option<Calibration>,
    pub wall_ms: u64,
}

impl ScenarioResult {
    fn new(info: &ScenarioInfo, params: BTreeMap<String, Value>) -> Self {
        ScenarioResult {
            scenario: info.name.to_string(),
            criterion: info.criterion.to_string(),
            claim: info.claim.to_string(),
            params,
            passed: false,
            assertion: String::new(),
            slack: None,
            binomial_sd: None,
            metrics: BTreeMap::new(),
            reports: Vec::new(),
            curve: Vec::new(),
            table: None,
            calibration: None,
            wall_ms: 0,
        }
    }

    fn metric(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.to_string(), v);
    }

    /// One line for terminal output.
    pub fn summary_line(&self) -> String {
        format!(
            "{} [{}] {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion,
            self.scenario,
            self.assertion
        )
    }
}

pub fn run_scenario(config: &ExperimentConfig) -> Result<ScenarioResult> {
    config.validate()?;
    let name = config
        .scenario
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("missing scenario name".into()))?;
    let info = scenario_info(name)?;
    let start = Instant::now();
    let mut result = scenarios::run(info, config)?;
    result.wall_ms = start.elapsed().as_millis() as u64;
    Ok(result)
}

/// Runs the scenario for every grid value of its constant at the nominal
/// `(ε, δ)` and picks the smallest passing one. Every grid value is run so
/// that non-monotone outcomes are visible.
pub fn calibrate_constants(config: &ExperimentConfig) -> Result<Calibration> {
    config.validate()?;
    let name = config
        .scenario
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("missing scenario name".into()))?;
    let info = scenario_info(name)?;
    scenarios::calibrate(info, config)
}

/// Writes the JSON result to `path` and the curve CSV next to it with the
/// `csv` extension. A table, when present, goes to `<stem>_table.csv`.
pub fn emit_report(result: &ScenarioResult, path: &Path) -> Result<Vec<PathBuf>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut json = serde_json::to_string_pretty(result)?;
    json.push('\n');
    fs::write(path, json)?;
    let csv_path = path.with_extension("csv");
    fs::write(&csv_path, curve_csv(&result.curve))?;
    let mut written = vec![path.to_path_buf(), csv_path];
    if let Some(table) = &result.table {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
        let table_path = path.with_file_name(format!("{stem}_table.csv"));
        fs::write(&table_path, table.to_csv())?;
        written.push(table_path);
    }
    Ok(written)
}

pub fn curve_csv(curve: &[CurvePoint]) -> String {
    let mut s = String::from("m,mean_dev,q90_dev\n");
    for p in curve {
        s.push_str(&format!("{},{},{}\n", p.m, p.mean_dev, p.q90_dev));
    }
    s
}

/// Runs `f(rng, trial)` for every trial on the rayon pool. Each trial owns
/// the stream `trial_rng(master, trial)`, so results do not depend on the
/// worker count; output is in trial order.
pub fn run_trials<T, F>(trials: usize, master: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> Result<T> + Sync + Send,
{
    (0..trials as u64)
        .into_par_iter()
        .map(|t| f(&mut rng::trial_rng(master, t), t))
        .collect()
}

/// `√(p(1−p)/trials)`.
pub fn binomial_sd(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials.max(1) as f64).sqrt()
}
