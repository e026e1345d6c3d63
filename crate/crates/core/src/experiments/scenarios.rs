use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;
use serde_json::Value;

use super::{
    binomial_sd, geometric_mixture, hitting_family, ramp_product, run_trials, Calibration,
    CurvePoint, ExperimentConfig, ScenarioInfo, ScenarioResult, Table, CALIBRATION_SEED_OFFSET,
};
use crate::combinatorics::{
    aggregation_eta, count_traces, grid_ssp_bound_max_side, grid_ssp_rate, linear_vc_dimension,
    log2_big, union_family_lower_check, vc_dimension, VC_MAX_POINTS,
};
use crate::distributions::{
    biased_cube_family, box_projection, mixture_modulus, mixture_tightness_instance, random_joint,
    random_mixture, tc_modulus, total_correlation, Distribution, Modulus, ProductDistribution,
};
use crate::domain::{build_grid, Caps, Grid, ProductDomain};
use crate::error::{Error, Result};
use crate::estimators::{
    build_product_grid_estimator, check_grid_hitting, phase1_size, phase2_size, product_case_size,
    sup_deviation, DeviationReport, EmpiricalMean, EmpiricalProduct, IndexMode, Method,
    ProductGridEstimator, SamplingPlan,
};
use crate::family::{symdiff_family, SetFamily};
use crate::info::{
    average_kl_to_mean, bernoulli_bias_kl, binary_entropy_bits, conditional_entropy_uniform_prior,
    fano_error_lower_bound, hellinger_separation_holds, hellinger_sq, hellinger_sq_biased_product,
    kl_additivity_check, kl_divergence, tv_distance,
};
use crate::rng;

pub(super) static CATALOG: &[ScenarioInfo] = &[
    ScenarioInfo {
        name: "perm-empirical-failure",
        criterion: "A1",
        claim: "empirical mean on permutation graphs has sup-deviation at least 3/4 with probability at least 3/4 when m ≤ ½√n",
        constant: None,
    },
    ScenarioInfo {
        name: "perm-product-success",
        criterion: "A2",
        claim: "empirical product estimator on permutation graphs is within ε with probability at least 1−δ at the product-case sample size",
        constant: Some("c"),
    },
    ScenarioInfo {
        name: "deviation-scaling",
        criterion: "A2",
        claim: "sup-deviation of the empirical product estimator decays like C d √(g/m)",
        constant: None,
    },
    ScenarioInfo {
        name: "symdiff-vc",
        criterion: "A3",
        claim: "VC and linear VC dimension of ℱΔℱ are at most 20 times those of ℱ",
        constant: None,
    },
    ScenarioInfo {
        name: "ssp-audit",
        criterion: "A4",
        claim: "grid Sauer–Shelah–Perles bound: traces on N₁×⋯×N_d are at most binomle(n_i, g)^{|N|/n_i}",
        constant: None,
    },
    ScenarioInfo {
        name: "modulus-mixture",
        criterion: "A5",
        claim: "mixtures of k products are box-continuous with modulus α^d/(k−1+α)^{d−1}",
        constant: None,
    },
    ScenarioInfo {
        name: "modulus-tc",
        criterion: "A6",
        claim: "total correlation at most C gives box-continuity with modulus exp(−(H(α)+C)/α)",
        constant: None,
    },
    ScenarioInfo {
        name: "kl-bounds",
        criterion: "A7",
        claim: "KL between biased product Bernoullis is additive and 8ν² ≤ D_ν ≤ 32ν²/3",
        constant: None,
    },
    ScenarioInfo {
        name: "hellinger-closed-form",
        criterion: "A8",
        claim: "exact Hellinger distance between Ber(½+ν)^k and Ber(½−ν)^k",
        constant: None,
    },
    ScenarioInfo {
        name: "fano-omega-d",
        criterion: "A9",
        claim: "Ω(d/ε) samples are needed for TV or uniform estimation over products on the cube",
        constant: None,
    },
    ScenarioInfo {
        name: "grid-hitting",
        criterion: "A10",
        claim: "a phase-1 sample grid hits every symmetric difference of mass at least ε/2 for box-continuous P",
        constant: Some("c0"),
    },
    ScenarioInfo {
        name: "pge-end-to-end",
        criterion: "A11",
        claim: "the two-phase product-grid estimator is uniformly ε-accurate with probability at least 1−δ",
        constant: Some("c0"),
    },
    ScenarioInfo {
        name: "aggregation-constant",
        criterion: "A12",
        claim: "aggregation constant 2c₂ = 1/η < 20 where H₂(η) = 1/(T+1) at T = 2",
        constant: None,
    },
];

/// Monte Carlo slack added to every frequency threshold.
const MC_SLACK: f64 = 0.05;

struct Knobs {
    used: BTreeMap<String, Value>,
}

impl Knobs {
    fn new() -> Self {
        Knobs {
            used: BTreeMap::new(),
        }
    }

    fn get<T: Serialize + Clone>(&mut self, key: &str, v: Option<T>, default: T) -> T {
        let x = v.unwrap_or(default);
        self.set(key, &x);
        x
    }

    fn set<T: Serialize>(&mut self, key: &str, v: &T) {
        let value = serde_json::to_value(v).unwrap_or(Value::Null);
        self.used.insert(key.to_string(), value);
    }
}

fn elapsed_ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

pub(super) fn run(info: &ScenarioInfo, cfg: &ExperimentConfig) -> Result<ScenarioResult> {
    match info.name {
        "perm-empirical-failure" => perm_empirical_failure(info, cfg),
        "perm-product-success" => calibrated_run(info, cfg, &ProductSuccess::new(cfg)?),
        "deviation-scaling" => deviation_scaling(info, cfg),
        "symdiff-vc" => symdiff_vc(info, cfg),
        "ssp-audit" => ssp_audit(info, cfg),
        "modulus-mixture" => modulus_mixture(info, cfg),
        "modulus-tc" => modulus_tc(info, cfg),
        "kl-bounds" => kl_bounds(info, cfg),
        "hellinger-closed-form" => hellinger_closed_form(info, cfg),
        "fano-omega-d" => fano_omega_d(info, cfg),
        "grid-hitting" => calibrated_run(info, cfg, &GridHitting::new(cfg)?),
        "pge-end-to-end" => calibrated_run(info, cfg, &PgeEndToEnd::new(cfg)?),
        "aggregation-constant" => aggregation_constant(info, cfg),
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}

pub(super) fn calibrate(info: &ScenarioInfo, cfg: &ExperimentConfig) -> Result<Calibration> {
    match info.name {
        "perm-product-success" => run_calibration(cfg, &ProductSuccess::new(cfg)?),
        "grid-hitting" => run_calibration(cfg, &GridHitting::new(cfg)?),
        "pge-end-to-end" => run_calibration(cfg, &PgeEndToEnd::new(cfg)?),
        other => Err(Error::MethodInapplicable(format!(
            "{other} has no planner constant to calibrate"
        ))),
    }
}

// Scenarios with a calibratable planner constant

struct Outcome {
    failures: usize,
    trials: usize,
    report: DeviationReport,
    metrics: Vec<(&'static str, f64)>,
}

impl Outcome {
    fn rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }
}

trait Calibrated {
    fn scenario(&self) -> &'static str;
    fn constant(&self) -> &'static str;
    fn eps(&self) -> f64;
    fn delta(&self) -> f64;
    fn default_grid(&self) -> Vec<f64>;
    fn default_trials(&self) -> usize;
    fn default_calibration_trials(&self) -> usize;
    fn knobs(&self) -> &Knobs;
    /// Runs `trials` trials with the given constant and counts failures.
    fn evaluate(&self, constant: f64, trials: usize, seed: u64) -> Result<Outcome>;
    /// Extra checks folded into the verdict, with a description.
    fn side_checks(&self, _seed: u64) -> Result<Option<(bool, String, Vec<(&'static str, f64)>)>> {
        Ok(None)
    }
}

fn run_calibration(cfg: &ExperimentConfig, s: &dyn Calibrated) -> Result<Calibration> {
    let grid = cfg.calibration_grid.clone().unwrap_or_else(|| s.default_grid());
    let trials = cfg.calibration_trials.unwrap_or(s.default_calibration_trials());
    let seed = cfg
        .calibration_seed
        .unwrap_or(cfg.seed().wrapping_add(CALIBRATION_SEED_OFFSET));
    let mut rates = Vec::with_capacity(grid.len());
    for &c in &grid {
        rates.push(s.evaluate(c, trials, seed)?.rate());
    }
    let passed: Vec<bool> = rates.iter().map(|&r| r <= s.delta()).collect();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
    let first = order.iter().position(|&i| passed[i]);
    let chosen = first.map(|p| grid[order[p]]);
    let monotone = first.is_none_or(|p| order[p..].iter().all(|&i| passed[i]));
    if !monotone {
        log::warn!("calibration of {} is not monotone on the grid", s.scenario());
    }
    Ok(Calibration {
        scenario: s.scenario().to_string(),
        constant: s.constant().to_string(),
        eps: s.eps(),
        delta: s.delta(),
        seed,
        trials,
        grid,
        failure_rates: rates,
        passed,
        chosen,
        monotone,
    })
}

fn calibrated_run(
    info: &ScenarioInfo,
    cfg: &ExperimentConfig,
    s: &dyn Calibrated,
) -> Result<ScenarioResult> {
    let given = match s.constant() {
        "c" => cfg.c,
        _ => cfg.c0,
    };
    let calibration = match given {
        Some(_) => None,
        None => Some(run_calibration(cfg, s)?),
    };
    let constant = given.unwrap_or_else(|| calibration.as_ref().map_or(1.0, Calibration::value));
    let trials = cfg.trials.unwrap_or(s.default_trials());
    let seed = cfg.seed();
    let outcome = s.evaluate(constant, trials, seed)?;

    let mut params = s.knobs().used.clone();
    params.insert(s.constant().to_string(), constant.into());
    params.insert("trials".into(), trials.into());
    params.insert("seed".into(), seed.into());
    let mut res = ScenarioResult::new(info, params);
    let rate = outcome.rate();
    let limit = s.delta() + MC_SLACK;
    let mut passed = rate <= limit;
    let mut assertion = format!(
        "failure frequency {rate:.4} ≤ δ + {MC_SLACK} = {limit:.2} at {}={constant}",
        s.constant()
    );
    if let Some(cal) = &calibration {
        if cal.chosen.is_none() {
            assertion.push_str(" (calibration unbounded on the grid)");
        }
    }
    if let Some((ok, text, metrics)) = s.side_checks(seed)? {
        passed &= ok;
        assertion.push_str("; ");
        assertion.push_str(&text);
        for (k, v) in metrics {
            res.metric(k, v);
        }
    }
    res.passed = passed;
    res.assertion = assertion;
    res.slack = Some(MC_SLACK);
    res.binomial_sd = Some(binomial_sd(s.delta(), trials));
    res.metric("failure_rate", rate);
    res.metric("failures", outcome.failures as f64);
    for (k, v) in outcome.metrics {
        res.metric(k, v);
    }
    res.reports.push(outcome.report);
    res.calibration = calibration;
    Ok(res)
}

fn pow2_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 2f64.powi(e)).collect()
}

struct ProductSuccess {
    knobs: Knobs,
    n: usize,
    eps: f64,
    delta: f64,
    g: usize,
    m: Option<usize>,
    family: SetFamily,
    truth: Distribution,
}

impl ProductSuccess {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let mut k = Knobs::new();
        let n = k.get("n", cfg.n, 100);
        let eps = k.get("eps", cfg.eps, 0.1);
        let delta = k.get("delta", cfg.delta, 0.1);
        let g = k.get("g", cfg.g, 1);
        k.set("d", &2);
        if let Some(m) = cfg.m {
            k.set("m", &m);
        }
        Ok(ProductSuccess {
            family: SetFamily::permutation_graphs(n)?,
            truth: ProductDistribution::uniform(&[n, n])?.into(),
            knobs: k,
            n,
            eps,
            delta,
            g,
            m: cfg.m,
        })
    }
}

impl Calibrated for ProductSuccess {
    fn scenario(&self) -> &'static str {
        "perm-product-success"
    }
    fn constant(&self) -> &'static str {
        "c"
    }
    fn eps(&self) -> f64 {
        self.eps
    }
    fn delta(&self) -> f64 {
        self.delta
    }
    fn default_grid(&self) -> Vec<f64> {
        vec![0.25, 0.5, 1.0, 2.0, 4.0]
    }
    fn default_trials(&self) -> usize {
        200
    }
    fn default_calibration_trials(&self) -> usize {
        100
    }
    fn knobs(&self) -> &Knobs {
        &self.knobs
    }

    fn evaluate(&self, c: f64, trials: usize, seed: u64) -> Result<Outcome> {
        let m = match self.m {
            Some(m) => m,
            None => product_case_size(self.eps, self.delta, self.g, 2, c)?,
        };
        let sampler = self.truth.sampler()?;
        let caps = Caps::default();
        let start = Instant::now();
        let devs = run_trials(trials, seed, |r, _| {
            let est = EmpiricalProduct::new(&sampler.sample(m, r), &[self.n, self.n])?;
            sup_deviation(&est, &self.family, &self.truth, Method::Assignment, &caps)
        })?;
        let failures = devs.iter().filter(|&&d| d > self.eps).count();
        let report = DeviationReport::new(
            "empirical-product",
            self.family.describe(),
            self.truth.describe(),
            seed,
            devs,
            elapsed_ms(start),
        );
        Ok(Outcome {
            failures,
            trials,
            report,
            metrics: vec![("m", m as f64)],
        })
    }
}

struct GridHitting {
    knobs: Knobs,
    eps: f64,
    delta: f64,
    g: usize,
    family: SetFamily,
    truth: Distribution,
}

/// Seed of the random part of the grid-hitting family; the family is fixed
/// across trials and master seeds.
const HITTING_FAMILY_SEED: u64 = 20;

impl GridHitting {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let mut k = Knobs::new();
        let n = k.get("n", cfg.n, 20);
        let eps = k.get("eps", cfg.eps, 0.2);
        let delta = k.get("delta", cfg.delta, 0.1);
        let cap = k.get("m", cfg.m, 512);
        let family = hitting_family(n, cap, HITTING_FAMILY_SEED)?;
        let g = match cfg.g {
            Some(g) => g,
            None => linear_vc_dimension(&family, &Caps::default())?.dimension,
        };
        k.set("g", &g);
        k.set("k", &2);
        k.set("d", &2);
        k.set("family", &family.describe());
        Ok(GridHitting {
            truth: geometric_mixture(n)?.into(),
            knobs: k,
            eps,
            delta,
            g,
            family,
        })
    }

    fn plan(&self, c0: f64) -> Result<SamplingPlan> {
        SamplingPlan::new(self.eps, self.delta, self.g.max(1), 2, Modulus::Mixture { k: 2, d: 2 }, c0)
    }
}

impl Calibrated for GridHitting {
    fn scenario(&self) -> &'static str {
        "grid-hitting"
    }
    fn constant(&self) -> &'static str {
        "c0"
    }
    fn eps(&self) -> f64 {
        self.eps
    }
    fn delta(&self) -> f64 {
        self.delta
    }
    fn default_grid(&self) -> Vec<f64> {
        pow2_grid(-16, 0)
    }
    fn default_trials(&self) -> usize {
        500
    }
    fn default_calibration_trials(&self) -> usize {
        100
    }
    fn knobs(&self) -> &Knobs {
        &self.knobs
    }

    fn evaluate(&self, c0: f64, trials: usize, seed: u64) -> Result<Outcome> {
        let m0 = phase1_size(&self.plan(c0)?)?;
        let sampler = self.truth.sampler()?;
        let caps = Caps::default();
        let start = Instant::now();
        let violations = run_trials(trials, seed, |r, _| {
            let grid = build_grid(&sampler.sample(m0, r), self.family.domain())?;
            Ok(check_grid_hitting(&self.family, &grid, &self.truth, self.eps / 2.0, &caps)?.len())
        })?;
        let failures = violations.iter().filter(|&&v| v > 0).count();
        let report = DeviationReport::new(
            "grid-hitting-violations",
            self.family.describe(),
            self.truth.describe(),
            seed,
            violations.iter().map(|&v| v as f64).collect(),
            elapsed_ms(start),
        );
        Ok(Outcome {
            failures,
            trials,
            report,
            metrics: vec![("m0", m0 as f64)],
        })
    }
}

struct PgeEndToEnd {
    knobs: Knobs,
    n: usize,
    eps: f64,
    delta: f64,
    m1: usize,
    family: SetFamily,
    truth: Distribution,
}

impl PgeEndToEnd {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let mut k = Knobs::new();
        let n = k.get("n", cfg.n, 30);
        let eps = k.get("eps", cfg.eps, 0.2);
        let delta = k.get("delta", cfg.delta, 0.1);
        k.set("g", &1);
        k.set("k", &2);
        k.set("d", &2);
        let family = SetFamily::permutation_graphs(n)?;
        let all = family.member_count().expect("permutation count is known");
        let m1 = match cfg.m {
            Some(m) => m,
            None => phase2_size(eps, delta, &all)?,
        };
        k.set("m1", &m1);
        Ok(PgeEndToEnd {
            truth: geometric_mixture(n)?.into(),
            knobs: k,
            n,
            eps,
            delta,
            m1,
            family,
        })
    }

    fn plan(&self, c0: f64) -> Result<SamplingPlan> {
        SamplingPlan::new(self.eps, self.delta, 1, 2, Modulus::Mixture { k: 2, d: 2 }, c0)
    }
}

impl Calibrated for PgeEndToEnd {
    fn scenario(&self) -> &'static str {
        "pge-end-to-end"
    }
    fn constant(&self) -> &'static str {
        "c0"
    }
    fn eps(&self) -> f64 {
        self.eps
    }
    fn delta(&self) -> f64 {
        self.delta
    }
    fn default_grid(&self) -> Vec<f64> {
        pow2_grid(-6, 0)
    }
    fn default_trials(&self) -> usize {
        200
    }
    fn default_calibration_trials(&self) -> usize {
        50
    }
    fn knobs(&self) -> &Knobs {
        &self.knobs
    }

    fn evaluate(&self, c0: f64, trials: usize, seed: u64) -> Result<Outcome> {
        let plan = self.plan(c0)?;
        let m0 = phase1_size(&plan)?;
        let sampler = self.truth.sampler()?;
        let caps = Caps::default();
        let start = Instant::now();
        // A trial whose deviation cannot be computed within the split cap
        // counts as a failure and reports deviation 1.
        let runs = run_trials(trials, seed, |r, _| {
            let sample = sampler.sample(m0 + self.m1, r);
            let est = build_product_grid_estimator(&sample, &self.family, &plan, &caps)?;
            match sup_deviation(&est, &self.family, &self.truth, Method::Assignment, &caps) {
                Ok(d) => Ok((d, true)),
                Err(Error::FamilyTooLarge { .. }) => Ok((1.0, false)),
                Err(e) => Err(e),
            }
        })?;
        let skipped = runs.iter().filter(|r| !r.1).count();
        let devs: Vec<f64> = runs.into_iter().map(|r| r.0).collect();
        let failures = devs.iter().filter(|&&d| d > self.eps).count();
        let report = DeviationReport::new(
            "product-grid",
            self.family.describe(),
            self.truth.describe(),
            seed,
            devs,
            elapsed_ms(start),
        );
        Ok(Outcome {
            failures,
            trials,
            report,
            metrics: vec![
                ("m0", m0 as f64),
                ("m1", self.m1 as f64),
                ("not_evaluable", skipped as f64),
            ],
        })
    }

    fn side_checks(&self, seed: u64) -> Result<Option<(bool, String, Vec<(&'static str, f64)>)>> {
        let diff = pge_cross_check(6, 40, seed)?;
        let ok = diff <= 1e-9;
        Ok(Some((
            ok,
            format!("assignment vs enumeration at n=6 differ by {diff:.2e} ≤ 1e-9"),
            vec![("cross_check_max_diff", diff), ("n_main", self.n as f64)],
        )))
    }
}

/// Largest gap between the assignment and enumeration deviations of the
/// product-grid estimator over `trials` sparse-grid fits at size `n`.
pub(super) fn pge_cross_check(n: usize, trials: usize, seed: u64) -> Result<f64> {
    let family = SetFamily::permutation_graphs(n)?;
    let truth: Distribution = geometric_mixture(n)?.into();
    let sampler = truth.sampler()?;
    let caps = Caps::default();
    let gaps = run_trials(trials, seed, |r, t| {
        let m0 = 1 + t as usize % (2 * n);
        let s = sampler.sample(m0 + 60, r);
        let est = ProductGridEstimator::fit(&s[..m0], &s[m0..], &family, &caps, IndexMode::Auto)?;
        let a = sup_deviation(&est, &family, &truth, Method::Enumerate, &caps)?;
        let b = sup_deviation(&est, &family, &truth, Method::Assignment, &caps)?;
        Ok((a - b).abs())
    })?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

// Monte Carlo scenarios without calibration

fn perm_empirical_failure(info: &ScenarioInfo, cfg: &ExperimentConfig) -> Result<ScenarioResult> {
    let mut k = Knobs::new();
    let n = k.get("n", cfg.n, 100);
    let m = k.get("m", cfg.m, ((n as f64).sqrt() / 2.0).floor().max(1.0) as usize);
    let trials = k.get("trials", cfg.trials, 2000);
    let seed = k.get("seed", cfg.seed, 1);
    let family = SetFamily::permutation_graphs(n)?;
    let truth: Distribution = ProductDistribution::uniform(&[n, n])?.into();
    let sampler = truth.sampler()?;
    let caps = Caps::default();
    let start = Instant::now();
    let devs = run_trials(trials, seed, |r, _| {
        let est = EmpiricalMean::new(sampler.sample(m, r))?;
        sup_deviation(&est, &family, &truth, Method::Assignment, &caps)
    })?;
    let report = DeviationReport::new(
        "empirical-mean",
        family.describe(),
        truth.describe(),
        seed,
        devs,
        elapsed_ms(start),
    );

    let mut res = ScenarioResult::new(info, k.used);
    let freq = report.frac_at_least(0.75);
    let target = 0.75 - MC_SLACK;
    res.passed = freq >= target;
    res.assertion = format!("frequency of sup-deviation ≥ 0.75 is {freq:.4} ≥ {target:.2}");
    res.slack = Some(MC_SLACK);
    res.binomial_sd = Some(binomial_sd(0.75, trials));
    res.metric("frequency", freq);
    res.metric("collision_bound", 1.0 - (m * m) as f64 / n as f64);
    res.reports.push(report);
    Ok(res)
}

fn deviation_scaling(info: &ScenarioInfo, cfg: &ExperimentConfig) -> Result<ScenarioResult> {
    let mut k = Knobs::new();
    let n = k.get("n", cfg.n, 100);
    let sweep = k.get("m_sweep", cfg.m_sweep.clone(), (8..=14).map(|e| 1usize << e).collect());
    let trials = k.get("trials", cfg.trials, 200);
    let seed = k.get("seed", cfg.seed, 1);
    let family = SetFamily::permutation_graphs(n)?;
    let truth: Distribution = ramp_product(n)?.into();
    let sampler = truth.sampler()?;
    let caps = Caps::default();

    let mut res = ScenarioResult::new(info, k.used);
    for &m in &sweep {
        let start = Instant::now();
        let master = seed.wrapping_add(m as u64);
        let devs = run_trials(trials, master, |r, _| {
            let est = EmpiricalProduct::new(&sampler.sample(m, r), &[n, n])?;
            sup_deviation(&est, &family, &truth, Method::Assignment, &caps)
        })?;
        let report = DeviationReport::new(
            format!("empirical-product m={m}"),
            family.describe(),
            truth.describe(),
            master,
            devs,
            elapsed_ms(start),
        );
        res.curve.push(CurvePoint {
            m,
            mean_dev: report.mean,
            q90_dev: report.q90,
        });
        res.reports.push(report);
    }

    let pts: Vec<(f64, f64)> = res
        .curve
        .iter()
        .filter(|p| p.mean_dev > 0.0)
        .map(|p| ((p.m as f64).ln(), p.mean_dev.ln()))
        .collect();
    let Some(slope) = ols_slope(&pts) else {
        res.assertion = "sweep needs at least two distinct sample sizes".into();
        return Ok(res);
    };
    let mean_at = |m: usize| res.curve.iter().find(|p| p.m == m).map(|p| p.mean_dev);
    let ratios: Vec<(usize, f64)> = res
        .curve
        .iter()
        .filter_map(|p| Some((p.m, mean_at(p.m * 4)? / p.mean_dev)))
        .collect();
    let slope_ok = (-0.65..=-0.35).contains(&slope);
    let ratio_ok = ratios.iter().all(|&(_, r)| r <= 0.65);
    res.passed = slope_ok && ratio_ok;
    res.assertion = format!("log-log slope {slope:.3} in [-0.65, -0.35]");
    if let Some(&(m, r)) = ratios.iter().find(|(m, _)| *m == 1024).or(ratios.first()) {
        res.assertion
            .push_str(&format!("; mean(m={}) / mean(m={m}) = {r:.3} ≤ 0.65", 4 * m));
        res.metric("ratio_4x", r);
    }
    res.slack = Some(0.15);
    res.metric("slope", slope);
    Ok(res)
}

fn ols_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (pts.len() >= 2 && sxx > 0.0).then(|| sxy / sxx)
}

// Exact scenarios

fn symdiff_vc(info: &ScenarioInfo, cfg: &ExperimentConfig) -> Result<ScenarioResult> {
    let mut k = Knobs::new();
    let count = k.get("trials", cfg.trials, 100);
    let seed = k.get("seed", cfg.seed, 1);
    let caps = Caps::default();
    let flat: Vec<Vec<usize>> = (1..=10).map(|s| vec![s]).chain([vec![2, 2], vec![2, 3], vec![3, 3], vec![2, 5], vec![2, 2, 2]]).collect();
    let small: Vec<Vec<usize>> = vec![vec![2, 2], vec![2, 3], vec![3, 2], vec![3, 3]];

    let mut table = Table {
        header: ["kind", "sizes", "members", "dim", "dim_symdiff"].map(String::from).to_vec(),
        rows: Vec::new(),
    };
    let mut violations = 0usize;
    let mut worst = 0.0f64;
    for (kind, shapes, stream) in [("vc", &flat, 0u64), ("lvc", &small, 1u64)] {
        let mut r = rng::trial_rng(seed, stream);
        for _ in 0..count {
            let sizes = shapes[r.random_range(0..shapes.len())].clone();
            let dom = ProductDomain::with_sizes(&sizes)?;
            let family = SetFamily::random(dom, r.random_range(1..=8), r.random())?;
            let sym = symdiff_family(&family, &caps)?;
            let (a, b) = if kind == "vc" {
                (vc_dimension(&family, &caps)?.dimension, vc_dimension(&sym, &caps)?.dimension)
            } else {
                (
                    linear_vc_dimension(&family, &caps)?.dimension,
                    linear_vc_dimension(&sym, &caps)?.dimension,
                )
            };
            if b > 20 * a {
                violations += 1;
            }
            if a > 0 {
                worst = worst.max(b as f64 / a as f64);
            }
            table.rows.push(vec![
                kind.to_string(),
                format!("{sizes:?}").replace(',', ";"),
                sym_count(&family).to_string(),
                a.to_string(),
                b.to_string(),
            ]);
        }
    }
    let mut res = ScenarioResult::new(info, k.used);
    res.passed = violations == 0;
    res.assertion = format!(
        "{violations} violations of dim(ℱΔℱ) ≤ 20·dim(ℱ) over {} families; worst ratio {worst:.2}",
        2 * count
    );
    res.metric("violations", violations as f64);
    res.metric("worst_ratio", worst);
    res.table = Some(table);
    Ok(res)
}

fn sym_count(f: &SetFamily) -> usize {
    f.member_count().and_then(|c| usize::try_from(c).ok()).unwrap_or(0)
}

fn ssp_audit(info: &ScenarioInfo, cfg: &ExperimentConfig) -> Result<ScenarioResult> {
    let mut k = Knobs::new();
    let count = k.get("trials", cfg.trials, 100);
    let seed = k.get("seed", cfg.seed, 1);
    let caps = Caps::default();

    let mut cases: Vec<(SetFamily, Grid)> = Vec::new();
    for n in 2..=5 {
        let f = SetFamily::permutation_graphs(n)?;
        cases.push((f.clone(), Grid::full(f.domain())));
    }
    for g in 1..=2 {
        let f = SetFamily::unions_of_permutations(4, g)?;
        cases.push((f.clone(), Grid::full(f.domain())));
    }
    let hd = SetFamily::hd_permutations(3, 3)?;
    cases.push((hd.clone(), Grid::full(hd.domain())));
    let mut r = rng::trial_rng(seed, 0);
    for _ in 0..count {
        let d = r.random_range(1..=3);
        let sizes: Vec<usize> = (0..d).map(|_| r.random_range(1..=4)).collect();
        let dom = ProductDomain::with_sizes(&sizes)?;
        let family = SetFamily::random(dom, r.random_range(1..=20), r.random())?;
        let axes: Vec<Vec<usize>> = sizes
            .iter()
            .map(|&s| {
                let pick: Vec<usize> = (0..s).filter(|_| r.random_bool(0.6)).collect();
                if pick.is_empty() {
                    vec![r.random_range(0..s)]
                } else {
                    pick
                }
            })
            .collect();
        let grid = Grid::from_axes(family.domain(), axes)?;
        cases.push((family, grid));
    }

    let mut table = Table {
        header: ["family", "grid", "g", "vc", "traces", "bound", "rate_bits", "holds"]
            .map(String::from)
            .to_vec(),
        rows: Vec::new(),
    };
    let mut failures = 0usize;
    for (family, grid) in &cases {
        let g = linear_vc_dimension(family, &caps)?.dimension;
        let vc = if family.domain().len() <= VC_MAX_POINTS {
            vc_dimension(family, &caps)?.dimension.to_string()
        } else {
            String::new()
        };
        let sizes = grid.sizes();
        let traces = count_traces(family, grid, &caps)?;
        let (_, bound) = grid_ssp_bound_max_side(&sizes, g)?;
        let n_max = sizes.iter().copied().max().unwrap_or(1);
        let rate = grid_ssp_rate(n_max, sizes.len(), g).ok();
        let mut holds = traces <= bound;
        if let Some(rate) = rate {
            holds &= log2_big(&traces) <= rate + 1e-9;
        }
        if !holds {
            failures += 1;
        }
        table.rows.push(vec![
            family.describe().replace(',', ";"),
            format!("{sizes:?}").replace(',', ";"),
            g.to_string(),
            vc,
            traces.to_string(),
            bound.to_string(),
            rate.map_or(String::new(), |x| format!("{x:.4}")),
            holds.to_string(),
        ]);
    }
    let union = union_family_lower_check(4, 2, 2, &caps)?;
    let union_ok = union.holds() && (union.bound - 2.25).abs() < 1e-12;

    let mut res = ScenarioResult::new(info, k.used);
    res.passed = failures == 0 && union_ok;
    res.assertion = format!(
        "{failures} of {} grids exceed the bound; unions of ≤2 permutations of [4]²: {} ≥ {}",
        cases.len(),
        union.exact,
        union.bound
    );
    res.metric("bound_failures", failures as f64);
    res.metric("union_exact", log2_big(&union.exact).exp2());
    res.metric("union_bound", union.bound);
    res.table = Some(table);
    Ok(res)
}

/// `P(E)` for every event on a domain of at most 16 cells, via two
/// half-word lookup tables.
fn event_sums(p: &[f64]) -> impl Fn(usize) -> f64 + '_ {
    let lo_bits = p.len().min(8);
    let sums = |chunk: &[f64]| -> Vec<f64> {
        (0..1usize << chunk.len())
            .map(|mask| (0..chunk.len()).filter(|i| mask >> i & 1 == 1).map(|i| chunk[i]).sum())
            .collect()
    };
    let lo = sums(&p[..lo_bits]);
    let hi = sums(&p[lo_bits..]);
    move |mask| lo[mask & ((1 << lo_bits) - 1)] + hi[mask >> lo_bits]
}

fn modulus_mixture(info: &ScenarioInfo, cfg: &ExperimentConfig) -> Result<ScenarioResult> {
    let mut k = Knobs::new();
    let count = k.get("trials", cfg.trials, 50);
    let seed = k.get("seed", cfg.seed, 1);
    let alphas: Vec<f64> = (1..20).map(|i| i as f64 * 0.05).collect();
    k.set("alpha_grid", &alphas);
    let mut r = rng::trial_rng(seed, 0);
    let mut checks = 0usize;
    let mut violations = 0usize;
    let mut min_margin = f64::INFINITY;
    for i in 0..count {
        let comps = 1 + i % 3;
        let sizes = vec![r.random_range(2..=4), r.random_range(2..=4)];
        let mixture: Distribution = random_mixture(comps, &sizes, &mut r).into();
        let table = mixture.to_table();
        let boxed = Distribution::Product(box_projection(&table)).to_table();
        let betas: Vec<f64> = alphas
            .iter()
            .map(|&a| mixture_modulus(comps, 2, a))
            .collect::<Result<_>>()?;
        let p = event_sums(table.probs());
        let q = event_sums(boxed.probs());
        for mask in 0..1usize << table.probs().len() {
            let (pe, qe) = (p(mask), q(mask));
            for (&a, &b) in alphas.iter().zip(&betas) {
                if pe >= a {
                    checks += 1;
                    min_margin = min_margin.min(qe - b);
                    if qe < b - 1e-12 {
                        violations += 1;
                    }
                }
            }
        }
    }

    let mut tight_err = 0.0f64;
    for kk in 2..=4usize {
        for d in 2..=3usize {
            for alpha in [0.1, 0.25, 0.5, 0.75, 0.9] {
                let (mix, event) = mixture_tightness_instance(kk, d, alpha)?;
                let mix: Distribution = mix.into();
                let boxed: Distribution = box_projection(&mix.to_table()).into();
                let expected = alpha.powi(d as i32) / ((kk - 1) as f64).powi(d as i32 - 1);
                tight_err = tight_err
                    .max((mix.bits_probability(&event) - alpha).abs())
                    .max((boxed.bits_probability(&event) - expected).abs());
            }
        }
    }
    let mut res = ScenarioResult::new(info, k.used);
    res.passed = violations == 0 && tight_err <= 1e-12;
    res.assertion = format!(
        "{violations} violations over {checks} (event, α) checks; tightness error {tight_err:.1e} ≤ 1e-12"
    );
    res.metric("checks", checks as f64);
    res.metric("violations", violations as f64);
    res.metric("min_margin", min_margin);
    res.metric("tightness_error", tight_err);
    Ok(res)
}

fn modulus_tc(info: &ScenarioInfo, cfg: &ExperimentConfig) -> Result<ScenarioResult> {
    let mut k = Knobs::new();
    let count = k.get("trials", cfg.trials, 50);
    let seed = k.get("seed", cfg.seed, 1);
    let mut r = rng::trial_rng(seed, 0);
    let mut checks = 0usize;
    let mut violations = 0usize;
    let mut min_margin = f64::INFINITY;
    for _ in 0..count {
        let joint = random_joint(&[3, 3], &mut r);
        let tc = total_correlation(&joint);
        let boxed = Distribution::Product(box_projection(&joint)).to_table();
        let p = event_sums(joint.probs());
        let q = event_sums(boxed.probs());
        for mask in 1..1usize << 9 {
            let a = p(mask).min(1.0);
            if a <= 0.0 {
                continue;
            }
            let bound = tc_modulus(tc, a)?;
            checks += 1;
            min_margin = min_margin.min(q(mask) - bound);
            if q(mask) < bound - 1e-10 {
                violations += 1;
            }
        }
    }
    let alpha = 1e-4;
    let asym = (tc_modulus(0.0, alpha)? * std::f64::consts::E / alpha - 1.0).abs();
    let mut res = ScenarioResult::new(info, k.used);
    res.passed = violations == 0 && asym <= 0.01;
    res.assertion = format!(
        "{violations} violations over {checks} events; |β(1e-4)·e/α − 1| = {asym:.2e} ≤ 0.01"
    );
    res.metric("checks", checks as f64);
    res.metric("violations", violations as f64);
    res.metric("min_margin", min_margin);
    res.metric("asymptotic_gap", asym);
    Ok(res)
}

fn product_table(theta: &[i8], nu: f64) -> Result<Vec<f64>> {
    let marginals = theta
        .iter()
        .map(|&s| {
            let p = 0.5 + s as f64 * nu;
            vec![1.0 - p, p]
        })
        .collect();
    Ok(Distribution::Product(ProductDistribution::new(marginals)?)
        .to_table()
        .probs()
        .to_vec())
}

fn kl_bounds(info: &ScenarioInfo, cfg: &ExperimentConfig) -> Result<ScenarioResult> {
    let mut k = Knobs::new();
    let seed = k.get("seed", cfg.seed, 1);
    let mut bound_violations = 0usize;
    for i in 1..=100 {
        let nu = 0.25 * i as f64 / 101.0;
        let dv = bernoulli_bias_kl(nu)?;
        if 8.0 * nu * nu > dv + 1e-12 || dv > 32.0 / 3.0 * nu * nu + 1e-12 {
            bound_violations += 1;
        }
    }
    let mut r = rng::trial_rng(seed, 0);
    let mut add_err = 0.0f64;
    for d in 1..=10 {
        for _ in 0..5 {
            let nu = r.random_range(0.01..0.24);
            let a: Vec<i8> = (0..d).map(|_| if r.random_bool(0.5) { 1 } else { -1 }).collect();
            let b: Vec<i8> = (0..d).map(|_| if r.random_bool(0.5) { 1 } else { -1 }).collect();
            let full = kl_divergence(&product_table(&a, nu)?, &product_table(&b, nu)?)?;
            add_err = add_err.max((full - kl_additivity_check(&a, &b, nu)?).abs());
        }
    }
    let mut res = ScenarioResult::new(info, k.used);
    res.passed = bound_violations == 0 && add_err <= 1e-10;
    res.assertion = format!(
        "{bound_violations} of 100 grid points violate 8ν² ≤ D_ν ≤ 32ν²/3; additivity error {add_err:.1e} ≤ 1e-10"
    );
    res.metric("bound_violations", bound_violations as f64);
    res.metric("additivity_error", add_err);
    Ok(res)
}

fn hellinger_closed_form(info: &ScenarioInfo, cfg: &ExperimentConfig) -> Result<ScenarioResult> {
    let mut k = Knobs::new();
    let seed = k.get("seed", cfg.seed, 1);
    let mut err = 0.0f64;
    for kk in 1..=10 {
        for nu in [0.05, 0.1, 0.2] {
            let p = product_table(&vec![1; kk], nu)?;
            let q = product_table(&vec![-1; kk], nu)?;
            err = err.max((hellinger_sq(&p, &q)? - hellinger_sq_biased_product(nu, kk)?).abs());
        }
    }
    let mut r = rng::trial_rng(seed, 0);
    let mut sep_checks = 0usize;
    let mut sep_failures = 0usize;
    let mut vacuous = 0usize;
    for eps in [0.05, 0.1, 0.2, 0.5, 1.0] {
        for kk in [1usize, 2, 4, 8, 16] {
            let nu0 = (eps / (2.0 * kk as f64)).sqrt();
            if nu0 >= 0.5 {
                vacuous += 1;
                continue;
            }
            for nu in [nu0, r.random_range(nu0..0.5)] {
                sep_checks += 1;
                let h = hellinger_sq_biased_product(nu, kk)?;
                if !hellinger_separation_holds(nu, eps, kk) || h < eps {
                    sep_failures += 1;
                }
            }
        }
    }
    let mut res = ScenarioResult::new(info, k.used);
    res.passed = err <= 1e-10 && sep_failures == 0;
    res.assertion = format!(
        "closed form error {err:.1e} ≤ 1e-10; separation failures {sep_failures} of {sep_checks} ({vacuous} vacuous pairs)"
    );
    res.metric("closed_form_error", err);
    res.metric("separation_failures", sep_failures as f64);
    Ok(res)
}

fn fano_omega_d(info: &ScenarioInfo, cfg: &ExperimentConfig) -> Result<ScenarioResult> {
    let mut k = Knobs::new();
    let d = k.get("d", cfg.d, 8);
    let eps = k.get("eps", cfg.eps, 0.01);
    let nu = k.get("nu", cfg.nu, 4.0 * (eps / d as f64).sqrt());
    let seed = k.get("seed", cfg.seed, 1);
    let cube = biased_cube_family(d, nu, true)?;
    let min_dist = d.div_ceil(4);
    let tables: Vec<Vec<f64>> = cube
        .thetas
        .iter()
        .map(|t| product_table(t, nu))
        .collect::<Result<_>>()?;
    let mut code_ok = true;
    let mut min_tv = f64::INFINITY;
    for a in 0..tables.len() {
        for b in a + 1..tables.len() {
            let dist = cube.thetas[a].iter().zip(&cube.thetas[b]).filter(|(x, y)| x != y).count();
            code_ok &= dist >= min_dist;
            min_tv = min_tv.min(tv_distance(&tables[a], &tables[b])?);
        }
    }
    let m = tables.len();
    let avg_kl = average_kl_to_mean(&tables)?;
    let fano = fano_error_lower_bound(m.max(2), avg_kl)?;

    let mut r = rng::trial_rng(seed, 0);
    let mut identity_err = 0.0f64;
    for _ in 0..50 {
        let rows = r.random_range(2..=4);
        let outs = r.random_range(2..=6);
        let channel: Vec<Vec<f64>> = (0..rows).map(|_| random_joint(&[outs], &mut r).probs().to_vec()).collect();
        let lhs = conditional_entropy_uniform_prior(&channel);
        let rhs = (rows as f64).ln() - average_kl_to_mean(&channel)?;
        identity_err = identity_err.max((lhs - rhs).abs());
    }
    let mut res = ScenarioResult::new(info, k.used);
    let tv_ok = min_tv >= 4.0 * eps;
    res.passed = nu < 0.25 && code_ok && m >= 2 && tv_ok && identity_err <= 1e-10;
    res.assertion = format!(
        "ν = {nu:.4} < 1/4; code of {m} words with distance ≥ {min_dist}: {code_ok}; min TV {min_tv:.4} ≥ 4ε = {:.2}; Fano identity error {identity_err:.1e} ≤ 1e-10",
        4.0 * eps
    );
    res.metric("code_size", m as f64);
    res.metric("code_rate", (m as f64).log2() / d as f64);
    res.metric("min_tv", min_tv);
    res.metric("avg_kl_to_mean", avg_kl);
    res.metric("fano_error_single_sample", fano);
    res.metric("fano_identity_error", identity_err);
    Ok(res)
}

fn aggregation_constant(info: &ScenarioInfo, _cfg: &ExperimentConfig) -> Result<ScenarioResult> {
    let mut k = Knobs::new();
    k.set("t", &2);
    let eta = aggregation_eta(2)?;
    let inv = 1.0 / eta;
    let err = (binary_entropy_bits(eta) - 1.0 / 3.0).abs();
    let mut res = ScenarioResult::new(info, k.used);
    res.passed = inv > 16.0 && inv < 17.0 && err <= 1e-12;
    res.assertion = format!("1/η = {inv:.6} in (16, 17); |H₂(η) − 1/3| = {err:.1e} ≤ 1e-12");
    res.metric("eta", eta);
    res.metric("two_c2", inv);
    res.metric("entropy_error", err);
    Ok(res)
}
