//! Three browser entry points over the core crate. Each returns a JSON
//! string; the `*_json` functions hold the logic so they run natively too.

use prodgrid::combinatorics::{grid_ssp_bound_max_side, log2_big, permutation_trace_count};
use prodgrid::distributions::{mixture_modulus, tc_modulus, Distribution, ProductDistribution};
use prodgrid::estimators::{
    sup_deviation, DeviationReport, EmpiricalMean, EmpiricalProduct, Estimator, Method,
};
use prodgrid::experiments::geometric_mixture;
use prodgrid::{build_grid, rng, Caps, Error, Result, SetFamily};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const MAX_N: usize = 200;
const MAX_TRIALS: usize = 2000;

fn out_of_range_error(msg: impl Into<String>) -> Error {
    Error::OutOfRange(msg.into())
}

pub fn modulus_curves_json(k: usize, d: usize, c: f64, points: usize) -> Result<Value> {
    if points < 2 || points > 1000 {
        return Err(out_of_range_error("points must be in 2..=1000"));
    }
    let alpha: Vec<f64> = (1..=points).map(|i| i as f64 / points as f64).collect();
    let mixture = alpha.iter().map(|&a| mixture_modulus(k, d, a)).collect::<Result<Vec<_>>>()?;
    let tc = alpha.iter().map(|&a| tc_modulus(c, a)).collect::<Result<Vec<_>>>()?;
    Ok(json!({ "alpha": alpha, "mixture": mixture, "tc": tc }))
}

/// Sup-deviation over all permutation graphs of `[n]²` under the uniform
/// distribution, one value per seeded trial.
pub fn permutation_deviation_json(
    n: usize,
    m: usize,
    trials: usize,
    seed: u64,
    estimator: &str,
) -> Result<Value> {
    if n < 2 || n > MAX_N || trials == 0 || trials > MAX_TRIALS || m == 0 {
        return Err(out_of_range_error(format!(
            "need 2 ≤ n ≤ {MAX_N}, 1 ≤ trials ≤ {MAX_TRIALS}, m ≥ 1"
        )));
    }
    let family = SetFamily::permutation_graphs(n)?;
    let truth: Distribution = ProductDistribution::uniform(&[n, n])?.into();
    let sampler = truth.sampler()?;
    let caps = Caps::default();
    let mut devs = Vec::with_capacity(trials);
    for t in 0..trials as u64 {
        let sample = sampler.sample(m, &mut rng::trial_rng(seed, t));
        let est: Box<dyn Estimator> = match estimator {
            "mean" => Box::new(EmpiricalMean::new(sample)?),
            "product" => Box::new(EmpiricalProduct::new(&sample, &[n, n])?),
            other => return Err(out_of_range_error(format!("unknown estimator {other}"))),
        };
        devs.push(sup_deviation(est.as_ref(), &family, &truth, Method::Assignment, &caps)?);
    }
    let report = DeviationReport::new(estimator, family.describe(), truth.describe(), seed, devs, 0);
    Ok(serde_json::to_value(report)?)
}

/// Phase-1 grid of `m` points from the two-component mixture on `[n]²`,
/// with the permutation trace count and its grid bound.
pub fn sample_grid_json(n: usize, m: usize, seed: u64) -> Result<Value> {
    if n < 2 || n > MAX_N || m == 0 || m > 100_000 {
        return Err(out_of_range_error(format!("need 2 ≤ n ≤ {MAX_N}, 1 ≤ m ≤ 100000")));
    }
    let truth: Distribution = geometric_mixture(n)?.into();
    let sample = truth.sampler()?.sample(m, &mut rng::seeded(seed));
    let family = SetFamily::permutation_graphs(n)?;
    let grid = build_grid(&sample, family.domain())?;
    let traces = permutation_trace_count(n, &grid);
    let (_, bound) = grid_ssp_bound_max_side(&grid.sizes(), 1)?;
    let points: Vec<[usize; 2]> = sample.iter().map(|p| [p[0], p[1]]).collect();
    Ok(json!({
        "n": n,
        "points": points,
        "rows": grid.axes()[0],
        "cols": grid.axes()[1],
        "traces": traces.to_string(),
        "log2_traces": log2_big(&traces),
        "bound": bound.to_string(),
        "log2_bound": log2_big(&bound),
    }))
}

fn to_js(v: Result<Value>) -> std::result::Result<String, JsError> {
    v.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn modulus_curves(k: usize, d: usize, c: f64, points: usize) -> std::result::Result<String, JsError> {
    to_js(modulus_curves_json(k, d, c, points))
}

#[wasm_bindgen]
pub fn permutation_deviation(
    n: usize,
    m: usize,
    trials: usize,
    seed: u32,
    estimator: &str,
) -> std::result::Result<String, JsError> {
    to_js(permutation_deviation_json(n, m, trials, seed as u64, estimator))
}

#[wasm_bindgen]
pub fn sample_grid(n: usize, m: usize, seed: u32) -> std::result::Result<String, JsError> {
    to_js(sample_grid_json(n, m, seed as u64))
}
