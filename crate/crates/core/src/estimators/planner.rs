//! Sample-size planners.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::combinatorics::log2_big;
use crate::distributions::Modulus;
use crate::error::{out_of_range, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub eps: f64,
    pub delta: f64,
    /// Linear VC dimension of the family.
    pub g: usize,
    pub d: usize,
    pub modulus: Modulus,
    /// Phase-1 constant.
    pub c0: f64,
}

impl SamplingPlan {
    pub fn new(eps: f64, delta: f64, g: usize, d: usize, modulus: Modulus, c0: f64) -> Result<Self> {
        let plan = SamplingPlan {
            eps,
            delta,
            g,
            d,
            modulus,
            c0,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| x > 0.0 && x < 1.0;
        if !unit(self.eps) || !unit(self.delta) {
            return Err(out_of_range(format!(
                "eps = {}, delta = {} must lie in (0, 1)",
                self.eps, self.delta
            )));
        }
        if self.g == 0 || self.d == 0 {
            return Err(out_of_range("g and d must be at least 1"));
        }
        if !(self.c0 > 0.0) {
            return Err(out_of_range("C0 must be positive"));
        }
        Ok(())
    }
}

/// `⌈C₀ d² / β(ε/2)² · (g + ln(1/δ))⌉`.
pub fn phase1_size(plan: &SamplingPlan) -> Result<usize> {
    plan.validate()?;
    let beta = plan.modulus.eval(plan.eps / 2.0)?;
    if !(beta > 0.0) {
        return Err(out_of_range("modulus vanished at eps/2"));
    }
    let d = plan.d as f64;
    let m = plan.c0 * d * d / (beta * beta) * (plan.g as f64 + (1.0 / plan.delta).ln());
    Ok(ceil_size(m))
}

/// `⌈(2/ε²) ln(4 |ℱ_G| / δ)⌉`.
pub fn phase2_size(eps: f64, delta: f64, class_count: &BigUint) -> Result<usize> {
    if !(eps > 0.0 && delta > 0.0) || class_count == &BigUint::ZERO {
        return Err(out_of_range("phase2_size needs eps, delta > 0 and a nonempty class count"));
    }
    let ln_classes = log2_big(class_count) * std::f64::consts::LN_2;
    Ok(ceil_size(2.0 / (eps * eps) * ((4.0 / delta).ln() + ln_classes)))
}

/// `⌈C d²/ε² (g + ln(1/δ))⌉`.
pub fn product_case_size(eps: f64, delta: f64, g: usize, d: usize, c: f64) -> Result<usize> {
    if !(eps > 0.0 && delta > 0.0 && delta < 1.0 && c > 0.0) {
        return Err(out_of_range("product_case_size parameters"));
    }
    let d = d as f64;
    Ok(ceil_size(c * d * d / (eps * eps) * (g as f64 + (1.0 / delta).ln())))
}

// Guards against values like 200.00000000000003 from rounding in ln.
fn ceil_size(x: f64) -> usize {
    let r = x.round();
    let v = if (x - r).abs() < 1e-9 * x.max(1.0) { r } else { x.ceil() };
    v.max(1.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(d: usize, modulus: Modulus) -> SamplingPlan {
        SamplingPlan::new(0.2, 0.1, 1, d, modulus, 1.0).unwrap()
    }

    #[test]
    fn phase1_examples() {
        assert_eq!(phase1_size(&plan(2, Modulus::Identity)).unwrap(), 1322);
        let m2 = phase1_size(&plan(2, Modulus::Identity)).unwrap() as f64;
        let m4 = phase1_size(&plan(4, Modulus::Identity)).unwrap() as f64;
        assert!((m4 / m2 - 4.0).abs() < 0.01);
        let mx = phase1_size(&plan(2, Modulus::Mixture { k: 2, d: 2 })).unwrap() as f64;
        assert!((mx / m2 - 121.0).abs() < 0.2);
    }

    #[test]
    fn phase2_examples() {
        // 200 ln 80000 = 2257.96
        assert_eq!(phase2_size(0.1, 0.05, &BigUint::from(1000u32)).unwrap(), 2258);
        assert_eq!(phase2_size(1.0, 0.5, &BigUint::from(1u32)).unwrap(), 5);
        let mut prev = 0;
        for c in 1u32..200 {
            let m = phase2_size(0.1, 0.1, &BigUint::from(c)).unwrap();
            assert!(m >= prev);
            prev = m;
        }
    }

    #[test]
    fn product_examples() {
        let e = (-1.0f64).exp();
        assert_eq!(product_case_size(0.1, e, 1, 1, 1.0).unwrap(), 200);
        let a = product_case_size(0.1, 0.1, 1, 3, 1.0).unwrap() as f64;
        let b = product_case_size(0.1, 0.1, 1, 6, 1.0).unwrap() as f64;
        assert!((b / a - 4.0).abs() < 0.01);
        let g1 = product_case_size(0.05, e, 1, 1, 1.0).unwrap();
        let g3 = product_case_size(0.05, e, 3, 1, 1.0).unwrap();
        assert_eq!(g1, 800);
        assert_eq!(g3, 1600);
    }
}
