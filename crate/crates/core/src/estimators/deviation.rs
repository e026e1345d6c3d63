//! Exact uniform deviation `sup_F |P̂(F) − P(F)|`.

use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::domain::Caps;
use crate::error::{Error, Result};
use crate::family::SetFamily;

use super::assignment::max_assignment;
use super::grid::SPLIT_CAP;
use super::Estimator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Visit every member.
    Enumerate,
    /// Permutation graphs only: solve assignment problems on cell weights.
    Assignment,
}

pub fn sup_deviation(
    estimator: &dyn Estimator,
    family: &SetFamily,
    truth: &Distribution,
    method: Method,
    caps: &Caps,
) -> Result<f64> {
    match method {
        Method::Enumerate => {
            let mut best = 0.0f64;
            for m in family.members(caps)? {
                let d = (estimator.estimate(family, &m)? - truth.event_probability(family, &m)).abs();
                best = best.max(d);
            }
            Ok(best)
        }
        Method::Assignment => {
            let n = family.permutation_size().ok_or_else(|| {
                Error::MethodInapplicable("assignment needs the permutation-graph family".into())
            })?;
            let p = truth
                .cell_weights(n)
                .ok_or_else(|| Error::MethodInapplicable("truth is not on [n]²".into()))?;
            if let Some(pge) = estimator.product_grid() {
                return Ok(pge.permutation_sup_deviation(&p, SPLIT_CAP)?.clamp(0.0, 1.0));
            }
            let w = estimator.cell_weights(n).ok_or_else(|| {
                Error::MethodInapplicable(format!("{} is not additive over cells", estimator.name()))
            })?;
            let diff: Vec<Vec<f64>> = w
                .iter()
                .zip(&p)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
                .collect();
            let neg: Vec<Vec<f64>> = diff.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
            let hi = max_assignment(&diff).0;
            let lo = max_assignment(&neg).0;
            Ok(hi.max(lo).clamp(0.0, 1.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{random_joint, random_product, ProductDistribution};
    use crate::domain::Point;
    use crate::estimators::{EmpiricalMean, EmpiricalProduct, IndexMode, ProductGridEstimator};
    use crate::rng;

    #[test]
    fn truth_has_zero_deviation() {
        let f = SetFamily::permutation_graphs(5).unwrap();
        let t: Distribution = random_product(&[5, 5], &mut rng::seeded(1)).into();
        for method in [Method::Enumerate, Method::Assignment] {
            assert!(sup_deviation(&t, &f, &t, method, &Caps::default()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn birthday_sample() {
        let n = 6;
        let f = SetFamily::permutation_graphs(n).unwrap();
        let t: Distribution = ProductDistribution::uniform(&[n, n]).unwrap().into();
        let s: Vec<Point> = vec![Point::from([0, 3]), Point::from([2, 1])];
        let est = EmpiricalMean::new(s).unwrap();
        for method in [Method::Enumerate, Method::Assignment] {
            let d = sup_deviation(&est, &f, &t, method, &Caps::default()).unwrap();
            assert!((d - (1.0 - 1.0 / n as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn assignment_matches_enumeration() {
        let caps = Caps::default();
        let mut r = rng::seeded(5);
        for n in 2..=6 {
            let f = SetFamily::permutation_graphs(n).unwrap();
            for trial in 0..100 {
                let truth: Distribution = random_joint(&[n, n], &mut r).into();
                let s = truth.sample(1 + trial % 12, trial as u64).unwrap();
                let a = EmpiricalMean::new(s.clone()).unwrap();
                let b = EmpiricalProduct::new(&s, &[n, n]).unwrap();
                for est in [&a as &dyn Estimator, &b] {
                    let x = sup_deviation(est, &f, &truth, Method::Enumerate, &caps).unwrap();
                    let y = sup_deviation(est, &f, &truth, Method::Assignment, &caps).unwrap();
                    assert!((x - y).abs() < 1e-12, "n={n} {}: {x} vs {y}", est.name());
                }
            }
        }
    }

    #[test]
    fn grid_estimator_assignment_matches_enumeration() {
        let caps = Caps::default();
        let mut r = rng::seeded(9);
        for n in 2..=6 {
            let f = SetFamily::permutation_graphs(n).unwrap();
            for trial in 0..40u64 {
                let truth: Distribution = random_joint(&[n, n], &mut r).into();
                let s = truth.sample(30, trial).unwrap();
                let m0 = 1 + trial as usize % (2 * n);
                let est = ProductGridEstimator::fit(&s[..m0], &s[m0..], &f, &caps, IndexMode::Auto).unwrap();
                let x = sup_deviation(&est, &f, &truth, Method::Enumerate, &caps).unwrap();
                let y = sup_deviation(&est, &f, &truth, Method::Assignment, &caps).unwrap();
                assert!((x - y).abs() < 1e-12, "n={n} m0={m0}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn assignment_needs_permutations() {
        let dom = crate::domain::ProductDomain::with_sizes(&[2, 2]).unwrap();
        let f = SetFamily::power_set(dom);
        let t: Distribution = ProductDistribution::uniform(&[2, 2]).unwrap().into();
        assert!(matches!(
            sup_deviation(&t, &f, &t, Method::Assignment, &Caps::default()),
            Err(Error::MethodInapplicable(_))
        ));
    }
}
