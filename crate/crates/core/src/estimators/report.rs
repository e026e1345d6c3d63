use serde::{Deserialize, Serialize};

/// Per-trial sup-deviations with summary statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub estimator: String,
    pub family: String,
    pub distribution: String,
    pub trials: usize,
    pub seed: u64,
    pub deviations: Vec<f64>,
    pub mean: f64,
    pub q50: f64,
    pub q90: f64,
    pub q99: f64,
    pub wall_ms: u64,
}

impl DeviationReport {
    pub fn new(
        estimator: impl Into<String>,
        family: impl Into<String>,
        distribution: impl Into<String>,
        seed: u64,
        deviations: Vec<f64>,
        wall_ms: u64,
    ) -> Self {
        let mut sorted = deviations.clone();
        sorted.sort_by(f64::total_cmp);
        let mean = if sorted.is_empty() {
            0.0
        } else {
            sorted.iter().sum::<f64>() / sorted.len() as f64
        };
        DeviationReport {
            estimator: estimator.into(),
            family: family.into(),
            distribution: distribution.into(),
            trials: deviations.len(),
            seed,
            mean,
            q50: quantile(&sorted, 0.5),
            q90: quantile(&sorted, 0.9),
            q99: quantile(&sorted, 0.99),
            deviations,
            wall_ms,
        }
    }

    /// Fraction of trials with deviation at least `t`.
    pub fn frac_at_least(&self, t: f64) -> f64 {
        frac(&self.deviations, |d| d >= t)
    }

    /// Fraction of trials with deviation at most `t`.
    pub fn frac_at_most(&self, t: f64) -> f64 {
        frac(&self.deviations, |d| d <= t)
    }
}

fn frac(v: &[f64], f: impl Fn(f64) -> bool) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().filter(|&&d| f(d)).count() as f64 / v.len() as f64
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => 0.0,
        1 => sorted[0],
        n => {
            let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats() {
        let r = DeviationReport::new("e", "f", "p", 3, vec![0.4, 0.1, 0.3, 0.2], 5);
        assert!((r.mean - 0.25).abs() < 1e-15);
        assert!((r.q50 - 0.25).abs() < 1e-15);
        assert_eq!(r.trials, 4);
        assert_eq!(r.deviations, vec![0.4, 0.1, 0.3, 0.2]);
        assert_eq!(r.frac_at_least(0.3), 0.5);
        let json = serde_json::to_value(&r).unwrap();
        let keys: Vec<&str> = json.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        assert_eq!(keys.len(), 11);
    }
}
