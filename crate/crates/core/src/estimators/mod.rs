//! Estimators, deviation measurement and planners.

mod assignment;
mod deviation;
mod empirical;
mod grid;
mod hitting;
mod planner;
mod report;

pub use assignment::{max_assignment, min_assignment};
pub use deviation::{sup_deviation, Method};
pub use empirical::{
    empirical_mean, empirical_product_distribution, empirical_product_estimate, EmpiricalMean,
    EmpiricalProduct,
};
pub use grid::{build_product_grid_estimator, IndexMode, ProductGridEstimator, StoredClass, SPLIT_CAP};
pub use hitting::check_grid_hitting;
pub use planner::{phase1_size, phase2_size, product_case_size, SamplingPlan};
pub use report::{quantile, DeviationReport};

use crate::error::Result;
use crate::family::{Member, SetFamily};

pub trait Estimator: Send + Sync {
    fn name(&self) -> String;

    fn estimate(&self, family: &SetFamily, member: &Member) -> Result<f64>;

    /// `w` with `P̂(F_π) = Σ_i w[i][π(i)]` on `[n]²`, when the estimator has that form.
    fn cell_weights(&self, _n: usize) -> Option<Vec<Vec<f64>>> {
        None
    }

    fn product_grid(&self) -> Option<&ProductGridEstimator> {
        None
    }
}
