//! The empirical mean and the empirical product estimator.

use crate::distributions::{Distribution, ProductDistribution};
use crate::domain::{build_grid, Caps, Point};
use crate::error::{Error, Result};
use crate::family::{Member, SetFamily};

use super::Estimator;

/// `(1/m) Σ 1[x_t ∈ F]`.
pub fn empirical_mean(sample: &[Point], family: &SetFamily, member: &Member) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let hits = sample
        .iter()
        .filter(|p| family.contains(member, p.coords()))
        .count();
    Ok(hits as f64 / sample.len() as f64)
}

/// `P̃_1 ⊗ ⋯ ⊗ P̃_d` from the empirical marginals.
pub fn empirical_product_distribution(sample: &[Point], sizes: &[usize]) -> Result<ProductDistribution> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let m = sample.len() as f64;
    let mut marg: Vec<Vec<f64>> = sizes.iter().map(|&n| vec![0.0; n]).collect();
    for (index, p) in sample.iter().enumerate() {
        if p.width() != sizes.len() || p.coords().iter().zip(sizes).any(|(c, n)| c >= n) {
            return Err(Error::InvalidPoint {
                index,
                reason: "outside the domain".into(),
            });
        }
        for (axis, &c) in p.coords().iter().enumerate() {
            marg[axis][c] += 1.0;
        }
    }
    for axis in &mut marg {
        axis.iter_mut().for_each(|x| *x /= m);
    }
    ProductDistribution::new(marg)
}

/// `P̃(F)`; permutation graphs use `Σ_i P̃_1(i) P̃_2(π(i))`, other members sum
/// over the cells of the sample grid, which carries all of `P̃`'s mass.
pub fn empirical_product_estimate(
    sample: &[Point],
    family: &SetFamily,
    member: &Member,
    caps: &Caps,
) -> Result<f64> {
    let sizes = family.domain().sizes();
    let pt = empirical_product_distribution(sample, &sizes)?;
    if let Member::Graph(pi) = member {
        return Ok(pi
            .iter()
            .enumerate()
            .map(|(i, &j)| pt.marginal(0)[i] * pt.marginal(1)[j])
            .sum());
    }
    grid_cell_sum(sample, family, member, &pt, caps)
}

pub(crate) fn grid_cell_sum(
    sample: &[Point],
    family: &SetFamily,
    member: &Member,
    pt: &ProductDistribution,
    caps: &Caps,
) -> Result<f64> {
    let grid = build_grid(sample, family.domain())?;
    if grid.cell_count() > caps.cells {
        return Err(Error::FamilyTooLarge {
            what: format!("support grid of {} cells", grid.cell_count()),
            cap: caps.cells,
        });
    }
    Ok(grid
        .cells()
        .filter(|c| family.contains(member, c.coords()))
        .map(|c| pt.prob(c.coords()))
        .sum())
}

/// The empirical mean, as an estimator.
#[derive(Clone, Debug)]
pub struct EmpiricalMean {
    sample: Vec<Point>,
}

impl EmpiricalMean {
    pub fn new(sample: Vec<Point>) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(EmpiricalMean { sample })
    }
}

impl Estimator for EmpiricalMean {
    fn name(&self) -> String {
        "empirical-mean".into()
    }

    fn estimate(&self, family: &SetFamily, member: &Member) -> Result<f64> {
        empirical_mean(&self.sample, family, member)
    }

    fn cell_weights(&self, n: usize) -> Option<Vec<Vec<f64>>> {
        let mut w = vec![vec![0.0; n]; n];
        let unit = 1.0 / self.sample.len() as f64;
        for p in &self.sample {
            if p.width() != 2 || p[0] >= n || p[1] >= n {
                return None;
            }
            w[p[0]][p[1]] += unit;
        }
        Some(w)
    }
}

/// `P̃ = P̃_1 ⊗ ⋯ ⊗ P̃_d`, as an estimator.
#[derive(Clone, Debug)]
pub struct EmpiricalProduct {
    product: ProductDistribution,
}

impl EmpiricalProduct {
    pub fn new(sample: &[Point], sizes: &[usize]) -> Result<Self> {
        Ok(EmpiricalProduct {
            product: empirical_product_distribution(sample, sizes)?,
        })
    }

    pub fn distribution(&self) -> &ProductDistribution {
        &self.product
    }
}

impl Estimator for EmpiricalProduct {
    fn name(&self) -> String {
        "empirical-product".into()
    }

    fn estimate(&self, family: &SetFamily, member: &Member) -> Result<f64> {
        Ok(Distribution::Product(self.product.clone()).event_probability(family, member))
    }

    fn cell_weights(&self, n: usize) -> Option<Vec<Vec<f64>>> {
        let m = self.product.marginals();
        if m.len() != 2 || m[0].len() != n || m[1].len() != n {
            return None;
        }
        Some(m[0].iter().map(|a| m[1].iter().map(|b| a * b).collect()).collect())
    }
}

/// The true distribution, as a zero-error reference estimator.
impl Estimator for Distribution {
    fn name(&self) -> String {
        "truth".into()
    }

    fn estimate(&self, family: &SetFamily, member: &Member) -> Result<f64> {
        Ok(self.event_probability(family, member))
    }

    fn cell_weights(&self, n: usize) -> Option<Vec<Vec<f64>>> {
        if self.sizes() != [n, n] {
            return None;
        }
        Some((0..n).map(|i| (0..n).map(|j| self.prob(&[i, j])).collect()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::ProductDistribution;

    fn pts(v: &[[usize; 2]]) -> Vec<Point> {
        v.iter().map(|&p| Point::from(p)).collect()
    }

    #[test]
    fn mean_examples() {
        let f = SetFamily::permutation_graphs(3).unwrap();
        let id = Member::Graph(vec![0, 1, 2]);
        assert_eq!(empirical_mean(&pts(&[[0, 0], [2, 2]]), &f, &id).unwrap(), 1.0);
        assert_eq!(empirical_mean(&pts(&[[0, 1], [2, 0]]), &f, &id).unwrap(), 0.0);
        assert!(matches!(empirical_mean(&[], &f, &id), Err(Error::EmptySample)));
    }

    #[test]
    fn product_examples() {
        let s = pts(&[[0, 0], [1, 1]]);
        let p = empirical_product_distribution(&s, &[2, 2]).unwrap();
        assert_eq!(p.marginals(), &[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let one = empirical_product_distribution(&pts(&[[1, 0]]), &[2, 2]).unwrap();
        assert_eq!(one, ProductDistribution::point_mass(&[2, 2], &[1, 0]).unwrap());
        let f = SetFamily::permutation_graphs(2).unwrap();
        let id = Member::Graph(vec![0, 1]);
        let caps = Caps::default();
        assert_eq!(empirical_product_estimate(&s, &f, &id, &caps).unwrap(), 0.5);
        assert_eq!(empirical_mean(&s, &f, &id).unwrap(), 1.0);
        let bits = Member::Bits(f.encode(&id));
        assert_eq!(empirical_product_estimate(&s, &f, &bits, &caps).unwrap(), 0.5);
    }

    #[test]
    fn full_and_empty_sets() {
        let dom = crate::domain::ProductDomain::with_sizes(&[3, 3]).unwrap();
        let f = SetFamily::power_set(dom);
        let s = pts(&[[0, 1], [2, 2], [1, 1]]);
        let caps = Caps::default();
        let all = Member::Bits(crate::domain::Bits::repeat(true, 9));
        let none = Member::Bits(crate::domain::Bits::repeat(false, 9));
        assert!((empirical_product_estimate(&s, &f, &all, &caps).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(empirical_product_estimate(&s, &f, &none, &caps).unwrap(), 0.0);
    }
}
