//! Finite distributions on product index spaces `[n_1] × ⋯ × [n_d]`.
//!
//! All logarithms are natural.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution as _, Exp1, weighted::WeightedAliasIndex};
use serde::{Deserialize, Serialize};

use crate::domain::{Bits, Point, ProductDomain};
use crate::error::{out_of_range, Error, Result};
use crate::family::{Member, SetFamily};
use crate::info::binary_entropy;
use crate::rng;

const TOL: f64 = 1e-12;

fn check_pmf(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what}: empty")));
    }
    if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::InvalidDistribution(format!("{what}: bad entry {x}")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > TOL {
        return Err(Error::InvalidDistribution(format!("{what}: sums to {s}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductDistribution {
    marginals: Vec<Vec<f64>>,
}

impl ProductDistribution {
    pub fn new(marginals: Vec<Vec<f64>>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::InvalidDistribution("no axes".into()));
        }
        for (i, p) in marginals.iter().enumerate() {
            check_pmf(p, &format!("marginal {i}"))?;
        }
        Ok(ProductDistribution { marginals })
    }

    pub fn uniform(sizes: &[usize]) -> Result<Self> {
        Self::new(sizes.iter().map(|&n| vec![1.0 / n as f64; n]).collect())
    }

    pub fn point_mass(sizes: &[usize], atom: &[usize]) -> Result<Self> {
        Self::new(
            sizes
                .iter()
                .zip(atom)
                .map(|(&n, &a)| (0..n).map(|v| if v == a { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    pub fn marginals(&self) -> &[Vec<f64>] {
        &self.marginals
    }

    pub fn marginal(&self, axis: usize) -> &[f64] {
        &self.marginals[axis]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.marginals.iter().map(Vec::len).collect()
    }

    pub fn prob(&self, p: &[usize]) -> f64 {
        p.iter().zip(&self.marginals).map(|(&c, m)| m[c]).product()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureDistribution {
    weights: Vec<f64>,
    components: Vec<ProductDistribution>,
}

impl MixtureDistribution {
    pub fn new(weights: Vec<f64>, components: Vec<ProductDistribution>) -> Result<Self> {
        if components.is_empty() || weights.len() != components.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        check_pmf(&weights, "mixture weights")?;
        let sizes = components[0].sizes();
        if components.iter().any(|c| c.sizes() != sizes) {
            return Err(Error::InvalidDistribution("components on different domains".into()));
        }
        Ok(MixtureDistribution {
            weights,
            components,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[ProductDistribution] {
        &self.components
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.components[0].sizes()
    }

    pub fn prob(&self, p: &[usize]) -> f64 {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| w * c.prob(p))
            .sum()
    }
}

/// Full table over the canonical (row-major) point order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    sizes: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(sizes: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let dom = ProductDomain::with_sizes(&sizes)?;
        if probs.len() != dom.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} entries for {} points",
                probs.len(),
                dom.len()
            )));
        }
        check_pmf(&probs, "joint table")?;
        Ok(JointTable { sizes, probs })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn domain(&self) -> ProductDomain {
        ProductDomain::with_sizes(&self.sizes).expect("validated at construction")
    }

    pub fn prob(&self, p: &[usize]) -> f64 {
        self.probs[self.domain().index_of(p)]
    }

    fn marginal_sums(&self) -> Vec<Vec<f64>> {
        let dom = self.domain();
        let mut m: Vec<Vec<f64>> = self.sizes.iter().map(|&n| vec![0.0; n]).collect();
        for (i, &q) in self.probs.iter().enumerate() {
            for (axis, &c) in dom.point_at(i).coords().iter().enumerate() {
                m[axis][c] += q;
            }
        }
        m
    }
}

/// Any of the three finite distribution kinds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Distribution {
    Product(ProductDistribution),
    Mixture(MixtureDistribution),
    Joint(JointTable),
}

impl From<ProductDistribution> for Distribution {
    fn from(d: ProductDistribution) -> Self {
        Distribution::Product(d)
    }
}

impl From<MixtureDistribution> for Distribution {
    fn from(d: MixtureDistribution) -> Self {
        Distribution::Mixture(d)
    }
}

impl From<JointTable> for Distribution {
    fn from(d: JointTable) -> Self {
        Distribution::Joint(d)
    }
}

impl Distribution {
    pub fn sizes(&self) -> Vec<usize> {
        match self {
            Distribution::Product(d) => d.sizes(),
            Distribution::Mixture(d) => d.sizes(),
            Distribution::Joint(d) => d.sizes.clone(),
        }
    }

    pub fn prob(&self, p: &[usize]) -> f64 {
        match self {
            Distribution::Product(d) => d.prob(p),
            Distribution::Mixture(d) => d.prob(p),
            Distribution::Joint(d) => d.prob(p),
        }
    }

    pub fn to_table(&self) -> JointTable {
        if let Distribution::Joint(t) = self {
            return t.clone();
        }
        let sizes = self.sizes();
        let dom = ProductDomain::with_sizes(&sizes).expect("valid sizes");
        let probs = dom.points().map(|p| self.prob(p.coords())).collect();
        JointTable { sizes, probs }
    }

    pub fn describe(&self) -> String {
        match self {
            Distribution::Product(d) => format!("Product({:?})", d.sizes()),
            Distribution::Mixture(d) => {
                format!("Mixture(k={}, {:?})", d.components.len(), d.sizes())
            }
            Distribution::Joint(d) => format!("Joint({:?})", d.sizes),
        }
    }

    /// `P(P_i = v)` for every axis value.
    pub fn marginals(&self) -> Vec<Vec<f64>> {
        match self {
            Distribution::Product(d) => d.marginals.clone(),
            Distribution::Mixture(d) => {
                let mut out: Vec<Vec<f64>> = d.sizes().iter().map(|&n| vec![0.0; n]).collect();
                for (w, c) in d.weights.iter().zip(&d.components) {
                    for (o, m) in out.iter_mut().zip(&c.marginals) {
                        for (x, y) in o.iter_mut().zip(m) {
                            *x += w * y;
                        }
                    }
                }
                out
            }
            Distribution::Joint(t) => t.marginal_sums(),
        }
    }

    /// `P(F)` by summing member points, with a fast path for permutation graphs.
    pub fn event_probability(&self, family: &SetFamily, member: &Member) -> f64 {
        if let Member::Graph(pi) = member {
            return self.graph_probability(pi);
        }
        let dom = ProductDomain::with_sizes(&self.sizes()).expect("valid sizes");
        let bits = family.encode(member);
        bits.iter_ones().map(|i| self.prob(dom.point_at(i).coords())).sum()
    }

    /// `P(F)` for an indicator over the canonical point order.
    pub fn bits_probability(&self, bits: &Bits) -> f64 {
        let dom = ProductDomain::with_sizes(&self.sizes()).expect("valid sizes");
        bits.iter_ones().map(|i| self.prob(dom.point_at(i).coords())).sum()
    }

    /// `Σ_i P(i, π(i))`.
    pub fn graph_probability(&self, pi: &[usize]) -> f64 {
        match self {
            Distribution::Product(d) => pi
                .iter()
                .enumerate()
                .map(|(i, &j)| d.marginals[0][i] * d.marginals[1][j])
                .sum(),
            _ => pi.iter().enumerate().map(|(i, &j)| self.prob(&[i, j])).sum(),
        }
    }

    pub fn sampler(&self) -> Result<Sampler> {
        let alias = |w: &[f64]| {
            WeightedAliasIndex::new(w.to_vec())
                .map_err(|e| Error::InvalidDistribution(e.to_string()))
        };
        let product = |d: &ProductDistribution| -> Result<Vec<WeightedAliasIndex<f64>>> {
            d.marginals.iter().map(|m| alias(m)).collect()
        };
        Ok(match self {
            Distribution::Product(d) => Sampler::Product(product(d)?),
            Distribution::Mixture(d) => Sampler::Mixture(
                alias(&d.weights)?,
                d.components.iter().map(product).collect::<Result<_>>()?,
            ),
            Distribution::Joint(t) => Sampler::Joint(alias(&t.probs)?, t.domain()),
        })
    }

    /// `m` i.i.d. points, deterministic in `seed`.
    pub fn sample(&self, m: usize, seed: u64) -> Result<Vec<Point>> {
        Ok(self.sampler()?.sample(m, &mut rng::seeded(seed)))
    }
}

/// Precomputed alias tables for repeated sampling.
#[derive(Clone, Debug)]
pub enum Sampler {
    Product(Vec<WeightedAliasIndex<f64>>),
    /// Component index first, then coordinates.
    Mixture(WeightedAliasIndex<f64>, Vec<Vec<WeightedAliasIndex<f64>>>),
    Joint(WeightedAliasIndex<f64>, ProductDomain),
}

impl Sampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            Sampler::Product(axes) => Point::new(axes.iter().map(|a| a.sample(rng)).collect()),
            Sampler::Mixture(w, comps) => {
                let t = w.sample(rng);
                Point::new(comps[t].iter().map(|a| a.sample(rng)).collect())
            }
            Sampler::Joint(a, dom) => dom.point_at(a.sample(rng)),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Vec<Point> {
        (0..m).map(|_| self.draw(rng)).collect()
    }
}

/// `P_□ = P_1 ⊗ ⋯ ⊗ P_d` from exact marginal sums.
pub fn box_projection(p: &JointTable) -> ProductDistribution {
    let marginals = p
        .marginal_sums()
        .into_iter()
        .map(|m| {
            // absorb rounding so the result passes the normalization check
            let s: f64 = m.iter().sum();
            m.into_iter().map(|x| x / s).collect()
        })
        .collect();
    ProductDistribution { marginals }
}

/// `KL(P ‖ P_□)` in nats.
pub fn total_correlation(p: &JointTable) -> f64 {
    let q = box_projection(p);
    let dom = p.domain();
    let mut tc = 0.0;
    for (i, &pi) in p.probs.iter().enumerate() {
        if pi > 0.0 {
            let qi = q.prob(dom.point_at(i).coords());
            assert!(qi > 0.0, "box projection must dominate the joint table");
            tc += pi * (pi / qi).ln();
        }
    }
    let tc = tc.max(0.0);
    assert!(tc.is_finite());
    tc
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSpec {
    cov: DMatrix<f64>,
}

impl GaussianSpec {
    pub fn new(cov: Vec<Vec<f64>>) -> Result<Self> {
        let d = cov.len();
        if d == 0 || cov.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidDistribution("covariance must be square".into()));
        }
        let m = DMatrix::from_fn(d, d, |i, j| cov[i][j]);
        for i in 0..d {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > TOL {
                    return Err(Error::InvalidDistribution("covariance not symmetric".into()));
                }
            }
        }
        if m.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(GaussianSpec { cov: m })
    }

    /// Unit-variance bivariate Gaussian with correlation `rho`.
    pub fn bivariate(rho: f64) -> Result<Self> {
        Self::new(vec![vec![1.0, rho], vec![rho, 1.0]])
    }

    pub fn dim(&self) -> usize {
        self.cov.nrows()
    }
}

/// `½ ln(det diag Σ / det Σ)`, via a Cholesky factor.
pub fn gaussian_total_correlation(spec: &GaussianSpec) -> Result<f64> {
    let chol = spec.cov.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    let log_diag: f64 = spec.cov.diagonal().iter().map(|x| x.ln()).sum();
    Ok(0.5 * (log_diag - log_det))
}

/// `½ ln(1/(1−ρ²))`.
pub fn bivariate_gaussian_total_correlation(rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(-0.5 * (1.0 - rho * rho).ln())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(out_of_range(format!("alpha = {alpha} not in (0, 1]")))
    }
}

/// `α^d / (k − 1 + α)^{d−1}`.
pub fn mixture_modulus(k: usize, d: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if k == 0 || d == 0 {
        return Err(out_of_range("k and d must be at least 1"));
    }
    if k == 1 {
        return Ok(alpha);
    }
    let d = d as i32;
    Ok(alpha.powi(d) / (k as f64 - 1.0 + alpha).powi(d - 1))
}

/// `exp(−(H(α) + C)/α)`.
pub fn tc_modulus(c: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(c >= 0.0) {
        return Err(out_of_range(format!("C = {c} must be nonnegative")));
    }
    Ok((-(binary_entropy(alpha) + c) / alpha).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Modulus {
    Identity,
    Mixture { k: usize, d: usize },
    Tc { c: f64 },
    /// Sorted `(α, β)` knots; a query takes the knot at or below it.
    Custom { table: Vec<(f64, f64)> },
}

impl Modulus {
    pub fn custom(mut table: Vec<(f64, f64)>) -> Result<Self> {
        if table.is_empty() {
            return Err(out_of_range("empty modulus table"));
        }
        table.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prev = 0.0;
        for &(a, b) in &table {
            check_alpha(a)?;
            if !(b > 0.0 && b <= 1.0) || b < prev {
                return Err(out_of_range("table values must be nondecreasing in (0, 1]"));
            }
            prev = b;
        }
        Ok(Modulus::Custom { table })
    }

    pub fn eval(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        match self {
            Modulus::Identity => Ok(alpha),
            Modulus::Mixture { k, d } => mixture_modulus(*k, *d, alpha),
            Modulus::Tc { c } => tc_modulus(*c, alpha),
            Modulus::Custom { table } => table
                .iter()
                .rev()
                .find(|(a, _)| *a <= alpha)
                .map(|&(_, b)| b)
                .ok_or_else(|| out_of_range(format!("alpha = {alpha} below the table"))),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Modulus::Identity => "identity".into(),
            Modulus::Mixture { k, d } => format!("mixture(k={k}, d={d})"),
            Modulus::Tc { c } => format!("tc(C={c})"),
            Modulus::Custom { table } => format!("custom({} knots)", table.len()),
        }
    }
}

/// Diagonal point masses on `[k]^d` with the event made of the first `k − 1`
/// diagonal points: `P(E) = α`, `P_□(E) = α^d/(k−1)^{d−1}`.
pub fn mixture_tightness_instance(
    k: usize,
    d: usize,
    alpha: f64,
) -> Result<(MixtureDistribution, Bits)> {
    if k < 2 || d < 2 {
        return Err(out_of_range("tightness instance needs k ≥ 2 and d ≥ 2"));
    }
    check_alpha(alpha)?;
    let sizes = vec![k; d];
    let components = (0..k)
        .map(|t| ProductDistribution::point_mass(&sizes, &vec![t; d]))
        .collect::<Result<Vec<_>>>()?;
    let mut weights = vec![alpha / (k as f64 - 1.0); k - 1];
    weights.push(1.0 - alpha);
    let s: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= s);
    let dom = ProductDomain::with_sizes(&sizes)?;
    let mut event = Bits::repeat(false, dom.len());
    for t in 0..k - 1 {
        event.set(dom.index_of(&vec![t; d]), true);
    }
    Ok((MixtureDistribution::new(weights, components)?, event))
}

/// Sign patterns and the matching product Bernoullis `⊗ Ber(½ + θ_i ν)`.
#[derive(Clone, Debug)]
pub struct BiasedCube {
    pub nu: f64,
    pub thetas: Vec<Vec<i8>>,
    pub members: Vec<ProductDistribution>,
}

/// Greedy code over `{±1}^d` in lexicographic order (−1 before +1) with
/// pairwise Hamming distance at least `min_dist`.
pub fn gilbert_varshamov_code(d: usize, min_dist: usize) -> Result<Vec<Vec<i8>>> {
    if d == 0 || d > 24 {
        return Err(out_of_range(format!("code width {d} outside 1..=24")));
    }
    let mut words: Vec<u32> = Vec::new();
    for w in 0u32..1 << d {
        if words.iter().all(|&c| ((c ^ w).count_ones() as usize) >= min_dist) {
            words.push(w);
        }
    }
    Ok(words
        .into_iter()
        .map(|w| (0..d).map(|i| if w >> (d - 1 - i) & 1 == 1 { 1 } else { -1 }).collect())
        .collect())
}

/// All `2^d` sign patterns, or a code with distance `≥ ⌈d/4⌉` when `code` is set.
pub fn biased_cube_family(d: usize, nu: f64, code: bool) -> Result<BiasedCube> {
    if !(nu > 0.0 && nu < 0.25) {
        return Err(out_of_range(format!("nu = {nu} not in (0, 1/4)")));
    }
    let min_dist = if code { d.div_ceil(4) } else { 0 };
    let thetas = gilbert_varshamov_code(d, min_dist)?;
    let members = thetas
        .iter()
        .map(|t| {
            ProductDistribution::new(
                t.iter()
                    .map(|&s| {
                        let p = 0.5 + s as f64 * nu;
                        vec![1.0 - p, p]
                    })
                    .collect(),
            )
        })
        .collect::<Result<_>>()?;
    Ok(BiasedCube { nu, thetas, members })
}

/// Flat Dirichlet draw via normalized exponentials.
pub fn random_pmf<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let x: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = x.iter().sum();
    let mut p: Vec<f64> = x.into_iter().map(|v| v / s).collect();
    // push the last entry so the sum is 1 to working precision
    let rest: f64 = p[..n - 1].iter().sum();
    p[n - 1] = (1.0 - rest).max(0.0);
    p
}

pub fn random_product<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> ProductDistribution {
    ProductDistribution::new(sizes.iter().map(|&n| random_pmf(n, rng)).collect())
        .expect("random pmf is normalized")
}

pub fn random_mixture<R: Rng + ?Sized>(k: usize, sizes: &[usize], rng: &mut R) -> MixtureDistribution {
    let weights = random_pmf(k, rng);
    let components = (0..k).map(|_| random_product(sizes, rng)).collect();
    MixtureDistribution::new(weights, components).expect("random mixture is normalized")
}

pub fn random_joint<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> JointTable {
    let n = sizes.iter().product();
    JointTable::new(sizes.to_vec(), random_pmf(n, rng)).expect("random table is normalized")
}

const LOAD_ACCEPT: f64 = 1e-9;
const LOAD_RENORMALIZE: f64 = 1e-6;

fn fix_pmf(p: &mut [f64], what: &str) -> Result<()> {
    let s: f64 = p.iter().sum();
    let gap = (s - 1.0).abs();
    if gap > LOAD_RENORMALIZE || !s.is_finite() {
        return Err(Error::InvalidDistribution(format!("{what}: sums to {s}")));
    }
    if gap > LOAD_ACCEPT {
        log::warn!("{what}: sums to {s}, renormalizing");
    }
    p.iter_mut().for_each(|x| *x /= s);
    Ok(())
}

/// Reads the JSON distribution format.
pub fn load_distribution(json: &str) -> Result<Distribution> {
    let mut d: Distribution = serde_json::from_str(json)?;
    match &mut d {
        Distribution::Product(p) => {
            for (i, m) in p.marginals.iter_mut().enumerate() {
                fix_pmf(m, &format!("marginal {i}"))?;
            }
            ProductDistribution::new(p.marginals.clone())?;
        }
        Distribution::Mixture(mx) => {
            fix_pmf(&mut mx.weights, "mixture weights")?;
            for (t, c) in mx.components.iter_mut().enumerate() {
                for (i, m) in c.marginals.iter_mut().enumerate() {
                    fix_pmf(m, &format!("component {t} marginal {i}"))?;
                }
            }
            MixtureDistribution::new(mx.weights.clone(), mx.components.clone())?;
        }
        Distribution::Joint(t) => {
            fix_pmf(&mut t.probs, "joint table")?;
            JointTable::new(t.sizes.clone(), t.probs.clone())?;
        }
    }
    Ok(d)
}

pub fn save_distribution(d: &Distribution) -> Result<String> {
    Ok(serde_json::to_string_pretty(d)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_samples() {
        let d: Distribution = ProductDistribution::point_mass(&[3, 4], &[2, 1]).unwrap().into();
        let s = d.sample(50, 9).unwrap();
        assert!(s.iter().all(|p| p.coords() == [2, 1]));
    }

    #[test]
    fn sampling_is_deterministic() {
        let d: Distribution = ProductDistribution::uniform(&[5, 5]).unwrap().into();
        assert_eq!(d.sample(100, 1).unwrap(), d.sample(100, 1).unwrap());
        assert_ne!(d.sample(100, 1).unwrap(), d.sample(100, 2).unwrap());
    }

    #[test]
    fn diagonal_projection() {
        let t = JointTable::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let b = box_projection(&t);
        assert_eq!(b.marginals(), &[vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!((total_correlation(&t) - 2f64.ln()).abs() < 1e-15);
        let u = JointTable::new(vec![2, 2], vec![0.25; 4]).unwrap();
        assert_eq!(total_correlation(&u), 0.0);
    }

    #[test]
    fn modulus_examples() {
        assert_eq!(mixture_modulus(1, 3, 0.37).unwrap(), 0.37);
        assert!((mixture_modulus(2, 2, 0.5).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((mixture_modulus(2, 3, 1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((tc_modulus(0.0, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!((tc_modulus(0.7, 1.0).unwrap() - (-0.7f64).exp()).abs() < 1e-15);
        assert!(mixture_modulus(2, 2, 0.0).is_err());
        assert!(tc_modulus(0.0, 1.5).is_err());
    }

    #[test]
    fn custom_modulus() {
        let m = Modulus::custom(vec![(0.5, 0.2), (0.1, 0.01), (1.0, 0.9)]).unwrap();
        assert_eq!(m.eval(0.3).unwrap(), 0.01);
        assert_eq!(m.eval(1.0).unwrap(), 0.9);
        assert!(m.eval(0.05).is_err());
        assert!(Modulus::custom(vec![(0.1, 0.5), (0.2, 0.1)]).is_err());
    }

    #[test]
    fn gaussian_examples() {
        let diag = GaussianSpec::new(vec![vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap();
        assert!(gaussian_total_correlation(&diag).unwrap().abs() < 1e-15);
        let g = GaussianSpec::bivariate(0.6).unwrap();
        let det = gaussian_total_correlation(&g).unwrap();
        let closed = bivariate_gaussian_total_correlation(0.6).unwrap();
        assert!((det - closed).abs() < 1e-10);
        assert!((closed - 0.223_143_551_314_209_7).abs() < 1e-12);
        assert!(bivariate_gaussian_total_correlation(0.99).unwrap() > closed);
        assert!(matches!(
            GaussianSpec::new(vec![vec![1.0, 2.0], vec![2.0, 1.0]]),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn tightness_examples() {
        let (mx, e) = mixture_tightness_instance(2, 2, 0.5).unwrap();
        let p: Distribution = mx.clone().into();
        assert!((p.bits_probability(&e) - 0.5).abs() < 1e-12);
        let b: Distribution = box_projection(&p.to_table()).into();
        assert!((b.bits_probability(&e) - 0.25).abs() < 1e-12);

        let (mx, e) = mixture_tightness_instance(3, 2, 0.6).unwrap();
        let b: Distribution = box_projection(&Distribution::from(mx).to_table()).into();
        assert!((b.bits_probability(&e) - 0.18).abs() < 1e-12);

        let (mx, e) = mixture_tightness_instance(2, 3, 1.0).unwrap();
        assert_eq!(mx.weights()[1], 0.0);
        assert!((Distribution::from(mx).bits_probability(&e) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn biased_cube() {
        let c = biased_cube_family(1, 0.1, false).unwrap();
        assert_eq!(c.thetas.len(), 2);
        let plus = c.thetas.iter().position(|t| t == &[1]).unwrap();
        assert!((c.members[plus].marginal(0)[1] - 0.6).abs() < 1e-15);
        let c = biased_cube_family(2, 0.2, false).unwrap();
        let k = c.thetas.iter().position(|t| t == &[1, -1]).unwrap();
        assert!((c.members[k].marginal(0)[1] - 0.7).abs() < 1e-15);
        assert!((c.members[k].marginal(1)[1] - 0.3).abs() < 1e-15);
        assert!(biased_cube_family(3, 0.25, false).is_err());
    }

    #[test]
    fn loader_tolerances() {
        let ok = r#"{"kind":"product","marginals":[[0.5,0.5],[0.25,0.75]]}"#;
        assert!(matches!(load_distribution(ok).unwrap(), Distribution::Product(_)));
        let near = r#"{"kind":"joint","sizes":[2],"probs":[0.5000004,0.5]}"#;
        let Distribution::Joint(t) = load_distribution(near).unwrap() else { panic!() };
        assert!((t.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let bad = r#"{"kind":"joint","sizes":[2],"probs":[0.6,0.5]}"#;
        assert!(load_distribution(bad).is_err());
        let mx = r#"{"kind":"mixture","weights":[0.5,0.5],"components":[
            {"marginals":[[1.0,0.0]]},{"marginals":[[0.0,1.0]]}]}"#;
        let d = load_distribution(mx).unwrap();
        assert_eq!(load_distribution(&save_distribution(&d).unwrap()).unwrap(), d);
    }

    #[test]
    fn graph_fast_path_agrees() {
        let mut r = rng::seeded(4);
        let fam = SetFamily::permutation_graphs(4).unwrap();
        let dists: Vec<Distribution> = vec![
            random_product(&[4, 4], &mut r).into(),
            random_mixture(3, &[4, 4], &mut r).into(),
            random_joint(&[4, 4], &mut r).into(),
        ];
        for d in &dists {
            for m in fam.members(&Default::default()).unwrap() {
                let fast = d.event_probability(&fam, &m);
                let slow = d.bits_probability(&fam.encode(&m));
                assert!((fast - slow).abs() < 1e-12);
            }
        }
    }
}
