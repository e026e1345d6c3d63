//! Shattering, VC and linear VC dimension, trace counts and grid
//! Sauer–Shelah–Perles bounds.
//!
//! Counting bounds are exact big integers. The aggregation constant uses
//! base-2 entropy, unlike the rest of the crate.

use std::collections::HashSet;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::domain::{AxisLine, Bits, Caps, Grid, Point};
use crate::error::{out_of_range, Error, Result};
use crate::family::{binomial, factorial, hd_permutation_sets, restrict_to_line, Builtin, Repr, SetFamily};
use crate::info::binary_entropy_bits;

/// Largest domain `vc_dimension` will search.
pub const VC_MAX_POINTS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionCert {
    pub dimension: usize,
    pub witness: Vec<Point>,
    /// The line carrying the witness, for linear VC certificates.
    pub line: Option<AxisLine>,
}

fn pattern(member: &Bits, idx: &[usize]) -> u64 {
    idx.iter()
        .enumerate()
        .fold(0, |acc, (k, &i)| acc | (u64::from(member[i]) << k))
}

fn shattered_by(members: &[Bits], idx: &[usize]) -> bool {
    let need = 1usize << idx.len();
    if members.len() < need {
        return false;
    }
    let mut seen = HashSet::with_capacity(need);
    for m in members {
        seen.insert(pattern(m, idx));
        if seen.len() == need {
            return true;
        }
    }
    false
}

/// Largest shattered index set over `points` ground points.
///
/// Shattered sets are closed under subsets, so size `k + 1` candidates are
/// extensions of shattered `k`-sets by a larger index. The search stops at the
/// first size with no shattered set.
fn vc_of_members(members: &[Bits], points: usize) -> (usize, Vec<usize>) {
    let mut level: Vec<Vec<usize>> = vec![vec![]];
    let mut best = vec![];
    while !level.is_empty() && best.len() < 63 {
        let mut next = Vec::new();
        for s in &level {
            let start = s.last().map_or(0, |&i| i + 1);
            for i in start..points {
                let mut t = s.clone();
                t.push(i);
                if shattered_by(members, &t) {
                    next.push(t);
                }
            }
        }
        if let Some(first) = next.first() {
            best = first.clone();
        }
        level = next;
    }
    (best.len(), best)
}

fn member_bits(family: &SetFamily, caps: &Caps) -> Result<Vec<Bits>> {
    Ok(family
        .members(caps)?
        .iter()
        .map(|m| family.encode(m))
        .collect())
}

/// Whether every labelling of `points` is realized by some member.
pub fn shatters(family: &SetFamily, points: &[Point], caps: &Caps) -> Result<bool> {
    if points.len() > 20 {
        return Err(Error::FamilyTooLarge {
            what: format!("{} points to shatter", points.len()),
            cap: 20,
        });
    }
    let dom = family.domain();
    let mut idx = Vec::with_capacity(points.len());
    for p in points {
        dom.check_point(p.coords()).map_err(Error::InvalidDomain)?;
        idx.push(dom.index_of(p.coords()));
    }
    if idx.iter().duplicates().next().is_some() {
        return Err(Error::InvalidDomain("repeated point".into()));
    }
    Ok(shattered_by(&member_bits(family, caps)?, &idx))
}

/// Exact VC dimension over a domain of at most 16 points.
pub fn vc_dimension(family: &SetFamily, caps: &Caps) -> Result<DimensionCert> {
    let dom = family.domain();
    if dom.len() > VC_MAX_POINTS {
        return Err(Error::FamilyTooLarge {
            what: format!("domain of {} points", dom.len()),
            cap: VC_MAX_POINTS,
        });
    }
    let (dimension, idx) = vc_of_members(&member_bits(family, caps)?, dom.len());
    Ok(DimensionCert {
        dimension,
        witness: idx.into_iter().map(|i| dom.point_at(i)).collect(),
        line: None,
    })
}

/// Max over all axis lines of the VC dimension of the line restriction.
/// Ties keep the lowest axis and then the first line in canonical order.
pub fn linear_vc_dimension(family: &SetFamily, caps: &Caps) -> Result<DimensionCert> {
    let dom = family.domain();
    let mut best: Option<DimensionCert> = None;
    for axis in 0..dom.width() {
        let mut seen: HashSet<Vec<Bits>> = HashSet::new();
        for line in dom.axis_lines(axis)? {
            let restricted = restrict_to_line(family, &line, caps)?;
            let Repr::Explicit(members) = restricted.repr() else {
                unreachable!("line restrictions are explicit")
            };
            let mut key = members.clone();
            key.sort();
            if !seen.insert(key) {
                continue;
            }
            let (dim, idx) = vc_of_members(members, restricted.domain().len());
            if best.as_ref().is_none_or(|b| dim > b.dimension) {
                best = Some(DimensionCert {
                    dimension: dim,
                    witness: idx.into_iter().map(|v| line.point(v)).collect(),
                    line: Some(line),
                });
            }
        }
    }
    Ok(best.expect("every domain has at least one line"))
}

/// `Σ_s C(a,s) C(b,s) s!` over the realizable partial injections of the
/// permutation family of `[n]` on a grid with `a` rows and `b` columns.
pub fn permutation_trace_count(n: usize, grid: &Grid) -> BigUint {
    let (a, b) = (grid.axes()[0].len(), grid.axes()[1].len());
    let (missing_rows, missing_cols) = (n - a, n - b);
    let lo = a.saturating_sub(missing_cols).max(b.saturating_sub(missing_rows));
    (lo..=a.min(b))
        .map(|s| binomial(a, s) * binomial(b, s) * factorial(s))
        .sum()
}

/// Number of distinct traces `|{F ∩ G : F ∈ ℱ}|`.
pub fn count_traces(family: &SetFamily, grid: &Grid, caps: &Caps) -> Result<BigUint> {
    if grid.cell_count() == 0 {
        return Ok(BigUint::one());
    }
    if let Some(Builtin::PermutationGraphs { n }) = family.builtin() {
        return Ok(permutation_trace_count(*n, grid));
    }
    Ok(BigUint::from(family.traces(grid, caps)?.len()))
}

/// `Σ_{j ≤ g} C(n, j)`.
pub fn binomle(n: usize, g: usize) -> BigUint {
    if g >= n {
        return BigUint::one() << n;
    }
    (0..=g).map(|j| binomial(n, j)).sum()
}

/// `(e n / g)^g`.
pub fn binomle_upper(n: usize, g: usize) -> Result<f64> {
    if g == 0 || n == 0 {
        return Err(out_of_range("binomle_upper needs n, g ≥ 1"));
    }
    Ok((std::f64::consts::E * n as f64 / g as f64).powi(g as i32))
}

/// `binomle(n_i, g)^{∏_{j≠i} n_j}`.
pub fn grid_ssp_bound(sizes: &[usize], g: usize, axis: usize) -> Result<BigUint> {
    if axis >= sizes.len() {
        return Err(Error::AxisOutOfRange {
            axis,
            width: sizes.len(),
        });
    }
    let exp: usize = sizes
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != axis)
        .map(|(_, &n)| n)
        .product();
    let exp = u32::try_from(exp).map_err(|_| out_of_range("exponent too large"))?;
    Ok(binomle(sizes[axis], g).pow(exp))
}

/// The bound on a longest side: `binomle(n, g)^{|N|/n}` with `n = max n_i`.
pub fn grid_ssp_bound_max_side(sizes: &[usize], g: usize) -> Result<(usize, BigUint)> {
    let axis = sizes
        .iter()
        .enumerate()
        .max_by_key(|&(i, &n)| (n, std::cmp::Reverse(i)))
        .map(|(i, _)| i)
        .ok_or_else(|| out_of_range("no axes"))?;
    Ok((axis, grid_ssp_bound(sizes, g, axis)?))
}

/// `g n^{d−1} log₂(e n / g)`.
pub fn grid_ssp_rate(n: usize, d: usize, g: usize) -> Result<f64> {
    if g == 0 || g > n {
        return Err(out_of_range(format!("rate form needs 1 ≤ g ≤ n, got g={g}, n={n}")));
    }
    let n_f = n as f64;
    Ok(g as f64 * n_f.powi(d as i32 - 1) * (std::f64::consts::E * n_f / g as f64).log2())
}

/// `log₂` of a big integer, accurate to double precision.
pub fn log2_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").log2();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().expect("64 bits").log2() + shift as f64
}

/// Root of `H₂(η) = 1/(T+1)` in `(0, ½)` by bisection.
pub fn aggregation_eta(t: usize) -> Result<f64> {
    if t == 0 {
        return Err(out_of_range("T must be at least 1"));
    }
    let target = 1.0 / (t as f64 + 1.0);
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy_bits(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `c_T (T·vc_base + vc_agg)` with `c_T = 1/(T η)`.
pub fn aggregation_vc_bound(t: usize, vc_base: usize, vc_agg: usize) -> Result<f64> {
    let eta = aggregation_eta(t)?;
    let c = 1.0 / (t as f64 * eta);
    Ok(c * (t * vc_base + vc_agg) as f64)
}

/// All subsets of `[n]^d` meeting every axis-parallel line exactly once.
pub fn enumerate_hd_permutations(n: usize, d: usize, caps: &Caps) -> Result<Vec<Bits>> {
    if d < 2 {
        return Err(out_of_range("need d ≥ 2"));
    }
    hd_permutation_sets(n, d, caps)
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnionCheck {
    /// `|𝒢|`, unions of at most `g` members including the empty union.
    pub exact: BigUint,
    /// `|ℱ|^g / g^{g n^{d−1}}`.
    pub bound: f64,
}

impl UnionCheck {
    pub fn holds(&self) -> bool {
        log2_big(&self.exact) >= self.bound.log2()
    }
}

/// Exact count of unions of at most `g` higher-dimensional permutations
/// against the counting lower bound.
pub fn union_family_lower_check(n: usize, d: usize, g: usize, caps: &Caps) -> Result<UnionCheck> {
    if g == 0 {
        return Err(out_of_range("g must be at least 1"));
    }
    let base = enumerate_hd_permutations(n, d, caps)?;
    let combos: BigUint = (0..=g).map(|r| binomial(base.len(), r)).sum();
    if combos > BigUint::from(caps.members) {
        return Err(Error::FamilyTooLarge {
            what: format!("{combos} unions"),
            cap: caps.members,
        });
    }
    let cells = base.first().map_or(0, |b| b.len());
    let mut unions: HashSet<Bits> = HashSet::new();
    for r in 0..=g {
        for combo in (0..base.len()).combinations(r) {
            let mut u = Bits::repeat(false, cells);
            for &c in &combo {
                u |= base[c].as_bitslice();
            }
            unions.insert(u);
        }
    }
    let lines = (n as f64).powi(d as i32 - 1);
    let log2_bound = g as f64 * (base.len() as f64).log2() - g as f64 * lines * (g as f64).log2();
    Ok(UnionCheck {
        exact: BigUint::from(unions.len()),
        bound: log2_bound.exp2(),
    })
}
