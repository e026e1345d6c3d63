use std::collections::BTreeSet;

use rand::seq::SliceRandom;

use crate::distributions::{MixtureDistribution, ProductDistribution};
use crate::domain::{Bits, ProductDomain};
use crate::error::{out_of_range, Result};
use crate::family::SetFamily;
use crate::rng;

/// Product on `[n]²` with both marginals `∝ i + 1`.
pub fn ramp_product(n: usize) -> Result<ProductDistribution> {
    let total = (n * (n + 1) / 2) as f64;
    let m: Vec<f64> = (0..n).map(|i| (i + 1) as f64 / total).collect();
    ProductDistribution::new(vec![m.clone(), m])
}

/// Even mixture of two products on `[n]²`. The first has both marginals
/// `0.8·Geom(½) + 0.2·Unif` (geometric truncated to `[n]`), the second is
/// its mirror image `i ↦ n − 1 − i`.
pub fn geometric_mixture(n: usize) -> Result<MixtureDistribution> {
    if n == 0 {
        return Err(out_of_range("n must be positive"));
    }
    let norm = 1.0 - 0.5f64.powi(n as i32);
    let f: Vec<f64> = (0..n)
        .map(|v| 0.8 * 0.5f64.powi(v as i32 + 1) / norm + 0.2 / n as f64)
        .collect();
    let rev: Vec<f64> = f.iter().rev().cloned().collect();
    MixtureDistribution::new(
        vec![0.5, 0.5],
        vec![
            ProductDistribution::new(vec![f.clone(), f])?,
            ProductDistribution::new(vec![rev.clone(), rev])?,
        ],
    )
}

/// Permutation graphs on `[n]²` capped at `cap` members, their complements
/// and the empty set. The permutations are the identity, the reversal, every
/// transposition of those two, then seeded uniform draws until `cap` distinct
/// ones are collected.
pub fn hitting_family(n: usize, cap: usize, seed: u64) -> Result<SetFamily> {
    if n < 2 || cap == 0 {
        return Err(out_of_range("hitting family needs n ≥ 2 and a positive cap"));
    }
    let id: Vec<usize> = (0..n).collect();
    let rev: Vec<usize> = (0..n).rev().collect();
    let mut perms: Vec<Vec<usize>> = Vec::new();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut push = |p: Vec<usize>, perms: &mut Vec<Vec<usize>>| {
        if perms.len() < cap && seen.insert(p.clone()) {
            perms.push(p);
        }
    };
    for base in [&id, &rev] {
        push(base.clone(), &mut perms);
    }
    for base in [&id, &rev] {
        for i in 0..n {
            for j in i + 1..n {
                let mut p = base.clone();
                p.swap(i, j);
                push(p, &mut perms);
            }
        }
    }
    let mut r = rng::seeded(seed);
    let mut p = id.clone();
    let distinct_max = (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k)).unwrap_or(usize::MAX);
    while perms.len() < cap.min(distinct_max) {
        p.shuffle(&mut r);
        push(p.clone(), &mut perms);
    }
    let dom = ProductDomain::with_sizes(&[n, n])?;
    let mut members = vec![Bits::repeat(false, dom.len())];
    for p in &perms {
        let mut b = Bits::repeat(false, dom.len());
        for (i, &j) in p.iter().enumerate() {
            b.set(dom.index_of(&[i, j]), true);
        }
        members.push(!b.clone());
        members.push(b);
    }
    SetFamily::explicit(dom, members)
}
