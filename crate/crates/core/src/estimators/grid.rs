//! The two-phase product-grid estimator.
//!
//! Phase 1 builds the grid `G = G(S⁽⁰⁾)` from the first `m₀` points and
//! partitions the family by traces on `G`. Phase 2 estimates one
//! representative per class by its empirical mean on the remaining points. A
//! query returns the stored value of the class with the same trace.
//!
//! Permutation graphs get a lazy index: a trace is a partial injection from
//! grid rows to grid columns, so classes are never materialized.

use std::collections::HashMap;

use itertools::Itertools;
use num_bigint::BigUint;

use crate::combinatorics::permutation_trace_count;
use crate::domain::{build_grid, Caps, Grid, Point, Trace};
use crate::error::{Error, Result};
use crate::family::{binomial, Builtin, Member, SetFamily};

use super::assignment::{max_sub_assignment, min_constrained_assignment};
use super::empirical::empirical_mean;
use super::planner::{phase1_size, phase2_size, SamplingPlan};
use super::Estimator;

/// Largest number of row/column splits the permutation deviation search visits.
pub const SPLIT_CAP: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexMode {
    /// Lazy index for permutation graphs, enumerated classes otherwise.
    Auto,
    /// Always enumerate members and store every class.
    Enumerate,
}

#[derive(Clone, Debug)]
pub struct StoredClass {
    pub trace: Trace,
    pub representative: Member,
    pub estimate: f64,
}

#[derive(Clone, Debug)]
enum TraceIndex {
    Table {
        lookup: HashMap<Trace, usize>,
        classes: Vec<StoredClass>,
    },
    Permutation(PermIndex),
}

#[derive(Clone, Debug)]
struct PermIndex {
    n: usize,
    /// Phase-2 counts per cell.
    counts: Vec<Vec<u32>>,
    row_in: Vec<bool>,
    col_in: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct ProductGridEstimator {
    family: SetFamily,
    grid: Grid,
    m0: usize,
    m1: usize,
    class_count: BigUint,
    index: TraceIndex,
}

/// Splits per the plan and fits. Fails when the remainder after `m₀` is
/// smaller than the phase-2 size for the realized class count.
pub fn build_product_grid_estimator(
    sample: &[Point],
    family: &SetFamily,
    plan: &SamplingPlan,
    caps: &Caps,
) -> Result<ProductGridEstimator> {
    let m0 = phase1_size(plan)?;
    if sample.len() <= m0 {
        return Err(Error::InsufficientSample {
            needed: m0 + 1,
            got: sample.len(),
        });
    }
    let (s0, s1) = sample.split_at(m0);
    let grid = build_grid(s0, family.domain())?;
    let classes = class_count(family, &grid, caps)?;
    let m1 = phase2_size(plan.eps, plan.delta, &classes)?;
    if s1.len() < m1 {
        return Err(Error::InsufficientSample {
            needed: m0 + m1,
            got: sample.len(),
        });
    }
    ProductGridEstimator::fit(s0, s1, family, caps, IndexMode::Auto)
}

fn class_count(family: &SetFamily, grid: &Grid, caps: &Caps) -> Result<BigUint> {
    match family.builtin() {
        Some(Builtin::PermutationGraphs { n }) => Ok(permutation_trace_count(*n, grid)),
        _ => Ok(BigUint::from(family.trace_classes(grid, caps)?.len())),
    }
}

impl ProductGridEstimator {
    /// Fits from an explicit split `S⁽⁰⁾`, `S⁽¹⁾`.
    pub fn fit(
        s0: &[Point],
        s1: &[Point],
        family: &SetFamily,
        caps: &Caps,
        mode: IndexMode,
    ) -> Result<Self> {
        if s1.is_empty() {
            return Err(Error::EmptySample);
        }
        let grid = build_grid(s0, family.domain())?;
        for (k, p) in s1.iter().enumerate() {
            family
                .domain()
                .check_point(p.coords())
                .map_err(|reason| Error::InvalidPoint {
                    index: s0.len() + k,
                    reason,
                })?;
        }
        let structured = match (mode, family.builtin()) {
            (IndexMode::Auto, Some(Builtin::PermutationGraphs { n })) => Some(*n),
            _ => None,
        };
        let (index, class_count) = match structured {
            Some(n) => {
                let mut counts = vec![vec![0u32; n]; n];
                for p in s1 {
                    counts[p[0]][p[1]] += 1;
                }
                let row_in = (0..n).map(|i| grid.contains_value(0, i)).collect();
                let col_in = (0..n).map(|j| grid.contains_value(1, j)).collect();
                (
                    TraceIndex::Permutation(PermIndex {
                        n,
                        counts,
                        row_in,
                        col_in,
                    }),
                    permutation_trace_count(n, &grid),
                )
            }
            None => {
                let classes = family.trace_classes(&grid, caps)?;
                let count = BigUint::from(classes.len());
                let mut lookup = HashMap::with_capacity(classes.len());
                let mut stored = Vec::with_capacity(classes.len());
                for (k, c) in classes.into_iter().enumerate() {
                    let estimate = empirical_mean(s1, family, &c.representative)?;
                    lookup.insert(c.trace.clone(), k);
                    stored.push(StoredClass {
                        trace: c.trace,
                        representative: c.representative,
                        estimate,
                    });
                }
                (
                    TraceIndex::Table {
                        lookup,
                        classes: stored,
                    },
                    count,
                )
            }
        };
        Ok(ProductGridEstimator {
            family: family.clone(),
            grid,
            m0: s0.len(),
            m1: s1.len(),
            class_count,
            index,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn split(&self) -> (usize, usize) {
        (self.m0, self.m1)
    }

    /// `|ℱ_G|`.
    pub fn class_count(&self) -> &BigUint {
        &self.class_count
    }

    /// Stored classes; empty for the lazy permutation index.
    pub fn classes(&self) -> &[StoredClass] {
        match &self.index {
            TraceIndex::Table { classes, .. } => classes,
            TraceIndex::Permutation(_) => &[],
        }
    }

    pub fn is_lazy(&self) -> bool {
        matches!(self.index, TraceIndex::Permutation(_))
    }

    /// Representative of the class of `trace`.
    pub fn representative(&self, trace: &Trace) -> Result<Member> {
        match &self.index {
            TraceIndex::Table { lookup, classes } => lookup
                .get(trace)
                .map(|&k| classes[k].representative.clone())
                .ok_or(Error::TraceNotRepresented),
            TraceIndex::Permutation(ix) => {
                let t = ix.decode(&self.grid, trace)?;
                Ok(Member::Graph(ix.representative(&t)))
            }
        }
    }

    /// The stored estimate for the class of `member`'s trace on the grid.
    pub fn query_estimate(&self, member: &Member) -> Result<f64> {
        let trace = self.family.trace(member, &self.grid);
        self.query_trace(&trace, Some(member))
    }

    pub fn query_trace(&self, trace: &Trace, member: Option<&Member>) -> Result<f64> {
        match &self.index {
            TraceIndex::Table { lookup, classes } => lookup
                .get(trace)
                .map(|&k| classes[k].estimate)
                .ok_or(Error::TraceNotRepresented),
            TraceIndex::Permutation(ix) => {
                let t = match member {
                    Some(Member::Graph(pi)) => ix.partial(pi),
                    _ => ix.decode(&self.grid, trace)?,
                };
                let rep = ix.representative(&t);
                let hits: u64 = rep.iter().enumerate().map(|(i, &j)| ix.counts[i][j] as u64).sum();
                Ok(hits as f64 / self.m1 as f64)
            }
        }
    }

    /// Exact `sup_π |P̂(F_π) − P(F_π)|` for the lazy permutation index, where
    /// `p[i][j]` is the true cell mass.
    ///
    /// For a permutation, let `U` be the rows outside the trace's domain and
    /// `W` the columns outside its image. The representative's values on `U`
    /// depend only on `(U, W)`, so each side of the deviation splits into an
    /// assignment on the trace part and a constrained assignment on `U → W`.
    pub fn permutation_sup_deviation(&self, p: &[Vec<f64>], split_cap: usize) -> Result<f64> {
        let TraceIndex::Permutation(ix) = &self.index else {
            return Err(Error::MethodInapplicable("estimator has no permutation index".into()));
        };
        let n = ix.n;
        let m1 = self.m1 as f64;
        let g1: Vec<usize> = (0..n).filter(|&i| ix.row_in[i]).collect();
        let g2: Vec<usize> = (0..n).filter(|&j| ix.col_in[j]).collect();
        let missing_rows: Vec<usize> = (0..n).filter(|&i| !ix.row_in[i]).collect();
        let missing_cols: Vec<usize> = (0..n).filter(|&j| !ix.col_in[j]).collect();
        let (k, l) = (missing_rows.len(), missing_cols.len());

        let mut splits = BigUint::ZERO;
        for u in 0..=l.min(g1.len()) {
            if k + u >= l {
                splits += binomial(g1.len(), u) * binomial(g2.len(), k + u - l);
            }
        }
        if splits > BigUint::from(split_cap) {
            return Err(Error::FamilyTooLarge {
                what: format!("{splits} row/column splits"),
                cap: split_cap,
            });
        }

        let diff: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| ix.counts[i][j] as f64 / m1 - p[i][j]).collect())
            .collect();
        let neg_diff: Vec<Vec<f64>> = diff.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        let neg_p: Vec<Vec<f64>> = p.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        let allowed: Vec<bool> = ix.col_in.iter().map(|c| !c).collect();

        let mut best = 0.0f64;
        for u in 0..=l.min(g1.len()) {
            if k + u < l || k + u - l > g2.len() {
                continue;
            }
            for u_sub in g1.iter().copied().combinations(u) {
                for w_sub in g2.iter().copied().combinations(k + u - l) {
                    let rows_d: Vec<usize> = g1.iter().copied().filter(|i| !u_sub.contains(i)).collect();
                    let cols_d: Vec<usize> = g2.iter().copied().filter(|j| !w_sub.contains(j)).collect();
                    let rows_u: Vec<usize> = (0..n).filter(|i| !rows_d.contains(i)).collect();
                    let cols_w: Vec<usize> = (0..n).filter(|j| !cols_d.contains(j)).collect();

                    let mut in_u = vec![false; n];
                    rows_u.iter().for_each(|&i| in_u[i] = true);
                    let mut in_w = vec![false; n];
                    cols_w.iter().for_each(|&j| in_w[j] = true);
                    let tail = ix.tail(&in_u, &in_w);
                    let r: f64 = tail.iter().map(|&(i, j)| ix.counts[i][j] as f64).sum::<f64>() / m1;

                    let Some(min_p) =
                        min_constrained_assignment(p, &rows_u, &cols_w, &ix.row_in, &allowed)
                    else {
                        continue;
                    };
                    let max_p = -min_constrained_assignment(&neg_p, &rows_u, &cols_w, &ix.row_in, &allowed)
                        .expect("same feasibility as the minimum");
                    let upper = max_sub_assignment(&diff, &rows_d, &cols_d) + r - min_p;
                    let lower = max_sub_assignment(&neg_diff, &rows_d, &cols_d) - r + max_p;
                    best = best.max(upper).max(lower);
                }
            }
        }
        Ok(best)
    }
}

/// `t[i] = Some(j)` for grid rows whose graph point lies in the grid.
type Partial = Vec<Option<usize>>;

impl PermIndex {
    fn partial(&self, pi: &[usize]) -> Partial {
        pi.iter()
            .enumerate()
            .map(|(i, &j)| (self.row_in[i] && self.col_in[j]).then_some(j))
            .collect()
    }

    /// Partial injection encoded by a trace; errors when no permutation has it.
    fn decode(&self, grid: &Grid, trace: &Trace) -> Result<Partial> {
        if trace.len() != grid.cell_count() {
            return Err(Error::TraceNotRepresented);
        }
        let mut t: Partial = vec![None; self.n];
        let mut col_used = vec![false; self.n];
        for idx in trace.ones() {
            let c = grid.cell(idx);
            let (i, j) = (c[0], c[1]);
            if t[i].is_some() || col_used[j] {
                return Err(Error::TraceNotRepresented);
            }
            t[i] = Some(j);
            col_used[j] = true;
        }
        let s = t.iter().flatten().count();
        let a = self.row_in.iter().filter(|&&b| b).count();
        let b = self.col_in.iter().filter(|&&b| b).count();
        let (k, l) = (self.n - a, self.n - b);
        if a - s > l || b - s > k {
            return Err(Error::TraceNotRepresented);
        }
        Ok(t)
    }

    /// Greedy completion of rows `U` onto columns `W`, taking the largest
    /// feasible column per row so the result has the smallest encoding.
    /// Grid rows in `U` may only use columns outside the grid.
    fn tail(&self, in_u: &[bool], in_w: &[bool]) -> Vec<(usize, usize)> {
        let n = self.n;
        let mut avail = in_w.to_vec();
        let mut free_outside = (0..n).filter(|&j| in_w[j] && !self.col_in[j]).count();
        let mut pending_grid_rows = (0..n).filter(|&i| in_u[i] && self.row_in[i]).count();
        let mut out = Vec::new();
        for i in (0..n).filter(|&i| in_u[i]) {
            let grid_row = self.row_in[i];
            if grid_row {
                pending_grid_rows -= 1;
            }
            let pick = (0..n).rev().find(|&j| {
                if !avail[j] {
                    return false;
                }
                if grid_row {
                    !self.col_in[j]
                } else {
                    self.col_in[j] || pending_grid_rows < free_outside
                }
            });
            let j = pick.expect("completion exists for a realizable trace");
            avail[j] = false;
            if !self.col_in[j] {
                free_outside -= 1;
            }
            out.push((i, j));
        }
        out
    }

    fn representative(&self, t: &Partial) -> Vec<usize> {
        let n = self.n;
        let in_u: Vec<bool> = t.iter().map(Option::is_none).collect();
        let mut in_w = vec![true; n];
        t.iter().flatten().for_each(|&j| in_w[j] = false);
        let mut rep = vec![0; n];
        for (i, j) in t.iter().enumerate() {
            if let Some(j) = j {
                rep[i] = *j;
            }
        }
        for (i, j) in self.tail(&in_u, &in_w) {
            rep[i] = j;
        }
        rep
    }
}

impl Estimator for ProductGridEstimator {
    fn name(&self) -> String {
        "product-grid".into()
    }

    fn estimate(&self, _family: &SetFamily, member: &Member) -> Result<f64> {
        self.query_estimate(member)
    }

    fn product_grid(&self) -> Option<&ProductGridEstimator> {
        Some(self)
    }
}
