//! Set families over a product domain.
//!
//! Three representations share one API: explicit bit-vector members, membership
//! oracles, and structured built-ins. Member enumeration order is documented
//! per family and is what "first encountered" refers to elsewhere.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{AxisLine, Bits, Caps, Grid, ProductDomain, Trace};
use crate::error::{Error, Result};

/// One event of a family.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Member {
    /// Indicator over the domain's canonical point order.
    Bits(Bits),
    /// `{(i, π(i))}` on `[n]²`, stored as the one-line notation of `π`.
    Graph(Vec<usize>),
    /// The `i`-th member of an oracle family.
    Index(usize),
}

pub type MembershipFn = dyn Fn(usize, &[usize]) -> bool + Send + Sync;
pub type TraceFn = dyn Fn(&Grid) -> Vec<Trace> + Send + Sync;

/// A family known only through a membership predicate.
#[derive(Clone)]
pub struct Oracle {
    pub name: String,
    /// Number of members, when they can be enumerated by index.
    pub count: Option<usize>,
    pub contains: Arc<MembershipFn>,
    /// Distinct traces on a grid, for families too large to enumerate.
    pub traces: Option<Arc<TraceFn>>,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("name", &self.name)
            .field("count", &self.count)
            .field("traces", &self.traces.is_some())
            .finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Builtin {
    /// Graphs of permutations of `[n]` inside `[n]²`.
    PermutationGraphs { n: usize },
    /// Unions of at most `g` permutation graphs (including the empty union).
    UnionsOfPermutations { n: usize, g: usize },
    /// Slabs `{x : lo ≤ x_axis ≤ hi}` plus the empty set.
    IntervalsOnAxis { axis: usize },
    /// Products of per-axis intervals plus the empty set.
    AxisBoxes,
    PowerSet,
    /// Arbitrary sets in the first `prefix` coordinates, extended freely in the rest.
    CylinderSets { prefix: usize },
    /// Subsets of `[n]^d` meeting every axis-parallel line exactly once.
    HdPermutations { n: usize, d: usize },
}

#[derive(Clone, Debug)]
pub enum Repr {
    Explicit(Vec<Bits>),
    Oracle(Oracle),
    Builtin(Builtin),
}

#[derive(Clone, Debug)]
pub struct SetFamily {
    domain: ProductDomain,
    repr: Repr,
}

/// One `∼_G` class with its representative.
#[derive(Clone, Debug)]
pub struct TraceClass {
    pub trace: Trace,
    pub representative: Member,
}

impl SetFamily {
    /// Explicit family; duplicate members are dropped, keeping first occurrences.
    pub fn explicit(domain: ProductDomain, members: Vec<Bits>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyFamily);
        }
        for (i, m) in members.iter().enumerate() {
            if m.len() != domain.len() {
                return Err(Error::InvalidDomain(format!(
                    "member {i} has {} bits, domain has {} points",
                    m.len(),
                    domain.len()
                )));
            }
        }
        let mut seen = HashSet::new();
        let members = members.into_iter().filter(|m| seen.insert(m.clone())).collect();
        Ok(SetFamily {
            domain,
            repr: Repr::Explicit(members),
        })
    }

    /// Explicit family from member point lists.
    pub fn from_point_sets(domain: ProductDomain, sets: &[Vec<Vec<usize>>]) -> Result<Self> {
        let mut members = Vec::with_capacity(sets.len());
        for set in sets {
            let mut bits = Bits::repeat(false, domain.len());
            for p in set {
                domain
                    .check_point(p)
                    .map_err(Error::InvalidDomain)?;
                bits.set(domain.index_of(p), true);
            }
            members.push(bits);
        }
        Self::explicit(domain, members)
    }

    pub fn oracle(domain: ProductDomain, oracle: Oracle) -> Result<Self> {
        if oracle.count == Some(0) {
            return Err(Error::EmptyFamily);
        }
        Ok(SetFamily {
            domain,
            repr: Repr::Oracle(oracle),
        })
    }

    pub fn permutation_graphs(n: usize) -> Result<Self> {
        Ok(SetFamily {
            domain: ProductDomain::with_sizes(&[n, n])?,
            repr: Repr::Builtin(Builtin::PermutationGraphs { n }),
        })
    }

    pub fn unions_of_permutations(n: usize, g: usize) -> Result<Self> {
        if g == 0 {
            return Err(Error::InvalidDomain("g must be at least 1".into()));
        }
        Ok(SetFamily {
            domain: ProductDomain::with_sizes(&[n, n])?,
            repr: Repr::Builtin(Builtin::UnionsOfPermutations { n, g }),
        })
    }

    pub fn intervals_on_axis(domain: ProductDomain, axis: usize) -> Result<Self> {
        if axis >= domain.width() {
            return Err(Error::AxisOutOfRange {
                axis,
                width: domain.width(),
            });
        }
        Ok(SetFamily {
            domain,
            repr: Repr::Builtin(Builtin::IntervalsOnAxis { axis }),
        })
    }

    pub fn axis_boxes(domain: ProductDomain) -> Self {
        SetFamily {
            domain,
            repr: Repr::Builtin(Builtin::AxisBoxes),
        }
    }

    pub fn power_set(domain: ProductDomain) -> Self {
        SetFamily {
            domain,
            repr: Repr::Builtin(Builtin::PowerSet),
        }
    }

    pub fn cylinder_sets(domain: ProductDomain, prefix: usize) -> Result<Self> {
        if prefix == 0 || prefix > domain.width() {
            return Err(Error::InvalidDomain(format!(
                "cylinder prefix {prefix} outside 1..={}",
                domain.width()
            )));
        }
        Ok(SetFamily {
            domain,
            repr: Repr::Builtin(Builtin::CylinderSets { prefix }),
        })
    }

    pub fn hd_permutations(n: usize, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDomain("hd permutations need d ≥ 2".into()));
        }
        Ok(SetFamily {
            domain: ProductDomain::with_sizes(&vec![n; d])?,
            repr: Repr::Builtin(Builtin::HdPermutations { n, d }),
        })
    }

    /// `count` members, each point included independently with probability ½.
    /// Duplicates are dropped, so the result may be smaller than `count`.
    pub fn random(domain: ProductDomain, count: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let members = (0..count.max(1))
            .map(|_| (0..domain.len()).map(|_| rng.random_bool(0.5)).collect())
            .collect();
        Self::explicit(domain, members)
    }

    pub fn domain(&self) -> &ProductDomain {
        &self.domain
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn builtin(&self) -> Option<&Builtin> {
        match &self.repr {
            Repr::Builtin(b) => Some(b),
            _ => None,
        }
    }

    /// Side length for the permutation-graph family, if that is what this is.
    pub fn permutation_size(&self) -> Option<usize> {
        match self.repr {
            Repr::Builtin(Builtin::PermutationGraphs { n }) => Some(n),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match &self.repr {
            Repr::Explicit(m) => format!("Explicit({} members, {:?})", m.len(), self.domain.sizes()),
            Repr::Oracle(o) => format!("Oracle({})", o.name),
            Repr::Builtin(b) => match b {
                Builtin::PermutationGraphs { n } => format!("PermutationGraphs({n})"),
                Builtin::UnionsOfPermutations { n, g } => format!("UnionsOfPermutations({n},{g})"),
                Builtin::IntervalsOnAxis { axis } => {
                    format!("IntervalsOnAxis({axis}, {:?})", self.domain.sizes())
                }
                Builtin::AxisBoxes => format!("AxisBoxes({:?})", self.domain.sizes()),
                Builtin::PowerSet => format!("PowerSet({:?})", self.domain.sizes()),
                Builtin::CylinderSets { prefix } => {
                    format!("CylinderSets({prefix}, {:?})", self.domain.sizes())
                }
                Builtin::HdPermutations { n, d } => format!("HdPermutations({n},{d})"),
            },
        }
    }

    /// Exact member count when it is known without enumeration.
    pub fn member_count(&self) -> Option<BigUint> {
        let pow2 = |e: usize| BigUint::one() << e;
        Some(match &self.repr {
            Repr::Explicit(m) => BigUint::from(m.len()),
            Repr::Oracle(o) => BigUint::from(o.count?),
            Repr::Builtin(b) => match *b {
                Builtin::PermutationGraphs { n } => factorial(n),
                Builtin::IntervalsOnAxis { axis } => {
                    let k = self.domain.axis(axis).len();
                    BigUint::from(k * (k + 1) / 2 + 1)
                }
                Builtin::AxisBoxes => {
                    self.domain
                        .sizes()
                        .iter()
                        .map(|&k| BigUint::from(k * (k + 1) / 2))
                        .product::<BigUint>()
                        + 1u32
                }
                Builtin::PowerSet => pow2(self.domain.len()),
                Builtin::CylinderSets { prefix } => {
                    pow2(self.domain.sizes()[..prefix].iter().product())
                }
                Builtin::UnionsOfPermutations { .. } | Builtin::HdPermutations { .. } => return None,
            },
        })
    }

    pub fn contains(&self, member: &Member, p: &[usize]) -> bool {
        match member {
            Member::Bits(b) => self.domain.contains(p) && b[self.domain.index_of(p)],
            Member::Graph(pi) => p.len() == 2 && pi.get(p[0]) == Some(&p[1]),
            Member::Index(i) => match &self.repr {
                Repr::Oracle(o) => (o.contains)(*i, p),
                _ => false,
            },
        }
    }

    /// Indicator of `member` over the domain's canonical order.
    pub fn encode(&self, member: &Member) -> Bits {
        match member {
            Member::Bits(b) => b.clone(),
            Member::Graph(pi) => {
                let n = pi.len();
                let mut bits = Bits::repeat(false, n * n);
                for (i, &j) in pi.iter().enumerate() {
                    bits.set(i * n + j, true);
                }
                bits
            }
            Member::Index(_) => {
                let mut bits = Bits::repeat(false, self.domain.len());
                for i in 0..self.domain.len() {
                    if self.contains(member, self.domain.point_at(i).coords()) {
                        bits.set(i, true);
                    }
                }
                bits
            }
        }
    }

    /// Order of canonical encodings (bitwise lexicographic, 0 < 1).
    pub fn encoding_cmp(&self, a: &Member, b: &Member) -> Ordering {
        match (a, b) {
            // the first set bit of a graph is at column π(0) of row 0; a later one
            // means a smaller encoding, so this is reversed one-line order
            (Member::Graph(x), Member::Graph(y)) => y.cmp(x),
            (Member::Bits(x), Member::Bits(y)) => x.cmp(y),
            _ => self.encode(a).cmp(&self.encode(b)),
        }
    }

    pub fn trace(&self, member: &Member, grid: &Grid) -> Trace {
        match member {
            Member::Graph(pi) => {
                let mut bits = Bits::repeat(false, grid.cell_count());
                for &i in &grid.axes()[0] {
                    if let Some(idx) = grid.cell_index(&[i, pi[i]]) {
                        bits.set(idx, true);
                    }
                }
                Trace(bits)
            }
            Member::Bits(b) => {
                let mut bits = Bits::repeat(false, grid.cell_count());
                for idx in 0..grid.cell_count() {
                    if b[self.domain.index_of(grid.cell(idx).coords())] {
                        bits.set(idx, true);
                    }
                }
                Trace(bits)
            }
            Member::Index(_) => crate::domain::trace_of(grid, |p| self.contains(member, p)),
        }
    }

    /// All members in enumeration order.
    ///
    /// Permutation graphs come in increasing one-line order, intervals and
    /// boxes as the empty set followed by increasing `(lo, hi)` tuples, power
    /// sets and cylinders by increasing subset mask, and unions of
    /// permutations and higher-dimensional permutations in increasing
    /// canonical encoding.
    pub fn members(&self, caps: &Caps) -> Result<Vec<Member>> {
        if let Some(count) = self.member_count() {
            if count > BigUint::from(caps.members) {
                return Err(Error::FamilyTooLarge {
                    what: format!("{} members of {}", count, self.describe()),
                    cap: caps.members,
                });
            }
        }
        let d = &self.domain;
        let lift = |f: &dyn Fn(&[usize]) -> bool| -> Member {
            Member::Bits(d.points().map(|p| f(p.coords())).collect())
        };
        Ok(match &self.repr {
            Repr::Explicit(m) => m.iter().cloned().map(Member::Bits).collect(),
            Repr::Oracle(o) => match o.count {
                Some(c) => (0..c).map(Member::Index).collect(),
                None => return Err(Error::NotEnumerable(o.name.clone())),
            },
            Repr::Builtin(b) => match *b {
                Builtin::PermutationGraphs { n } => {
                    (0..n).permutations(n).map(Member::Graph).collect()
                }
                Builtin::UnionsOfPermutations { n, g } => {
                    union_members(n, g, caps)?.into_iter().map(Member::Bits).collect()
                }
                Builtin::IntervalsOnAxis { axis } => {
                    let k = d.axis(axis).len();
                    let mut out = vec![Member::Bits(Bits::repeat(false, d.len()))];
                    for lo in 0..k {
                        for hi in lo..k {
                            out.push(lift(&|p: &[usize]| (lo..=hi).contains(&p[axis])));
                        }
                    }
                    out
                }
                Builtin::AxisBoxes => {
                    let per_axis: Vec<Vec<(usize, usize)>> = d
                        .sizes()
                        .iter()
                        .map(|&k| (0..k).flat_map(|lo| (lo..k).map(move |hi| (lo, hi))).collect())
                        .collect();
                    let mut out = vec![Member::Bits(Bits::repeat(false, d.len()))];
                    for bounds in per_axis.into_iter().multi_cartesian_product() {
                        out.push(lift(&|p: &[usize]| {
                            p.iter().zip(&bounds).all(|(c, &(lo, hi))| (lo..=hi).contains(c))
                        }));
                    }
                    out
                }
                Builtin::PowerSet => (0u64..1 << d.len())
                    .map(|mask| Member::Bits((0..d.len()).map(|i| mask >> i & 1 == 1).collect()))
                    .collect(),
                Builtin::CylinderSets { prefix } => {
                    let sizes = d.sizes();
                    let head = ProductDomain::with_sizes(&sizes[..prefix])?;
                    (0u64..1 << head.len())
                        .map(|mask| {
                            lift(&|p: &[usize]| mask >> head.index_of(&p[..prefix]) & 1 == 1)
                        })
                        .collect()
                }
                Builtin::HdPermutations { n, d: width } => hd_permutation_sets(n, width, caps)?
                    .into_iter()
                    .map(Member::Bits)
                    .collect(),
            },
        })
    }

    /// Distinct traces on `grid` with one representative each, in order of
    /// first appearance. The representative is the member with the smallest
    /// canonical encoding, except for oracle families where it is the first
    /// member encountered.
    pub fn trace_classes(&self, grid: &Grid, caps: &Caps) -> Result<Vec<TraceClass>> {
        if grid.cell_count() > caps.cells {
            return Err(Error::FamilyTooLarge {
                what: format!("grid with {} cells", grid.cell_count()),
                cap: caps.cells,
            });
        }
        let members = self.members(caps)?;
        let mut index: HashMap<Trace, usize> = HashMap::new();
        let mut classes: Vec<TraceClass> = Vec::new();
        for m in members {
            let t = self.trace(&m, grid);
            match index.get(&t) {
                Some(&k) => {
                    let rep = &mut classes[k].representative;
                    if !matches!(m, Member::Index(_)) && self.encoding_cmp(&m, rep) == Ordering::Less {
                        *rep = m;
                    }
                }
                None => {
                    index.insert(t.clone(), classes.len());
                    classes.push(TraceClass {
                        trace: t,
                        representative: m,
                    });
                }
            }
        }
        Ok(classes)
    }

    /// Distinct traces on `grid`, in order of first appearance.
    pub fn traces(&self, grid: &Grid, caps: &Caps) -> Result<Vec<Trace>> {
        if let Repr::Oracle(Oracle {
            traces: Some(f),
            count: None,
            ..
        }) = &self.repr
        {
            let mut seen = HashSet::new();
            return Ok(f(grid).into_iter().filter(|t| seen.insert(t.clone())).collect());
        }
        Ok(self
            .trace_classes(grid, caps)?
            .into_iter()
            .map(|c| c.trace)
            .collect())
    }
}

/// `{F ∩ L : F ∈ ℱ}` as an explicit family over the line's points.
pub fn restrict_to_line(family: &SetFamily, line: &AxisLine, caps: &Caps) -> Result<SetFamily> {
    let dom = family.domain();
    if line.axis >= dom.width() || line.fixed.len() + 1 != dom.width() {
        return Err(Error::AxisOutOfRange {
            axis: line.axis,
            width: dom.width(),
        });
    }
    let k = dom.axis(line.axis).len();
    let line_dom = ProductDomain::new(vec![dom.axis(line.axis).to_vec()])?;
    let bits = |f: &dyn Fn(usize) -> bool| -> Bits { (0..k).map(f).collect() };
    let empty = || bits(&|_| false);
    let full = || bits(&|_| true);
    let singletons = || (0..k).map(|c| bits(&|v| v == c)).collect::<Vec<_>>();
    let all_subsets = |max: usize| -> Result<Vec<Bits>> {
        let total: BigUint = (0..=max.min(k)).map(|j| binomial(k, j)).sum();
        if total > BigUint::from(caps.members) {
            return Err(Error::FamilyTooLarge {
                what: format!("{total} line restrictions"),
                cap: caps.members,
            });
        }
        let mut out = Vec::new();
        for size in 0..=max.min(k) {
            for combo in (0..k).combinations(size) {
                out.push(bits(&|v| combo.contains(&v)));
            }
        }
        Ok(out)
    };
    let intervals = || {
        let mut out = vec![empty()];
        for lo in 0..k {
            for hi in lo..k {
                out.push(bits(&|v| (lo..=hi).contains(&v)));
            }
        }
        out
    };

    let members: Vec<Bits> = match family.repr() {
        Repr::Builtin(b) => match *b {
            Builtin::PermutationGraphs { .. } | Builtin::HdPermutations { .. } => singletons(),
            Builtin::UnionsOfPermutations { g, .. } => all_subsets(g)?,
            Builtin::PowerSet => all_subsets(k)?,
            Builtin::IntervalsOnAxis { axis } if axis == line.axis => intervals(),
            Builtin::IntervalsOnAxis { .. } => vec![empty(), full()],
            Builtin::AxisBoxes => intervals(),
            Builtin::CylinderSets { prefix } if line.axis < prefix => all_subsets(k)?,
            Builtin::CylinderSets { .. } => vec![empty(), full()],
        },
        Repr::Oracle(Oracle {
            traces: Some(f),
            count: None,
            ..
        }) => f(&line.as_grid(dom)).into_iter().map(|t| t.0).collect(),
        _ => {
            let grid = line.as_grid(dom);
            family
                .members(caps)?
                .iter()
                .map(|m| family.trace(m, &grid).0)
                .collect()
        }
    };
    SetFamily::explicit(line_dom, members)
}

/// `ℱΔℱ`, deduplicated, in order of first appearance over pairs `i ≤ j`.
pub fn symdiff_family(family: &SetFamily, caps: &Caps) -> Result<SetFamily> {
    let members = match family.repr() {
        Repr::Explicit(m) => m,
        _ => {
            return Err(Error::MethodInapplicable(
                "symmetric differences need an explicit family".into(),
            ))
        }
    };
    if members.len() > caps.members {
        return Err(Error::FamilyTooLarge {
            what: format!("{} members", members.len()),
            cap: caps.members,
        });
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for i in 0..members.len() {
        for j in i..members.len() {
            let x = members[i].clone() ^ members[j].clone();
            if seen.insert(x.clone()) {
                out.push(x);
            }
        }
    }
    SetFamily::explicit(family.domain().clone(), out)
}

/// Reads the text set-system format.
pub fn parse_family(text: &str) -> Result<SetFamily> {
    let mut domain: Option<ProductDomain> = None;
    let mut members = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |msg: String| Error::Parse {
            line: lineno + 1,
            msg,
        };
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match &domain {
            None => {
                let mut words = line.split_whitespace();
                if words.next() != Some("domain") {
                    return Err(err("expected `domain d n_1 … n_d`".into()));
                }
                let nums: Vec<usize> = words
                    .map(|w| w.parse().map_err(|_| err(format!("bad integer {w:?}"))))
                    .collect::<Result<_>>()?;
                let (&d, sizes) = nums
                    .split_first()
                    .ok_or_else(|| err("missing width".into()))?;
                if sizes.len() != d {
                    return Err(err(format!("width {d} but {} sizes", sizes.len())));
                }
                domain = Some(ProductDomain::with_sizes(sizes).map_err(|e| err(e.to_string()))?);
            }
            Some(dom) => {
                if line.len() != dom.len() {
                    return Err(err(format!("member has {} bits, expected {}", line.len(), dom.len())));
                }
                let bits = line
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        _ => Err(err(format!("unexpected character {c:?}"))),
                    })
                    .collect::<Result<Bits>>()?;
                members.push(bits);
            }
        }
    }
    let domain = domain.ok_or(Error::Parse {
        line: 0,
        msg: "missing domain header".into(),
    })?;
    SetFamily::explicit(domain, members)
}

/// Writes an explicit family in the text set-system format.
pub fn format_family(family: &SetFamily) -> Result<String> {
    let Repr::Explicit(members) = family.repr() else {
        return Err(Error::MethodInapplicable("only explicit families can be written".into()));
    };
    let sizes = family.domain().sizes();
    let mut out = format!("domain {}", sizes.len());
    for n in sizes {
        out.push_str(&format!(" {n}"));
    }
    out.push('\n');
    for m in members {
        out.extend(m.iter().map(|b| if *b { '1' } else { '0' }));
        out.push('\n');
    }
    Ok(out)
}

pub(crate) fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

pub(crate) fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

fn union_members(n: usize, g: usize, caps: &Caps) -> Result<Vec<Bits>> {
    let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let combos: BigUint = (0..=g).map(|r| binomial(perms.len(), r)).sum();
    if combos > BigUint::from(caps.members) {
        return Err(Error::FamilyTooLarge {
            what: format!("{combos} unions of ≤{g} permutations of [{n}]"),
            cap: caps.members,
        });
    }
    let graphs: Vec<Bits> = perms
        .iter()
        .map(|pi| {
            let mut b = Bits::repeat(false, n * n);
            for (i, &j) in pi.iter().enumerate() {
                b.set(i * n + j, true);
            }
            b
        })
        .collect();
    let mut set = HashSet::new();
    for r in 0..=g {
        for combo in (0..graphs.len()).combinations(r) {
            let mut b = Bits::repeat(false, n * n);
            for &c in &combo {
                b |= graphs[c].as_bitslice();
            }
            set.insert(b);
        }
    }
    let mut out: Vec<Bits> = set.into_iter().collect();
    out.sort();
    Ok(out)
}

/// Subsets of `[n]^d` meeting every axis-parallel line exactly once, sorted by encoding.
///
/// Such a set is the graph of `f: [n]^{d−1} → [n]` that is a bijection along
/// every line of the first `d − 1` axes; cells are filled in row-major order.
pub(crate) fn hd_permutation_sets(n: usize, d: usize, caps: &Caps) -> Result<Vec<Bits>> {
    let cells = n.checked_pow(d as u32 - 1).unwrap_or(usize::MAX);
    if cells.saturating_mul(n) > caps.cells {
        return Err(Error::FamilyTooLarge {
            what: format!("[{n}]^{d}"),
            cap: caps.cells,
        });
    }
    let head = ProductDomain::with_sizes(&vec![n; d - 1])?;
    let full = ProductDomain::with_sizes(&vec![n; d])?;
    // used[axis][line id][value]; line id drops the coordinate on `axis`
    let line_id = |coords: &[usize], axis: usize| -> usize {
        coords
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != axis)
            .fold(0, |acc, (_, &c)| acc * n + c)
    };
    let lines_per_axis = cells / n.max(1);
    let mut used = vec![vec![vec![false; n]; lines_per_axis.max(1)]; d - 1];
    let mut f = vec![0usize; cells];
    let mut out = Vec::new();

    #[allow(clippy::too_many_arguments)]
    fn fill(
        cell: usize,
        n: usize,
        head: &ProductDomain,
        full: &ProductDomain,
        f: &mut Vec<usize>,
        used: &mut Vec<Vec<Vec<bool>>>,
        line_id: &dyn Fn(&[usize], usize) -> usize,
        out: &mut Vec<Bits>,
        cap: usize,
    ) -> Result<()> {
        if cell == f.len() {
            if out.len() >= cap {
                return Err(Error::FamilyTooLarge {
                    what: "higher-dimensional permutations".into(),
                    cap,
                });
            }
            let mut bits = Bits::repeat(false, full.len());
            for (c, &v) in f.iter().enumerate() {
                let mut p = head.point_at(c).coords().to_vec();
                p.push(v);
                bits.set(full.index_of(&p), true);
            }
            out.push(bits);
            return Ok(());
        }
        let coords = head.point_at(cell);
        let ids: Vec<usize> = (0..head.width()).map(|a| line_id(coords.coords(), a)).collect();
        for v in 0..n {
            if (0..head.width()).any(|a| used[a][ids[a]][v]) {
                continue;
            }
            for a in 0..head.width() {
                used[a][ids[a]][v] = true;
            }
            f[cell] = v;
            fill(cell + 1, n, head, full, f, used, line_id, out, cap)?;
            for a in 0..head.width() {
                used[a][ids[a]][v] = false;
            }
        }
        Ok(())
    }

    fill(0, n, &head, &full, &mut f, &mut used, &line_id, &mut out, caps.members)?;
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn caps() -> Caps {
        Caps::default()
    }

    fn ones(b: &Bits) -> Vec<usize> {
        b.iter_ones().collect()
    }

    #[test]
    fn permutation_restriction_is_singletons() {
        let f = SetFamily::permutation_graphs(3).unwrap();
        let line = AxisLine { axis: 1, fixed: vec![0] };
        let r = restrict_to_line(&f, &line, &caps()).unwrap();
        let Repr::Explicit(m) = r.repr() else { panic!() };
        let mut sets: Vec<Vec<usize>> = m.iter().map(ones).collect();
        sets.sort();
        assert_eq!(sets, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn generic_restriction_matches_fast_path() {
        let caps = caps();
        for fam in [
            SetFamily::permutation_graphs(4).unwrap(),
            SetFamily::unions_of_permutations(3, 2).unwrap(),
            SetFamily::power_set(ProductDomain::with_sizes(&[2, 2, 2]).unwrap()),
            SetFamily::intervals_on_axis(ProductDomain::with_sizes(&[3, 4]).unwrap(), 1).unwrap(),
            SetFamily::axis_boxes(ProductDomain::with_sizes(&[3, 3]).unwrap()),
            SetFamily::cylinder_sets(ProductDomain::with_sizes(&[2, 3]).unwrap(), 1).unwrap(),
            SetFamily::hd_permutations(3, 3).unwrap(),
        ] {
            let explicit = SetFamily::explicit(
                fam.domain().clone(),
                fam.members(&caps).unwrap().iter().map(|m| fam.encode(m)).collect(),
            )
            .unwrap();
            for axis in 0..fam.domain().width() {
                for line in fam.domain().axis_lines(axis).unwrap() {
                    let a = restrict_to_line(&fam, &line, &caps).unwrap();
                    let b = restrict_to_line(&explicit, &line, &caps).unwrap();
                    let (Repr::Explicit(a), Repr::Explicit(b)) = (a.repr(), b.repr()) else {
                        panic!()
                    };
                    let sa: HashSet<_> = a.iter().collect();
                    let sb: HashSet<_> = b.iter().collect();
                    assert_eq!(sa, sb, "{} on {line:?}", fam.describe());
                }
            }
        }
    }

    #[test]
    fn power_set_restriction_on_cube() {
        let f = SetFamily::power_set(ProductDomain::with_sizes(&[2, 2, 2]).unwrap());
        for axis in 0..3 {
            for line in f.domain().axis_lines(axis).unwrap() {
                let r = restrict_to_line(&f, &line, &caps()).unwrap();
                assert_eq!(r.member_count().unwrap(), BigUint::from(4u32));
            }
        }
    }

    #[test]
    fn interval_restriction_on_four_points() {
        let f = SetFamily::intervals_on_axis(ProductDomain::with_sizes(&[4]).unwrap(), 0).unwrap();
        let line = AxisLine { axis: 0, fixed: vec![] };
        let r = restrict_to_line(&f, &line, &caps()).unwrap();
        // 10 nonempty intervals and the empty set
        assert_eq!(r.member_count().unwrap(), BigUint::from(11u32));
    }

    #[test]
    fn unsupported_restriction() {
        let f = SetFamily::oracle(
            ProductDomain::with_sizes(&[3, 3]).unwrap(),
            Oracle {
                name: "diag".into(),
                count: None,
                contains: Arc::new(|_, p| p[0] == p[1]),
                traces: None,
            },
        )
        .unwrap();
        let line = AxisLine { axis: 0, fixed: vec![1] };
        assert!(matches!(
            restrict_to_line(&f, &line, &caps()),
            Err(Error::NotEnumerable(_))
        ));
    }

    #[test]
    fn symdiff_examples() {
        let dom = ProductDomain::with_sizes(&[2]).unwrap();
        let bits = |s: &str| s.chars().map(|c| c == '1').collect::<Bits>();
        let fam = |v: &[&str]| SetFamily::explicit(dom.clone(), v.iter().map(|s| bits(s)).collect()).unwrap();
        let get = |f: SetFamily| {
            let f = symdiff_family(&f, &caps()).unwrap();
            let Repr::Explicit(m) = f.repr() else { panic!() };
            let mut v: Vec<String> = m.iter().map(|b| b.iter().map(|x| if *x { '1' } else { '0' }).collect()).collect();
            v.sort();
            v
        };
        assert_eq!(get(fam(&["00"])), vec!["00"]);
        assert_eq!(get(fam(&["10"])), vec!["00"]);
        assert_eq!(get(fam(&["10", "01"])), vec!["00", "11"]);
    }

    #[test]
    fn symdiff_cap() {
        let f = SetFamily::random(ProductDomain::with_sizes(&[8]).unwrap(), 20, 3).unwrap();
        let tiny = Caps { members: 4, cells: 16 };
        assert!(matches!(symdiff_family(&f, &tiny), Err(Error::FamilyTooLarge { .. })));
    }

    #[test]
    fn empty_family_rejected() {
        let dom = ProductDomain::with_sizes(&[2]).unwrap();
        assert!(matches!(SetFamily::explicit(dom, vec![]), Err(Error::EmptyFamily)));
    }

    #[test]
    fn structural_line_bounds() {
        let caps = caps();
        for n in 2..=5 {
            let f = SetFamily::permutation_graphs(n).unwrap();
            for m in f.members(&caps).unwrap() {
                for axis in 0..2 {
                    for line in f.domain().axis_lines(axis).unwrap() {
                        let hits = line.points(f.domain()).iter().filter(|p| f.contains(&m, p.coords())).count();
                        assert_eq!(hits, 1);
                    }
                }
            }
        }
        for g in 1..=2 {
            let f = SetFamily::unions_of_permutations(4, g).unwrap();
            for m in f.members(&caps).unwrap() {
                for axis in 0..2 {
                    for line in f.domain().axis_lines(axis).unwrap() {
                        let hits = line.points(f.domain()).iter().filter(|p| f.contains(&m, p.coords())).count();
                        assert!(hits <= g);
                    }
                }
            }
        }
    }

    #[test]
    fn hd_permutation_counts() {
        let caps = caps();
        assert_eq!(hd_permutation_sets(3, 2, &caps).unwrap().len(), 6);
        assert_eq!(hd_permutation_sets(4, 2, &caps).unwrap().len(), 24);
        assert_eq!(hd_permutation_sets(2, 3, &caps).unwrap().len(), 2);
        assert_eq!(hd_permutation_sets(3, 3, &caps).unwrap().len(), 12);
    }

    #[test]
    fn graph_encoding_order_matches_bits() {
        let f = SetFamily::permutation_graphs(4).unwrap();
        let members = f.members(&caps()).unwrap();
        for a in &members {
            for b in &members {
                assert_eq!(f.encoding_cmp(a, b), f.encode(a).cmp(&f.encode(b)));
            }
        }
    }

    #[test]
    fn text_format_roundtrip() {
        let text = "# two members\ndomain 2 2 2\n1001\n\n0110\n";
        let f = parse_family(text).unwrap();
        assert_eq!(f.domain().sizes(), vec![2, 2]);
        assert_eq!(format_family(&f).unwrap(), "domain 2 2 2\n1001\n0110\n");
        assert!(matches!(parse_family("domain 2 2 2\n101\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_family("dom 1 2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_family("domain 1 2\n# nothing\n"), Err(Error::EmptyFamily)));
    }

    #[test]
    fn member_counts_match_enumeration() {
        let caps = caps();
        for fam in [
            SetFamily::permutation_graphs(4).unwrap(),
            SetFamily::power_set(ProductDomain::with_sizes(&[2, 2]).unwrap()),
            SetFamily::intervals_on_axis(ProductDomain::with_sizes(&[3, 4]).unwrap(), 0).unwrap(),
            SetFamily::axis_boxes(ProductDomain::with_sizes(&[2, 3]).unwrap()),
            SetFamily::cylinder_sets(ProductDomain::with_sizes(&[2, 2, 2]).unwrap(), 2).unwrap(),
        ] {
            let n = fam.members(&caps).unwrap().len();
            assert_eq!(fam.member_count().unwrap(), BigUint::from(n), "{}", fam.describe());
        }
    }

    #[test]
    fn permutation_traces_on_full_grid() {
        let f = SetFamily::permutation_graphs(3).unwrap();
        let grid = Grid::full(f.domain());
        assert_eq!(f.trace_classes(&grid, &caps()).unwrap().len(), 6);
        let id = Member::Graph(vec![0, 1]);
        let f2 = SetFamily::permutation_graphs(2).unwrap();
        assert_eq!(f2.trace(&id, &Grid::full(f2.domain())).to_bit_string(), "1001");
    }
}
