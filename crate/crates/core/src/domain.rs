//! Finite product domains, points, axis-parallel lines and empirical grids.
//!
//! Points are stored as per-axis *indices* into the axis alphabets. The
//! canonical point order of a domain (and the canonical cell order of a grid)
//! is row-major with axis 0 most significant; every bit-vector encoding in the
//! crate uses that order.

use bitvec::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Upper limits guarding the brute-force paths. Exceeding one is an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub members: usize,
    pub cells: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            members: 1 << 20,
            cells: 1 << 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point(Vec<usize>);

impl Point {
    pub fn new(coords: Vec<usize>) -> Self {
        Point(coords)
    }

    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<usize>> for Point {
    fn from(v: Vec<usize>) -> Self {
        Point(v)
    }
}

impl<const N: usize> From<[usize; N]> for Point {
    fn from(v: [usize; N]) -> Self {
        Point(v.to_vec())
    }
}

impl std::ops::Index<usize> for Point {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// `W_1 × ⋯ × W_d` with explicitly enumerated, ordered alphabets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductDomain {
    axes: Vec<Vec<i64>>,
    strides: Vec<usize>,
    len: usize,
}

impl ProductDomain {
    pub fn new(axes: Vec<Vec<i64>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidDomain("width must be at least 1".into()));
        }
        for (i, axis) in axes.iter().enumerate() {
            if axis.is_empty() {
                return Err(Error::InvalidDomain(format!("axis {i} has an empty alphabet")));
            }
            let mut sorted = axis.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != axis.len() {
                return Err(Error::InvalidDomain(format!("axis {i} has repeated values")));
            }
        }
        let sizes: Vec<usize> = axes.iter().map(Vec::len).collect();
        let (strides, len) = row_major_strides(&sizes);
        Ok(ProductDomain { axes, strides, len })
    }

    /// `[n_1] × ⋯ × [n_d]` with values `0..n_i`.
    pub fn with_sizes(sizes: &[usize]) -> Result<Self> {
        Self::new(
            sizes
                .iter()
                .map(|&n| (0..n as i64).collect())
                .collect(),
        )
    }

    pub fn width(&self) -> usize {
        self.axes.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    pub fn axis(&self, i: usize) -> &[i64] {
        &self.axes[i]
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, p: &[usize]) -> bool {
        p.len() == self.width() && p.iter().zip(&self.axes).all(|(&c, a)| c < a.len())
    }

    pub fn check_point(&self, p: &[usize]) -> std::result::Result<(), String> {
        if p.len() != self.width() {
            return Err(format!(
                "point has width {}, domain has width {}",
                p.len(),
                self.width()
            ));
        }
        for (i, (&c, a)) in p.iter().zip(&self.axes).enumerate() {
            if c >= a.len() {
                return Err(format!("coordinate {i} is {c}, axis size is {}", a.len()));
            }
        }
        Ok(())
    }

    /// Position of `p` in canonical order.
    pub fn index_of(&self, p: &[usize]) -> usize {
        p.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    pub fn point_at(&self, mut idx: usize) -> Point {
        let mut coords = vec![0; self.width()];
        for (c, s) in coords.iter_mut().zip(&self.strides) {
            *c = idx / s;
            idx %= s;
        }
        Point(coords)
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len).map(move |i| self.point_at(i))
    }

    /// All axis-parallel lines in direction `axis`.
    pub fn axis_lines(&self, axis: usize) -> Result<Vec<AxisLine>> {
        Grid::full(self).axis_lines(axis)
    }
}

fn row_major_strides(sizes: &[usize]) -> (Vec<usize>, usize) {
    let mut strides = vec![1; sizes.len()];
    let mut acc = 1usize;
    for i in (0..sizes.len()).rev() {
        strides[i] = acc;
        acc = acc.saturating_mul(sizes[i]);
    }
    (strides, acc)
}

/// The set of points that agree with `fixed` off `axis`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AxisLine {
    pub axis: usize,
    /// The `d − 1` off-axis coordinate indices, in axis order.
    pub fixed: Vec<usize>,
}

impl AxisLine {
    /// Full point with coordinate `value` on the free axis.
    pub fn point(&self, value: usize) -> Point {
        let mut coords = Vec::with_capacity(self.fixed.len() + 1);
        coords.extend_from_slice(&self.fixed[..self.axis]);
        coords.push(value);
        coords.extend_from_slice(&self.fixed[self.axis..]);
        Point(coords)
    }

    /// The `n_axis` points of the line, in increasing free coordinate.
    pub fn points(&self, domain: &ProductDomain) -> Vec<Point> {
        (0..domain.axis(self.axis).len()).map(|v| self.point(v)).collect()
    }

    /// The line viewed as a grid: singletons off-axis, the full alphabet on it.
    pub fn as_grid(&self, domain: &ProductDomain) -> Grid {
        let axes = (0..domain.width())
            .map(|j| {
                if j == self.axis {
                    (0..domain.axis(j).len()).collect()
                } else {
                    let k = if j < self.axis { j } else { j - 1 };
                    vec![self.fixed[k]]
                }
            })
            .collect();
        Grid::from_sorted_axes(domain, axes)
    }

    pub fn contains(&self, p: &[usize]) -> bool {
        p.len() == self.fixed.len() + 1
            && p
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != self.axis)
                .zip(&self.fixed)
                .all(|((_, c), f)| c == f)
    }
}

/// A product sub-grid `G_1 × ⋯ × G_d` of a domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    axes: Vec<Vec<usize>>,
    /// `position[i][v]` is the rank of value `v` in `axes[i]`, or `NONE`.
    position: Vec<Vec<u32>>,
    strides: Vec<usize>,
    cells: usize,
}

const NONE: u32 = u32::MAX;

impl Grid {
    fn from_sorted_axes(domain: &ProductDomain, axes: Vec<Vec<usize>>) -> Grid {
        let position = axes
            .iter()
            .enumerate()
            .map(|(i, vals)| {
                let mut pos = vec![NONE; domain.axis(i).len()];
                for (r, &v) in vals.iter().enumerate() {
                    pos[v] = r as u32;
                }
                pos
            })
            .collect();
        let sizes: Vec<usize> = axes.iter().map(Vec::len).collect();
        let (strides, cells) = row_major_strides(&sizes);
        Grid {
            axes,
            position,
            strides,
            cells,
        }
    }

    /// Grid from arbitrary per-axis value-index lists (sorted and deduplicated here).
    pub fn from_axes(domain: &ProductDomain, mut axes: Vec<Vec<usize>>) -> Result<Grid> {
        if axes.len() != domain.width() {
            return Err(Error::InvalidDomain(format!(
                "grid has {} axes, domain has {}",
                axes.len(),
                domain.width()
            )));
        }
        for (i, a) in axes.iter_mut().enumerate() {
            a.sort_unstable();
            a.dedup();
            if let Some(&v) = a.last() {
                if v >= domain.axis(i).len() {
                    return Err(Error::InvalidDomain(format!(
                        "grid value {v} outside axis {i}"
                    )));
                }
            }
        }
        Ok(Self::from_sorted_axes(domain, axes))
    }

    pub fn full(domain: &ProductDomain) -> Grid {
        Self::from_sorted_axes(
            domain,
            domain.sizes().into_iter().map(|n| (0..n).collect()).collect(),
        )
    }

    pub fn axes(&self) -> &[Vec<usize>] {
        &self.axes
    }

    pub fn width(&self) -> usize {
        self.axes.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    pub fn cell_count(&self) -> usize {
        self.cells
    }

    pub fn contains(&self, p: &[usize]) -> bool {
        self.cell_index(p).is_some()
    }

    pub fn contains_value(&self, axis: usize, value: usize) -> bool {
        self.position[axis].get(value).is_some_and(|&r| r != NONE)
    }

    /// Canonical index of `p` among the grid cells.
    pub fn cell_index(&self, p: &[usize]) -> Option<usize> {
        let mut idx = 0;
        for ((&c, pos), s) in p.iter().zip(&self.position).zip(&self.strides) {
            let r = *pos.get(c)?;
            if r == NONE {
                return None;
            }
            idx += r as usize * s;
        }
        Some(idx)
    }

    pub fn cell(&self, mut idx: usize) -> Point {
        let mut coords = vec![0; self.width()];
        for ((c, s), vals) in coords.iter_mut().zip(&self.strides).zip(&self.axes) {
            *c = vals[idx / s];
            idx %= s;
        }
        Point(coords)
    }

    pub fn cells(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.cells).map(move |i| self.cell(i))
    }

    /// The `∏_{j≠axis} |G_j|` grid lines in direction `axis`, in canonical order.
    pub fn axis_lines(&self, axis: usize) -> Result<Vec<AxisLine>> {
        if axis >= self.width() {
            return Err(Error::AxisOutOfRange {
                axis,
                width: self.width(),
            });
        }
        let off: Vec<&Vec<usize>> = self
            .axes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != axis)
            .map(|(_, a)| a)
            .collect();
        let count: usize = off.iter().map(|a| a.len()).product();
        let mut lines = Vec::with_capacity(count);
        let mut idx = vec![0usize; off.len()];
        for _ in 0..count {
            lines.push(AxisLine {
                axis,
                fixed: idx.iter().zip(&off).map(|(&r, a)| a[r]).collect(),
            });
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < off[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(lines)
    }

    /// Cells of `line` that lie in the grid, in increasing free coordinate.
    pub fn line_cells(&self, line: &AxisLine) -> Vec<Point> {
        self.axes[line.axis].iter().map(|&v| line.point(v)).collect()
    }
}

/// `G(S) = π_1(S) × ⋯ × π_d(S)`.
pub fn build_grid(sample: &[Point], domain: &ProductDomain) -> Result<Grid> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut seen: Vec<Vec<bool>> = domain.sizes().into_iter().map(|n| vec![false; n]).collect();
    for (index, p) in sample.iter().enumerate() {
        domain
            .check_point(p.coords())
            .map_err(|reason| Error::InvalidPoint { index, reason })?;
        for (i, &c) in p.coords().iter().enumerate() {
            seen[i][c] = true;
        }
    }
    let axes = seen
        .into_iter()
        .map(|s| s.into_iter().enumerate().filter(|&(_, b)| b).map(|(v, _)| v).collect())
        .collect();
    Ok(Grid::from_sorted_axes(domain, axes))
}

/// Bit storage used for traces and explicit members.
pub type Bits = BitVec<usize, Lsb0>;

/// `F ∩ G` as a bit-vector over the grid's canonical cell order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trace(pub Bits);

impl Trace {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter_ones()
    }

    pub fn to_bit_string(&self) -> String {
        self.0.iter().map(|b| if *b { '1' } else { '0' }).collect()
    }
}

pub fn trace_of(grid: &Grid, contains: impl Fn(&[usize]) -> bool) -> Trace {
    let mut bits = Bits::repeat(false, grid.cell_count());
    for idx in 0..grid.cell_count() {
        if contains(grid.cell(idx).coords()) {
            bits.set(idx, true);
        }
    }
    Trace(bits)
}
