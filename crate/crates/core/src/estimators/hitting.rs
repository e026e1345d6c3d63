//! Grid-hitting check for large symmetric differences.

use std::collections::HashMap;

use crate::distributions::Distribution;
use crate::domain::{Caps, Grid, Trace};
use crate::error::Result;
use crate::family::SetFamily;

/// Index pairs `(a, b)`, `a < b`, into the family's enumeration order with
/// `P(F_a Δ F_b) ≥ ε` and `(F_a Δ F_b) ∩ G = ∅`.
pub fn check_grid_hitting(
    family: &SetFamily,
    grid: &Grid,
    truth: &Distribution,
    eps: f64,
    caps: &Caps,
) -> Result<Vec<(usize, usize)>> {
    let members = family.members(caps)?;
    let bits: Vec<_> = members.iter().map(|m| family.encode(m)).collect();
    let probs = truth.to_table();
    let mut groups: HashMap<Trace, Vec<usize>> = HashMap::new();
    for (k, m) in members.iter().enumerate() {
        groups.entry(family.trace(m, grid)).or_default().push(k);
    }
    let mut out = Vec::new();
    for group in groups.values() {
        for (x, &a) in group.iter().enumerate() {
            for &b in &group[x + 1..] {
                let diff = bits[a].clone() ^ bits[b].as_bitslice();
                let p: f64 = diff.iter_ones().map(|i| probs.probs()[i]).sum();
                if p >= eps {
                    out.push((a, b));
                }
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}
