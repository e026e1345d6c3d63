//! Dense assignment problems on `f64` weights (Kuhn–Munkres with potentials).

/// Weight for forbidden cells in the constrained solvers.
pub(crate) const FORBIDDEN: f64 = 1e12;

/// Minimum-cost perfect matching of a square matrix: `(cost, col_of_row)`.
pub fn min_assignment(cost: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let n = cost.len();
    if n == 0 {
        return (0.0, vec![]);
    }
    debug_assert!(cost.iter().all(|r| r.len() == n));
    // 1-based rows/cols; column 0 is the virtual start
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![f64::INFINITY; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let row = &cost[i0 - 1];
            let ui = u[i0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = row[j - 1] - ui - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0; n];
    for j in 1..=n {
        col_of[row_of[j] - 1] = j - 1;
    }
    let total = col_of.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    (total, col_of)
}

/// Maximum-weight perfect matching: `(weight, col_of_row)`.
pub fn max_assignment(weight: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let neg: Vec<Vec<f64>> = weight.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
    let (c, a) = min_assignment(&neg);
    (-c, a)
}

/// `max_π Σ_i w[rows_i][π(cols)]` over bijections `rows → cols`.
pub(crate) fn max_sub_assignment(w: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> f64 {
    debug_assert_eq!(rows.len(), cols.len());
    let m: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| cols.iter().map(|&j| w[i][j]).collect())
        .collect();
    max_assignment(&m).0
}

/// `min_π Σ_i w[rows_i][π(cols)]` over bijections `rows → cols` that send
/// every row with `restricted[row]` into a column with `allowed[col]`.
/// `None` when no such bijection exists.
pub(crate) fn min_constrained_assignment(
    w: &[Vec<f64>],
    rows: &[usize],
    cols: &[usize],
    restricted: &[bool],
    allowed: &[bool],
) -> Option<f64> {
    let m: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| {
            cols.iter()
                .map(|&j| if restricted[i] && !allowed[j] { FORBIDDEN } else { w[i][j] })
                .collect()
        })
        .collect();
    let (c, a) = min_assignment(&m);
    let feasible = a
        .iter()
        .enumerate()
        .all(|(r, &c)| !(restricted[rows[r]] && !allowed[cols[c]]));
    feasible.then_some(c)
}
