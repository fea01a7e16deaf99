//! Dense square assignment solvers.
//!
//! `min_sum` is the O(n³) Hungarian method with row/column potentials;
//! `bottleneck` binary-searches the sorted distinct costs and checks each
//! threshold with an augmenting-path bipartite matching.

/// Result of a min-sum assignment: `cols[i]` is the column given to row `i`.
#[derive(Debug, Clone)]
pub struct Solution {
    pub cols: Vec<usize>,
    /// Dual potentials; `cost[i][j] - row_pot[i] - col_pot[j] >= 0` up to
    /// rounding, with equality on every edge some optimal assignment uses.
    pub row_pot: Vec<f64>,
    pub col_pot: Vec<f64>,
}

impl Solution {
    pub fn total(&self, cost: &[Vec<f64>]) -> f64 {
        self.cols.iter().enumerate().map(|(i, &j)| cost[i][j]).sum()
    }
}

pub fn min_sum(cost: &[Vec<f64>]) -> Solution {
    let n = cost.len();
    debug_assert!(cost.iter().all(|row| row.len() == n));
    if n == 0 {
        return Solution { cols: Vec::new(), row_pot: Vec::new(), col_pot: Vec::new() };
    }

    // 1-based with column 0 as the virtual root
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut cols = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            cols[p[j] - 1] = j - 1;
        }
    }
    Solution { cols, row_pot: u[1..].to_vec(), col_pot: v[1..].to_vec() }
}

/// Marks the edges that are tight under the dual potentials of an optimal
/// solution. Any perfect matching of tight edges is optimal.
pub fn tight_edges(cost: &[Vec<f64>], sol: &Solution, tol: f64) -> Vec<Vec<bool>> {
    cost.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, c)| c - sol.row_pot[i] - sol.col_pot[j] <= tol)
                .collect()
        })
        .collect()
}

/// Min-sum assignment restricted to `allowed` edges. The caller guarantees
/// a perfect matching inside `allowed` exists.
pub fn min_sum_restricted(cost: &[Vec<f64>], allowed: &[Vec<bool>]) -> Vec<usize> {
    let n = cost.len();
    let max = cost.iter().flatten().cloned().fold(0.0, f64::max);
    let forbidden = (max + 1.0) * (n as f64 + 1.0);
    let masked: Vec<Vec<f64>> = cost
        .iter()
        .zip(allowed)
        .map(|(row, ok)| row.iter().zip(ok).map(|(c, a)| if *a { *c } else { forbidden }).collect())
        .collect();
    min_sum(&masked).cols
}

/// Kuhn's augmenting-path matching on the edges with `cost <= threshold`.
/// Returns the row-to-column assignment when it is perfect.
fn perfect_under(cost: &[Vec<f64>], threshold: f64) -> Option<Vec<usize>> {
    let n = cost.len();
    let adj: Vec<Vec<usize>> = cost
        .iter()
        .map(|row| (0..n).filter(|&j| row[j] <= threshold).collect())
        .collect();
    let mut owner = vec![usize::MAX; n];

    fn augment(i: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [usize]) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j] == usize::MAX || augment(owner[j], adj, seen, owner) {
                owner[j] = i;
                return true;
            }
        }
        false
    }

    for i in 0..n {
        let mut seen = vec![false; n];
        if !augment(i, &adj, &mut seen, &mut owner) {
            return None;
        }
    }
    let mut cols = vec![0usize; n];
    for (j, &i) in owner.iter().enumerate() {
        cols[i] = j;
    }
    Some(cols)
}

/// Bottleneck assignment: minimizes the largest matched cost.
/// Returns that value and one assignment achieving it.
pub fn bottleneck(cost: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let n = cost.len();
    if n == 0 {
        return (0.0, Vec::new());
    }
    let mut values: Vec<f64> = cost.iter().flatten().cloned().collect();
    values.sort_by(f64::total_cmp);
    values.dedup();

    // the largest value always admits a perfect matching
    let (mut lo, mut hi) = (0usize, values.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_under(cost, values[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let cols = perfect_under(cost, values[lo]).expect("feasible at the searched threshold");
    (values[lo], cols)
}
