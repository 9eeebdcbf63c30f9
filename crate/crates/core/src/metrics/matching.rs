//! Optimal matchings between persistence diagrams.
//!
//! Both distances use the L-infinity ground metric and allow any point to be
//! matched to its projection on the diagonal, at cost `(death - birth) / 2`.
//! The diagrams are augmented so that this becomes a square assignment
//! problem: every point of `a` gets a diagonal partner on the `b` side and
//! vice versa, with diagonal-to-diagonal pairs free.

/// A diagram point `(birth, death)`.
pub type Point = (f64, f64);

fn linf(p: Point, q: Point) -> f64 {
    (p.0 - q.0).abs().max((p.1 - q.1).abs())
}

fn diag(p: Point) -> f64 {
    (p.1 - p.0) / 2.0
}

/// Cost of pairing row `i` with column `j` in the augmented problem, or
/// `None` when the pair is not allowed.
///
/// Rows are `a[0..n]` then diagonal copies of `b`; columns are `b[0..m]`
/// then diagonal copies of `a`.
fn augmented_cost(a: &[Point], b: &[Point], i: usize, j: usize) -> Option<f64> {
    let (n, m) = (a.len(), b.len());
    match (i < n, j < m) {
        (true, true) => Some(linf(a[i], b[j])),
        (true, false) => (j - m == i).then(|| diag(a[i])),
        (false, true) => (i - n == j).then(|| diag(b[j])),
        (false, false) => Some(0.0),
    }
}

/// Whether a perfect matching exists using only pairs of cost <= `t`.
fn feasible(a: &[Point], b: &[Point], t: f64) -> bool {
    let size = a.len() + b.len();
    let adj: Vec<Vec<usize>> = (0..size)
        .map(|i| {
            (0..size)
                .filter(|&j| augmented_cost(a, b, i, j).is_some_and(|c| c <= t))
                .collect()
        })
        .collect();
    let mut match_col: Vec<Option<usize>> = vec![None; size];
    fn augment(
        i: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        match_col: &mut [Option<usize>],
    ) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if match_col[j].is_none_or(|k| augment(k, adj, seen, match_col)) {
                match_col[j] = Some(i);
                return true;
            }
        }
        false
    }
    (0..size).all(|i| {
        let mut seen = vec![false; size];
        augment(i, &adj, &mut seen, &mut match_col)
    })
}

/// Bottleneck distance between two finite diagrams.
pub fn bottleneck(a: &[Point], b: &[Point]) -> f64 {
    let size = a.len() + b.len();
    if size == 0 {
        return 0.0;
    }
    let mut candidates: Vec<f64> = (0..size)
        .flat_map(|i| (0..size).filter_map(move |j| augmented_cost(a, b, i, j)))
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    // smallest feasible threshold; the largest candidate is always feasible
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(a, b, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian
/// method with potentials, O(n^3)). Returns the optimal total cost.
pub fn assignment_cost(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    if n == 0 {
        return 0.0;
    }
    // 1-based arrays as in the classical formulation; column 0 is virtual
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
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
    (1..=n).map(|j| cost[p[j] - 1][j - 1]).fold(0.0, |a, b| a + b)
}

/// 1-Wasserstein distance between two finite diagrams.
pub fn wasserstein(a: &[Point], b: &[Point]) -> f64 {
    let size = a.len() + b.len();
    // forbidden pairs get a cost no optimal assignment would pay
    let big = 1.0
        + a.iter().chain(b).map(|&p| 2.0 * diag(p)).fold(0.0, |a, b| a + b)
        + a.iter()
            .flat_map(|&p| b.iter().map(move |&q| linf(p, q)))
            .fold(0.0, f64::max)
            * size as f64;
    let cost: Vec<Vec<f64>> = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| augmented_cost(a, b, i, j).unwrap_or(big))
                .collect()
        })
        .collect();
    assignment_cost(&cost)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_identical() {
        assert_eq!(bottleneck(&[], &[]), 0.0);
        assert_eq!(wasserstein(&[], &[]), 0.0);
        let a = [(0.0, 1.0), (0.5, 2.0)];
        assert_eq!(bottleneck(&a, &a), 0.0);
        assert_eq!(wasserstein(&a, &a), 0.0);
    }

    #[test]
    fn single_point_against_empty() {
        assert_eq!(wasserstein(&[(0.0, 1.0)], &[]), 0.5);
        assert_eq!(bottleneck(&[(0.0, 1.0)], &[]), 0.5);
    }

    #[test]
    fn single_pair() {
        assert_eq!(bottleneck(&[(0.0, 2.0)], &[(0.0, 2.5)]), 0.5);
        assert_eq!(wasserstein(&[(0.0, 2.0)], &[(0.0, 2.5)]), 0.5);
    }

    #[test]
    fn diagonal_beats_far_partner() {
        // two short bars far apart: cheaper to send both to the diagonal
        let a = [(0.0, 0.2)];
        let b = [(5.0, 5.2)];
        assert!((wasserstein(&a, &b) - 0.2).abs() < 1e-12);
        assert!((bottleneck(&a, &b) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn hungarian_small() {
        let c = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
        assert_eq!(assignment_cost(&c), 5.0);
    }
}
