//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rtd_core::{DistanceMatrix, PointCloud};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_cloud(rng: &mut ChaCha8Rng, n: usize, d: usize) -> PointCloud {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();
    PointCloud::from_rows(&rows).unwrap()
}

/// Random symmetric weights in (0, 1) with zero diagonal.
pub fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> DistanceMatrix {
    DistanceMatrix::from_fn(n, |_, _| rng.random_range(0.01..1.0)).unwrap()
}

pub fn to_dense(w: &DistanceMatrix) -> Vec<Vec<f64>> {
    let n = w.len();
    (0..n).map(|i| (0..n).map(|j| w.get(i, j)).collect()).collect()
}

/// Naive double-loop Euclidean distances.
pub fn naive_distances(c: &PointCloud) -> Vec<Vec<f64>> {
    let rows = c.to_rows();
    let n = rows.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..rows[i].len() {
                s += (rows[i][k] - rows[j][k]).powi(2);
            }
            out[i][j] = s.sqrt();
        }
    }
    out
}

/// Every vertex subset of size `1..=max_dim+1` with finite value, as
/// `(sorted vertices, value)`, sorted by value, dimension, vertices.
pub fn brute_filtration(
    w: &[Vec<f64>],
    max_dim: usize,
    excluded: &dyn Fn(&[usize]) -> bool,
) -> Vec<(Vec<usize>, f64)> {
    let n = w.len();
    assert!(n <= 20);
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let k = mask.count_ones() as usize;
        if k > max_dim + 1 {
            continue;
        }
        let vs: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let mut v: f64 = 0.0;
        for a in 0..vs.len() {
            for b in (a + 1)..vs.len() {
                v = v.max(w[vs[a]][vs[b]]);
            }
        }
        if !v.is_finite() || excluded(&vs) {
            continue;
        }
        out.push((vs, v));
    }
    out.sort_by(|a, b| {
        a.1.total_cmp(&b.1)
            .then(a.0.len().cmp(&b.0.len()))
            .then(a.0.cmp(&b.0))
    });
    out
}

/// Textbook column reduction over Z/2 on a dense bit matrix, no clearing.
/// Returns `(dim, birth, death)` with zero-length bars dropped, sorted.
pub fn naive_barcode(simplices: &[(Vec<usize>, f64)], dims: &[usize]) -> Vec<(usize, f64, f64)> {
    let m = simplices.len();
    let words = m.div_ceil(64);
    let index: std::collections::HashMap<&[usize], usize> = simplices
        .iter()
        .enumerate()
        .map(|(i, s)| (s.0.as_slice(), i))
        .collect();
    let mut cols: Vec<Vec<u64>> = simplices
        .iter()
        .map(|(vs, _)| {
            let mut col = vec![0u64; words];
            if vs.len() > 1 {
                for skip in 0..vs.len() {
                    let facet: Vec<usize> = vs
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    if let Some(&r) = index.get(facet.as_slice()) {
                        col[r / 64] ^= 1 << (r % 64);
                    }
                }
            }
            col
        })
        .collect();
    let low = |c: &[u64]| -> Option<usize> {
        (0..c.len()).rev().find(|&w| c[w] != 0).map(|w| w * 64 + 63 - c[w].leading_zeros() as usize)
    };
    let mut low_owner: Vec<Option<usize>> = vec![None; m];
    let mut paired_row = vec![false; m];
    let mut pairs = Vec::new();
    for j in 0..m {
        while let Some(l) = low(&cols[j]) {
            match low_owner[l] {
                Some(k) => {
                    let other = cols[k].clone();
                    for (a, b) in cols[j].iter_mut().zip(other) {
                        *a ^= b;
                    }
                }
                None => {
                    low_owner[l] = Some(j);
                    paired_row[l] = true;
                    pairs.push((l, j));
                    break;
                }
            }
        }
    }
    let mut bars = Vec::new();
    for &(r, c) in &pairs {
        let d = simplices[r].0.len() - 1;
        if dims.contains(&d) && simplices[c].1 > simplices[r].1 {
            bars.push((d, simplices[r].1, simplices[c].1));
        }
    }
    for j in 0..m {
        let d = simplices[j].0.len() - 1;
        if low(&cols[j]).is_none() && !paired_row[j] && dims.contains(&d) {
            bars.push((d, simplices[j].1, f64::INFINITY));
        }
    }
    bars.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
    bars
}

pub fn bars_of(bc: &rtd_core::Barcode) -> Vec<(usize, f64, f64)> {
    let mut v: Vec<_> = bc.bars.iter().map(|b| (b.dim, b.birth, b.death)).collect();
    v.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
    v
}

/// Cross-matrix entries assembled directly from the block formula.
pub fn naive_cross_matrix(w: &[Vec<f64>], wt: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = w.len();
    let mut m = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let plus = if i > j { f64::INFINITY } else { w[i][j] };
            m[n + i][j] = plus;
            m[j][n + i] = plus;
            m[n + i][n + j] = w[i][j].min(wt[i][j]);
        }
    }
    m
}

/// Exhaustive min over matchings of the diagonal-augmented bipartite graph.
/// `agg` folds the L-infinity costs: `max` for bottleneck, `+` for W1.
pub fn brute_matching(a: &[(f64, f64)], b: &[(f64, f64)], bottleneck: bool) -> f64 {
    let diag = |p: &(f64, f64)| (p.1 - p.0) / 2.0;
    let linf = |p: &(f64, f64), q: &(f64, f64)| (p.0 - q.0).abs().max((p.1 - q.1).abs());
    // a point of `a` is matched to an index of `b` or to the diagonal (None)
    fn rec(
        i: usize,
        a: &[(f64, f64)],
        b: &[(f64, f64)],
        used: &mut Vec<bool>,
        acc: f64,
        bottleneck: bool,
        best: &mut f64,
        diag: &dyn Fn(&(f64, f64)) -> f64,
        linf: &dyn Fn(&(f64, f64), &(f64, f64)) -> f64,
    ) {
        let fold = |x: f64, y: f64| if bottleneck { x.max(y) } else { x + y };
        if i == a.len() {
            let mut total = acc;
            for (j, q) in b.iter().enumerate() {
                if !used[j] {
                    total = fold(total, diag(q));
                }
            }
            if total < *best {
                *best = total;
            }
            return;
        }
        rec(i + 1, a, b, used, fold(acc, diag(&a[i])), bottleneck, best, diag, linf);
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                rec(i + 1, a, b, used, fold(acc, linf(&a[i], &b[j])), bottleneck, best, diag, linf);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut used = vec![false; b.len()];
    rec(0, a, b, &mut used, 0.0, bottleneck, &mut best, &diag, &linf);
    best
}

/// Outcome of comparing an analytic gradient with central differences.
#[derive(Debug, Default, Clone, Copy)]
pub struct FdStats {
    pub checked: usize,
    pub passed: usize,
    pub skipped_ties: usize,
    pub worst: f64,
}

/// Central finite differences of `rtd` in every coordinate of both clouds.
///
/// A coordinate whose second difference exceeds `kink` is next to a
/// filtration tie (the function has a kink inside the stencil) and is skipped.
pub fn fd_check_rtd(x: &PointCloud, y: &PointCloud, step: f64, rel_tol: f64) -> FdStats {
    let (v0, g) = rtd_core::rtd_subgradient(x, y, false).unwrap();
    let f = |a: &PointCloud, b: &PointCloud| rtd_core::rtd(a, b).unwrap();
    let kink = 1e-8;
    let mut stats = FdStats::default();
    for which in 0..2 {
        let base = if which == 0 { x } else { y };
        let grad = if which == 0 { &g.dx } else { &g.dx_tilde };
        for i in 0..base.len() {
            for c in 0..base.dim() {
                let shifted = |h: f64| {
                    let mut p = base.points().to_owned();
                    p[[i, c]] += h;
                    PointCloud::new(p).unwrap()
                };
                let (plus, minus) = (shifted(step), shifted(-step));
                let (fp, fm) = if which == 0 {
                    (f(&plus, y), f(&minus, y))
                } else {
                    (f(x, &plus), f(x, &minus))
                };
                if (fp - 2.0 * v0 + fm).abs() > kink {
                    stats.skipped_ties += 1;
                    continue;
                }
                let fd = (fp - fm) / (2.0 * step);
                let err = (grad[[i, c]] - fd).abs() / fd.abs().max(1e-2);
                stats.checked += 1;
                stats.worst = stats.worst.max(err);
                if err <= rel_tol {
                    stats.passed += 1;
                }
            }
        }
    }
    stats
}
