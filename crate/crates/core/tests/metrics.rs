mod common;

use common::{brute_matching, naive_distances, random_cloud, rng};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rtd_core::metrics::{bottleneck, finite_diagram, wasserstein, cloud_barcode, Point};
use rtd_core::{linear_correlation, triplet_accuracy, wasserstein_h0, PointCloud};
use std::collections::BTreeSet;

fn pearson_two_pass(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn upper(d: &[Vec<f64>]) -> Vec<f64> {
    let n = d.len();
    (0..n).flat_map(|i| (i + 1..n).map(move |j| d[i][j])).collect()
}

/// Deaths of the finite H0 bars: edge weights of a minimum spanning tree (Prim).
fn mst_deaths(d: &[Vec<f64>]) -> Vec<Point> {
    let n = d.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut out = Vec::new();
    for step in 0..n {
        let u = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        in_tree[u] = true;
        if step > 0 {
            out.push((0.0, best[u]));
        }
        for v in 0..n {
            if !in_tree[v] {
                best[v] = best[v].min(d[u][v]);
            }
        }
    }
    out
}

fn random_diagram(r: &mut impl Rng, max_len: usize) -> Vec<Point> {
    let k = r.random_range(0..=max_len);
    (0..k)
        .map(|_| {
            let b: f64 = r.random_range(0.0..1.0);
            (b, b + r.random_range(0.0..1.0))
        })
        .collect()
}

fn rotate_scale(c: &PointCloud, angle: f64, s: f64) -> PointCloud {
    let (sn, cs) = angle.sin_cos();
    let p = c.points();
    let mut out = Array2::zeros(p.dim());
    for i in 0..p.nrows() {
        out[[i, 0]] = s * (cs * p[[i, 0]] - sn * p[[i, 1]]) + 3.0;
        out[[i, 1]] = s * (sn * p[[i, 0]] + cs * p[[i, 1]]) - 1.0;
    }
    PointCloud::new(out).unwrap()
}

#[test]
fn correlation_matches_two_pass_oracle() {
    let mut r = rng(11);
    for _ in 0..20 {
        let x = random_cloud(&mut r, 10, 3);
        let z = random_cloud(&mut r, 10, 2);
        let want = pearson_two_pass(&upper(&naive_distances(&x)), &upper(&naive_distances(&z)));
        let got = linear_correlation(&x, &z).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn correlation_and_triplets_invariant_under_similarity() {
    let mut r = rng(12);
    let x = random_cloud(&mut r, 30, 2);
    let z = random_cloud(&mut r, 30, 2);
    let zt = rotate_scale(&z, 1.1, 3.5);
    let xt = rotate_scale(&x, -0.4, 0.2);
    let lc = linear_correlation(&x, &z).unwrap();
    assert!((linear_correlation(&xt, &zt).unwrap() - lc).abs() < 1e-12);
    let ta = triplet_accuracy(&x, &z, 5000, 7).unwrap();
    assert_eq!(triplet_accuracy(&xt, &zt, 5000, 7).unwrap(), ta);
}

#[test]
fn triplets_of_shuffled_cloud_near_half() {
    let mut r = rng(13);
    let x = random_cloud(&mut r, 400, 2);
    let mut rows = x.to_rows();
    rows.shuffle(&mut r);
    let z = PointCloud::from_rows(&rows).unwrap();
    let n = 10_000;
    let acc = triplet_accuracy(&x, &z, n, 1).unwrap();
    let sigma = (0.25 / n as f64).sqrt();
    assert!((acc - 0.5).abs() <= 3.0 * sigma, "accuracy {acc}");
}

#[test]
fn wasserstein_h0_matches_brute_force() {
    let mut r = rng(14);
    for _ in 0..30 {
        let na = r.random_range(2..=6);
        let nb = r.random_range(2..=6);
        let x = random_cloud(&mut r, na, 2);
        let z = random_cloud(&mut r, nb, 3);
        let want = brute_matching(&mst_deaths(&naive_distances(&x)), &mst_deaths(&naive_distances(&z)), false);
        let got = wasserstein_h0(&x, &z).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn h0_diagram_is_mst() {
    let mut r = rng(15);
    let x = random_cloud(&mut r, 12, 2);
    let mut got = finite_diagram(&cloud_barcode(&x, &BTreeSet::from([0])).unwrap(), 0);
    let mut want = mst_deaths(&naive_distances(&x));
    got.sort_by(|a, b| a.1.total_cmp(&b.1));
    want.sort_by(|a, b| a.1.total_cmp(&b.1));
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert!((g.1 - w.1).abs() < 1e-12);
    }
}

#[test]
fn diagram_distances_match_brute_force() {
    let mut r = rng(16);
    for _ in 0..200 {
        let a = random_diagram(&mut r, 5);
        let b = random_diagram(&mut r, 5);
        let wb = brute_matching(&a, &b, true);
        let ww = brute_matching(&a, &b, false);
        assert!((bottleneck(&a, &b) - wb).abs() < 1e-12);
        assert!((wasserstein(&a, &b) - ww).abs() < 1e-12);
    }
}

#[test]
fn diagram_distances_are_symmetric_and_satisfy_triangle_inequality() {
    let mut r = rng(17);
    for _ in 0..200 {
        let a = random_diagram(&mut r, 6);
        let b = random_diagram(&mut r, 6);
        let c = random_diagram(&mut r, 6);
        for d in [bottleneck, wasserstein] {
            assert!((d(&a, &b) - d(&b, &a)).abs() <= 1e-9);
            assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
        }
    }
}
