//! Subgradients of RTD with respect to both point clouds.
//!
//! Each bar of the degree-1 R-Cross-Barcode contributes `+1` to the value of
//! its destroyer simplex and `-1` to the value of its creator. A simplex
//! value is the largest auxiliary weight among its vertex pairs, so the
//! coefficient lands on that one entry `m_ij` (ties go to the
//! lexicographically smallest pair). The entry is then differentiated
//! according to the block it sits in:
//!
//! 1. upper-left: constant zero, no gradient;
//! 2. and 3. off-diagonal blocks: a distance of the first cloud;
//! 4. lower-right: `min(w, w~)`, a distance of whichever cloud attains the
//!    minimum (the first cloud when `w < w~`).
//!
//! Minimum bypassing lets an entry of block 4 whose coefficient is positive
//! pull on the first cloud even when `w >= w~`, so that descent can push
//! `w` below `w~`.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2};

use crate::error::{Result, RtdError};
use crate::geometry::{pairwise_distances, DistanceMatrix, PointCloud};
use crate::persistence::FilteredSimplex;
use crate::rcross::{check_pair, finite_total, pruned_cross_barcode, CrossWeightMatrix, Variant};

/// Distances below this are treated as coincident points.
pub const COINCIDENCE_EPS: f64 = 1e-12;

/// Per-point subgradients for both clouds.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    /// `n x d`, gradient with respect to the first cloud.
    pub dx: Array2<f64>,
    /// `n x p`, gradient with respect to the second cloud.
    pub dx_tilde: Array2<f64>,
}

impl GradientField {
    pub fn zeros(n: usize, d: usize, p: usize) -> Self {
        Self {
            dx: Array2::zeros((n, d)),
            dx_tilde: Array2::zeros((n, p)),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SubgradientOptions {
    pub minimum_bypass: bool,
    pub variant: Variant,
}

/// The auxiliary-matrix entry that carries the value of `s`.
fn argmax_entry(s: &FilteredSimplex, m: &CrossWeightMatrix) -> (usize, usize) {
    let vs = s.vertices();
    let mut best = (vs[0] as usize, vs[0] as usize);
    let mut best_val = f64::NEG_INFINITY;
    // vertices are ascending, so pairs are visited in lexicographic order and
    // a strict comparison keeps the smallest maximizing pair
    for (a, &i) in vs.iter().enumerate() {
        for &j in &vs[a + 1..] {
            let v = m.get(i as usize, j as usize);
            if v > best_val {
                best_val = v;
                best = (i as usize, j as usize);
            }
        }
    }
    best
}

/// Adds `coef * d|p_a - p_b| / dp` to rows `a` and `b` of `out`.
fn push_distance_grad(
    out: &mut Array2<f64>,
    pts: ArrayView2<'_, f64>,
    a: usize,
    b: usize,
    dist: f64,
    coef: f64,
    cloud: &'static str,
) -> Result<()> {
    if dist < COINCIDENCE_EPS {
        return Err(RtdError::Singularity {
            cloud,
            i: a.min(b),
            j: a.max(b),
        });
    }
    for c in 0..pts.ncols() {
        let g = coef * (pts[[a, c]] - pts[[b, c]]) / dist;
        out[[a, c]] += g;
        out[[b, c]] -= g;
    }
    Ok(())
}

struct Side<'a> {
    cloud: &'a PointCloud,
    w: &'a DistanceMatrix,
    name: &'static str,
}

/// Value and gradients of `RTD_1(first, second)`.
fn directional(
    first: Side<'_>,
    second: Side<'_>,
    opts: SubgradientOptions,
) -> Result<(f64, Array2<f64>, Array2<f64>)> {
    let n = first.cloud.len();
    let cb = pruned_cross_barcode(first.w, second.w, 1, opts.variant)?;
    let orig = |i: usize| cb.labels[i];
    let value = finite_total(&cb.barcode, 1)?;

    // Accumulate per entry in a fixed order so sums are reproducible.
    let mut coef: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for bar in cb.barcode.of_dim(1) {
        let Some(death) = bar.death_simplex else { continue };
        let d = argmax_entry(cb.filtration.get(death), &cb.matrix);
        *coef.entry(d).or_default() += 1.0;
        let b = argmax_entry(cb.filtration.get(bar.birth_simplex), &cb.matrix);
        *coef.entry(b).or_default() -= 1.0;
    }

    let mut g_first = Array2::zeros((n, first.cloud.dim()));
    let mut g_second = Array2::zeros((n, second.cloud.dim()));
    let pf = first.cloud.points();
    let ps = second.cloud.points();
    for (&(i, j), &c) in &coef {
        if c == 0.0 || j < n {
            continue;
        }
        if i < n {
            let (a, b) = (orig(i), orig(j - n));
            if a == b {
                continue;
            }
            let (wf, ws) = (first.w.get(a, b), second.w.get(a, b));
            let to_first = match opts.variant {
                Variant::Min => true,
                Variant::Max => wf > ws,
            };
            if to_first {
                push_distance_grad(&mut g_first, pf, a, b, wf, c, first.name)?;
            } else {
                push_distance_grad(&mut g_second, ps, a, b, ws, c, second.name)?;
            }
        } else {
            let (a, b) = (orig(i - n), orig(j - n));
            let (wf, ws) = (first.w.get(a, b), second.w.get(a, b));
            match opts.variant {
                Variant::Min => {
                    let first_owns = wf < ws;
                    if first_owns || (opts.minimum_bypass && c > 0.0) {
                        push_distance_grad(&mut g_first, pf, a, b, wf, c, first.name)?;
                    }
                    if !first_owns {
                        push_distance_grad(&mut g_second, ps, a, b, ws, c, second.name)?;
                    }
                }
                Variant::Max => push_distance_grad(&mut g_first, pf, a, b, wf, c, first.name)?,
            }
        }
    }
    Ok((value, g_first, g_second))
}

/// `RTD(X, X~)` and its subgradients with respect to both clouds.
pub fn rtd_subgradient(
    x: &PointCloud,
    x_tilde: &PointCloud,
    minimum_bypass: bool,
) -> Result<(f64, GradientField)> {
    rtd_subgradient_with(
        x,
        x_tilde,
        SubgradientOptions {
            minimum_bypass,
            variant: Variant::Min,
        },
    )
}

pub fn rtd_subgradient_with(
    x: &PointCloud,
    x_tilde: &PointCloud,
    opts: SubgradientOptions,
) -> Result<(f64, GradientField)> {
    check_pair(x, x_tilde)?;
    let w = pairwise_distances(x);
    let wt = pairwise_distances(x_tilde);
    let side_x = || Side {
        cloud: x,
        w: &w,
        name: "first",
    };
    let side_t = || Side {
        cloud: x_tilde,
        w: &wt,
        name: "second",
    };
    let (fwd, bwd) = std::thread::scope(|s| {
        let h = s.spawn(|| directional(side_x(), side_t(), opts));
        let bwd = directional(side_t(), side_x(), opts);
        (h.join().expect("gradient worker panicked"), bwd)
    });
    let (v1, dx1, dt1) = fwd?;
    let (v2, dt2, dx2) = bwd?;
    let mut dx = dx1 + &dx2;
    let mut dx_tilde = dt1 + &dt2;
    dx *= 0.5;
    dx_tilde *= 0.5;
    Ok((0.5 * (v1 + v2), GradientField { dx, dx_tilde }))
}

/// Which points count as neighbours when smoothing gradients.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Neighborhood {
    /// The `k` nearest other points (ties by index).
    Knn(usize),
    /// All other points within this Euclidean radius.
    Radius(f64),
}

impl Default for Neighborhood {
    fn default() -> Self {
        Neighborhood::Knn(8)
    }
}

/// Blends each point's gradient with the mean gradient of its neighbours:
/// `beta * own + (1 - beta) * mean(neighbours)`. Points without neighbours
/// keep their own gradient.
pub fn smooth_gradients(
    grads: &Array2<f64>,
    cloud: &PointCloud,
    neighborhood: Neighborhood,
    beta: f64,
) -> Result<Array2<f64>> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(RtdError::Input(format!("beta must lie in [0, 1], got {beta}")));
    }
    if grads.nrows() != cloud.len() {
        return Err(RtdError::Shape {
            expected: format!("{} gradient rows", cloud.len()),
            got: format!("{}", grads.nrows()),
        });
    }
    if let Neighborhood::Radius(r) = neighborhood {
        if !(r >= 0.0) {
            return Err(RtdError::Input(format!("radius must be nonnegative, got {r}")));
        }
    }
    let n = cloud.len();
    let w = pairwise_distances(cloud);
    let mut out = grads.clone();
    for i in 0..n {
        let nbrs: Vec<usize> = match neighborhood {
            Neighborhood::Knn(k) => {
                let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                others.sort_by(|&a, &b| w.get(i, a).total_cmp(&w.get(i, b)).then(a.cmp(&b)));
                others.truncate(k);
                others
            }
            Neighborhood::Radius(r) => (0..n).filter(|&j| j != i && w.get(i, j) <= r).collect(),
        };
        if nbrs.is_empty() {
            continue;
        }
        let inv = 1.0 / nbrs.len() as f64;
        let mut row = out.row_mut(i);
        row *= beta;
        for &j in &nbrs {
            row.scaled_add((1.0 - beta) * inv, &grads.row(j));
        }
    }
    Ok(out)
}
