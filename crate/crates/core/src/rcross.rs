//! R-Cross-Barcodes and RTD values.
//!
//! For clouds `X`, `X~` with distance matrices `w`, `w~` on `N` points the
//! auxiliary graph has `2N` vertices. Vertex `i < N` is the `i`-th point of
//! the first half (all mutual weights zero), vertex `N + i` the `i`-th point
//! of the second half:
//!
//! ```text
//!     m = | 0     w+^T      |
//!         | w+    min(w,w~) |
//! ```
//!
//! where `w+` is `w` with its strictly lower triangle set to infinity. The
//! diagonal of `w+` stays zero, so every `i` is joined to `N + i` at value 0
//! and the degree-0 part of the barcode is empty.

use std::collections::BTreeSet;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RtdError};
use crate::geometry::{combine_max, combine_min, pairwise_distances, DistanceMatrix, PointCloud, INF_WEIGHT};
use crate::persistence::{build_filtration, compute_barcode, low_degree_barcode, total_persistence, Barcode, Filtration};

/// Which block layout the auxiliary graph uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Off-diagonal blocks from `w+`, lower-right block `min(w, w~)`.
    #[default]
    Min,
    /// Off-diagonal blocks from `max(w, w~)+`, lower-right block `w`.
    Max,
}

impl std::str::FromStr for Variant {
    type Err = RtdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Variant::Min),
            "max" => Ok(Variant::Max),
            other => Err(RtdError::Input(format!("unknown variant `{other}`"))),
        }
    }
}

/// The `2N x 2N` weight matrix of the auxiliary graph.
#[derive(Debug, Clone)]
pub struct CrossWeightMatrix {
    m: DistanceMatrix,
    n: usize,
    variant: Variant,
}

impl CrossWeightMatrix {
    /// Number of points per cloud.
    pub fn half(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn weights(&self) -> &DistanceMatrix {
        &self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m.get(i, j)
    }

    /// Vertex sets lying entirely in the first half; their simplices all have
    /// value zero and can be dropped without changing bars of degree >= 1.
    pub fn first_half_exclusion(&self) -> impl Fn(&[u32]) -> bool + Sync + 'static {
        let n = self.n as u32;
        move |vs: &[u32]| vs.iter().all(|&v| v < n)
    }
}

/// `w` with its strictly lower triangle replaced by infinity.
fn upper_plus(w: &DistanceMatrix) -> Array2<f64> {
    let mut out = w.view().to_owned();
    for ((i, j), v) in out.indexed_iter_mut() {
        if i > j {
            *v = INF_WEIGHT;
        }
    }
    out
}

/// Assembles the auxiliary weight matrix from two distance matrices.
pub fn assemble_cross_matrix(
    w: &DistanceMatrix,
    w_tilde: &DistanceMatrix,
    variant: Variant,
) -> Result<CrossWeightMatrix> {
    let n = w.len();
    if w_tilde.len() != n {
        return Err(RtdError::Shape {
            expected: format!("{n} points"),
            got: format!("{} points", w_tilde.len()),
        });
    }
    if n < 2 {
        return Err(RtdError::Input(format!(
            "cross matrix needs at least 2 points, got {n}"
        )));
    }
    let (off, lower_right) = match variant {
        Variant::Min => (upper_plus(w), combine_min(w, w_tilde)?),
        Variant::Max => (upper_plus(&combine_max(w, w_tilde)?), w.clone()),
    };
    let mut m = Array2::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            // lower-left block is `off`, upper-right its transpose
            m[[n + i, j]] = off[[i, j]];
            m[[j, n + i]] = off[[i, j]];
            m[[n + i, n + j]] = lower_right.get(i, j);
        }
    }
    Ok(CrossWeightMatrix {
        m: DistanceMatrix::new(m)?,
        n,
        variant,
    })
}

/// An R-Cross-Barcode together with the filtration its simplex ids point into.
#[derive(Debug, Clone)]
pub struct CrossBarcode {
    pub barcode: Barcode,
    pub filtration: Filtration,
    pub matrix: CrossWeightMatrix,
    /// `labels[i]` is the original index of point `i` of `matrix`.
    pub labels: Vec<usize>,
}

/// Degree-`k` R-Cross-Barcode of two weight matrices.
///
/// With `exclude_first_half` the simplices spanned by first-half vertices are
/// left out of the filtration; the bars are the same either way.
pub fn cross_barcode(
    w: &DistanceMatrix,
    w_tilde: &DistanceMatrix,
    k: usize,
    variant: Variant,
    exclude_first_half: bool,
) -> Result<CrossBarcode> {
    if k == 0 {
        return Err(RtdError::Contract(
            "R-Cross-Barcode degree must be at least 1".into(),
        ));
    }
    let matrix = assemble_cross_matrix(w, w_tilde, variant)?;
    let exclusion = matrix.first_half_exclusion();
    let filtration = build_filtration(
        matrix.weights(),
        k + 1,
        f64::INFINITY,
        exclude_first_half.then_some(&exclusion as _),
    );
    let barcode = compute_barcode(&filtration, &BTreeSet::from([k]))?;
    Ok(CrossBarcode {
        barcode,
        filtration,
        labels: (0..w.len()).collect(),
        matrix,
    })
}

/// Same bars as [`cross_barcode`] with first-half exclusion, built from a
/// smaller filtration.
///
/// The second-half copy of point 0 and the first-half copy of point `N - 1`
/// are joined to every other vertex by finite edges. Once the largest of
/// those edges is present the complex is a cone, so every bar of positive
/// length ends by then and larger simplices are left out. In degree 1 the
/// barcode does not depend on the order of the points, and the point whose
/// row has the smallest maximum is first moved to index 0, and triangles are
/// never stored. The filtration then holds only vertices, edges and the
/// destroying triangles.
pub fn pruned_cross_barcode(
    w: &DistanceMatrix,
    w_tilde: &DistanceMatrix,
    k: usize,
    variant: Variant,
) -> Result<CrossBarcode> {
    if k == 0 {
        return Err(RtdError::Contract(
            "R-Cross-Barcode degree must be at least 1".into(),
        ));
    }
    let n = w.len();
    if w_tilde.len() != n {
        return Err(RtdError::Shape {
            expected: format!("{n} points"),
            got: format!("{} points", w_tilde.len()),
        });
    }
    // largest entry in the apex row: the off-diagonal block dominates the
    // lower-right one in both variants
    let reach = |i: usize| {
        (0..n)
            .map(|j| match variant {
                Variant::Min => w.get(i, j),
                Variant::Max => w.get(i, j).max(w_tilde.get(i, j)),
            })
            .fold(0.0, f64::max)
    };
    // in higher degrees the barcode depends on the order, so keep it
    let apex = if k == 1 {
        (0..n).min_by(|&a, &b| reach(a).total_cmp(&reach(b))).unwrap_or(0)
    } else {
        0
    };
    let threshold = if k == 1 { reach(apex) } else { reach(0).min(reach(n - 1)) };
    let mut labels: Vec<usize> = (0..n).collect();
    labels.swap(0, apex);
    let permute = |m: &DistanceMatrix| DistanceMatrix::from_fn(n, |i, j| m.get(labels[i], labels[j]));
    let (w, w_tilde) = if apex == 0 {
        (w.clone(), w_tilde.clone())
    } else {
        (permute(w)?, permute(w_tilde)?)
    };
    let matrix = assemble_cross_matrix(&w, &w_tilde, variant)?;
    let (filtration, barcode) = if k == 1 {
        let first_half = |v: u32| (v as usize) < n;
        low_degree_barcode(matrix.weights(), &BTreeSet::from([1]), threshold, Some(&first_half))?
    } else {
        let exclusion = matrix.first_half_exclusion();
        let filtration = build_filtration(matrix.weights(), k + 1, threshold, Some(&exclusion as _));
        let barcode = compute_barcode(&filtration, &BTreeSet::from([k]))?;
        (filtration, barcode)
    };
    Ok(CrossBarcode {
        barcode,
        filtration,
        matrix,
        labels,
    })
}

/// Degree-`k` R-Cross-Barcode of two point clouds with matching rows.
pub fn rcross_barcode(x: &PointCloud, x_tilde: &PointCloud, k: usize, variant: Variant) -> Result<Barcode> {
    check_pair(x, x_tilde)?;
    let w = pairwise_distances(x);
    let wt = pairwise_distances(x_tilde);
    Ok(pruned_cross_barcode(&w, &wt, k, variant)?.barcode)
}

pub(crate) fn check_pair(x: &PointCloud, x_tilde: &PointCloud) -> Result<()> {
    if x.len() != x_tilde.len() {
        return Err(RtdError::Shape {
            expected: format!("{} points", x.len()),
            got: format!("{} points", x_tilde.len()),
        });
    }
    Ok(())
}

/// Sum of bar lengths of a cross barcode; every bar must be finite.
pub(crate) fn finite_total(barcode: &Barcode, k: usize) -> Result<f64> {
    if let Some(b) = barcode.of_dim(k).find(|b| !b.is_finite()) {
        return Err(RtdError::Contract(format!(
            "infinite bar born at {} in an R-Cross-Barcode",
            b.birth
        )));
    }
    Ok(total_persistence(barcode, k))
}

/// `RTD_k` between weight matrices.
pub fn rtd_k_weights(w: &DistanceMatrix, w_tilde: &DistanceMatrix, k: usize, variant: Variant) -> Result<f64> {
    let cb = pruned_cross_barcode(w, w_tilde, k, variant)?;
    finite_total(&cb.barcode, k)
}

/// `RTD_k(X, X~)`: total length of the degree-`k` R-Cross-Barcode.
pub fn rtd_k(x: &PointCloud, x_tilde: &PointCloud, k: usize) -> Result<f64> {
    rtd_k_variant(x, x_tilde, k, Variant::Min)
}

pub fn rtd_k_variant(x: &PointCloud, x_tilde: &PointCloud, k: usize, variant: Variant) -> Result<f64> {
    check_pair(x, x_tilde)?;
    rtd_k_weights(&pairwise_distances(x), &pairwise_distances(x_tilde), k, variant)
}

/// Symmetrized degree-1 divergence `(RTD_1(X, X~) + RTD_1(X~, X)) / 2`.
pub fn rtd(x: &PointCloud, x_tilde: &PointCloud) -> Result<f64> {
    rtd_variant(x, x_tilde, Variant::Min)
}

pub fn rtd_variant(x: &PointCloud, x_tilde: &PointCloud, variant: Variant) -> Result<f64> {
    check_pair(x, x_tilde)?;
    let w = pairwise_distances(x);
    let wt = pairwise_distances(x_tilde);
    let (a, b) = std::thread::scope(|s| {
        let h = s.spawn(|| rtd_k_weights(&w, &wt, 1, variant));
        let b = rtd_k_weights(&wt, &w, 1, variant);
        (h.join().expect("barcode worker panicked"), b)
    });
    Ok(0.5 * (a? + b?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn two_point_quadrants() {
        let w = DistanceMatrix::from_fn(2, |_, _| 3.0).unwrap();
        let wt = DistanceMatrix::from_fn(2, |_, _| 2.0).unwrap();
        let m = assemble_cross_matrix(&w, &wt, Variant::Min).unwrap();
        assert_eq!(m.weights().len(), 4);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.get(0, 2), 0.0);
        assert_eq!(m.get(1, 3), 0.0);
        // lower-left block is w+ (row index <= column index finite)
        assert_eq!(m.get(2, 1), 3.0);
        assert_eq!(m.get(1, 2), 3.0);
        assert_eq!(m.get(3, 0), INF_WEIGHT);
        assert_eq!(m.get(0, 3), INF_WEIGHT);
        assert_eq!(m.get(2, 3), 2.0);

        let mx = assemble_cross_matrix(&w, &wt, Variant::Max).unwrap();
        assert_eq!(mx.get(2, 1), 3.0);
        assert_eq!(mx.get(3, 0), INF_WEIGHT);
        assert_eq!(mx.get(2, 3), 3.0);
    }

    #[test]
    fn degree_zero_is_a_contract_error() {
        let x = PointCloud::new(array![[0.0], [1.0], [3.0]]).unwrap();
        assert!(matches!(
            rcross_barcode(&x, &x, 0, Variant::Min),
            Err(RtdError::Contract(_))
        ));
    }

    #[test]
    fn mismatched_sizes() {
        let x = PointCloud::new(array![[0.0], [1.0], [3.0]]).unwrap();
        let y = PointCloud::new(array![[0.0], [1.0]]).unwrap();
        assert!(matches!(rtd(&x, &y), Err(RtdError::Shape { .. })));
    }

    #[test]
    fn identical_clouds_have_empty_barcode() {
        let x = PointCloud::new(array![[0.0, 0.0], [1.0, 0.2], [0.3, 2.0], [2.0, 2.0], [1.1, 0.9]]).unwrap();
        for v in [Variant::Min, Variant::Max] {
            assert!(rcross_barcode(&x, &x, 1, v).unwrap().is_empty());
        }
        assert_eq!(rtd(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn two_points_single_bar() {
        // X: distance 3, X~: distance 2 -> the pair joins at 2 in min(w, w~)
        // and at 3 in w, one bar [2, 3].
        let x = PointCloud::new(array![[0.0], [3.0]]).unwrap();
        let y = PointCloud::new(array![[0.0], [2.0]]).unwrap();
        let bc = rcross_barcode(&x, &y, 1, Variant::Min).unwrap();
        assert_eq!(bc.intervals(1), vec![(2.0, 3.0)]);
        assert!(rcross_barcode(&y, &x, 1, Variant::Min).unwrap().is_empty());
        assert_eq!(rtd(&x, &y).unwrap(), 0.5);
    }
}
