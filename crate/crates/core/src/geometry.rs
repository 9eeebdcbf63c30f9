//! Point clouds, pairwise distance matrices and elementwise weight combinations.
//!
//! Row order carries identity: row `i` of two clouds with the same number of
//! points refers to the same underlying object.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RtdError};

/// Weight of an edge that never enters a filtration.
///
/// Compares strictly greater than every finite value, and sums or maxima
/// involving it stay infinite.
pub const INF_WEIGHT: f64 = f64::INFINITY;

/// `n` points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Array2<f64>,
}

impl PointCloud {
    pub fn new(points: Array2<f64>) -> Result<Self> {
        let (n, d) = points.dim();
        if n == 0 || d == 0 {
            return Err(RtdError::Input(format!(
                "point cloud must have at least one point and one coordinate, got {n}x{d}"
            )));
        }
        if let Some(((i, j), v)) = points.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(RtdError::Input(format!(
                "non-finite coordinate {v} at point {i}, axis {j}"
            )));
        }
        Ok(Self { points })
    }

    /// Builds a cloud from row vectors; all rows must share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(RtdError::Input(format!(
                "ragged rows: row {i} has {} columns, expected {d}",
                r.len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let points = Array2::from_shape_vec((n, d), flat)
            .map_err(|e| RtdError::Input(e.to_string()))?;
        Self::new(points)
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.points.row(i)
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.points
    }

    /// Subset of rows, in the order given.
    pub fn select(&self, rows: &[usize]) -> PointCloud {
        PointCloud {
            points: self.points.select(Axis(0), rows),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.points.rows().into_iter().map(|r| r.to_vec()).collect()
    }
}

/// Symmetric `n x n` matrix of nonnegative edge weights with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    w: Array2<f64>,
}

impl DistanceMatrix {
    /// Validates symmetry, zero diagonal and nonnegativity.
    pub fn new(w: Array2<f64>) -> Result<Self> {
        let (r, c) = w.dim();
        if r != c {
            return Err(RtdError::Shape {
                expected: "square matrix".into(),
                got: format!("{r}x{c}"),
            });
        }
        for i in 0..r {
            if w[[i, i]] != 0.0 {
                return Err(RtdError::Input(format!("nonzero diagonal entry at {i}")));
            }
            for j in (i + 1)..r {
                let a = w[[i, j]];
                if a.is_nan() || a < 0.0 {
                    return Err(RtdError::Input(format!("invalid weight {a} at ({i},{j})")));
                }
                if a != w[[j, i]] {
                    return Err(RtdError::Input(format!("asymmetric weights at ({i},{j})")));
                }
            }
        }
        let w = if w.is_standard_layout() { w } else { w.as_standard_layout().into_owned() };
        Ok(Self { w })
    }

    /// Builds from the strict upper triangle via `f(i, j)`, `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut w = Array2::zeros((n, n));
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                w[[i, j]] = v;
                w[[j, i]] = v;
            }
        }
        Self::new(w)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            w: Array2::zeros((n, n)),
        }
    }

    pub fn len(&self) -> usize {
        self.w.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.w.nrows() == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[[i, j]]
    }

    /// Weights from vertex `i` to every vertex.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.w.as_slice().expect("standard layout")[i * n..(i + 1) * n]
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.w.view()
    }

    /// Largest finite off-diagonal weight, or 0 for a single vertex.
    pub fn max_finite(&self) -> f64 {
        self.w
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max)
    }

    /// Upper-triangular entries `(i, j, w_ij)` with `i < j`, row-major.
    pub fn upper_triangle(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j, self.w[[i, j]])))
    }
}

/// Euclidean distances between all pairs of points.
pub fn pairwise_distances(cloud: &PointCloud) -> DistanceMatrix {
    let n = cloud.len();
    let pts = cloud.points();
    let mut w = Array2::zeros((n, n));
    for i in 0..n {
        let pi = pts.row(i);
        for j in (i + 1)..n {
            let d = pi
                .iter()
                .zip(pts.row(j).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            w[[i, j]] = d;
            w[[j, i]] = d;
        }
    }
    DistanceMatrix { w }
}

fn combine(a: &DistanceMatrix, b: &DistanceMatrix, f: impl Fn(f64, f64) -> f64) -> Result<DistanceMatrix> {
    if a.len() != b.len() {
        return Err(RtdError::Shape {
            expected: format!("{0}x{0}", a.len()),
            got: format!("{0}x{0}", b.len()),
        });
    }
    let mut w = a.w.clone();
    w.zip_mut_with(&b.w, |x, &y| *x = f(*x, y));
    Ok(DistanceMatrix { w })
}

/// Entrywise minimum of two weight matrices.
pub fn combine_min(a: &DistanceMatrix, b: &DistanceMatrix) -> Result<DistanceMatrix> {
    combine(a, b, f64::min)
}

/// Entrywise maximum of two weight matrices.
pub fn combine_max(a: &DistanceMatrix, b: &DistanceMatrix) -> Result<DistanceMatrix> {
    combine(a, b, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn three_four_five() {
        let c = PointCloud::new(array![[0.0, 0.0], [3.0, 4.0]]).unwrap();
        let w = pairwise_distances(&c);
        assert_eq!(w.get(0, 1), 5.0);
        assert_eq!(w.get(1, 0), 5.0);
    }

    #[test]
    fn single_point_is_zero_matrix() {
        let c = PointCloud::new(array![[1.5, -2.0, 3.0]]).unwrap();
        let w = pairwise_distances(&c);
        assert_eq!(w.len(), 1);
        assert_eq!(w.get(0, 0), 0.0);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(PointCloud::new(array![[0.0, f64::NAN]]).is_err());
        assert!(PointCloud::new(array![[f64::INFINITY]]).is_err());
        assert!(PointCloud::new(Array2::zeros((0, 2))).is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(PointCloud::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn min_max_identities() {
        let c = PointCloud::new(array![[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]]).unwrap();
        let w = pairwise_distances(&c);
        assert_eq!(combine_min(&w, &w).unwrap(), w);
        assert_eq!(combine_max(&w, &w).unwrap(), w);
        let z = DistanceMatrix::zeros(3);
        assert_eq!(combine_min(&w, &z).unwrap(), z);
        let inf = DistanceMatrix::from_fn(3, |_, _| INF_WEIGHT).unwrap();
        let m = combine_max(&w, &inf).unwrap();
        for (_, _, v) in m.upper_triangle() {
            assert_eq!(v, INF_WEIGHT);
        }
        assert_eq!(m.get(1, 1), 0.0);
    }

    #[test]
    fn shape_mismatch() {
        let a = DistanceMatrix::zeros(3);
        let b = DistanceMatrix::zeros(4);
        assert!(matches!(combine_min(&a, &b), Err(RtdError::Shape { .. })));
        assert!(matches!(combine_max(&a, &b), Err(RtdError::Shape { .. })));
    }

    #[test]
    fn validation_rejects_asymmetric() {
        let w = array![[0.0, 1.0], [2.0, 0.0]];
        assert!(DistanceMatrix::new(w).is_err());
        let w = array![[1.0, 1.0], [1.0, 0.0]];
        assert!(DistanceMatrix::new(w).is_err());
    }
}
