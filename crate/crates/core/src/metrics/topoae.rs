//! The TopoAE baseline loss: squared distance mismatch along the minimum
//! spanning trees of both clouds.

use crate::error::{Result, RtdError};
use crate::geometry::{pairwise_distances, DistanceMatrix, PointCloud};

/// One squared-difference term of the loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopoAeTerm {
    pub i: usize,
    pub j: usize,
    /// Whether the edge belongs to the tree of the first (`true`) or second cloud.
    pub from_first: bool,
    pub value: f64,
}

/// Edges of a minimum spanning tree by Kruskal's algorithm. Equal weights are
/// taken in `(i, j)` order, so the tree is deterministic.
pub fn minimum_spanning_tree(w: &DistanceMatrix) -> Vec<(usize, usize)> {
    let n = w.len();
    let mut edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| w.get(i, j).is_finite())
        .collect();
    // stable sort keeps index order among ties
    edges.sort_by(|a, b| w.get(a.0, a.1).total_cmp(&w.get(b.0, b.1)));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    for (i, j) in edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            tree.push((i, j));
            if tree.len() + 1 == n {
                break;
            }
        }
    }
    tree
}

/// Per-edge terms `(w_ij - w~_ij)^2 / 2` over both trees.
pub fn topoae_terms(x: &PointCloud, z: &PointCloud) -> Result<Vec<TopoAeTerm>> {
    if x.len() != z.len() {
        return Err(RtdError::Shape {
            expected: format!("{} points", x.len()),
            got: format!("{} points", z.len()),
        });
    }
    if x.len() < 2 {
        return Err(RtdError::Input("TopoAE loss needs at least 2 points".into()));
    }
    let w = pairwise_distances(x);
    let wt = pairwise_distances(z);
    let term = |(i, j): (usize, usize), from_first| TopoAeTerm {
        i,
        j,
        from_first,
        value: 0.5 * (w.get(i, j) - wt.get(i, j)).powi(2),
    };
    let mut terms: Vec<TopoAeTerm> = minimum_spanning_tree(&w).into_iter().map(|e| term(e, true)).collect();
    terms.extend(minimum_spanning_tree(&wt).into_iter().map(|e| term(e, false)));
    Ok(terms)
}

/// `l + l~`, the sum of all terms.
pub fn topoae_loss(x: &PointCloud, z: &PointCloud) -> Result<f64> {
    Ok(topoae_terms(x, z)?.iter().map(|t| t.value).fold(0.0, |a, b| a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn identical_is_zero() {
        let x = PointCloud::new(array![[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]]).unwrap();
        assert_eq!(topoae_loss(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn tie_break_by_index() {
        let sq = PointCloud::new(array![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let t = minimum_spanning_tree(&pairwise_distances(&sq));
        assert_eq!(t, vec![(0, 1), (0, 3), (1, 2)]);
    }

    #[test]
    fn hand_computed() {
        // X on a line 0,1,3 ; Z on a line 0,2,3
        let x = PointCloud::new(array![[0.0], [1.0], [3.0]]).unwrap();
        let z = PointCloud::new(array![[0.0], [2.0], [3.0]]).unwrap();
        // trees: X {01, 12}, Z {12, 01}; diffs 1 and 1 -> 4 * 0.5
        assert_eq!(topoae_loss(&x, &z).unwrap(), 2.0);
    }
}
