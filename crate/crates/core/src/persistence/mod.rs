//! Vietoris-Rips filtrations and their persistence barcodes.
//!
//! Barcodes are computed over Z/2 by reducing the boundary matrix column by
//! column, highest dimension first, so that pivots found in dimension `k + 1`
//! clear the corresponding columns of dimension `k` before they are touched.
//! Every finite bar remembers the simplex that created it (the pivot row of
//! the reduced column) and the simplex that destroyed it (the column itself);
//! those two ids are what the RTD subgradient routes through.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::Write;

use smallvec::SmallVec;

use crate::error::{Result, RtdError};
use crate::geometry::DistanceMatrix;

mod low_degree;
pub use low_degree::{low_degree_barcode, VertexExclusion};

pub type Vertices = SmallVec<[u32; 4]>;

/// A simplex of a Vietoris-Rips filtration together with the value at which
/// it enters: the largest pairwise weight among its vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSimplex {
    vertices: Vertices,
    value: f64,
}

impl FilteredSimplex {
    pub fn new(vertices: Vertices, value: f64) -> Self {
        debug_assert!(vertices.windows(2).all(|p| p[0] < p[1]));
        Self { vertices, value }
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

/// Total order used for filtrations: value, then dimension, then vertices.
pub fn filtration_order(a: &FilteredSimplex, b: &FilteredSimplex) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.vertices.len().cmp(&b.vertices.len()))
        .then_with(|| a.vertices.cmp(&b.vertices))
}

/// Simplices sorted in filtration order. Indices into this list are the
/// simplex ids carried by [`Bar`].
#[derive(Debug, Clone, Default)]
pub struct Filtration {
    simplices: Vec<FilteredSimplex>,
}

impl Filtration {
    /// Wraps an arbitrary simplex list without sorting it; ordering is checked
    /// by [`compute_barcode`].
    pub fn from_unsorted_unchecked(simplices: Vec<FilteredSimplex>) -> Self {
        Self { simplices }
    }

    pub fn simplices(&self) -> &[FilteredSimplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn get(&self, id: usize) -> &FilteredSimplex {
        &self.simplices[id]
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.simplices.iter().map(FilteredSimplex::dim).max()
    }

    pub fn count_of_dim(&self, dim: usize) -> usize {
        self.simplices.iter().filter(|s| s.dim() == dim).count()
    }
}

/// Predicate over sorted vertex sets; simplices it accepts are left out of
/// the filtration.
pub type Exclusion<'a> = &'a (dyn Fn(&[u32]) -> bool + Sync);

/// Builds the Vietoris-Rips filtration of a weighted graph.
///
/// Contains every simplex of dimension at most `max_dim` whose value is at
/// most `max_value`. Edges of infinite weight never enter. When `exclusion`
/// is given, every simplex it accepts is omitted, so the barcode computed
/// from the result is that of the complex relative to the excluded part.
/// Excluded sets must be closed under taking faces.
pub fn build_filtration(
    w: &DistanceMatrix,
    max_dim: usize,
    max_value: f64,
    exclusion: Option<Exclusion<'_>>,
) -> Filtration {
    let n = w.len();
    let admissible = |v: f64| v.is_finite() && v <= max_value;
    let mut out = Vec::new();
    let mut stack: Vertices = SmallVec::new();
    let mut keep = |vs: &Vertices, value: f64, out: &mut Vec<FilteredSimplex>| {
        if exclusion.is_none_or(|ex| !ex(vs)) {
            out.push(FilteredSimplex::new(vs.clone(), value));
        }
    };

    // Depth-first clique enumeration; `cands` holds the vertices adjacent to
    // every vertex on the stack with a larger index than its top.
    #[allow(clippy::too_many_arguments)]
    fn extend(
        w: &DistanceMatrix,
        stack: &mut Vertices,
        value: f64,
        cands: &[u32],
        max_dim: usize,
        admissible: &dyn Fn(f64) -> bool,
        keep: &mut dyn FnMut(&Vertices, f64, &mut Vec<FilteredSimplex>),
        out: &mut Vec<FilteredSimplex>,
    ) {
        keep(stack, value, out);
        if stack.len() > max_dim {
            return;
        }
        for (pos, &u) in cands.iter().enumerate() {
            let mut v = value;
            for &s in stack.iter() {
                v = v.max(w.get(s as usize, u as usize));
            }
            let next: Vec<u32> = if stack.len() < max_dim {
                cands[pos + 1..]
                    .iter()
                    .copied()
                    .filter(|&x| admissible(w.get(u as usize, x as usize)))
                    .collect()
            } else {
                Vec::new()
            };
            stack.push(u);
            extend(w, stack, v, &next, max_dim, admissible, keep, out);
            stack.pop();
        }
    }

    if max_value >= 0.0 {
        for v in 0..n as u32 {
            let cands: Vec<u32> = ((v + 1)..n as u32)
                .filter(|&u| admissible(w.get(v as usize, u as usize)))
                .collect();
            stack.push(v);
            extend(w, &mut stack, 0.0, &cands, max_dim, &admissible, &mut keep, &mut out);
            stack.pop();
        }
    }
    out.sort_unstable_by(filtration_order);
    Filtration { simplices: out }
}

/// One persistence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar {
    pub dim: usize,
    pub birth: f64,
    /// `f64::INFINITY` for classes that never die.
    pub death: f64,
    /// Filtration id of the creator simplex.
    pub birth_simplex: usize,
    /// Filtration id of the destroyer simplex.
    pub death_simplex: Option<usize>,
}

impl Bar {
    pub fn is_finite(&self) -> bool {
        self.death.is_finite()
    }

    pub fn length(&self) -> f64 {
        self.death - self.birth
    }
}

/// Multiset of bars, sorted by dimension, then birth, then death.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Barcode {
    pub bars: Vec<Bar>,
}

impl Barcode {
    pub fn new(mut bars: Vec<Bar>) -> Self {
        bars.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then(a.birth.total_cmp(&b.birth))
                .then(a.death.total_cmp(&b.death))
                .then(a.birth_simplex.cmp(&b.birth_simplex))
        });
        Self { bars }
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn of_dim(&self, dim: usize) -> impl Iterator<Item = &Bar> {
        self.bars.iter().filter(move |b| b.dim == dim)
    }

    /// `(birth, death)` pairs of one dimension.
    pub fn intervals(&self, dim: usize) -> Vec<(f64, f64)> {
        self.of_dim(dim).map(|b| (b.birth, b.death)).collect()
    }

    /// Writes `dim,birth,death` rows; infinite deaths are written as `inf`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("dim,birth,death\n");
        for b in &self.bars {
            let death = if b.death.is_finite() {
                format!("{}", b.death)
            } else {
                "inf".to_string()
            };
            let _ = writeln!(s, "{},{},{}", b.dim, b.birth, death);
        }
        s
    }

    /// Parses the format written by [`Barcode::write_csv`]. Simplex ids are
    /// not part of the format and come back as zero.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let mut bars = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(RtdError::Input(format!("barcode row {line}: expected 3 fields")));
            }
            let parse = |s: &str| -> Result<f64> {
                match s.trim() {
                    "inf" | "Infinity" => Ok(f64::INFINITY),
                    t => t
                        .parse::<f64>()
                        .map_err(|e| RtdError::Input(format!("barcode row {line}: {e}"))),
                }
            };
            let dim = rec[0]
                .trim()
                .parse::<usize>()
                .map_err(|e| RtdError::Input(format!("barcode row {line}: {e}")))?;
            bars.push(Bar {
                dim,
                birth: parse(&rec[1])?,
                death: parse(&rec[2])?,
                birth_simplex: 0,
                death_simplex: None,
            });
        }
        Ok(Barcode::new(bars))
    }
}

/// Sum of `death - birth` over the finite bars of one dimension.
pub fn total_persistence(barcode: &Barcode, dim: usize) -> f64 {
    barcode
        .of_dim(dim)
        .filter(|b| b.is_finite())
        .map(Bar::length)
        // an empty float sum is -0.0
        .fold(0.0, |a, b| a + b)
}

/// Global ids of a filtration grouped by dimension, in filtration order.
struct DimIndex {
    by_dim: Vec<Vec<usize>>,
}

impl DimIndex {
    fn new(f: &Filtration) -> Self {
        let top = f.max_dim().unwrap_or(0);
        let mut by_dim = vec![Vec::new(); top + 1];
        for (id, s) in f.simplices.iter().enumerate() {
            by_dim[s.dim()].push(id);
        }
        Self { by_dim }
    }
}

/// Lookup from a facet's vertex set to its local row index in dimension `dim - 1`.
enum FacetIndex {
    Vertices(Vec<u32>),
    Edges { n: usize, table: Vec<u32> },
    General(HashMap<Vertices, u32>),
}

const MISSING: u32 = u32::MAX;

impl FacetIndex {
    fn new(f: &Filtration, ix: &DimIndex, facet_dim: usize) -> Self {
        let ids = &ix.by_dim[facet_dim];
        let n_vertices = f
            .simplices
            .iter()
            .flat_map(|s| s.vertices.iter())
            .max()
            .map_or(0, |&v| v as usize + 1);
        match facet_dim {
            0 => {
                let mut table = vec![MISSING; n_vertices];
                for (pos, &id) in ids.iter().enumerate() {
                    table[f.simplices[id].vertices[0] as usize] = pos as u32;
                }
                FacetIndex::Vertices(table)
            }
            1 => {
                let mut table = vec![MISSING; n_vertices * n_vertices];
                for (pos, &id) in ids.iter().enumerate() {
                    let v = &f.simplices[id].vertices;
                    table[v[0] as usize * n_vertices + v[1] as usize] = pos as u32;
                }
                FacetIndex::Edges {
                    n: n_vertices,
                    table,
                }
            }
            _ => FacetIndex::General(
                ids.iter()
                    .enumerate()
                    .map(|(pos, &id)| (f.simplices[id].vertices.clone(), pos as u32))
                    .collect(),
            ),
        }
    }

    fn lookup(&self, facet: &[u32]) -> u32 {
        match self {
            FacetIndex::Vertices(t) => t[facet[0] as usize],
            FacetIndex::Edges { n, table } => table[facet[0] as usize * n + facet[1] as usize],
            FacetIndex::General(map) => map.get(facet).copied().unwrap_or(MISSING),
        }
    }
}

/// Local row indices of the facets of `s` present in the filtration, ascending.
fn boundary(s: &FilteredSimplex, facets: &FacetIndex) -> Vec<u32> {
    let mut col = Vec::with_capacity(s.vertices.len());
    if s.vertices.len() < 2 {
        return col;
    }
    let mut facet: Vertices = SmallVec::with_capacity(s.vertices.len() - 1);
    for skip in 0..s.vertices.len() {
        facet.clear();
        facet.extend(
            s.vertices
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v),
        );
        let row = facets.lookup(&facet);
        if row != MISSING {
            col.push(row);
        }
    }
    col.sort_unstable();
    col
}

/// `a <- a + b` over Z/2 for ascending index lists.
fn add_assign(a: &mut Vec<u32>, b: &[u32], scratch: &mut Vec<u32>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                scratch.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                scratch.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&a[i..]);
    scratch.extend_from_slice(&b[j..]);
    std::mem::swap(a, scratch);
}

/// Outcome of reducing all columns of one dimension.
struct Reduction {
    /// `(row local index, column local index)` persistence pairs.
    pairs: Vec<(u32, u32)>,
    /// Column local indices that reduced to zero.
    zero_columns: Vec<u32>,
}

/// Reduces the dimension-`dim` columns. Columns flagged in `cleared` are
/// known to be zero after reduction and are skipped. Stops early once
/// `stop_after` pairs have been found.
fn reduce_dimension(
    f: &Filtration,
    ix: &DimIndex,
    dim: usize,
    cleared: &[bool],
    stop_after: Option<usize>,
) -> Reduction {
    let cols = &ix.by_dim[dim];
    let n_rows = if dim == 0 { 0 } else { ix.by_dim[dim - 1].len() };
    let mut pairs = Vec::new();
    let mut zero_columns = Vec::new();
    if dim == 0 {
        zero_columns.extend(0..cols.len() as u32);
        return Reduction {
            pairs,
            zero_columns,
        };
    }
    let facets = FacetIndex::new(f, ix, dim - 1);
    let mut pivot_owner = vec![MISSING; n_rows];
    let mut reduced: Vec<Vec<u32>> = Vec::new();
    let mut scratch = Vec::new();
    for (j, &id) in cols.iter().enumerate() {
        if cleared.get(j).copied().unwrap_or(false) {
            zero_columns.push(j as u32);
            continue;
        }
        if stop_after.is_some_and(|s| pairs.len() >= s) {
            break;
        }
        let mut col = boundary(&f.simplices[id], &facets);
        loop {
            match col.last() {
                None => {
                    zero_columns.push(j as u32);
                    break;
                }
                Some(&p) => {
                    let owner = pivot_owner[p as usize];
                    if owner == MISSING {
                        pivot_owner[p as usize] = reduced.len() as u32;
                        pairs.push((p, j as u32));
                        reduced.push(col);
                        break;
                    }
                    add_assign(&mut col, &reduced[owner as usize], &mut scratch);
                }
            }
        }
    }
    Reduction {
        pairs,
        zero_columns,
    }
}

/// Number of edges that close a cycle, relative to vertices absent from the
/// filtration (an edge hanging off an absent vertex behaves like an edge to
/// a single virtual root).
fn positive_edge_count(f: &Filtration, ix: &DimIndex) -> usize {
    let n_vertices = f
        .simplices
        .iter()
        .flat_map(|s| s.vertices.iter())
        .max()
        .map_or(0, |&v| v as usize + 1);
    let root = n_vertices;
    let mut present = vec![false; n_vertices];
    for &id in &ix.by_dim[0] {
        present[f.simplices[id].vertices[0] as usize] = true;
    }
    let mut parent: Vec<usize> = (0..=n_vertices).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut positive = 0;
    for &id in ix.by_dim.get(1).map(Vec::as_slice).unwrap_or(&[]) {
        let v = &f.simplices[id].vertices;
        let a = if present[v[0] as usize] { v[0] as usize } else { root };
        let b = if present[v[1] as usize] { v[1] as usize } else { root };
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            positive += 1;
        } else {
            parent[ra] = rb;
        }
    }
    positive
}

fn check_sorted(f: &Filtration) -> Result<()> {
    for (i, pair) in f.simplices.windows(2).enumerate() {
        if filtration_order(&pair[0], &pair[1]) != Ordering::Less {
            return Err(RtdError::Contract(format!(
                "filtration is not sorted at position {}",
                i + 1
            )));
        }
    }
    for (i, s) in f.simplices.iter().enumerate() {
        if s.vertices.is_empty() || s.vertices.windows(2).any(|p| p[0] >= p[1]) {
            return Err(RtdError::Contract(format!(
                "simplex {i} has an invalid vertex list"
            )));
        }
    }
    Ok(())
}

/// Options for [`compute_barcode_with`].
#[derive(Debug, Clone, Copy)]
pub struct ReductionOptions {
    /// Skip columns already known to be zero from the dimension above.
    pub clearing: bool,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self { clearing: true }
    }
}

/// Persistence barcode of a sorted filtration in the requested dimensions.
///
/// Bars of dimension `k` need `(k + 1)`-simplices as destroyers; classes
/// with no destroyer in the filtration are reported as infinite bars.
/// Zero-length bars are dropped.
pub fn compute_barcode(filtration: &Filtration, dims: &BTreeSet<usize>) -> Result<Barcode> {
    compute_barcode_with(filtration, dims, ReductionOptions::default())
}

pub fn compute_barcode_with(
    filtration: &Filtration,
    dims: &BTreeSet<usize>,
    opts: ReductionOptions,
) -> Result<Barcode> {
    check_sorted(filtration)?;
    let (Some(&lo), Some(&hi)) = (dims.first(), dims.last()) else {
        return Ok(Barcode::default());
    };
    if filtration.is_empty() {
        return Ok(Barcode::default());
    }
    let ix = DimIndex::new(filtration);
    let top = ix.by_dim.len() - 1;
    let mut bars = Vec::new();
    let mut cleared_next: Vec<bool> = Vec::new();
    let mut pairs_above: Vec<(u32, u32)> = Vec::new();

    let first = (hi + 1).min(top);
    for d in (lo..=first).rev() {
        if d > top {
            continue;
        }
        let cleared = if opts.clearing && d < first {
            std::mem::take(&mut cleared_next)
        } else {
            Vec::new()
        };
        // Destroyers above the highest requested dimension only matter
        // through their pivots; once every cycle-closing edge is paired the
        // remaining triangle columns are all zero.
        let stop_after = if d == hi + 1 && d == 2 && !dims.contains(&2) {
            Some(positive_edge_count(filtration, &ix))
        } else {
            None
        };
        let red = reduce_dimension(filtration, &ix, d, &cleared, stop_after);

        if d <= hi {
            // Finite bars of dimension d come from the pairs of dimension d + 1.
            let mut paired = vec![false; ix.by_dim[d].len()];
            for &(row, col) in &pairs_above {
                paired[row as usize] = true;
                let birth_id = ix.by_dim[d][row as usize];
                let death_id = ix.by_dim[d + 1][col as usize];
                let birth = filtration.simplices[birth_id].value;
                let death = filtration.simplices[death_id].value;
                if death > birth {
                    bars.push(Bar {
                        dim: d,
                        birth,
                        death,
                        birth_simplex: birth_id,
                        death_simplex: Some(death_id),
                    });
                }
            }
            for &j in &red.zero_columns {
                if !paired[j as usize] {
                    let id = ix.by_dim[d][j as usize];
                    bars.push(Bar {
                        dim: d,
                        birth: filtration.simplices[id].value,
                        death: f64::INFINITY,
                        birth_simplex: id,
                        death_simplex: None,
                    });
                }
            }
        }

        if d > 0 {
            let mut next = vec![false; ix.by_dim[d - 1].len()];
            for &(row, _) in &red.pairs {
                next[row as usize] = true;
            }
            cleared_next = next;
        }
        pairs_above = red.pairs;
    }
    Ok(Barcode::new(bars))
}

/// Vietoris-Rips barcode of a weighted graph in the requested degrees.
///
/// Degrees 0 and 1 go through [`low_degree_barcode`]; anything higher builds
/// the explicit filtration. Bar ids are only meaningful for the filtration
/// each path builds, so they are not exposed here.
pub fn rips_barcode(w: &DistanceMatrix, dims: &BTreeSet<usize>, max_value: f64) -> Result<Barcode> {
    if dims.iter().all(|&d| d <= 1) {
        return Ok(low_degree_barcode(w, dims, max_value, None)?.1);
    }
    let top = dims.last().map_or(1, |d| d + 1);
    compute_barcode(&build_filtration(w, top, max_value, None), dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{pairwise_distances, PointCloud};
    use ndarray::array;

    fn dims(ds: &[usize]) -> BTreeSet<usize> {
        ds.iter().copied().collect()
    }

    #[test]
    fn triangle_counts_and_values() {
        let c = PointCloud::new(array![[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]]).unwrap();
        let w = pairwise_distances(&c);
        let f = build_filtration(&w, 2, f64::INFINITY, None);
        assert_eq!(f.count_of_dim(0), 3);
        assert_eq!(f.count_of_dim(1), 3);
        assert_eq!(f.count_of_dim(2), 1);
        let tri = f.simplices().iter().find(|s| s.dim() == 2).unwrap();
        assert_eq!(tri.value(), 5.0);
        assert_eq!(f.simplices().last().unwrap().dim(), 2);
    }

    #[test]
    fn threshold_below_smallest_edge_keeps_vertices() {
        let c = PointCloud::new(array![[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]]).unwrap();
        let w = pairwise_distances(&c);
        let f = build_filtration(&w, 2, 2.9, None);
        assert_eq!(f.len(), 3);
        assert!(f.simplices().iter().all(|s| s.dim() == 0));
    }

    #[test]
    fn unit_square_barcode() {
        let c = PointCloud::new(array![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let w = pairwise_distances(&c);
        let f = build_filtration(&w, 2, f64::INFINITY, None);
        let bc = compute_barcode(&f, &dims(&[0, 1])).unwrap();
        let h0 = bc.intervals(0);
        assert_eq!(h0.len(), 4);
        assert_eq!(h0.iter().filter(|b| b.1 == 1.0).count(), 3);
        assert_eq!(h0.iter().filter(|b| b.1.is_infinite()).count(), 1);
        let h1 = bc.intervals(1);
        assert_eq!(h1, vec![(1.0, 2f64.sqrt())]);
        let bar = bc.of_dim(1).next().unwrap();
        assert_eq!(f.get(bar.birth_simplex).dim(), 1);
        assert_eq!(f.get(bar.death_simplex.unwrap()).dim(), 2);
        assert!((total_persistence(&bc, 1) - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn single_point() {
        let c = PointCloud::new(array![[0.5, 0.5]]).unwrap();
        let w = pairwise_distances(&c);
        let f = build_filtration(&w, 1, f64::INFINITY, None);
        let bc = compute_barcode(&f, &dims(&[0])).unwrap();
        assert_eq!(bc.intervals(0), vec![(0.0, f64::INFINITY)]);
    }

    #[test]
    fn empty_barcode_has_zero_persistence() {
        assert_eq!(total_persistence(&Barcode::default(), 1), 0.0);
    }

    #[test]
    fn unsorted_filtration_is_rejected() {
        let f = Filtration::from_unsorted_unchecked(vec![
            FilteredSimplex::new(SmallVec::from_slice(&[0, 1]), 1.0),
            FilteredSimplex::new(SmallVec::from_slice(&[0]), 0.0),
        ]);
        assert!(matches!(
            compute_barcode(&f, &dims(&[0])),
            Err(RtdError::Contract(_))
        ));
    }

    #[test]
    fn infinite_edges_never_enter() {
        let w = DistanceMatrix::from_fn(3, |i, j| if (i, j) == (0, 2) { f64::INFINITY } else { 1.0 })
            .unwrap();
        let f = build_filtration(&w, 2, f64::INFINITY, None);
        assert_eq!(f.count_of_dim(1), 2);
        assert_eq!(f.count_of_dim(2), 0);
    }

    #[test]
    fn csv_round_trip_format() {
        let c = PointCloud::new(array![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let w = pairwise_distances(&c);
        let f = build_filtration(&w, 2, f64::INFINITY, None);
        let bc = compute_barcode(&f, &dims(&[1])).unwrap();
        assert_eq!(bc.to_csv_string(), "dim,birth,death\n1,1,1.4142135623730951\n");
        let back = Barcode::from_csv_str(&bc.to_csv_string()).unwrap();
        assert_eq!(back.intervals(1), bc.intervals(1));
        let inf = Barcode::new(vec![Bar {
            dim: 0,
            birth: 0.0,
            death: f64::INFINITY,
            birth_simplex: 0,
            death_simplex: None,
        }]);
        assert_eq!(inf.to_csv_string(), "dim,birth,death\n0,0,inf\n");
    }

    #[test]
    fn zero_length_bars_are_dropped() {
        // Equilateral triangle: the H1 class is born and killed at the same value.
        let w = DistanceMatrix::from_fn(3, |_, _| 1.0).unwrap();
        let f = build_filtration(&w, 2, f64::INFINITY, None);
        let bc = compute_barcode(&f, &dims(&[1])).unwrap();
        assert!(bc.is_empty());
    }
}
