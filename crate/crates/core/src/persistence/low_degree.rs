//! Degree 0 and 1 barcodes without materializing triangles.
//!
//! Degree 0 comes from a union-find pass over the sorted edges. Degree 1 is
//! read off the coboundary matrix of the edges: columns are processed from
//! the last edge to the first, each column lists the triangles containing
//! the edge, and its pivot is the earliest of them. Edges that already
//! killed a degree-0 class are skipped (clearing). The pairs are the same
//! as those of the boundary reduction, so bars keep their creator and
//! destroyer simplices.

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use smallvec::smallvec;

use super::{filtration_order, Bar, Barcode, FilteredSimplex, Filtration, Vertices};
use crate::error::{Result, RtdError};
use crate::geometry::DistanceMatrix;

/// Predicate over vertices; a simplex all of whose vertices it accepts is
/// left out, which yields the barcode relative to the full subcomplex on
/// those vertices.
pub type VertexExclusion<'a> = &'a (dyn Fn(u32) -> bool + Sync);

const VERTEX_BITS: u32 = 21;

/// Order-preserving integer image of a filtration value.
fn value_key(v: f64) -> u64 {
    let b = v.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | 1 << 63
    }
}

/// Triangles ordered as in the filtration: value, then vertices.
fn triangle_key(value: f64, a: u32, b: u32, c: u32) -> u128 {
    let packed = (a as u64) << (2 * VERTEX_BITS) | (b as u64) << VERTEX_BITS | c as u64;
    (value_key(value) as u128) << 64 | packed as u128
}

fn triangle_vertices(key: u128) -> [u32; 3] {
    let mask = (1u64 << VERTEX_BITS) - 1;
    let p = key as u64;
    [
        (p >> (2 * VERTEX_BITS)) as u32,
        (p >> VERTEX_BITS & mask) as u32,
        (p & mask) as u32,
    ]
}

/// Removes and returns the smallest key that survives Z/2 cancellation.
fn pop_pivot(col: &mut BinaryHeap<Reverse<u128>>) -> Option<u128> {
    while let Some(Reverse(t)) = col.pop() {
        let mut odd = true;
        while col.peek() == Some(&Reverse(t)) {
            col.pop();
            odd = !odd;
        }
        if odd {
            return Some(t);
        }
    }
    None
}

struct Edge {
    a: u32,
    b: u32,
    value: f64,
}

/// Calls `emit` with the key of every triangle containing `e`.
#[inline]
fn cofacets(rows: &[&[f64]], e: &Edge, max_value: f64, mut emit: impl FnMut(u128)) {
    let (a, b) = (e.a as usize, e.b as usize);
    let (ra, rb) = (rows[a], rows[b]);
    for (c, (&wa, &wb)) in ra.iter().zip(rb).enumerate() {
        // infinite weights fail the comparison as well
        let v = wa.max(wb);
        if !(v <= max_value && v < f64::INFINITY) || c == a || c == b {
            continue;
        }
        let (x, y, z) = if c < a {
            (c, a, b)
        } else if c < b {
            (a, c, b)
        } else {
            (a, b, c)
        };
        emit(triangle_key(e.value.max(v), x as u32, y as u32, z as u32));
    }
}

/// Key of the earliest triangle containing `e`. For a fixed edge the vertex
/// order of its cofacets follows the third vertex, so ties go to the
/// smallest one.
fn first_cofacet(rows: &[&[f64]], e: &Edge, max_value: f64) -> Option<u128> {
    let (a, b) = (e.a as usize, e.b as usize);
    let (ra, rb) = (rows[a], rows[b]);
    let mut best = (f64::INFINITY, usize::MAX);
    for range in [0..a, a + 1..b, b + 1..ra.len()] {
        for c in range {
            let v = ra[c].max(rb[c]).max(e.value);
            if v < best.0 {
                best = (v, c);
            }
        }
    }
    let (v, c) = best;
    if !(v <= max_value && v < f64::INFINITY) {
        return None;
    }
    let (x, y, z) = if c < a {
        (c, a, b)
    } else if c < b {
        (a, c, b)
    } else {
        (a, b, c)
    };
    Some(triangle_key(v, x as u32, y as u32, z as u32))
}

/// Barcode in degrees 0 and 1 of the Vietoris-Rips filtration of `w`.
///
/// The bars equal those of [`super::build_filtration`] followed by
/// [`super::compute_barcode`] with the same `max_value` and the matching
/// exclusion. The returned filtration holds the vertices, the edges and the
/// triangles that destroy a degree-1 class; bar ids refer to it.
pub fn low_degree_barcode(
    w: &DistanceMatrix,
    dims: &BTreeSet<usize>,
    max_value: f64,
    excluded: Option<VertexExclusion<'_>>,
) -> Result<(Filtration, Barcode)> {
    if dims.iter().any(|&d| d > 1) {
        return Err(RtdError::Unsupported(format!(
            "degree {} needs the explicit filtration",
            dims.last().unwrap()
        )));
    }
    let n = w.len();
    if n >= 1 << VERTEX_BITS {
        return Err(RtdError::Input(format!("{n} vertices is too many")));
    }
    if max_value < 0.0 || n == 0 {
        return Ok((Filtration::default(), Barcode::default()));
    }
    let ex: Vec<bool> = (0..n as u32).map(|v| excluded.is_some_and(|f| f(v))).collect();
    let admissible = |v: f64| v.is_finite() && v <= max_value;

    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let v = w.get(a, b);
            if admissible(v) && !(ex[a] && ex[b]) {
                edges.push(Edge {
                    a: a as u32,
                    b: b as u32,
                    value: v,
                });
            }
        }
    }
    edges.sort_unstable_by(|x, y| x.value.total_cmp(&y.value).then(x.a.cmp(&y.a)).then(x.b.cmp(&y.b)));

    // Degree 0: elder rule, with every excluded vertex glued to a root older
    // than all vertices.
    let root = n;
    let mut parent: Vec<usize> = (0..=n).collect();
    // oldest vertex of each component, or the root
    let oldest: Vec<usize> = (0..=n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (v, _) in ex.iter().enumerate().filter(|(_, &e)| e) {
        let r = find(&mut parent, v);
        parent[r] = root;
    }
    let mut h0_pairs: Vec<(u32, usize)> = Vec::new();
    let mut positive = vec![false; edges.len()];
    for (id, e) in edges.iter().enumerate() {
        let (ra, rb) = (find(&mut parent, e.a as usize), find(&mut parent, e.b as usize));
        if ra == rb {
            positive[id] = true;
            continue;
        }
        let (oa, ob) = (oldest[ra], oldest[rb]);
        // the root compares as the oldest vertex
        let a_elder = oa == root || (ob != root && oa < ob);
        let (keep, die) = if a_elder { (ra, rb) } else { (rb, ra) };
        h0_pairs.push((oldest[die] as u32, id));
        parent[die] = keep;
    }
    let unpaired_vertices: Vec<u32> = {
        let mut dead = vec![false; n];
        for &(v, _) in &h0_pairs {
            dead[v as usize] = true;
        }
        (0..n as u32).filter(|&v| !ex[v as usize] && !dead[v as usize]).collect()
    };

    // Degree 1: reduce the coboundaries of the positive edges. A reduced
    // column is kept as the list of edges whose coboundaries sum to it and
    // is only expanded when another column has to add it.
    let rows: Vec<&[f64]> = (0..n).map(|i| w.row(i)).collect();
    let mut h1_pairs: Vec<(usize, u128)> = Vec::new();
    let mut h1_essential: Vec<usize> = Vec::new();
    if dims.contains(&1) {
        let mut pivot_owner: HashMap<u128, u32> = HashMap::new();
        let mut combos: Vec<Vec<u32>> = Vec::new();
        // working column as a lazy min-heap: equal keys cancel in pairs
        // when they reach the top
        let mut col: BinaryHeap<Reverse<u128>> = BinaryHeap::new();
        for id in (0..edges.len()).rev() {
            if !positive[id] {
                continue;
            }
            let Some(first) = first_cofacet(&rows, &edges[id], max_value) else {
                h1_essential.push(id);
                continue;
            };
            if let Entry::Vacant(slot) = pivot_owner.entry(first) {
                slot.insert(combos.len() as u32);
                combos.push(vec![id as u32]);
                h1_pairs.push((id, first));
                continue;
            }
            col.clear();
            cofacets(&rows, &edges[id], max_value, |t| col.push(Reverse(t)));
            let mut combo = vec![id as u32];
            loop {
                let Some(p) = pop_pivot(&mut col) else {
                    h1_essential.push(id);
                    break;
                };
                match pivot_owner.get(&p) {
                    Some(&k) => {
                        // the pivot itself cancels against the added column
                        col.push(Reverse(p));
                        for &f in &combos[k as usize] {
                            cofacets(&rows, &edges[f as usize], max_value, |t| col.push(Reverse(t)));
                        }
                        combo.extend_from_slice(&combos[k as usize]);
                    }
                    None => {
                        // edges added twice cancel
                        combo.sort_unstable();
                        let mut kept: Vec<u32> = Vec::with_capacity(combo.len());
                        for f in combo {
                            if kept.last() == Some(&f) {
                                kept.pop();
                            } else {
                                kept.push(f);
                            }
                        }
                        pivot_owner.insert(p, combos.len() as u32);
                        combos.push(kept);
                        h1_pairs.push((id, p));
                        break;
                    }
                }
            }
        }
    }

    // Assemble the partial filtration and translate ids into it.
    let mut simplices: Vec<FilteredSimplex> = Vec::with_capacity(n + edges.len() + h1_pairs.len());
    simplices.extend((0..n as u32).filter(|&v| !ex[v as usize]).map(|v| FilteredSimplex::new(smallvec![v], 0.0)));
    simplices.extend(edges.iter().map(|e| FilteredSimplex::new(smallvec![e.a, e.b], e.value)));
    let mut deaths: Vec<u128> = h1_pairs.iter().map(|p| p.1).collect();
    deaths.sort_unstable();
    deaths.dedup();
    for &t in &deaths {
        let vs: Vertices = triangle_vertices(t).into_iter().collect();
        let value = vs
            .iter()
            .enumerate()
            .flat_map(|(i, &x)| vs[i + 1..].iter().map(move |&y| (x, y)))
            .map(|(x, y)| w.get(x as usize, y as usize))
            .fold(0.0, f64::max);
        simplices.push(FilteredSimplex::new(vs, value));
    }
    simplices.sort_unstable_by(filtration_order);
    let position: HashMap<&[u32], usize> = simplices.iter().enumerate().map(|(i, s)| (s.vertices(), i)).collect();
    let id_of = |vs: &[u32]| position[vs];

    let mut bars = Vec::new();
    if dims.contains(&0) {
        for &(v, e) in &h0_pairs {
            let e = &edges[e];
            if e.value > 0.0 {
                bars.push(Bar {
                    dim: 0,
                    birth: 0.0,
                    death: e.value,
                    birth_simplex: id_of(&[v]),
                    death_simplex: Some(id_of(&[e.a, e.b])),
                });
            }
        }
        for &v in &unpaired_vertices {
            bars.push(Bar {
                dim: 0,
                birth: 0.0,
                death: f64::INFINITY,
                birth_simplex: id_of(&[v]),
                death_simplex: None,
            });
        }
    }
    if dims.contains(&1) {
        for &(e, t) in &h1_pairs {
            let e = &edges[e];
            let tid = id_of(&triangle_vertices(t));
            let death = simplices[tid].value();
            if death > e.value {
                bars.push(Bar {
                    dim: 1,
                    birth: e.value,
                    death,
                    birth_simplex: id_of(&[e.a, e.b]),
                    death_simplex: Some(tid),
                });
            }
        }
        for &e in &h1_essential {
            let e = &edges[e];
            bars.push(Bar {
                dim: 1,
                birth: e.value,
                death: f64::INFINITY,
                birth_simplex: id_of(&[e.a, e.b]),
                death_simplex: None,
            });
        }
    }
    Ok((Filtration { simplices }, Barcode::new(bars)))
}
