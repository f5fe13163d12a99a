//! Chain complexes of cell complexes: the order complex of the face-class
//! poset (a barycentric subdivision) and the cellular complex.

use std::collections::HashMap;

use rayon::prelude::*;

use super::matrix::SparseIntMatrix;
use crate::cells::{CellComplex, FaceClasses};
use crate::error::ComplexError;
use crate::lattice::FaceId;

/// Boundary maps `∂_k : C_k → C_{k-1}` for `k = 1..=n`.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    dims: Vec<usize>,
    boundaries: Vec<SparseIntMatrix>,
}

impl ChainComplex {
    /// `boundaries[k-1]` is `∂_k`, a `dims[k-1] × dims[k]` matrix.
    pub fn new(dims: Vec<usize>, boundaries: Vec<SparseIntMatrix>) -> Result<Self, ComplexError> {
        if boundaries.len() + 1 != dims.len() && !(dims.is_empty() && boundaries.is_empty()) {
            return Err(ComplexError::Invalid("one boundary map per positive degree".into()));
        }
        for (k, b) in boundaries.iter().enumerate() {
            if b.rows() != dims[k] || b.cols() != dims[k + 1] {
                return Err(ComplexError::Invalid(format!(
                    "boundary {} has shape {}x{}, expected {}x{}",
                    k + 1,
                    b.rows(),
                    b.cols(),
                    dims[k],
                    dims[k + 1]
                )));
            }
        }
        Ok(ChainComplex { dims, boundaries })
    }

    pub fn top_degree(&self) -> usize {
        self.dims.len().saturating_sub(1)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, k: usize) -> usize {
        self.dims.get(k).copied().unwrap_or(0)
    }

    /// `∂_k`, or `None` outside `1..=n`.
    pub fn boundary(&self, k: usize) -> Option<&SparseIntMatrix> {
        if k == 0 {
            None
        } else {
            self.boundaries.get(k - 1)
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims
            .iter()
            .enumerate()
            .map(|(k, &d)| if k % 2 == 0 { d as i64 } else { -(d as i64) })
            .sum()
    }

    /// Checks `∂_{k-1} ∘ ∂_k = 0` for every `k`.
    pub fn verify(&self) -> Result<(), ComplexError> {
        let bad = (1..self.boundaries.len())
            .into_par_iter()
            .find_any(|&k| !self.boundaries[k - 1].mul(&self.boundaries[k]).is_zero());
        match bad {
            Some(k) => Err(ComplexError::Invalid(format!(
                "boundary of boundary is nonzero in degree {}",
                k + 1
            ))),
            None => Ok(()),
        }
    }
}

/// Order complex of the face-class poset.
///
/// A `d`-simplex is a chain `g0 < … < gd` of faces; chains are keyed by the
/// class of their top face and expressed in the coordinates of that class's
/// representative. Chains whose bottom face is a rank-0 class with
/// `drop_vertex(class)` are removed, which deletes the open stars of those
/// vertices.
pub fn barycentric_complex(
    cx: &CellComplex,
    classes: &FaceClasses,
    drop_vertex: impl Fn(u32) -> bool + Sync,
) -> Result<ChainComplex, ComplexError> {
    let top = cx.dim();
    // index[d]: chain key -> simplex index
    let mut index: Vec<HashMap<Vec<u32>, u32>> = vec![HashMap::new(); top + 1];
    let mut chains_by_dim: Vec<Vec<(u32, Vec<FaceId>)>> = vec![Vec::new(); top + 1];
    for class in 0..classes.len() as u32 {
        let rep = classes.rep(class);
        let model = cx.model(rep.cell);
        let mut below = model.down_closure(rep.face);
        below.retain(|&g| g != rep.face);
        let mut chain = Vec::new();
        enumerate_chains(model, rep.face, &below, &mut chain, &mut |c| {
            // c lists faces top-down below the top face
            let bottom = c.last().copied().unwrap_or(rep.face);
            if model.rank(bottom) == 0 && drop_vertex(classes.class_of(rep.cell, bottom)) {
                return;
            }
            let mut key = Vec::with_capacity(c.len() + 1);
            key.push(class);
            key.extend(c.iter().rev().copied());
            let d = c.len();
            let idx = index[d].len() as u32;
            index[d].insert(key.clone(), idx);
            chains_by_dim[d].push((class, key[1..].to_vec()));
        });
    }
    let dims: Vec<usize> = chains_by_dim.iter().map(|v| v.len()).collect();
    let boundaries: Vec<SparseIntMatrix> = (1..=top)
        .into_par_iter()
        .map(|d| {
            let mut trip = Vec::new();
            for (j, (class, lower)) in chains_by_dim[d].iter().enumerate() {
                let rep = classes.rep(*class);
                // omit one of the lower faces: same top class
                for i in 0..lower.len() {
                    let mut key = Vec::with_capacity(lower.len());
                    key.push(*class);
                    key.extend(lower.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, &g)| g));
                    if let Some(&row) = index[d - 1].get(&key) {
                        trip.push((row as usize, j, if i % 2 == 0 { 1 } else { -1 }));
                    }
                }
                // omit the top face: re-key by the class of the next face down
                let new_top = *lower.last().expect("positive-dimensional chain");
                let new_class = classes.class_of(rep.cell, new_top);
                let new_rep = classes.rep(new_class);
                let key = transport_chain(cx, classes, rep.cell, new_top, &lower[..lower.len() - 1], new_class, new_rep);
                if let Some(&row) = index[d - 1].get(&key) {
                    trip.push((row as usize, j, if d % 2 == 0 { 1 } else { -1 }));
                }
            }
            SparseIntMatrix::from_triplets(dims[d - 1], dims[d], trip)
        })
        .collect();
    ChainComplex::new(dims, boundaries)
}

fn transport_chain(
    cx: &CellComplex,
    classes: &FaceClasses,
    cell: u32,
    top: FaceId,
    lower: &[FaceId],
    new_class: u32,
    new_rep: crate::cells::CellFace,
) -> Vec<u32> {
    let member_vertices = classes.vertex_map(cell, top);
    let rep_model = cx.model(new_rep.cell);
    let rep_vertices = rep_model.vertices(new_rep.face);
    let member_model = cx.model(cell);
    let mut key = Vec::with_capacity(lower.len() + 1);
    key.push(new_class);
    for &g in lower {
        let mut vs: Vec<FaceId> = member_model
            .vertices(g)
            .iter()
            .map(|v| {
                let pos = member_vertices
                    .iter()
                    .position(|x| x == v)
                    .expect("face vertices lie in the top face");
                rep_vertices[pos]
            })
            .collect();
        vs.sort_unstable();
        key.push(rep_model.find(&vs).expect("transported face exists"));
    }
    key
}

fn enumerate_chains(
    model: &crate::lattice::Lattice,
    top: FaceId,
    below: &[FaceId],
    chain: &mut Vec<FaceId>,
    emit: &mut impl FnMut(&[FaceId]),
) {
    emit(chain);
    let current = chain.last().copied().unwrap_or(top);
    for &g in below {
        if g != current && model.rank(g) < model.rank(current) && model.le(g, current) {
            chain.push(g);
            enumerate_chains(model, top, below, chain, emit);
            chain.pop();
        }
    }
}

/// Cellular chain complex on the classes accepted by `keep`, which must be
/// closed under taking faces.
pub fn cellular_complex(
    cx: &CellComplex,
    classes: &FaceClasses,
    keep: impl Fn(u32) -> bool,
) -> Result<ChainComplex, ComplexError> {
    let kept: Vec<u32> = (0..classes.len() as u32).filter(|&c| keep(c)).collect();
    let top = kept.iter().map(|&c| classes.rank(c)).max().unwrap_or(0);
    let bottom = kept.iter().map(|&c| classes.rank(c)).min().unwrap_or(0);
    let mut pos = HashMap::new();
    let mut dims = vec![0usize; top - bottom + 1];
    for &c in &kept {
        let d = classes.rank(c) - bottom;
        pos.insert(c, dims[d]);
        dims[d] += 1;
    }
    let mut trip: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); top - bottom];
    for &c in &kept {
        let d = classes.rank(c) - bottom;
        if d == 0 {
            continue;
        }
        let rep = classes.rep(c);
        let model = cx.model(rep.cell);
        for (&h, &inc) in model.facets(rep.face).iter().zip(model.incidences(rep.face)) {
            let hc = classes.class_of(rep.cell, h);
            let row = *pos.get(&hc).ok_or_else(|| {
                ComplexError::Invalid("kept classes are not closed under faces".into())
            })?;
            let s = i64::from(inc) * i64::from(classes.sign(rep.cell, h));
            trip[d - 1].push((row, pos[&c], s));
        }
    }
    let boundaries = trip
        .into_iter()
        .enumerate()
        .map(|(k, t)| SparseIntMatrix::from_triplets(dims[k], dims[k + 1], t))
        .collect();
    ChainComplex::new(dims, boundaries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::homology;
    use crate::lattice::Lattice;
    use std::sync::Arc;

    fn single_simplex(d: usize) -> (CellComplex, FaceClasses) {
        let mut cx = CellComplex::new(vec![Arc::new(Lattice::simplex(d))]);
        cx.add_cell(0);
        let fc = FaceClasses::compute(&cx).unwrap();
        (cx, fc)
    }

    #[test]
    fn simplex_is_acyclic_both_routes() {
        let (cx, fc) = single_simplex(3);
        let bary = barycentric_complex(&cx, &fc, |_| false).unwrap();
        bary.verify().unwrap();
        assert_eq!(bary.euler_characteristic(), 1);
        let cell = cellular_complex(&cx, &fc, |_| true).unwrap();
        cell.verify().unwrap();
        for hs in [homology(&bary), homology(&cell)] {
            assert_eq!(hs[0].rank, 1);
            assert!(hs[1..].iter().all(|h| h.is_trivial()));
        }
    }

    #[test]
    fn boundary_of_simplex_is_a_sphere() {
        let (cx, fc) = single_simplex(3);
        let top = cx.model(0).top();
        let c = cellular_complex(&cx, &fc, |k| fc.rep(k).face != top).unwrap();
        let h = homology(&c);
        assert_eq!(h[0].rank, 1);
        assert!(h[1].is_trivial());
        assert_eq!(h[2].rank, 1);
    }

    #[test]
    fn dropping_a_vertex_star() {
        // a triangle minus the open star of one vertex is contractible
        let (cx, fc) = single_simplex(2);
        let bary = barycentric_complex(&cx, &fc, |c| fc.rep(c).face == 0).unwrap();
        bary.verify().unwrap();
        assert_eq!(bary.euler_characteristic(), 1);
    }
}
