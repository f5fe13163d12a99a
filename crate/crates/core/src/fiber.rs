//! The fiber: cones over the mixed-status ridges of every copy, triangulated
//! into pentachora.

use std::collections::HashMap;

use serde::Serialize;

use crate::complex::PolytopalComplex;
use crate::error::{ComplexError, Error, Result};
use crate::lattice::FaceId;
use crate::polytope::{are_adjacent, enumerate_facets, polytope, SignVector, SignedPermutation, IDEAL_COUNT};
use crate::states::State;
use crate::triangulation::{Triangulation, VertexPerm};

/// Half of a mixed ridge: the tetrahedron spanned by one real vertex of the
/// ridge and its three ideal vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RidgeHalf {
    pub ridge: FaceId,
    pub apex: FaceId,
    /// Ascending vertex ids.
    pub ideal: [FaceId; 3],
}

impl RidgeHalf {
    /// Vertices in label order: apex, then the ideal vertices.
    pub fn vertices(&self) -> [FaceId; 4] {
        [self.apex, self.ideal[0], self.ideal[1], self.ideal[2]]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Sigma3 {
    /// The ridges between facets of opposite status.
    pub ridges: Vec<FaceId>,
    pub halves: Vec<RidgeHalf>,
}

fn is_ideal_vertex(v: FaceId) -> bool {
    (v as usize) < IDEAL_COUNT
}

/// Splits a ridge into its two halves.
fn halves_of(ridge: FaceId) -> Result<[RidgeHalf; 2]> {
    let verts = polytope().lattice().vertices(ridge);
    let ideal: Vec<FaceId> = verts.iter().copied().filter(|&v| is_ideal_vertex(v)).collect();
    let real: Vec<FaceId> = verts.iter().copied().filter(|&v| !is_ideal_vertex(v)).collect();
    if ideal.len() != 3 || real.len() != 2 {
        return Err(Error::Verification(format!(
            "ridge {ridge} is not a bipyramid over three ideal vertices"
        )));
    }
    let mut ideal = [ideal[0], ideal[1], ideal[2]];
    ideal.sort_unstable();
    Ok([0, 1].map(|i| RidgeHalf {
        ridge,
        apex: real[i],
        ideal,
    }))
}

fn mixed_ridges(s: State) -> Vec<FaceId> {
    let p = polytope();
    let facets = enumerate_facets();
    let mut out = Vec::new();
    for &f in &facets {
        for &g in &facets {
            if f < g && are_adjacent(f, g) && s.status(f) != s.status(g) {
                out.push(p.ridge(f, g).expect("adjacent facets meet in a ridge"));
            }
        }
    }
    out.sort_unstable();
    out
}

/// The mixed ridges of a state and their halves; checks that every triangle
/// of a mixed ridge lies in exactly two mixed ridges.
pub fn sigma3(s: State) -> Result<Sigma3> {
    let lat = polytope().lattice();
    let ridges = mixed_ridges(s);
    let mut halves = Vec::new();
    let mut triangle_count: HashMap<FaceId, usize> = HashMap::new();
    for &r in &ridges {
        halves.extend(halves_of(r)?);
        for &t in lat.facets(r) {
            *triangle_count.entry(t).or_default() += 1;
        }
    }
    if let Some((t, n)) = triangle_count.iter().find(|(_, &n)| n != 2) {
        return Err(Error::Verification(format!("triangle {t} lies in {n} mixed ridges")));
    }
    Ok(Sigma3 { ridges, halves })
}

impl Sigma3 {
    /// The closed 3-dimensional triangulation formed by the halves.
    pub fn triangulation(&self) -> Result<Triangulation> {
        let index: HashMap<(FaceId, FaceId), u32> = self
            .halves
            .iter()
            .enumerate()
            .map(|(i, h)| ((h.ridge, h.apex), i as u32))
            .collect();
        let by_ridges = triangle_ridges(&self.ridges);
        let mut t = Triangulation::new(3, self.halves.len())?;
        for (i, h) in self.halves.iter().enumerate() {
            for (f, target, map) in internal_neighbors(h, &by_ridges)? {
                let j = index[&(target.ridge, target.apex)];
                let perm = label_perm(&h.vertices(), &target.vertices(), map)?;
                t.glue(i as u32, f, j, perm)?;
            }
        }
        Ok(t)
    }
}

/// Mixed ridges through each triangle.
fn triangle_ridges(ridges: &[FaceId]) -> HashMap<FaceId, Vec<FaceId>> {
    let lat = polytope().lattice();
    let mut out: HashMap<FaceId, Vec<FaceId>> = HashMap::new();
    for &r in ridges {
        for &t in lat.facets(r) {
            out.entry(t).or_default().push(r);
        }
    }
    out
}

type VertexMap = Box<dyn Fn(FaceId) -> FaceId>;

/// Neighbors of a half inside its copy: across the base triangle (facet 0
/// of the tetrahedron) the other half; across the other triangles the half of
/// the other mixed ridge through that triangle with the same apex.
fn internal_neighbors(h: &RidgeHalf, by_triangle: &HashMap<FaceId, Vec<FaceId>>) -> Result<Vec<(usize, RidgeHalf, VertexMap)>> {
    let lat = polytope().lattice();
    let verts = h.vertices();
    let mut out: Vec<(usize, RidgeHalf, VertexMap)> = Vec::new();
    let [a, b] = halves_of(h.ridge)?;
    let other = if a.apex == h.apex { b } else { a };
    let (apex, other_apex) = (h.apex, other.apex);
    out.push((0, other, Box::new(move |v| if v == apex { other_apex } else { v })));
    for f in 1..4 {
        let mut tri: Vec<FaceId> = verts.iter().enumerate().filter(|&(i, _)| i != f).map(|(_, &v)| v).collect();
        tri.sort_unstable();
        let t = lat
            .find(&tri)
            .ok_or_else(|| Error::Verification(format!("vertices {tri:?} do not span a triangle")))?;
        let rs = &by_triangle[&t];
        let r2 = *rs
            .iter()
            .find(|&&r| r != h.ridge)
            .ok_or_else(|| Error::Verification(format!("triangle {t} lies in one mixed ridge")))?;
        let [c, d] = halves_of(r2)?;
        let target = if c.apex == h.apex { c } else { d };
        let lost = verts[f];
        let gained = *target
            .ideal
            .iter()
            .find(|v| !tri.contains(v))
            .expect("the other ridge has one more ideal vertex");
        out.push((f, target, Box::new(move |v| if v == lost { gained } else { v })));
    }
    Ok(out)
}

/// The label permutation induced by a vertex map between two labeled simplices.
fn label_perm(src: &[FaceId], dst: &[FaceId], map: impl Fn(FaceId) -> FaceId) -> Result<VertexPerm> {
    let images: Option<Vec<u8>> = src
        .iter()
        .map(|&v| dst.iter().position(|&w| w == map(v)).map(|i| i as u8))
        .collect();
    images
        .and_then(|im| VertexPerm::from_images(&im))
        .ok_or_else(|| Error::Verification("vertex map does not match the target simplex".into()))
}

/// One pentachoron of the fiber: the cone from the center of `copy` over a
/// ridge half. Labels: 0 the center, 1 the apex, 2..4 the ideal vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FiberPiece {
    pub copy: u32,
    pub half: RidgeHalf,
}

impl FiberPiece {
    /// Labels whose vertices are ideal.
    pub const IDEAL_LABELS: [usize; 3] = [2, 3, 4];
}

#[derive(Clone, Debug)]
pub struct Fiber {
    pub triangulation: Triangulation,
    pub pieces: Vec<FiberPiece>,
}

impl Fiber {
    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }
}

/// The copy across ridge `F ∩ G` of `copy`, reached through `F` and then
/// through the image of `G`, with the composite isometry.
fn across_ridge(x: &PolytopalComplex, copy: u32, f: SignVector, g: SignVector) -> (u32, SignedPermutation) {
    let first = x.gluing(copy, f);
    let g1 = first.map.apply_facet(g);
    let second = x.gluing(first.copy, g1);
    (second.copy, second.map.compose(&first.map))
}

/// Cones over the mixed ridges of every copy, glued inside copies along the
/// cones over shared triangles and across each mixed ridge to the diagonal
/// copy of its ridge cycle.
pub fn build_fiber(x: &PolytopalComplex) -> Result<Fiber> {
    let p = polytope();
    let states = x
        .states()
        .ok_or_else(|| Error::Verification("the complex carries no states".into()))?;
    let mut pieces = Vec::new();
    let mut index: HashMap<(u32, FaceId, FaceId), u32> = HashMap::new();
    let mut sigmas = Vec::with_capacity(states.len());
    for (a, &s) in states.iter().enumerate() {
        let sigma = sigma3(s)?;
        for &h in &sigma.halves {
            index.insert((a as u32, h.ridge, h.apex), pieces.len() as u32);
            pieces.push(FiberPiece { copy: a as u32, half: h });
        }
        sigmas.push(sigma);
    }
    let mut tri = Triangulation::new(4, pieces.len())?;
    let cone = |h: &RidgeHalf| -> [FaceId; 5] {
        let v = h.vertices();
        [FaceId::MAX, v[0], v[1], v[2], v[3]]
    };
    for (a, sigma) in sigmas.iter().enumerate() {
        let a = a as u32;
        let by_triangle = triangle_ridges(&sigma.ridges);
        for h in &sigma.halves {
            let i = index[&(a, h.ridge, h.apex)];
            for (f, target, map) in internal_neighbors(h, &by_triangle)? {
                let j = index[&(a, target.ridge, target.apex)];
                let perm = label_perm(&cone(h), &cone(&target), |v| if v == FaceId::MAX { v } else { map(v) })?;
                tri.glue(i, f + 1, j, perm)?;
            }
            let mask = p.face_facet_mask(h.ridge);
            let [f, g] = [0, 1].map(|k| {
                let bits: Vec<usize> = (0..16).filter(|b| mask & (1 << b) != 0).collect();
                SignVector::from_index(bits[k])
            });
            let (c, map) = across_ridge(x, a, f, g);
            let (c2, map2) = across_ridge(x, a, g, f);
            if c != c2 || h.vertices().iter().any(|&v| map_vertex(&map, v) != map_vertex(&map2, v)) {
                return Err(Error::Verification(format!(
                    "the two routes around ridge {} of copy {} disagree",
                    h.ridge, a
                )));
            }
            let image_ridge = p.face_map(&map).apply(h.ridge);
            let image_apex = map_vertex(&map, h.apex);
            let j = *index.get(&(c, image_ridge, image_apex)).ok_or({
                Error::Complex(ComplexError::NotPseudomanifold {
                    simplex: i as usize,
                    facet: 0,
                    count: 1,
                })
            })?;
            let target = pieces[j as usize].half;
            let perm = label_perm(&cone(h), &cone(&target), |v| if v == FaceId::MAX { v } else { map_vertex(&map, v) })?;
            tri.glue(i, 0, j, perm)?;
        }
    }
    tri.check_closed_pseudomanifold()?;
    Ok(Fiber {
        triangulation: tri,
        pieces,
    })
}

fn map_vertex(g: &SignedPermutation, v: FaceId) -> FaceId {
    let p = polytope();
    g.apply_vertex(p.vertices()[v as usize]).index() as FaceId
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::find_standard_coloring;
    use crate::complex::assemble_m5_with_states;
    use crate::states::{bad_ridges, enumerate_balanced, initial_state, MoveSet};
    use crate::triangulation::EulerMode;

    #[test]
    fn sigma3_counts() {
        let c = find_standard_coloring().unwrap();
        let bad = bad_ridges(&c, &MoveSet::canonical());
        for s in enumerate_balanced(&c).unwrap() {
            let sigma = sigma3(s).unwrap();
            assert_eq!(sigma.ridges.len(), 36);
            assert_eq!(sigma.halves.len(), 72);
            assert!(sigma.ridges.iter().all(|r| !bad.contains(r)));
            let t = sigma.triangulation().unwrap();
            t.check_closed_pseudomanifold().unwrap();
            assert_eq!(t.euler_characteristic(EulerMode::Compactified).unwrap(), 0);
            let h = t.homology(false).unwrap();
            assert_eq!(h.iter().map(|g| g.rank).collect::<Vec<_>>(), vec![1, 0, 0, 1]);
            assert!(h.iter().all(|g| g.torsion.is_empty()));
        }
    }

    #[test]
    #[ignore = "long: builds the 18432-pentachoron fiber"]
    fn m5_fiber_size() {
        let c = find_standard_coloring().unwrap();
        let s0 = initial_state(&c).unwrap();
        let m = assemble_m5_with_states(&c, s0, &MoveSet::canonical());
        let f = build_fiber(&m).unwrap();
        assert_eq!(f.len(), 18432);
        assert_eq!(f.triangulation.component_count(), 2);
    }
}
