//! Complexes made of labeled copies of the polytope glued along facets.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use serde_json::{json, Value};

use crate::cells::{CellComplex, FaceClasses, Glue};
use crate::coloring::{Color, Coloring};
use crate::error::{ComplexError, Error, Result};
use crate::homology::{barycentric_complex, cellular_complex, ChainComplex};
use crate::lattice::{FaceId, FaceMap, Lattice, TruncatedFace};
use crate::polytope::{enumerate_facets, polytope, PolytopeVertex, SignVector, SignedPermutation, FACET_COUNT};
use crate::states::{assign_states, CopyLabel, MoveSet, State};

/// Where facet `F` of a copy is glued: facet `facet` of copy `copy`, by an
/// isometry `map` with `map(F) = facet`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gluing {
    pub copy: u32,
    pub facet: SignVector,
    pub map: SignedPermutation,
}

/// Which lattice each copy is modeled on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    /// The polytope with its ideal vertices.
    Ideal,
    /// The polytope with every ideal vertex cut off.
    Truncated,
}

#[derive(Clone, Debug)]
pub struct PolytopalComplex {
    labels: Vec<String>,
    gluing: Vec<[Gluing; FACET_COUNT]>,
    states: Option<Vec<State>>,
}

impl PolytopalComplex {
    pub fn new(
        labels: Vec<String>,
        gluing: Vec<[Gluing; FACET_COUNT]>,
        states: Option<Vec<State>>,
    ) -> Result<Self> {
        if labels.len() != gluing.len() || states.as_ref().is_some_and(|s| s.len() != labels.len()) {
            return Err(ComplexError::Invalid("labels, gluings and states disagree in length".into()).into());
        }
        let cx = PolytopalComplex {
            labels,
            gluing,
            states,
        };
        cx.validate()?;
        Ok(cx)
    }

    /// Checks that the gluing is a fixed-point free involution compatible with its maps.
    pub fn validate(&self) -> Result<(), ComplexError> {
        for a in 0..self.copy_count() as u32 {
            for f in enumerate_facets() {
                let g = self.gluing(a, f);
                let slot = f.index();
                if g.copy as usize >= self.copy_count() || g.map.apply_facet(f) != g.facet {
                    return Err(ComplexError::NotInvolutive { cell: a as usize, slot });
                }
                if g.copy == a && g.facet == f {
                    return Err(ComplexError::NotInvolutive { cell: a as usize, slot });
                }
                let back = self.gluing(g.copy, g.facet);
                if back.copy != a || back.facet != f || back.map != g.map.inverse() {
                    return Err(ComplexError::NotInvolutive { cell: a as usize, slot });
                }
            }
        }
        Ok(())
    }

    pub fn copy_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, copy: u32) -> &str {
        &self.labels[copy as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn gluing(&self, copy: u32, f: SignVector) -> Gluing {
        self.gluing[copy as usize][f.index()]
    }

    pub fn state(&self, copy: u32) -> Option<State> {
        self.states.as_ref().map(|s| s[copy as usize])
    }

    pub fn states(&self) -> Option<&[State]> {
        self.states.as_deref()
    }

    pub fn with_states(mut self, states: Vec<State>) -> Result<Self> {
        if states.len() != self.copy_count() {
            return Err(ComplexError::Invalid("one state per copy".into()).into());
        }
        self.states = Some(states);
        Ok(self)
    }

    pub fn is_identity_glued(&self) -> bool {
        self.gluing
            .iter()
            .all(|row| row.iter().all(|g| g.map.is_identity()))
    }

    /// Component label per copy.
    pub fn components(&self) -> Vec<u32> {
        let n = self.copy_count();
        let mut label = vec![u32::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if label[s] != u32::MAX {
                continue;
            }
            label[s] = next;
            let mut q = vec![s as u32];
            while let Some(a) = q.pop() {
                for g in &self.gluing[a as usize] {
                    if label[g.copy as usize] == u32::MAX {
                        label[g.copy as usize] = next;
                        q.push(g.copy);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn component_count(&self) -> usize {
        self.components().iter().max().map_or(0, |&m| m as usize + 1)
    }

    /// The underlying cell complex; cell `a` is copy `a`.
    pub fn cell_complex(&self, model: Model) -> CellComplex {
        let p = polytope();
        let (lattice, truncation) = match model {
            Model::Ideal => (p.lattice().clone(), None),
            Model::Truncated => (p.truncated().lattice.clone(), Some(p.truncated())),
        };
        let lattice = Arc::new(lattice);
        let mut cache: HashMap<SignedPermutation, Arc<FaceMap>> = HashMap::new();
        let mut face_map = |g: &SignedPermutation| -> Arc<FaceMap> {
            cache
                .entry(*g)
                .or_insert_with(|| {
                    let fm = p.face_map(g);
                    Arc::new(match truncation {
                        None => fm,
                        Some(t) => FaceMap::new(&t.lattice, &t.lattice, t.induced_map(t, &fm.map))
                            .expect("isometries preserve the truncated lattice"),
                    })
                })
                .clone()
        };
        let slot_of = |f: SignVector| -> u32 {
            let g = p.facet_face(f);
            let g = match truncation {
                None => g,
                Some(t) => t.from_original[g as usize].expect("facets survive truncation"),
            };
            lattice.slot_of_facet(g).expect("facet is a slot")
        };
        let mut cx = CellComplex::new(vec![lattice.clone()]);
        for _ in 0..self.copy_count() {
            cx.add_cell(0);
        }
        for a in 0..self.copy_count() as u32 {
            for f in enumerate_facets() {
                let g = self.gluing(a, f);
                cx.set_glue(
                    a,
                    slot_of(f),
                    Glue {
                        cell: g.copy,
                        slot: slot_of(g.facet),
                        map: face_map(&g.map),
                    },
                );
            }
        }
        cx
    }

    pub fn face_classes(&self, model: Model) -> Result<(CellComplex, FaceClasses), ComplexError> {
        let cx = self.cell_complex(model);
        let fc = FaceClasses::compute(&cx)?;
        Ok((cx, fc))
    }

    /// Euler characteristic of the truncated complex.
    pub fn truncated_euler_characteristic(&self) -> Result<i64, ComplexError> {
        let (_, fc) = self.face_classes(Model::Truncated)?;
        Ok(fc.euler_characteristic(|_| false))
    }

    /// Cellular chains of the truncated complex.
    pub fn cellular_chains(&self) -> Result<ChainComplex, ComplexError> {
        let (cx, fc) = self.face_classes(Model::Truncated)?;
        cellular_complex(&cx, &fc, |_| true)
    }

    /// Simplicial chains of the barycentric subdivision with the open stars of
    /// the ideal vertices removed; a deformation retract of the truncated
    /// complex.
    pub fn barycentric_chains(&self) -> Result<ChainComplex, ComplexError> {
        let p = polytope();
        let (cx, fc) = self.face_classes(Model::Ideal)?;
        let ideal: Vec<bool> = (0..fc.len() as u32)
            .map(|c| fc.rank(c) == 0 && p.is_ideal_face(fc.rep(c).face))
            .collect();
        barycentric_complex(&cx, &fc, |c| ideal[c as usize])
    }

    /// Cellular chains of each cusp section, the boundary component of the
    /// truncated complex at an ideal vertex class; keyed by that class in the
    /// ideal model.
    pub fn cusp_section_chains(&self) -> Result<Vec<(u32, ChainComplex)>, ComplexError> {
        let t = polytope().truncated();
        let (_, ideal) = self.face_classes(Model::Ideal)?;
        let (cx, fc) = self.face_classes(Model::Truncated)?;
        let cusp_of: Vec<Option<u32>> = (0..fc.len() as u32)
            .map(|c| {
                let rep = fc.rep(c);
                match t.origin[rep.face as usize] {
                    TruncatedFace::Cut { vertex, .. } => Some(ideal.class_of(rep.cell, vertex)),
                    _ => None,
                }
            })
            .collect();
        let mut cusps: Vec<u32> = cusp_of.iter().flatten().copied().collect();
        cusps.sort_unstable();
        cusps.dedup();
        cusps
            .into_iter()
            .map(|k| Ok((k, cellular_complex(&cx, &fc, |c| cusp_of[c as usize] == Some(k))?)))
            .collect()
    }

    pub fn to_json(&self, include_states: bool) -> Value {
        let mut rows = Vec::new();
        for a in 0..self.copy_count() as u32 {
            for f in enumerate_facets() {
                let g = self.gluing(a, f);
                rows.push(json!({
                    "copy": self.label(a),
                    "facet": f.to_string(),
                    "to_copy": self.label(g.copy),
                    "to_facet": g.facet.to_string(),
                    "perm": g.map.axis_string(),
                }));
            }
        }
        let mut out = json!({
            "copies": self.labels,
            "gluing": rows,
        });
        if include_states {
            if let Some(states) = &self.states {
                out["states"] = json!(states.iter().map(|s| s.to_string()).collect::<Vec<_>>());
            }
        }
        out
    }
}

/// 256 copies labeled by `Z_2^8`; facet `F` of copy `v` is glued to facet `F`
/// of copy `v + e_c` by the identity, `c` the color of `F`.
pub fn assemble_m5(coloring: &Coloring) -> PolytopalComplex {
    let labels = CopyLabel::all().map(|v| v.to_string()).collect();
    let gluing = CopyLabel::all()
        .map(|v| {
            std::array::from_fn(|i| {
                let f = SignVector::from_index(i);
                Gluing {
                    copy: v.step(coloring.color(f)).0 as u32,
                    facet: f,
                    map: SignedPermutation::identity(),
                }
            })
        })
        .collect();
    PolytopalComplex::new(labels, gluing, None).expect("the color assembly is a valid gluing")
}

/// The assembly with `s_v` assigned to every copy.
pub fn assemble_m5_with_states(coloring: &Coloring, s0: State, moves: &MoveSet) -> PolytopalComplex {
    let states = CopyLabel::all()
        .map(|v| assign_states(coloring, s0, moves, v))
        .collect();
    assemble_m5(coloring)
        .with_states(states)
        .expect("one state per copy")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum CuspKind {
    Large,
    Small,
    Other(usize),
}

#[derive(Clone, Debug)]
pub struct CuspClass {
    /// Face class of the ideal vertex in the ideal model.
    pub class: u32,
    /// Ideal vertex of the representative copy.
    pub vertex: PolytopeVertex,
    /// Sorted copies containing a vertex of the class.
    pub copies: Vec<u32>,
    /// `(copy, ideal vertex)` pairs, one per cube of the section.
    pub cubes: Vec<(u32, PolytopeVertex)>,
    pub kind: CuspKind,
}

impl CuspClass {
    pub fn cube_count(&self) -> usize {
        self.cubes.len()
    }
}

/// Ideal-vertex classes, sorted by class id.
pub fn cusp_census(x: &PolytopalComplex) -> Result<Vec<CuspClass>, ComplexError> {
    let p = polytope();
    let (_, fc) = x.face_classes(Model::Ideal)?;
    let members = fc.all_members();
    let mut out = Vec::new();
    for class in fc.classes_of_rank(0) {
        let rep = fc.rep(class);
        if !p.is_ideal_face(rep.face) {
            continue;
        }
        let cubes: Vec<(u32, PolytopeVertex)> = members[class as usize]
            .iter()
            .map(|m| (m.cell, p.vertices()[m.face as usize]))
            .collect();
        let mut copies: Vec<u32> = cubes.iter().map(|c| c.0).collect();
        copies.sort_unstable();
        copies.dedup();
        let kind = match cubes.len() {
            256 => CuspKind::Large,
            16 => CuspKind::Small,
            n => CuspKind::Other(n),
        };
        out.push(CuspClass {
            class,
            vertex: p.vertices()[rep.face as usize],
            copies,
            cubes,
            kind,
        });
    }
    Ok(out)
}

/// The section of a cusp is a connected cube complex in which each cube has
/// all eight facets matched, and matched facets pair up.
pub fn section_is_closed(x: &PolytopalComplex, cusp: &CuspClass) -> bool {
    let index: HashMap<(u32, usize), usize> = cusp
        .cubes
        .iter()
        .enumerate()
        .map(|(i, &(a, v))| ((a, v.index()), i))
        .collect();
    let mut seen = vec![false; cusp.cubes.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        let (a, v) = cusp.cubes[i];
        for f in enumerate_facets().into_iter().filter(|f| v.is_incident(f)) {
            let g = x.gluing(a, f);
            let w = g.map.apply_vertex(v);
            let Some(&j) = index.get(&(g.copy, w.index())) else {
                return false;
            };
            let back = x.gluing(g.copy, g.facet);
            if back.copy != a || back.map.apply_vertex(w) != v {
                return false;
            }
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// The complex lying over a face `F` of the polytope: copies of `F`, one per
/// class of `(copy, F)`, glued across the facets of `F`.
#[derive(Clone, Debug)]
pub struct FaceQuotient {
    pub face: FaceId,
    pub model: Arc<Lattice>,
    /// Model vertices that are ideal vertices of the polytope.
    pub ideal: Vec<FaceId>,
    pub cells: CellComplex,
    /// A copy of the original complex representing each cell.
    pub representatives: Vec<u32>,
    /// Colors absent from the facets containing or cutting `F`.
    pub free_colors: Vec<Color>,
}

impl FaceQuotient {
    pub fn copy_count(&self) -> usize {
        self.cells.cell_count()
    }

    pub fn component_count(&self) -> usize {
        self.cells.components().iter().max().map_or(0, |&m| m as usize + 1)
    }

    pub fn cusp_count(&self) -> Result<usize, ComplexError> {
        let fc = FaceClasses::compute(&self.cells)?;
        Ok(fc
            .classes_of_rank(0)
            .filter(|&c| self.ideal.contains(&fc.rep(c).face))
            .count())
    }
}

/// Face lattice of the down-closure of `g`, with vertices renumbered in order,
/// and the map from its faces back to the polytope.
fn face_lattice(g: FaceId) -> Result<(Lattice, Vec<FaceId>), ComplexError> {
    let lat = polytope().lattice();
    let below = lat.down_closure(g);
    let verts: Vec<FaceId> = lat.vertices(g).to_vec();
    let faces: Vec<(u8, Vec<u32>)> = below
        .iter()
        .map(|&h| {
            (
                lat.rank(h) as u8,
                lat.vertices(h)
                    .iter()
                    .map(|v| verts.binary_search(v).expect("vertex of the face") as u32)
                    .collect(),
            )
        })
        .collect();
    let sub = Lattice::from_faces(faces)?;
    let back = (0..sub.len() as FaceId)
        .map(|h| {
            let vs: Vec<u32> = sub.vertices(h).iter().map(|&v| verts[v as usize]).collect();
            lat.find(&vs).expect("face of the polytope")
        })
        .collect();
    Ok((sub, back))
}

pub fn face_quotient(x: &PolytopalComplex, coloring: &Coloring, g: FaceId) -> Result<FaceQuotient> {
    let p = polytope();
    let rank = p.lattice().rank(g);
    if !(1..=4).contains(&rank) {
        return Err(Error::BadFaceRank(rank));
    }
    if !x.is_identity_glued() {
        return Err(Error::NotProjecting);
    }
    let containing = p.face_facet_mask(g);
    let (model, back) = face_lattice(g)?;
    let model = Arc::new(model);
    // each real facet of the face is cut by a unique facet of the polytope;
    // ideal endpoints of edges stay unglued
    let mut cutting: Vec<(u32, SignVector)> = Vec::new();
    for (slot, &h) in model.top_facets().iter().enumerate() {
        if p.is_ideal_face(back[h as usize]) {
            continue;
        }
        let mask = p.face_facet_mask(back[h as usize]) & !containing;
        if mask.count_ones() != 1 {
            return Err(Error::Verification(format!(
                "facet {slot} of the face is not cut by a single facet"
            )));
        }
        cutting.push((slot as u32, SignVector::from_index(mask.trailing_zeros() as usize)));
    }
    // cells: classes of copies modulo the colors of the facets containing the face
    let mut cell_of = vec![u32::MAX; x.copy_count()];
    let mut representatives = Vec::new();
    for a in 0..x.copy_count() as u32 {
        if cell_of[a as usize] != u32::MAX {
            continue;
        }
        let id = representatives.len() as u32;
        representatives.push(a);
        let mut stack = vec![a];
        cell_of[a as usize] = id;
        while let Some(b) = stack.pop() {
            for f in enumerate_facets().into_iter().filter(|f| containing & (1 << f.index()) != 0) {
                let c = x.gluing(b, f).copy;
                if cell_of[c as usize] == u32::MAX {
                    cell_of[c as usize] = id;
                    stack.push(c);
                }
            }
        }
    }
    let identity = Arc::new(FaceMap::identity(&model));
    let mut cells = CellComplex::new(vec![model.clone()]);
    for _ in &representatives {
        cells.add_cell(0);
    }
    for (cell, &a) in representatives.iter().enumerate() {
        for &(slot, h) in &cutting {
            let target = cell_of[x.gluing(a, h).copy as usize];
            cells.set_glue(
                cell as u32,
                slot,
                Glue {
                    cell: target,
                    slot,
                    map: identity.clone(),
                },
            );
        }
    }
    let used: u8 = enumerate_facets()
        .into_iter()
        .filter(|f| containing & (1 << f.index()) != 0 || cutting.iter().any(|c| c.1 == *f))
        .fold(0, |m, f| m | (1 << coloring.color(f).index()));
    let free_colors = Color::all().filter(|c| used & (1 << c.index()) == 0).collect();
    let ideal = model
        .faces_of_rank(0)
        .iter()
        .copied()
        .filter(|&v| p.is_ideal_face(back[v as usize]))
        .collect();
    Ok(FaceQuotient {
        face: g,
        model,
        ideal,
        cells,
        representatives,
        free_colors,
    })
}

/// Classes of truncated faces that lie on a cusp section.
pub fn is_cut_class(fc: &FaceClasses, class: u32) -> bool {
    let rep = fc.rep(class);
    matches!(
        polytope().truncated().origin[rep.face as usize],
        TruncatedFace::Cut { .. }
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::find_standard_coloring;
    use crate::states::{bad_ridges, MoveSet};

    #[test]
    fn m5_assembly_and_census() {
        let c = find_standard_coloring().unwrap();
        let m = assemble_m5(&c);
        assert_eq!(m.copy_count(), 256);
        assert_eq!(m.component_count(), 1);
        let census = cusp_census(&m).unwrap();
        assert_eq!(census.len(), 40);
        let large = census.iter().filter(|c| c.kind == CuspKind::Large).count();
        let small = census.iter().filter(|c| c.kind == CuspKind::Small).count();
        assert_eq!((large, small), (8, 32));
        assert!(census.iter().all(|cusp| section_is_closed(&m, cusp)));
    }

    #[test]
    fn ridge_classes_have_four_corners() {
        let c = find_standard_coloring().unwrap();
        let m = assemble_m5(&c);
        let (_, fc) = m.face_classes(Model::Ideal).unwrap();
        assert!(fc.classes_of_rank(3).all(|k| fc.size(k) == 4));
    }

    #[test]
    fn bad_ridge_quotient() {
        let c = find_standard_coloring().unwrap();
        let m = assemble_m5(&c);
        let r = bad_ridges(&c, &MoveSet::canonical())[0];
        let q = face_quotient(&m, &c, r).unwrap();
        assert_eq!(q.copy_count(), 64);
        assert_eq!(q.component_count(), 1);
        assert_eq!(q.cusp_count().unwrap(), 12);
    }

    #[test]
    fn face_quotient_components_count_free_colors() {
        let c = find_standard_coloring().unwrap();
        let m = assemble_m5(&c);
        let lat = polytope().lattice();
        for r in 1..=4 {
            for &g in lat.faces_of_rank(r).iter().take(6) {
                let q = face_quotient(&m, &c, g).unwrap();
                assert_eq!(q.component_count(), 1 << q.free_colors.len());
            }
        }
        assert!(matches!(face_quotient(&m, &c, 0), Err(Error::BadFaceRank(0))));
    }

    #[test]
    fn truncated_m5_has_zero_euler_characteristic() {
        let c = find_standard_coloring().unwrap();
        let m = assemble_m5(&c);
        assert_eq!(m.truncated_euler_characteristic().unwrap(), 0);
    }
}
