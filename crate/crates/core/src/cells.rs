//! Cell complexes assembled from copies of model cells glued along facets,
//! and the classes of faces they identify.

use std::sync::Arc;

use crate::error::ComplexError;
use crate::lattice::{FaceId, FaceMap, Lattice};

/// Identification of a facet slot of one cell with a facet slot of another.
#[derive(Clone, Debug)]
pub struct Glue {
    pub cell: u32,
    pub slot: u32,
    /// Carries the faces of the source facet onto the faces of the target facet.
    pub map: Arc<FaceMap>,
}

#[derive(Clone, Debug)]
pub struct CellComplex {
    models: Vec<Arc<Lattice>>,
    cell_model: Vec<u32>,
    glue: Vec<Vec<Option<Glue>>>,
}

impl CellComplex {
    pub fn new(models: Vec<Arc<Lattice>>) -> Self {
        CellComplex {
            models,
            cell_model: Vec::new(),
            glue: Vec::new(),
        }
    }

    pub fn add_cell(&mut self, model: u32) -> u32 {
        let slots = self.models[model as usize].top_facets().len();
        self.cell_model.push(model);
        self.glue.push(vec![None; slots]);
        (self.cell_model.len() - 1) as u32
    }

    /// Records the gluing in one direction only; call it for both sides.
    pub fn set_glue(&mut self, cell: u32, slot: u32, glue: Glue) {
        self.glue[cell as usize][slot as usize] = Some(glue);
    }

    pub fn cell_count(&self) -> usize {
        self.cell_model.len()
    }

    pub fn model(&self, cell: u32) -> &Lattice {
        &self.models[self.cell_model[cell as usize] as usize]
    }

    pub fn model_index(&self, cell: u32) -> u32 {
        self.cell_model[cell as usize]
    }

    pub fn models(&self) -> &[Arc<Lattice>] {
        &self.models
    }

    pub fn glue(&self, cell: u32, slot: u32) -> Option<&Glue> {
        self.glue[cell as usize][slot as usize].as_ref()
    }

    pub fn dim(&self) -> usize {
        self.models.iter().map(|m| m.dim()).max().unwrap_or(0)
    }

    /// Checks that gluings pair facets with facets and are mutually inverse.
    pub fn validate(&self) -> Result<(), ComplexError> {
        for a in 0..self.cell_count() as u32 {
            let model = self.model(a);
            for (slot, &facet) in model.top_facets().iter().enumerate() {
                let Some(g) = self.glue(a, slot as u32) else {
                    continue;
                };
                let target_model = self.model(g.cell);
                let target_facet = *target_model
                    .top_facets()
                    .get(g.slot as usize)
                    .ok_or(ComplexError::NotInvolutive {
                        cell: a as usize,
                        slot,
                    })?;
                if g.map.apply(facet) != target_facet {
                    return Err(ComplexError::NotInvolutive {
                        cell: a as usize,
                        slot,
                    });
                }
                let back = self.glue(g.cell, g.slot).ok_or(ComplexError::NotInvolutive {
                    cell: a as usize,
                    slot,
                })?;
                if back.cell != a || back.slot != slot as u32 {
                    return Err(ComplexError::NotInvolutive {
                        cell: a as usize,
                        slot,
                    });
                }
                for h in model.down_closure(facet) {
                    if back.map.apply(g.map.apply(h)) != h {
                        return Err(ComplexError::NotInvolutive {
                            cell: a as usize,
                            slot,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Connected components of the dual graph, as a component label per cell.
    pub fn components(&self) -> Vec<u32> {
        let n = self.cell_count();
        let mut label = vec![u32::MAX; n];
        let mut next = 0;
        for start in 0..n {
            if label[start] != u32::MAX {
                continue;
            }
            label[start] = next;
            let mut stack = vec![start as u32];
            while let Some(a) = stack.pop() {
                for g in self.glue[a as usize].iter().flatten() {
                    if label[g.cell as usize] == u32::MAX {
                        label[g.cell as usize] = next;
                        stack.push(g.cell);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn boundary_slots(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for a in 0..self.cell_count() {
            for (s, g) in self.glue[a].iter().enumerate() {
                if g.is_none() {
                    out.push((a as u32, s as u32));
                }
            }
        }
        out
    }
}

/// A face of a specific cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellFace {
    pub cell: u32,
    pub face: FaceId,
}

/// Classes of faces under the identifications generated by the gluings.
///
/// Every member carries a vertex correspondence with the class representative
/// and an orientation sign: the reference orientation of the member equals
/// `sign` times the transported orientation of the representative.
#[derive(Clone, Debug)]
pub struct FaceClasses {
    class_of: Vec<Vec<u32>>,
    sign: Vec<Vec<i8>>,
    vertex_map: Vec<Vec<Box<[FaceId]>>>,
    reps: Vec<CellFace>,
    rank: Vec<u8>,
    size: Vec<u32>,
}

impl FaceClasses {
    pub fn compute(cx: &CellComplex) -> Result<Self, ComplexError> {
        let n = cx.cell_count();
        let mut class_of: Vec<Vec<u32>> = (0..n as u32)
            .map(|a| vec![u32::MAX; cx.model(a).len()])
            .collect();
        let mut sign: Vec<Vec<i8>> = (0..n as u32).map(|a| vec![0; cx.model(a).len()]).collect();
        let mut vertex_map: Vec<Vec<Box<[FaceId]>>> = (0..n as u32)
            .map(|a| vec![Box::<[FaceId]>::default(); cx.model(a).len()])
            .collect();
        let mut reps = Vec::new();
        let mut rank = Vec::new();
        let mut size = Vec::new();
        for a in 0..n as u32 {
            let model = cx.model(a);
            for g in 0..model.len() as FaceId {
                if class_of[a as usize][g as usize] != u32::MAX {
                    continue;
                }
                let id = reps.len() as u32;
                reps.push(CellFace { cell: a, face: g });
                rank.push(model.rank(g) as u8);
                class_of[a as usize][g as usize] = id;
                sign[a as usize][g as usize] = 1;
                vertex_map[a as usize][g as usize] = model.vertices(g).into();
                let mut count = 1u32;
                let mut stack = vec![(a, g)];
                while let Some((b, h)) = stack.pop() {
                    let bm = cx.model(b);
                    let vm = vertex_map[b as usize][h as usize].clone();
                    let sg = sign[b as usize][h as usize];
                    for &slot in bm.slots_above(h) {
                        let Some(gl) = cx.glue(b, slot) else {
                            continue;
                        };
                        let c = gl.cell;
                        let k = gl.map.apply(h);
                        let new_vm: Box<[FaceId]> = vm.iter().map(|&v| gl.map.apply(v)).collect();
                        let new_sign = sg * gl.map.sign[h as usize];
                        let cls = &mut class_of[c as usize][k as usize];
                        if *cls == u32::MAX {
                            *cls = id;
                            sign[c as usize][k as usize] = new_sign;
                            vertex_map[c as usize][k as usize] = new_vm;
                            count += 1;
                            stack.push((c, k));
                        } else if *cls != id
                            || vertex_map[c as usize][k as usize] != new_vm
                            || sign[c as usize][k as usize] != new_sign
                        {
                            return Err(ComplexError::Holonomy {
                                cell: c as usize,
                                face: k as usize,
                            });
                        }
                    }
                }
                size.push(count);
            }
        }
        Ok(FaceClasses {
            class_of,
            sign,
            vertex_map,
            reps,
            rank,
            size,
        })
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn class_of(&self, cell: u32, face: FaceId) -> u32 {
        self.class_of[cell as usize][face as usize]
    }

    pub fn sign(&self, cell: u32, face: FaceId) -> i8 {
        self.sign[cell as usize][face as usize]
    }

    /// Images, in the member's cell, of the representative's vertices (in order).
    pub fn vertex_map(&self, cell: u32, face: FaceId) -> &[FaceId] {
        &self.vertex_map[cell as usize][face as usize]
    }

    pub fn rep(&self, class: u32) -> CellFace {
        self.reps[class as usize]
    }

    pub fn rank(&self, class: u32) -> usize {
        self.rank[class as usize] as usize
    }

    /// Number of (cell, face) pairs in the class.
    pub fn size(&self, class: u32) -> usize {
        self.size[class as usize] as usize
    }

    pub fn classes_of_rank(&self, r: usize) -> impl Iterator<Item = u32> + '_ {
        (0..self.reps.len() as u32).filter(move |&c| self.rank[c as usize] as usize == r)
    }

    pub fn counts_by_rank(&self) -> Vec<usize> {
        let max = self.rank.iter().copied().max().unwrap_or(0) as usize;
        let mut out = vec![0; max + 1];
        for &r in &self.rank {
            out[r as usize] += 1;
        }
        out
    }

    pub fn members(&self, class: u32) -> Vec<CellFace> {
        let mut out = Vec::new();
        for (a, row) in self.class_of.iter().enumerate() {
            for (g, &c) in row.iter().enumerate() {
                if c == class {
                    out.push(CellFace {
                        cell: a as u32,
                        face: g as FaceId,
                    });
                }
            }
        }
        out
    }

    /// All members of every class, grouped by class.
    pub fn all_members(&self) -> Vec<Vec<CellFace>> {
        let mut out = vec![Vec::new(); self.len()];
        for (a, row) in self.class_of.iter().enumerate() {
            for (g, &c) in row.iter().enumerate() {
                out[c as usize].push(CellFace {
                    cell: a as u32,
                    face: g as FaceId,
                });
            }
        }
        out
    }

    /// Alternating sum of class counts, optionally skipping some rank-0 classes.
    pub fn euler_characteristic(&self, skip_vertex: impl Fn(u32) -> bool) -> i64 {
        (0..self.len() as u32)
            .filter(|&c| !(self.rank(c) == 0 && skip_vertex(c)))
            .map(|c| if self.rank(c).is_multiple_of(2) { 1 } else { -1 })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A circle made of `n` edges glued end to end.
    fn circle(n: u32) -> CellComplex {
        let edge = Arc::new(Lattice::simplex(1));
        let mut cx = CellComplex::new(vec![edge.clone()]);
        for _ in 0..n {
            cx.add_cell(0);
        }
        // slot 0 is vertex 0, slot 1 is vertex 1; glue vertex 1 of edge i to vertex 0 of edge i+1
        let swap = Arc::new(FaceMap::from_vertex_map(&edge, &edge, |v| 1 - v).unwrap());
        for i in 0..n {
            let j = (i + 1) % n;
            cx.set_glue(i, 1, Glue { cell: j, slot: 0, map: swap.clone() });
            cx.set_glue(j, 0, Glue { cell: i, slot: 1, map: swap.clone() });
        }
        cx
    }

    #[test]
    fn circle_classes() {
        let cx = circle(3);
        cx.validate().unwrap();
        let fc = FaceClasses::compute(&cx).unwrap();
        assert_eq!(fc.counts_by_rank(), vec![3, 3]);
        assert_eq!(fc.euler_characteristic(|_| false), 0);
        assert_eq!(cx.components(), vec![0, 0, 0]);
    }

    #[test]
    fn self_glued_edge_has_holonomy_free_vertex() {
        // one edge whose ends are glued: a circle with one vertex
        let cx = circle(1);
        let fc = FaceClasses::compute(&cx).unwrap();
        assert_eq!(fc.counts_by_rank(), vec![1, 1]);
    }
}
