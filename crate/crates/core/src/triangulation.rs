//! Triangulations of dimension up to 4 given by facet gluings, with vertex
//! links, Euler characteristics, homology, text I/O and isomorphism signatures.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::cells::{CellComplex, FaceClasses, Glue};
use crate::error::{ComplexError, ParseError, Result};
use crate::homology::{barycentric_complex, cellular_complex, homology, AbelianGroup, ChainComplex};
use crate::lattice::{FaceId, FaceMap, Lattice, Truncation};
use crate::polytope::permutations;

pub const MAX_DIM: usize = 4;

/// A permutation of the vertex labels `0..=dim` of a simplex; labels above
/// `dim` are fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexPerm([u8; MAX_DIM + 1]);

impl VertexPerm {
    pub fn identity() -> Self {
        VertexPerm([0, 1, 2, 3, 4])
    }

    pub fn from_images(images: &[u8]) -> Option<Self> {
        if images.len() > MAX_DIM + 1 {
            return None;
        }
        let mut out = Self::identity();
        let mut seen = 0u8;
        for (i, &m) in images.iter().enumerate() {
            if m as usize >= images.len() || seen & (1 << m) != 0 {
                return None;
            }
            seen |= 1 << m;
            out.0[i] = m;
        }
        Some(out)
    }

    pub fn get(self, i: usize) -> usize {
        self.0[i] as usize
    }

    pub fn images(&self, dim: usize) -> &[u8] {
        &self.0[..=dim]
    }

    /// `self ∘ other`.
    pub fn compose(self, other: VertexPerm) -> VertexPerm {
        VertexPerm(other.0.map(|i| self.0[i as usize]))
    }

    pub fn inverse(self) -> VertexPerm {
        let mut out = [0u8; MAX_DIM + 1];
        for (i, &m) in self.0.iter().enumerate() {
            out[m as usize] = i as u8;
        }
        VertexPerm(out)
    }

    /// Position of the permutation of `0..=dim` in lexicographic order.
    pub fn rank(self, dim: usize) -> u32 {
        let n = dim + 1;
        let mut r = 0u32;
        for i in 0..n {
            let smaller = (i + 1..n).filter(|&j| self.0[j] < self.0[i]).count() as u32;
            r = r * (n - i) as u32 + smaller;
        }
        r
    }

    pub fn digits(self, dim: usize) -> String {
        self.images(dim).iter().map(|d| char::from(b'0' + d)).collect()
    }
}

/// Facet `facet` of `simplex`, reached through `perm`, which sends the vertex
/// labels of the source simplex to those of the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FacetGluing {
    pub simplex: u32,
    pub facet: u8,
    pub perm: VertexPerm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triangulation {
    dim: usize,
    gluing: Vec<[Option<FacetGluing>; MAX_DIM + 1]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VertexKind {
    /// Link is a closed homology sphere.
    Real,
    /// Link is closed but not a homology sphere.
    Ideal,
    /// Link has boundary.
    Boundary,
}

#[derive(Clone, Debug)]
pub struct VertexClasses {
    class_of: Vec<[u32; MAX_DIM + 1]>,
    members: Vec<Vec<(u32, u8)>>,
}

impl VertexClasses {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn class_of(&self, simplex: u32, vertex: usize) -> u32 {
        self.class_of[simplex as usize][vertex]
    }

    pub fn members(&self, class: u32) -> &[(u32, u8)] {
        &self.members[class as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EulerMode {
    /// Ideal vertices counted as points.
    Compactified,
    /// Open stars of ideal vertices removed.
    Truncated,
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        parent[x as usize] = parent[parent[x as usize] as usize];
        x = parent[x as usize];
    }
    x
}

/// Relabels union-find roots as `0..k` in order of first appearance.
fn compress(parent: &mut [u32]) -> Vec<u32> {
    let mut ids = HashMap::new();
    (0..parent.len() as u32)
        .map(|x| {
            let r = find(parent, x);
            let n = ids.len() as u32;
            *ids.entry(r).or_insert(n)
        })
        .collect()
}

impl Triangulation {
    pub fn new(dim: usize, simplices: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(ComplexError::Invalid(format!("unsupported dimension {dim}")).into());
        }
        Ok(Triangulation {
            dim,
            gluing: vec![[None; MAX_DIM + 1]; simplices],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.gluing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gluing.is_empty()
    }

    pub fn gluing(&self, simplex: u32, facet: usize) -> Option<FacetGluing> {
        self.gluing[simplex as usize][facet]
    }

    /// Glues facet `facet` of `simplex` to the facet `perm(facet)` of `target`,
    /// recording both directions.
    pub fn glue(&mut self, simplex: u32, facet: usize, target: u32, perm: VertexPerm) -> Result<()> {
        let n = self.len() as u32;
        if simplex >= n || target >= n || facet > self.dim {
            return Err(ComplexError::Invalid("gluing refers to a missing simplex or facet".into()).into());
        }
        let tf = perm.get(facet);
        let fwd = FacetGluing {
            simplex: target,
            facet: tf as u8,
            perm,
        };
        let back = FacetGluing {
            simplex,
            facet: facet as u8,
            perm: perm.inverse(),
        };
        for (s, f, g) in [(simplex, facet, fwd), (target, tf, back)] {
            match self.gluing[s as usize][f] {
                Some(old) if old != g => {
                    return Err(ComplexError::NotPseudomanifold {
                        simplex: s as usize,
                        facet: f,
                        count: 3,
                    }
                    .into())
                }
                _ => {}
            }
        }
        self.gluing[simplex as usize][facet] = Some(fwd);
        self.gluing[target as usize][tf] = Some(back);
        Ok(())
    }

    /// Gluings are mutually inverse and carry facets to facets.
    pub fn validate(&self) -> Result<(), ComplexError> {
        for s in 0..self.len() {
            for f in 0..=self.dim {
                let Some(g) = self.gluing[s][f] else { continue };
                if g.perm.get(f) != g.facet as usize || g.perm.images(self.dim).iter().any(|&m| m as usize > self.dim) {
                    return Err(ComplexError::Invalid(format!("gluing of simplex {s} facet {f} is malformed")));
                }
                let back = self.gluing.get(g.simplex as usize).and_then(|row| row[g.facet as usize]);
                let ok = back.is_some_and(|b| b.simplex as usize == s && b.facet as usize == f && b.perm == g.perm.inverse());
                if !ok {
                    return Err(ComplexError::NotInvolutive { cell: s, slot: f });
                }
            }
        }
        Ok(())
    }

    pub fn boundary_facets(&self) -> Vec<(u32, usize)> {
        (0..self.len() as u32)
            .flat_map(|s| (0..=self.dim).map(move |f| (s, f)))
            .filter(|&(s, f)| self.gluing(s, f).is_none())
            .collect()
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_facets().is_empty()
    }

    /// Valid and closed: every codimension-one face lies in exactly two simplices.
    pub fn check_closed_pseudomanifold(&self) -> Result<(), ComplexError> {
        self.validate()?;
        if let Some(&(s, f)) = self.boundary_facets().first() {
            return Err(ComplexError::NotPseudomanifold {
                simplex: s as usize,
                facet: f,
                count: 1,
            });
        }
        Ok(())
    }

    /// Component index of every simplex.
    pub fn components(&self) -> Vec<u32> {
        let mut parent: Vec<u32> = (0..self.len() as u32).collect();
        for s in 0..self.len() as u32 {
            for f in 0..=self.dim {
                if let Some(g) = self.gluing(s, f) {
                    let (a, b) = (find(&mut parent, s), find(&mut parent, g.simplex));
                    parent[a.max(b) as usize] = a.min(b);
                }
            }
        }
        compress(&mut parent)
    }

    pub fn component_count(&self) -> usize {
        self.components().iter().max().map_or(0, |&m| m as usize + 1)
    }

    /// The simplices of component `c`, renumbered in their original order.
    pub fn component(&self, c: u32) -> Triangulation {
        let comp = self.components();
        let kept: Vec<u32> = (0..self.len() as u32).filter(|&s| comp[s as usize] == c).collect();
        let mut new_id = vec![u32::MAX; self.len()];
        for (i, &s) in kept.iter().enumerate() {
            new_id[s as usize] = i as u32;
        }
        let gluing = kept
            .iter()
            .map(|&s| {
                self.gluing[s as usize].map(|g| {
                    g.map(|g| FacetGluing {
                        simplex: new_id[g.simplex as usize],
                        ..g
                    })
                })
            })
            .collect();
        Triangulation { dim: self.dim, gluing }
    }

    /// Simplex `s` becomes `simplex_map[s]` and its vertex `v` becomes
    /// `vertex_perms[s](v)`.
    pub fn relabeled(&self, simplex_map: &[u32], vertex_perms: &[VertexPerm]) -> Triangulation {
        let mut gluing = vec![[None; MAX_DIM + 1]; self.len()];
        for s in 0..self.len() {
            let ps = vertex_perms[s];
            for f in 0..=self.dim {
                let Some(g) = self.gluing[s][f] else { continue };
                let pt = vertex_perms[g.simplex as usize];
                gluing[simplex_map[s] as usize][ps.get(f)] = Some(FacetGluing {
                    simplex: simplex_map[g.simplex as usize],
                    facet: pt.get(g.facet as usize) as u8,
                    perm: pt.compose(g.perm).compose(ps.inverse()),
                });
            }
        }
        Triangulation { dim: self.dim, gluing }
    }

    pub fn vertex_classes(&self) -> VertexClasses {
        let w = (MAX_DIM + 1) as u32;
        let mut parent: Vec<u32> = (0..self.len() as u32 * w).collect();
        for s in 0..self.len() as u32 {
            for f in 0..=self.dim {
                let Some(g) = self.gluing(s, f) else { continue };
                for v in (0..=self.dim).filter(|&v| v != f) {
                    let a = find(&mut parent, s * w + v as u32);
                    let b = find(&mut parent, g.simplex * w + g.perm.get(v) as u32);
                    parent[a.max(b) as usize] = a.min(b);
                }
            }
        }
        // only labels 0..=dim take part
        let mut ids: HashMap<u32, u32> = HashMap::new();
        let mut class_of = vec![[u32::MAX; MAX_DIM + 1]; self.len()];
        let mut members: Vec<Vec<(u32, u8)>> = Vec::new();
        for s in 0..self.len() as u32 {
            for v in 0..=self.dim {
                let r = find(&mut parent, s * w + v as u32);
                let id = *ids.entry(r).or_insert_with(|| {
                    members.push(Vec::new());
                    (members.len() - 1) as u32
                });
                class_of[s as usize][v] = id;
                members[id as usize].push((s, v as u8));
            }
        }
        VertexClasses { class_of, members }
    }

    /// The link of a vertex class, one simplex per occurrence of the vertex.
    pub fn vertex_link(&self, vc: &VertexClasses, class: u32) -> Result<Triangulation> {
        if self.dim < 2 {
            return Err(ComplexError::Invalid("links of vertices need dimension at least 2".into()).into());
        }
        let members = vc.members(class);
        let index: HashMap<(u32, u8), u32> = members.iter().enumerate().map(|(i, &m)| (m, i as u32)).collect();
        // local label of vertex u in the link simplex of (s, v)
        let local = |v: usize, u: usize| if u < v { u } else { u - 1 };
        let mut link = Triangulation::new(self.dim - 1, members.len())?;
        for (i, &(s, v)) in members.iter().enumerate() {
            let v = v as usize;
            for w in (0..=self.dim).filter(|&w| w != v) {
                let Some(g) = self.gluing(s, w) else { continue };
                let tv = g.perm.get(v);
                let j = index[&(g.simplex, tv as u8)];
                let mut images = [0u8; MAX_DIM];
                for u in (0..=self.dim).filter(|&u| u != v) {
                    images[local(v, u)] = local(tv, g.perm.get(u)) as u8;
                }
                let perm = VertexPerm::from_images(&images[..self.dim]).expect("restriction of a bijection");
                link.glue(i as u32, local(v, w), j, perm)?;
            }
        }
        Ok(link)
    }

    /// Classifies every vertex class by its link.
    pub fn vertex_kinds(&self, vc: &VertexClasses) -> Result<Vec<VertexKind>> {
        (0..vc.len() as u32)
            .into_par_iter()
            .map(|c| {
                let link = self.vertex_link(vc, c)?;
                if !link.is_closed() {
                    return Ok(VertexKind::Boundary);
                }
                let h = link.homology(false)?;
                let d = link.dim();
                let sphere = link.component_count() == 1
                    && h.iter().enumerate().all(|(k, g)| {
                        if k == 0 || k == d {
                            *g == AbelianGroup::free(1)
                        } else {
                            g.is_trivial()
                        }
                    });
                Ok(if sphere { VertexKind::Real } else { VertexKind::Ideal })
            })
            .collect()
    }

    pub fn ideal_classes(&self, vc: &VertexClasses) -> Result<Vec<u32>> {
        Ok(self
            .vertex_kinds(vc)?
            .into_iter()
            .enumerate()
            .filter(|(_, k)| *k == VertexKind::Ideal)
            .map(|(c, _)| c as u32)
            .collect())
    }

    /// Links of the ideal vertex classes, each closed.
    pub fn boundary_triangulations(&self) -> Result<Vec<Triangulation>> {
        let vc = self.vertex_classes();
        self.ideal_classes(&vc)?
            .into_iter()
            .map(|c| {
                let link = self.vertex_link(&vc, c)?;
                link.check_closed_pseudomanifold()?;
                Ok(link)
            })
            .collect()
    }

    fn facet_slot(lat: &Lattice, truncation: Option<&Truncation>, dim: usize, f: usize) -> u32 {
        let verts: Vec<u32> = (0..=dim as u32).filter(|&v| v as usize != f).collect();
        let g = lat_find(truncation, lat, &verts);
        let model = truncation.map_or(lat, |t| &t.lattice);
        model.slot_of_facet(g).expect("facet is a slot")
    }

    /// The triangulation as a cell complex of simplices, or of simplices
    /// truncated at the vertices in `ideal` (one flag per vertex class).
    pub fn cell_complex(&self, vc: &VertexClasses, ideal: Option<&[bool]>) -> Result<CellComplex> {
        let simplex = Lattice::simplex(self.dim);
        let mask_of = |s: usize| -> u8 {
            match ideal {
                None => 0,
                Some(flags) => (0..=self.dim)
                    .filter(|&v| flags[vc.class_of(s as u32, v) as usize])
                    .fold(0, |m, v| m | (1 << v)),
            }
        };
        let mut truncations: HashMap<u8, (u32, Option<Truncation>)> = HashMap::new();
        let mut models: Vec<Arc<Lattice>> = Vec::new();
        let mut cell_model = Vec::with_capacity(self.len());
        for s in 0..self.len() {
            let m = mask_of(s);
            let entry = match truncations.get(&m) {
                Some(e) => e.0,
                None => {
                    let t = if m == 0 {
                        None
                    } else {
                        let verts: Vec<FaceId> = (0..=self.dim as u32).filter(|v| m & (1 << v) != 0).collect();
                        Some(simplex.truncate(&verts)?)
                    };
                    models.push(Arc::new(t.as_ref().map_or_else(|| simplex.clone(), |t| t.lattice.clone())));
                    let id = (models.len() - 1) as u32;
                    truncations.insert(m, (id, t));
                    id
                }
            };
            cell_model.push((entry, m));
        }
        let mut cx = CellComplex::new(models);
        for &(model, _) in &cell_model {
            cx.add_cell(model);
        }
        let mut cache: HashMap<(u8, u8, VertexPerm), Arc<FaceMap>> = HashMap::new();
        for s in 0..self.len() {
            let (_, ms) = cell_model[s];
            let ts = truncations[&ms].1.as_ref();
            for f in 0..=self.dim {
                let Some(g) = self.gluing[s][f] else { continue };
                let (_, mt) = cell_model[g.simplex as usize];
                let tt = truncations[&mt].1.as_ref();
                let map = match cache.get(&(ms, mt, g.perm)) {
                    Some(m) => m.clone(),
                    None => {
                        let fm = FaceMap::from_vertex_map(&simplex, &simplex, |v| g.perm.get(v as usize) as FaceId)?;
                        let fm = match (ts, tt) {
                            (None, None) => fm,
                            _ => {
                                let src = owned_truncation(ts, &simplex)?;
                                let dst = owned_truncation(tt, &simplex)?;
                                FaceMap::new(&src.lattice, &dst.lattice, src.induced_map(&dst, &fm.map))?
                            }
                        };
                        let fm = Arc::new(fm);
                        cache.insert((ms, mt, g.perm), fm.clone());
                        fm
                    }
                };
                cx.set_glue(
                    s as u32,
                    Self::facet_slot(&simplex, ts, self.dim, f),
                    Glue {
                        cell: g.simplex,
                        slot: Self::facet_slot(&simplex, tt, self.dim, g.facet as usize),
                        map,
                    },
                );
            }
        }
        Ok(cx)
    }

    /// Numbers of face classes by dimension.
    pub fn face_counts(&self) -> Result<Vec<usize>> {
        let vc = self.vertex_classes();
        let cx = self.cell_complex(&vc, None)?;
        Ok(FaceClasses::compute(&cx)?.counts_by_rank())
    }

    pub fn euler_characteristic(&self, mode: EulerMode) -> Result<i64> {
        let counts = self.face_counts()?;
        let chi: i64 = counts
            .iter()
            .enumerate()
            .map(|(k, &n)| if k % 2 == 0 { n as i64 } else { -(n as i64) })
            .sum();
        Ok(match mode {
            EulerMode::Compactified => chi,
            EulerMode::Truncated => {
                let vc = self.vertex_classes();
                let mut out = chi;
                for c in self.ideal_classes(&vc)? {
                    let link = self.vertex_link(&vc, c)?;
                    out -= 1 - link.euler_characteristic(EulerMode::Compactified)?;
                }
                out
            }
        })
    }

    /// Cellular chains; with `truncate`, of the complex with the ideal
    /// vertices cut off.
    pub fn chain_complex(&self, truncate: bool) -> Result<ChainComplex> {
        let vc = self.vertex_classes();
        let flags = if truncate {
            let kinds = self.vertex_kinds(&vc)?;
            Some(kinds.iter().map(|&k| k == VertexKind::Ideal).collect::<Vec<_>>())
        } else {
            None
        };
        let cx = self.cell_complex(&vc, flags.as_deref())?;
        let fc = FaceClasses::compute(&cx)?;
        Ok(cellular_complex(&cx, &fc, |_| true)?)
    }

    /// Barycentric chains with the open stars of ideal vertices removed.
    pub fn barycentric_chain_complex(&self) -> Result<ChainComplex> {
        let vc = self.vertex_classes();
        let kinds = self.vertex_kinds(&vc)?;
        let cx = self.cell_complex(&vc, None)?;
        let fc = FaceClasses::compute(&cx)?;
        // rank-0 face classes of the simplex complex correspond to vertex classes
        let ideal_face_classes: Vec<bool> = (0..fc.len() as u32)
            .map(|c| {
                fc.rank(c) == 0 && {
                    let rep = fc.rep(c);
                    kinds[vc.class_of(rep.cell, rep.face as usize) as usize] == VertexKind::Ideal
                }
            })
            .collect();
        Ok(barycentric_complex(&cx, &fc, |c| ideal_face_classes[c as usize])?)
    }

    pub fn homology(&self, truncate: bool) -> Result<Vec<AbelianGroup>> {
        Ok(homology(&self.chain_complex(truncate)?))
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = format!("tri{} {} {}\n", self.dim, self.len(), self.dim);
        for s in 0..self.len() {
            for f in 0..=self.dim {
                match self.gluing[s][f] {
                    None => writeln!(out, "{s} {f} -"),
                    Some(g) => writeln!(out, "{s} {f} {} {} {}", g.simplex, g.facet, g.perm.digits(self.dim)),
                }
                .expect("writing to a string");
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hl, header) = lines.next().ok_or_else(|| ParseError::new(1, "missing header"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let (n, dim) = match h.as_slice() {
            [tag, n, d] if tag.starts_with("tri") => (
                n.parse::<usize>().map_err(|_| ParseError::new(hl, "bad simplex count"))?,
                d.parse::<usize>().map_err(|_| ParseError::new(hl, "bad dimension"))?,
            ),
            _ => return Err(ParseError::new(hl, "expected `tri<d> <n> <dim>`")),
        };
        if h[0] != format!("tri{dim}") {
            return Err(ParseError::new(hl, "header tag does not match the dimension"));
        }
        let mut t = Triangulation::new(dim, n).map_err(|e| ParseError::new(hl, e.to_string()))?;
        let mut seen = vec![[false; MAX_DIM + 1]; n];
        for (ln, line) in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let num = |i: usize, what: &str, bound: usize| -> Result<usize, ParseError> {
                parts
                    .get(i)
                    .and_then(|p| p.parse::<usize>().ok())
                    .filter(|&x| x < bound)
                    .ok_or_else(|| ParseError::new(ln, format!("bad {what}")))
            };
            let s = num(0, "simplex", n)?;
            let f = num(1, "facet", dim + 1)?;
            seen[s][f] = true;
            if parts.len() == 3 && parts[2] == "-" {
                if t.gluing[s][f].is_some() {
                    return Err(ParseError::new(ln, "facet is both glued and boundary"));
                }
                continue;
            }
            if parts.len() != 5 {
                return Err(ParseError::new(ln, "expected 5 fields or `-`"));
            }
            let target = num(2, "target simplex", n)?;
            let tf = num(3, "target facet", dim + 1)?;
            let digits: Option<Vec<u8>> = parts[4]
                .chars()
                .map(|c| c.to_digit(10).map(|d| d as u8))
                .collect();
            let perm = digits
                .filter(|d| d.len() == dim + 1)
                .and_then(|d| VertexPerm::from_images(&d))
                .ok_or_else(|| ParseError::new(ln, "bad permutation"))?;
            if perm.get(f) != tf {
                return Err(ParseError::new(ln, "permutation does not carry the facet to the target facet"));
            }
            t.glue(s as u32, f, target as u32, perm)
                .map_err(|e| ParseError::new(ln, e.to_string()))?;
        }
        if let Some((s, f)) = (0..n).flat_map(|s| (0..=dim).map(move |f| (s, f))).find(|&(s, f)| !seen[s][f] && t.gluing[s][f].is_none()) {
            return Err(ParseError::new(0, format!("facet {f} of simplex {s} is not listed")));
        }
        Ok(t)
    }

    /// Encodes the triangulation relabeled by a breadth-first search from
    /// `start` with labeling `sigma`, stopping early once the encoding is
    /// known to differ from `bound`: on any difference when `exact`,
    /// otherwise once it is larger.
    fn encode(&self, start: u32, sigma: VertexPerm, bound: Option<&[u32]>, exact: bool) -> Encoding {
        let facets = (self.dim + 1) as u32;
        let perm_count: u32 = (1..=facets).product();
        let mut new_of = vec![u32::MAX; self.len()];
        let mut labels = vec![VertexPerm::identity(); self.len()];
        let mut order = vec![start];
        new_of[start as usize] = 0;
        labels[start as usize] = sigma;
        let mut tokens = Vec::with_capacity(self.len() * facets as usize);
        let mut state = Ordering::Equal;
        let mut i = 0;
        while i < order.len() {
            let s = order[i];
            let lab = labels[s as usize];
            let inv = lab.inverse();
            for fnew in 0..=self.dim {
                let token = match self.gluing(s, inv.get(fnew)) {
                    None => 0,
                    Some(g) => {
                        let t = g.simplex;
                        if new_of[t as usize] == u32::MAX {
                            new_of[t as usize] = order.len() as u32;
                            labels[t as usize] = lab.compose(g.perm.inverse());
                            order.push(t);
                        }
                        let p = labels[t as usize].compose(g.perm).compose(inv);
                        1 + new_of[t as usize] * perm_count + p.rank(self.dim)
                    }
                };
                if let (Some(b), Ordering::Equal) = (bound, state) {
                    state = token.cmp(&b[tokens.len()]);
                    if state == Ordering::Greater || (exact && state == Ordering::Less) {
                        return Encoding::Aborted;
                    }
                }
                tokens.push(token);
            }
            i += 1;
        }
        Encoding::Complete { tokens, order, labels }
    }

    fn starts(&self) -> Vec<(u32, VertexPerm)> {
        let perms: Vec<VertexPerm> = permutations(self.dim + 1)
            .into_iter()
            .map(|p| VertexPerm::from_images(&p.iter().map(|&x| x as u8).collect::<Vec<_>>()).expect("permutation"))
            .collect();
        (0..self.len() as u32)
            .flat_map(|s| perms.iter().map(move |&p| (s, p)))
            .collect()
    }

    fn connected_signature(&self) -> Vec<u32> {
        let starts = self.starts();
        starts
            .par_chunks(64)
            .map(|chunk| {
                let mut best: Option<Vec<u32>> = None;
                for &(s, p) in chunk {
                    if let Encoding::Complete { tokens, .. } = self.encode(s, p, best.as_deref(), false) {
                        best = Some(tokens);
                    }
                }
                best.expect("a chunk has at least one start")
            })
            .reduce_with(|a, b| a.min(b))
            .unwrap_or_default()
    }

    /// Minimum over all starting simplices and labelings of the breadth-first
    /// encoding, component by component, components sorted.
    pub fn canonical_signature(&self) -> CanonicalSignature {
        let mut parts: Vec<Vec<u32>> = (0..self.component_count() as u32)
            .map(|c| self.component(c).connected_signature())
            .collect();
        parts.sort();
        let body: Vec<String> = parts
            .iter()
            .map(|p| p.iter().map(|t| format!("{t:x}")).collect::<Vec<_>>().join("."))
            .collect();
        CanonicalSignature(format!("d{}n{}:{}", self.dim, self.len(), body.join("|")))
    }

    /// An isomorphism onto `other`, if there is one: both triangulations must
    /// be connected.
    pub fn isomorphism_to(&self, other: &Triangulation) -> Option<Isomorphism> {
        if self.dim != other.dim || self.len() != other.len() || self.is_empty() {
            return (self.dim == other.dim && self.is_empty() && other.is_empty()).then(Isomorphism::default);
        }
        if self.component_count() != 1 || other.component_count() != 1 {
            return None;
        }
        let Encoding::Complete { tokens, order, labels } = self.encode(0, VertexPerm::identity(), None, true) else {
            unreachable!("no bound given");
        };
        let (o2, l2) = other.starts().into_par_iter().find_map_first(|(s, p)| {
            match other.encode(s, p, Some(&tokens), true) {
                Encoding::Complete { order, labels, .. } => Some((order, labels)),
                Encoding::Aborted => None,
            }
        })?;
        let mut simplex_map = vec![0u32; self.len()];
        let mut vertex_perms = vec![VertexPerm::identity(); self.len()];
        for (k, &s) in order.iter().enumerate() {
            let t = o2[k];
            simplex_map[s as usize] = t;
            vertex_perms[s as usize] = l2[t as usize].inverse().compose(labels[s as usize]);
        }
        Some(Isomorphism {
            simplex_map,
            vertex_perms,
        })
    }
}

fn owned_truncation(t: Option<&Truncation>, simplex: &Lattice) -> Result<Truncation, ComplexError> {
    match t {
        Some(t) => Ok(t.clone()),
        None => simplex.truncate(&[]),
    }
}

fn lat_find(truncation: Option<&Truncation>, lat: &Lattice, verts: &[u32]) -> FaceId {
    let g = lat.find(verts).expect("facet of the simplex");
    match truncation {
        None => g,
        Some(t) => t.from_original[g as usize].expect("facets survive truncation"),
    }
}

enum Encoding {
    Complete {
        tokens: Vec<u32>,
        order: Vec<u32>,
        labels: Vec<VertexPerm>,
    },
    Aborted,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CanonicalSignature(pub String);

impl fmt::Display for CanonicalSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Simplex `s` goes to `simplex_map[s]`, its vertex `v` to `vertex_perms[s](v)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Isomorphism {
    pub simplex_map: Vec<u32>,
    pub vertex_perms: Vec<VertexPerm>,
}

impl Isomorphism {
    /// Checks that the map carries every gluing of `a` to the matching gluing of `b`.
    pub fn verify(&self, a: &Triangulation, b: &Triangulation) -> bool {
        a.len() == b.len() && a.relabeled(&self.simplex_map, &self.vertex_perms) == *b
    }
}

/// Isomorphism test; disconnected inputs are matched component by component.
pub fn is_isomorphic(a: &Triangulation, b: &Triangulation) -> bool {
    if a.dim() != b.dim() || a.len() != b.len() {
        return false;
    }
    let (ca, cb) = (a.component_count(), b.component_count());
    if ca != cb {
        return false;
    }
    if ca <= 1 {
        return a.isomorphism_to(b).is_some();
    }
    let mut left: Vec<Triangulation> = (0..cb as u32).map(|c| b.component(c)).collect();
    for c in 0..ca as u32 {
        let comp = a.component(c);
        match left.iter().position(|d| comp.isomorphism_to(d).is_some()) {
            Some(i) => {
                left.swap_remove(i);
            }
            None => return false,
        }
    }
    true
}

impl Triangulation {
    /// Reads a triangulation file.
    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(Triangulation::parse(&text)?)
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Boundary of the (d+1)-simplex: d+2 simplices, facet j of simplex i
    /// glued to facet i of simplex j (after shifting labels).
    pub(crate) fn sphere(dim: usize) -> Triangulation {
        let n = dim + 2;
        let mut t = Triangulation::new(dim, n).unwrap();
        // simplex i has vertices 0..n without i, in order
        let verts = |i: usize| -> Vec<usize> { (0..n).filter(|&v| v != i).collect() };
        for i in 0..n {
            for j in (i + 1)..n {
                let vi = verts(i);
                let vj = verts(j);
                let mut images = vec![0u8; dim + 1];
                for (a, &v) in vi.iter().enumerate() {
                    images[a] = if v == j { vj.iter().position(|&w| w == i).unwrap() } else { vj.iter().position(|&w| w == v).unwrap() } as u8;
                }
                let f = vi.iter().position(|&v| v == j).unwrap();
                t.glue(i as u32, f, j as u32, VertexPerm::from_images(&images).unwrap()).unwrap();
            }
        }
        t
    }

    #[test]
    fn sphere_invariants() {
        for dim in 1..=4 {
            let t = sphere(dim);
            t.check_closed_pseudomanifold().unwrap();
            let h = t.homology(false).unwrap();
            assert_eq!(h[0], AbelianGroup::free(1));
            assert_eq!(h[dim], AbelianGroup::free(1));
            assert!(h[1..dim].iter().all(|g| g.is_trivial()));
            let chi = if dim % 2 == 0 { 2 } else { 0 };
            assert_eq!(t.euler_characteristic(EulerMode::Compactified).unwrap(), chi);
            if dim >= 2 {
                let vc = t.vertex_classes();
                assert_eq!(vc.len(), dim + 2);
                assert!(t.vertex_kinds(&vc).unwrap().iter().all(|&k| k == VertexKind::Real));
            }
        }
    }

    #[test]
    fn text_round_trip_and_errors() {
        let t = sphere(4);
        let text = t.to_text();
        assert!(text.starts_with("tri4 6 4\n"));
        assert_eq!(Triangulation::parse(&text).unwrap(), t);
        let mut lines: Vec<&str> = text.lines().collect();
        lines[3] = "0 2 1 0 01234";
        let err = Triangulation::parse(&lines.join("\n")).unwrap_err();
        assert_eq!(err.line, 4);
        assert!(Triangulation::parse("tri4 1 3\n").is_err());
    }

    #[test]
    fn signatures_distinguish_small_cases() {
        // one 1-simplex glued to itself versus two glued into a circle
        let mut a = Triangulation::new(1, 1).unwrap();
        a.glue(0, 0, 0, VertexPerm::from_images(&[1, 0]).unwrap()).unwrap();
        let mut c = Triangulation::new(1, 2).unwrap();
        c.glue(0, 0, 1, VertexPerm::identity()).unwrap();
        c.glue(0, 1, 1, VertexPerm::identity()).unwrap();
        assert_ne!(a.canonical_signature(), c.canonical_signature());
        assert!(!is_isomorphic(&a, &c));
    }

    #[test]
    fn relabeling_preserves_signature() {
        let t = sphere(3);
        let perms = [
            VertexPerm::from_images(&[1, 0, 3, 2]).unwrap(),
            VertexPerm::from_images(&[3, 2, 1, 0]).unwrap(),
            VertexPerm::identity(),
            VertexPerm::from_images(&[0, 2, 3, 1]).unwrap(),
            VertexPerm::from_images(&[2, 0, 1, 3]).unwrap(),
        ];
        let r = t.relabeled(&[4, 2, 0, 1, 3], &perms);
        r.validate().unwrap();
        assert_eq!(t.canonical_signature(), r.canonical_signature());
        let iso = t.isomorphism_to(&r).unwrap();
        assert!(iso.verify(&t, &r));
    }

    #[test]
    fn perm_rank_is_lexicographic() {
        let ranks: Vec<u32> = permutations(4)
            .into_iter()
            .map(|p| VertexPerm::from_images(&p.iter().map(|&x| x as u8).collect::<Vec<_>>()).unwrap().rank(3))
            .collect();
        assert_eq!(ranks, (0..24).collect::<Vec<_>>());
    }
}
