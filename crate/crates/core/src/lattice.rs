//! Graded face lattices of polytopes and simplices.
//!
//! A [`Lattice`] stores every face of a single model cell (including the cell
//! itself) as a sorted set of rank-0 faces. Faces of polytopes are determined by
//! their vertex sets, so vertex sets double as face keys. Each face of positive
//! rank carries cellular incidence numbers `[G:H] = ±1` against its facets,
//! chosen so that the boundary of the boundary vanishes.

use std::collections::HashMap;

use crate::error::ComplexError;

/// Face index inside a lattice.
pub type FaceId = u32;

#[derive(Clone, Debug)]
pub struct Lattice {
    rank: Vec<u8>,
    verts: Vec<Box<[FaceId]>>,
    down: Vec<Vec<FaceId>>,
    inc: Vec<Vec<i8>>,
    up: Vec<Vec<FaceId>>,
    by_rank: Vec<Vec<FaceId>>,
    lookup: HashMap<Box<[FaceId]>, FaceId>,
    /// For each face, the positions (in `down[top]`) of the facets of the top cell above it.
    slots_above: Vec<Vec<u32>>,
    top: FaceId,
}

impl Lattice {
    /// Builds a lattice from faces given as `(rank, vertex set)`.
    ///
    /// Rank-0 faces must list themselves: the vertex set of the `k`-th rank-0
    /// entry is `[k']` where `k'` is its own position in the input. Vertex sets
    /// are expressed in input positions and renumbered internally so that faces
    /// are sorted by `(rank, vertex set)`.
    pub fn from_faces(faces: Vec<(u8, Vec<u32>)>) -> Result<Self, ComplexError> {
        let n = faces.len();
        if n == 0 {
            return Err(ComplexError::Invalid("empty lattice".into()));
        }
        // canonical order: rank, then vertex set (in input vertex numbering)
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let (ra, va) = &faces[a];
            let (rb, vb) = &faces[b];
            ra.cmp(rb).then_with(|| {
                let mut sa = va.clone();
                let mut sb = vb.clone();
                sa.sort_unstable();
                sb.sort_unstable();
                sa.cmp(&sb)
            })
        });
        let mut new_index = vec![0u32; n];
        for (pos, &old) in order.iter().enumerate() {
            new_index[old] = pos as u32;
        }
        let mut rank = Vec::with_capacity(n);
        let mut verts: Vec<Box<[FaceId]>> = Vec::with_capacity(n);
        for &old in &order {
            let (r, vs) = &faces[old];
            let mut mapped: Vec<u32> = vs
                .iter()
                .map(|&v| {
                    new_index
                        .get(v as usize)
                        .copied()
                        .ok_or_else(|| ComplexError::Invalid(format!("vertex {v} out of range")))
                })
                .collect::<Result<_, _>>()?;
            mapped.sort_unstable();
            mapped.dedup();
            rank.push(*r);
            verts.push(mapped.into_boxed_slice());
        }
        let max_rank = *rank.iter().max().unwrap_or(&0);
        let tops: Vec<usize> = (0..n).filter(|&i| rank[i] == max_rank).collect();
        if tops.len() != 1 {
            return Err(ComplexError::Invalid("lattice must have a unique top face".into()));
        }
        let top = tops[0] as FaceId;
        let mut by_rank = vec![Vec::new(); max_rank as usize + 1];
        for i in 0..n {
            by_rank[rank[i] as usize].push(i as FaceId);
        }
        for (i, r) in rank.iter().enumerate() {
            if *r == 0 && verts[i].as_ref() != [i as u32] {
                return Err(ComplexError::Invalid("rank-0 face must list itself".into()));
            }
        }
        let mut lookup = HashMap::with_capacity(n);
        for (i, v) in verts.iter().enumerate() {
            if lookup.insert(v.clone(), i as FaceId).is_some() {
                return Err(ComplexError::Invalid("two faces share a vertex set".into()));
            }
        }
        // covering relation: H below G iff rank(H) = rank(G) - 1 and verts(H) ⊂ verts(G)
        let mut down = vec![Vec::new(); n];
        let mut up = vec![Vec::new(); n];
        let mut containing: Vec<Vec<FaceId>> = vec![Vec::new(); by_rank[0].len()];
        for r in 1..=max_rank as usize {
            // index faces of rank r-1 by their first vertex
            for v in containing.iter_mut() {
                v.clear();
            }
            for &h in &by_rank[r - 1] {
                containing[verts[h as usize][0] as usize].push(h);
            }
            for &g in &by_rank[r] {
                let gv = &verts[g as usize];
                for &v in gv.iter() {
                    for &h in &containing[v as usize] {
                        if is_subset(&verts[h as usize], gv) {
                            down[g as usize].push(h);
                            up[h as usize].push(g);
                        }
                    }
                }
            }
        }
        for d in down.iter_mut() {
            d.sort_unstable();
        }
        for u in up.iter_mut() {
            u.sort_unstable();
        }
        let mut lat = Lattice {
            rank,
            verts,
            down,
            inc: Vec::new(),
            up,
            by_rank,
            lookup,
            slots_above: Vec::new(),
            top,
        };
        lat.inc = lat.compute_incidence()?;
        lat.slots_above = lat.compute_slots_above();
        Ok(lat)
    }

    /// Face lattice of the `dim`-simplex on vertices `0..=dim`, faces in subset order.
    pub fn simplex(dim: usize) -> Self {
        let n = dim + 1;
        let mut faces = Vec::new();
        for mask in 1u32..(1 << n) {
            let vs: Vec<u32> = (0..n as u32).filter(|i| mask & (1 << i) != 0).collect();
            faces.push(((vs.len() - 1) as u8, vs));
        }
        // rank-0 faces must reference themselves; reorder so that the singletons come first
        faces.sort_by_key(|(r, v)| (*r, v.clone()));
        Lattice::from_faces(faces).expect("simplex lattice is well formed")
    }

    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rank[self.top as usize] as usize
    }

    pub fn top(&self) -> FaceId {
        self.top
    }

    pub fn rank(&self, f: FaceId) -> usize {
        self.rank[f as usize] as usize
    }

    pub fn vertices(&self, f: FaceId) -> &[FaceId] {
        &self.verts[f as usize]
    }

    pub fn facets(&self, f: FaceId) -> &[FaceId] {
        &self.down[f as usize]
    }

    pub fn cofacets(&self, f: FaceId) -> &[FaceId] {
        &self.up[f as usize]
    }

    /// Incidence numbers aligned with [`Lattice::facets`].
    pub fn incidences(&self, f: FaceId) -> &[i8] {
        &self.inc[f as usize]
    }

    pub fn incidence(&self, g: FaceId, h: FaceId) -> i8 {
        match self.down[g as usize].binary_search(&h) {
            Ok(pos) => self.inc[g as usize][pos],
            Err(_) => 0,
        }
    }

    pub fn faces_of_rank(&self, r: usize) -> &[FaceId] {
        self.by_rank.get(r).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn f_vector(&self) -> Vec<usize> {
        self.by_rank.iter().map(|v| v.len()).collect()
    }

    pub fn find(&self, verts: &[FaceId]) -> Option<FaceId> {
        self.lookup.get(verts).copied()
    }

    /// Facets of the top cell, in slot order.
    pub fn top_facets(&self) -> &[FaceId] {
        &self.down[self.top as usize]
    }

    pub fn slot_of_facet(&self, facet: FaceId) -> Option<u32> {
        self.down[self.top as usize]
            .binary_search(&facet)
            .ok()
            .map(|p| p as u32)
    }

    /// Slots of top facets containing `f` (for the top cell itself this is empty).
    pub fn slots_above(&self, f: FaceId) -> &[u32] {
        &self.slots_above[f as usize]
    }

    pub fn le(&self, a: FaceId, b: FaceId) -> bool {
        a == b || (self.rank(a) < self.rank(b) && is_subset(self.vertices(a), self.vertices(b)))
    }

    /// All faces below or equal to `f`, sorted.
    pub fn down_closure(&self, f: FaceId) -> Vec<FaceId> {
        let mut out = vec![f];
        let mut stack = vec![f];
        let mut seen = std::collections::HashSet::new();
        seen.insert(f);
        while let Some(g) = stack.pop() {
            for &h in self.facets(g) {
                if seen.insert(h) {
                    out.push(h);
                    stack.push(h);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Checks that every interval of length two has exactly two middle elements.
    pub fn has_diamond_property(&self) -> bool {
        for g in 0..self.len() as FaceId {
            if self.rank(g) < 2 {
                continue;
            }
            let mut count: HashMap<FaceId, u32> = HashMap::new();
            for &h in self.facets(g) {
                for &k in self.facets(h) {
                    *count.entry(k).or_default() += 1;
                }
            }
            if count.values().any(|&c| c != 2) {
                return false;
            }
        }
        true
    }

    fn compute_incidence(&self) -> Result<Vec<Vec<i8>>, ComplexError> {
        let mut inc: Vec<Vec<i8>> = self.down.iter().map(|d| vec![0i8; d.len()]).collect();
        let max_rank = self.by_rank.len() - 1;
        for r in 1..=max_rank {
            for &g in &self.by_rank[r] {
                let gi = g as usize;
                let facets = &self.down[gi];
                if r == 1 {
                    if facets.len() != 2 {
                        return Err(ComplexError::Invalid(format!(
                            "edge {g} has {} endpoints",
                            facets.len()
                        )));
                    }
                    inc[gi][0] = -1;
                    inc[gi][1] = 1;
                    continue;
                }
                // propagate through ridges: [G:H][H:R] + [G:H'][H':R] = 0
                let mut ridge_owners: HashMap<FaceId, Vec<usize>> = HashMap::new();
                for (pos, &h) in facets.iter().enumerate() {
                    for &k in &self.down[h as usize] {
                        ridge_owners.entry(k).or_default().push(pos);
                    }
                }
                let mut sign = vec![0i8; facets.len()];
                sign[0] = 1;
                let mut stack = vec![0usize];
                while let Some(pos) = stack.pop() {
                    let h = facets[pos];
                    for (kpos, &k) in self.down[h as usize].iter().enumerate() {
                        let owners = &ridge_owners[&k];
                        if owners.len() != 2 {
                            return Err(ComplexError::Invalid(format!(
                                "ridge {k} of face {g} lies in {} facets",
                                owners.len()
                            )));
                        }
                        let other = if owners[0] == pos { owners[1] } else { owners[0] };
                        let h_r = inc[h as usize][kpos];
                        let o_r = self.incidence_in(&inc, facets[other], k);
                        let want = -sign[pos] * h_r * o_r;
                        if sign[other] == 0 {
                            sign[other] = want;
                            stack.push(other);
                        } else if sign[other] != want {
                            return Err(ComplexError::Invalid(format!(
                                "face {g} is not orientable"
                            )));
                        }
                    }
                }
                if sign.contains(&0) {
                    return Err(ComplexError::Invalid(format!(
                        "facets of face {g} are not connected through ridges"
                    )));
                }
                inc[gi] = sign;
            }
        }
        Ok(inc)
    }

    fn incidence_in(&self, inc: &[Vec<i8>], g: FaceId, h: FaceId) -> i8 {
        let pos = self.down[g as usize]
            .binary_search(&h)
            .expect("ridge lies in facet");
        inc[g as usize][pos]
    }

    fn compute_slots_above(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.len()];
        for (slot, &f) in self.down[self.top as usize].iter().enumerate() {
            for g in self.down_closure(f) {
                out[g as usize].push(slot as u32);
            }
        }
        out
    }

    /// Truncates the given rank-0 faces.
    ///
    /// Each truncated vertex `v` is replaced by a new facet whose faces are the
    /// pairs `(v, G)` for faces `G > v` (rank drops by one); every other face `G`
    /// survives as its truncation. The vertices of the result are the surviving
    /// vertices plus one vertex `(v, e)` per edge `e` at a truncated vertex.
    pub fn truncate(&self, ideal: &[FaceId]) -> Result<Truncation, ComplexError> {
        let is_ideal = |f: FaceId| ideal.contains(&f);
        for &v in ideal {
            if self.rank(v) != 0 {
                return Err(ComplexError::Invalid("only vertices can be truncated".into()));
            }
        }
        // new vertices
        let mut new_vertex: HashMap<(FaceId, FaceId), u32> = HashMap::new(); // (v or MAX, edge or v)
        let mut count = 0u32;
        let mut faces: Vec<(u8, Vec<u32>)> = Vec::new();
        for &v in self.faces_of_rank(0) {
            if !is_ideal(v) {
                new_vertex.insert((u32::MAX, v), count);
                faces.push((0, vec![count]));
                count += 1;
            }
        }
        for &v in ideal {
            for &e in self.cofacets(v) {
                new_vertex.insert((v, e), count);
                faces.push((0, vec![count]));
                count += 1;
            }
        }
        let mut origin = Vec::new();
        for _ in 0..faces.len() {
            origin.push(TruncatedFace::Vertex); // placeholder, fixed below
        }
        // fix vertex origins
        let mut vertex_origin = vec![TruncatedFace::Vertex; count as usize];
        for (&(v, e), &id) in &new_vertex {
            vertex_origin[id as usize] = if v == u32::MAX {
                TruncatedFace::Original(e)
            } else {
                TruncatedFace::Cut { vertex: v, face: e }
            };
        }
        origin.clear();
        origin.extend(vertex_origin);
        for g in 0..self.len() as FaceId {
            if self.rank(g) == 0 {
                continue;
            }
            let mut vs = Vec::new();
            for &w in self.vertices(g) {
                if !is_ideal(w) {
                    vs.push(new_vertex[&(u32::MAX, w)]);
                }
            }
            for &v in ideal {
                if self.vertices(g).contains(&v) {
                    for &e in self.cofacets(v) {
                        if self.le(e, g) {
                            vs.push(new_vertex[&(v, e)]);
                        }
                    }
                }
            }
            faces.push((self.rank(g) as u8, vs));
            origin.push(TruncatedFace::Original(g));
            for &v in ideal {
                if self.rank(g) >= 2 && self.vertices(g).contains(&v) {
                    let mut cut = Vec::new();
                    for &e in self.cofacets(v) {
                        if self.le(e, g) {
                            cut.push(new_vertex[&(v, e)]);
                        }
                    }
                    faces.push((self.rank(g) as u8 - 1, cut));
                    origin.push(TruncatedFace::Cut { vertex: v, face: g });
                }
            }
        }
        // from_faces reorders; recover origin by vertex set
        let keyed: Vec<(Vec<u32>, TruncatedFace)> = faces
            .iter()
            .zip(origin.iter())
            .map(|((_, vs), o)| {
                let mut s = vs.clone();
                s.sort_unstable();
                (s, *o)
            })
            .collect();
        let lattice = Lattice::from_faces(faces)?;
        // from_faces renumbers vertices too; map input vertex numbering to output ids
        let mut vmap = vec![0u32; count as usize];
        for &v in lattice.faces_of_rank(0) {
            // rank-0 faces are sorted by their input vertex id, which is their input position
            vmap[lattice.faces_of_rank(0).iter().position(|&x| x == v).unwrap()] = v;
        }
        let mut origin_of = vec![TruncatedFace::Vertex; lattice.len()];
        let mut from_original = vec![None; self.len()];
        let mut from_cut = HashMap::new();
        for (vs, o) in keyed {
            let mapped: Vec<u32> = {
                let mut m: Vec<u32> = vs.iter().map(|&x| vmap[x as usize]).collect();
                m.sort_unstable();
                m
            };
            let id = lattice
                .find(&mapped)
                .ok_or_else(|| ComplexError::Invalid("truncated face lost".into()))?;
            origin_of[id as usize] = o;
            match o {
                TruncatedFace::Original(g) => from_original[g as usize] = Some(id),
                TruncatedFace::Cut { vertex, face } => {
                    from_cut.insert((vertex, face), id);
                }
                TruncatedFace::Vertex => {}
            }
        }
        Ok(Truncation {
            lattice,
            origin: origin_of,
            from_original,
            from_cut,
        })
    }
}

/// Where a face of a truncated lattice comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TruncatedFace {
    Vertex,
    /// The truncation of an original face of rank at least 1 (or a surviving vertex).
    Original(FaceId),
    /// The face cut off face `face` near truncated vertex `vertex`.
    Cut { vertex: FaceId, face: FaceId },
}

#[derive(Clone, Debug)]
pub struct Truncation {
    pub lattice: Lattice,
    pub origin: Vec<TruncatedFace>,
    pub from_original: Vec<Option<FaceId>>,
    pub from_cut: HashMap<(FaceId, FaceId), FaceId>,
}

impl Truncation {
    /// Transports a face map of the original lattice (preserving the truncated
    /// vertex set) to the truncated lattices.
    pub fn induced_map(&self, target: &Truncation, map: &[FaceId]) -> Vec<FaceId> {
        self.origin
            .iter()
            .map(|o| match *o {
                TruncatedFace::Original(g) => target.from_original[map[g as usize] as usize]
                    .expect("map preserves real faces"),
                TruncatedFace::Cut { vertex, face } => target.from_cut
                    [&(map[vertex as usize], map[face as usize])],
                TruncatedFace::Vertex => unreachable!("every face has an origin"),
            })
            .collect()
    }
}

pub(crate) fn is_subset(a: &[u32], b: &[u32]) -> bool {
    // both sorted
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

/// A bijection between the faces of two lattices, with orientation signs.
///
/// `sign[g]` is `+1` when the map carries the reference orientation of `g` to
/// the reference orientation of its image, `-1` otherwise.
#[derive(Clone, Debug)]
pub struct FaceMap {
    pub map: Vec<FaceId>,
    pub sign: Vec<i8>,
    pub identity: bool,
}

impl FaceMap {
    pub fn new(src: &Lattice, dst: &Lattice, map: Vec<FaceId>) -> Result<Self, ComplexError> {
        if map.len() != src.len() {
            return Err(ComplexError::Invalid("face map has the wrong length".into()));
        }
        let identity = map.iter().enumerate().all(|(i, &m)| i as u32 == m);
        let mut sign = vec![0i8; src.len()];
        for r in 0..=src.dim() {
            for &g in src.faces_of_rank(r) {
                let mg = map[g as usize];
                if dst.rank(mg) != r {
                    return Err(ComplexError::Invalid("face map does not preserve rank".into()));
                }
                if r == 0 {
                    sign[g as usize] = 1;
                    continue;
                }
                let h = src.facets(g)[0];
                let mh = map[h as usize];
                let target = dst.incidence(mg, mh);
                if target == 0 {
                    return Err(ComplexError::Invalid("face map does not preserve incidence".into()));
                }
                sign[g as usize] = target * sign[h as usize] * src.incidences(g)[0];
            }
        }
        Ok(FaceMap { map, sign, identity })
    }

    pub fn identity(lat: &Lattice) -> Self {
        FaceMap {
            map: (0..lat.len() as u32).collect(),
            sign: vec![1; lat.len()],
            identity: true,
        }
    }

    /// Builds the face map induced by a bijection of rank-0 faces.
    pub fn from_vertex_map(
        src: &Lattice,
        dst: &Lattice,
        vertex_map: impl Fn(FaceId) -> FaceId,
    ) -> Result<Self, ComplexError> {
        let mut map = Vec::with_capacity(src.len());
        for g in 0..src.len() as FaceId {
            let mut vs: Vec<u32> = src.vertices(g).iter().map(|&v| vertex_map(v)).collect();
            vs.sort_unstable();
            let img = dst
                .find(&vs)
                .ok_or_else(|| ComplexError::Invalid("vertex map does not carry faces to faces".into()))?;
            map.push(img);
        }
        FaceMap::new(src, dst, map)
    }

    pub fn apply(&self, f: FaceId) -> FaceId {
        self.map[f as usize]
    }

    pub fn inverse(&self, src: &Lattice, dst: &Lattice) -> Result<Self, ComplexError> {
        let mut inv = vec![0u32; self.map.len()];
        for (i, &m) in self.map.iter().enumerate() {
            inv[m as usize] = i as u32;
        }
        FaceMap::new(dst, src, inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boundary_squared_vanishes(l: &Lattice) -> bool {
        for g in 0..l.len() as FaceId {
            let mut acc: HashMap<FaceId, i32> = HashMap::new();
            for (&h, &a) in l.facets(g).iter().zip(l.incidences(g)) {
                for (&k, &b) in l.facets(h).iter().zip(l.incidences(h)) {
                    *acc.entry(k).or_default() += (a * b) as i32;
                }
            }
            if acc.values().any(|&v| v != 0) {
                return false;
            }
        }
        true
    }

    #[test]
    fn simplex_lattice_counts() {
        let l = Lattice::simplex(4);
        assert_eq!(l.f_vector(), vec![5, 10, 10, 5, 1]);
        assert!(l.has_diamond_property());
        assert!(boundary_squared_vanishes(&l));
        assert_eq!(l.top_facets().len(), 5);
    }

    #[test]
    fn square_lattice() {
        // vertices 0..4 around a square, edges 01,12,23,30
        let faces = vec![
            (0, vec![0]),
            (0, vec![1]),
            (0, vec![2]),
            (0, vec![3]),
            (1, vec![0, 1]),
            (1, vec![1, 2]),
            (1, vec![2, 3]),
            (1, vec![0, 3]),
            (2, vec![0, 1, 2, 3]),
        ];
        let l = Lattice::from_faces(faces).unwrap();
        assert!(boundary_squared_vanishes(&l));
        assert_eq!(l.dim(), 2);
    }

    #[test]
    fn truncated_triangle_is_hexagon() {
        let l = Lattice::simplex(2);
        let ideal: Vec<u32> = l.faces_of_rank(0).to_vec();
        let t = l.truncate(&ideal).unwrap();
        assert_eq!(t.lattice.f_vector(), vec![6, 6, 1]);
        assert!(boundary_squared_vanishes(&t.lattice));
    }

    #[test]
    fn truncated_tetrahedron_counts() {
        let l = Lattice::simplex(3);
        let ideal = vec![l.faces_of_rank(0)[0]];
        let t = l.truncate(&ideal).unwrap();
        // one corner cut: 3 + 3 vertices, 3 + 6 edges... triangle cap
        assert_eq!(t.lattice.f_vector(), vec![6, 9, 5, 1]);
        assert!(boundary_squared_vanishes(&t.lattice));
        assert!(t.lattice.has_diamond_property());
    }

    #[test]
    fn face_map_signs_of_transposition() {
        let l = Lattice::simplex(2);
        let swap = FaceMap::from_vertex_map(&l, &l, |v| match v {
            0 => 1,
            1 => 0,
            x => x,
        })
        .unwrap();
        assert_eq!(swap.sign[l.top() as usize], -1);
        let id = FaceMap::from_vertex_map(&l, &l, |v| v).unwrap();
        assert!(id.identity);
        assert!(id.sign.iter().all(|&s| s == 1));
    }
}
