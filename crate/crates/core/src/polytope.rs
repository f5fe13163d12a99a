//! The right-angled polytope with 16 facets `{x : <f, x> <= 1}` for the even
//! sign vectors `f`, its vertices, face lattice and symmetry groups.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde_json::{json, Value};

use crate::error::{ComplexError, Error, ParseError};
use crate::lattice::{FaceId, FaceMap, Lattice, Truncation};

pub const DIM: usize = 5;
pub const FACET_COUNT: usize = 16;
pub const VERTEX_COUNT: usize = 26;
pub const IDEAL_COUNT: usize = 10;

/// A ±1 five-vector with an even number of minus signs.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SignVector([i8; DIM]);

impl SignVector {
    pub fn new(entries: [i8; DIM]) -> Result<Self, Error> {
        if entries.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::Verification("sign vector entries must be ±1".into()));
        }
        if entries.iter().filter(|&&e| e < 0).count() % 2 != 0 {
            return Err(Error::Verification(
                "sign vector must have an even number of minus signs".into(),
            ));
        }
        Ok(SignVector(entries))
    }

    pub fn entries(&self) -> [i8; DIM] {
        self.0
    }

    pub fn get(&self, k: usize) -> i8 {
        self.0[k]
    }

    /// Position in the lexicographic order (with −1 < +1).
    pub fn index(&self) -> usize {
        (0..4).fold(0, |acc, k| (acc << 1) | usize::from(self.0[k] > 0))
    }

    pub fn from_index(i: usize) -> Self {
        let mut e = [0i8; DIM];
        let mut minus = 0;
        for (k, slot) in e.iter_mut().take(4).enumerate() {
            *slot = if i & (1 << (3 - k)) != 0 { 1 } else { -1 };
            if *slot < 0 {
                minus += 1;
            }
        }
        e[4] = if minus % 2 == 0 { 1 } else { -1 };
        SignVector(e)
    }

    pub fn differences(&self, other: &SignVector) -> usize {
        (0..DIM).filter(|&k| self.0[k] != other.0[k]).count()
    }

    /// Negates the first four coordinates.
    pub fn quaternion_flip(&self) -> SignVector {
        let mut e = self.0;
        for x in e.iter_mut().take(4) {
            *x = -*x;
        }
        SignVector(e)
    }
}

fn sign_string(e: &[i8]) -> String {
    e.iter().map(|&x| if x > 0 { '+' } else { '-' }).collect()
}

fn parse_signs(s: &str) -> Option<[i8; DIM]> {
    let chars: Vec<char> = s.trim().chars().collect();
    if chars.len() != DIM {
        return None;
    }
    let mut e = [0i8; DIM];
    for (k, c) in chars.iter().enumerate() {
        e[k] = match c {
            '+' => 1,
            '-' => -1,
            _ => return None,
        };
    }
    Some(e)
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&sign_string(&self.0))
    }
}

impl FromStr for SignVector {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let e = parse_signs(s)
            .ok_or_else(|| ParseError::new(0, format!("bad sign vector '{s}'")))?;
        SignVector::new(e).map_err(|_| ParseError::new(0, format!("'{s}' has an odd minus count")))
    }
}

/// Ideal vertices `±e_i` and real vertices `η/3` (η with an odd minus count).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum PolytopeVertex {
    Ideal { axis: u8, sign: i8 },
    Real([i8; DIM]),
}

impl PolytopeVertex {
    /// Ideal vertices first (`+e1, −e1, +e2, …`), then real ones lexicographically.
    pub fn index(&self) -> usize {
        match *self {
            PolytopeVertex::Ideal { axis, sign } => 2 * axis as usize + usize::from(sign < 0),
            PolytopeVertex::Real(e) => {
                IDEAL_COUNT + (0..4).fold(0, |acc, k| (acc << 1) | usize::from(e[k] > 0))
            }
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i < IDEAL_COUNT {
            PolytopeVertex::Ideal {
                axis: (i / 2) as u8,
                sign: if i.is_multiple_of(2) { 1 } else { -1 },
            }
        } else {
            let even = SignVector::from_index(i - IDEAL_COUNT).entries();
            let mut e = even;
            e[4] = -e[4];
            PolytopeVertex::Real(e)
        }
    }

    pub fn is_ideal(&self) -> bool {
        matches!(self, PolytopeVertex::Ideal { .. })
    }

    pub fn is_incident(&self, f: &SignVector) -> bool {
        match *self {
            PolytopeVertex::Ideal { axis, sign } => f.get(axis as usize) == sign,
            PolytopeVertex::Real(e) => {
                (0..DIM).map(|k| i32::from(e[k]) * i32::from(f.get(k))).sum::<i32>() == 3
            }
        }
    }
}

impl fmt::Display for PolytopeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PolytopeVertex::Ideal { axis, sign } => {
                write!(f, "{}e{}", if sign > 0 { '+' } else { '-' }, axis + 1)
            }
            PolytopeVertex::Real(e) => write!(f, "{}/3", sign_string(&e)),
        }
    }
}

/// The map `y_k = eps_k · x_{sigma(k)}` with an even number of negative `eps_k`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SignedPermutation {
    sigma: [u8; DIM],
    eps: [i8; DIM],
}

impl SignedPermutation {
    pub fn new(sigma: [u8; DIM], eps: [i8; DIM]) -> Result<Self, Error> {
        let mut seen = [false; DIM];
        for &s in &sigma {
            if s as usize >= DIM || seen[s as usize] {
                return Err(Error::Verification("sigma is not a permutation".into()));
            }
            seen[s as usize] = true;
        }
        if eps.iter().any(|&e| e != 1 && e != -1) || eps.iter().filter(|&&e| e < 0).count() % 2 != 0 {
            return Err(Error::Verification(
                "signs must be ±1 with an even number of minus signs".into(),
            ));
        }
        Ok(SignedPermutation { sigma, eps })
    }

    pub fn identity() -> Self {
        SignedPermutation {
            sigma: [0, 1, 2, 3, 4],
            eps: [1; DIM],
        }
    }

    pub fn sigma(&self) -> [u8; DIM] {
        self.sigma
    }

    pub fn eps(&self) -> [i8; DIM] {
        self.eps
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn apply(&self, x: [i8; DIM]) -> [i8; DIM] {
        let mut y = [0i8; DIM];
        for k in 0..DIM {
            y[k] = self.eps[k] * x[self.sigma[k] as usize];
        }
        y
    }

    pub fn apply_facet(&self, f: SignVector) -> SignVector {
        SignVector(self.apply(f.0))
    }

    pub fn apply_vertex(&self, v: PolytopeVertex) -> PolytopeVertex {
        match v {
            PolytopeVertex::Ideal { axis, sign } => {
                let k = self.sigma.iter().position(|&s| s == axis).expect("permutation");
                PolytopeVertex::Ideal {
                    axis: k as u8,
                    sign: sign * self.eps[k],
                }
            }
            PolytopeVertex::Real(e) => PolytopeVertex::Real(self.apply(e)),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SignedPermutation) -> SignedPermutation {
        let mut sigma = [0u8; DIM];
        let mut eps = [0i8; DIM];
        for k in 0..DIM {
            let j = self.sigma[k] as usize;
            sigma[k] = other.sigma[j];
            eps[k] = self.eps[k] * other.eps[j];
        }
        SignedPermutation { sigma, eps }
    }

    pub fn inverse(&self) -> SignedPermutation {
        let mut sigma = [0u8; DIM];
        let mut eps = [0i8; DIM];
        for k in 0..DIM {
            let j = self.sigma[k] as usize;
            sigma[j] = k as u8;
            eps[j] = self.eps[k];
        }
        SignedPermutation { sigma, eps }
    }

    /// Builds the isometry carrying facet `from` to facet `to` that moves
    /// coordinate `j` to position `perm[j]` (a five-digit, 1-based string).
    pub fn from_axis_string(perm: &str, from: SignVector, to: SignVector) -> Result<Self, Error> {
        let digits: Vec<u32> = perm
            .trim()
            .chars()
            .map(|c| c.to_digit(10).unwrap_or(0))
            .collect();
        if digits.len() != DIM || digits.iter().any(|&d| d == 0 || d as usize > DIM) {
            return Err(Error::Verification(format!("bad axis permutation '{perm}'")));
        }
        let mut sigma = [0u8; DIM];
        let mut seen = [false; DIM];
        for (j, &d) in digits.iter().enumerate() {
            let target = d as usize - 1;
            if seen[target] {
                return Err(Error::Verification(format!("bad axis permutation '{perm}'")));
            }
            seen[target] = true;
            sigma[target] = j as u8;
        }
        let mut eps = [0i8; DIM];
        for k in 0..DIM {
            eps[k] = to.get(k) * from.get(sigma[k] as usize);
        }
        SignedPermutation::new(sigma, eps)
    }

    /// The inverse of [`SignedPermutation::from_axis_string`]'s permutation part.
    pub fn axis_string(&self) -> String {
        let mut out = [0u8; DIM];
        for k in 0..DIM {
            out[self.sigma[k] as usize] = k as u8 + 1;
        }
        out.iter().map(|d| char::from(b'0' + d)).collect()
    }
}

impl fmt::Display for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for k in 0..DIM {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(
                f,
                "{}x{}",
                if self.eps[k] > 0 { "" } else { "-" },
                self.sigma[k] + 1
            )?;
        }
        write!(f, ")")
    }
}

/// Named generators of the order-16 subgroup.
pub fn r16_generators() -> Vec<(&'static str, SignedPermutation)> {
    let p = |s: [u8; DIM], e: [i8; DIM]| SignedPermutation::new(s, e).expect("valid generator");
    vec![
        ("L-1", p([0, 1, 2, 3, 4], [-1, -1, -1, -1, 1])),
        ("Li", p([1, 0, 3, 2, 4], [-1, 1, -1, 1, 1])),
        ("Lj", p([2, 3, 0, 1, 4], [-1, 1, 1, -1, 1])),
        ("Lk", p([3, 2, 1, 0, 4], [-1, -1, 1, 1, 1])),
        ("iota", p([0, 1, 3, 2, 4], [1, -1, -1, -1, -1])),
    ]
}

/// The quaternion subgroup: left multiplications by ±1, ±i, ±j, ±k.
pub fn quaternion_elements() -> Vec<SignedPermutation> {
    let gens = r16_generators();
    let minus = gens[0].1;
    let mut out = vec![SignedPermutation::identity(), minus];
    for (_, g) in &gens[1..4] {
        out.push(*g);
        out.push(minus.compose(g));
    }
    out.sort();
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub rank: usize,
    pub facets: Vec<SignVector>,
    pub vertices: Vec<PolytopeVertex>,
}

#[derive(Clone, Debug)]
pub struct IdealLink {
    pub vertex: PolytopeVertex,
    pub facets: Vec<SignVector>,
    /// Index pairs into `facets` of opposite (non-adjacent) cube facets.
    pub opposite: Vec<(usize, usize)>,
}

pub struct Polytope {
    facets: Vec<SignVector>,
    vertices: Vec<PolytopeVertex>,
    vertex_facets: Vec<u16>,
    lattice: Lattice,
    face_facets: Vec<u16>,
    by_facets: HashMap<u16, FaceId>,
    isometries: Vec<SignedPermutation>,
    r16: Vec<SignedPermutation>,
    truncated: OnceLock<Truncation>,
}

static POLYTOPE: OnceLock<Polytope> = OnceLock::new();

/// The shared polytope instance.
pub fn polytope() -> &'static Polytope {
    POLYTOPE.get_or_init(|| Polytope::build().expect("polytope construction"))
}

impl Polytope {
    fn build() -> Result<Self, ComplexError> {
        let facets = enumerate_facets();
        let vertices = enumerate_vertices();
        let vertex_facets: Vec<u16> = vertices
            .iter()
            .map(|v| {
                facets
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| v.is_incident(f))
                    .fold(0u16, |m, (i, _)| m | (1 << i))
            })
            .collect();
        let masks = galois_closure(&vertex_facets);
        let ranks = rank_by_chains(&masks);
        let faces: Vec<(u8, Vec<u32>)> = masks
            .iter()
            .zip(&ranks)
            .map(|(&m, &r)| (r, (0..VERTEX_COUNT as u32).filter(|&v| m & (1 << v) != 0).collect()))
            .collect();
        let lattice = Lattice::from_faces(faces)?;
        let face_facets: Vec<u16> = (0..lattice.len() as FaceId)
            .map(|g| {
                if g == lattice.top() {
                    0
                } else {
                    lattice
                        .vertices(g)
                        .iter()
                        .fold(u16::MAX, |m, &v| m & vertex_facets[v as usize])
                }
            })
            .collect();
        let by_facets = face_facets
            .iter()
            .enumerate()
            .map(|(g, &m)| (m, g as FaceId))
            .collect();
        let isometries = enumerate_isometries();
        let r16 = generate_group(&r16_generators().iter().map(|(_, g)| *g).collect::<Vec<_>>());
        Ok(Polytope {
            facets,
            vertices,
            vertex_facets,
            lattice,
            face_facets,
            by_facets,
            isometries,
            r16,
            truncated: OnceLock::new(),
        })
    }

    pub fn facets(&self) -> &[SignVector] {
        &self.facets
    }

    pub fn vertices(&self) -> &[PolytopeVertex] {
        &self.vertices
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn isometries(&self) -> &[SignedPermutation] {
        &self.isometries
    }

    pub fn r16(&self) -> &[SignedPermutation] {
        &self.r16
    }

    /// Facets containing a vertex, as a bitmask over facet indices.
    pub fn vertex_facet_mask(&self, v: usize) -> u16 {
        self.vertex_facets[v]
    }

    pub fn incidence(&self) -> Vec<Vec<bool>> {
        self.vertex_facets
            .iter()
            .map(|&m| (0..FACET_COUNT).map(|i| m & (1 << i) != 0).collect())
            .collect()
    }

    /// Facets containing a face, as a bitmask over facet indices (0 for the top face).
    pub fn face_facet_mask(&self, g: FaceId) -> u16 {
        self.face_facets[g as usize]
    }

    pub fn face(&self, g: FaceId) -> Face {
        let m = self.face_facets[g as usize];
        Face {
            rank: self.lattice.rank(g),
            facets: (0..FACET_COUNT)
                .filter(|i| m & (1 << i) != 0)
                .map(|i| self.facets[i])
                .collect(),
            vertices: self
                .lattice
                .vertices(g)
                .iter()
                .map(|&v| self.vertices[v as usize])
                .collect(),
        }
    }

    /// The face whose set of containing facets is exactly `mask`.
    pub fn face_with_facets(&self, mask: u16) -> Option<FaceId> {
        self.by_facets.get(&mask).copied()
    }

    pub fn facet_face(&self, f: SignVector) -> FaceId {
        self.by_facets[&(1u16 << f.index())]
    }

    /// The rank-4 lattice face back to its facet.
    pub fn face_as_facet(&self, g: FaceId) -> Option<SignVector> {
        let m = self.face_facets[g as usize];
        if self.lattice.rank(g) == 4 && m.count_ones() == 1 {
            Some(self.facets[m.trailing_zeros() as usize])
        } else {
            None
        }
    }

    pub fn ridge(&self, f: SignVector, g: SignVector) -> Option<FaceId> {
        if !are_adjacent(f, g) {
            return None;
        }
        self.face_with_facets((1 << f.index()) | (1 << g.index()))
    }

    pub fn is_ideal_face(&self, g: FaceId) -> bool {
        self.lattice.rank(g) == 0 && (g as usize) < IDEAL_COUNT
    }

    pub fn ideal_vertex_faces(&self) -> Vec<FaceId> {
        (0..IDEAL_COUNT as FaceId).collect()
    }

    pub fn f_vector(&self) -> Vec<usize> {
        let mut f = self.lattice.f_vector();
        f.pop();
        f
    }

    /// The lattice automorphism induced by an isometry.
    pub fn face_map(&self, g: &SignedPermutation) -> FaceMap {
        FaceMap::from_vertex_map(&self.lattice, &self.lattice, |v| {
            g.apply_vertex(self.vertices[v as usize]).index() as FaceId
        })
        .expect("isometries preserve the face lattice")
    }

    /// The polytope with every ideal vertex cut off.
    pub fn truncated(&self) -> &Truncation {
        self.truncated.get_or_init(|| {
            self.lattice
                .truncate(&self.ideal_vertex_faces())
                .expect("truncation of the polytope")
        })
    }

    pub fn ideal_vertex_link(&self, v: PolytopeVertex) -> Result<IdealLink, Error> {
        if !v.is_ideal() {
            return Err(Error::NotIdeal(v.to_string()));
        }
        let facets: Vec<SignVector> = self
            .facets
            .iter()
            .copied()
            .filter(|f| v.is_incident(f))
            .collect();
        let mut opposite = Vec::new();
        for i in 0..facets.len() {
            let non_adjacent: Vec<usize> = (0..facets.len())
                .filter(|&j| j != i && !are_adjacent(facets[i], facets[j]))
                .collect();
            if non_adjacent.len() != 1 {
                return Err(Error::Verification(format!(
                    "link of {v} is not a 4-cube: facet {} has {} opposite facets",
                    facets[i],
                    non_adjacent.len()
                )));
            }
            if i < non_adjacent[0] {
                opposite.push((i, non_adjacent[0]));
            }
        }
        if facets.len() != 8 || opposite.len() != 4 {
            return Err(Error::Verification(format!("link of {v} is not a 4-cube")));
        }
        Ok(IdealLink {
            vertex: v,
            facets,
            opposite,
        })
    }

    pub fn to_json(&self) -> Value {
        let faces: Vec<Value> = (0..self.lattice.len() as FaceId)
            .filter(|&g| g != self.lattice.top())
            .map(|g| {
                let m = self.face_facets[g as usize];
                json!({
                    "rank": self.lattice.rank(g),
                    "vertices": self.lattice.vertices(g),
                    "facets": (0..FACET_COUNT).filter(|i| m & (1 << i) != 0).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "facets": self.facets.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            "vertices": self.vertices.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "incidence": self.vertex_facets.iter().map(|&m| {
                (0..FACET_COUNT).filter(|i| m & (1 << i) != 0).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
            "f_vector": self.f_vector(),
            "faces": faces,
        })
    }
}

pub fn enumerate_facets() -> Vec<SignVector> {
    (0..FACET_COUNT).map(SignVector::from_index).collect()
}

pub fn enumerate_vertices() -> Vec<PolytopeVertex> {
    (0..VERTEX_COUNT).map(PolytopeVertex::from_index).collect()
}

pub fn are_adjacent(f: SignVector, g: SignVector) -> bool {
    f.differences(&g) == 2
}

fn enumerate_isometries() -> Vec<SignedPermutation> {
    let mut out = Vec::with_capacity(1920);
    for sigma in permutations(DIM) {
        for f in enumerate_facets() {
            let s: [u8; DIM] = std::array::from_fn(|k| sigma[k] as u8);
            out.push(SignedPermutation::new(s, f.entries()).expect("even signs"));
        }
    }
    out.sort();
    out
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    heap_permute(n, &mut cur, &mut out);
    out.sort();
    out
}

fn heap_permute(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(a.clone());
        return;
    }
    for i in 0..k - 1 {
        heap_permute(k - 1, a, out);
        if k.is_multiple_of(2) {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
    }
    heap_permute(k - 1, a, out);
}

/// Closure of a generating set under composition, sorted.
pub fn generate_group(gens: &[SignedPermutation]) -> Vec<SignedPermutation> {
    let mut elems = vec![SignedPermutation::identity()];
    let mut seen: std::collections::HashSet<SignedPermutation> = elems.iter().copied().collect();
    let mut i = 0;
    while i < elems.len() {
        let x = elems[i];
        for g in gens {
            let y = g.compose(&x);
            if seen.insert(y) {
                elems.push(y);
            }
        }
        i += 1;
    }
    elems.sort();
    elems
}

/// All proper faces as vertex bitmasks, plus the whole polytope.
fn galois_closure(vertex_facets: &[u16]) -> Vec<u32> {
    let n = vertex_facets.len();
    let closure = |vmask: u32| -> (u32, u16) {
        let fmask = (0..n)
            .filter(|&v| vmask & (1 << v) != 0)
            .fold(u16::MAX, |m, v| m & vertex_facets[v]);
        let verts = (0..n)
            .filter(|&v| vertex_facets[v] & fmask == fmask)
            .fold(0u32, |m, v| m | (1 << v));
        (verts, fmask)
    };
    let mut seen = std::collections::HashSet::new();
    let mut stack = Vec::new();
    for v in 0..n {
        let (c, _) = closure(1 << v);
        if seen.insert(c) {
            stack.push(c);
        }
    }
    while let Some(a) = stack.pop() {
        for w in 0..n {
            if a & (1 << w) != 0 {
                continue;
            }
            let (c, fmask) = closure(a | (1 << w));
            if fmask != 0 && seen.insert(c) {
                stack.push(c);
            }
        }
    }
    let mut out: Vec<u32> = seen.into_iter().collect();
    out.push((1u32 << n) - 1);
    out.sort_by_key(|m| (m.count_ones(), *m));
    out
}

fn rank_by_chains(masks: &[u32]) -> Vec<u8> {
    // masks sorted by size, so every proper subface precedes its superfaces
    let mut rank = vec![0u8; masks.len()];
    for i in 0..masks.len() {
        let mut best: Option<u8> = None;
        for j in 0..i {
            if masks[j] != masks[i] && masks[j] & masks[i] == masks[j] {
                best = Some(best.map_or(rank[j], |b| b.max(rank[j])));
            }
        }
        rank[i] = best.map_or(0, |b| b + 1);
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn facet_index_roundtrip() {
        for (i, f) in enumerate_facets().iter().enumerate() {
            assert_eq!(f.index(), i);
        }
        let mut sorted = enumerate_facets();
        sorted.sort();
        assert_eq!(sorted, enumerate_facets());
    }

    #[test]
    fn vertex_index_roundtrip() {
        for (i, v) in enumerate_vertices().iter().enumerate() {
            assert_eq!(v.index(), i);
        }
    }

    #[test]
    fn parse_and_print() {
        let f: SignVector = "+-++-".parse().unwrap();
        assert_eq!(f.to_string(), "+-++-");
        assert!("-++++".parse::<SignVector>().is_err());
        assert!("+-+".parse::<SignVector>().is_err());
    }

    #[test]
    fn compose_and_inverse() {
        let p = polytope();
        let g = p.isometries()[777];
        let h = p.isometries()[1234];
        let x = [1, -1, 1, 1, -1];
        assert_eq!(g.compose(&h).apply(x), g.apply(h.apply(x)));
        assert!(g.compose(&g.inverse()).is_identity());
    }

    #[test]
    fn axis_string_roundtrip() {
        let from: SignVector = "----+".parse().unwrap();
        let to: SignVector = "-+++-".parse().unwrap();
        let g = SignedPermutation::from_axis_string("13245", from, to).unwrap();
        assert_eq!(g.apply_facet(from), to);
        assert_eq!(g.axis_string(), "13245");
    }

    #[test]
    fn face_lattice_shape() {
        let p = polytope();
        assert_eq!(p.f_vector(), vec![26, 120, 160, 80, 16]);
        assert!(p.lattice().has_diamond_property());
    }

    #[test]
    fn isometries_act_on_faces() {
        let p = polytope();
        let g = p.isometries()[999];
        let m = p.face_map(&g);
        for f in p.facets() {
            let img = m.apply(p.facet_face(*f));
            assert_eq!(p.face_as_facet(img), Some(g.apply_facet(*f)));
        }
    }
}
