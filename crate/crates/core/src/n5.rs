//! The two-copy manifold: assembly from a facet pairing table, the quotient
//! of the infinite cyclic cover by the group generated by state-preserving
//! symmetries, and isomorphism signatures of polytopal complexes.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cells::{CellComplex, FaceClasses, Glue};
use crate::coloring::{Color, Coloring};
use crate::complex::{Gluing, PolytopalComplex};
use crate::error::{Error, Result};
use crate::lattice::{FaceId, FaceMap};
use crate::polytope::{enumerate_facets, polytope, SignVector, SignedPermutation, FACET_COUNT};
use crate::states::{assign_states, initial_state, CopyLabel, MoveSet, State, Status};

const STANDARD_TABLE: &str = include_str!("../data/n5_pairing.csv");

#[derive(Clone, Debug, PartialEq, Eq, Deserialize, Serialize)]
struct RawRow {
    copy: String,
    facet: String,
    status: String,
    to_copy: String,
    to_facet: String,
    perm: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingRow {
    pub copy: String,
    pub facet: SignVector,
    pub status: Status,
    pub to_copy: String,
    pub to_facet: SignVector,
    /// Five-digit axis permutation.
    pub perm: String,
}

/// Facet pairing of copies of the polytope, with statuses, one row per facet
/// of every copy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingTable {
    pub rows: Vec<PairingRow>,
}

impl PairingTable {
    /// Reads CSV with header `copy,facet,status,to_copy,to_facet,perm`; row
    /// numbers in errors count data rows from 1.
    pub fn parse(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for (i, rec) in reader.deserialize::<RawRow>().enumerate() {
            let row = i + 1;
            let err = |message: String| Error::Table { row, message };
            let raw = rec.map_err(|e| err(e.to_string()))?;
            let facet: SignVector = raw.facet.parse().map_err(|e| err(format!("facet: {e}")))?;
            let to_facet: SignVector = raw.to_facet.parse().map_err(|e| err(format!("target facet: {e}")))?;
            let status = match raw.status.as_str() {
                "I" | "In" => Status::I,
                "O" | "Out" => Status::O,
                s => return Err(err(format!("unknown status '{s}'"))),
            };
            rows.push(PairingRow {
                copy: raw.copy,
                facet,
                status,
                to_copy: raw.to_copy,
                to_facet,
                perm: raw.perm,
            });
        }
        Ok(PairingTable { rows })
    }

    /// The pairing of the two-copy manifold shipped with the crate.
    pub fn standard() -> Self {
        PairingTable::parse(STANDARD_TABLE).expect("bundled table parses")
    }

    /// Copy names in order of first appearance.
    pub fn copies(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.copy) {
                out.push(r.copy.clone());
            }
        }
        out
    }
}

/// Follows the ridge between facets `f` and `g` of `copy` around its cycle;
/// returns the length and whether the composite isometry is trivial.
pub fn ridge_cycle(x: &PolytopalComplex, copy: u32, f: SignVector, g: SignVector) -> (usize, bool) {
    let start = (copy, f, g);
    let mut cur = start;
    let mut total = SignedPermutation::identity();
    let mut len = 0;
    loop {
        let (c, cross, other) = cur;
        let gl = x.gluing(c, cross);
        total = gl.map.compose(&total);
        cur = (gl.copy, gl.map.apply_facet(other), gl.facet);
        len += 1;
        if cur == start || len > 64 {
            return (len, total.is_identity());
        }
    }
}

/// Colors whose statuses differ, when both of each color's facets differ.
fn flipped_colors(coloring: &Coloring, moved: u16) -> Option<Vec<Color>> {
    let colors: Vec<Color> = Color::all()
        .filter(|&c| coloring.facet_mask([c]) & moved != 0)
        .collect();
    (coloring.facet_mask(colors.iter().copied()) == moved).then_some(colors)
}

/// Assembles the complex of a pairing table and verifies it: the pairing is an
/// involution by isometries, ridge cycles have length 4 with trivial
/// holonomy, crossing a facet flips the statuses of its color and of one
/// partner color, the partners forming a fixed pairing of the colors, and
/// exchanging the two copies is a status-preserving symmetry.
pub fn assemble_n5(table: &PairingTable, coloring: &Coloring) -> Result<PolytopalComplex> {
    let copies = table.copies();
    let copy_index = |name: &str, row: usize| -> Result<u32> {
        copies
            .iter()
            .position(|c| c == name)
            .map(|i| i as u32)
            .ok_or_else(|| Error::Table {
                row,
                message: format!("unknown copy '{name}'"),
            })
    };
    let mut cells: Vec<[Option<(Gluing, usize)>; FACET_COUNT]> = vec![[None; FACET_COUNT]; copies.len()];
    let mut in_masks = vec![0u16; copies.len()];
    for (i, r) in table.rows.iter().enumerate() {
        let row = i + 1;
        let a = copy_index(&r.copy, row)?;
        let b = copy_index(&r.to_copy, row)?;
        let map = SignedPermutation::from_axis_string(&r.perm, r.facet, r.to_facet).map_err(|e| Error::Table {
            row,
            message: e.to_string(),
        })?;
        if map.apply_facet(r.facet) != r.to_facet {
            return Err(Error::Table {
                row,
                message: "the permutation does not carry the facet to the target facet".into(),
            });
        }
        let slot = &mut cells[a as usize][r.facet.index()];
        if slot.is_some() {
            return Err(Error::Table {
                row,
                message: format!("facet {} of copy {} listed twice", r.facet, r.copy),
            });
        }
        *slot = Some((
            Gluing {
                copy: b,
                facet: r.to_facet,
                map,
            },
            row,
        ));
        if r.status == Status::I {
            in_masks[a as usize] |= 1 << r.facet.index();
        }
    }
    let mut gluing = Vec::with_capacity(copies.len());
    for (a, row) in cells.iter().enumerate() {
        let mut out = Vec::with_capacity(FACET_COUNT);
        for (fi, g) in row.iter().enumerate() {
            let (g, line) = g.ok_or_else(|| Error::Table {
                row: table.rows.len() + 1,
                message: format!("facet {} of copy {} is missing", SignVector::from_index(fi), copies[a]),
            })?;
            let back = cells[g.copy as usize][g.facet.index()].map(|(b, _)| b);
            let ok = back.is_some_and(|b| {
                b.copy == a as u32 && b.facet == SignVector::from_index(fi) && b.map == g.map.inverse()
            });
            if !ok {
                return Err(Error::Table {
                    row: line,
                    message: "the pairing is not an involution".into(),
                });
            }
            out.push(g);
        }
        gluing.push(std::array::from_fn(|i| out[i]));
    }
    let states: Vec<State> = in_masks.into_iter().map(State::from_mask).collect();
    let x = PolytopalComplex::new(copies.clone(), gluing, Some(states.clone()))?;
    let line_of = |a: usize, f: SignVector| cells[a][f.index()].map_or(0, |(_, l)| l);
    let mut partner: [Option<Color>; 8] = [None; 8];
    for a in 0..copies.len() {
        for f in enumerate_facets() {
            let g = x.gluing(a as u32, f);
            let moved = states[a].transported(&g.map).in_mask() ^ states[g.copy as usize].in_mask();
            let crossed = coloring.color(g.facet);
            let flip_err = || Error::Table {
                row: line_of(a, f),
                message: "crossing the facet does not flip its color and one partner color".into(),
            };
            let colors = flipped_colors(coloring, moved).ok_or_else(flip_err)?;
            let [p, q] = colors.as_slice() else {
                return Err(flip_err());
            };
            let other = if *p == crossed {
                *q
            } else if *q == crossed {
                *p
            } else {
                return Err(flip_err());
            };
            for (c, d) in [(crossed, other), (other, crossed)] {
                if *partner[c.index()].get_or_insert(d) != d {
                    return Err(Error::Table {
                        row: line_of(a, f),
                        message: format!("color {} is paired inconsistently", c.get()),
                    });
                }
            }
            for h in enumerate_facets() {
                if crate::polytope::are_adjacent(f, h) {
                    let (len, trivial) = ridge_cycle(&x, a as u32, f, h);
                    if len != 4 || !trivial {
                        return Err(Error::Table {
                            row: line_of(a, f),
                            message: format!("the ridge cycle through {f} and {h} has length {len}"),
                        });
                    }
                }
            }
        }
    }
    if copies.len() == 2 && !has_copy_swap(&x) {
        return Err(Error::Verification("exchanging the copies is not a symmetry".into()));
    }
    Ok(x)
}

/// Exchanging copies 0 and 1 by the identity preserves gluings and states.
pub fn has_copy_swap(x: &PolytopalComplex) -> bool {
    if x.copy_count() != 2 {
        return false;
    }
    let states_ok = x.states().is_none_or(|s| s[0] == s[1]);
    states_ok
        && enumerate_facets().into_iter().all(|f| {
            let (g0, g1) = (x.gluing(0, f), x.gluing(1, f));
            g0.facet == g1.facet && g0.map == g1.map && g0.copy == 1 - g1.copy
        })
}

/// A copy `P_{v,l}` of the infinite cyclic cover.
pub type CoverCopy = (CopyLabel, i32);

/// The symmetry of the cover sending `P_{w,l}` to `P_{shift + phi(w), l + level}`
/// by `phi`, acting on copy labels through the induced color permutation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GammaElement {
    pub phi: SignedPermutation,
    pub shift: CopyLabel,
    pub level: i32,
}

/// Precomputed data of the cover: copy states and the color action of the
/// state-preserving symmetries.
pub struct Cover {
    coloring: Coloring,
    states: Vec<State>,
    color_action: HashMap<SignedPermutation, [Color; 8]>,
}

impl Cover {
    pub fn new(coloring: &Coloring, s0: State, moves: &MoveSet) -> Result<Self> {
        let states = CopyLabel::all().map(|v| assign_states(coloring, s0, moves, v)).collect();
        let mut color_action = HashMap::new();
        for g in polytope().r16() {
            let perm = coloring
                .color_permutation(g)
                .ok_or_else(|| Error::Verification(format!("{g} does not preserve the coloring")))?;
            color_action.insert(*g, perm);
        }
        Ok(Cover {
            coloring: coloring.clone(),
            states,
            color_action,
        })
    }

    pub fn standard(coloring: &Coloring) -> Result<Self> {
        Cover::new(coloring, initial_state(coloring)?, &MoveSet::canonical())
    }

    pub fn state(&self, v: CopyLabel) -> State {
        self.states[v.0 as usize]
    }

    /// Whether `P_{v,l}` exists: the coordinate sum of `v` plus `l` is even.
    pub fn exists(&self, (v, l): CoverCopy) -> bool {
        (v.0.count_ones() as i32 + l).rem_euclid(2) == 0
    }

    pub fn act(&self, phi: &SignedPermutation, w: CopyLabel) -> CopyLabel {
        let perm = &self.color_action[phi];
        CopyLabel(
            Color::all()
                .filter(|&c| w.coordinate(c))
                .fold(0u8, |m, c| m | (1 << perm[c.index()].index())),
        )
    }

    pub fn apply(&self, g: &GammaElement, (w, l): CoverCopy) -> CoverCopy {
        (CopyLabel(g.shift.0 ^ self.act(&g.phi, w).0), l + g.level)
    }

    /// `a ∘ b`.
    pub fn compose(&self, a: &GammaElement, b: &GammaElement) -> GammaElement {
        GammaElement {
            phi: a.phi.compose(&b.phi),
            shift: CopyLabel(a.shift.0 ^ self.act(&a.phi, b.shift).0),
            level: a.level + b.level,
        }
    }

    pub fn identity() -> GammaElement {
        GammaElement {
            phi: SignedPermutation::identity(),
            shift: CopyLabel(0),
            level: 0,
        }
    }

    /// The state-preserving symmetry carrying `from` onto `to`.
    pub fn between(&self, from: CoverCopy, to: CoverCopy) -> Option<GammaElement> {
        let (s, t) = (self.state(from.0), self.state(to.0));
        let phi = *polytope().r16().iter().find(|g| s.transported(g) == t)?;
        Some(GammaElement {
            phi,
            shift: CopyLabel(to.0 .0 ^ self.act(&phi, from.0).0),
            level: to.1 - from.1,
        })
    }

    /// The element maps existing copies to existing copies and carries states
    /// to states.
    pub fn is_symmetry(&self, g: &GammaElement) -> bool {
        CopyLabel::all().all(|w| {
            let l = (w.0.count_ones() % 2) as i32;
            let (w2, l2) = self.apply(g, (w, l));
            self.exists((w2, l2)) && self.state(w).transported(&g.phi) == self.state(w2)
        })
    }

    /// Neighbor of `P_{v,l}` across facet `f`.
    pub fn neighbor(&self, (v, l): CoverCopy, f: SignVector) -> CoverCopy {
        let step = if self.state(v).status(f) == Status::O { 1 } else { -1 };
        (v.step(self.coloring.color(f)), l + step)
    }

    /// Generators of the subgroup: the symmetries sending `P_{0,0}` to
    /// `P_{v,0}` with even `v_1 + … + v_4` (and even total), and the one
    /// sending `P_{0,0}` to `P_{e_1,1}`.
    pub fn gamma0_generators(&self) -> Result<Vec<GammaElement>> {
        let origin = (CopyLabel(0), 0);
        let mut gens = Vec::new();
        for v in CopyLabel::all() {
            if (v.0 & 0x0f != 0 && (v.0 & 0x0f).count_ones() % 2 == 0 || v.0 & 0x0f == 0)
                && self.exists((v, 0)) && v.0 != 0 {
                    gens.push(self.between(origin, (v, 0)).ok_or_else(|| Error::Verification("no symmetry".into()))?);
                }
        }
        let e1 = CopyLabel(1);
        gens.push(self.between(origin, (e1, 1)).ok_or_else(|| Error::Verification("no symmetry".into()))?);
        for g in &gens {
            if !self.is_symmetry(g) {
                return Err(Error::Verification("a generator does not extend to the cover".into()));
            }
        }
        Ok(gens)
    }

    /// Elements of the generated group with `|level| <= max_level`, closed
    /// under composition inside that window.
    pub fn group_elements(&self, gens: &[GammaElement], max_level: i32) -> Vec<GammaElement> {
        let mut all: Vec<GammaElement> = gens.to_vec();
        all.extend(gens.iter().map(|g| self.inverse(g)));
        let steps = all.clone();
        let mut seen: HashSet<GammaElement> = HashSet::new();
        let mut queue: VecDeque<GammaElement> = VecDeque::new();
        seen.insert(Self::identity());
        queue.push_back(Self::identity());
        while let Some(x) = queue.pop_front() {
            for s in &steps {
                let y = self.compose(s, &x);
                if y.level.abs() <= max_level && seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        let mut out: Vec<GammaElement> = seen.into_iter().collect();
        out.sort_by_key(|g| (g.level, g.shift, g.phi));
        out
    }

    pub fn inverse(&self, g: &GammaElement) -> GammaElement {
        let phi = g.phi.inverse();
        GammaElement {
            phi,
            shift: self.act(&phi, g.shift),
            level: -g.level,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Gamma0Quotient {
    pub complex: PolytopalComplex,
    pub representatives: Vec<CoverCopy>,
    /// Orbits of the level-0 copies under the level-0 elements.
    pub orbit_count: usize,
    pub level0_elements: usize,
}

/// The quotient of the cover by the subgroup: orbit representatives
/// `P_{0,0}` and `P_{e_1+e_5,0}`, each facet glued through the unique element
/// carrying its neighbor onto a representative.
pub fn gamma0_quotient(coloring: &Coloring) -> Result<Gamma0Quotient> {
    let cover = Cover::standard(coloring)?;
    let gens = cover.gamma0_generators()?;
    let elements = cover.group_elements(&gens, 2);
    let level0: Vec<&GammaElement> = elements.iter().filter(|g| g.level == 0).collect();
    // orbits of the level-0 copies
    let copies: Vec<CopyLabel> = CopyLabel::all().filter(|&v| cover.exists((v, 0))).collect();
    let mut orbit: HashMap<CopyLabel, usize> = HashMap::new();
    let mut count = 0;
    for &v in &copies {
        if orbit.contains_key(&v) {
            continue;
        }
        for g in &level0 {
            orbit.entry(cover.apply(g, (v, 0)).0).or_insert(count);
        }
        count += 1;
    }
    let reps: Vec<CoverCopy> = vec![(CopyLabel(0), 0), (CopyLabel(0b0001_0001), 0)];
    if count != 2 || orbit[&reps[0].0] == orbit[&reps[1].0] {
        return Err(Error::Verification(format!("expected two orbits, found {count}")));
    }
    let mut gluing = Vec::new();
    for &r in &reps {
        let mut row = Vec::with_capacity(FACET_COUNT);
        for f in enumerate_facets() {
            let n = cover.neighbor(r, f);
            let hits: Vec<(usize, &GammaElement)> = elements
                .iter()
                .filter_map(|g| {
                    let img = cover.apply(g, n);
                    reps.iter().position(|&q| q == img).map(|k| (k, g))
                })
                .collect();
            let [(k, g)] = hits.as_slice() else {
                return Err(Error::Verification(format!(
                    "facet {f} of {r:?} reaches {} representatives",
                    hits.len()
                )));
            };
            row.push(Gluing {
                copy: *k as u32,
                facet: g.phi.apply_facet(f),
                map: g.phi,
            });
        }
        gluing.push(std::array::from_fn(|i| row[i]));
    }
    let labels = vec!["P(0,0)".to_string(), "P(e1+e5,0)".to_string()];
    let states = reps.iter().map(|r| cover.state(r.0)).collect();
    let complex = PolytopalComplex::new(labels, gluing, Some(states))?;
    Ok(Gamma0Quotient {
        complex,
        representatives: reps,
        orbit_count: count,
        level0_elements: level0.len(),
    })
}

/// A finite window `|l| <= depth` of the cover, as a cell complex with face
/// classes, for checking which faces an element fixes.
pub struct CoverWindow {
    index: HashMap<CoverCopy, u32>,
    classes: FaceClasses,
}

impl CoverWindow {
    pub fn new(cover: &Cover, depth: i32) -> Result<Self> {
        let p = polytope();
        let lat = Arc::new(p.lattice().clone());
        let id = Arc::new(FaceMap::identity(&lat));
        let mut cx = CellComplex::new(vec![lat.clone()]);
        let mut index = HashMap::new();
        for l in -depth..=depth {
            for v in CopyLabel::all() {
                if cover.exists((v, l)) {
                    index.insert((v, l), cx.add_cell(0));
                }
            }
        }
        for (&c, &cell) in &index {
            for f in enumerate_facets() {
                if let Some(&other) = index.get(&cover.neighbor(c, f)) {
                    let slot = lat.slot_of_facet(p.facet_face(f)).expect("facet slot");
                    cx.set_glue(
                        cell,
                        slot,
                        Glue {
                            cell: other,
                            slot,
                            map: id.clone(),
                        },
                    );
                }
            }
        }
        let classes = FaceClasses::compute(&cx)?;
        Ok(CoverWindow { index, classes })
    }

    /// Real faces `g` of copy `c` whose class contains the face `phi(g)` of `g(c)`.
    pub fn fixed_faces(&self, cover: &Cover, g: &GammaElement, c: CoverCopy) -> Vec<FaceId> {
        let p = polytope();
        let (Some(&a), Some(&b)) = (self.index.get(&c), self.index.get(&cover.apply(g, c))) else {
            return Vec::new();
        };
        let fm = p.face_map(&g.phi);
        (0..p.lattice().len() as FaceId)
            .filter(|&f| !p.is_ideal_face(f) && self.classes.class_of(a, f) == self.classes.class_of(b, fm.apply(f)))
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FreenessReport {
    pub elements_checked: usize,
    pub faces_checked: usize,
    /// (element index, representative, fixed face) triples.
    pub fixed: Vec<(usize, usize, FaceId)>,
}

/// Checks that no non-identity level-0 element of the subgroup identifies a
/// face of a representative with its image.
pub fn freeness_spot_check(coloring: &Coloring) -> Result<FreenessReport> {
    let cover = Cover::standard(coloring)?;
    let gens = cover.gamma0_generators()?;
    let elements: Vec<GammaElement> = cover
        .group_elements(&gens, 2)
        .into_iter()
        .filter(|g| g.level == 0 && *g != Cover::identity())
        .collect();
    let window = CoverWindow::new(&cover, 5)?;
    let reps = [(CopyLabel(0), 0), (CopyLabel(0b0001_0001), 0)];
    let faces = polytope().lattice().len();
    let fixed: Vec<(usize, usize, FaceId)> = elements
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, g)| {
            let window = &window;
            let cover = &cover;
            reps.iter()
                .enumerate()
                .flat_map(move |(k, &r)| window.fixed_faces(cover, g, r).into_iter().map(move |f| (i, k, f)))
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(FreenessReport {
        elements_checked: elements.len(),
        faces_checked: elements.len() * reps.len() * faces,
        fixed,
    })
}

/// Isomorphism signature of a connected polytopal complex: minimum over all
/// starting copies and isometries of the breadth-first relabeling.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ComplexSignature(pub String);

fn encode_complex(
    x: &PolytopalComplex,
    iso_index: &HashMap<SignedPermutation, u32>,
    start: u32,
    frame: SignedPermutation,
    with_states: bool,
    bound: Option<&[u32]>,
) -> Option<Vec<u32>> {
    let n = x.copy_count();
    let mut new_of = vec![u32::MAX; n];
    let mut frames = vec![SignedPermutation::identity(); n];
    let mut order = vec![start];
    new_of[start as usize] = 0;
    frames[start as usize] = frame;
    let mut tokens = Vec::new();
    let mut less = false;
    let mut push = |tokens: &mut Vec<u32>, t: u32| -> bool {
        if let (Some(b), false) = (bound, less) {
            match t.cmp(&b[tokens.len()]) {
                std::cmp::Ordering::Greater => return false,
                std::cmp::Ordering::Less => less = true,
                std::cmp::Ordering::Equal => {}
            }
        }
        tokens.push(t);
        true
    };
    let mut i = 0;
    while i < order.len() {
        let s = order[i];
        let g = frames[s as usize];
        let ginv = g.inverse();
        if with_states {
            let st = x.state(s).map_or(0, |st| st.transported(&g).in_mask() as u32);
            if !push(&mut tokens, st) {
                return None;
            }
        }
        for fc in 0..FACET_COUNT {
            let f = ginv.apply_facet(SignVector::from_index(fc));
            let gl = x.gluing(s, f);
            let t = gl.copy;
            if new_of[t as usize] == u32::MAX {
                new_of[t as usize] = order.len() as u32;
                frames[t as usize] = g.compose(&gl.map.inverse());
                order.push(t);
            }
            let map = frames[t as usize].compose(&gl.map).compose(&ginv);
            let token = new_of[t as usize] * 1920 + iso_index[&map];
            if !push(&mut tokens, token) {
                return None;
            }
        }
        i += 1;
    }
    (order.len() == n).then_some(tokens)
}

pub fn complex_signature(x: &PolytopalComplex, with_states: bool) -> Result<ComplexSignature> {
    if x.component_count() != 1 {
        return Err(Error::Verification("signatures need a connected complex".into()));
    }
    let p = polytope();
    let iso_index: HashMap<SignedPermutation, u32> =
        p.isometries().iter().enumerate().map(|(i, g)| (*g, i as u32)).collect();
    let starts: Vec<(u32, SignedPermutation)> = (0..x.copy_count() as u32)
        .flat_map(|a| p.isometries().iter().map(move |&g| (a, g)))
        .collect();
    let best = starts
        .par_chunks(128)
        .map(|chunk| {
            let mut best: Option<Vec<u32>> = None;
            for &(a, g) in chunk {
                if let Some(t) = encode_complex(x, &iso_index, a, g, with_states, best.as_deref()) {
                    if best.as_ref().is_none_or(|b| t < *b) {
                        best = Some(t);
                    }
                }
            }
            best
        })
        .flatten()
        .reduce_with(|a, b| a.min(b))
        .ok_or(Error::EmptyComplex)?;
    let body: Vec<String> = best.iter().map(|t| format!("{t:x}")).collect();
    Ok(ComplexSignature(format!(
        "p{}{}:{}",
        x.copy_count(),
        if with_states { "s" } else { "" },
        body.join(".")
    )))
}

pub fn complexes_isomorphic(a: &PolytopalComplex, b: &PolytopalComplex, with_states: bool) -> Result<bool> {
    Ok(a.copy_count() == b.copy_count() && complex_signature(a, with_states)? == complex_signature(b, with_states)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::find_standard_coloring;
    use crate::complex::cusp_census;

    #[test]
    fn table_assembles() {
        let c = find_standard_coloring().unwrap();
        let t = PairingTable::standard();
        assert_eq!(t.rows.len(), 32);
        let first = &t.rows[0];
        assert_eq!(first.facet.to_string(), "----+");
        assert_eq!(first.status, Status::I);
        assert_eq!((first.to_copy.as_str(), first.to_facet.to_string().as_str(), first.perm.as_str()), ("B", "-+++-", "13245"));
        let x = assemble_n5(&t, &c).unwrap();
        assert_eq!(x.copy_count(), 2);
        assert_eq!(cusp_census(&x).unwrap().len(), 2);
        assert!(has_copy_swap(&x));
        assert_eq!(x.state(0).unwrap().in_facets().len(), 8);
    }

    #[test]
    fn table_errors_name_rows() {
        let c = find_standard_coloring().unwrap();
        let text = STANDARD_TABLE.replacen("A,---+-,I,A,++--+,42315", "A,---+-,I,A,++--+,42351", 1);
        match assemble_n5(&PairingTable::parse(&text).unwrap(), &c) {
            Err(Error::Table { row, .. }) => assert_eq!(row, 2),
            other => panic!("{other:?}"),
        }
        let text = STANDARD_TABLE.replacen("A,----+,I,", "A,----+,X,", 1);
        assert!(matches!(PairingTable::parse(&text), Err(Error::Table { row: 1, .. })));
        let text = STANDARD_TABLE.replacen("A,----+,I,B", "A,----+,O,B", 1);
        assert!(matches!(assemble_n5(&PairingTable::parse(&text).unwrap(), &c), Err(Error::Table { .. })));
    }

    #[test]
    fn quotient_matches_table() {
        let c = find_standard_coloring().unwrap();
        let q = gamma0_quotient(&c).unwrap();
        assert_eq!(q.orbit_count, 2);
        assert_eq!(q.level0_elements, 64);
        let t = assemble_n5(&PairingTable::standard(), &c).unwrap();
        assert!(complexes_isomorphic(&q.complex, &t, false).unwrap());
        assert!(!complexes_isomorphic(&q.complex, &t, true).unwrap());
        assert!(complexes_isomorphic(&q.complex, &crate::orientation::with_reversed_states(&t).unwrap(), true).unwrap());
    }

    #[test]
    fn signature_detects_changes() {
        let c = find_standard_coloring().unwrap();
        let t = assemble_n5(&PairingTable::standard(), &c).unwrap();
        let m = crate::complex::assemble_m5(&c);
        assert_ne!(complex_signature(&t, false).unwrap().0.len(), 0);
        assert!(!complexes_isomorphic(&t, &m, false).unwrap());
    }

    #[test]
    fn freeness() {
        let c = find_standard_coloring().unwrap();
        let r = freeness_spot_check(&c).unwrap();
        assert_eq!(r.elements_checked, 63);
        assert!(r.fixed.is_empty(), "{:?}", &r.fixed[..r.fixed.len().min(4)]);
        // the full group is not free: P(0,0) -> P(e1+e5,0) by the identity fixes two bad ridges
        let cover = Cover::standard(&c).unwrap();
        let g = cover.between((CopyLabel(0), 0), (CopyLabel(0b0001_0001), 0)).unwrap();
        assert!(g.phi.is_identity());
        let window = CoverWindow::new(&cover, 5).unwrap();
        let fixed = window.fixed_faces(&cover, &g, (CopyLabel(0), 0));
        let lat = polytope().lattice();
        let ridges: Vec<FaceId> = fixed.iter().copied().filter(|&f| lat.rank(f) == 3).collect();
        assert_eq!(ridges.len(), 2);
        let bad = crate::states::bad_ridges(&c, &MoveSet::canonical());
        assert!(ridges.iter().all(|r| bad.contains(r)));
    }

    fn groups(gs: &[crate::homology::AbelianGroup]) -> Vec<(usize, Vec<u64>)> {
        gs.iter().map(|g| (g.rank, g.torsion_u64())).collect()
    }

    #[test]
    fn homology_two_routes() {
        let c = find_standard_coloring().unwrap();
        let x = assemble_n5(&PairingTable::standard(), &c).unwrap();
        let cell = crate::homology::homology(&x.cellular_chains().unwrap());
        let bary = crate::homology::homology(&x.barycentric_chains().unwrap());
        let expected = vec![(1, vec![]), (1, vec![4]), (0, vec![4, 4]), (1, vec![]), (1, vec![]), (0, vec![])];
        assert_eq!(groups(&cell), expected);
        assert_eq!(groups(&bary), expected);
        let mut h1: Vec<(usize, Vec<u64>)> = x
            .cusp_section_chains()
            .unwrap()
            .iter()
            .map(|(_, c)| groups(&crate::homology::homology(c))[1].clone())
            .collect();
        h1.sort();
        assert_eq!(h1, [(1, vec![4]), (1, vec![4, 4])]);
    }

    #[test]
    fn fiber_invariants() {
        use crate::triangulation::{EulerMode, VertexKind};
        let c = find_standard_coloring().unwrap();
        let x = assemble_n5(&PairingTable::standard(), &c).unwrap();
        let f = crate::fiber::build_fiber(&x).unwrap();
        let t = &f.triangulation;
        assert_eq!((t.len(), t.component_count()), (144, 1));
        let vc = t.vertex_classes();
        let kinds = t.vertex_kinds(&vc).unwrap();
        assert_eq!(kinds.iter().filter(|k| **k == VertexKind::Ideal).count(), 5);
        assert_eq!(t.euler_characteristic(EulerMode::Truncated).unwrap(), 1);
        assert_eq!(t.euler_characteristic(EulerMode::Compactified).unwrap(), 6);
        let h = groups(&t.homology(true).unwrap());
        assert_eq!(h[1..4], [(0, vec![4, 4, 4, 4]), (4, vec![]), (4, vec![])]);
        let links = t.boundary_triangulations().unwrap();
        assert_eq!(links.len(), 5);
        for l in links {
            assert!(l.is_closed());
            assert_eq!(groups(&l.homology(false).unwrap())[1], (0, vec![4, 4]));
        }
        // ideal classes are exactly those of the ascending ideal labels
        for (class, kind) in kinds.iter().enumerate() {
            let labels: HashSet<usize> = vc.members(class as u32).iter().map(|&(_, v)| v as usize).collect();
            let ideal_labels = labels.iter().all(|v| crate::fiber::FiberPiece::IDEAL_LABELS.contains(v));
            assert_eq!(*kind == VertexKind::Ideal, ideal_labels, "class {class}");
        }
        let q = gamma0_quotient(&c).unwrap();
        let g = crate::fiber::build_fiber(&q.complex).unwrap();
        assert!(crate::triangulation::is_isomorphic(t, &g.triangulation));
    }

    #[test]
    fn presentation_abelianizes() {
        let text = include_str!("../data/fiber_n5_pi1.txt");
        let p = crate::homology::GroupPresentation::parse(text).unwrap();
        let a = p.abelianize();
        assert_eq!((a.rank, a.torsion_u64()), (0, vec![4, 4, 4, 4]));
    }
}
