//! Orientations of the dual cubulation induced by the states, cube
//! classification, and the analysis of the cusp sections.

use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::coloring::Coloring;
use crate::complex::{CuspClass, CuspKind, Model, PolytopalComplex};
use crate::error::{ComplexError, Error, Result};
use crate::lattice::TruncatedFace;
use crate::polytope::{polytope, PolytopeVertex, SignVector};
use crate::states::{MoveSet, State, Status};

/// A direction of a dual cube: crossing a real facet or heading to the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Facet(SignVector),
    Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CubeKind {
    Good,
    /// The square spanned by real directions `i < j` is a saddle; every other
    /// direction is coherent.
    Bad { i: usize, j: usize },
    Unclassifiable,
}

/// A cube of the dual cubulation, dual to a class of the truncated complex.
#[derive(Clone, Debug)]
pub struct DualCube {
    pub class: u32,
    /// Copy and real face of the polytope at the base vertex.
    pub copy: u32,
    pub face: crate::lattice::FaceId,
    /// The ideal vertex whose cusp section contains the cube's boundary face.
    pub cut_vertex: Option<crate::lattice::FaceId>,
    /// Real facet directions in the base copy, then possibly the boundary.
    pub directions: Vec<Direction>,
    /// Copy at each vertex, indexed by the bit mask of crossed real directions.
    pub copies: Vec<u32>,
    /// `positive[d][w]`: the edge in real direction `d` leaving vertex `w`
    /// (bit `d` clear) points toward `w + e_d`.
    pub positive: Vec<Vec<bool>>,
    pub kind: CubeKind,
}

impl DualCube {
    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    pub fn real_dim(&self) -> usize {
        self.directions
            .iter()
            .filter(|d| matches!(d, Direction::Facet(_)))
            .count()
    }

    pub fn touches_boundary(&self) -> bool {
        self.directions.contains(&Direction::Boundary)
    }
}

/// Every dual cube with its edge orientations and classification.
#[derive(Clone, Debug)]
pub struct OrientedDualSkeleton {
    pub cubes: Vec<DualCube>,
    /// `(copy, facet)` pairs where crossing does not reverse the facet status.
    pub crossing_violations: Vec<(u32, SignVector)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CubeCensus {
    /// Counts by cube dimension.
    pub good: Vec<usize>,
    pub bad: Vec<usize>,
    pub unclassifiable: Vec<usize>,
}

impl OrientedDualSkeleton {
    pub fn census(&self) -> CubeCensus {
        let top = self.cubes.iter().map(|c| c.dim()).max().unwrap_or(0);
        let mut c = CubeCensus {
            good: vec![0; top + 1],
            bad: vec![0; top + 1],
            unclassifiable: vec![0; top + 1],
        };
        for cube in &self.cubes {
            let slot = match cube.kind {
                CubeKind::Good => &mut c.good,
                CubeKind::Bad { .. } => &mut c.bad,
                CubeKind::Unclassifiable => &mut c.unclassifiable,
            };
            slot[cube.dim()] += 1;
        }
        c
    }

    pub fn bad_squares(&self) -> impl Iterator<Item = &DualCube> {
        self.cubes
            .iter()
            .filter(|c| c.dim() == 2 && c.real_dim() == 2 && matches!(c.kind, CubeKind::Bad { .. }))
    }

    pub fn unclassifiable(&self) -> impl Iterator<Item = &DualCube> {
        self.cubes.iter().filter(|c| c.kind == CubeKind::Unclassifiable)
    }
}

/// Walks the real directions of a cube from `(copy, face)`.
///
/// Returns the copy and the images of the direction facets at every vertex.
fn cube_frames(
    x: &PolytopalComplex,
    copy: u32,
    facets: &[SignVector],
) -> Result<Vec<(u32, Vec<SignVector>)>, ComplexError> {
    let m = facets.len();
    let mut frames: Vec<Option<(u32, Vec<SignVector>)>> = vec![None; 1 << m];
    frames[0] = Some((copy, facets.to_vec()));
    for w in 0..(1usize << m) {
        let (c, frame) = frames[w].clone().expect("vertices are visited in increasing order");
        for j in 0..m {
            if w & (1 << j) != 0 {
                continue;
            }
            let g = x.gluing(c, frame[j]);
            let next: Vec<SignVector> = frame.iter().map(|&f| g.map.apply_facet(f)).collect();
            let target = w | (1 << j);
            match &frames[target] {
                None => frames[target] = Some((g.copy, next)),
                Some((c2, f2)) if *c2 == g.copy && *f2 == next => {}
                Some(_) => {
                    return Err(ComplexError::Invalid(format!(
                        "dual cube at copy {copy} does not close up"
                    )))
                }
            }
        }
    }
    Ok(frames.into_iter().map(|f| f.expect("all vertices reached")).collect())
}

/// Classifies a cube from the orientation of its real directions.
pub fn classify(positive: &[Vec<bool>]) -> CubeKind {
    let m = positive.len();
    let edges_of = |d: usize| (0..1usize << m).filter(move |w| w & (1 << d) == 0);
    // dependence of each direction: None = constant, Some(i) = base xor w_i
    let mut depends: Vec<Option<Option<usize>>> = Vec::with_capacity(m);
    for d in 0..m {
        let base = positive[d][0];
        if edges_of(d).all(|w| positive[d][w] == base) {
            depends.push(Some(None));
            continue;
        }
        let on = (0..m)
            .filter(|&i| i != d)
            .find(|&i| edges_of(d).all(|w| positive[d][w] == (base ^ (w & (1 << i) != 0))));
        depends.push(on.map(Some));
    }
    if depends.iter().any(|x| x.is_none()) {
        return CubeKind::Unclassifiable;
    }
    let moving: Vec<(usize, usize)> = depends
        .iter()
        .enumerate()
        .filter_map(|(d, x)| x.flatten().map(|i| (d, i)))
        .collect();
    match moving.as_slice() {
        [] => CubeKind::Good,
        [(a, b), (c, d)] if a == d && b == c => {
            // saddle when both edges at the base vertex point the same way
            if positive[*a][0] == positive[*b][0] {
                CubeKind::Bad { i: *a.min(b), j: *a.max(b) }
            } else {
                CubeKind::Unclassifiable
            }
        }
        _ => CubeKind::Unclassifiable,
    }
}

/// Orients every dual edge from the O side to the I side and classifies all cubes.
pub fn orient_dual_edges(x: &PolytopalComplex) -> Result<OrientedDualSkeleton> {
    let states = x
        .states()
        .ok_or_else(|| Error::Verification("the complex carries no states".into()))?;
    let p = polytope();
    let t = p.truncated();
    let (_, fc) = x.face_classes(Model::Truncated)?;
    let top_rank = t.lattice.dim();
    let classes: Vec<u32> = (0..fc.len() as u32).filter(|&c| fc.rank(c) < top_rank).collect();
    let results: Vec<std::result::Result<(DualCube, Vec<(u32, SignVector)>), ComplexError>> = classes
        .par_iter()
        .map(|&class| {
            let rep = fc.rep(class);
            let (face, cut_vertex) = match t.origin[rep.face as usize] {
                TruncatedFace::Original(g) => (g, None),
                TruncatedFace::Cut { vertex, face } => (face, Some(vertex)),
                TruncatedFace::Vertex => unreachable!("every truncated face has an origin"),
            };
            let mask = p.face_facet_mask(face);
            let facets: Vec<SignVector> = p
                .facets()
                .iter()
                .copied()
                .filter(|f| mask & (1 << f.index()) != 0)
                .collect();
            let frames = cube_frames(x, rep.cell, &facets)?;
            let m = facets.len();
            let mut positive = vec![vec![false; 1 << m]; m];
            let mut violations = Vec::new();
            for (w, (c, frame)) in frames.iter().enumerate() {
                for d in 0..m {
                    if w & (1 << d) != 0 {
                        continue;
                    }
                    let here = states[*c as usize].status(frame[d]);
                    positive[d][w] = here == Status::O;
                    let (c2, frame2) = &frames[w | (1 << d)];
                    if states[*c2 as usize].status(frame2[d]) == here {
                        violations.push((*c, frame[d]));
                    }
                }
            }
            let mut directions: Vec<Direction> = facets.iter().map(|&f| Direction::Facet(f)).collect();
            if cut_vertex.is_some() {
                directions.push(Direction::Boundary);
            }
            let kind = classify(&positive);
            Ok((
                DualCube {
                    class,
                    copy: rep.cell,
                    face,
                    cut_vertex,
                    directions,
                    copies: frames.iter().map(|f| f.0).collect(),
                    positive,
                    kind,
                },
                violations,
            ))
        })
        .collect();
    let mut cubes = Vec::with_capacity(results.len());
    let mut crossing_violations = Vec::new();
    for r in results {
        let (cube, v) = r?;
        cubes.push(cube);
        crossing_violations.extend(v);
    }
    crossing_violations.sort_by_key(|(c, f)| (*c, *f));
    crossing_violations.dedup();
    Ok(OrientedDualSkeleton {
        cubes,
        crossing_violations,
    })
}

/// Statuses of the facet crossed next when walking once around a square,
/// starting at its base vertex along the first direction.
pub fn square_crossing_pattern(x: &PolytopalComplex, square: &DualCube) -> Option<[Status; 4]> {
    let facets: Vec<SignVector> = square
        .directions
        .iter()
        .filter_map(|d| match d {
            Direction::Facet(f) => Some(*f),
            Direction::Boundary => None,
        })
        .collect();
    if facets.len() != 2 {
        return None;
    }
    let frames = cube_frames(x, square.copy, &facets).ok()?;
    let states = x.states()?;
    let st = |w: usize, d: usize| states[frames[w].0 as usize].status(frames[w].1[d]);
    Some([st(0b00, 0), st(0b01, 1), st(0b11, 0), st(0b10, 1)])
}

pub fn is_alternating(pattern: &[Status; 4]) -> bool {
    (0..4).all(|k| pattern[k] != pattern[(k + 1) % 4])
}

/// Face-class labels of the bad squares, for matching against bad ridges.
pub fn bad_square_ridges(skel: &OrientedDualSkeleton) -> Vec<crate::lattice::FaceId> {
    let mut out: Vec<_> = skel.bad_squares().map(|c| c.face).collect();
    out.sort_unstable();
    out
}

/// One cube of a cusp section placed in the universal cover `Z^4`.
#[derive(Clone, Debug)]
struct PlacedCube {
    copy: u32,
    vertex: PolytopeVertex,
    /// `frame[d] = (F_d^-, F_d^+)`.
    frame: [(SignVector, SignVector); 4],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorusReport {
    pub cusp_class: u32,
    pub vertex: String,
    pub kind: CuspKind,
    pub cubes: usize,
    /// Side length `n` when the period lattice is `n Z^4`.
    pub period: Option<i64>,
    /// Signed count of positive minus negative edges along a closed loop in each direction.
    pub loop_sums: [i64; 4],
    /// A direction in which all edges agree, for large cusps.
    pub preferred_direction: Option<usize>,
    pub translation_invariant: bool,
    /// Small cusps: opposite facets carry opposite statuses in every cube.
    pub opposite_statuses: bool,
    /// Small cusps: each move restricted to the cube flips exactly an opposite pair.
    pub moves_are_opposite_pairs: bool,
    pub certified: bool,
}

/// Places the cubes of a cusp section in `Z^4` and reads off the fibration's
/// behavior on the torus.
pub fn analyze_cusp(
    x: &PolytopalComplex,
    coloring: &Coloring,
    moves: &MoveSet,
    cusp: &CuspClass,
) -> Result<TorusReport> {
    let states = x
        .states()
        .ok_or_else(|| Error::Verification("the complex carries no states".into()))?;
    let p = polytope();
    let (copy0, v0) = cusp.cubes[0];
    let link = p.ideal_vertex_link(v0)?;
    let frame0: [(SignVector, SignVector); 4] =
        std::array::from_fn(|d| (link.facets[link.opposite[d].0], link.facets[link.opposite[d].1]));
    let mut placed: Vec<(PlacedCube, [i64; 4])> = vec![(
        PlacedCube {
            copy: copy0,
            vertex: v0,
            frame: frame0,
        },
        [0; 4],
    )];
    let mut index: HashMap<(u32, usize), usize> = HashMap::from([((copy0, v0.index()), 0)]);
    let mut periods: Vec<[i64; 4]> = Vec::new();
    let mut frames_consistent = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (cube, pos) = placed[i].clone();
        for d in 0..4 {
            for (sign, f) in [(1i64, cube.frame[d].1), (-1, cube.frame[d].0)] {
                let g = x.gluing(cube.copy, f);
                let vertex = g.map.apply_vertex(cube.vertex);
                let mut frame: [(SignVector, SignVector); 4] =
                    cube.frame.map(|(a, b)| (g.map.apply_facet(a), g.map.apply_facet(b)));
                // the crossed facet becomes the opposite side of the new cube
                let (a, b) = frame[d];
                frame[d] = (b, a);
                let mut npos = pos;
                npos[d] += sign;
                match index.get(&(g.copy, vertex.index())) {
                    Some(&j) => {
                        if placed[j].0.frame != frame {
                            frames_consistent = false;
                        }
                        let q = placed[j].1;
                        let diff: [i64; 4] = std::array::from_fn(|k| npos[k] - q[k]);
                        if diff != [0; 4] {
                            periods.push(diff);
                        }
                    }
                    None => {
                        index.insert((g.copy, vertex.index()), placed.len());
                        placed.push((
                            PlacedCube {
                                copy: g.copy,
                                vertex,
                                frame,
                            },
                            npos,
                        ));
                        queue.push_back(placed.len() - 1);
                    }
                }
            }
        }
    }
    let n = placed.len();
    let side = (1..=n as i64).find(|s| s.pow(4) == n as i64);
    let period = side.filter(|&s| {
        frames_consistent && periods.iter().all(|q| q.iter().all(|x| x % s == 0))
    });
    // orientation of the edge leaving each cube through F_d^+
    let positive = |c: &PlacedCube, d: usize| states[c.copy as usize].status(c.frame[d].1) == Status::O;
    let by_pos: HashMap<[i64; 4], usize> = placed
        .iter()
        .enumerate()
        .map(|(i, (_, q))| (*q, i))
        .collect();
    let at = |q: [i64; 4]| -> Option<&PlacedCube> {
        let s = period?;
        let r: [i64; 4] = std::array::from_fn(|k| q[k].rem_euclid(s));
        // reduce into the placed fundamental domain
        by_pos
            .iter()
            .find(|(p, _)| (0..4).all(|k| (p[k] - r[k]).rem_euclid(s) == 0))
            .map(|(_, &i)| &placed[i].0)
    };
    let mut loop_sums = [0i64; 4];
    if let Some(s) = period {
        for (d, slot) in loop_sums.iter_mut().enumerate() {
            let mut q = [0i64; 4];
            for _ in 0..s {
                let c = at(q).expect("every position is covered");
                *slot += if positive(c, d) { 1 } else { -1 };
                q[d] += 1;
            }
        }
    }
    let all_agree = |d: usize| {
        let first = positive(&placed[0].0, d);
        placed.iter().all(|(c, _)| positive(c, d) == first)
    };
    let preferred_direction = period.and_then(|s| (0..4).find(|&d| all_agree(d) && loop_sums[d].abs() == s));
    let translation_invariant = match (preferred_direction, period) {
        (Some(pd), Some(_)) => placed.iter().all(|(c, q)| {
            let mut shifted = *q;
            shifted[pd] += 1;
            at(shifted).is_some_and(|c2| (0..4).all(|d| positive(c, d) == positive(c2, d)))
        }),
        _ => false,
    };
    let opposite_statuses = placed.iter().all(|(c, _)| {
        let s = states[c.copy as usize];
        c.frame.iter().all(|(a, b)| s.status(*a) != s.status(*b))
    });
    let moves_are_opposite_pairs = placed.iter().all(|(c, _)| {
        c.frame.iter().all(|&(a, b)| {
            let block = moves.block_of(coloring.color(a));
            let mask = coloring.facet_mask(block.iter().copied());
            let local: Vec<SignVector> = c
                .frame
                .iter()
                .flat_map(|&(x, y)| [x, y])
                .filter(|f| mask & (1 << f.index()) != 0)
                .collect();
            local.len() == 2 && local.contains(&a) && local.contains(&b)
        })
    });
    let certified = period.is_some()
        && match cusp.kind {
            CuspKind::Large => preferred_direction.is_some() && translation_invariant,
            CuspKind::Small => {
                opposite_statuses
                    && moves_are_opposite_pairs
                    && loop_sums.iter().all(|&l| Some(l.abs()) == period)
            }
            CuspKind::Other(_) => false,
        };
    Ok(TorusReport {
        cusp_class: cusp.class,
        vertex: cusp.vertex.to_string(),
        kind: cusp.kind,
        cubes: n,
        period,
        loop_sums,
        preferred_direction,
        translation_invariant,
        opposite_statuses,
        moves_are_opposite_pairs,
        certified,
    })
}

pub fn boundary_torus_analysis(
    x: &PolytopalComplex,
    coloring: &Coloring,
    moves: &MoveSet,
    cusps: &[CuspClass],
) -> Result<Vec<TorusReport>> {
    cusps
        .par_iter()
        .map(|c| analyze_cusp(x, coloring, moves, c))
        .collect()
}

/// All copies carry the given state transformed uniformly, for equivariance checks.
pub fn with_reversed_states(x: &PolytopalComplex) -> Option<PolytopalComplex> {
    let states: Vec<State> = x.states()?.iter().map(|s| s.reversed()).collect();
    x.clone().with_states(states).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::find_standard_coloring;
    use crate::complex::{assemble_m5_with_states, cusp_census};
    use crate::states::{bad_ridges, initial_state};

    #[test]
    fn classify_patterns() {
        // square: directions 0, 1; vertices w in 0..4
        let coherent = vec![vec![true, false, true, false], vec![true, true, false, false]];
        assert_eq!(classify(&coherent), CubeKind::Good);
        // saddle: both edges leave (0,0) and both leave (1,1)
        let saddle = vec![vec![true, false, false, false], vec![true, false, false, false]];
        let saddle = {
            let mut s = saddle;
            s[0][2] = false; // edge in direction 0 at w = (0,1) points back
            s[1][1] = false; // edge in direction 1 at w = (1,0) points back
            s
        };
        assert_eq!(classify(&saddle), CubeKind::Bad { i: 0, j: 1 });
        let cyclic = vec![vec![true, false, false, false], vec![false, true, false, false]];
        assert_eq!(classify(&cyclic), CubeKind::Unclassifiable);
    }

    #[test]
    fn m5_canonical_orientation() {
        let c = find_standard_coloring().unwrap();
        let s0 = initial_state(&c).unwrap();
        let moves = MoveSet::canonical();
        let m = assemble_m5_with_states(&c, s0, &moves);
        let skel = orient_dual_edges(&m).unwrap();
        assert!(skel.crossing_violations.is_empty());
        assert_eq!(skel.unclassifiable().count(), 0);
        assert!(skel.bad_squares().count() > 0);
        let bad = bad_ridges(&c, &moves);
        for sq in skel.bad_squares() {
            assert!(bad.contains(&sq.face));
            assert!(is_alternating(&square_crossing_pattern(&m, sq).unwrap()));
        }
        let census = cusp_census(&m).unwrap();
        let reports = boundary_torus_analysis(&m, &c, &moves, &census).unwrap();
        assert!(reports.iter().all(|r| r.certified), "{reports:?}");
    }

    #[test]
    fn sparse_moves_give_coherent_cubes() {
        let c = find_standard_coloring().unwrap();
        let s0 = initial_state(&c).unwrap();
        let moves = MoveSet::singletons();
        let m = assemble_m5_with_states(&c, s0, &moves);
        let skel = orient_dual_edges(&m).unwrap();
        let census = skel.census();
        assert!(census.bad.iter().all(|&n| n == 0));
        assert!(census.unclassifiable.iter().all(|&n| n == 0));
        let cusps = cusp_census(&m).unwrap();
        let reports = boundary_torus_analysis(&m, &c, &moves, &cusps).unwrap();
        for r in reports.iter().filter(|r| r.kind == CuspKind::Large) {
            assert_eq!(r.loop_sums, [0; 4]);
        }
    }
}
