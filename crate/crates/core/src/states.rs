//! I/O states of the facets, move sets, and the combinatorics built on them.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::coloring::{Color, Coloring, COLOR_COUNT};
use crate::error::{Error, Result};
use crate::lattice::FaceId;
use crate::polytope::{are_adjacent, enumerate_facets, polytope, SignVector, SignedPermutation, FACET_COUNT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    I,
    O,
}

impl Status {
    pub fn flipped(self) -> Status {
        match self {
            Status::I => Status::O,
            Status::O => Status::I,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::I => "I",
            Status::O => "O",
        })
    }
}

/// A status for each facet, stored as the bit mask of I-facets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(u16);

impl State {
    pub fn from_mask(in_mask: u16) -> Self {
        State(in_mask)
    }

    pub fn from_in_facets(facets: impl IntoIterator<Item = SignVector>) -> Self {
        State(facets.into_iter().fold(0, |m, f| m | (1 << f.index())))
    }

    pub fn in_mask(self) -> u16 {
        self.0
    }

    pub fn status(self, f: SignVector) -> Status {
        if self.0 & (1 << f.index()) != 0 {
            Status::I
        } else {
            Status::O
        }
    }

    pub fn in_facets(self) -> Vec<SignVector> {
        enumerate_facets()
            .into_iter()
            .filter(|&f| self.status(f) == Status::I)
            .collect()
    }

    /// Flips the statuses of the facets in `mask`.
    pub fn flip(self, mask: u16) -> State {
        State(self.0 ^ mask)
    }

    pub fn reversed(self) -> State {
        State(!self.0)
    }

    /// Transport by an isometry: `g·s` gives `g(f)` the status `s` gives `f`.
    pub fn transported(self, g: &SignedPermutation) -> State {
        State::from_in_facets(self.in_facets().into_iter().map(|f| g.apply_facet(f)))
    }

    /// Balanced: in every quartet one adjacent pair is I and the other is O.
    pub fn is_balanced(self, coloring: &Coloring) -> bool {
        (1..=4).all(|t| {
            coloring.quartet(t).is_some_and(|pairs| {
                let st = |(a, b): (SignVector, SignVector)| {
                    let s = self.status(a);
                    (s == self.status(b)).then_some(s)
                };
                matches!((st(pairs[0]), st(pairs[1])), (Some(x), Some(y)) if x != y)
            })
        })
    }

    /// The unique I-facet adjacent to every other I-facet, if there is one.
    pub fn center(self) -> Option<SignVector> {
        let ins = self.in_facets();
        let mut it = ins
            .iter()
            .copied()
            .filter(|&f| ins.iter().all(|&g| g == f || are_adjacent(f, g)));
        let c = it.next()?;
        it.next().is_none().then_some(c)
    }

    /// Ridges between an I-facet and an O-facet, as facet pairs.
    pub fn mixed_ridges(self) -> Vec<(SignVector, SignVector)> {
        let facets = enumerate_facets();
        let mut out = Vec::new();
        for &f in &facets {
            for &g in &facets {
                if f < g && are_adjacent(f, g) && self.status(f) != self.status(g) {
                    out.push((f, g));
                }
            }
        }
        out
    }

    pub fn to_json(self) -> Value {
        json!(self.to_string())
    }
}

/// One character per facet in lexicographic facet order.
impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in enumerate_facets() {
            write!(f, "{}", self.status(g))?;
        }
        Ok(())
    }
}

impl FromStr for State {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.len() != FACET_COUNT {
            return Err(Error::Verification(format!("state '{s}' must have {FACET_COUNT} characters")));
        }
        let mut mask = 0u16;
        for (i, c) in chars.into_iter().enumerate() {
            match c {
                'I' => mask |= 1 << i,
                'O' => {}
                _ => return Err(Error::Verification(format!("state '{s}' has a character other than I/O"))),
            }
        }
        Ok(State(mask))
    }
}

/// A partition of the colors into blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MoveSet {
    blocks: Vec<Vec<Color>>,
}

impl MoveSet {
    pub fn new(mut blocks: Vec<Vec<Color>>) -> Result<Self> {
        let mut seen = 0u8;
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::Verification("empty move".into()));
            }
            b.sort();
            for c in b.iter() {
                if seen & (1 << c.index()) != 0 {
                    return Err(Error::Verification(format!("color {c} in two moves")));
                }
                seen |= 1 << c.index();
            }
        }
        if seen.count_ones() as usize != COLOR_COUNT {
            return Err(Error::Verification("moves must cover every color".into()));
        }
        blocks.sort();
        Ok(MoveSet { blocks })
    }

    /// `{1,5} {2,6} {3,7} {4,8}`.
    pub fn canonical() -> Self {
        let c = |i| Color::new(i).expect("color");
        MoveSet::new((1..=4).map(|t| vec![c(t), c(t + 4)]).collect()).expect("partition")
    }

    pub fn singletons() -> Self {
        MoveSet::new(Color::all().map(|c| vec![c]).collect()).expect("partition")
    }

    pub fn blocks(&self) -> &[Vec<Color>] {
        &self.blocks
    }

    pub fn block_of(&self, c: Color) -> &[Color] {
        self.blocks
            .iter()
            .find(|b| b.contains(&c))
            .expect("moves cover every color")
    }

    pub fn same_block(&self, a: Color, b: Color) -> bool {
        self.block_of(a).contains(&b)
    }

    pub fn to_json(&self) -> Value {
        json!(self
            .blocks
            .iter()
            .map(|b| b.iter().map(|c| c.get()).collect::<Vec<_>>())
            .collect::<Vec<_>>())
    }
}

impl fmt::Display for MoveSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                let inner: Vec<String> = b.iter().map(|c| c.to_string()).collect();
                format!("{{{}}}", inner.join(","))
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Flips the statuses of the facets colored in `block`.
pub fn apply_move(s: State, coloring: &Coloring, block: &[Color]) -> State {
    s.flip(coloring.facet_mask(block.iter().copied()))
}

/// The sixteen balanced states, sorted.
pub fn enumerate_balanced(coloring: &Coloring) -> Result<Vec<State>> {
    let quartets = (1..=4)
        .map(|t| coloring.quartet(t).ok_or(Error::NoColoring))
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<State> = (0..16u32)
        .map(|choice| {
            State::from_in_facets(quartets.iter().enumerate().flat_map(|(t, pairs)| {
                let (a, b) = pairs[((choice >> t) & 1) as usize];
                [a, b]
            }))
        })
        .collect();
    out.sort();
    Ok(out)
}

/// The balanced state whose center carries color 8.
pub fn initial_state(coloring: &Coloring) -> Result<State> {
    let eight = Color::new(8).expect("color");
    enumerate_balanced(coloring)?
        .into_iter()
        .find(|s| s.center().is_some_and(|c| coloring.color(c) == eight))
        .ok_or_else(|| Error::Verification("no balanced state is centered at color 8".into()))
}

/// A copy label in `Z_2^8`: bit `c - 1` is the coordinate of color `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CopyLabel(pub u8);

impl CopyLabel {
    pub fn coordinate(self, c: Color) -> bool {
        self.0 & (1 << c.index()) != 0
    }

    pub fn step(self, c: Color) -> CopyLabel {
        CopyLabel(self.0 ^ (1 << c.index()))
    }

    pub fn all() -> impl Iterator<Item = CopyLabel> {
        (0..=255u8).map(CopyLabel)
    }
}

impl fmt::Display for CopyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in Color::all() {
            write!(f, "{}", u8::from(self.coordinate(c)))?;
        }
        Ok(())
    }
}

/// `s_v`: `s0` with every block applied whose coordinate sum in `v` is odd.
pub fn assign_states(coloring: &Coloring, s0: State, moves: &MoveSet, v: CopyLabel) -> State {
    moves.blocks().iter().fold(s0, |s, block| {
        let odd = block.iter().filter(|&&c| v.coordinate(c)).count() % 2 == 1;
        if odd {
            apply_move(s, coloring, block)
        } else {
            s
        }
    })
}

/// Every block's facets are pairwise non-adjacent.
pub fn is_sparse(coloring: &Coloring, moves: &MoveSet) -> bool {
    moves.blocks().iter().all(|block| {
        let mask = coloring.facet_mask(block.iter().copied());
        let fs: Vec<SignVector> = enumerate_facets()
            .into_iter()
            .filter(|f| mask & (1 << f.index()) != 0)
            .collect();
        fs.iter()
            .all(|&a| fs.iter().all(|&b| a == b || !are_adjacent(a, b)))
    })
}

/// All set partitions of the eight colors, by restricted growth strings.
pub fn all_move_sets() -> Vec<MoveSet> {
    fn grow(prefix: &mut Vec<usize>, max: usize, out: &mut Vec<MoveSet>) {
        if prefix.len() == COLOR_COUNT {
            let mut blocks = vec![Vec::new(); max + 1];
            for (i, &b) in prefix.iter().enumerate() {
                blocks[b].push(Color::from_index(i));
            }
            out.push(MoveSet::new(blocks).expect("restricted growth strings give partitions"));
            return;
        }
        for b in 0..=max + 1 {
            prefix.push(b);
            grow(prefix, max.max(b), out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    let mut prefix = vec![0];
    grow(&mut prefix, 0, &mut out);
    out
}

/// Ridges whose two facets have colors in a common block.
pub fn bad_ridges(coloring: &Coloring, moves: &MoveSet) -> Vec<FaceId> {
    let p = polytope();
    let facets = enumerate_facets();
    let mut out = Vec::new();
    for &f in &facets {
        for &g in &facets {
            if f < g && are_adjacent(f, g) && moves.same_block(coloring.color(f), coloring.color(g)) {
                out.push(p.ridge(f, g).expect("adjacent facets meet in a ridge"));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Induced color permutation of `g` with, per color, whether the statuses of
/// that color are reversed (a bar) when comparing `s` and `g·s`.
pub fn barred_permutation(
    coloring: &Coloring,
    s: State,
    g: &SignedPermutation,
) -> Option<[(Color, bool); COLOR_COUNT]> {
    let perm = coloring.color_permutation(g)?;
    let mut out = [(Color::from_index(0), false); COLOR_COUNT];
    for c in Color::all() {
        let [a, b] = coloring.facets_of(c);
        let bar_a = s.status(a) != s.status(g.apply_facet(a));
        let bar_b = s.status(b) != s.status(g.apply_facet(b));
        if bar_a != bar_b {
            return None;
        }
        out[c.index()] = (perm[c.index()], bar_a);
    }
    Some(out)
}

pub fn bar_count(barred: &[(Color, bool); COLOR_COUNT]) -> usize {
    barred.iter().filter(|(_, b)| *b).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::find_standard_coloring;
    use crate::polytope::r16_generators;

    #[test]
    fn partitions_and_sparseness() {
        let c = find_standard_coloring().unwrap();
        let all = all_move_sets();
        assert_eq!(all.len(), 4140);
        let sparse: Vec<_> = all.iter().filter(|m| is_sparse(&c, m)).collect();
        assert_eq!(sparse, vec![&MoveSet::singletons()]);
        assert!(!is_sparse(&c, &MoveSet::canonical()));
    }

    #[test]
    fn balanced_states_and_centers() {
        let c = find_standard_coloring().unwrap();
        let bal = enumerate_balanced(&c).unwrap();
        assert_eq!(bal.len(), 16);
        let mut centers: Vec<_> = bal.iter().map(|s| s.center().unwrap()).collect();
        assert!(bal.iter().all(|s| s.is_balanced(&c)));
        centers.sort();
        centers.dedup();
        assert_eq!(centers.len(), 16);
        for s in &bal {
            for block in MoveSet::canonical().blocks() {
                assert!(bal.contains(&apply_move(*s, &c, block)));
            }
        }
    }

    #[test]
    fn state_text_roundtrip() {
        let s = State::from_mask(0b1010_0000_1111_0001);
        assert_eq!(s.to_string().parse::<State>().unwrap(), s);
        assert!("IOI".parse::<State>().is_err());
    }

    #[test]
    fn bars_are_consistent_on_balanced_states() {
        let c = find_standard_coloring().unwrap();
        let s0 = initial_state(&c).unwrap();
        for (_, g) in r16_generators() {
            assert!(barred_permutation(&c, s0, &g).is_some());
        }
    }
}
