//! Colorings of the facets of the polytope by eight colors.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::polytope::{
    are_adjacent, enumerate_facets, permutations, r16_generators, SignVector, SignedPermutation,
    FACET_COUNT,
};

pub const COLOR_COUNT: usize = 8;

/// A color in `1..=8`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Color(u8);

impl Color {
    pub fn new(c: u8) -> Option<Self> {
        (1..=COLOR_COUNT as u8).contains(&c).then_some(Color(c))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based position, for indexing arrays and bit masks.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(i: usize) -> Self {
        Color::new(i as u8 + 1).expect("color index in range")
    }

    pub fn all() -> impl Iterator<Item = Color> {
        (1..=COLOR_COUNT as u8).map(Color)
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Color permutations the four named symmetries must induce, as images of `1..=8`.
pub const TARGET_PERMUTATIONS: [(&str, [u8; COLOR_COUNT]); 4] = [
    ("Li", [2, 1, 4, 3, 6, 5, 8, 7]),
    ("Lj", [3, 4, 1, 2, 7, 8, 5, 6]),
    ("Lk", [4, 3, 2, 1, 8, 7, 6, 5]),
    ("iota", [5, 6, 8, 7, 1, 2, 4, 3]),
];

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coloring {
    by_facet: [Color; FACET_COUNT],
}

impl Coloring {
    pub fn new(by_facet: [Color; FACET_COUNT]) -> Result<Self> {
        let c = Coloring { by_facet };
        c.validate()?;
        Ok(c)
    }

    pub fn color(&self, f: SignVector) -> Color {
        self.by_facet[f.index()]
    }

    /// The two facets of a color, in lexicographic order.
    pub fn facets_of(&self, c: Color) -> [SignVector; 2] {
        let mut it = enumerate_facets().into_iter().filter(|&f| self.color(f) == c);
        let a = it.next().expect("every color is used");
        let b = it.next().expect("every color is used twice");
        [a, b]
    }

    /// Bit mask over facet indices of the facets carrying colors in `colors`.
    pub fn facet_mask(&self, colors: impl IntoIterator<Item = Color>) -> u16 {
        let wanted: u8 = colors.into_iter().fold(0, |m, c| m | (1 << c.index()));
        enumerate_facets()
            .into_iter()
            .filter(|&f| wanted & (1 << self.color(f).index()) != 0)
            .fold(0, |m, f| m | (1 << f.index()))
    }

    /// Checks that color classes are the quaternion-flip pairs and that
    /// adjacent facets get distinct colors.
    pub fn validate(&self) -> Result<()> {
        let facets = enumerate_facets();
        for &f in &facets {
            if self.color(f) != self.color(f.quaternion_flip()) {
                return Err(Error::Verification(format!(
                    "facets {f} and {} have different colors",
                    f.quaternion_flip()
                )));
            }
            for &g in &facets {
                if are_adjacent(f, g) && self.color(f) == self.color(g) {
                    return Err(Error::Verification(format!(
                        "adjacent facets {f} and {g} share color {}",
                        self.color(f)
                    )));
                }
            }
        }
        let mut counts = [0; COLOR_COUNT];
        for f in facets {
            counts[self.color(f).index()] += 1;
        }
        if counts.iter().any(|&n| n != 2) {
            return Err(Error::Verification("every color must be used exactly twice".into()));
        }
        Ok(())
    }

    /// The permutation of colors induced by `g`, if `g` maps color classes to
    /// color classes.
    pub fn color_permutation(&self, g: &SignedPermutation) -> Option<[Color; COLOR_COUNT]> {
        let mut out = [Color(1); COLOR_COUNT];
        for c in Color::all() {
            let [a, b] = self.facets_of(c);
            let ca = self.color(g.apply_facet(a));
            if self.color(g.apply_facet(b)) != ca {
                return None;
            }
            out[c.index()] = ca;
        }
        Some(out)
    }

    /// The four facets colored `t` or `t + 4`, as two adjacent pairs
    /// `(t-facet, (t+4)-facet)` differing exactly at coordinates `t` and 5.
    pub fn quartet(&self, t: u8) -> Option<[(SignVector, SignVector); 2]> {
        let low = Color::new(t)?;
        let high = Color::new(t + 4)?;
        let axis = t as usize - 1;
        let highs = self.facets_of(high);
        let mut pairs = Vec::new();
        for a in self.facets_of(low) {
            let partners: Vec<SignVector> = highs
                .iter()
                .copied()
                .filter(|b| (0..5).all(|k| (a.get(k) != b.get(k)) == (k == axis || k == 4)))
                .collect();
            if partners.len() != 1 {
                return None;
            }
            pairs.push((a, partners[0]));
        }
        if pairs[0].1 == pairs[1].1 {
            return None;
        }
        Some([pairs[0], pairs[1]])
    }

    pub fn satisfies_quartet_rule(&self) -> bool {
        (1..=4).all(|t| self.quartet(t).is_some())
    }

    pub fn realizes_target_permutations(&self) -> bool {
        let gens: BTreeMap<&str, SignedPermutation> = r16_generators().into_iter().collect();
        TARGET_PERMUTATIONS.iter().all(|(name, target)| {
            self.color_permutation(&gens[name])
                .is_some_and(|p| p.iter().zip(target).all(|(c, &t)| c.get() == t))
        })
    }

    /// Applies `relabel[c - 1]` to every color.
    pub fn relabeled(&self, relabel: &[Color; COLOR_COUNT]) -> Coloring {
        Coloring {
            by_facet: self.by_facet.map(|c| relabel[c.index()]),
        }
    }

    pub fn to_json(&self) -> Value {
        let map: serde_json::Map<String, Value> = enumerate_facets()
            .into_iter()
            .map(|f| (f.to_string(), json!(self.color(f).get())))
            .collect();
        Value::Object(map)
    }
}

/// The eight quaternion-flip pairs, in order of their first facet.
pub fn flip_pairs() -> Vec<[SignVector; 2]> {
    let mut out = Vec::new();
    for f in enumerate_facets() {
        let g = f.quaternion_flip();
        if f < g {
            out.push([f, g]);
        }
    }
    out
}

/// Every assignment of the eight colors to the flip pairs that satisfies the
/// quartet rule and realizes the target permutations.
pub fn all_solutions() -> Vec<Coloring> {
    let pairs = flip_pairs();
    permutations(COLOR_COUNT)
        .into_iter()
        .filter_map(|perm| {
            let mut by_facet = [Color(1); FACET_COUNT];
            for (pair, &c) in pairs.iter().zip(&perm) {
                for f in pair {
                    by_facet[f.index()] = Color::from_index(c);
                }
            }
            let col = Coloring { by_facet };
            (col.validate().is_ok()
                && col.satisfies_quartet_rule()
                && col.realizes_target_permutations())
            .then_some(col)
        })
        .collect()
}

/// The solution giving color 8 to `----+`.
pub fn find_standard_coloring() -> Result<Coloring> {
    let anchor: SignVector = "----+".parse().expect("valid sign string");
    all_solutions()
        .into_iter()
        .find(|c| c.color(anchor) == Color(8))
        .ok_or(Error::NoColoring)
}
