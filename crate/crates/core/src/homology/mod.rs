//! Integral homology of finite chain complexes.

pub mod chains;
pub mod matrix;
pub mod presentation;
pub mod snf;

use std::fmt;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

pub use chains::{barycentric_complex, cellular_complex, ChainComplex};
pub use matrix::SparseIntMatrix;
pub use presentation::GroupPresentation;
pub use snf::{rank_mod_p, rank_over_rationals, smith_normal_form, SmithForm};

/// A finitely generated abelian group `Z^rank ⊕ Z/t1 ⊕ … ⊕ Z/tk`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AbelianGroup {
    pub rank: usize,
    /// Invariant factors greater than one, each dividing the next.
    pub torsion: Vec<BigInt>,
}

impl AbelianGroup {
    pub fn free(rank: usize) -> Self {
        AbelianGroup {
            rank,
            torsion: Vec::new(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    /// Torsion orders as machine integers, for comparisons in tests and reports.
    pub fn torsion_u64(&self) -> Vec<u64> {
        self.torsion
            .iter()
            .map(|t| u64::try_from(t).expect("torsion order fits in 64 bits"))
            .collect()
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        let mut i = 0;
        while i < self.torsion.len() {
            let t = &self.torsion[i];
            let run = self.torsion[i..].iter().take_while(|x| *x == t).count();
            parts.push(if run == 1 {
                format!("Z{t}")
            } else {
                format!("Z{t}^{run}")
            });
            i += run;
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl Serialize for AbelianGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `H_k` for `k = 0..=n` over the integers.
pub fn homology(c: &ChainComplex) -> Vec<AbelianGroup> {
    let n = c.top_degree();
    let forms: Vec<Option<SmithForm>> = (0..=n + 1)
        .into_par_iter()
        .map(|k| c.boundary(k).map(smith_normal_form))
        .collect();
    (0..=n)
        .map(|k| {
            let out_rank = forms[k].as_ref().map_or(0, |f| f.rank);
            let (in_rank, torsion) = forms[k + 1]
                .as_ref()
                .map_or((0, Vec::new()), |f| (f.rank, f.torsion()));
            AbelianGroup {
                rank: c.dim(k) - out_rank - in_rank,
                torsion,
            }
        })
        .collect()
}

/// Betti numbers over `Q` (`p = 0`) or over `F_p`.
pub fn betti_over_field(c: &ChainComplex, p: u64) -> Vec<usize> {
    let n = c.top_degree();
    let ranks: Vec<usize> = (0..=n + 1)
        .into_par_iter()
        .map(|k| match c.boundary(k) {
            None => 0,
            Some(m) if p == 0 => rank_over_rationals(m),
            Some(m) => rank_mod_p(m, p),
        })
        .collect();
    (0..=n).map(|k| c.dim(k) - ranks[k] - ranks[k + 1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display() {
        assert_eq!(AbelianGroup::default().to_string(), "0");
        let g = AbelianGroup {
            rank: 1,
            torsion: vec![4.into(), 4.into()],
        };
        assert_eq!(g.to_string(), "Z + Z4^2");
        let g = AbelianGroup {
            rank: 3,
            torsion: vec![2.into()],
        };
        assert_eq!(g.to_string(), "Z^3 + Z2");
    }

    #[test]
    fn projective_plane_like_complex() {
        // one cell in each degree 0..=2 with ∂2 = 2, ∂1 = 0
        let d1 = SparseIntMatrix::zeros(1, 1);
        let d2 = SparseIntMatrix::from_dense(&[vec![2]]);
        let c = ChainComplex::new(vec![1, 1, 1], vec![d1, d2]).unwrap();
        let h = homology(&c);
        assert_eq!(h[0], AbelianGroup::free(1));
        assert_eq!(h[1].to_string(), "Z2");
        assert!(h[2].is_trivial());
        assert_eq!(betti_over_field(&c, 0), vec![1, 0, 0]);
        assert_eq!(betti_over_field(&c, 2), vec![1, 1, 1]);
    }
}
