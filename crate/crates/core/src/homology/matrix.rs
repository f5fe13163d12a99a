use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::ParseError;

/// A sparse integer matrix in coordinate form with no repeated positions.
///
/// Entries are stored as `i64`; all elimination arithmetic on them is exact
/// and falls back to arbitrary precision when needed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseIntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(u32, u32, i64)>,
}

impl SparseIntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseIntMatrix {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    /// Sums repeated positions and drops zeros.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, i64)>,
    ) -> Self {
        let mut acc: BTreeMap<(u32, u32), i64> = BTreeMap::new();
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "entry ({r}, {c}) outside {rows}x{cols}");
            *acc.entry((c as u32, r as u32)).or_default() += v;
        }
        let entries = acc
            .into_iter()
            .filter(|(_, v)| *v != 0)
            .map(|((c, r), v)| (r, c, v))
            .collect();
        SparseIntMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn from_dense(d: &[Vec<i64>]) -> Self {
        let rows = d.len();
        let cols = d.first().map_or(0, |r| r.len());
        SparseIntMatrix::from_triplets(
            rows,
            cols,
            d.iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (i, j, v))),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Entries sorted by column, then row.
    pub fn entries(&self) -> &[(u32, u32, i64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut d = vec![vec![0i64; self.cols]; self.rows];
        for &(r, c, v) in &self.entries {
            d[r as usize][c as usize] = v;
        }
        d
    }

    pub fn transpose(&self) -> Self {
        SparseIntMatrix::from_triplets(
            self.cols,
            self.rows,
            self.entries
                .iter()
                .map(|&(r, c, v)| (c as usize, r as usize, v)),
        )
    }

    /// Column-major lists of `(row, value)`.
    pub fn columns(&self) -> Vec<Vec<(u32, i64)>> {
        let mut out = vec![Vec::new(); self.cols];
        for &(r, c, v) in &self.entries {
            out[c as usize].push((r, v));
        }
        out
    }

    /// `self * other`, with `i128` accumulation.
    pub fn mul(&self, other: &SparseIntMatrix) -> SparseIntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let self_cols = self.columns();
        let mut out = Vec::new();
        for (j, col) in other.columns().iter().enumerate() {
            let mut acc: BTreeMap<u32, i128> = BTreeMap::new();
            for &(k, b) in col {
                for &(i, a) in &self_cols[k as usize] {
                    *acc.entry(i).or_default() += i128::from(a) * i128::from(b);
                }
            }
            for (i, v) in acc {
                if v != 0 {
                    out.push((i as usize, j, i64::try_from(v).expect("product overflows i64")));
                }
            }
        }
        SparseIntMatrix::from_triplets(self.rows, other.cols, out)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Coordinate text: a header `rows cols nnz`, then one `row col value` line
    /// per entry (0-based). Lines starting with `#` are comments.
    pub fn to_coordinate_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.rows, self.cols, self.entries.len());
        for &(r, c, v) in &self.entries {
            let _ = writeln!(s, "{r} {c} {v}");
        }
        s
    }

    pub fn from_coordinate_text(text: &str) -> Result<Self, ParseError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines
            .next()
            .ok_or_else(|| ParseError::new(1, "missing header"))?;
        let h: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| ParseError::new(hl, "header must be 'rows cols nnz'"))?;
        if h.len() != 3 {
            return Err(ParseError::new(hl, "header must be 'rows cols nnz'"));
        }
        let (rows, cols, nnz) = (h[0], h[1], h[2]);
        let mut seen = std::collections::HashSet::new();
        let mut trip = Vec::with_capacity(nnz);
        for (ln, line) in lines {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 3 {
                return Err(ParseError::new(ln, "expected 'row col value'"));
            }
            let r: usize = t[0].parse().map_err(|_| ParseError::new(ln, "bad row"))?;
            let c: usize = t[1].parse().map_err(|_| ParseError::new(ln, "bad column"))?;
            let v: i64 = t[2]
                .parse()
                .map_err(|_| ParseError::new(ln, "bad value (must fit in 64 bits)"))?;
            if r >= rows || c >= cols {
                return Err(ParseError::new(ln, "position outside the matrix"));
            }
            if !seen.insert((r, c)) {
                return Err(ParseError::new(ln, "duplicate position"));
            }
            trip.push((r, c, v));
        }
        if trip.len() != nnz {
            return Err(ParseError::new(
                hl,
                format!("header announces {nnz} entries, found {}", trip.len()),
            ));
        }
        Ok(SparseIntMatrix::from_triplets(rows, cols, trip))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_roundtrip() {
        let m = SparseIntMatrix::from_dense(&[vec![1, 0, -2], vec![0, 3, 0]]);
        let t = m.to_coordinate_text();
        assert_eq!(SparseIntMatrix::from_coordinate_text(&t).unwrap(), m);
    }

    #[test]
    fn coordinate_errors_carry_lines() {
        let e = SparseIntMatrix::from_coordinate_text("2 2 1\n0 5 1\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = SparseIntMatrix::from_coordinate_text("2 2 2\n0 0 1\n0 0 1\n").unwrap_err();
        assert_eq!(e.line, 3);
    }

    #[test]
    fn product() {
        let a = SparseIntMatrix::from_dense(&[vec![1, 2], vec![0, 1]]);
        let b = SparseIntMatrix::from_dense(&[vec![1, -2], vec![0, 1]]);
        assert_eq!(a.mul(&b).to_dense(), vec![vec![1, 0], vec![0, 1]]);
    }
}
