//! Smith normal form and ranks of sparse integer matrices.
//!
//! Elimination runs in two phases. A sparse phase pivots on unit entries,
//! choosing among them by smallest column count and then shortest row, which
//! keeps fill-in low on boundary matrices. Whatever survives has no unit
//! entries and is handed to a dense arbitrary-precision Smith reduction.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::SparseIntMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub rank: usize,
    /// The nonzero diagonal entries `d1 | d2 | …`, all positive.
    pub invariant_factors: Vec<BigInt>,
}

impl SmithForm {
    /// Invariant factors greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.invariant_factors
            .iter()
            .filter(|d| !d.is_one())
            .cloned()
            .collect()
    }
}

#[derive(Debug)]
struct Overflow;

trait Ring {
    type E: Clone + PartialEq;
    fn from_i64(&self, v: i64) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn is_unit(&self, a: &Self::E) -> bool;
    /// `a / pivot` for a unit pivot.
    fn quotient(&self, a: &Self::E, pivot: &Self::E) -> Result<Self::E, Overflow>;
    /// `x - f * y`.
    fn sub_mul(&self, x: &Self::E, f: &Self::E, y: &Self::E) -> Result<Self::E, Overflow>;
}

struct SmallIntegers;

impl Ring for SmallIntegers {
    type E = i64;
    fn from_i64(&self, v: i64) -> i64 {
        v
    }
    fn is_zero(&self, a: &i64) -> bool {
        *a == 0
    }
    fn is_unit(&self, a: &i64) -> bool {
        *a == 1 || *a == -1
    }
    fn quotient(&self, a: &i64, pivot: &i64) -> Result<i64, Overflow> {
        a.checked_mul(*pivot).ok_or(Overflow)
    }
    fn sub_mul(&self, x: &i64, f: &i64, y: &i64) -> Result<i64, Overflow> {
        f.checked_mul(*y)
            .and_then(|p| x.checked_sub(p))
            .ok_or(Overflow)
    }
}

struct BigIntegers;

impl Ring for BigIntegers {
    type E = BigInt;
    fn from_i64(&self, v: i64) -> BigInt {
        BigInt::from(v)
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn is_unit(&self, a: &BigInt) -> bool {
        a.abs().is_one()
    }
    fn quotient(&self, a: &BigInt, pivot: &BigInt) -> Result<BigInt, Overflow> {
        Ok(a * pivot)
    }
    fn sub_mul(&self, x: &BigInt, f: &BigInt, y: &BigInt) -> Result<BigInt, Overflow> {
        Ok(x - f * y)
    }
}

struct PrimeField {
    p: u64,
}

impl PrimeField {
    fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }
    fn inv(&self, a: u64) -> u64 {
        // Fermat
        let mut base = a;
        let mut e = self.p - 2;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

impl Ring for PrimeField {
    type E = u64;
    fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn is_unit(&self, a: &u64) -> bool {
        *a != 0
    }
    fn quotient(&self, a: &u64, pivot: &u64) -> Result<u64, Overflow> {
        Ok(self.mul(*a, self.inv(*pivot)))
    }
    fn sub_mul(&self, x: &u64, f: &u64, y: &u64) -> Result<u64, Overflow> {
        let p = self.mul(*f, *y);
        Ok((*x + self.p - p) % self.p)
    }
}

type Row<E> = Vec<(u32, E)>;

fn entry<E>(row: &Row<E>, c: u32) -> &E {
    let pos = row
        .binary_search_by_key(&c, |(k, _)| *k)
        .expect("column index lists are exact");
    &row[pos].1
}

fn remove_index(list: &mut Vec<u32>, x: u32) {
    if let Some(pos) = list.iter().position(|&y| y == x) {
        list.swap_remove(pos);
    }
}

/// Unit-pivot sparse elimination. Returns the pivot count and the surviving rows.
fn sparse_eliminate<R: Ring>(
    ring: &R,
    m: &SparseIntMatrix,
) -> Result<(usize, Vec<Row<R::E>>), Overflow> {
    let mut rows: Vec<Row<R::E>> = vec![Vec::new(); m.rows()];
    for &(r, c, v) in m.entries() {
        let e = ring.from_i64(v);
        if !ring.is_zero(&e) {
            rows[r as usize].push((c, e));
        }
    }
    for r in rows.iter_mut() {
        r.sort_by_key(|(c, _)| *c);
    }
    let mut col_rows: Vec<Vec<u32>> = vec![Vec::new(); m.cols()];
    for (i, r) in rows.iter().enumerate() {
        for (c, _) in r {
            col_rows[*c as usize].push(i as u32);
        }
    }
    let mut heap: BinaryHeap<Reverse<(usize, u32)>> = col_rows
        .iter()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(c, l)| Reverse((l.len(), c as u32)))
        .collect();
    let mut pivots = 0;
    while let Some(Reverse((count, c))) = heap.pop() {
        let cur = col_rows[c as usize].len();
        if cur == 0 {
            continue;
        }
        if cur != count {
            heap.push(Reverse((cur, c)));
            continue;
        }
        let mut best: Option<(usize, u32)> = None;
        for &r in &col_rows[c as usize] {
            let row = &rows[r as usize];
            if ring.is_unit(entry(row, c)) && best.is_none_or(|(len, _)| row.len() < len) {
                best = Some((row.len(), r));
            }
        }
        // a column without units waits until a later pivot changes it
        let Some((_, pr)) = best else { continue };
        let prow = std::mem::take(&mut rows[pr as usize]);
        for (cc, _) in &prow {
            remove_index(&mut col_rows[*cc as usize], pr);
        }
        let pval = entry(&prow, c).clone();
        let others = col_rows[c as usize].clone();
        for r2 in others {
            let old = std::mem::take(&mut rows[r2 as usize]);
            let f = ring.quotient(entry(&old, c), &pval)?;
            let mut merged = Vec::with_capacity(old.len() + prow.len());
            let (mut i, mut j) = (0, 0);
            while i < old.len() || j < prow.len() {
                let ci = old.get(i).map(|x| x.0).unwrap_or(u32::MAX);
                let cj = prow.get(j).map(|x| x.0).unwrap_or(u32::MAX);
                if ci < cj {
                    merged.push(old[i].clone());
                    i += 1;
                } else if cj < ci {
                    let zero = ring.from_i64(0);
                    let v = ring.sub_mul(&zero, &f, &prow[j].1)?;
                    if !ring.is_zero(&v) {
                        merged.push((cj, v));
                        col_rows[cj as usize].push(r2);
                    }
                    j += 1;
                } else {
                    let v = ring.sub_mul(&old[i].1, &f, &prow[j].1)?;
                    if ring.is_zero(&v) {
                        remove_index(&mut col_rows[ci as usize], r2);
                    } else {
                        merged.push((ci, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
            rows[r2 as usize] = merged;
        }
        pivots += 1;
        for (cc, _) in &prow {
            let l = col_rows[*cc as usize].len();
            if l > 0 {
                heap.push(Reverse((l, *cc)));
            }
        }
    }
    Ok((pivots, rows.into_iter().filter(|r| !r.is_empty()).collect()))
}

fn to_dense(rows: Vec<Row<BigInt>>) -> Vec<Vec<BigInt>> {
    let mut cols: Vec<u32> = rows.iter().flat_map(|r| r.iter().map(|x| x.0)).collect();
    cols.sort_unstable();
    cols.dedup();
    rows.into_iter()
        .map(|r| {
            let mut d = vec![BigInt::zero(); cols.len()];
            for (c, v) in r {
                d[cols.binary_search(&c).expect("column present")] = v;
            }
            d
        })
        .collect()
}

fn big_rows(rows: Vec<Row<i64>>) -> Vec<Row<BigInt>> {
    rows.into_iter()
        .map(|r| r.into_iter().map(|(c, v)| (c, BigInt::from(v))).collect())
        .collect()
}

/// Sparse phase over the integers, retrying with big integers on overflow.
fn integer_phase(m: &SparseIntMatrix) -> (usize, Vec<Row<BigInt>>) {
    match sparse_eliminate(&SmallIntegers, m) {
        Ok((p, rest)) => (p, big_rows(rest)),
        Err(Overflow) => sparse_eliminate(&BigIntegers, m).expect("big integers do not overflow"),
    }
}

pub fn smith_normal_form(m: &SparseIntMatrix) -> SmithForm {
    let (pivots, rest) = integer_phase(m);
    let mut factors = vec![BigInt::one(); pivots];
    factors.extend(dense_smith(to_dense(rest)));
    SmithForm {
        rank: factors.len(),
        invariant_factors: factors,
    }
}

pub fn rank_over_rationals(m: &SparseIntMatrix) -> usize {
    let (pivots, rest) = integer_phase(m);
    pivots + dense_rank(to_dense(rest))
}

/// Rank over the prime field `F_p`.
pub fn rank_mod_p(m: &SparseIntMatrix, p: u64) -> usize {
    assert!(p >= 2, "modulus must be a prime");
    let (pivots, rest) = sparse_eliminate(&PrimeField { p }, m).expect("field arithmetic is exact");
    debug_assert!(rest.is_empty());
    pivots
}

/// Diagonalizes a dense matrix by unimodular row and column operations.
pub fn dense_smith(mut a: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut diag = Vec::new();
    let mut t = 0;
    while t < m && t < n {
        let Some((pi, pj)) = min_abs(&a, t, t..m, t..n) else {
            break;
        };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..m {
                if !a[i][t].is_zero() {
                    let q = a[i][t].div_floor(&a[t][t]);
                    for j in t..n {
                        let delta = &q * &a[t][j];
                        a[i][j] -= delta;
                    }
                    if !a[i][t].is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..n {
                if !a[t][j].is_zero() {
                    let q = a[t][j].div_floor(&a[t][t]);
                    for row in a.iter_mut().skip(t) {
                        let delta = &q * &row[t];
                        row[j] -= delta;
                    }
                    if !a[t][j].is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                // bring the smallest remainder in row t or column t to the pivot
                let mut best = (a[t][t].abs(), t, t);
                for i in t + 1..m {
                    if !a[i][t].is_zero() && a[i][t].abs() < best.0 {
                        best = (a[i][t].abs(), i, t);
                    }
                }
                for j in t + 1..n {
                    if !a[t][j].is_zero() && a[t][j].abs() < best.0 {
                        best = (a[t][j].abs(), t, j);
                    }
                }
                a.swap(t, best.1);
                for row in a.iter_mut() {
                    row.swap(t, best.2);
                }
                continue;
            }
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !(&a[i][j] % &a[t][t]).is_zero()));
            match bad {
                Some(i) => {
                    for j in t..n {
                        let v = a[i][j].clone();
                        a[t][j] += v;
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    diag
}

fn min_abs(
    a: &[Vec<BigInt>],
    _t: usize,
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
) -> Option<(usize, usize)> {
    let mut best: Option<(BigInt, usize, usize)> = None;
    for i in rows {
        for j in cols.clone() {
            if !a[i][j].is_zero() {
                let v = a[i][j].abs();
                if best.as_ref().is_none_or(|b| v < b.0) {
                    best = Some((v, i, j));
                }
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

/// Fraction-free (Bareiss) rank.
fn dense_rank(mut a: Vec<Vec<BigInt>>) -> usize {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    let mut prev = BigInt::one();
    for c in 0..n {
        if rank == m {
            break;
        }
        let Some(p) = (rank..m).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for i in rank + 1..m {
            for j in c + 1..n {
                let v = (&a[rank][c] * &a[i][j] - &a[i][c] * &a[rank][j]) / &prev;
                a[i][j] = v;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[rank][c].clone();
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factors(m: &SparseIntMatrix) -> Vec<i64> {
        smith_normal_form(m)
            .invariant_factors
            .iter()
            .map(|d| i64::try_from(d).unwrap())
            .collect()
    }

    #[test]
    fn diagonal_normalization() {
        let m = SparseIntMatrix::from_dense(&[vec![2, 0], vec![0, 3]]);
        assert_eq!(factors(&m), vec![1, 6]);
    }

    #[test]
    fn zero_matrix() {
        let m = SparseIntMatrix::zeros(3, 4);
        let s = smith_normal_form(&m);
        assert_eq!(s.rank, 0);
        assert!(s.invariant_factors.is_empty());
    }

    #[test]
    fn torsion_example() {
        let m = SparseIntMatrix::from_dense(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        assert_eq!(factors(&m), vec![2, 6, 12]);
    }

    #[test]
    fn ranks_agree() {
        let m = SparseIntMatrix::from_dense(&[vec![2, 0, 2], vec![0, 2, 2], vec![2, 2, 4]]);
        assert_eq!(rank_over_rationals(&m), 2);
        assert_eq!(rank_mod_p(&m, 2), 0);
        assert_eq!(rank_mod_p(&m, 3), 2);
    }

    #[test]
    fn overflow_falls_back_to_big_integers() {
        let big = i64::MAX - 1;
        let m = SparseIntMatrix::from_dense(&[vec![1, big], vec![1, -big], vec![0, 3]]);
        let s = smith_normal_form(&m);
        assert_eq!(s.rank, 2);
        assert_eq!(s.invariant_factors[0], BigInt::one());
    }
}
