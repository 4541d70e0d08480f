//! Dense bit-packed linear algebra over GF(2).

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { len, words: vec![0; words_for(len)] }
    }

    pub fn from_support(len: usize, support: &[usize]) -> Self {
        let mut v = BitVec::zeros(len);
        for &i in support {
            v.flip(i);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    pub(crate) fn from_words(len: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), words_for(len));
        BitVec { len, words }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch");
        xor_words(&mut self.words, &other.words);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Parity of the bitwise AND.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch");
        dot_words(&self.words, &other.words)
    }

    pub fn support(&self) -> Vec<usize> {
        ones(&self.words).collect()
    }

    pub fn first_one(&self) -> Option<usize> {
        ones(&self.words).next()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn xor_words(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

#[inline]
pub(crate) fn dot_words(a: &[u64], b: &[u64]) -> bool {
    let mut acc = 0u64;
    for (x, y) in a.iter().zip(b) {
        acc ^= x & y;
    }
    acc.count_ones() & 1 == 1
}

pub(crate) fn ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut rest = w;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let b = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(wi * 64 + b)
        })
    })
}

/// Dense row-major matrix over GF(2).
///
/// The reduced row-echelon form of the row space is computed on first use
/// and cached; any mutation drops the cache.
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
    echelon: OnceLock<Arc<RowSpace>>,
}

impl Clone for BitMatrix {
    fn clone(&self) -> Self {
        BitMatrix {
            rows: self.rows,
            cols: self.cols,
            stride: self.stride,
            data: self.data.clone(),
            echelon: self.echelon.clone(),
        }
    }
}

impl PartialEq for BitMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl Eq for BitMatrix {}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        f.write_str(&self.to_text())
    }
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        BitMatrix { rows, cols, stride, data: vec![0; rows * stride], echelon: OnceLock::new() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BitMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Stack row vectors; all rows must share `cols`.
    pub fn from_rows(cols: usize, rows: &[BitVec]) -> Result<Self> {
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has length {} but matrix has {cols} columns",
                    r.len()
                )));
            }
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        Ok(m)
    }

    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Shape(format!("ragged row {i}")));
            }
            for (j, &b) in r.iter().enumerate() {
                match b {
                    0 => {}
                    1 => m.set(i, j, true),
                    _ => return Err(Error::Shape(format!("entry ({i},{j}) = {b} is not a bit"))),
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        (self.data[r * self.stride + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        self.echelon = OnceLock::new();
        let w = &mut self.data[r * self.stride + c / 64];
        let mask = 1u64 << (c % 64);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, r: usize, c: usize) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        self.echelon = OnceLock::new();
        self.data[r * self.stride + c / 64] ^= 1u64 << (c % 64);
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        self.echelon = OnceLock::new();
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVec {
        BitVec::from_words(self.cols, self.row_words(r).to_vec())
    }

    pub fn row_vecs(&self) -> Vec<BitVec> {
        (0..self.rows).map(|r| self.row(r)).collect()
    }

    pub fn row_support(&self, r: usize) -> Vec<usize> {
        ones(self.row_words(r)).collect()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        (0..self.rows)
            .map(|r| self.row_words(r).iter().map(|w| w.count_ones() as usize).sum())
            .collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.cols];
        for r in 0..self.rows {
            for c in ones(self.row_words(r)) {
                w[c] += 1;
            }
        }
        w
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in ones(self.row_words(r)) {
                t.data[c * t.stride + r / 64] |= 1u64 << (r % 64);
            }
        }
        t
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        let stride = out.stride;
        for r in 0..self.rows {
            let dst = &mut out.data[r * stride..(r + 1) * stride];
            for k in ones(&self.data[r * self.stride..(r + 1) * self.stride]) {
                xor_words(dst, other.row_words(k));
            }
        }
        Ok(out)
    }

    /// `self * v` for a column vector `v`.
    pub fn mul_vec(&self, v: &BitVec) -> Result<BitVec> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        let mut out = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            if dot_words(self.row_words(r), v.words()) {
                out.set(r, true);
            }
        }
        Ok(out)
    }

    /// `v^T * self` as a row vector.
    pub fn vec_mul(&self, v: &BitVec) -> Result<BitVec> {
        if v.len() != self.rows {
            return Err(Error::Shape(format!(
                "vector of length {} against {} rows",
                v.len(),
                self.rows
            )));
        }
        let mut out = vec![0u64; self.stride];
        for r in v.support() {
            xor_words(&mut out, self.row_words(r));
        }
        Ok(BitVec::from_words(self.cols, out))
    }

    pub fn hstack(blocks: &[&BitMatrix]) -> Result<BitMatrix> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        if blocks.iter().any(|b| b.rows != rows) {
            return Err(Error::Shape("hstack blocks disagree on row count".into()));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = BitMatrix::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            for r in 0..b.rows {
                for c in ones(b.row_words(r)) {
                    out.data[r * out.stride + (offset + c) / 64] |= 1u64 << ((offset + c) % 64);
                }
            }
            offset += b.cols;
        }
        Ok(out)
    }

    pub fn vstack(blocks: &[&BitMatrix]) -> Result<BitMatrix> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        if blocks.iter().any(|b| b.cols != cols) {
            return Err(Error::Shape("vstack blocks disagree on column count".into()));
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut out = BitMatrix::zeros(rows, cols);
        let mut r0 = 0;
        for b in blocks {
            out.data[r0 * out.stride..(r0 + b.rows) * out.stride].copy_from_slice(&b.data);
            r0 += b.rows;
        }
        Ok(out)
    }

    pub fn kron(&self, other: &BitMatrix) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for r1 in 0..self.rows {
            for c1 in ones(self.row_words(r1)) {
                for r2 in 0..other.rows {
                    for c2 in ones(other.row_words(r2)) {
                        let r = r1 * other.rows + r2;
                        let c = c1 * other.cols + c2;
                        out.data[r * out.stride + c / 64] |= 1u64 << (c % 64);
                    }
                }
            }
        }
        out
    }

    /// Drop duplicate rows, keeping first occurrences.
    pub fn dedup_rows(&self) -> BitMatrix {
        let mut seen = std::collections::HashSet::new();
        let kept: Vec<BitVec> =
            (0..self.rows).map(|r| self.row(r)).filter(|v| seen.insert(v.clone())).collect();
        BitMatrix::from_rows(self.cols, &kept).expect("rows share column count")
    }

    /// Reduced row-echelon form of the row space (cached).
    pub fn row_space(&self) -> Arc<RowSpace> {
        self.echelon.get_or_init(|| Arc::new(RowSpace::from_matrix(self))).clone()
    }

    pub fn rank(&self) -> usize {
        self.row_space().rank()
    }

    pub fn in_rowspace(&self, v: &BitVec) -> Result<bool> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok(self.row_space().contains(v))
    }

    /// Basis of the right null space, one vector per row.
    pub fn kernel_basis(&self) -> BitMatrix {
        let rs = self.row_space();
        let pivots = rs.pivots();
        let mut is_pivot = vec![false; self.cols];
        for &p in pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut out = BitMatrix::zeros(free.len(), self.cols);
        for (i, &f) in free.iter().enumerate() {
            out.data[i * out.stride + f / 64] |= 1u64 << (f % 64);
            for (row, &p) in pivots.iter().enumerate() {
                if rs.basis.get(row, f) {
                    out.data[i * out.stride + p / 64] |= 1u64 << (p % 64);
                }
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.rows * (self.cols + 1));
        for r in 0..self.rows {
            for c in 0..self.cols {
                s.push(if self.get(r, c) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<BitMatrix> {
        let rows: Vec<Vec<u8>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| match c {
                        '0' => Ok(0),
                        '1' => Ok(1),
                        other => Err(Error::Parse(format!("unexpected character {other:?}"))),
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        BitMatrix::from_dense(&rows)
    }
}

/// Row space of a matrix held in reduced row-echelon form.
#[derive(Clone, Debug)]
pub struct RowSpace {
    basis: BitMatrix,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn from_matrix(m: &BitMatrix) -> Self {
        let mut work = BitMatrix {
            rows: m.rows,
            cols: m.cols,
            stride: m.stride,
            data: m.data.clone(),
            echelon: OnceLock::new(),
        };
        let pivots = rref_in_place(&mut work);
        let rank = pivots.len();
        work.data.truncate(rank * work.stride);
        work.rows = rank;
        RowSpace { basis: work, pivots }
    }

    pub fn empty(cols: usize) -> Self {
        RowSpace { basis: BitMatrix::zeros(0, cols), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn cols(&self) -> usize {
        self.basis.cols
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn basis(&self) -> &BitMatrix {
        &self.basis
    }

    /// Reduce `words` against the basis in place.
    pub fn reduce_words(&self, words: &mut [u64]) {
        for (row, &p) in self.pivots.iter().enumerate() {
            if (words[p / 64] >> (p % 64)) & 1 == 1 {
                xor_words(words, self.basis.row_words(row));
            }
        }
    }

    pub fn reduce(&self, v: &BitVec) -> BitVec {
        let mut w = v.words().to_vec();
        self.reduce_words(&mut w);
        BitVec::from_words(v.len(), w)
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).is_zero()
    }

    pub fn contains_words(&self, words: &[u64]) -> bool {
        let mut w = words.to_vec();
        self.reduce_words(&mut w);
        w.iter().all(|&x| x == 0)
    }

    /// Add `v` to the space; returns false if it was already contained.
    pub fn insert(&mut self, v: &BitVec) -> bool {
        let r = self.reduce(v);
        let Some(p) = r.first_one() else {
            return false;
        };
        // keep fully reduced: clear column p from existing rows
        for row in 0..self.basis.rows {
            if self.basis.get(row, p) {
                let stride = self.basis.stride;
                xor_words(&mut self.basis.data[row * stride..(row + 1) * stride], r.words());
            }
        }
        let pos = self.pivots.partition_point(|&q| q < p);
        let stride = self.basis.stride;
        let at = pos * stride;
        self.basis.data.splice(at..at, r.words().iter().copied());
        self.basis.rows += 1;
        self.pivots.insert(pos, p);
        true
    }
}

/// Reduce to RREF in place; returns the pivot columns. Zero rows sink to the bottom.
fn rref_in_place(m: &mut BitMatrix) -> Vec<usize> {
    let stride = m.stride;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.cols {
        if r == m.rows {
            break;
        }
        let (wi, bit) = (c / 64, 1u64 << (c % 64));
        let Some(p) = (r..m.rows).find(|&i| m.data[i * stride + wi] & bit != 0) else {
            continue;
        };
        if p != r {
            for k in 0..stride {
                m.data.swap(p * stride + k, r * stride + k);
            }
        }
        let (head, tail) = m.data.split_at_mut(r * stride);
        let (pivot_row, rest) = tail.split_at_mut(stride);
        for i in 0..r {
            let row = &mut head[i * stride..(i + 1) * stride];
            if row[wi] & bit != 0 {
                xor_words(row, pivot_row);
            }
        }
        for i in 0..(m.rows - r - 1) {
            let row = &mut rest[i * stride..(i + 1) * stride];
            if row[wi] & bit != 0 {
                xor_words(row, pivot_row);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank of `m`.
pub fn rank(m: &BitMatrix) -> usize {
    m.rank()
}

/// Right null-space basis of `m`, one vector per row.
pub fn kernel_basis(m: &BitMatrix) -> BitMatrix {
    m.kernel_basis()
}

pub fn in_rowspace(m: &BitMatrix, v: &BitVec) -> Result<bool> {
    m.in_rowspace(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(text: &str) -> BitMatrix {
        BitMatrix::from_text(text).unwrap()
    }

    #[test]
    fn repetition_code_rank_and_kernel() {
        let h = m("110\n011");
        assert_eq!(h.rank(), 2);
        let k = h.kernel_basis();
        assert_eq!(k.rows(), 1);
        assert_eq!(k.row_support(0), vec![0, 1, 2]);
    }

    #[test]
    fn rowspace_membership() {
        let h = m("110\n011");
        assert!(h.in_rowspace(&BitVec::from_support(3, &[0, 2])).unwrap());
        assert!(!h.in_rowspace(&BitVec::from_support(3, &[0])).unwrap());
    }

    #[test]
    fn shape_errors() {
        let h = m("110\n011");
        assert!(matches!(h.mul(&h), Err(Error::Shape(_))));
        assert!(matches!(h.in_rowspace(&BitVec::zeros(4)), Err(Error::Shape(_))));
    }

    #[test]
    fn transpose_mul_and_kron() {
        let a = m("10\n11");
        let t = a.transpose();
        assert_eq!(t, m("11\n01"));
        assert_eq!(a.mul(&a).unwrap(), BitMatrix::identity(2));
        let k = a.kron(&BitMatrix::identity(2));
        assert_eq!(k, m("1000\n0100\n1010\n0101"));
    }

    #[test]
    fn stacking() {
        let a = m("10\n01");
        let h = BitMatrix::hstack(&[&a, &a]).unwrap();
        assert_eq!(h, m("1010\n0101"));
        let v = BitMatrix::vstack(&[&a, &a]).unwrap();
        assert_eq!(v.dedup_rows(), a);
    }

    #[test]
    fn wide_matrices_cross_word_boundaries() {
        let mut a = BitMatrix::zeros(3, 130);
        a.set(0, 0, true);
        a.set(0, 129, true);
        a.set(1, 64, true);
        a.set(2, 0, true);
        a.set(2, 64, true);
        a.set(2, 129, true);
        assert_eq!(a.rank(), 2);
        let k = a.kernel_basis();
        assert_eq!(k.rows(), 128);
        assert!(a.mul(&k.transpose()).unwrap().is_zero());
        assert_eq!(a.transpose().transpose(), a);
    }

    #[test]
    fn insert_grows_space() {
        let mut rs = RowSpace::empty(5);
        assert!(rs.insert(&BitVec::from_support(5, &[1, 3])));
        assert!(rs.insert(&BitVec::from_support(5, &[0, 3])));
        assert!(!rs.insert(&BitVec::from_support(5, &[0, 1])));
        assert_eq!(rs.rank(), 2);
        assert!(rs.contains(&BitVec::from_support(5, &[0, 1])));
    }

    #[test]
    fn text_roundtrip() {
        let a = m("1011\n0110");
        assert_eq!(BitMatrix::from_text(&a.to_text()).unwrap(), a);
        assert!(BitMatrix::from_text("102").is_err());
    }
}
