//! Bit-packed vectors and matrices over GF(2).
//!
//! Rows are stored as contiguous runs of `u64` words, least significant bit
//! first. Every routine keeps the padding bits past `ncols` at zero, so word
//! comparisons and popcounts need no masking.

use std::fmt;

const WORD: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// A packed GF(2) vector.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
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

    /// Backing words; bits at or beyond `len` must stay zero.
    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Hamming distance to another vector of the same length.
    pub fn distance(&self, other: &BitVec) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Indices of the set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + b)
            })
        })
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        write!(f, "BitVec({s})")
    }
}

/// A dense GF(2) matrix with bit-packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    nrows: usize,
    ncols: usize,
    stride: usize,
    data: Vec<u64>,
}

/// Row echelon data produced by [`BitMatrix::rref`].
#[derive(Clone, Debug)]
pub struct BitEchelon {
    pub reduced: BitMatrix,
    /// Pivot column of each of the first `pivots.len()` rows.
    pub pivots: Vec<usize>,
}

impl BitMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        let stride = words_for(ncols);
        BitMatrix {
            nrows,
            ncols,
            stride,
            data: vec![0; nrows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn from_rows(ncols: usize, rows: &[BitVec]) -> Self {
        let mut m = Self::zeros(rows.len(), ncols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), ncols, "row length");
            m.row_mut(i).copy_from_slice(r.words());
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row_vec(&self, i: usize) -> BitVec {
        BitVec {
            len: self.ncols,
            words: self.row(i).to_vec(),
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.nrows && j < self.ncols);
        (self.data[i * self.stride + j / WORD] >> (j % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        debug_assert!(i < self.nrows && j < self.ncols);
        let w = &mut self.data[i * self.stride + j / WORD];
        let mask = 1u64 << (j % WORD);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    /// `rows[dst] ^= rows[src]`, starting at word `from`.
    #[inline]
    fn xor_rows(&mut self, dst: usize, src: usize, from: usize) {
        let s = self.stride;
        let (a, b) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&mut lo[dst * s..(dst + 1) * s], &hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&mut hi[..s], &lo[src * s..(src + 1) * s])
        };
        for k in from..s {
            a[k] ^= b[k];
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.stride {
            self.data.swap(a * self.stride + k, b * self.stride + k);
        }
    }

    /// Forward elimination in place; returns the pivot columns.
    ///
    /// With `reduce_above` the result is in reduced row echelon form.
    fn eliminate(&mut self, reduce_above: bool, col_limit: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..col_limit {
            if r == self.nrows {
                break;
            }
            let (w, mask) = (c / WORD, 1u64 << (c % WORD));
            let Some(p) = (r..self.nrows).find(|&i| self.data[i * self.stride + w] & mask != 0)
            else {
                continue;
            };
            self.swap_rows(r, p);
            let start = if reduce_above { 0 } else { r + 1 };
            for i in start..self.nrows {
                if i != r && self.data[i * self.stride + w] & mask != 0 {
                    self.xor_rows(i, r, w);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        // eliminate along the shorter side
        if self.nrows <= self.ncols {
            self.clone().eliminate(false, self.ncols).len()
        } else {
            self.transpose().eliminate(false, self.nrows).len()
        }
    }

    /// Reduced row echelon form.
    pub fn rref(&self) -> BitEchelon {
        let mut reduced = self.clone();
        let pivots = reduced.eliminate(true, self.ncols);
        BitEchelon { reduced, pivots }
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for (wi, &word) in self.row(i).iter().enumerate() {
                let mut w = word;
                while w != 0 {
                    let j = wi * WORD + w.trailing_zeros() as usize;
                    w &= w - 1;
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    pub fn select_columns(&self, cols: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.nrows, cols.len());
        for i in 0..self.nrows {
            let row = self.row(i);
            let dst = &mut out.data[i * out.stride..(i + 1) * out.stride];
            for (k, &c) in cols.iter().enumerate() {
                if (row[c / WORD] >> (c % WORD)) & 1 == 1 {
                    dst[k / WORD] |= 1u64 << (k % WORD);
                }
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(rows.len(), self.ncols);
        for (k, &r) in rows.iter().enumerate() {
            out.row_mut(k).copy_from_slice(self.row(r));
        }
        out
    }

    /// The selected columns laid out as rows, i.e. `self[cols]` transposed.
    pub fn columns_as_rows(&self, cols: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(cols.len(), self.nrows);
        for (k, &c) in cols.iter().enumerate() {
            let (w, shift) = (c / WORD, c % WORD);
            let dst = &mut out.data[k * out.stride..(k + 1) * out.stride];
            for i in 0..self.nrows {
                if (self.data[i * self.stride + w] >> shift) & 1 == 1 {
                    dst[i / WORD] |= 1u64 << (i % WORD);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &BitVec) -> BitVec {
        assert_eq!(x.len(), self.ncols, "vector length");
        let mut y = BitVec::zeros(self.nrows);
        for i in 0..self.nrows {
            let parity = self
                .row(i)
                .iter()
                .zip(x.words())
                .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
                & 1;
            if parity == 1 {
                y.set(i, true);
            }
        }
        y
    }

    /// Basis of the right null space, one vector per free column.
    pub fn kernel(&self) -> Vec<BitVec> {
        let BitEchelon { reduced, pivots } = self.rref();
        let mut is_pivot = vec![false; self.ncols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::with_capacity(self.ncols - pivots.len());
        for f in (0..self.ncols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVec::zeros(self.ncols);
            v.set(f, true);
            for (r, &pc) in pivots.iter().enumerate() {
                if reduced.get(r, f) {
                    v.set(pc, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Solves `self * x = y` with free variables set to zero.
    pub fn solve(&self, y: &BitVec) -> Option<BitVec> {
        self.solve_detailed(y).map(|s| s.solution)
    }

    /// Solves `self * x = y`, also reporting the rank of `self`.
    pub fn solve_detailed(&self, y: &BitVec) -> Option<BitSolution> {
        assert_eq!(y.len(), self.nrows, "right-hand side length");
        let mut aug = BitMatrix::zeros(self.nrows, self.ncols + 1);
        for i in 0..self.nrows {
            for (j, &w) in self.row(i).iter().enumerate() {
                aug.data[i * aug.stride + j] = w;
            }
            if y.get(i) {
                aug.set(i, self.ncols, true);
            }
        }
        let pivots = aug.eliminate(true, self.ncols + 1);
        if pivots.last() == Some(&self.ncols) {
            return None;
        }
        let mut x = BitVec::zeros(self.ncols);
        for (r, &c) in pivots.iter().enumerate() {
            if aug.get(r, self.ncols) {
                x.set(c, true);
            }
        }
        Some(BitSolution {
            solution: x,
            rank: pivots.len(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }
}

/// Output of [`BitMatrix::solve_detailed`].
#[derive(Clone, Debug)]
pub struct BitSolution {
    pub solution: BitVec,
    pub rank: usize,
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.nrows, self.ncols)?;
        for i in 0..self.nrows {
            let s: String = (0..self.ncols)
                .map(|j| if self.get(i, j) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {s}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_str_rows(rows: &[&str]) -> BitMatrix {
        let ncols = rows.first().map_or(0, |r| r.len());
        BitMatrix::from_fn(rows.len(), ncols, |i, j| rows[i].as_bytes()[j] == b'1')
    }

    #[test]
    fn rank_of_small_matrices() {
        assert_eq!(BitMatrix::zeros(2, 3).rank(), 0);
        assert_eq!(from_str_rows(&["11", "11"]).rank(), 1);
        assert_eq!(from_str_rows(&["101", "011"]).rank(), 2);
        assert_eq!(from_str_rows(&["101", "011", "110"]).rank(), 2);
        assert_eq!(BitMatrix::identity(130).rank(), 130);
    }

    #[test]
    fn kernel_vectors_annihilate() {
        let m = from_str_rows(&["1101", "0111"]);
        let k = m.kernel();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(m.mul_vec(v).is_zero());
        }
    }

    #[test]
    fn solve_detects_inconsistency() {
        let m = from_str_rows(&["10", "00"]);
        let mut y = BitVec::zeros(2);
        y.set(1, true);
        assert!(m.solve(&y).is_none());
        let mut y = BitVec::zeros(2);
        y.set(0, true);
        let x = m.solve(&y).unwrap();
        assert_eq!(m.mul_vec(&x), y);
    }

    #[test]
    fn transpose_and_gather_agree() {
        let m = BitMatrix::from_fn(70, 90, |i, j| (i * 7 + j * 3) % 5 == 0);
        let cols = [0, 3, 64, 89];
        assert_eq!(m.columns_as_rows(&cols), m.select_columns(&cols).transpose());
        assert_eq!(m.transpose().transpose(), m);
    }

    #[test]
    fn ones_iterates_set_bits() {
        let mut v = BitVec::zeros(130);
        for i in [0, 63, 64, 129] {
            v.set(i, true);
        }
        assert_eq!(v.ones().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        assert_eq!(v.weight(), 4);
    }
}
