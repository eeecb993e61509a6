//! Dense and sparse linear algebra over GF(2).
//!
//! Bits are packed least-significant-bit first into 64-bit words, row-major
//! for matrices. Bits past the logical length of a vector (or past `cols` in
//! a matrix row) are always zero, so word-level equality, hashing and
//! popcounts are exact.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

#[inline]
fn tail_mask(bits: usize) -> u64 {
    match bits % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; words_for(len)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self { len, words: vec![u64::MAX; words_for(len)] };
        v.clear_tail();
        v
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

    /// Builds a vector of length `len` with ones exactly at `support`.
    pub fn from_support(len: usize, support: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in support {
            assert!(i < len, "support index {i} out of range for length {len}");
            v.set(i, true);
        }
        v
    }

    /// Wraps raw words; bits beyond `len` are cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut v = Self { len, words };
        v.clear_tail();
        v
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let words = (0..words_for(len)).map(|_| rng.random::<u64>()).collect();
        Self::from_words(len, words)
    }

    /// Each bit independently set with probability `rate`.
    pub fn bernoulli<R: Rng + ?Sized>(len: usize, rate: f64, rng: &mut R) -> Self {
        let mut v = Self::zeros(len);
        if rate <= 0.0 {
            return v;
        }
        if rate >= 1.0 {
            return Self::ones(len);
        }
        for i in 0..len {
            if rng.random::<f64>() < rate {
                v.set(i, true);
            }
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn and(&self, other: &BitVector) -> BitVector {
        assert_eq!(self.len, other.len, "length mismatch in and");
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        BitVector { len: self.len, words }
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        dot_words(&self.words, &other.words)
    }

    /// Parity of the bits at `indices`.
    pub fn parity_at(&self, indices: &[usize]) -> bool {
        indices.iter().fold(false, |acc, &i| acc ^ self.get(i))
    }

    /// Sorted positions of the set bits.
    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.weight());
        for (wi, &word) in self.words.iter().enumerate() {
            let mut w = word;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                out.push(wi * WORD_BITS + b);
                w &= w - 1;
            }
        }
        out
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// Complement within the logical length.
    pub fn not(&self) -> BitVector {
        let mut out = BitVector { len: self.len, words: self.words.iter().map(|w| !w).collect() };
        out.clear_tail();
        out
    }

    fn clear_tail(&mut self) {
        if let Some(last) = self.words.last_mut() {
            *last &= tail_mask(self.len);
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[{}](", self.len)?;
        for i in 0..self.len.min(128) {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        if self.len > 128 {
            f.write_str("…")?;
        }
        f.write_str(")")
    }
}

impl Default for BitVector {
    fn default() -> Self {
        BitVector::zeros(0)
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

/// A dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self { rows, cols, stride, data: vec![0; rows * stride] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.set(i, i, true);
        }
        m
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            let v = BitVector::random(cols, rng);
            m.row_words_mut(i).copy_from_slice(v.words());
        }
        m
    }

    /// Stacks equal-length vectors as rows. An empty slice gives a 0×`cols` matrix.
    pub fn from_rows(rows: &[BitVector], cols: usize) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "row {i} has length {} but expected {cols}", r.len());
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        m
    }

    /// Uses vectors as columns, giving a `len × vectors.len()` matrix.
    pub fn from_columns(columns: &[BitVector], len: usize) -> Self {
        let mut m = Self::zeros(len, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), len);
            for i in c.support() {
                m.set(i, j, true);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    pub(crate) fn row_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row(&self, i: usize) -> BitVector {
        BitVector { len: self.cols, words: self.row_words(i).to_vec() }
    }

    pub fn set_row(&mut self, i: usize, v: &BitVector) {
        assert_eq!(v.len(), self.cols);
        self.row_words_mut(i).copy_from_slice(v.words());
    }

    pub fn column(&self, j: usize) -> BitVector {
        let mut v = BitVector::zeros(self.rows);
        for i in 0..self.rows {
            if self.get(i, j) {
                v.set(i, true);
            }
        }
        v
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.rows && j < self.cols);
        (self.data[i * self.stride + j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        debug_assert!(i < self.rows && j < self.cols);
        let idx = i * self.stride + j / WORD_BITS;
        let mask = 1u64 << (j % WORD_BITS);
        if value {
            self.data[idx] |= mask;
        } else {
            self.data[idx] &= !mask;
        }
    }

    /// `row[dst] ^= row[src]`.
    #[inline]
    pub(crate) fn xor_rows(&mut self, dst: usize, src: usize) {
        debug_assert_ne!(dst, src);
        let s = self.stride;
        let (d, sr) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&mut lo[dst * s..(dst + 1) * s], &hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&mut hi[..s], &lo[src * s..(src + 1) * s])
        };
        for (a, b) in d.iter_mut().zip(sr) {
            *a ^= *b;
        }
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let s = self.stride;
        for k in 0..s {
            self.data.swap(a * s + k, b * s + k);
        }
    }

    pub fn row_weight(&self, i: usize) -> usize {
        self.row_words(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for (wi, &word) in self.row_words(i).iter().enumerate() {
                let mut w = word;
                while w != 0 {
                    let j = wi * WORD_BITS + w.trailing_zeros() as usize;
                    t.set(j, i, true);
                    w &= w - 1;
                }
            }
        }
        t
    }

    /// Matrix-vector product `M·v`.
    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!("matrix has {} columns but vector has length {}", self.cols, v.len())));
        }
        let mut out = BitVector::zeros(self.rows);
        for i in 0..self.rows {
            if dot_words(self.row_words(i), v.words()) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// Row-vector product `vᵀ·M`: the XOR of the rows selected by `v`.
    pub fn left_mul_vec(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.rows {
            return Err(Error::Dimension(format!("matrix has {} rows but vector has length {}", self.rows, v.len())));
        }
        let mut acc = vec![0u64; self.stride];
        for i in v.support() {
            for (a, b) in acc.iter_mut().zip(self.row_words(i)) {
                *a ^= *b;
            }
        }
        Ok(BitVector { len: self.cols, words: acc })
    }

    /// XOR of the rows at `indices`.
    pub fn sum_rows(&self, indices: &[usize]) -> BitVector {
        let mut acc = vec![0u64; self.stride];
        for &i in indices {
            for (a, b) in acc.iter_mut().zip(self.row_words(i)) {
                *a ^= *b;
            }
        }
        BitVector { len: self.cols, words: acc }
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!("cannot multiply {}×{} by {}×{}", self.rows, self.cols, other.rows, other.cols)));
        }
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let picked = self.row(i).support();
            let sum = other.sum_rows(&picked);
            out.row_words_mut(i).copy_from_slice(sum.words());
        }
        Ok(out)
    }

    /// Returns a copy with columns reordered so that new column `j` is old column `perm[j]`.
    pub fn permute_columns(&self, perm: &ColumnPermutation) -> BitMatrix {
        assert_eq!(perm.len(), self.cols);
        let mut out = BitMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, &src) in perm.as_slice().iter().enumerate() {
                if self.get(i, src) {
                    out.set(i, j, true);
                }
            }
        }
        out
    }

    /// Returns a copy with rows reordered so that new row `i` is old row `perm[i]`.
    pub fn permute_rows(&self, perm: &ColumnPermutation) -> BitMatrix {
        assert_eq!(perm.len(), self.rows);
        let mut out = BitMatrix::zeros(self.rows, self.cols);
        for (i, &src) in perm.as_slice().iter().enumerate() {
            out.row_words_mut(i).copy_from_slice(self.row_words(src));
        }
        out
    }

    pub fn rank(&self) -> usize {
        row_echelon(self).pivots.len()
    }

    /// Selects columns `indices` (in order) into a new matrix.
    pub fn select_columns(&self, indices: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows, indices.len());
        for i in 0..self.rows {
            for (j, &src) in indices.iter().enumerate() {
                if self.get(i, src) {
                    out.set(i, j, true);
                }
            }
        }
        out
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}×{}", self.rows, self.cols)?;
        for i in 0..self.rows.min(32) {
            for j in 0..self.cols.min(96) {
                f.write_str(if self.get(i, j) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// A permutation of `0..len`; entry `j` names the source index placed at position `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnPermutation(Vec<usize>);

impl ColumnPermutation {
    pub fn identity(len: usize) -> Self {
        Self((0..len).collect())
    }

    /// Validates that `map` is a permutation.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &m in &map {
            if m >= map.len() || seen[m] {
                return Err(Error::InvalidParams(format!("{map:?} is not a permutation")));
            }
            seen[m] = true;
        }
        Ok(Self(map))
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut v: Vec<usize> = (0..len).collect();
        v.shuffle(rng);
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (j, &src) in self.0.iter().enumerate() {
            inv[src] = j;
        }
        Self(inv)
    }

    /// `out[j] = v[perm[j]]`.
    pub fn apply_to_vector(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.len());
        let mut out = BitVector::zeros(v.len());
        for (j, &src) in self.0.iter().enumerate() {
            if v.get(src) {
                out.set(j, true);
            }
        }
        out
    }
}

/// Output of [`systematic_form`].
#[derive(Clone, Debug)]
pub struct Systematic {
    /// Row-reduced matrix `[I_rank ‖ R]` on top of zero rows, in permuted column order.
    pub matrix: BitMatrix,
    /// Column `j` of `matrix` is column `permutation[j]` of the input.
    pub permutation: ColumnPermutation,
    pub rank: usize,
}

/// Reduced row echelon form without column movement.
pub(crate) struct Echelon {
    pub matrix: BitMatrix,
    /// Pivot column of row `i`, for `i < rank`.
    pub pivots: Vec<usize>,
}

/// Gauss-Jordan elimination, scanning columns left to right and taking the
/// first row with a set bit as pivot.
pub(crate) fn row_echelon(m: &BitMatrix) -> Echelon {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..a.cols {
        if next == a.rows {
            break;
        }
        let Some(p) = (next..a.rows).find(|&i| a.get(i, col)) else {
            continue;
        };
        a.swap_rows(next, p);
        for i in 0..a.rows {
            if i != next && a.get(i, col) {
                a.xor_rows(i, next);
            }
        }
        pivots.push(col);
        next += 1;
    }
    Echelon { matrix: a, pivots }
}

/// Brings `m` to systematic form `[I_rank ‖ R]` by row operations and a
/// recorded column permutation (pivot columns first, in order, then the rest).
pub fn systematic_form(m: &BitMatrix) -> Systematic {
    let ech = row_echelon(m);
    let rank = ech.pivots.len();
    let mut is_pivot = vec![false; m.cols()];
    for &p in &ech.pivots {
        is_pivot[p] = true;
    }
    let mut order = ech.pivots.clone();
    order.extend((0..m.cols()).filter(|&c| !is_pivot[c]));
    let permutation = ColumnPermutation(order);
    let matrix = ech.matrix.permute_columns(&permutation);
    Systematic { matrix, permutation, rank }
}

/// Basis of the right kernel `{v : M·v = 0}` as a list of vectors.
pub fn kernel_vectors(m: &BitMatrix) -> Vec<BitVector> {
    let ech = row_echelon(m);
    let mut is_pivot = vec![false; m.cols()];
    for &p in &ech.pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::with_capacity(m.cols() - ech.pivots.len());
    for free in (0..m.cols()).filter(|&c| !is_pivot[c]) {
        let mut v = BitVector::zeros(m.cols());
        v.set(free, true);
        for (row, &pc) in ech.pivots.iter().enumerate() {
            if ech.matrix.get(row, free) {
                v.set(pc, true);
            }
        }
        basis.push(v);
    }
    basis
}

/// Basis of the right kernel of `m`, one basis vector per column.
///
/// The result is `cols(m) × (cols(m) − rank(m))`.
pub fn nullspace_basis(m: &BitMatrix) -> BitMatrix {
    BitMatrix::from_columns(&kernel_vectors(m), m.cols())
}

/// A matrix stored as one sorted support list per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseRowMatrix {
    cols: usize,
    supports: Vec<Vec<u32>>,
}

impl SparseRowMatrix {
    /// Sorts each row and rejects out-of-range or repeated indices.
    pub fn new(cols: usize, mut supports: Vec<Vec<u32>>) -> Result<Self> {
        for (i, row) in supports.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParams(format!("row {i} repeats an index")));
            }
            if row.last().is_some_and(|&c| c as usize >= cols) {
                return Err(Error::InvalidParams(format!("row {i} has an index ≥ {cols}")));
            }
        }
        Ok(Self { cols, supports })
    }

    pub fn rows(&self) -> usize {
        self.supports.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_support(&self, i: usize) -> &[u32] {
        &self.supports[i]
    }

    pub fn supports(&self) -> &[Vec<u32>] {
        &self.supports
    }

    pub fn row_vector(&self, i: usize) -> BitVector {
        let mut v = BitVector::zeros(self.cols);
        for &c in &self.supports[i] {
            v.set(c as usize, true);
        }
        v
    }

    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!("sparse matrix has {} columns but vector has length {}", self.cols, v.len())));
        }
        let mut out = BitVector::zeros(self.rows());
        for (i, row) in self.supports.iter().enumerate() {
            let parity = row.iter().fold(false, |acc, &c| acc ^ v.get(c as usize));
            if parity {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// Sparse-times-dense product `self · m`.
    pub fn mul_dense(&self, m: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != m.rows() {
            return Err(Error::Dimension(format!("cannot multiply sparse {}×{} by {}×{}", self.rows(), self.cols, m.rows(), m.cols())));
        }
        let mut out = BitMatrix::zeros(self.rows(), m.cols());
        for (i, row) in self.supports.iter().enumerate() {
            let idx: Vec<usize> = row.iter().map(|&c| c as usize).collect();
            let s = m.sum_rows(&idx);
            out.set_row(i, &s);
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.rows(), self.cols);
        for (i, row) in self.supports.iter().enumerate() {
            for &c in row {
                m.set(i, c as usize, true);
            }
        }
        m
    }

    /// Relabels columns: column `c` moves to `new_position[c]`.
    pub fn relabel_columns(&self, new_position: &[usize]) -> SparseRowMatrix {
        assert_eq!(new_position.len(), self.cols);
        let supports = self
            .supports
            .iter()
            .map(|row| {
                let mut r: Vec<u32> = row.iter().map(|&c| new_position[c as usize] as u32).collect();
                r.sort_unstable();
                r
            })
            .collect();
        SparseRowMatrix { cols: self.cols, supports }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;

    fn naive_mul_vec(m: &BitMatrix, v: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(m.rows());
        for i in 0..m.rows() {
            let mut acc = false;
            for j in 0..m.cols() {
                acc ^= m.get(i, j) && v.get(j);
            }
            out.set(i, acc);
        }
        out
    }

    /// All vectors in the row space, by enumerating every subset of rows.
    fn span(m: &BitMatrix) -> std::collections::BTreeSet<BitVector> {
        let mut out = std::collections::BTreeSet::new();
        for mask in 0u32..(1 << m.rows()) {
            let idx: Vec<usize> = (0..m.rows()).filter(|i| mask >> i & 1 == 1).collect();
            out.insert(m.sum_rows(&idx));
        }
        out
    }

    #[test]
    fn identity_times_vector() {
        let v = BitVector::from_bools(&[true, false, true]);
        assert_eq!(BitMatrix::identity(3).mul_vec(&v).unwrap(), v);
    }

    #[test]
    fn zero_matrix_gives_zero_vector() {
        let mut rng = rng_from_seed(1);
        let v = BitVector::random(70, &mut rng);
        assert!(BitMatrix::zeros(5, 70).mul_vec(&v).unwrap().is_zero());
    }

    #[test]
    fn dense_product_matches_schoolbook() {
        let mut rng = rng_from_seed(8);
        let m = BitMatrix::random(8, 8, &mut rng);
        let v = BitVector::random(8, &mut rng);
        assert_eq!(m.mul_vec(&v).unwrap(), naive_mul_vec(&m, &v));
        let m = BitMatrix::random(33, 130, &mut rng);
        let v = BitVector::random(130, &mut rng);
        assert_eq!(m.mul_vec(&v).unwrap(), naive_mul_vec(&m, &v));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let m = BitMatrix::zeros(3, 4);
        assert!(matches!(m.mul_vec(&BitVector::zeros(5)), Err(Error::Dimension(_))));
        let p = SparseRowMatrix::new(4, vec![vec![0, 1]]).unwrap();
        assert!(matches!(p.mul_vec(&BitVector::zeros(3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn sparse_parity_examples() {
        let p = SparseRowMatrix::new(4, vec![vec![0, 2]]).unwrap();
        let v = BitVector::from_bools(&[true, false, true, false]);
        assert!(!p.mul_vec(&v).unwrap().get(0));
        let p = SparseRowMatrix::new(2, vec![vec![1]]).unwrap();
        let v = BitVector::from_bools(&[false, true]);
        assert!(p.mul_vec(&v).unwrap().get(0));
    }

    #[test]
    fn sparse_rows_are_sorted_and_validated() {
        let p = SparseRowMatrix::new(10, vec![vec![7, 2, 5]]).unwrap();
        assert_eq!(p.row_support(0), &[2, 5, 7]);
        assert!(SparseRowMatrix::new(10, vec![vec![1, 1]]).is_err());
        assert!(SparseRowMatrix::new(10, vec![vec![10]]).is_err());
    }

    #[test]
    fn systematic_input_is_unchanged() {
        // [I_2 | R]
        let mut m = BitMatrix::zeros(2, 4);
        m.set(0, 0, true);
        m.set(1, 1, true);
        m.set(0, 2, true);
        m.set(1, 3, true);
        m.set(0, 3, true);
        let s = systematic_form(&m);
        assert_eq!(s.rank, 2);
        assert!(s.permutation.is_identity());
        assert_eq!(s.matrix, m);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let s = systematic_form(&BitMatrix::zeros(2, 4));
        assert_eq!(s.rank, 0);
        assert_eq!(nullspace_basis(&BitMatrix::zeros(2, 4)).cols(), 4);
    }

    #[test]
    fn systematic_form_has_identity_prefix() {
        let mut rng = rng_from_seed(3);
        let m = BitMatrix::random(6, 10, &mut rng);
        let s = systematic_form(&m);
        for i in 0..s.rank {
            for j in 0..s.rank {
                assert_eq!(s.matrix.get(i, j), i == j);
            }
        }
        for i in s.rank..6 {
            assert_eq!(s.matrix.row_weight(i), 0);
        }
        for b in kernel_vectors(&m) {
            assert!(m.mul_vec(&b).unwrap().is_zero());
        }
    }

    #[test]
    fn one_by_two_kernel() {
        let mut m = BitMatrix::zeros(1, 2);
        m.set(0, 0, true);
        m.set(0, 1, true);
        let k = kernel_vectors(&m);
        assert_eq!(k, vec![BitVector::from_bools(&[true, true])]);
    }

    #[test]
    fn full_column_rank_has_empty_kernel() {
        let m = BitMatrix::identity(5);
        assert_eq!(nullspace_basis(&m).cols(), 0);
        let mut rng = rng_from_seed(4);
        let tall = BitMatrix::random(40, 8, &mut rng);
        if tall.rank() == 8 {
            assert!(kernel_vectors(&tall).is_empty());
        }
    }

    #[test]
    fn tall_matrix_kernel_vectors_all_annihilate() {
        let mut rng = rng_from_seed(20);
        let mut m = BitMatrix::random(20, 8, &mut rng);
        // force a dependency so the kernel is nontrivial
        for i in 0..20 {
            let b = m.get(i, 0) ^ m.get(i, 1);
            m.set(i, 7, b);
        }
        let basis = kernel_vectors(&m);
        assert_eq!(basis.len(), 8 - m.rank());
        assert!(!basis.is_empty());
        for b in &basis {
            assert!(m.mul_vec(b).unwrap().is_zero());
        }
    }

    #[test]
    fn rank_nullity_over_many_seeds() {
        for seed in 0..200u64 {
            let mut rng = rng_from_seed(seed);
            let rows = 1 + (seed as usize % 17);
            let cols = 1 + (seed as usize * 7 % 23);
            let m = BitMatrix::random(rows, cols, &mut rng);
            let k = nullspace_basis(&m);
            assert_eq!(k.cols() + m.rank(), cols, "seed {seed}");
            assert!(m.mul(&k).unwrap().is_zero());
        }
    }

    #[test]
    fn systematic_form_preserves_row_space() {
        for seed in 0..40u64 {
            let mut rng = rng_from_seed(100 + seed);
            let rows = 2 + seed as usize % 5;
            let cols = 4 + seed as usize % 13;
            let m = BitMatrix::random(rows, cols, &mut rng);
            let s = systematic_form(&m);
            let undone = s.matrix.permute_columns(&s.permutation.inverse());
            assert_eq!(span(&m), span(&undone), "seed {seed}");
        }
    }

    #[test]
    fn permutation_round_trips() {
        let mut rng = rng_from_seed(5);
        let m = BitMatrix::random(7, 19, &mut rng);
        let p = ColumnPermutation::random(19, &mut rng);
        assert_eq!(m.permute_columns(&p).permute_columns(&p.inverse()), m);
        let v = BitVector::random(19, &mut rng);
        assert_eq!(p.inverse().apply_to_vector(&p.apply_to_vector(&v)), v);
        let q = ColumnPermutation::random(7, &mut rng);
        assert_eq!(m.permute_rows(&q).permute_rows(&q.inverse()), m);
    }

    #[test]
    fn transpose_twice_is_identity() {
        let mut rng = rng_from_seed(6);
        let m = BitMatrix::random(13, 70, &mut rng);
        assert_eq!(m.transpose().transpose(), m);
    }

    #[test]
    fn ones_and_not_keep_canonical_tail() {
        let v = BitVector::ones(70);
        assert_eq!(v.weight(), 70);
        assert!(v.not().is_zero());
        assert_eq!(BitVector::zeros(70).not(), v);
    }

    proptest! {
        #[test]
        fn sparse_and_dense_agree(seed in any::<u64>(), rows in 1usize..20, cols in 1usize..150, w in 1usize..6) {
            let mut rng = rng_from_seed(seed);
            let w = w.min(cols);
            let supports: Vec<Vec<u32>> = (0..rows)
                .map(|_| rand::seq::index::sample(&mut rng, cols, w).into_iter().map(|c| c as u32).collect())
                .collect();
            let p = SparseRowMatrix::new(cols, supports).unwrap();
            let v = BitVector::random(cols, &mut rng);
            prop_assert_eq!(p.mul_vec(&v).unwrap(), p.to_dense().mul_vec(&v).unwrap());
        }

        #[test]
        fn weight_is_popcount_and_support_size(seed in any::<u64>(), len in 0usize..300) {
            let mut rng = rng_from_seed(seed);
            let v = BitVector::random(len, &mut rng);
            prop_assert_eq!(v.weight(), v.support().len());
            prop_assert_eq!(v.weight(), v.to_bools().iter().filter(|&&b| b).count());
        }
    }
}
