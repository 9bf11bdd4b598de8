//! Packed bit vectors and dense linear algebra over GF(2).
//!
//! Every vector carries a [`Basis`] tag naming the index space it lives in.
//! Operations that combine vectors or matrices check the tags and the lengths.

use std::fmt;

use crate::error::Gf2Error;

const WORD: usize = 64;

/// Index space of a vector or of the rows/columns of a matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    Qubits,
    XGauge,
    /// Measured (Z-type) gauge operators.
    Meas,
    /// Interior B vertices, i.e. Z-type stabilizer sites.
    Stabilizers,
    /// Interior vertices of the measurement graph.
    Relations,
    Vertices,
    Edges,
    Generic,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    basis: Basis,
    len: usize,
    words: Vec<u64>,
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec[{:?}; {}]{:?}", self.basis, self.len, self.ones().collect::<Vec<_>>())
    }
}

impl BitVec {
    pub fn zeros(basis: Basis, len: usize) -> Self {
        BitVec { basis, len, words: vec![0; len.div_ceil(WORD)] }
    }

    pub fn ones_vec(basis: Basis, len: usize) -> Self {
        let mut v = BitVec::zeros(basis, len);
        for w in v.words.iter_mut() {
            *w = !0;
        }
        v.clear_tail();
        v
    }

    /// Builds a vector with the given positions set. Repeated indices cancel.
    pub fn from_indices(basis: Basis, len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut v = BitVec::zeros(basis, len);
        for i in idx {
            v.flip(i);
        }
        v
    }

    fn clear_tail(&mut self) {
        let r = self.len % WORD;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Same bits, new basis tag.
    pub fn relabel(mut self, basis: Basis) -> Self {
        self.basis = basis;
        self
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let m = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= m;
        } else {
            self.words[i / WORD] &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn clear(&mut self) {
        for w in self.words.iter_mut() {
            *w = 0;
        }
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn check(&self, other: &BitVec) -> Result<(), Gf2Error> {
        if self.basis != other.basis {
            return Err(Gf2Error::BasisMismatch { left: self.basis, right: other.basis });
        }
        if self.len != other.len {
            return Err(Gf2Error::LengthMismatch { left: self.len, right: other.len });
        }
        Ok(())
    }

    pub fn try_xor_assign(&mut self, other: &BitVec) -> Result<(), Gf2Error> {
        self.check(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// XOR in place. Panics on basis or length mismatch; use
    /// [`BitVec::try_xor_assign`] where the mismatch is a user error.
    pub fn xor_assign(&mut self, other: &BitVec) {
        if let Err(e) = self.try_xor_assign(other) {
            panic!("{e}");
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut r = self.clone();
        r.xor_assign(other);
        r
    }

    /// Parity of the overlap, i.e. the GF(2) inner product.
    pub fn dot(&self, other: &BitVec) -> bool {
        if let Err(e) = self.check(other) {
            panic!("{e}");
        }
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() % 2 == 1
    }

    pub fn overlap(&self, other: &BitVec) -> usize {
        if let Err(e) = self.check(other) {
            panic!("{e}");
        }
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    /// Indices of set bits in increasing order.
    pub fn ones(&self) -> Ones<'_> {
        Ones { words: &self.words, idx: 0, cur: self.words.first().copied().unwrap_or(0) }
    }

    pub fn first_one(&self) -> Option<usize> {
        for (k, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(k * WORD + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

pub struct Ones<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let t = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.idx * WORD + t);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

/// Dense binary matrix stored as packed rows over a common column basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinMatrix {
    row_basis: Basis,
    col_basis: Basis,
    cols: usize,
    rows: Vec<BitVec>,
}

impl BinMatrix {
    pub fn new(row_basis: Basis, col_basis: Basis, cols: usize) -> Self {
        BinMatrix { row_basis, col_basis, cols, rows: Vec::new() }
    }

    pub fn zeros(row_basis: Basis, col_basis: Basis, rows: usize, cols: usize) -> Self {
        BinMatrix { row_basis, col_basis, cols, rows: vec![BitVec::zeros(col_basis, cols); rows] }
    }

    pub fn identity(basis: Basis, n: usize) -> Self {
        let mut m = BinMatrix::zeros(basis, basis, n, n);
        for i in 0..n {
            m.rows[i].set(i, true);
        }
        m
    }

    /// Rows given as lists of column indices.
    pub fn from_sparse_rows<I, R>(row_basis: Basis, col_basis: Basis, cols: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = usize>,
    {
        let rows = rows.into_iter().map(|r| BitVec::from_indices(col_basis, cols, r)).collect();
        BinMatrix { row_basis, col_basis, cols, rows }
    }

    pub fn push_row(&mut self, row: BitVec) -> Result<(), Gf2Error> {
        if row.basis() != self.col_basis {
            return Err(Gf2Error::BasisMismatch { left: self.col_basis, right: row.basis() });
        }
        if row.len() != self.cols {
            return Err(Gf2Error::LengthMismatch { left: self.cols, right: row.len() });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row_basis(&self) -> Basis {
        self.row_basis
    }

    pub fn col_basis(&self) -> Basis {
        self.col_basis
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.rows[r].set(c, v)
    }

    pub fn transpose(&self) -> BinMatrix {
        let mut t = BinMatrix::zeros(self.col_basis, self.row_basis, self.cols, self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.ones() {
                t.rows[c].set(r, true);
            }
        }
        t
    }

    /// `self · x` for `x` over the column basis; the result is over the row basis.
    pub fn mul_vec(&self, x: &BitVec) -> Result<BitVec, Gf2Error> {
        if x.basis() != self.col_basis {
            return Err(Gf2Error::BasisMismatch { left: self.col_basis, right: x.basis() });
        }
        if x.len() != self.cols {
            return Err(Gf2Error::LengthMismatch { left: self.cols, right: x.len() });
        }
        let mut out = BitVec::zeros(self.row_basis, self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            if row.dot(x) {
                out.set(r, true);
            }
        }
        Ok(out)
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &BinMatrix) -> Result<BinMatrix, Gf2Error> {
        if self.col_basis != other.row_basis {
            return Err(Gf2Error::BasisMismatch { left: self.col_basis, right: other.row_basis });
        }
        if self.cols != other.rows.len() {
            return Err(Gf2Error::LengthMismatch { left: self.cols, right: other.rows.len() });
        }
        let mut out = BinMatrix::zeros(self.row_basis, other.col_basis, self.rows.len(), other.cols);
        for (r, row) in self.rows.iter().enumerate() {
            for k in row.ones() {
                out.rows[r].xor_assign(&other.rows[k]);
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.is_zero())
    }
}

/// Row echelon form of a set of generators, with an optional record of which
/// original rows were combined into each pivot row.
#[derive(Clone, Debug)]
pub struct Echelon {
    col_basis: Basis,
    cols: usize,
    n_input: usize,
    pivots: Vec<usize>,
    rows: Vec<BitVec>,
    combos: Option<Vec<BitVec>>,
    /// Combinations of input rows that reduce to zero.
    dependencies: Vec<BitVec>,
}

impl Echelon {
    pub fn new(m: &BinMatrix, track: bool) -> Self {
        let n = m.n_rows();
        let mut e = Echelon {
            col_basis: m.col_basis,
            cols: m.cols,
            n_input: n,
            pivots: Vec::new(),
            rows: Vec::new(),
            combos: if track { Some(Vec::new()) } else { None },
            dependencies: Vec::new(),
        };
        for (i, row) in m.rows.iter().enumerate() {
            let mut v = row.clone();
            let mut c = if track { Some(BitVec::zeros(Basis::Generic, n)) } else { None };
            if let Some(c) = c.as_mut() {
                c.set(i, true);
            }
            e.reduce_in_place(&mut v, c.as_mut());
            match v.first_one() {
                Some(p) => {
                    e.pivots.push(p);
                    e.rows.push(v);
                    if let (Some(cs), Some(c)) = (e.combos.as_mut(), c) {
                        cs.push(c);
                    }
                }
                None => {
                    if let Some(c) = c {
                        e.dependencies.push(c);
                    }
                }
            }
        }
        e
    }

    fn reduce_in_place(&self, v: &mut BitVec, mut combo: Option<&mut BitVec>) {
        for (k, (&p, row)) in self.pivots.iter().zip(&self.rows).enumerate() {
            if v.get(p) {
                v.xor_assign(row);
                if let (Some(c), Some(cs)) = (combo.as_deref_mut(), self.combos.as_ref()) {
                    c.xor_assign(&cs[k]);
                }
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces `v` against the pivots. Returns the residual and, when the
    /// echelon tracks combinations, the input rows whose sum accounts for
    /// `v + residual`.
    pub fn reduce(&self, v: &BitVec) -> Result<(BitVec, Option<BitVec>), Gf2Error> {
        if v.basis() != self.col_basis {
            return Err(Gf2Error::BasisMismatch { left: self.col_basis, right: v.basis() });
        }
        if v.len() != self.cols {
            return Err(Gf2Error::LengthMismatch { left: self.cols, right: v.len() });
        }
        let mut r = v.clone();
        let mut c = self.combos.as_ref().map(|_| BitVec::zeros(Basis::Generic, self.n_input));
        self.reduce_in_place(&mut r, c.as_mut());
        Ok((r, c))
    }

    pub fn contains(&self, v: &BitVec) -> Result<bool, Gf2Error> {
        Ok(self.reduce(v)?.0.is_zero())
    }

    /// Null combinations of the input rows found during elimination.
    /// With tracking on they span the left kernel of the input matrix.
    pub fn dependencies(&self) -> &[BitVec] {
        &self.dependencies
    }
}

/// GF(2) row rank.
pub fn rank(m: &BinMatrix) -> usize {
    Echelon::new(m, false).rank()
}

/// Returns some `x` with `m · x = b`, or `None` if `b` is outside the column span.
pub fn solve(m: &BinMatrix, b: &BitVec) -> Result<Option<BitVec>, Gf2Error> {
    if b.basis() != m.row_basis {
        return Err(Gf2Error::BasisMismatch { left: m.row_basis, right: b.basis() });
    }
    if b.len() != m.n_rows() {
        return Err(Gf2Error::LengthMismatch { left: m.n_rows(), right: b.len() });
    }
    if b.is_zero() {
        return Ok(Some(BitVec::zeros(m.col_basis, m.cols)));
    }
    let e = Echelon::new(&m.transpose(), true);
    let (res, combo) = e.reduce(b)?;
    if !res.is_zero() {
        return Ok(None);
    }
    let combo = combo.expect("tracking enabled");
    Ok(Some(combo.relabel(m.col_basis)))
}

/// True iff `v` is a sum of rows of `generators`.
pub fn in_span(generators: &BinMatrix, v: &BitVec) -> Result<bool, Gf2Error> {
    Echelon::new(generators, false).contains(v)
}

/// Basis of `{x : m · x = 0}`.
pub fn nullspace(m: &BinMatrix) -> Vec<BitVec> {
    let e = Echelon::new(&m.transpose(), true);
    e.dependencies().iter().map(|d| d.clone().relabel(m.col_basis)).collect()
}

/// Column-sparse binary matrix used on the hot path: column `j` lists the rows
/// it touches, and products are computed by XOR-scatter over set input bits.
#[derive(Clone, Debug)]
pub struct SparseMatrix {
    row_basis: Basis,
    col_basis: Basis,
    n_rows: usize,
    cols: Vec<Vec<u32>>,
}

impl SparseMatrix {
    pub fn from_columns(row_basis: Basis, col_basis: Basis, n_rows: usize, cols: Vec<Vec<u32>>) -> Self {
        for c in &cols {
            for &r in c {
                assert!((r as usize) < n_rows, "row index {r} out of range {n_rows}");
            }
        }
        SparseMatrix { row_basis, col_basis, n_rows, cols }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn row_basis(&self) -> Basis {
        self.row_basis
    }

    pub fn col_basis(&self) -> Basis {
        self.col_basis
    }

    pub fn column(&self, j: usize) -> &[u32] {
        &self.cols[j]
    }

    pub fn apply(&self, x: &BitVec) -> Result<BitVec, Gf2Error> {
        let mut out = BitVec::zeros(self.row_basis, self.n_rows);
        self.apply_into(x, &mut out)?;
        Ok(out)
    }

    /// `out ^= self · x`.
    pub fn apply_into(&self, x: &BitVec, out: &mut BitVec) -> Result<(), Gf2Error> {
        if x.basis() != self.col_basis {
            return Err(Gf2Error::BasisMismatch { left: self.col_basis, right: x.basis() });
        }
        if x.len() != self.cols.len() {
            return Err(Gf2Error::LengthMismatch { left: self.cols.len(), right: x.len() });
        }
        if out.basis() != self.row_basis || out.len() != self.n_rows {
            return Err(Gf2Error::BasisMismatch { left: self.row_basis, right: out.basis() });
        }
        for j in x.ones() {
            for &r in &self.cols[j] {
                out.flip(r as usize);
            }
        }
        Ok(())
    }

    pub fn to_dense(&self) -> BinMatrix {
        let mut m = BinMatrix::zeros(self.row_basis, self.col_basis, self.n_rows, self.cols.len());
        for (j, c) in self.cols.iter().enumerate() {
            for &r in c {
                let v = m.get(r as usize, j);
                m.set(r as usize, j, !v);
            }
        }
        m
    }
}
