//! Exact linear algebra over the rationals.
//!
//! Matrices are stored densely; elimination runs on sparse rows with
//! integer entries (each row is scaled to a primitive integer vector), so
//! no intermediate fractions are formed. Pivot selection is deterministic:
//! columns are scanned in a fixed order and, within a column, the row with
//! the fewest nonzeros wins, then the smallest pivot, then the lowest row.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{format_q, parse_q, Q};

mod modular;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("invalid matrix data: {0}")]
    Invalid(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RationalMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| format_q(self.get(i, j))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Q::one());
        }
        m
    }

    pub fn scalar(n: usize, c: &Q) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, c.clone());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::Invalid("ragged rows".into()));
        }
        Ok(RationalMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Integer matrix from row slices; panics on ragged input.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let v = rows.iter().map(|r| r.iter().map(|&x| Q::from_integer(x.into())).collect()).collect();
        Self::from_rows(v).expect("rectangular input")
    }

    pub fn from_columns(rows: usize, cols: &[Vec<Q>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length");
            for (i, x) in col.iter().enumerate() {
                if !x.is_zero() {
                    m.set(i, j, x.clone());
                }
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Q) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RationalMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Q) {
        self.data[i * self.cols + j] = x;
    }

    pub fn add_at(&mut self, i: usize, j: usize, x: &Q) {
        self.data[i * self.cols + j] += x;
    }

    pub fn row(&self, i: usize) -> Vec<Q> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<Q> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Q>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn nonzero_count(&self) -> usize {
        self.data.iter().filter(|x| !x.is_zero()).count()
    }

    /// Iterates over nonzero entries in row-major order.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, &Q)> {
        let cols = self.cols;
        self.data.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(move |(k, x)| (k / cols, k % cols, x))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matrix product; panics on shape mismatch.
    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("matrix product shape")
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(v.len(), self.cols, "vector length");
        (0..self.rows)
            .map(|i| {
                let mut s = Q::zero();
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x.is_zero() {
                        s += a * x;
                    }
                }
                s
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "matrix sum shape");
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "matrix difference shape");
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        RationalMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, c: &Q) -> Self {
        RationalMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn hstack(blocks: &[&Self]) -> Self {
        let rows = blocks.first().map_or(0, |b| b.rows);
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.rows, rows, "hstack row count");
            out.set_block(0, off, b);
            off += b.cols;
        }
        out
    }

    pub fn vstack(blocks: &[&Self]) -> Self {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let rows: usize = blocks.iter().map(|b| b.rows).sum();
        let mut out = Self::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.cols, cols, "vstack column count");
            out.set_block(off, 0, b);
            off += b.rows;
        }
        out
    }

    pub fn block_diag(blocks: &[&Self]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            out.set_block(r, c, b);
            r += b.rows;
            c += b.cols;
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols, "block out of range");
        for (i, j, x) in b.nonzeros() {
            self.set(r0 + i, c0 + j, x.clone());
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]).clone())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), self.cols, |i, j| self.get(idx[i], j).clone())
    }

    /// Kronecker product `self ⊗ other`; row `(i, k)` sits at `i * other.rows + k`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for (i, j, a) in self.nonzeros() {
            for (k, l, b) in other.nonzeros() {
                out.set(i * other.rows + k, j * other.cols + l, a * b);
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        rank_kernel_image(self).rank
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::DimensionMismatch("inverse of non-square matrix".into()));
        }
        solve(self, &Self::identity(self.rows))?.ok_or(LinalgError::Singular)
    }

    /// Determinant by rational Gaussian elimination.
    pub fn det(&self) -> Result<Q, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::DimensionMismatch("determinant of non-square matrix".into()));
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Q::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !m.get(r, c).is_zero()) else {
                return Ok(Q::zero());
            };
            if p != c {
                for j in 0..n {
                    m.data.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let piv = m.get(c, c).clone();
            det *= &piv;
            for r in c + 1..n {
                let f = m.get(r, c) / &piv;
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = m.get(c, j) * &f;
                    m.data[r * n + j] -= v;
                }
            }
        }
        Ok(det)
    }

    /// Row-major vectorization.
    pub fn to_vec(&self) -> Vec<Q> {
        self.data.clone()
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Q>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length");
        RationalMatrix { rows, cols, data }
    }
}

/// Column processing order for elimination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PivotOrder {
    #[default]
    Forward,
    Reverse,
}

type SparseRow = Vec<(usize, BigInt)>;

fn entry(row: &SparseRow, col: usize) -> Option<&BigInt> {
    row.binary_search_by_key(&col, |(c, _)| *c).ok().map(|k| &row[k].1)
}

fn primitive(mut row: SparseRow) -> SparseRow {
    let mut g = BigInt::zero();
    for (_, x) in &row {
        g = g.gcd(x);
        if g.is_one() {
            return row;
        }
    }
    if !g.is_zero() && !g.is_one() {
        for (_, x) in row.iter_mut() {
            *x /= &g;
        }
    }
    row
}

fn to_integer_row(values: impl Iterator<Item = (usize, Q)>) -> SparseRow {
    let entries: Vec<(usize, Q)> = values.filter(|(_, x)| !x.is_zero()).collect();
    let mut l = BigInt::one();
    for (_, x) in &entries {
        l = l.lcm(x.denom());
    }
    let row = entries.into_iter().map(|(c, x)| (c, (x * Q::from_integer(l.clone())).to_integer())).collect();
    primitive(row)
}

/// `a * target - b * pivot` with `a`, `b` chosen to cancel `col`.
fn eliminate_row(target: &SparseRow, pivot: &SparseRow, col: usize) -> SparseRow {
    let a = entry(pivot, col).expect("pivot entry");
    let b = entry(target, col).expect("target entry");
    let g = a.gcd(b);
    let (fa, fb) = (a / &g, b / &g);
    let mut out = Vec::with_capacity(target.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() || j < pivot.len() {
        let ci = target.get(i).map_or(usize::MAX, |e| e.0);
        let cj = pivot.get(j).map_or(usize::MAX, |e| e.0);
        let (c, v) = if ci < cj {
            i += 1;
            (ci, &fa * &target[i - 1].1)
        } else if cj < ci {
            j += 1;
            (cj, -(&fb * &pivot[j - 1].1))
        } else {
            i += 1;
            j += 1;
            (ci, &fa * &target[i - 1].1 - &fb * &pivot[j - 1].1)
        };
        if !v.is_zero() {
            out.push((c, v));
        }
    }
    primitive(out)
}

/// Reduced row echelon form with integer rows.
struct Echelon {
    /// `(row, column)` of each pivot, in the order found.
    pivots: Vec<(usize, usize)>,
    rows: Vec<SparseRow>,
}

fn echelon_rows(mut rows: Vec<SparseRow>, pivot_cols: usize, order: PivotOrder) -> Echelon {
    let mut used = vec![false; rows.len()];
    let mut pivots = Vec::new();
    let cols: Vec<usize> = match order {
        PivotOrder::Forward => (0..pivot_cols).collect(),
        PivotOrder::Reverse => (0..pivot_cols).rev().collect(),
    };
    for col in cols {
        let mut best: Option<(usize, u64, usize)> = None;
        for (r, row) in rows.iter().enumerate() {
            if used[r] {
                continue;
            }
            if let Some(x) = entry(row, col) {
                let key = (row.len(), x.bits(), r);
                if best.map_or(true, |b| key < b) {
                    best = Some(key);
                }
            }
        }
        let Some((_, _, pr)) = best else { continue };
        used[pr] = true;
        pivots.push((pr, col));
        let pivot = rows[pr].clone();
        for r in 0..rows.len() {
            if r != pr && entry(&rows[r], col).is_some() {
                rows[r] = eliminate_row(&rows[r], &pivot, col);
            }
        }
    }
    Echelon { pivots, rows }
}

fn matrix_rows(m: &RationalMatrix) -> Vec<SparseRow> {
    (0..m.rows).map(|i| to_integer_row((0..m.cols).map(|j| (j, m.get(i, j).clone())))).collect()
}

fn echelon(m: &RationalMatrix, order: PivotOrder) -> Echelon {
    echelon_rows(matrix_rows(m), m.cols, order)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankKernelImage {
    pub rank: usize,
    /// Basis of `{x : A x = 0}`.
    pub kernel_basis: Vec<Vec<Q>>,
    /// Basis of the column space; `image_basis[k] = A * image_preimages[k]`.
    pub image_basis: Vec<Vec<Q>>,
    pub image_preimages: Vec<Vec<Q>>,
    pub pivot_columns: Vec<usize>,
}

pub fn rank_kernel_image(a: &RationalMatrix) -> RankKernelImage {
    rank_kernel_image_with(a, PivotOrder::Forward)
}

/// Kernels of matrices at least this large go through the multimodular path.
const MODULAR_THRESHOLD: usize = 400;

pub fn rank_kernel_image_with(a: &RationalMatrix, order: PivotOrder) -> RankKernelImage {
    if a.rows * a.cols >= MODULAR_THRESHOLD && a.rows > 0 {
        let perm: Vec<usize> = match order {
            PivotOrder::Forward => (0..a.cols).collect(),
            PivotOrder::Reverse => (0..a.cols).rev().collect(),
        };
        if let Some((pivots, kernel_basis)) = modular::kernel(&matrix_rows(a), a.cols, &perm) {
            return assemble(a, pivots, kernel_basis);
        }
    }
    rank_kernel_image_exact(a, order)
}

fn assemble(a: &RationalMatrix, mut pivot_columns: Vec<usize>, kernel_basis: Vec<Vec<Q>>) -> RankKernelImage {
    let rank = pivot_columns.len();
    pivot_columns.sort_unstable();
    let image_basis = pivot_columns.iter().map(|&c| a.column(c)).collect();
    let image_preimages = pivot_columns
        .iter()
        .map(|&c| {
            let mut e = vec![Q::zero(); a.cols];
            e[c] = Q::one();
            e
        })
        .collect();
    RankKernelImage { rank, kernel_basis, image_basis, image_preimages, pivot_columns }
}

fn rank_kernel_image_exact(a: &RationalMatrix, order: PivotOrder) -> RankKernelImage {
    let ech = echelon(a, order);
    let pivot_columns: Vec<usize> = ech.pivots.iter().map(|&(_, c)| c).collect();
    let mut is_pivot = vec![false; a.cols];
    for &c in &pivot_columns {
        is_pivot[c] = true;
    }
    let kernel_basis = (0..a.cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut x = vec![Q::zero(); a.cols];
            x[f] = Q::one();
            for &(r, c) in &ech.pivots {
                if let Some(v) = entry(&ech.rows[r], f) {
                    let p = entry(&ech.rows[r], c).expect("pivot");
                    x[c] = -Q::new(v.clone(), p.clone());
                }
            }
            x
        })
        .collect();
    assemble(a, pivot_columns, kernel_basis)
}

pub fn kernel_basis(a: &RationalMatrix) -> Vec<Vec<Q>> {
    rank_kernel_image(a).kernel_basis
}

/// Kernel basis as the columns of a `cols x nullity` matrix.
pub fn kernel_matrix(a: &RationalMatrix) -> RationalMatrix {
    RationalMatrix::from_columns(a.cols, &kernel_basis(a))
}

/// Solves `A X = B`; `None` when inconsistent. Free variables are set to
/// zero, so the returned solution is supported on pivot columns.
pub fn solve(a: &RationalMatrix, b: &RationalMatrix) -> Result<Option<RationalMatrix>, LinalgError> {
    solve_with(a, b, PivotOrder::Forward)
}

pub fn solve_with(
    a: &RationalMatrix,
    b: &RationalMatrix,
    order: PivotOrder,
) -> Result<Option<RationalMatrix>, LinalgError> {
    if a.rows != b.rows {
        return Err(LinalgError::DimensionMismatch(format!("A has {} rows, B has {}", a.rows, b.rows)));
    }
    let n = a.cols;
    let rows: Vec<SparseRow> = (0..a.rows)
        .map(|i| {
            to_integer_row(
                (0..n).map(|j| (j, a.get(i, j).clone())).chain((0..b.cols).map(|j| (n + j, b.get(i, j).clone()))),
            )
        })
        .collect();
    let ech = echelon_rows(rows, n, order);
    let mut pivot_row = vec![false; ech.rows.len()];
    for &(r, _) in &ech.pivots {
        pivot_row[r] = true;
    }
    for (r, row) in ech.rows.iter().enumerate() {
        if !pivot_row[r] && row.iter().any(|(c, _)| *c >= n) {
            return Ok(None);
        }
    }
    let mut x = RationalMatrix::zeros(n, b.cols);
    for &(r, c) in &ech.pivots {
        let row = &ech.rows[r];
        let p = entry(row, c).expect("pivot").clone();
        for (col, v) in row.iter().filter(|(col, _)| *col >= n) {
            x.set(c, col - n, Q::new(v.clone(), p.clone()));
        }
    }
    Ok(Some(x))
}

pub fn solve_vec(a: &RationalMatrix, b: &[Q]) -> Option<Vec<Q>> {
    let bm = RationalMatrix::from_columns(a.rows, &[b.to_vec()]);
    solve(a, &bm).ok().flatten().map(|x| x.column(0))
}

/// Which side the unknown sits on in [`solve_in_subspace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `A X = B`
    Left,
    /// `X A = B`
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceSolution {
    pub coefficients: Vec<Q>,
    pub x: RationalMatrix,
}

/// Finds `X = Σ c_k basis[k]` with `A X = B` (or `X A = B`).
///
/// Returns `None` exactly when `rank[M | vec B] > rank M`, where the columns
/// of `M` are the vectorized products `A basis[k]`.
pub fn solve_in_subspace(
    a: &RationalMatrix,
    b: &RationalMatrix,
    basis: &[RationalMatrix],
    side: Side,
) -> Result<Option<SubspaceSolution>, LinalgError> {
    solve_in_subspace_with(a, b, basis, side, PivotOrder::Forward)
}

pub fn solve_in_subspace_with(
    a: &RationalMatrix,
    b: &RationalMatrix,
    basis: &[RationalMatrix],
    side: Side,
    order: PivotOrder,
) -> Result<Option<SubspaceSolution>, LinalgError> {
    let x_shape = match side {
        Side::Left => (a.cols, b.cols),
        Side::Right => (b.rows, a.rows),
    };
    let prod_shape = match side {
        Side::Left => (a.rows, x_shape.1),
        Side::Right => (x_shape.0, a.cols),
    };
    if prod_shape != b.shape() {
        return Err(LinalgError::DimensionMismatch(format!(
            "product shape {:?} does not match B {:?}",
            prod_shape,
            b.shape()
        )));
    }
    for (k, x) in basis.iter().enumerate() {
        if x.shape() != x_shape {
            return Err(LinalgError::DimensionMismatch(format!(
                "basis element {k} has shape {:?}, expected {:?}",
                x.shape(),
                x_shape
            )));
        }
    }
    let products: Vec<Vec<Q>> = basis
        .iter()
        .map(|x| match side {
            Side::Left => a.mul(x).to_vec(),
            Side::Right => x.mul(a).to_vec(),
        })
        .collect();
    let m = RationalMatrix::from_columns(b.rows * b.cols, &products);
    let rhs = RationalMatrix::from_columns(b.rows * b.cols, &[b.to_vec()]);
    let Some(c) = solve_with(&m, &rhs, order)? else {
        return Ok(None);
    };
    let coefficients = c.column(0);
    let mut x = RationalMatrix::zeros(x_shape.0, x_shape.1);
    for (ck, xk) in coefficients.iter().zip(basis) {
        if !ck.is_zero() {
            x = x.add(&xk.scale(ck));
        }
    }
    let check = match side {
        Side::Left => a.mul(&x),
        Side::Right => x.mul(a),
    };
    assert_eq!(&check, b, "constrained solution failed verification");
    Ok(Some(SubspaceSolution { coefficients, x }))
}

/// Indices of `candidates` that extend the span of `base` to the span of
/// `base ∪ candidates`, greedily in order.
pub fn extend_basis(dim: usize, base: &[Vec<Q>], candidates: &[Vec<Q>]) -> Vec<usize> {
    let cols: Vec<Vec<Q>> = base.iter().chain(candidates).cloned().collect();
    let m = RationalMatrix::from_columns(dim, &cols);
    let rki = rank_kernel_image(&m);
    rki.pivot_columns.into_iter().filter(|&c| c >= base.len()).map(|c| c - base.len()).collect()
}

/// Basis of the span of the given vectors (a subset of them).
pub fn span_basis(dim: usize, vectors: &[Vec<Q>]) -> Vec<Vec<Q>> {
    extend_basis(dim, &[], vectors).into_iter().map(|i| vectors[i].clone()).collect()
}

/// A linear complement of a subspace together with coordinates on the
/// quotient.
#[derive(Debug, Clone)]
pub struct Quotient {
    /// `quotient_dim x dim`; sends `v` to its class.
    pub projection: RationalMatrix,
    /// `dim x quotient_dim`; the chosen complement, a right inverse of `projection`.
    pub section: RationalMatrix,
}

/// Quotient of `E^dim` by the span of `sub`; the complement is spanned by
/// standard basis vectors.
pub fn quotient(dim: usize, sub: &[Vec<Q>]) -> Quotient {
    let sub = span_basis(dim, sub);
    let std: Vec<Vec<Q>> = (0..dim)
        .map(|i| {
            let mut e = vec![Q::zero(); dim];
            e[i] = Q::one();
            e
        })
        .collect();
    let comp = extend_basis(dim, &sub, &std);
    let mut cols = sub.clone();
    cols.extend(comp.iter().map(|&i| std[i].clone()));
    let full = RationalMatrix::from_columns(dim, &cols);
    let inv = full.inverse().expect("basis of the ambient space");
    let qd = comp.len();
    let projection = inv.block(sub.len(), 0, qd, dim);
    let section = RationalMatrix::from_columns(dim, &comp.iter().map(|&i| std[i].clone()).collect::<Vec<_>>());
    Quotient { projection, section }
}

/// Coordinates of `v` in the span of `basis`, if it lies there.
pub fn coordinates(dim: usize, basis: &[Vec<Q>], v: &[Q]) -> Option<Vec<Q>> {
    let m = RationalMatrix::from_columns(dim, basis);
    solve_vec(&m, v)
}

/// A growing subspace with fast membership tests (reduced rows kept in
/// echelon form).
#[derive(Debug, Clone)]
pub struct IncrementalSpan {
    dim: usize,
    rows: Vec<(usize, Vec<Q>)>,
}

impl IncrementalSpan {
    pub fn new(dim: usize) -> Self {
        IncrementalSpan { dim, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient(&self) -> usize {
        self.dim
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.dim
    }

    fn reduce(&self, v: &[Q]) -> Vec<Q> {
        let mut w = v.to_vec();
        for (p, row) in &self.rows {
            if w[*p].is_zero() {
                continue;
            }
            let f = w[*p].clone();
            for (wi, ri) in w.iter_mut().zip(row) {
                if !ri.is_zero() {
                    *wi -= &f * ri;
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    /// Adds `v`; returns false if it was already in the span.
    pub fn insert(&mut self, v: &[Q]) -> bool {
        assert_eq!(v.len(), self.dim, "vector length");
        let mut w = self.reduce(v);
        let Some(p) = w.iter().position(|x| !x.is_zero()) else { return false };
        let inv = Q::one() / &w[p];
        for x in w.iter_mut() {
            *x *= &inv;
        }
        for (_, row) in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let f = row[p].clone();
                for (ri, wi) in row.iter_mut().zip(&w) {
                    if !wi.is_zero() {
                        *ri -= &f * wi;
                    }
                }
            }
        }
        self.rows.push((p, w));
        true
    }

    /// The reduced basis vectors.
    pub fn basis(&self) -> Vec<Vec<Q>> {
        self.rows.iter().map(|(_, r)| r.clone()).collect()
    }
}

/// [`IncrementalSpan`] over `Z/p` with `p = 2^61 - 1`; a fast filter whose
/// conclusions callers must confirm exactly.
#[derive(Debug, Clone)]
pub struct ModularSpan {
    dim: usize,
    rows: Vec<(usize, Vec<u64>)>,
}

const MOD_P: u64 = (1 << 61) - 1;

fn mod_mul(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MOD_P as u128) as u64
}

fn mod_pow(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mod_mul(r, a);
        }
        a = mod_mul(a, a);
        e >>= 1;
    }
    r
}

fn mod_inv(a: u64) -> u64 {
    mod_pow(a, MOD_P - 2)
}

fn bigint_mod(x: &BigInt) -> u64 {
    let m = BigInt::from(MOD_P);
    let r = x.mod_floor(&m);
    r.to_u64_digits().1.first().copied().unwrap_or(0)
}

/// Reduction of a rational mod `p`; `None` if the denominator vanishes.
pub fn rational_mod_p(x: &Q) -> Option<u64> {
    let d = bigint_mod(x.denom());
    if d == 0 {
        return None;
    }
    Some(mod_mul(bigint_mod(x.numer()), mod_inv(d)))
}

impl ModularSpan {
    pub fn new(dim: usize) -> Self {
        ModularSpan { dim, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let mut w = v.to_vec();
        for (p, row) in &self.rows {
            let f = w[*p];
            if f == 0 {
                continue;
            }
            for (wi, &ri) in w.iter_mut().zip(row) {
                if ri != 0 {
                    *wi = (*wi + MOD_P - mod_mul(f, ri)) % MOD_P;
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    pub fn insert(&mut self, v: &[u64]) -> bool {
        assert_eq!(v.len(), self.dim, "vector length");
        let mut w = self.reduce(v);
        let Some(p) = w.iter().position(|&x| x != 0) else { return false };
        let inv = mod_inv(w[p]);
        for x in w.iter_mut() {
            *x = mod_mul(*x, inv);
        }
        for (_, row) in self.rows.iter_mut() {
            let f = row[p];
            if f != 0 {
                for (ri, &wi) in row.iter_mut().zip(&w) {
                    if wi != 0 {
                        *ri = (*ri + MOD_P - mod_mul(f, wi)) % MOD_P;
                    }
                }
            }
        }
        self.rows.push((p, w));
        true
    }
}

/// Entrywise reduction mod `p`, `None` if some denominator vanishes.
pub fn vector_mod_p(v: &[Q]) -> Option<Vec<u64>> {
    v.iter().map(rational_mod_p).collect()
}

/// Matrix reduction mod `p` in row-major order.
pub fn matrix_mod_p(m: &RationalMatrix) -> Option<ModMatrix> {
    Some(ModMatrix { rows: m.rows, cols: m.cols, data: vector_mod_p(&m.data)? })
}

#[derive(Debug, Clone)]
pub struct ModMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl ModMatrix {
    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).fold(0u64, |acc, (&a, &b)| if a == 0 || b == 0 { acc } else { (acc + mod_mul(a, b)) % MOD_P })
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, String)>,
}

impl Serialize for RationalMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: self.nonzeros().map(|(i, j, x)| (i, j, format_q(x))).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        let mut m = RationalMatrix::zeros(j.rows, j.cols);
        for (i, k, s) in j.entries {
            if i >= j.rows || k >= j.cols {
                return Err(serde::de::Error::custom(format!("entry ({i},{k}) out of range")));
            }
            m.set(i, k, parse_q(&s).map_err(serde::de::Error::custom)?);
        }
        Ok(m)
    }
}

/// Dense integer matrix, used for Smith normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        IntMatrix { rows: r, cols: c, data: rows.iter().flat_map(|x| x.iter().map(|&v| BigInt::from(v))).collect() }
    }

    pub fn from_rational(m: &RationalMatrix) -> Option<Self> {
        let mut out = Self::zeros(m.rows, m.cols);
        for i in 0..m.rows {
            for j in 0..m.cols {
                let x = m.get(i, j);
                if !x.is_integer() {
                    return None;
                }
                out.data[i * m.cols + j] = x.to_integer();
            }
        }
        Some(out)
    }

    pub fn to_rational(&self) -> RationalMatrix {
        RationalMatrix::from_fn(self.rows, self.cols, |i, j| Q::from_integer(self.get(i, j).clone()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    fn at(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "integer product shape");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = a * other.get(k, j);
                    *out.at(i, j) += v;
                }
            }
        }
        out
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if m.get(k, k).is_zero() {
                let Some(s) = (k + 1..n).find(|&i| !m.get(i, k).is_zero()) else {
                    return BigInt::zero();
                };
                m.swap_rows(k, s);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (m.get(i, j) * m.get(k, k) - m.get(i, k) * m.get(k, j)) / &prev;
                    *m.at(i, j) = v;
                }
            }
            prev = m.get(k, k).clone();
        }
        if n == 0 {
            BigInt::one()
        } else {
            sign * m.get(n - 1, n - 1)
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[target] += f * row[src]
    fn add_row(&mut self, target: usize, src: usize, f: &BigInt) {
        for j in 0..self.cols {
            let v = f * self.get(src, j);
            *self.at(target, j) += v;
        }
    }

    fn add_col(&mut self, target: usize, src: usize, f: &BigInt) {
        for i in 0..self.rows {
            let v = f * self.get(i, src);
            *self.at(i, target) += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -self.get(r, j);
            *self.at(r, j) = v;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub d: IntMatrix,
    pub left: IntMatrix,
    pub right: IntMatrix,
}

impl SmithForm {
    /// Diagonal entries `d_1 | d_2 | ...` (including trailing zeros).
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d.get(i, i).clone()).collect()
    }
}

/// `left · A · right = D` with `D` diagonal, nonnegative, and each diagonal
/// entry dividing the next.
pub fn smith_normal_form(a: &IntMatrix) -> SmithForm {
    let (m, n) = (a.rows, a.cols);
    let mut d = a.clone();
    let mut left = IntMatrix::identity(m);
    let mut right = IntMatrix::identity(n);
    for t in 0..m.min(n) {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    let x = d.get(i, j);
                    if !x.is_zero() && best.map_or(true, |(bi, bj)| x.abs() < d.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return SmithForm { d, left, right };
            };
            if pi != t {
                d.swap_rows(pi, t);
                left.swap_rows(pi, t);
            }
            if pj != t {
                d.swap_cols(pj, t);
                right.swap_cols(pj, t);
            }
            let mut dirty = false;
            for i in t + 1..m {
                let f = -(d.get(i, t).div_floor(d.get(t, t)));
                if !f.is_zero() {
                    d.add_row(i, t, &f);
                    left.add_row(i, t, &f);
                }
                dirty |= !d.get(i, t).is_zero();
            }
            for j in t + 1..n {
                let f = -(d.get(t, j).div_floor(d.get(t, t)));
                if !f.is_zero() {
                    d.add_col(j, t, &f);
                    right.add_col(j, t, &f);
                }
                dirty |= !d.get(t, j).is_zero();
            }
            if dirty {
                continue;
            }
            // enforce divisibility of the trailing block
            let piv = d.get(t, t).clone();
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !(d.get(i, j) % &piv).is_zero()));
            match bad {
                Some(i) => {
                    d.add_row(t, i, &BigInt::one());
                    left.add_row(t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            left.negate_row(t);
        }
    }
    SmithForm { d, left, right }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modular_kernel_matches_exact() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..12 {
            let (r, k, c) = (rng.gen_range(4..24), rng.gen_range(1..12), rng.gen_range(20..40));
            // rank at most k, entries with denominators and large numerators
            let left = RationalMatrix::from_fn(r, k, |_, _| Q::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..4).into()));
            let right = RationalMatrix::from_fn(k, c, |_, _| Q::from_integer((rng.gen_range(-5i64..=5) * 1_000_003).into()));
            let m = left.mul(&right);
            for order in [PivotOrder::Forward, PivotOrder::Reverse] {
                let fast = rank_kernel_image_with(&m, order);
                let slow = rank_kernel_image_exact(&m, order);
                assert_eq!(fast, slow, "trial {trial}");
            }
        }
    }
    use crate::rational::{q, qf};

    #[test]
    fn identity_and_zero() {
        let r = rank_kernel_image(&RationalMatrix::identity(3));
        assert_eq!((r.rank, r.kernel_basis.len()), (3, 0));
        let z = rank_kernel_image(&RationalMatrix::zeros(2, 5));
        assert_eq!((z.rank, z.kernel_basis.len()), (0, 5));
    }

    #[test]
    fn rank_one_kernel() {
        let a = RationalMatrix::from_i64(&[&[1, 2], &[2, 4]]);
        let r = rank_kernel_image(&a);
        assert_eq!(r.rank, 1);
        assert_eq!(r.kernel_basis.len(), 1);
        let k = &r.kernel_basis[0];
        // proportional to (2, -1)
        assert_eq!(&k[0] * q(-1), &k[1] * q(2));
        assert!(a.mul_vec(k).iter().all(Zero::is_zero));
        for (im, pre) in r.image_basis.iter().zip(&r.image_preimages) {
            assert_eq!(&a.mul_vec(pre), im);
        }
    }

    #[test]
    fn solve_and_inverse() {
        let a = RationalMatrix::from_i64(&[&[2, 1], &[1, 3]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), RationalMatrix::identity(2));
        assert_eq!(inv.get(0, 0), &qf(3, 5));
        let sing = RationalMatrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert_eq!(sing.inverse(), Err(LinalgError::Singular));
        let b = RationalMatrix::from_i64(&[&[1], &[3]]);
        assert_eq!(solve(&sing, &b).unwrap(), None);
        assert!(solve(&a, &RationalMatrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn subspace_zero_rhs() {
        let a = RationalMatrix::from_i64(&[&[1, 1], &[0, 1]]);
        let basis = vec![RationalMatrix::from_i64(&[&[1, 0], &[0, 1]]), RationalMatrix::from_i64(&[&[0, 1], &[1, 0]])];
        let s = solve_in_subspace(&a, &RationalMatrix::zeros(2, 2), &basis, Side::Left).unwrap().unwrap();
        assert!(s.x.is_zero());
    }

    #[test]
    fn subspace_unconstrained_surjective() {
        let a = RationalMatrix::from_i64(&[&[1, 2, 0], &[0, 1, 1]]);
        let b = RationalMatrix::from_i64(&[&[5, 1], &[7, -2]]);
        let basis: Vec<RationalMatrix> = (0..6)
            .map(|k| {
                let mut e = RationalMatrix::zeros(3, 2);
                e.set(k / 2, k % 2, q(1));
                e
            })
            .collect();
        let s = solve_in_subspace(&a, &b, &basis, Side::Left).unwrap().unwrap();
        assert_eq!(a.mul(&s.x), b);
        // right-sided variant: X A = B with A = transpose
        let at = a.transpose();
        let bt = b.transpose();
        let basis_t: Vec<RationalMatrix> = basis.iter().map(|x| x.transpose()).collect();
        let s = solve_in_subspace(&at, &bt, &basis_t, Side::Right).unwrap().unwrap();
        assert_eq!(s.x.mul(&at), bt);
    }

    #[test]
    fn subspace_shape_errors() {
        let a = RationalMatrix::identity(2);
        let b = RationalMatrix::zeros(2, 2);
        let basis = vec![RationalMatrix::zeros(3, 2)];
        assert!(solve_in_subspace(&a, &b, &basis, Side::Left).is_err());
        assert!(solve_in_subspace(&a, &RationalMatrix::zeros(3, 1), &[], Side::Left).is_err());
    }

    #[test]
    fn smith_examples() {
        let s = smith_normal_form(&IntMatrix::from_i64(&[&[2, 0], &[0, 6]]));
        assert_eq!(s.diagonal(), vec![BigInt::from(2), BigInt::from(6)]);
        let a = IntMatrix::from_i64(&[&[2, 4], &[6, 8]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.diagonal(), vec![BigInt::from(2), BigInt::from(4)]);
        assert_eq!(s.left.mul(&a).mul(&s.right), s.d);
        assert_eq!(s.left.det().abs(), BigInt::one());
        assert_eq!(s.right.det().abs(), BigInt::one());
        let z = smith_normal_form(&IntMatrix::zeros(2, 3));
        assert!(z.diagonal().iter().all(Zero::is_zero));
    }

    #[test]
    fn quotient_section() {
        let sub = vec![vec![q(1), q(1), q(0)]];
        let qt = quotient(3, &sub);
        assert_eq!(qt.projection.rows(), 2);
        assert_eq!(qt.projection.mul(&qt.section), RationalMatrix::identity(2));
        assert!(qt.projection.mul_vec(&sub[0]).iter().all(Zero::is_zero));
    }

    #[test]
    fn json_format() {
        let m = RationalMatrix::from_rows(vec![vec![qf(1, 2), q(0)], vec![q(0), q(-3)]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":2,"cols":2,"entries":[[0,0,"1/2"],[1,1,"-3"]]}"#);
        assert_eq!(serde_json::from_str::<RationalMatrix>(&s).unwrap(), m);
        assert!(serde_json::from_str::<RationalMatrix>(r#"{"rows":1,"cols":1,"entries":[[2,0,"1"]]}"#).is_err());
    }
}
