//! Compressed sparse row storage and the small set of kernels the rest of the
//! crate is built on: products, transposes, block assembly, norms, and the
//! symmetric/skew split.

mod dense;
mod ic0;
mod lu;
pub mod mtx;

pub use dense::{dense_solve, hessenberg_eigenvalues, DenseMatrix};
pub use ic0::{ic0, Ic0Factor, IC0_MAX_SHIFT};
pub use lu::{sparse_lu, LuFactors};

use crate::error::{check_dim, Error, Result};

/// General CSR matrix.
///
/// Column indices are strictly increasing within each row and no `(row, col)`
/// pair is stored twice. Stored entries may be numerically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating every structural invariant.
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(Error::InvalidStructure(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                nrows + 1
            )));
        }
        if row_offsets[0] != 0 {
            return Err(Error::InvalidStructure("row_offsets[0] != 0".into()));
        }
        if col_indices.len() != values.len() || row_offsets[nrows] != values.len() {
            return Err(Error::InvalidStructure(
                "row_offsets[nrows], col_indices and values disagree on nnz".into(),
            ));
        }
        for r in 0..nrows {
            let (lo, hi) = (row_offsets[r], row_offsets[r + 1]);
            if hi < lo {
                return Err(Error::InvalidStructure(format!(
                    "row_offsets decreases at row {r}"
                )));
            }
            for p in lo..hi {
                if col_indices[p] >= ncols {
                    return Err(Error::InvalidStructure(format!(
                        "column {} out of range in row {r}",
                        col_indices[p]
                    )));
                }
                if p > lo && col_indices[p] <= col_indices[p - 1] {
                    return Err(Error::InvalidStructure(format!(
                        "columns not strictly increasing in row {r}"
                    )));
                }
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Internal constructor for arrays already known to be valid.
    pub(crate) fn from_raw_unchecked(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(row_offsets.len(), nrows + 1);
        debug_assert_eq!(col_indices.len(), values.len());
        Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_raw_unchecked(nrows, ncols, vec![0; nrows + 1], Vec::new(), Vec::new())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    /// Square diagonal matrix; every diagonal slot is stored, zeros included.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_raw_unchecked(n, n, (0..=n).collect(), (0..n).collect(), diag.to_vec())
    }

    /// Assembles from `(row, col, value)` triplets. Duplicate positions are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(r, c, _) in &triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::InvalidStructure(format!(
                    "triplet ({r}, {c}) outside {nrows}x{ncols}"
                )));
            }
        }
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_offsets = vec![0usize; nrows + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            col_indices.push(c);
            values.push(v);
            row_offsets[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..nrows {
            row_offsets[r + 1] += row_offsets[r];
        }
        Ok(Self::from_raw_unchecked(
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        ))
    }

    /// Converts a dense matrix, storing only entries that are not exactly zero.
    pub fn from_dense(dense: &DenseMatrix) -> Self {
        let mut row_offsets = Vec::with_capacity(dense.nrows() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for i in 0..dense.nrows() {
            for j in 0..dense.ncols() {
                let v = dense[(i, j)];
                if v != 0.0 {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(values.len());
        }
        Self::from_raw_unchecked(dense.nrows(), dense.ncols(), row_offsets, col_indices, values)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            d[(r, c)] += v;
        }
        d
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Column indices and values of row `r`.
    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[r], self.row_offsets[r + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Stored value at `(r, c)`, or `None` when the position is not in the pattern.
    pub fn get(&self, r: usize, c: usize) -> Option<f64> {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).ok().map(|p| vals[p])
    }

    /// Iterates stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    /// Checked product `A x`.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("spmv input", self.ncols, x.len())?;
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x`. Panics on dimension mismatch.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "spmv input length");
        assert_eq!(y.len(), self.nrows, "spmv output length");
        for (r, yr) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_offsets[r], self.row_offsets[r + 1]);
            let mut acc = 0.0;
            for p in lo..hi {
                acc += self.values[p] * x[self.col_indices[p]];
            }
            *yr = acc;
        }
    }

    /// `y += alpha A x`. Panics on dimension mismatch.
    pub fn mul_vec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "spmv input length");
        assert_eq!(y.len(), self.nrows, "spmv output length");
        for (r, yr) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_offsets[r], self.row_offsets[r + 1]);
            let mut acc = 0.0;
            for p in lo..hi {
                acc += self.values[p] * x[self.col_indices[p]];
            }
            *yr += alpha * acc;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.ncols {
            counts[c + 1] += counts[c];
        }
        let row_offsets = counts.clone();
        let mut next = counts;
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let dst = next[c];
                col_indices[dst] = r;
                values[dst] = v;
                next[c] += 1;
            }
        }
        Self::from_raw_unchecked(self.ncols, self.nrows, row_offsets, col_indices, values)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// `diag(d) A`.
    pub fn scale_rows(&self, d: &[f64]) -> Result<Self> {
        check_dim("row scaling", self.nrows, d.len())?;
        let mut out = self.clone();
        for r in 0..self.nrows {
            let (lo, hi) = (self.row_offsets[r], self.row_offsets[r + 1]);
            out.values[lo..hi].iter_mut().for_each(|v| *v *= d[r]);
        }
        Ok(out)
    }

    /// `A diag(d)`.
    pub fn scale_cols(&self, d: &[f64]) -> Result<Self> {
        check_dim("column scaling", self.ncols, d.len())?;
        let mut out = self.clone();
        for (v, &c) in out.values.iter_mut().zip(&self.col_indices) {
            *v *= d[c];
        }
        Ok(out)
    }

    /// `alpha A + beta B` on the union pattern. Entries that cancel stay stored.
    pub fn add_scaled(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        check_dim("matrix sum rows", self.nrows, other.nrows)?;
        check_dim("matrix sum cols", self.ncols, other.ncols)?;
        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        let mut col_indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        row_offsets.push(0);
        for r in 0..self.nrows {
            let (ca, va) = self.row(r);
            let (cb, vb) = other.row(r);
            let (mut i, mut j) = (0, 0);
            while i < ca.len() || j < cb.len() {
                let take_a = j >= cb.len() || (i < ca.len() && ca[i] <= cb[j]);
                let take_b = i >= ca.len() || (j < cb.len() && cb[j] <= ca[i]);
                if take_a && take_b {
                    col_indices.push(ca[i]);
                    values.push(alpha * va[i] + beta * vb[j]);
                    i += 1;
                    j += 1;
                } else if take_a {
                    col_indices.push(ca[i]);
                    values.push(alpha * va[i]);
                    i += 1;
                } else {
                    col_indices.push(cb[j]);
                    values.push(beta * vb[j]);
                    j += 1;
                }
            }
            row_offsets.push(values.len());
        }
        Ok(Self::from_raw_unchecked(
            self.nrows,
            self.ncols,
            row_offsets,
            col_indices,
            values,
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(1.0, other, -1.0)
    }

    /// Sparse product `A B` (Gustavson's row-by-row algorithm).
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_dim("matrix product inner dimension", self.ncols, other.nrows)?;
        let n = other.ncols;
        let mut marker = vec![usize::MAX; n];
        let mut acc = vec![0.0; n];
        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        let mut pattern: Vec<usize> = Vec::new();
        row_offsets.push(0);
        for r in 0..self.nrows {
            pattern.clear();
            let (ca, va) = self.row(r);
            for (&k, &a) in ca.iter().zip(va) {
                let (cb, vb) = other.row(k);
                for (&c, &b) in cb.iter().zip(vb) {
                    if marker[c] != r {
                        marker[c] = r;
                        acc[c] = 0.0;
                        pattern.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            pattern.sort_unstable();
            for &c in &pattern {
                col_indices.push(c);
                values.push(acc[c]);
            }
            row_offsets.push(values.len());
        }
        Ok(Self::from_raw_unchecked(
            self.nrows,
            n,
            row_offsets,
            col_indices,
            values,
        ))
    }

    /// Copy with stored entries of magnitude `<= tol` removed.
    pub fn pruned(&self, tol: f64) -> Self {
        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        let mut col_indices = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        row_offsets.push(0);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if v.abs() > tol {
                    col_indices.push(c);
                    values.push(v);
                }
            }
            row_offsets.push(values.len());
        }
        Self::from_raw_unchecked(self.nrows, self.ncols, row_offsets, col_indices, values)
    }

    /// Rows `rows[0], rows[1], ...` stacked in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for &r in rows {
            if r >= self.nrows {
                return Err(Error::InvalidStructure(format!("row {r} out of range")));
            }
            let (cols, vals) = self.row(r);
            col_indices.extend_from_slice(cols);
            values.extend_from_slice(vals);
            row_offsets.push(values.len());
        }
        Ok(Self::from_raw_unchecked(
            rows.len(),
            self.ncols,
            row_offsets,
            col_indices,
            values,
        ))
    }

    /// Assembles a block matrix. `None` blocks are zero; every block row must
    /// contain at least one `Some` to fix its height, likewise for block columns.
    pub fn from_blocks(blocks: &[Vec<Option<&SparseMatrix>>]) -> Result<Self> {
        let nbr = blocks.len();
        let nbc = blocks.first().map_or(0, |r| r.len());
        let mut heights = vec![None; nbr];
        let mut widths = vec![None; nbc];
        for (bi, brow) in blocks.iter().enumerate() {
            if brow.len() != nbc {
                return Err(Error::InvalidStructure("ragged block layout".into()));
            }
            for (bj, blk) in brow.iter().enumerate() {
                if let Some(m) = blk {
                    for (slot, size, what) in [
                        (&mut heights[bi], m.nrows, "block row height"),
                        (&mut widths[bj], m.ncols, "block column width"),
                    ] {
                        match slot {
                            None => *slot = Some(size),
                            Some(s) => check_dim(what, *s, size)?,
                        }
                    }
                }
            }
        }
        let heights: Vec<usize> = heights
            .into_iter()
            .map(|h| h.ok_or_else(|| Error::InvalidStructure("empty block row".into())))
            .collect::<Result<_>>()?;
        let widths: Vec<usize> = widths
            .into_iter()
            .map(|w| w.ok_or_else(|| Error::InvalidStructure("empty block column".into())))
            .collect::<Result<_>>()?;
        let mut col_base = vec![0usize; nbc];
        for j in 1..nbc {
            col_base[j] = col_base[j - 1] + widths[j - 1];
        }
        let nrows: usize = heights.iter().sum();
        let ncols: usize = widths.iter().sum();
        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for (bi, brow) in blocks.iter().enumerate() {
            for r in 0..heights[bi] {
                for (bj, blk) in brow.iter().enumerate() {
                    if let Some(m) = blk {
                        let (cols, vals) = m.row(r);
                        col_indices.extend(cols.iter().map(|c| c + col_base[bj]));
                        values.extend_from_slice(vals);
                    }
                }
                row_offsets.push(values.len());
            }
        }
        Ok(Self::from_raw_unchecked(
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        ))
    }

    /// `P A Pᵀ` where `perm[new] = old`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Result<Self> {
        check_dim("permutation length", self.nrows, perm.len())?;
        check_dim("symmetric permutation needs a square matrix", self.nrows, self.ncols)?;
        let inv = inverse_permutation(perm)?;
        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        let mut col_indices = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        row_offsets.push(0);
        for &old in perm {
            scratch.clear();
            let (cols, vals) = self.row(old);
            scratch.extend(cols.iter().zip(vals).map(|(&c, &v)| (inv[c], v)));
            scratch.sort_unstable_by_key(|e| e.0);
            for &(c, v) in &scratch {
                col_indices.push(c);
                values.push(v);
            }
            row_offsets.push(values.len());
        }
        Ok(Self::from_raw_unchecked(
            self.nrows,
            self.ncols,
            row_offsets,
            col_indices,
            values,
        ))
    }

    /// Main diagonal (zero where not stored).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i).unwrap_or(0.0))
            .collect()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut sums = vec![0.0; self.ncols];
        for (&c, &v) in self.col_indices.iter().zip(&self.values) {
            sums[c] += v.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(A + Aᵀ) / 2` on the union pattern of `A` and `Aᵀ`.
    pub fn symmetric_part(&self) -> Result<Self> {
        check_dim("symmetric part needs a square matrix", self.nrows, self.ncols)?;
        self.add_scaled(0.5, &self.transpose(), 0.5)
    }

    /// `(A - Aᵀ) / 2` on the union pattern of `A` and `Aᵀ`.
    pub fn skew_part(&self) -> Result<Self> {
        check_dim("skew part needs a square matrix", self.nrows, self.ncols)?;
        self.add_scaled(0.5, &self.transpose(), -0.5)
    }

    /// Lower triangle including the diagonal.
    pub fn lower_triangle(&self) -> Self {
        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if c <= r {
                    col_indices.push(c);
                    values.push(v);
                }
            }
            row_offsets.push(values.len());
        }
        Self::from_raw_unchecked(self.nrows, self.ncols, row_offsets, col_indices, values)
    }

    /// True when the patterns are identical and values agree to `tol` (absolute).
    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        let t = self.transpose();
        t.row_offsets == self.row_offsets
            && t.col_indices == self.col_indices
            && t.values
                .iter()
                .zip(&self.values)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

pub(crate) fn inverse_permutation(perm: &[usize]) -> Result<Vec<usize>> {
    let mut inv = vec![usize::MAX; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        if old >= perm.len() || inv[old] != usize::MAX {
            return Err(Error::InvalidParameter("not a permutation".into()));
        }
        inv[old] = new;
    }
    Ok(inv)
}

/// Diagonal matrix stored as its entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMatrix {
    diag: Vec<f64>,
}

impl DiagonalMatrix {
    pub fn new(diag: Vec<f64>) -> Self {
        Self { diag }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn nnz(&self) -> usize {
        self.diag.iter().filter(|v| **v != 0.0).count()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("diagonal product", self.diag.len(), x.len())?;
        Ok(self.diag.iter().zip(x).map(|(d, v)| d * v).collect())
    }

    /// Entrywise reciprocal; fails on a zero entry.
    pub fn inverse(&self) -> Result<Self> {
        self.diag
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                if d == 0.0 {
                    Err(Error::Singular { column: i })
                } else {
                    Ok(1.0 / d)
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        SparseMatrix::from_diagonal(&self.diag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_sparse(n: usize, m: usize, seed: u64, density: f64) -> SparseMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..m {
                if rng.random::<f64>() < density {
                    t.push((i, j, rng.random::<f64>() * 2.0 - 1.0));
                }
            }
        }
        SparseMatrix::from_triplets(n, m, t).unwrap()
    }

    fn dense_matvec(d: &DenseMatrix, x: &[f64]) -> Vec<f64> {
        (0..d.nrows())
            .map(|i| (0..d.ncols()).map(|j| d[(i, j)] * x[j]).sum())
            .collect()
    }

    #[test]
    fn identity_spmv() {
        let i3 = SparseMatrix::identity(3);
        assert_eq!(i3.spmv(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn zero_matrix_spmv() {
        let z = SparseMatrix::zeros(4, 7);
        assert_eq!(z.spmv(&[1.5; 7]).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn rotation_spmv_and_dense_oracle() {
        let r = SparseMatrix::from_triplets(2, 2, vec![(0, 1, 1.0), (1, 0, -1.0)]).unwrap();
        assert_eq!(r.spmv(&[3.0, 5.0]).unwrap(), vec![5.0, -3.0]);
        for seed in 0..5 {
            let a = random_sparse(20, 20, seed, 0.3);
            let x: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
            let y = a.spmv(&x).unwrap();
            let yd = dense_matvec(&a.to_dense(), &x);
            for (u, v) in y.iter().zip(&yd) {
                assert!((u - v).abs() <= 1e-14 * (1.0 + v.abs()));
            }
        }
    }

    #[test]
    fn spmv_dimension_error() {
        let a = SparseMatrix::identity(3);
        assert!(matches!(a.spmv(&[1.0, 2.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn invalid_structure_rejected() {
        assert!(SparseMatrix::new(2, 2, vec![0, 2, 1], vec![0, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::new(1, 2, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::new(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
        assert!(SparseMatrix::new(1, 2, vec![0, 2], vec![0, 1], vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn triplet_duplicates_are_summed() {
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0)])
            .unwrap();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(0, 0), Some(3.0));
    }

    #[test]
    fn norms_and_parts_of_rotation() {
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 1, 1.0), (1, 0, -1.0)]).unwrap();
        let h = a.symmetric_part().unwrap();
        let s = a.skew_part().unwrap();
        assert_eq!(h.max_abs(), 0.0);
        assert_eq!(s.to_dense(), a.to_dense());
        assert_eq!(a.one_norm(), 1.0);
    }

    #[test]
    fn symmetric_matrix_has_zero_skew_part() {
        let a = random_sparse(12, 12, 3, 0.3);
        let sym = a.add(&a.transpose()).unwrap();
        assert_eq!(sym.skew_part().unwrap().max_abs(), 0.0);
    }

    #[test]
    fn matmul_matches_dense() {
        let a = random_sparse(9, 7, 1, 0.4);
        let b = random_sparse(7, 5, 2, 0.4);
        let c = a.matmul(&b).unwrap().to_dense();
        let (ad, bd) = (a.to_dense(), b.to_dense());
        for i in 0..9 {
            for j in 0..5 {
                let e: f64 = (0..7).map(|k| ad[(i, k)] * bd[(k, j)]).sum();
                assert!((c[(i, j)] - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn block_assembly_and_permutation() {
        let i2 = SparseMatrix::identity(2);
        let r = SparseMatrix::from_triplets(2, 2, vec![(0, 1, 1.0), (1, 0, -1.0)]).unwrap();
        let b = SparseMatrix::from_blocks(&[vec![Some(&i2), Some(&r)], vec![None, Some(&i2)]])
            .unwrap();
        assert_eq!(b.nrows(), 4);
        assert_eq!(b.get(0, 3), Some(1.0));
        assert_eq!(b.get(1, 2), Some(-1.0));
        assert_eq!(b.get(2, 0), None);
        let p = b.permute_symmetric(&[2, 3, 0, 1]).unwrap();
        assert_eq!(p.get(2, 1), Some(1.0));
        assert_eq!(p.get(3, 0), Some(-1.0));
    }

    #[test]
    fn diagonal_inverse_rejects_zero() {
        assert!(DiagonalMatrix::new(vec![1.0, 0.0]).inverse().is_err());
        let d = DiagonalMatrix::new(vec![2.0, 4.0]).inverse().unwrap();
        assert_eq!(d.diag(), &[0.5, 0.25]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn transpose_spmv_matches_dense_oracle(seed in 0u64..1000, density in 0.05f64..0.6) {
            let a = random_sparse(30, 30, seed, density);
            let x: Vec<f64> = (0..30).map(|i| ((i * 7 + seed as usize) % 11) as f64 - 5.0).collect();
            let at = a.transpose();
            let y = at.spmv(&x).unwrap();
            let d = a.to_dense();
            let scale = x.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
            for j in 0..30 {
                let e: f64 = (0..30).map(|i| d[(i, j)] * x[i]).sum();
                prop_assert!((y[j] - e).abs() <= 1e-13 * scale);
            }
        }

        #[test]
        fn symmetric_plus_skew_reconstructs(seed in 0u64..1000) {
            let a = random_sparse(15, 15, seed, 0.25);
            let h = a.symmetric_part().unwrap();
            let s = a.skew_part().unwrap();
            let sum = h.add(&s).unwrap();
            let union = a.add_scaled(1.0, &a.transpose(), 0.0).unwrap();
            prop_assert_eq!(sum.col_indices(), union.col_indices());
            prop_assert_eq!(sum.row_offsets(), union.row_offsets());
            for (r, c, v) in sum.iter() {
                prop_assert_eq!(v, a.get(r, c).unwrap_or(0.0));
            }
        }
    }
}
