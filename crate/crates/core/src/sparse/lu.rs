use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::SparseMatrix;
use crate::error::{check_dim, Error, Result};

/// Relative pivot threshold: a pivot below this times the largest magnitude in
/// its original row is treated as a breakdown.
pub const LU_PIVOT_TOL: f64 = 1e-14;

/// `A = L U` computed in the given row/column order without pivoting.
#[derive(Debug, Clone)]
pub struct LuFactors {
    /// Unit lower triangular, diagonal stored explicitly.
    pub l: SparseMatrix,
    /// Upper triangular including the diagonal.
    pub u: SparseMatrix,
    /// `nnz(L + U) / nnz(A)`, where the unit diagonal of `L` is not counted.
    pub fill_ratio: f64,
}

/// Sparse LU in natural order (row-by-row Doolittle with a sparse accumulator).
pub fn sparse_lu(a: &SparseMatrix) -> Result<LuFactors> {
    let n = a.nrows();
    check_dim("LU needs a square matrix", n, a.ncols())?;

    let mut l_offsets = Vec::with_capacity(n + 1);
    let mut l_cols: Vec<usize> = Vec::with_capacity(a.nnz() + n);
    let mut l_vals: Vec<f64> = Vec::with_capacity(a.nnz() + n);
    let mut u_offsets = Vec::with_capacity(n + 1);
    let mut u_cols: Vec<usize> = Vec::with_capacity(a.nnz());
    let mut u_vals: Vec<f64> = Vec::with_capacity(a.nnz());
    l_offsets.push(0);
    u_offsets.push(0);

    let mut work = vec![0.0f64; n];
    let mut in_pattern = vec![false; n];
    let mut upper: Vec<usize> = Vec::new();
    let mut lower: Vec<usize> = Vec::new();
    let mut pending: BinaryHeap<Reverse<usize>> = BinaryHeap::new();

    for i in 0..n {
        let (cols, vals) = a.row(i);
        let row_max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        upper.clear();
        lower.clear();
        for (&c, &v) in cols.iter().zip(vals) {
            work[c] = v;
            in_pattern[c] = true;
            if c < i {
                pending.push(Reverse(c));
            } else {
                upper.push(c);
            }
        }
        while let Some(Reverse(k)) = pending.pop() {
            lower.push(k);
            let (ulo, uhi) = (u_offsets[k], u_offsets[k + 1]);
            // First stored entry of U's row k is its diagonal.
            let lik = work[k] / u_vals[ulo];
            work[k] = lik;
            for p in ulo + 1..uhi {
                let c = u_cols[p];
                if !in_pattern[c] {
                    in_pattern[c] = true;
                    work[c] = 0.0;
                    if c < i {
                        pending.push(Reverse(c));
                    } else {
                        upper.push(c);
                    }
                }
                work[c] -= lik * u_vals[p];
            }
        }

        for &k in &lower {
            l_cols.push(k);
            l_vals.push(work[k]);
            in_pattern[k] = false;
        }
        l_cols.push(i);
        l_vals.push(1.0);
        l_offsets.push(l_cols.len());

        upper.sort_unstable();
        let pivot = if in_pattern[i] { work[i] } else { 0.0 };
        let threshold = LU_PIVOT_TOL * row_max;
        if pivot.abs() < threshold || pivot == 0.0 {
            return Err(Error::LuBreakdown {
                row: i,
                pivot,
                threshold,
            });
        }
        for &c in &upper {
            u_cols.push(c);
            u_vals.push(work[c]);
            in_pattern[c] = false;
        }
        u_offsets.push(u_cols.len());
    }

    let l = SparseMatrix::from_raw_unchecked(n, n, l_offsets, l_cols, l_vals);
    let u = SparseMatrix::from_raw_unchecked(n, n, u_offsets, u_cols, u_vals);
    let fill_ratio = if a.nnz() == 0 {
        1.0
    } else {
        (l.nnz() - n + u.nnz()) as f64 / a.nnz() as f64
    };
    Ok(LuFactors { l, u, fill_ratio })
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Solves `L U x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.dim();
        assert_eq!(x.len(), n, "LU solve length");
        for i in 0..n {
            let (cols, vals) = self.l.row(i);
            let mut s = x[i];
            for (&c, &v) in cols[..cols.len() - 1].iter().zip(vals) {
                s -= v * x[c];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let (cols, vals) = self.u.row(i);
            let mut s = x[i];
            for (&c, &v) in cols[1..].iter().zip(&vals[1..]) {
                s -= v * x[c];
            }
            x[i] = s / vals[0];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_dim("LU solve right-hand side", self.dim(), b.len())?;
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }
}
