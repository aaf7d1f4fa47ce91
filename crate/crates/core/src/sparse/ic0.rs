use super::SparseMatrix;
use crate::error::{check_dim, Error, Result};

/// First diagonal shift tried after an IC(0) breakdown; doubled on each retry.
pub const IC0_INITIAL_SHIFT: f64 = 1e-3;
/// Largest relative diagonal shift before giving up.
pub const IC0_MAX_SHIFT: f64 = 1.0;

/// Zero-fill incomplete Cholesky factor `L` with `L Lᵀ ≈ A + shift·diag(A)`.
#[derive(Debug, Clone)]
pub struct Ic0Factor {
    /// Lower triangular with the pattern of `tril(A)`; diagonal stored last in each row.
    pub l: SparseMatrix,
    /// Relative diagonal shift that was needed (0 when none).
    pub shift: f64,
}

/// IC(0) of a symmetric matrix with positive diagonal. Only the lower triangle
/// of `a` is read.
pub fn ic0(a: &SparseMatrix) -> Result<Ic0Factor> {
    let n = a.nrows();
    check_dim("IC(0) needs a square matrix", n, a.ncols())?;
    let lower = a.lower_triangle();
    for i in 0..n {
        let (cols, vals) = lower.row(i);
        match cols.last() {
            Some(&c) if c == i && vals[vals.len() - 1] > 0.0 => {}
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "IC(0) needs a positive stored diagonal (row {i})"
                )))
            }
        }
    }
    let mut shift = 0.0;
    loop {
        match factor_shifted(&lower, shift) {
            Ok(l) => return Ok(Ic0Factor { l, shift }),
            Err(row) => {
                shift = if shift == 0.0 {
                    IC0_INITIAL_SHIFT
                } else {
                    shift * 2.0
                };
                if shift > IC0_MAX_SHIFT {
                    return Err(Error::Ic0Breakdown {
                        row,
                        shift: IC0_MAX_SHIFT,
                    });
                }
            }
        }
    }
}

fn factor_shifted(lower: &SparseMatrix, shift: f64) -> std::result::Result<SparseMatrix, usize> {
    let n = lower.nrows();
    let mut l = lower.clone();
    let offsets = l.row_offsets().to_vec();
    let cols = l.col_indices().to_vec();
    let vals = l.values_mut();
    for i in 0..n {
        let (lo, hi) = (offsets[i], offsets[i + 1]);
        let diag_pos = hi - 1;
        for p in lo..diag_pos {
            let k = cols[p];
            let (klo, khi) = (offsets[k], offsets[k + 1]);
            // Sparse dot of row i (columns < k) with row k (columns < k).
            let (mut a, mut b) = (lo, klo);
            let mut s = vals[p];
            while a < p && b < khi - 1 {
                match cols[a].cmp(&cols[b]) {
                    std::cmp::Ordering::Less => a += 1,
                    std::cmp::Ordering::Greater => b += 1,
                    std::cmp::Ordering::Equal => {
                        s -= vals[a] * vals[b];
                        a += 1;
                        b += 1;
                    }
                }
            }
            vals[p] = s / vals[khi - 1];
        }
        let mut d = vals[diag_pos] * (1.0 + shift);
        for p in lo..diag_pos {
            d -= vals[p] * vals[p];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(i);
        }
        vals[diag_pos] = d.sqrt();
    }
    Ok(l)
}

impl Ic0Factor {
    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Solves `L Lᵀ x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.dim();
        assert_eq!(x.len(), n, "IC(0) solve length");
        let offsets = self.l.row_offsets();
        let cols = self.l.col_indices();
        let vals = self.l.values();
        for i in 0..n {
            let (lo, hi) = (offsets[i], offsets[i + 1]);
            let mut s = x[i];
            for p in lo..hi - 1 {
                s -= vals[p] * x[cols[p]];
            }
            x[i] = s / vals[hi - 1];
        }
        for i in (0..n).rev() {
            let (lo, hi) = (offsets[i], offsets[i + 1]);
            let xi = x[i] / vals[hi - 1];
            x[i] = xi;
            for p in lo..hi - 1 {
                x[cols[p]] -= vals[p] * xi;
            }
        }
    }
}
