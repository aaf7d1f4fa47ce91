use num_complex::Complex64;

use super::{axpy, dot, norm2, LinearOperator};
use crate::error::{check_dim, Error, Result};
use crate::sparse::{hessenberg_eigenvalues, DenseMatrix};

/// Largest Krylov dimension accepted by [`arnoldi`].
pub const MAX_ARNOLDI_STEPS: usize = 64;

/// Orthonormal Krylov basis and the projected Hessenberg matrix.
#[derive(Debug, Clone)]
pub struct ArnoldiBasis {
    /// `steps + 1` basis vectors when no breakdown occurred, `steps` otherwise.
    pub v: Vec<Vec<f64>>,
    /// `(steps + 1) × steps` upper Hessenberg.
    pub h: DenseMatrix,
    /// Completed steps (fewer than requested on an invariant subspace).
    pub steps: usize,
    pub breakdown: bool,
}

/// `k` Arnoldi steps on `A M⁻¹` from `b`, modified Gram–Schmidt with one
/// reorthogonalization pass.
pub fn arnoldi(
    a: &dyn LinearOperator,
    precond: Option<&dyn LinearOperator>,
    b: &[f64],
    k: usize,
) -> Result<ArnoldiBasis> {
    let n = a.dim();
    check_dim("Arnoldi start vector", n, b.len())?;
    if k == 0 || k > MAX_ARNOLDI_STEPS {
        return Err(Error::InvalidParameter(format!(
            "Arnoldi steps must be in 1..={MAX_ARNOLDI_STEPS}, got {k}"
        )));
    }
    let bn = norm2(b);
    if bn == 0.0 {
        return Err(Error::InvalidParameter("Arnoldi start vector is zero".into()));
    }
    let mut v = vec![b.iter().map(|x| x / bn).collect::<Vec<f64>>()];
    let mut h = DenseMatrix::zeros(k + 1, k);
    let mut w = vec![0.0; n];
    let mut steps = 0;
    let mut breakdown = false;
    for j in 0..k {
        let z = match precond {
            Some(m) => m.apply_vec(&v[j])?,
            None => v[j].clone(),
        };
        a.apply(&z, &mut w)?;
        let wnorm0 = norm2(&w);
        for _pass in 0..2 {
            for (i, vi) in v.iter().enumerate() {
                let c = dot(&w, vi);
                h[(i, j)] += c;
                axpy(-c, vi, &mut w);
            }
        }
        let hn = norm2(&w);
        h[(j + 1, j)] = hn;
        steps = j + 1;
        if hn <= 1e-13 * wnorm0.max(f64::MIN_POSITIVE) {
            breakdown = true;
            break;
        }
        v.push(w.iter().map(|x| x / hn).collect());
    }
    Ok(ArnoldiBasis {
        v,
        h,
        steps,
        breakdown,
    })
}

/// Ritz values of `A M⁻¹`: eigenvalues of the square Hessenberg block after
/// `k` Arnoldi steps from `b` (fewer if the Krylov space becomes invariant).
pub fn fom_ritz(
    a: &dyn LinearOperator,
    precond: Option<&dyn LinearOperator>,
    b: &[f64],
    k: usize,
) -> Result<Vec<Complex64>> {
    let basis = arnoldi(a, precond, b, k)?;
    let s = basis.steps;
    let mut hs = DenseMatrix::zeros(s, s);
    for i in 0..s {
        for j in 0..s {
            hs[(i, j)] = basis.h[(i, j)];
        }
    }
    hessenberg_eigenvalues(&hs)
}
