//! Matrix-free Krylov solvers with right preconditioning, plus Arnoldi-based
//! Ritz value extraction.
//!
//! Every solver reports the true relative residual `‖b − A x‖ / ‖b‖`
//! recomputed from the returned `x`.

mod arnoldi;
mod bicgstab;
mod cg;
mod gmres;

pub use arnoldi::{arnoldi, fom_ritz, ArnoldiBasis, MAX_ARNOLDI_STEPS};
pub use bicgstab::bicgstab2;
pub use cg::cg;
pub use gmres::gmres_restarted;

use std::time::Instant;

use crate::error::{check_dim, Result};
use crate::sparse::{DiagonalMatrix, SparseMatrix};

/// Allowed ratio between the true residual and the tolerance when the
/// recurrence residual has already converged.
pub const KAPPA_SLACK: f64 = 10.0;

/// A square linear map applied without forming its matrix.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// `y = A x`. Both slices have length [`dim`](Self::dim).
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;

    fn apply_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("operator input", self.dim(), x.len())?;
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y)?;
        Ok(y)
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dim("sparse operator columns", self.ncols(), x.len())?;
        check_dim("sparse operator rows", self.nrows(), y.len())?;
        self.mul_vec_into(x, y);
        Ok(())
    }
}

impl LinearOperator for DiagonalMatrix {
    fn dim(&self) -> usize {
        self.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dim("diagonal operator input", self.len(), x.len())?;
        check_dim("diagonal operator output", self.len(), y.len())?;
        for ((y, x), d) in y.iter_mut().zip(x).zip(self.diag()) {
            *y = d * x;
        }
        Ok(())
    }
}

/// The identity of a given dimension.
#[derive(Debug, Clone, Copy)]
pub struct IdentityOperator(pub usize);

impl LinearOperator for IdentityOperator {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dim("identity input", self.0, x.len())?;
        y.copy_from_slice(x);
        Ok(())
    }
}

/// Wraps a closure `f(x, y)` computing `y = A x`.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> LinearOperator for FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dim("operator input", self.dim, x.len())?;
        check_dim("operator output", self.dim, y.len())?;
        (self.f)(x, y)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        (**self).apply(x, y)
    }
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveReport {
    pub converged: bool,
    /// GMRES: Arnoldi steps summed over cycles. CG: iterations.
    /// BiCGstab(2): started `ℓ = 2` cycles. Nested solver: outer GMRES steps.
    pub iterations: usize,
    /// GMRES restart cycles.
    pub cycles: usize,
    /// Applications of the system operator.
    pub matvecs: usize,
    /// Total inner iterations performed inside preconditioner applications.
    pub inner_iterations: usize,
    /// Largest inner iteration count of a single preconditioner application.
    pub max_inner_iterations: usize,
    /// Relative residual estimates, one per step (`[0]` is the initial one).
    pub residual_history: Vec<f64>,
    /// `‖b − A x‖ / ‖b‖` recomputed from the returned solution.
    pub final_residual: f64,
    /// Seconds.
    pub wall_time: f64,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha x`.
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (y, x) in y.iter_mut().zip(x) {
        *y += alpha * x;
    }
}

/// `‖b − A x‖ / ‖b‖` (or `‖A x‖` when `b = 0`).
pub fn relative_residual(a: &dyn LinearOperator, x: &[f64], b: &[f64]) -> Result<f64> {
    let mut r = vec![0.0; b.len()];
    a.apply(x, &mut r)?;
    for (r, b) in r.iter_mut().zip(b) {
        *r = b - *r;
    }
    let bn = norm2(b);
    let rn = norm2(&r);
    Ok(if bn > 0.0 { rn / bn } else { rn })
}

pub(crate) struct Timer(Instant);

impl Timer {
    pub(crate) fn start() -> Self {
        Self(Instant::now())
    }

    pub(crate) fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operators_are_linear() {
        let a = SparseMatrix::from_dense(&test_util::random_nonsymmetric(30, 1));
        let x = test_util::random_vec(30, 2);
        let y = test_util::random_vec(30, 3);
        let (alpha, beta) = (0.7, -1.3);
        let comb: Vec<f64> = x.iter().zip(&y).map(|(x, y)| alpha * x + beta * y).collect();
        let lhs = a.apply_vec(&comb).unwrap();
        let ax = a.apply_vec(&x).unwrap();
        let ay = a.apply_vec(&y).unwrap();
        let scale = norm2(&ax) + norm2(&ay);
        for i in 0..30 {
            assert!((lhs[i] - alpha * ax[i] - beta * ay[i]).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn fn_operator_checks_dimensions() {
        let op = FnOperator::new(3, |x: &[f64], y: &mut [f64]| {
            y.copy_from_slice(x);
            Ok(())
        });
        assert!(op.apply_vec(&[1.0, 2.0]).is_err());
        assert_eq!(op.apply_vec(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }
}
