//! Outer elimination of the auxiliary PML unknowns.
//!
//! For `(I + γ𝒜) x = b` with `b = (b1, b2)`:
//! `b1 := b1 − γ B1ᵀ b2`, solve `(I + γA + γ² B1ᵀB2) x1 = b1` by GMRES right
//! preconditioned with `(I + γA)⁻¹`, then `x2 = b2 + γ B2 x1`.

use super::middle::{MiddleMode, MiddleSolver};
use crate::error::{check_dim, Error, Result};
use crate::krylov::{gmres_restarted, norm2, LinearOperator, SolveReport, Timer};
use crate::pml::{ExtendedOperator, PmlCoupling};
use crate::sparse::SparseMatrix;
use crate::yee::MaxwellBlocks;

/// `I + γ𝒜` on the full `N = n + m` space.
pub struct ShiftedExtended<'a> {
    pub op: &'a ExtendedOperator,
    pub gamma: f64,
}

impl LinearOperator for ShiftedExtended<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.op.apply(x, y)?;
        for (y, x) in y.iter_mut().zip(x) {
            *y = x + self.gamma * *y;
        }
        Ok(())
    }
}

/// `T = I + γA + γ² B1ᵀB2`, applied through
/// `B1ᵀB2 = [[Σ*_H, K1 Σ_E], [−K2ᵀ Σ_H, Σ*_E]]` without forming the product.
pub struct OuterOperator<'a> {
    pub blocks: &'a MaxwellBlocks,
    pub coupling: &'a PmlCoupling,
    pub gamma: f64,
}

impl OuterOperator<'_> {
    /// `y = B1ᵀB2 x` by the block formula.
    pub fn apply_product(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let n1 = self.blocks.n1();
        check_dim("outer operator input", self.blocks.n(), x.len())?;
        check_dim("outer operator output", self.blocks.n(), y.len())?;
        let (xh, xe) = x.split_at(n1);
        let (yh, ye) = y.split_at_mut(n1);
        let se: Vec<f64> = xe.iter().zip(self.coupling.sigma_e.diag()).map(|(x, s)| x * s).collect();
        let sh: Vec<f64> = xh.iter().zip(self.coupling.sigma_h.diag()).map(|(x, s)| x * s).collect();
        self.blocks.k1.mul_vec_into(&se, yh);
        for ((y, x), s) in yh.iter_mut().zip(xh).zip(self.coupling.sigma_star_h.diag()) {
            *y += s * x;
        }
        self.blocks.k2t.mul_vec_into(&sh, ye);
        for ((y, x), s) in ye.iter_mut().zip(xe).zip(self.coupling.sigma_star_e.diag()) {
            *y = s * x - *y;
        }
        Ok(())
    }

    /// `T` as one matrix, from the sparse product `B1ᵀ B2`.
    pub fn assemble(&self) -> Result<SparseMatrix> {
        let g = self.gamma;
        let ia = self.blocks.assemble_shifted(g);
        ia.add_scaled(1.0, &self.coupling.product()?, g * g)
    }
}

impl LinearOperator for OuterOperator<'_> {
    fn dim(&self) -> usize {
        self.blocks.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let mut p = vec![0.0; x.len()];
        self.apply_product(x, &mut p)?;
        self.blocks.apply_a(x, y);
        let g = self.gamma;
        for ((y, x), p) in y.iter_mut().zip(x).zip(&p) {
            *y = x + g * *y + g * g * p;
        }
        Ok(())
    }
}

/// Outer GMRES settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterConfig {
    pub restart: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for OuterConfig {
    fn default() -> Self {
        Self {
            restart: 10,
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

/// Nested Schur complement solver for `(I + γ𝒜) x = b`.
pub struct NestedSchurSolver<'a> {
    pub op: &'a ExtendedOperator,
    pub gamma: f64,
    pub outer: OuterConfig,
    pub middle: MiddleSolver<'a>,
}

impl<'a> NestedSchurSolver<'a> {
    pub fn new(op: &'a ExtendedOperator, gamma: f64, outer: OuterConfig, middle: MiddleMode) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma = {gamma}")));
        }
        Ok(Self {
            op,
            gamma,
            outer,
            middle: MiddleSolver::new(&op.blocks, gamma, middle)?,
        })
    }

    pub fn outer_operator(&self) -> OuterOperator<'_> {
        OuterOperator {
            blocks: &self.op.blocks,
            coupling: &self.op.coupling,
            gamma: self.gamma,
        }
    }

    /// Solves `T x1 = b1` with the middle solver as right preconditioner.
    pub fn solve_outer(&self, b1: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
        let outer = self.outer_operator();
        self.middle.stats.reset();
        let (x, mut rep) = gmres_restarted(
            &outer,
            Some(&self.middle),
            b1,
            self.outer.restart,
            self.outer.tol,
            self.outer.max_iter,
        )?;
        let (_, total, max) = self.middle.stats.snapshot();
        rep.inner_iterations = total;
        rep.max_inner_iterations = max;
        Ok((x, rep))
    }

    /// Returns the solution and a report whose `final_residual` is the true
    /// relative residual of the full `N`-dimensional system.
    pub fn solve_nested(&self, b: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
        let timer = Timer::start();
        let n = self.op.n();
        check_dim("nested solve right-hand side", self.op.dim(), b.len())?;
        let g = self.gamma;
        let (b1, b2) = b.split_at(n);
        let mut rhs = b1.to_vec();
        self.op.coupling.b1t.mul_vec_add(-g, b2, &mut rhs);
        let (x1, mut rep) = self.solve_outer(&rhs)?;
        let mut x = x1;
        let mut x2 = b2.to_vec();
        self.op.coupling.b2.mul_vec_add(g, &x, &mut x2);
        x.extend_from_slice(&x2);

        let shifted = ShiftedExtended { op: self.op, gamma: g };
        let ax = shifted.apply_vec(&x)?;
        let r: Vec<f64> = ax.iter().zip(b).map(|(a, b)| b - a).collect();
        let bn = norm2(b);
        rep.final_residual = if bn > 0.0 { norm2(&r) / bn } else { norm2(&r) };
        rep.wall_time = timer.seconds();
        Ok((x, rep))
    }
}
