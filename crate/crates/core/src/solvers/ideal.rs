//! Exact block-diagonal Schur complement preconditioner
//! `diag(I + γA + γ²B1ᵀB2, I)` for `I + γ𝒜`, for tiny meshes.

use super::nested::OuterOperator;
use crate::error::{check_dim, Error, Result};
use crate::krylov::LinearOperator;
use crate::pml::ExtendedOperator;
use crate::sparse::{sparse_lu, LuFactors};

/// Largest `n` accepted by [`ideal_schur_preconditioner`].
pub const IDEAL_SCHUR_CAP: usize = 20_000;

/// `diag(T⁻¹, I)` with `T = I + γA + γ²B1ᵀB2` factorized exactly.
#[derive(Debug, Clone)]
pub struct IdealSchurPreconditioner {
    pub t: LuFactors,
    n: usize,
    m: usize,
}

pub fn ideal_schur_preconditioner(op: &ExtendedOperator, gamma: f64) -> Result<IdealSchurPreconditioner> {
    if op.n() > IDEAL_SCHUR_CAP {
        return Err(Error::SizeCap {
            what: "ideal Schur preconditioner",
            size: op.n(),
            cap: IDEAL_SCHUR_CAP,
        });
    }
    let outer = OuterOperator {
        blocks: &op.blocks,
        coupling: &op.coupling,
        gamma,
    };
    Ok(IdealSchurPreconditioner {
        t: sparse_lu(&outer.assemble()?)?,
        n: op.n(),
        m: op.m(),
    })
}

impl LinearOperator for IdealSchurPreconditioner {
    fn dim(&self) -> usize {
        self.n + self.m
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dim("ideal Schur preconditioner input", self.dim(), x.len())?;
        y.copy_from_slice(x);
        self.t.solve_in_place(&mut y[..self.n]);
        Ok(())
    }
}
