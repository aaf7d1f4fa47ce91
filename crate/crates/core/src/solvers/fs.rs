//! Field-splitting preconditioner `𝓜 = (I + γ𝒜₁)(I + γ𝒜₂)` with
//! `𝒜₁ = [[A₁, B1,Hᵀ], [−B2,H, 0]]`, `A₁ = [[M1, K1], [0, 0]]` and
//! `𝒜₂ = [[A₂, B1,Eᵀ], [−B2,E, 0]]`, `A₂ = [[0, 0], [−K2ᵀ, M2]]`.
//!
//! Both factors are LU-factorized without pivoting. In natural order the
//! factors fill in; [`FsOrdering::FieldBlocks`] puts each factor's
//! identity-row unknowns first, which gives an exactly fill-free LU.

use super::nested::ShiftedExtended;
use crate::error::{check_dim, Result};
use crate::krylov::{gmres_restarted, LinearOperator, SolveReport};
use crate::pml::ExtendedOperator;
use crate::sparse::{sparse_lu, LuFactors, SparseMatrix};

/// Row/column order used when factorizing the two FS factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FsOrdering {
    /// Unknowns as stored: `[h, e, aux]`.
    Natural,
    /// Factor 1: `[e, aux 0/1/3, h, aux 2]`; factor 2: `[h, aux 0/1/2, e, aux 3]`.
    #[default]
    FieldBlocks,
}

/// `(I + γ𝒜₁, I + γ𝒜₂)` assembled in natural order.
pub fn fs_factor_matrices(op: &ExtendedOperator, gamma: f64) -> Result<(SparseMatrix, SparseMatrix)> {
    let b = &op.blocks;
    let c = &op.coupling;
    let n1 = b.n1();
    let n2 = b.n2();
    let m1 = SparseMatrix::from_diagonal(&b.m1).pruned(0.0);
    let m2 = SparseMatrix::from_diagonal(&b.m2).pruned(0.0);
    let neg_k2t = b.k2t.scale(-1.0);
    let a1 = SparseMatrix::from_blocks(&[vec![Some(&m1), Some(&b.k1)], vec![None, Some(&SparseMatrix::zeros(n2, n2))]])?;
    let a2 = SparseMatrix::from_blocks(&[
        vec![Some(&SparseMatrix::zeros(n1, n1)), None],
        vec![Some(&neg_k2t), Some(&m2)],
    ])?;
    let build = |a: &SparseMatrix, b1: &SparseMatrix, b2: &SparseMatrix| -> Result<SparseMatrix> {
        let b1t = b1.transpose();
        let neg_b2 = b2.scale(-1.0);
        let script = SparseMatrix::from_blocks(&[vec![Some(a), Some(&b1t)], vec![Some(&neg_b2), None]])?;
        SparseMatrix::identity(script.nrows()).add_scaled(1.0, &script, gamma)
    };
    Ok((build(&a1, &c.b1_h, &c.b2_h)?, build(&a2, &c.b1_e, &c.b2_e)?))
}

/// `perm[new] = old` orderings for the two factors.
fn block_orderings(op: &ExtendedOperator) -> (Vec<usize>, Vec<usize>) {
    let n1 = op.blocks.n1();
    let n = op.n();
    let h = 0..n1;
    let e = n1..n;
    let aux = |blocks: &[usize]| -> Vec<usize> {
        op.coupling
            .kept
            .iter()
            .enumerate()
            .filter(|(_, &slot)| blocks.contains(&(slot / n1)))
            .map(|(row, _)| n + row)
            .collect()
    };
    let mut p1: Vec<usize> = e.clone().collect();
    p1.extend(aux(&[0, 1, 3]));
    p1.extend(h.clone());
    p1.extend(aux(&[2]));
    let mut p2: Vec<usize> = h.collect();
    p2.extend(aux(&[0, 1, 2]));
    p2.extend(e);
    p2.extend(aux(&[3]));
    (p1, p2)
}

/// One LU-factorized FS factor with its symmetric permutation.
#[derive(Debug, Clone)]
pub struct PermutedLu {
    pub lu: LuFactors,
    /// `perm[new] = old`, or `None` for natural order.
    pub perm: Option<Vec<usize>>,
}

impl PermutedLu {
    fn factor(a: &SparseMatrix, perm: Option<Vec<usize>>) -> Result<Self> {
        let lu = match &perm {
            Some(p) => sparse_lu(&a.permute_symmetric(p)?)?,
            None => sparse_lu(a)?,
        };
        Ok(Self { lu, perm })
    }

    fn solve_in_place(&self, x: &mut [f64], work: &mut [f64]) {
        match &self.perm {
            None => self.lu.solve_in_place(x),
            Some(p) => {
                for (w, &old) in work.iter_mut().zip(p) {
                    *w = x[old];
                }
                self.lu.solve_in_place(work);
                for (w, &old) in work.iter().zip(p) {
                    x[old] = *w;
                }
            }
        }
    }

    pub fn fill_ratio(&self) -> f64 {
        self.lu.fill_ratio
    }
}

/// `𝓜⁻¹ = (I + γ𝒜₂)⁻¹ (I + γ𝒜₁)⁻¹`.
#[derive(Debug, Clone)]
pub struct FsPreconditioner {
    pub gamma: f64,
    pub ordering: FsOrdering,
    pub factor1: PermutedLu,
    pub factor2: PermutedLu,
}

impl FsPreconditioner {
    pub fn new(op: &ExtendedOperator, gamma: f64, ordering: FsOrdering) -> Result<Self> {
        let (f1, f2) = fs_factor_matrices(op, gamma)?;
        let (p1, p2) = match ordering {
            FsOrdering::Natural => (None, None),
            FsOrdering::FieldBlocks => {
                let (p1, p2) = block_orderings(op);
                (Some(p1), Some(p2))
            }
        };
        Ok(Self {
            gamma,
            ordering,
            factor1: PermutedLu::factor(&f1, p1)?,
            factor2: PermutedLu::factor(&f2, p2)?,
        })
    }

    /// `(fill of I + γ𝒜₁, fill of I + γ𝒜₂)`.
    pub fn fill_ratios(&self) -> (f64, f64) {
        (self.factor1.fill_ratio(), self.factor2.fill_ratio())
    }
}

impl LinearOperator for FsPreconditioner {
    fn dim(&self) -> usize {
        self.factor1.lu.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dim("FS preconditioner input", self.dim(), x.len())?;
        y.copy_from_slice(x);
        let mut work = vec![0.0; x.len()];
        self.factor1.solve_in_place(y, &mut work);
        self.factor2.solve_in_place(y, &mut work);
        Ok(())
    }
}

/// Unrestarted GMRES on `(I + γ𝒜)` right preconditioned by `𝓜`.
pub fn solve_fs(
    op: &ExtendedOperator,
    fs: &FsPreconditioner,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let a = ShiftedExtended { op, gamma: fs.gamma };
    gmres_restarted(&a, Some(fs), b, max_iter.max(1), tol, max_iter)
}
