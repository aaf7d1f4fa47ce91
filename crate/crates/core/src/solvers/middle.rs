//! Solves with `I + γA` by eliminating the magnetic field.
//!
//! With `D1 = I + γM1` (diagonal) the electric unknowns satisfy
//! `S xe = Mε (ce + γ K2ᵀ D1⁻¹ ch)` where
//! `S = Mε + γ Mσ2 + γ² Kᵀ (Mμ + γ Mσ1)⁻¹ K` is symmetric positive definite,
//! and then `xh = D1⁻¹ (ch − γ K1 xe)`.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{check_dim, Error, Result};
use crate::krylov::{cg, LinearOperator};
use crate::sparse::{ic0, sparse_lu, Ic0Factor, LuFactors, SparseMatrix};
use crate::yee::MaxwellBlocks;

/// Largest `n` for which `I + γA` may be LU-factorized in natural order.
pub const MIDDLE_LU_CAP: usize = 50_000;

/// `L Lᵀ` solve as an operator.
#[derive(Debug, Clone)]
pub struct Ic0Operator(pub Ic0Factor);

impl Ic0Operator {
    pub fn new(f: Ic0Factor) -> Self {
        Self(f)
    }
}

impl LinearOperator for Ic0Operator {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dim("IC(0) solve", self.dim(), x.len())?;
        y.copy_from_slice(x);
        self.0.solve_in_place(y);
        Ok(())
    }
}

/// `(L U)⁻¹` as an operator.
#[derive(Debug, Clone)]
pub struct LuOperator(pub LuFactors);

impl LinearOperator for LuOperator {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dim("LU solve", self.dim(), x.len())?;
        y.copy_from_slice(x);
        self.0.solve_in_place(y);
        Ok(())
    }
}

/// `Mε + γ Mσ2 + γ² Kᵀ (Mμ + γ Mσ1)⁻¹ K`, symmetrized as `(S + Sᵀ)/2`.
pub fn bracket_matrix(blocks: &MaxwellBlocks, gamma: f64) -> Result<SparseMatrix> {
    let middle: Vec<f64> = blocks
        .m_mu
        .diag()
        .iter()
        .zip(blocks.m_sigma1.diag())
        .map(|(mu, s)| gamma * gamma / (mu + gamma * s))
        .collect();
    let scaled_k = blocks.k.scale_rows(&middle)?;
    let triple = blocks.kt.matmul(&scaled_k)?;
    let shift: Vec<f64> = blocks
        .m_eps
        .diag()
        .iter()
        .zip(blocks.m_sigma2.diag())
        .map(|(e, s)| e + gamma * s)
        .collect();
    let s = triple.add(&SparseMatrix::from_diagonal(&shift))?;
    s.symmetric_part()
}

/// How `I + γA` is inverted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MiddleMode {
    /// Schur elimination with IC(0)-preconditioned CG on the bracketed matrix.
    SchurCg { tol: f64, max_iter: usize },
    /// Sparse LU of the assembled `I + γA` (small meshes only).
    Lu,
}

impl Default for MiddleMode {
    fn default() -> Self {
        MiddleMode::SchurCg {
            tol: 1e-12,
            max_iter: 10_000,
        }
    }
}

/// Running totals of inner CG work.
#[derive(Debug, Default)]
pub struct InnerStats {
    applications: AtomicUsize,
    total: AtomicUsize,
    max: AtomicUsize,
}

impl InnerStats {
    fn record(&self, iterations: usize) {
        self.applications.fetch_add(1, Ordering::Relaxed);
        self.total.fetch_add(iterations, Ordering::Relaxed);
        self.max.fetch_max(iterations, Ordering::Relaxed);
    }

    /// `(applications, total iterations, max iterations)`.
    pub fn snapshot(&self) -> (usize, usize, usize) {
        (
            self.applications.load(Ordering::Relaxed),
            self.total.load(Ordering::Relaxed),
            self.max.load(Ordering::Relaxed),
        )
    }

    pub fn reset(&self) {
        self.applications.store(0, Ordering::Relaxed);
        self.total.store(0, Ordering::Relaxed);
        self.max.store(0, Ordering::Relaxed);
    }
}

enum Backend {
    Schur {
        s: SparseMatrix,
        precond: Ic0Operator,
        tol: f64,
        max_iter: usize,
    },
    Lu(LuFactors),
}

/// `(I + γA)⁻¹` as an operator.
pub struct MiddleSolver<'a> {
    blocks: &'a MaxwellBlocks,
    gamma: f64,
    d1_inv: Vec<f64>,
    backend: Backend,
    pub stats: InnerStats,
}

impl<'a> MiddleSolver<'a> {
    pub fn new(blocks: &'a MaxwellBlocks, gamma: f64, mode: MiddleMode) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma = {gamma}")));
        }
        let d1_inv = blocks.m1.iter().map(|m| 1.0 / (1.0 + gamma * m)).collect();
        let backend = match mode {
            MiddleMode::SchurCg { tol, max_iter } => {
                let s = bracket_matrix(blocks, gamma)?;
                let precond = Ic0Operator(ic0(&s)?);
                Backend::Schur {
                    s,
                    precond,
                    tol,
                    max_iter,
                }
            }
            MiddleMode::Lu => {
                if blocks.n() > MIDDLE_LU_CAP {
                    return Err(Error::SizeCap {
                        what: "LU of I + γA",
                        size: blocks.n(),
                        cap: MIDDLE_LU_CAP,
                    });
                }
                Backend::Lu(sparse_lu(&blocks.assemble_shifted(gamma))?)
            }
        };
        Ok(Self {
            blocks,
            gamma,
            d1_inv,
            backend,
            stats: InnerStats::default(),
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The bracketed Schur matrix, when in Schur mode.
    pub fn bracket(&self) -> Option<&SparseMatrix> {
        match &self.backend {
            Backend::Schur { s, .. } => Some(s),
            Backend::Lu(_) => None,
        }
    }

    /// Relative diagonal shift IC(0) needed (0 when none).
    pub fn ic0_shift(&self) -> Option<f64> {
        match &self.backend {
            Backend::Schur { precond, .. } => Some(precond.0.shift),
            Backend::Lu(_) => None,
        }
    }

    /// Solves `(I + γA) x = c`; returns the inner CG iteration count (0 for LU).
    pub fn solve_into(&self, c: &[f64], x: &mut [f64]) -> Result<usize> {
        let n1 = self.blocks.n1();
        check_dim("middle solve right-hand side", self.blocks.n(), c.len())?;
        check_dim("middle solve output", self.blocks.n(), x.len())?;
        if self.gamma == 0.0 {
            x.copy_from_slice(c);
            return Ok(0);
        }
        match &self.backend {
            Backend::Lu(f) => {
                x.copy_from_slice(c);
                f.solve_in_place(x);
                Ok(0)
            }
            Backend::Schur {
                s,
                precond,
                tol,
                max_iter,
            } => {
                let (ch, ce) = c.split_at(n1);
                let t: Vec<f64> = ch.iter().zip(&self.d1_inv).map(|(c, d)| c * d).collect();
                let mut r = vec![0.0; self.blocks.n2()];
                self.blocks.k2t.mul_vec_into(&t, &mut r);
                for ((ri, ci), eps) in r.iter_mut().zip(ce).zip(self.blocks.m_eps.diag()) {
                    *ri = eps * (ci + self.gamma * *ri);
                }
                let (xe, rep) = cg(s, Some(precond), &r, *tol, *max_iter)?;
                self.stats.record(rep.iterations);
                if !rep.converged {
                    return Err(Error::InnerNotConverged {
                        iterations: rep.iterations,
                        residual: rep.final_residual,
                    });
                }
                let (xh_out, xe_out) = x.split_at_mut(n1);
                self.blocks.k1.mul_vec_into(&xe, xh_out);
                for ((xh, ch), d) in xh_out.iter_mut().zip(ch).zip(&self.d1_inv) {
                    *xh = d * (ch - self.gamma * *xh);
                }
                xe_out.copy_from_slice(&xe);
                Ok(rep.iterations)
            }
        }
    }

    pub fn solve(&self, c: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; c.len()];
        self.solve_into(c, &mut x)?;
        Ok(x)
    }
}

impl LinearOperator for MiddleSolver<'_> {
    fn dim(&self) -> usize {
        self.blocks.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.solve_into(x, y).map(|_| ())
    }
}
