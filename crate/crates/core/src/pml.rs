//! Perfectly matched layer: conductivity profiles, the auxiliary coupling
//! blocks `B1`, `B2` and the extended operator `𝒜 = [[A, B1ᵀ], [-B2, 0]]`.
//!
//! The raw auxiliary vector has four blocks of `n1` slots. With `Σ` and `Σ*`
//! diagonal,
//!
//! ```text
//! B̂1ᵀ = [ K1   0     -I   0 ]      B̂2 = [  0     Σ_E ]
//!       [ 0   -K2ᵀ    0  -I ]           [ Σ_H    0   ]
//!                                       [ -Σ*_H  0   ]
//!                                       [  0   -Σ*_E ]
//! ```
//!
//! Slots whose `B̂2` row is zero carry no dynamics and are trimmed, leaving
//! `m` auxiliary unknowns. Then `B1ᵀB2 = [[Σ*_H, K1 Σ_E], [-K2ᵀ Σ_H, Σ*_E]]`.
//!
//! `Σ_H` is sampled at magnetic locations and `Σ_E` at electric ones: each
//! diagonal multiplies the field living at that location.

use crate::error::{check_dim, Error, Result};
use crate::sparse::{DiagonalMatrix, SparseMatrix};
use crate::yee::{Component, DofMap, MaterialFields, MaxwellBlocks, YeeGrid};

/// Largest `n + m` for which the extended operator may be assembled explicitly.
pub const ASSEMBLY_CAP: usize = 100_000;

/// Graded conductivity profile `σ(depth) = σ_max (depth/δ)^q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PmlParams {
    /// Polynomial grading order `q`.
    pub order: f64,
    /// Target normal-incidence reflection `R0` used for the default `σ_max`.
    pub reflection: f64,
    /// Factor applied to the reflection-rule `σ_max`.
    pub multiplier: f64,
    /// Explicit per-direction `σ_max`, overriding the reflection rule.
    pub sigma_max: Option<[f64; 3]>,
}

impl Default for PmlParams {
    fn default() -> Self {
        Self {
            order: 2.0,
            reflection: 1e-8,
            multiplier: 10.0,
            sigma_max: None,
        }
    }
}

impl PmlParams {
    /// `σ_max` for a layer of thickness `delta`: `-(q+1) ln(R0) / (2δ)` times the multiplier.
    pub fn reflection_sigma_max(&self, delta: f64) -> f64 {
        self.multiplier * (-(self.order + 1.0) * self.reflection.ln() / (2.0 * delta))
    }
}

/// Per-direction conductivities evaluated at every magnetic and electric slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaProfiles {
    /// `h[d][i]`: `σ_d` at the location of magnetic slot `i` (length `n1`).
    pub h: [Vec<f64>; 3],
    /// `e[d][i]`: `σ_d` at the location of electric slot `i` (length `n2`).
    pub e: [Vec<f64>; 3],
    pub sigma_max: [f64; 3],
    pub order: f64,
}

/// Depth of `x` into the layer of thickness `delta` on either side of
/// `[0, length]`, clamped to `delta`.
fn pml_depth(x: f64, length: f64, delta: f64) -> f64 {
    let depth = (delta - x).max(x - (length - delta)).max(0.0);
    depth.min(delta)
}

pub fn build_sigma_profiles(grid: &YeeGrid, dofs: &DofMap, params: &PmlParams) -> Result<SigmaProfiles> {
    if !(params.order >= 0.0) {
        return Err(Error::InvalidParameter(format!("PML order {}", params.order)));
    }
    let mut sigma_max = [0.0; 3];
    for d in 0..3 {
        let delta = grid.pml_thickness(d);
        sigma_max[d] = match params.sigma_max {
            Some(s) => s[d],
            None if delta > 0.0 => {
                if !(params.reflection > 0.0 && params.reflection < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "PML reflection {} outside (0, 1)",
                        params.reflection
                    )));
                }
                params.reflection_sigma_max(delta)
            }
            None => 0.0,
        };
        if !(sigma_max[d] >= 0.0) || !sigma_max[d].is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma_max {} in direction {d}",
                sigma_max[d]
            )));
        }
    }
    let p = dofs.points_per_component();
    let sample = |components: [Component; 3]| -> [Vec<f64>; 3] {
        std::array::from_fn(|d| {
            let delta = grid.pml_thickness(d);
            let mut out = vec![0.0; 3 * p];
            if delta == 0.0 || sigma_max[d] == 0.0 {
                return out;
            }
            for c in components {
                for l in 0..p {
                    let x = dofs.position(grid, c, l)[d];
                    let depth = pml_depth(x, grid.lengths[d], delta);
                    if depth > 0.0 {
                        out[c.axis() * p + l] = sigma_max[d] * (depth / delta).powf(params.order);
                    }
                }
            }
            out
        })
    };
    Ok(SigmaProfiles {
        h: sample(Component::H),
        e: sample(Component::E),
        sigma_max,
        order: params.order,
    })
}

impl SigmaProfiles {
    /// `Σ`: component block `c` carries `σ_c`.
    fn sigma(per_dir: &[Vec<f64>; 3]) -> Vec<f64> {
        let p = per_dir[0].len() / 3;
        (0..3 * p).map(|i| per_dir[i / p][i]).collect()
    }

    /// `Σ*`: component block `c` carries the product of the two other directions.
    fn sigma_star(per_dir: &[Vec<f64>; 3]) -> Vec<f64> {
        let p = per_dir[0].len() / 3;
        (0..3 * p)
            .map(|i| {
                let c = i / p;
                per_dir[(c + 1) % 3][i] * per_dir[(c + 2) % 3][i]
            })
            .collect()
    }

    pub fn sigma_h(&self) -> Vec<f64> {
        Self::sigma(&self.h)
    }

    pub fn sigma_e(&self) -> Vec<f64> {
        Self::sigma(&self.e)
    }

    pub fn sigma_star_h(&self) -> Vec<f64> {
        Self::sigma_star(&self.h)
    }

    pub fn sigma_star_e(&self) -> Vec<f64> {
        Self::sigma_star(&self.e)
    }

    /// Loss the layer adds to each field component: `σx+σy+σz − σ_c` on
    /// component `c`, i.e. the conductivities of the two transverse directions.
    fn transverse_loss(per_dir: &[Vec<f64>; 3]) -> Vec<f64> {
        let p = per_dir[0].len() / 3;
        (0..3 * p)
            .map(|i| {
                let c = i / p;
                per_dir[(c + 1) % 3][i] + per_dir[(c + 2) % 3][i]
            })
            .collect()
    }

    /// Adds the layer conductivity to `sigma1` / `sigma2` on non-void slots.
    pub fn add_to_materials(&self, dofs: &DofMap, materials: &mut MaterialFields) {
        let lh = Self::transverse_loss(&self.h);
        let le = Self::transverse_loss(&self.e);
        for ((s, add), &void) in materials.sigma1.iter_mut().zip(lh).zip(dofs.h_void()) {
            if !void {
                *s += add;
            }
        }
        for ((s, add), &void) in materials.sigma2.iter_mut().zip(le).zip(dofs.e_void()) {
            if !void {
                *s += add;
            }
        }
    }
}

/// Trimmed PML coupling blocks and their field splittings.
#[derive(Debug, Clone)]
pub struct PmlCoupling {
    pub sigma_h: DiagonalMatrix,
    pub sigma_e: DiagonalMatrix,
    pub sigma_star_h: DiagonalMatrix,
    pub sigma_star_e: DiagonalMatrix,
    /// Sorted raw slot indices (`block·n1 + i`) that survive trimming.
    pub kept: Vec<usize>,
    /// `m × n`.
    pub b1: SparseMatrix,
    /// `m × n`.
    pub b2: SparseMatrix,
    /// `B1ᵀ`, `n × m`.
    pub b1t: SparseMatrix,
    /// Magnetic part: slot blocks 0 and 2.
    pub b1_h: SparseMatrix,
    pub b2_h: SparseMatrix,
    /// Electric part: slot blocks 1 and 3.
    pub b1_e: SparseMatrix,
    pub b2_e: SparseMatrix,
    n1: usize,
}

pub fn assemble_coupling(profiles: &SigmaProfiles, blocks: &MaxwellBlocks) -> Result<PmlCoupling> {
    let n1 = blocks.n1();
    let n2 = blocks.n2();
    check_dim("PML magnetic profile length", n1, profiles.h[0].len())?;
    check_dim("PML electric profile length", n2, profiles.e[0].len())?;
    check_dim("PML needs n1 = n2", n1, n2)?;
    let n = n1 + n2;
    let sigma_h = profiles.sigma_h();
    let sigma_e = profiles.sigma_e();
    let star_h = profiles.sigma_star_h();
    let star_e = profiles.sigma_star_e();

    // B̂2 row value and column for raw slot (block, i).
    let b2_entry = |block: usize, i: usize| -> (f64, usize) {
        match block {
            0 => (sigma_e[i], n1 + i),
            1 => (sigma_h[i], i),
            2 => (-star_h[i], i),
            _ => (-star_e[i], n1 + i),
        }
    };
    let kept: Vec<usize> = (0..4 * n1)
        .filter(|&s| b2_entry(s / n1, s % n1).0 != 0.0)
        .collect();

    let k1t = blocks.k1.transpose();
    let k2 = blocks.k2t.transpose();
    let mut t1 = Vec::new();
    let mut t2 = Vec::with_capacity(kept.len());
    let mut t1_h = Vec::new();
    let mut t2_h = Vec::new();
    let mut t1_e = Vec::new();
    let mut t2_e = Vec::new();
    for (row, &slot) in kept.iter().enumerate() {
        let (block, i) = (slot / n1, slot % n1);
        let magnetic = block % 2 == 0;
        let mut b1_row: Vec<(usize, usize, f64)> = Vec::new();
        match block {
            0 => {
                let (cols, vals) = k1t.row(i);
                b1_row.extend(cols.iter().zip(vals).map(|(&c, &v)| (row, c, v)));
            }
            1 => {
                let (cols, vals) = k2.row(i);
                b1_row.extend(cols.iter().zip(vals).map(|(&c, &v)| (row, n1 + c, -v)));
            }
            2 => b1_row.push((row, i, -1.0)),
            _ => b1_row.push((row, n1 + i, -1.0)),
        }
        let (v, c) = b2_entry(block, i);
        t2.push((row, c, v));
        if magnetic {
            t1_h.extend_from_slice(&b1_row);
            t2_h.push((row, c, v));
        } else {
            t1_e.extend_from_slice(&b1_row);
            t2_e.push((row, c, v));
        }
        t1.extend(b1_row);
    }
    let m = kept.len();
    let b1 = SparseMatrix::from_triplets(m, n, t1)?;
    let b2 = SparseMatrix::from_triplets(m, n, t2)?;
    let b1t = b1.transpose();
    Ok(PmlCoupling {
        sigma_h: DiagonalMatrix::new(sigma_h),
        sigma_e: DiagonalMatrix::new(sigma_e),
        sigma_star_h: DiagonalMatrix::new(star_h),
        sigma_star_e: DiagonalMatrix::new(star_e),
        kept,
        b1,
        b2,
        b1t,
        b1_h: SparseMatrix::from_triplets(m, n, t1_h)?,
        b2_h: SparseMatrix::from_triplets(m, n, t2_h)?,
        b1_e: SparseMatrix::from_triplets(m, n, t1_e)?,
        b2_e: SparseMatrix::from_triplets(m, n, t2_e)?,
        n1,
    })
}

impl PmlCoupling {
    /// Number of auxiliary unknowns.
    pub fn m(&self) -> usize {
        self.kept.len()
    }

    pub fn n(&self) -> usize {
        self.b1.ncols()
    }

    /// Number of raw slots, `4 n1`.
    pub fn raw_slots(&self) -> usize {
        4 * self.n1
    }

    /// Scatters the rows of an `m × k` matrix back to the `4n1` raw slots.
    pub fn untrim_rows(&self, b: &SparseMatrix) -> Result<SparseMatrix> {
        check_dim("untrim row count", self.m(), b.nrows())?;
        let triplets = b.iter().map(|(r, c, v)| (self.kept[r], c, v)).collect();
        SparseMatrix::from_triplets(self.raw_slots(), b.ncols(), triplets)
    }

    /// Gathers the kept rows of a `4n1 × k` matrix.
    pub fn trim_rows(&self, raw: &SparseMatrix) -> Result<SparseMatrix> {
        check_dim("trim row count", self.raw_slots(), raw.nrows())?;
        raw.select_rows(&self.kept)
    }

    /// `[[Σ*_H, K1 Σ_E], [-K2ᵀ Σ_H, Σ*_E]]`, assembled from the blocks.
    pub fn product_formula(&self, blocks: &MaxwellBlocks) -> Result<SparseMatrix> {
        let star_h = SparseMatrix::from_diagonal(self.sigma_star_h.diag()).pruned(0.0);
        let star_e = SparseMatrix::from_diagonal(self.sigma_star_e.diag()).pruned(0.0);
        let k1s = blocks.k1.scale_cols(self.sigma_e.diag())?.pruned(0.0);
        let k2s = blocks.k2t.scale_cols(self.sigma_h.diag())?.scale(-1.0).pruned(0.0);
        SparseMatrix::from_blocks(&[
            vec![Some(&star_h), Some(&k1s)],
            vec![Some(&k2s), Some(&star_e)],
        ])
    }

    /// `B1ᵀ B2` by sparse multiplication.
    pub fn product(&self) -> Result<SparseMatrix> {
        self.b1t.matmul(&self.b2)
    }
}

/// 1-norms of the symmetric and skew-symmetric parts of `γ² B1ᵀB2`.
pub fn skew_symmetric_diagnostics(coupling: &PmlCoupling, gamma: f64) -> Result<(f64, f64)> {
    let p = coupling.product()?.scale(gamma * gamma);
    Ok((p.symmetric_part()?.one_norm(), p.skew_part()?.one_norm()))
}

/// `𝒜 = [[A, B1ᵀ], [-B2, 0]]` of size `N = n + m`.
#[derive(Debug, Clone)]
pub struct ExtendedOperator {
    pub blocks: MaxwellBlocks,
    pub coupling: PmlCoupling,
}

impl ExtendedOperator {
    pub fn new(blocks: MaxwellBlocks, coupling: PmlCoupling) -> Result<Self> {
        check_dim("coupling column count", blocks.n(), coupling.n())?;
        Ok(Self { blocks, coupling })
    }

    pub fn n(&self) -> usize {
        self.blocks.n()
    }

    pub fn m(&self) -> usize {
        self.coupling.m()
    }

    pub fn dim(&self) -> usize {
        self.n() + self.m()
    }

    /// `out = 𝒜 y` from block products.
    pub fn apply(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        check_dim("extended operator input", self.dim(), y.len())?;
        check_dim("extended operator output", self.dim(), out.len())?;
        let n = self.n();
        let (yf, ya) = y.split_at(n);
        let (of, oa) = out.split_at_mut(n);
        self.blocks.apply_a(yf, of);
        self.coupling.b1t.mul_vec_add(1.0, ya, of);
        self.coupling.b2.mul_vec_into(yf, oa);
        oa.iter_mut().for_each(|v| *v = -*v);
        Ok(())
    }

    pub fn matvec(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.apply(y, &mut out)?;
        Ok(out)
    }

    /// `𝒜` as one matrix; refused above [`ASSEMBLY_CAP`] unknowns.
    pub fn assemble(&self) -> Result<SparseMatrix> {
        if self.dim() > ASSEMBLY_CAP {
            return Err(Error::SizeCap {
                what: "assembled extended operator",
                size: self.dim(),
                cap: ASSEMBLY_CAP,
            });
        }
        let a = self.blocks.assemble_a();
        let neg_b2 = self.coupling.b2.scale(-1.0);
        SparseMatrix::from_blocks(&[
            vec![Some(&a), Some(&self.coupling.b1t)],
            vec![Some(&neg_b2), None],
        ])
    }

    /// `I + γ𝒜` as one matrix.
    pub fn assemble_shifted(&self, gamma: f64) -> Result<SparseMatrix> {
        SparseMatrix::identity(self.dim()).add_scaled(1.0, &self.assemble()?, gamma)
    }
}
