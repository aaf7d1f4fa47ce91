//! Staggered Yee grid, degree-of-freedom layout, material sampling and the
//! discrete curl.
//!
//! Every field component is stored on the full `(nx+1)(ny+1)(nz+1)` lattice.
//! A component that is staggered by half a cell in some direction has no
//! physical location at the last lattice index in that direction; those
//! slots, and the tangential electric field on the two z-walls (perfect
//! conductor), are *void*: their rows and columns of `K` are empty.
//!
//! Field vector layout: `[Hx, Hy, Hz, Ex, Ey, Ez]`, each component
//! lexicographic in `(i, j, k)` with `i` fastest.

use crate::error::{Error, Result};
use crate::sparse::{DiagonalMatrix, SparseMatrix};

/// Field component, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    Hx,
    Hy,
    Hz,
    Ex,
    Ey,
    Ez,
}

impl Component {
    pub const ALL: [Component; 6] = [
        Component::Hx,
        Component::Hy,
        Component::Hz,
        Component::Ex,
        Component::Ey,
        Component::Ez,
    ];
    pub const H: [Component; 3] = [Component::Hx, Component::Hy, Component::Hz];
    pub const E: [Component; 3] = [Component::Ex, Component::Ey, Component::Ez];

    /// Position in the six-component layout.
    pub fn slot(self) -> usize {
        self as usize
    }

    /// Spatial direction the component points along (0 = x, 1 = y, 2 = z).
    pub fn axis(self) -> usize {
        self as usize % 3
    }

    pub fn is_magnetic(self) -> bool {
        (self as usize) < 3
    }

    /// Offset of the staggered location from the lattice node, in cells.
    ///
    /// `E` lives on cell edges (shifted along its own axis), `H` on cell faces
    /// (shifted along the two other axes).
    pub fn offset(self) -> [f64; 3] {
        let axis = self.axis();
        let mut off = [0.0; 3];
        for (d, o) in off.iter_mut().enumerate() {
            let shifted = if self.is_magnetic() { d != axis } else { d == axis };
            if shifted {
                *o = 0.5;
            }
        }
        off
    }
}

/// Uniform Cartesian Yee grid on `[0,Lx]×[0,Ly]×[0,Lz]` with a PML of
/// `pml_cells[d]` cells on both sides of direction `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct YeeGrid {
    pub cells: [usize; 3],
    pub lengths: [f64; 3],
    pub spacing: [f64; 3],
    pub pml_cells: [usize; 3],
}

/// Builds a grid; the PML thickness in each direction must be a whole number of cells.
pub fn build_grid(cells: [usize; 3], lengths: [f64; 3], pml_thickness: [f64; 3]) -> Result<YeeGrid> {
    let mut spacing = [0.0; 3];
    let mut pml_cells = [0usize; 3];
    for d in 0..3 {
        if cells[d] == 0 {
            return Err(Error::InvalidGrid(format!("direction {d} has no cells")));
        }
        if !(lengths[d] > 0.0) || !lengths[d].is_finite() {
            return Err(Error::InvalidGrid(format!(
                "direction {d} has non-positive length {}",
                lengths[d]
            )));
        }
        if pml_thickness[d] < 0.0 || !pml_thickness[d].is_finite() {
            return Err(Error::InvalidGrid(format!(
                "negative PML thickness in direction {d}"
            )));
        }
        spacing[d] = lengths[d] / cells[d] as f64;
        let ratio = pml_thickness[d] / spacing[d];
        let rounded = ratio.round();
        if (ratio - rounded).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "PML thickness {} in direction {d} is {ratio} cells, not a whole number",
                pml_thickness[d]
            )));
        }
        pml_cells[d] = rounded as usize;
        if 2 * pml_cells[d] > cells[d] {
            return Err(Error::InvalidGrid(format!(
                "PML layers ({} cells per side) do not fit in {} cells",
                pml_cells[d], cells[d]
            )));
        }
    }
    Ok(YeeGrid {
        cells,
        lengths,
        spacing,
        pml_cells,
    })
}

impl YeeGrid {
    pub fn points_per_component(&self) -> usize {
        self.cells.iter().map(|c| c + 1).product()
    }

    pub fn pml_thickness(&self, d: usize) -> f64 {
        self.pml_cells[d] as f64 * self.spacing[d]
    }
}

/// `(n, n1, n2)`: total field unknowns and the magnetic / electric halves.
pub fn dof_counts(grid: &YeeGrid) -> (usize, usize, usize) {
    let p = grid.points_per_component();
    (6 * p, 3 * p, 3 * p)
}

/// Indexing and void flags for the augmented field vector.
#[derive(Debug, Clone)]
pub struct DofMap {
    dims: [usize; 3],
    points: usize,
    void_mask: Vec<bool>,
}

impl DofMap {
    pub fn new(grid: &YeeGrid) -> Self {
        let dims = [grid.cells[0] + 1, grid.cells[1] + 1, grid.cells[2] + 1];
        let points = dims.iter().product();
        let nz = grid.cells[2];
        let mut void_mask = vec![false; 6 * points];
        for c in Component::ALL {
            let off = c.offset();
            for k in 0..dims[2] {
                for j in 0..dims[1] {
                    for i in 0..dims[0] {
                        let ijk = [i, j, k];
                        let mut void = (0..3).any(|d| off[d] != 0.0 && ijk[d] == grid.cells[d]);
                        // Tangential E on the perfectly conducting z-walls.
                        if matches!(c, Component::Ex | Component::Ey) && (k == 0 || k == nz) {
                            void = true;
                        }
                        let idx = c.slot() * points + i + dims[0] * (j + dims[1] * k);
                        void_mask[idx] = void;
                    }
                }
            }
        }
        Self {
            dims,
            points,
            void_mask,
        }
    }

    /// Lattice points per component, `p`.
    pub fn points_per_component(&self) -> usize {
        self.points
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn n(&self) -> usize {
        6 * self.points
    }

    pub fn n1(&self) -> usize {
        3 * self.points
    }

    pub fn n2(&self) -> usize {
        3 * self.points
    }

    #[inline]
    pub fn lattice(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    /// Inverse of [`lattice`](Self::lattice).
    #[inline]
    pub fn ijk(&self, lattice: usize) -> [usize; 3] {
        let i = lattice % self.dims[0];
        let jk = lattice / self.dims[0];
        [i, jk % self.dims[1], jk / self.dims[1]]
    }

    /// Index in the full field vector `[h; e]`.
    #[inline]
    pub fn index(&self, c: Component, i: usize, j: usize, k: usize) -> usize {
        c.slot() * self.points + self.lattice(i, j, k)
    }

    /// Index within the magnetic or electric half (`0..n1` or `0..n2`).
    #[inline]
    pub fn local_index(&self, c: Component, i: usize, j: usize, k: usize) -> usize {
        c.axis() * self.points + self.lattice(i, j, k)
    }

    /// Flags for the full field vector.
    pub fn void_mask(&self) -> &[bool] {
        &self.void_mask
    }

    /// Void flags of the magnetic half.
    pub fn h_void(&self) -> &[bool] {
        &self.void_mask[..3 * self.points]
    }

    /// Void flags of the electric half.
    pub fn e_void(&self) -> &[bool] {
        &self.void_mask[3 * self.points..]
    }

    #[inline]
    pub fn is_void(&self, c: Component, i: usize, j: usize, k: usize) -> bool {
        self.void_mask[self.index(c, i, j, k)]
    }

    /// Physical location of a component's lattice slot (void slots included).
    pub fn position(&self, grid: &YeeGrid, c: Component, lattice: usize) -> [f64; 3] {
        let ijk = self.ijk(lattice);
        let off = c.offset();
        [
            (ijk[0] as f64 + off[0]) * grid.spacing[0],
            (ijk[1] as f64 + off[1]) * grid.spacing[1],
            (ijk[2] as f64 + off[2]) * grid.spacing[2],
        ]
    }
}

/// Dielectric sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Sphere {
    pub center: [f64; 3],
    pub radius: f64,
}

/// Spheres of permittivity `eps_inside` embedded in a background medium.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonicCrystalScene {
    pub spheres: Vec<Sphere>,
    pub eps_inside: f64,
    pub eps_background: f64,
    pub mu: f64,
}

impl PhotonicCrystalScene {
    /// 3×3×3 lattice of spheres of radius 0.4 centered at
    /// `(2.5+i, 2.5+j, 1.5+k)`, `i,j,k ∈ {-1,0,1}`, permittivity 8.9 in vacuum.
    pub fn reference() -> Self {
        Self::lattice([2.5, 2.5, 1.5], 1.0, 1, 0.4, 8.9)
    }

    /// Cubic lattice of `(2·half_width+1)³` spheres around `center`.
    pub fn lattice(center: [f64; 3], pitch: f64, half_width: i32, radius: f64, eps_inside: f64) -> Self {
        let mut spheres = Vec::new();
        for i in -half_width..=half_width {
            for j in -half_width..=half_width {
                for k in -half_width..=half_width {
                    spheres.push(Sphere {
                        center: [
                            center[0] + pitch * i as f64,
                            center[1] + pitch * j as f64,
                            center[2] + pitch * k as f64,
                        ],
                        radius,
                    });
                }
            }
        }
        Self {
            spheres,
            eps_inside,
            eps_background: 1.0,
            mu: 1.0,
        }
    }

    pub fn empty() -> Self {
        Self {
            spheres: Vec::new(),
            eps_inside: 1.0,
            eps_background: 1.0,
            mu: 1.0,
        }
    }

    /// Permittivity at a point: `eps_inside` strictly inside any sphere.
    pub fn eps_at(&self, x: [f64; 3]) -> f64 {
        let inside = self.spheres.iter().any(|s| {
            let d2: f64 = (0..3).map(|d| (x[d] - s.center[d]).powi(2)).sum();
            d2 < s.radius * s.radius
        });
        if inside {
            self.eps_inside
        } else {
            self.eps_background
        }
    }
}

/// Pointwise material coefficients: `mu`, `sigma1` on the magnetic half and
/// `eps`, `sigma2` on the electric half.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialFields {
    pub mu: Vec<f64>,
    pub sigma1: Vec<f64>,
    pub eps: Vec<f64>,
    pub sigma2: Vec<f64>,
}

/// Samples the scene at every non-void staggered location. Void slots get
/// `mu = eps = 1`, `sigma = 0`. Conductivities start at zero.
pub fn sample_materials(grid: &YeeGrid, dofs: &DofMap, scene: &PhotonicCrystalScene) -> MaterialFields {
    let p = dofs.points_per_component();
    let mut mu = vec![1.0; 3 * p];
    let mut eps = vec![1.0; 3 * p];
    for c in Component::ALL {
        for l in 0..p {
            let local = c.axis() * p + l;
            if dofs.void_mask()[c.slot() * p + l] {
                continue;
            }
            if c.is_magnetic() {
                mu[local] = scene.mu;
            } else {
                eps[local] = scene.eps_at(dofs.position(grid, c, l));
            }
        }
    }
    MaterialFields {
        mu,
        sigma1: vec![0.0; 3 * p],
        eps,
        sigma2: vec![0.0; 3 * p],
    }
}

/// Discrete curl `K` (`n1 × n2`): maps electric unknowns to the curl at the
/// magnetic locations, entries `±1/h`. The magnetic equation reads
/// `M_mu h' = -M_sigma1 h - K e`.
pub fn assemble_curl(grid: &YeeGrid, dofs: &DofMap) -> SparseMatrix {
    let [nx, ny, nz] = grid.cells;
    let [hx, hy, hz] = grid.spacing;
    let n1 = dofs.n1();
    let mut triplets = Vec::with_capacity(4 * n1);
    let mut push = |row: usize, c: Component, i: usize, j: usize, k: usize, v: f64| {
        if !dofs.is_void(c, i, j, k) {
            triplets.push((row, dofs.local_index(c, i, j, k), v));
        }
    };
    use Component::*;
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                // Hx at (i, j+½, k+½): ∂y Ez − ∂z Ey
                if !dofs.is_void(Hx, i, j, k) {
                    let row = dofs.local_index(Hx, i, j, k);
                    push(row, Ez, i, j + 1, k, 1.0 / hy);
                    push(row, Ez, i, j, k, -1.0 / hy);
                    push(row, Ey, i, j, k + 1, -1.0 / hz);
                    push(row, Ey, i, j, k, 1.0 / hz);
                }
                // Hy at (i+½, j, k+½): ∂z Ex − ∂x Ez
                if !dofs.is_void(Hy, i, j, k) {
                    let row = dofs.local_index(Hy, i, j, k);
                    push(row, Ex, i, j, k + 1, 1.0 / hz);
                    push(row, Ex, i, j, k, -1.0 / hz);
                    push(row, Ez, i + 1, j, k, -1.0 / hx);
                    push(row, Ez, i, j, k, 1.0 / hx);
                }
                // Hz at (i+½, j+½, k): ∂x Ey − ∂y Ex
                if !dofs.is_void(Hz, i, j, k) {
                    let row = dofs.local_index(Hz, i, j, k);
                    push(row, Ey, i + 1, j, k, 1.0 / hx);
                    push(row, Ey, i, j, k, -1.0 / hx);
                    push(row, Ex, i, j + 1, k, -1.0 / hy);
                    push(row, Ex, i, j, k, 1.0 / hy);
                }
            }
        }
    }
    SparseMatrix::from_triplets(n1, dofs.n2(), triplets).expect("curl stencil stays in range")
}

/// Material matrices, the curl, and the scaled blocks of
/// `A = [[M1, K1], [-K2ᵀ, M2]]`.
#[derive(Debug, Clone)]
pub struct MaxwellBlocks {
    pub k: SparseMatrix,
    pub kt: SparseMatrix,
    pub m_mu: DiagonalMatrix,
    pub m_sigma1: DiagonalMatrix,
    pub m_eps: DiagonalMatrix,
    pub m_sigma2: DiagonalMatrix,
    /// `M_mu⁻¹ M_sigma1` (diagonal).
    pub m1: Vec<f64>,
    /// `M_mu⁻¹ K`.
    pub k1: SparseMatrix,
    /// `M_eps⁻¹ M_sigma2` (diagonal).
    pub m2: Vec<f64>,
    /// `M_eps⁻¹ Kᵀ`.
    pub k2t: SparseMatrix,
}

pub fn assemble_blocks(grid: &YeeGrid, dofs: &DofMap, materials: &MaterialFields) -> Result<MaxwellBlocks> {
    let (_, n1, n2) = dof_counts(grid);
    for (name, v, len) in [
        ("mu", &materials.mu, n1),
        ("sigma1", &materials.sigma1, n1),
        ("eps", &materials.eps, n2),
        ("sigma2", &materials.sigma2, n2),
    ] {
        if v.len() != len {
            return Err(Error::Dimension {
                context: name,
                expected: len,
                actual: v.len(),
            });
        }
    }
    for (i, (&mu, &s)) in materials.mu.iter().zip(&materials.sigma1).enumerate() {
        if !(mu > 0.0) {
            return Err(Error::InvalidMaterial(format!("mu = {mu} at magnetic dof {i}")));
        }
        if s < 0.0 {
            return Err(Error::InvalidMaterial(format!("sigma1 = {s} at magnetic dof {i}")));
        }
    }
    for (i, (&eps, &s)) in materials.eps.iter().zip(&materials.sigma2).enumerate() {
        if !(eps > 0.0) {
            return Err(Error::InvalidMaterial(format!("eps = {eps} at electric dof {i}")));
        }
        if s < 0.0 {
            return Err(Error::InvalidMaterial(format!("sigma2 = {s} at electric dof {i}")));
        }
    }
    let k = assemble_curl(grid, dofs);
    let kt = k.transpose();
    let inv_mu: Vec<f64> = materials.mu.iter().map(|v| 1.0 / v).collect();
    let inv_eps: Vec<f64> = materials.eps.iter().map(|v| 1.0 / v).collect();
    let m1 = materials.sigma1.iter().zip(&materials.mu).map(|(s, m)| s / m).collect();
    let m2 = materials.sigma2.iter().zip(&materials.eps).map(|(s, e)| s / e).collect();
    let k1 = k.scale_rows(&inv_mu)?;
    let k2t = kt.scale_rows(&inv_eps)?;
    Ok(MaxwellBlocks {
        k,
        kt,
        m_mu: DiagonalMatrix::new(materials.mu.clone()),
        m_sigma1: DiagonalMatrix::new(materials.sigma1.clone()),
        m_eps: DiagonalMatrix::new(materials.eps.clone()),
        m_sigma2: DiagonalMatrix::new(materials.sigma2.clone()),
        m1,
        k1,
        m2,
        k2t,
    })
}

impl MaxwellBlocks {
    pub fn n1(&self) -> usize {
        self.k.nrows()
    }

    pub fn n2(&self) -> usize {
        self.k.ncols()
    }

    pub fn n(&self) -> usize {
        self.n1() + self.n2()
    }

    /// `y = A x` by blocks.
    pub fn apply_a(&self, x: &[f64], y: &mut [f64]) {
        let n1 = self.n1();
        assert_eq!(x.len(), self.n(), "A input length");
        assert_eq!(y.len(), self.n(), "A output length");
        let (xh, xe) = x.split_at(n1);
        let (yh, ye) = y.split_at_mut(n1);
        self.k1.mul_vec_into(xe, yh);
        for ((y, m), x) in yh.iter_mut().zip(&self.m1).zip(xh) {
            *y += m * x;
        }
        self.k2t.mul_vec_into(xh, ye);
        for ((y, m), x) in ye.iter_mut().zip(&self.m2).zip(xe) {
            *y = m * x - *y;
        }
    }

    /// `A` as one `n × n` matrix.
    pub fn assemble_a(&self) -> SparseMatrix {
        let m1 = SparseMatrix::from_diagonal(&self.m1).pruned(0.0);
        let m2 = SparseMatrix::from_diagonal(&self.m2).pruned(0.0);
        let neg_k2t = self.k2t.scale(-1.0);
        SparseMatrix::from_blocks(&[
            vec![Some(&m1), Some(&self.k1)],
            vec![Some(&neg_k2t), Some(&m2)],
        ])
        .expect("block sizes agree")
    }

    /// `I + γ A` as one matrix.
    pub fn assemble_shifted(&self, gamma: f64) -> SparseMatrix {
        let a = self.assemble_a();
        SparseMatrix::identity(self.n())
            .add_scaled(1.0, &a, gamma)
            .expect("square")
    }
}
