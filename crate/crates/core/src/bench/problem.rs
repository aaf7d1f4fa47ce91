//! Assembly of the photonic-crystal test problem on a given mesh.

use crate::error::Result;
use crate::pml::{assemble_coupling, build_sigma_profiles, ExtendedOperator, PmlParams, SigmaProfiles};
use crate::yee::{assemble_blocks, build_grid, sample_materials, DofMap, PhotonicCrystalScene, YeeGrid};

/// Geometry, scene and layer parameters of one problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub cells: [usize; 3],
    pub lengths: [f64; 3],
    /// Layer thickness per direction; snapped to whole cells by [`ProblemSpec::snapped`].
    pub pml_thickness: [f64; 3],
    pub scene: PhotonicCrystalScene,
    pub pml: PmlParams,
}

impl ProblemSpec {
    /// `[0,5]×[0,5]×[0,3]` with a unit-thickness layer on the x- and y-walls
    /// and perfectly conducting z-walls.
    pub fn reference(cells: [usize; 3]) -> Self {
        Self {
            cells,
            lengths: [5.0, 5.0, 3.0],
            pml_thickness: [1.0, 1.0, 0.0],
            scene: PhotonicCrystalScene::reference(),
            pml: PmlParams::default(),
        }
    }

    /// Nearest whole number of cells per layer, at least one where a layer
    /// is requested. Coarse meshes whose spacing does not divide the
    /// thickness get the closest representable layer.
    pub fn snapped(&self) -> [f64; 3] {
        std::array::from_fn(|d| {
            let t = self.pml_thickness[d];
            if t <= 0.0 {
                return 0.0;
            }
            let h = self.lengths[d] / self.cells[d] as f64;
            let cells = (t / h).round().max(1.0);
            cells * h
        })
    }
}

/// An assembled problem: grid, layout, layer profiles and `𝒜`.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub grid: YeeGrid,
    pub dofs: DofMap,
    pub profiles: SigmaProfiles,
    pub op: ExtendedOperator,
}

pub fn build_problem(spec: &ProblemSpec) -> Result<Problem> {
    let grid = build_grid(spec.cells, spec.lengths, spec.snapped())?;
    let dofs = DofMap::new(&grid);
    let profiles = build_sigma_profiles(&grid, &dofs, &spec.pml)?;
    let mut materials = sample_materials(&grid, &dofs, &spec.scene);
    profiles.add_to_materials(&dofs, &mut materials);
    let blocks = assemble_blocks(&grid, &dofs, &materials)?;
    let coupling = assemble_coupling(&profiles, &blocks)?;
    let op = ExtendedOperator::new(blocks, coupling)?;
    Ok(Problem {
        spec: spec.clone(),
        grid,
        dofs,
        profiles,
        op,
    })
}

impl Problem {
    pub fn n(&self) -> usize {
        self.op.n()
    }

    pub fn m(&self) -> usize {
        self.op.m()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}
