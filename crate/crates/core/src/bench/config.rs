//! Plain-text benchmark configuration.
//!
//! One `key = value` pair per line, keys namespaced by a dotted section
//! prefix (`outer.tol = 1e-10`). `#` starts a comment. Meshes are written
//! `NXxNYxNZ` and lists are comma separated. Unknown keys are errors so a
//! typo never silently falls back to a default.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pml::PmlParams;
use crate::solvers::{FsOrdering, OuterConfig};
use crate::yee::PhotonicCrystalScene;

use super::problem::ProblemSpec;

/// Natural-order LU of `I + γA` fills heavily; past this size the tight
/// inner CG is both faster and as accurate.
pub const AUTO_LU_LIMIT: usize = 10_000;

/// How the exact `(I + γA)⁻¹` of the `table2` runs is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactMiddle {
    /// Sparse LU up to [`AUTO_LU_LIMIT`] field unknowns, tight CG above.
    Auto,
    Lu,
    Cg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// Mesh family for Tables 1, 3 and 4.
    pub meshes: Vec<[usize; 3]>,
    /// Mesh family for the `table2` runs.
    pub table2_meshes: Vec<[usize; 3]>,
    pub lengths: [f64; 3],
    pub pml_thickness: [f64; 3],
    pub gamma: f64,

    pub scene_center: [f64; 3],
    pub scene_pitch: f64,
    pub scene_half_width: i32,
    pub scene_radius: f64,
    pub scene_eps_inside: f64,
    pub scene_eps_background: f64,

    pub pml: PmlParams,

    pub outer: OuterConfig,
    /// Inner ICCG(0) tolerance of the nested solver.
    pub inner_tol: f64,
    pub inner_max_iter: usize,

    pub table2_tol: f64,
    pub table2_max_iter: usize,
    pub table2_middle: ExactMiddle,
    /// Inner tolerance when the exact middle solve runs through CG.
    pub exact_inner_tol: f64,

    /// One tolerance per entry of `meshes`; the last one repeats.
    pub table4_tols: Vec<f64>,
    pub fs_max_iter: usize,
    pub fs_ordering: FsOrdering,

    pub ritz_mesh: [usize; 3],
    pub ritz_steps: usize,

    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let reference = ProblemSpec::reference([1, 1, 1]);
        Self {
            meshes: vec![[10, 10, 6], [20, 20, 12], [40, 40, 24]],
            table2_meshes: vec![[20, 20, 12], [40, 40, 24], [60, 60, 36]],
            lengths: reference.lengths,
            pml_thickness: reference.pml_thickness,
            gamma: 0.012,
            scene_center: [2.5, 2.5, 1.5],
            scene_pitch: 1.0,
            scene_half_width: 1,
            scene_radius: 0.4,
            scene_eps_inside: 8.9,
            scene_eps_background: 1.0,
            pml: PmlParams::default(),
            outer: OuterConfig::default(),
            inner_tol: 1e-10,
            inner_max_iter: 10_000,
            table2_tol: 1e-6,
            table2_max_iter: 1000,
            table2_middle: ExactMiddle::Auto,
            exact_inner_tol: 1e-12,
            table4_tols: vec![9.64e-11, 8.09e-9, 4.23e-9],
            fs_max_iter: 500,
            fs_ordering: FsOrdering::FieldBlocks,
            ritz_mesh: [20, 20, 12],
            ritz_steps: 24,
            seed: 2024,
            output_dir: PathBuf::from("results"),
        }
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::Config(format!("cannot parse `{value}` for `{key}`"))
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| bad(key, value))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(|v| scalar(key, v)).collect()
}

fn triple<T: FromStr + Copy>(key: &str, value: &str) -> Result<[T; 3]> {
    let v: Vec<T> = list(key, value)?;
    v.try_into().map_err(|_| bad(key, value))
}

/// `NXxNYxNZ` or `NX,NY,NZ`.
pub fn parse_mesh(value: &str) -> Result<[usize; 3]> {
    let parts: Vec<&str> = if value.contains(['x', 'X']) {
        value.split(['x', 'X']).collect()
    } else {
        value.split(',').collect()
    };
    let cells: Vec<usize> = parts
        .iter()
        .map(|p| scalar("mesh", p))
        .collect::<Result<_>>()?;
    let cells: [usize; 3] = cells.try_into().map_err(|_| bad("mesh", value))?;
    if cells.contains(&0) {
        return Err(Error::Config(format!("mesh `{value}` has an empty direction")));
    }
    Ok(cells)
}

fn mesh_list(value: &str) -> Result<Vec<[usize; 3]>> {
    value.split(',').map(|m| parse_mesh(m.trim())).collect()
}

fn bool_flag(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, value)),
    }
}

impl BenchConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            c.set(key.trim(), value.trim())?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "meshes" => self.meshes = mesh_list(value)?,
            "gamma" => self.gamma = scalar(key, value)?,
            "seed" => self.seed = scalar(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),

            "domain.lengths" => self.lengths = triple(key, value)?,
            "domain.pml_thickness" => self.pml_thickness = triple(key, value)?,

            "scene.center" => self.scene_center = triple(key, value)?,
            "scene.pitch" => self.scene_pitch = scalar(key, value)?,
            "scene.half_width" => self.scene_half_width = scalar(key, value)?,
            "scene.radius" => self.scene_radius = scalar(key, value)?,
            "scene.eps_inside" => self.scene_eps_inside = scalar(key, value)?,
            "scene.eps_background" => self.scene_eps_background = scalar(key, value)?,

            "pml.order" => self.pml.order = scalar(key, value)?,
            "pml.reflection" => self.pml.reflection = scalar(key, value)?,
            "pml.multiplier" => self.pml.multiplier = scalar(key, value)?,
            "pml.sigma_max" => self.pml.sigma_max = Some(triple(key, value)?),

            "outer.restart" => self.outer.restart = scalar(key, value)?,
            "outer.tol" => self.outer.tol = scalar(key, value)?,
            "outer.max_iter" => self.outer.max_iter = scalar(key, value)?,
            "inner.tol" => self.inner_tol = scalar(key, value)?,
            "inner.max_iter" => self.inner_max_iter = scalar(key, value)?,

            "table2.meshes" => self.table2_meshes = mesh_list(value)?,
            "table2.tol" => self.table2_tol = scalar(key, value)?,
            "table2.max_iter" => self.table2_max_iter = scalar(key, value)?,
            "table2.exact_inner_tol" => self.exact_inner_tol = scalar(key, value)?,
            "table2.middle" => {
                self.table2_middle = match value {
                    "auto" => ExactMiddle::Auto,
                    "lu" => ExactMiddle::Lu,
                    "cg" => ExactMiddle::Cg,
                    _ => return Err(bad(key, value)),
                }
            }

            "table4.tols" => self.table4_tols = list(key, value)?,
            "fs.max_iter" => self.fs_max_iter = scalar(key, value)?,
            "fs.ordering" => {
                self.fs_ordering = match value {
                    "natural" => FsOrdering::Natural,
                    "blocks" => FsOrdering::FieldBlocks,
                    _ => return Err(bad(key, value)),
                }
            }
            "fs.natural_order" => {
                self.fs_ordering = if bool_flag(key, value)? {
                    FsOrdering::Natural
                } else {
                    FsOrdering::FieldBlocks
                }
            }

            "ritz.mesh" => self.ritz_mesh = parse_mesh(value)?,
            "ritz.steps" => self.ritz_steps = scalar(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.meshes.is_empty() || self.table2_meshes.is_empty() {
            return fail("mesh lists must not be empty".into());
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return fail(format!("gamma = {} must be a finite nonnegative number", self.gamma));
        }
        if self.outer.restart == 0 {
            return fail("outer.restart must be positive".into());
        }
        for (name, tol) in [
            ("outer.tol", self.outer.tol),
            ("inner.tol", self.inner_tol),
            ("table2.tol", self.table2_tol),
            ("table2.exact_inner_tol", self.exact_inner_tol),
        ] {
            if !(tol > 0.0 && tol < 1.0) {
                return fail(format!("{name} = {tol} must lie in (0, 1)"));
            }
        }
        if self.table4_tols.is_empty() || self.table4_tols.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
            return fail("table4.tols must be a nonempty list of values in (0, 1)".into());
        }
        if self.ritz_steps == 0 || self.ritz_steps > crate::krylov::MAX_ARNOLDI_STEPS {
            return fail(format!(
                "ritz.steps = {} must lie in 1..={}",
                self.ritz_steps,
                crate::krylov::MAX_ARNOLDI_STEPS
            ));
        }
        if self.scene_radius < 0.0 || self.scene_eps_inside <= 0.0 || self.scene_eps_background <= 0.0 {
            return fail("scene radius must be nonnegative and permittivities positive".into());
        }
        Ok(())
    }

    pub fn scene(&self) -> PhotonicCrystalScene {
        let mut s = PhotonicCrystalScene::lattice(
            self.scene_center,
            self.scene_pitch,
            self.scene_half_width,
            self.scene_radius,
            self.scene_eps_inside,
        );
        s.eps_background = self.scene_eps_background;
        s
    }

    pub fn problem_spec(&self, cells: [usize; 3]) -> ProblemSpec {
        ProblemSpec {
            cells,
            lengths: self.lengths,
            pml_thickness: self.pml_thickness,
            scene: self.scene(),
            pml: self.pml.clone(),
        }
    }

    /// Tolerance for the `index`-th `table4` mesh.
    pub fn table4_tol(&self, index: usize) -> f64 {
        let t = &self.table4_tols;
        t[index.min(t.len() - 1)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_build_the_reference_scene() {
        let c = BenchConfig::default();
        assert_eq!(c.scene(), PhotonicCrystalScene::reference());
        assert_eq!(c.problem_spec([20, 20, 12]), ProblemSpec::reference([20, 20, 12]));
        assert_eq!(c.gamma, 0.012);
        c.validate().unwrap();
    }

    #[test]
    fn parses_sections_comments_and_lists() {
        let text = "\
# desk run
meshes = 4x4x4, 6x6x4
gamma = 0.02   # larger step
outer.tol = 1e-8
pml.sigma_max = 10, 20, 0
table4.tols = 1e-9,1e-8
fs.ordering = natural
ritz.mesh = 8,8,6
";
        let c = BenchConfig::parse(text).unwrap();
        assert_eq!(c.meshes, vec![[4, 4, 4], [6, 6, 4]]);
        assert_eq!(c.gamma, 0.02);
        assert_eq!(c.outer.tol, 1e-8);
        assert_eq!(c.pml.sigma_max, Some([10.0, 20.0, 0.0]));
        assert_eq!(c.table4_tol(0), 1e-9);
        assert_eq!(c.table4_tol(5), 1e-8);
        assert_eq!(c.fs_ordering, FsOrdering::Natural);
        assert_eq!(c.ritz_mesh, [8, 8, 6]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(BenchConfig::parse("nonsense").is_err());
        assert!(BenchConfig::parse("outer.tolerance = 1e-8").is_err());
        assert!(BenchConfig::parse("gamma = fast").is_err());
        assert!(BenchConfig::parse("meshes = 4x4").is_err());
        assert!(BenchConfig::parse("meshes = 0x4x4").is_err());
        assert!(BenchConfig::parse("outer.tol = 2").is_err());
        assert!(BenchConfig::parse("ritz.steps = 65").is_err());
    }
}
