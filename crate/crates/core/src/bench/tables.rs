//! Experiment drivers: each returns plain rows and can write them as CSV.
//!
//! Every residual in a row is recomputed from the returned solution against
//! the original operator. Right-hand sides come from a random-normal exact
//! solution drawn from [`RngStream`] with the configured seed, so two runs
//! with the same config emit the same numbers.

use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::config::{BenchConfig, ExactMiddle, AUTO_LU_LIMIT};
use super::problem::{build_problem, Problem};
use super::rng::RngStream;
use crate::error::{Error, Result};
use crate::krylov::{bicgstab2, fom_ritz, relative_residual, LinearOperator};
use crate::pml::skew_symmetric_diagnostics;
use crate::solvers::{
    solve_fs, FsPreconditioner, MiddleMode, MiddleSolver, NestedSchurSolver, OuterConfig, OuterOperator,
    ShiftedExtended,
};
use crate::sparse::mtx::save_matrix_market;

/// A row that can be written to CSV.
pub trait CsvRow {
    /// Column names, with units where they have one.
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
    /// `false` when the row records a solver failure.
    fn ok(&self) -> bool {
        true
    }
}

pub fn mesh_label(cells: [usize; 3]) -> String {
    format!("{}x{}x{}", cells[0], cells[1], cells[2])
}

fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

pub fn write_csv<R: CsvRow, W: Write>(rows: &[R], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(R::header()).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.fields()).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv<R: CsvRow>(rows: &[R], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    write_csv(rows, std::fs::File::create(path)?)
}

fn status(err: &Option<Error>) -> String {
    match err {
        None => "ok".into(),
        Some(e) => e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub mesh: [usize; 3],
    pub total: usize,
    pub n: usize,
    pub m: usize,
}

impl CsvRow for Table1Row {
    fn header() -> &'static [&'static str] {
        &["mesh", "N", "n", "m"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            mesh_label(self.mesh),
            self.total.to_string(),
            self.n.to_string(),
            self.m.to_string(),
        ]
    }
}

pub fn run_table1(config: &BenchConfig) -> Result<Vec<Table1Row>> {
    config
        .meshes
        .iter()
        .map(|&mesh| {
            let p = build_problem(&config.problem_spec(mesh))?;
            Ok(Table1Row {
                mesh,
                total: p.dim(),
                n: p.n(),
                m: p.m(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table2Row {
    pub mesh: [usize; 3],
    /// Started BiCGstab(2) cycles.
    pub cycles: usize,
    /// Applications of the outer Schur matrix.
    pub matvecs: usize,
    pub residual: f64,
    pub h_norm: f64,
    pub s_norm: f64,
    pub middle: &'static str,
    pub converged: bool,
    pub seconds: f64,
    pub error: Option<Error>,
}

impl CsvRow for Table2Row {
    fn header() -> &'static [&'static str] {
        &[
            "mesh",
            "bicgstab2_cycles",
            "matvecs",
            "rel_residual",
            "H_norm1",
            "S_norm1",
            "middle_solve",
            "converged",
            "time_s",
            "status",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            mesh_label(self.mesh),
            self.cycles.to_string(),
            self.matvecs.to_string(),
            sci(self.residual),
            format!("{:.4}", self.h_norm),
            format!("{:.4}", self.s_norm),
            self.middle.into(),
            self.converged.to_string(),
            format!("{:.3}", self.seconds),
            status(&self.error),
        ]
    }

    fn ok(&self) -> bool {
        self.converged && self.error.is_none()
    }
}

fn exact_middle_mode(config: &BenchConfig, n: usize) -> MiddleMode {
    let cg = MiddleMode::SchurCg {
        tol: config.exact_inner_tol,
        max_iter: config.inner_max_iter,
    };
    match config.table2_middle {
        ExactMiddle::Lu => MiddleMode::Lu,
        ExactMiddle::Cg => cg,
        ExactMiddle::Auto if n <= AUTO_LU_LIMIT => MiddleMode::Lu,
        ExactMiddle::Auto => cg,
    }
}

/// BiCGstab(2) on `I + γA + γ²B1ᵀB2` right-preconditioned by `(I + γA)⁻¹`
/// applied exactly, plus the 1-norms of the symmetric and skew parts of
/// `γ²B1ᵀB2`.
pub fn table2_row(config: &BenchConfig, mesh: [usize; 3]) -> Result<Table2Row> {
    let p = build_problem(&config.problem_spec(mesh))?;
    let g = config.gamma;
    let (h_norm, s_norm) = skew_symmetric_diagnostics(&p.op.coupling, g)?;
    let mode = exact_middle_mode(config, p.n());
    let mut row = Table2Row {
        mesh,
        cycles: 0,
        matvecs: 0,
        residual: f64::NAN,
        h_norm,
        s_norm,
        middle: match mode {
            MiddleMode::Lu => "lu",
            MiddleMode::SchurCg { .. } => "cg",
        },
        converged: false,
        seconds: 0.0,
        error: None,
    };
    let outer = OuterOperator {
        blocks: &p.op.blocks,
        coupling: &p.op.coupling,
        gamma: g,
    };
    let xs = RngStream::new(config.seed).normal_vec(p.n());
    let b = outer.apply_vec(&xs)?;
    let start = std::time::Instant::now();
    let result = MiddleSolver::new(&p.op.blocks, g, mode)
        .and_then(|mid| bicgstab2(&outer, Some(&mid), &b, config.table2_tol, config.table2_max_iter));
    row.seconds = start.elapsed().as_secs_f64();
    match result {
        Ok((x, rep)) => {
            row.cycles = rep.iterations;
            row.matvecs = rep.matvecs;
            row.residual = relative_residual(&outer, &x, &b)?;
            row.converged = rep.converged;
        }
        Err(e) => row.error = Some(e),
    }
    Ok(row)
}

pub fn run_table2(config: &BenchConfig) -> Result<Vec<Table2Row>> {
    config.table2_meshes.iter().map(|&m| table2_row(config, m)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table3Row {
    pub mesh: [usize; 3],
    pub residual: f64,
    pub outer: usize,
    pub max_inner: usize,
    pub total_inner: usize,
    pub converged: bool,
    pub seconds: f64,
    pub error: Option<Error>,
}

impl CsvRow for Table3Row {
    fn header() -> &'static [&'static str] {
        &[
            "mesh",
            "rel_residual",
            "outer_iterations",
            "max_inner_iterations",
            "total_inner_iterations",
            "converged",
            "time_s",
            "status",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            mesh_label(self.mesh),
            sci(self.residual),
            self.outer.to_string(),
            self.max_inner.to_string(),
            self.total_inner.to_string(),
            self.converged.to_string(),
            format!("{:.3}", self.seconds),
            status(&self.error),
        ]
    }

    fn ok(&self) -> bool {
        self.converged && self.error.is_none()
    }
}

/// `b = (I + γ𝒜) x*` with `x*` random normal from `seed`.
pub fn random_rhs(p: &Problem, gamma: f64, seed: u64) -> Result<Vec<f64>> {
    let xs = RngStream::new(seed).normal_vec(p.dim());
    ShiftedExtended { op: &p.op, gamma }.apply_vec(&xs)
}

fn nested_run(config: &BenchConfig, p: &Problem, b: &[f64], outer: OuterConfig) -> Result<(Vec<f64>, crate::krylov::SolveReport)> {
    let middle = MiddleMode::SchurCg {
        tol: config.inner_tol,
        max_iter: config.inner_max_iter,
    };
    NestedSchurSolver::new(&p.op, config.gamma, outer, middle)?.solve_nested(b)
}

pub fn table3_row(config: &BenchConfig, mesh: [usize; 3]) -> Result<Table3Row> {
    let p = build_problem(&config.problem_spec(mesh))?;
    let b = random_rhs(&p, config.gamma, config.seed)?;
    let mut row = Table3Row {
        mesh,
        residual: f64::NAN,
        outer: 0,
        max_inner: 0,
        total_inner: 0,
        converged: false,
        seconds: 0.0,
        error: None,
    };
    let start = std::time::Instant::now();
    let result = nested_run(config, &p, &b, config.outer);
    row.seconds = start.elapsed().as_secs_f64();
    match result {
        Ok((_, rep)) => {
            row.residual = rep.final_residual;
            row.outer = rep.iterations;
            row.max_inner = rep.max_inner_iterations;
            row.total_inner = rep.inner_iterations;
            row.converged = rep.converged;
        }
        Err(e) => row.error = Some(e),
    }
    Ok(row)
}

pub fn run_table3(config: &BenchConfig) -> Result<Vec<Table3Row>> {
    config.meshes.iter().map(|&m| table3_row(config, m)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Fs,
    Nested,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table4Row {
    pub mesh: [usize; 3],
    pub tol: f64,
    pub method: Method,
    pub seconds: f64,
    pub iterations: usize,
    /// Largest inner ICCG count (nested only).
    pub max_inner: usize,
    pub residual: f64,
    pub converged: bool,
    /// `‖b‖₂` bits, identical for both methods on one mesh.
    pub rhs_norm: f64,
    pub error: Option<Error>,
}

impl CsvRow for Table4Row {
    fn header() -> &'static [&'static str] {
        &[
            "mesh",
            "tol",
            "method",
            "time_s",
            "iterations",
            "max_inner_iterations",
            "rel_residual",
            "converged",
            "status",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            mesh_label(self.mesh),
            sci(self.tol),
            match self.method {
                Method::Fs => "fs".into(),
                Method::Nested => "nested".into(),
            },
            format!("{:.3}", self.seconds),
            self.iterations.to_string(),
            self.max_inner.to_string(),
            sci(self.residual),
            self.converged.to_string(),
            status(&self.error),
        ]
    }

    fn ok(&self) -> bool {
        self.converged && self.error.is_none()
    }
}

/// FS-preconditioned unrestarted GMRES and the nested solver on the same
/// right-hand side; the factorization time is included for FS and the
/// IC(0) setup for the nested solver.
pub fn table4_rows(config: &BenchConfig, mesh: [usize; 3], tol: f64) -> Result<[Table4Row; 2]> {
    let p = build_problem(&config.problem_spec(mesh))?;
    let g = config.gamma;
    let b = random_rhs(&p, g, config.seed)?;
    let rhs_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let blank = |method| Table4Row {
        mesh,
        tol,
        method,
        seconds: 0.0,
        iterations: 0,
        max_inner: 0,
        residual: f64::NAN,
        converged: false,
        rhs_norm,
        error: None,
    };

    let mut fs_row = blank(Method::Fs);
    let start = std::time::Instant::now();
    let fs = FsPreconditioner::new(&p.op, g, config.fs_ordering)
        .and_then(|fs| solve_fs(&p.op, &fs, &b, tol, config.fs_max_iter));
    fs_row.seconds = start.elapsed().as_secs_f64();
    match fs {
        Ok((_, rep)) => {
            fs_row.iterations = rep.iterations;
            fs_row.residual = rep.final_residual;
            fs_row.converged = rep.converged;
        }
        Err(e) => fs_row.error = Some(e),
    }

    let mut nested_row = blank(Method::Nested);
    let outer = OuterConfig { tol, ..config.outer };
    let start = std::time::Instant::now();
    let nested = nested_run(config, &p, &b, outer);
    nested_row.seconds = start.elapsed().as_secs_f64();
    match nested {
        Ok((_, rep)) => {
            nested_row.iterations = rep.iterations;
            nested_row.max_inner = rep.max_inner_iterations;
            nested_row.residual = rep.final_residual;
            nested_row.converged = rep.converged;
        }
        Err(e) => nested_row.error = Some(e),
    }
    Ok([fs_row, nested_row])
}

pub fn run_table4(config: &BenchConfig) -> Result<Vec<Table4Row>> {
    let mut rows = Vec::new();
    for (i, &mesh) in config.meshes.iter().enumerate() {
        rows.extend(table4_rows(config, mesh, config.table4_tol(i))?);
    }
    Ok(rows)
}

/// Ritz values of one preconditioned operator.
#[derive(Debug, Clone, PartialEq)]
pub struct RitzSpectrum {
    pub label: &'static str,
    pub mesh: [usize; 3],
    pub values: Vec<Complex64>,
    /// Fewer than the requested steps were possible.
    pub breakdown: bool,
}

impl RitzSpectrum {
    /// `max |Im| / max |Re|`.
    pub fn imaginary_ratio(&self) -> f64 {
        let im = self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let re = self.values.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        if re == 0.0 {
            f64::INFINITY
        } else {
            im / re
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RitzRow {
    pub label: &'static str,
    pub index: usize,
    pub value: Complex64,
}

impl CsvRow for RitzRow {
    fn header() -> &'static [&'static str] {
        &["operator", "index", "re", "im"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.label.into(),
            self.index.to_string(),
            format!("{:.12e}", self.value.re),
            format!("{:.12e}", self.value.im),
        ]
    }
}

pub fn ritz_rows(spectra: &[RitzSpectrum]) -> Vec<RitzRow> {
    spectra
        .iter()
        .flat_map(|s| {
            s.values.iter().enumerate().map(|(index, &value)| RitzRow {
                label: s.label,
                index,
                value,
            })
        })
        .collect()
}

/// Ritz values of `(I + γ𝒜)𝓜⁻¹` (label `fs`) and of the outer Schur matrix
/// right-preconditioned by the middle solve (label `nested`), both started
/// from a random-normal vector.
pub fn run_ritz(config: &BenchConfig) -> Result<Vec<RitzSpectrum>> {
    let mesh = config.ritz_mesh;
    let p = build_problem(&config.problem_spec(mesh))?;
    let g = config.gamma;
    let k = config.ritz_steps;

    let fs = FsPreconditioner::new(&p.op, g, config.fs_ordering)?;
    let shifted = ShiftedExtended { op: &p.op, gamma: g };
    let start = RngStream::new(config.seed).normal_vec(p.dim());
    let fs_values = fom_ritz(&shifted, Some(&fs), &start, k)?;

    let middle = MiddleSolver::new(
        &p.op.blocks,
        g,
        MiddleMode::SchurCg {
            tol: config.exact_inner_tol,
            max_iter: config.inner_max_iter,
        },
    )?;
    let outer = OuterOperator {
        blocks: &p.op.blocks,
        coupling: &p.op.coupling,
        gamma: g,
    };
    let start = RngStream::new(config.seed).normal_vec(p.n());
    let nested_values = fom_ritz(&outer, Some(&middle), &start, k)?;

    Ok(vec![
        RitzSpectrum {
            label: "fs",
            mesh,
            breakdown: fs_values.len() < k,
            values: fs_values,
        },
        RitzSpectrum {
            label: "nested",
            mesh,
            breakdown: nested_values.len() < k,
            values: nested_values,
        },
    ])
}

/// Writes `A`, `B1`, `B2`, `K` and, when small enough, `𝒜` in Matrix Market
/// format; returns the written paths.
pub fn dump_matrices(config: &BenchConfig, mesh: [usize; 3], dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let p = build_problem(&config.problem_spec(mesh))?;
    let label = mesh_label(mesh);
    let mut written = Vec::new();
    let mut save = |name: &str, m: &crate::sparse::SparseMatrix| -> Result<()> {
        let path = dir.join(format!("{name}_{label}.mtx"));
        save_matrix_market(m, &path)?;
        written.push(path);
        Ok(())
    };
    save("A", &p.op.blocks.assemble_a())?;
    save("K", &p.op.blocks.k)?;
    save("B1", &p.op.coupling.b1)?;
    save("B2", &p.op.coupling.b2)?;
    if p.dim() <= crate::pml::ASSEMBLY_CAP {
        save("Aext", &p.op.assemble()?)?;
    }
    Ok(written)
}
