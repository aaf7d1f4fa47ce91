//! Python bindings: assemble the photonic-crystal problem, apply its
//! operators and run the nested Schur and FS solvers.
//!
//! Vectors cross the boundary as Python lists of floats.

use nested_schur::bench::{build_problem, random_rhs, ProblemSpec};
use nested_schur::krylov::{fom_ritz, LinearOperator, SolveReport};
use nested_schur::solvers::{
    solve_fs, FsOrdering, FsPreconditioner, MiddleMode, MiddleSolver, NestedSchurSolver, OuterConfig,
    OuterOperator, ShiftedExtended,
};
use nested_schur::Error;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Dimension { .. }
        | Error::InvalidGrid(_)
        | Error::InvalidMaterial(_)
        | Error::InvalidParameter(_)
        | Error::Config(_)
        | Error::SizeCap { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Outcome of one solve.
#[pyclass(frozen, get_all, skip_from_py_object, name = "SolveReport")]
#[derive(Debug, Clone)]
struct PySolveReport {
    converged: bool,
    iterations: usize,
    matvecs: usize,
    max_inner_iterations: usize,
    residual: f64,
    residual_history: Vec<f64>,
    seconds: f64,
}

#[pymethods]
impl PySolveReport {
    fn __repr__(&self) -> String {
        format!(
            "SolveReport(converged={}, iterations={}, residual={:.3e})",
            self.converged, self.iterations, self.residual
        )
    }
}

impl From<SolveReport> for PySolveReport {
    fn from(r: SolveReport) -> Self {
        Self {
            converged: r.converged,
            iterations: r.iterations,
            matvecs: r.matvecs,
            max_inner_iterations: r.max_inner_iterations,
            residual: r.final_residual,
            residual_history: r.residual_history,
            seconds: r.wall_time,
        }
    }
}

/// The reference photonic-crystal problem on an `nx × ny × nz` mesh.
#[pyclass(frozen, name = "Problem")]
struct PyProblem {
    inner: nested_schur::bench::Problem,
}

#[pymethods]
impl PyProblem {
    /// `pml_multiplier` scales the reflection-rule conductivity;
    /// `pml_thickness` is the layer width on the x- and y-walls.
    #[new]
    #[pyo3(signature = (nx, ny, nz, pml_multiplier=None, pml_thickness=None))]
    fn new(nx: usize, ny: usize, nz: usize, pml_multiplier: Option<f64>, pml_thickness: Option<f64>) -> PyResult<Self> {
        let mut spec = ProblemSpec::reference([nx, ny, nz]);
        if let Some(m) = pml_multiplier {
            spec.pml.multiplier = m;
        }
        if let Some(t) = pml_thickness {
            spec.pml_thickness = [t, t, 0.0];
        }
        Ok(Self {
            inner: build_problem(&spec).map_err(to_py)?,
        })
    }

    /// Field unknowns.
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// Auxiliary layer unknowns.
    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// `𝒜 y`.
    fn matvec(&self, y: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.op.matvec(&y).map_err(to_py)
    }

    /// `(I + γ𝒜) y`.
    fn shifted_matvec(&self, y: Vec<f64>, gamma: f64) -> PyResult<Vec<f64>> {
        ShiftedExtended {
            op: &self.inner.op,
            gamma,
        }
        .apply_vec(&y)
        .map_err(to_py)
    }

    /// `(I + γ𝒜) x*` for a seeded random-normal `x*`.
    #[pyo3(signature = (gamma=0.012, seed=2024))]
    fn random_rhs(&self, gamma: f64, seed: u64) -> PyResult<Vec<f64>> {
        random_rhs(&self.inner, gamma, seed).map_err(to_py)
    }

    /// Solves `(I + γ𝒜) x = b` with the nested Schur complement solver.
    #[pyo3(signature = (b, gamma=0.012, tol=1e-10, restart=10, max_iter=1000, inner_tol=1e-10))]
    fn solve_nested(
        &self,
        py: Python<'_>,
        b: Vec<f64>,
        gamma: f64,
        tol: f64,
        restart: usize,
        max_iter: usize,
        inner_tol: f64,
    ) -> PyResult<(Vec<f64>, PySolveReport)> {
        let op = &self.inner.op;
        let outer = OuterConfig { restart, tol, max_iter };
        let middle = MiddleMode::SchurCg {
            tol: inner_tol,
            max_iter: 10_000,
        };
        let (x, rep) = py
            .detach(|| NestedSchurSolver::new(op, gamma, outer, middle)?.solve_nested(&b))
            .map_err(to_py)?;
        Ok((x, rep.into()))
    }

    /// Solves `(I + γ𝒜) x = b` with FS-preconditioned unrestarted GMRES.
    #[pyo3(signature = (b, gamma=0.012, tol=1e-10, max_iter=500, natural_order=false))]
    fn solve_fs(
        &self,
        py: Python<'_>,
        b: Vec<f64>,
        gamma: f64,
        tol: f64,
        max_iter: usize,
        natural_order: bool,
    ) -> PyResult<(Vec<f64>, PySolveReport)> {
        let op = &self.inner.op;
        let ordering = if natural_order {
            FsOrdering::Natural
        } else {
            FsOrdering::FieldBlocks
        };
        let (x, rep) = py
            .detach(|| {
                let fs = FsPreconditioner::new(op, gamma, ordering)?;
                solve_fs(op, &fs, &b, tol, max_iter)
            })
            .map_err(to_py)?;
        Ok((x, rep.into()))
    }

    /// Ritz values after `steps` Arnoldi steps of the `"nested"`
    /// middle-preconditioned outer operator or the `"fs"`-preconditioned
    /// shifted system.
    #[pyo3(signature = (which="nested", gamma=0.012, steps=24, seed=2024))]
    fn ritz(&self, py: Python<'_>, which: &str, gamma: f64, steps: usize, seed: u64) -> PyResult<Vec<Complex64>> {
        let p = &self.inner;
        let values = match which {
            "nested" => py.detach(|| {
                let middle = MiddleSolver::new(&p.op.blocks, gamma, MiddleMode::default())?;
                let outer = OuterOperator {
                    blocks: &p.op.blocks,
                    coupling: &p.op.coupling,
                    gamma,
                };
                let start = nested_schur::bench::RngStream::new(seed).normal_vec(p.n());
                fom_ritz(&outer, Some(&middle), &start, steps)
            }),
            "fs" => py.detach(|| {
                let fs = FsPreconditioner::new(&p.op, gamma, FsOrdering::FieldBlocks)?;
                let shifted = ShiftedExtended { op: &p.op, gamma };
                let start = nested_schur::bench::RngStream::new(seed).normal_vec(p.dim());
                fom_ritz(&shifted, Some(&fs), &start, steps)
            }),
            _ => return Err(PyValueError::new_err(format!("unknown operator `{which}`, expected \"nested\" or \"fs\""))),
        };
        values.map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let c = self.inner.spec.cells;
        format!(
            "Problem({}x{}x{}, n={}, m={})",
            c[0],
            c[1],
            c[2],
            self.inner.n(),
            self.inner.m()
        )
    }
}

/// `(N, n, m)` for the reference problem on an `nx × ny × nz` mesh.
#[pyfunction]
fn dof_counts(nx: usize, ny: usize, nz: usize) -> PyResult<(usize, usize, usize)> {
    let p = build_problem(&ProblemSpec::reference([nx, ny, nz])).map_err(to_py)?;
    Ok((p.dim(), p.n(), p.m()))
}

#[pymodule]
fn nested_schur_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(dof_counts, m)?)?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PySolveReport>()?;
    Ok(())
}
