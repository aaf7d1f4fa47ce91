//! Acceptance suite: one PASS/FAIL line per criterion, then a nonzero exit
//! if any criterion failed. Runs without the libtest harness so the report
//! is always printed.
//!
//! Run with `cargo test --release -p nested-schur --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use nested_schur::bench::{
    build_problem, run_ritz, table2_row, table3_row, table4_rows, BenchConfig, CsvRow, Problem, ProblemSpec, RngStream,
    Table2Row,
};
use nested_schur::krylov::gmres_restarted;
use nested_schur::solvers::{
    bracket_matrix, fs_factor_matrices, ideal_schur_preconditioner, FsOrdering, FsPreconditioner, MiddleMode,
    NestedSchurSolver, OuterConfig, ShiftedExtended,
};
use nested_schur::sparse::dense_solve;
use nested_schur::yee::{build_grid, dof_counts, PhotonicCrystalScene};
use nested_schur::{Result, SparseMatrix};

const GAMMA: f64 = 0.012;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d) / norm(b)
}

fn reference(cells: [usize; 3]) -> Problem {
    build_problem(&ProblemSpec::reference(cells)).expect("reference problem assembles")
}

fn desk_meshes() -> Vec<[usize; 3]> {
    BenchConfig::default().meshes
}

/// `table2` rows over the 20/40/60 family, shared by criteria 6 and 7.
fn table2_rows() -> &'static [Table2Row] {
    static ROWS: OnceLock<Vec<Table2Row>> = OnceLock::new();
    ROWS.get_or_init(|| {
        let c = BenchConfig::default();
        c.table2_meshes
            .iter()
            .map(|&m| table2_row(&c, m).expect("table2 row"))
            .collect()
    })
}

fn dof_counts_match() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (cells, n_ref) in [([20, 20, 12], 34398), ([40, 40, 24], 252150), ([80, 80, 48], 1928934)] {
        let g = build_grid(cells, [5.0, 5.0, 3.0], [1.0, 1.0, 0.0])?;
        let (n, _, _) = dof_counts(&g);
        pass &= n == n_ref;
        parts.push(format!("n={n} (want {n_ref})"));
    }
    for (cells, m_ref) in [([20, 20, 12], 11167.0), ([40, 40, 24], 81275.0)] {
        let m = reference(cells).m() as f64;
        let rel = (m - m_ref).abs() / m_ref;
        pass &= rel <= 0.05;
        parts.push(format!("m={m} (want {m_ref} ±5%)"));
    }
    outcome(pass, parts.join(", "))
}

fn nested_matches_dense_oracle() -> Result<Outcome> {
    let p = reference([6, 6, 4]);
    let a = p.op.assemble_shifted(GAMMA)?.to_dense();
    let solver = NestedSchurSolver::new(&p.op, GAMMA, OuterConfig::default(), MiddleMode::default())?;
    let mut worst = 0.0f64;
    for seed in 1..=5 {
        let b = RngStream::new(seed).normal_vec(p.dim());
        let (x, _) = solver.solve_nested(&b)?;
        let exact = dense_solve(&a, &b)?;
        worst = worst.max(rel_diff(&x, &exact));
    }
    outcome(worst <= 1e-8, format!("max relative difference {worst:.2e} over 5 seeds (tol 1e-8)"))
}

fn schur_identity() -> Result<Outcome> {
    let p = reference([6, 6, 4]);
    let b = &p.op.blocks;
    let s = bracket_matrix(b, GAMMA)?;
    let d1: Vec<f64> = b.m1.iter().map(|m| 1.0 / (1.0 + GAMMA * m)).collect();
    let mut rng = RngStream::new(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let v = rng.normal_vec(b.n2());
        // (I + γM2 + γ² K2ᵀ (I + γM1)⁻¹ K1) v
        let k1v = b.k1.spmv(&v)?;
        let t: Vec<f64> = k1v.iter().zip(&d1).map(|(x, d)| x * d).collect();
        let k2t = b.k2t.spmv(&t)?;
        let lhs: Vec<f64> = (0..b.n2())
            .map(|i| v[i] + GAMMA * b.m2[i] * v[i] + GAMMA * GAMMA * k2t[i])
            .collect();
        // Mε⁻¹ S v
        let rhs: Vec<f64> = s.spmv(&v)?.iter().zip(b.m_eps.diag()).map(|(x, e)| x / e).collect();
        worst = worst.max(rel_diff(&lhs, &rhs));
    }
    outcome(worst <= 1e-12, format!("max relative difference {worst:.2e} over 100 vectors (tol 1e-12)"))
}

fn product_identity() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for cells in [[6, 6, 4], [10, 10, 6]] {
        let p = reference(cells);
        let sparse = p.op.coupling.product()?;
        let formula = p.op.coupling.product_formula(&p.op.blocks)?;
        // Entries reach σ², so the bound is relative to the largest entry.
        let diff = sparse.sub(&formula)?.max_abs() / formula.max_abs();
        pass &= diff <= 1e-14;
        parts.push(format!("{}x{}x{}: {diff:.1e}", cells[0], cells[1], cells[2]));
    }
    outcome(pass, format!("max |B1ᵀB2 − formula| / max|formula|: {} (tol 1e-14)", parts.join(", ")))
}

/// Outer counts must lie within ±20% of the 20×20×12 count; inner counts
/// must not decrease under refinement.
fn mesh_independence() -> Result<Outcome> {
    let c = BenchConfig::default();
    let rows: Vec<_> = desk_meshes()
        .into_iter()
        .map(|m| table3_row(&c, m))
        .collect::<Result<_>>()?;
    let outer: Vec<usize> = rows.iter().map(|r| r.outer).collect();
    let inner: Vec<usize> = rows.iter().map(|r| r.max_inner).collect();
    let reference = outer[1] as f64;
    let flat = outer.iter().all(|&o| (o as f64 - reference).abs() <= 0.2 * reference);
    let growing = inner.windows(2).all(|w| w[1] >= w[0]);
    let converged = rows.iter().all(|r| r.converged && r.residual <= 1e-9);
    outcome(
        flat && growing && converged,
        format!("outer {outer:?} (±20% of {reference}), max inner {inner:?} nondecreasing, all converged: {converged}"),
    )
}

/// The iteration convention is the one (matvecs or ℓ-cycles) whose coarse
/// count lands in [14, 28].
fn middle_preconditioner_quality() -> Result<Outcome> {
    let rows = table2_rows();
    let cycles: Vec<usize> = rows.iter().map(|r| r.cycles).collect();
    let matvecs: Vec<usize> = rows.iter().map(|r| r.matvecs).collect();
    let in_range = |c: usize| (14..=28).contains(&c);
    let (label, counts) = if in_range(matvecs[0]) {
        ("matvecs", &matvecs)
    } else {
        ("cycles", &cycles)
    };
    let lo = *counts.iter().min().unwrap() as f64;
    let hi = *counts.iter().max().unwrap() as f64;
    let converged = rows.iter().all(|r| r.ok() && r.residual <= 1e-5);
    outcome(
        in_range(counts[0]) && hi / lo <= 1.5 && converged,
        format!(
            "{label} {counts:?} on 20/40/60 (coarse in [14,28], max/min {:.2} ≤ 1.5); cycles {cycles:?}, matvecs {matvecs:?}",
            hi / lo
        ),
    )
}

fn norm_scaling() -> Result<Outcome> {
    let rows = table2_rows();
    let s: Vec<f64> = rows.iter().map(|r| r.s_norm).collect();
    let h: Vec<f64> = rows.iter().map(|r| r.h_norm).collect();
    let s1 = s[1] / s[0];
    let s2 = s[2] / s[1];
    let h1 = h[1] / h[0];
    let h2 = h[2] / h[1];
    let pass = (s1 - 2.0).abs() <= 0.2
        && (s2 - 1.5).abs() <= 0.15
        && [h1, h2].iter().all(|r| (0.7..=1.3).contains(r));
    outcome(
        pass,
        format!("‖S‖ ratios {s1:.3} (2.0±10%), {s2:.3} (1.5±10%); ‖H‖ ratios {h1:.3}, {h2:.3} in [0.7,1.3]"),
    )
}

fn three_iterations() -> Result<Outcome> {
    let p = reference([4, 4, 4]);
    let ideal = ideal_schur_preconditioner(&p.op, GAMMA)?;
    let shifted = ShiftedExtended { op: &p.op, gamma: GAMMA };
    let b = RngStream::new(13).normal_vec(p.dim());
    let (_, full) = gmres_restarted(&shifted, Some(&ideal), &b, 50, 1e-10, 50)?;
    let (_, three) = gmres_restarted(&shifted, Some(&ideal), &b, 3, 0.0, 3)?;
    let (_, plain) = gmres_restarted(&shifted, None, &b, 30, 0.0, 30)?;
    outcome(
        full.converged && full.iterations <= 3,
        format!(
            "{} iterations to 1e-10 (want ≤ 3); residual after 3 preconditioned steps {:.2e} vs 30 unpreconditioned {:.2e}",
            full.iterations, three.final_residual, plain.final_residual
        ),
    )
}

fn fs_no_fill() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for cells in [[10, 10, 6], [20, 20, 12]] {
        let p = reference(cells);
        let natural = FsPreconditioner::new(&p.op, GAMMA, FsOrdering::Natural)?.fill_ratios();
        let blocks = FsPreconditioner::new(&p.op, GAMMA, FsOrdering::FieldBlocks)?.fill_ratios();
        pass &= natural == (1.0, 1.0);
        parts.push(format!(
            "{}x{}x{}: natural ({:.3}, {:.3}), field-block order ({:.3}, {:.3})",
            cells[0], cells[1], cells[2], natural.0, natural.1, blocks.0, blocks.1
        ));
    }
    outcome(pass, format!("{}; natural order required to be (1, 1)", parts.join("; ")))
}

fn table4_trend() -> Result<Outcome> {
    let c = BenchConfig::default();
    let mut fs = Vec::new();
    let mut nested = Vec::new();
    let mut converged = true;
    for (i, &m) in c.meshes.iter().enumerate() {
        let [f, n] = table4_rows(&c, m, c.table4_tol(i))?;
        converged &= f.ok() && n.ok() && f.residual <= f.tol * 10.0 && n.residual <= n.tol * 10.0;
        fs.push(f.iterations);
        nested.push(n.iterations);
    }
    let increasing = fs.windows(2).all(|w| w[1] > w[0]);
    let flat = nested.iter().max().unwrap() - nested.iter().min().unwrap() <= 1;
    outcome(
        increasing && flat && converged,
        format!("FS {fs:?} (strictly increasing), nested outer {nested:?} (flat ±1), tolerances met: {converged}"),
    )
}

fn spectrum_realness() -> Result<Outcome> {
    let spectra = run_ritz(&BenchConfig::default())?;
    let fs = spectra.iter().find(|s| s.label == "fs").unwrap().imaginary_ratio();
    let nested = spectra.iter().find(|s| s.label == "nested").unwrap().imaginary_ratio();
    outcome(
        nested <= 1e-6 && fs <= 1e-3,
        format!("max|Im|/max|Re|: nested {nested:.2e} (≤ 1e-6), FS {fs:.2e} (≤ 1e-3)"),
    )
}

fn structural_invariants() -> Result<Outcome> {
    let mut failures = Vec::new();

    let mut vacuum = ProblemSpec::reference([10, 10, 6]);
    vacuum.scene = PhotonicCrystalScene::empty();
    vacuum.pml_thickness = [0.0; 3];
    let v = build_problem(&vacuum)?;
    let a = v.op.blocks.assemble_a();
    if a.add(&a.transpose())?.max_abs() != 0.0 {
        failures.push("A not skew at σ=0");
    }

    let p = reference([10, 10, 6]);
    let b = &p.op.blocks;
    if b.kt != b.k.transpose() {
        failures.push("stored Kᵀ differs from transpose of K");
    }

    let c = &p.op.coupling;
    if c.b1_h.add(&c.b1_e)? != c.b1 || c.b2_h.add(&c.b2_e)? != c.b2 {
        failures.push("B split incomplete");
    }

    let (f1, f2) = fs_factor_matrices(&p.op, GAMMA)?;
    let sum = f1.add(&f2)?.sub(&SparseMatrix::identity(p.dim()))?;
    let whole = p.op.assemble_shifted(GAMMA)?;
    if sum.sub(&whole)?.max_abs() > 1e-13 {
        failures.push("𝒜₁ + 𝒜₂ ≠ 𝒜");
    }

    let void = p.dofs.void_mask();
    let ap = b.assemble_a();
    let apt = ap.transpose();
    let empty = |m: &SparseMatrix, r: usize| m.row(r).1.iter().all(|&x| x == 0.0);
    if (0..p.n()).any(|r| void[r] && (!empty(&ap, r) || !empty(&apt, r))) {
        failures.push("void row or column of A not empty");
    }
    let k = &b.k;
    let kt = &b.kt;
    if p.dofs.h_void().iter().enumerate().any(|(r, &v)| v && !empty(k, r))
        || p.dofs.e_void().iter().enumerate().any(|(r, &v)| v && !empty(kt, r))
    {
        failures.push("void row of K not empty");
    }

    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "skew A at σ=0, Kᵀ duality, B1 = B1H + B1E, 𝒜₁+𝒜₂ = 𝒜, void rows empty".into()
        } else {
            failures.join("; ")
        },
    )
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 12] = [
        ("DOF counts", dof_counts_match),
        ("nested solve vs dense oracle", nested_matches_dense_oracle),
        ("Schur identity", schur_identity),
        ("B1ᵀB2 block formula", product_identity),
        ("outer mesh independence", mesh_independence),
        ("middle preconditioner quality", middle_preconditioner_quality),
        ("norm scaling of γ²B1ᵀB2", norm_scaling),
        ("ideal Schur three-iteration property", three_iterations),
        ("FS no fill-in", fs_no_fill),
        ("FS vs nested iteration trend", table4_trend),
        ("Ritz spectrum realness", spectrum_realness),
        ("structural invariants", structural_invariants),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run));
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match result {
            Ok(Ok(o)) => (o.pass, o.detail),
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".into()),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:>2}. {name}: {detail} [{secs:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
