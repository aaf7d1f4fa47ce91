//! Benchmark harness: assembles the photonic-crystal problem and runs the
//! table and spectrum experiments, writing CSV into the output directory.
//!
//! Exit status: 0 when every row converged, 2 on any solver failure,
//! 1 on a configuration or I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nested_schur::bench::{
    dump_matrices, mesh_label, parse_mesh, ritz_rows, run_ritz, run_table1, run_table2, run_table3, run_table4,
    save_csv, BenchConfig, CsvRow,
};
use nested_schur::Error;

#[derive(Parser, Debug)]
#[command(name = "nested-schur-bench", version, about)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,

    /// Key-value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Run a single mesh instead of the configured family, e.g. `20,20,12`.
    #[arg(long, global = true, value_parser = parse_mesh_arg)]
    mesh: Option<[usize; 3]>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for CSV and Matrix Market files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Overrides the tolerance of the chosen experiment.
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[arg(long, global = true)]
    gamma: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Verb {
    /// Degrees of freedom per mesh.
    Table1,
    /// BiCGstab(2) on the outer Schur matrix with an exact middle solve.
    Table2,
    /// Nested Schur solver with GMRES(10) and ICCG(0).
    Table3,
    /// Nested Schur solver against the FS preconditioner.
    Table4,
    /// Ritz values of both preconditioned operators.
    Ritz,
    /// Writes the operator blocks in Matrix Market format.
    DumpMatrices,
}

fn parse_mesh_arg(s: &str) -> Result<[usize; 3], String> {
    parse_mesh(s).map_err(|e| e.to_string())
}

fn configure(cli: &Cli) -> Result<BenchConfig, Error> {
    let mut c = match &cli.config {
        Some(path) => BenchConfig::load(path)?,
        None => BenchConfig::default(),
    };
    if let Some(mesh) = cli.mesh {
        c.meshes = vec![mesh];
        c.table2_meshes = vec![mesh];
        c.ritz_mesh = mesh;
    }
    if let Some(seed) = cli.seed {
        c.seed = seed;
    }
    if let Some(out) = &cli.out {
        c.output_dir = out.clone();
    }
    if let Some(gamma) = cli.gamma {
        c.gamma = gamma;
    }
    if let Some(tol) = cli.tol {
        match cli.verb {
            Verb::Table2 => c.table2_tol = tol,
            Verb::Table3 => c.outer.tol = tol,
            Verb::Table4 => c.table4_tols = vec![tol],
            _ => {}
        }
    }
    c.validate()?;
    Ok(c)
}

fn emit<R: CsvRow>(c: &BenchConfig, name: &str, rows: &[R]) -> Result<bool, Error> {
    let path = c.output_dir.join(format!("{name}.csv"));
    save_csv(rows, &path)?;
    let mut stdout = std::io::stdout().lock();
    nested_schur::bench::write_csv(rows, &mut stdout)?;
    eprintln!("wrote {}", path.display());
    Ok(rows.iter().all(CsvRow::ok))
}

fn run(verb: Verb, c: &BenchConfig) -> Result<bool, Error> {
    match verb {
        Verb::Table1 => emit(c, "table1", &run_table1(c)?),
        Verb::Table2 => emit(c, "table2", &run_table2(c)?),
        Verb::Table3 => emit(c, "table3", &run_table3(c)?),
        Verb::Table4 => emit(c, "table4", &run_table4(c)?),
        Verb::Ritz => {
            let spectra = run_ritz(c)?;
            let ok = emit(c, &format!("ritz_{}", mesh_label(c.ritz_mesh)), &ritz_rows(&spectra))?;
            for s in &spectra {
                println!(
                    "# {} {}: {} Ritz values, max|Im|/max|Re| = {:.3e}{}",
                    s.label,
                    mesh_label(s.mesh),
                    s.values.len(),
                    s.imaginary_ratio(),
                    if s.breakdown { " (Krylov space exhausted early)" } else { "" }
                );
            }
            Ok(ok)
        }
        Verb::DumpMatrices => {
            for &mesh in &c.meshes {
                for path in dump_matrices(c, mesh, &c.output_dir)? {
                    println!("{}", path.display());
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match configure(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match run(cli.verb, &config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some solves did not converge");
            ExitCode::from(2)
        }
        // Assembly and I/O problems are configuration errors; anything a
        // solver raises counts as a solver failure.
        Err(e @ (Error::Config(_) | Error::Io(_) | Error::InvalidGrid(_) | Error::InvalidMaterial(_) | Error::InvalidParameter(_) | Error::SizeCap { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("solver failure: {e}");
            ExitCode::from(2)
        }
    }
}
