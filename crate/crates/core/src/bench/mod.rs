//! Photonic-crystal benchmark problems and experiment drivers.

pub mod config;
pub mod problem;
pub mod rng;
pub mod tables;

pub use config::{parse_mesh, BenchConfig, ExactMiddle, AUTO_LU_LIMIT};
pub use problem::{build_problem, Problem, ProblemSpec};
pub use rng::RngStream;
pub use tables::{
    dump_matrices, mesh_label, random_rhs, ritz_rows, run_ritz, run_table1, run_table2, run_table3, run_table4,
    save_csv, table2_row, table3_row, table4_rows, write_csv, CsvRow, Method, RitzRow, RitzSpectrum, Table1Row,
    Table2Row, Table3Row, Table4Row,
};
