//! Nested Schur complement solver, field-splitting preconditioner and the
//! exact block-diagonal Schur preconditioner.

mod fs;
mod ideal;
mod middle;
mod nested;

pub use fs::{fs_factor_matrices, solve_fs, FsOrdering, FsPreconditioner, PermutedLu};
pub use ideal::{ideal_schur_preconditioner, IdealSchurPreconditioner, IDEAL_SCHUR_CAP};
pub use middle::{bracket_matrix, Ic0Operator, InnerStats, LuOperator, MiddleMode, MiddleSolver, MIDDLE_LU_CAP};
pub use nested::{NestedSchurSolver, OuterConfig, OuterOperator, ShiftedExtended};

#[cfg(test)]
mod tests;
