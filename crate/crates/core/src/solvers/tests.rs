use super::*;
use crate::bench::{build_problem, Problem, ProblemSpec, RngStream};
use crate::krylov::{gmres_restarted, norm2, relative_residual, LinearOperator};
use crate::sparse::{dense_solve, SparseMatrix};
use crate::yee::PhotonicCrystalScene;

const GAMMA: f64 = 0.012;

fn reference(cells: [usize; 3]) -> Problem {
    build_problem(&ProblemSpec::reference(cells)).unwrap()
}

fn vacuum_without_layer(cells: [usize; 3]) -> Problem {
    let mut spec = ProblemSpec::reference(cells);
    spec.scene = PhotonicCrystalScene::empty();
    spec.pml_thickness = [0.0; 3];
    build_problem(&spec).unwrap()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&d) / norm2(b)
}

#[test]
fn middle_solve_matches_dense_oracle_in_vacuum() {
    let p = vacuum_without_layer([4, 4, 4]);
    let gamma = 0.3;
    let mid = MiddleSolver::new(&p.op.blocks, gamma, MiddleMode::default()).unwrap();
    let c = RngStream::new(5).normal_vec(p.n());
    let x = mid.solve(&c).unwrap();
    let dense = p.op.blocks.assemble_shifted(gamma).to_dense();
    let exact = dense_solve(&dense, &c).unwrap();
    assert!(rel_err(&x, &exact) <= 1e-9);
}

#[test]
fn middle_solve_with_zero_gamma_is_identity() {
    let p = reference([6, 6, 4]);
    let mid = MiddleSolver::new(&p.op.blocks, 0.0, MiddleMode::default()).unwrap();
    let c = RngStream::new(1).normal_vec(p.n());
    let x = mid.solve(&c).unwrap();
    for (a, b) in x.iter().zip(&c) {
        assert_eq!(a, b);
    }
}

#[test]
fn middle_solve_residual_on_reference_scene() {
    let p = reference([10, 10, 6]);
    let mid = MiddleSolver::new(&p.op.blocks, GAMMA, MiddleMode::default()).unwrap();
    let c = RngStream::new(2).normal_vec(p.n());
    let x = mid.solve(&c).unwrap();
    let ia = p.op.blocks.assemble_shifted(GAMMA);
    assert!(relative_residual(&ia, &x, &c).unwrap() <= 1e-9);

    let lu = MiddleSolver::new(&p.op.blocks, GAMMA, MiddleMode::Lu).unwrap();
    let y = lu.solve(&c).unwrap();
    assert!(rel_err(&x, &y) <= 1e-9);
}

#[test]
fn bracket_matrix_is_symmetric_and_matches_schur_form() {
    let p = reference([6, 6, 4]);
    let b = &p.op.blocks;
    let s = bracket_matrix(b, GAMMA).unwrap();
    assert!(s.is_symmetric(0.0));
    let d1: Vec<f64> = b.m1.iter().map(|m| 1.0 / (1.0 + GAMMA * m)).collect();
    let mut rng = RngStream::new(9);
    for _ in 0..20 {
        let v = rng.normal_vec(b.n2());
        // I + γM2 + γ² K2ᵀ (I + γM1)⁻¹ K1
        let k1v = b.k1.spmv(&v).unwrap();
        let t: Vec<f64> = k1v.iter().zip(&d1).map(|(x, d)| x * d).collect();
        let k2t = b.k2t.spmv(&t).unwrap();
        let lhs: Vec<f64> = (0..b.n2())
            .map(|i| v[i] + GAMMA * b.m2[i] * v[i] + GAMMA * GAMMA * k2t[i])
            .collect();
        let sv = s.spmv(&v).unwrap();
        let rhs: Vec<f64> = sv.iter().zip(b.m_eps.diag()).map(|(x, e)| x / e).collect();
        assert!(rel_err(&lhs, &rhs) <= 1e-12);
    }
}

#[test]
fn outer_operator_matches_assembled_form() {
    let p = reference([6, 6, 4]);
    let outer = OuterOperator {
        blocks: &p.op.blocks,
        coupling: &p.op.coupling,
        gamma: GAMMA,
    };
    let t = outer.assemble().unwrap();
    let v = RngStream::new(4).normal_vec(p.n());
    let fast = outer.apply_vec(&v).unwrap();
    let slow = t.spmv(&v).unwrap();
    assert!(rel_err(&fast, &slow) <= 1e-13);
}

#[test]
fn nested_without_layer_reduces_to_middle_solve() {
    let p = vacuum_without_layer([6, 6, 4]);
    assert_eq!(p.m(), 0);
    let s = NestedSchurSolver::new(&p.op, GAMMA, OuterConfig::default(), MiddleMode::default()).unwrap();
    let b = RngStream::new(3).normal_vec(p.dim());
    let (_, rep) = s.solve_nested(&b).unwrap();
    assert!(rep.converged);
    assert!(rep.final_residual <= 1e-9);
    assert!(rep.iterations <= 2);
}

#[test]
fn nested_matches_dense_oracle() {
    let p = reference([4, 4, 4]);
    let s = NestedSchurSolver::new(&p.op, GAMMA, OuterConfig::default(), MiddleMode::default()).unwrap();
    let a = p.op.assemble_shifted(GAMMA).unwrap();
    let xs = RngStream::new(11).normal_vec(p.dim());
    let b = a.spmv(&xs).unwrap();
    let (x, rep) = s.solve_nested(&b).unwrap();
    assert!(rep.converged);
    let exact = dense_solve(&a.to_dense(), &b).unwrap();
    assert!(rel_err(&x, &exact) <= 1e-8);
    assert!(rel_err(&x, &xs) <= 1e-8);
}

#[test]
fn eliminations_add_no_error() {
    let p = reference([6, 6, 4]);
    let s = NestedSchurSolver::new(&p.op, GAMMA, OuterConfig::default(), MiddleMode::default()).unwrap();
    let b = RngStream::new(12).normal_vec(p.dim());
    let (x, _) = s.solve_nested(&b).unwrap();
    let n = p.n();
    // Outer residual of x1 against the reduced right-hand side.
    let mut b1 = b[..n].to_vec();
    p.op.coupling.b1t.mul_vec_add(-GAMMA, &b[n..], &mut b1);
    let r_outer = {
        let t = s.outer_operator().apply_vec(&x[..n]).unwrap();
        let r: Vec<f64> = t.iter().zip(&b1).map(|(t, b)| b - t).collect();
        r
    };
    let full = ShiftedExtended { op: &p.op, gamma: GAMMA }.apply_vec(&x).unwrap();
    let r_full: Vec<f64> = full.iter().zip(&b).map(|(a, b)| b - a).collect();
    // The field rows of the full residual equal the outer residual and the
    // auxiliary rows vanish.
    let scale = norm2(&b);
    for i in 0..n {
        assert!((r_full[i] - r_outer[i]).abs() <= 1e-12 * scale);
    }
    assert!(norm2(&r_full[n..]) <= 1e-12 * scale);
}

#[test]
fn fs_factors_sum_to_extended_operator() {
    let p = reference([6, 6, 4]);
    let gamma = 0.5;
    let (f1, f2) = fs_factor_matrices(&p.op, gamma).unwrap();
    let id = SparseMatrix::identity(p.dim());
    // (I + γ𝒜₁) + (I + γ𝒜₂) − I = I + γ𝒜
    let sum = f1.add(&f2).unwrap().sub(&id).unwrap();
    let whole = p.op.assemble_shifted(gamma).unwrap();
    assert_eq!(sum.sub(&whole).unwrap().max_abs(), 0.0);
    // (I + γ𝒜₁)(I + γ𝒜₂) = I + γ𝒜 + γ²𝒜₁𝒜₂
    let a1 = f1.sub(&id).unwrap().scale(1.0 / gamma);
    let a2 = f2.sub(&id).unwrap().scale(1.0 / gamma);
    let prod = f1.matmul(&f2).unwrap();
    let expected = whole.add_scaled(1.0, &a1.matmul(&a2).unwrap(), gamma * gamma).unwrap();
    let diff = prod.sub(&expected).unwrap().max_abs();
    assert!(diff <= 1e-13 * expected.max_abs(), "{diff}");
}

#[test]
fn fs_is_identity_without_coupling_or_shift() {
    let p = vacuum_without_layer([4, 4, 4]);
    let fs = FsPreconditioner::new(&p.op, 0.0, FsOrdering::Natural).unwrap();
    let v = RngStream::new(6).normal_vec(p.dim());
    assert_eq!(fs.apply_vec(&v).unwrap(), v);
}

#[test]
fn fs_orderings_agree_and_block_order_has_no_fill() {
    let p = reference([10, 10, 6]);
    let blocks = FsPreconditioner::new(&p.op, GAMMA, FsOrdering::FieldBlocks).unwrap();
    assert_eq!(blocks.fill_ratios(), (1.0, 1.0));
    let natural = FsPreconditioner::new(&p.op, GAMMA, FsOrdering::Natural).unwrap();
    let v = RngStream::new(7).normal_vec(p.dim());
    let a = blocks.apply_vec(&v).unwrap();
    let b = natural.apply_vec(&v).unwrap();
    assert!(rel_err(&a, &b) <= 1e-12);
}

#[test]
fn fs_solve_matches_dense_oracle() {
    let p = reference([4, 4, 4]);
    let fs = FsPreconditioner::new(&p.op, GAMMA, FsOrdering::FieldBlocks).unwrap();
    let a = p.op.assemble_shifted(GAMMA).unwrap();
    let b = RngStream::new(8).normal_vec(p.dim());
    let (x, rep) = solve_fs(&p.op, &fs, &b, 1e-12, 200).unwrap();
    assert!(rep.converged);
    let exact = dense_solve(&a.to_dense(), &b).unwrap();
    assert!(rel_err(&x, &exact) <= 1e-8);
}

#[test]
fn ideal_preconditioner_with_zero_gamma_is_identity() {
    let p = reference([4, 4, 4]);
    let ideal = ideal_schur_preconditioner(&p.op, 0.0).unwrap();
    let shifted = ShiftedExtended { op: &p.op, gamma: 0.0 };
    let b = RngStream::new(10).normal_vec(p.dim());
    let (_, rep) = gmres_restarted(&shifted, Some(&ideal), &b, 50, 1e-10, 50).unwrap();
    assert_eq!(rep.iterations, 1);
    assert!(rep.converged);
}

#[test]
fn ideal_preconditioner_refuses_large_meshes() {
    let p = reference([20, 20, 12]);
    assert!(ideal_schur_preconditioner(&p.op, GAMMA).is_err());
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn small_problem(cells: [usize; 3], pml_cells: usize, multiplier: f64) -> Problem {
        let mut spec = ProblemSpec::reference(cells);
        let h = [5.0 / cells[0] as f64, 5.0 / cells[1] as f64];
        spec.pml_thickness = [pml_cells as f64 * h[0], pml_cells as f64 * h[1], 0.0];
        spec.pml.multiplier = multiplier;
        build_problem(&spec).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn coupling_splits_and_product_formula_hold(
            nx in 2usize..7, ny in 2usize..7, nz in 1usize..5,
            multiplier in 0.5f64..50.0,
        ) {
            let p = small_problem([nx, ny, nz], 1, multiplier);
            let c = &p.op.coupling;
            prop_assert_eq!(&c.b1_h.add(&c.b1_e).unwrap(), &c.b1);
            prop_assert_eq!(&c.b2_h.add(&c.b2_e).unwrap(), &c.b2);
            let diff = c.product().unwrap().sub(&c.product_formula(&p.op.blocks).unwrap()).unwrap();
            prop_assert!(diff.max_abs() <= 1e-14 * (1.0 + c.product().unwrap().max_abs()));
        }

        #[test]
        fn fs_factors_always_sum_to_the_operator(
            nx in 2usize..6, ny in 2usize..6, nz in 1usize..4,
            gamma in 0.0f64..1.0,
        ) {
            let p = small_problem([nx, ny, nz], 1, 10.0);
            let (f1, f2) = fs_factor_matrices(&p.op, gamma).unwrap();
            let sum = f1.add(&f2).unwrap().sub(&SparseMatrix::identity(p.dim())).unwrap();
            let whole = p.op.assemble_shifted(gamma).unwrap();
            prop_assert!(sum.sub(&whole).unwrap().max_abs() <= 1e-13 * whole.max_abs());
        }

        #[test]
        fn nested_solution_has_small_true_residual(
            nx in 3usize..6, ny in 3usize..6, nz in 2usize..4,
            gamma in 0.001f64..0.05, seed in 0u64..1000,
        ) {
            let p = small_problem([nx, ny, nz], 1, 10.0);
            let s = NestedSchurSolver::new(&p.op, gamma, OuterConfig::default(), MiddleMode::default()).unwrap();
            let b = RngStream::new(seed).normal_vec(p.dim());
            let (x, rep) = s.solve_nested(&b).unwrap();
            prop_assert!(rep.converged);
            let a = ShiftedExtended { op: &p.op, gamma };
            let r = relative_residual(&a, &x, &b).unwrap();
            prop_assert!((r - rep.final_residual).abs() <= 1e-14);
            prop_assert!(r <= 1e-10 * crate::krylov::KAPPA_SLACK);
        }
    }
}
