use super::{axpy, dot, norm2, LinearOperator, SolveReport, Timer};
use crate::error::{check_dim, Error, Result};

/// Preconditioned conjugate gradients from `x = 0`.
///
/// Stops when the recurrence residual drops below `tol·‖b‖`; the reported
/// `final_residual` is recomputed from `x`. A nonpositive curvature `pᵀAp`
/// is an error.
pub fn cg(
    a: &dyn LinearOperator,
    precond: Option<&dyn LinearOperator>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let timer = Timer::start();
    let n = a.dim();
    check_dim("CG right-hand side", n, b.len())?;
    if let Some(m) = precond {
        check_dim("CG preconditioner", n, m.dim())?;
    }
    let mut report = SolveReport::default();
    let mut x = vec![0.0; n];
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        report.converged = true;
        report.residual_history.push(0.0);
        return Ok((x, report));
    }
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    let mut q = vec![0.0; n];
    let apply_m = |r: &[f64], z: &mut [f64]| -> Result<()> {
        match precond {
            Some(m) => m.apply(r, z),
            None => {
                z.copy_from_slice(r);
                Ok(())
            }
        }
    };
    apply_m(&r, &mut z)?;
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    report.residual_history.push(1.0);
    let mut rnorm = bnorm;
    while rnorm > tol * bnorm && report.iterations < max_iter {
        a.apply(&p, &mut q)?;
        report.matvecs += 1;
        report.iterations += 1;
        let curvature = dot(&p, &q);
        if !(curvature > 0.0) {
            return Err(Error::CgBreakdown {
                iteration: report.iterations,
                curvature,
            });
        }
        let alpha = rz / curvature;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        rnorm = norm2(&r);
        report.residual_history.push(rnorm / bnorm);
        if rnorm <= tol * bnorm {
            break;
        }
        apply_m(&r, &mut z)?;
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    report.converged = rnorm <= tol * bnorm;
    a.apply(&x, &mut q)?;
    report.matvecs += 1;
    let true_res: f64 = q
        .iter()
        .zip(b)
        .map(|(qi, bi)| (bi - qi).powi(2))
        .sum::<f64>()
        .sqrt();
    report.final_residual = true_res / bnorm;
    report.wall_time = timer.seconds();
    Ok((x, report))
}
