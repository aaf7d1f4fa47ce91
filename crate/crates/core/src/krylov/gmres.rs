use super::{axpy, dot, norm2, LinearOperator, SolveReport, Timer, KAPPA_SLACK};
use crate::error::{check_dim, Error, Result};

/// Restarted GMRES with right preconditioning: iterates on `A M⁻¹` and
/// returns `x = M⁻¹ x̃`, starting from `x = 0`.
///
/// Orthogonalization is modified Gram–Schmidt; the least-squares problem is
/// updated with Givens rotations. The preconditioned directions `M⁻¹ v_j` are
/// kept, so each step applies `M⁻¹` exactly once. Pass `restart >= max_iter`
/// for unrestarted GMRES.
///
/// Returns the last iterate with `converged = false` when `max_iter` steps
/// are exhausted.
pub fn gmres_restarted(
    a: &dyn LinearOperator,
    precond: Option<&dyn LinearOperator>,
    b: &[f64],
    restart: usize,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let timer = Timer::start();
    let n = a.dim();
    check_dim("GMRES right-hand side", n, b.len())?;
    if let Some(m) = precond {
        check_dim("GMRES preconditioner", n, m.dim())?;
    }
    if restart == 0 {
        return Err(Error::InvalidParameter("GMRES restart must be at least 1".into()));
    }
    let mut report = SolveReport::default();
    let mut x = vec![0.0; n];
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        report.converged = true;
        report.residual_history.push(0.0);
        report.wall_time = timer.seconds();
        return Ok((x, report));
    }

    let mut r = b.to_vec();
    let mut beta = bnorm;
    report.residual_history.push(1.0);
    let mut w = vec![0.0; n];
    loop {
        if beta / bnorm <= tol {
            report.converged = true;
            break;
        }
        if report.iterations >= max_iter {
            break;
        }
        report.cycles += 1;
        let steps = restart.min(max_iter - report.iterations);
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(steps);
        // Column j of the Hessenberg matrix, rotated in place.
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(steps);
        let mut cs: Vec<(f64, f64)> = Vec::with_capacity(steps);
        let mut g = vec![0.0; steps + 1];
        g[0] = beta;
        v.push(r.iter().map(|ri| ri / beta).collect());
        let mut estimate_converged = false;
        for j in 0..steps {
            let zj = match precond {
                Some(m) => m.apply_vec(&v[j])?,
                None => v[j].clone(),
            };
            a.apply(&zj, &mut w)?;
            report.matvecs += 1;
            report.iterations += 1;
            z.push(zj);
            let mut col = vec![0.0; j + 2];
            for (i, vi) in v.iter().enumerate() {
                let hij = dot(&w, vi);
                col[i] = hij;
                axpy(-hij, vi, &mut w);
            }
            let hnext = norm2(&w);
            col[j + 1] = hnext;
            for (i, &(c, s)) in cs.iter().enumerate() {
                let (a0, a1) = (col[i], col[i + 1]);
                col[i] = c * a0 + s * a1;
                col[i + 1] = -s * a0 + c * a1;
            }
            let (c, s) = givens(col[j], col[j + 1]);
            col[j] = c * col[j] + s * col[j + 1];
            col[j + 1] = 0.0;
            g[j + 1] = -s * g[j];
            g[j] *= c;
            cs.push((c, s));
            h.push(col);
            let est = g[j + 1].abs() / bnorm;
            report.residual_history.push(est);
            // Happy breakdown: the Krylov space is invariant.
            let breakdown = hnext <= 1e-14 * h[j][j].abs().max(f64::MIN_POSITIVE);
            if est <= tol || breakdown {
                estimate_converged = true;
                break;
            }
            if j + 1 < steps {
                v.push(w.iter().map(|wi| wi / hnext).collect());
            }
        }
        let k = h.len();
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for (l, yl) in y.iter().enumerate().skip(i + 1) {
                s -= h[l][i] * yl;
            }
            if h[i][i] == 0.0 {
                return Err(Error::Singular { column: i });
            }
            y[i] = s / h[i][i];
        }
        for (zi, yi) in z.iter().zip(&y) {
            axpy(*yi, zi, &mut x);
        }
        a.apply(&x, &mut w)?;
        report.matvecs += 1;
        for ((ri, bi), wi) in r.iter_mut().zip(b).zip(&w) {
            *ri = bi - wi;
        }
        beta = norm2(&r);
        if estimate_converged && beta / bnorm <= KAPPA_SLACK * tol {
            report.converged = true;
            break;
        }
    }
    report.final_residual = beta / bnorm;
    report.wall_time = timer.seconds();
    Ok((x, report))
}

/// Rotation `(c, s)` with `[c s; -s c] [a; b] = [r; 0]`.
fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else if a == 0.0 {
        (0.0, 1.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}
