use super::{axpy, dot, norm2, LinearOperator, SolveReport, Timer, KAPPA_SLACK};
use crate::error::{check_dim, Error, Result};

const L: usize = 2;

/// BiCGstab(ℓ) with `ℓ = 2` (Sleijpen–Fokkema), right preconditioned: iterates
/// on `A M⁻¹` and returns `x = M⁻¹ x̃`, starting from `x = 0`.
///
/// `iterations` counts started cycles (each cycle is two BiCG steps plus a
/// degree-two minimal-residual polynomial, four operator applications);
/// `matvecs` counts applications of `A`. Convergence is tested after every
/// BiCG step and after each cycle. On a vanishing `ρ` or `σ` the method
/// restarts once from the current iterate with the current residual as the
/// new shadow vector; a second breakdown is an error.
pub fn bicgstab2(
    a: &dyn LinearOperator,
    precond: Option<&dyn LinearOperator>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let timer = Timer::start();
    let n = a.dim();
    check_dim("BiCGstab right-hand side", n, b.len())?;
    if let Some(m) = precond {
        check_dim("BiCGstab preconditioner", n, m.dim())?;
    }
    let mut report = SolveReport::default();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        report.converged = true;
        report.residual_history.push(0.0);
        return Ok((vec![0.0; n], report));
    }

    let mut tmp = vec![0.0; n];
    // y = A M⁻¹ x
    let mut op = |x: &[f64], y: &mut [f64], report: &mut SolveReport| -> Result<()> {
        report.matvecs += 1;
        match precond {
            Some(m) => {
                m.apply(x, &mut tmp)?;
                a.apply(&tmp, y)
            }
            None => a.apply(x, y),
        }
    };

    let mut xt = vec![0.0; n];
    let mut r: Vec<Vec<f64>> = vec![b.to_vec(); L + 1];
    let mut u: Vec<Vec<f64>> = vec![vec![0.0; n]; L + 1];
    let mut shadow = b.to_vec();
    let (mut rho0, mut alpha, mut omega) = (1.0f64, 0.0f64, 1.0f64);
    let mut restarted = false;
    report.residual_history.push(1.0);
    let mut rnorm = bnorm;

    'cycles: while rnorm > tol * bnorm && report.iterations < max_iter {
        report.iterations += 1;
        rho0 = -omega * rho0;
        let mut breakdown: Option<&'static str> = None;
        for j in 0..L {
            let rho1 = dot(&r[j], &shadow);
            if rho0 == 0.0 || !rho1.is_finite() || rho1 == 0.0 {
                breakdown = Some("rho vanished");
                break;
            }
            let beta = alpha * rho1 / rho0;
            rho0 = rho1;
            for i in 0..=j {
                for (uk, rk) in u[i].iter_mut().zip(&r[i]) {
                    *uk = rk - beta * *uk;
                }
            }
            let (lo, hi) = u.split_at_mut(j + 1);
            op(&lo[j], &mut hi[0], &mut report)?;
            let sigma = dot(&u[j + 1], &shadow);
            if sigma == 0.0 || !sigma.is_finite() {
                breakdown = Some("sigma vanished");
                break;
            }
            alpha = rho0 / sigma;
            for i in 0..=j {
                let (ui, ui1) = (&u[i + 1], &mut r[i]);
                axpy(-alpha, ui, ui1);
            }
            axpy(alpha, &u[0], &mut xt);
            rnorm = norm2(&r[0]);
            report.residual_history.push(rnorm / bnorm);
            if rnorm <= tol * bnorm {
                break 'cycles;
            }
            let (lo, hi) = r.split_at_mut(j + 1);
            op(&lo[j], &mut hi[0], &mut report)?;
        }
        if let Some(reason) = breakdown {
            if restarted {
                return Err(Error::BicgstabBreakdown {
                    cycle: report.iterations,
                    reason,
                });
            }
            restarted = true;
            op(&xt.clone(), &mut r[0], &mut report)?;
            for (ri, bi) in r[0].iter_mut().zip(b) {
                *ri = bi - *ri;
            }
            shadow = r[0].clone();
            rnorm = norm2(&r[0]);
            u.iter_mut().for_each(|v| v.iter_mut().for_each(|e| *e = 0.0));
            rho0 = 1.0;
            alpha = 0.0;
            omega = 1.0;
            continue;
        }

        // Minimal-residual part: orthogonalize r[1..=L] and combine.
        let mut tau = [[0.0f64; L + 1]; L + 1];
        let mut sig = [0.0f64; L + 1];
        let mut gp = [0.0f64; L + 1];
        for j in 1..=L {
            for i in 1..j {
                tau[i][j] = dot(&r[j], &r[i]) / sig[i];
                let (lo, hi) = r.split_at_mut(j);
                axpy(-tau[i][j], &lo[i], &mut hi[0]);
            }
            sig[j] = dot(&r[j], &r[j]);
            if sig[j] == 0.0 || !sig[j].is_finite() {
                return Err(Error::BicgstabBreakdown {
                    cycle: report.iterations,
                    reason: "minimal-residual step degenerate",
                });
            }
            gp[j] = dot(&r[0], &r[j]) / sig[j];
        }
        let mut g = [0.0f64; L + 1];
        g[L] = gp[L];
        omega = g[L];
        for j in (1..L).rev() {
            let mut s = gp[j];
            for i in j + 1..=L {
                s -= tau[j][i] * g[i];
            }
            g[j] = s;
        }
        let mut gpp = [0.0f64; L + 1];
        for j in 1..L {
            let mut s = g[j + 1];
            for i in j + 1..L {
                s += tau[j][i] * g[i + 1];
            }
            gpp[j] = s;
        }
        axpy(g[1], &r[0].clone(), &mut xt);
        {
            let (lo, hi) = r.split_at_mut(L);
            axpy(-gp[L], &hi[0], &mut lo[0]);
            let (ulo, uhi) = u.split_at_mut(L);
            axpy(-g[L], &uhi[0], &mut ulo[0]);
        }
        for j in 1..L {
            let (ulo, uhi) = u.split_at_mut(j);
            axpy(-g[j], &uhi[0], &mut ulo[0]);
            axpy(gpp[j], &r[j], &mut xt);
            let (rlo, rhi) = r.split_at_mut(j);
            axpy(-gp[j], &rhi[0], &mut rlo[0]);
        }
        rnorm = norm2(&r[0]);
        report.residual_history.push(rnorm / bnorm);
        if omega == 0.0 || !omega.is_finite() {
            return Err(Error::BicgstabBreakdown {
                cycle: report.iterations,
                reason: "omega vanished",
            });
        }
    }

    let x = finish(precond, &xt)?;
    a.apply(&x, &mut tmp)?;
    report.matvecs += 1;
    let true_res = tmp
        .iter()
        .zip(b)
        .map(|(t, b)| (b - t).powi(2))
        .sum::<f64>()
        .sqrt()
        / bnorm;
    report.final_residual = true_res;
    report.converged = rnorm <= tol * bnorm && true_res <= KAPPA_SLACK * tol;
    report.wall_time = timer.seconds();
    Ok((x, report))
}

fn finish(precond: Option<&dyn LinearOperator>, xt: &[f64]) -> Result<Vec<f64>> {
    match precond {
        Some(m) => m.apply_vec(xt),
        None => Ok(xt.to_vec()),
    }
}
