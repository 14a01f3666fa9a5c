//! Restarted GMRES with modified Gram-Schmidt Arnoldi and Givens rotations.

use super::{Mode, SolveObserver, SolveReport, SolverConfig, StopReason, Telemetry};
use crate::csr::CsrMatrix;
use crate::error::{Error, Result};
use crate::kernels::{axpy_into, dot, norm2, sub};

/// Solves A x = b by GMRES.
///
/// `restart_len = 0` runs full GMRES; otherwise the Krylov basis is capped at
/// `restart_len` and the method restarts from the current iterate. Between
/// restarts the recorded residual norm is the Givens-recurrence estimate; the
/// true residual is recomputed (and the last record resynced) at every restart
/// and at exit. A subdiagonal below `1e-14 ||b||` signals an exact solve.
pub fn gmres_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    cfg: &SolverConfig,
    restart_len: usize,
    observer: &mut dyn SolveObserver,
) -> Result<SolveReport> {
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(Error::NotSquare {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
        });
    }
    if b.len() != n || x0.len() != n {
        return Err(Error::DimensionMismatch {
            context: "gmres_solve",
            expected: n,
            got: if b.len() != n { b.len() } else { x0.len() },
        });
    }
    cfg.validate()?;
    if restart_len > cfg.max_iter {
        return Err(Error::InvalidParameter(format!(
            "restart length {restart_len} exceeds the iteration budget {}",
            cfg.max_iter
        )));
    }

    let b_norm = norm2(b);
    let happy_tol = 1e-14 * b_norm;
    let mut x = x0.to_vec();
    let mut r = sub(b, &a.spmv(&x)?);
    let r0_norm = norm2(&r);
    let mut telemetry = Telemetry::new(b, r0_norm, observer);
    telemetry.emit(0, r0_norm, &x);

    let threshold = cfg.tol * if b_norm > 0.0 { b_norm } else { r0_norm };
    if (cfg.mode == Mode::Converge && r0_norm <= threshold) || r0_norm == 0.0 {
        return Ok(SolveReport {
            records: telemetry.records,
            final_iterate: x,
            converged: true,
            iterations: 0,
            stop_reason: StopReason::Tolerance,
        });
    }

    let mut k_total = 0usize;
    let mut converged = false;
    let mut stop = StopReason::Budget;

    'outer: while k_total < cfg.max_iter {
        let r_norm = norm2(&r);
        if r_norm == 0.0 {
            converged = true;
            stop = StopReason::Tolerance;
            break;
        }
        let cycle = if restart_len > 0 {
            restart_len.min(cfg.max_iter - k_total)
        } else {
            cfg.max_iter - k_total
        };

        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cycle + 1);
        basis.push(r.iter().map(|v| v / r_norm).collect());
        // Rotated Hessenberg columns (upper triangular R) and rotations.
        let mut r_cols: Vec<Vec<f64>> = Vec::with_capacity(cycle);
        let mut cos: Vec<f64> = Vec::with_capacity(cycle);
        let mut sin: Vec<f64> = Vec::with_capacity(cycle);
        let mut g = vec![0.0; cycle + 1];
        g[0] = r_norm;

        let mut happy = false;
        let mut hit_tol = false;
        for j in 0..cycle {
            let mut w = a.spmv(&basis[j])?;
            let mut h = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                h[i] = dot(v, &w);
                axpy_into(-h[i], v, &mut w);
            }
            let h_next = norm2(&w);
            if !h_next.is_finite() {
                let report = SolveReport {
                    records: telemetry.records,
                    final_iterate: x,
                    converged: false,
                    iterations: k_total + 1,
                    stop_reason: StopReason::Breakdown,
                };
                return Err(Error::Breakdown {
                    iteration: k_total + 1,
                    detail: "non-finite Arnoldi subdiagonal".into(),
                    report: Box::new(report),
                });
            }
            happy = h_next <= happy_tol;
            if !happy {
                basis.push(w.iter().map(|v| v / h_next).collect());
            }
            h[j + 1] = h_next;

            for i in 0..j {
                let t = cos[i] * h[i] + sin[i] * h[i + 1];
                h[i + 1] = -sin[i] * h[i] + cos[i] * h[i + 1];
                h[i] = t;
            }
            let denom = (h[j] * h[j] + h[j + 1] * h[j + 1]).sqrt();
            let (c, s) = if denom == 0.0 {
                (1.0, 0.0)
            } else {
                (h[j] / denom, h[j + 1] / denom)
            };
            cos.push(c);
            sin.push(s);
            h[j] = denom;
            h[j + 1] = 0.0;
            g[j + 1] = -s * g[j];
            g[j] *= c;
            r_cols.push(h);

            k_total += 1;
            let estimate = g[j + 1].abs();

            // Form the iterate for telemetry: x_k = x + V y.
            let y = solve_upper(&r_cols, &g, j + 1);
            let mut xk = x.clone();
            for (i, yi) in y.iter().enumerate() {
                axpy_into(*yi, &basis[i], &mut xk);
            }
            telemetry.emit(k_total, estimate, &xk);

            let at_budget = k_total >= cfg.max_iter;
            hit_tol = cfg.mode == Mode::Converge && estimate <= threshold;
            if happy || hit_tol || at_budget {
                x = xk;
                break;
            }
            if j + 1 == cycle {
                x = xk;
            }
        }

        // True-residual resync at the cycle boundary.
        r = sub(b, &a.spmv(&x)?);
        let true_norm = norm2(&r);
        telemetry.resync_last(true_norm);

        if happy {
            converged = true;
            stop = StopReason::Tolerance;
            break 'outer;
        }
        if cfg.mode == Mode::Converge && true_norm <= threshold {
            converged = true;
            stop = StopReason::Tolerance;
            break 'outer;
        }
        if hit_tol {
            // Estimate passed but the true residual did not; keep iterating.
            continue;
        }
        if k_total >= cfg.max_iter {
            break;
        }
    }

    if !converged {
        converged = telemetry
            .records
            .last()
            .is_some_and(|rec| rec.residual_norm <= threshold);
        if converged {
            stop = StopReason::Tolerance;
        }
    }
    Ok(SolveReport {
        records: telemetry.records,
        final_iterate: x,
        converged,
        iterations: k_total,
        stop_reason: stop,
    })
}

/// Back substitution on the rotated Hessenberg columns.
fn solve_upper(r_cols: &[Vec<f64>], g: &[f64], size: usize) -> Vec<f64> {
    let mut y = vec![0.0; size];
    for i in (0..size).rev() {
        let mut sum = g[i];
        for j in i + 1..size {
            sum -= r_cols[j][i] * y[j];
        }
        y[i] = sum / r_cols[i][i];
    }
    y
}
