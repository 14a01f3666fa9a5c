//! Conjugate gradient solver, optionally preconditioned.

use super::{
    Mode, Preconditioner, SolveObserver, SolveReport, SolverConfig, StopReason, Telemetry,
};
use crate::csr::CsrMatrix;
use crate::error::{Error, Result};
use crate::kernels::{axpy_into, dot, norm2, sub};

/// Solves A x = b for SPD A.
///
/// The unpreconditioned path is the textbook three-term recurrence with an
/// early-exit residual check after each update. With a preconditioner the
/// residual transform z_k = C r_k enters the initial direction and every
/// beta/alpha inner product as (r, z). In `FixedBudget` mode the loop runs
/// exactly `max_iter` iterations (stopping early only on an exactly zero
/// residual, which admits no further step).
pub fn cg_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    cfg: &SolverConfig,
    precond: Option<&dyn Preconditioner>,
    observer: &mut dyn SolveObserver,
) -> Result<SolveReport> {
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(Error::NotSquare {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
        });
    }
    check_dims(n, b.len(), "cg rhs")?;
    cfg.validate()?;
    check_dims(n, x0.len(), "cg initial guess")?;
    if cfg.check_symmetry {
        let tol = 1e-12;
        if !a.is_symmetric(tol)? {
            return Err(Error::NotSymmetric {
                max_diff: f64::NAN,
                tol,
            });
        }
    }

    let b_norm = norm2(b);
    let mut x = x0.to_vec();
    let mut r = sub(b, &a.spmv(&x)?);
    let r0_norm = norm2(&r);
    let mut telemetry = Telemetry::new(b, r0_norm, observer);
    telemetry.emit(0, r0_norm, &x);

    let threshold = cfg.tol * if b_norm > 0.0 { b_norm } else { r0_norm };
    if r0_norm <= threshold && cfg.mode == Mode::Converge {
        return Ok(finish(telemetry, x, 0, StopReason::Tolerance, true));
    }
    if r0_norm == 0.0 {
        return Ok(finish(telemetry, x, 0, StopReason::Tolerance, true));
    }

    let apply_c = |r: &[f64]| -> Vec<f64> {
        match precond {
            Some(p) => p.apply(r),
            None => r.to_vec(),
        }
    };

    let mut z = apply_c(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    telemetry.on_search_direction(0, &p);

    let mut ap = vec![0.0; n];
    let mut k = 0usize;
    let mut stop = StopReason::Budget;
    while k < cfg.max_iter {
        a.spmv_into(&p, &mut ap)?;
        let pap = dot(&p, &ap);
        if !pap.is_finite() || pap <= 0.0 {
            return Err(breakdown(
                k + 1,
                format!("nonpositive curvature p'Ap = {pap:e}"),
                telemetry,
                x,
            ));
        }
        let alpha = rz / pap;
        axpy_into(alpha, &p, &mut x);
        axpy_into(-alpha, &ap, &mut r);
        let r_norm = norm2(&r);
        if !r_norm.is_finite() {
            return Err(breakdown(k + 1, "non-finite residual".into(), telemetry, x));
        }
        k += 1;
        telemetry.emit(k, r_norm, &x);

        if cfg.mode == Mode::Converge && r_norm <= threshold {
            stop = StopReason::Tolerance;
            break;
        }
        if r_norm == 0.0 {
            stop = StopReason::Tolerance;
            break;
        }
        if k == cfg.max_iter {
            break;
        }

        z = apply_c(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        telemetry.on_search_direction(k, &p);
    }

    let converged = telemetry
        .records
        .last()
        .is_some_and(|rec| rec.residual_norm <= threshold);
    Ok(finish(telemetry, x, k, stop, converged))
}

fn check_dims(expected: usize, got: usize, context: &'static str) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        });
    }
    Ok(())
}

fn finish(
    telemetry: Telemetry<'_>,
    x: Vec<f64>,
    iterations: usize,
    stop_reason: StopReason,
    converged: bool,
) -> SolveReport {
    SolveReport {
        records: telemetry.records,
        final_iterate: x,
        converged,
        iterations,
        stop_reason,
    }
}

fn breakdown(iteration: usize, detail: String, telemetry: Telemetry<'_>, x: Vec<f64>) -> Error {
    let mut report = finish(telemetry, x, iteration, StopReason::Breakdown, false);
    report.iterations = iteration;
    Error::Breakdown {
        iteration,
        detail,
        report: Box::new(report),
    }
}
