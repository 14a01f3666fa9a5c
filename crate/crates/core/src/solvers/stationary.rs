//! Stationary iterations: relaxed Jacobi, Gauss-Seidel sweeps and SOR.

use super::{Mode, SolveObserver, SolveReport, SolverConfig, StopReason, Telemetry};
use crate::csr::CsrMatrix;
use crate::error::{Error, Result};
use crate::kernels::{norm2, sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StationaryMethod {
    /// u += rho D^-1 r per sweep.
    Jacobi {
        rho: f64,
    },
    GaussSeidelForward,
    GaussSeidelBackward,
    /// Forward sweep with relaxation omega in (0, 2).
    Sor {
        omega: f64,
    },
}

impl StationaryMethod {
    fn validate(&self) -> Result<()> {
        match *self {
            StationaryMethod::Jacobi { rho } => {
                if !(rho > 0.0 && rho <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "jacobi relaxation must satisfy 0 < rho <= 1, got {rho}"
                    )));
                }
            }
            StationaryMethod::Sor { omega } if !(omega > 0.0 && omega < 2.0) => {
                return Err(Error::InvalidParameter(format!(
                    "sor relaxation must satisfy 0 < omega < 2, got {omega}"
                )));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            StationaryMethod::Jacobi { .. } => "jacobi",
            StationaryMethod::GaussSeidelForward => "gs_forward",
            StationaryMethod::GaussSeidelBackward => "gs_backward",
            StationaryMethod::Sor { .. } => "sor",
        }
    }
}

enum SweepDirection {
    Forward,
    Backward,
}

/// Runs one stationary method; one record per sweep.
pub fn stationary_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    method: StationaryMethod,
    cfg: &SolverConfig,
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
            context: "stationary_solve",
            expected: n,
            got: if b.len() != n { b.len() } else { x0.len() },
        });
    }
    method.validate()?;
    cfg.validate()?;

    let diag = a.diagonal();
    for (row, &d) in diag.iter().enumerate() {
        if d == 0.0 {
            return Err(Error::ZeroDiagonal { row });
        }
    }

    let b_norm = norm2(b);
    let mut x = x0.to_vec();
    let mut r = sub(b, &a.spmv(&x)?);
    let r0_norm = norm2(&r);
    let mut telemetry = Telemetry::new(b, r0_norm, observer);
    telemetry.emit(0, r0_norm, &x);

    let threshold = cfg.tol * if b_norm > 0.0 { b_norm } else { r0_norm };
    if cfg.mode == Mode::Converge && r0_norm <= threshold {
        return Ok(SolveReport {
            records: telemetry.records,
            final_iterate: x,
            converged: true,
            iterations: 0,
            stop_reason: StopReason::Tolerance,
        });
    }

    let mut k = 0usize;
    let mut stop = StopReason::Budget;
    while k < cfg.max_iter {
        match method {
            StationaryMethod::Jacobi { rho } => {
                for i in 0..n {
                    x[i] += rho * (r[i] / diag[i]);
                }
            }
            StationaryMethod::GaussSeidelForward => {
                relaxed_sweep(a, b, &diag, &mut x, 1.0, SweepDirection::Forward);
            }
            StationaryMethod::GaussSeidelBackward => {
                relaxed_sweep(a, b, &diag, &mut x, 1.0, SweepDirection::Backward);
            }
            StationaryMethod::Sor { omega } => {
                relaxed_sweep(a, b, &diag, &mut x, omega, SweepDirection::Forward);
            }
        }
        r = sub(b, &a.spmv(&x)?);
        let r_norm = norm2(&r);
        if !r_norm.is_finite() {
            let report = SolveReport {
                records: telemetry.records,
                final_iterate: x,
                converged: false,
                iterations: k + 1,
                stop_reason: StopReason::Breakdown,
            };
            return Err(Error::Breakdown {
                iteration: k + 1,
                detail: "non-finite residual".into(),
                report: Box::new(report),
            });
        }
        k += 1;
        telemetry.emit(k, r_norm, &x);
        if cfg.mode == Mode::Converge && r_norm <= threshold {
            stop = StopReason::Tolerance;
            break;
        }
    }

    let converged = telemetry
        .records
        .last()
        .is_some_and(|rec| rec.residual_norm <= threshold);
    Ok(SolveReport {
        records: telemetry.records,
        final_iterate: x,
        converged,
        iterations: k,
        stop_reason: stop,
    })
}

/// In-place relaxed triangular sweep; omega = 1 is plain Gauss-Seidel, so
/// SOR(1) and Gauss-Seidel histories are bitwise identical by construction.
fn relaxed_sweep(
    a: &CsrMatrix,
    b: &[f64],
    diag: &[f64],
    x: &mut [f64],
    omega: f64,
    direction: SweepDirection,
) {
    let n = x.len();
    let mut order: Box<dyn Iterator<Item = usize>> = match direction {
        SweepDirection::Forward => Box::new(0..n),
        SweepDirection::Backward => Box::new((0..n).rev()),
    };
    let one_minus_omega = 1.0 - omega;
    for i in &mut order {
        let (cols, vals) = a.row(i);
        let mut sigma = b[i];
        for (&c, &v) in cols.iter().zip(vals) {
            if c != i {
                sigma -= v * x[c];
            }
        }
        x[i] = one_minus_omega * x[i] + omega * (sigma / diag[i]);
    }
}
