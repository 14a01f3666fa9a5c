//! Extreme-eigenvalue estimation for SPD matrices.
//!
//! The largest eigenvalue comes from a Lanczos iteration with full
//! reorthogonalization; the smallest from inverse iteration with a dense
//! Cholesky inner solve at desk scale and an inner CG solve above it. Dense
//! symmetric eigensolves and singular values (used as oracles and for
//! desk-scale spectrum studies) are delegated to nalgebra.

use crate::csr::CsrMatrix;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::kernels::{axpy_into, dot, norm2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dimension limit for the dense-Cholesky inner solve of inverse iteration.
const DENSE_INVERSE_LIMIT: usize = 1024;
/// Fixed seed for the deterministic start vectors.
const START_SEED: u64 = 0x1d5e_ed00;

/// Spectrum summary of an SPD matrix.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumEstimate {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kappa: f64,
    pub converged: bool,
    pub iterations_used: usize,
}

impl SpectrumEstimate {
    pub fn new(
        lambda_min: f64,
        lambda_max: f64,
        converged: bool,
        iterations_used: usize,
    ) -> Result<Self> {
        if !(lambda_min > 0.0 && lambda_min <= lambda_max) {
            return Err(Error::NotSpd {
                detail: format!("estimated extreme eigenvalues [{lambda_min:e}, {lambda_max:e}]"),
            });
        }
        Ok(SpectrumEstimate {
            lambda_min,
            lambda_max,
            kappa: lambda_max / lambda_min,
            converged,
            iterations_used,
        })
    }
}

/// Estimates the extreme eigenvalues and condition number of an SPD matrix.
///
/// Non-convergence within `max_iter` returns the partial estimate with
/// `converged == false`; a detected nonpositive smallest eigenvalue is an
/// error.
pub fn extreme_eigenvalues(
    a: &CsrMatrix,
    rel_tol: f64,
    max_iter: usize,
) -> Result<SpectrumEstimate> {
    if a.n_rows() != a.n_cols() {
        return Err(Error::NotSquare {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
        });
    }
    if !(rel_tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidParameter(
            "extreme_eigenvalues requires rel_tol > 0 and max_iter >= 1".into(),
        ));
    }
    let (lambda_max, max_its, max_conv) = lanczos_largest(a, rel_tol, max_iter)?;
    let (lambda_min, min_its, min_conv) = inverse_iteration_smallest(a, rel_tol, max_iter)?;
    SpectrumEstimate::new(
        lambda_min,
        lambda_max,
        max_conv && min_conv,
        max_its + min_its,
    )
}

fn unit_start_vector(n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
    let nv = norm2(&v);
    for vi in &mut v {
        *vi /= nv;
    }
    v
}

/// Lanczos with full reorthogonalization for the largest eigenvalue.
///
/// Stops when the largest Ritz value is stable to `rel_tol` over three
/// consecutive steps or the recurrence breaks down (exact invariant subspace).
fn lanczos_largest(a: &CsrMatrix, rel_tol: f64, max_iter: usize) -> Result<(f64, usize, bool)> {
    let n = a.n_rows();
    let budget = max_iter.min(n);
    let mut basis: Vec<Vec<f64>> = vec![unit_start_vector(n)];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut theta_prev = f64::NAN;
    let mut stable = 0usize;
    let mut theta = 0.0;

    for k in 0..budget {
        let v = basis.last().unwrap().clone();
        let mut w = a.spmv(&v)?;
        let alpha = dot(&v, &w);
        alphas.push(alpha);
        axpy_into(-alpha, &v, &mut w);
        if let Some(beta_prev) = betas.last() {
            let prev = &basis[basis.len() - 2];
            axpy_into(-beta_prev, prev, &mut w);
        }
        for u in &basis {
            let proj = dot(u, &w);
            axpy_into(-proj, u, &mut w);
        }
        let beta = norm2(&w);
        if !beta.is_finite() {
            return Err(Error::Breakdown {
                iteration: k,
                detail: "non-finite Lanczos recurrence".into(),
                report: Box::new(crate::solvers::SolveReport::empty()),
            });
        }

        theta = tridiagonal_largest_eigenvalue(&alphas, &betas);
        if (theta - theta_prev).abs() <= rel_tol * theta.abs() {
            stable += 1;
        } else {
            stable = 0;
        }
        theta_prev = theta;

        if beta <= 1e-12 * theta.abs().max(1.0) {
            // Invariant subspace reached; the Ritz value is exact.
            return Ok((theta, k + 1, true));
        }
        if stable >= 3 {
            return Ok((theta, k + 1, true));
        }
        betas.push(beta);
        let next: Vec<f64> = w.iter().map(|x| x / beta).collect();
        basis.push(next);
    }
    let converged = budget == n;
    Ok((theta, budget, converged))
}

/// Largest eigenvalue of the symmetric tridiagonal matrix given by `alphas`
/// (diagonal) and `betas` (off-diagonal), by Sturm-sequence bisection.
fn tridiagonal_largest_eigenvalue(alphas: &[f64], betas: &[f64]) -> f64 {
    let k = alphas.len();
    debug_assert_eq!(betas.len() + 1, k);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let left = if i > 0 { betas[i - 1].abs() } else { 0.0 };
        let right = if i < k - 1 { betas[i].abs() } else { 0.0 };
        lo = lo.min(alphas[i] - left - right);
        hi = hi.max(alphas[i] + left + right);
    }
    if k == 1 {
        return alphas[0];
    }
    // Count of eigenvalues below x via the Sturm sequence of the
    // shifted tridiagonal.
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut d = alphas[0] - x;
        if d < 0.0 {
            count += 1;
        }
        for i in 1..k {
            let off2 = betas[i - 1] * betas[i - 1];
            let denom = if d == 0.0 { 1e-300 } else { d };
            d = (alphas[i] - x) - off2 / denom;
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let span = (hi - lo).max(1e-300);
    let (mut lo, mut hi) = (lo - 1e-12 * span, hi + 1e-12 * span);
    // Largest eigenvalue: bisection for the point with k-1 eigenvalues below.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Inverse iteration for the smallest eigenvalue.
fn inverse_iteration_smallest(
    a: &CsrMatrix,
    rel_tol: f64,
    max_iter: usize,
) -> Result<(f64, usize, bool)> {
    let n = a.n_rows();
    let factor = if n <= DENSE_INVERSE_LIMIT {
        Some(a.to_dense()?.cholesky_factor().map_err(|_| Error::NotSpd {
            detail: "Cholesky factorization failed in inverse iteration".into(),
        })?)
    } else {
        None
    };

    let mut x = unit_start_vector(n);
    let mut lambda_prev = f64::NAN;
    let mut stable = 0usize;
    let mut lambda = 0.0;
    for k in 0..max_iter {
        let y = match &factor {
            Some(l) => DenseMatrix::cholesky_solve(l, &x),
            None => inner_cg_solve(a, &x)?,
        };
        let yy = dot(&y, &y);
        if !(yy > 0.0) || !yy.is_finite() {
            return Err(Error::NotSpd {
                detail: "inverse iteration collapsed".into(),
            });
        }
        // With A y = x, the Rayleigh quotient of y is (y' x) / (y' y).
        lambda = dot(&y, &x) / yy;
        if lambda <= 0.0 {
            return Err(Error::NotSpd {
                detail: format!("nonpositive smallest-eigenvalue estimate {lambda:e}"),
            });
        }
        let ny = yy.sqrt();
        x = y.iter().map(|v| v / ny).collect();
        if (lambda - lambda_prev).abs() <= rel_tol * lambda.abs() {
            stable += 1;
            if stable >= 2 {
                return Ok((lambda, k + 1, true));
            }
        } else {
            stable = 0;
        }
        lambda_prev = lambda;
    }
    Ok((lambda, max_iter, false))
}

/// Plain CG inner solve for inverse iteration (no telemetry).
fn inner_cg_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let bnorm = rr.sqrt();
    if bnorm == 0.0 {
        return Ok(x);
    }
    let tol = 1e-12 * bnorm;
    let mut ap = vec![0.0; n];
    for k in 0..20 * n {
        a.spmv_into(&p, &mut ap)?;
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotSpd {
                detail: format!("nonpositive curvature {pap:e} in inner CG at iteration {k}"),
            });
        }
        let alpha = rr / pap;
        axpy_into(alpha, &p, &mut x);
        axpy_into(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol {
            return Ok(x);
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Ok(x)
}

/// All eigenvalues of a symmetric dense matrix, ascending (nalgebra backend).
pub fn dense_symmetric_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>> {
    if m.n_rows() != m.n_cols() {
        return Err(Error::NotSquare {
            n_rows: m.n_rows(),
            n_cols: m.n_cols(),
        });
    }
    let nm = nalgebra::DMatrix::from_row_slice(m.n_rows(), m.n_cols(), m.data());
    let mut eigs: Vec<f64> = nm.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(eigs)
}

/// Singular values of a dense matrix, descending (nalgebra backend).
pub fn dense_singular_values(m: &DenseMatrix) -> Vec<f64> {
    let nm = nalgebra::DMatrix::from_row_slice(m.n_rows(), m.n_cols(), m.data());
    let mut svals: Vec<f64> = nm.singular_values().iter().copied().collect();
    svals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    svals
}
