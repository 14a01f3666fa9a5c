//! Discretized boundary-value model problems.
//!
//! `build_1d` assembles the finite-difference reaction-diffusion problem
//! -u'' + gamma^2 u = f on (0, 1) with a zero-flux condition at x = 0 and a
//! Dirichlet condition at x = 1, eliminated from the system. `build_2d`
//! assembles the five-point Poisson problem on the unit square with mixed
//! Dirichlet/Neumann boundaries. Both produce SPD matrices together with the
//! sampled closed-form solution and a probe set for pointwise diagnostics.

use crate::csr::CsrMatrix;
use crate::error::{Error, Result};
use crate::kernels::{norm2, sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    /// Number of unknowns (the Dirichlet node at x = 1 is eliminated).
    pub n: usize,
    /// Mesh width 1/n; unknown j sits at x_j = j h.
    pub h: f64,
    /// Reaction coefficient, >= 0.
    pub gamma: f64,
}

impl Grid1D {
    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    /// Cells in x; unknowns i = 0..m-1 (x = 1 eliminated, x = 0 included).
    pub m: usize,
    /// Cells in y; unknowns j = 1..n-1 (both Dirichlet edges eliminated).
    pub n: usize,
    pub hx: f64,
    pub hy: f64,
}

impl Grid2D {
    /// Lexicographic index with x fastest.
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.m && (1..self.n).contains(&j));
        (j - 1) * self.m + i
    }

    /// Inverse of [`Grid2D::index`].
    pub fn node(&self, idx: usize) -> (usize, usize) {
        (idx % self.m, idx / self.m + 1)
    }

    pub fn coords(&self, idx: usize) -> (f64, f64) {
        let (i, j) = self.node(idx);
        (i as f64 * self.hx, j as f64 * self.hy)
    }

    pub fn dimension(&self) -> usize {
        self.m * (self.n - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    OneD(Grid1D),
    TwoD(Grid2D),
    /// Dimension only; used by the identity smoke problem.
    Trivial(usize),
}

/// One discretized problem: matrix, right-hand side, grid metadata, sampled
/// exact solution and probe set.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub grid: Grid,
    /// Exact solution sampled at the unknowns.
    pub analytic: Vec<f64>,
    pub probes: Vec<usize>,
    pub label: String,
}

impl ProblemInstance {
    pub fn dimension(&self) -> usize {
        self.matrix.n_rows()
    }
}

/// Offset of the closed-form solution `offset + cosh(gamma x)` for constant
/// forcing. The (gamma = 2, f = 10) instance is defined with offset 10
/// (solution 10 + cosh(2x)); any other constant forcing uses the particular
/// solution f / gamma^2.
fn constant_offset(gamma: f64, f_const: f64) -> Result<f64> {
    if f_const == 0.0 {
        Ok(0.0)
    } else if gamma == 0.0 {
        Err(Error::InvalidParameter(
            "constant forcing with gamma = 0 has no closed-form solution in this family".into(),
        ))
    } else if gamma == 2.0 && f_const == 10.0 {
        Ok(10.0)
    } else {
        Ok(f_const / (gamma * gamma))
    }
}

/// Closed-form solution of the 1D family at position `x`.
pub fn analytic_1d(x: f64, gamma: f64, f_const: f64) -> Result<f64> {
    Ok(constant_offset(gamma, f_const)? + (gamma * x).cosh())
}

/// Assembles the 1D problem with `n` unknowns.
///
/// Diagonal d = 2 + gamma^2 h^2, rows scaled by 1/h^2, first row halved for
/// the zero-flux boundary, and the Dirichlet value c_r = analytic(1) folded
/// into the last right-hand side entry.
pub fn build_1d(n: usize, gamma: f64, f_const: f64) -> Result<ProblemInstance> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "build_1d requires n >= 2, got {n}"
        )));
    }
    if gamma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "build_1d requires gamma >= 0, got {gamma}"
        )));
    }
    let h = 1.0 / n as f64;
    let inv_h2 = 1.0 / (h * h);
    let d = 2.0 + gamma * gamma * h * h;

    let mut triplets = Vec::with_capacity(3 * n);
    for i in 0..n {
        let diag = if i == 0 { d / 2.0 } else { d };
        triplets.push((i, i, diag * inv_h2));
        if i > 0 {
            triplets.push((i, i - 1, -inv_h2));
        }
        if i + 1 < n {
            triplets.push((i, i + 1, -inv_h2));
        }
    }
    let matrix = CsrMatrix::from_triplets(n, n, &triplets)?;

    let c_r = analytic_1d(1.0, gamma, f_const)?;
    let mut rhs = vec![f_const; n];
    rhs[0] = f_const / 2.0;
    rhs[n - 1] += c_r * inv_h2;

    let grid = Grid1D { n, h, gamma };
    let analytic = (0..n)
        .map(|j| analytic_1d(grid.x(j), gamma, f_const))
        .collect::<Result<Vec<_>>>()?;

    Ok(ProblemInstance {
        matrix,
        rhs,
        grid: Grid::OneD(grid),
        analytic,
        probes: vec![0],
        label: format!("1d(n={n}, gamma={gamma}, f={f_const})"),
    })
}

/// Exact solution of the 2D Poisson problem.
pub fn analytic_2d(x: f64, y: f64) -> f64 {
    (std::f64::consts::PI * y).sin() * (std::f64::consts::PI * x).cosh()
}

/// Assembles the 2D five-point problem on an `m x n` cell grid.
///
/// Dirichlet data (u = sin(pi y) cosh(pi) at x = 1, u = 0 at y = 0 and y = 1)
/// is folded into the right-hand side. The zero-flux condition at x = 0 uses
/// ghost-point elimination with the i = 0 rows halved to keep the matrix
/// symmetric.
pub fn build_2d(m: usize, n: usize) -> Result<ProblemInstance> {
    if m < 2 || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "build_2d requires m, n >= 2, got {m}x{n}"
        )));
    }
    let hx = 1.0 / m as f64;
    let hy = 1.0 / n as f64;
    let inv_hx2 = 1.0 / (hx * hx);
    let inv_hy2 = 1.0 / (hy * hy);
    let grid = Grid2D { m, n, hx, hy };
    let dim = grid.dimension();

    let dirichlet_right = |j: usize| analytic_2d(1.0, j as f64 * hy);

    let mut triplets = Vec::with_capacity(5 * dim);
    let mut rhs = vec![0.0; dim];
    for j in 1..n {
        for i in 0..m {
            let row = grid.index(i, j);
            let scale = if i == 0 { 0.5 } else { 1.0 };
            triplets.push((row, row, scale * (2.0 * inv_hx2 + 2.0 * inv_hy2)));
            if i == 0 {
                // Ghost node u(-1, j) = u(1, j) folds both x-neighbors onto i = 1.
                triplets.push((row, grid.index(1, j), scale * (-2.0 * inv_hx2)));
            } else {
                triplets.push((row, grid.index(i - 1, j), -inv_hx2));
                if i + 1 < m {
                    triplets.push((row, grid.index(i + 1, j), -inv_hx2));
                } else {
                    rhs[row] += dirichlet_right(j) * inv_hx2;
                }
            }
            if j > 1 {
                triplets.push((row, grid.index(i, j - 1), scale * -inv_hy2));
            }
            if j + 1 < n {
                triplets.push((row, grid.index(i, j + 1), scale * -inv_hy2));
            }
        }
    }
    let matrix = CsrMatrix::from_triplets(dim, dim, &triplets)?;

    let analytic = (0..dim)
        .map(|idx| {
            let (x, y) = grid.coords(idx);
            analytic_2d(x, y)
        })
        .collect();

    // Probe: the node nearest (0, 1/2).
    let j_mid = ((n as f64 / 2.0).round() as usize).clamp(1, n - 1);
    let probe = grid.index(0, j_mid);

    Ok(ProblemInstance {
        matrix,
        rhs,
        grid: Grid::TwoD(grid),
        analytic,
        probes: vec![probe],
        label: format!("2d(m={m}, n={n})"),
    })
}

/// Identity smoke problem: A = I, b = 1, exact solution 1.
pub fn build_identity(n: usize) -> Result<ProblemInstance> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "identity problem needs n >= 1".into(),
        ));
    }
    Ok(ProblemInstance {
        matrix: CsrMatrix::identity(n),
        rhs: vec![1.0; n],
        grid: Grid::Trivial(n),
        analytic: vec![1.0; n],
        probes: vec![0],
        label: format!("identity(n={n})"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialGuess {
    Zero,
    /// Samples cosh(gamma0 x) at the 1D grid nodes.
    AnalyticFamily {
        gamma0: f64,
    },
}

pub fn initial_guess(problem: &ProblemInstance, kind: InitialGuess) -> Result<Vec<f64>> {
    match kind {
        InitialGuess::Zero => Ok(vec![0.0; problem.dimension()]),
        InitialGuess::AnalyticFamily { gamma0 } => match &problem.grid {
            Grid::OneD(g) => Ok((0..g.n).map(|j| (gamma0 * g.x(j)).cosh()).collect()),
            _ => Err(Error::InvalidParameter(
                "analytic_family initial guesses are only defined for 1D problems".into(),
            )),
        },
    }
}

/// Thomas algorithm for a tridiagonal system.
///
/// `sub` and `sup` hold the sub- and super-diagonals (length n-1), `diag` the
/// main diagonal (length n).
pub fn thomas_solve(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if sub.len() + 1 != n || sup.len() + 1 != n || rhs.len() != n {
        return Err(Error::DimensionMismatch {
            context: "thomas_solve",
            expected: n,
            got: rhs.len(),
        });
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    if diag[0] == 0.0 {
        return Err(Error::ZeroDiagonal { row: 0 });
    }
    c[0] = if n > 1 { sup[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i - 1] * c[i - 1];
        if denom == 0.0 {
            return Err(Error::ZeroDiagonal { row: i });
        }
        if i + 1 < n {
            c[i] = sup[i] / denom;
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    Ok(x)
}

/// Direct reference solution: Thomas in 1D, dense Cholesky in 2D.
pub fn reference_solve(problem: &ProblemInstance) -> Result<Vec<f64>> {
    let solution = match &problem.grid {
        Grid::OneD(g) => {
            let n = g.n;
            let a = &problem.matrix;
            let mut lower = vec![0.0; n - 1];
            let mut upper = vec![0.0; n - 1];
            let diag = a.diagonal();
            for i in 0..n - 1 {
                lower[i] = a.get(i + 1, i);
                upper[i] = a.get(i, i + 1);
            }
            thomas_solve(&lower, &diag, &upper, &problem.rhs)?
        }
        Grid::TwoD(_) => problem.matrix.to_dense()?.solve_spd(&problem.rhs)?,
        Grid::Trivial(_) => problem.rhs.clone(),
    };
    debug_assert!({
        let r = sub(&problem.rhs, &problem.matrix.spmv(&solution)?);
        norm2(&r) <= 1e-12 * norm2(&problem.rhs).max(1.0)
    });
    Ok(solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseMatrix;
    use crate::eigen::extreme_eigenvalues;

    #[test]
    fn analytic_values() {
        assert_eq!(analytic_1d(0.0, 2.0, 0.0).unwrap(), 1.0);
        assert_eq!(analytic_1d(1.0, 2.0, 10.0).unwrap(), 10.0 + 2.0f64.cosh());
        assert_eq!(analytic_1d(0.37, 0.0, 0.0).unwrap(), 1.0);
        assert!(analytic_1d(0.5, 0.0, 3.0).is_err());
    }

    #[test]
    fn rhs_of_unforced_problem_has_single_nonzero() {
        let p = build_1d(64, 2.0, 0.0).unwrap();
        let nonzeros: Vec<usize> = (0..64).filter(|&j| p.rhs[j] != 0.0).collect();
        assert_eq!(nonzeros, vec![63]);
        assert_eq!(p.rhs[63], 2.0f64.cosh() * 4096.0);
        assert_eq!(p.analytic[0], 1.0);
    }

    #[test]
    fn forced_problem_matches_displayed_solution() {
        let p = build_1d(64, 2.0, 10.0).unwrap();
        assert!(p.rhs.iter().all(|&v| v > 0.0));
        let g = match p.grid {
            Grid::OneD(g) => g,
            _ => unreachable!(),
        };
        for j in 0..64 {
            assert_eq!(p.analytic[j], 10.0 + (2.0 * g.x(j)).cosh());
        }
    }

    #[test]
    fn gamma_zero_discrete_solution_is_exactly_one() {
        let p = build_1d(8, 0.0, 0.0).unwrap();
        let u = reference_solve(&p).unwrap();
        for v in u {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn generated_matrices_are_spd() {
        for p in [
            build_1d(16, 0.0, 0.0).unwrap(),
            build_1d(16, 2.0, 0.0).unwrap(),
            build_2d(8, 4).unwrap(),
        ] {
            assert!(p.matrix.is_symmetric(0.0).unwrap());
            let est = extreme_eigenvalues(&p.matrix, 1e-8, 200).unwrap();
            assert!(est.lambda_min > 0.0);
        }
    }

    #[test]
    fn grid2d_dimension_and_probe() {
        let p = build_2d(32, 8).unwrap();
        assert_eq!(p.dimension(), 32 * 7);
        let g = match p.grid {
            Grid::TwoD(g) => g,
            _ => unreachable!(),
        };
        assert_eq!(p.probes, vec![g.index(0, 4)]);
        // Probe sits at (0, 1/2) where the exact solution is 1.
        assert_eq!(p.analytic[p.probes[0]], 1.0);
    }

    #[test]
    fn smallest_2d_case_matches_hand_stencil() {
        let p = build_2d(2, 2).unwrap();
        assert_eq!(p.dimension(), 2);
        let d = p.matrix.to_dense().unwrap();
        assert_eq!(d[(0, 0)], 8.0);
        assert_eq!(d[(0, 1)], -4.0);
        assert_eq!(d[(1, 0)], -4.0);
        assert_eq!(d[(1, 1)], 16.0);
        assert_eq!(p.rhs[0], 0.0);
        let expected = 4.0 * std::f64::consts::PI.cosh();
        assert!((p.rhs[1] - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn analytic_2d_values() {
        assert_eq!(analytic_2d(0.0, 0.5), 1.0);
        let c = analytic_2d(1.0, 0.5);
        assert!((c - std::f64::consts::PI.cosh()).abs() < 1e-12);
        assert!((c - 11.5920).abs() < 1e-3);
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(analytic_2d(x, 0.0), 0.0);
        }
    }

    #[test]
    fn initial_guesses() {
        let p = build_1d(64, 2.0, 0.0).unwrap();
        let zero = initial_guess(&p, InitialGuess::Zero).unwrap();
        assert!(zero.iter().all(|&v| v.to_bits() == 0));

        let family = initial_guess(&p, InitialGuess::AnalyticFamily { gamma0: 0.7 }).unwrap();
        assert_eq!(family[0], 1.0);

        // The matching-family guess leaves only the discretization defect.
        let exact = initial_guess(&p, InitialGuess::AnalyticFamily { gamma0: 2.0 }).unwrap();
        let r = sub(&p.rhs, &p.matrix.spmv(&exact).unwrap());
        let rel = norm2(&r) / norm2(&p.rhs);
        assert!(rel > 0.0 && rel < 1e-6, "rel defect {rel}");

        let p2 = build_2d(4, 4).unwrap();
        assert!(initial_guess(&p2, InitialGuess::AnalyticFamily { gamma0: 0.7 }).is_err());
    }

    #[test]
    fn reference_solve_hits_discretization_accuracy_at_probe() {
        let p = build_1d(64, 2.0, 0.0).unwrap();
        let u = reference_solve(&p).unwrap();
        let err = (1.0 - u[0]).abs();
        assert!(err < 2e-4 && err > 1e-5, "probe error {err}");
    }

    #[test]
    fn reference_solve_2d_matches_dense_oracle() {
        let p = build_2d(8, 8).unwrap();
        let u = reference_solve(&p).unwrap();
        // Oracle: nalgebra Cholesky on the dense expansion.
        let d = p.matrix.to_dense().unwrap();
        let nm = nalgebra::DMatrix::from_row_slice(d.n_rows(), d.n_cols(), d.data());
        let nb = nalgebra::DVector::from_column_slice(&p.rhs);
        let oracle = nm.cholesky().unwrap().solve(&nb);
        let scale = norm2(&u);
        for (a, b) in u.iter().zip(oracle.iter()) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn defect_of_sampled_solution_is_second_order_1d() {
        let mut defects = Vec::new();
        for n in [32usize, 64, 128, 256] {
            let p = build_1d(n, 2.0, 0.0).unwrap();
            let r = sub(&p.rhs, &p.matrix.spmv(&p.analytic).unwrap());
            defects.push(r.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
        for w in defects.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn discrete_error_is_second_order_2d() {
        let mut errs = Vec::new();
        for mn in [8usize, 16, 32] {
            let p = build_2d(mn, mn).unwrap();
            let u = reference_solve(&p).unwrap();
            let e = sub(&u, &p.analytic);
            errs.push(e.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn thomas_matches_small_dense_solve() {
        let sub = [1.0, -2.0, 0.5];
        let diag = [4.0, 5.0, 6.0, 5.0];
        let sup = [-1.0, 2.0, 1.0];
        let rhs = [1.0, -2.0, 3.0, 0.5];
        let x = thomas_solve(&sub, &diag, &sup, &rhs).unwrap();
        let mut dense = DenseMatrix::zeros(4, 4);
        for i in 0..4 {
            dense[(i, i)] = diag[i];
        }
        for i in 0..3 {
            dense[(i + 1, i)] = sub[i];
            dense[(i, i + 1)] = sup[i];
        }
        let r = sub_vec(&rhs, &dense.matvec(&x));
        assert!(norm2(&r) < 1e-12);

        fn sub_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| x - y).collect()
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(build_1d(1, 2.0, 0.0).is_err());
        assert!(build_1d(8, -1.0, 0.0).is_err());
        assert!(build_2d(1, 8).is_err());
    }
}
