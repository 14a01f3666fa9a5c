//! Hierarchical multilevel transforms and the induced preconditioner C = T'T.
//!
//! Each level factor adds half-weighted neighbor rows to its coarse rows,
//! extending the coupling range of the system: level 1 modifies the even rows
//! with neighbors at distance 1, level l the rows divisible by 2^l with
//! neighbors at distance 2^(l-1). The composite transform is T = T_L ... T_1
//! and the preconditioner is applied in factored form, never assembled.

use crate::csr::CsrMatrix;
use crate::dense::DenseMatrix;
use crate::eigen::{dense_singular_values, SpectrumEstimate};
use crate::error::{Error, Result};
use crate::solvers::Preconditioner;

/// Dense-expansion guard for the explicit transformed matrix and spectrum.
pub const EXPLICIT_GUARD: usize = 1024;

#[derive(Debug, Clone)]
pub struct HierarchicalTransform {
    n: usize,
    levels: usize,
    /// Level factors, finest first.
    factors: Vec<CsrMatrix>,
    /// Transposes, cached for the factored application of C.
    factors_t: Vec<CsrMatrix>,
}

impl HierarchicalTransform {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn factors(&self) -> &[CsrMatrix] {
        &self.factors
    }

    /// Dense composite T = T_L ... T_1 (desk scale only).
    pub fn composite_dense(&self) -> Result<DenseMatrix> {
        let mut t = DenseMatrix::identity(self.n);
        for factor in &self.factors {
            t = factor.to_dense()?.matmul(&t);
        }
        Ok(t)
    }
}

impl Preconditioner for HierarchicalTransform {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        apply_c(self, r).expect("preconditioner dimension mismatch")
    }
}

/// Builds the level factors for a power-of-two dimension.
///
/// Level l marks rows with global index divisible by 2^l as active; an active
/// row i gains 1/2 at columns i - 2^(l-1) and i + 2^(l-1) where those exist
/// (row 0 keeps only its right neighbor). All other rows stay identity.
pub fn build_hierarchical(n: usize, levels: usize) -> Result<HierarchicalTransform> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "hierarchical transform requires a power-of-two dimension n = 2^p with p >= 2, got {n}"
        )));
    }
    let p = n.trailing_zeros() as usize;
    if levels == 0 || levels > p - 1 {
        return Err(Error::InvalidParameter(format!(
            "hierarchical levels must satisfy 1 <= levels <= {}, got {levels}",
            p - 1
        )));
    }
    let mut factors = Vec::with_capacity(levels);
    for level in 1..=levels {
        let stride = 1usize << level;
        let half = stride >> 1;
        let mut triplets = Vec::with_capacity(n + 2 * (n / stride));
        for i in 0..n {
            triplets.push((i, i, 1.0));
            if i % stride == 0 {
                if i >= half {
                    triplets.push((i, i - half, 0.5));
                }
                if i + half < n {
                    triplets.push((i, i + half, 0.5));
                }
            }
        }
        factors.push(CsrMatrix::from_triplets(n, n, &triplets)?);
    }
    let factors_t = factors.iter().map(CsrMatrix::transpose).collect();
    Ok(HierarchicalTransform {
        n,
        levels,
        factors,
        factors_t,
    })
}

/// Applies C r = T_1' ... T_L' T_L ... T_1 r as 2L sparse factor products.
pub fn apply_c(t: &HierarchicalTransform, r: &[f64]) -> Result<Vec<f64>> {
    if r.len() != t.n {
        return Err(Error::DimensionMismatch {
            context: "apply_c",
            expected: t.n,
            got: r.len(),
        });
    }
    let mut v = r.to_vec();
    for factor in &t.factors {
        v = factor.spmv(&v)?;
    }
    for factor_t in t.factors_t.iter().rev() {
        v = factor_t.spmv(&v)?;
    }
    Ok(v)
}

/// Dense T A T' for desk-scale validation and spectrum studies.
pub fn explicit_transformed_matrix(
    t: &HierarchicalTransform,
    a: &CsrMatrix,
) -> Result<DenseMatrix> {
    guard(a)?;
    if a.n_rows() != t.n {
        return Err(Error::DimensionMismatch {
            context: "explicit_transformed_matrix",
            expected: t.n,
            got: a.n_rows(),
        });
    }
    let mut m = a.to_dense()?;
    for factor in &t.factors {
        let f = factor.to_dense()?;
        m = f.matmul(&m).matmul(&f.transpose());
    }
    Ok(m)
}

/// Condition number of the preconditioned operator C A in the Euclidean norm
/// (largest over smallest singular value); `None` computes the unpreconditioned
/// condition number of A itself.
///
/// C A is similar to the congruent T A T', so its eigenvalues are positive,
/// but it is not symmetric; the Euclidean condition number is the singular
/// value ratio.
pub fn preconditioned_spectrum(
    t: Option<&HierarchicalTransform>,
    a: &CsrMatrix,
) -> Result<SpectrumEstimate> {
    guard(a)?;
    let ad = a.to_dense()?;
    let m = match t {
        None => ad,
        Some(t) => {
            if a.n_rows() != t.n {
                return Err(Error::DimensionMismatch {
                    context: "preconditioned_spectrum",
                    expected: t.n,
                    got: a.n_rows(),
                });
            }
            let td = t.composite_dense()?;
            td.transpose().matmul(&td).matmul(&ad)
        }
    };
    let svals = dense_singular_values(&m);
    let (largest, smallest) = (svals[0], *svals.last().unwrap());
    SpectrumEstimate::new(smallest, largest, true, 0)
}

fn guard(a: &CsrMatrix) -> Result<()> {
    if a.n_rows() > EXPLICIT_GUARD {
        return Err(Error::SizeGuard {
            context: "explicit preconditioner form",
            required: a.n_rows(),
            guard: EXPLICIT_GUARD,
        });
    }
    Ok(())
}

/// Declarative preconditioner choice for scenario configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreconditionerSpec {
    Identity,
    Hierarchical { levels: usize },
}

impl PreconditionerSpec {
    /// Builds the transform for dimension `n`; `Identity` yields `None`.
    pub fn build(&self, n: usize) -> Result<Option<HierarchicalTransform>> {
        match *self {
            PreconditionerSpec::Identity => Ok(None),
            PreconditionerSpec::Hierarchical { levels } => Ok(Some(build_hierarchical(n, levels)?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::dense_symmetric_eigenvalues;
    use crate::kernels::dot;

    fn model_matrix(n: usize, gamma: f64) -> CsrMatrix {
        crate::problems::build_1d(n, gamma, 0.0).unwrap().matrix
    }

    /// The displayed single-level factor for n = 8.
    const LEVEL1_N8: [[f64; 8]; 8] = [
        [1.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.5, 1.0, 0.5, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.5, 1.0, 0.5, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 1.0, 0.5],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    ];

    #[test]
    fn level_one_factor_matches_displayed_matrix() {
        let t = build_hierarchical(8, 1).unwrap();
        let d = t.factors()[0].to_dense().unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(d[(i, j)], LEVEL1_N8[i][j], "({i},{j})");
            }
        }
    }

    #[test]
    fn level_two_factor_couples_across_distance_two() {
        let t = build_hierarchical(8, 2).unwrap();
        let f2 = &t.factors()[1];
        let d = f2.to_dense().unwrap();
        let mut expected = DenseMatrix::identity(8);
        expected[(0, 2)] = 0.5;
        expected[(4, 2)] = 0.5;
        expected[(4, 6)] = 0.5;
        assert_eq!(d.max_abs_diff(&expected), 0.0);
    }

    #[test]
    fn active_row_counts_halve_per_level() {
        let t = build_hierarchical(64, 3).unwrap();
        for (level, factor) in t.factors().iter().enumerate() {
            let active = (0..64).filter(|&i| factor.row(i).0.len() > 1).count();
            assert_eq!(active, 32 >> level);
        }
    }

    #[test]
    fn rejects_invalid_dimensions_and_levels() {
        assert!(build_hierarchical(63, 1).is_err());
        assert!(build_hierarchical(0, 1).is_err());
        assert!(build_hierarchical(8, 0).is_err());
        assert!(build_hierarchical(8, 3).is_err());
        assert!(build_hierarchical(64, 6).is_err());
        assert!(build_hierarchical(64, 5).is_ok());
    }

    #[test]
    fn factors_have_unit_diagonal_and_half_weights() {
        let t = build_hierarchical(64, 3).unwrap();
        for factor in t.factors() {
            for i in 0..64 {
                let (cols, vals) = factor.row(i);
                let mut off = 0;
                for (&c, &v) in cols.iter().zip(vals) {
                    if c == i {
                        assert_eq!(v, 1.0);
                    } else {
                        assert_eq!(v, 0.5);
                        off += 1;
                    }
                }
                assert!(off <= 2);
            }
        }
    }

    #[test]
    fn apply_c_matches_dense_product() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for levels in 1..=5 {
            let t = build_hierarchical(64, levels).unwrap();
            let td = t.composite_dense().unwrap();
            let c = td.transpose().matmul(&td);
            let r: Vec<f64> = (0..64).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let fast = apply_c(&t, &r).unwrap();
            let slow = c.matvec(&r);
            let scale = crate::kernels::norm2(&slow);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() <= 1e-14 * scale);
            }
        }
    }

    #[test]
    fn apply_c_on_unit_vector_matches_dense() {
        let t = build_hierarchical(8, 1).unwrap();
        let mut e1 = vec![0.0; 8];
        e1[1] = 1.0;
        let td = t.composite_dense().unwrap();
        let c = td.transpose().matmul(&td);
        let fast = apply_c(&t, &e1).unwrap();
        let slow = c.matvec(&e1);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn apply_c_is_symmetric() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let t = build_hierarchical(64, 3).unwrap();
        for _ in 0..10 {
            let x: Vec<f64> = (0..64).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let y: Vec<f64> = (0..64).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let cx = apply_c(&t, &x).unwrap();
            let cy = apply_c(&t, &y).unwrap();
            let lhs = dot(&x, &cy);
            let rhs = dot(&y, &cx);
            assert!((lhs - rhs).abs() <= 1e-14 * lhs.abs().max(rhs.abs()).max(1.0));
        }
    }

    /// The composite transform's first row spans the whole 2^L block, so one
    /// application couples the boundary node with nodes 2^L - 1 away.
    #[test]
    fn composite_row_zero_reach_doubles_per_level() {
        for levels in 1..=3 {
            let t = build_hierarchical(64, levels).unwrap();
            let td = t.composite_dense().unwrap();
            let cols: Vec<usize> = (0..64).filter(|&j| td[(0, j)] != 0.0).collect();
            let expected: Vec<usize> = (0..(1usize << levels)).collect();
            assert_eq!(cols, expected, "levels = {levels}");
        }
    }

    #[test]
    fn transformed_matrix_reproduces_exact_decoupling() {
        // d = 2: the transformed system splits into a diagonal fine part and a
        // half-size coarse system.
        let a = model_matrix(8, 0.0);
        let t = build_hierarchical(8, 1).unwrap();
        let m = explicit_transformed_matrix(&t, &a).unwrap();
        let h2 = 1.0 / 64.0;
        let expected = [
            [0.5, 0.0, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [-0.5, 0.0, 1.0, 0.0, -0.5, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, -0.5, 0.0, 1.0, 0.0, -0.5, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, -0.5, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0],
        ];
        for i in 0..8 {
            for j in 0..8 {
                assert!(
                    (m[(i, j)] * h2 - expected[i][j]).abs() <= 1e-15,
                    "({i},{j}): {} vs {}",
                    m[(i, j)] * h2,
                    expected[i][j]
                );
            }
        }
        // Odd rows and columns are exactly diagonal.
        for &i in &[1usize, 3, 5, 7] {
            for j in 0..8 {
                if i != j {
                    assert_eq!(m[(i, j)], 0.0);
                    assert_eq!(m[(j, i)], 0.0);
                }
            }
            assert_eq!(m[(i, i)] * h2, 2.0);
        }
    }

    #[test]
    fn two_level_transform_decouples_d2_case() {
        let a = model_matrix(8, 0.0);
        let t = build_hierarchical(8, 2).unwrap();
        let m = explicit_transformed_matrix(&t, &a).unwrap();
        let h2 = 1.0 / 64.0;
        // Fine blocks are diagonal; the coarse pair {0, 4} forms a 2-unknown
        // system with the same structural form.
        let expected_diag = [0.25, 2.0, 1.0, 2.0, 0.5, 2.0, 1.0, 2.0];
        for i in 0..8 {
            assert!((m[(i, i)] * h2 - expected_diag[i]).abs() <= 1e-15);
        }
        assert!((m[(0, 4)] * h2 + 0.25).abs() <= 1e-15);
        assert!((m[(4, 0)] * h2 + 0.25).abs() <= 1e-15);
        for i in 0..8 {
            for j in 0..8 {
                let coarse_pair = (i == 0 && j == 4) || (i == 4 && j == 0);
                if i != j && !coarse_pair {
                    assert_eq!(m[(i, j)], 0.0, "({i},{j})");
                }
            }
        }
    }

    #[test]
    fn gamma_positive_loses_exact_decoupling() {
        let a = model_matrix(8, 2.0);
        let t = build_hierarchical(8, 1).unwrap();
        let m = explicit_transformed_matrix(&t, &a).unwrap();
        // Odd rows keep off-diagonal couplings when d != 2.
        let coupled = (0..8).filter(|&j| j != 1 && m[(1, j)] != 0.0).count();
        assert!(coupled > 0);
    }

    #[test]
    fn congruence_preserves_spd() {
        let a = model_matrix(16, 2.0);
        for levels in 1..=3 {
            let t = build_hierarchical(16, levels).unwrap();
            let m = explicit_transformed_matrix(&t, &a).unwrap();
            assert!(m.max_abs_diff(&m.transpose()) <= 1e-13 * 16.0 * 16.0);
            let eigs = dense_symmetric_eigenvalues(&m).unwrap();
            assert!(eigs[0] > 0.0);
        }
    }

    #[test]
    fn preconditioned_condition_number_of_identity_matrix() {
        let t = build_hierarchical(16, 2).unwrap();
        let est = preconditioned_spectrum(Some(&t), &CsrMatrix::identity(16)).unwrap();
        assert!(est.kappa >= 1.0);
        // C I = T'T, so the condition number equals kappa(T T').
        let td = t.composite_dense().unwrap();
        let ttt = td.matmul(&td.transpose());
        let eigs = dense_symmetric_eigenvalues(&ttt).unwrap();
        let expected = eigs[eigs.len() - 1] / eigs[0];
        assert!((est.kappa - expected).abs() <= 1e-10 * expected);
    }

    #[test]
    fn unpreconditioned_spectrum_matches_matrix_condition_number() {
        let a = model_matrix(64, 2.0);
        let est = preconditioned_spectrum(None, &a).unwrap();
        assert!(
            (est.kappa - 2572.46).abs() / 2572.46 <= 0.005,
            "{}",
            est.kappa
        );
    }

    #[test]
    fn size_guard_applies() {
        let a = CsrMatrix::identity(2048);
        let t = build_hierarchical(2048, 1).unwrap();
        assert!(matches!(
            explicit_transformed_matrix(&t, &a),
            Err(Error::SizeGuard { .. })
        ));
    }
}
