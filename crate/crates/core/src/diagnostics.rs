//! Locality and convergence diagnostics.
//!
//! The information front of an iteration is measured against the initial
//! guess: a node is untouched while its value is still bitwise equal to the
//! baseline. Graph distances from the right-hand side's support give the
//! matching lower bound on how early a probe node can change at all.

use crate::csr::CsrMatrix;
use crate::error::{Error, Result};
use crate::graph::bfs_distances;
use crate::kernels::{norm2, sub};
use crate::problems::{Grid, ProblemInstance};
use crate::solvers::{IterationRecord, SolveObserver};
use std::collections::BTreeSet;

/// Length of the maximal prefix of `ordering` on which `u` still agrees with
/// `baseline` to `tol` (exactly, for the default tol = 0).
pub fn front_position(u: &[f64], baseline: &[f64], ordering: &[usize], tol: f64) -> Result<usize> {
    if u.len() != baseline.len() || ordering.len() != u.len() {
        return Err(Error::DimensionMismatch {
            context: "front_position",
            expected: u.len(),
            got: if baseline.len() != u.len() {
                baseline.len()
            } else {
                ordering.len()
            },
        });
    }
    let mut seen = vec![false; u.len()];
    for &v in ordering {
        if v >= u.len() || seen[v] {
            return Err(Error::InvalidParameter(
                "front ordering is not a permutation".into(),
            ));
        }
        seen[v] = true;
    }
    let mut count = 0;
    for &v in ordering {
        if (u[v] - baseline[v]).abs() <= tol {
            count += 1;
        } else {
            break;
        }
    }
    Ok(count)
}

/// Number of nodes bitwise equal to the baseline.
pub fn untouched_count(u: &[f64], baseline: &[f64]) -> usize {
    u.iter()
        .zip(baseline)
        .filter(|(a, b)| a.to_bits() == b.to_bits())
        .count()
}

/// Per-iteration front telemetry gathered by [`DiagnosticsObserver`].
#[derive(Debug, Clone, Default)]
pub struct FrontTrace {
    /// Front position per recorded iteration (when an ordering is defined).
    pub front_positions: Vec<Option<usize>>,
    /// Bitwise-untouched node count per recorded iteration.
    pub untouched_sizes: Vec<usize>,
}

/// Untouched-node counts bucketed by graph distance: one
/// `(distance, untouched, total)` row per distance present in `distances`.
/// This is the front report for grids without a natural linear ordering.
pub fn untouched_distance_profile(
    u: &[f64],
    baseline: &[f64],
    distances: &[Option<usize>],
) -> Vec<(usize, usize, usize)> {
    let mut buckets: std::collections::BTreeMap<usize, (usize, usize)> =
        std::collections::BTreeMap::new();
    for ((a, b), d) in u.iter().zip(baseline).zip(distances) {
        if let Some(d) = d {
            let entry = buckets.entry(*d).or_insert((0, 0));
            if a.to_bits() == b.to_bits() {
                entry.0 += 1;
            }
            entry.1 += 1;
        }
    }
    buckets
        .into_iter()
        .map(|(d, (untouched, total))| (d, untouched, total))
        .collect()
}

/// Iteration lower bound from graph distance: with a zero initial guess no
/// iterate before `d + 1` can be nonzero at the probe, where `d` is the BFS
/// distance from the right-hand side's support. `None` marks an unreachable
/// probe.
pub fn locality_lower_bound(
    a: &CsrMatrix,
    rhs_support: &[usize],
    probe: usize,
) -> Result<Option<usize>> {
    if probe >= a.n_rows() {
        return Err(Error::IndexOutOfRange {
            index: probe,
            len: a.n_rows(),
        });
    }
    let dist = bfs_distances(a, rhs_support)?;
    Ok(dist[probe].map(|d| d + 1))
}

/// Tabulated residual bound values C ((sqrt(k)-1)/(sqrt(k)+1))^j.
#[derive(Debug, Clone)]
pub struct BoundCurve {
    pub kappa: f64,
    pub c: f64,
    /// Values for j = 0..=k_max.
    pub values: Vec<f64>,
}

impl BoundCurve {
    /// Per-iteration reduction factor (sqrt(kappa)-1)/(sqrt(kappa)+1).
    pub fn factor(&self) -> f64 {
        let s = self.kappa.sqrt();
        (s - 1.0) / (s + 1.0)
    }
}

pub fn cg_bound_curve(kappa: f64, c: f64, k_max: usize) -> Result<BoundCurve> {
    if !(kappa >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "bound curve requires kappa >= 1, got {kappa}"
        )));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bound curve requires C > 0, got {c}"
        )));
    }
    let s = kappa.sqrt();
    let factor = (s - 1.0) / (s + 1.0);
    let mut values = Vec::with_capacity(k_max + 1);
    let mut v = c;
    for _ in 0..=k_max {
        values.push(v);
        // kappa = 1 degenerates to the constant curve C.
        if factor > 0.0 {
            v *= factor;
        }
    }
    Ok(BoundCurve { kappa, c, values })
}

/// Iterations sufficient to reduce the energy-norm error by epsilon:
/// ceil(0.5 sqrt(kappa) ln(2/epsilon)).
pub fn iteration_count_bound(kappa: f64, epsilon: f64) -> Result<usize> {
    if !(kappa >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "iteration bound requires kappa >= 1, got {kappa}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "iteration bound requires 0 < epsilon < 2, got {epsilon}"
        )));
    }
    Ok((0.5 * kappa.sqrt() * (2.0 / epsilon).ln()).ceil() as usize)
}

/// Signed pointwise error analytic(probe) - u[probe].
pub fn probe_error(u: &[f64], problem: &ProblemInstance, probe: usize) -> Result<f64> {
    if probe >= problem.dimension() || u.len() != problem.dimension() {
        return Err(Error::IndexOutOfRange {
            index: probe,
            len: problem.dimension(),
        });
    }
    Ok(problem.analytic[probe] - u[probe])
}

/// Observer that enriches iteration records with probe errors, reference
/// error norms and front diagnostics, and retains snapshots for a chosen
/// iteration set.
pub struct DiagnosticsObserver<'a> {
    problem: &'a ProblemInstance,
    baseline: Vec<f64>,
    /// Node ordering for the linear front (natural order in 1D; none in 2D,
    /// where only the untouched count is meaningful).
    ordering: Option<Vec<usize>>,
    front_tol: f64,
    reference: Option<Vec<f64>>,
    snapshots: BTreeSet<usize>,
    pub front_trace: FrontTrace,
}

impl<'a> DiagnosticsObserver<'a> {
    pub fn new(problem: &'a ProblemInstance) -> Self {
        let n = problem.dimension();
        let ordering = match &problem.grid {
            Grid::TwoD(_) => None,
            _ => Some((0..n).collect()),
        };
        DiagnosticsObserver {
            problem,
            baseline: vec![0.0; n],
            ordering,
            front_tol: 0.0,
            reference: None,
            snapshots: BTreeSet::new(),
            front_trace: FrontTrace::default(),
        }
    }

    /// Measures the front against this initial guess instead of zero.
    pub fn with_baseline(mut self, baseline: &[f64]) -> Self {
        self.baseline = baseline.to_vec();
        self
    }

    /// Tolerance knob for fronts of preconditioned runs.
    pub fn with_front_tol(mut self, tol: f64) -> Self {
        self.front_tol = tol;
        self
    }

    pub fn with_reference(mut self, reference: Vec<f64>) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn with_snapshots(mut self, ks: impl IntoIterator<Item = usize>) -> Self {
        self.snapshots = ks.into_iter().collect();
        self
    }
}

impl SolveObserver for DiagnosticsObserver<'_> {
    fn wants_snapshot(&self, k: usize) -> bool {
        self.snapshots.contains(&k)
    }

    fn on_iteration(&mut self, record: &mut IterationRecord, iterate: &[f64]) {
        record.probe_errors = self
            .problem
            .probes
            .iter()
            .map(|&p| (p, self.problem.analytic[p] - iterate[p]))
            .collect();
        if let Some(reference) = &self.reference {
            record.error_norm_vs_reference = Some(norm2(&sub(iterate, reference)));
        }
        if let Some(ordering) = &self.ordering {
            let front = front_position(iterate, &self.baseline, ordering, self.front_tol)
                .expect("diagnostics ordering is a permutation");
            record.front_position = Some(front);
        }
        self.front_trace.front_positions.push(record.front_position);
        self.front_trace
            .untouched_sizes
            .push(untouched_count(iterate, &self.baseline));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::build_1d;

    #[test]
    fn front_of_unchanged_vector_is_full() {
        let z = vec![0.0; 64];
        let ordering: Vec<usize> = (0..64).collect();
        assert_eq!(front_position(&z, &z, &ordering, 0.0).unwrap(), 64);
    }

    #[test]
    fn front_stops_at_first_touched_node() {
        let baseline = vec![0.0; 64];
        let mut u = baseline.clone();
        u[63] = 1.0;
        let ordering: Vec<usize> = (0..64).collect();
        assert_eq!(front_position(&u, &baseline, &ordering, 0.0).unwrap(), 63);
    }

    #[test]
    fn front_rejects_non_permutations() {
        let z = vec![0.0; 4];
        assert!(front_position(&z, &z, &[0, 0, 1, 2], 0.0).is_err());
        assert!(front_position(&z, &z, &[0, 1, 2, 9], 0.0).is_err());
    }

    #[test]
    fn locality_bound_examples() {
        let p = build_1d(64, 2.0, 0.0).unwrap();
        assert_eq!(locality_lower_bound(&p.matrix, &[63], 0).unwrap(), Some(64));
        assert_eq!(locality_lower_bound(&p.matrix, &[63], 63).unwrap(), Some(1));

        // Disconnected probe.
        let block =
            CsrMatrix::from_triplets(4, 4, &[(0, 1, 1.0), (1, 0, 1.0), (2, 3, 1.0), (3, 2, 1.0)])
                .unwrap();
        assert_eq!(locality_lower_bound(&block, &[0], 3).unwrap(), None);
    }

    #[test]
    fn distance_profile_splits_touched_and_untouched() {
        let u = vec![0.0, 1.0, 0.0, 2.0];
        let baseline = vec![0.0; 4];
        let distances = vec![Some(0), Some(0), Some(1), Some(2)];
        let profile = untouched_distance_profile(&u, &baseline, &distances);
        assert_eq!(profile, vec![(0, 1, 2), (1, 1, 1), (2, 0, 1)]);
    }

    #[test]
    fn locality_bound_2d() {
        let p = crate::problems::build_2d(32, 8).unwrap();
        let support: Vec<usize> = (0..p.dimension()).filter(|&i| p.rhs[i] != 0.0).collect();
        assert_eq!(
            locality_lower_bound(&p.matrix, &support, p.probes[0]).unwrap(),
            Some(32)
        );
    }

    #[test]
    fn bound_curve_values() {
        let flat = cg_bound_curve(1.0, 1.0, 5).unwrap();
        assert!(flat.values.iter().all(|&v| v == 1.0));

        let curve = cg_bound_curve(252.0, 1.0, 10).unwrap();
        assert!((curve.factor() - 0.88).abs() < 0.005, "{}", curve.factor());
        for w in curve.values.windows(2) {
            assert!(w[1] < w[0]);
        }

        let c = 2572.46f64.sqrt();
        let start = cg_bound_curve(2572.46, c, 0).unwrap();
        assert!((start.values[0] - 50.72).abs() < 0.01);

        assert!(cg_bound_curve(0.5, 1.0, 3).is_err());
    }

    #[test]
    fn iteration_bound_examples() {
        assert_eq!(iteration_count_bound(1.0, 1.0).unwrap(), 1);
        assert_eq!(iteration_count_bound(2572.46, 1e-6).unwrap(), 368);
        assert_eq!(iteration_count_bound(252.0, 1e-6).unwrap(), 116);
        assert!(iteration_count_bound(0.9, 0.5).is_err());
        assert!(iteration_count_bound(10.0, 2.5).is_err());
    }

    #[test]
    fn iteration_bound_monotonicity() {
        let mut prev = 0;
        for kappa in [1.0, 4.0, 64.0, 900.0, 48139.0] {
            let k = iteration_count_bound(kappa, 1e-6).unwrap();
            assert!(k >= prev);
            prev = k;
        }
        let mut prev = usize::MAX;
        for eps in [1e-12, 1e-6, 1e-3, 1.0, 1.9] {
            let k = iteration_count_bound(252.0, eps).unwrap();
            assert!(k <= prev);
            prev = k;
        }
    }

    #[test]
    fn probe_error_examples() {
        let p = build_1d(64, 2.0, 0.0).unwrap();
        let zero = vec![0.0; 64];
        assert_eq!(probe_error(&zero, &p, 0).unwrap(), 1.0);

        let reference = crate::problems::reference_solve(&p).unwrap();
        let e = probe_error(&reference, &p, 0).unwrap();
        assert!(e.abs() < 2e-4 && e.abs() > 1e-5);

        assert_eq!(probe_error(&p.analytic, &p, 0).unwrap(), 0.0);
        assert!(probe_error(&zero, &p, 99).is_err());
    }
}
