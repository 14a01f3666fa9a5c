//! Cross-module invariants: locality of Krylov and Jacobi iterates, energy
//! norm monotonicity of CG, and the theoretical residual bound.

use sparselab_core::diagnostics::{cg_bound_curve, DiagnosticsObserver};
use sparselab_core::graph::bfs_distances;
use sparselab_core::kernels::{dot, sub};
use sparselab_core::problems::{build_1d, build_2d, reference_solve};
use sparselab_core::solvers::{
    cg_solve, gmres_solve, stationary_solve, SolveReport, SolverConfig, StationaryMethod,
};
use sparselab_core::{CsrMatrix, ProblemInstance};

fn snapshots_of(report: &SolveReport) -> Vec<(usize, Vec<f64>)> {
    report
        .records
        .iter()
        .filter_map(|r| r.iterate_snapshot.clone().map(|s| (r.k, s)))
        .collect()
}

/// u_k must be exactly zero at every node whose graph distance from the
/// support of b is at least k, for CG, full GMRES and Jacobi with x0 = 0.
fn assert_locality(problem: &ProblemInstance, budget: usize) {
    let support: Vec<usize> = (0..problem.dimension())
        .filter(|&i| problem.rhs[i] != 0.0)
        .collect();
    let dist = bfs_distances(&problem.matrix, &support).unwrap();
    let x0 = vec![0.0; problem.dimension()];
    let cfg = SolverConfig::fixed_budget(budget);

    let runs: Vec<(&str, SolveReport)> = vec![
        (
            "cg",
            cg_solve(&problem.matrix, &problem.rhs, &x0, &cfg, None, &mut {
                DiagnosticsObserver::new(problem).with_snapshots(0..=budget)
            })
            .unwrap(),
        ),
        (
            "gmres",
            gmres_solve(&problem.matrix, &problem.rhs, &x0, &cfg, 0, &mut {
                DiagnosticsObserver::new(problem).with_snapshots(0..=budget)
            })
            .unwrap(),
        ),
        (
            "jacobi",
            stationary_solve(
                &problem.matrix,
                &problem.rhs,
                &x0,
                StationaryMethod::Jacobi { rho: 1.0 },
                &cfg,
                &mut DiagnosticsObserver::new(problem).with_snapshots(0..=budget),
            )
            .unwrap(),
        ),
    ];

    for (name, report) in runs {
        for (k, u) in snapshots_of(&report) {
            for (v, &uv) in u.iter().enumerate() {
                let far = dist[v].is_none_or(|d| d >= k);
                if far {
                    assert_eq!(
                        uv.to_bits(),
                        0.0f64.to_bits(),
                        "{name} on {}: u_{k}[{v}] nonzero at distance {:?}",
                        problem.label,
                        dist[v]
                    );
                }
            }
        }
    }
}

#[test]
fn krylov_and_jacobi_iterates_respect_graph_distance() {
    assert_locality(&build_1d(32, 2.0, 0.0).unwrap(), 20);
    assert_locality(&build_2d(12, 6).unwrap(), 10);
}

#[test]
fn locality_holds_on_irregular_sparsity() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
    // Random symmetric pattern, diagonally dominated, rhs on one node.
    let n = 40;
    let mut trip = Vec::new();
    for i in 0..n {
        trip.push((i, i, 8.0));
    }
    for i in 0..n {
        for j in 0..i {
            if rng.gen::<f64>() < 0.06 {
                let v = rng.gen::<f64>() - 0.5;
                trip.push((i, j, v));
                trip.push((j, i, v));
            }
        }
    }
    // Keep a path so the graph is connected.
    for i in 0..n - 1 {
        trip.push((i, i + 1, -0.5));
        trip.push((i + 1, i, -0.5));
    }
    let a = CsrMatrix::from_triplets(n, n, &trip).unwrap();
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 3.0;

    let dist = bfs_distances(&a, &[n - 1]).unwrap();
    let x0 = vec![0.0; n];
    #[derive(Default)]
    struct Snap(Vec<Vec<f64>>);
    impl sparselab_core::solvers::SolveObserver for Snap {
        fn wants_snapshot(&self, _k: usize) -> bool {
            true
        }
        fn on_iteration(&mut self, record: &mut sparselab_core::IterationRecord, _iterate: &[f64]) {
            self.0.push(record.iterate_snapshot.clone().unwrap());
        }
    }
    let mut snap = Snap::default();
    cg_solve(
        &a,
        &rhs,
        &x0,
        &SolverConfig::fixed_budget(12),
        None,
        &mut snap,
    )
    .unwrap();
    for (k, u) in snap.0.iter().enumerate() {
        for (v, &uv) in u.iter().enumerate() {
            if dist[v].is_none_or(|d| d >= k) {
                assert_eq!(uv.to_bits(), 0.0f64.to_bits(), "k={k} v={v}");
            }
        }
    }
}

#[test]
fn cg_energy_norm_error_is_monotone() {
    for gamma in [2.0, 8.0] {
        let p = build_1d(64, gamma, 0.0).unwrap();
        let reference = reference_solve(&p).unwrap();
        let x0 = vec![0.0; 64];
        let mut obs = DiagnosticsObserver::new(&p).with_snapshots(0..=64);
        let report = cg_solve(
            &p.matrix,
            &p.rhs,
            &x0,
            &SolverConfig::fixed_budget(64),
            None,
            &mut obs,
        )
        .unwrap();
        let mut prev = f64::INFINITY;
        for (k, u) in snapshots_of(&report) {
            let e = sub(&u, &reference);
            let a_norm = dot(&e, &p.matrix.spmv(&e).unwrap()).sqrt();
            assert!(
                a_norm <= prev * (1.0 + 1e-10),
                "gamma={gamma}: energy norm grew at k={k}: {a_norm} > {prev}"
            );
            prev = a_norm;
        }
    }
}

#[test]
fn residual_bound_dominates_measured_history() {
    let p = build_1d(64, 2.0, 0.0).unwrap();
    let est = sparselab_core::eigen::extreme_eigenvalues(&p.matrix, 1e-9, 400).unwrap();
    let curve = cg_bound_curve(est.kappa, est.kappa.sqrt(), 64).unwrap();
    let x0 = vec![0.0; 64];
    let report = cg_solve(
        &p.matrix,
        &p.rhs,
        &x0,
        &SolverConfig::fixed_budget(64),
        None,
        &mut sparselab_core::solvers::NullObserver,
    )
    .unwrap();
    for rec in &report.records {
        assert!(
            rec.rel_residual <= curve.values[rec.k],
            "bound violated at k={}: {} > {}",
            rec.k,
            rec.rel_residual,
            curve.values[rec.k]
        );
    }
}

#[test]
fn untouched_set_is_non_increasing_for_zero_baseline_runs() {
    let p = build_1d(48, 2.0, 0.0).unwrap();
    let x0 = vec![0.0; 48];
    for method in ["cg", "jacobi"] {
        let mut obs = DiagnosticsObserver::new(&p);
        match method {
            "cg" => {
                cg_solve(
                    &p.matrix,
                    &p.rhs,
                    &x0,
                    &SolverConfig::fixed_budget(48),
                    None,
                    &mut obs,
                )
                .unwrap();
            }
            _ => {
                stationary_solve(
                    &p.matrix,
                    &p.rhs,
                    &x0,
                    StationaryMethod::Jacobi { rho: 1.0 },
                    &SolverConfig::fixed_budget(48),
                    &mut obs,
                )
                .unwrap();
            }
        }
        let sizes = &obs.front_trace.untouched_sizes;
        assert!(!sizes.is_empty());
        for w in sizes.windows(2) {
            assert!(w[1] <= w[0], "{method}: untouched set grew: {w:?}");
        }
    }
}

#[test]
fn front_tolerance_knob_tracks_preconditioned_runs() {
    // With the factored preconditioner the front advances faster than one
    // node per iteration; exact zeros still delimit it.
    let p = build_1d(64, 2.0, 0.0).unwrap();
    let t = sparselab_core::precond::build_hierarchical(64, 2).unwrap();
    let x0 = vec![0.0; 64];
    let mut obs = DiagnosticsObserver::new(&p);
    cg_solve(
        &p.matrix,
        &p.rhs,
        &x0,
        &SolverConfig::fixed_budget(10),
        Some(&t),
        &mut obs,
    )
    .unwrap();
    let fronts: Vec<usize> = obs
        .front_trace
        .front_positions
        .iter()
        .map(|f| f.unwrap())
        .collect();
    // After k iterations the plain front would be 64 - k; the preconditioned
    // one must have advanced strictly further by iteration 5.
    assert!(fronts[5] < 64 - 5, "fronts: {fronts:?}");
}
