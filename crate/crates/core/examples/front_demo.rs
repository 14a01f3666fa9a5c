//! Prints the residual history, probe error and information-front position
//! of a budgeted CG run on the 1D model problem.

use sparselab_core::diagnostics::DiagnosticsObserver;
use sparselab_core::problems::build_1d;
use sparselab_core::solvers::{cg_solve, SolverConfig};

fn main() {
    let problem = build_1d(64, 2.0, 0.0).unwrap();
    let x0 = vec![0.0; problem.dimension()];
    let mut obs = DiagnosticsObserver::new(&problem).with_snapshots([1, 31, 63]);
    let report = cg_solve(
        &problem.matrix,
        &problem.rhs,
        &x0,
        &SolverConfig::fixed_budget(64),
        None,
        &mut obs,
    )
    .unwrap();
    for rec in &report.records {
        println!(
            "k={:2} rel={:9.3e} probe={:9.3e} front={:?}",
            rec.k, rec.rel_residual, rec.probe_errors[0].1, rec.front_position
        );
    }
}
