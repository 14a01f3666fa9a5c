//! Scenario execution and output bundles.
//!
//! A bundle directory holds:
//!   history.csv     per-iteration telemetry (fixed schema)
//!   snapshots/*.csv retained iterates
//!   exact.csv       sampled exact solution
//!   bounds.csv      theoretical residual bound curves (CG runs)
//!   summary.txt     condition number, diameter, locality bound, outcome
//!   plot.gp         gnuplot script over the CSVs
//!   config.cfg      the exact configuration that produced the bundle
//!   problem.mtx / rhs.mtx / problem.meta   the exported problem

use crate::config::{Method, ProblemKind, ScenarioConfig};
use anyhow::{anyhow, Context, Result};
use sparselab_core::diagnostics::{locality_lower_bound, DiagnosticsObserver};
use sparselab_core::eigen::extreme_eigenvalues;
use sparselab_core::graph::{bfs_distances, graph_diameter};
use sparselab_core::kernels::norm2;
use sparselab_core::market::write_matrix_market;
use sparselab_core::precond::{preconditioned_spectrum, PreconditionerSpec, EXPLICIT_GUARD};
use sparselab_core::problems::{
    build_1d, build_2d, build_identity, initial_guess, reference_solve, Grid, ProblemInstance,
};
use sparselab_core::solvers::{
    cg_solve, gmres_solve, stationary_solve, SolveReport, SolverConfig, StationaryMethod,
};
use sparselab_core::CsrMatrix;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Dense reference solves are skipped above this dimension (2D only).
const REFERENCE_DIM_LIMIT: usize = 3162;

pub struct BundleOutcome {
    pub dir: PathBuf,
    pub converged: bool,
    pub iterations: usize,
    pub stop_reason: String,
    pub final_rel_residual: f64,
}

pub fn build_problem(cfg: &ScenarioConfig) -> Result<ProblemInstance> {
    let mut problem = match cfg.problem {
        ProblemKind::OneD { n, gamma, f_const } => build_1d(n, gamma, f_const)
            .with_context(|| format!("problem.kind = 1d (n = {n}, gamma = {gamma})"))?,
        ProblemKind::TwoD { m, n } => {
            build_2d(m, n).with_context(|| format!("problem.kind = 2d (m = {m}, n = {n})"))?
        }
        ProblemKind::Identity { n } => {
            build_identity(n).with_context(|| format!("problem.kind = identity (n = {n})"))?
        }
    };
    if let Some(probes) = &cfg.probes {
        for &p in probes {
            if p >= problem.dimension() {
                return Err(anyhow!(
                    "probes: index {p} out of range for dimension {}",
                    problem.dimension()
                ));
            }
        }
        problem.probes = probes.clone();
    }
    Ok(problem)
}

pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path, quiet: bool) -> Result<BundleOutcome> {
    let problem = build_problem(cfg)?;
    let n = problem.dimension();

    let x0 = initial_guess(&problem, cfg.initial_guess).context("initial_guess")?;

    let transform = cfg
        .precond
        .build(n)
        .with_context(|| format!("precond (problem dimension {n})"))?;
    if transform.is_some() && cfg.method != Method::Cg {
        return Err(anyhow!(
            "precond.kind = hierarchical requires solver.method = cg"
        ));
    }

    let reference = match &problem.grid {
        Grid::TwoD(_) if n > REFERENCE_DIM_LIMIT => None,
        _ => Some(reference_solve(&problem).context("reference solve")?),
    };

    let mut observer = DiagnosticsObserver::new(&problem)
        .with_baseline(&x0)
        .with_snapshots(cfg.snapshots.iter().copied());
    if let Some(reference) = reference.clone() {
        observer = observer.with_reference(reference);
    }

    let solver_cfg = SolverConfig {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        mode: cfg.mode,
        check_symmetry: true,
    };
    let report = match cfg.method {
        Method::Cg => cg_solve(
            &problem.matrix,
            &problem.rhs,
            &x0,
            &solver_cfg,
            transform
                .as_ref()
                .map(|t| t as &dyn sparselab_core::solvers::Preconditioner),
            &mut observer,
        ),
        Method::Gmres => gmres_solve(
            &problem.matrix,
            &problem.rhs,
            &x0,
            &solver_cfg,
            cfg.restart_len,
            &mut observer,
        ),
        Method::Jacobi => stationary_solve(
            &problem.matrix,
            &problem.rhs,
            &x0,
            StationaryMethod::Jacobi { rho: cfg.rho },
            &solver_cfg,
            &mut observer,
        ),
        Method::GsForward => stationary_solve(
            &problem.matrix,
            &problem.rhs,
            &x0,
            StationaryMethod::GaussSeidelForward,
            &solver_cfg,
            &mut observer,
        ),
        Method::GsBackward => stationary_solve(
            &problem.matrix,
            &problem.rhs,
            &x0,
            StationaryMethod::GaussSeidelBackward,
            &solver_cfg,
            &mut observer,
        ),
        Method::Sor => stationary_solve(
            &problem.matrix,
            &problem.rhs,
            &x0,
            StationaryMethod::Sor { omega: cfg.omega },
            &solver_cfg,
            &mut observer,
        ),
    }
    .with_context(|| format!("solver.method = {}", cfg.method.name()))?;

    write_bundle(
        cfg,
        &problem,
        &report,
        reference.as_deref(),
        &x0,
        out_dir,
        quiet,
    )
}

fn write_bundle(
    cfg: &ScenarioConfig,
    problem: &ProblemInstance,
    report: &SolveReport,
    reference: Option<&[f64]>,
    x0: &[f64],
    out_dir: &Path,
    quiet: bool,
) -> Result<BundleOutcome> {
    fs::create_dir_all(out_dir)?;

    write_history_csv(&out_dir.join("history.csv"), problem, report)?;
    write_exact_csv(&out_dir.join("exact.csv"), problem)?;

    // BFS distances from the rhs support, used by 2D snapshots and summaries.
    let support: Vec<usize> = (0..problem.dimension())
        .filter(|&i| problem.rhs[i] != 0.0)
        .collect();
    let distances = if support.is_empty() {
        None
    } else {
        bfs_distances(&problem.matrix, &support).ok()
    };

    let snapshot_dir = out_dir.join("snapshots");
    let mut snapshot_count = 0usize;
    for record in &report.records {
        if let Some(snapshot) = &record.iterate_snapshot {
            if snapshot_count == 0 {
                fs::create_dir_all(&snapshot_dir)?;
            }
            write_snapshot_csv(
                &snapshot_dir.join(format!("k{:05}.csv", record.k)),
                problem,
                snapshot,
                distances.as_deref(),
            )?;
            snapshot_count += 1;
        }
    }

    // Spectrum, diameter and locality summaries.
    let kappa = extreme_eigenvalues(&problem.matrix, 1e-7, 800)
        .map(|est| est.kappa)
        .ok();
    let precond_kappa = match (&cfg.precond, problem.dimension() <= EXPLICIT_GUARD) {
        (PreconditionerSpec::Hierarchical { .. }, true) => cfg
            .precond
            .build(problem.dimension())
            .ok()
            .flatten()
            .and_then(|t| preconditioned_spectrum(Some(&t), &problem.matrix).ok())
            .map(|est| est.kappa),
        _ => None,
    };
    let diameter = graph_diameter(&problem.matrix);
    let locality = if support.is_empty() {
        None
    } else {
        locality_lower_bound(&problem.matrix, &support, problem.probes[0])
            .ok()
            .flatten()
    };

    if cfg.method == Method::Cg {
        if let Some(kappa) = kappa {
            write_bounds_csv(&out_dir.join("bounds.csv"), kappa, cfg.max_iter)?;
        }
    }

    let mut summary = String::new();
    use std::fmt::Write as _;
    let _ = writeln!(summary, "label = {}", problem.label);
    let _ = writeln!(summary, "dimension = {}", problem.dimension());
    let _ = writeln!(summary, "method = {}", cfg.method.name());
    match kappa {
        Some(k) => {
            let _ = writeln!(summary, "kappa = {k:.6}");
        }
        None => {
            let _ = writeln!(summary, "kappa = n/a");
        }
    }
    if let Some(k) = precond_kappa {
        let _ = writeln!(summary, "preconditioned_kappa = {k:.6}");
    }
    match &diameter {
        Ok(d) => {
            let _ = writeln!(summary, "diameter = {d}");
        }
        Err(e) => {
            let _ = writeln!(summary, "diameter = n/a ({e})");
        }
    }
    match locality {
        Some(bound) => {
            let _ = writeln!(summary, "locality_bound = {bound}");
        }
        None => {
            let _ = writeln!(summary, "locality_bound = n/a");
        }
    }
    let _ = writeln!(summary, "probes = {}", join(&problem.probes));
    let _ = writeln!(summary, "iterations = {}", report.iterations);
    let _ = writeln!(summary, "stop_reason = {}", report.stop_reason);
    let _ = writeln!(summary, "converged = {}", report.converged);
    let _ = writeln!(
        summary,
        "final_rel_residual = {:.16e}",
        report.final_rel_residual()
    );
    if let Some(reference) = reference {
        let e0: Vec<f64> = reference.iter().zip(x0).map(|(r, x)| r - x).collect();
        let _ = writeln!(summary, "initial_error_norm = {:.16e}", norm2(&e0));
    }
    fs::write(out_dir.join("summary.txt"), summary)?;

    fs::write(out_dir.join("config.cfg"), cfg.to_text())?;
    export_problem(problem, out_dir)?;
    write_history_plot(&out_dir.join("plot.gp"), problem, cfg)?;

    let outcome = BundleOutcome {
        dir: out_dir.to_path_buf(),
        converged: report.converged,
        iterations: report.iterations,
        stop_reason: report.stop_reason.to_string(),
        final_rel_residual: report.final_rel_residual(),
    };
    if !quiet {
        println!(
            "{}: {} iterations, stop = {}, final rel residual = {:.3e} -> {}",
            problem.label,
            outcome.iterations,
            outcome.stop_reason,
            outcome.final_rel_residual,
            outcome.dir.display()
        );
    }
    Ok(outcome)
}

/// Exports matrix, rhs and sidecar metadata.
pub fn export_problem(problem: &ProblemInstance, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    write_matrix_market(&problem.matrix, out_dir.join("problem.mtx"))?;
    let rhs_triplets: Vec<(usize, usize, f64)> = problem
        .rhs
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, &v)| (i, 0, v))
        .collect();
    let rhs = CsrMatrix::from_triplets(problem.dimension(), 1, &rhs_triplets)?;
    write_matrix_market(&rhs, out_dir.join("rhs.mtx"))?;

    let mut meta = String::new();
    use std::fmt::Write as _;
    match &problem.grid {
        Grid::OneD(g) => {
            let _ = writeln!(meta, "kind = 1d");
            let _ = writeln!(meta, "n = {}", g.n);
            let _ = writeln!(meta, "gamma = {}", g.gamma);
            let f_const = problem.rhs[1.min(problem.dimension() - 1)];
            let _ = writeln!(meta, "f_const = {f_const}");
            let _ = writeln!(
                meta,
                "c_r = {:.16e}",
                problem.analytic[problem.dimension() - 1]
            );
        }
        Grid::TwoD(g) => {
            let _ = writeln!(meta, "kind = 2d");
            let _ = writeln!(meta, "m = {}", g.m);
            let _ = writeln!(meta, "n = {}", g.n);
        }
        Grid::Trivial(n) => {
            let _ = writeln!(meta, "kind = identity");
            let _ = writeln!(meta, "n = {n}");
        }
    }
    let _ = writeln!(meta, "probes = {}", join(&problem.probes));
    fs::write(out_dir.join("problem.meta"), meta)?;
    Ok(())
}

fn join(list: &[usize]) -> String {
    list.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Exact header: k,residual_norm,rel_residual,error_norm,probe_error_0
/// [,probe_error_i...],front_position. Missing diagnostics stay empty.
fn write_history_csv(path: &Path, problem: &ProblemInstance, report: &SolveReport) -> Result<()> {
    let mut out = fs::File::create(path)?;
    let mut header = String::from("k,residual_norm,rel_residual,error_norm");
    for i in 0..problem.probes.len() {
        header.push_str(&format!(",probe_error_{i}"));
    }
    header.push_str(",front_position");
    writeln!(out, "{header}")?;
    for rec in &report.records {
        let mut line = format!(
            "{},{:.16e},{:.16e}",
            rec.k, rec.residual_norm, rec.rel_residual
        );
        match rec.error_norm_vs_reference {
            Some(e) => line.push_str(&format!(",{e:.16e}")),
            None => line.push(','),
        }
        for (_, e) in &rec.probe_errors {
            line.push_str(&format!(",{e:.16e}"));
        }
        match rec.front_position {
            Some(f) => line.push_str(&format!(",{f}")),
            None => line.push(','),
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn write_exact_csv(path: &Path, problem: &ProblemInstance) -> Result<()> {
    let mut out = fs::File::create(path)?;
    match &problem.grid {
        Grid::OneD(g) => {
            writeln!(out, "index,x,analytic")?;
            for j in 0..g.n {
                writeln!(out, "{j},{:.16e},{:.16e}", g.x(j), problem.analytic[j])?;
            }
        }
        Grid::TwoD(g) => {
            writeln!(out, "i,j,x,y,analytic")?;
            for idx in 0..problem.dimension() {
                let (i, j) = g.node(idx);
                let (x, y) = g.coords(idx);
                writeln!(
                    out,
                    "{i},{j},{x:.16e},{y:.16e},{:.16e}",
                    problem.analytic[idx]
                )?;
            }
        }
        Grid::Trivial(n) => {
            writeln!(out, "index,analytic")?;
            for j in 0..*n {
                writeln!(out, "{j},{:.16e}", problem.analytic[j])?;
            }
        }
    }
    Ok(())
}

fn write_snapshot_csv(
    path: &Path,
    problem: &ProblemInstance,
    snapshot: &[f64],
    distances: Option<&[Option<usize>]>,
) -> Result<()> {
    let mut out = fs::File::create(path)?;
    match &problem.grid {
        Grid::OneD(g) => {
            writeln!(out, "index,x,value,analytic")?;
            for j in 0..g.n {
                writeln!(
                    out,
                    "{j},{:.16e},{:.16e},{:.16e}",
                    g.x(j),
                    snapshot[j],
                    problem.analytic[j]
                )?;
            }
        }
        Grid::TwoD(g) => {
            writeln!(out, "i,j,x,y,value,analytic,graph_distance,untouched")?;
            for idx in 0..problem.dimension() {
                let (i, j) = g.node(idx);
                let (x, y) = g.coords(idx);
                let dist = distances
                    .and_then(|d| d[idx])
                    .map_or(String::new(), |d| d.to_string());
                let untouched = (snapshot[idx].to_bits() == 0.0f64.to_bits()) as u8;
                writeln!(
                    out,
                    "{i},{j},{x:.16e},{y:.16e},{:.16e},{:.16e},{dist},{untouched}",
                    snapshot[idx], problem.analytic[idx]
                )?;
            }
        }
        Grid::Trivial(n) => {
            writeln!(out, "index,value,analytic")?;
            for j in 0..*n {
                writeln!(out, "{j},{:.16e},{:.16e}", snapshot[j], problem.analytic[j])?;
            }
        }
    }
    Ok(())
}

/// Both bound normalizations are emitted: C = 1 and C = sqrt(kappa).
fn write_bounds_csv(path: &Path, kappa: f64, k_max: usize) -> Result<()> {
    let sqrt_kappa = kappa.sqrt();
    let factor = (sqrt_kappa - 1.0) / (sqrt_kappa + 1.0);
    let mut out = fs::File::create(path)?;
    writeln!(out, "k,bound_c1,bound_sqrt_kappa")?;
    let mut v = 1.0f64;
    for k in 0..=k_max {
        writeln!(out, "{k},{v:.16e},{:.16e}", sqrt_kappa * v)?;
        if factor > 0.0 {
            v *= factor;
        }
    }
    Ok(())
}

fn write_history_plot(path: &Path, problem: &ProblemInstance, cfg: &ScenarioConfig) -> Result<()> {
    let mut script = String::new();
    use std::fmt::Write as _;
    let _ = writeln!(script, "# gnuplot script: convergence history");
    let _ = writeln!(script, "set datafile separator ','");
    let _ = writeln!(script, "set xlabel 'iteration k'");
    let _ = writeln!(script, "set logscale y");
    let _ = writeln!(script, "set format y '10^{{%L}}'");
    let _ = writeln!(
        script,
        "set title '{} / {}'",
        problem.label,
        cfg.method.name()
    );
    let probe_col = 5;
    let mut plots = vec![
        "'history.csv' using 1:3 with lines lw 2 title 'relative residual'".to_string(),
        format!(
            "'history.csv' using 1:(abs(column({probe_col}))) with points pt 1 title 'probe error'"
        ),
    ];
    if cfg.method == Method::Cg {
        plots.push("'bounds.csv' using 1:3 with lines dt 2 title 'bound, C = sqrt(kappa)'".into());
        plots.push("'bounds.csv' using 1:2 with lines dt 3 title 'bound, C = 1'".into());
    }
    let _ = writeln!(script, "plot {}", plots.join(", \\\n     "));
    fs::write(path, script)?;
    Ok(())
}
