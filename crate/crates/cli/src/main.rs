// CSV writers spell out grid indices; the subscript loops are intentional.
#![allow(clippy::needless_range_loop)]

//! Command-line front end: problem generation, scenario runs, figure
//! reproduction, parameter sweeps and matrix analysis.
//!
//! Exit codes: 0 converged/complete, 2 iteration budget exhausted without
//! convergence, 1 error.

mod config;
mod figures;
mod scenario;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use config::{resolve_param_key, RawConfig, ScenarioConfig};
use sparselab_core::diagnostics::locality_lower_bound;
use sparselab_core::eigen::extreme_eigenvalues;
use sparselab_core::graph::graph_diameter;
use sparselab_core::market::read_matrix_market;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "sparselab",
    about = "Sparse iterative-solver laboratory: instrumented solves, locality diagnostics and reproduction scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a problem as Matrix Market files plus sidecar metadata.
    Generate {
        /// Problem kind: 1d, 2d or identity.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: usize,
        /// Cells in x (2d only).
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0)]
        f_const: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one scenario from a config file and write its output bundle.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's `outputs`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated iteration numbers whose iterates are retained.
        #[arg(long)]
        snapshots: Option<String>,
    },
    /// Run a pinned figure-reproduction target (fig1 .. fig20, or `all`).
    Reproduce {
        target: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a scenario once per value of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Parameter name (e.g. omega, solver.omega, restart_len, m).
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report condition number, diameter and locality bound of a matrix.
    Analyze {
        matrix: PathBuf,
        /// Right-hand side (Matrix Market n x 1); defaults to a sibling rhs.mtx.
        #[arg(long)]
        rhs: Option<PathBuf>,
        /// Sidecar metadata; defaults to a sibling problem.meta.
        #[arg(long)]
        meta: Option<PathBuf>,
        /// Also write the report to <out>/analyze.txt.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate {
            kind,
            n,
            m,
            gamma,
            f_const,
            out,
        } => {
            let problem = match kind.as_str() {
                "1d" => sparselab_core::problems::build_1d(n, gamma, f_const)?,
                "2d" => sparselab_core::problems::build_2d(
                    m.ok_or_else(|| anyhow!("--m is required for --kind 2d"))?,
                    n,
                )?,
                "identity" => sparselab_core::problems::build_identity(n)?,
                other => return Err(anyhow!("--kind {other}: expected 1d, 2d or identity")),
            };
            scenario::export_problem(&problem, &out)?;
            if !cli.quiet {
                println!(
                    "{}: wrote problem.mtx, rhs.mtx, problem.meta -> {}",
                    problem.label,
                    out.display()
                );
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Solve {
            config,
            out,
            snapshots,
        } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = ScenarioConfig::from_text(&text)
                .with_context(|| format!("config {}", config.display()))?;
            if let Some(list) = snapshots {
                cfg.snapshots = list
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse::<usize>().context("--snapshots"))
                    .collect::<Result<_>>()?;
            }
            let out_dir = out.unwrap_or_else(|| cfg.outputs.clone());
            let outcome = scenario::run_scenario(&cfg, &out_dir, cli.quiet)?;
            Ok(exit_for(outcome.converged))
        }

        Command::Reproduce { target, out } => {
            let targets: Vec<String> = if target == "all" {
                figures::TARGETS.iter().map(|s| s.to_string()).collect()
            } else {
                vec![target]
            };
            for t in &targets {
                figures::reproduce(t, &out, cli.quiet)?;
                if !cli.quiet {
                    println!("{t}: bundle(s) written under {}", out.join(t).display());
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Sweep {
            config,
            param,
            values,
            out,
        } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let raw = RawConfig::parse(&text)?;
            let key = resolve_param_key(&param)?;
            let short = key.rsplit('.').next().unwrap();
            let base_out = out.unwrap_or_else(|| {
                ScenarioConfig::from_raw(&raw)
                    .map(|c| c.outputs)
                    .unwrap_or_else(|_| PathBuf::from("out"))
            });
            let mut all_converged = true;
            for value in values.split(',').map(str::trim).filter(|v| !v.is_empty()) {
                let mut raw_case = raw.clone();
                raw_case.set(key, value);
                let cfg = ScenarioConfig::from_raw(&raw_case)
                    .with_context(|| format!("sweep value {key} = {value}"))?;
                let dir = base_out.join(format!("{short}={value}"));
                let outcome = scenario::run_scenario(&cfg, &dir, cli.quiet)?;
                all_converged &= outcome.converged;
            }
            Ok(exit_for(all_converged))
        }

        Command::Analyze {
            matrix,
            rhs,
            meta,
            out,
        } => {
            let report = analyze(&matrix, rhs.as_deref(), meta.as_deref())?;
            print!("{report}");
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                fs::write(dir.join("analyze.txt"), &report)?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn exit_for(converged: bool) -> ExitCode {
    if converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn analyze(matrix_path: &Path, rhs: Option<&Path>, meta: Option<&Path>) -> Result<String> {
    let a = read_matrix_market(matrix_path)
        .with_context(|| format!("reading {}", matrix_path.display()))?;

    let sibling = |name: &str| -> Option<PathBuf> {
        let candidate = matrix_path.parent()?.join(name);
        candidate.exists().then_some(candidate)
    };
    let rhs_path = rhs.map(Path::to_path_buf).or_else(|| sibling("rhs.mtx"));
    let meta_path = meta
        .map(Path::to_path_buf)
        .or_else(|| sibling("problem.meta"));

    let mut out = String::new();
    use std::fmt::Write as _;
    let _ = writeln!(out, "matrix = {}", matrix_path.display());
    let _ = writeln!(out, "dimension = {}x{}", a.n_rows(), a.n_cols());
    let _ = writeln!(out, "nnz = {}", a.nnz());
    if a.n_rows() == a.n_cols() {
        let _ = writeln!(out, "symmetric = {}", a.is_symmetric(0.0)?);
        match extreme_eigenvalues(&a, 1e-7, 800) {
            Ok(est) => {
                let _ = writeln!(out, "lambda_min = {:.6e}", est.lambda_min);
                let _ = writeln!(out, "lambda_max = {:.6e}", est.lambda_max);
                let _ = writeln!(out, "kappa = {:.6}", est.kappa);
                let _ = writeln!(out, "spectrum_converged = {}", est.converged);
            }
            Err(e) => {
                let _ = writeln!(out, "kappa = n/a ({e})");
            }
        }
        match graph_diameter(&a) {
            Ok(d) => {
                let _ = writeln!(out, "diameter = {d}");
            }
            Err(e) => {
                let _ = writeln!(out, "diameter = n/a ({e})");
            }
        }

        // Locality bound needs the rhs support and a probe.
        if let Some(rhs_path) = rhs_path {
            let rhs_mat = read_matrix_market(&rhs_path)
                .with_context(|| format!("reading {}", rhs_path.display()))?;
            if rhs_mat.n_rows() != a.n_rows() || rhs_mat.n_cols() != 1 {
                return Err(anyhow!(
                    "rhs {} must be a {}x1 matrix",
                    rhs_path.display(),
                    a.n_rows()
                ));
            }
            let support: Vec<usize> = rhs_mat.iter_entries().map(|(i, _, _)| i).collect();
            let probe = meta_path
                .and_then(|p| fs::read_to_string(p).ok())
                .and_then(|text| {
                    text.lines().find_map(|line| {
                        let (k, v) = line.split_once('=')?;
                        (k.trim() == "probes")
                            .then(|| v.trim().split(',').next()?.trim().parse::<usize>().ok())?
                    })
                })
                .unwrap_or(0);
            let _ = writeln!(out, "probe = {probe}");
            match locality_lower_bound(&a, &support, probe)? {
                Some(bound) => {
                    let _ = writeln!(out, "locality_bound = {bound}");
                }
                None => {
                    let _ = writeln!(out, "locality_bound = unreachable");
                }
            }
        }
    }
    Ok(out)
}
