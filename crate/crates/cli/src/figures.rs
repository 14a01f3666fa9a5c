//! Built-in reproduction targets.
//!
//! Each target pins one or more scenario configurations (budgets and snapshot
//! sets included) and emits their bundles plus a figure-level gnuplot script
//! whose curves correspond one-to-one to the target's series. The pinned
//! parameters are documented in the README table.

use crate::config::{Method, ProblemKind, ScenarioConfig};
use crate::scenario::{build_problem, export_problem, run_scenario, BundleOutcome};
use anyhow::{anyhow, Result};
use sparselab_core::precond::PreconditionerSpec;
use sparselab_core::problems::{reference_solve, Grid, InitialGuess};
use sparselab_core::solvers::Mode;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const TARGETS: [&str; 20] = [
    "fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11",
    "fig12", "fig13", "fig14", "fig15", "fig16", "fig17", "fig18", "fig19", "fig20",
];

enum PlotStyle {
    /// Relative residual over k, linear y axis.
    HistoryLinear,
    /// Relative residual and probe error over k, log y axis.
    HistoryLog,
    /// Retained 1D iterates against the exact solution.
    Snapshots1D,
    /// 2D snapshot surface.
    Surface2D,
}

fn base_1d() -> ScenarioConfig {
    ScenarioConfig {
        problem: ProblemKind::OneD {
            n: 64,
            gamma: 2.0,
            f_const: 0.0,
        },
        method: Method::Cg,
        mode: Mode::FixedBudget,
        max_iter: 64,
        ..ScenarioConfig::default()
    }
}

struct Target {
    series: Vec<(String, ScenarioConfig)>,
    style: PlotStyle,
}

fn target_table(name: &str) -> Result<Target> {
    let cg_snapshots = vec![1, 3, 7, 15, 31, 63];
    let t = match name {
        "fig1" => Target {
            series: vec![("cg".into(), base_1d())],
            style: PlotStyle::HistoryLinear,
        },
        "fig2" => Target {
            series: vec![("cg".into(), base_1d())],
            style: PlotStyle::HistoryLog,
        },
        "fig3" => Target {
            series: vec![(
                "cg".into(),
                ScenarioConfig {
                    snapshots: cg_snapshots.clone(),
                    ..base_1d()
                },
            )],
            style: PlotStyle::Snapshots1D,
        },
        "fig4" => Target {
            series: vec![(
                "cg".into(),
                ScenarioConfig {
                    problem: ProblemKind::OneD {
                        n: 64,
                        gamma: 2.0,
                        f_const: 10.0,
                    },
                    ..base_1d()
                },
            )],
            style: PlotStyle::HistoryLog,
        },
        "fig5" => Target {
            series: vec![(
                "cg".into(),
                ScenarioConfig {
                    problem: ProblemKind::OneD {
                        n: 64,
                        gamma: 2.0,
                        f_const: 10.0,
                    },
                    snapshots: vec![5, 10, 15, 32, 48, 63, 64],
                    ..base_1d()
                },
            )],
            style: PlotStyle::Snapshots1D,
        },
        "fig6" => Target {
            series: vec![(
                "cg".into(),
                ScenarioConfig {
                    initial_guess: InitialGuess::AnalyticFamily { gamma0: 0.7 },
                    snapshots: cg_snapshots.clone(),
                    ..base_1d()
                },
            )],
            style: PlotStyle::Snapshots1D,
        },
        "fig7" => Target {
            series: vec![(
                "cg".into(),
                ScenarioConfig {
                    problem: ProblemKind::OneD {
                        n: 64,
                        gamma: 8.0,
                        f_const: 0.0,
                    },
                    ..base_1d()
                },
            )],
            style: PlotStyle::HistoryLog,
        },
        "fig8" => Target {
            series: vec![(
                "cg".into(),
                ScenarioConfig {
                    problem: ProblemKind::OneD {
                        n: 64,
                        gamma: 8.0,
                        f_const: 0.0,
                    },
                    snapshots: cg_snapshots.clone(),
                    ..base_1d()
                },
            )],
            style: PlotStyle::Snapshots1D,
        },
        "fig9" => Target {
            series: [Method::GsForward, Method::GsBackward, Method::Jacobi]
                .into_iter()
                .map(|method| {
                    (
                        method.name().to_string(),
                        ScenarioConfig {
                            method,
                            max_iter: 2048,
                            ..base_1d()
                        },
                    )
                })
                .collect(),
            style: PlotStyle::HistoryLog,
        },
        "fig10" => Target {
            series: [Method::GsForward, Method::GsBackward]
                .into_iter()
                .map(|method| {
                    (
                        method.name().to_string(),
                        ScenarioConfig {
                            method,
                            max_iter: 2048,
                            snapshots: vec![31, 127, 511, 2047],
                            ..base_1d()
                        },
                    )
                })
                .collect(),
            style: PlotStyle::Snapshots1D,
        },
        "fig11" => Target {
            series: [1.0, 1.5, 1.8, 1.9, 1.95]
                .into_iter()
                .map(|omega| {
                    (
                        format!("omega={omega}"),
                        ScenarioConfig {
                            method: Method::Sor,
                            omega,
                            max_iter: 2500,
                            ..base_1d()
                        },
                    )
                })
                .collect(),
            style: PlotStyle::HistoryLog,
        },
        "fig12" => Target {
            series: vec![(
                "gmres".into(),
                ScenarioConfig {
                    method: Method::Gmres,
                    snapshots: cg_snapshots,
                    ..base_1d()
                },
            )],
            style: PlotStyle::Snapshots1D,
        },
        "fig13" => Target {
            series: [0usize, 16, 32]
                .into_iter()
                .map(|restart| {
                    (
                        format!("restart={restart}"),
                        ScenarioConfig {
                            method: Method::Gmres,
                            restart_len: restart,
                            max_iter: 180,
                            ..base_1d()
                        },
                    )
                })
                .collect(),
            style: PlotStyle::HistoryLog,
        },
        "fig16" => Target {
            series: vec![(
                "cg".into(),
                ScenarioConfig {
                    problem: ProblemKind::TwoD { m: 32, n: 8 },
                    max_iter: 19,
                    snapshots: vec![19],
                    ..base_1d()
                },
            )],
            style: PlotStyle::Surface2D,
        },
        "fig17" => Target {
            series: [
                (4usize, 80usize),
                (8, 80),
                (16, 100),
                (32, 120),
                (128, 220),
                (256, 340),
                (384, 460),
            ]
            .into_iter()
            .map(|(m, budget)| {
                (
                    format!("m={m}"),
                    ScenarioConfig {
                        problem: ProblemKind::TwoD { m, n: 16 },
                        max_iter: budget,
                        ..base_1d()
                    },
                )
            })
            .collect(),
            style: PlotStyle::HistoryLog,
        },
        "fig18" => Target {
            series: vec![
                (
                    "plain".into(),
                    ScenarioConfig {
                        snapshots: vec![1, 3, 7, 15, 31, 33, 63, 64],
                        ..base_1d()
                    },
                ),
                (
                    "levels=1".into(),
                    ScenarioConfig {
                        precond: PreconditionerSpec::Hierarchical { levels: 1 },
                        snapshots: vec![1, 3, 7, 15, 31, 33],
                        ..base_1d()
                    },
                ),
            ],
            style: PlotStyle::Snapshots1D,
        },
        "fig19" => Target {
            series: (0usize..=3)
                .map(|levels| {
                    (
                        format!("levels={levels}"),
                        ScenarioConfig {
                            precond: if levels == 0 {
                                PreconditionerSpec::Identity
                            } else {
                                PreconditionerSpec::Hierarchical { levels }
                            },
                            max_iter: 11,
                            snapshots: vec![11],
                            ..base_1d()
                        },
                    )
                })
                .collect(),
            style: PlotStyle::Snapshots1D,
        },
        "fig20" => Target {
            series: (0usize..=3)
                .map(|levels| {
                    (
                        format!("levels={levels}"),
                        ScenarioConfig {
                            precond: if levels == 0 {
                                PreconditionerSpec::Identity
                            } else {
                                PreconditionerSpec::Hierarchical { levels }
                            },
                            ..base_1d()
                        },
                    )
                })
                .collect(),
            style: PlotStyle::HistoryLog,
        },
        other => {
            return Err(anyhow!(
                "unknown reproduction target '{other}'; valid targets: {}",
                TARGETS.join(", ")
            ))
        }
    };
    Ok(t)
}

pub fn reproduce(target: &str, out_root: &Path, quiet: bool) -> Result<Vec<BundleOutcome>> {
    let out_dir = out_root.join(target);
    match target {
        "fig14" => {
            surface_target(&out_dir, false)?;
            Ok(Vec::new())
        }
        "fig15" => {
            surface_target(&out_dir, true)?;
            Ok(Vec::new())
        }
        _ => {
            let target = target_table(target)?;
            let mut outcomes = Vec::new();
            for (series, cfg) in &target.series {
                let dir = out_dir.join(series);
                outcomes.push(run_scenario(cfg, &dir, quiet)?);
            }
            write_target_plot(&out_dir, &target)?;
            Ok(outcomes)
        }
    }
}

/// fig14 (exact solution) and fig15 (discretization error) are direct-solve
/// surfaces on the 32 x 8 grid; no iteration is involved.
fn surface_target(out_dir: &Path, error_surface: bool) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let cfg = ScenarioConfig {
        problem: ProblemKind::TwoD { m: 32, n: 8 },
        ..ScenarioConfig::default()
    };
    let problem = build_problem(&cfg)?;
    let grid = match &problem.grid {
        Grid::TwoD(g) => *g,
        _ => unreachable!(),
    };
    let reference = reference_solve(&problem)?;

    let mut csv = String::from("i,j,x,y,value\n");
    for idx in 0..problem.dimension() {
        let (i, j) = grid.node(idx);
        let (x, y) = grid.coords(idx);
        let value = if error_surface {
            reference[idx] - problem.analytic[idx]
        } else {
            problem.analytic[idx]
        };
        let _ = writeln!(csv, "{i},{j},{x:.16e},{y:.16e},{value:.16e}");
    }
    fs::write(out_dir.join("surface.csv"), csv)?;
    export_problem(&problem, out_dir)?;

    let label = if error_surface {
        "discrete-solution error"
    } else {
        "exact solution"
    };
    let script = format!(
        "# gnuplot script: {label} on the 32 x 8 grid\n\
         set datafile separator ','\n\
         set xlabel 'x'\nset ylabel 'y'\n\
         set dgrid3d 7,32\nset hidden3d\n\
         splot 'surface.csv' using 3:4:5 with lines title '{label}'\n"
    );
    fs::write(out_dir.join("plot.gp"), script)?;
    Ok(())
}

fn write_target_plot(out_dir: &Path, target: &Target) -> Result<()> {
    let mut script = String::new();
    let _ = writeln!(script, "# gnuplot script over the series bundles");
    let _ = writeln!(script, "set datafile separator ','");
    match target.style {
        PlotStyle::HistoryLinear | PlotStyle::HistoryLog => {
            let _ = writeln!(script, "set xlabel 'iteration k'");
            if matches!(target.style, PlotStyle::HistoryLog) {
                let _ = writeln!(script, "set logscale y");
                let _ = writeln!(script, "set format y '10^{{%L}}'");
            }
            let mut plots = Vec::new();
            for (series, _) in &target.series {
                plots.push(format!(
                    "'{series}/history.csv' using 1:3 with lines lw 2 title '{series} residual'"
                ));
                if matches!(target.style, PlotStyle::HistoryLog) {
                    plots.push(format!(
                        "'{series}/history.csv' using 1:(abs(column(5))) with points pt 1 title '{series} probe error'"
                    ));
                }
            }
            if let Some((first, _)) = target.series.first() {
                plots.push(format!(
                    "'{first}/bounds.csv' using 1:3 with lines dt 2 title 'bound, C = sqrt(kappa)'"
                ));
                plots.push(format!(
                    "'{first}/bounds.csv' using 1:2 with lines dt 3 title 'bound, C = 1'"
                ));
            }
            let _ = writeln!(script, "plot {}", plots.join(", \\\n     "));
        }
        PlotStyle::Snapshots1D => {
            let _ = writeln!(script, "set xlabel 'x'");
            let _ = writeln!(script, "set ylabel 'u'");
            let mut plots = Vec::new();
            for (series, cfg) in &target.series {
                for &k in &cfg.snapshots {
                    plots.push(format!(
                        "'{series}/snapshots/k{k:05}.csv' using 2:3 with lines title '{series} k={k}'"
                    ));
                }
            }
            if let Some((first, _)) = target.series.first() {
                plots.push(format!(
                    "'{first}/exact.csv' using 2:3 with lines lw 2 lc 'black' title 'exact'"
                ));
            }
            let _ = writeln!(script, "plot {}", plots.join(", \\\n     "));
        }
        PlotStyle::Surface2D => {
            let (series, cfg) = &target.series[0];
            let k = cfg.snapshots[0];
            let _ = writeln!(script, "set xlabel 'x'\nset ylabel 'y'");
            let _ = writeln!(script, "set dgrid3d 7,32\nset hidden3d");
            let _ = writeln!(
                script,
                "splot '{series}/snapshots/k{k:05}.csv' using 3:4:5 with lines title 'iterate k={k}'"
            );
        }
    }
    fs::write(out_dir.join("plot.gp"), script)?;
    Ok(())
}
