//! Iterative solvers with per-iteration telemetry.
//!
//! Every solver records iteration 0 (the initial state) and one record per
//! iteration after that. Records flow through a [`SolveObserver`], which may
//! enrich them in place (probe errors, front position) and request iterate
//! snapshots at chosen iteration numbers.

mod cg;
mod gmres;
mod stationary;

pub use cg::cg_solve;
pub use gmres::gmres_solve;
pub use stationary::{stationary_solve, StationaryMethod};

use crate::kernels::norm2;

/// Stopping behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Stop as soon as ||r_k|| <= tol ||b||.
    Converge,
    /// Run exactly `max_iter` iterations regardless of the tolerance.
    FixedBudget,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Relative residual threshold (against ||b||).
    pub tol: f64,
    pub max_iter: usize,
    pub mode: Mode,
    /// Symmetry precheck (CG only), at absolute tolerance 1e-12.
    pub check_symmetry: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-8,
            max_iter: 1000,
            mode: Mode::Converge,
            check_symmetry: true,
        }
    }
}

impl SolverConfig {
    pub fn fixed_budget(max_iter: usize) -> Self {
        SolverConfig {
            mode: Mode::FixedBudget,
            max_iter,
            ..Self::default()
        }
    }

    pub fn converge(tol: f64, max_iter: usize) -> Self {
        SolverConfig {
            tol,
            max_iter,
            ..Self::default()
        }
    }

    pub(crate) fn validate(&self) -> crate::error::Result<()> {
        if !(self.tol > 0.0) {
            return Err(crate::error::Error::InvalidParameter(format!(
                "solver tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(crate::error::Error::InvalidParameter(
                "solver budget must be at least one iteration".into(),
            ));
        }
        Ok(())
    }
}

/// Telemetry for one iteration.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub k: usize,
    /// Euclidean residual norm (a Givens-recurrence estimate between GMRES
    /// restarts, the true norm everywhere else).
    pub residual_norm: f64,
    /// residual_norm relative to ||b|| (to the initial residual when b = 0).
    pub rel_residual: f64,
    pub error_norm_vs_reference: Option<f64>,
    /// (probe index, analytic - iterate) pairs, filled by observers.
    pub probe_errors: Vec<(usize, f64)>,
    pub front_position: Option<usize>,
    pub iterate_snapshot: Option<Vec<f64>>,
}

impl IterationRecord {
    fn new(k: usize, residual_norm: f64, rel_residual: f64) -> Self {
        IterationRecord {
            k,
            residual_norm,
            rel_residual,
            error_norm_vs_reference: None,
            probe_errors: Vec::new(),
            front_position: None,
            iterate_snapshot: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Tolerance,
    Budget,
    Breakdown,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StopReason::Tolerance => "tolerance",
            StopReason::Budget => "budget",
            StopReason::Breakdown => "breakdown",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub records: Vec<IterationRecord>,
    pub final_iterate: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub stop_reason: StopReason,
}

impl SolveReport {
    pub(crate) fn empty() -> Self {
        SolveReport {
            records: Vec::new(),
            final_iterate: Vec::new(),
            converged: false,
            iterations: 0,
            stop_reason: StopReason::Breakdown,
        }
    }

    /// Final relative residual (last record).
    pub fn final_rel_residual(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.rel_residual)
    }
}

/// Receives every iteration record, may enrich it in place, and may request
/// iterate snapshots for chosen iteration numbers.
pub trait SolveObserver {
    /// Whether `iterate_snapshot` should be retained for iteration `k`.
    fn wants_snapshot(&self, _k: usize) -> bool {
        false
    }

    /// Called once for k = 0 and once per iteration, after the solver filled
    /// the residual fields. `iterate` is the current approximation.
    fn on_iteration(&mut self, _record: &mut IterationRecord, _iterate: &[f64]) {}

    /// Search-direction introspection hook (CG emits p_k here).
    fn on_search_direction(&mut self, _k: usize, _direction: &[f64]) {}
}

/// Observer that records nothing.
pub struct NullObserver;

impl SolveObserver for NullObserver {}

/// Applies a preconditioner to a residual vector, z = C r.
pub trait Preconditioner {
    fn apply(&self, r: &[f64]) -> Vec<f64>;
}

/// Shared bookkeeping for residual normalization and record emission.
pub(crate) struct Telemetry<'a> {
    pub records: Vec<IterationRecord>,
    denom: f64,
    observer: &'a mut dyn SolveObserver,
}

impl<'a> Telemetry<'a> {
    pub fn new(b: &[f64], r0_norm: f64, observer: &'a mut dyn SolveObserver) -> Self {
        let b_norm = norm2(b);
        let denom = if b_norm > 0.0 { b_norm } else { r0_norm };
        Telemetry {
            records: Vec::new(),
            denom,
            observer,
        }
    }

    pub fn rel(&self, residual_norm: f64) -> f64 {
        if self.denom > 0.0 {
            residual_norm / self.denom
        } else {
            0.0
        }
    }

    pub fn emit(&mut self, k: usize, residual_norm: f64, iterate: &[f64]) {
        let mut record = IterationRecord::new(k, residual_norm, self.rel(residual_norm));
        if self.observer.wants_snapshot(k) {
            record.iterate_snapshot = Some(iterate.to_vec());
        }
        self.observer.on_iteration(&mut record, iterate);
        self.records.push(record);
    }

    /// Replaces the residual fields of the most recent record (true-residual
    /// resync at GMRES restarts).
    pub fn resync_last(&mut self, residual_norm: f64) {
        let rel = self.rel(residual_norm);
        if let Some(rec) = self.records.last_mut() {
            rec.residual_norm = residual_norm;
            rec.rel_residual = rel;
        }
    }

    pub fn on_search_direction(&mut self, k: usize, direction: &[f64]) {
        self.observer.on_search_direction(k, direction);
    }
}
