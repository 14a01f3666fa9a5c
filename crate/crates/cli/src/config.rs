//! Flat key=value scenario configuration.
//!
//! The format is dotted-section plain text, one `key = value` per line with
//! `#` comments, chosen for zero-dependency parsing and easy diffing:
//!
//! ```text
//! problem.kind = 1d
//! problem.n = 64
//! problem.gamma = 2.0
//! solver.method = cg
//! solver.max_iter = 64
//! solver.mode = fixed_budget
//! ```

use anyhow::{anyhow, bail, Context, Result};
use sparselab_core::precond::PreconditionerSpec;
use sparselab_core::problems::InitialGuess;
use sparselab_core::solvers::Mode;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemKind {
    OneD { n: usize, gamma: f64, f_const: f64 },
    TwoD { m: usize, n: usize },
    Identity { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Cg,
    Jacobi,
    GsForward,
    GsBackward,
    Sor,
    Gmres,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Cg => "cg",
            Method::Jacobi => "jacobi",
            Method::GsForward => "gs_forward",
            Method::GsBackward => "gs_backward",
            Method::Sor => "sor",
            Method::Gmres => "gmres",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub problem: ProblemKind,
    pub method: Method,
    pub tol: f64,
    pub max_iter: usize,
    pub mode: Mode,
    pub rho: f64,
    pub omega: f64,
    pub restart_len: usize,
    pub precond: PreconditionerSpec,
    pub initial_guess: InitialGuess,
    pub snapshots: Vec<usize>,
    /// `None` means the problem's default probe set.
    pub probes: Option<Vec<usize>>,
    pub outputs: PathBuf,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            problem: ProblemKind::OneD {
                n: 64,
                gamma: 2.0,
                f_const: 0.0,
            },
            method: Method::Cg,
            tol: 1e-8,
            max_iter: 100,
            mode: Mode::Converge,
            rho: 1.0,
            omega: 1.9,
            restart_len: 0,
            precond: PreconditionerSpec::Identity,
            initial_guess: InitialGuess::Zero,
            snapshots: Vec::new(),
            probes: None,
            outputs: PathBuf::from("out"),
            seed: 0,
        }
    }
}

/// Raw key=value map preserving unknown-key detection and sweep overrides.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pub entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let stripped = match line.find('#') {
                Some(pos) => &line[..pos],
                None => line,
            };
            let stripped = stripped.trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or_else(|| {
                anyhow!("line {line_no}: expected 'key = value', got '{stripped}'")
            })?;
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(RawConfig { entries })
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

/// Canonical config key for a sweep parameter name (accepts both the full
/// dotted key and the bare field name).
pub fn resolve_param_key(name: &str) -> Result<&'static str> {
    let known: &[(&str, &str)] = &[
        ("problem.kind", "problem.kind"),
        ("problem.n", "problem.n"),
        ("n", "problem.n"),
        ("problem.m", "problem.m"),
        ("m", "problem.m"),
        ("problem.gamma", "problem.gamma"),
        ("gamma", "problem.gamma"),
        ("problem.f_const", "problem.f_const"),
        ("f_const", "problem.f_const"),
        ("solver.method", "solver.method"),
        ("method", "solver.method"),
        ("solver.tol", "solver.tol"),
        ("tol", "solver.tol"),
        ("solver.max_iter", "solver.max_iter"),
        ("max_iter", "solver.max_iter"),
        ("solver.mode", "solver.mode"),
        ("mode", "solver.mode"),
        ("solver.rho", "solver.rho"),
        ("rho", "solver.rho"),
        ("solver.omega", "solver.omega"),
        ("omega", "solver.omega"),
        ("solver.restart_len", "solver.restart_len"),
        ("restart_len", "solver.restart_len"),
        ("precond.kind", "precond.kind"),
        ("precond.levels", "precond.levels"),
        ("levels", "precond.levels"),
        ("initial_guess.kind", "initial_guess.kind"),
        ("initial_guess.gamma0", "initial_guess.gamma0"),
        ("gamma0", "initial_guess.gamma0"),
        ("seed", "seed"),
    ];
    known
        .iter()
        .find(|(alias, _)| *alias == name)
        .map(|(_, key)| *key)
        .ok_or_else(|| {
            anyhow!(
                "unknown sweep parameter '{name}'; use a config key such as solver.omega or \
                 solver.restart_len"
            )
        })
}

const KNOWN_KEYS: &[&str] = &[
    "problem.kind",
    "problem.n",
    "problem.m",
    "problem.gamma",
    "problem.f_const",
    "solver.method",
    "solver.tol",
    "solver.max_iter",
    "solver.mode",
    "solver.rho",
    "solver.omega",
    "solver.restart_len",
    "precond.kind",
    "precond.levels",
    "initial_guess.kind",
    "initial_guess.gamma0",
    "snapshots",
    "probes",
    "outputs",
    "seed",
];

impl ScenarioConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_raw(&RawConfig::parse(text)?)
    }

    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        for key in raw.entries.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                bail!("unknown config key '{key}'");
            }
        }
        let get = |key: &str| raw.entries.get(key).map(String::as_str);
        let parse_f64 = |key: &str| -> Result<Option<f64>> {
            get(key)
                .map(|v| v.parse::<f64>().with_context(|| format!("{key} = {v}")))
                .transpose()
        };
        let parse_usize = |key: &str| -> Result<Option<usize>> {
            get(key)
                .map(|v| v.parse::<usize>().with_context(|| format!("{key} = {v}")))
                .transpose()
        };

        let mut cfg = ScenarioConfig::default();

        let kind = get("problem.kind").unwrap_or("1d");
        cfg.problem = match kind {
            "1d" => ProblemKind::OneD {
                n: parse_usize("problem.n")?
                    .ok_or_else(|| anyhow!("problem.n is required for problem.kind = 1d"))?,
                gamma: parse_f64("problem.gamma")?.unwrap_or(0.0),
                f_const: parse_f64("problem.f_const")?.unwrap_or(0.0),
            },
            "2d" => ProblemKind::TwoD {
                m: parse_usize("problem.m")?
                    .ok_or_else(|| anyhow!("problem.m is required for problem.kind = 2d"))?,
                n: parse_usize("problem.n")?
                    .ok_or_else(|| anyhow!("problem.n is required for problem.kind = 2d"))?,
            },
            "identity" => ProblemKind::Identity {
                n: parse_usize("problem.n")?
                    .ok_or_else(|| anyhow!("problem.n is required for problem.kind = identity"))?,
            },
            other => bail!("problem.kind = {other}: expected 1d, 2d or identity"),
        };

        cfg.method = match get("solver.method").unwrap_or("cg") {
            "cg" => Method::Cg,
            "jacobi" => Method::Jacobi,
            "gs_forward" => Method::GsForward,
            "gs_backward" => Method::GsBackward,
            "sor" => Method::Sor,
            "gmres" => Method::Gmres,
            other => bail!(
                "solver.method = {other}: expected cg, jacobi, gs_forward, gs_backward, sor or gmres"
            ),
        };
        if let Some(tol) = parse_f64("solver.tol")? {
            cfg.tol = tol;
        }
        if let Some(mi) = parse_usize("solver.max_iter")? {
            cfg.max_iter = mi;
        }
        cfg.mode = match get("solver.mode").unwrap_or("converge") {
            "converge" => Mode::Converge,
            "fixed_budget" => Mode::FixedBudget,
            other => bail!("solver.mode = {other}: expected converge or fixed_budget"),
        };
        if let Some(rho) = parse_f64("solver.rho")? {
            cfg.rho = rho;
        }
        if let Some(omega) = parse_f64("solver.omega")? {
            cfg.omega = omega;
        }
        if let Some(r) = parse_usize("solver.restart_len")? {
            cfg.restart_len = r;
        }

        cfg.precond = match get("precond.kind").unwrap_or("identity") {
            "identity" => PreconditionerSpec::Identity,
            "hierarchical" => PreconditionerSpec::Hierarchical {
                levels: parse_usize("precond.levels")?.ok_or_else(|| {
                    anyhow!("precond.levels is required for precond.kind = hierarchical")
                })?,
            },
            other => bail!("precond.kind = {other}: expected identity or hierarchical"),
        };

        cfg.initial_guess = match get("initial_guess.kind").unwrap_or("zero") {
            "zero" => InitialGuess::Zero,
            "analytic_family" => InitialGuess::AnalyticFamily {
                gamma0: parse_f64("initial_guess.gamma0")?.ok_or_else(|| {
                    anyhow!(
                        "initial_guess.gamma0 is required for initial_guess.kind = analytic_family"
                    )
                })?,
            },
            other => bail!("initial_guess.kind = {other}: expected zero or analytic_family"),
        };

        if let Some(list) = get("snapshots") {
            cfg.snapshots =
                parse_index_list(list).with_context(|| format!("snapshots = {list}"))?;
        }
        if let Some(list) = get("probes") {
            cfg.probes = if list == "default" {
                None
            } else {
                Some(parse_index_list(list).with_context(|| format!("probes = {list}"))?)
            };
        }
        if let Some(dir) = get("outputs") {
            cfg.outputs = PathBuf::from(dir);
        }
        if let Some(seed) = get("seed") {
            cfg.seed = seed.parse().with_context(|| format!("seed = {seed}"))?;
        }
        Ok(cfg)
    }

    /// Serializes back to the flat text form (written into every bundle).
    pub fn to_text(&self) -> String {
        let mut raw = RawConfig::default();
        match &self.problem {
            ProblemKind::OneD { n, gamma, f_const } => {
                raw.set("problem.kind", "1d");
                raw.set("problem.n", &n.to_string());
                raw.set("problem.gamma", &format_f64(*gamma));
                raw.set("problem.f_const", &format_f64(*f_const));
            }
            ProblemKind::TwoD { m, n } => {
                raw.set("problem.kind", "2d");
                raw.set("problem.m", &m.to_string());
                raw.set("problem.n", &n.to_string());
            }
            ProblemKind::Identity { n } => {
                raw.set("problem.kind", "identity");
                raw.set("problem.n", &n.to_string());
            }
        }
        raw.set("solver.method", self.method.name());
        raw.set("solver.tol", &format!("{:e}", self.tol));
        raw.set("solver.max_iter", &self.max_iter.to_string());
        raw.set(
            "solver.mode",
            match self.mode {
                Mode::Converge => "converge",
                Mode::FixedBudget => "fixed_budget",
            },
        );
        if self.method == Method::Jacobi {
            raw.set("solver.rho", &format_f64(self.rho));
        }
        if self.method == Method::Sor {
            raw.set("solver.omega", &format_f64(self.omega));
        }
        if self.method == Method::Gmres {
            raw.set("solver.restart_len", &self.restart_len.to_string());
        }
        match self.precond {
            PreconditionerSpec::Identity => raw.set("precond.kind", "identity"),
            PreconditionerSpec::Hierarchical { levels } => {
                raw.set("precond.kind", "hierarchical");
                raw.set("precond.levels", &levels.to_string());
            }
        }
        match self.initial_guess {
            InitialGuess::Zero => raw.set("initial_guess.kind", "zero"),
            InitialGuess::AnalyticFamily { gamma0 } => {
                raw.set("initial_guess.kind", "analytic_family");
                raw.set("initial_guess.gamma0", &format_f64(gamma0));
            }
        }
        if !self.snapshots.is_empty() {
            raw.set("snapshots", &join_indices(&self.snapshots));
        }
        if let Some(probes) = &self.probes {
            raw.set("probes", &join_indices(probes));
        }
        raw.set("outputs", &self.outputs.display().to_string());
        raw.set("seed", &self.seed.to_string());
        raw.to_text()
    }
}

fn format_f64(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

fn parse_index_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|e| anyhow!("{s}: {e}")))
        .collect()
}

fn join_indices(list: &[usize]) -> String {
    list.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}
