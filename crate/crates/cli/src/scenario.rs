//! Scenario files: schema, loading, and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use branchlab::complexity::{SearchMode, DEFAULT_DELTA, DEFAULT_EXACT_BUDGET, DEFAULT_HEURISTIC_BUDGET};
use branchlab::corpus::StateSpec;
use branchlab::dynamics::{HamiltonianSpec, Segment, DEFAULT_THETA};
use branchlab::family::CandidateFamily;
use branchlab::lattice::{GateSet, LatticeSpec, Observable, StateVector, DEFAULT_MAX_SITES};
use serde::{Deserialize, Serialize};

/// Exact search beyond this many sites gets a feasibility warning.
const EXACT_SITE_WARNING: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Heuristic,
}

impl Mode {
    pub fn search_mode(self) -> SearchMode {
        match self {
            Mode::Exact => SearchMode::ExactBfs,
            Mode::Heuristic => SearchMode::HeuristicLayers,
        }
    }

    pub fn default_budget(self) -> u32 {
        match self {
            Mode::Exact => DEFAULT_EXACT_BUDGET,
            Mode::Heuristic => DEFAULT_HEURISTIC_BUDGET,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitterKind {
    Tm,
    Weingarten,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSplit {
    Tm,
    Weingarten,
    /// One branch per basis state carrying amplitude.
    Computational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    RandomCircuit,
    Hamiltonian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TmSection {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_threshold")]
    pub threshold: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u32>,
    #[serde(default)]
    pub family: CandidateFamily,
}

impl Default for TmSection {
    fn default() -> Self {
        Self {
            epsilon: default_epsilon(),
            threshold: default_threshold(),
            budget: None,
            family: CandidateFamily::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeingartenSection {
    #[serde(default = "default_b")]
    pub b: f64,
    /// Optional sweep, in increasing order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_values: Option<Vec<f64>>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u32>,
    /// Reference state; `|0...0>` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vacuum: Option<StateSpec>,
    #[serde(default)]
    pub family: CandidateFamily,
}

impl Default for WeingartenSection {
    fn default() -> Self {
        Self {
            b: default_b(),
            b_values: None,
            delta: default_delta(),
            budget: None,
            vacuum: None,
            family: CandidateFamily::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexitySection {
    /// Defaults to `|0...0>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<StateSpec>,
    /// Defaults to the scenario state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<StateSpec>,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

impl Default for ComplexitySection {
    fn default() -> Self {
        Self {
            source: None,
            target: None,
            delta: default_delta(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    pub hamiltonian: HamiltonianSpec,
    /// Forward steps; ignored when `schedule` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<Segment>>,
    #[serde(default = "one")]
    pub sample_every: usize,
    pub splitter: SplitterKind,
    #[serde(default = "default_theta")]
    pub theta: f64,
}

impl DynamicsSection {
    pub fn segments(&self) -> Vec<Segment> {
        match &self.schedule {
            Some(s) => s.clone(),
            None => vec![Segment {
                steps: self.steps.unwrap_or(0),
                reversed: false,
            }],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub evolution: ProbeKind,
    #[serde(default)]
    pub rule: branchlab::dynamics::GateRule,
    /// Independent random-circuit runs, seeded `seed, seed + 1, ...`.
    #[serde(default = "one")]
    pub runs: usize,
    pub horizon: usize,
    #[serde(default = "one")]
    pub stride: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Falls back to the dynamics Hamiltonian.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    /// Pauli strings such as `"X0 X1"`; `"single_site"` expands to every
    /// single-site Pauli.
    pub observables: Vec<String>,
    #[serde(default = "default_split")]
    pub split: SampleSplit,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub n_sites: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u32>,
    /// `"clifford+t"` or a path to a JSON gate-set file.
    #[serde(default = "default_gate_set")]
    pub gate_set: String,
    pub state: StateSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complexity: Option<ComplexitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tm: Option<TmSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weingarten: Option<WeingartenSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

fn one() -> usize {
    1
}
fn default_epsilon() -> f64 {
    0.1
}
fn default_threshold() -> i64 {
    1
}
fn default_b() -> f64 {
    1.0
}
fn default_delta() -> f64 {
    DEFAULT_DELTA
}
fn default_theta() -> f64 {
    DEFAULT_THETA
}
fn default_samples() -> usize {
    10_000
}
fn default_split() -> SampleSplit {
    SampleSplit::Tm
}
fn default_mode() -> Mode {
    Mode::Exact
}
fn default_gate_set() -> String {
    "clifford+t".into()
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub budget: Option<u32>,
}

#[derive(Debug)]
pub enum LoadError {
    Unreadable { path: PathBuf, message: String },
    Schema { path: PathBuf, message: String },
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Unreadable { path, message } => write!(f, "cannot read {}: {message}", path.display()),
            LoadError::Schema { path, message } => write!(f, "{}: {}", path.display(), message.trim_end()),
        }
    }
}

impl std::error::Error for LoadError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}: {}", self.field, self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

impl Scenario {
    /// Parses a scenario and makes relative file paths relative to its directory.
    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::Unreadable {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut s: Scenario = toml::from_str(&text).map_err(|e| LoadError::Schema {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        s.rebase(base);
        Ok(s)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |spec: &mut StateSpec| {
            if let StateSpec::File { path } = spec {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.state);
        if let Some(c) = &mut self.complexity {
            c.source.iter_mut().chain(c.target.iter_mut()).for_each(fix);
        }
        if let Some(w) = &mut self.weingarten {
            w.vacuum.iter_mut().for_each(fix);
        }
        if self.gate_set != "clifford+t" && Path::new(&self.gate_set).is_relative() {
            self.gate_set = base.join(&self.gate_set).display().to_string();
        }
    }

    /// Applies overrides and pins every budget, so the result is the full
    /// configuration a run actually used.
    pub fn resolve(mut self, o: &Overrides) -> Self {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(mode) = o.mode {
            self.mode = mode;
        }
        let base = o.budget.or(self.budget).unwrap_or(self.mode.default_budget());
        self.budget = Some(base);
        if let Some(t) = &mut self.tm {
            t.budget = Some(o.budget.or(t.budget).unwrap_or(base));
        }
        if let Some(w) = &mut self.weingarten {
            w.budget = Some(o.budget.or(w.budget).unwrap_or(base));
        }
        self
    }

    pub fn budget(&self) -> u32 {
        self.budget.unwrap_or(self.mode.default_budget())
    }

    pub fn lattice(&self) -> branchlab::Result<LatticeSpec> {
        LatticeSpec::new(self.n_sites)
    }

    pub fn gate_set(&self) -> branchlab::Result<GateSet> {
        if self.gate_set == "clifford+t" {
            return Ok(GateSet::clifford_t());
        }
        let text = std::fs::read_to_string(&self.gate_set)
            .map_err(|e| branchlab::Error::Invalid(format!("gate set {}: {e}", self.gate_set)))?;
        let set: GateSet = serde_json::from_str(&text)
            .map_err(|e| branchlab::Error::Invalid(format!("gate set {}: {e}", self.gate_set)))?;
        set.validate()?;
        Ok(set)
    }

    pub fn initial_state(&self) -> branchlab::Result<StateVector> {
        self.state.build(self.lattice()?, &self.gate_set()?)
    }

    /// Every violation found, errors and warnings, in field order.
    pub fn check(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut err = |field: &str, message: String| {
            out.push(Diagnostic {
                severity: Severity::Error,
                field: field.into(),
                message,
            })
        };
        if self.name.trim().is_empty() {
            err("name", "must not be empty".into());
        }
        let lattice = match self.lattice() {
            Ok(l) => Some(l),
            Err(_) => {
                err(
                    "n_sites",
                    format!("{} is outside the legal range [1, {DEFAULT_MAX_SITES}]", self.n_sites),
                );
                None
            }
        };
        let gate_set = match self.gate_set() {
            Ok(g) => Some(g),
            Err(e) => {
                err("gate_set", e.to_string());
                None
            }
        };
        let mut build = |field: &str, spec: &StateSpec| {
            if let (Some(l), Some(g)) = (lattice, gate_set.as_ref()) {
                if let Err(e) = spec.build(l, g) {
                    err(field, e.to_string());
                }
            }
        };
        build("state", &self.state);
        if let Some(c) = &self.complexity {
            if let Some(s) = &c.source {
                build("complexity.source", s);
            }
            if let Some(t) = &c.target {
                build("complexity.target", t);
            }
        }
        if let Some(w) = &self.weingarten {
            if let Some(v) = &w.vacuum {
                build("weingarten.vacuum", v);
            }
        }

        let mut err = |field: &str, message: String| {
            out.push(Diagnostic {
                severity: Severity::Error,
                field: field.into(),
                message,
            })
        };
        let n = self.n_sites;
        let family_check = |family: &CandidateFamily| -> Option<String> {
            lattice.and_then(|_| family.candidates(n).err().map(|e| e.to_string()))
        };
        if let Some(c) = &self.complexity {
            check_open("complexity.delta", c.delta, 0.0, 1.0, &mut err);
        }
        if let Some(t) = &self.tm {
            check_open("tm.epsilon", t.epsilon, 0.0, 0.5, &mut err);
            if let Some(m) = family_check(&t.family) {
                err("tm.family", m);
            }
        }
        if let Some(w) = &self.weingarten {
            if !(w.b.is_finite() && w.b >= 0.0) {
                err("weingarten.b", format!("{} is outside the legal range [0, inf)", w.b));
            }
            if let Some(bs) = &w.b_values {
                if bs.is_empty() {
                    err("weingarten.b_values", "must not be empty".into());
                } else if bs.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
                    err("weingarten.b_values", "every value must lie in [0, inf)".into());
                } else if bs.windows(2).any(|p| p[1] < p[0]) {
                    err("weingarten.b_values", "must be sorted in increasing order".into());
                }
            }
            check_open("weingarten.delta", w.delta, 0.0, 1.0, &mut err);
            if let Some(m) = family_check(&w.family) {
                err("weingarten.family", m);
            }
        }
        if let Some(d) = &self.dynamics {
            if let Some(l) = lattice {
                if let Err(e) = d.hamiltonian.validate(&l) {
                    err("dynamics.hamiltonian", e.to_string());
                }
            }
            if d.schedule.is_none() && d.steps.is_none() {
                err("dynamics", "needs `steps` or `schedule`".into());
            }
            if d.sample_every == 0 {
                err("dynamics.sample_every", "0 is outside the legal range [1, inf)".into());
            }
            if !(d.theta > 0.5 && d.theta <= 1.0) {
                err(
                    "dynamics.theta",
                    format!("{} is outside the legal range (0.5, 1]", d.theta),
                );
            }
            if d.segments().iter().map(|s| s.steps).sum::<usize>() == 0 {
                err("dynamics", "schedule has no steps".into());
            }
        }
        if let Some(p) = &self.probe {
            if p.horizon == 0 {
                err("probe.horizon", "0 is outside the legal range [1, inf)".into());
            }
            if p.stride == 0 {
                err("probe.stride", "0 is outside the legal range [1, inf)".into());
            }
            if p.runs == 0 {
                err("probe.runs", "0 is outside the legal range [1, inf)".into());
            }
            check_open("probe.delta", p.delta, 0.0, 1.0, &mut err);
            if p.evolution == ProbeKind::Hamiltonian && p.hamiltonian.is_none() && self.dynamics.is_none() {
                err(
                    "probe.hamiltonian",
                    "Hamiltonian probe needs `probe.hamiltonian` or a `dynamics` section".into(),
                );
            }
            if let (Some(h), Some(l)) = (&p.hamiltonian, lattice) {
                if let Err(e) = h.validate(&l) {
                    err("probe.hamiltonian", e.to_string());
                }
            }
        }
        if let Some(s) = &self.sampling {
            if s.n_samples == 0 {
                err("sampling.n_samples", "0 is outside the legal range [1, inf)".into());
            }
            if s.observables.is_empty() {
                err("sampling.observables", "must not be empty".into());
            }
            for (k, o) in s.observables.iter().enumerate() {
                if let Err(e) = expand_observable(o, n) {
                    err(&format!("sampling.observables[{k}]"), e.to_string());
                }
            }
        }

        let mut warn = |field: &str, message: String| {
            out.push(Diagnostic {
                severity: Severity::Warning,
                field: field.into(),
                message,
            })
        };
        if self.mode == Mode::Exact && n > EXACT_SITE_WARNING {
            let placements = gate_set
                .as_ref()
                .map(|g| {
                    let one = g.gates.iter().filter(|d| d.arity.sites() == 1).count();
                    let two = g.gates.len() - one;
                    one * n + two * 2 * n.saturating_sub(1)
                })
                .unwrap_or(0);
            warn(
                "mode",
                format!(
                    "exact search on {n} sites at budget {} explores up to {placements}^{} frames over a 2^{n}-dimensional space; this is likely infeasible, use a smaller budget or heuristic mode",
                    self.budget(),
                    self.budget().div_ceil(2),
                ),
            );
        }
        for (field, h) in self
            .dynamics
            .iter()
            .map(|d| ("dynamics.hamiltonian", &d.hamiltonian))
            .chain(
                self.probe
                    .iter()
                    .filter_map(|p| p.hamiltonian.as_ref().map(|h| ("probe.hamiltonian", h))),
            )
        {
            for m in h.guard_warnings() {
                warn(field, m);
            }
        }
        out
    }
}

fn check_open(field: &str, v: f64, lo: f64, hi: f64, err: &mut impl FnMut(&str, String)) {
    if !(v > lo && v < hi) {
        err(field, format!("{v} is outside the legal range ({lo}, {hi})"));
    }
}

/// Parses one observable entry, expanding `"single_site"`.
pub fn expand_observable(entry: &str, n_sites: usize) -> branchlab::Result<Vec<Observable>> {
    if entry.trim() == "single_site" {
        let mut out = Vec::with_capacity(3 * n_sites);
        for i in 0..n_sites {
            for p in ["X", "Y", "Z"] {
                out.push(Observable::pauli(&format!("{p}{i}"))?);
            }
        }
        return Ok(out);
    }
    let obs = Observable::pauli(entry)?;
    if let Observable::Pauli(ps) = &obs {
        if let Some(m) = ps.max_site() {
            if m >= n_sites {
                return Err(branchlab::Error::SiteOutOfRange { site: m, n_sites });
            }
        }
    }
    Ok(vec![obs])
}
