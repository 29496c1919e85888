//! Subcommand runners. Each returns a JSON result plus CSV tables.

use std::sync::Arc;

use branchlab::complexity::{ComplexityCache, ComplexityOracle, ComplexityResult, Status};
use branchlab::corpus::StateSpec;
use branchlab::dynamics::{
    complexity_growth_probe, track_branches, verify_tree, BranchTree, GrowthSeries, ProbeEvolution, Schedule, Splitter,
    TreeVerification,
};
use branchlab::lattice::{make_decomposition, Decomposition, GateSet, ProjectorSpec, StateVector};
use branchlab::sampling::{collapse_report, CollapseReport};
use branchlab::tm::{search_tm_split, TmConfig, TmSearch};
use branchlab::weingarten::{b_sweep, minimize_q, BSweep, QConfig, QSearch};
use serde::Serialize;
use serde_json::Value;

use crate::scenario::{expand_observable, ProbeKind, SampleSplit, Scenario, SplitterKind};

/// Overlap above which a TM branch and a Weingarten branch count as the same.
const AGREEMENT_OVERLAP: f64 = 1.0 - 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Complexity,
    Tm,
    Weingarten,
    Evolve,
    Sample,
    Compare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Complexity => "complexity",
            Command::Tm => "tm",
            Command::Weingarten => "weingarten",
            Command::Evolve => "evolve",
            Command::Sample => "sample",
            Command::Compare => "compare",
        }
    }

    /// Names the scenario section this command needs but cannot find.
    pub fn missing_section(self, scenario: &Scenario) -> Option<&'static str> {
        match self {
            Command::Evolve if scenario.dynamics.is_none() && scenario.probe.is_none() => Some("dynamics` or `probe"),
            Command::Sample if scenario.sampling.is_none() => Some("sampling"),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub struct Outcome {
    pub result: Value,
    pub tables: Vec<Table>,
    /// One-line human summary.
    pub summary: String,
}

#[derive(Serialize)]
struct Report<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'static str,
    config: &'a Scenario,
    gate_set: &'a GateSet,
    result: &'a Value,
}

/// The deterministic report document.
pub fn report_json(command: Command, scenario: &Scenario, gate_set: &GateSet, outcome: &Outcome) -> String {
    let r = Report {
        tool: "branchlab",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: command.name(),
        config: scenario,
        gate_set,
        result: &outcome.result,
    };
    let mut s = serde_json::to_string_pretty(&r).expect("reports serialize");
    s.push('\n');
    s
}

pub struct Context {
    pub scenario: Scenario,
    pub gate_set: GateSet,
    pub psi: StateVector,
    pub oracle: ComplexityOracle,
}

impl Context {
    /// Expects a resolved, validated scenario.
    pub fn new(scenario: Scenario) -> branchlab::Result<Self> {
        let gate_set = scenario.gate_set()?;
        let psi = scenario.initial_state()?;
        let cache = ComplexityCache::from_env()?;
        let oracle = ComplexityOracle::new(gate_set.clone()).with_cache(Arc::new(cache));
        Ok(Self {
            scenario,
            gate_set,
            psi,
            oracle,
        })
    }

    fn build(&self, spec: &StateSpec) -> branchlab::Result<StateVector> {
        spec.build(self.psi.lattice(), &self.gate_set)
    }

    fn tm_config(&self) -> (TmConfig, branchlab::family::CandidateFamily) {
        let t = self.scenario.tm.clone().unwrap_or_default();
        let cfg = TmConfig {
            epsilon: t.epsilon,
            mode: self.scenario.mode.search_mode(),
            budget: t.budget.unwrap_or(self.scenario.budget()),
            threshold: t.threshold,
        };
        (cfg, t.family)
    }

    fn q_config(&self) -> branchlab::Result<(QConfig, branchlab::family::CandidateFamily, Option<Vec<f64>>)> {
        let w = self.scenario.weingarten.clone().unwrap_or_default();
        let vacuum = w.vacuum.as_ref().map(|v| self.build(v)).transpose()?;
        let cfg = QConfig {
            b: w.b,
            vacuum,
            mode: self.scenario.mode.search_mode(),
            budget: w.budget.unwrap_or(self.scenario.budget()),
            delta: w.delta,
        };
        Ok((cfg, w.family, w.b_values))
    }

    fn splitter(&self, kind: SplitterKind) -> branchlab::Result<Splitter> {
        Ok(match kind {
            SplitterKind::Tm => {
                let (config, family) = self.tm_config();
                Splitter::Tm { config, family }
            }
            SplitterKind::Weingarten => {
                let (config, family, _) = self.q_config()?;
                Splitter::Weingarten { config, family }
            }
        })
    }

    pub fn run(&self, command: Command) -> branchlab::Result<Outcome> {
        match command {
            Command::Complexity => self.complexity(),
            Command::Tm => self.tm(),
            Command::Weingarten => self.weingarten(),
            Command::Evolve => self.evolve(),
            Command::Sample => self.sample(),
            Command::Compare => self.compare(),
        }
    }

    fn complexity(&self) -> branchlab::Result<Outcome> {
        let section = self.scenario.complexity.clone().unwrap_or_default();
        let source_spec = section.source.unwrap_or(StateSpec::named("zero"));
        let target_spec = section.target.unwrap_or(self.scenario.state.clone());
        let source = self.build(&source_spec)?;
        let target = self.build(&target_spec)?;
        let result = self.oracle.state_complexity(
            &source,
            &target,
            section.delta,
            self.scenario.mode.search_mode(),
            self.scenario.budget(),
        )?;
        #[derive(Serialize)]
        struct Out<'a> {
            source: String,
            target: String,
            delta: f64,
            complexity: &'a ComplexityResult,
        }
        let out = Out {
            source: source_spec.label(),
            target: target_spec.label(),
            delta: section.delta,
            complexity: &result,
        };
        let mut t = Table::new("complexity", &["source", "target", "value", "status", "cutoff"]);
        t.push(vec![
            out.source.clone(),
            out.target.clone(),
            result.value.to_string(),
            status_name(result.status).into(),
            result.cutoff.to_string(),
        ]);
        Ok(Outcome {
            summary: format!("C = {} ({})", result.value, status_name(result.status)),
            result: to_value(&out),
            tables: vec![t],
        })
    }

    fn tm(&self) -> branchlab::Result<Outcome> {
        let (cfg, family) = self.tm_config();
        let search = search_tm_split(&self.oracle, &self.psi, &family, &cfg)?;
        let tables = tm_tables(&search);
        let summary = match &search.best_report {
            Some(r) => format!(
                "best split {} with branchiness {} ({}), good split: {}",
                search.candidates[search.best.expect("best set with report")].label,
                r.branchiness,
                if r.certified { "certified" } else { "uncertified" },
                search.good_split
            ),
            None => "no candidate splits the state".into(),
        };
        Ok(Outcome {
            result: to_value(&search),
            tables,
            summary,
        })
    }

    fn weingarten(&self) -> branchlab::Result<Outcome> {
        let (cfg, family, b_values) = self.q_config()?;
        let search = minimize_q(&self.oracle, &self.psi, &family, &cfg)?;
        let sweep = b_values
            .map(|bs| b_sweep(&self.oracle, &self.psi, &cfg, &bs, &family))
            .transpose()?;
        #[derive(Serialize)]
        struct Out<'a> {
            minimum: &'a QSearch,
            #[serde(skip_serializing_if = "Option::is_none")]
            sweep: Option<&'a BSweep>,
        }
        let mut tables = Vec::new();
        let mut branches = Table::new("branches", &["label", "weight", "complexity", "status"]);
        for b in &search.best.branches {
            branches.push(vec![
                b.label.clone(),
                fmt_f(b.weight),
                b.complexity.value.to_string(),
                status_name(b.complexity.status).into(),
            ]);
        }
        tables.push(branches);
        let mut summary = format!(
            "q = {} with {} branch(es) at b = {}",
            fmt_f(search.best.q_value),
            search.best.n_branches(),
            cfg.b
        );
        if let Some(s) = &sweep {
            let mut t = Table::new(
                "sweep",
                &["b", "q_value", "n_branches", "q_gap", "near_tie", "exact", "labels"],
            );
            for r in &s.rows {
                t.push(vec![
                    fmt_f(r.b),
                    fmt_f(r.q_value),
                    r.n_branches.to_string(),
                    r.q_gap.map(fmt_f).unwrap_or_default(),
                    r.near_tie.to_string(),
                    r.exact.to_string(),
                    r.labels.join(";"),
                ]);
            }
            tables.push(t);
            for c in &s.crossovers {
                summary.push_str(&format!(
                    "; crossover {} -> {} branches in [{}, {}], b* = {}",
                    c.from_branches,
                    c.to_branches,
                    c.b_low,
                    c.b_high,
                    fmt_f(c.b_star)
                ));
            }
        }
        Ok(Outcome {
            result: to_value(&Out {
                minimum: &search,
                sweep: sweep.as_ref(),
            }),
            tables,
            summary,
        })
    }

    fn evolve(&self) -> branchlab::Result<Outcome> {
        let s = &self.scenario;
        if s.dynamics.is_none() && s.probe.is_none() {
            return Err(branchlab::Error::Invalid(
                "evolve needs a `dynamics` or `probe` section".into(),
            ));
        }
        #[derive(Serialize)]
        struct TreeOut {
            branch_counts: Vec<usize>,
            prethermal_window: usize,
            tree: BranchTree,
            verification: TreeVerification,
        }
        #[derive(Serialize)]
        struct ProbeRun {
            seed: Option<u64>,
            series: GrowthSeries,
        }
        #[derive(Serialize)]
        struct ProbeOut {
            runs: Vec<ProbeRun>,
            horizon: usize,
            nondecreasing_runs: usize,
            final_exact: Vec<Option<u32>>,
            median_final_exact: Option<f64>,
        }
        #[derive(Serialize)]
        struct Out {
            #[serde(skip_serializing_if = "Option::is_none")]
            tree: Option<TreeOut>,
            #[serde(skip_serializing_if = "Option::is_none")]
            probe: Option<ProbeOut>,
        }
        let mut tables = Vec::new();
        let mut summary = Vec::new();

        let tree = match &s.dynamics {
            None => None,
            Some(d) => {
                let schedule = Schedule { segments: d.segments() };
                let samples: Vec<usize> = (0..=schedule.total_steps()).step_by(d.sample_every).collect();
                let splitter = self.splitter(d.splitter)?;
                let tree = track_branches(&self.oracle, &self.psi, &d.hamiltonian, &schedule, &samples, &splitter)?;
                let verification = verify_tree(&tree, d.theta)?;
                let mut t = Table::new(
                    "branches",
                    &["level", "step", "time", "net_time", "n_branches", "labels", "weights"],
                );
                for (k, l) in tree.levels.iter().enumerate() {
                    t.push(vec![
                        k.to_string(),
                        l.step.to_string(),
                        fmt_f(l.time),
                        fmt_f(l.net_time),
                        l.nodes.len().to_string(),
                        l.nodes.iter().map(|n| n.label.as_str()).collect::<Vec<_>>().join(";"),
                        l.nodes.iter().map(|n| fmt_f(n.weight)).collect::<Vec<_>>().join(";"),
                    ]);
                }
                tables.push(t);
                summary.push(format!(
                    "branch counts {:?}, window {} level(s), tree: {}, tree within window: {}",
                    tree.branch_counts(),
                    verification.window_levels,
                    verification.is_tree,
                    verification.window_is_tree
                ));
                Some(TreeOut {
                    branch_counts: tree.branch_counts(),
                    prethermal_window: tree.prethermal_window(),
                    verification,
                    tree,
                })
            }
        };

        let probe = match &s.probe {
            None => None,
            Some(p) => {
                let runs: Vec<(Option<u64>, ProbeEvolution)> = match p.evolution {
                    ProbeKind::RandomCircuit => (0..p.runs as u64)
                        .map(|k| {
                            let seed = s.seed.wrapping_add(k);
                            (Some(seed), ProbeEvolution::RandomCircuit { seed, rule: p.rule })
                        })
                        .collect(),
                    ProbeKind::Hamiltonian => {
                        let h = p
                            .hamiltonian
                            .or(s.dynamics.as_ref().map(|d| d.hamiltonian))
                            .ok_or_else(|| branchlab::Error::Invalid("probe needs a Hamiltonian".into()))?;
                        vec![(None, ProbeEvolution::Hamiltonian { hamiltonian: h })]
                    }
                };
                let mut out = Vec::with_capacity(runs.len());
                let mut t = Table::new(
                    "growth",
                    &[
                        "run",
                        "seed",
                        "step",
                        "time",
                        "value",
                        "status",
                        "lower_bound",
                        "upper_bound",
                    ],
                );
                for (k, (seed, evolution)) in runs.into_iter().enumerate() {
                    let series = complexity_growth_probe(
                        &self.oracle,
                        &self.psi,
                        &evolution,
                        p.horizon,
                        p.stride,
                        s.mode.search_mode(),
                        s.budget(),
                        p.delta,
                    )?;
                    for pt in &series.points {
                        t.push(vec![
                            k.to_string(),
                            seed.map(|x| x.to_string()).unwrap_or_default(),
                            pt.step.to_string(),
                            fmt_f(pt.time),
                            pt.result.value.to_string(),
                            status_name(pt.result.status).into(),
                            pt.lower_bound.to_string(),
                            pt.upper_bound.map(|u| u.to_string()).unwrap_or_default(),
                        ]);
                    }
                    out.push(ProbeRun { seed, series });
                }
                tables.push(t);
                let final_exact: Vec<Option<u32>> = out
                    .iter()
                    .map(|r| {
                        r.series
                            .points
                            .last()
                            .filter(|pt| pt.result.is_exact())
                            .map(|pt| pt.result.value)
                    })
                    .collect();
                let mut known: Vec<u32> = final_exact.iter().flatten().copied().collect();
                known.sort_unstable();
                let median_final_exact = median(&known);
                let nondecreasing_runs = out.iter().filter(|r| r.series.lower_bounds_nondecreasing).count();
                summary.push(format!(
                    "{} probe run(s), {} with nondecreasing lower bounds, median final exact complexity {}",
                    out.len(),
                    nondecreasing_runs,
                    median_final_exact.map_or("n/a".into(), fmt_f)
                ));
                Some(ProbeOut {
                    horizon: p.horizon,
                    nondecreasing_runs,
                    final_exact,
                    median_final_exact,
                    runs: out,
                })
            }
        };
        Ok(Outcome {
            result: to_value(&Out { tree, probe }),
            tables,
            summary: summary.join("; "),
        })
    }

    fn sample(&self) -> branchlab::Result<Outcome> {
        let section = self
            .scenario
            .sampling
            .clone()
            .ok_or_else(|| branchlab::Error::Invalid("sample needs a `sampling` section".into()))?;
        let n = self.psi.n_sites();
        let observables = section
            .observables
            .iter()
            .map(|o| expand_observable(o, n))
            .collect::<branchlab::Result<Vec<_>>>()?
            .concat();
        let d = match section.split {
            SampleSplit::Computational => computational_split(&self.psi)?,
            SampleSplit::Tm => {
                let (cfg, family) = self.tm_config();
                search_tm_split(&self.oracle, &self.psi, &family, &cfg)?
                    .best_decomposition
                    .unwrap_or_else(|| Decomposition::trivial(self.psi.clone()))
            }
            SampleSplit::Weingarten => {
                let (cfg, family, _) = self.q_config()?;
                minimize_q(&self.oracle, &self.psi, &family, &cfg)?
                    .decomposition
                    .expect("minimizer keeps its decomposition")
            }
        };
        let report = collapse_report(&d, &observables, section.n_samples, self.scenario.seed)?;
        let mut t = Table::new(
            "observables",
            &[
                "observable",
                "full",
                "branch_mean",
                "sampled_mean",
                "std_error",
                "residual",
                "off_diagonal",
            ],
        );
        for o in &report.observables {
            t.push(vec![
                o.observable.clone(),
                fmt_f(o.full_expectation),
                fmt_f(o.branch_mean),
                fmt_f(o.sampled_mean),
                fmt_f(o.sample_std_error),
                fmt_f(o.off_diagonal_residual),
                fmt_f(o.off_diagonal_direct),
            ]);
        }
        let max_z = report
            .observables
            .iter()
            .map(|o| z_score(o.sampled_mean, o.branch_mean, o.sample_std_error))
            .fold(0.0, f64::max);
        #[derive(Serialize)]
        struct Out<'a> {
            split: SampleSplit,
            collapse: &'a CollapseReport,
            max_z_score: f64,
        }
        Ok(Outcome {
            summary: format!(
                "{} draws over {} branch(es), counts {:?}, largest |z| = {:.3}",
                report.n_samples,
                report.labels.len(),
                report.counts,
                max_z
            ),
            result: to_value(&Out {
                split: section.split,
                collapse: &report,
                max_z_score: max_z,
            }),
            tables: vec![t],
        })
    }

    fn compare(&self) -> branchlab::Result<Outcome> {
        let (tcfg, tfam) = self.tm_config();
        let tm = search_tm_split(&self.oracle, &self.psi, &tfam, &tcfg)?;
        let tm_d = match (tm.good_split, &tm.best_decomposition) {
            (true, Some(d)) => d.clone(),
            _ => Decomposition::trivial(self.psi.clone()),
        };
        let (qcfg, qfam, _) = self.q_config()?;
        let q = minimize_q(&self.oracle, &self.psi, &qfam, &qcfg)?;
        let q_d = q.decomposition.clone().expect("minimizer keeps its decomposition");
        let cmp = compare_decompositions(&tm_d, &q_d);
        #[derive(Serialize)]
        struct Out<'a> {
            tm: &'a TmSearch,
            tm_branches: Vec<String>,
            weingarten: &'a QSearch,
            weingarten_branches: Vec<String>,
            comparison: &'a Comparison,
        }
        let mut t = Table::new("overlap", &["tm_branch", "weingarten_branch", "overlap"]);
        for (i, row) in cmp.overlap.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                t.push(vec![tm_d.labels()[i].clone(), q_d.labels()[j].clone(), fmt_f(*v)]);
            }
        }
        Ok(Outcome {
            summary: format!(
                "TM: {} branch(es), Weingarten: {} branch(es), agreement: {}, mismatch {}",
                tm_d.len(),
                q_d.len(),
                cmp.agreement,
                fmt_f(cmp.mismatch)
            ),
            result: to_value(&Out {
                tm: &tm,
                tm_branches: tm_d.labels().to_vec(),
                weingarten: &q,
                weingarten_branches: q_d.labels().to_vec(),
                comparison: &cmp,
            }),
            tables: vec![t],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    /// Both splitters produced the same set of branches.
    pub agreement: bool,
    pub both_trivial: bool,
    /// `|<t_i|w_j>|^2` between normalized branches.
    pub overlap: Vec<Vec<f64>>,
    /// `1 - sum_j w_j max_i overlap_ij`: zero when every Weingarten branch
    /// sits inside a single TM branch.
    pub mismatch: f64,
}

pub fn compare_decompositions(a: &Decomposition, b: &Decomposition) -> Comparison {
    let an = a.normalized_components();
    let bn = b.normalized_components();
    let overlap: Vec<Vec<f64>> = an
        .iter()
        .map(|x| {
            bn.iter()
                .map(|y| x.inner(y).expect("same lattice").norm_sqr())
                .collect()
        })
        .collect();
    let weights = b.weights();
    let covered: f64 = (0..bn.len())
        .map(|j| weights[j] * overlap.iter().map(|row| row[j]).fold(0.0, f64::max))
        .sum();
    let matched = |rows: usize, cols: usize, get: &dyn Fn(usize, usize) -> f64| {
        (0..rows).all(|i| (0..cols).filter(|&j| get(i, j) >= AGREEMENT_OVERLAP).count() == 1)
    };
    let agreement = an.len() == bn.len()
        && matched(an.len(), bn.len(), &|i, j| overlap[i][j])
        && matched(bn.len(), an.len(), &|j, i| overlap[i][j]);
    Comparison {
        agreement,
        both_trivial: a.is_trivial() && b.is_trivial(),
        overlap,
        mismatch: (1.0 - covered).max(0.0),
    }
}

/// One branch per computational basis state with nonzero amplitude.
pub fn computational_split(psi: &StateVector) -> branchlab::Result<Decomposition> {
    let projectors: Vec<ProjectorSpec> = psi
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(x, _)| ProjectorSpec::BasisStates { indices: vec![x] })
        .collect();
    make_decomposition(psi, &projectors)
}

fn tm_tables(search: &TmSearch) -> Vec<Table> {
    let mut c = Table::new(
        "candidates",
        &["label", "n_components", "branchiness", "certified", "error"],
    );
    for s in &search.candidates {
        c.push(vec![
            s.label.clone(),
            s.n_components.to_string(),
            s.branchiness.map(|b| b.to_string()).unwrap_or_default(),
            s.certified.to_string(),
            s.error.clone().unwrap_or_default(),
        ]);
    }
    let mut p = Table::new(
        "pairs",
        &[
            "i",
            "j",
            "c_d",
            "c_d_status",
            "c_i",
            "c_i_status",
            "branchiness",
            "certified",
        ],
    );
    if let Some(r) = &search.best_report {
        for x in &r.pairs {
            p.push(vec![
                x.i.to_string(),
                x.j.to_string(),
                x.c_d.value.to_string(),
                status_name(x.c_d.status).into(),
                x.c_i.value.to_string(),
                status_name(x.c_i.status).into(),
                x.pair_branchiness.to_string(),
                x.certified.to_string(),
            ]);
        }
    }
    vec![c, p]
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Exact => "exact",
        Status::UpperBound => "upper_bound",
        Status::LowerBoundCutoff => "lower_bound_cutoff",
    }
}

fn z_score(sampled: f64, exact: f64, se: f64) -> f64 {
    let diff = (sampled - exact).abs();
    if se > 0.0 {
        diff / se
    } else if diff < 1e-12 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn median(sorted: &[u32]) -> Option<f64> {
    match sorted.len() {
        0 => None,
        n if n % 2 == 1 => Some(f64::from(sorted[n / 2])),
        n => Some((f64::from(sorted[n / 2 - 1]) + f64::from(sorted[n / 2])) / 2.0),
    }
}

/// Shortest round-trip formatting, so CSV files are as deterministic as the JSON.
fn fmt_f(x: f64) -> String {
    format!("{x:?}")
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results serialize")
}
