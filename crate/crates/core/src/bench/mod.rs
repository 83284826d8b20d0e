//! Config-driven experiment runner with taxonomy labels and comparison
//! tables.

mod config;
mod table;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{bfs_shortest_plan, extract_plan, value_iteration_with, ValueIterationOptions};
use crate::graph::{explore, solve};
use crate::hanoi::{HanoiMdp, Move, RewardPreset};
use crate::plan_io::{mdp_problem, plan_from_moves, score_corpus, validate_plan, PlanDocument, PlanIoError};
use crate::rl::{ddqn_train, fbrl_train, greedy_rollout};
use crate::strips::{
    collect_examples, collect_exhaustive, learn_operator, plan_forward, reference_move_operator, relational_state,
    state_to_predicates,
};

pub use config::{ExperimentConfig, InstanceSpec, OutputSpec, SolverSpec, CONFIG_VERSION};
pub use table::{parse_table_csv, render_table, table_csv, table_markdown, Table, TABLE_ROWS};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown solver {0:?}")]
    UnknownSolver(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    PlanIo(#[from] PlanIoError),
}

/// How much of the transition and reward functions a method may query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AccessLevel {
    Continuing,
    Episodic,
    Generative,
    Analytic,
    Structured,
}

impl AccessLevel {
    /// Abbreviation used in the comparison table.
    pub fn short(&self) -> &'static str {
        match self {
            AccessLevel::Continuing => "Cont.",
            AccessLevel::Episodic => "Epi.",
            AccessLevel::Generative => "Gen.",
            AccessLevel::Analytic => "Analytic",
            AccessLevel::Structured => "Str.",
        }
    }
}

impl fmt::Display for AccessLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// How a method keeps its states valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateSpaceCategory {
    /// Predefined states.
    PS,
    /// Rule-based state generation.
    RSG,
    /// Constraint-based state filtering.
    CSF,
}

impl fmt::Display for StateSpaceCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

pub const SOLVERS: [&str; 8] = [
    "exact",
    "value_iteration",
    "ddqn",
    "fbrl",
    "neurosolver",
    "strips_learner",
    "plan_corpus",
    "ncm",
];

/// Resolves aliases (`graph` for `neurosolver`, `bfs` for `exact`, `lnn`
/// for `strips_learner`, `plansformer` for `plan_corpus`).
pub fn canonical_name(name: &str) -> Result<&'static str, BenchError> {
    let lower = name.to_ascii_lowercase();
    let resolved = match lower.as_str() {
        "graph" => "neurosolver",
        "bfs" => "exact",
        "lnn" => "strips_learner",
        "plansformer" => "plan_corpus",
        other => other,
    };
    SOLVERS
        .iter()
        .copied()
        .find(|s| *s == resolved)
        .ok_or_else(|| BenchError::UnknownSolver(name.into()))
}

pub fn classify(name: &str) -> Result<(AccessLevel, StateSpaceCategory), BenchError> {
    use AccessLevel::*;
    use StateSpaceCategory::*;
    Ok(match canonical_name(name)? {
        "exact" | "value_iteration" => (Analytic, RSG),
        "ddqn" => (Episodic, RSG),
        "fbrl" => (Generative, RSG),
        "neurosolver" => (Generative, CSF),
        "strips_learner" => (Analytic, CSF),
        "plan_corpus" => (Structured, PS),
        "ncm" => (Structured, RSG),
        _ => unreachable!("canonical_name only returns listed solvers"),
    })
}

/// Column heading for a solver.
pub fn display_name(name: &str) -> String {
    match canonical_name(name) {
        Ok("exact") => "Exact (BFS)".into(),
        Ok("value_iteration") => "Value iteration".into(),
        Ok("ddqn") => "DDQN".into(),
        Ok("fbrl") => "FBRL".into(),
        Ok("neurosolver") => "Neurosolver".into(),
        Ok("strips_learner") => "STRIPS learner (LNN proxy)".into(),
        Ok("plan_corpus") => "Plan corpus (Plansformer proxy)".into(),
        Ok("ncm") => "NCM".into(),
        _ => name.into(),
    }
}

/// Whether the solver runs once per experiment instead of once per
/// instance and seed.
fn runs_once(name: &str) -> bool {
    matches!(name, "plan_corpus" | "ncm")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport {
    pub solver: String,
    pub instance: String,
    pub n_disks: usize,
    pub seed: u64,
    pub access_level: AccessLevel,
    pub state_space: StateSpaceCategory,
    /// False for metadata-only rows.
    pub implemented: bool,
    pub wall_time_seconds: f64,
    pub steps_or_epochs: Option<u64>,
    /// Share of emitted plans the validator accepts; absent when nothing ran.
    pub validity_percent: Option<f64>,
    pub plan_length: Option<usize>,
    pub optimal: Option<bool>,
    pub error: Option<String>,
}

/// A report together with what the run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: SolverReport,
    pub moves: Option<Vec<Move>>,
    pub plan: Option<PlanDocument>,
    /// `(step, trailing average reward)` for the RL agents.
    pub curve: Option<Vec<(usize, f64)>>,
}

const DEFAULT_EXPLORATION_STEPS: usize = 10_000;
const CURVE_WINDOW: usize = 1000;
const CURVE_EVERY: usize = 500;

struct Produced {
    steps: Option<u64>,
    plan: Option<PlanDocument>,
    moves: Option<Vec<Move>>,
    curve: Option<Vec<(usize, f64)>>,
}

impl Produced {
    fn moves(mdp: &HanoiMdp, steps: Option<u64>, moves: Vec<Move>) -> Self {
        Self {
            steps,
            plan: Some(plan_from_moves(&mdp.initial_state(), &moves)),
            moves: Some(moves),
            curve: None,
        }
    }

    fn nothing(steps: Option<u64>) -> Self {
        Self {
            steps,
            plan: None,
            moves: None,
            curve: None,
        }
    }
}

fn produce(name: &str, spec: &SolverSpec, mdp: &HanoiMdp, seed: u64, output: &OutputSpec) -> Result<Produced, String> {
    let s = |e: &dyn fmt::Display| e.to_string();
    match name {
        "exact" => {
            let plan = bfs_shortest_plan(mdp).map_err(|e| s(&e))?;
            Ok(Produced::moves(mdp, None, plan))
        }
        "value_iteration" => {
            let table = value_iteration_with(mdp, &ValueIterationOptions::default()).map_err(|e| s(&e))?;
            let plan = extract_plan(&table, mdp).map_err(|e| s(&e))?;
            Ok(Produced::moves(mdp, Some(table.sweeps() as u64), plan))
        }
        "neurosolver" => {
            let steps = spec.exploration_steps.unwrap_or(DEFAULT_EXPLORATION_STEPS);
            let graph = explore(mdp, steps, seed);
            let outcome = solve(&graph, mdp).map_err(|e| s(&e))?;
            if outcome.solved {
                Ok(Produced::moves(mdp, Some(steps as u64), outcome.plan))
            } else {
                Ok(Produced::nothing(Some(steps as u64)))
            }
        }
        "ddqn" | "fbrl" => {
            let mut agent = spec.agent.clone().unwrap_or_default();
            agent.seed = seed;
            let trained = if name == "ddqn" {
                ddqn_train(mdp, &agent)
            } else {
                fbrl_train(mdp, &agent)
            }
            .map_err(|e| s(&e))?;
            let cap = spec.rollout_steps.unwrap_or(4 * mdp.optimal_plan_length());
            let rollout = greedy_rollout(&trained.net, mdp, cap);
            let mut produced = Produced::moves(mdp, Some(agent.max_steps as u64), rollout.plan);
            if output.curves {
                produced.curve = Some(trained.log.reward_curve(
                    output.curve_window.unwrap_or(CURVE_WINDOW),
                    output.curve_every.unwrap_or(CURVE_EVERY),
                ));
            }
            Ok(produced)
        }
        "strips_learner" => {
            let examples = match spec.examples {
                Some(budget) => collect_examples(mdp, budget, seed),
                None => collect_exhaustive(mdp.n_disks()),
            };
            let count = (examples.positives.len() + examples.negatives.len()) as u64;
            let learned = learn_operator(&examples).map_err(|e| s(&e))?;
            let goal: Vec<_> = state_to_predicates(&mdp.goal_state())
                .into_iter()
                .filter(|p| !p.is_static())
                .collect();
            let steps = plan_forward(&[learned.operator], &relational_state(&mdp.initial_state()), &goal)
                .map_err(|e| s(&e))?;
            Ok(Produced {
                steps: Some(count),
                plan: Some(PlanDocument { steps }),
                moves: None,
                curve: None,
            })
        }
        _ => unreachable!("per-instance solvers only"),
    }
}

/// Runs one solver on one instance and re-validates whatever plan it emits.
pub fn run_single(spec: &SolverSpec, instance: InstanceSpec, seed: u64, output: &OutputSpec) -> Result<RunOutcome, BenchError> {
    let name = canonical_name(&spec.name)?;
    let (access_level, state_space) = classify(name)?;
    let mut report = SolverReport {
        solver: name.into(),
        instance: instance.label(),
        n_disks: instance.n_disks(),
        seed,
        access_level,
        state_space,
        implemented: true,
        wall_time_seconds: 0.0,
        steps_or_epochs: None,
        validity_percent: None,
        plan_length: None,
        optimal: None,
        error: None,
    };
    if runs_once(name) {
        return Ok(run_metadata(report, spec));
    }
    // undiscounted value iteration and the agents need a cost per move
    let preset = spec.reward.unwrap_or(RewardPreset::PerMovePenalty);
    let mdp = instance.mdp(preset)?;
    let start = Instant::now();
    let produced = produce(name, spec, &mdp, seed, output);
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    let mut outcome = RunOutcome {
        report,
        moves: None,
        plan: None,
        curve: None,
    };
    match produced {
        Err(e) => {
            outcome.report.error = Some(e);
            outcome.report.validity_percent = Some(0.0);
        }
        Ok(p) => {
            outcome.report.steps_or_epochs = p.steps;
            match &p.plan {
                Some(plan) => {
                    let doc = mdp_problem(&mdp, &reference_move_operator());
                    let verdict = validate_plan(&doc, plan, Some(mdp.optimal_plan_length()));
                    outcome.report.plan_length = Some(plan.steps.len());
                    outcome.report.optimal = Some(verdict.optimal);
                    outcome.report.validity_percent = Some(if verdict.valid { 100.0 } else { 0.0 });
                    if let Some(f) = verdict.failing_step {
                        outcome.report.error = Some(format!("step {}: {}", f.index, f.reason));
                    }
                }
                None => {
                    outcome.report.validity_percent = Some(0.0);
                    outcome.report.error = Some("no plan found".into());
                }
            }
            outcome.plan = p.plan;
            outcome.moves = p.moves;
            outcome.curve = p.curve;
        }
    }
    Ok(outcome)
}

fn run_metadata(mut report: SolverReport, spec: &SolverSpec) -> RunOutcome {
    report.instance = "-".into();
    report.n_disks = 0;
    let corpus = spec.corpus.as_deref().filter(|_| report.solver == "plan_corpus");
    match corpus {
        None => report.implemented = false,
        Some(dir) => {
            let start = Instant::now();
            let scored = score_corpus(dir);
            report.wall_time_seconds = start.elapsed().as_secs_f64();
            match scored {
                Ok(r) => {
                    report.validity_percent = Some(r.validity_percent());
                    if r.errors() > 0 {
                        report.error = Some(format!("{} of {} entries unreadable", r.errors(), r.total()));
                    }
                }
                Err(e) => {
                    report.error = Some(e.to_string());
                    report.validity_percent = Some(0.0);
                }
            }
        }
    }
    RunOutcome {
        report,
        moves: None,
        plan: None,
        curve: None,
    }
}

/// One run per (solver, instance, seed), executed in parallel and returned in
/// config order: solvers, then instances, then seeds. Corpus and metadata
/// solvers run once, with the first seed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunOutcome>, BenchError> {
    config.validate()?;
    let mut jobs = Vec::new();
    for spec in &config.solvers {
        if runs_once(canonical_name(&spec.name)?) {
            jobs.push((spec, config.instances[0], config.seeds[0]));
            continue;
        }
        for &inst in &config.instances {
            for &seed in &config.seeds {
                jobs.push((spec, inst, seed));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(spec, inst, seed)| run_single(spec, inst, seed, &config.output))
        .collect()
}

pub const RUNS_HEADER: [&str; 13] = [
    "solver",
    "instance",
    "n_disks",
    "seed",
    "access_level",
    "state_space",
    "implemented",
    "steps_or_epochs",
    "validity_percent",
    "plan_length",
    "optimal",
    "error",
    "wall_time_seconds",
];

/// One row per run. Wall time is the last column, so dropping it leaves the
/// deterministic part.
pub fn write_runs_csv<W: Write>(reports: &[SolverReport], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUNS_HEADER)?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in reports {
        w.write_record([
            r.solver.clone(),
            r.instance.clone(),
            r.n_disks.to_string(),
            r.seed.to_string(),
            r.access_level.to_string(),
            r.state_space.to_string(),
            r.implemented.to_string(),
            opt(r.steps_or_epochs.map(|s| s.to_string())),
            opt(r.validity_percent.map(|v| format!("{v:.2}"))),
            opt(r.plan_length.map(|p| p.to_string())),
            opt(r.optimal.map(|o| o.to_string())),
            opt(r.error.clone()),
            format!("{:.6}", r.wall_time_seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `runs.csv`, `table.csv`, `table.md` and, if requested, one
/// `curves/<solver>_<instance>_seed<k>.csv` per RL run.
pub fn write_outputs(outcomes: &[RunOutcome], output: &OutputSpec, dir: &Path) -> Result<(), BenchError> {
    fs::create_dir_all(dir)?;
    let reports: Vec<SolverReport> = outcomes.iter().map(|o| o.report.clone()).collect();
    write_runs_csv(&reports, fs::File::create(dir.join("runs.csv"))?)?;
    let table = render_table(&reports);
    fs::write(dir.join("table.csv"), table_csv(&table)?)?;
    fs::write(dir.join("table.md"), table_markdown(&table))?;
    if output.curves {
        let curves = dir.join("curves");
        for o in outcomes {
            let Some(curve) = &o.curve else { continue };
            fs::create_dir_all(&curves)?;
            let r = &o.report;
            let path = curves.join(format!("{}_{}_seed{}.csv", r.solver, r.instance, r.seed));
            let mut w = csv::Writer::from_path(path)?;
            w.write_record(["step", "average_reward"])?;
            for (step, avg) in curve {
                w.write_record([step.to_string(), format!("{avg:.6}")])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
