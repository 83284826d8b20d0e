//! Experiment description, read from TOML.
//!
//! ```toml
//! version = 1
//! seeds = [0, 1, 2]
//! instances = [{ disks = 3 }, { smart_city = 4 }]
//!
//! [output]
//! dir = "bench-out"
//! curves = true
//!
//! [[solver]]
//! name = "neurosolver"
//! exploration_steps = 10000
//!
//! [[solver]]
//! name = "fbrl"
//! reward = "per_move_penalty"
//! [solver.agent]
//! max_steps = 30000
//! mask_illegal = true
//! ```
//!
//! Only `version = 1` is understood. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{canonical_name, BenchError};
use crate::hanoi::{HanoiMdp, RewardPreset, DEFAULT_STATE_CAP};
use crate::migration::{to_hanoi_with, MigrationProblem};
use crate::rl::AgentConfig;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    /// Plain puzzle, peg 0 to peg 2.
    Disks(usize),
    /// Smart-city migration with this many components.
    SmartCity(usize),
}

impl InstanceSpec {
    pub fn n_disks(&self) -> usize {
        match *self {
            InstanceSpec::Disks(n) | InstanceSpec::SmartCity(n) => n,
        }
    }

    pub fn label(&self) -> String {
        match self {
            InstanceSpec::Disks(n) => format!("disks-{n}"),
            InstanceSpec::SmartCity(n) => format!("smart-city-{n}"),
        }
    }

    pub fn mdp(&self, preset: RewardPreset) -> Result<HanoiMdp, BenchError> {
        match *self {
            InstanceSpec::Disks(n) => Ok(HanoiMdp::standard(n, preset)),
            InstanceSpec::SmartCity(n) => to_hanoi_with(&MigrationProblem::smart_city(n), preset)
                .map_err(|e| BenchError::Config(e.to_string())),
        }
    }
}

/// One solver selection with its overrides. Fields a solver does not use are
/// ignored by it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub name: String,
    /// Reward preset of the instance (default `per_move_penalty`).
    pub reward: Option<RewardPreset>,
    /// Random-walk length for the neurosolver (default 10000).
    pub exploration_steps: Option<usize>,
    /// Random transitions for the STRIPS learner; exhaustive when absent.
    pub examples: Option<usize>,
    /// Greedy rollout cap for the RL agents (default `4 * (2^n - 1)`).
    pub rollout_steps: Option<usize>,
    /// Agent hyperparameters; the run seed replaces `agent.seed`.
    pub agent: Option<AgentConfig>,
    /// Directory of problems and plans scored by `plan_corpus`.
    pub corpus: Option<PathBuf>,
}

impl SolverSpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.into(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    /// Write per-run average-reward curves for the RL agents.
    pub curves: bool,
    /// Trailing window of the reward curves (default 1000 steps).
    pub curve_window: Option<usize>,
    /// Spacing of curve points (default 500 steps).
    pub curve_every: Option<usize>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub instances: Vec<InstanceSpec>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(rename = "solver")]
    pub solvers: Vec<SolverSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn new(instances: Vec<InstanceSpec>, solvers: Vec<SolverSpec>, seeds: Vec<u64>) -> Self {
        Self {
            version: CONFIG_VERSION,
            instances,
            seeds,
            solvers,
            output: OutputSpec::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)?;
        let mut config = Self::parse(&text)?;
        // relative paths in the file are relative to the file
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(dir) = &config.output.dir {
            config.output.dir = Some(base.join(dir));
        }
        for s in &mut config.solvers {
            if let Some(c) = &s.corpus {
                s.corpus = Some(base.join(c));
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config always serializes")
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.version != CONFIG_VERSION {
            return Err(BenchError::Config(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if self.instances.is_empty() {
            return Err(BenchError::Config("at least one instance is required".into()));
        }
        if self.solvers.is_empty() {
            return Err(BenchError::Config("at least one solver is required".into()));
        }
        if self.seeds.is_empty() {
            return Err(BenchError::Config("at least one seed is required".into()));
        }
        for inst in &self.instances {
            let n = inst.n_disks();
            if n == 0 || n > DEFAULT_STATE_CAP {
                return Err(BenchError::Config(format!(
                    "instance {} must have 1..={DEFAULT_STATE_CAP} disks",
                    inst.label()
                )));
            }
        }
        for s in &self.solvers {
            canonical_name(&s.name)?;
            if let Some(agent) = &s.agent {
                agent.validate().map_err(|e| BenchError::Config(format!("solver {}: {e}", s.name)))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
version = 1
seeds = [3, 4]
instances = [{ disks = 2 }, { smart_city = 3 }]

[output]
curves = true

[[solver]]
name = "exact"

[[solver]]
name = "ddqn"
reward = "per_move_penalty"
[solver.agent]
max_steps = 500
mask_illegal = true
"#;

    #[test]
    fn parses_sample() {
        let c = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.seeds, vec![3, 4]);
        assert_eq!(c.instances, vec![InstanceSpec::Disks(2), InstanceSpec::SmartCity(3)]);
        let agent = c.solvers[1].agent.as_ref().unwrap();
        assert_eq!(agent.max_steps, 500);
        assert!(agent.mask_illegal);
        assert_eq!(agent.hidden, AgentConfig::default().hidden);
        assert!(c.output.curves);
    }

    #[test]
    fn round_trips_through_toml() {
        let c = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(ExperimentConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "version = 2\ninstances = [{ disks = 2 }]\n[[solver]]\nname = \"exact\"",
            "version = 1\ninstances = []\n[[solver]]\nname = \"exact\"",
            "version = 1\ninstances = [{ disks = 2 }]\nsolver = []",
            "version = 1\ninstances = [{ disks = 2 }]\n[[solver]]\nname = \"magic\"",
            "version = 1\ninstances = [{ disks = 0 }]\n[[solver]]\nname = \"exact\"",
            "version = 1\ninstances = [{ disks = 2 }]\ncolour = 1\n[[solver]]\nname = \"exact\"",
            "version = 1\ninstances = [{ disks = 2 }]\nseeds = []\n[[solver]]\nname = \"exact\"",
        ] {
            assert!(ExperimentConfig::parse(text).is_err(), "{text}");
        }
    }
}
