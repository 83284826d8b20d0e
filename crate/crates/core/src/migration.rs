//! Edge-cloud application migration expressed as a Towers-of-Hanoi instance.
//!
//! Components become disks ordered by dependency rank (rank 0, the most core
//! service, is the largest disk) and the three computing tiers become pegs in
//! the order they are listed.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hanoi::{HanoiError, HanoiMdp, Move, RewardModel, RewardPreset, PEGS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MigrationError {
    #[error("a migration problem needs at least one component")]
    NoComponents,
    #[error("expected exactly 3 tiers, found {0}")]
    TierCount(usize),
    #[error("no tier has role {0}")]
    MissingRole(TierRole),
    #[error("dependency ranks must be distinct and contiguous from 0 (rank {0} missing)")]
    RankGap(usize),
    #[error("illegal move {mv} at step {index}")]
    IllegalMove { index: usize, mv: Move },
    #[error(transparent)]
    Hanoi(#[from] HanoiError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    /// 0 is the most core service.
    pub dependency_rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TierRole {
    Source,
    Auxiliary,
    Target,
}

impl fmt::Display for TierRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TierRole::Source => "source",
            TierRole::Auxiliary => "auxiliary",
            TierRole::Target => "target",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tier {
    pub name: String,
    pub role: TierRole,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MigrationProblem {
    pub components: Vec<Component>,
    pub tiers: Vec<Tier>,
}

impl MigrationProblem {
    /// Cloud to local edge through a regional server, with `n` components
    /// named `service-0` (core) onwards.
    pub fn smart_city(n: usize) -> Self {
        Self {
            components: (0..n)
                .map(|rank| Component {
                    name: format!("service-{rank}"),
                    dependency_rank: rank,
                })
                .collect(),
            tiers: vec![
                Tier {
                    name: "cloud".into(),
                    role: TierRole::Source,
                },
                Tier {
                    name: "regional-edge".into(),
                    role: TierRole::Auxiliary,
                },
                Tier {
                    name: "local-edge".into(),
                    role: TierRole::Target,
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<(), MigrationError> {
        if self.components.is_empty() {
            return Err(MigrationError::NoComponents);
        }
        if self.tiers.len() != PEGS {
            return Err(MigrationError::TierCount(self.tiers.len()));
        }
        for role in [TierRole::Source, TierRole::Auxiliary, TierRole::Target] {
            self.peg_for(role)?;
        }
        let mut ranks: Vec<usize> = self.components.iter().map(|c| c.dependency_rank).collect();
        ranks.sort_unstable();
        if let Some(missing) = ranks.iter().enumerate().find(|(i, r)| *i != **r).map(|(i, _)| i) {
            return Err(MigrationError::RankGap(missing));
        }
        Ok(())
    }

    fn peg_for(&self, role: TierRole) -> Result<usize, MigrationError> {
        self.tiers
            .iter()
            .position(|t| t.role == role)
            .ok_or(MigrationError::MissingRole(role))
    }

    /// Component mapped to `disk`; assumes a validated problem.
    pub fn component_for_disk(&self, disk: usize) -> Option<&Component> {
        self.components.iter().find(|c| c.dependency_rank == disk)
    }
}

pub fn to_hanoi(problem: &MigrationProblem) -> Result<HanoiMdp, MigrationError> {
    to_hanoi_with(problem, RewardPreset::default())
}

pub fn to_hanoi_with(
    problem: &MigrationProblem,
    preset: RewardPreset,
) -> Result<HanoiMdp, MigrationError> {
    problem.validate()?;
    Ok(HanoiMdp::new(
        problem.components.len(),
        RewardModel::from(preset),
        problem.peg_for(TierRole::Source)?,
        problem.peg_for(TierRole::Target)?,
    )?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MigrationStep {
    pub component: String,
    pub from_tier: String,
    pub to_tier: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MigrationPlan {
    pub steps: Vec<MigrationStep>,
    /// Whether the replayed steps leave every component on the target tier.
    pub complete: bool,
}

impl fmt::Display for MigrationPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, step) in self.steps.iter().enumerate() {
            writeln!(
                f,
                "{:>3}. migrate {} from {} to {}",
                i + 1,
                step.component,
                step.from_tier,
                step.to_tier
            )?;
        }
        Ok(())
    }
}

/// Renders a move sequence as named migration steps, replaying it to check legality.
pub fn plan_to_migration_steps(
    problem: &MigrationProblem,
    moves: &[Move],
) -> Result<MigrationPlan, MigrationError> {
    let mdp = to_hanoi(problem)?;
    let mut state = mdp.initial_state();
    let mut steps = Vec::with_capacity(moves.len());
    for (index, mv) in moves.iter().enumerate() {
        state = state
            .successor(mv)
            .ok_or(MigrationError::IllegalMove { index, mv: *mv })?;
        let component = problem
            .component_for_disk(mv.disk)
            .ok_or(MigrationError::IllegalMove { index, mv: *mv })?;
        steps.push(MigrationStep {
            component: component.name.clone(),
            from_tier: problem.tiers[mv.from].name.clone(),
            to_tier: problem.tiers[mv.to].name.clone(),
        });
    }
    Ok(MigrationPlan {
        steps,
        complete: mdp.is_goal(&state),
    })
}
