//! Deep Q-learning agents over the bit-string puzzle encoding: a double DQN
//! baseline and forward-backward RL, whose backward step feeds imagined
//! transitions generated in reverse from the goal.

mod agents;
mod backward;
mod net;

use std::collections::VecDeque;
use std::io;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hanoi::{HanoiError, HanoiMdp, HanoiState, Move, PEGS};

pub use agents::{
    ddqn_train, double_q_target, fbrl_train, greedy_rollout, max_q_target, QFunction, QNetwork, Rollout,
    TabularQ, Trained,
};
pub use backward::{backward_model_train, exact_predecessor, BackwardModel};
pub use net::{Mlp, OutputActivation};

/// Ordered `(from, to)` peg pairs; action `i` moves the top disk of `ACTIONS[i].0`.
pub const ACTIONS: [(usize, usize); 6] = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];
pub const N_ACTIONS: usize = ACTIONS.len();

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RlError {
    #[error("invalid agent config: {0}")]
    Config(String),
    #[error("action index {0} is outside 0..6")]
    InvalidAction(usize),
    #[error("bit vector has length {found}, expected {expected}")]
    BitLength { expected: usize, found: usize },
    #[error("no transitions to train on")]
    EmptySamples,
    #[error(transparent)]
    Hanoi(#[from] HanoiError),
}

pub fn action_index(from: usize, to: usize) -> Option<usize> {
    ACTIONS.iter().position(|&p| p == (from, to))
}

/// Move selected by `action` in `state`, or `None` if its source peg is empty.
/// The move may still be illegal (larger disk onto smaller).
pub fn action_move(state: &HanoiState, action: usize) -> Option<Move> {
    let (from, to) = *ACTIONS.get(action)?;
    let disk = state.top_of(from)?;
    Some(Move { disk, from, to })
}

pub fn move_action(mv: &Move) -> usize {
    action_index(mv.from, mv.to).expect("moves always use distinct valid pegs")
}

pub fn legal_action_mask(state: &HanoiState) -> [bool; N_ACTIONS] {
    std::array::from_fn(|a| action_move(state, a).is_some_and(|mv| state.is_legal(&mv)))
}

/// Applies `action`. Illegal actions follow the reward preset: a penalised
/// no-op where it has invalid-move semantics, an error otherwise.
pub fn env_step(mdp: &HanoiMdp, state: &HanoiState, action: usize) -> Result<crate::hanoi::Step, RlError> {
    let &(from, to) = ACTIONS.get(action).ok_or(RlError::InvalidAction(action))?;
    // an empty source peg still names a move attempt; use disk 0 as stand-in
    let mv = action_move(state, action).unwrap_or(Move { disk: 0, from, to });
    Ok(mdp.apply(state, &mv)?)
}

pub fn one_hot_action(action: usize) -> [f64; N_ACTIONS] {
    std::array::from_fn(|a| if a == action { 1.0 } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Real,
    Imagined,
}

/// `<s, a, s', r, done>` with bit-string states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionSample {
    pub s: Vec<u8>,
    pub a: usize,
    pub r: f64,
    pub s_next: Vec<u8>,
    pub done: bool,
    pub provenance: Provenance,
}

impl TransitionSample {
    pub fn new(
        s: Vec<u8>,
        a: usize,
        r: f64,
        s_next: Vec<u8>,
        done: bool,
        provenance: Provenance,
    ) -> Result<Self, RlError> {
        if a >= N_ACTIONS {
            return Err(RlError::InvalidAction(a));
        }
        if !s.len().is_multiple_of(PEGS) || s.len() != s_next.len() {
            return Err(RlError::BitLength {
                expected: s.len() - s.len() % PEGS,
                found: s_next.len(),
            });
        }
        Ok(Self {
            s,
            a,
            r,
            s_next,
            done,
            provenance,
        })
    }

    pub fn state(&self) -> Result<HanoiState, RlError> {
        Ok(HanoiState::decode_bits(&self.s)?)
    }

    pub fn next_state(&self) -> Result<HanoiState, RlError> {
        Ok(HanoiState::decode_bits(&self.s_next)?)
    }
}

/// Bounded FIFO store with uniform sampling with replacement.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    capacity: usize,
    entries: VecDeque<TransitionSample>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay buffer capacity must be positive");
        Self {
            capacity,
            entries: VecDeque::with_capacity(capacity.min(1 << 16)),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Evicts the oldest entry when full.
    pub fn push(&mut self, sample: TransitionSample) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(sample);
    }

    pub fn iter(&self) -> impl Iterator<Item = &TransitionSample> {
        self.entries.iter()
    }

    /// `k` entries drawn independently; empty if the buffer is.
    pub fn sample(&self, rng: &mut impl Rng, k: usize) -> Vec<&TransitionSample> {
        if self.entries.is_empty() {
            return Vec::new();
        }
        (0..k)
            .map(|_| &self.entries[rng.gen_range(0..self.entries.len())])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackwardGenerator {
    /// Predecessors predicted by a [`BackwardModel`] trained online on real
    /// transitions.
    Learned,
    /// Predecessors computed by inverting the move rules.
    ExactReverse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub discount: f64,
    pub learning_rate: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Steps over which epsilon decays linearly from start to end.
    pub epsilon_decay_steps: usize,
    /// Gradient updates between target-network copies.
    pub target_sync: usize,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Environment steps of training.
    pub max_steps: usize,
    /// Steps after which an unfinished episode is cut and restarted.
    pub max_episode_steps: usize,
    /// Real samples collected before the first update.
    pub warmup: usize,
    pub hidden: usize,
    /// Restrict exploration and bootstrap targets to legal actions. Always on
    /// when the reward preset has no invalid-move reward.
    pub mask_illegal: bool,
    pub generator: BackwardGenerator,
    /// Imagined steps taken from the goal before the backward walk restarts.
    pub backward_horizon: usize,
    /// Environment steps between updates of a learned backward model.
    pub model_update_period: usize,
    /// Reject imagined predecessors from which the action does not reproduce
    /// the recorded state.
    pub verify_imagined: bool,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            discount: 0.99,
            learning_rate: 1e-3,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_steps: 10_000,
            target_sync: 500,
            batch_size: 32,
            buffer_capacity: 10_000,
            max_steps: 30_000,
            max_episode_steps: 200,
            warmup: 500,
            hidden: 100,
            mask_illegal: false,
            generator: BackwardGenerator::Learned,
            backward_horizon: 16,
            model_update_period: 4,
            verify_imagined: true,
            seed: 0,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), RlError> {
        let bad = |msg: &str| Err(RlError::Config(msg.into()));
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return bad("discount must lie in (0, 1]");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        for eps in [self.epsilon_start, self.epsilon_end] {
            if !(0.0..=1.0).contains(&eps) {
                return bad("epsilon must lie in [0, 1]");
            }
        }
        let counts = [
            ("target_sync", self.target_sync),
            ("batch_size", self.batch_size),
            ("buffer_capacity", self.buffer_capacity),
            ("max_episode_steps", self.max_episode_steps),
            ("hidden", self.hidden),
            ("backward_horizon", self.backward_horizon),
            ("model_update_period", self.model_update_period),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(RlError::Config(format!("{name} must be positive")));
        }
        Ok(())
    }

    pub fn epsilon(&self, step: usize) -> f64 {
        if step >= self.epsilon_decay_steps {
            return self.epsilon_end;
        }
        let frac = step as f64 / self.epsilon_decay_steps as f64;
        self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogRow {
    pub step: usize,
    pub episode: usize,
    pub reward: f64,
    /// Set on the step that ends an episode.
    pub episode_return: Option<f64>,
    pub forward_loss: Option<f64>,
    pub backward_loss: Option<f64>,
    /// Fraction of stored samples that are imagined.
    pub imagined_fraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub rows: Vec<LogRow>,
    /// Imagined predecessors thrown away as unsnappable or inconsistent.
    pub discarded_imagined: usize,
}

impl TrainingLog {
    pub fn episode_returns(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.episode_return).collect()
    }

    pub fn write_csv<W: io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Trailing mean of per-step reward over `window` steps, reported every
    /// `every` steps as `(step, average)`.
    pub fn reward_curve(&self, window: usize, every: usize) -> Vec<(usize, f64)> {
        let window = window.max(1);
        let every = every.max(1);
        let mut out = Vec::new();
        let mut sum = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            sum += row.reward;
            if i >= window {
                sum -= self.rows[i - window].reward;
            }
            if (i + 1) % every == 0 {
                out.push((row.step, sum / (i + 1).min(window) as f64));
            }
        }
        out
    }
}
