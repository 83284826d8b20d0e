//! Analytic baseline: breadth-first shortest plans and value iteration over
//! the full state space.

use std::collections::VecDeque;

use rayon::prelude::*;
use thiserror::Error;

use crate::hanoi::{enumerate_states, HanoiError, HanoiMdp, HanoiState, Move, PEGS};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error(transparent)]
    Hanoi(#[from] HanoiError),
    #[error("discount must lie in (0, 1], got {0}")]
    InvalidDiscount(f64),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("value iteration did not converge in {sweeps} sweeps (last change {delta:e})")]
    NotConverged { sweeps: usize, delta: f64 },
    #[error("greedy policy revisits {0}; the value table does not lead to the goal")]
    Cycle(HanoiState),
    #[error("no policy action recorded for non-goal state {0}")]
    NoAction(HanoiState),
    #[error("goal is unreachable from {0}")]
    Unreachable(HanoiState),
    #[error("value table covers {table} disks, MDP has {mdp}")]
    TableMismatch { table: usize, mdp: usize },
}

fn state_count(n_disks: usize) -> usize {
    PEGS.pow(n_disks as u32)
}

/// Shortest plan from the initial state to the goal.
pub fn bfs_shortest_plan(mdp: &HanoiMdp) -> Result<Vec<Move>, ExactError> {
    bfs_plan_from(mdp, &mdp.initial_state())
}

pub fn bfs_plan_from(mdp: &HanoiMdp, start: &HanoiState) -> Result<Vec<Move>, ExactError> {
    let n = mdp.n_disks();
    // bound the search by the same cap as enumeration
    enumerate_states_guard(n)?;
    if mdp.is_goal(start) {
        return Ok(Vec::new());
    }
    let mut parent: Vec<Option<(usize, Move)>> = vec![None; state_count(n)];
    let mut seen = vec![false; state_count(n)];
    let mut queue = VecDeque::from([start.clone()]);
    seen[start.index()] = true;
    while let Some(state) = queue.pop_front() {
        for mv in state.legal_moves() {
            let next = state.moved(&mv);
            let idx = next.index();
            if seen[idx] {
                continue;
            }
            seen[idx] = true;
            parent[idx] = Some((state.index(), mv));
            if mdp.is_goal(&next) {
                let mut plan = Vec::new();
                let mut cursor = idx;
                while let Some((prev, mv)) = parent[cursor] {
                    plan.push(mv);
                    cursor = prev;
                }
                plan.reverse();
                return Ok(plan);
            }
            queue.push_back(next);
        }
    }
    Err(ExactError::Unreachable(start.clone()))
}

fn enumerate_states_guard(n: usize) -> Result<(), ExactError> {
    if n > crate::hanoi::DEFAULT_STATE_CAP {
        return Err(HanoiError::StateCapExceeded {
            n,
            cap: crate::hanoi::DEFAULT_STATE_CAP,
        }
        .into());
    }
    Ok(())
}

/// Number of moves from every state to the goal, indexed by [`HanoiState::index`].
///
/// Legal moves are reversible, so a forward search from the goal yields the
/// distances to it.
pub fn distances_to_goal(mdp: &HanoiMdp) -> Result<Vec<usize>, ExactError> {
    let n = mdp.n_disks();
    enumerate_states_guard(n)?;
    let mut dist = vec![usize::MAX; state_count(n)];
    let goal = mdp.goal_state();
    dist[goal.index()] = 0;
    let mut queue = VecDeque::from([goal]);
    while let Some(state) = queue.pop_front() {
        let d = dist[state.index()];
        for mv in state.legal_moves() {
            let next = state.moved(&mv);
            if dist[next.index()] == usize::MAX {
                dist[next.index()] = d + 1;
                queue.push_back(next);
            }
        }
    }
    Ok(dist)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueIterationOptions {
    pub discount: f64,
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for ValueIterationOptions {
    fn default() -> Self {
        Self {
            discount: 1.0,
            tolerance: DEFAULT_TOLERANCE,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

/// Converged state values with the greedy policy they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    n_disks: usize,
    discount: f64,
    values: Vec<f64>,
    policy: Vec<Option<Move>>,
    /// Sup-norm change of each sweep, in order.
    deltas: Vec<f64>,
}

impl ValueTable {
    pub fn n_disks(&self) -> usize {
        self.n_disks
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn value(&self, state: &HanoiState) -> f64 {
        self.values[state.index()]
    }

    pub fn policy(&self, state: &HanoiState) -> Option<Move> {
        self.policy[state.index()]
    }

    pub fn sweeps(&self) -> usize {
        self.deltas.len()
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }
}

fn check_options(opts: &ValueIterationOptions) -> Result<(), ExactError> {
    if !(opts.discount > 0.0 && opts.discount <= 1.0) {
        return Err(ExactError::InvalidDiscount(opts.discount));
    }
    if !(opts.tolerance > 0.0) {
        return Err(ExactError::InvalidTolerance(opts.tolerance));
    }
    Ok(())
}

pub fn value_iteration(
    mdp: &HanoiMdp,
    discount: f64,
    tolerance: f64,
) -> Result<ValueTable, ExactError> {
    value_iteration_with(
        mdp,
        &ValueIterationOptions {
            discount,
            tolerance,
            ..Default::default()
        },
    )
}

/// Jacobi-style value iteration: each sweep reads only the previous table.
///
/// Only legal moves are candidate actions; goal states are absorbing with
/// value 0.
pub fn value_iteration_with(
    mdp: &HanoiMdp,
    opts: &ValueIterationOptions,
) -> Result<ValueTable, ExactError> {
    check_options(opts)?;
    let states = enumerate_states(mdp.n_disks())?;
    let reward = *mdp.reward_model();
    let is_goal: Vec<bool> = states.iter().map(|s| mdp.is_goal(s)).collect();
    let transitions: Vec<Vec<(Move, usize, f64)>> = states
        .iter()
        .map(|s| {
            s.legal_moves()
                .into_iter()
                .map(|mv| {
                    let next = s.moved(&mv);
                    let r = reward.legal_reward(mdp.is_goal(&next));
                    (mv, next.index(), r)
                })
                .collect()
        })
        .collect();

    let gamma = opts.discount;
    let mut values = vec![0.0f64; states.len()];
    let mut deltas = Vec::new();
    loop {
        if deltas.len() >= opts.max_sweeps {
            return Err(ExactError::NotConverged {
                sweeps: deltas.len(),
                delta: deltas.last().copied().unwrap_or(f64::INFINITY),
            });
        }
        let next: Vec<f64> = (0..states.len())
            .into_par_iter()
            .map(|i| {
                if is_goal[i] {
                    return 0.0;
                }
                transitions[i]
                    .iter()
                    .map(|&(_, j, r)| r + gamma * values[j])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let delta = next
            .iter()
            .zip(&values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        values = next;
        deltas.push(delta);
        if delta < opts.tolerance {
            break;
        }
    }

    let policy = (0..states.len())
        .map(|i| {
            if is_goal[i] {
                return None;
            }
            // lowest (disk, from, to) wins ties; moves are already sorted
            let mut best: Option<(Move, f64)> = None;
            for &(mv, j, r) in &transitions[i] {
                let q = r + gamma * values[j];
                if best.is_none_or(|(_, b)| q > b + opts.tolerance) {
                    best = Some((mv, q));
                }
            }
            best.map(|(mv, _)| mv)
        })
        .collect();

    Ok(ValueTable {
        n_disks: mdp.n_disks(),
        discount: gamma,
        values,
        policy,
        deltas,
    })
}

pub fn extract_plan(table: &ValueTable, mdp: &HanoiMdp) -> Result<Vec<Move>, ExactError> {
    extract_plan_from(table, mdp, &mdp.initial_state())
}

/// Greedy rollout of the table's policy from `start`.
pub fn extract_plan_from(
    table: &ValueTable,
    mdp: &HanoiMdp,
    start: &HanoiState,
) -> Result<Vec<Move>, ExactError> {
    if table.n_disks != mdp.n_disks() {
        return Err(ExactError::TableMismatch {
            table: table.n_disks,
            mdp: mdp.n_disks(),
        });
    }
    let mut visited = vec![false; table.values.len()];
    let mut state = start.clone();
    let mut plan = Vec::new();
    while !mdp.is_goal(&state) {
        if std::mem::replace(&mut visited[state.index()], true) {
            return Err(ExactError::Cycle(state));
        }
        let mv = table
            .policy(&state)
            .ok_or_else(|| ExactError::NoAction(state.clone()))?;
        state = state.moved(&mv);
        plan.push(mv);
    }
    Ok(plan)
}
