//! Search-and-solve over a state graph learned from random valid exploration.
//!
//! The graph records every state the walk visits and every transition it
//! takes. Searching spreads backward from the goal over reversed edges, which
//! yields a shortest recorded path to the current state; solving replays that
//! path move by move.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hanoi::{HanoiError, HanoiMdp, HanoiState, Move};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("recorded path diverges from the simulator at step {step}: {reason}")]
    Corrupted { step: usize, reason: String },
    #[error("graph dump line {line}: {reason}")]
    MalformedDump { line: usize, reason: String },
    #[error(transparent)]
    Hanoi(#[from] HanoiError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeInfo {
    pub mv: Move,
    /// Times the transition was traversed during exploration.
    pub count: u64,
}

/// Directed graph of visited states, keyed by state index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateGraph {
    n_disks: usize,
    visits: BTreeMap<usize, u64>,
    edges: BTreeMap<(usize, usize), EdgeInfo>,
}

impl StateGraph {
    pub fn new(n_disks: usize) -> Self {
        Self {
            n_disks,
            visits: BTreeMap::new(),
            edges: BTreeMap::new(),
        }
    }

    pub fn n_disks(&self) -> usize {
        self.n_disks
    }

    pub fn node_count(&self) -> usize {
        self.visits.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }

    pub fn contains(&self, state: &HanoiState) -> bool {
        self.visits.contains_key(&state.index())
    }

    pub fn visits(&self, state: &HanoiState) -> u64 {
        self.visits.get(&state.index()).copied().unwrap_or(0)
    }

    pub fn states(&self) -> impl Iterator<Item = HanoiState> + '_ {
        self.visits
            .keys()
            .map(|&i| HanoiState::from_index(self.n_disks, i))
    }

    pub fn edges(&self) -> impl Iterator<Item = (HanoiState, HanoiState, EdgeInfo)> + '_ {
        self.edges.iter().map(|(&(a, b), &info)| {
            (
                HanoiState::from_index(self.n_disks, a),
                HanoiState::from_index(self.n_disks, b),
                info,
            )
        })
    }

    pub fn record_visit(&mut self, state: &HanoiState) {
        *self.visits.entry(state.index()).or_default() += 1;
    }

    /// Records `from -> to` via `mv`; repeated traversals only bump the count.
    pub fn record_transition(&mut self, from: &HanoiState, mv: Move, to: &HanoiState) {
        self.edges
            .entry((from.index(), to.index()))
            .and_modify(|e| e.count += 1)
            .or_insert(EdgeInfo { mv, count: 1 });
        self.record_visit(to);
    }

    /// One `from to move` line per edge, states as peg strings.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (from, to, info) in self.edges() {
            let _ = writeln!(out, "{from} {to} {}", info.mv);
        }
        out
    }

    /// Rebuilds a graph from [`StateGraph::dump`] output. Traversal counts reset to 1.
    pub fn parse_dump(text: &str) -> Result<Self, GraphError> {
        let mut graph: Option<StateGraph> = None;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: String| GraphError::MalformedDump {
                line: line_no,
                reason,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [from, to, mv] = fields[..] else {
                return Err(bad(format!("expected 3 fields, found {}", fields.len())));
            };
            let from = HanoiState::parse_pegstring(from).map_err(|e| bad(e.to_string()))?;
            let to = HanoiState::parse_pegstring(to).map_err(|e| bad(e.to_string()))?;
            let mv: Move = mv.parse().map_err(|e: HanoiError| bad(e.to_string()))?;
            let g = graph.get_or_insert_with(|| StateGraph::new(from.n_disks()));
            if from.n_disks() != g.n_disks || from.successor(&mv).as_ref() != Some(&to) {
                return Err(bad(format!("{from} --{mv}--> {to} is not a legal transition")));
            }
            if !g.contains(&from) {
                g.record_visit(&from);
            }
            g.record_transition(&from, mv, &to);
        }
        Ok(graph.unwrap_or_else(|| StateGraph::new(0)))
    }
}

/// Random walk of `steps` uniformly chosen legal moves from the initial state.
///
/// Reaching the goal restarts the walk at the initial state; the restart is
/// not counted as a step.
pub fn explore(mdp: &HanoiMdp, steps: usize, seed: u64) -> StateGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graph = StateGraph::new(mdp.n_disks());
    let mut state = mdp.initial_state();
    graph.record_visit(&state);
    for _ in 0..steps {
        let moves = state.legal_moves();
        let Some(&mv) = moves.choose(&mut rng) else {
            break;
        };
        let next = state.moved(&mv);
        graph.record_transition(&state, mv, &next);
        state = if mdp.is_goal(&next) {
            let start = mdp.initial_state();
            graph.record_visit(&start);
            start
        } else {
            next
        };
    }
    graph
}

/// Shortest recorded path from `current` to `goal`, found by breadth-first
/// traversal of reversed edges starting at the goal.
pub fn search(graph: &StateGraph, goal: &HanoiState, current: &HanoiState) -> Option<Vec<Move>> {
    if goal == current {
        return Some(Vec::new());
    }
    let (goal_idx, current_idx) = (goal.index(), current.index());
    if !graph.visits.contains_key(&goal_idx) || !graph.visits.contains_key(&current_idx) {
        return None;
    }
    let mut incoming: BTreeMap<usize, Vec<(usize, Move)>> = BTreeMap::new();
    for (&(from, to), info) in &graph.edges {
        incoming.entry(to).or_default().push((from, info.mv));
    }
    // next hop toward the goal for every node the backward wave reaches
    let mut toward_goal: BTreeMap<usize, (Move, usize)> = BTreeMap::new();
    let mut queue = VecDeque::from([goal_idx]);
    let mut reached = std::collections::BTreeSet::from([goal_idx]);
    'wave: while let Some(node) = queue.pop_front() {
        for &(pred, mv) in incoming.get(&node).into_iter().flatten() {
            if reached.insert(pred) {
                toward_goal.insert(pred, (mv, node));
                if pred == current_idx {
                    break 'wave;
                }
                queue.push_back(pred);
            }
        }
    }
    let mut path = Vec::new();
    let mut cursor = current_idx;
    while cursor != goal_idx {
        let &(mv, next) = toward_goal.get(&cursor)?;
        path.push(mv);
        cursor = next;
    }
    Some(path)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub plan: Vec<Move>,
    pub solved: bool,
}

/// Searches from the initial state and replays the path through the simulator.
pub fn solve(graph: &StateGraph, mdp: &HanoiMdp) -> Result<SolveOutcome, GraphError> {
    let start = mdp.initial_state();
    let Some(path) = search(graph, &mdp.goal_state(), &start) else {
        return Ok(SolveOutcome {
            plan: Vec::new(),
            solved: false,
        });
    };
    let mut state = start;
    for (step, mv) in path.iter().enumerate() {
        state = state.successor(mv).ok_or_else(|| GraphError::Corrupted {
            step,
            reason: format!("move {mv} is illegal in {state}"),
        })?;
        if !graph.contains(&state) {
            return Err(GraphError::Corrupted {
                step,
                reason: format!("{state} was never recorded"),
            });
        }
    }
    if !mdp.is_goal(&state) {
        return Err(GraphError::Corrupted {
            step: path.len(),
            reason: format!("path ends at {state}, not the goal"),
        });
    }
    Ok(SolveOutcome {
        plan: path,
        solved: true,
    })
}
