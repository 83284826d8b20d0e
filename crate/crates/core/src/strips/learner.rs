//! Crisp inductive learning of a lifted move operator from labelled
//! transitions, with counting-based rule weights.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    ground_action_to_move, injective_tuples, move_to_ground_action, object_names, relational_state,
    Facts, GroundAction, Predicate, StripsError, StripsOperator,
};
use crate::hanoi::{enumerate_states, HanoiMdp};

const PARAMETERS: [&str; 3] = ["disc", "from", "to"];

/// `(s_t, a_t, s_{t+1})` in relational form. Rewards are implied by which
/// example set the transition lands in.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationalTransition {
    pub pre: Facts,
    pub action: GroundAction,
    pub post: Facts,
}

/// Observed legal transitions and attempted illegal ones.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleSet {
    pub positives: BTreeSet<RelationalTransition>,
    pub negatives: BTreeSet<RelationalTransition>,
}

impl ExampleSet {
    /// Adds a transition to the set matching its label, unless it already sits
    /// in the other one. Returns whether it was inserted.
    pub fn insert(&mut self, example: RelationalTransition, legal: bool) -> bool {
        let (mine, other) = if legal {
            (&mut self.positives, &self.negatives)
        } else {
            (&mut self.negatives, &self.positives)
        };
        !other.contains(&example) && mine.insert(example)
    }
}

fn attempt(state: &crate::hanoi::HanoiState, action: GroundAction) -> (RelationalTransition, bool) {
    let pre = relational_state(state);
    match ground_action_to_move(state, &action) {
        Some(mv) => (
            RelationalTransition {
                pre,
                action,
                post: relational_state(&state.moved(&mv)),
            },
            true,
        ),
        None => (
            RelationalTransition {
                post: pre.clone(),
                pre,
                action,
            },
            false,
        ),
    }
}

fn random_attempt(rng: &mut impl Rng, objects: &[String], n_disks: usize) -> GroundAction {
    let disc = format!("d{}", rng.gen_range(1..=n_disks));
    let others: Vec<&String> = objects.iter().filter(|o| **o != disc).collect();
    let picked: Vec<&&String> = others.choose_multiple(rng, 2).collect();
    GroundAction {
        name: "move".into(),
        args: vec![disc, picked[0].to_string(), picked[1].to_string()],
    }
}

/// Explores with `budget` attempted actions from the initial state.
///
/// Each attempt is, with equal odds, a uniformly chosen legal move or a
/// uniformly random `move disc from to` over all objects. Legal attempts
/// advance the walk and become positives; illegal ones leave the state
/// unchanged and become negatives. Reaching the goal restarts the walk.
pub fn collect_examples(mdp: &HanoiMdp, budget: usize, seed: u64) -> ExampleSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = mdp.n_disks();
    let objects = object_names(n);
    let mut set = ExampleSet::default();
    let mut state = mdp.initial_state();
    for _ in 0..budget {
        let action = if n == 0 {
            break;
        } else if rng.gen_bool(0.5) {
            let moves = state.legal_moves();
            let mv = moves.choose(&mut rng).expect("a non-empty puzzle always has a legal move");
            move_to_ground_action(&state, mv)
        } else {
            random_attempt(&mut rng, &objects, n)
        };
        let (example, legal) = attempt(&state, action);
        if legal {
            let next = crate::strips::predicates_to_state(n, &example.post)
                .expect("post-state of a legal move is a valid configuration");
            state = if mdp.is_goal(&next) { mdp.initial_state() } else { next };
        }
        set.insert(example, legal);
    }
    set
}

/// Every state paired with every `move disc from to` over distinct objects.
pub fn collect_exhaustive(n_disks: usize) -> ExampleSet {
    let objects = object_names(n_disks);
    let discs: Vec<&String> = objects.iter().filter(|o| o.starts_with('d')).collect();
    let mut set = ExampleSet::default();
    for state in enumerate_states(n_disks).expect("small puzzle") {
        for t in injective_tuples(&objects, 3) {
            if !discs.contains(&&t[0]) {
                continue;
            }
            let (example, legal) = attempt(
                &state,
                GroundAction {
                    name: "move".into(),
                    args: t,
                },
            );
            set.insert(example, legal);
        }
    }
    set
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OperatorPart {
    /// Positive preconditions.
    Alpha,
    /// Negative preconditions.
    Beta,
    /// Positive effects.
    Gamma,
    /// Negative effects.
    Delta,
}

impl OperatorPart {
    pub const ALL: [OperatorPart; 4] = [
        OperatorPart::Alpha,
        OperatorPart::Beta,
        OperatorPart::Gamma,
        OperatorPart::Delta,
    ];

    pub fn of(self, op: &StripsOperator) -> &BTreeSet<Predicate> {
        match self {
            OperatorPart::Alpha => &op.alpha,
            OperatorPart::Beta => &op.beta,
            OperatorPart::Gamma => &op.gamma_fx,
            OperatorPart::Delta => &op.delta_fx,
        }
    }

    pub fn of_mut(self, op: &mut StripsOperator) -> &mut BTreeSet<Predicate> {
        match self {
            OperatorPart::Alpha => &mut op.alpha,
            OperatorPart::Beta => &mut op.beta,
            OperatorPart::Gamma => &mut op.gamma_fx,
            OperatorPart::Delta => &mut op.delta_fx,
        }
    }
}

impl fmt::Display for OperatorPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorPart::Alpha => "precondition",
            OperatorPart::Beta => "negative precondition",
            OperatorPart::Gamma => "positive effect",
            OperatorPart::Delta => "negative effect",
        })
    }
}

/// `head <- body` with the fraction of positive examples consistent with it.
///
/// Consistency depends on the head: a precondition body must hold in the
/// pre-state, a negative-precondition body must be wholly absent from it,
/// and effect bodies must appear among the added (or deleted) atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalRule {
    pub head: OperatorPart,
    pub body: BTreeSet<Predicate>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnedOperator {
    pub operator: StripsOperator,
    /// One conjunctive rule per operator part, then single-literal
    /// precondition candidates that held in only some positive examples.
    pub rules: Vec<LogicalRule>,
}

/// A positive example with its facts lifted onto the operator parameters.
struct Lifted {
    pre: Facts,
    post: Facts,
}

fn binding_for(index: usize, action: &GroundAction) -> Result<BTreeMap<String, String>, StripsError> {
    let unliftable = |reason: String| StripsError::Unliftable { index, reason };
    if action.args.len() != PARAMETERS.len() {
        return Err(unliftable(format!(
            "action `{action}` has {} arguments, expected 3",
            action.args.len()
        )));
    }
    let map: BTreeMap<String, String> = action
        .args
        .iter()
        .cloned()
        .zip(PARAMETERS.iter().map(|p| p.to_string()))
        .collect();
    if map.len() != PARAMETERS.len() {
        return Err(unliftable(format!("action `{action}` repeats an object")));
    }
    Ok(map)
}

fn lift(facts: &Facts, map: &BTreeMap<String, String>) -> Facts {
    facts.iter().filter_map(|p| p.substitute(map)).collect()
}

fn candidate_atoms() -> Vec<Predicate> {
    let params: Vec<String> = PARAMETERS.iter().map(|p| p.to_string()).collect();
    let mut atoms: Vec<Predicate> = params.iter().map(|p| Predicate::clear(p)).collect();
    for pair in injective_tuples(&params, 2) {
        atoms.push(Predicate::on(&pair[0], &pair[1]));
        atoms.push(Predicate::smaller(&pair[0], &pair[1]));
    }
    atoms.sort();
    atoms
}

fn consistent(part: OperatorPart, body: &BTreeSet<Predicate>, ex: &Lifted) -> bool {
    match part {
        OperatorPart::Alpha => body.is_subset(&ex.pre),
        OperatorPart::Beta => body.is_disjoint(&ex.pre),
        OperatorPart::Gamma => body.iter().all(|p| ex.post.contains(p) && !ex.pre.contains(p)),
        OperatorPart::Delta => body.iter().all(|p| ex.pre.contains(p) && !ex.post.contains(p)),
    }
}

fn weight(part: OperatorPart, body: &BTreeSet<Predicate>, lifted: &[Lifted]) -> f64 {
    let hits = lifted.iter().filter(|ex| consistent(part, body, ex)).count();
    hits as f64 / lifted.len() as f64
}

/// Learns the `move(disc, from, to)` schema.
///
/// Preconditions are the lifted facts shared by every positive pre-state,
/// minus any that also hold in every negative pre-state. Effects are the
/// lifted differences between post- and pre-states, which must agree across
/// positives. Negative preconditions are chosen greedily among atoms never
/// seen in a positive pre-state, to reject the negatives that the positive
/// preconditions alone would admit.
pub fn learn_operator(examples: &ExampleSet) -> Result<LearnedOperator, StripsError> {
    let first = examples.positives.iter().next().ok_or(StripsError::NoPositives)?;
    let name = first.action.name.clone();

    let mut lifted = Vec::with_capacity(examples.positives.len());
    for (index, ex) in examples.positives.iter().enumerate() {
        if ex.action.name != name {
            return Err(StripsError::Unliftable {
                index,
                reason: format!("action `{}` differs from `{name}`", ex.action.name),
            });
        }
        let map = binding_for(index, &ex.action)?;
        for atom in ex.post.symmetric_difference(&ex.pre) {
            if atom.substitute(&map).is_none() {
                return Err(StripsError::Unliftable {
                    index,
                    reason: format!("changed atom `{atom}` mentions an object outside `{}`", ex.action),
                });
            }
        }
        lifted.push(Lifted {
            pre: lift(&ex.pre, &map),
            post: lift(&ex.post, &map),
        });
    }

    let mut alpha = lifted[0].pre.clone();
    for ex in &lifted[1..] {
        alpha.retain(|p| ex.pre.contains(p));
    }

    let mut negatives = Vec::with_capacity(examples.negatives.len());
    for ex in &examples.negatives {
        // negatives whose action cannot be bound carry no information
        if let Ok(map) = binding_for(0, &ex.action) {
            negatives.push(lift(&ex.pre, &map));
        }
    }
    if !negatives.is_empty() {
        alpha.retain(|p| !negatives.iter().all(|n| n.contains(p)));
    }

    let effects = |ex: &Lifted| -> (Facts, Facts) {
        (
            ex.post.difference(&ex.pre).cloned().collect(),
            ex.pre.difference(&ex.post).cloned().collect(),
        )
    };
    let (gamma_fx, delta_fx) = effects(&lifted[0]);
    for (index, ex) in lifted.iter().enumerate() {
        if effects(ex) != (gamma_fx.clone(), delta_fx.clone()) {
            return Err(StripsError::Unliftable {
                index,
                reason: "its effects differ from the other positive examples".into(),
            });
        }
    }

    let seen_in_positive: BTreeSet<&Predicate> = lifted.iter().flat_map(|ex| ex.pre.iter()).collect();
    let blockers: Vec<Predicate> = candidate_atoms()
        .into_iter()
        .filter(|a| !seen_in_positive.contains(a))
        .collect();
    let mut uncovered: Vec<(usize, BTreeSet<&Predicate>)> = Vec::new();
    for (index, pre) in negatives.iter().enumerate() {
        if alpha.is_subset(pre) {
            let present: BTreeSet<&Predicate> = blockers.iter().filter(|b| pre.contains(b)).collect();
            if present.is_empty() {
                return Err(StripsError::Inconsistent { index });
            }
            uncovered.push((index, present));
        }
    }
    let mut beta = BTreeSet::new();
    while !uncovered.is_empty() {
        let best = blockers
            .iter()
            .max_by_key(|b| {
                (
                    uncovered.iter().filter(|(_, s)| s.contains(b)).count(),
                    std::cmp::Reverse(*b),
                )
            })
            .expect("blockers is non-empty when negatives need covering");
        uncovered.retain(|(_, s)| !s.contains(best));
        beta.insert(best.clone());
    }

    let operator = StripsOperator::new(&name, &PARAMETERS, alpha, beta, gamma_fx, delta_fx)?;

    let mut rules: Vec<LogicalRule> = OperatorPart::ALL
        .iter()
        .map(|&part| {
            let body = part.of(&operator).clone();
            LogicalRule {
                head: part,
                weight: weight(part, &body, &lifted),
                body,
            }
        })
        .collect();
    for atom in seen_in_positive {
        if !operator.alpha.contains(atom) {
            let body = BTreeSet::from([atom.clone()]);
            rules.push(LogicalRule {
                head: OperatorPart::Alpha,
                weight: weight(OperatorPart::Alpha, &body, &lifted),
                body,
            });
        }
    }

    Ok(LearnedOperator { operator, rules })
}
