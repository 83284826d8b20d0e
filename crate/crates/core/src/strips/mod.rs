//! Relational view of the puzzle: `on`/`clear`/`smaller` predicates, lifted
//! STRIPS operators, a breadth-first planner and an operator learner.
//!
//! Object naming follows the compact plan-problem format: discs are `d1`
//! (smallest) to `dn` (largest) and pegs are `peg1` to `peg3`.
//! `smaller x y` reads "y is smaller than x"; every peg counts as larger than
//! every disc.

mod learner;
mod planner;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hanoi::{HanoiState, Move, PEGS};

pub use learner::{
    collect_examples, collect_exhaustive, learn_operator, ExampleSet, LearnedOperator,
    LogicalRule, OperatorPart, RelationalTransition,
};
pub use planner::{plan_forward, plan_forward_with, PlannerOptions};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StripsError {
    #[error("unknown predicate {0:?} (expected on, clear or smaller)")]
    UnknownPredicate(String),
    #[error("predicate {name} takes {expected} arguments, got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("operator {op}: literal {literal} uses {var:?}, which is not a parameter")]
    UnboundVariable {
        op: String,
        literal: String,
        var: String,
    },
    #[error("operator {op}: {literal} is both added and deleted")]
    ConflictingEffects { op: String, literal: String },
    #[error("action {action} expects {expected} arguments, got {found}")]
    ActionArity {
        action: String,
        expected: usize,
        found: usize,
    },
    #[error("no plan reaches the goal")]
    NoPlan,
    #[error("search gave up after {0} expansions")]
    ExpansionLimit(usize),
    #[error("positive example set is empty")]
    NoPositives,
    #[error("example {index} cannot be lifted: {reason}")]
    Unliftable { index: usize, reason: String },
    #[error("negative example {index} satisfies the learned preconditions and nothing blocks it")]
    Inconsistent { index: usize },
}

pub fn arity_of(name: &str) -> Option<usize> {
    match name {
        "on" | "smaller" => Some(2),
        "clear" => Some(1),
        _ => None,
    }
}

/// Atom over object names (grounded) or parameter names (lifted).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub args: Vec<String>,
}

impl Predicate {
    pub fn new<S: Into<String>>(name: &str, args: impl IntoIterator<Item = S>) -> Result<Self, StripsError> {
        let args: Vec<String> = args.into_iter().map(Into::into).collect();
        let expected = arity_of(name).ok_or_else(|| StripsError::UnknownPredicate(name.into()))?;
        if args.len() != expected {
            return Err(StripsError::Arity {
                name: name.into(),
                expected,
                found: args.len(),
            });
        }
        Ok(Self {
            name: name.into(),
            args,
        })
    }

    pub(crate) fn raw(name: &str, args: &[&str]) -> Self {
        Self {
            name: name.into(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }

    pub fn on(x: &str, y: &str) -> Self {
        Self::raw("on", &[x, y])
    }

    pub fn clear(x: &str) -> Self {
        Self::raw("clear", &[x])
    }

    pub fn smaller(larger: &str, smaller: &str) -> Self {
        Self::raw("smaller", &[larger, smaller])
    }

    pub fn is_static(&self) -> bool {
        self.name == "smaller"
    }

    /// Substitutes every argument through `map`; `None` if some argument is unmapped.
    pub fn substitute(&self, map: &BTreeMap<String, String>) -> Option<Self> {
        let args = self
            .args
            .iter()
            .map(|a| map.get(a).cloned())
            .collect::<Option<Vec<_>>>()?;
        Some(Self {
            name: self.name.clone(),
            args,
        })
    }
}

/// Space-separated form, e.g. `on d1 d2`.
impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

pub type Facts = BTreeSet<Predicate>;

pub fn disc_name(n_disks: usize, disk: usize) -> String {
    format!("d{}", n_disks - disk)
}

pub fn peg_name(peg: usize) -> String {
    format!("peg{}", peg + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Object {
    /// Disk index, 0 is largest.
    Disc(usize),
    Peg(usize),
}

pub fn parse_object(n_disks: usize, name: &str) -> Option<Object> {
    if let Some(label) = name.strip_prefix("peg") {
        let peg: usize = label.parse().ok()?;
        return (1..=PEGS).contains(&peg).then_some(Object::Peg(peg - 1));
    }
    let label: usize = name.strip_prefix('d')?.parse().ok()?;
    (1..=n_disks)
        .contains(&label)
        .then_some(Object::Disc(n_disks - label))
}

pub fn object_names(n_disks: usize) -> Vec<String> {
    (1..=n_disks)
        .map(|l| format!("d{l}"))
        .chain((0..PEGS).map(peg_name))
        .collect()
}

/// Static size facts: every peg is larger than every disc, plus disc-vs-disc order.
pub fn smaller_facts(n_disks: usize) -> Vec<Predicate> {
    let mut facts = Vec::new();
    for peg in 0..PEGS {
        for label in 1..=n_disks {
            facts.push(Predicate::smaller(&peg_name(peg), &format!("d{label}")));
        }
    }
    for larger in (1..=n_disks).rev() {
        for smaller in (1..larger).rev() {
            facts.push(Predicate::smaller(&format!("d{larger}"), &format!("d{smaller}")));
        }
    }
    facts
}

/// Complete relational description of `state`, size facts first, then each
/// disc from smallest up with what it sits on and whether it is clear, then
/// the empty pegs.
pub fn state_to_predicates(state: &HanoiState) -> Vec<Predicate> {
    let n = state.n_disks();
    let mut facts = smaller_facts(n);
    for disk in (0..n).rev() {
        let name = disc_name(n, disk);
        let below = match state.disk_below(disk) {
            Some(b) => disc_name(n, b),
            None => peg_name(state.peg_of(disk)),
        };
        facts.push(Predicate::on(&name, &below));
        if state.top_of(state.peg_of(disk)) == Some(disk) {
            facts.push(Predicate::clear(&name));
        }
    }
    for peg in 0..PEGS {
        if state.top_of(peg).is_none() {
            facts.push(Predicate::clear(&peg_name(peg)));
        }
    }
    facts
}

pub fn relational_state(state: &HanoiState) -> Facts {
    state_to_predicates(state).into_iter().collect()
}

/// Recovers the disk placement from `on` facts; `None` if they do not
/// describe one.
pub fn predicates_to_state(n_disks: usize, facts: &Facts) -> Option<HanoiState> {
    let mut support: BTreeMap<usize, Object> = BTreeMap::new();
    for p in facts.iter().filter(|p| p.name == "on") {
        let Object::Disc(d) = parse_object(n_disks, &p.args[0])? else {
            return None;
        };
        if support.insert(d, parse_object(n_disks, &p.args[1])?).is_some() {
            return None;
        }
    }
    let mut pegs = Vec::with_capacity(n_disks);
    for disk in 0..n_disks {
        let mut cursor = *support.get(&disk)?;
        let mut hops = 0;
        let peg = loop {
            match cursor {
                Object::Peg(p) => break p,
                Object::Disc(d) => {
                    hops += 1;
                    if hops > n_disks {
                        return None;
                    }
                    cursor = *support.get(&d)?;
                }
            }
        };
        pegs.push(peg as u8);
    }
    HanoiState::new(pegs).ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroundAction {
    pub name: String,
    pub args: Vec<String>,
}

impl GroundAction {
    pub fn new(name: &str, args: &[&str]) -> Self {
        Self {
            name: name.into(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }
}

/// `move d1 peg1 peg3`.
impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

/// Name of whatever is on top of `peg`: its top disc, or the peg itself.
fn top_object(state: &HanoiState, peg: usize) -> String {
    match state.top_of(peg) {
        Some(d) => disc_name(state.n_disks(), d),
        None => peg_name(peg),
    }
}

/// Relational `move disc from to` for a puzzle move. `from` is the object the
/// disc rests on and `to` the object it would land on. If the disc is not on
/// `mv.from`, the top object of that peg stands in, so the action stays
/// inapplicable exactly when the move is illegal.
pub fn move_to_ground_action(state: &HanoiState, mv: &Move) -> GroundAction {
    let n = state.n_disks();
    let from = if mv.disk < n && state.peg_of(mv.disk) == mv.from {
        match state.disk_below(mv.disk) {
            Some(b) => disc_name(n, b),
            None => peg_name(mv.from),
        }
    } else {
        top_object(state, mv.from)
    };
    GroundAction {
        name: "move".into(),
        args: vec![
            if mv.disk < n {
                disc_name(n, mv.disk)
            } else {
                "d0".into()
            },
            from,
            top_object(state, mv.to),
        ],
    }
}

/// Puzzle move for a relational `move disc from to`, if it is legal in `state`.
pub fn ground_action_to_move(state: &HanoiState, action: &GroundAction) -> Option<Move> {
    let n = state.n_disks();
    let [disc, from, to] = action.args.as_slice() else {
        return None;
    };
    let Object::Disc(disk) = parse_object(n, disc)? else {
        return None;
    };
    let peg = state.peg_of(disk);
    let expected_from = match state.disk_below(disk) {
        Some(b) => disc_name(n, b),
        None => peg_name(peg),
    };
    if *from != expected_from {
        return None;
    }
    let target = (0..PEGS).find(|&p| p != peg && top_object(state, p) == *to)?;
    let mv = Move {
        disk,
        from: peg,
        to: target,
    };
    state.is_legal(&mv).then_some(mv)
}

/// Lifted action schema with positive/negative preconditions and add/delete effects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StripsOperator {
    pub name: String,
    pub parameters: Vec<String>,
    /// Positive preconditions.
    pub alpha: BTreeSet<Predicate>,
    /// Negative preconditions.
    pub beta: BTreeSet<Predicate>,
    /// Positive effects.
    pub gamma_fx: BTreeSet<Predicate>,
    /// Negative effects.
    pub delta_fx: BTreeSet<Predicate>,
}

impl StripsOperator {
    pub fn new(
        name: &str,
        parameters: &[&str],
        alpha: impl IntoIterator<Item = Predicate>,
        beta: impl IntoIterator<Item = Predicate>,
        gamma_fx: impl IntoIterator<Item = Predicate>,
        delta_fx: impl IntoIterator<Item = Predicate>,
    ) -> Result<Self, StripsError> {
        let op = Self {
            name: name.into(),
            parameters: parameters.iter().map(|p| p.to_string()).collect(),
            alpha: alpha.into_iter().collect(),
            beta: beta.into_iter().collect(),
            gamma_fx: gamma_fx.into_iter().collect(),
            delta_fx: delta_fx.into_iter().collect(),
        };
        op.validate()?;
        Ok(op)
    }

    pub fn validate(&self) -> Result<(), StripsError> {
        for lit in self.literals() {
            if let Some(var) = lit.args.iter().find(|a| !self.parameters.contains(a)) {
                return Err(StripsError::UnboundVariable {
                    op: self.name.clone(),
                    literal: lit.to_string(),
                    var: var.clone(),
                });
            }
            Predicate::new(&lit.name, lit.args.iter().cloned())?;
        }
        if let Some(both) = self.gamma_fx.intersection(&self.delta_fx).next() {
            return Err(StripsError::ConflictingEffects {
                op: self.name.clone(),
                literal: both.to_string(),
            });
        }
        Ok(())
    }

    pub fn literals(&self) -> impl Iterator<Item = &Predicate> {
        self.alpha
            .iter()
            .chain(&self.beta)
            .chain(&self.gamma_fx)
            .chain(&self.delta_fx)
    }

    pub fn binding(&self, args: &[String]) -> Result<BTreeMap<String, String>, StripsError> {
        if args.len() != self.parameters.len() {
            return Err(StripsError::ActionArity {
                action: self.name.clone(),
                expected: self.parameters.len(),
                found: args.len(),
            });
        }
        Ok(self.parameters.iter().cloned().zip(args.iter().cloned()).collect())
    }

    fn ground_all(set: &BTreeSet<Predicate>, map: &BTreeMap<String, String>) -> Vec<Predicate> {
        set.iter()
            .map(|p| p.substitute(map).expect("validated operator binds every argument"))
            .collect()
    }

    pub fn is_applicable(&self, state: &Facts, map: &BTreeMap<String, String>) -> bool {
        self.alpha
            .iter()
            .all(|p| p.substitute(map).is_some_and(|g| state.contains(&g)))
            && self
                .beta
                .iter()
                .all(|p| p.substitute(map).is_none_or(|g| !state.contains(&g)))
    }

    /// Deletes then adds, so an atom in both lists ends up true.
    pub fn apply(&self, state: &Facts, map: &BTreeMap<String, String>) -> Facts {
        let mut next = state.clone();
        for p in Self::ground_all(&self.delta_fx, map) {
            next.remove(&p);
        }
        next.extend(Self::ground_all(&self.gamma_fx, map));
        next
    }

    /// Same operator with parameters renamed positionally to `names`.
    pub fn renamed(&self, names: &[String]) -> Self {
        let map: BTreeMap<String, String> = self
            .parameters
            .iter()
            .cloned()
            .zip(names.iter().cloned())
            .collect();
        let rename = |set: &BTreeSet<Predicate>| -> BTreeSet<Predicate> {
            set.iter().filter_map(|p| p.substitute(&map)).collect()
        };
        Self {
            name: self.name.clone(),
            parameters: names.to_vec(),
            alpha: rename(&self.alpha),
            beta: rename(&self.beta),
            gamma_fx: rename(&self.gamma_fx),
            delta_fx: rename(&self.delta_fx),
        }
    }
}

/// The hand-written puzzle move operator over `(disc, from, to)`.
///
/// Preconditions: the disc is clear and on `from`, `to` is clear and larger
/// than the disc, and `from` is not on the disc. Effects: the disc lands on
/// `to`, `from` becomes clear, and `to` stops being clear.
pub fn reference_move_operator() -> StripsOperator {
    StripsOperator::new(
        "move",
        &["disc", "from", "to"],
        [
            Predicate::clear("disc"),
            Predicate::on("disc", "from"),
            Predicate::clear("to"),
            Predicate::smaller("to", "disc"),
        ],
        [Predicate::on("from", "disc")],
        [Predicate::on("disc", "to"), Predicate::clear("from")],
        [Predicate::on("disc", "from"), Predicate::clear("to")],
    )
    .expect("reference operator is well formed")
}

/// All injective bindings of `arity` parameters over `objects`, in
/// lexicographic order of object positions.
pub(crate) fn injective_tuples(objects: &[String], arity: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(arity);
    fn rec(objects: &[String], arity: usize, current: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        if current.len() == arity {
            out.push(current.clone());
            return;
        }
        for o in objects {
            if !current.contains(o) {
                current.push(o.clone());
                rec(objects, arity, current, out);
                current.pop();
            }
        }
    }
    rec(objects, arity, &mut current, &mut out);
    out
}

/// Every `(state, binding)` outcome of `op` over all states of an `n`-disc
/// puzzle: `None` where inapplicable, the successor facts otherwise.
fn operator_semantics(op: &StripsOperator, n_disks: usize) -> Vec<Option<Facts>> {
    let objects = object_names(n_disks);
    let tuples = injective_tuples(&objects, op.parameters.len());
    let states = crate::hanoi::enumerate_states(n_disks).expect("small puzzle");
    let mut out = Vec::with_capacity(states.len() * tuples.len());
    for s in &states {
        let facts = relational_state(s);
        for t in &tuples {
            let map = op.binding(t).expect("tuple arity matches");
            out.push(op.is_applicable(&facts, &map).then(|| op.apply(&facts, &map)));
        }
    }
    out
}

/// Whether two operators with the same parameter count accept the same
/// `(state, binding)` pairs and produce the same successors on every state of
/// an `n`-disc puzzle.
pub fn semantically_equivalent(a: &StripsOperator, b: &StripsOperator, n_disks: usize) -> bool {
    a.parameters.len() == b.parameters.len()
        && operator_semantics(a, n_disks) == operator_semantics(b, n_disks)
}

/// Literals of `op` whose individual removal leaves its behaviour unchanged on
/// every `n`-disc state. Returned as `(part, literal)`.
pub fn redundant_literals(op: &StripsOperator, n_disks: usize) -> Vec<(OperatorPart, Predicate)> {
    let base = operator_semantics(op, n_disks);
    let mut out = Vec::new();
    for part in OperatorPart::ALL {
        for lit in part.of(op) {
            let mut reduced = op.clone();
            part.of_mut(&mut reduced).remove(lit);
            if operator_semantics(&reduced, n_disks) == base {
                out.push((part, lit.clone()));
            }
        }
    }
    out
}

/// Compares literal sets after discounting literals that are individually
/// redundant on `n`-disc states, and requires identical behaviour.
/// Parameters of `learned` are renamed positionally to those of `reference`.
pub fn matches_modulo_redundancy(
    learned: &StripsOperator,
    reference: &StripsOperator,
    n_disks: usize,
) -> Result<(), String> {
    if learned.parameters.len() != reference.parameters.len() {
        return Err("parameter counts differ".into());
    }
    let learned = learned.renamed(&reference.parameters);
    if !semantically_equivalent(&learned, reference, n_disks) {
        return Err("operators behave differently".into());
    }
    let learned_redundant = redundant_literals(&learned, n_disks);
    let reference_redundant = redundant_literals(reference, n_disks);
    for part in OperatorPart::ALL {
        for lit in part.of(reference) {
            if !part.of(&learned).contains(lit) && !reference_redundant.contains(&(part, lit.clone())) {
                return Err(format!("{part} literal `{lit}` is missing"));
            }
        }
        for lit in part.of(&learned) {
            if !part.of(reference).contains(lit) && !learned_redundant.contains(&(part, lit.clone())) {
                return Err(format!("{part} literal `{lit}` is extra and not redundant"));
            }
        }
    }
    Ok(())
}
