use serde::Serialize;

use super::format::{ActionSchema, PlanDocument, ProblemDocument};
use crate::hanoi::{HanoiMdp, HanoiState, Move};
use crate::strips::{move_to_ground_action, relational_state, state_to_predicates, Facts, StripsOperator};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FailingStep {
    /// Index of the failing action; the plan length when every step applied
    /// but the goal was not reached.
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationVerdict {
    pub valid: bool,
    pub failing_step: Option<FailingStep>,
    pub optimal: bool,
    /// `optimal_length / plan_length` for a valid plan with a known optimum.
    pub optimality_ratio: Option<f64>,
}

impl ValidationVerdict {
    fn invalid(index: usize, reason: String) -> Self {
        Self {
            valid: false,
            failing_step: Some(FailingStep { index, reason }),
            optimal: false,
            optimality_ratio: None,
        }
    }
}

/// Simulates `plan` from `INIT`: each step must name a declared action with
/// the right arity over known objects, and its preconditions must hold. The
/// plan is valid when every step applies and `GOAL` holds at the end.
pub fn validate_plan(doc: &ProblemDocument, plan: &PlanDocument, optimal_length: Option<usize>) -> ValidationVerdict {
    let objects = doc.objects();
    let mut state: Facts = doc.init.iter().cloned().collect();
    let mut operators: Vec<(&ActionSchema, StripsOperator)> = Vec::new();
    for a in &doc.actions {
        match a.to_operator() {
            Ok(op) => operators.push((a, op)),
            Err(e) => return ValidationVerdict::invalid(0, format!("action `{}` is malformed: {e}", a.name)),
        }
    }
    for (index, step) in plan.steps.iter().enumerate() {
        let Some((_, op)) = operators.iter().find(|(a, _)| a.name == step.name) else {
            return ValidationVerdict::invalid(index, format!("unknown action `{}`", step.name));
        };
        let map = match op.binding(&step.args) {
            Ok(m) => m,
            Err(e) => return ValidationVerdict::invalid(index, e.to_string()),
        };
        if let Some(bad) = step.args.iter().find(|a| !objects.contains(a)) {
            return ValidationVerdict::invalid(index, format!("unknown object `{bad}` in `{step}`"));
        }
        for p in &op.alpha {
            let g = p.substitute(&map).expect("validated operator binds every argument");
            if !state.contains(&g) {
                return ValidationVerdict::invalid(index, format!("precondition `{g}` of `{step}` does not hold"));
            }
        }
        for p in &op.beta {
            let g = p.substitute(&map).expect("validated operator binds every argument");
            if state.contains(&g) {
                return ValidationVerdict::invalid(index, format!("negative precondition `not {g}` of `{step}` is violated"));
            }
        }
        state = op.apply(&state, &map);
    }
    if let Some(missing) = doc.goal.iter().find(|g| !state.contains(g)) {
        return ValidationVerdict::invalid(plan.steps.len(), format!("goal `{missing}` does not hold after the last step"));
    }
    let len = plan.steps.len();
    let ratio = optimal_length.map(|opt| if len == 0 { 1.0 } else { opt as f64 / len as f64 });
    ValidationVerdict {
        valid: true,
        failing_step: None,
        optimal: optimal_length == Some(len),
        optimality_ratio: ratio,
    }
}

/// Problem text for moving from `start` to `goal` under `operator`. The goal
/// lists only the goal state's non-static facts.
pub fn hanoi_problem(start: &HanoiState, goal: &HanoiState, operator: &StripsOperator) -> ProblemDocument {
    ProblemDocument {
        goal: state_to_predicates(goal)
            .into_iter()
            .filter(|p| !p.is_static())
            .collect(),
        init: state_to_predicates(start),
        actions: vec![ActionSchema::from_operator(operator)],
    }
}

pub fn mdp_problem(mdp: &HanoiMdp, operator: &StripsOperator) -> ProblemDocument {
    hanoi_problem(&mdp.initial_state(), &mdp.goal_state(), operator)
}

/// Grounds `moves` by replaying them from `start`. Replay stops tracking the
/// state at the first illegal move, whose grounding then reflects the state
/// it was attempted in.
pub fn plan_from_moves(start: &HanoiState, moves: &[Move]) -> PlanDocument {
    let mut state = start.clone();
    let mut steps = Vec::with_capacity(moves.len());
    for mv in moves {
        steps.push(move_to_ground_action(&state, mv));
        if let Some(next) = state.successor(mv) {
            state = next;
        }
    }
    PlanDocument { steps }
}

/// Whether relational facts of `state` are what the document's `INIT` says.
pub fn init_matches(doc: &ProblemDocument, state: &HanoiState) -> bool {
    doc.init.iter().cloned().collect::<Facts>() == relational_state(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::bfs_shortest_plan;
    use crate::hanoi::RewardPreset;
    use crate::plan_io::{emit_problem, parse_plan, parse_problem};
    use crate::strips::reference_move_operator;

    fn two() -> (HanoiMdp, ProblemDocument) {
        let mdp = HanoiMdp::standard(2, RewardPreset::default());
        let doc = mdp_problem(&mdp, &reference_move_operator());
        (mdp, doc)
    }

    #[test]
    fn exact_plan_is_valid_and_optimal() {
        let (mdp, doc) = two();
        let plan = plan_from_moves(&mdp.initial_state(), &bfs_shortest_plan(&mdp).unwrap());
        let v = validate_plan(&doc, &plan, Some(3));
        assert!(v.valid && v.optimal);
        assert_eq!(v.optimality_ratio, Some(1.0));
        assert!(v.failing_step.is_none());
    }

    #[test]
    fn large_on_small_fails_at_step_zero() {
        let (_, doc) = two();
        // d1 is the small disc on top of d2; moving d2 needs it clear
        let plan = parse_plan("move d2 peg1 peg3").unwrap();
        let v = validate_plan(&doc, &plan, Some(3));
        assert!(!v.valid && !v.optimal);
        let f = v.failing_step.unwrap();
        assert_eq!(f.index, 0);
        assert!(f.reason.contains("precondition") && f.reason.contains("clear d2"), "{}", f.reason);
    }

    #[test]
    fn five_move_plan_is_valid_not_optimal() {
        let (mdp, doc) = two();
        let moves: Vec<Move> = ["1:0->1", "1:1->2", "1:2->1", "0:0->2", "1:1->2"]
            .iter()
            .map(|m| m.parse().unwrap())
            .collect();
        assert!(mdp.solves(&moves));
        let v = validate_plan(&doc, &plan_from_moves(&mdp.initial_state(), &moves), Some(3));
        assert!(v.valid && !v.optimal);
        assert!((v.optimality_ratio.unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn unreached_goal_names_final_index() {
        let (mdp, doc) = two();
        let plan = plan_from_moves(&mdp.initial_state(), &["1:0->1".parse().unwrap()]);
        let v = validate_plan(&doc, &plan, None);
        assert_eq!(v.failing_step.unwrap().index, 1);
    }

    #[test]
    fn unknown_action_arity_and_object() {
        let (_, doc) = two();
        for (text, needle) in [
            ("jump d1 peg1 peg3", "unknown action"),
            ("move d1 peg1", "arguments"),
            ("move d1 d2 peg9", "unknown object"),
        ] {
            let v = validate_plan(&doc, &parse_plan(text).unwrap(), None);
            assert!(v.failing_step.unwrap().reason.contains(needle), "{text}");
        }
    }

    #[test]
    fn emitted_three_disc_problem_validates_exact_plan() {
        let mdp = HanoiMdp::standard(3, RewardPreset::default());
        let text = emit_problem(&mdp_problem(&mdp, &reference_move_operator()));
        let doc = parse_problem(&text).unwrap();
        assert!(init_matches(&doc, &mdp.initial_state()));
        let plan = plan_from_moves(&mdp.initial_state(), &bfs_shortest_plan(&mdp).unwrap());
        let reparsed = parse_plan(&plan.to_string()).unwrap();
        let v = validate_plan(&doc, &reparsed, Some(7));
        assert!(v.valid && v.optimal);
    }

    #[test]
    fn figure_problem_accepts_its_own_solution() {
        // the printed instance: d1 on d2 on peg3, goal d2 on peg1 and d1 on peg2
        let doc = parse_problem(crate::plan_io::format::tests::FIGURE).unwrap();
        let plan = parse_plan("move d1 d2 peg2\nmove d2 peg3 peg1").unwrap();
        assert!(validate_plan(&doc, &plan, Some(2)).optimal);
        let v = validate_plan(&doc, &parse_plan("move d2 peg3 peg1").unwrap(), None);
        assert!(!v.valid);
    }
}
