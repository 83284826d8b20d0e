use std::collections::{HashMap, VecDeque};

use super::{injective_tuples, Facts, GroundAction, Predicate, StripsError, StripsOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannerOptions {
    pub max_expansions: usize,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        Self {
            max_expansions: 1_000_000,
        }
    }
}

pub fn plan_forward(
    domain: &[StripsOperator],
    init: &Facts,
    goal: &[Predicate],
) -> Result<Vec<GroundAction>, StripsError> {
    plan_forward_with(domain, init, goal, PlannerOptions::default())
}

/// Breadth-first search over grounded operator applications, so the plan
/// returned is a shortest one.
///
/// Objects are every name mentioned in `init` or `goal`. Parameters bind
/// injectively (distinct parameters take distinct objects). Successors are
/// generated in domain order, then lexicographic binding order.
pub fn plan_forward_with(
    domain: &[StripsOperator],
    init: &Facts,
    goal: &[Predicate],
    options: PlannerOptions,
) -> Result<Vec<GroundAction>, StripsError> {
    let satisfied = |s: &Facts| goal.iter().all(|g| s.contains(g));
    if satisfied(init) {
        return Ok(Vec::new());
    }
    let mut objects: Vec<String> = init
        .iter()
        .chain(goal)
        .flat_map(|p| p.args.iter().cloned())
        .collect();
    objects.sort();
    objects.dedup();

    let groundings: Vec<(usize, Vec<String>)> = domain
        .iter()
        .enumerate()
        .flat_map(|(i, op)| {
            injective_tuples(&objects, op.parameters.len())
                .into_iter()
                .map(move |t| (i, t))
        })
        .collect();

    // node arena: (facts, parent index, action that produced it)
    let mut nodes: Vec<(Facts, usize, Option<GroundAction>)> = vec![(init.clone(), 0, None)];
    let mut seen: HashMap<Facts, usize> = HashMap::from([(init.clone(), 0)]);
    let mut queue = VecDeque::from([0usize]);
    let mut expansions = 0;
    while let Some(idx) = queue.pop_front() {
        expansions += 1;
        if expansions > options.max_expansions {
            return Err(StripsError::ExpansionLimit(options.max_expansions));
        }
        let state = nodes[idx].0.clone();
        for (op_idx, args) in &groundings {
            let op = &domain[*op_idx];
            let map = op.binding(args)?;
            if !op.is_applicable(&state, &map) {
                continue;
            }
            let next = op.apply(&state, &map);
            if seen.contains_key(&next) {
                continue;
            }
            let action = GroundAction {
                name: op.name.clone(),
                args: args.clone(),
            };
            let done = satisfied(&next);
            nodes.push((next.clone(), idx, Some(action)));
            let new_idx = nodes.len() - 1;
            seen.insert(next, new_idx);
            if done {
                let mut plan = Vec::new();
                let mut cursor = new_idx;
                while let Some(a) = nodes[cursor].2.clone() {
                    plan.push(a);
                    cursor = nodes[cursor].1;
                }
                plan.reverse();
                return Ok(plan);
            }
            queue.push_back(new_idx);
        }
    }
    Err(StripsError::NoPlan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::distances_to_goal;
    use crate::hanoi::{enumerate_states, HanoiMdp, RewardPreset};
    use crate::strips::{ground_action_to_move, reference_move_operator, relational_state};

    fn goal_facts(mdp: &HanoiMdp) -> Vec<Predicate> {
        relational_state(&mdp.goal_state())
            .into_iter()
            .filter(|p| !p.is_static())
            .collect()
    }

    #[test]
    fn reference_operator_plans_are_optimal() {
        let op = reference_move_operator();
        for n in 1..=3 {
            let mdp = HanoiMdp::standard(n, RewardPreset::default());
            let plan = plan_forward(std::slice::from_ref(&op), &relational_state(&mdp.initial_state()), &goal_facts(&mdp)).unwrap();
            assert_eq!(plan.len(), (1 << n) - 1);
            let mut s = mdp.initial_state();
            for a in &plan {
                s = s.moved(&ground_action_to_move(&s, a).unwrap());
            }
            assert!(mdp.is_goal(&s));
        }
    }

    #[test]
    fn every_start_state_planned_at_bfs_distance() {
        let op = reference_move_operator();
        let mdp = HanoiMdp::standard(2, RewardPreset::default());
        let dist = distances_to_goal(&mdp).unwrap();
        for s in enumerate_states(2).unwrap() {
            let plan = plan_forward(std::slice::from_ref(&op), &relational_state(&s), &goal_facts(&mdp)).unwrap();
            assert_eq!(plan.len(), dist[s.index()]);
        }
    }

    #[test]
    fn init_equal_goal_is_empty_plan() {
        let mdp = HanoiMdp::standard(2, RewardPreset::default());
        let goal = goal_facts(&mdp);
        let init = relational_state(&mdp.goal_state());
        assert!(plan_forward(&[reference_move_operator()], &init, &goal).unwrap().is_empty());
    }

    #[test]
    fn unsatisfiable_precondition_has_no_plan() {
        let mut op = reference_move_operator();
        op.alpha.insert(Predicate::on("to", "to2"));
        op.parameters.push("to2".into());
        op.beta.insert(Predicate::on("to", "to2"));
        let mdp = HanoiMdp::standard(2, RewardPreset::default());
        let res = plan_forward(&[op], &relational_state(&mdp.initial_state()), &goal_facts(&mdp));
        assert_eq!(res, Err(StripsError::NoPlan));
    }

    #[test]
    fn expansion_limit_reported() {
        let mdp = HanoiMdp::standard(3, RewardPreset::default());
        let res = plan_forward_with(
            &[reference_move_operator()],
            &relational_state(&mdp.initial_state()),
            &goal_facts(&mdp),
            PlannerOptions { max_expansions: 2 },
        );
        assert_eq!(res, Err(StripsError::ExpansionLimit(2)));
    }
}
