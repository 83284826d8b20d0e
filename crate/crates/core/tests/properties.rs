use std::collections::{HashMap, VecDeque};

use hanoi_migrate::exact::bfs_plan_from;
use hanoi_migrate::graph::{explore, StateGraph};
use hanoi_migrate::hanoi::{HanoiMdp, HanoiState, Move, RewardPreset};
use hanoi_migrate::plan_io::{
    bleu, emit_plan, emit_problem, hanoi_problem, parse_plan, parse_problem, plan_from_moves, rouge_l, validate_plan,
};
use hanoi_migrate::strips::reference_move_operator;
use proptest::prelude::*;

fn state(n: usize) -> impl Strategy<Value = HanoiState> {
    proptest::collection::vec(0u8..3, n).prop_map(|pegs| HanoiState::new(pegs).unwrap())
}

fn sized_state(max: usize) -> impl Strategy<Value = HanoiState> {
    (1..=max).prop_flat_map(state)
}

/// Any peg pair, moving whatever is on top of `from` (disk 0 if empty).
fn attempts(len: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
    proptest::collection::vec((0usize..3, 0usize..3).prop_filter("distinct pegs", |(a, b)| a != b), 0..len)
}

fn to_moves(start: &HanoiState, pairs: &[(usize, usize)]) -> Vec<Move> {
    let mut s = start.clone();
    let mut out = Vec::new();
    for &(from, to) in pairs {
        let disk = s.top_of(from).unwrap_or(0);
        let mv = Move::new(disk, from, to).unwrap();
        if let Some(next) = s.successor(&mv) {
            s = next;
        }
        out.push(mv);
    }
    out
}

/// Distances by brute-force search over raw peg vectors.
fn raw_distance(start: &HanoiState, goal: &HanoiState) -> usize {
    let top = |pegs: &[u8], p: u8| (0..pegs.len()).rev().find(|&d| pegs[d] == p);
    let mut dist = HashMap::from([(start.disk_pegs().to_vec(), 0usize)]);
    let mut queue = VecDeque::from([start.disk_pegs().to_vec()]);
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        if s == goal.disk_pegs() {
            return d;
        }
        for from in 0..3u8 {
            let Some(k) = top(&s, from) else { continue };
            for to in 0..3u8 {
                if to != from && top(&s, to).is_none_or(|t| t < k) {
                    let mut next = s.clone();
                    next[k] = to;
                    if !dist.contains_key(&next) {
                        dist.insert(next.clone(), d + 1);
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    unreachable!("the puzzle graph is connected")
}

fn lcs_brute(a: &[u8], b: &[u8]) -> usize {
    match (a.split_first(), b.split_first()) {
        (Some((x, ra)), Some((y, rb))) => {
            if x == y {
                1 + lcs_brute(ra, rb)
            } else {
                lcs_brute(ra, b).max(lcs_brute(a, rb))
            }
        }
        _ => 0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn encodings_round_trip(s in sized_state(8)) {
        prop_assert_eq!(HanoiState::decode_bits(&s.encode_bits()).unwrap(), s.clone());
        prop_assert_eq!(HanoiState::parse_pegstring(&s.encode_pegstring()).unwrap(), s.clone());
        prop_assert_eq!(HanoiState::from_index(s.n_disks(), s.index()), s.clone());
    }

    #[test]
    fn legal_moves_reverse(s in sized_state(6)) {
        for mv in s.legal_moves() {
            let next = s.successor(&mv).unwrap();
            prop_assert_eq!(next.successor(&mv.reversed()), Some(s.clone()));
        }
    }

    #[test]
    fn bfs_matches_brute_force(s in sized_state(5)) {
        let mdp = HanoiMdp::standard(s.n_disks(), RewardPreset::PerMovePenalty);
        let plan = bfs_plan_from(&mdp, &s).unwrap();
        prop_assert_eq!(plan.len(), raw_distance(&s, &mdp.goal_state()));
        prop_assert!(mdp.replay_from(&s, &plan).map(|g| mdp.is_goal(&g)).unwrap());
    }

    #[test]
    fn problem_text_round_trips((a, b) in (1usize..=5).prop_flat_map(|n| (state(n), state(n)))) {
        let doc = hanoi_problem(&a, &b, &reference_move_operator());
        let parsed = parse_problem(&emit_problem(&doc)).unwrap();
        let again = parse_problem(&emit_problem(&parsed)).unwrap();
        prop_assert_eq!(&parsed, &again);
        prop_assert_eq!(parsed, doc);
    }

    #[test]
    fn validator_agrees_with_simulator(
        (start, pairs) in (1usize..=4).prop_flat_map(|n| (state(n), attempts(20)))
    ) {
        let mdp = HanoiMdp::standard(start.n_disks(), RewardPreset::default());
        let moves = to_moves(&start, &pairs);
        let doc = hanoi_problem(&start, &mdp.goal_state(), &reference_move_operator());
        let plan = parse_plan(&emit_plan(&plan_from_moves(&start, &moves))).unwrap();
        let verdict = validate_plan(&doc, &plan, None);
        let simulated = mdp.replay_from(&start, &moves).map(|g| mdp.is_goal(&g)).unwrap_or(false);
        prop_assert_eq!(verdict.valid, simulated);
        if let (Some(f), Err(bad)) = (&verdict.failing_step, mdp.replay_from(&start, &moves)) {
            prop_assert_eq!(f.index, bad);
        }
    }

    #[test]
    fn rouge_is_lcs_f1(a in proptest::collection::vec(0u8..4, 0..9), b in proptest::collection::vec(0u8..4, 0..9)) {
        let f = rouge_l(&a, &b);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert_eq!(f, rouge_l(&b, &a));
        let l = lcs_brute(&a, &b) as f64;
        let want = if a.is_empty() && b.is_empty() {
            1.0
        } else if l == 0.0 {
            0.0
        } else {
            2.0 * l / (a.len() + b.len()) as f64
        };
        prop_assert!((f - want).abs() < 1e-12);
        prop_assert_eq!(f == 1.0, a == b);
    }

    #[test]
    fn bleu_bounded(a in proptest::collection::vec(0u8..4, 0..12), b in proptest::collection::vec(0u8..4, 0..12)) {
        let s = bleu(&a, &b, 4);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&s));
        prop_assert_eq!(bleu(&a, &a, 4), 1.0);
    }

    #[test]
    fn graph_dump_round_trips(n in 1usize..=4, steps in 0usize..400, seed in any::<u64>()) {
        let mdp = HanoiMdp::standard(n, RewardPreset::default());
        let g = explore(&mdp, steps, seed);
        let back = StateGraph::parse_dump(&g.dump()).unwrap();
        prop_assert_eq!(back.dump(), g.dump());
        prop_assert!(g.node_count() <= 3usize.pow(n as u32));
    }
}
