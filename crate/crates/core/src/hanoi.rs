//! Towers of Hanoi as a deterministic MDP over three pegs.
//!
//! A state is the vector of peg indices, one entry per disk, with disk 0 the
//! largest. Stacking order on each peg is implied by size, so every vector
//! over `{0, 1, 2}` is a physically valid configuration. The bit-string and
//! peg-string encodings are derived views of that vector.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PEGS: usize = 3;

/// Largest disk count [`enumerate_states`] will materialize by default.
pub const DEFAULT_STATE_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HanoiError {
    #[error("peg index {0} out of range (3 pegs)")]
    InvalidPeg(usize),
    #[error("source and target peg must differ (both {0})")]
    SamePeg(usize),
    #[error("state has {found} disks, MDP expects {expected}")]
    DiskCountMismatch { expected: usize, found: usize },
    #[error("illegal move {0} rejected: the per-move-penalty reward has no invalid-action outcome")]
    RejectedMove(Move),
    #[error("malformed bit encoding: {0}")]
    MalformedEncoding(String),
    #[error("malformed peg string: {0}")]
    MalformedPegString(String),
    #[error("cannot enumerate {n}-disk state space (cap is {cap})")]
    StateCapExceeded { n: usize, cap: usize },
}

/// Disk-to-peg assignment. Entry `i` is the peg of disk `i`; disk 0 is largest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HanoiState {
    disk_pegs: Vec<u8>,
}

impl HanoiState {
    pub fn new(disk_pegs: Vec<u8>) -> Result<Self, HanoiError> {
        if let Some(&bad) = disk_pegs.iter().find(|&&p| p as usize >= PEGS) {
            return Err(HanoiError::InvalidPeg(bad as usize));
        }
        Ok(Self { disk_pegs })
    }

    /// All `n` disks stacked on `peg`.
    pub fn all_on(n_disks: usize, peg: usize) -> Result<Self, HanoiError> {
        if peg >= PEGS {
            return Err(HanoiError::InvalidPeg(peg));
        }
        Ok(Self {
            disk_pegs: vec![peg as u8; n_disks],
        })
    }

    pub fn n_disks(&self) -> usize {
        self.disk_pegs.len()
    }

    pub fn disk_pegs(&self) -> &[u8] {
        &self.disk_pegs
    }

    pub fn peg_of(&self, disk: usize) -> usize {
        self.disk_pegs[disk] as usize
    }

    /// The topmost (smallest) disk on `peg`, i.e. the largest index placed there.
    pub fn top_of(&self, peg: usize) -> Option<usize> {
        self.disk_pegs.iter().rposition(|&p| p as usize == peg)
    }

    /// Disks on `peg` from bottom to top.
    pub fn disks_on(&self, peg: usize) -> impl Iterator<Item = usize> + '_ {
        self.disk_pegs
            .iter()
            .enumerate()
            .filter(move |(_, &p)| p as usize == peg)
            .map(|(d, _)| d)
    }

    /// The disk directly below `disk`, or `None` if it sits on the peg.
    pub fn disk_below(&self, disk: usize) -> Option<usize> {
        let peg = self.disk_pegs[disk];
        self.disk_pegs[..disk].iter().rposition(|&p| p == peg)
    }

    /// Base-3 rank of the state, disk 0 most significant. Dense in `0..3^n`.
    pub fn index(&self) -> usize {
        self.disk_pegs
            .iter()
            .fold(0usize, |acc, &p| acc * PEGS + p as usize)
    }

    pub fn from_index(n_disks: usize, mut index: usize) -> Self {
        let mut disk_pegs = vec![0u8; n_disks];
        for slot in disk_pegs.iter_mut().rev() {
            *slot = (index % PEGS) as u8;
            index /= PEGS;
        }
        Self { disk_pegs }
    }

    pub fn is_legal(&self, mv: &Move) -> bool {
        mv.disk < self.n_disks()
            && mv.from < PEGS
            && mv.to < PEGS
            && mv.from != mv.to
            && self.top_of(mv.from) == Some(mv.disk)
            && self.top_of(mv.to).is_none_or(|top| top < mv.disk)
    }

    /// Legal moves in lexicographic `(disk, from, to)` order.
    pub fn legal_moves(&self) -> Vec<Move> {
        let mut moves = Vec::with_capacity(3);
        for from in 0..PEGS {
            let Some(disk) = self.top_of(from) else {
                continue;
            };
            for to in 0..PEGS {
                if to != from && self.top_of(to).is_none_or(|top| top < disk) {
                    moves.push(Move { disk, from, to });
                }
            }
        }
        moves.sort();
        moves
    }

    /// Relocates the disk without checking legality.
    pub(crate) fn moved(&self, mv: &Move) -> Self {
        let mut next = self.clone();
        next.disk_pegs[mv.disk] = mv.to as u8;
        next
    }

    /// Legal successor, or `None` if the move is illegal here.
    pub fn successor(&self, mv: &Move) -> Option<Self> {
        self.is_legal(mv).then(|| self.moved(mv))
    }

    /// One-hot peg groups: bits `3i..3i+3` locate disk `i`.
    pub fn encode_bits(&self) -> Vec<u8> {
        let mut bits = vec![0u8; PEGS * self.n_disks()];
        for (disk, &peg) in self.disk_pegs.iter().enumerate() {
            bits[PEGS * disk + peg as usize] = 1;
        }
        bits
    }

    pub fn decode_bits(bits: &[u8]) -> Result<Self, HanoiError> {
        if !bits.len().is_multiple_of(PEGS) {
            return Err(HanoiError::MalformedEncoding(format!(
                "length {} is not a multiple of 3",
                bits.len()
            )));
        }
        let disk_pegs = bits
            .chunks(PEGS)
            .enumerate()
            .map(|(disk, group)| match group {
                [1, 0, 0] => Ok(0),
                [0, 1, 0] => Ok(1),
                [0, 0, 1] => Ok(2),
                _ => Err(HanoiError::MalformedEncoding(format!(
                    "group {disk} {group:?} is not one-hot"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { disk_pegs })
    }

    /// Bits as network input features.
    pub fn features(&self) -> Vec<f64> {
        self.encode_bits().into_iter().map(f64::from).collect()
    }

    /// Peg-string view such as `[12,00,00]`.
    ///
    /// Disks are labelled by size, `1` for the smallest up to `n` for the
    /// largest. Each peg lists its labels in ascending order, left-padded with
    /// `0` to `n` characters. Labels above 9 are not representable.
    pub fn encode_pegstring(&self) -> String {
        let n = self.n_disks();
        let pegs: Vec<String> = (0..PEGS)
            .map(|peg| {
                let mut labels: Vec<usize> = self.disks_on(peg).map(|d| n - d).collect();
                labels.sort_unstable();
                let digits: String = labels
                    .iter()
                    .map(|&l| char::from_digit(l as u32, 10).unwrap_or('?'))
                    .collect();
                format!("{digits:0>n$}")
            })
            .collect();
        format!("[{}]", pegs.join(","))
    }

    pub fn parse_pegstring(text: &str) -> Result<Self, HanoiError> {
        let bad = |why: &str| HanoiError::MalformedPegString(format!("{text:?}: {why}"));
        let inner = text
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| bad("expected surrounding brackets"))?;
        let groups: Vec<&str> = inner.split(',').map(str::trim).collect();
        if groups.len() != PEGS {
            return Err(bad("expected three comma-separated pegs"));
        }
        let n = groups[0].len();
        if groups.iter().any(|g| g.len() != n) {
            return Err(bad("pegs have unequal widths"));
        }
        let mut disk_pegs: Vec<Option<u8>> = vec![None; n];
        for (peg, group) in groups.iter().enumerate() {
            let labels: Vec<usize> = group
                .chars()
                .map(|c| c.to_digit(10).map(|d| d as usize))
                .collect::<Option<_>>()
                .ok_or_else(|| bad("non-digit character"))?;
            let zeros = labels.iter().take_while(|&&l| l == 0).count();
            let present = &labels[zeros..];
            if present.windows(2).any(|w| w[0] >= w[1]) || present.contains(&0) {
                return Err(bad("labels must be zero-padded then strictly ascending"));
            }
            for &label in present {
                if label > n {
                    return Err(bad("label exceeds disk count"));
                }
                let disk = n - label;
                if disk_pegs[disk].replace(peg as u8).is_some() {
                    return Err(bad("disk appears on two pegs"));
                }
            }
        }
        let disk_pegs = disk_pegs
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| bad("some disk is missing"))?;
        Ok(Self { disk_pegs })
    }
}

impl fmt::Display for HanoiState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode_pegstring())
    }
}

/// Move the top `disk` of `from` onto `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub disk: usize,
    pub from: usize,
    pub to: usize,
}

impl Move {
    pub fn new(disk: usize, from: usize, to: usize) -> Result<Self, HanoiError> {
        if from >= PEGS {
            return Err(HanoiError::InvalidPeg(from));
        }
        if to >= PEGS {
            return Err(HanoiError::InvalidPeg(to));
        }
        if from == to {
            return Err(HanoiError::SamePeg(from));
        }
        Ok(Self { disk, from, to })
    }

    /// The move that undoes this one.
    pub fn reversed(&self) -> Self {
        Self {
            disk: self.disk,
            from: self.to,
            to: self.from,
        }
    }
}

/// `disk:from->to`, e.g. `1:0->2`.
impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}->{}", self.disk, self.from, self.to)
    }
}

impl FromStr for Move {
    type Err = HanoiError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HanoiError::MalformedEncoding(format!("bad move token {s:?}"));
        let (disk, pegs) = s.split_once(':').ok_or_else(bad)?;
        let (from, to) = pegs.split_once("->").ok_or_else(bad)?;
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        Move::new(num(disk)?, num(from)?, num(to)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum RewardPreset {
    /// Every move costs -1; the goal adds nothing on top.
    PerMovePenalty,
    /// +1 per legal move, -1 for an illegal attempt (no-op), +10 for the move
    /// that reaches the goal.
    #[default]
    ValidInvalidGoal,
}


impl fmt::Display for RewardPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RewardPreset::PerMovePenalty => "per_move_penalty",
            RewardPreset::ValidInvalidGoal => "valid_invalid_goal",
        })
    }
}

impl FromStr for RewardPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per_move_penalty" => Ok(RewardPreset::PerMovePenalty),
            "valid_invalid_goal" => Ok(RewardPreset::ValidInvalidGoal),
            other => Err(format!("unknown reward preset {other:?}")),
        }
    }
}

/// Reward function fixed by a preset.
///
/// Under `PerMovePenalty` the goal reward is added to the step reward of the
/// move that reaches the goal, so every move costs exactly -1 and the value
/// of a state is minus its distance to the goal. Under `ValidInvalidGoal` the
/// goal reward replaces the step reward of that final move.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "RewardPreset", into = "RewardPreset")]
pub struct RewardModel {
    preset: RewardPreset,
    step_reward: f64,
    invalid_reward: f64,
    goal_reward: f64,
}

impl RewardModel {
    pub fn per_move_penalty() -> Self {
        Self {
            preset: RewardPreset::PerMovePenalty,
            step_reward: -1.0,
            invalid_reward: f64::NAN,
            goal_reward: 0.0,
        }
    }

    pub fn valid_invalid_goal() -> Self {
        Self {
            preset: RewardPreset::ValidInvalidGoal,
            step_reward: 1.0,
            invalid_reward: -1.0,
            goal_reward: 10.0,
        }
    }

    pub fn preset(&self) -> RewardPreset {
        self.preset
    }

    pub fn step_reward(&self) -> f64 {
        self.step_reward
    }

    pub fn goal_reward(&self) -> f64 {
        self.goal_reward
    }

    /// `None` when the preset has no invalid-action semantics.
    pub fn invalid_reward(&self) -> Option<f64> {
        self.allows_invalid().then_some(self.invalid_reward)
    }

    pub fn allows_invalid(&self) -> bool {
        self.preset == RewardPreset::ValidInvalidGoal
    }

    /// Reward for a legal move; `reaches_goal` marks the move entering the goal.
    pub fn legal_reward(&self, reaches_goal: bool) -> f64 {
        match (self.preset, reaches_goal) {
            (_, false) => self.step_reward,
            (RewardPreset::PerMovePenalty, true) => self.step_reward + self.goal_reward,
            (RewardPreset::ValidInvalidGoal, true) => self.goal_reward,
        }
    }
}

impl Default for RewardModel {
    fn default() -> Self {
        RewardPreset::default().into()
    }
}

impl From<RewardPreset> for RewardModel {
    fn from(preset: RewardPreset) -> Self {
        match preset {
            RewardPreset::PerMovePenalty => Self::per_move_penalty(),
            RewardPreset::ValidInvalidGoal => Self::valid_invalid_goal(),
        }
    }
}

impl From<RewardModel> for RewardPreset {
    fn from(model: RewardModel) -> Self {
        model.preset
    }
}

/// Outcome of [`HanoiMdp::apply`].
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub next: HanoiState,
    pub reward: f64,
    pub done: bool,
    /// Whether the move was legal; illegal moves leave the state unchanged.
    pub legal: bool,
}

/// `n` disks move from `source_peg` to `target_peg` under a reward preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HanoiMdp {
    n_disks: usize,
    reward: RewardModel,
    source_peg: usize,
    target_peg: usize,
}

impl HanoiMdp {
    pub fn new(
        n_disks: usize,
        reward: RewardModel,
        source_peg: usize,
        target_peg: usize,
    ) -> Result<Self, HanoiError> {
        for peg in [source_peg, target_peg] {
            if peg >= PEGS {
                return Err(HanoiError::InvalidPeg(peg));
            }
        }
        if source_peg == target_peg {
            return Err(HanoiError::SamePeg(source_peg));
        }
        Ok(Self {
            n_disks,
            reward,
            source_peg,
            target_peg,
        })
    }

    /// Peg 0 to peg 2 under the given preset.
    pub fn standard(n_disks: usize, preset: RewardPreset) -> Self {
        Self {
            n_disks,
            reward: preset.into(),
            source_peg: 0,
            target_peg: PEGS - 1,
        }
    }

    pub fn with_reward(mut self, preset: RewardPreset) -> Self {
        self.reward = preset.into();
        self
    }

    pub fn n_disks(&self) -> usize {
        self.n_disks
    }

    pub fn reward_model(&self) -> &RewardModel {
        &self.reward
    }

    pub fn source_peg(&self) -> usize {
        self.source_peg
    }

    pub fn target_peg(&self) -> usize {
        self.target_peg
    }

    pub fn initial_state(&self) -> HanoiState {
        HanoiState {
            disk_pegs: vec![self.source_peg as u8; self.n_disks],
        }
    }

    pub fn goal_state(&self) -> HanoiState {
        HanoiState {
            disk_pegs: vec![self.target_peg as u8; self.n_disks],
        }
    }

    pub fn is_goal(&self, state: &HanoiState) -> bool {
        state.disk_pegs.iter().all(|&p| p as usize == self.target_peg)
    }

    /// Length of the shortest plan from the initial state.
    pub fn optimal_plan_length(&self) -> usize {
        (1usize << self.n_disks) - 1
    }

    fn check_state(&self, state: &HanoiState) -> Result<(), HanoiError> {
        if state.n_disks() != self.n_disks {
            return Err(HanoiError::DiskCountMismatch {
                expected: self.n_disks,
                found: state.n_disks(),
            });
        }
        Ok(())
    }

    pub fn apply(&self, state: &HanoiState, mv: &Move) -> Result<Step, HanoiError> {
        self.check_state(state)?;
        if state.is_legal(mv) {
            let next = state.moved(mv);
            let done = self.is_goal(&next);
            return Ok(Step {
                reward: self.reward.legal_reward(done),
                next,
                done,
                legal: true,
            });
        }
        match self.reward.invalid_reward() {
            Some(reward) => Ok(Step {
                next: state.clone(),
                reward,
                done: false,
                legal: false,
            }),
            None => Err(HanoiError::RejectedMove(*mv)),
        }
    }

    /// Replays `moves` from the initial state; `Err(k)` names the first illegal move.
    pub fn replay(&self, moves: &[Move]) -> Result<HanoiState, usize> {
        self.replay_from(&self.initial_state(), moves)
    }

    pub fn replay_from(&self, start: &HanoiState, moves: &[Move]) -> Result<HanoiState, usize> {
        let mut state = start.clone();
        for (k, mv) in moves.iter().enumerate() {
            state = state.successor(mv).ok_or(k)?;
        }
        Ok(state)
    }

    /// Whether `moves` is a legal plan from the initial state that ends at the goal.
    pub fn solves(&self, moves: &[Move]) -> bool {
        self.replay(moves).is_ok_and(|s| self.is_goal(&s))
    }
}

pub fn legal_moves(state: &HanoiState) -> Vec<Move> {
    state.legal_moves()
}

pub fn enumerate_states(n_disks: usize) -> Result<Vec<HanoiState>, HanoiError> {
    enumerate_states_capped(n_disks, DEFAULT_STATE_CAP)
}

/// All `3^n` states in [`HanoiState::index`] order.
pub fn enumerate_states_capped(n_disks: usize, cap: usize) -> Result<Vec<HanoiState>, HanoiError> {
    if n_disks > cap {
        return Err(HanoiError::StateCapExceeded { n: n_disks, cap });
    }
    let count = PEGS.pow(n_disks as u32);
    Ok((0..count).map(|i| HanoiState::from_index(n_disks, i)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(pegs: &[u8]) -> HanoiState {
        HanoiState::new(pegs.to_vec()).unwrap()
    }

    #[test]
    fn two_disks_on_one_peg_have_two_moves() {
        let moves = st(&[0, 0]).legal_moves();
        assert_eq!(moves, vec![Move::new(1, 0, 1).unwrap(), Move::new(1, 0, 2).unwrap()]);
    }

    #[test]
    fn split_two_disk_state_has_three_moves() {
        // large on peg 0, small on peg 1
        let moves = st(&[0, 1]).legal_moves();
        assert_eq!(
            moves,
            vec![
                Move::new(0, 0, 2).unwrap(),
                Move::new(1, 1, 0).unwrap(),
                Move::new(1, 1, 2).unwrap(),
            ]
        );
    }

    #[test]
    fn single_disk_always_two_moves() {
        for peg in 0..3 {
            assert_eq!(st(&[peg]).legal_moves().len(), 2);
        }
    }

    #[test]
    fn move_count_law_exhaustive() {
        for n in 2..=6 {
            for s in enumerate_states(n).unwrap() {
                let stacked = s.disk_pegs().iter().all(|&p| p == s.disk_pegs()[0]);
                assert_eq!(s.legal_moves().len(), if stacked { 2 } else { 3 }, "{s}");
            }
        }
    }

    #[test]
    fn first_figure_move() {
        let mdp = HanoiMdp::standard(2, RewardPreset::ValidInvalidGoal);
        let step = mdp.apply(&mdp.initial_state(), &Move::new(1, 0, 1).unwrap()).unwrap();
        assert_eq!(step.next, st(&[0, 1]));
        assert_eq!(step.reward, 1.0);
        assert!(!step.done);
    }

    #[test]
    fn goal_move_earns_goal_reward() {
        let mdp = HanoiMdp::standard(2, RewardPreset::ValidInvalidGoal);
        let step = mdp.apply(&st(&[2, 1]), &Move::new(1, 1, 2).unwrap()).unwrap();
        assert!(step.done);
        assert_eq!(step.reward, 10.0);

        let mdp = mdp.with_reward(RewardPreset::PerMovePenalty);
        let step = mdp.apply(&st(&[2, 1]), &Move::new(1, 1, 2).unwrap()).unwrap();
        assert!(step.done);
        assert_eq!(step.reward, -1.0);
    }

    #[test]
    fn illegal_move_is_noop_or_rejected() {
        let mdp = HanoiMdp::standard(2, RewardPreset::ValidInvalidGoal);
        let s = st(&[0, 1]);
        let large_on_small = Move::new(0, 0, 1).unwrap();
        let step = mdp.apply(&s, &large_on_small).unwrap();
        assert_eq!(step.next, s);
        assert_eq!(step.reward, -1.0);
        assert!(!step.done && !step.legal);

        let strict = mdp.with_reward(RewardPreset::PerMovePenalty);
        assert_eq!(
            strict.apply(&s, &large_on_small),
            Err(HanoiError::RejectedMove(large_on_small))
        );
    }

    #[test]
    fn goal_test() {
        let mdp = HanoiMdp::standard(3, RewardPreset::default());
        assert!(mdp.is_goal(&mdp.goal_state()));
        assert!(!mdp.is_goal(&mdp.initial_state()));
        let empty = HanoiMdp::standard(0, RewardPreset::default());
        assert!(empty.is_goal(&empty.initial_state()));
    }

    #[test]
    fn bit_encoding_examples() {
        assert_eq!(st(&[0, 0]).encode_bits(), vec![1, 0, 0, 1, 0, 0]);
        assert_eq!(st(&[2, 2]).encode_bits(), vec![0, 0, 1, 0, 0, 1]);
        assert_eq!(HanoiState::decode_bits(&[1, 0, 0, 1, 0, 0]).unwrap(), st(&[0, 0]));
        assert_eq!(HanoiState::decode_bits(&[0, 0, 1, 0, 0, 1]).unwrap(), st(&[2, 2]));
        assert!(HanoiState::decode_bits(&[1, 1, 0, 1, 0, 0]).is_err());
        assert!(HanoiState::decode_bits(&[0, 0, 0]).is_err());
        assert!(HanoiState::decode_bits(&[1, 0]).is_err());
        assert!(HanoiState::decode_bits(&[2, 0, 0]).is_err());
    }

    #[test]
    fn bit_roundtrip_exhaustive() {
        for n in 0..=6 {
            for s in enumerate_states(n).unwrap() {
                assert_eq!(HanoiState::decode_bits(&s.encode_bits()).unwrap(), s);
            }
        }
    }

    #[test]
    fn pegstring_examples() {
        assert_eq!(st(&[0, 0]).encode_pegstring(), "[12,00,00]");
        assert_eq!(st(&[2, 2]).encode_pegstring(), "[00,00,12]");
        assert_eq!(st(&[0, 0, 0]).encode_pegstring(), "[123,000,000]");
        // disks labelled 3 and 2 on peg 0, label 1 on peg 2
        assert_eq!(st(&[0, 0, 2]).encode_pegstring(), "[023,000,001]");
        assert_eq!(st(&[0, 1, 2]).encode_pegstring(), "[003,002,001]");
    }

    #[test]
    fn pegstring_roundtrip_and_errors() {
        for n in 1..=6 {
            for s in enumerate_states(n).unwrap() {
                assert_eq!(HanoiState::parse_pegstring(&s.encode_pegstring()).unwrap(), s);
            }
        }
        assert_eq!(
            HanoiState::parse_pegstring("[023, 000, 001]").unwrap(),
            st(&[0, 0, 2])
        );
        for bad in ["12,00,00", "[21,00,00]", "[12,00]", "[12,10,00]", "[12,0,00]", "[1a,00,00]", "[10,00,00]"] {
            assert!(HanoiState::parse_pegstring(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(enumerate_states(1).unwrap().len(), 3);
        assert_eq!(enumerate_states(2).unwrap().len(), 9);
        assert_eq!(enumerate_states(4).unwrap().len(), 81);
        assert_eq!(
            enumerate_states(13),
            Err(HanoiError::StateCapExceeded { n: 13, cap: 12 })
        );
        let states = enumerate_states(3).unwrap();
        for (i, s) in states.iter().enumerate() {
            assert_eq!(s.index(), i);
        }
    }

    #[test]
    fn move_tokens() {
        let mv = Move::new(2, 0, 1).unwrap();
        assert_eq!(mv.to_string(), "2:0->1");
        assert_eq!("2:0->1".parse::<Move>().unwrap(), mv);
        assert!("2:1->1".parse::<Move>().is_err());
        assert!(Move::new(0, 0, 3).is_err());
    }
}
