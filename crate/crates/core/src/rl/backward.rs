use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::net::{Mlp, OutputActivation};
use super::{action_move, one_hot_action, AgentConfig, RlError, TransitionSample, ACTIONS, N_ACTIONS};
use crate::hanoi::{HanoiState, Move, PEGS};

/// Predicts the state preceding `s'` under action `a` as per-bit probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardModel {
    n_disks: usize,
    net: Mlp,
}

impl BackwardModel {
    pub fn new(n_disks: usize, hidden: usize, rng: &mut impl rand::Rng) -> Self {
        let bits = PEGS * n_disks;
        Self {
            n_disks,
            net: Mlp::new(bits + N_ACTIONS, hidden, bits, OutputActivation::Sigmoid, rng),
        }
    }

    pub fn n_disks(&self) -> usize {
        self.n_disks
    }

    fn input(&self, after: &[u8], action: usize) -> Result<Vec<f64>, RlError> {
        if action >= N_ACTIONS {
            return Err(RlError::InvalidAction(action));
        }
        if after.len() != PEGS * self.n_disks {
            return Err(RlError::BitLength {
                expected: PEGS * self.n_disks,
                found: after.len(),
            });
        }
        let mut x: Vec<f64> = after.iter().map(|&b| f64::from(b)).collect();
        x.extend(one_hot_action(action));
        Ok(x)
    }

    pub fn predict_probs(&self, after: &[u8], action: usize) -> Result<Vec<f64>, RlError> {
        Ok(self.net.forward(&self.input(after, action)?))
    }

    /// Thresholds at 0.5 and snaps every disk group to its most probable set
    /// bit. `None` if some group has no bit over threshold.
    pub fn predict(&self, after: &HanoiState, action: usize) -> Result<Option<HanoiState>, RlError> {
        let probs = self.predict_probs(&after.encode_bits(), action)?;
        let mut pegs = Vec::with_capacity(self.n_disks);
        for group in probs.chunks(PEGS) {
            let best = group
                .iter()
                .enumerate()
                .filter(|(_, &p)| p >= 0.5)
                .max_by(|a, b| a.1.total_cmp(b.1));
            match best {
                Some((peg, _)) => pegs.push(peg as u8),
                None => return Ok(None),
            }
        }
        Ok(Some(HanoiState::new(pegs)?))
    }

    /// Mean per-bit binary cross-entropy of predecessor predictions.
    pub fn cross_entropy(&self, samples: &[TransitionSample]) -> Result<f64, RlError> {
        if samples.is_empty() {
            return Err(RlError::EmptySamples);
        }
        let mut total = 0.0;
        let mut count = 0usize;
        for s in samples {
            let probs = self.predict_probs(&s.s_next, s.a)?;
            for (p, &t) in probs.iter().zip(&s.s) {
                let p = p.clamp(1e-12, 1.0 - 1e-12);
                total -= if t == 1 { p.ln() } else { (1.0 - p).ln() };
                count += 1;
            }
        }
        Ok(total / count as f64)
    }

    /// One Adam step on a batch; returns the batch cross-entropy before the step.
    pub(crate) fn train_batch(&mut self, batch: &[&TransitionSample], learning_rate: f64) -> Result<f64, RlError> {
        let inputs = batch
            .iter()
            .map(|s| self.input(&s.s_next, s.a))
            .collect::<Result<Vec<_>, _>>()?;
        let scale = 1.0 / (batch.len() * PEGS * self.n_disks) as f64;
        let mut loss = 0.0;
        self.net.train_step(&inputs, learning_rate, |i, out| {
            // sigmoid + cross-entropy: d/dz = p - t
            out.iter()
                .zip(&batch[i].s)
                .map(|(p, &t)| {
                    let t = f64::from(t);
                    let pc = p.clamp(1e-12, 1.0 - 1e-12);
                    loss -= t * pc.ln() + (1.0 - t) * (1.0 - pc).ln();
                    (p - t) * scale
                })
                .collect()
        });
        Ok(loss * scale)
    }
}

/// Trains a fresh model with `config.max_steps` minibatch updates drawn
/// uniformly from `samples`. Only transitions that changed the state carry
/// predecessor information; the rest are skipped.
pub fn backward_model_train(samples: &[TransitionSample], config: &AgentConfig) -> Result<BackwardModel, RlError> {
    config.validate()?;
    let useful: Vec<&TransitionSample> = samples.iter().filter(|s| s.s != s.s_next).collect();
    let first = useful.first().ok_or(RlError::EmptySamples)?;
    let n_disks = first.s.len() / PEGS;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = BackwardModel::new(n_disks, config.hidden, &mut rng);
    for _ in 0..config.max_steps {
        let batch: Vec<&TransitionSample> = (0..config.batch_size)
            .map(|_| useful[rand::Rng::gen_range(&mut rng, 0..useful.len())])
            .collect();
        model.train_batch(&batch, config.learning_rate)?;
    }
    Ok(model)
}

/// The state from which `action` leads to `after`, if one exists.
pub fn exact_predecessor(after: &HanoiState, action: usize) -> Option<HanoiState> {
    let (from, to) = *ACTIONS.get(action)?;
    let disk = after.top_of(to)?;
    let mut pegs = after.disk_pegs().to_vec();
    pegs[disk] = from as u8;
    let before = HanoiState::new(pegs).ok()?;
    let mv = Move { disk, from, to };
    (action_move(&before, action) == Some(mv) && before.is_legal(&mv)).then_some(before)
}
