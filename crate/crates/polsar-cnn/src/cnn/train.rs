//! Stochastic training with the adaptive learning-rate rule.
//!
//! One "iteration" is a full epoch: a seeded shuffle, one gradient step per
//! sample at the current rate, then the full-set MSE, which decides the next
//! epoch's rate — decreasing error nudges the rate up 5%, anything else cuts
//! it 30%. The maximum iteration count is the sole stopping criterion;
//! there is no convergence test.

use crate::cnn::{mse_loss, CompactCnn, Patch};
use crate::error::{Error, Result};
use crate::rng::{self, ChaCha8Rng};
use rand_core::SeedableRng;

/// Hyper-parameters of one training run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    /// Number of epochs to run (exactly; no early stopping).
    pub max_iterations: usize,
    pub initial_lr: f64,
    /// Multiplier applied when the train MSE decreased (default 1.05).
    pub lr_up: f64,
    /// Multiplier applied otherwise, equality included (default 0.70).
    pub lr_down: f64,
    pub shuffle_seed: u64,
}

impl TrainConfig {
    /// The reference schedule: rate 0.05, +5% on improvement, -30% otherwise.
    pub fn new(max_iterations: usize, shuffle_seed: u64) -> Self {
        Self {
            max_iterations,
            initial_lr: 0.05,
            lr_up: 1.05,
            lr_down: 0.70,
            shuffle_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::BadTrainConfig("max_iterations must be at least 1".into()));
        }
        if !(self.initial_lr.is_finite() && self.initial_lr > 0.0) {
            return Err(Error::BadTrainConfig(format!(
                "initial learning rate must be positive, got {}",
                self.initial_lr
            )));
        }
        if !(self.lr_down > 0.0 && self.lr_down < 1.0 && self.lr_up > 1.0) {
            return Err(Error::BadTrainConfig(format!(
                "rate multipliers must satisfy 0 < down < 1 < up, got down={} up={}",
                self.lr_down, self.lr_up
            )));
        }
        Ok(())
    }
}

/// Training-set MSE and the learning rate that was in effect for one epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochStats {
    pub train_mse: f64,
    pub learning_rate: f64,
}

/// Per-epoch record of a completed run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainHistory {
    /// Full-set MSE of the freshly initialized network, the baseline the
    /// first epoch's rate adaptation compares against.
    pub initial_mse: f64,
    pub epochs: Vec<EpochStats>,
    pub final_epoch: usize,
    /// The rate after the last adaptation (what epoch `final_epoch + 1`
    /// would have used).
    pub final_learning_rate: f64,
}

/// The adaptive rate rule: scale up on strict improvement, down otherwise
/// (equality counts as "no improvement").
pub fn adapt_learning_rate(lr: f64, prev_mse: f64, new_mse: f64) -> f64 {
    adapt_with(lr, prev_mse, new_mse, 1.05, 0.70)
}

fn adapt_with(lr: f64, prev_mse: f64, new_mse: f64, up: f64, down: f64) -> f64 {
    if new_mse < prev_mse {
        lr * up
    } else {
        lr * down
    }
}

/// Mean per-sample loss over the whole set (forward passes only).
pub fn full_set_mse(net: &CompactCnn, samples: &[(Patch, usize)]) -> Result<f64> {
    let mut total = 0.0;
    for (patch, class) in samples {
        let (scores, _) = net.forward(patch)?;
        total += mse_loss(&scores, *class)?;
    }
    Ok(total / samples.len() as f64)
}

/// Runs exactly `cfg.max_iterations` epochs of per-sample stochastic
/// gradient descent and returns the trained network with its history.
/// Deterministic given the network's init seed and `cfg.shuffle_seed`.
pub fn train(
    mut net: CompactCnn,
    samples: &[(Patch, usize)],
    cfg: &TrainConfig,
) -> Result<(CompactCnn, TrainHistory)> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let num_classes = net.config().num_classes;
    if let Some((_, class)) = samples.iter().find(|(_, c)| *c >= num_classes) {
        return Err(Error::ClassOutOfRange {
            class: *class,
            num_classes,
        });
    }

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.shuffle_seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();

    let initial_mse = full_set_mse(&net, samples)?;
    let mut prev_mse = initial_mse;
    let mut lr = cfg.initial_lr;
    let mut epochs = Vec::with_capacity(cfg.max_iterations);

    for epoch in 1..=cfg.max_iterations {
        rng::shuffle(&mut shuffle_rng, &mut order);
        for &i in &order {
            let (patch, class) = &samples[i];
            let (loss, grads) = net.loss_and_gradients(patch, *class)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            net.apply_gradients(&grads, lr);
        }
        let train_mse = full_set_mse(&net, samples)?;
        if !train_mse.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        epochs.push(EpochStats {
            train_mse,
            learning_rate: lr,
        });
        lr = adapt_with(lr, prev_mse, train_mse, cfg.lr_up, cfg.lr_down);
        prev_mse = train_mse;
    }

    let history = TrainHistory {
        initial_mse,
        final_epoch: epochs.len(),
        final_learning_rate: lr,
        epochs,
    };
    Ok((net, history))
}
