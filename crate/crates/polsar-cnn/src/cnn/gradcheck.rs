//! Central finite-difference verification of the analytic gradients.
//!
//! The error metric is normalized by the gradient's own scale,
//! `max(‖g‖∞, ‖g_fd‖∞, 1e-12)`, not per element: with step `h = 1e-6` the
//! difference quotient carries absolute noise around `1e-10`, so a
//! per-element relative test would spuriously fail on parameters whose true
//! gradient happens to be tiny even when every meaningful entry agrees.

use rand_core::SeedableRng;
use rayon::prelude::*;

use crate::cnn::{init_weights, mse_loss, CompactCnn, NetworkConfig, Patch};
use crate::error::Result;
use crate::rng::{self, ChaCha8Rng};

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-6;

/// Outcome of one gradient comparison.
#[derive(Clone, Copy, Debug)]
pub struct GradCheckReport {
    /// `max_abs_diff / grad_scale` — the headline number.
    pub rel_error: f64,
    /// Largest absolute disagreement over all parameters.
    pub max_abs_diff: f64,
    /// Normalizer: the larger gradient's infinity norm (floored at 1e-12).
    pub grad_scale: f64,
    pub params: usize,
}

/// Compares the analytic gradient of one sample's loss against central
/// finite differences over every parameter. FD evaluations run in parallel;
/// each parameter's quotient is independent, so the result does not depend
/// on thread count.
pub fn check_gradients(
    net: &CompactCnn,
    patch: &Patch,
    target_class: usize,
    h: f64,
) -> Result<GradCheckReport> {
    let (_, grads) = net.loss_and_gradients(patch, target_class)?;
    let analytic = grads.flatten();
    let base = net.flatten();

    let loss_at = |n: &CompactCnn| -> f64 {
        let (scores, _) = n.forward(patch).expect("shape already validated");
        mse_loss(&scores, target_class).expect("class already validated")
    };

    let fd: Vec<f64> = (0..base.len())
        .into_par_iter()
        .map_init(
            || (net.clone(), base.clone()),
            |(n, theta), j| {
                let old = theta[j];
                theta[j] = old + h;
                n.assign_flat(theta).expect("length preserved");
                let plus = loss_at(n);
                theta[j] = old - h;
                n.assign_flat(theta).expect("length preserved");
                let minus = loss_at(n);
                theta[j] = old;
                (plus - minus) / (2.0 * h)
            },
        )
        .collect();

    let inf_norm = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let max_abs_diff = analytic
        .iter()
        .zip(&fd)
        .fold(0.0f64, |m, (a, f)| m.max((a - f).abs()));
    let grad_scale = inf_norm(&analytic).max(inf_norm(&fd)).max(1e-12);

    Ok(GradCheckReport {
        rel_error: max_abs_diff / grad_scale,
        max_abs_diff,
        grad_scale,
        params: base.len(),
    })
}

/// Checks `points` random (parameters, patch, target) instances of one
/// architecture, deriving per-point seeds from the config seed. Returns one
/// report per point.
pub fn check_config(config: &NetworkConfig, points: usize, h: f64) -> Result<Vec<GradCheckReport>> {
    config.validate()?;
    let mut reports = Vec::with_capacity(points);
    for p in 0..points {
        let mut cfg = config.clone();
        cfg.seed = config
            .seed
            .wrapping_add((p as u64 + 1).wrapping_mul(0x9E3779B97F4A7C15));
        let net = init_weights(&cfg)?;

        let mut data_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5DEECE66D);
        let n = cfg.window;
        let patch: Patch = (0..cfg.input_channels)
            .map(|_| {
                ndarray::Array2::from_shape_fn((n, n), |_| {
                    rng::uniform_in(&mut data_rng, -1.0, 1.0)
                })
            })
            .collect();
        let target = (rng::uniform(&mut data_rng) * cfg.num_classes as f64) as usize;

        reports.push(check_gradients(&net, &patch, target.min(cfg.num_classes - 1), h)?);
    }
    Ok(reports)
}

/// Largest relative error across a set of reports.
pub fn worst_rel_error(reports: &[GradCheckReport]) -> f64 {
    reports.iter().fold(0.0f64, |m, r| m.max(r.rel_error))
}
