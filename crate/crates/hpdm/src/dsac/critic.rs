//! Twin quantile critics and the quantile-regression Huber loss.

use crate::nn::NetworkParams;

/// Return-distribution critic: maps `[observation ++ squashed action]`
/// to `n` quantile values at fixed, strictly increasing fractions.
#[derive(Debug, Clone)]
pub struct QuantileCritic {
    pub net: NetworkParams,
    /// Midpoint fractions `(2i - 1) / (2n)`, i = 1..=n.
    pub fractions: Vec<f64>,
}

/// Midpoint quantile fractions, strictly increasing in (0, 1).
pub fn midpoint_fractions(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    (1..=n).map(|i| (2 * i - 1) as f64 / (2 * n) as f64).collect()
}

impl QuantileCritic {
    pub fn new(net: NetworkParams) -> Self {
        let fractions = midpoint_fractions(net.output_width());
        Self { net, fractions }
    }

    pub fn n_quantiles(&self) -> usize {
        self.fractions.len()
    }

    pub fn quantiles(&self, obs: &[f64], squashed_action: &[f64]) -> Vec<f64> {
        self.net.forward(&critic_input(obs, squashed_action))
    }
}

pub fn critic_input(obs: &[f64], squashed_action: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(obs.len() + squashed_action.len());
    x.extend_from_slice(obs);
    x.extend_from_slice(squashed_action);
    x
}

/// Scalar value estimate: the mean of the predicted quantiles.
pub fn critic_mean(critic: &QuantileCritic, obs: &[f64], squashed_action: &[f64]) -> f64 {
    mean(&critic.quantiles(obs, squashed_action))
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Quantile-regression Huber penalty `|tau - I{u < 0}| * L_kappa(u)`.
pub fn quantile_huber(u: f64, tau: f64, kappa: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&tau) && tau > 0.0 && kappa > 0.0);
    let weight = if u < 0.0 { 1.0 - tau } else { tau };
    let huber = if u.abs() <= kappa {
        0.5 * u * u
    } else {
        kappa * (u.abs() - 0.5 * kappa)
    };
    weight * huber
}

/// Per-sample quantile Huber loss `(1/n) * sum_i sum_j rho(y_j - z_i)`
/// and its gradient with respect to the predicted quantiles `z`.
pub fn quantile_loss_and_grad(
    pred: &[f64],
    targets: &[f64],
    fractions: &[f64],
    kappa: f64,
) -> (f64, Vec<f64>) {
    assert_eq!(pred.len(), fractions.len(), "one fraction per quantile");
    let inv_n = 1.0 / pred.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; pred.len()];
    for (i, (&z, &tau)) in pred.iter().zip(fractions).enumerate() {
        let mut l_acc = 0.0;
        let mut g_acc = 0.0;
        for &y in targets {
            let u = y - z;
            let weight = if u < 0.0 { 1.0 - tau } else { tau };
            let (huber, dhuber) = if u.abs() <= kappa {
                (0.5 * u * u, u)
            } else {
                (kappa * (u.abs() - 0.5 * kappa), kappa * u.signum())
            };
            l_acc += weight * huber;
            // d/dz = -d/du
            g_acc -= weight * dhuber;
        }
        loss += l_acc;
        grad[i] = g_acc * inv_n;
    }
    (loss * inv_n, grad)
}

/// Distributional Bellman targets for one transition:
/// `y_j = r + (1 - done) * gamma * (z'_j - alpha * log_pi' * [entropy_in_target])`
/// with `z'` taken from whichever target critic predicts the smaller mean.
#[allow(clippy::too_many_arguments)]
pub fn compute_targets(
    target1: &QuantileCritic,
    target2: &QuantileCritic,
    next_obs: &[f64],
    next_squashed: &[f64],
    next_log_prob: f64,
    reward: f64,
    done: bool,
    gamma: f64,
    alpha: f64,
    entropy_in_target: bool,
) -> Vec<f64> {
    let n = target1.n_quantiles();
    if done {
        return vec![reward; n];
    }
    let x = critic_input(next_obs, next_squashed);
    let z1 = target1.net.forward(&x);
    let z2 = target2.net.forward(&x);
    let z = if mean(&z1) <= mean(&z2) { z1 } else { z2 };
    let entropy = if entropy_in_target {
        alpha * next_log_prob
    } else {
        0.0
    };
    z.iter().map(|&zj| reward + gamma * (zj - entropy)).collect()
}
