//! Squashed-Gaussian policy head.
//!
//! The actor network maps an observation to per-dimension means and raw
//! log standard deviations. Actions are `tanh`-squashed and affinely
//! rescaled into the command bounds; log-probabilities carry the full
//! change-of-variables correction. Sampling is reparameterized so
//! gradients can flow from a critic back through the action.

use crate::nn::{ForwardCache, NetworkParams};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;

const LN_2PI: f64 = 1.8378770664093453;
const LN_2: f64 = std::f64::consts::LN_2;

/// Stable `ln(1 - tanh(u)^2)`.
fn ln_one_minus_tanh_sq(u: f64) -> f64 {
    // ln(sech^2 u) = 2 (ln 2 - u - softplus(-2u))
    2.0 * (LN_2 - u - softplus(-2.0 * u))
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else if x < -30.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

#[derive(Debug, Clone)]
pub struct Actor {
    /// Maps observation to `[means..., raw log-stds...]`.
    pub net: NetworkParams,
    pub action_low: Vec<f64>,
    pub action_high: Vec<f64>,
}

/// One reparameterized draw with everything needed to push gradients
/// back through it.
#[derive(Debug, Clone)]
pub struct PolicySample {
    /// Action in environment units.
    pub action: Vec<f64>,
    /// `tanh(u)` in [-1, 1]; the convention for critic inputs.
    pub squashed: Vec<f64>,
    pub log_prob: f64,
    pub mean: Vec<f64>,
    /// Clamped log-std.
    pub log_std: Vec<f64>,
    /// Whether the raw log-std hit a clamp bound (gradient is zero there).
    pub std_clamped: Vec<bool>,
    /// The standard-normal draws.
    pub eps: Vec<f64>,
    /// Pre-squash Gaussian sample `mean + std * eps`.
    pub u: Vec<f64>,
    pub cache: ForwardCache,
}

impl Actor {
    pub fn new(net: NetworkParams, action_low: Vec<f64>, action_high: Vec<f64>) -> Self {
        assert_eq!(action_low.len(), action_high.len());
        assert_eq!(net.output_width(), 2 * action_low.len());
        for (lo, hi) in action_low.iter().zip(&action_high) {
            assert!(hi > lo, "action bounds must have positive extent");
        }
        Self {
            net,
            action_low,
            action_high,
        }
    }

    pub fn action_dim(&self) -> usize {
        self.action_low.len()
    }

    fn rescale(&self, k: usize, t: f64) -> f64 {
        self.action_low[k] + (t + 1.0) * 0.5 * (self.action_high[k] - self.action_low[k])
    }

    /// Map an environment-unit action back to the squashed [-1, 1] space.
    pub fn normalize(&self, action: &[f64]) -> Vec<f64> {
        action
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                (2.0 * (a - self.action_low[k]) / (self.action_high[k] - self.action_low[k]) - 1.0)
                    .clamp(-1.0, 1.0)
            })
            .collect()
    }

    /// Reparameterized sample with externally supplied normal draws.
    pub fn sample_with_eps(&self, obs: &[f64], eps: &[f64]) -> PolicySample {
        let k = self.action_dim();
        assert_eq!(eps.len(), k);
        let (head, cache) = self.net.forward_cached(obs);
        let mut sample = PolicySample {
            action: Vec::with_capacity(k),
            squashed: Vec::with_capacity(k),
            log_prob: 0.0,
            mean: head[..k].to_vec(),
            log_std: Vec::with_capacity(k),
            std_clamped: Vec::with_capacity(k),
            eps: eps.to_vec(),
            u: Vec::with_capacity(k),
            cache,
        };
        for i in 0..k {
            let raw = head[k + i];
            let ls = raw.clamp(LOG_STD_MIN, LOG_STD_MAX);
            sample.std_clamped.push(raw < LOG_STD_MIN || raw > LOG_STD_MAX);
            let std = ls.exp();
            let u = sample.mean[i] + std * eps[i];
            let t = u.tanh();
            sample.log_std.push(ls);
            sample.u.push(u);
            sample.squashed.push(t);
            sample.action.push(self.rescale(i, t));
            sample.log_prob += -0.5 * eps[i] * eps[i] - ls - 0.5 * LN_2PI
                - ln_one_minus_tanh_sq(u)
                - ((self.action_high[i] - self.action_low[i]) * 0.5).ln();
        }
        sample
    }

    /// Stochastic draw used for exploration.
    pub fn sample<R: Rng>(&self, obs: &[f64], rng: &mut R) -> PolicySample {
        let eps: Vec<f64> = (0..self.action_dim())
            .map(|_| StandardNormal.sample(rng))
            .collect();
        self.sample_with_eps(obs, &eps)
    }

    /// Deterministic action at the distribution mean (evaluation mode).
    pub fn mean_action(&self, obs: &[f64]) -> Vec<f64> {
        let head = self.net.forward(obs);
        (0..self.action_dim())
            .map(|i| self.rescale(i, head[i].tanh()))
            .collect()
    }

    /// Density of the squashed policy at an action, for cross-checking
    /// `log_prob` against histograms. `obs` fixes the distribution.
    pub fn density(&self, obs: &[f64], action: &[f64]) -> f64 {
        let k = self.action_dim();
        let head = self.net.forward(obs);
        let mut logp = 0.0;
        for i in 0..k {
            let ls = head[k + i].clamp(LOG_STD_MIN, LOG_STD_MAX);
            let std = ls.exp();
            let span = (self.action_high[i] - self.action_low[i]) * 0.5;
            let t = ((action[i] - self.action_low[i]) / span - 1.0).clamp(-1.0 + 1e-12, 1.0 - 1e-12);
            let u = t.atanh();
            let z = (u - head[i]) / std;
            logp += -0.5 * z * z - ls - 0.5 * LN_2PI - (1.0 - t * t).ln() - span.ln();
        }
        logp.exp()
    }

    /// Gradient of `alpha * log_prob + dot(dl_dt, squashed)` with respect
    /// to the actor's raw outputs `[means..., raw log-stds...]`.
    ///
    /// `dl_dt` is the gradient of the remaining loss terms with respect
    /// to the squashed action (e.g. `-dQ/dt` for the policy objective).
    pub fn output_gradient(&self, s: &PolicySample, dl_dt: &[f64], alpha: f64) -> Vec<f64> {
        let k = self.action_dim();
        assert_eq!(dl_dt.len(), k);
        let mut out = vec![0.0; 2 * k];
        for i in 0..k {
            let t = s.squashed[i];
            let sech2 = 1.0 - t * t;
            // d(log_prob)/du = 2 tanh(u); d(t)/du = 1 - tanh(u)^2.
            let dl_du = alpha * 2.0 * t + dl_dt[i] * sech2;
            out[i] = dl_du;
            out[k + i] = if s.std_clamped[i] {
                0.0
            } else {
                dl_du * s.log_std[i].exp() * s.eps[i] - alpha
            };
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{mlp_specs, NetworkParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn actor(obs_w: usize, lo: Vec<f64>, hi: Vec<f64>, seed: u64) -> Actor {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let net = NetworkParams::init(&mlp_specs(obs_w, &[16, 16], 2 * lo.len()), &mut rng);
        Actor::new(net, lo, hi)
    }

    #[test]
    fn zero_mean_lands_mid_range() {
        let mut a = actor(2, vec![0.0, -1.5], vec![1.0, 1.5], 3);
        a.net.zero_output_layer();
        let act = a.mean_action(&[0.3, -0.3]);
        assert!((act[0] - 0.5).abs() < 1e-12);
        assert!(act[1].abs() < 1e-12);
    }

    #[test]
    fn samples_stay_in_bounds() {
        let a = actor(3, vec![0.0, -1.5], vec![1.0, 1.5], 5);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..100_000 {
            let s = a.sample(&[0.1, 0.4, -0.9], &mut rng);
            assert!((0.0..=1.0).contains(&s.action[0]));
            assert!((-1.5..=1.5).contains(&s.action[1]));
        }
    }

    #[test]
    fn log_prob_matches_histogram_density() {
        // 1-D policy; compare empirical bin frequencies against the
        // analytic density at bin centers.
        let a = actor(1, vec![-2.0], vec![2.0], 9);
        let obs = [0.7];
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let n = 1_000_000;
        let bins = 40;
        let (lo, hi) = (-2.0, 2.0);
        let w = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for _ in 0..n {
            let s = a.sample(&obs, &mut rng);
            let b = (((s.action[0] - lo) / w) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let mut checked = 0;
        for b in 0..bins {
            let freq = counts[b] as f64 / n as f64;
            if freq < 0.02 {
                continue; // skip thin tails where MC noise dominates
            }
            let center = lo + (b as f64 + 0.5) * w;
            let analytic = a.density(&obs, &[center]) * w;
            let rel = (freq - analytic).abs() / analytic;
            assert!(
                rel < 0.02,
                "bin {b}: freq {freq:.5} vs density {analytic:.5} (rel {rel:.4})"
            );
            checked += 1;
        }
        assert!(checked >= 5, "need a meaningful number of populated bins");
    }

    #[test]
    fn log_prob_consistent_with_density() {
        let a = actor(2, vec![0.0, -1.5], vec![1.0, 1.5], 21);
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for _ in 0..200 {
            let obs = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let s = a.sample(&obs, &mut rng);
            let direct = a.density(&obs, &s.action);
            assert!(
                (s.log_prob.exp() - direct).abs() <= 1e-6 * direct.max(1e-12),
                "log_prob {} vs density {}",
                s.log_prob.exp(),
                direct
            );
        }
    }

    use rand::Rng;
}
