//! Distributional soft actor-critic.
//!
//! A squashed-Gaussian actor is trained against twin quantile critics
//! with Polyak-averaged target copies. Critics regress their quantile
//! outputs toward distributional Bellman targets under the quantile
//! Huber loss; the actor maximizes the entropy-regularized minimum of
//! the critic means; the temperature follows the usual dual update
//! toward a target entropy.

mod actor;
mod critic;
mod replay;

pub use actor::{Actor, PolicySample, LOG_STD_MAX, LOG_STD_MIN};
pub use critic::{
    compute_targets, critic_input, critic_mean, mean, midpoint_fractions, quantile_huber,
    quantile_loss_and_grad, QuantileCritic,
};
pub use replay::{ReplayBuffer, Transition, TransitionRef};

use crate::nn::{
    load_checkpoint, mlp_specs, save_checkpoint, AdamHyper, AdamState, CheckpointError, NetGrads,
    NetworkParams, ScalarAdam,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::path::Path;

/// Fixed number of reduction chunks per batch. Chunk results are summed
/// in chunk order, so training is bit-reproducible regardless of how
/// many threads execute the chunks.
const GRAD_CHUNKS: usize = 8;

#[derive(Debug, Clone)]
pub struct DsacConfig {
    pub obs_width: usize,
    pub action_low: Vec<f64>,
    pub action_high: Vec<f64>,
    /// Hidden widths shared by actor and critics.
    pub hidden: Vec<usize>,
    pub n_quantiles: usize,
    pub gamma: f64,
    /// Polyak rate for target-network tracking.
    pub polyak: f64,
    /// Huber threshold in the quantile loss.
    pub kappa: f64,
    pub lr: f64,
    pub batch_size: usize,
    /// Subtract the scaled next-state log-probability inside the Bellman
    /// target (soft backup). Disable to use the bare distributional target.
    pub entropy_in_target: bool,
    pub init_alpha: f64,
    /// Defaults to `-action_dim` when unset.
    pub target_entropy: Option<f64>,
    pub seed: u64,
}

impl DsacConfig {
    pub fn new(obs_width: usize, action_low: Vec<f64>, action_high: Vec<f64>) -> Self {
        Self {
            obs_width,
            action_low,
            action_high,
            hidden: vec![48, 48],
            n_quantiles: 64,
            gamma: 0.99,
            polyak: 0.005,
            kappa: 1.0,
            lr: 1e-3,
            batch_size: 256,
            entropy_in_target: true,
            init_alpha: 1.0,
            target_entropy: None,
            seed: 0,
        }
    }

    pub fn action_dim(&self) -> usize {
        self.action_low.len()
    }
}

/// Per-update training diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct Diagnostics {
    pub critic_loss: f64,
    pub actor_loss: f64,
    pub alpha: f64,
    pub mean_q: f64,
}

pub struct DsacAgent {
    pub cfg: DsacConfig,
    pub actor: Actor,
    pub critic1: QuantileCritic,
    pub critic2: QuantileCritic,
    pub target1: QuantileCritic,
    pub target2: QuantileCritic,
    pub log_alpha: f64,
    pub target_entropy: f64,
    adam_actor: AdamState,
    adam_critic1: AdamState,
    adam_critic2: AdamState,
    adam_alpha: ScalarAdam,
}

impl DsacAgent {
    pub fn new(cfg: DsacConfig) -> Self {
        assert!(cfg.n_quantiles >= 1);
        assert!(cfg.batch_size >= 1);
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        let k = cfg.action_dim();
        let hyper = AdamHyper {
            lr: cfg.lr,
            ..Default::default()
        };
        let actor_net =
            NetworkParams::init(&mlp_specs(cfg.obs_width, &cfg.hidden, 2 * k), &mut rng);
        let critic_specs = mlp_specs(cfg.obs_width + k, &cfg.hidden, cfg.n_quantiles);
        let c1 = NetworkParams::init(&critic_specs, &mut rng);
        let c2 = NetworkParams::init(&critic_specs, &mut rng);
        let actor = Actor::new(actor_net, cfg.action_low.clone(), cfg.action_high.clone());
        let critic1 = QuantileCritic::new(c1);
        let critic2 = QuantileCritic::new(c2);
        let target1 = critic1.clone();
        let target2 = critic2.clone();
        let adam_actor = AdamState::new(&actor.net, hyper);
        let adam_critic1 = AdamState::new(&critic1.net, hyper);
        let adam_critic2 = AdamState::new(&critic2.net, hyper);
        Self {
            target_entropy: cfg.target_entropy.unwrap_or(-(k as f64)),
            log_alpha: cfg.init_alpha.ln(),
            actor,
            critic1,
            critic2,
            target1,
            target2,
            adam_actor,
            adam_critic1,
            adam_critic2,
            adam_alpha: ScalarAdam::new(hyper),
            cfg,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    /// One dual-ascent Adam step on `log_alpha` against
    /// `J(alpha) = E[-alpha * (log_pi + target_entropy)]`.
    pub fn temperature_update(&mut self, batch_log_probs_mean: f64) {
        let grad = -self.alpha() * (batch_log_probs_mean + self.target_entropy);
        assert!(
            grad.is_finite(),
            "non-finite temperature gradient in train_step"
        );
        self.adam_alpha.update(&mut self.log_alpha, grad);
    }

    /// One full update: both critics, then the actor, then the
    /// temperature, then the target networks, in that order.
    pub fn train_step<R: Rng>(&mut self, buffer: &ReplayBuffer, rng: &mut R) -> Diagnostics {
        let b = self.cfg.batch_size;
        let k = self.cfg.action_dim();
        let n = self.cfg.n_quantiles;
        let idx = buffer.sample_indices(b, rng);
        // All noise is drawn sequentially up front so the parallel chunk
        // execution cannot perturb the random stream.
        let next_eps: Vec<f64> = (0..b * k).map(|_| StandardNormal.sample(rng)).collect();
        let cur_eps: Vec<f64> = (0..b * k).map(|_| StandardNormal.sample(rng)).collect();
        let alpha = self.alpha();
        let chunk = b.div_ceil(GRAD_CHUNKS);
        let ranges: Vec<(usize, usize)> = (0..GRAD_CHUNKS)
            .map(|c| (c * chunk, ((c + 1) * chunk).min(b)))
            .filter(|(lo, hi)| lo < hi)
            .collect();

        // Critic update.
        let (critic_loss, mean_target);
        {
            let actor = &self.actor;
            let critic1 = &self.critic1;
            let critic2 = &self.critic2;
            let target1 = &self.target1;
            let target2 = &self.target2;
            let cfg = &self.cfg;
            let idx = &idx;
            let next_eps = &next_eps;
            let parts: Vec<(NetGrads, NetGrads, f64, f64)> = ranges
                .par_iter()
                .map(|&(lo, hi)| {
                    let mut g1 = NetGrads::zeros_like(&critic1.net);
                    let mut g2 = NetGrads::zeros_like(&critic2.net);
                    let mut loss_sum = 0.0;
                    let mut target_sum = 0.0;
                    for s in lo..hi {
                        let t = buffer.get(idx[s]);
                        let next = actor.sample_with_eps(t.next_obs, &next_eps[s * k..(s + 1) * k]);
                        let y = compute_targets(
                            target1,
                            target2,
                            t.next_obs,
                            &next.squashed,
                            next.log_prob,
                            t.reward,
                            t.done,
                            cfg.gamma,
                            alpha,
                            cfg.entropy_in_target,
                        );
                        target_sum += mean(&y);
                        let x = critic_input(t.obs, &actor.normalize(t.action));
                        for (critic, g) in [(critic1, &mut g1), (critic2, &mut g2)] {
                            let (z, cache) = critic.net.forward_cached(&x);
                            let (loss, dz) =
                                quantile_loss_and_grad(&z, &y, &critic.fractions, cfg.kappa);
                            critic.net.backward_accumulate(&cache, &dz, g);
                            loss_sum += loss;
                        }
                    }
                    (g1, g2, loss_sum, target_sum)
                })
                .collect();
            let mut g1 = NetGrads::zeros_like(&critic1.net);
            let mut g2 = NetGrads::zeros_like(&critic2.net);
            let mut loss_sum = 0.0;
            let mut target_sum = 0.0;
            for (p1, p2, l, ts) in &parts {
                g1.add_assign(p1);
                g2.add_assign(p2);
                loss_sum += l;
                target_sum += ts;
            }
            g1.scale(1.0 / b as f64);
            g2.scale(1.0 / b as f64);
            critic_loss = loss_sum / (2 * b) as f64;
            mean_target = target_sum / b as f64;
            assert!(
                critic_loss.is_finite(),
                "non-finite critic loss in train_step"
            );
            self.adam_critic1.update(&mut self.critic1.net, &g1);
            self.adam_critic2.update(&mut self.critic2.net, &g2);
        }

        // Actor update, using the freshly updated critics.
        let (actor_loss, mean_log_prob, mean_q);
        {
            let actor = &self.actor;
            let critic1 = &self.critic1;
            let critic2 = &self.critic2;
            let obs_w = self.cfg.obs_width;
            let idx = &idx;
            let cur_eps = &cur_eps;
            let parts: Vec<(NetGrads, f64, f64, f64)> = ranges
                .par_iter()
                .map(|&(lo, hi)| {
                    let mut g = NetGrads::zeros_like(&actor.net);
                    let mut loss_sum = 0.0;
                    let mut logp_sum = 0.0;
                    let mut q_sum = 0.0;
                    let out_grad = vec![1.0 / n as f64; n];
                    for s in lo..hi {
                        let t = buffer.get(idx[s]);
                        let smp = actor.sample_with_eps(t.obs, &cur_eps[s * k..(s + 1) * k]);
                        let x = critic_input(t.obs, &smp.squashed);
                        let (z1, cache1) = critic1.net.forward_cached(&x);
                        let (z2, cache2) = critic2.net.forward_cached(&x);
                        let (q1, q2) = (mean(&z1), mean(&z2));
                        let (q_min, critic, cache) = if q1 <= q2 {
                            (q1, critic1, &cache1)
                        } else {
                            (q2, critic2, &cache2)
                        };
                        let dx = critic.net.input_gradient(cache, &out_grad);
                        let dl_dt: Vec<f64> = dx[obs_w..].iter().map(|&d| -d).collect();
                        let og = actor.output_gradient(&smp, &dl_dt, alpha);
                        actor.net.backward_accumulate(&smp.cache, &og, &mut g);
                        loss_sum += alpha * smp.log_prob - q_min;
                        logp_sum += smp.log_prob;
                        q_sum += q_min;
                    }
                    (g, loss_sum, logp_sum, q_sum)
                })
                .collect();
            let mut g = NetGrads::zeros_like(&actor.net);
            let (mut loss_sum, mut logp_sum, mut q_sum) = (0.0, 0.0, 0.0);
            for (pg, l, lp, q) in &parts {
                g.add_assign(pg);
                loss_sum += l;
                logp_sum += lp;
                q_sum += q;
            }
            g.scale(1.0 / b as f64);
            actor_loss = loss_sum / b as f64;
            mean_log_prob = logp_sum / b as f64;
            mean_q = q_sum / b as f64;
            assert!(
                actor_loss.is_finite(),
                "non-finite actor loss in train_step"
            );
            self.adam_actor.update(&mut self.actor.net, &g);
        }

        self.temperature_update(mean_log_prob);
        self.target1
            .net
            .soft_update_from(&self.critic1.net, self.cfg.polyak);
        self.target2
            .net
            .soft_update_from(&self.critic2.net, self.cfg.polyak);

        let _ = mean_target;
        Diagnostics {
            critic_loss,
            actor_loss,
            alpha: self.alpha(),
            mean_q,
        }
    }

    /// Write the full agent (actor, critics, targets, temperature) to a
    /// checkpoint. `extra_meta` entries are appended to the metadata
    /// block and returned verbatim by `load`.
    pub fn save(&self, path: &Path, extra_meta: &[(String, String)]) -> Result<(), CheckpointError> {
        let fmt = |x: f64| format!("{x}");
        let join = |xs: &[f64]| {
            xs.iter()
                .map(|x| fmt(*x))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut meta: Vec<(String, String)> = vec![
            ("format".into(), "hpdm-dsac-agent".into()),
            ("obs_width".into(), self.cfg.obs_width.to_string()),
            ("action_dim".into(), self.cfg.action_dim().to_string()),
            ("action_low".into(), join(&self.cfg.action_low)),
            ("action_high".into(), join(&self.cfg.action_high)),
            (
                "hidden".into(),
                self.cfg
                    .hidden
                    .iter()
                    .map(|h| h.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("n_quantiles".into(), self.cfg.n_quantiles.to_string()),
            ("gamma".into(), fmt(self.cfg.gamma)),
            ("polyak".into(), fmt(self.cfg.polyak)),
            ("kappa".into(), fmt(self.cfg.kappa)),
            ("lr".into(), fmt(self.cfg.lr)),
            ("batch_size".into(), self.cfg.batch_size.to_string()),
            (
                "entropy_in_target".into(),
                self.cfg.entropy_in_target.to_string(),
            ),
            ("init_alpha".into(), fmt(self.cfg.init_alpha)),
            ("target_entropy".into(), fmt(self.target_entropy)),
            ("seed".into(), self.cfg.seed.to_string()),
            ("log_alpha".into(), fmt(self.log_alpha)),
            (
                "nets".into(),
                "actor,critic1,critic2,target_critic1,target_critic2".into(),
            ),
        ];
        meta.extend(extra_meta.iter().cloned());
        let mut params = Vec::new();
        for net in [
            &self.actor.net,
            &self.critic1.net,
            &self.critic2.net,
            &self.target1.net,
            &self.target2.net,
        ] {
            params.extend(net.to_f32());
        }
        let count = params.len().to_string();
        meta.push(("param_count".into(), count));
        save_checkpoint(path, &meta, &params)
    }

    /// Rebuild an agent from a checkpoint. Returns the agent together
    /// with the full metadata block.
    pub fn load(path: &Path) -> Result<(Self, Vec<(String, String)>), CheckpointError> {
        let (meta, params) = load_checkpoint(path)?;
        let get = |key: &str| -> Result<&str, CheckpointError> {
            meta.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| CheckpointError::Malformed(format!("missing metadata key `{key}`")))
        };
        let parse_f64 = |key: &str| -> Result<f64, CheckpointError> {
            get(key)?
                .parse()
                .map_err(|_| CheckpointError::Malformed(format!("bad float for `{key}`")))
        };
        let parse_usize = |key: &str| -> Result<usize, CheckpointError> {
            get(key)?
                .parse()
                .map_err(|_| CheckpointError::Malformed(format!("bad integer for `{key}`")))
        };
        let parse_list = |key: &str| -> Result<Vec<f64>, CheckpointError> {
            get(key)?
                .split(',')
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CheckpointError::Malformed(format!("bad list for `{key}`")))
        };
        if get("format")? != "hpdm-dsac-agent" {
            return Err(CheckpointError::Incompatible(
                "checkpoint does not hold a dsac agent".into(),
            ));
        }
        let mut cfg = DsacConfig::new(
            parse_usize("obs_width")?,
            parse_list("action_low")?,
            parse_list("action_high")?,
        );
        cfg.hidden = get("hidden")?
            .split(',')
            .map(|s| s.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| CheckpointError::Malformed("bad hidden widths".into()))?;
        cfg.n_quantiles = parse_usize("n_quantiles")?;
        cfg.gamma = parse_f64("gamma")?;
        cfg.polyak = parse_f64("polyak")?;
        cfg.kappa = parse_f64("kappa")?;
        cfg.lr = parse_f64("lr")?;
        cfg.batch_size = parse_usize("batch_size")?;
        cfg.entropy_in_target = get("entropy_in_target")? == "true";
        cfg.init_alpha = parse_f64("init_alpha")?;
        cfg.target_entropy = Some(parse_f64("target_entropy")?);
        cfg.seed = parse_usize("seed")? as u64;

        let declared = parse_usize("param_count")?;
        if declared != params.len() {
            return Err(CheckpointError::Malformed(format!(
                "metadata declares {declared} parameters, payload holds {}",
                params.len()
            )));
        }

        let mut agent = DsacAgent::new(cfg);
        agent.log_alpha = parse_f64("log_alpha")?;
        let mut rest: &[f32] = &params;
        for net in [
            &mut agent.actor.net,
            &mut agent.critic1.net,
            &mut agent.critic2.net,
            &mut agent.target1.net,
            &mut agent.target2.net,
        ] {
            let specs = net.layer_specs();
            let (loaded, r) = NetworkParams::from_f32(&specs, rest);
            *net = loaded;
            rest = r;
        }
        if !rest.is_empty() {
            return Err(CheckpointError::Malformed(format!(
                "{} unread parameters after rebuilding networks",
                rest.len()
            )));
        }
        Ok((agent, meta))
    }
}

/// Mean actor objective and its parameter gradients over a batch:
/// `E[alpha * log_pi(a|s) - min_i Q_i(s, a)]` with reparameterized
/// actions `a = squash(mean + std * eps)`.
pub fn actor_loss_and_grads(
    actor: &Actor,
    critics: (&QuantileCritic, &QuantileCritic),
    obs_batch: &[Vec<f64>],
    eps_batch: &[Vec<f64>],
    alpha: f64,
) -> (f64, NetGrads) {
    assert_eq!(obs_batch.len(), eps_batch.len());
    let n = critics.0.n_quantiles();
    let obs_w = actor.net.input_width();
    let out_grad = vec![1.0 / n as f64; n];
    let mut g = NetGrads::zeros_like(&actor.net);
    let mut loss_sum = 0.0;
    for (obs, eps) in obs_batch.iter().zip(eps_batch) {
        let smp = actor.sample_with_eps(obs, eps);
        let x = critic_input(obs, &smp.squashed);
        let (z1, cache1) = critics.0.net.forward_cached(&x);
        let (z2, cache2) = critics.1.net.forward_cached(&x);
        let (q1, q2) = (mean(&z1), mean(&z2));
        let (q_min, critic, cache) = if q1 <= q2 {
            (q1, critics.0, &cache1)
        } else {
            (q2, critics.1, &cache2)
        };
        let dx = critic.net.input_gradient(cache, &out_grad);
        let dl_dt: Vec<f64> = dx[obs_w..].iter().map(|&d| -d).collect();
        let og = actor.output_gradient(&smp, &dl_dt, alpha);
        actor.net.backward_accumulate(&smp.cache, &og, &mut g);
        loss_sum += alpha * smp.log_prob - q_min;
    }
    let inv = 1.0 / obs_batch.len() as f64;
    g.scale(inv);
    (loss_sum * inv, g)
}

/// Mean quantile Huber loss and parameter gradients of one critic over a
/// batch of `(observation, squashed action, target quantiles)` triples.
pub fn critic_loss_and_grads(
    critic: &QuantileCritic,
    obs_batch: &[Vec<f64>],
    squashed_batch: &[Vec<f64>],
    target_batch: &[Vec<f64>],
    kappa: f64,
) -> (f64, NetGrads) {
    assert_eq!(obs_batch.len(), squashed_batch.len());
    assert_eq!(obs_batch.len(), target_batch.len());
    let mut g = NetGrads::zeros_like(&critic.net);
    let mut loss_sum = 0.0;
    for ((obs, act), y) in obs_batch.iter().zip(squashed_batch).zip(target_batch) {
        let x = critic_input(obs, act);
        let (z, cache) = critic.net.forward_cached(&x);
        let (loss, dz) = quantile_loss_and_grad(&z, y, &critic.fractions, kappa);
        critic.net.backward_accumulate(&cache, &dz, &mut g);
        loss_sum += loss;
    }
    let inv = 1.0 / obs_batch.len() as f64;
    g.scale(inv);
    (loss_sum * inv, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bandit_config(batch: usize) -> DsacConfig {
        let mut cfg = DsacConfig::new(1, vec![-1.0], vec![1.0]);
        cfg.hidden = vec![32, 32];
        cfg.batch_size = batch;
        cfg.seed = 7;
        cfg
    }

    /// Deterministic two-context bandit: reward 1 when the action sign
    /// matches the context, else 0. Terminal every step, so the optimal
    /// value of the correct action is exactly 1.
    fn run_bandit(steps: usize) -> DsacAgent {
        let cfg = bandit_config(64);
        let mut agent = DsacAgent::new(cfg);
        let mut buffer = ReplayBuffer::new(50_000, 1, 1);
        let mut rng = ChaCha12Rng::seed_from_u64(123);
        for step in 0..steps {
            let ctx = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let obs = vec![ctx];
            let smp = agent.actor.sample(&obs, &mut rng);
            let reward = if smp.action[0] * ctx > 0.0 { 1.0 } else { 0.0 };
            buffer.push(&Transition {
                obs: obs.clone(),
                action: smp.action.clone(),
                reward,
                next_obs: obs,
                done: true,
            });
            if buffer.len() >= agent.cfg.batch_size && step >= 256 {
                agent.train_step(&buffer, &mut rng);
            }
        }
        agent
    }

    #[test]
    fn bandit_mean_q_approaches_optimum() {
        let agent = run_bandit(2000);
        let mut qs = Vec::new();
        for ctx in [1.0, -1.0] {
            let obs = vec![ctx];
            let a = agent.actor.mean_action(&obs);
            assert!(a[0] * ctx > 0.0, "policy picks the wrong sign for {ctx}");
            let t = agent.actor.normalize(&a);
            let q = critic_mean(&agent.critic1, &obs, &t)
                .min(critic_mean(&agent.critic2, &obs, &t));
            qs.push(q);
        }
        let mean_q = (qs[0] + qs[1]) / 2.0;
        assert!(
            (mean_q - 1.0).abs() < 0.1,
            "mean Q {mean_q} not within 0.1 of 1"
        );
    }

    #[test]
    fn constant_reward_quantiles_collapse_to_return() {
        // Single state, reward 0.7 regardless of the action, terminal.
        let mut cfg = bandit_config(64);
        cfg.seed = 3;
        let mut agent = DsacAgent::new(cfg);
        let mut buffer = ReplayBuffer::new(10_000, 1, 1);
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for step in 0..1500 {
            let obs = vec![1.0];
            let smp = agent.actor.sample(&obs, &mut rng);
            buffer.push(&Transition {
                obs: obs.clone(),
                action: smp.action,
                reward: 0.7,
                next_obs: obs,
                done: true,
            });
            if buffer.len() >= agent.cfg.batch_size && step >= 256 {
                agent.train_step(&buffer, &mut rng);
            }
        }
        let a = agent.actor.mean_action(&[1.0]);
        let z = agent.critic1.quantiles(&[1.0], &agent.actor.normalize(&a));
        for (i, q) in z.iter().enumerate() {
            assert!(
                (q - 0.7).abs() < 0.05,
                "quantile {i} = {q} not within 0.05 of 0.7"
            );
        }
    }

    #[test]
    fn identical_seeds_produce_identical_diagnostics() {
        let make = || {
            let cfg = bandit_config(32);
            let mut agent = DsacAgent::new(cfg);
            let mut buffer = ReplayBuffer::new(1000, 1, 1);
            let mut rng = ChaCha12Rng::seed_from_u64(11);
            for _ in 0..64 {
                let ctx = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let smp = agent.actor.sample(&[ctx], &mut rng);
                buffer.push(&Transition {
                    obs: vec![ctx],
                    action: smp.action.clone(),
                    reward: if smp.action[0] * ctx > 0.0 { 1.0 } else { 0.0 },
                    next_obs: vec![ctx],
                    done: true,
                });
            }
            let mut out = Vec::new();
            for _ in 0..5 {
                let d = agent.train_step(&buffer, &mut rng);
                out.push((
                    d.critic_loss.to_bits(),
                    d.actor_loss.to_bits(),
                    d.alpha.to_bits(),
                    d.mean_q.to_bits(),
                ));
            }
            out
        };
        assert_eq!(make(), make());
    }

    #[test]
    fn flat_critic_and_zero_alpha_give_zero_actor_gradient() {
        let mut cfg = bandit_config(8);
        cfg.hidden = vec![16, 16];
        let mut agent = DsacAgent::new(cfg);
        agent.critic1.net.zero_output_layer();
        agent.critic2.net.zero_output_layer();
        let obs: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 / 8.0]).collect();
        let eps: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 * 0.1 - 0.4]).collect();
        let (_, grads) =
            actor_loss_and_grads(&agent.actor, (&agent.critic1, &agent.critic2), &obs, &eps, 0.0);
        let norm: f64 = grads.to_flat().iter().map(|g| g * g).sum::<f64>().sqrt();
        assert!(norm < 1e-6, "gradient norm {norm}");
    }

    #[test]
    fn actor_loss_increases_with_alpha_for_positive_log_prob() {
        let mut cfg = bandit_config(4);
        cfg.hidden = vec![16, 16];
        let agent = DsacAgent::new(cfg);
        // Tight distribution => density above 1 => positive log-probs.
        let mut actor = agent.actor.clone();
        actor.net.zero_output_layer();
        let k = 1;
        let mut bias = vec![0.0; 2 * k];
        bias[k] = -3.0; // log-std
        actor.net.set_output_bias(&bias);
        let obs: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64 * 0.2]).collect();
        let eps: Vec<Vec<f64>> = (0..4).map(|_| vec![0.3]).collect();
        let (l1, _) = actor_loss_and_grads(&actor, (&agent.critic1, &agent.critic2), &obs, &eps, 0.5);
        let (l2, _) = actor_loss_and_grads(&actor, (&agent.critic1, &agent.critic2), &obs, &eps, 1.5);
        assert!(l2 > l1, "loss must grow with alpha: {l1} vs {l2}");
    }

    #[test]
    fn temperature_equilibrium_and_direction() {
        let cfg = bandit_config(4);
        let mut agent = DsacAgent::new(cfg);
        let a0 = agent.alpha();
        // Exactly at equilibrium: mean log-prob = -target_entropy.
        agent.temperature_update(-agent.target_entropy);
        assert_eq!(agent.alpha(), a0);
        // Entropy below target (log-probs above -target): alpha grows.
        agent.temperature_update(-agent.target_entropy + 1.0);
        assert!(agent.alpha() > a0);
        // Alpha stays positive through extreme updates.
        for _ in 0..200 {
            agent.temperature_update(-50.0);
        }
        assert!(agent.alpha() > 0.0);
    }

    #[test]
    fn checkpoint_roundtrip_restores_everything() {
        let agent = run_bandit(300);
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("agent.ckpt");
        let p2 = dir.path().join("again.ckpt");
        let extra = vec![("domain".to_string(), "air".to_string())];
        agent.save(&p1, &extra).unwrap();
        let (loaded, meta) = DsacAgent::load(&p1).unwrap();
        assert!(meta.iter().any(|(k, v)| k == "domain" && v == "air"));
        loaded.save(&p2, &extra).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        // Same policy behavior after the roundtrip.
        let obs = vec![0.3];
        assert_eq!(
            agent.actor.net.forward(&obs),
            loaded.actor.net.forward(&obs)
        );
    }

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
}
