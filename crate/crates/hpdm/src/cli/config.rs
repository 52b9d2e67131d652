//! Flat `key=value` run configuration with dotted section names.
//!
//! Every field has a documented default; unknown keys are rejected so a
//! manifest can never silently drift. `#` starts a comment line, which
//! is how manifests carry non-config annotations (wall clock, counters).

use crate::dsac::DsacConfig;
use crate::parallel::TrainRunConfig;
use crate::sim::{
    observation_width, Domain, DomainParams, EnvId, EnvSetup, MonitoringParams, OuParams,
    RewardParams, SensorSpec, Vec2,
};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("malformed line `{0}` (expected key=value)")]
    MalformedLine(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSection {
    pub dt: f64,
    pub horizon: usize,
    pub r_sense: f64,
    pub collision_radius: f64,
    pub lambda_step: f64,
    pub sigma0_max: f64,
    pub n_targets: usize,
    pub est_noise_std: f64,
    pub sigma_scale: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt: 0.05,
            horizon: 5000,
            r_sense: 1.0,
            collision_radius: 0.3,
            lambda_step: 0.001,
            sigma0_max: 0.05,
            n_targets: 3,
            est_noise_std: 0.0,
            sigma_scale: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSection {
    pub tau_v: f64,
    pub tau_w: f64,
    pub v_max: f64,
    pub w_max: f64,
    pub ou_theta: f64,
    pub ou_sigma: f64,
    pub ou_mu_x: f64,
    pub ou_mu_y: f64,
    pub ou_enabled: bool,
}

impl DomainSection {
    fn from_params(p: &DomainParams) -> Self {
        Self {
            tau_v: p.tau_v,
            tau_w: p.tau_w,
            v_max: p.v_max,
            w_max: p.w_max,
            ou_theta: p.ou.theta,
            ou_sigma: p.ou.sigma,
            ou_mu_x: p.ou.mu.x,
            ou_mu_y: p.ou.mu.y,
            ou_enabled: p.ou.enabled,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSection {
    pub hidden: Vec<usize>,
    pub n_quantiles: usize,
    pub gamma: f64,
    pub polyak: f64,
    pub kappa: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub entropy_in_target: bool,
    pub init_alpha: f64,
    /// `None` means the standard `-action_dim`.
    pub target_entropy: Option<f64>,
}

impl Default for AgentSection {
    fn default() -> Self {
        let d = DsacConfig::new(1, vec![0.0], vec![1.0]);
        Self {
            hidden: d.hidden,
            n_quantiles: d.n_quantiles,
            gamma: d.gamma,
            polyak: d.polyak,
            kappa: d.kappa,
            lr: d.lr,
            batch_size: d.batch_size,
            entropy_in_target: d.entropy_in_target,
            init_alpha: d.init_alpha,
            target_entropy: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSection {
    pub workers: usize,
    pub episodes: usize,
    pub snapshot_interval: usize,
    pub warmup: usize,
    pub replay_capacity: usize,
    pub seed: u64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainRunConfig::default();
        Self {
            workers: d.workers,
            episodes: d.episodes_total,
            snapshot_interval: d.snapshot_interval,
            warmup: d.warmup,
            replay_capacity: d.replay_capacity,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSection {
    pub trials: usize,
    pub seed: u64,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 10_000,
        }
    }
}

/// The complete resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub env_id: EnvId,
    pub sim: SimSection,
    pub sectors: usize,
    pub air: DomainSection,
    pub water: DomainSection,
    pub reward: RewardParams,
    pub agent: AgentSection,
    pub train: TrainSection,
    pub eval: EvalSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            env_id: EnvId::Env1,
            sim: SimSection::default(),
            sectors: 36,
            air: DomainSection::from_params(&DomainParams::air(0.05, 36)),
            water: DomainSection::from_params(&DomainParams::water(0.05, 36)),
            reward: RewardParams::default(),
            agent: AgentSection::default(),
            train: TrainSection::default(),
            eval: EvalSection::default(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str, what: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: format!("expected {what}"),
    })
}

impl RunConfig {
    /// Assign one key. Unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let k = key;
        let v = value;
        match k {
            "env.id" => self.env_id = parse(k, v, "env1|env2")?,
            "sim.dt" => self.sim.dt = parse(k, v, "a float")?,
            "sim.horizon" => self.sim.horizon = parse(k, v, "an integer")?,
            "sim.r_sense" => self.sim.r_sense = parse(k, v, "a float")?,
            "sim.collision_radius" => self.sim.collision_radius = parse(k, v, "a float")?,
            "sim.lambda_step" => self.sim.lambda_step = parse(k, v, "a float")?,
            "sim.sigma0_max" => self.sim.sigma0_max = parse(k, v, "a float")?,
            "sim.n_targets" => self.sim.n_targets = parse(k, v, "an integer")?,
            "sim.est_noise_std" => self.sim.est_noise_std = parse(k, v, "a float")?,
            "sim.sigma_scale" => self.sim.sigma_scale = parse(k, v, "a float")?,
            "sensor.sectors" => self.sectors = parse(k, v, "an integer")?,
            _ if k.starts_with("air.") || k.starts_with("water.") => {
                let (section, field) = k.split_once('.').unwrap();
                let s = if section == "air" {
                    &mut self.air
                } else {
                    &mut self.water
                };
                match field {
                    "tau_v" => s.tau_v = parse(k, v, "a float")?,
                    "tau_w" => s.tau_w = parse(k, v, "a float")?,
                    "v_max" => s.v_max = parse(k, v, "a float")?,
                    "w_max" => s.w_max = parse(k, v, "a float")?,
                    "ou_theta" => s.ou_theta = parse(k, v, "a float")?,
                    "ou_sigma" => s.ou_sigma = parse(k, v, "a float")?,
                    "ou_mu_x" => s.ou_mu_x = parse(k, v, "a float")?,
                    "ou_mu_y" => s.ou_mu_y = parse(k, v, "a float")?,
                    "ou_enabled" => s.ou_enabled = parse(k, v, "true|false")?,
                    _ => return Err(ConfigError::UnknownKey(k.into())),
                }
            }
            "reward.visit" => self.reward.visit = parse(k, v, "a float")?,
            "reward.collision" => self.reward.collision = parse(k, v, "a float")?,
            "reward.sigma_cost" => self.reward.sigma_cost = parse(k, v, "a float")?,
            "reward.progress" => self.reward.progress = parse(k, v, "a float")?,
            "agent.hidden" => {
                self.agent.hidden = v
                    .split(',')
                    .map(|x| x.trim().parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| ConfigError::BadValue {
                        key: k.into(),
                        value: v.into(),
                        reason: "expected comma-separated widths".into(),
                    })?
            }
            "agent.n_quantiles" => self.agent.n_quantiles = parse(k, v, "an integer")?,
            "agent.gamma" => self.agent.gamma = parse(k, v, "a float")?,
            "agent.polyak" => self.agent.polyak = parse(k, v, "a float")?,
            "agent.kappa" => self.agent.kappa = parse(k, v, "a float")?,
            "agent.lr" => self.agent.lr = parse(k, v, "a float")?,
            "agent.batch_size" => self.agent.batch_size = parse(k, v, "an integer")?,
            "agent.entropy_in_target" => {
                self.agent.entropy_in_target = parse(k, v, "true|false")?
            }
            "agent.init_alpha" => self.agent.init_alpha = parse(k, v, "a float")?,
            "agent.target_entropy" => {
                self.agent.target_entropy = if v == "auto" {
                    None
                } else {
                    Some(parse(k, v, "a float or `auto`")?)
                }
            }
            "train.workers" => self.train.workers = parse(k, v, "an integer")?,
            "train.episodes" => self.train.episodes = parse(k, v, "an integer")?,
            "train.snapshot_interval" => {
                self.train.snapshot_interval = parse(k, v, "an integer")?
            }
            "train.warmup" => self.train.warmup = parse(k, v, "an integer")?,
            "train.replay_capacity" => self.train.replay_capacity = parse(k, v, "an integer")?,
            "train.seed" => self.train.seed = parse(k, v, "an integer")?,
            "eval.trials" => self.eval.trials = parse(k, v, "an integer")?,
            "eval.seed" => self.eval.seed = parse(k, v, "an integer")?,
            _ => return Err(ConfigError::UnknownKey(k.into())),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::MalformedLine(line.to_string()))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_text(&std::fs::read_to_string(path)?)?;
        Ok(cfg)
    }

    /// Serialize every key in canonical order. `comments` go at the top
    /// as `# ...` lines, which the parser ignores.
    pub fn manifest_text(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        kv("env.id", self.env_id.as_str().into());
        kv("sim.dt", fmt(self.sim.dt));
        kv("sim.horizon", self.sim.horizon.to_string());
        kv("sim.r_sense", fmt(self.sim.r_sense));
        kv("sim.collision_radius", fmt(self.sim.collision_radius));
        kv("sim.lambda_step", fmt(self.sim.lambda_step));
        kv("sim.sigma0_max", fmt(self.sim.sigma0_max));
        kv("sim.n_targets", self.sim.n_targets.to_string());
        kv("sim.est_noise_std", fmt(self.sim.est_noise_std));
        kv("sim.sigma_scale", fmt(self.sim.sigma_scale));
        kv("sensor.sectors", self.sectors.to_string());
        for (name, s) in [("air", &self.air), ("water", &self.water)] {
            kv(&format!("{name}.tau_v"), fmt(s.tau_v));
            kv(&format!("{name}.tau_w"), fmt(s.tau_w));
            kv(&format!("{name}.v_max"), fmt(s.v_max));
            kv(&format!("{name}.w_max"), fmt(s.w_max));
            kv(&format!("{name}.ou_theta"), fmt(s.ou_theta));
            kv(&format!("{name}.ou_sigma"), fmt(s.ou_sigma));
            kv(&format!("{name}.ou_mu_x"), fmt(s.ou_mu_x));
            kv(&format!("{name}.ou_mu_y"), fmt(s.ou_mu_y));
            kv(&format!("{name}.ou_enabled"), s.ou_enabled.to_string());
        }
        kv("reward.visit", fmt(self.reward.visit));
        kv("reward.collision", fmt(self.reward.collision));
        kv("reward.sigma_cost", fmt(self.reward.sigma_cost));
        kv("reward.progress", fmt(self.reward.progress));
        kv(
            "agent.hidden",
            self.agent
                .hidden
                .iter()
                .map(|h| h.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        kv("agent.n_quantiles", self.agent.n_quantiles.to_string());
        kv("agent.gamma", fmt(self.agent.gamma));
        kv("agent.polyak", fmt(self.agent.polyak));
        kv("agent.kappa", fmt(self.agent.kappa));
        kv("agent.lr", fmt(self.agent.lr));
        kv("agent.batch_size", self.agent.batch_size.to_string());
        kv(
            "agent.entropy_in_target",
            self.agent.entropy_in_target.to_string(),
        );
        kv("agent.init_alpha", fmt(self.agent.init_alpha));
        kv(
            "agent.target_entropy",
            self.agent
                .target_entropy
                .map(fmt)
                .unwrap_or_else(|| "auto".into()),
        );
        kv("train.workers", self.train.workers.to_string());
        kv("train.episodes", self.train.episodes.to_string());
        kv(
            "train.snapshot_interval",
            self.train.snapshot_interval.to_string(),
        );
        kv("train.warmup", self.train.warmup.to_string());
        kv(
            "train.replay_capacity",
            self.train.replay_capacity.to_string(),
        );
        kv("train.seed", self.train.seed.to_string());
        kv("eval.trials", self.eval.trials.to_string());
        kv("eval.seed", self.eval.seed.to_string());
        out
    }

    /// Build the simulator setup for one domain.
    pub fn env_setup(&self, domain: Domain) -> EnvSetup {
        let (section, sensor) = match domain {
            Domain::Air => (&self.air, SensorSpec::lidar(self.sectors)),
            Domain::Water => (&self.water, SensorSpec::sonar(self.sectors)),
        };
        EnvSetup {
            env_id: self.env_id,
            dom: DomainParams {
                domain,
                dt: self.sim.dt,
                tau_v: section.tau_v,
                tau_w: section.tau_w,
                v_max: section.v_max,
                w_max: section.w_max,
                ou: OuParams {
                    theta: section.ou_theta,
                    mu: Vec2::new(section.ou_mu_x, section.ou_mu_y),
                    sigma: section.ou_sigma,
                    enabled: section.ou_enabled,
                },
                sensor,
            },
            mon: MonitoringParams {
                n_targets: self.sim.n_targets,
                r_sense: self.sim.r_sense,
                lambda_step: self.sim.lambda_step,
                sigma0_max: self.sim.sigma0_max,
                est_noise_std: self.sim.est_noise_std,
                sigma_scale: self.sim.sigma_scale,
            },
            reward: self.reward,
            horizon: self.sim.horizon,
            collision_radius: self.sim.collision_radius,
        }
    }

    /// Agent hyperparameters. Action bounds come from the air domain:
    /// training happens there, and the same command space is kept when
    /// the policy is deployed in water.
    pub fn dsac_config(&self) -> DsacConfig {
        let mut cfg = DsacConfig::new(
            observation_width(self.sim.n_targets, self.sectors),
            vec![0.0, -self.air.w_max],
            vec![self.air.v_max, self.air.w_max],
        );
        cfg.hidden = self.agent.hidden.clone();
        cfg.n_quantiles = self.agent.n_quantiles;
        cfg.gamma = self.agent.gamma;
        cfg.polyak = self.agent.polyak;
        cfg.kappa = self.agent.kappa;
        cfg.lr = self.agent.lr;
        cfg.batch_size = self.agent.batch_size;
        cfg.entropy_in_target = self.agent.entropy_in_target;
        cfg.init_alpha = self.agent.init_alpha;
        cfg.target_entropy = self.agent.target_entropy;
        cfg.seed = self.train.seed;
        cfg
    }

    pub fn train_run_config(&self) -> TrainRunConfig {
        TrainRunConfig {
            workers: self.train.workers,
            episodes_total: self.train.episodes,
            snapshot_interval: self.train.snapshot_interval,
            warmup: self.train.warmup,
            replay_capacity: self.train.replay_capacity,
            seed: self.train.seed,
        }
    }
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_roundtrips_exactly() {
        let mut cfg = RunConfig::default();
        cfg.set("env.id", "env2").unwrap();
        cfg.set("train.seed", "77").unwrap();
        cfg.set("agent.hidden", "24,24").unwrap();
        cfg.set("water.v_max", "0.4").unwrap();
        cfg.set("agent.target_entropy", "-1.5").unwrap();
        let text = cfg.manifest_text(&["wall_clock_secs=12.5".into()]);
        let mut back = RunConfig::default();
        back.apply_text(&text).unwrap();
        assert_eq!(cfg, back);
        // And the manifest of the parsed config is byte-identical.
        assert_eq!(text, back.manifest_text(&["wall_clock_secs=12.5".into()]));
    }

    #[test]
    fn every_manifest_key_is_settable() {
        let cfg = RunConfig::default();
        let text = cfg.manifest_text(&[]);
        let mut other = RunConfig::default();
        for line in text.lines() {
            let (k, v) = line.split_once('=').unwrap();
            other.set(k, v).unwrap_or_else(|e| panic!("{e}"));
        }
        assert_eq!(cfg, other);
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut cfg = RunConfig::default();
        assert!(matches!(
            cfg.set("sim.gravity", "9.8"),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(matches!(
            cfg.set("air.viscosity", "1"),
            Err(ConfigError::UnknownKey(_))
        ));
    }

    #[test]
    fn bad_values_carry_context() {
        let mut cfg = RunConfig::default();
        let err = cfg.set("sim.dt", "fast").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sim.dt") && msg.contains("fast"));
    }

    #[test]
    fn defaults_follow_the_protocol() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.train.episodes, 2500);
        assert_eq!(cfg.sim.horizon, 5000);
        assert_eq!(cfg.agent.batch_size, 256);
        assert_eq!(cfg.agent.lr, 1e-3);
        assert_eq!(cfg.train.workers, 5);
        assert_eq!(cfg.agent.n_quantiles, 64);
        assert_eq!(cfg.eval.trials, 100);
    }

    #[test]
    fn domain_setups_share_observation_width() {
        let cfg = RunConfig::default();
        let air = cfg.env_setup(Domain::Air);
        let water = cfg.env_setup(Domain::Water);
        assert_eq!(air.obs_width(), water.obs_width());
        assert_eq!(air.dom.sensor.max_range, 10.0);
        assert_eq!(water.dom.sensor.max_range, 20.0);
    }
}
