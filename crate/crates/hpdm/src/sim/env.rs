//! Episode protocol: reset sampling, the step pipeline, reward, and the
//! packed observation vector.

use super::{
    cast_rays_with, lissajous_position, ou_step, step_targets, step_vehicle, wrap_angle,
    ArenaSpec, BeamTable, DomainParams, TargetSpec, TargetState, Vec2, VehicleState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

/// Monitoring-task parameters.
#[derive(Debug, Clone, Copy)]
pub struct MonitoringParams {
    pub n_targets: usize,
    /// Visiting radius: a target within this distance is observed and its
    /// uncertainty resets, meters.
    pub r_sense: f64,
    /// Uncertainty growth per simulated step while unobserved.
    pub lambda_step: f64,
    /// Upper bound of the uniform initial uncertainty draw.
    pub sigma0_max: f64,
    /// Standard deviation of the optional estimate noise, meters.
    pub est_noise_std: f64,
    /// Normalizer mapping uncertainty into [0, 1] in the observation.
    pub sigma_scale: f64,
}

impl Default for MonitoringParams {
    fn default() -> Self {
        Self {
            n_targets: 3,
            r_sense: 1.0,
            lambda_step: 0.001,
            sigma0_max: 0.05,
            est_noise_std: 0.0,
            sigma_scale: 5.0,
        }
    }
}

impl MonitoringParams {
    pub fn validate(&self) {
        assert!(self.n_targets >= 1, "need at least one target");
        assert!(self.r_sense > 0.0, "r_sense must be positive");
        assert!(self.lambda_step > 0.0, "lambda_step must be positive");
        assert!(self.sigma0_max >= 0.0 && self.est_noise_std >= 0.0);
        assert!(self.sigma_scale > 0.0);
    }
}

/// Reward weights. Every term beyond the visit bonus is shaping and can be
/// disabled individually by zeroing its weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams {
    /// Bonus per uncertainty reset this step.
    pub visit: f64,
    /// Penalty when the step ends in a collision.
    pub collision: f64,
    /// Per-step cost multiplying the summed uncertainties.
    pub sigma_cost: f64,
    /// Weight on the per-step decrease of the distance to the currently
    /// most uncertain target.
    pub progress: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            visit: 10.0,
            collision: 10.0,
            sigma_cost: 0.01,
            progress: 1.0,
        }
    }
}

/// `visit * resets - collision * [collided] - sigma_cost * sum(sigmas)
///  + progress_weight * progress`.
pub fn compute_reward(
    resets: usize,
    sigmas: &[f64],
    collided: bool,
    progress: f64,
    w: &RewardParams,
) -> f64 {
    let sigma_sum: f64 = sigmas.iter().sum();
    w.visit * resets as f64 - w.collision * (collided as u8 as f64) - w.sigma_cost * sigma_sum
        + w.progress * progress
}

/// One step of the uncertainty dichotomy: zero inside the sensing radius,
/// otherwise grown by `lambda_step`.
pub fn update_uncertainty(sigma: f64, dist: f64, p: &MonitoringParams) -> f64 {
    debug_assert!(sigma >= 0.0 && dist >= 0.0);
    if dist <= p.r_sense {
        0.0
    } else {
        sigma + p.lambda_step
    }
}

/// Fixed-width observation vector, all entries in [-1, 1].
///
/// Layout: `[x/hw, y/hw, sin(heading), cos(heading)]` then per target
/// `[rel_x_body/(2*hw), rel_y_body/(2*hw), sigma/sigma_scale]` (clamped),
/// then each range sector divided by the sensor's max range. The layout
/// and width are identical in both domains.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub data: Vec<f64>,
}

impl Observation {
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

pub fn observation_width(n_targets: usize, sectors: usize) -> usize {
    4 + 3 * n_targets + sectors
}

/// Pack pose, target estimates, and scan into the observation vector.
pub fn build_observation(
    veh: &VehicleState,
    targets: &[TargetState],
    scan: &[f64],
    dom: &DomainParams,
    half_width: f64,
    mon: &MonitoringParams,
) -> Observation {
    assert_eq!(targets.len(), mon.n_targets, "target count mismatch");
    assert_eq!(scan.len(), dom.sensor.sectors, "sector count mismatch");
    let mut data = Vec::with_capacity(observation_width(mon.n_targets, scan.len()));
    data.push(veh.x / half_width);
    data.push(veh.y / half_width);
    let (sin_h, cos_h) = veh.heading.sin_cos();
    data.push(sin_h);
    data.push(cos_h);
    let rel_scale = 2.0 * half_width;
    for t in targets {
        let rel = t.est_pos - veh.pos();
        let body_x = cos_h * rel.x + sin_h * rel.y;
        let body_y = -sin_h * rel.x + cos_h * rel.y;
        data.push((body_x / rel_scale).clamp(-1.0, 1.0));
        data.push((body_y / rel_scale).clamp(-1.0, 1.0));
        data.push((t.sigma / mon.sigma_scale).clamp(0.0, 1.0));
    }
    for &s in scan {
        data.push(s / dom.sensor.max_range);
    }
    Observation { data }
}

/// Episode mode: training terminates on the first uncertainty reset,
/// evaluation runs to collision or the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, Clone)]
pub struct StepInfo {
    pub resets_this_step: usize,
    pub collided: bool,
    pub per_target_sigma: Vec<f64>,
    /// Which targets were inside the sensing radius this step.
    pub per_target_visited: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub obs: Observation,
    pub reward: f64,
    pub terminated: bool,
    pub info: StepInfo,
}

/// Read-only snapshot of the simulator state handed to policies that
/// work on structured quantities (pose, targets, scan) rather than the
/// packed vector. Carries the same information as the observation.
#[derive(Debug, Clone, Copy)]
pub struct WorldView<'a> {
    pub vehicle: VehicleState,
    pub targets: &'a [TargetState],
    pub scan: &'a [f64],
    pub v_max: f64,
    pub w_max: f64,
}

/// Everything needed to build identical environment instances, e.g. one
/// per worker or per evaluation trial.
#[derive(Debug, Clone)]
pub struct EnvSetup {
    pub env_id: crate::sim::EnvId,
    pub dom: DomainParams,
    pub mon: MonitoringParams,
    pub reward: RewardParams,
    pub horizon: usize,
    pub collision_radius: f64,
}

impl EnvSetup {
    pub fn build(&self) -> Env {
        Env::new(
            ArenaSpec::from_id(self.env_id),
            self.dom,
            self.mon,
            self.reward,
            self.horizon,
            self.collision_radius,
        )
    }

    pub fn obs_width(&self) -> usize {
        observation_width(self.mon.n_targets, self.dom.sensor.sectors)
    }
}

/// The monitoring environment. Not safe for concurrent mutation; run one
/// instance per worker.
pub struct Env {
    arena: ArenaSpec,
    dom: DomainParams,
    mon: MonitoringParams,
    reward: RewardParams,
    horizon: usize,
    collision_radius: f64,
    beam_table: BeamTable,
    rng: ChaCha12Rng,
    veh: VehicleState,
    specs: Vec<TargetSpec>,
    targets: Vec<TargetState>,
    drift: Vec2,
    steps: usize,
    terminated: bool,
    ready: bool,
    last_scan: Vec<f64>,
}

impl Env {
    pub fn new(
        arena: ArenaSpec,
        dom: DomainParams,
        mon: MonitoringParams,
        reward: RewardParams,
        horizon: usize,
        collision_radius: f64,
    ) -> Self {
        arena.validate();
        dom.validate();
        mon.validate();
        assert!(horizon >= 1, "horizon must be at least one step");
        assert!(collision_radius > 0.0, "collision radius must be positive");
        let beam_table = BeamTable::new(&dom.sensor);
        Self {
            arena,
            dom,
            mon,
            reward,
            horizon,
            collision_radius,
            beam_table,
            rng: ChaCha12Rng::seed_from_u64(0),
            veh: VehicleState {
                x: 0.0,
                y: 0.0,
                heading: 0.0,
                v: 0.0,
                w: 0.0,
            },
            specs: Vec::new(),
            targets: Vec::new(),
            drift: Vec2::ZERO,
            steps: 0,
            terminated: false,
            ready: false,
            last_scan: Vec::new(),
        }
    }

    pub fn obs_width(&self) -> usize {
        observation_width(self.mon.n_targets, self.dom.sensor.sectors)
    }

    pub fn domain_params(&self) -> &DomainParams {
        &self.dom
    }

    pub fn monitoring_params(&self) -> &MonitoringParams {
        &self.mon
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn elapsed_steps(&self) -> usize {
        self.steps
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    pub fn view(&self) -> WorldView<'_> {
        WorldView {
            vehicle: self.veh,
            targets: &self.targets,
            scan: &self.last_scan,
            v_max: self.dom.v_max,
            w_max: self.dom.w_max,
        }
    }

    /// Start a new episode. The same seed reproduces the initial state
    /// bit for bit.
    ///
    /// Panics if no collision-free vehicle pose is found in 1000 draws.
    pub fn reset(&mut self, seed: u64) -> Observation {
        self.rng = ChaCha12Rng::seed_from_u64(seed);
        self.specs.clear();
        self.targets.clear();
        for _ in 0..self.mon.n_targets {
            let spec = TargetSpec {
                amp_x: self.rng.gen_range(2.0..5.0),
                amp_y: self.rng.gen_range(2.0..5.0),
                freq_x: 2.0,
                freq_y: 2.0,
                phase_x: self.rng.gen_range(0.0..2.0 * PI),
                phase_y: self.rng.gen_range(0.0..2.0 * PI),
                speed: self.rng.gen_range(0.1..0.25),
            };
            spec.validate();
            let sigma0 = if self.mon.sigma0_max > 0.0 {
                self.rng.gen_range(0.0..self.mon.sigma0_max)
            } else {
                0.0
            };
            let pos = lissajous_position(&spec, 0.0);
            self.targets.push(TargetState {
                true_pos: pos,
                est_pos: pos,
                sigma: sigma0,
                curve_param: 0.0,
            });
            self.specs.push(spec);
        }
        let hw = self.arena.half_width;
        let mut placed = false;
        for _ in 0..1000 {
            let x = self.rng.gen_range(-hw..hw);
            let y = self.rng.gen_range(-hw..hw);
            let heading = self.rng.gen_range(-PI..PI);
            if self.arena.clearance(Vec2::new(x, y)) > self.collision_radius {
                self.veh = VehicleState {
                    x,
                    y,
                    heading,
                    v: 0.0,
                    w: 0.0,
                };
                placed = true;
                break;
            }
        }
        assert!(placed, "no collision-free vehicle pose found in 1000 draws");
        self.refresh_estimates();
        self.drift = Vec2::ZERO;
        self.steps = 0;
        self.terminated = false;
        self.ready = true;
        self.last_scan = cast_rays_with(&self.veh, &self.arena, &self.dom.sensor, &self.beam_table);
        build_observation(
            &self.veh,
            &self.targets,
            &self.last_scan,
            &self.dom,
            hw,
            &self.mon,
        )
    }

    fn refresh_estimates(&mut self) {
        if self.mon.est_noise_std > 0.0 {
            for i in 0..self.targets.len() {
                let nx: f64 = StandardNormal.sample(&mut self.rng);
                let ny: f64 = StandardNormal.sample(&mut self.rng);
                let t = &mut self.targets[i];
                t.est_pos = t.true_pos + Vec2::new(nx, ny) * self.mon.est_noise_std;
            }
        } else {
            for t in &mut self.targets {
                t.est_pos = t.true_pos;
            }
        }
    }

    fn most_uncertain_target(&self) -> usize {
        let mut best = 0;
        for (i, t) in self.targets.iter().enumerate().skip(1) {
            if t.sigma > self.targets[best].sigma {
                best = i;
            }
        }
        best
    }

    /// Advance one control step.
    ///
    /// Pipeline: vehicle dynamics -> target motion -> uncertainty update
    /// -> reward -> observation. Panics when called before `reset` or
    /// after the episode terminated.
    pub fn step(&mut self, action: [f64; 2], mode: Mode) -> StepResult {
        assert!(self.ready, "env_step called before reset");
        assert!(!self.terminated, "env_step called after termination");

        let chase = self.most_uncertain_target();
        let dist_before = self.veh.pos().dist(self.targets[chase].true_pos);

        if self.dom.ou.enabled {
            let noise = Vec2::new(
                StandardNormal.sample(&mut self.rng),
                StandardNormal.sample(&mut self.rng),
            );
            self.drift = ou_step(self.drift, &self.dom.ou, self.dom.dt, noise);
        }
        let drift = if self.dom.ou.enabled {
            self.drift
        } else {
            Vec2::ZERO
        };

        self.veh = step_vehicle(&self.veh, action, &self.dom, drift);
        step_targets(&mut self.targets, &self.specs, self.dom.dt);
        self.refresh_estimates();

        let mut resets = 0;
        let mut visited = vec![false; self.targets.len()];
        for (i, t) in self.targets.iter_mut().enumerate() {
            let dist = Vec2::new(self.veh.x, self.veh.y).dist(t.true_pos);
            if dist <= self.mon.r_sense {
                resets += 1;
                visited[i] = true;
            }
            t.sigma = update_uncertainty(t.sigma, dist, &self.mon);
        }

        let collided = self.arena.clearance(self.veh.pos()) < self.collision_radius;
        let dist_after = self.veh.pos().dist(self.targets[chase].true_pos);
        let progress = dist_before - dist_after;
        let sigmas: Vec<f64> = self.targets.iter().map(|t| t.sigma).collect();
        let reward = compute_reward(resets, &sigmas, collided, progress, &self.reward);

        self.steps += 1;
        self.terminated = collided
            || self.steps >= self.horizon
            || (mode == Mode::Train && resets >= 1);

        self.last_scan = cast_rays_with(&self.veh, &self.arena, &self.dom.sensor, &self.beam_table);
        let obs = build_observation(
            &self.veh,
            &self.targets,
            &self.last_scan,
            &self.dom,
            self.arena.half_width,
            &self.mon,
        );
        StepResult {
            obs,
            reward,
            terminated: self.terminated,
            info: StepInfo {
                resets_this_step: resets,
                collided,
                per_target_sigma: sigmas,
                per_target_visited: visited,
            },
        }
    }

    /// Place the vehicle at an arbitrary pose. Intended for scripted
    /// policies and diagnostics; normal control goes through `step`.
    pub fn set_vehicle_pose(&mut self, x: f64, y: f64, heading: f64) {
        self.veh.x = x;
        self.veh.y = y;
        self.veh.heading = wrap_angle(heading);
        self.last_scan = cast_rays_with(&self.veh, &self.arena, &self.dom.sensor, &self.beam_table);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::EnvId;

    fn env(env_id: EnvId) -> Env {
        let arena = ArenaSpec::from_id(env_id);
        let dom = DomainParams::air(0.05, 36);
        Env::new(
            arena,
            dom,
            MonitoringParams::default(),
            RewardParams::default(),
            5000,
            0.3,
        )
    }

    #[test]
    fn reward_weight_arithmetic() {
        let w = RewardParams::default();
        assert_eq!(compute_reward(1, &[0.0, 0.0, 0.0], false, 0.0, &w), 10.0);
        assert_eq!(compute_reward(0, &[0.0, 0.0, 0.0], false, 0.0, &w), 0.0);
        let r = compute_reward(0, &[1.0, 1.0, 1.0], true, 0.0, &w);
        assert!((r - (-10.03)).abs() < 1e-12);
    }

    #[test]
    fn uncertainty_dichotomy_cases() {
        let p = MonitoringParams::default();
        assert_eq!(update_uncertainty(5.0, 0.3, &p), 0.0);
        assert!((update_uncertainty(5.0, 4.0, &p) - 5.001).abs() < 1e-12);
        assert!((update_uncertainty(0.0, 4.0, &p) - 0.001).abs() < 1e-12);
    }

    #[test]
    fn observation_width_and_bounds() {
        assert_eq!(observation_width(3, 36), 49);
        let mut e = env(EnvId::Env1);
        let obs = e.reset(12);
        assert_eq!(obs.len(), 49);
        for mode_step in 0..50 {
            let r = e.step([1.0, if mode_step % 2 == 0 { 1.5 } else { -1.5 }], Mode::Eval);
            assert_eq!(r.obs.len(), 49);
            for &v in r.obs.as_slice() {
                assert!((-1.0..=1.0).contains(&v), "entry {v} out of [-1,1]");
            }
            if r.terminated {
                break;
            }
        }
    }

    #[test]
    fn observation_width_identical_across_domains() {
        let air = DomainParams::air(0.05, 36);
        let water = DomainParams::water(0.05, 36);
        let mut ea = Env::new(
            ArenaSpec::env1(),
            air,
            MonitoringParams::default(),
            RewardParams::default(),
            100,
            0.3,
        );
        let mut ew = Env::new(
            ArenaSpec::env1(),
            water,
            MonitoringParams::default(),
            RewardParams::default(),
            100,
            0.3,
        );
        assert_eq!(ea.reset(3).len(), ew.reset(3).len());
    }

    #[test]
    fn coincident_target_block_is_zero() {
        let veh = VehicleState {
            x: 0.0,
            y: 0.0,
            heading: 0.0,
            v: 0.0,
            w: 0.0,
        };
        let t = TargetState {
            true_pos: Vec2::ZERO,
            est_pos: Vec2::ZERO,
            sigma: 0.0,
            curve_param: 0.0,
        };
        let mon = MonitoringParams {
            n_targets: 1,
            ..Default::default()
        };
        let dom = DomainParams::air(0.05, 36);
        let scan = vec![10.0; 36];
        let obs = build_observation(&veh, &[t], &scan, &dom, 5.0, &mon);
        assert_eq!(&obs.as_slice()[4..7], &[0.0, 0.0, 0.0]);
        // Saturated scan normalizes to exactly 1.
        for &v in &obs.as_slice()[7..] {
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn reset_is_deterministic() {
        let mut a = env(EnvId::Env2);
        let mut b = env(EnvId::Env2);
        let oa = a.reset(99);
        let ob = b.reset(99);
        assert_eq!(oa, ob);
    }

    #[test]
    fn sigma0_upper_bound_zero_yields_zero() {
        let mut e = Env::new(
            ArenaSpec::env1(),
            DomainParams::air(0.05, 36),
            MonitoringParams {
                sigma0_max: 0.0,
                ..Default::default()
            },
            RewardParams::default(),
            100,
            0.3,
        );
        e.reset(4);
        for t in e.view().targets {
            assert_eq!(t.sigma, 0.0);
        }
    }

    #[test]
    fn many_resets_spawn_collision_free_in_env2() {
        let mut e = env(EnvId::Env2);
        let arena = ArenaSpec::env2();
        for seed in 0..10_000 {
            e.reset(seed);
            let v = e.view().vehicle;
            assert!(
                arena.clearance(v.pos()) > 0.3,
                "seed {seed} spawned in collision"
            );
        }
    }

    #[test]
    fn driving_into_wall_terminates_with_collision() {
        let mut e = env(EnvId::Env1);
        e.reset(7);
        e.set_vehicle_pose(4.5, 0.0, 0.0);
        let mut last = None;
        for _ in 0..100 {
            let r = e.step([1.0, 0.0], Mode::Eval);
            let done = r.terminated;
            last = Some(r);
            if done {
                break;
            }
        }
        let r = last.unwrap();
        assert!(r.terminated && r.info.collided);
        assert!(r.reward < 0.0);
    }

    #[test]
    fn train_mode_terminates_on_reset_eval_does_not() {
        for (mode, expect_done) in [(Mode::Train, true), (Mode::Eval, false)] {
            let mut e = env(EnvId::Env1);
            e.reset(21);
            // Park on top of the most uncertain target.
            let tgt = e.view().targets[0].true_pos;
            e.set_vehicle_pose(tgt.x, tgt.y, 0.0);
            let r = e.step([0.0, 0.0], mode);
            assert!(r.info.resets_this_step >= 1, "vehicle sits on a target");
            assert_eq!(r.terminated, expect_done);
            if mode == Mode::Eval {
                assert_eq!(r.info.per_target_sigma[0], 0.0);
                assert!(r.reward >= 10.0 - 0.03);
            }
        }
    }

    #[test]
    #[should_panic(expected = "after termination")]
    fn stepping_after_termination_panics() {
        let mut e = env(EnvId::Env1);
        e.reset(7);
        e.set_vehicle_pose(4.7, 0.0, 0.0);
        loop {
            let r = e.step([1.0, 0.0], Mode::Eval);
            if r.terminated {
                break;
            }
        }
        e.step([0.0, 0.0], Mode::Eval);
    }

    #[test]
    fn unvisited_sigma_grows_linearly() {
        let mut e = Env::new(
            ArenaSpec::env1(),
            DomainParams::air(0.05, 36),
            MonitoringParams {
                sigma0_max: 0.0,
                ..Default::default()
            },
            RewardParams::default(),
            5000,
            0.3,
        );
        e.reset(40);
        // Spawn far from every target, then hold still.
        e.set_vehicle_pose(-4.5, -4.5, 0.0);
        let far_enough = e
            .view()
            .targets
            .iter()
            .all(|t| t.true_pos.dist(Vec2::new(-4.5, -4.5)) > 1.5);
        assert!(far_enough, "seed must spawn targets away from the corner");
        let k = 200;
        for _ in 0..k {
            let r = e.step([0.0, 0.0], Mode::Eval);
            assert!(!r.terminated);
        }
        for t in e.view().targets {
            assert!((t.sigma - k as f64 * 0.001).abs() < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_actions_bitwise_identical() {
        let run = |seed: u64| -> Vec<f64> {
            let mut e = env(EnvId::Env2);
            let mut out = Vec::new();
            let obs = e.reset(seed);
            out.extend_from_slice(obs.as_slice());
            for i in 0..200 {
                let a = [0.7, ((i * 37) % 11) as f64 / 5.0 - 1.0];
                let r = e.step(a, Mode::Eval);
                out.push(r.reward);
                out.extend_from_slice(r.obs.as_slice());
                if r.terminated {
                    break;
                }
            }
            out
        };
        let a = run(123);
        let b = run(123);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn sigma_dichotomy_holds_along_trajectories() {
        let mut e = env(EnvId::Env1);
        e.reset(5);
        let mut prev: Vec<f64> = e.view().targets.iter().map(|t| t.sigma).collect();
        for i in 0..500 {
            let r = e.step([0.8, (i % 7) as f64 * 0.4 - 1.2], Mode::Eval);
            for (p, s) in prev.iter().zip(&r.info.per_target_sigma) {
                let grown = (s - (p + 0.001)).abs() < 1e-12;
                let reset = *s == 0.0;
                assert!(grown || reset, "sigma moved from {p} to {s}");
            }
            prev = r.info.per_target_sigma.clone();
            if r.terminated {
                break;
            }
        }
    }
}
