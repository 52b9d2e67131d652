//! Evaluation harness: runs full-horizon trials, aggregates the
//! per-target uncertainty and time-to-visit statistics, and exports
//! everything as CSV.

use crate::baseline::{bug2_command, select_target, Bug2Params, Bug2State};
use crate::dsac::Actor;
use crate::sim::{Env, EnvSetup, Mode, Observation, Vec2, WorldView};
use rayon::prelude::*;
use std::fs;
use std::io::Write;
use std::path::Path;

/// A control policy under evaluation. `begin_trial` clears any internal
/// state; `act` maps the current observation (packed and structured
/// views carry the same information) to a command.
pub trait Policy: Send {
    fn begin_trial(&mut self);
    fn act(&mut self, obs: &Observation, view: &WorldView) -> [f64; 2];
    fn name(&self) -> &'static str;
}

/// Learned policy evaluated at the distribution mean (no exploration
/// noise).
pub struct DsacPolicy {
    pub actor: Actor,
}

impl Policy for DsacPolicy {
    fn begin_trial(&mut self) {}

    fn act(&mut self, obs: &Observation, _view: &WorldView) -> [f64; 2] {
        let a = self.actor.mean_action(obs.as_slice());
        [a[0], a[1]]
    }

    fn name(&self) -> &'static str {
        "dsac"
    }
}

/// Bug2 baseline wrapper: re-selects the pursued target on every
/// uncertainty reset, mirroring the trained agent's episode logic.
pub struct Bug2Policy {
    pub params: Bug2Params,
    state: Option<Bug2State>,
    prev_sigmas: Vec<f64>,
}

impl Bug2Policy {
    pub fn new(params: Bug2Params) -> Self {
        Self {
            params,
            state: None,
            prev_sigmas: Vec::new(),
        }
    }
}

impl Default for Bug2Policy {
    fn default() -> Self {
        Self::new(Bug2Params::default())
    }
}

impl Policy for Bug2Policy {
    fn begin_trial(&mut self) {
        self.state = None;
        self.prev_sigmas.clear();
    }

    fn act(&mut self, _obs: &Observation, view: &WorldView) -> [f64; 2] {
        let sigmas: Vec<f64> = view.targets.iter().map(|t| t.sigma).collect();
        let positions: Vec<Vec2> = view.targets.iter().map(|t| t.est_pos).collect();
        let reset_happened = !self.prev_sigmas.is_empty()
            && sigmas
                .iter()
                .zip(&self.prev_sigmas)
                .any(|(now, before)| now < before);
        if self.state.is_none() || reset_happened {
            let goal_idx = select_target(&sigmas, &positions);
            self.state = Some(Bug2State::new_goal(
                view.vehicle.pos(),
                positions[goal_idx],
                goal_idx,
            ));
        }
        self.prev_sigmas = sigmas;
        let state = self.state.as_ref().unwrap();
        let goal = positions[state.current_goal];
        let (cmd, next) = bug2_command(
            state,
            &view.vehicle,
            view.scan,
            goal,
            &self.params,
            view.v_max,
            view.w_max,
        );
        self.state = Some(next);
        cmd
    }

    fn name(&self) -> &'static str {
        "bug2"
    }
}

/// Everything recorded during one evaluation episode.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    /// `sigma_series[t][i]` is target `i`'s uncertainty at time `t`,
    /// for `t = 0..elapsed` (the states the policy acted on).
    pub sigma_series: Vec<Vec<f64>>,
    /// `(step, target)` pairs; `step` is the time index at which the
    /// uncertainty hit zero (1-based step count).
    pub visit_events: Vec<(usize, usize)>,
    pub collision_step: Option<usize>,
    pub elapsed: usize,
    pub horizon: usize,
    pub n_targets: usize,
    pub seed: u64,
}

/// One pose/target row per step, for trajectory trace export.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub step: usize,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    /// `(x, y, sigma)` per target.
    pub targets: Vec<(f64, f64, f64)>,
}

fn trace_row(step: usize, view: &WorldView) -> TraceRow {
    TraceRow {
        step,
        x: view.vehicle.x,
        y: view.vehicle.y,
        heading: view.vehicle.heading,
        targets: view
            .targets
            .iter()
            .map(|t| (t.true_pos.x, t.true_pos.y, t.sigma))
            .collect(),
    }
}

/// Run one evaluation-mode episode to collision or the horizon.
/// Deterministic given the policy, environment setup, and seed.
pub fn run_trial(
    policy: &mut dyn Policy,
    env: &mut Env,
    seed: u64,
    mut trace: Option<&mut Vec<TraceRow>>,
) -> TrialRecord {
    let obs0 = env.reset(seed);
    assert_eq!(
        obs0.len(),
        env.obs_width(),
        "policy/environment width mismatch"
    );
    policy.begin_trial();
    let n = env.monitoring_params().n_targets;
    let horizon = env.horizon();
    let mut record = TrialRecord {
        sigma_series: Vec::with_capacity(horizon),
        visit_events: Vec::new(),
        collision_step: None,
        elapsed: 0,
        horizon,
        n_targets: n,
        seed,
    };
    let mut obs = obs0;
    loop {
        // State at time `elapsed` (before the step).
        record
            .sigma_series
            .push(env.view().targets.iter().map(|t| t.sigma).collect());
        if let Some(rows) = trace.as_deref_mut() {
            rows.push(trace_row(record.elapsed, &env.view()));
        }
        let action = {
            let view = env.view();
            policy.act(&obs, &view)
        };
        let r = env.step(action, Mode::Eval);
        record.elapsed += 1;
        for (i, &hit) in r.info.per_target_visited.iter().enumerate() {
            if hit {
                record.visit_events.push((record.elapsed, i));
            }
        }
        if r.info.collided {
            record.collision_step = Some(record.elapsed);
        }
        obs = r.obs;
        if r.terminated {
            break;
        }
    }
    record
}

impl TrialRecord {
    /// Time-mean uncertainty of one target over this trial.
    pub fn time_mean_sigma(&self, target: usize) -> f64 {
        let sum: f64 = self.sigma_series.iter().map(|row| row[target]).sum();
        sum / self.sigma_series.len() as f64
    }

    /// First-visit step of a target, censored at the horizon.
    pub fn first_visit_step(&self, target: usize) -> usize {
        self.visit_events
            .iter()
            .filter(|&&(_, i)| i == target)
            .map(|&(s, _)| s)
            .min()
            .unwrap_or(self.horizon)
    }

    /// Steps between consecutive visits of each target.
    pub fn inter_visit_intervals(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for target in 0..self.n_targets {
            let mut last: Option<usize> = None;
            for &(s, i) in &self.visit_events {
                if i != target {
                    continue;
                }
                if let Some(prev) = last {
                    if s > prev {
                        out.push((target, s - prev));
                    }
                }
                last = Some(s);
            }
        }
        out
    }
}

/// Table-style summary over a batch of trials.
#[derive(Debug, Clone)]
pub struct EvalSummary {
    pub trials: usize,
    /// Mean over trials of the time-mean uncertainty, per target.
    pub per_target_sigma_mean: Vec<f64>,
    /// Mean over targets of `per_target_sigma_mean`.
    pub mean_sigma: f64,
    pub per_target_time_mean: Vec<f64>,
    pub per_target_time_std: Vec<f64>,
    /// First-visit statistics pooled over every (trial, target) pair, in
    /// steps, censored at the horizon.
    pub time_mean: f64,
    pub time_std: f64,
    pub collision_rate: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    // Population convention.
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Aggregate trial records into the summary statistics.
pub fn aggregate(records: &[TrialRecord]) -> EvalSummary {
    assert!(!records.is_empty(), "aggregate needs at least one trial");
    let n_targets = records[0].n_targets;
    let mut per_target_sigma_mean = Vec::with_capacity(n_targets);
    let mut per_target_time_mean = Vec::with_capacity(n_targets);
    let mut per_target_time_std = Vec::with_capacity(n_targets);
    let mut pooled_times = Vec::with_capacity(n_targets * records.len());
    for i in 0..n_targets {
        let sigmas: Vec<f64> = records.iter().map(|r| r.time_mean_sigma(i)).collect();
        per_target_sigma_mean.push(mean_std(&sigmas).0);
        let times: Vec<f64> = records
            .iter()
            .map(|r| r.first_visit_step(i) as f64)
            .collect();
        let (m, s) = mean_std(&times);
        per_target_time_mean.push(m);
        per_target_time_std.push(s);
        pooled_times.extend(times);
    }
    let (time_mean, time_std) = mean_std(&pooled_times);
    let collisions = records.iter().filter(|r| r.collision_step.is_some()).count();
    EvalSummary {
        trials: records.len(),
        mean_sigma: per_target_sigma_mean.iter().sum::<f64>() / n_targets as f64,
        per_target_sigma_mean,
        per_target_time_mean,
        per_target_time_std,
        time_mean,
        time_std,
        collision_rate: collisions as f64 / records.len() as f64,
    }
}

/// Run `trials` independent evaluation episodes with consecutive seeds
/// starting at `seed_base`. Trials run in parallel; records come back in
/// seed order.
pub fn run_trials<F>(
    setup: &EnvSetup,
    make_policy: F,
    seed_base: u64,
    trials: usize,
) -> Vec<TrialRecord>
where
    F: Fn() -> Box<dyn Policy> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut env = setup.build();
            let mut policy = make_policy();
            run_trial(policy.as_mut(), &mut env, seed_base + i as u64, None)
        })
        .collect()
}

/// Every float in the CSV exports is serialized with 9 significant
/// digits so identical records re-export byte-identically.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

/// One labeled row of the summary CSV.
pub struct SummaryRow<'a> {
    pub policy: &'a str,
    pub env: &'a str,
    pub domain: &'a str,
    pub summary: &'a EvalSummary,
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow<'_>]) -> std::io::Result<()> {
    let mut out = String::from(
        "policy,env,domain,trials,sigma_1,sigma_2,sigma_3,mean_sigma,t_mean,t_std,collision_rate\n",
    );
    for r in rows {
        let s = r.summary;
        let sigma = |i: usize| {
            s.per_target_sigma_mean
                .get(i)
                .map(|&v| fmt_float(v))
                .unwrap_or_else(|| "nan".into())
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.policy,
            r.env,
            r.domain,
            s.trials,
            sigma(0),
            sigma(1),
            sigma(2),
            fmt_float(s.mean_sigma),
            fmt_float(s.time_mean),
            fmt_float(s.time_std),
            fmt_float(s.collision_rate),
        ));
    }
    fs::write(path, out)
}

/// Per-step uncertainty series of every trial:
/// `trial,step,sigma_1..sigma_n`.
pub fn write_timeseries_csv(path: &Path, records: &[TrialRecord]) -> std::io::Result<()> {
    let n = records.first().map(|r| r.n_targets).unwrap_or(0);
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    let header: Vec<String> = (1..=n).map(|i| format!("sigma_{i}")).collect();
    writeln!(f, "trial,step,{}", header.join(","))?;
    for (trial, r) in records.iter().enumerate() {
        for (step, row) in r.sigma_series.iter().enumerate() {
            let cols: Vec<String> = row.iter().map(|&v| fmt_float(v)).collect();
            writeln!(f, "{trial},{step},{}", cols.join(","))?;
        }
    }
    f.flush()
}

/// Steps between consecutive visits, per trial and target.
pub fn write_intervals_csv(path: &Path, records: &[TrialRecord]) -> std::io::Result<()> {
    let mut out = String::from("trial,target,interval_steps\n");
    for (trial, r) in records.iter().enumerate() {
        for (target, steps) in r.inter_visit_intervals() {
            out.push_str(&format!("{trial},{target},{steps}\n"));
        }
    }
    fs::write(path, out)
}

/// Trajectory trace: `step,x,y,heading` then `x,y,sigma` per target.
pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> std::io::Result<()> {
    let n = rows.first().map(|r| r.targets.len()).unwrap_or(0);
    let mut header = String::from("step,x,y,heading");
    for i in 1..=n {
        header.push_str(&format!(",t{i}_x,t{i}_y,t{i}_sigma"));
    }
    let mut out = header;
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}",
            r.step,
            fmt_float(r.x),
            fmt_float(r.y),
            fmt_float(r.heading)
        ));
        for &(x, y, s) in &r.targets {
            out.push_str(&format!(",{},{},{}", fmt_float(x), fmt_float(y), fmt_float(s)));
        }
        out.push('\n');
    }
    fs::write(path, out)
}

/// Time-mean uncertainty of a policy that never visits anything:
/// `sigma_0 + lambda * (T - 1) / 2`.
pub fn stationary_sigma_mean(sigma0: f64, lambda_step: f64, horizon: usize) -> f64 {
    sigma0 + lambda_step * (horizon as f64 - 1.0) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{DomainParams, EnvId, MonitoringParams, RewardParams};

    struct Stationary;

    impl Policy for Stationary {
        fn begin_trial(&mut self) {}
        fn act(&mut self, _: &Observation, _: &WorldView) -> [f64; 2] {
            [0.0, 0.0]
        }
        fn name(&self) -> &'static str {
            "stationary"
        }
    }

    fn setup(horizon: usize) -> EnvSetup {
        let mut dom = DomainParams::air(0.05, 36);
        dom.ou.enabled = false;
        EnvSetup {
            env_id: EnvId::Env1,
            dom,
            mon: MonitoringParams::default(),
            reward: RewardParams::default(),
            horizon,
            collision_radius: 0.3,
        }
    }

    /// Find a seed whose spawn is farther than r_sense from every target
    /// for the whole (short) horizon.
    fn quiet_seed(setup: &EnvSetup) -> u64 {
        for seed in 0..200 {
            let mut env = setup.build();
            env.reset(seed);
            let v = env.view().vehicle.pos();
            if env
                .view()
                .targets
                .iter()
                .all(|t| t.true_pos.dist(v) > 3.0)
            {
                return seed;
            }
        }
        panic!("no quiet seed found");
    }

    #[test]
    fn stationary_policy_growth_and_closed_form() {
        let s = setup(400);
        let seed = quiet_seed(&s);
        let mut env = s.build();
        let rec = run_trial(&mut Stationary, &mut env, seed, None);
        assert_eq!(rec.elapsed, 400);
        assert_eq!(rec.sigma_series.len(), 400);
        assert!(rec.visit_events.is_empty());
        // Nondecreasing with slope lambda.
        for t in 1..rec.sigma_series.len() {
            for i in 0..3 {
                let d = rec.sigma_series[t][i] - rec.sigma_series[t - 1][i];
                assert!((d - 0.001).abs() < 1e-12);
            }
        }
        // Closed-form mean.
        for i in 0..3 {
            let sigma0 = rec.sigma_series[0][i];
            let expected = stationary_sigma_mean(sigma0, 0.001, 400);
            assert!((rec.time_mean_sigma(i) - expected).abs() < 1e-9);
        }
        // Censored time-to-first-visit.
        let summary = aggregate(&[rec]);
        assert_eq!(summary.time_mean, 400.0);
        assert_eq!(summary.time_std, 0.0);
    }

    #[test]
    fn trials_are_deterministic() {
        let s = setup(300);
        let a = run_trials(&s, || Box::new(Bug2Policy::default()), 5, 3);
        let b = run_trials(&s, || Box::new(Bug2Policy::default()), 5, 3);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.sigma_series, y.sigma_series);
            assert_eq!(x.visit_events, y.visit_events);
        }
    }

    #[test]
    fn visit_events_have_zero_sigma_in_series() {
        let s = setup(2000);
        let records = run_trials(&s, || Box::new(Bug2Policy::default()), 42, 4);
        let mut seen = 0;
        for r in &records {
            for &(step, i) in &r.visit_events {
                if step < r.sigma_series.len() {
                    assert_eq!(r.sigma_series[step][i], 0.0);
                    seen += 1;
                }
            }
        }
        assert!(seen > 0, "bug2 should visit at least one target");
    }

    #[test]
    fn aggregate_constant_series() {
        let rec = TrialRecord {
            sigma_series: vec![vec![2.0]; 10],
            visit_events: vec![],
            collision_step: None,
            elapsed: 10,
            horizon: 10,
            n_targets: 1,
            seed: 0,
        };
        let s = aggregate(&[rec]);
        assert_eq!(s.per_target_sigma_mean[0], 2.0);
        assert_eq!(s.mean_sigma, 2.0);
    }

    #[test]
    fn aggregate_population_std_of_first_visits() {
        let make = |visit_step: usize| TrialRecord {
            sigma_series: vec![vec![0.5]; 400],
            visit_events: vec![(visit_step, 0)],
            collision_step: None,
            elapsed: 400,
            horizon: 400,
            n_targets: 1,
            seed: 0,
        };
        let s = aggregate(&[make(100), make(300)]);
        assert_eq!(s.time_mean, 200.0);
        assert_eq!(s.time_std, 100.0);
    }

    #[test]
    fn sigma_mean_matches_brute_force_recompute() {
        let s = setup(500);
        let records = run_trials(&s, || Box::new(Bug2Policy::default()), 11, 3);
        let summary = aggregate(&records);
        for i in 0..3 {
            let brute: f64 = records
                .iter()
                .map(|r| {
                    r.sigma_series.iter().map(|row| row[i]).sum::<f64>()
                        / r.sigma_series.len() as f64
                })
                .sum::<f64>()
                / records.len() as f64;
            assert_eq!(summary.per_target_sigma_mean[i], brute);
        }
    }

    #[test]
    fn teleporting_oracle_keeps_uncertainty_tiny() {
        let s = setup(2000);
        let mut env = s.build();
        env.reset(3);
        let mut sums = vec![0.0; 3];
        let mut steps = 0;
        let mut which = 0;
        while !env.is_terminated() {
            // Jump onto a target, rotating through all of them.
            let tgt = env.view().targets[which].true_pos;
            which = (which + 1) % 3;
            env.set_vehicle_pose(tgt.x, tgt.y, 0.0);
            let r = env.step([0.0, 0.0], Mode::Eval);
            for (acc, s) in sums.iter_mut().zip(&r.info.per_target_sigma) {
                *acc += s;
            }
            steps += 1;
        }
        let lambda_t = 0.001 * 2000.0;
        for acc in sums {
            let mean = acc / steps as f64;
            assert!(
                mean < lambda_t / 10.0,
                "oracle mean sigma {mean} not << {lambda_t}"
            );
        }
    }

    #[test]
    fn exports_are_deterministic_and_counted() {
        let s = setup(300);
        let records = run_trials(&s, || Box::new(Bug2Policy::default()), 21, 3);
        let summary = aggregate(&records);
        let dir = tempfile::tempdir().unwrap();
        let p_sum = dir.path().join("summary.csv");
        let p_ts = dir.path().join("timeseries.csv");
        write_summary_csv(
            &p_sum,
            &[SummaryRow {
                policy: "bug2",
                env: "env1",
                domain: "air",
                summary: &summary,
            }],
        )
        .unwrap();
        write_timeseries_csv(&p_ts, &records).unwrap();
        let sum_text = fs::read_to_string(&p_sum).unwrap();
        assert_eq!(sum_text.lines().count(), 2, "header plus one row");
        let ts_lines = fs::read_to_string(&p_ts).unwrap().lines().count();
        let expected: usize = records.iter().map(|r| r.elapsed).sum();
        assert_eq!(ts_lines, expected + 1);
        // Byte-identical re-export.
        let p_ts2 = dir.path().join("timeseries2.csv");
        write_timeseries_csv(&p_ts2, &records).unwrap();
        assert_eq!(fs::read(&p_ts).unwrap(), fs::read(&p_ts2).unwrap());
    }
}
