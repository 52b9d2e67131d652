//! Multi-worker training: K environment workers feed one shared replay
//! buffer through a bounded channel; a single learner owns the networks,
//! performs one gradient step per collected transition once past warmup,
//! and periodically publishes an immutable actor snapshot for the
//! workers to act with.
//!
//! With one worker the run executes on a single thread in strict
//! collect/update lockstep and is bit-reproducible from its seed. With
//! several workers, cross-thread scheduling makes the interleaving
//! nondeterministic; the accounting invariants (no transition lost or
//! duplicated, one update per transition past warmup) still hold.

use crate::dsac::{Diagnostics, DsacAgent, DsacConfig, ReplayBuffer, Transition};
use crate::sim::{EnvSetup, Mode};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::time::Instant;

// Distinct ChaCha stream ids per role, all derived from the run seed.
const LEARNER_STREAM: u64 = 1;
const WORKER_STREAM_BASE: u64 = 1000;

#[derive(Debug, Clone)]
pub struct TrainRunConfig {
    /// Number of environment workers (K).
    pub workers: usize,
    /// Total episodes across all workers before the run stops.
    pub episodes_total: usize,
    /// Gradient steps between actor snapshot broadcasts.
    pub snapshot_interval: usize,
    /// Transitions collected before the first gradient step.
    pub warmup: usize,
    pub replay_capacity: usize,
    pub seed: u64,
}

impl Default for TrainRunConfig {
    fn default() -> Self {
        Self {
            workers: 5,
            episodes_total: 2500,
            snapshot_interval: 100,
            warmup: 5000,
            replay_capacity: 300_000,
            seed: 0,
        }
    }
}

impl TrainRunConfig {
    pub fn validate(&self, batch_size: usize) {
        assert!(self.workers >= 1, "need at least one worker");
        assert!(self.episodes_total >= 1, "need at least one episode");
        assert!(self.snapshot_interval >= 1);
        assert!(
            self.warmup >= batch_size,
            "warmup ({}) must cover at least one minibatch ({batch_size})",
            self.warmup
        );
        assert!(self.replay_capacity >= self.warmup);
    }
}

/// One training-log record, written when an episode completes.
#[derive(Debug, Clone, Copy)]
pub struct LogRow {
    pub update_index: u64,
    pub critic_loss: f64,
    pub actor_loss: f64,
    pub alpha: f64,
    pub mean_q: f64,
    pub episode_return: f64,
    pub episode_length: usize,
}

pub fn log_csv_header() -> &'static str {
    "update_index,critic_loss,actor_loss,alpha,mean_q,episode_return,episode_length"
}

impl LogRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{}",
            self.update_index,
            self.critic_loss,
            self.actor_loss,
            self.alpha,
            self.mean_q,
            self.episode_return,
            self.episode_length
        )
    }
}

pub struct TrainResult {
    pub agent: DsacAgent,
    pub log_rows: Vec<LogRow>,
    pub episodes_completed: usize,
    /// Transitions emitted by workers, per worker.
    pub worker_pushed: Vec<u64>,
    /// Transitions inserted into the replay buffer by the learner.
    pub inserted: u64,
    pub grad_steps: u64,
    pub wall_secs: f64,
}

struct WorkerMsg {
    transition: Transition,
    /// Set on the final transition of an episode.
    episode_end: Option<(f64, usize)>,
}

/// Streams log rows to `<path>.partial`, renamed to `path` on success so
/// an aborted run still leaves the partial log behind.
struct LogSink {
    file: Option<(PathBuf, std::io::BufWriter<fs::File>)>,
    rows: Vec<LogRow>,
}

impl LogSink {
    fn new(path: Option<&Path>) -> std::io::Result<Self> {
        let file = match path {
            Some(p) => {
                let partial = partial_path(p);
                let mut w = std::io::BufWriter::new(fs::File::create(&partial)?);
                writeln!(w, "{}", log_csv_header())?;
                Some((p.to_path_buf(), w))
            }
            None => None,
        };
        Ok(Self {
            file,
            rows: Vec::new(),
        })
    }

    fn push(&mut self, row: LogRow) -> std::io::Result<()> {
        if let Some((_, w)) = self.file.as_mut() {
            writeln!(w, "{}", row.to_csv())?;
            w.flush()?;
        }
        self.rows.push(row);
        Ok(())
    }

    fn finish(self) -> std::io::Result<Vec<LogRow>> {
        if let Some((path, w)) = self.file {
            w.into_inner()?.sync_all()?;
            fs::rename(partial_path(&path), path)?;
        }
        Ok(self.rows)
    }
}

fn partial_path(p: &Path) -> PathBuf {
    let mut name = p.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    p.with_file_name(name)
}

/// Train a fresh agent on `setup` until `cfg.episodes_total` episodes
/// have been collected. Returns the trained agent plus accounting; the
/// caller owns checkpoint/manifest writing.
///
/// `agent_cfg.seed` should normally equal `cfg.seed`; the two are kept
/// separate so tests can vary initialization independently.
pub fn run_training(
    cfg: &TrainRunConfig,
    setup: &EnvSetup,
    agent_cfg: DsacConfig,
    log_path: Option<&Path>,
) -> std::io::Result<TrainResult> {
    cfg.validate(agent_cfg.batch_size);
    assert_eq!(
        agent_cfg.obs_width,
        setup.obs_width(),
        "agent observation width must match the environment"
    );
    let started = Instant::now();
    let result = if cfg.workers == 1 {
        run_serial(cfg, setup, agent_cfg, log_path)?
    } else {
        run_threaded(cfg, setup, agent_cfg, log_path)?
    };
    Ok(TrainResult {
        wall_secs: started.elapsed().as_secs_f64(),
        ..result
    })
}

/// Terminal flag stored in the replay buffer: reaching the horizon is a
/// time limit, not a real terminal, so it keeps its bootstrap term.
fn replay_done(collided: bool, resets: usize) -> bool {
    collided || resets >= 1
}

fn run_serial(
    cfg: &TrainRunConfig,
    setup: &EnvSetup,
    agent_cfg: DsacConfig,
    log_path: Option<&Path>,
) -> std::io::Result<TrainResult> {
    let act_dim = agent_cfg.action_dim();
    let mut agent = DsacAgent::new(agent_cfg);
    let mut buffer = ReplayBuffer::new(cfg.replay_capacity, setup.obs_width(), act_dim);
    let mut env = setup.build();
    let mut learner_rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    learner_rng.set_stream(LEARNER_STREAM);
    let mut worker_rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    worker_rng.set_stream(WORKER_STREAM_BASE);
    let mut snapshot = agent.actor.clone();
    let mut sink = LogSink::new(log_path)?;
    let mut last_diag = Diagnostics {
        critic_loss: f64::NAN,
        actor_loss: f64::NAN,
        alpha: agent.alpha(),
        mean_q: f64::NAN,
    };
    let mut collected: u64 = 0;
    let mut grad_steps: u64 = 0;
    let mut episodes = 0;

    while episodes < cfg.episodes_total {
        let ep_seed = worker_rng.next_u64();
        let mut obs = env.reset(ep_seed);
        let mut ep_return = 0.0;
        let mut ep_len = 0;
        loop {
            let smp = snapshot.sample(obs.as_slice(), &mut worker_rng);
            let action = [smp.action[0], smp.action[1]];
            let r = env.step(action, Mode::Train);
            buffer.push(&Transition {
                obs: std::mem::take(&mut obs.data),
                action: smp.action,
                reward: r.reward,
                next_obs: r.obs.data.clone(),
                done: replay_done(r.info.collided, r.info.resets_this_step),
            });
            collected += 1;
            if collected > cfg.warmup as u64 {
                last_diag = agent.train_step(&buffer, &mut learner_rng);
                grad_steps += 1;
                if grad_steps % cfg.snapshot_interval as u64 == 0 {
                    snapshot = agent.actor.clone();
                }
            }
            ep_return += r.reward;
            ep_len += 1;
            obs = r.obs;
            if r.terminated {
                break;
            }
        }
        episodes += 1;
        sink.push(LogRow {
            update_index: grad_steps,
            critic_loss: last_diag.critic_loss,
            actor_loss: last_diag.actor_loss,
            alpha: last_diag.alpha,
            mean_q: last_diag.mean_q,
            episode_return: ep_return,
            episode_length: ep_len,
        })?;
    }

    let inserted = buffer.total_pushed();
    Ok(TrainResult {
        agent,
        log_rows: sink.finish()?,
        episodes_completed: episodes,
        worker_pushed: vec![collected],
        inserted,
        grad_steps,
        wall_secs: 0.0,
    })
}

fn run_threaded(
    cfg: &TrainRunConfig,
    setup: &EnvSetup,
    agent_cfg: DsacConfig,
    log_path: Option<&Path>,
) -> std::io::Result<TrainResult> {
    let act_dim = agent_cfg.action_dim();
    let mut agent = DsacAgent::new(agent_cfg);
    let mut buffer = ReplayBuffer::new(cfg.replay_capacity, setup.obs_width(), act_dim);
    let snapshot = Arc::new(Mutex::new(Arc::new(agent.actor.clone())));
    let episodes_started = AtomicUsize::new(0);
    let mut sink = LogSink::new(log_path)?;
    let (tx, rx) = mpsc::sync_channel::<WorkerMsg>(cfg.workers * 2);

    let mut learner_rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    learner_rng.set_stream(LEARNER_STREAM);

    let mut episodes = 0usize;
    let mut grad_steps = 0u64;
    let mut worker_pushed = Vec::new();
    let mut io_err: Option<std::io::Error> = None;

    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..cfg.workers {
            let tx = tx.clone();
            let snapshot = Arc::clone(&snapshot);
            let episodes_started = &episodes_started;
            let setup = setup.clone();
            let episodes_total = cfg.episodes_total;
            let seed = cfg.seed;
            handles.push(scope.spawn(move || -> u64 {
                let mut env = setup.build();
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                rng.set_stream(WORKER_STREAM_BASE + w as u64);
                let mut pushed = 0u64;
                loop {
                    if episodes_started.fetch_add(1, Ordering::SeqCst) >= episodes_total {
                        break;
                    }
                    let ep_seed = rng.next_u64();
                    let mut obs = env.reset(ep_seed);
                    let mut ep_return = 0.0;
                    let mut ep_len = 0usize;
                    loop {
                        let actor = Arc::clone(&snapshot.lock().unwrap());
                        let smp = actor.sample(obs.as_slice(), &mut rng);
                        let action = [smp.action[0], smp.action[1]];
                        let r = env.step(action, Mode::Train);
                        ep_return += r.reward;
                        ep_len += 1;
                        let msg = WorkerMsg {
                            transition: Transition {
                                obs: std::mem::take(&mut obs.data),
                                action: smp.action,
                                reward: r.reward,
                                next_obs: r.obs.data.clone(),
                                done: replay_done(r.info.collided, r.info.resets_this_step),
                            },
                            episode_end: r
                                .terminated
                                .then_some((ep_return, ep_len)),
                        };
                        pushed += 1;
                        if tx.send(msg).is_err() {
                            return pushed; // learner is gone
                        }
                        obs = r.obs;
                        if r.terminated {
                            break;
                        }
                    }
                }
                pushed
            }));
        }
        drop(tx);

        // Learner loop on this thread: insert, update, publish.
        let mut last_diag = Diagnostics {
            critic_loss: f64::NAN,
            actor_loss: f64::NAN,
            alpha: agent.alpha(),
            mean_q: f64::NAN,
        };
        while let Ok(msg) = rx.recv() {
            buffer.push(&msg.transition);
            if buffer.total_pushed() > cfg.warmup as u64 {
                last_diag = agent.train_step(&buffer, &mut learner_rng);
                grad_steps += 1;
                if grad_steps % cfg.snapshot_interval as u64 == 0 {
                    *snapshot.lock().unwrap() = Arc::new(agent.actor.clone());
                }
            }
            if let Some((ep_return, ep_len)) = msg.episode_end {
                episodes += 1;
                let row = LogRow {
                    update_index: grad_steps,
                    critic_loss: last_diag.critic_loss,
                    actor_loss: last_diag.actor_loss,
                    alpha: last_diag.alpha,
                    mean_q: last_diag.mean_q,
                    episode_return: ep_return,
                    episode_length: ep_len,
                };
                if let Err(e) = sink.push(row) {
                    io_err = Some(e);
                    break;
                }
            }
        }

        worker_pushed = handles.into_iter().map(|h| h.join().unwrap()).collect();
    });

    if let Some(e) = io_err {
        return Err(e);
    }
    let inserted = buffer.total_pushed();
    Ok(TrainResult {
        agent,
        log_rows: sink.finish()?,
        episodes_completed: episodes,
        worker_pushed,
        inserted,
        grad_steps,
        wall_secs: 0.0,
    })
}
