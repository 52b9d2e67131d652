//! Command-line front end.
//!
//! Subcommands mirror the experiment protocol: `train` runs the
//! multi-worker trainer in the air domain, `eval` scores one policy in
//! one environment/domain cell, `transfer` evaluates an air-trained
//! checkpoint in water with frozen (hash-verified) parameters, and
//! `compare` scores the learned policy against the Bug2 baseline over
//! matched seeds.

mod config;

pub use config::{ConfigError, RunConfig};

use crate::dsac::DsacAgent;
use crate::eval::{
    aggregate, run_trial, run_trials, write_intervals_csv, write_summary_csv,
    write_timeseries_csv, write_trace_csv, Bug2Policy, DsacPolicy, EvalSummary, Policy,
    SummaryRow, TraceRow,
};
use crate::parallel::run_training;
use crate::sim::Domain;
use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};
use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "hpdm",
    about = "Cross-domain persistent monitoring: train, evaluate, transfer, compare",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Run-config file (key=value lines); flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Environment: env1 (open tank) or env2 (four cylinders).
    #[arg(long)]
    env: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Run seed (overrides train.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Episode budget (overrides train.episodes).
    #[arg(long)]
    episodes: Option<usize>,
    /// Worker count (overrides train.workers).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Policy to evaluate: dsac or bug2.
    #[arg(long)]
    policy: String,
    /// Checkpoint path (required for dsac).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Domain to evaluate in: air or water.
    #[arg(long)]
    domain: Option<String>,
    /// Trial count (overrides eval.trials).
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed for the trial sequence (overrides eval.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Also export the first trial's trajectory trace.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct TransferArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Air-trained checkpoint to deploy in water, unchanged.
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Checkpoint for the learned policy.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Domain to compare in: air or water.
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train the distributional soft actor-critic in the air domain.
    Train(TrainArgs),
    /// Evaluate one policy in one environment/domain cell.
    Eval(EvalArgs),
    /// Zero-shot transfer: evaluate an air-trained checkpoint in water.
    Transfer(TransferArgs),
    /// Learned policy vs. Bug2 baseline on matched seeds.
    Compare(CompareArgs),
}

/// Parse and run. Returns the process exit status.
pub fn dispatch(args: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own help/version output.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.cmd {
        Cmd::Train(a) => run_train(a),
        Cmd::Eval(a) => run_eval(a),
        Cmd::Transfer(a) => run_transfer(a),
        Cmd::Compare(a) => run_compare(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, Box<dyn Error>> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(env) = &common.env {
        cfg.set("env.id", env)?;
    }
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| format!("--set expects key=value, got `{kv}`"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(cfg)
}

fn parse_domain(flag: &Option<String>) -> Result<Domain, Box<dyn Error>> {
    match flag.as_deref() {
        None => Ok(Domain::Air),
        Some(s) => Ok(s.parse::<Domain>()?),
    }
}

fn sha256_hex(path: &Path) -> Result<String, Box<dyn Error>> {
    let bytes = fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn run_train(args: TrainArgs) -> Result<(), Box<dyn Error>> {
    let mut cfg = load_config(&args.common)?;
    if let Some(seed) = args.seed {
        cfg.set("train.seed", &seed.to_string())?;
    }
    if let Some(eps) = args.episodes {
        cfg.set("train.episodes", &eps.to_string())?;
    }
    if let Some(w) = args.workers {
        cfg.set("train.workers", &w.to_string())?;
    }
    let out = &args.common.out;
    fs::create_dir_all(out)?;

    // Training always happens in the air domain; water is reached later
    // by zero-shot transfer.
    let setup = cfg.env_setup(Domain::Air);
    let run_cfg = cfg.train_run_config();
    let log_path = out.join("train_log.csv");
    eprintln!(
        "training: {} / air, {} episodes, {} workers, seed {}",
        setup.env_id.as_str(),
        run_cfg.episodes_total,
        run_cfg.workers,
        run_cfg.seed
    );
    let result = run_training(&run_cfg, &setup, cfg.dsac_config(), Some(&log_path))?;

    let ckpt_path = out.join("checkpoint");
    result.agent.save(
        &ckpt_path,
        &[
            ("domain".into(), "air".into()),
            ("env".into(), setup.env_id.as_str().into()),
            ("episodes".into(), result.episodes_completed.to_string()),
        ],
    )?;

    let manifest = cfg.manifest_text(&[
        "hpdm run manifest; re-run with: hpdm train --config manifest.txt --out <dir>".into(),
        "worker seeds are chacha streams (1000 + worker index) of train.seed".into(),
        format!("wall_clock_secs={:.1}", result.wall_secs),
        format!("env_steps={}", result.inserted),
        format!("grad_steps={}", result.grad_steps),
        format!("episodes={}", result.episodes_completed),
    ]);
    write_atomic(&out.join("manifest.txt"), manifest.as_bytes())?;

    eprintln!(
        "done: {} episodes, {} env steps, {} gradient steps in {:.1} s",
        result.episodes_completed, result.inserted, result.grad_steps, result.wall_secs
    );
    eprintln!("wrote {}", ckpt_path.display());
    Ok(())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}

/// Load a dsac checkpoint and fail early on observation-width mismatch.
fn load_policy_checkpoint(
    path: &Path,
    expected_obs_width: usize,
) -> Result<DsacAgent, Box<dyn Error>> {
    let (agent, _) = DsacAgent::load(path)?;
    if agent.cfg.obs_width != expected_obs_width {
        return Err(format!(
            "checkpoint expects observations of width {}, environment produces {}",
            agent.cfg.obs_width, expected_obs_width
        )
        .into());
    }
    Ok(agent)
}

struct CellOutcome {
    records_summary: EvalSummary,
    timeseries: PathBuf,
}

/// Evaluate one policy in one cell and write its exports.
fn eval_cell(
    cfg: &RunConfig,
    domain: Domain,
    policy_kind: &str,
    checkpoint: Option<&Path>,
    trials: usize,
    seed: u64,
    out: &Path,
    trace: bool,
) -> Result<CellOutcome, Box<dyn Error>> {
    let setup = cfg.env_setup(domain);
    let make: Box<dyn Fn() -> Box<dyn Policy> + Sync> = match policy_kind {
        "dsac" => {
            let path = checkpoint.ok_or("--checkpoint is required for the dsac policy")?;
            let agent = load_policy_checkpoint(path, setup.obs_width())?;
            let actor = agent.actor;
            Box::new(move || {
                Box::new(DsacPolicy {
                    actor: actor.clone(),
                })
            })
        }
        "bug2" => Box::new(|| Box::new(Bug2Policy::default())),
        other => return Err(format!("unknown policy `{other}` (expected dsac|bug2)").into()),
    };

    let records = run_trials(&setup, &make, seed, trials);
    let summary = aggregate(&records);
    let ts_path = out.join(format!("timeseries_{policy_kind}.csv"));
    write_timeseries_csv(&ts_path, &records)?;
    write_intervals_csv(&out.join(format!("intervals_{policy_kind}.csv")), &records)?;
    if trace {
        let mut rows: Vec<TraceRow> = Vec::new();
        let mut env = setup.build();
        let mut policy = make();
        run_trial(policy.as_mut(), &mut env, seed, Some(&mut rows));
        write_trace_csv(&out.join(format!("trace_{policy_kind}.csv")), &rows)?;
    }
    Ok(CellOutcome {
        records_summary: summary,
        timeseries: ts_path,
    })
}

fn print_summary(policy: &str, env: &str, domain: &str, s: &EvalSummary) {
    let sigmas: Vec<String> = s
        .per_target_sigma_mean
        .iter()
        .map(|v| format!("{v:.4}"))
        .collect();
    eprintln!(
        "{policy:>5} {env}/{domain}: mean sigma {:.4} (per target {}), first visit {:.0} +- {:.0} steps, collisions {:.0}%",
        s.mean_sigma,
        sigmas.join(" "),
        s.time_mean,
        s.time_std,
        100.0 * s.collision_rate
    );
}

fn run_eval(args: EvalArgs) -> Result<(), Box<dyn Error>> {
    let cfg = load_config(&args.common)?;
    let domain = parse_domain(&args.domain)?;
    let trials = args.trials.unwrap_or(cfg.eval.trials);
    let seed = args.seed.unwrap_or(cfg.eval.seed);
    let out = &args.common.out;
    fs::create_dir_all(out)?;
    let outcome = eval_cell(
        &cfg,
        domain,
        &args.policy,
        args.checkpoint.as_deref(),
        trials,
        seed,
        out,
        args.trace,
    )?;
    write_summary_csv(
        &out.join("summary.csv"),
        &[SummaryRow {
            policy: &args.policy,
            env: cfg.env_id.as_str(),
            domain: domain.as_str(),
            summary: &outcome.records_summary,
        }],
    )?;
    print_summary(
        &args.policy,
        cfg.env_id.as_str(),
        domain.as_str(),
        &outcome.records_summary,
    );
    eprintln!("wrote {}", outcome.timeseries.display());
    Ok(())
}

fn run_transfer(args: TransferArgs) -> Result<(), Box<dyn Error>> {
    let cfg = load_config(&args.common)?;
    let trials = args.trials.unwrap_or(cfg.eval.trials);
    let seed = args.seed.unwrap_or(cfg.eval.seed);
    let out = &args.common.out;
    fs::create_dir_all(out)?;

    let hash_before = sha256_hex(&args.checkpoint)?;
    let outcome = eval_cell(
        &cfg,
        Domain::Water,
        "dsac",
        Some(&args.checkpoint),
        trials,
        seed,
        out,
        args.trace,
    )?;
    let hash_after = sha256_hex(&args.checkpoint)?;
    if hash_before != hash_after {
        return Err("checkpoint file changed during transfer evaluation".into());
    }
    write_summary_csv(
        &out.join("summary.csv"),
        &[SummaryRow {
            policy: "dsac",
            env: cfg.env_id.as_str(),
            domain: "water",
            summary: &outcome.records_summary,
        }],
    )?;
    print_summary(
        "dsac",
        cfg.env_id.as_str(),
        "water",
        &outcome.records_summary,
    );
    eprintln!("checkpoint hash unchanged (sha256 {hash_before})");
    Ok(())
}

fn run_compare(args: CompareArgs) -> Result<(), Box<dyn Error>> {
    let cfg = load_config(&args.common)?;
    let domain = parse_domain(&args.domain)?;
    let trials = args.trials.unwrap_or(cfg.eval.trials);
    let seed = args.seed.unwrap_or(cfg.eval.seed);
    let out = &args.common.out;
    fs::create_dir_all(out)?;

    // Matched seeds: both policies face the identical trial sequence.
    let dsac = eval_cell(
        &cfg,
        domain,
        "dsac",
        Some(&args.checkpoint),
        trials,
        seed,
        out,
        false,
    )?;
    let bug2 = eval_cell(&cfg, domain, "bug2", None, trials, seed, out, false)?;
    write_summary_csv(
        &out.join("summary.csv"),
        &[
            SummaryRow {
                policy: "dsac",
                env: cfg.env_id.as_str(),
                domain: domain.as_str(),
                summary: &dsac.records_summary,
            },
            SummaryRow {
                policy: "bug2",
                env: cfg.env_id.as_str(),
                domain: domain.as_str(),
                summary: &bug2.records_summary,
            },
        ],
    )?;
    print_summary(
        "dsac",
        cfg.env_id.as_str(),
        domain.as_str(),
        &dsac.records_summary,
    );
    print_summary(
        "bug2",
        cfg.env_id.as_str(),
        domain.as_str(),
        &bug2.records_summary,
    );
    Ok(())
}
