//! Desk-scale cross-domain persistent monitoring.
//!
//! One hybrid vehicle patrols mobile targets in a bounded 2D arena,
//! first in a fast low-drag "air" domain with a wide lidar, then —
//! without retraining — in a sluggish "water" domain with a narrow
//! sonar. The crate bundles:
//!
//! - [`sim`]: a seeded, fully deterministic monitoring environment with
//!   domain-shifted dynamics, ray-cast range sensing, Lissajous targets,
//!   and the uncertainty/reward bookkeeping;
//! - [`nn`]: a minimal dense-network core (forward/backward, Adam,
//!   checkpoints) sized for CPU training;
//! - [`dsac`]: a distributional soft actor-critic with twin quantile
//!   critics, automatic temperature, and a uniform replay buffer;
//! - [`baseline`]: a Bug2-style reactive policy over the same inputs;
//! - [`parallel`]: multi-worker training with a shared replay buffer and
//!   a single central learner;
//! - [`eval`]: trial runner, metric aggregation, and CSV export;
//! - [`cli`]: the `hpdm` command-line front end and its run-config file.
//!
//! See the crate examples for end-to-end usage; `hpdm --help` covers the
//! command-line interface.

pub mod baseline;
pub mod cli;
pub mod dsac;
pub mod eval;
pub mod nn;
pub mod parallel;
pub mod sim;
