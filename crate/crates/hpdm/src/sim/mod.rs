//! Deterministic 2D persistent-monitoring environment.
//!
//! A single vehicle moves through a bounded square arena under
//! domain-dependent first-order dynamics (air vs. water), senses its
//! surroundings with a ray-cast range sensor, and must repeatedly visit
//! mobile targets whose scalar uncertainty grows while they are
//! unobserved and resets to zero on a visit.
//!
//! All randomness flows from a per-instance seeded generator: the same
//! seed and action sequence reproduce a trajectory bit for bit.

mod env;
mod sensor;
mod target;
mod vehicle;

pub use env::{
    build_observation, compute_reward, observation_width, update_uncertainty, Env, EnvSetup, Mode,
    MonitoringParams, Observation, RewardParams, StepInfo, StepResult, WorldView,
};
pub use sensor::{
    cast_rays, cast_rays_with, ArenaSpec, BeamTable, EnvId, Obstacle, SensorKind, SensorSpec,
    OBSERVATION_ARC,
};
pub use target::{
    curve_period_arc_length, lissajous_position, step_targets, TargetSpec, TargetState,
};
pub use vehicle::{ou_step, step_vehicle, wrap_angle, Domain, DomainParams, OuParams, VehicleState};

/// Planar point / vector in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}
