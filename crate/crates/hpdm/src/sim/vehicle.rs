//! Vehicle dynamics: first-order velocity lag on top of unicycle
//! kinematics, plus the Ornstein-Uhlenbeck drift disturbance.

use super::{SensorSpec, Vec2};
use std::f64::consts::PI;

/// Medium the vehicle currently operates in. The two domains share state
/// and action layouts but differ in dynamics and sensing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Air,
    Water,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Air => "air",
            Domain::Water => "water",
        }
    }
}

impl std::str::FromStr for Domain {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "air" => Ok(Domain::Air),
            "water" => Ok(Domain::Water),
            other => Err(format!("unknown domain `{other}` (expected air|water)")),
        }
    }
}

/// Ornstein-Uhlenbeck disturbance parameters (wind / current drift).
#[derive(Debug, Clone, Copy)]
pub struct OuParams {
    /// Mean-reversion rate, 1/s.
    pub theta: f64,
    /// Mean drift the process reverts to, m/s.
    pub mu: Vec2,
    /// Noise scale, m/s per sqrt(s).
    pub sigma: f64,
    pub enabled: bool,
}

impl OuParams {
    pub fn validate(&self) {
        assert!(self.theta >= 0.0, "OU theta must be >= 0");
        assert!(self.sigma >= 0.0, "OU sigma must be >= 0");
    }
}

/// Closed-loop dynamics parameters for one domain.
#[derive(Debug, Clone, Copy)]
pub struct DomainParams {
    pub domain: Domain,
    /// Control step, seconds.
    pub dt: f64,
    /// Linear-velocity lag time constant, seconds.
    pub tau_v: f64,
    /// Angular-rate lag time constant, seconds.
    pub tau_w: f64,
    /// Maximum commanded/realized forward speed, m/s.
    pub v_max: f64,
    /// Maximum commanded/realized turn rate, rad/s.
    pub w_max: f64,
    pub ou: OuParams,
    pub sensor: SensorSpec,
}

impl DomainParams {
    /// Fast low-drag dynamics with the wide-angle long-range sensor.
    pub fn air(dt: f64, sectors: usize) -> Self {
        Self {
            domain: Domain::Air,
            dt,
            tau_v: 0.3,
            tau_w: 0.2,
            v_max: 1.0,
            w_max: 1.5,
            ou: OuParams {
                theta: 0.5,
                mu: Vec2::ZERO,
                sigma: 0.05,
                enabled: true,
            },
            sensor: SensorSpec::lidar(sectors),
        }
    }

    /// Sluggish high-drag dynamics with the narrow forward sonar.
    pub fn water(dt: f64, sectors: usize) -> Self {
        Self {
            domain: Domain::Water,
            dt,
            tau_v: 1.2,
            tau_w: 0.8,
            v_max: 0.5,
            w_max: 0.8,
            ou: OuParams {
                theta: 0.5,
                mu: Vec2::ZERO,
                sigma: 0.02,
                enabled: true,
            },
            sensor: SensorSpec::sonar(sectors),
        }
    }

    pub fn validate(&self) {
        assert!(self.dt > 0.0, "dt must be positive");
        assert!(self.tau_v > 0.0 && self.tau_w > 0.0, "lag constants must be positive");
        assert!(self.v_max > 0.0 && self.w_max > 0.0, "velocity bounds must be positive");
        self.ou.validate();
        self.sensor.validate();
    }
}

/// Planar pose plus realized (lagged) velocities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Heading in (-pi, pi].
    pub heading: f64,
    /// Realized forward speed, m/s.
    pub v: f64,
    /// Realized turn rate, rad/s.
    pub w: f64,
}

impl VehicleState {
    pub fn pos(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Wrap an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// One control step of the vehicle.
///
/// Commands are clamped to `[0, v_max] x [-w_max, w_max]`, realized
/// velocities follow a first-order lag toward the commands, and the pose
/// integrates unicycle kinematics with the additive drift disturbance.
/// The new turn rate moves the heading; the position uses the new speed
/// along the old heading.
pub fn step_vehicle(
    state: &VehicleState,
    action: [f64; 2],
    dom: &DomainParams,
    disturbance: Vec2,
) -> VehicleState {
    let v_cmd = action[0].clamp(0.0, dom.v_max);
    let w_cmd = action[1].clamp(-dom.w_max, dom.w_max);
    let v = (state.v + dom.dt / dom.tau_v * (v_cmd - state.v)).clamp(0.0, dom.v_max);
    let w = (state.w + dom.dt / dom.tau_w * (w_cmd - state.w)).clamp(-dom.w_max, dom.w_max);
    VehicleState {
        x: state.x + dom.dt * (v * state.heading.cos() + disturbance.x),
        y: state.y + dom.dt * (v * state.heading.sin() + disturbance.y),
        heading: wrap_angle(state.heading + dom.dt * w),
        v,
        w,
    }
}

/// One Euler-Maruyama step of the OU drift process:
/// `d' = d + theta * (mu - d) * dt + sigma * sqrt(dt) * noise`.
pub fn ou_step(d: Vec2, p: &OuParams, dt: f64, noise: Vec2) -> Vec2 {
    let scale = p.sigma * dt.sqrt();
    Vec2::new(
        d.x + p.theta * (p.mu.x - d.x) * dt + scale * noise.x,
        d.y + p.theta * (p.mu.y - d.y) * dt + scale * noise.y,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn dom() -> DomainParams {
        let mut d = DomainParams::air(0.05, 36);
        d.ou.enabled = false;
        d
    }

    #[test]
    fn velocity_lag_first_step() {
        let mut d = dom();
        d.tau_v = 0.5;
        let s = VehicleState {
            x: 0.0,
            y: 0.0,
            heading: 0.0,
            v: 0.0,
            w: 0.0,
        };
        let s2 = step_vehicle(&s, [1.0, 0.0], &d, Vec2::ZERO);
        assert!((s2.v - 0.1).abs() < 1e-12);
    }

    #[test]
    fn zero_everything_is_a_fixed_point() {
        let d = dom();
        let s = VehicleState {
            x: 1.0,
            y: -2.0,
            heading: 0.5,
            v: 0.0,
            w: 0.0,
        };
        let s2 = step_vehicle(&s, [0.0, 0.0], &d, Vec2::ZERO);
        assert_eq!(s, s2);
    }

    #[test]
    fn heading_wraps_past_pi() {
        let mut d = dom();
        // Huge tau so w' stays at the preloaded value of 1.0 when the
        // command is also 1.0.
        d.tau_w = 1e9;
        let s = VehicleState {
            x: 0.0,
            y: 0.0,
            heading: 3.10,
            v: 0.0,
            w: 1.0,
        };
        let s2 = step_vehicle(&s, [0.0, 1.0], &d, Vec2::ZERO);
        let expected = 3.15 - 2.0 * PI;
        assert!(
            (s2.heading - expected).abs() < 1e-9,
            "heading {} vs {}",
            s2.heading,
            expected
        );
    }

    #[test]
    fn lag_converges_within_one_percent_after_ten_tau() {
        let d = dom();
        let mut s = VehicleState {
            x: 0.0,
            y: 0.0,
            heading: 0.0,
            v: 0.0,
            w: 0.0,
        };
        let steps = (10.0 * d.tau_v / d.dt).ceil() as usize;
        for _ in 0..steps {
            s = step_vehicle(&s, [d.v_max, 0.0], &d, Vec2::ZERO);
        }
        assert!((s.v - d.v_max).abs() <= 0.01 * d.v_max);
    }

    #[test]
    fn ou_deterministic_decay() {
        let p = OuParams {
            theta: 1.0,
            mu: Vec2::ZERO,
            sigma: 0.0,
            enabled: true,
        };
        let d = ou_step(Vec2::new(1.0, 0.0), &p, 0.1, Vec2::ZERO);
        assert!((d.x - 0.9).abs() < 1e-12 && d.y == 0.0);
    }

    #[test]
    fn ou_frozen_process() {
        let p = OuParams {
            theta: 0.0,
            mu: Vec2::new(3.0, -1.0),
            sigma: 0.0,
            enabled: true,
        };
        let d0 = Vec2::new(0.4, -0.2);
        let d = ou_step(d0, &p, 0.1, Vec2::new(5.0, 5.0));
        assert_eq!(d, d0);
    }

    #[test]
    fn ou_mean_matches_drift_monte_carlo() {
        let p = OuParams {
            theta: 1.0,
            mu: Vec2::ZERO,
            sigma: 0.5,
            enabled: true,
        };
        let d0 = Vec2::new(1.0, 0.0);
        let dt = 0.1;
        let expected = d0.x + p.theta * (p.mu.x - d0.x) * dt;
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let noise = Vec2::new(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            );
            acc += ou_step(d0, &p, dt, noise).x;
        }
        let mean = acc / n as f64;
        assert!(
            (mean - expected).abs() < 0.01 * expected.abs(),
            "MC mean {mean} vs expected {expected}"
        );
    }

    #[test]
    fn wrap_angle_range() {
        for k in -20..20 {
            let a = 0.37 * k as f64;
            let w = wrap_angle(a);
            assert!(w > -PI && w <= PI, "{a} wrapped to {w}");
            // Same direction up to 2*pi.
            assert!(((a - w) / (2.0 * PI)).fract().abs() < 1e-9);
        }
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
    }

    use std::f64::consts::PI;
}
