//! Arena geometry and the ray-cast range sensor.
//!
//! Both sensors report the same fixed observation layout: `sectors`
//! body-fixed angular bins spanning a 270 degree forward arc. Native
//! beams are cast analytically against the arena walls and cylindrical
//! obstacles and min-pooled into their sector; sectors outside the
//! sensor's own field of view read `max_range`.

use super::{Vec2, VehicleState};
use std::f64::consts::PI;

/// Angular span of the sector grid shared by both sensors, radians.
/// Matches the wide sensor's field of view so the observation layout is
/// identical across domains.
pub const OBSERVATION_ARC: f64 = 270.0 * PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensorKind {
    Lidar,
    Sonar,
}

/// Range sensor geometry.
#[derive(Debug, Clone, Copy)]
pub struct SensorSpec {
    pub kind: SensorKind,
    /// Saturation range, meters.
    pub max_range: f64,
    /// Field of view of the native beams, radians, centered on the nose.
    pub fov: f64,
    /// Number of native beams spread evenly (endpoints inclusive) over `fov`.
    pub native_beams: usize,
    /// Number of downsampled sectors in the observation.
    pub sectors: usize,
}

impl SensorSpec {
    /// 10 m / 270 degree / 1081-beam scanning ranger (air).
    pub fn lidar(sectors: usize) -> Self {
        Self {
            kind: SensorKind::Lidar,
            max_range: 10.0,
            fov: 270.0 * PI / 180.0,
            native_beams: 1081,
            sectors,
        }
    }

    /// 20 m / 90 degree / 256-beam forward-looking ranger (water).
    pub fn sonar(sectors: usize) -> Self {
        Self {
            kind: SensorKind::Sonar,
            max_range: 20.0,
            fov: 90.0 * PI / 180.0,
            native_beams: 256,
            sectors,
        }
    }

    pub fn validate(&self) {
        assert!(self.fov > 0.0 && self.fov <= 2.0 * PI, "fov must lie in (0, 2*pi]");
        assert!(self.max_range > 0.0, "max_range must be positive");
        assert!(self.native_beams >= 1, "need at least one native beam");
        assert!(
            self.sectors >= 1 && self.sectors <= self.native_beams,
            "sectors must lie in [1, native_beams]"
        );
    }
}

/// Cylindrical obstacle cross-section.
#[derive(Debug, Clone, Copy)]
pub struct Obstacle {
    pub center: Vec2,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvId {
    /// Obstacle-free tank.
    Env1,
    /// Four cylinders standing in for drilling risers.
    Env2,
}

impl EnvId {
    pub fn as_str(self) -> &'static str {
        match self {
            EnvId::Env1 => "env1",
            EnvId::Env2 => "env2",
        }
    }
}

impl std::str::FromStr for EnvId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "env1" => Ok(EnvId::Env1),
            "env2" => Ok(EnvId::Env2),
            other => Err(format!("unknown environment `{other}` (expected env1|env2)")),
        }
    }
}

/// Square arena centered on the origin.
#[derive(Debug, Clone)]
pub struct ArenaSpec {
    /// Half the side length, meters (the arena spans [-hw, hw] per axis).
    pub half_width: f64,
    pub obstacles: Vec<Obstacle>,
    pub env_id: EnvId,
}

impl ArenaSpec {
    /// 10 m x 10 m tank without obstacles.
    pub fn env1() -> Self {
        Self {
            half_width: 5.0,
            obstacles: Vec::new(),
            env_id: EnvId::Env1,
        }
    }

    /// 10 m x 10 m tank with four 0.4 m cylinders at (+-2.5, +-2.5).
    pub fn env2() -> Self {
        let r = 0.4;
        let obstacles = [(-2.5, -2.5), (-2.5, 2.5), (2.5, -2.5), (2.5, 2.5)]
            .iter()
            .map(|&(x, y)| Obstacle {
                center: Vec2::new(x, y),
                radius: r,
            })
            .collect();
        Self {
            half_width: 5.0,
            obstacles,
            env_id: EnvId::Env2,
        }
    }

    pub fn from_id(id: EnvId) -> Self {
        match id {
            EnvId::Env1 => Self::env1(),
            EnvId::Env2 => Self::env2(),
        }
    }

    pub fn validate(&self) {
        assert!(self.half_width > 0.0, "half_width must be positive");
        let expected = match self.env_id {
            EnvId::Env1 => 0,
            EnvId::Env2 => 4,
        };
        assert_eq!(
            self.obstacles.len(),
            expected,
            "{:?} must carry exactly {expected} obstacles",
            self.env_id
        );
        for (i, o) in self.obstacles.iter().enumerate() {
            assert!(o.radius > 0.0, "obstacle {i} radius must be positive");
            assert!(
                o.center.x.abs() + o.radius < self.half_width
                    && o.center.y.abs() + o.radius < self.half_width,
                "obstacle {i} must lie strictly inside the arena"
            );
            for (j, p) in self.obstacles.iter().enumerate().take(i) {
                assert!(
                    o.center.dist(p.center) > o.radius + p.radius,
                    "obstacles {j} and {i} overlap"
                );
            }
        }
    }

    /// Signed clearance from `p` to the nearest wall or obstacle surface
    /// (negative inside an obstacle or outside the walls).
    pub fn clearance(&self, p: Vec2) -> f64 {
        let mut d = (self.half_width - p.x.abs()).min(self.half_width - p.y.abs());
        for o in &self.obstacles {
            d = d.min(p.dist(o.center) - o.radius);
        }
        d
    }

    /// Analytic distance from `origin` along unit direction `(dx, dy)` to
    /// the first wall or obstacle hit, clamped to `max_range`.
    pub fn ray_distance(&self, origin: Vec2, dx: f64, dy: f64, max_range: f64) -> f64 {
        let hw = self.half_width;
        let mut t = f64::INFINITY;
        if dx > 0.0 {
            t = t.min((hw - origin.x) / dx);
        } else if dx < 0.0 {
            t = t.min((-hw - origin.x) / dx);
        }
        if dy > 0.0 {
            t = t.min((hw - origin.y) / dy);
        } else if dy < 0.0 {
            t = t.min((-hw - origin.y) / dy);
        }
        for o in &self.obstacles {
            let mx = origin.x - o.center.x;
            let my = origin.y - o.center.y;
            let b = dx * mx + dy * my;
            let c = mx * mx + my * my - o.radius * o.radius;
            let disc = b * b - c;
            if disc >= 0.0 {
                let root = disc.sqrt();
                let t0 = -b - root;
                if t0 > 0.0 {
                    t = t.min(t0);
                } else if -b + root > 0.0 {
                    // Origin inside the circle: first exit point.
                    t = t.min(-b + root);
                }
            }
        }
        t.min(max_range)
    }
}

/// Precomputed per-beam body-frame direction and sector assignment.
/// Building one of these per sensor avoids per-step trigonometry.
#[derive(Debug, Clone)]
pub struct BeamTable {
    cos_body: Vec<f64>,
    sin_body: Vec<f64>,
    sector_of: Vec<usize>,
    sectors: usize,
}

impl BeamTable {
    pub fn new(sensor: &SensorSpec) -> Self {
        sensor.validate();
        let n = sensor.native_beams;
        let mut cos_body = Vec::with_capacity(n);
        let mut sin_body = Vec::with_capacity(n);
        let mut sector_of = Vec::with_capacity(n);
        let sector_width = OBSERVATION_ARC / sensor.sectors as f64;
        for i in 0..n {
            let frac = if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
            let angle = -sensor.fov / 2.0 + frac * sensor.fov;
            cos_body.push(angle.cos());
            sin_body.push(angle.sin());
            let k = ((angle + OBSERVATION_ARC / 2.0) / sector_width) as usize;
            sector_of.push(k.min(sensor.sectors - 1));
        }
        Self {
            cos_body,
            sin_body,
            sector_of,
            sectors: sensor.sectors,
        }
    }

    pub fn sectors(&self) -> usize {
        self.sectors
    }
}

/// Cast all native beams from `pose` and min-pool them into sectors.
///
/// Sectors never reached by a native beam (outside the sensor's field of
/// view) report `max_range`. The pose must be inside the arena.
pub fn cast_rays_with(
    pose: &VehicleState,
    arena: &ArenaSpec,
    sensor: &SensorSpec,
    table: &BeamTable,
) -> Vec<f64> {
    debug_assert!(
        pose.x.abs() <= arena.half_width && pose.y.abs() <= arena.half_width,
        "sensor pose must lie inside the arena"
    );
    let origin = pose.pos();
    let (sin_h, cos_h) = pose.heading.sin_cos();
    let mut out = vec![sensor.max_range; sensor.sectors];
    for i in 0..table.cos_body.len() {
        let dx = cos_h * table.cos_body[i] - sin_h * table.sin_body[i];
        let dy = sin_h * table.cos_body[i] + cos_h * table.sin_body[i];
        let d = arena.ray_distance(origin, dx, dy, sensor.max_range);
        let k = table.sector_of[i];
        if d < out[k] {
            out[k] = d;
        }
    }
    out
}

/// Convenience wrapper that builds the beam table on the fly.
pub fn cast_rays(pose: &VehicleState, arena: &ArenaSpec, sensor: &SensorSpec) -> Vec<f64> {
    cast_rays_with(pose, arena, sensor, &BeamTable::new(sensor))
}
