//! Bug2-style behavior-based baseline.
//!
//! Motion-to-goal steers proportionally toward the most uncertain
//! target; when the forward cone closes below a trigger distance the
//! policy switches to boundary following along the clearer side, and
//! returns to goal seeking either on the classic m-line condition or as
//! soon as the forward cone is fully clear again. The policy reads only
//! the pose, target estimates/uncertainties, and the range sectors.

use crate::sim::{wrap_angle, Vec2, VehicleState, OBSERVATION_ARC};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bug2Mode {
    MotionToGoal,
    BoundaryFollow,
}

/// Which side the followed obstacle is kept on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FollowSide {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy)]
pub struct Bug2Params {
    /// Proportional heading gain in motion-to-goal.
    pub k_heading: f64,
    /// Proportional gain holding the wall distance in boundary follow.
    pub k_follow: f64,
    /// Forward-cone range that triggers boundary following, meters.
    pub d_trigger: f64,
    /// Desired clearance to the followed boundary, meters.
    pub d_follow: f64,
    /// Distance to the m-line that allows leaving boundary follow, meters.
    pub d_line: f64,
    /// Half-angle of the forward cone, radians (60 degree cone total).
    pub cone_half_angle: f64,
}

impl Default for Bug2Params {
    fn default() -> Self {
        Self {
            k_heading: 2.0,
            k_follow: 2.0,
            d_trigger: 0.8,
            d_follow: 0.6,
            d_line: 0.2,
            cone_half_angle: 30.0_f64.to_radians(),
        }
    }
}

/// Persistent controller state.
#[derive(Debug, Clone)]
pub struct Bug2State {
    pub mode: Bug2Mode,
    /// Segment from where pursuit of the current goal began to the goal
    /// position at selection time.
    pub m_line: (Vec2, Vec2),
    /// Where the boundary was first hit; present iff boundary following.
    pub hit_point: Option<Vec2>,
    /// Index of the pursued target.
    pub current_goal: usize,
    /// Valid while boundary following.
    pub side: FollowSide,
}

impl Bug2State {
    /// Fresh motion-to-goal state for a newly selected target.
    pub fn new_goal(start: Vec2, goal: Vec2, target_index: usize) -> Self {
        Self {
            mode: Bug2Mode::MotionToGoal,
            m_line: (start, goal),
            hit_point: None,
            current_goal: target_index,
            side: FollowSide::Left,
        }
    }
}

/// Index of the target with the highest uncertainty; ties break toward
/// the lowest index. `positions` is accepted for signature parity with
/// richer selection rules but does not influence the argmax.
pub fn select_target(sigmas: &[f64], positions: &[Vec2]) -> usize {
    assert!(!sigmas.is_empty(), "select_target needs at least one target");
    debug_assert!(positions.is_empty() || positions.len() == sigmas.len());
    let mut best = 0;
    for (i, &s) in sigmas.iter().enumerate().skip(1) {
        if s > sigmas[best] {
            best = i;
        }
    }
    best
}

fn sector_center_angle(k: usize, sectors: usize) -> f64 {
    -OBSERVATION_ARC / 2.0 + (k as f64 + 0.5) * OBSERVATION_ARC / sectors as f64
}

/// Minimum range over sectors whose center lies in `[lo, hi]` (body
/// angles, radians). Returns infinity when no sector qualifies.
fn min_range_in(scan: &[f64], lo: f64, hi: f64) -> f64 {
    let mut out = f64::INFINITY;
    for (k, &d) in scan.iter().enumerate() {
        let a = sector_center_angle(k, scan.len());
        if a >= lo && a <= hi && d < out {
            out = d;
        }
    }
    out
}

fn mean_range_in(scan: &[f64], lo: f64, hi: f64) -> f64 {
    let mut sum = 0.0;
    let mut n = 0;
    for (k, &d) in scan.iter().enumerate() {
        let a = sector_center_angle(k, scan.len());
        if a >= lo && a <= hi {
            sum += d;
            n += 1;
        }
    }
    if n == 0 {
        f64::INFINITY
    } else {
        sum / n as f64
    }
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.x * ab.x + ab.y * ab.y;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// One Bug2 control decision.
///
/// Returns the commanded `[v, w]` (always inside `[0, v_max] x
/// [-w_max, w_max]`) and the successor state.
pub fn bug2_command(
    state: &Bug2State,
    veh: &VehicleState,
    scan: &[f64],
    goal: Vec2,
    params: &Bug2Params,
    v_max: f64,
    w_max: f64,
) -> ([f64; 2], Bug2State) {
    let pos = veh.pos();
    let cone = min_range_in(scan, -params.cone_half_angle, params.cone_half_angle);
    let mut next = state.clone();

    match state.mode {
        Bug2Mode::MotionToGoal => {
            if cone < params.d_trigger {
                // Blocked: remember the hit and pick the clearer side to
                // swing toward while the obstacle stays on the other.
                let left = mean_range_in(scan, params.cone_half_angle, OBSERVATION_ARC / 2.0);
                let right = mean_range_in(scan, -OBSERVATION_ARC / 2.0, -params.cone_half_angle);
                next.mode = Bug2Mode::BoundaryFollow;
                next.hit_point = Some(pos);
                next.side = if left >= right {
                    FollowSide::Right
                } else {
                    FollowSide::Left
                };
                return (
                    boundary_follow_command(&next, veh, scan, params, v_max, w_max),
                    next,
                );
            }
            let err = wrap_angle((goal.y - pos.y).atan2(goal.x - pos.x) - veh.heading);
            let w = (params.k_heading * err).clamp(-w_max, w_max);
            let v = v_max * err.cos().max(0.0);
            ([v, w], next)
        }
        Bug2Mode::BoundaryFollow => {
            let hit = state.hit_point.expect("boundary follow keeps a hit point");
            let on_line = point_segment_distance(pos, state.m_line.0, state.m_line.1)
                <= params.d_line;
            let closer = pos.dist(goal) < hit.dist(goal);
            if (on_line && closer) || cone >= params.d_trigger {
                next.mode = Bug2Mode::MotionToGoal;
                next.hit_point = None;
                let err = wrap_angle((goal.y - pos.y).atan2(goal.x - pos.x) - veh.heading);
                let w = (params.k_heading * err).clamp(-w_max, w_max);
                let v = v_max * err.cos().max(0.0);
                return ([v, w], next);
            }
            (
                boundary_follow_command(&next, veh, scan, params, v_max, w_max),
                next,
            )
        }
    }
}

fn boundary_follow_command(
    state: &Bug2State,
    _veh: &VehicleState,
    scan: &[f64],
    params: &Bug2Params,
    v_max: f64,
    w_max: f64,
) -> [f64; 2] {
    let cone = min_range_in(scan, -params.cone_half_angle, params.cone_half_angle);
    // Range on the obstacle side, sampled over a broad lateral band.
    let side_band = (params.cone_half_angle * 0.5, 100.0_f64.to_radians());
    let side_range = match state.side {
        FollowSide::Right => min_range_in(scan, -side_band.1, -side_band.0),
        FollowSide::Left => min_range_in(scan, side_band.0, side_band.1),
    };
    let away: f64 = match state.side {
        FollowSide::Right => 1.0, // turn left, away from the obstacle
        FollowSide::Left => -1.0,
    };
    let w = if cone < params.d_trigger {
        // Still blocked ahead: rotate away until the cone opens.
        away * w_max
    } else {
        // Hold the wall at d_follow with proportional control.
        (away * params.k_follow * (params.d_follow - side_range)).clamp(-w_max, w_max)
    };
    let v = (v_max * (cone - 0.3) / params.d_trigger).clamp(0.2 * v_max, v_max);
    [v, w]
}
