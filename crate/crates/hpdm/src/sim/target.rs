//! Mobile targets riding Lissajous curves at constant ground speed.

use super::Vec2;

/// Shape parameters of one target's closed Lissajous path plus the speed
/// at which the target travels along it.
#[derive(Debug, Clone, Copy)]
pub struct TargetSpec {
    /// Amplitude on the x axis, meters (2..=5).
    pub amp_x: f64,
    /// Amplitude on the y axis, meters (2..=5).
    pub amp_y: f64,
    /// Integer frequency on the x axis.
    pub freq_x: f64,
    /// Integer frequency on the y axis.
    pub freq_y: f64,
    /// Phase offset on the x axis, radians.
    pub phase_x: f64,
    /// Phase offset on the y axis, radians.
    pub phase_y: f64,
    /// Ground speed along the curve, m/s (0.1..=0.25).
    pub speed: f64,
}

impl TargetSpec {
    pub fn validate(&self) {
        assert!(
            (2.0..=5.0).contains(&self.amp_x) && (2.0..=5.0).contains(&self.amp_y),
            "target amplitudes must lie in [2, 5] m"
        );
        assert!(self.speed >= 0.0, "target speed must be nonnegative");
    }
}

/// Runtime state of one target.
#[derive(Debug, Clone, Copy)]
pub struct TargetState {
    /// True position on the curve.
    pub true_pos: Vec2,
    /// Estimated position as exposed to the agent. Equal to `true_pos`
    /// unless estimate noise is enabled.
    pub est_pos: Vec2,
    /// Scalar uncertainty, grows while unvisited, resets to zero on a visit.
    pub sigma: f64,
    /// Current curve parameter (radians).
    pub curve_param: f64,
}

/// Position on the curve at parameter `t`:
/// `(amp_x * sin(freq_x * t + phase_x), amp_y * sin(freq_y * t + phase_y))`.
pub fn lissajous_position(spec: &TargetSpec, t: f64) -> Vec2 {
    Vec2::new(
        spec.amp_x * (spec.freq_x * t + spec.phase_x).sin(),
        spec.amp_y * (spec.freq_y * t + spec.phase_y).sin(),
    )
}

/// Tangent vector of the curve at parameter `t`.
fn curve_tangent(spec: &TargetSpec, t: f64) -> Vec2 {
    Vec2::new(
        spec.amp_x * spec.freq_x * (spec.freq_x * t + spec.phase_x).cos(),
        spec.amp_y * spec.freq_y * (spec.freq_y * t + spec.phase_y).cos(),
    )
}

// Guards the 1/|tangent| integrand where the curve is (nearly) singular,
// which only happens when the two phases differ by a multiple of pi.
const MIN_TANGENT_NORM: f64 = 1e-9;

// Upper bound on the arc-length step per RK4 substep, meters.
const MAX_SUBSTEP_ARC: f64 = 5e-3;

/// Advance the curve parameter by arc length `ds` (meters), integrating
/// `d(theta)/ds = 1 / |tangent(theta)|` with RK4 substeps.
fn advance_arc_length(spec: &TargetSpec, theta: f64, ds: f64) -> f64 {
    if ds == 0.0 {
        return theta;
    }
    let inv_speed = |t: f64| 1.0 / curve_tangent(spec, t).norm().max(MIN_TANGENT_NORM);
    let n_sub = ((ds.abs() / MAX_SUBSTEP_ARC).ceil() as usize).max(4);
    let h = ds / n_sub as f64;
    let mut t = theta;
    for _ in 0..n_sub {
        let k1 = inv_speed(t);
        let k2 = inv_speed(t + 0.5 * h * k1);
        let k3 = inv_speed(t + 0.5 * h * k2);
        let k4 = inv_speed(t + h * k3);
        t += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    t
}

/// Move every target along its curve so that the planar displacement over
/// `dt` is `spec.speed * dt` (arc-length parameterization); refresh
/// `true_pos` from the new curve parameter. Estimated positions are left
/// untouched; the environment refreshes them after the move.
pub fn step_targets(targets: &mut [TargetState], specs: &[TargetSpec], dt: f64) {
    assert_eq!(targets.len(), specs.len(), "one spec per target");
    for (tgt, spec) in targets.iter_mut().zip(specs) {
        tgt.curve_param = advance_arc_length(spec, tgt.curve_param, spec.speed * dt);
        tgt.true_pos = lissajous_position(spec, tgt.curve_param);
    }
}

/// Total arc length of one closed period of the curve, by dense trapezoid
/// quadrature. Used by tests and the period-wraparound property.
pub fn curve_period_arc_length(spec: &TargetSpec, samples: usize) -> f64 {
    // Both frequencies are integers, so theta has period 2*pi (and pi when
    // both frequencies are even).
    let period = 2.0 * std::f64::consts::PI;
    let h = period / samples as f64;
    let mut acc = 0.0;
    for i in 0..samples {
        let a = curve_tangent(spec, i as f64 * h).norm();
        let b = curve_tangent(spec, (i + 1) as f64 * h).norm();
        acc += 0.5 * (a + b) * h;
    }
    acc
}
