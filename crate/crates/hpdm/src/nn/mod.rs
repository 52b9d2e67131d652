//! Minimal dense-network core: forward/backward passes, seeded
//! initialization, Adam updates, and checkpoint serialization.
//!
//! Everything is plain `f64` slices; shapes are fixed at construction.
//! This is deliberately not a general autodiff graph — the training code
//! only needs chains of affine layers with elementwise activations.

mod checkpoint;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError};

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    ReLU,
    Identity,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::ReLU => z.max(0.0),
            Activation::Identity => z,
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative with respect to the pre-activation `z`.
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::ReLU => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub in_width: usize,
    pub out_width: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(in_width: usize, out_width: usize, activation: Activation) -> Self {
        assert!(in_width > 0 && out_width > 0, "layer widths must be positive");
        Self {
            in_width,
            out_width,
            activation,
        }
    }
}

/// Standard two-hidden-layer ReLU stack with an identity head.
pub fn mlp_specs(input: usize, hidden: &[usize], output: usize) -> Vec<LayerSpec> {
    let mut specs = Vec::with_capacity(hidden.len() + 1);
    let mut prev = input;
    for &h in hidden {
        specs.push(LayerSpec::new(prev, h, Activation::ReLU));
        prev = h;
    }
    specs.push(LayerSpec::new(prev, output, Activation::Identity));
    specs
}

#[derive(Debug, Clone)]
struct DenseLayer {
    spec: LayerSpec,
    /// Row-major `out_width x in_width`.
    w: Vec<f64>,
    b: Vec<f64>,
}

/// Layered dense-network parameters.
#[derive(Debug, Clone)]
pub struct NetworkParams {
    layers: Vec<DenseLayer>,
}

/// Per-layer activations retained by a forward pass, sufficient for the
/// matching backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each layer (first entry is the network input).
    inputs: Vec<Vec<f64>>,
    /// Pre-activation of each layer.
    preacts: Vec<Vec<f64>>,
}

/// Gradients with the same shape as the parameters.
#[derive(Debug, Clone)]
pub struct NetGrads {
    w: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

impl NetGrads {
    pub fn zeros_like(net: &NetworkParams) -> Self {
        Self {
            w: net.layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            b: net.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &NetGrads) {
        for (a, b) in self.w.iter_mut().zip(&other.w) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.b.iter_mut().zip(&other.b) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in self.w.iter_mut().chain(self.b.iter_mut()) {
            for x in v {
                *x *= s;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.w
            .iter()
            .chain(self.b.iter())
            .all(|v| v.iter().all(|x| x.is_finite()))
    }

    /// Flatten in declaration order (per layer: weights then biases).
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.w.iter().zip(&self.b) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }
}

impl NetworkParams {
    /// He-style uniform fan-in initialization, biases zero.
    pub fn init<R: Rng>(specs: &[LayerSpec], rng: &mut R) -> Self {
        assert!(!specs.is_empty(), "network needs at least one layer");
        for pair in specs.windows(2) {
            assert_eq!(
                pair[0].out_width, pair[1].in_width,
                "adjacent layer widths must chain"
            );
        }
        let layers = specs
            .iter()
            .map(|&spec| {
                let bound = (6.0 / spec.in_width as f64).sqrt();
                let w = (0..spec.in_width * spec.out_width)
                    .map(|_| rng.gen_range(-bound..bound))
                    .collect();
                DenseLayer {
                    spec,
                    w,
                    b: vec![0.0; spec.out_width],
                }
            })
            .collect();
        Self { layers }
    }

    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec).collect()
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].spec.in_width
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().unwrap().spec.out_width
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Zero the final layer (weights and biases). Used where a network
    /// must start out constant, e.g. flat-critic tests.
    pub fn zero_output_layer(&mut self) {
        let last = self.layers.last_mut().unwrap();
        last.w.iter_mut().for_each(|x| *x = 0.0);
        last.b.iter_mut().for_each(|x| *x = 0.0);
    }

    /// Set the final layer bias vector (e.g. to force constant outputs).
    pub fn set_output_bias(&mut self, bias: &[f64]) {
        let last = self.layers.last_mut().unwrap();
        assert_eq!(bias.len(), last.b.len());
        last.b.copy_from_slice(bias);
    }

    /// Plain forward pass without a cache. Pure: identical inputs give
    /// identical outputs.
    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        assert_eq!(input.len(), self.input_width(), "input width mismatch");
        let mut x = input.to_vec();
        let mut y = Vec::new();
        for layer in &self.layers {
            y.clear();
            y.reserve(layer.spec.out_width);
            for o in 0..layer.spec.out_width {
                let row = &layer.w[o * layer.spec.in_width..(o + 1) * layer.spec.in_width];
                let z: f64 = layer.b[o]
                    + row.iter().zip(&x).map(|(w, v)| w * v).sum::<f64>();
                y.push(layer.spec.activation.apply(z));
            }
            std::mem::swap(&mut x, &mut y);
        }
        x
    }

    /// Forward pass retaining the per-layer cache needed by `backward`.
    pub fn forward_cached(&self, input: &[f64]) -> (Vec<f64>, ForwardCache) {
        assert_eq!(input.len(), self.input_width(), "input width mismatch");
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut preacts = Vec::with_capacity(self.layers.len());
        let mut x = input.to_vec();
        for layer in &self.layers {
            let mut z = Vec::with_capacity(layer.spec.out_width);
            for o in 0..layer.spec.out_width {
                let row = &layer.w[o * layer.spec.in_width..(o + 1) * layer.spec.in_width];
                z.push(layer.b[o] + row.iter().zip(&x).map(|(w, v)| w * v).sum::<f64>());
            }
            let y = z.iter().map(|&v| layer.spec.activation.apply(v)).collect();
            inputs.push(x);
            preacts.push(z);
            x = y;
        }
        (x, ForwardCache { inputs, preacts })
    }

    /// Exact reverse-mode gradients of `dot(output, output_grad)`.
    ///
    /// Returns the parameter gradients and the gradient with respect to
    /// the network input.
    pub fn backward(&self, cache: &ForwardCache, output_grad: &[f64]) -> (NetGrads, Vec<f64>) {
        let mut grads = NetGrads::zeros_like(self);
        let dx = self.backward_accumulate(cache, output_grad, &mut grads);
        (grads, dx)
    }

    /// Like `backward` but adds into an existing gradient accumulator,
    /// avoiding per-sample allocations in batched updates.
    pub fn backward_accumulate(
        &self,
        cache: &ForwardCache,
        output_grad: &[f64],
        grads: &mut NetGrads,
    ) -> Vec<f64> {
        assert_eq!(
            output_grad.len(),
            self.output_width(),
            "output gradient width mismatch"
        );
        let mut dy = output_grad.to_vec();
        for (li, layer) in self.layers.iter().enumerate().rev() {
            let z = &cache.preacts[li];
            let x = &cache.inputs[li];
            let mut dx = vec![0.0; layer.spec.in_width];
            let gw = &mut grads.w[li];
            let gb = &mut grads.b[li];
            for o in 0..layer.spec.out_width {
                let dz = dy[o] * layer.spec.activation.derivative(z[o]);
                if dz == 0.0 {
                    continue;
                }
                gb[o] += dz;
                let row = &layer.w[o * layer.spec.in_width..(o + 1) * layer.spec.in_width];
                let grow = &mut gw[o * layer.spec.in_width..(o + 1) * layer.spec.in_width];
                for i in 0..layer.spec.in_width {
                    grow[i] += dz * x[i];
                    dx[i] += dz * row[i];
                }
            }
            dy = dx;
        }
        dy
    }

    /// Gradient with respect to the input only, skipping parameter
    /// gradients. Used when differentiating through a frozen network.
    pub fn input_gradient(&self, cache: &ForwardCache, output_grad: &[f64]) -> Vec<f64> {
        assert_eq!(output_grad.len(), self.output_width());
        let mut dy = output_grad.to_vec();
        for (li, layer) in self.layers.iter().enumerate().rev() {
            let z = &cache.preacts[li];
            let mut dx = vec![0.0; layer.spec.in_width];
            for o in 0..layer.spec.out_width {
                let dz = dy[o] * layer.spec.activation.derivative(z[o]);
                if dz == 0.0 {
                    continue;
                }
                let row = &layer.w[o * layer.spec.in_width..(o + 1) * layer.spec.in_width];
                for i in 0..layer.spec.in_width {
                    dx[i] += dz * row[i];
                }
            }
            dy = dx;
        }
        dy
    }

    /// Polyak step toward `online`: `self <- (1 - rho) * self + rho * online`.
    pub fn soft_update_from(&mut self, online: &NetworkParams, rho: f64) {
        assert_eq!(self.layers.len(), online.layers.len());
        for (t, o) in self.layers.iter_mut().zip(&online.layers) {
            assert_eq!(t.spec, o.spec, "soft update requires matching shapes");
            for (a, b) in t.w.iter_mut().zip(&o.w) {
                *a = (1.0 - rho) * *a + rho * b;
            }
            for (a, b) in t.b.iter_mut().zip(&o.b) {
                *a = (1.0 - rho) * *a + rho * b;
            }
        }
    }

    /// Flatten to 32-bit floats in declaration order (per layer: weights
    /// then biases). Checkpoint precision is f32 by format.
    pub fn to_f32(&self) -> Vec<f32> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend(l.w.iter().map(|&x| x as f32));
            out.extend(l.b.iter().map(|&x| x as f32));
        }
        out
    }

    /// Rebuild from flat f32 parameters, consuming from the front of
    /// `data` and returning the remainder.
    pub fn from_f32<'a>(specs: &[LayerSpec], data: &'a [f32]) -> (Self, &'a [f32]) {
        let mut rest = data;
        let mut layers = Vec::with_capacity(specs.len());
        for &spec in specs {
            let nw = spec.in_width * spec.out_width;
            assert!(
                rest.len() >= nw + spec.out_width,
                "parameter payload too short for declared shapes"
            );
            let (wpart, r) = rest.split_at(nw);
            let (bpart, r) = r.split_at(spec.out_width);
            layers.push(DenseLayer {
                spec,
                w: wpart.iter().map(|&x| x as f64).collect(),
                b: bpart.iter().map(|&x| x as f64).collect(),
            });
            rest = r;
        }
        (Self { layers }, rest)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First/second moment accumulators for one network.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
    pub hyper: AdamHyper,
}

fn adam_step_slice(
    p: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: u64,
    h: &AdamHyper,
) {
    let bc1 = 1.0 - h.beta1.powi(t as i32);
    let bc2 = 1.0 - h.beta2.powi(t as i32);
    for i in 0..p.len() {
        m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
        v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        p[i] -= h.lr * m_hat / (v_hat.sqrt() + h.eps);
    }
}

impl AdamState {
    pub fn new(net: &NetworkParams, hyper: AdamHyper) -> Self {
        // Interleaved [w0, b0, w1, b1, ...].
        let mut m = Vec::with_capacity(2 * net.layers.len());
        for l in &net.layers {
            m.push(vec![0.0; l.w.len()]);
            m.push(vec![0.0; l.b.len()]);
        }
        let v = m.clone();
        Self { m, v, t: 0, hyper }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One bias-corrected Adam step. Panics on non-finite gradients.
    pub fn update(&mut self, net: &mut NetworkParams, grads: &NetGrads) {
        assert!(grads.is_finite(), "non-finite gradient in adam update");
        self.t += 1;
        for (li, layer) in net.layers.iter_mut().enumerate() {
            let hyper = self.hyper;
            adam_step_slice(
                &mut layer.w,
                &grads.w[li],
                &mut self.m[2 * li],
                &mut self.v[2 * li],
                self.t,
                &hyper,
            );
            adam_step_slice(
                &mut layer.b,
                &grads.b[li],
                &mut self.m[2 * li + 1],
                &mut self.v[2 * li + 1],
                self.t,
                &hyper,
            );
        }
    }
}

/// Adam for a single scalar parameter (the entropy temperature).
#[derive(Debug, Clone)]
pub struct ScalarAdam {
    m: f64,
    v: f64,
    t: u64,
    pub hyper: AdamHyper,
}

impl ScalarAdam {
    pub fn new(hyper: AdamHyper) -> Self {
        Self {
            m: 0.0,
            v: 0.0,
            t: 0,
            hyper,
        }
    }

    pub fn update(&mut self, p: &mut f64, g: f64) {
        assert!(g.is_finite(), "non-finite gradient in adam update");
        self.t += 1;
        let mut slot = [*p];
        let mut m = [self.m];
        let mut v = [self.v];
        adam_step_slice(&mut slot, &[g], &mut m, &mut v, self.t, &self.hyper);
        *p = slot[0];
        self.m = m[0];
        self.v = v[0];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng() -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(17)
    }

    #[test]
    fn zero_network_maps_to_zero() {
        let specs = mlp_specs(3, &[8], 2);
        let mut net = NetworkParams::init(&specs, &mut rng());
        for l in &mut net.layers {
            l.w.iter_mut().for_each(|x| *x = 0.0);
        }
        let y = net.forward(&[0.3, -0.5, 2.0]);
        assert_eq!(y, vec![0.0, 0.0]);
    }

    #[test]
    fn single_identity_layer_affine() {
        let specs = [LayerSpec::new(1, 1, Activation::Identity)];
        let mut net = NetworkParams::init(&specs, &mut rng());
        net.layers[0].w[0] = 2.0;
        net.layers[0].b[0] = 1.0;
        assert_eq!(net.forward(&[3.0]), vec![7.0]);
    }

    #[test]
    fn tanh_output_bounded() {
        let specs = [
            LayerSpec::new(4, 16, Activation::ReLU),
            LayerSpec::new(16, 3, Activation::Tanh),
        ];
        let net = NetworkParams::init(&specs, &mut rng());
        let y = net.forward(&[10.0, -10.0, 3.0, 0.1]);
        for v in y {
            assert!(v > -1.0 && v < 1.0);
        }
    }

    #[test]
    fn forward_is_pure() {
        let specs = mlp_specs(5, &[12, 12], 4);
        let net = NetworkParams::init(&specs, &mut rng());
        let x = [0.2, -0.4, 1.0, 0.0, -2.5];
        let a = net.forward(&x);
        let b = net.forward(&x);
        assert_eq!(a, b);
    }

    #[test]
    #[should_panic(expected = "input width mismatch")]
    fn width_mismatch_panics() {
        let net = NetworkParams::init(&mlp_specs(3, &[4], 1), &mut rng());
        net.forward(&[1.0, 2.0]);
    }

    /// Central finite differences of `dot(output, out_grad)` with respect
    /// to every parameter.
    fn fd_grads(net: &NetworkParams, x: &[f64], out_grad: &[f64], h: f64) -> Vec<f64> {
        let mut flat = Vec::new();
        let loss = |n: &NetworkParams| -> f64 {
            n.forward(x)
                .iter()
                .zip(out_grad)
                .map(|(y, g)| y * g)
                .sum()
        };
        for li in 0..net.layers.len() {
            for field in 0..2 {
                let len = if field == 0 {
                    net.layers[li].w.len()
                } else {
                    net.layers[li].b.len()
                };
                for k in 0..len {
                    let mut plus = net.clone();
                    let mut minus = net.clone();
                    {
                        let slot = if field == 0 {
                            &mut plus.layers[li].w[k]
                        } else {
                            &mut plus.layers[li].b[k]
                        };
                        *slot += h;
                    }
                    {
                        let slot = if field == 0 {
                            &mut minus.layers[li].w[k]
                        } else {
                            &mut minus.layers[li].b[k]
                        };
                        *slot -= h;
                    }
                    flat.push((loss(&plus) - loss(&minus)) / (2.0 * h));
                }
            }
        }
        flat
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut r = rng();
        for trial in 0..5 {
            // Tanh hidden keeps the map smooth so central differences are
            // trustworthy at h = 1e-5.
            let specs = [
                LayerSpec::new(4, 6, Activation::Tanh),
                LayerSpec::new(6, 5, Activation::Tanh),
                LayerSpec::new(5, 3, Activation::Identity),
            ];
            let net = NetworkParams::init(&specs, &mut r);
            let x: Vec<f64> = (0..4).map(|_| r.gen_range(-1.0..1.0)).collect();
            let og: Vec<f64> = (0..3).map(|_| r.gen_range(-1.0..1.0)).collect();
            let (_, cache) = net.forward_cached(&x);
            let (grads, _) = net.backward(&cache, &og);
            let analytic = grads.to_flat();
            let numeric = fd_grads(&net, &x, &og, 1e-5);
            assert_eq!(analytic.len(), numeric.len());
            for (a, n) in analytic.iter().zip(&numeric) {
                let denom = a.abs().max(n.abs()).max(1e-6);
                assert!(
                    (a - n).abs() / denom < 1e-4,
                    "trial {trial}: analytic {a} vs numeric {n}"
                );
            }
        }
    }

    #[test]
    fn zero_output_grad_gives_zero_grads() {
        let net = NetworkParams::init(&mlp_specs(3, &[7], 2), &mut rng());
        let (_, cache) = net.forward_cached(&[0.1, 0.2, 0.3]);
        let (grads, dx) = net.backward(&cache, &[0.0, 0.0]);
        assert!(grads.to_flat().iter().all(|&g| g == 0.0));
        assert!(dx.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn identity_layer_gradient_is_outer_product() {
        let specs = [LayerSpec::new(3, 2, Activation::Identity)];
        let net = NetworkParams::init(&specs, &mut rng());
        let x = [1.5, -2.0, 0.5];
        let og = [0.7, -0.3];
        let (_, cache) = net.forward_cached(&x);
        let (grads, _) = net.backward(&cache, &og);
        for o in 0..2 {
            for i in 0..3 {
                assert!((grads.w[0][o * 3 + i] - og[o] * x[i]).abs() < 1e-15);
            }
            assert!((grads.b[0][o] - og[o]).abs() < 1e-15);
        }
    }

    #[test]
    fn input_gradient_matches_backward() {
        let net = NetworkParams::init(&mlp_specs(6, &[9, 9], 4), &mut rng());
        let x: Vec<f64> = (0..6).map(|i| 0.1 * i as f64 - 0.2).collect();
        let og = [0.3, -1.0, 0.25, 2.0];
        let (_, cache) = net.forward_cached(&x);
        let (_, dx_full) = net.backward(&cache, &og);
        let dx_only = net.input_gradient(&cache, &og);
        assert_eq!(dx_full, dx_only);
    }

    #[test]
    fn adam_zero_gradient_is_a_null_step() {
        let mut net = NetworkParams::init(&mlp_specs(2, &[3], 1), &mut rng());
        let before = net.to_f32();
        let grads = NetGrads::zeros_like(&net);
        let mut adam = AdamState::new(&net, AdamHyper::default());
        adam.update(&mut net, &grads);
        assert_eq!(adam.step_count(), 1);
        assert_eq!(net.to_f32(), before);
    }

    #[test]
    fn adam_first_step_closed_form() {
        let specs = [LayerSpec::new(1, 1, Activation::Identity)];
        let mut net = NetworkParams::init(&specs, &mut rng());
        net.layers[0].w[0] = 0.5;
        let mut grads = NetGrads::zeros_like(&net);
        grads.w[0][0] = 1.0;
        let mut adam = AdamState::new(&net, AdamHyper::default());
        adam.update(&mut net, &grads);
        // m_hat = 1, v_hat = 1 => delta = -lr / (1 + eps).
        let expected = 0.5 - 1e-3 / (1.0 + 1e-8);
        assert!((net.layers[0].w[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn adam_is_deterministic() {
        let specs = mlp_specs(3, &[5], 2);
        let mut a = NetworkParams::init(&specs, &mut ChaCha12Rng::seed_from_u64(3));
        let mut b = a.clone();
        let (_, cache) = a.forward_cached(&[0.1, 0.2, 0.3]);
        let (grads, _) = a.backward(&cache, &[1.0, -1.0]);
        let mut oa = AdamState::new(&a, AdamHyper::default());
        let mut ob = AdamState::new(&b, AdamHyper::default());
        oa.update(&mut a, &grads);
        ob.update(&mut b, &grads);
        assert_eq!(a.to_f32(), b.to_f32());
    }

    #[test]
    #[should_panic(expected = "non-finite gradient")]
    fn adam_rejects_non_finite_gradients() {
        let mut net = NetworkParams::init(&mlp_specs(2, &[3], 1), &mut rng());
        let mut grads = NetGrads::zeros_like(&net);
        grads.w[0][0] = f64::NAN;
        let mut adam = AdamState::new(&net, AdamHyper::default());
        adam.update(&mut net, &grads);
    }

    #[test]
    fn soft_update_endpoints_and_midpoint() {
        let specs = [LayerSpec::new(1, 1, Activation::Identity)];
        let mut online = NetworkParams::init(&specs, &mut rng());
        online.layers[0].w[0] = 1.0;
        online.layers[0].b[0] = 1.0;
        let zero = {
            let mut z = online.clone();
            z.layers[0].w[0] = 0.0;
            z.layers[0].b[0] = 0.0;
            z
        };

        let mut t = zero.clone();
        t.soft_update_from(&online, 1.0);
        assert_eq!(t.layers[0].w[0], 1.0);

        let mut t = zero.clone();
        t.soft_update_from(&online, 0.0);
        assert_eq!(t.layers[0].w[0], 0.0);

        let mut t = zero;
        t.soft_update_from(&online, 0.5);
        assert_eq!(t.layers[0].w[0], 0.5);
    }

    use rand::Rng;
}
