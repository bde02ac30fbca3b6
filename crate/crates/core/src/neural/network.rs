//! Policy/value network: a shared trunk of `Linear -> BatchNorm -> ReLU`
//! blocks feeding a sigmoid policy head and a linear value head. Backprop is
//! written out by hand.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub input: usize,
    pub actions: usize,
    pub width: usize,
    pub trunk_layers: usize,
    /// L2 coefficient `c` in `c * |theta|^2`.
    pub l2: f64,
    pub learning_rate: f64,
    pub bn_momentum: f64,
    pub bn_eps: f64,
}

impl NetworkConfig {
    pub fn new(input: usize, actions: usize) -> Self {
        Self {
            input,
            actions,
            width: 400,
            trunk_layers: 4,
            l2: 0.001,
            learning_rate: 0.01,
            bn_momentum: 0.9,
            bn_eps: 1e-5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input == 0 || self.actions == 0 || self.width == 0 || self.trunk_layers == 0 {
            return Err(Error::Domain("network sizes must be positive".into()));
        }
        if !(self.l2 >= 0.0 && self.learning_rate > 0.0 && self.bn_eps > 0.0) {
            return Err(Error::Domain("need l2 >= 0, learning_rate > 0, bn_eps > 0".into()));
        }
        if !(0.0..1.0).contains(&self.bn_momentum) {
            return Err(Error::Domain("bn_momentum must lie in [0, 1)".into()));
        }
        Ok(())
    }

    /// Fields that determine the parameter layout.
    pub fn architecture(&self) -> [usize; 4] {
        [self.input, self.actions, self.width, self.trunk_layers]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics in the normalization layers.
    Train,
    /// Running statistics; a pure function of parameters and input.
    Eval,
}

/// Smallest probability passed to the logarithm in the loss.
pub const PROB_FLOOR: f64 = 1e-12;

/// Gradient norm above which an update is refused.
pub const DIVERGENCE_NORM: f64 = 1e6;

/// `y = x W + b`, with `W` stored as `in x out`.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Linear {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            w: Array2::zeros((fan_in, fan_out)),
            b: Array1::zeros(fan_out),
        }
    }

    fn random<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let scale = 1.0 / (fan_in as f64).sqrt();
        let w = Array2::from_shape_simple_fn((fan_in, fan_out), || scale * rng.sample::<f64, _>(StandardNormal));
        Self {
            w,
            b: Array1::zeros(fan_out),
        }
    }

    fn forward(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        x.dot(&self.w) + &self.b
    }

    /// Single-row forward; rows of `w` with a zero input are skipped.
    fn forward_row(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.b.to_vec();
        let w = self.w.as_slice().expect("standard layout");
        let width = y.len();
        for (xi, row) in x.iter().zip(w.chunks_exact(width)) {
            if *xi != 0.0 {
                for (yj, wj) in y.iter_mut().zip(row) {
                    *yj += xi * wj;
                }
            }
        }
        y
    }

    /// Accumulates parameter gradients and returns the input gradient.
    fn backward(&self, x: &ArrayView2<f64>, dy: &Array2<f64>, grad: &mut Linear) -> Array2<f64> {
        general_mat_mul(1.0, &x.t(), dy, 1.0, &mut grad.w);
        grad.b += &dy.sum_axis(Axis(0));
        dy.dot(&self.w.t())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatchNorm {
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
}

impl BatchNorm {
    fn new(width: usize) -> Self {
        Self {
            gamma: Array1::ones(width),
            beta: Array1::zeros(width),
            running_mean: Array1::zeros(width),
            running_var: Array1::ones(width),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormGrad {
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
}

/// Parameter tensors in a fixed order; gradients share the layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub config: NetworkConfig,
    pub trunk: Vec<(Linear, BatchNorm)>,
    pub policy_hidden: Linear,
    pub policy_out: Linear,
    pub value_hidden: Linear,
    pub value_out: Linear,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub trunk: Vec<(Linear, NormGrad)>,
    pub policy_hidden: Linear,
    pub policy_out: Linear,
    pub value_hidden: Linear,
    pub value_out: Linear,
}

/// Which kind of tensor a flat parameter index falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParamGroup {
    Weight,
    Bias,
    NormScale,
    NormShift,
}

#[derive(Clone, Debug)]
pub struct Output {
    /// Per-action sigmoid outputs, `batch x actions`.
    pub p: Array2<f64>,
    pub v: Array1<f64>,
}

#[derive(Clone, Debug)]
struct TrunkCache {
    input: Array2<f64>,
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
    pre_relu: Array2<f64>,
    mean: Array1<f64>,
    var: Array1<f64>,
}

/// Intermediate values of a forward pass, needed for backprop.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    mode: Mode,
    trunk: Vec<TrunkCache>,
    features: Array2<f64>,
    policy_pre: Array2<f64>,
    policy_act: Array2<f64>,
    value_pre: Array2<f64>,
    value_act: Array2<f64>,
    pub output: Output,
}

/// One training example.
#[derive(Clone, Debug, PartialEq)]
pub struct Example<'a> {
    pub encoding: &'a [f64],
    pub policy: &'a [f64],
    pub outcome: f64,
}

/// Loss split into its parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossParts {
    pub value: f64,
    pub policy: f64,
    pub l2: f64,
    /// Number of probabilities that hit the floor.
    pub saturated: usize,
}

impl LossParts {
    pub fn data(&self) -> f64 {
        self.value + self.policy
    }

    pub fn total(&self) -> f64 {
        self.value + self.policy + self.l2
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn relu(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| v.max(0.0))
}

fn relu_backward(pre: &Array2<f64>, mut d: Array2<f64>) -> Array2<f64> {
    Zip::from(&mut d).and(pre).for_each(|g, &p| {
        if p <= 0.0 {
            *g = 0.0;
        }
    });
    d
}

impl Network {
    pub fn new<R: Rng + ?Sized>(config: NetworkConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let w = config.width;
        let mut trunk = Vec::with_capacity(config.trunk_layers);
        for layer in 0..config.trunk_layers {
            let fan_in = if layer == 0 { config.input } else { w };
            trunk.push((Linear::random(fan_in, w, rng), BatchNorm::new(w)));
        }
        Ok(Self {
            policy_hidden: Linear::random(w, w, rng),
            policy_out: Linear::random(w, config.actions, rng),
            value_hidden: Linear::random(w, w, rng),
            value_out: Linear::random(w, 1, rng),
            trunk,
            config,
        })
    }

    /// All linear weights and biases zero, normalization layers at identity.
    pub fn zeroed(config: NetworkConfig) -> Result<Self> {
        config.validate()?;
        let w = config.width;
        let trunk = (0..config.trunk_layers)
            .map(|layer| {
                let fan_in = if layer == 0 { config.input } else { w };
                (Linear::zeros(fan_in, w), BatchNorm::new(w))
            })
            .collect();
        Ok(Self {
            policy_hidden: Linear::zeros(w, w),
            policy_out: Linear::zeros(w, config.actions),
            value_hidden: Linear::zeros(w, w),
            value_out: Linear::zeros(w, 1),
            trunk,
            config,
        })
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            trunk: self
                .trunk
                .iter()
                .map(|(lin, _)| {
                    let (fi, fo) = lin.w.dim();
                    (
                        Linear::zeros(fi, fo),
                        NormGrad {
                            gamma: Array1::zeros(fo),
                            beta: Array1::zeros(fo),
                        },
                    )
                })
                .collect(),
            policy_hidden: Linear::zeros(self.policy_hidden.w.nrows(), self.policy_hidden.w.ncols()),
            policy_out: Linear::zeros(self.policy_out.w.nrows(), self.policy_out.w.ncols()),
            value_hidden: Linear::zeros(self.value_hidden.w.nrows(), self.value_hidden.w.ncols()),
            value_out: Linear::zeros(self.value_out.w.nrows(), self.value_out.w.ncols()),
        }
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.nrows() == 0 || x.ncols() != self.config.input {
            return Err(Error::Dimension(format!(
                "network expects batches of width {}, got {}x{}",
                self.config.input,
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(())
    }

    /// Forward pass keeping everything needed for backprop. Running
    /// statistics are not touched; see [`Network::update_running_stats`].
    pub fn forward_cached(&self, x: ArrayView2<f64>, mode: Mode) -> Result<ForwardCache> {
        self.check_input(&x)?;
        let eps = self.config.bn_eps;
        let mut act = x.to_owned();
        let mut trunk = Vec::with_capacity(self.trunk.len());
        for (lin, bn) in &self.trunk {
            let z = lin.forward(&act.view());
            let (mean, var) = match mode {
                Mode::Train => {
                    let mean = z.mean_axis(Axis(0)).expect("non-empty batch");
                    let var = z.var_axis(Axis(0), 0.0);
                    (mean, var)
                }
                Mode::Eval => (bn.running_mean.clone(), bn.running_var.clone()),
            };
            let inv_std = var.mapv(|v| 1.0 / (v + eps).sqrt());
            let xhat = (&z - &mean) * &inv_std;
            let pre_relu = &xhat * &bn.gamma + &bn.beta;
            let next = relu(&pre_relu);
            trunk.push(TrunkCache {
                input: act,
                xhat,
                inv_std,
                pre_relu,
                mean,
                var,
            });
            act = next;
        }
        let features = act;
        let policy_pre = self.policy_hidden.forward(&features.view());
        let policy_act = relu(&policy_pre);
        let logits = self.policy_out.forward(&policy_act.view());
        let value_pre = self.value_hidden.forward(&features.view());
        let value_act = relu(&value_pre);
        let v = self.value_out.forward(&value_act.view()).column(0).to_owned();
        let p = logits.mapv(sigmoid);
        if p.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Divergence(format!(
                "non-finite network output; max |weight| per trunk layer: {:?}",
                self.trunk
                    .iter()
                    .map(|(l, _)| l.w.iter().fold(0.0_f64, |m, x| m.max(x.abs())))
                    .collect::<Vec<_>>()
            )));
        }
        Ok(ForwardCache {
            mode,
            trunk,
            features,
            policy_pre,
            policy_act,
            value_pre,
            value_act,
            output: Output { p, v },
        })
    }

    pub fn forward(&self, x: ArrayView2<f64>, mode: Mode) -> Result<Output> {
        Ok(self.forward_cached(x, mode)?.output)
    }

    /// Eval-mode output for one encoding.
    pub fn predict(&self, encoding: &[f64]) -> Result<(Vec<f64>, f64)> {
        let x = ArrayView2::from_shape((1, encoding.len()), encoding)
            .map_err(|e| Error::Dimension(e.to_string()))?;
        self.check_input(&x)?;
        let eps = self.config.bn_eps;
        let mut act = encoding.to_vec();
        for (lin, bn) in &self.trunk {
            let mut z = lin.forward_row(&act);
            for (k, zk) in z.iter_mut().enumerate() {
                let xhat = (*zk - bn.running_mean[k]) / (bn.running_var[k] + eps).sqrt();
                *zk = (xhat * bn.gamma[k] + bn.beta[k]).max(0.0);
            }
            act = z;
        }
        let mut hidden = self.policy_hidden.forward_row(&act);
        hidden.iter_mut().for_each(|h| *h = h.max(0.0));
        let p: Vec<f64> = self.policy_out.forward_row(&hidden).into_iter().map(sigmoid).collect();
        let mut hidden = self.value_hidden.forward_row(&act);
        hidden.iter_mut().for_each(|h| *h = h.max(0.0));
        let v = self.value_out.forward_row(&hidden)[0];
        if p.iter().any(|x| !x.is_finite()) || !v.is_finite() {
            return Err(Error::Divergence("non-finite network output".into()));
        }
        Ok((p, v))
    }

    /// Blends the batch statistics of a training pass into the running ones.
    pub fn update_running_stats(&mut self, cache: &ForwardCache) {
        if cache.mode != Mode::Train {
            return;
        }
        let m = self.config.bn_momentum;
        for ((_, bn), c) in self.trunk.iter_mut().zip(&cache.trunk) {
            bn.running_mean = &bn.running_mean * m + &c.mean * (1.0 - m);
            bn.running_var = &bn.running_var * m + &c.var * (1.0 - m);
        }
    }

    /// Backprop of arbitrary output gradients `dL/dp` and `dL/dv`.
    pub fn backward(&self, cache: &ForwardCache, dp: &Array2<f64>, dv: &Array1<f64>) -> Gradients {
        let p = &cache.output.p;
        let dlogits = dp * &p.mapv(|x| x * (1.0 - x));
        self.backward_logits(cache, &dlogits, dv)
    }

    fn backward_logits(&self, cache: &ForwardCache, dlogits: &Array2<f64>, dv: &Array1<f64>) -> Gradients {
        let mut g = self.zero_gradients();
        let dpa = self.policy_out.backward(&cache.policy_act.view(), dlogits, &mut g.policy_out);
        let dpa = relu_backward(&cache.policy_pre, dpa);
        let mut dfeat = self.policy_hidden.backward(&cache.features.view(), &dpa, &mut g.policy_hidden);

        let dv2 = dv.clone().insert_axis(Axis(1));
        let dva = self.value_out.backward(&cache.value_act.view(), &dv2, &mut g.value_out);
        let dva = relu_backward(&cache.value_pre, dva);
        dfeat += &self.value_hidden.backward(&cache.features.view(), &dva, &mut g.value_hidden);

        let batch = dfeat.nrows() as f64;
        let mut d = dfeat;
        for (layer, ((lin, bn), c)) in self.trunk.iter().zip(&cache.trunk).enumerate().rev() {
            let dy = relu_backward(&c.pre_relu, d);
            let (grad_lin, grad_bn) = &mut g.trunk[layer];
            grad_bn.gamma += &(&dy * &c.xhat).sum_axis(Axis(0));
            grad_bn.beta += &dy.sum_axis(Axis(0));
            let dxhat = &dy * &bn.gamma;
            let dz = match cache.mode {
                Mode::Eval => &dxhat * &c.inv_std,
                Mode::Train => {
                    let sum_d = dxhat.sum_axis(Axis(0));
                    let sum_dx = (&dxhat * &c.xhat).sum_axis(Axis(0));
                    let centered = &dxhat * batch - &sum_d - &(&c.xhat * &sum_dx);
                    centered * &(&c.inv_std / batch)
                }
            };
            d = lin.backward(&c.input.view(), &dz, grad_lin);
        }
        g
    }

    /// Sum of squares of every linear weight and bias.
    pub fn l2_norm_sq(&self) -> f64 {
        self.tensors()
            .into_iter()
            .filter(|(g, _)| matches!(g, ParamGroup::Weight | ParamGroup::Bias))
            .map(|(_, t)| t.iter().map(|x| x * x).sum::<f64>())
            .sum()
    }

    /// Gradient of `c * |theta|^2`.
    pub fn l2_gradient(&self) -> Gradients {
        let mut g = self.zero_gradients();
        self.add_l2_gradient(&mut g);
        g
    }

    fn add_l2_gradient(&self, g: &mut Gradients) {
        let c = self.config.l2;
        for ((group, src), dst) in self.tensors().into_iter().zip(g.tensors_mut()) {
            if matches!(group, ParamGroup::Weight | ParamGroup::Bias) {
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += 2.0 * c * s;
                }
            }
        }
    }

    /// Loss on `examples` under `mode`, its parts and (optionally) its
    /// gradient. Saturated probabilities contribute no gradient.
    pub fn loss_and_gradient(
        &self,
        examples: &[Example<'_>],
        mode: Mode,
        with_gradient: bool,
    ) -> Result<(LossParts, Option<Gradients>, ForwardCache)> {
        if examples.is_empty() {
            return Err(Error::InvalidInput("loss needs a non-empty batch".into()));
        }
        let a = self.config.actions;
        let b = examples.len();
        let mut x = Array2::zeros((b, self.config.input));
        let mut pi = Array2::zeros((b, a));
        let mut z = Array1::zeros(b);
        for (k, ex) in examples.iter().enumerate() {
            if ex.encoding.len() != self.config.input || ex.policy.len() != a {
                return Err(Error::Dimension(format!(
                    "example {k}: encoding {} (want {}), policy {} (want {a})",
                    ex.encoding.len(),
                    self.config.input,
                    ex.policy.len()
                )));
            }
            x.row_mut(k).assign(&ndarray::aview1(ex.encoding));
            pi.row_mut(k).assign(&ndarray::aview1(ex.policy));
            z[k] = ex.outcome;
        }
        let cache = self.forward_cached(x.view(), mode)?;
        let p = &cache.output.p;
        let v = &cache.output.v;
        let bf = b as f64;
        let value = (&z - v).mapv(|d| d * d).sum() / bf;
        let mut saturated = 0;
        let mut policy = 0.0;
        for (pk, tk) in p.iter().zip(pi.iter()) {
            if *pk < PROB_FLOOR {
                saturated += 1;
            }
            policy -= tk * pk.max(PROB_FLOOR).ln();
        }
        policy /= bf;
        if saturated > 0 {
            log::warn!("{saturated} policy outputs below {PROB_FLOOR:e}; clamped in the loss");
        }
        let parts = LossParts {
            value,
            policy,
            l2: self.config.l2 * self.l2_norm_sq(),
            saturated,
        };
        let grads = if with_gradient {
            // d/ds of -pi log sigmoid(s) is -pi (1 - p).
            let mut dlogits = Array2::zeros((b, a));
            Zip::from(&mut dlogits).and(p).and(&pi).for_each(|d, &pk, &tk| {
                *d = if pk < PROB_FLOOR { 0.0 } else { -tk * (1.0 - pk) / bf };
            });
            let dv = (v - &z) * (2.0 / bf);
            let mut g = self.backward_logits(&cache, &dlogits, &dv);
            self.add_l2_gradient(&mut g);
            Some(g)
        } else {
            None
        };
        Ok((parts, grads, cache))
    }

    pub fn loss(&self, examples: &[Example<'_>], mode: Mode) -> Result<LossParts> {
        Ok(self.loss_and_gradient(examples, mode, false)?.0)
    }

    /// `theta -= lr * grads`.
    pub fn apply(&mut self, grads: &Gradients, lr: f64) {
        for ((_, dst), src) in self.tensors_mut().into_iter().zip(grads.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d -= lr * s;
            }
        }
    }

    /// One SGD step on a batch; returns the loss before the step.
    pub fn sgd_step(&mut self, examples: &[Example<'_>]) -> Result<LossParts> {
        let (parts, grads, cache) = self.loss_and_gradient(examples, Mode::Train, true)?;
        let grads = grads.expect("requested");
        let norm = grads.norm();
        if !(norm <= DIVERGENCE_NORM) {
            return Err(Error::Divergence(format!(
                "gradient norm {norm:e} exceeds {DIVERGENCE_NORM:e}; loss parts {parts:?}"
            )));
        }
        self.apply(&grads, self.config.learning_rate);
        self.update_running_stats(&cache);
        Ok(parts)
    }

    /// Trainable tensors in layout order, flattened.
    pub fn tensors(&self) -> Vec<(ParamGroup, &[f64])> {
        let mut out = Vec::new();
        for (lin, bn) in &self.trunk {
            out.push((ParamGroup::Weight, lin.w.as_slice().expect("standard layout")));
            out.push((ParamGroup::Bias, lin.b.as_slice().expect("standard layout")));
            out.push((ParamGroup::NormScale, bn.gamma.as_slice().expect("standard layout")));
            out.push((ParamGroup::NormShift, bn.beta.as_slice().expect("standard layout")));
        }
        for lin in [&self.policy_hidden, &self.policy_out, &self.value_hidden, &self.value_out] {
            out.push((ParamGroup::Weight, lin.w.as_slice().expect("standard layout")));
            out.push((ParamGroup::Bias, lin.b.as_slice().expect("standard layout")));
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(ParamGroup, &mut [f64])> {
        let mut out = Vec::new();
        for (lin, bn) in &mut self.trunk {
            out.push((ParamGroup::Weight, lin.w.as_slice_mut().expect("standard layout")));
            out.push((ParamGroup::Bias, lin.b.as_slice_mut().expect("standard layout")));
            out.push((ParamGroup::NormScale, bn.gamma.as_slice_mut().expect("standard layout")));
            out.push((ParamGroup::NormShift, bn.beta.as_slice_mut().expect("standard layout")));
        }
        for lin in [
            &mut self.policy_hidden,
            &mut self.policy_out,
            &mut self.value_hidden,
            &mut self.value_out,
        ] {
            out.push((ParamGroup::Weight, lin.w.as_slice_mut().expect("standard layout")));
            out.push((ParamGroup::Bias, lin.b.as_slice_mut().expect("standard layout")));
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// Group and value of flat parameter `index`.
    pub fn parameter(&self, index: usize) -> (ParamGroup, f64) {
        let mut i = index;
        for (g, t) in self.tensors() {
            if i < t.len() {
                return (g, t[i]);
            }
            i -= t.len();
        }
        panic!("parameter index {index} out of range");
    }

    pub fn set_parameter(&mut self, index: usize, value: f64) {
        let mut i = index;
        for (_, t) in self.tensors_mut() {
            if i < t.len() {
                t[i] = value;
                return;
            }
            i -= t.len();
        }
        panic!("parameter index {index} out of range");
    }

    /// Running statistics in layout order (mean then variance per layer).
    pub fn running_stats(&self) -> Vec<&Array1<f64>> {
        self.trunk
            .iter()
            .flat_map(|(_, bn)| [&bn.running_mean, &bn.running_var])
            .collect()
    }

    pub fn running_stats_mut(&mut self) -> Vec<&mut Array1<f64>> {
        self.trunk
            .iter_mut()
            .flat_map(|(_, bn)| [&mut bn.running_mean, &mut bn.running_var])
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|x| x.is_finite()))
            && self.trunk.iter().all(|(_, bn)| bn.running_var.iter().all(|&v| v > 0.0 && v.is_finite()))
    }
}

impl Gradients {
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for (lin, bn) in &self.trunk {
            out.push(lin.w.as_slice().expect("standard layout"));
            out.push(lin.b.as_slice().expect("standard layout"));
            out.push(bn.gamma.as_slice().expect("standard layout"));
            out.push(bn.beta.as_slice().expect("standard layout"));
        }
        for lin in [&self.policy_hidden, &self.policy_out, &self.value_hidden, &self.value_out] {
            out.push(lin.w.as_slice().expect("standard layout"));
            out.push(lin.b.as_slice().expect("standard layout"));
        }
        out
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for (lin, bn) in &mut self.trunk {
            out.push(lin.w.as_slice_mut().expect("standard layout"));
            out.push(lin.b.as_slice_mut().expect("standard layout"));
            out.push(bn.gamma.as_slice_mut().expect("standard layout"));
            out.push(bn.beta.as_slice_mut().expect("standard layout"));
        }
        for lin in [
            &mut self.policy_hidden,
            &mut self.policy_out,
            &mut self.value_hidden,
            &mut self.value_out,
        ] {
            out.push(lin.w.as_slice_mut().expect("standard layout"));
            out.push(lin.b.as_slice_mut().expect("standard layout"));
        }
        out
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.tensors().into_iter().flatten().copied().collect()
    }

    pub fn norm(&self) -> f64 {
        self.tensors()
            .into_iter()
            .flatten()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }
}
