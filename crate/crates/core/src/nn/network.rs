use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::conv::{self, Conv1dLayer};
use super::dense::{self, Activation, DenseLayer};
use super::dropout::{self, Mode};
use super::pool;
use crate::error::{Error, Result};

/// Training and architecture hyperparameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HyperParams {
    pub filters1: usize,
    pub ksize1: usize,
    pub pool: usize,
    pub filters2: usize,
    pub ksize2: usize,
    pub dense1: usize,
    pub dense2: usize,
    pub dropout: f64,
    pub dropout_placement: DropoutPlacement,
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
}

impl Default for HyperParams {
    /// 6 filters of 40 taps, pool 8, 4 filters of 20 taps, dense 16 and 8,
    /// dropout 0.5, batch 64. The epoch count is the desk-scale 500.
    fn default() -> Self {
        Self {
            filters1: 6,
            ksize1: 40,
            pool: 8,
            filters2: 4,
            ksize2: 20,
            dense1: 16,
            dense2: 8,
            dropout: 0.5,
            dropout_placement: DropoutPlacement::Flatten,
            epochs: 500,
            batch: 64,
            learning_rate: 1e-3,
        }
    }
}

impl HyperParams {
    /// The 48-point tuning grid: filters {4,6} x {4,6}, pool {8,16},
    /// epochs {5000,10000}, batch {8,16,64}; other fields from `Default`.
    pub fn tuning_grid() -> Vec<HyperParams> {
        let mut grid = Vec::with_capacity(48);
        for filters1 in [4, 6] {
            for filters2 in [4, 6] {
                for pool in [8, 16] {
                    for epochs in [5000, 10000] {
                        for batch in [8, 16, 64] {
                            grid.push(HyperParams {
                                filters1,
                                filters2,
                                pool,
                                epochs,
                                batch,
                                ..HyperParams::default()
                            });
                        }
                    }
                }
            }
        }
        grid
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = [
            ("filters1", self.filters1),
            ("ksize1", self.ksize1),
            ("pool", self.pool),
            ("filters2", self.filters2),
            ("ksize2", self.ksize2),
            ("dense1", self.dense1),
            ("dense2", self.dense2),
            ("batch", self.batch),
        ];
        if let Some((name, _)) = sizes.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidConfig(format!("{name} must be positive")));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidConfig(format!(
                "dropout must lie in [0, 1), got {}",
                self.dropout
            )));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be finite and >= 0, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Where dropout acts during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DropoutPlacement {
    /// After each hidden dense layer.
    Dense,
    /// On the flattened convolutional features, before the first dense layer.
    #[default]
    Flatten,
}

impl DropoutPlacement {
    pub fn as_str(self) -> &'static str {
        match self {
            DropoutPlacement::Dense => "dense",
            DropoutPlacement::Flatten => "flatten",
        }
    }
}

impl core::str::FromStr for DropoutPlacement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(DropoutPlacement::Dense),
            "flatten" => Ok(DropoutPlacement::Flatten),
            _ => Err(Error::InvalidConfig(format!("unknown dropout placement `{s}`"))),
        }
    }
}

/// Shape descriptor of a built network; everything needed to rebuild the
/// parameter layout.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Architecture {
    pub input_len: usize,
    pub filters1: usize,
    pub ksize1: usize,
    pub pool: usize,
    pub filters2: usize,
    pub ksize2: usize,
    pub dense1: usize,
    pub dense2: usize,
    pub dropout: f64,
    pub dropout_placement: DropoutPlacement,
}

/// `(channels, length)` after each stage, plus the dense widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShapeTrace {
    pub input: usize,
    pub conv1: (usize, usize),
    pub pool: (usize, usize),
    pub conv2: (usize, usize),
    pub flatten: usize,
    pub dense1: usize,
    pub dense2: usize,
    pub output: usize,
}

impl Architecture {
    pub fn from_hyperparams(hp: &HyperParams, input_len: usize) -> Result<Self> {
        hp.validate()?;
        let arch = Self {
            input_len,
            filters1: hp.filters1,
            ksize1: hp.ksize1,
            pool: hp.pool,
            filters2: hp.filters2,
            ksize2: hp.ksize2,
            dense1: hp.dense1,
            dense2: hp.dense2,
            dropout: hp.dropout,
            dropout_placement: hp.dropout_placement,
        };
        arch.shape_trace()?;
        Ok(arch)
    }

    pub fn shape_trace(&self) -> Result<ShapeTrace> {
        let fail = |layer: &'static str, reason: alloc::string::String| Err(Error::Architecture { layer, reason });
        if self.input_len < 1 {
            return fail("input", "input length must be positive".into());
        }
        for (layer, name, v) in [
            ("conv1", "filter count", self.filters1),
            ("conv1", "filter size", self.ksize1),
            ("conv2", "filter count", self.filters2),
            ("conv2", "filter size", self.ksize2),
            ("dense1", "width", self.dense1),
            ("dense2", "width", self.dense2),
        ] {
            if v == 0 {
                return fail(layer, format!("{name} must be positive"));
            }
        }
        if self.input_len < self.ksize1 {
            return fail(
                "conv1",
                format!("input length {} < filter size {}", self.input_len, self.ksize1),
            );
        }
        let l1 = self.input_len - self.ksize1 + 1;
        let lp = l1 / self.pool.max(1);
        if self.pool == 0 || lp < 1 {
            return fail(
                "maxpool",
                format!("conv1 length {l1} is shorter than pool size {}", self.pool),
            );
        }
        if lp < self.ksize2 {
            return fail("conv2", format!("pooled length {lp} < filter size {}", self.ksize2));
        }
        let l2 = lp - self.ksize2 + 1;
        Ok(ShapeTrace {
            input: self.input_len,
            conv1: (self.filters1, l1),
            pool: (self.filters1, lp),
            conv2: (self.filters2, l2),
            flatten: self.filters2 * l2,
            dense1: self.dense1,
            dense2: self.dense2,
            output: 1,
        })
    }

    fn block_sizes(&self) -> [usize; 10] {
        let t = self.shape_trace().expect("architecture validated at construction");
        [
            self.filters1 * self.ksize1,
            self.filters1,
            self.filters2 * self.filters1 * self.ksize2,
            self.filters2,
            self.dense1 * t.flatten,
            self.dense1,
            self.dense2 * self.dense1,
            self.dense2,
            self.dense2,
            1,
        ]
    }

    pub fn parameter_count(&self) -> usize {
        self.block_sizes().iter().sum()
    }
}

/// Parameter blocks in storage (and checkpoint) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamBlock {
    Conv1Filters,
    Conv1Biases,
    Conv2Filters,
    Conv2Biases,
    Dense1Weights,
    Dense1Biases,
    Dense2Weights,
    Dense2Biases,
    OutputWeights,
    OutputBiases,
}

impl ParamBlock {
    pub const ALL: [ParamBlock; 10] = [
        ParamBlock::Conv1Filters,
        ParamBlock::Conv1Biases,
        ParamBlock::Conv2Filters,
        ParamBlock::Conv2Biases,
        ParamBlock::Dense1Weights,
        ParamBlock::Dense1Biases,
        ParamBlock::Dense2Weights,
        ParamBlock::Dense2Biases,
        ParamBlock::OutputWeights,
        ParamBlock::OutputBiases,
    ];
}

fn split_blocks<'a>(mut data: &'a [f64], sizes: &[usize; 10]) -> [&'a [f64]; 10] {
    let mut out: [&[f64]; 10] = [&[]; 10];
    for (slot, &n) in out.iter_mut().zip(sizes) {
        let (head, tail) = data.split_at(n);
        *slot = head;
        data = tail;
    }
    out
}

fn split_blocks_mut<'a>(mut data: &'a mut [f64], sizes: &[usize; 10]) -> [&'a mut [f64]; 10] {
    let mut out: [&mut [f64]; 10] = Default::default();
    for (slot, &n) in out.iter_mut().zip(sizes) {
        let (head, tail) = core::mem::take(&mut data).split_at_mut(n);
        *slot = head;
        data = tail;
    }
    out
}

/// conv(f1, k1) → relu → maxpool → conv(f2, k2) → relu → flatten →
/// dense(d1, relu) → dense(d2, relu) → dense(1, identity), with dropout
/// either on the flattened features or after each hidden dense layer.
///
/// All parameters live in one flat vector, blocks in [`ParamBlock`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    arch: Architecture,
    sizes: [usize; 10],
    params: Vec<f64>,
}

/// Builds the network and initializes it: He-normal for relu layers,
/// Glorot-uniform for the identity output, zero biases.
pub fn build_network<R: Rng + ?Sized>(hp: &HyperParams, input_len: usize, rng: &mut R) -> Result<Network> {
    let arch = Architecture::from_hyperparams(hp, input_len)?;
    let mut net = Network::zeros(arch)?;
    let trace = arch.shape_trace()?;
    let fan_ins = [
        arch.ksize1,
        0,
        arch.filters1 * arch.ksize2,
        0,
        trace.flatten,
        0,
        arch.dense1,
        0,
    ];
    let sizes = net.sizes;
    let blocks = split_blocks_mut(&mut net.params, &sizes);
    for (block, &fan_in) in blocks.into_iter().zip(fan_ins.iter()) {
        if fan_in == 0 {
            continue;
        }
        let std = libm::sqrt(2.0 / fan_in as f64);
        for w in block.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *w = z * std;
        }
    }
    let limit = libm::sqrt(6.0 / (arch.dense2 + 1) as f64);
    for w in net.block_mut(ParamBlock::OutputWeights) {
        *w = rng.random_range(-limit..limit);
    }
    Ok(net)
}

impl Network {
    pub fn zeros(arch: Architecture) -> Result<Self> {
        arch.shape_trace()?;
        let sizes = arch.block_sizes();
        Ok(Self {
            arch,
            sizes,
            params: vec![0.0; sizes.iter().sum()],
        })
    }

    pub fn from_params(arch: Architecture, params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(arch)?;
        net.set_params(&params)?;
        Ok(net)
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn shape_trace(&self) -> ShapeTrace {
        self.arch.shape_trace().expect("validated at construction")
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::Dimension {
                expected: self.params.len(),
                actual: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Shape("network parameters must be finite".into()));
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    pub fn block_range(&self, block: ParamBlock) -> Range<usize> {
        let i = block as usize;
        let start: usize = self.sizes[..i].iter().sum();
        start..start + self.sizes[i]
    }

    pub fn block(&self, block: ParamBlock) -> &[f64] {
        &self.params[self.block_range(block)]
    }

    pub fn block_mut(&mut self, block: ParamBlock) -> &mut [f64] {
        let r = self.block_range(block);
        &mut self.params[r]
    }

    pub fn conv1_layer(&self) -> Conv1dLayer {
        Conv1dLayer {
            in_channels: 1,
            out_channels: self.arch.filters1,
            kernel_size: self.arch.ksize1,
            filters: self.block(ParamBlock::Conv1Filters).to_vec(),
            biases: self.block(ParamBlock::Conv1Biases).to_vec(),
        }
    }

    pub fn conv2_layer(&self) -> Conv1dLayer {
        Conv1dLayer {
            in_channels: self.arch.filters1,
            out_channels: self.arch.filters2,
            kernel_size: self.arch.ksize2,
            filters: self.block(ParamBlock::Conv2Filters).to_vec(),
            biases: self.block(ParamBlock::Conv2Biases).to_vec(),
        }
    }

    /// The three dense layers: hidden 1, hidden 2, output.
    pub fn dense_layers(&self) -> [DenseLayer; 3] {
        let t = self.shape_trace();
        let mk = |w: ParamBlock, b: ParamBlock, inputs, outputs, activation| DenseLayer {
            inputs,
            outputs,
            weights: self.block(w).to_vec(),
            biases: self.block(b).to_vec(),
            activation,
        };
        [
            mk(
                ParamBlock::Dense1Weights,
                ParamBlock::Dense1Biases,
                t.flatten,
                self.arch.dense1,
                Activation::Relu,
            ),
            mk(
                ParamBlock::Dense2Weights,
                ParamBlock::Dense2Biases,
                self.arch.dense1,
                self.arch.dense2,
                Activation::Relu,
            ),
            mk(
                ParamBlock::OutputWeights,
                ParamBlock::OutputBiases,
                self.arch.dense2,
                1,
                Activation::Identity,
            ),
        ]
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.arch.input_len {
            return Err(Error::Shape(format!(
                "network expects {} input samples, got {}",
                self.arch.input_len,
                x.len()
            )));
        }
        Ok(())
    }

    /// Scalar prediction. In `Mode::Eval` the rng is not touched and the
    /// result is a pure function of the parameters and input.
    pub fn forward<R: Rng + ?Sized>(&self, x: &[f64], mode: Mode, rng: &mut R) -> Result<f64> {
        self.check_input(x)?;
        let mut ws = Workspace::new(&self.arch);
        Ok(self.forward_ws(x, &mut ws, mode, rng))
    }

    /// Eval-mode prediction.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let mut ws = Workspace::new(&self.arch);
        Ok(self.forward_ws(x, &mut ws, Mode::Eval, &mut NoRng))
    }

    pub fn predict_many<'a, I>(&self, inputs: I) -> Result<Vec<f64>>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut ws = Workspace::new(&self.arch);
        inputs
            .into_iter()
            .map(|x| {
                self.check_input(x)?;
                Ok(self.forward_ws(x, &mut ws, Mode::Eval, &mut NoRng))
            })
            .collect()
    }

    /// Eval-mode squared error `(f(x) - target)^2` and its gradient with
    /// respect to every parameter, in flat parameter order.
    pub fn loss_and_gradient(&self, x: &[f64], target: f64) -> Result<(f64, Vec<f64>)> {
        self.check_input(x)?;
        let mut ws = Workspace::new(&self.arch);
        let y = self.forward_ws(x, &mut ws, Mode::Eval, &mut NoRng);
        let r = y - target;
        let mut grads = vec![0.0; self.params.len()];
        self.backward_ws(x, &mut ws, 2.0 * r, &mut grads);
        Ok((r * r, grads))
    }

    pub(crate) fn forward_ws<R: Rng + ?Sized>(&self, x: &[f64], ws: &mut Workspace, mode: Mode, rng: &mut R) -> f64 {
        let a = &self.arch;
        let p = split_blocks(&self.params, &self.sizes);
        let l1 = a.input_len - a.ksize1 + 1;
        let lp = l1 / a.pool;

        conv::forward_raw(x, 1, a.input_len, p[0], p[1], a.filters1, a.ksize1, &mut ws.a1);
        relu_in_place(&mut ws.a1);
        pool::forward_raw(&ws.a1, a.filters1, l1, a.pool, &mut ws.p1, &mut ws.argmax);
        conv::forward_raw(&ws.p1, a.filters1, lp, p[2], p[3], a.filters2, a.ksize2, &mut ws.a2);
        relu_in_place(&mut ws.a2);

        let (flat_mode, dense_mode) = match a.dropout_placement {
            DropoutPlacement::Flatten => (mode, Mode::Eval),
            DropoutPlacement::Dense => (Mode::Eval, mode),
        };
        dropout::fill_mask(&mut ws.m0, ws.a2.len(), a.dropout, flat_mode, rng);
        for ((d, &h), &m) in ws.a2d.iter_mut().zip(&ws.a2).zip(&ws.m0) {
            *d = h * m;
        }
        dense::forward_raw(&ws.a2d, p[4], p[5], Activation::Relu, &mut ws.h1);
        dropout::fill_mask(&mut ws.m1, a.dense1, a.dropout, dense_mode, rng);
        for ((d, &h), &m) in ws.h1d.iter_mut().zip(&ws.h1).zip(&ws.m1) {
            *d = h * m;
        }
        dense::forward_raw(&ws.h1d, p[6], p[7], Activation::Relu, &mut ws.h2);
        dropout::fill_mask(&mut ws.m2, a.dense2, a.dropout, dense_mode, rng);
        for ((d, &h), &m) in ws.h2d.iter_mut().zip(&ws.h2).zip(&ws.m2) {
            *d = h * m;
        }
        let mut y = [0.0];
        dense::forward_raw(&ws.h2d, p[8], p[9], Activation::Identity, &mut y);
        y[0]
    }

    /// Accumulates parameter gradients of `dy * f(x)` into `grads`, using the
    /// activations cached by the preceding `forward_ws` call on `x`.
    pub(crate) fn backward_ws(&self, x: &[f64], ws: &mut Workspace, dy: f64, grads: &mut [f64]) {
        let a = &self.arch;
        let p = split_blocks(&self.params, &self.sizes);
        let g = split_blocks_mut(grads, &self.sizes);
        let [g_c1w, g_c1b, g_c2w, g_c2b, g_d1w, g_d1b, g_d2w, g_d2b, g_ow, g_ob] = g;
        let l1 = a.input_len - a.ksize1 + 1;
        let lp = l1 / a.pool;

        // output layer
        let delta = [dy];
        dense::backward_params_raw(&delta, &ws.h2d, g_ow, g_ob);
        ws.g_h2.fill(0.0);
        dense::backward_input_raw(&delta, p[8], &mut ws.g_h2);

        // hidden 2
        for ((gh, &m), &h) in ws.g_h2.iter_mut().zip(&ws.m2).zip(&ws.h2) {
            *gh *= m;
            if h <= 0.0 {
                *gh = 0.0;
            }
        }
        dense::backward_params_raw(&ws.g_h2, &ws.h1d, g_d2w, g_d2b);
        ws.g_h1.fill(0.0);
        dense::backward_input_raw(&ws.g_h2, p[6], &mut ws.g_h1);

        // hidden 1
        for ((gh, &m), &h) in ws.g_h1.iter_mut().zip(&ws.m1).zip(&ws.h1) {
            *gh *= m;
            if h <= 0.0 {
                *gh = 0.0;
            }
        }
        dense::backward_params_raw(&ws.g_h1, &ws.a2d, g_d1w, g_d1b);
        ws.g_a2.fill(0.0);
        dense::backward_input_raw(&ws.g_h1, p[4], &mut ws.g_a2);

        // flatten dropout + conv 2
        for (g, &m) in ws.g_a2.iter_mut().zip(&ws.m0) {
            *g *= m;
        }
        relu_grad_in_place(&mut ws.g_a2, &ws.a2);
        conv::backward_params_raw(&ws.g_a2, &ws.p1, a.filters1, lp, a.filters2, a.ksize2, g_c2w, g_c2b);
        ws.g_p1.fill(0.0);
        conv::backward_input_raw(&ws.g_a2, p[2], a.filters1, lp, a.filters2, a.ksize2, &mut ws.g_p1);

        // pool + conv 1 (no input gradient needed)
        ws.g_a1.fill(0.0);
        pool::backward_raw(&ws.g_p1, &ws.argmax, a.filters1, lp, l1, &mut ws.g_a1);
        relu_grad_in_place(&mut ws.g_a1, &ws.a1);
        conv::backward_params_raw(&ws.g_a1, x, 1, a.input_len, a.filters1, a.ksize1, g_c1w, g_c1b);
    }
}

fn relu_in_place(v: &mut [f64]) {
    for x in v {
        if *x <= 0.0 {
            *x = 0.0;
        }
    }
}

fn relu_grad_in_place(grad: &mut [f64], activated: &[f64]) {
    for (g, &y) in grad.iter_mut().zip(activated) {
        if y <= 0.0 {
            *g = 0.0;
        }
    }
}

/// Activation and gradient buffers for one forward/backward pass.
pub(crate) struct Workspace {
    a1: Vec<f64>,
    p1: Vec<f64>,
    argmax: Vec<usize>,
    a2: Vec<f64>,
    m0: Vec<f64>,
    a2d: Vec<f64>,
    h1: Vec<f64>,
    m1: Vec<f64>,
    h1d: Vec<f64>,
    h2: Vec<f64>,
    m2: Vec<f64>,
    h2d: Vec<f64>,
    g_h2: Vec<f64>,
    g_h1: Vec<f64>,
    g_a2: Vec<f64>,
    g_p1: Vec<f64>,
    g_a1: Vec<f64>,
}

impl Workspace {
    pub(crate) fn new(arch: &Architecture) -> Self {
        let t = arch.shape_trace().expect("validated at construction");
        let n1 = t.conv1.0 * t.conv1.1;
        let np = t.pool.0 * t.pool.1;
        Self {
            a1: vec![0.0; n1],
            p1: vec![0.0; np],
            argmax: vec![0; np],
            a2: vec![0.0; t.flatten],
            m0: vec![1.0; t.flatten],
            a2d: vec![0.0; t.flatten],
            h1: vec![0.0; t.dense1],
            m1: vec![1.0; t.dense1],
            h1d: vec![0.0; t.dense1],
            h2: vec![0.0; t.dense2],
            m2: vec![1.0; t.dense2],
            h2d: vec![0.0; t.dense2],
            g_h2: vec![0.0; t.dense2],
            g_h1: vec![0.0; t.dense1],
            g_a2: vec![0.0; t.flatten],
            g_p1: vec![0.0; np],
            g_a1: vec![0.0; n1],
        }
    }
}

/// Placeholder generator for eval-mode passes, which never draw.
pub(crate) struct NoRng;

impl rand::RngCore for NoRng {
    fn next_u32(&mut self) -> u32 {
        unreachable!("eval-mode forward does not draw random numbers")
    }

    fn next_u64(&mut self) -> u64 {
        unreachable!("eval-mode forward does not draw random numbers")
    }

    fn fill_bytes(&mut self, _dst: &mut [u8]) {
        unreachable!("eval-mode forward does not draw random numbers")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{conv1d_forward, dense_forward, maxpool_forward, FeatureMaps};
    use crate::seed;

    fn toy_hp() -> HyperParams {
        HyperParams {
            filters1: 3,
            ksize1: 5,
            pool: 2,
            filters2: 2,
            ksize2: 3,
            dense1: 6,
            dense2: 4,
            dropout: 0.5,
            ..HyperParams::default()
        }
    }

    #[test]
    fn chosen_architecture_shapes() {
        let net = build_network(&HyperParams::default(), 1024, &mut seed::rng(1)).unwrap();
        let t = net.shape_trace();
        assert_eq!(t.conv1, (6, 985));
        assert_eq!(t.pool, (6, 123));
        assert_eq!(t.conv2, (4, 104));
        assert_eq!(t.flatten, 416);
        assert_eq!(t.output, 1);
    }

    #[test]
    fn too_short_input_names_the_pool_layer() {
        let err = build_network(&HyperParams::default(), 40, &mut seed::rng(1)).unwrap_err();
        assert!(matches!(err, Error::Architecture { layer: "maxpool", .. }), "{err:?}");
        let err = build_network(&HyperParams::default(), 39, &mut seed::rng(1)).unwrap_err();
        assert!(matches!(err, Error::Architecture { layer: "conv1", .. }));
        let err = build_network(&HyperParams::default(), 190, &mut seed::rng(1)).unwrap_err();
        assert!(matches!(err, Error::Architecture { layer: "conv2", .. }));
    }

    #[test]
    fn equal_seeds_give_equal_weights() {
        let a = build_network(&HyperParams::default(), 1024, &mut seed::rng(9)).unwrap();
        let b = build_network(&HyperParams::default(), 1024, &mut seed::rng(9)).unwrap();
        let c = build_network(&HyperParams::default(), 1024, &mut seed::rng(10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.block(ParamBlock::Conv1Biases).iter().all(|&b| b == 0.0));
    }

    #[test]
    fn zero_network_predicts_zero_and_bias_path() {
        let arch = Architecture::from_hyperparams(&toy_hp(), 64).unwrap();
        let mut net = Network::zeros(arch).unwrap();
        let x: Vec<f64> = (0..64).map(|i| libm::sin(i as f64)).collect();
        assert_eq!(net.predict(&x).unwrap(), 0.0);
        net.block_mut(ParamBlock::OutputBiases)[0] = 1.75;
        assert_eq!(net.predict(&x).unwrap(), 1.75);
        assert!(matches!(net.predict(&x[..10]), Err(Error::Shape(_))));
    }

    #[test]
    fn eval_forward_matches_layer_composition() {
        let net = build_network(&toy_hp(), 64, &mut seed::rng(3)).unwrap();
        let mut net = net;
        // shift biases so relus are not all dead
        for b in net.block_mut(ParamBlock::Conv1Biases) {
            *b = 0.1;
        }
        let x: Vec<f64> = (0..64).map(|i| libm::cos(i as f64 * 0.3)).collect();
        let c1 = conv1d_forward(&FeatureMaps::from_signal(&x).unwrap(), &net.conv1_layer()).unwrap();
        let relu = |m: FeatureMaps| {
            let ch = m.channels();
            let len = m.len();
            FeatureMaps::new(ch, len, m.into_data().into_iter().map(|v| v.max(0.0)).collect()).unwrap()
        };
        let (p, _) = maxpool_forward(&relu(c1), 2).unwrap();
        let c2 = relu(conv1d_forward(&p, &net.conv2_layer()).unwrap());
        let [d1, d2, out] = net.dense_layers();
        let h = dense_forward(c2.data(), &d1).unwrap();
        let h = dense_forward(&h, &d2).unwrap();
        let y = dense_forward(&h, &out).unwrap()[0];
        let got = net.predict(&x).unwrap();
        assert!((got - y).abs() < 1e-10);
        assert_eq!(got.to_bits(), net.predict(&x).unwrap().to_bits());
    }

    #[test]
    fn train_mode_uses_dropout() {
        let net = build_network(&toy_hp(), 64, &mut seed::rng(5)).unwrap();
        let x: Vec<f64> = (0..64).map(|i| (i % 7) as f64 - 3.0).collect();
        let mut rng = seed::rng(11);
        let outs: Vec<f64> = (0..20)
            .map(|_| net.forward(&x, Mode::Train, &mut rng).unwrap())
            .collect();
        assert!(outs.iter().any(|&o| o != outs[0]));
    }

    #[test]
    fn tuning_grid_has_48_points() {
        let grid = HyperParams::tuning_grid();
        assert_eq!(grid.len(), 48);
        assert!(grid.iter().all(|hp| hp.ksize1 == 40 && hp.ksize2 == 20));
    }

    #[test]
    fn invalid_hyperparameters() {
        let hp = HyperParams {
            dropout: 1.0,
            ..HyperParams::default()
        };
        assert!(matches!(hp.validate(), Err(Error::InvalidConfig(_))));
        let hp = HyperParams {
            batch: 0,
            ..HyperParams::default()
        };
        assert!(hp.validate().is_err());
    }
}
