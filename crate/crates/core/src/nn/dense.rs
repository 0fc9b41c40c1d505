use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activated output; relu'(0) = 0.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Fully connected layer, `weights` row-major `[output][input]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(
        inputs: usize,
        outputs: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::Shape("dense layer dimensions must be positive".into()));
        }
        if weights.len() != inputs * outputs {
            return Err(Error::Dimension {
                expected: inputs * outputs,
                actual: weights.len(),
            });
        }
        if biases.len() != outputs {
            return Err(Error::Dimension {
                expected: outputs,
                actual: biases.len(),
            });
        }
        if weights.iter().chain(&biases).any(|w| !w.is_finite()) {
            return Err(Error::Shape("dense parameters must be finite".into()));
        }
        Ok(Self {
            inputs,
            outputs,
            weights,
            biases,
            activation,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            weights[i * n + i] = 1.0;
        }
        Self {
            inputs: n,
            outputs: n,
            weights,
            biases: vec![0.0; n],
            activation: Activation::Identity,
        }
    }
}

pub fn dense_forward(input: &[f64], layer: &DenseLayer) -> Result<Vec<f64>> {
    if input.len() != layer.inputs {
        return Err(Error::Shape(format!(
            "dense layer expects {} inputs, got {}",
            layer.inputs,
            input.len()
        )));
    }
    let mut out = vec![0.0; layer.outputs];
    forward_raw(input, &layer.weights, &layer.biases, layer.activation, &mut out);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrads {
    pub input: Vec<f64>,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

/// Backward pass given the gradient w.r.t. the activated output, the cached
/// input and the cached activated output.
pub fn dense_backward(grad_out: &[f64], input: &[f64], output: &[f64], layer: &DenseLayer) -> Result<DenseGrads> {
    if input.len() != layer.inputs || grad_out.len() != layer.outputs || output.len() != layer.outputs {
        return Err(Error::Shape(format!(
            "dense backward expects {} inputs and {} outputs",
            layer.inputs, layer.outputs
        )));
    }
    let mut delta = grad_out.to_vec();
    apply_activation_grad(&mut delta, output, layer.activation);
    let mut weights = vec![0.0; layer.weights.len()];
    let mut biases = vec![0.0; layer.outputs];
    let mut grad_in = vec![0.0; layer.inputs];
    backward_params_raw(&delta, input, &mut weights, &mut biases);
    backward_input_raw(&delta, &layer.weights, &mut grad_in);
    Ok(DenseGrads {
        input: grad_in,
        weights,
        biases,
    })
}

pub(crate) fn forward_raw(input: &[f64], weights: &[f64], biases: &[f64], activation: Activation, out: &mut [f64]) {
    let n_in = input.len();
    for (o, (y, &b)) in out.iter_mut().zip(biases).enumerate() {
        let row = &weights[o * n_in..(o + 1) * n_in];
        let mut acc = b;
        for (w, x) in row.iter().zip(input) {
            acc += w * x;
        }
        *y = activation.apply(acc);
    }
}

pub(crate) fn apply_activation_grad(grad: &mut [f64], output: &[f64], activation: Activation) {
    if activation == Activation::Identity {
        return;
    }
    for (g, &y) in grad.iter_mut().zip(output) {
        *g *= activation.derivative_from_output(y);
    }
}

/// Accumulates parameter gradients from the pre-activation gradient `delta`.
pub(crate) fn backward_params_raw(delta: &[f64], input: &[f64], grad_weights: &mut [f64], grad_biases: &mut [f64]) {
    let n_in = input.len();
    for (o, &d) in delta.iter().enumerate() {
        grad_biases[o] += d;
        if d == 0.0 {
            continue;
        }
        for (gw, &x) in grad_weights[o * n_in..(o + 1) * n_in].iter_mut().zip(input) {
            *gw += d * x;
        }
    }
}

/// Accumulates the input gradient.
pub(crate) fn backward_input_raw(delta: &[f64], weights: &[f64], grad_input: &mut [f64]) {
    let n_in = grad_input.len();
    for (o, &d) in delta.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        for (gx, &w) in grad_input.iter_mut().zip(&weights[o * n_in..(o + 1) * n_in]) {
            *gx += d * w;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_layer_passes_through() {
        let x = [0.5, -2.0, 3.25];
        assert_eq!(dense_forward(&x, &DenseLayer::identity(3)).unwrap(), x.to_vec());
    }

    #[test]
    fn relu_clips_negatives() {
        let mut layer = DenseLayer::identity(2);
        layer.activation = Activation::Relu;
        assert_eq!(dense_forward(&[-1.0, 2.0], &layer).unwrap(), vec![0.0, 2.0]);
    }

    #[test]
    fn relu_derivative_at_zero_is_zero() {
        assert_eq!(Activation::Relu.derivative_from_output(0.0), 0.0);
        assert_eq!(Activation::Relu.derivative_from_output(1e-300), 1.0);
    }

    #[test]
    fn wrong_input_length() {
        assert!(matches!(
            dense_forward(&[1.0], &DenseLayer::identity(2)),
            Err(Error::Shape(_))
        ));
        assert!(DenseLayer::new(2, 2, vec![0.0; 3], vec![0.0; 2], Activation::Relu).is_err());
    }

    #[test]
    fn random_layer_matches_finite_differences() {
        let w: Vec<f64> = (0..12).map(|i| libm::sin(i as f64 * 1.7) * 0.8).collect();
        let b = vec![0.05, -0.3, 0.2];
        let layer = DenseLayer::new(4, 3, w.clone(), b.clone(), Activation::Relu).unwrap();
        let x = [0.9, -0.4, 1.3, 0.2];
        let g = [0.7, -1.1, 0.4];
        let loss = |l: &DenseLayer, x: &[f64]| -> f64 {
            dense_forward(x, l).unwrap().iter().zip(&g).map(|(a, b)| a * b).sum()
        };
        let y = dense_forward(&x, &layer).unwrap();
        let grads = dense_backward(&g, &x, &y, &layer).unwrap();
        let h = 1e-6;
        for i in 0..12 {
            let mut p = layer.clone();
            p.weights[i] += h;
            let mut m = layer.clone();
            m.weights[i] -= h;
            let fd = (loss(&p, &x) - loss(&m, &x)) / (2.0 * h);
            assert!((fd - grads.weights[i]).abs() <= 1e-5 * fd.abs().max(1e-3), "w{i}");
        }
        for i in 0..4 {
            let mut xp = x;
            xp[i] += h;
            let mut xm = x;
            xm[i] -= h;
            let fd = (loss(&layer, &xp) - loss(&layer, &xm)) / (2.0 * h);
            assert!((fd - grads.input[i]).abs() <= 1e-5 * fd.abs().max(1e-3), "x{i}");
        }
    }
}
