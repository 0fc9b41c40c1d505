use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::maps::FeatureMaps;
use crate::error::{Error, Result};

/// Valid (unpadded), stride-1 cross-correlation layer.
///
/// `filters` is laid out `[out_channel][in_channel][tap]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1dLayer {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel_size: usize,
    pub filters: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Conv1dLayer {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel_size: usize,
        filters: Vec<f64>,
        biases: Vec<f64>,
    ) -> Result<Self> {
        if in_channels == 0 || out_channels == 0 || kernel_size == 0 {
            return Err(Error::Shape(format!(
                "conv layer dimensions must be positive, got {out_channels}x{in_channels}x{kernel_size}"
            )));
        }
        if filters.len() != out_channels * in_channels * kernel_size {
            return Err(Error::Dimension {
                expected: out_channels * in_channels * kernel_size,
                actual: filters.len(),
            });
        }
        if biases.len() != out_channels {
            return Err(Error::Dimension {
                expected: out_channels,
                actual: biases.len(),
            });
        }
        if filters.iter().chain(&biases).any(|w| !w.is_finite()) {
            return Err(Error::Shape("conv parameters must be finite".into()));
        }
        Ok(Self {
            in_channels,
            out_channels,
            kernel_size,
            filters,
            biases,
        })
    }

    pub fn zeros(in_channels: usize, out_channels: usize, kernel_size: usize) -> Result<Self> {
        Self::new(
            in_channels,
            out_channels,
            kernel_size,
            vec![0.0; out_channels * in_channels * kernel_size],
            vec![0.0; out_channels],
        )
    }

    pub fn filter(&self, out_c: usize, in_c: usize) -> &[f64] {
        let k = self.kernel_size;
        &self.filters[(out_c * self.in_channels + in_c) * k..][..k]
    }

    fn check_input(&self, input: &FeatureMaps) -> Result<usize> {
        if input.channels() != self.in_channels {
            return Err(Error::Shape(format!(
                "conv expects {} input channels, got {}",
                self.in_channels,
                input.channels()
            )));
        }
        if input.len() < self.kernel_size {
            return Err(Error::Shape(format!(
                "input length {} is shorter than the filter size {}",
                input.len(),
                self.kernel_size
            )));
        }
        Ok(input.len() - self.kernel_size + 1)
    }
}

/// `out[c][i] = bias[c] + sum_j sum_k filters[c][j][k] * in[j][i + k]`.
pub fn conv1d_forward(input: &FeatureMaps, layer: &Conv1dLayer) -> Result<FeatureMaps> {
    let out_len = layer.check_input(input)?;
    let mut out = vec![0.0; layer.out_channels * out_len];
    forward_raw(
        input.data(),
        layer.in_channels,
        input.len(),
        &layer.filters,
        &layer.biases,
        layer.out_channels,
        layer.kernel_size,
        &mut out,
    );
    FeatureMaps::new(layer.out_channels, out_len, out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conv1dGrads {
    pub input: FeatureMaps,
    pub filters: Vec<f64>,
    pub biases: Vec<f64>,
}

pub fn conv1d_backward(grad_out: &FeatureMaps, cached_input: &FeatureMaps, layer: &Conv1dLayer) -> Result<Conv1dGrads> {
    let out_len = layer.check_input(cached_input)?;
    if grad_out.channels() != layer.out_channels || grad_out.len() != out_len {
        return Err(Error::Shape(format!(
            "conv gradient must be {}x{out_len}, got {}x{}",
            layer.out_channels,
            grad_out.channels(),
            grad_out.len()
        )));
    }
    let len = cached_input.len();
    let mut filters = vec![0.0; layer.filters.len()];
    let mut biases = vec![0.0; layer.out_channels];
    let mut input = vec![0.0; layer.in_channels * len];
    backward_params_raw(
        grad_out.data(),
        cached_input.data(),
        layer.in_channels,
        len,
        layer.out_channels,
        layer.kernel_size,
        &mut filters,
        &mut biases,
    );
    backward_input_raw(
        grad_out.data(),
        &layer.filters,
        layer.in_channels,
        len,
        layer.out_channels,
        layer.kernel_size,
        &mut input,
    );
    Ok(Conv1dGrads {
        input: FeatureMaps::new(layer.in_channels, len, input)?,
        filters,
        biases,
    })
}

// Each output element accumulates `bias`, then taps in (channel, tap) order.
// The innermost loop runs over output positions so it vectorizes without
// changing that per-element summation order.
#[allow(clippy::too_many_arguments)]
pub(crate) fn forward_raw(
    input: &[f64],
    in_channels: usize,
    len: usize,
    filters: &[f64],
    biases: &[f64],
    out_channels: usize,
    k: usize,
    out: &mut [f64],
) {
    let out_len = len - k + 1;
    for c in 0..out_channels {
        let o = &mut out[c * out_len..(c + 1) * out_len];
        o.fill(biases[c]);
        for j in 0..in_channels {
            let x = &input[j * len..(j + 1) * len];
            let w = &filters[(c * in_channels + j) * k..][..k];
            for (tap, &wk) in w.iter().enumerate() {
                for (oi, &xi) in o.iter_mut().zip(&x[tap..tap + out_len]) {
                    *oi += wk * xi;
                }
            }
        }
    }
}

/// Accumulates (adds into) filter and bias gradients.
#[allow(clippy::too_many_arguments)]
pub(crate) fn backward_params_raw(
    grad_out: &[f64],
    input: &[f64],
    in_channels: usize,
    len: usize,
    out_channels: usize,
    k: usize,
    grad_filters: &mut [f64],
    grad_biases: &mut [f64],
) {
    let out_len = len - k + 1;
    for c in 0..out_channels {
        let g = &grad_out[c * out_len..(c + 1) * out_len];
        grad_biases[c] += g.iter().sum::<f64>();
        for j in 0..in_channels {
            let x = &input[j * len..(j + 1) * len];
            let gw = &mut grad_filters[(c * in_channels + j) * k..][..k];
            for (tap, gwk) in gw.iter_mut().enumerate() {
                *gwk += dot(g, &x[tap..tap + out_len]);
            }
        }
    }
}

/// Accumulates the input gradient.
pub(crate) fn backward_input_raw(
    grad_out: &[f64],
    filters: &[f64],
    in_channels: usize,
    len: usize,
    out_channels: usize,
    k: usize,
    grad_input: &mut [f64],
) {
    let out_len = len - k + 1;
    for c in 0..out_channels {
        let g = &grad_out[c * out_len..(c + 1) * out_len];
        for j in 0..in_channels {
            let gx = &mut grad_input[j * len..(j + 1) * len];
            let w = &filters[(c * in_channels + j) * k..][..k];
            for (tap, &wk) in w.iter().enumerate() {
                for (xi, &gi) in gx[tap..tap + out_len].iter_mut().zip(g) {
                    *xi += wk * gi;
                }
            }
        }
    }
}

/// Dot product with four independent accumulators.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn single(filter: &[f64], bias: f64) -> Conv1dLayer {
        Conv1dLayer::new(1, 1, filter.len(), filter.to_vec(), vec![bias]).unwrap()
    }

    #[test]
    fn leading_tap_selects_window_start() {
        let x = FeatureMaps::from_signal(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let y = conv1d_forward(&x, &single(&[1.0, 0.0], 0.0)).unwrap();
        assert_eq!(y.data(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn full_width_filter_is_a_dot_product() {
        let x = FeatureMaps::from_signal(&[1.0, 2.0, 3.0]).unwrap();
        let y = conv1d_forward(&x, &single(&[1.0, 1.0, 1.0], 0.0)).unwrap();
        assert_eq!(y.data(), &[6.0]);
    }

    #[test]
    fn ones_filter_gives_window_sums_plus_bias() {
        let x: Vec<f64> = (0..11).map(|i| (i * i) as f64 * 0.25 - 3.0).collect();
        let y = conv1d_forward(&FeatureMaps::from_signal(&x).unwrap(), &single(&[1.0; 4], 0.5)).unwrap();
        for (i, v) in y.data().iter().enumerate() {
            let mut expect = 0.5;
            for k in 0..4 {
                expect += x[i + k];
            }
            assert_eq!(*v, expect);
        }
    }

    #[test]
    fn short_input_is_rejected() {
        let x = FeatureMaps::from_signal(&[1.0, 2.0]).unwrap();
        assert!(matches!(
            conv1d_forward(&x, &single(&[1.0, 1.0, 1.0], 0.0)),
            Err(Error::Shape(_))
        ));
        let two = FeatureMaps::new(2, 3, vec![0.0; 6]).unwrap();
        assert!(conv1d_forward(&two, &single(&[1.0], 0.0)).is_err());
    }

    #[test]
    fn zero_upstream_gradient() {
        let layer = Conv1dLayer::new(2, 3, 2, (0..12).map(|i| i as f64).collect(), vec![1.0; 3]).unwrap();
        let x = FeatureMaps::new(2, 5, (0..10).map(|i| i as f64 * 0.1).collect()).unwrap();
        let g = conv1d_backward(&FeatureMaps::zeros(3, 4), &x, &layer).unwrap();
        assert!(g.input.data().iter().all(|&v| v == 0.0));
        assert!(g.filters.iter().all(|&v| v == 0.0));
        assert!(g.biases.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_expanded_filter_gradient() {
        // x = [x0, x1, x2], w = [w0, w1]:
        // y0 = w0 x0 + w1 x1 + b, y1 = w0 x1 + w1 x2 + b
        // dL/dw0 = g0 x0 + g1 x1, dL/dw1 = g0 x1 + g1 x2, dL/db = g0 + g1
        // dL/dx = [g0 w0, g0 w1 + g1 w0, g1 w1]
        let (x0, x1, x2) = (0.5, -1.5, 2.0);
        let (w0, w1) = (0.3, -0.7);
        let (g0, g1) = (1.25, -0.4);
        let layer = single(&[w0, w1], 0.1);
        let x = FeatureMaps::from_signal(&[x0, x1, x2]).unwrap();
        let go = FeatureMaps::from_signal(&[g0, g1]).unwrap();
        let g = conv1d_backward(&go, &x, &layer).unwrap();
        assert!((g.filters[0] - (g0 * x0 + g1 * x1)).abs() < 1e-15);
        assert!((g.filters[1] - (g0 * x1 + g1 * x2)).abs() < 1e-15);
        assert!((g.biases[0] - (g0 + g1)).abs() < 1e-15);
        let gi = g.input.data();
        assert!((gi[0] - g0 * w0).abs() < 1e-15);
        assert!((gi[1] - (g0 * w1 + g1 * w0)).abs() < 1e-15);
        assert!((gi[2] - g1 * w1).abs() < 1e-15);
    }

    #[test]
    fn single_weight_matches_finite_difference() {
        let x = FeatureMaps::from_signal(&[0.4, -1.1, 2.3, 0.7]).unwrap();
        let w = 0.83;
        // L = sum of outputs weighted by g
        let g = [0.3, -0.9, 1.7, 0.2];
        let loss = |w: f64| {
            let y = conv1d_forward(&x, &single(&[w], -0.2)).unwrap();
            y.data().iter().zip(&g).map(|(a, b)| a * b).sum::<f64>()
        };
        let h = 1e-6;
        let fd = (loss(w + h) - loss(w - h)) / (2.0 * h);
        let an = conv1d_backward(&FeatureMaps::from_signal(&g).unwrap(), &x, &single(&[w], -0.2))
            .unwrap()
            .filters[0];
        assert!((fd - an).abs() <= 1e-5 * an.abs());
    }

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..37).map(|i| i as f64 * 0.5).collect();
        let b: Vec<f64> = (0..37).map(|i| 1.0 - i as f64 * 0.25).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-9);
    }
}
