use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::maps::FeatureMaps;
use crate::error::{Error, Result};

/// Non-overlapping max pooling, stride = `pool`, trailing partial window
/// dropped. Returns the pooled maps and, per output element, the absolute
/// position of the winning input sample within its channel. Ties go to the
/// first position.
pub fn maxpool_forward(input: &FeatureMaps, pool: usize) -> Result<(FeatureMaps, Vec<usize>)> {
    if pool == 0 {
        return Err(Error::Shape("pool size must be >= 1".into()));
    }
    if pool > input.len() {
        return Err(Error::Shape(format!(
            "pool size {pool} exceeds input length {}",
            input.len()
        )));
    }
    let out_len = input.len() / pool;
    let mut out = vec![0.0; input.channels() * out_len];
    let mut argmax = vec![0usize; input.channels() * out_len];
    forward_raw(input.data(), input.channels(), input.len(), pool, &mut out, &mut argmax);
    Ok((FeatureMaps::new(input.channels(), out_len, out)?, argmax))
}

pub(crate) fn forward_raw(
    input: &[f64],
    channels: usize,
    len: usize,
    pool: usize,
    out: &mut [f64],
    argmax: &mut [usize],
) {
    let out_len = len / pool;
    for c in 0..channels {
        let x = &input[c * len..(c + 1) * len];
        for o in 0..out_len {
            let start = o * pool;
            let mut best = start;
            for i in start + 1..start + pool {
                if x[i] > x[best] {
                    best = i;
                }
            }
            out[c * out_len + o] = x[best];
            argmax[c * out_len + o] = best;
        }
    }
}

/// Routes each output gradient back to its recorded argmax position.
pub fn maxpool_backward(grad_out: &FeatureMaps, argmax: &[usize], input_len: usize) -> Result<FeatureMaps> {
    if argmax.len() != grad_out.data().len() {
        return Err(Error::Internal(format!(
            "{} argmax indices for {} pooled values",
            argmax.len(),
            grad_out.data().len()
        )));
    }
    let out_len = grad_out.len();
    if out_len == 0 || input_len < out_len {
        return Err(Error::Internal("pooled length exceeds input length".into()));
    }
    let pool = input_len / out_len;
    for (n, &idx) in argmax.iter().enumerate() {
        let o = n % out_len;
        if idx >= input_len || idx < o * pool || idx >= (o + 1) * pool {
            return Err(Error::Internal(format!(
                "argmax index {idx} lies outside pooling window {o}"
            )));
        }
    }
    let mut grad = vec![0.0; grad_out.channels() * input_len];
    backward_raw(
        grad_out.data(),
        argmax,
        grad_out.channels(),
        out_len,
        input_len,
        &mut grad,
    );
    FeatureMaps::new(grad_out.channels(), input_len, grad)
}

/// Adds routed gradients into `grad_input` (which is not cleared).
pub(crate) fn backward_raw(
    grad_out: &[f64],
    argmax: &[usize],
    channels: usize,
    out_len: usize,
    input_len: usize,
    grad_input: &mut [f64],
) {
    for c in 0..channels {
        for o in 0..out_len {
            let n = c * out_len + o;
            grad_input[c * input_len + argmax[n]] += grad_out[n];
        }
    }
}
