use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `channels x len` activations stored channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMaps {
    channels: usize,
    len: usize,
    data: Vec<f64>,
}

impl FeatureMaps {
    pub fn new(channels: usize, len: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || len == 0 {
            return Err(Error::Shape(format!(
                "feature maps need at least one channel and one sample, got {channels}x{len}"
            )));
        }
        if data.len() != channels * len {
            return Err(Error::Dimension {
                expected: channels * len,
                actual: data.len(),
            });
        }
        Ok(Self { channels, len, data })
    }

    pub fn zeros(channels: usize, len: usize) -> Self {
        Self {
            channels,
            len,
            data: vec![0.0; channels * len],
        }
    }

    /// Single-channel maps from a 1-D array.
    pub fn from_signal(signal: &[f64]) -> Result<Self> {
        Self::new(1, signal.len(), signal.to_vec())
    }

    pub fn from_channels(channels: &[Vec<f64>]) -> Result<Self> {
        let len = channels.first().map_or(0, Vec::len);
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::Shape("channels differ in length".into()));
        }
        Self::new(channels.len(), len, channels.concat())
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.data[c * self.len..(c + 1) * self.len]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }
}
