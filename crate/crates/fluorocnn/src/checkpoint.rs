//! Binary network checkpoints.
//!
//! Layout, little-endian:
//!
//! ```text
//! b"OCNN1\0\0\0"
//! u32 x 8   input_len filters1 ksize1 pool filters2 ksize2 dense1 dense2
//! u32       dropout placement (0 dense, 1 flatten)
//! f64       dropout
//! f64 x 2   target offset, target scale
//! u64       parameter count
//! f64 x n   parameters, block by block in `ParamBlock::ALL` order
//! ```

use std::path::Path;

use fluorocnn_core::nn::{Architecture, DropoutPlacement, Network};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"OCNN1\0\0\0";

/// A trained network together with the affine map from its output to label
/// units (`label = offset + scale * output`).
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub network: Network,
    pub target_offset: f64,
    pub target_scale: f64,
}

impl Checkpoint {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.target_offset + self.target_scale * self.network.predict(x)?)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let a = self.network.architecture();
        let mut out = Vec::with_capacity(8 + 36 + 32 + 8 * self.network.parameter_count());
        out.extend_from_slice(MAGIC);
        for v in [
            a.input_len,
            a.filters1,
            a.ksize1,
            a.pool,
            a.filters2,
            a.ksize2,
            a.dense1,
            a.dense2,
        ] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        let placement: u32 = match a.dropout_placement {
            DropoutPlacement::Dense => 0,
            DropoutPlacement::Flatten => 1,
        };
        out.extend_from_slice(&placement.to_le_bytes());
        for v in [a.dropout, self.target_offset, self.target_scale] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&(self.network.parameter_count() as u64).to_le_bytes());
        for v in self.network.params() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], source: &Path) -> Result<Self> {
        let bad = |reason: &str| Error::format(source, reason.to_string());
        let mut cur = bytes;
        let mut take = |n: usize| -> Result<&[u8]> {
            if cur.len() < n {
                return Err(bad("truncated checkpoint"));
            }
            let (head, tail) = cur.split_at(n);
            cur = tail;
            Ok(head)
        };
        if take(8)? != MAGIC {
            return Err(bad("not a checkpoint (bad magic)"));
        }
        let mut dims = [0usize; 8];
        for d in &mut dims {
            *d = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes")) as usize;
        }
        let dropout_placement = match u32::from_le_bytes(take(4)?.try_into().expect("4 bytes")) {
            0 => DropoutPlacement::Dense,
            1 => DropoutPlacement::Flatten,
            _ => return Err(bad("unknown dropout placement")),
        };
        let mut f = [0f64; 3];
        for v in &mut f {
            *v = f64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
        }
        let n = u64::from_le_bytes(take(8)?.try_into().expect("8 bytes")) as usize;
        let arch = Architecture {
            input_len: dims[0],
            filters1: dims[1],
            ksize1: dims[2],
            pool: dims[3],
            filters2: dims[4],
            ksize2: dims[5],
            dense1: dims[6],
            dense2: dims[7],
            dropout: f[0],
            dropout_placement,
        };
        arch.shape_trace().map_err(|e| Error::format(source, e.to_string()))?;
        if n != arch.parameter_count() {
            return Err(bad("parameter count does not match the architecture"));
        }
        let raw = take(8 * n)?;
        let params = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        if !cur.is_empty() {
            return Err(bad("trailing bytes after parameters"));
        }
        let network = Network::from_params(arch, params).map_err(|e| Error::format(source, e.to_string()))?;
        Ok(Self {
            network,
            target_offset: f[1],
            target_scale: f[2],
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }
}
