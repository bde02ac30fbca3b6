//! Binary checkpoints.
//!
//! Layout, little endian: magic `QXNN`, format version (u32), 32-byte
//! architecture hash, config hash as a length-prefixed UTF-8 string (u32
//! length), the full network config as length-prefixed JSON, then every
//! trainable tensor followed by every running statistic as f64 values in
//! layout order.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::network::{Network, NetworkConfig};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"QXNN";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn architecture_hash(config: &NetworkConfig) -> [u8; 32] {
    let mut h = Sha256::new();
    for v in config.architecture() {
        h.update((v as u64).to_le_bytes());
    }
    h.finalize().into()
}

pub fn save_checkpoint(path: &Path, net: &Network, config_hash: &str) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&architecture_hash(&net.config));
    buf.extend_from_slice(&(config_hash.len() as u32).to_le_bytes());
    buf.extend_from_slice(config_hash.as_bytes());
    let cfg = serde_json::to_vec(&net.config)?;
    buf.extend_from_slice(&(cfg.len() as u32).to_le_bytes());
    buf.extend_from_slice(&cfg);
    for (_, t) in net.tensors() {
        for x in t {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    for s in net.running_stats() {
        for x in s {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::Checkpoint("truncated checkpoint".into()));
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Loads a checkpoint written for the architecture of `expected`. Returns
/// the network and the stored config hash.
pub fn load_checkpoint(path: &Path, expected: &NetworkConfig) -> Result<(Network, String)> {
    let bytes = fs::read(path)?;
    let mut r = Reader { bytes: &bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Checkpoint(format!("{} is not a network checkpoint", path.display())));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "checkpoint format {version}, this build reads {CHECKPOINT_VERSION}"
        )));
    }
    let arch = r.take(32)?;
    if arch != architecture_hash(expected) {
        return Err(Error::Checkpoint(format!(
            "architecture mismatch: checkpoint {}, expected {}",
            hex::encode(arch),
            hex::encode(architecture_hash(expected))
        )));
    }
    let n = r.u32()? as usize;
    let config_hash = String::from_utf8(r.take(n)?.to_vec()).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let n = r.u32()? as usize;
    let config: NetworkConfig = serde_json::from_slice(r.take(n)?)?;
    if config.architecture() != expected.architecture() {
        return Err(Error::Checkpoint("stored config disagrees with its architecture hash".into()));
    }
    let mut net = Network::zeroed(config)?;
    for (_, t) in net.tensors_mut() {
        for x in t.iter_mut() {
            *x = r.f64()?;
        }
    }
    for s in net.running_stats_mut() {
        for x in s.iter_mut() {
            *x = r.f64()?;
        }
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint("trailing bytes after parameters".into()));
    }
    if !net.is_finite() {
        return Err(Error::Checkpoint("checkpoint holds non-finite parameters".into()));
    }
    Ok((net, config_hash))
}
