//! On-disk cache for precomputed unitary tables.
//!
//! File layout, little endian: magic `QXUT`, format version (u32), 32-byte
//! key, entry count (u64), matrix dimension (u64), then every entry as
//! row-major `(re, im)` pairs of f64.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::quantum::{ComplexMatrix, UnitaryOperator};

const MAGIC: &[u8; 4] = b"QXUT";
pub const FORMAT_VERSION: u32 = 1;

/// SHA-256 of the JSON encoding of `parts`.
pub fn cache_key<T: Serialize>(parts: &T) -> Result<[u8; 32]> {
    let json = serde_json::to_vec(parts)?;
    Ok(Sha256::digest(&json).into())
}

pub fn cache_path(dir: &Path, kind: &str, key: &[u8; 32]) -> PathBuf {
    dir.join(format!("{kind}-{}.bin", hex::encode(&key[..8])))
}

pub fn write_table(path: &Path, key: &[u8; 32], table: &[UnitaryOperator]) -> Result<()> {
    let dim = table.first().map_or(0, |u| u.dim());
    let mut buf = Vec::with_capacity(56 + table.len() * dim * dim * 16);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(key);
    buf.extend_from_slice(&(table.len() as u64).to_le_bytes());
    buf.extend_from_slice(&(dim as u64).to_le_bytes());
    for u in table {
        let m = u.matrix();
        for r in 0..dim {
            for c in 0..dim {
                let z = m.get(r, c);
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    // Write to a sibling and rename so readers never see a partial file.
    let tmp = path.with_extension("tmp");
    fs::File::create(&tmp)?.write_all(&buf)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a table written under `key`. Returns `Ok(None)` when the file is
/// missing or was written for a different key or format version.
pub fn read_table(path: &Path, key: &[u8; 32]) -> Result<Option<Vec<UnitaryOperator>>> {
    let mut bytes = Vec::new();
    match fs::File::open(path) {
        Ok(mut f) => f.read_to_end(&mut bytes)?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let corrupt = |what: &str| Error::InvalidInput(format!("{}: {what}", path.display()));
    if bytes.len() < 56 || &bytes[..4] != MAGIC {
        return Err(corrupt("not a unitary table file"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION || &bytes[8..40] != key {
        return Ok(None);
    }
    let count = u64::from_le_bytes(bytes[40..48].try_into().unwrap()) as usize;
    let dim = u64::from_le_bytes(bytes[48..56].try_into().unwrap()) as usize;
    if bytes.len() != 56 + count * dim * dim * 16 {
        return Err(corrupt("truncated table"));
    }
    let mut values = bytes[56..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut table = Vec::with_capacity(count);
    for _ in 0..count {
        let entries: Vec<Complex64> = (0..dim * dim)
            .map(|_| Complex64::new(values.next().unwrap(), values.next().unwrap()))
            .collect();
        table.push(UnitaryOperator::new(ComplexMatrix::from_rows(dim, &entries)?)?);
    }
    Ok(Some(table))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_key_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let key = cache_key(&("a", 1)).unwrap();
        let other = cache_key(&("a", 2)).unwrap();
        let path = cache_path(dir.path(), "t", &key);
        let x = ComplexMatrix::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let table = vec![UnitaryOperator::identity(2), UnitaryOperator::new(x).unwrap().with_phase(0.3)];
        write_table(&path, &key, &table).unwrap();
        assert_eq!(read_table(&path, &key).unwrap().unwrap(), table);
        assert!(read_table(&path, &other).unwrap().is_none());
        assert!(read_table(&dir.path().join("missing.bin"), &key).unwrap().is_none());
    }
}
