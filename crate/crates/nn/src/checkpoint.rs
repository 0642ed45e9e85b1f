//! Parameter checkpoint file.
//!
//! ```text
//! "DPCNNCK1"                    8 bytes
//! version                       u32 (= 1)
//! entry count                   u32
//! per entry: name length u16, UTF-8 name, rank u8, rank × u32 dims
//! per entry: Π dims × f32 values
//! CRC32 of all preceding bytes  u32
//! ```
//! All integers and floats are little-endian.

use std::path::Path;

use crate::error::{NnError, Result};
use crate::model::{CnnParams, GROUP_NAMES};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"DPCNNCK1";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f32>,
}

fn bad<T>(msg: impl Into<String>) -> Result<T> {
    Err(NnError::Checkpoint(msg.into()))
}

pub fn encode_checkpoint(entries: &[CheckpointEntry]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(entries.len() as u32).to_le_bytes());
    for e in entries {
        if e.shape.iter().product::<usize>() != e.values.len() {
            return bad(format!("{}: shape {:?} does not match {} values", e.name, e.shape, e.values.len()));
        }
        if e.name.len() > u16::MAX as usize || e.shape.len() > u8::MAX as usize {
            return bad(format!("{}: name or rank too long", e.name));
        }
        out.extend_from_slice(&(e.name.len() as u16).to_le_bytes());
        out.extend_from_slice(e.name.as_bytes());
        out.push(e.shape.len() as u8);
        for &d in &e.shape {
            let d = u32::try_from(d).or_else(|_| bad(format!("{}: dimension too large", e.name)))?;
            out.extend_from_slice(&d.to_le_bytes());
        }
    }
    for e in entries {
        for v in &e.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return bad("truncated");
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Vec<CheckpointEntry>> {
    if bytes.len() < 20 {
        return bad("truncated");
    }
    if &bytes[..8] != CHECKPOINT_MAGIC {
        return bad("bad magic");
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    let mut r = Reader { buf: body, pos: 8 };
    let version = r.u32()?;
    if version != VERSION {
        return bad(format!("version {version}, expected {VERSION}"));
    }
    if crc32fast::hash(body) != stored {
        return bad("checksum mismatch");
    }
    let count = r.u32()? as usize;
    let mut heads = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let len = u16::from_le_bytes(r.take(2)?.try_into().unwrap()) as usize;
        let name = String::from_utf8(r.take(len)?.to_vec()).or_else(|_| bad("name is not UTF-8"))?;
        let rank = r.take(1)?[0] as usize;
        let shape = (0..rank).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        heads.push((name, shape));
    }
    let mut entries = Vec::with_capacity(heads.len());
    for (name, shape) in heads {
        let n: usize = shape.iter().product();
        let raw = r.take(n.checked_mul(4).ok_or_else(|| NnError::Checkpoint("size overflow".into()))?)?;
        let values = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        entries.push(CheckpointEntry { name, shape, values });
    }
    if r.pos != body.len() {
        return bad("trailing bytes");
    }
    Ok(entries)
}

pub fn save_checkpoint(path: &Path, entries: &[CheckpointEntry]) -> Result<()> {
    let bytes = encode_checkpoint(entries)?;
    std::fs::write(path, bytes).map_err(|source| NnError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_checkpoint(path: &Path) -> Result<Vec<CheckpointEntry>> {
    let bytes = std::fs::read(path).map_err(|source| NnError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode_checkpoint(&bytes)
}

impl<T: Scalar> CnnParams<T> {
    pub fn to_entries(&self) -> Vec<CheckpointEntry> {
        self.groups
            .iter()
            .zip(GROUP_NAMES)
            .map(|(g, name)| CheckpointEntry {
                name: name.to_string(),
                shape: g.shape().to_vec(),
                values: g.data.iter().map(|v| v.as_f32()).collect(),
            })
            .collect()
    }

    /// Rebuild from entries named after the parameter groups; extra entries are ignored.
    pub fn from_entries(entries: &[CheckpointEntry]) -> Result<Self> {
        let groups = GROUP_NAMES
            .iter()
            .map(|name| {
                let e = entries
                    .iter()
                    .find(|e| e.name == *name)
                    .ok_or_else(|| NnError::Checkpoint(format!("missing group {name}")))?;
                Tensor::new(&e.shape, e.values.iter().map(|&v| T::from_f32(v)).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CnnParams { groups })
    }
}
