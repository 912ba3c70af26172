//! Model checkpoint format: a versioned header followed by the flat
//! parameter vector as little-endian 64-bit floats.

use super::{EncoderConfig, HeadKind, Layout, PredictorModel};
use crate::graph::NodeOp;
use std::fmt;
use std::io::{self, Read, Write};
use std::path::Path;

const MAGIC: [u8; 4] = *b"EVGD";
const VERSION: u32 = 1;

#[derive(Debug)]
pub enum CheckpointError {
    Io(io::Error),
    BadMagic,
    UnsupportedVersion(u32),
    BadHead(u8),
    /// Header parameter count disagrees with the count derived from the
    /// stored configuration.
    CountMismatch { expected: u64, found: u64 },
    Truncated,
}

impl fmt::Display for CheckpointError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckpointError::Io(e) => write!(f, "i/o error: {e}"),
            CheckpointError::BadMagic => write!(f, "not a model checkpoint (bad magic)"),
            CheckpointError::UnsupportedVersion(v) => {
                write!(f, "unsupported checkpoint version {v}")
            }
            CheckpointError::BadHead(b) => write!(f, "unknown head tag {b}"),
            CheckpointError::CountMismatch { expected, found } => {
                write!(f, "parameter count mismatch: header says {found}, config wants {expected}")
            }
            CheckpointError::Truncated => write!(f, "checkpoint file is truncated"),
        }
    }
}

impl std::error::Error for CheckpointError {}

impl From<io::Error> for CheckpointError {
    fn from(e: io::Error) -> Self {
        CheckpointError::Io(e)
    }
}

impl PredictorModel {
    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        let mut buf = Vec::with_capacity(64 + self.params().len() * 8);
        buf.extend_from_slice(&MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.push(match self.head_kind() {
            HeadKind::Binary => 0,
            HeadKind::Regression => 1,
        });
        let c = self.config();
        for dim in [
            NodeOp::KIND_COUNT,
            c.node_embed_dim,
            c.edge_embed_dim,
            c.hidden_dim,
            c.num_layers,
            c.graph_dim,
        ] {
            buf.extend_from_slice(&(dim as u32).to_le_bytes());
        }
        buf.extend_from_slice(&(self.params().len() as u64).to_le_bytes());
        for &p in self.params() {
            buf.extend_from_slice(&p.to_le_bytes());
        }
        let mut file = std::fs::File::create(path)?;
        file.write_all(&buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<PredictorModel, CheckpointError> {
        let mut file = std::fs::File::open(path)?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)?;
        Self::from_checkpoint_bytes(&bytes)
    }

    pub fn from_checkpoint_bytes(bytes: &[u8]) -> Result<PredictorModel, CheckpointError> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(4)? != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = u32::from_le_bytes(cur.take(4)?.try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(CheckpointError::UnsupportedVersion(version));
        }
        let head = match cur.take(1)?[0] {
            0 => HeadKind::Binary,
            1 => HeadKind::Regression,
            other => return Err(CheckpointError::BadHead(other)),
        };
        let mut dims = [0u32; 6];
        for d in dims.iter_mut() {
            *d = u32::from_le_bytes(cur.take(4)?.try_into().expect("4 bytes"));
        }
        let config = EncoderConfig {
            node_embed_dim: dims[1] as usize,
            edge_embed_dim: dims[2] as usize,
            hidden_dim: dims[3] as usize,
            num_layers: dims[4] as usize,
            graph_dim: dims[5] as usize,
        };
        let layout = Layout::new(&config, head, dims[0] as usize);
        let count = u64::from_le_bytes(cur.take(8)?.try_into().expect("8 bytes"));
        if count != layout.total as u64 || dims[0] as usize != NodeOp::KIND_COUNT {
            return Err(CheckpointError::CountMismatch {
                expected: layout.total as u64,
                found: count,
            });
        }
        let mut params = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let chunk = cur.take(8)?;
            params.push(f64::from_le_bytes(chunk.try_into().expect("8 bytes")));
        }
        PredictorModel::from_params(config, head, params)
            .map_err(|_| CheckpointError::CountMismatch { expected: layout.total as u64, found: count })
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.pos + n > self.bytes.len() {
            return Err(CheckpointError::Truncated);
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
}
