//! Checkpoint files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic          8 bytes   "RDCKPT\0\0"
//! version        u32
//! config digest  32 bytes  SHA-256 of the config text
//! payload digest 32 bytes  SHA-256 of the payload
//! payload len    u64
//! payload:
//!   config text  u64 length + UTF-8 (key=value lines)
//!   vocab        u64 length + UTF-8 (one word per line)
//!   step         u64
//!   tensors      u64 count, then per tensor:
//!                u64 name length + UTF-8 name, u64 rank, u64 per dim,
//!                f64 per element
//! ```

use std::path::Path;

use rd_autodiff::{ParamStore, Tensor};
use sha2::{Digest, Sha256};

use super::config::TrainConfig;
use crate::model::Model;
use crate::vocab::Vocab;
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"RDCKPT\0\0";
pub const CHECKPOINT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 32 + 32 + 8;

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub config: TrainConfig,
    pub model: Model,
    /// Optimizer steps taken to produce these parameters.
    pub step: u64,
}

impl Checkpoint {
    pub fn config_digest(&self) -> [u8; 32] {
        Sha256::digest(self.config.to_text().as_bytes()).into()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let config = self.config.to_text();
        let mut vocab = Vec::new();
        self.model.vocab.write_to(&mut vocab).expect("writing to memory");

        let mut payload = Vec::new();
        put_bytes(&mut payload, config.as_bytes());
        put_bytes(&mut payload, &vocab);
        put_u64(&mut payload, self.step);
        put_u64(&mut payload, self.model.params.len() as u64);
        for (_, name, t) in self.model.params.iter() {
            put_bytes(&mut payload, name.as_bytes());
            put_u64(&mut payload, t.shape().len() as u64);
            for &d in t.shape() {
                put_u64(&mut payload, d as u64);
            }
            for &x in t.data() {
                payload.extend_from_slice(&x.to_le_bytes());
            }
        }

        let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&Sha256::digest(config.as_bytes()));
        out.extend_from_slice(&Sha256::digest(&payload));
        put_u64(&mut out, payload.len() as u64);
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 12 || &bytes[..8] != MAGIC {
            return Err(Error::Corrupt("missing checkpoint header".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != CHECKPOINT_VERSION {
            return Err(Error::Incompatible { found: version, expected: CHECKPOINT_VERSION });
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::Corrupt("truncated header".into()));
        }
        let config_digest = &bytes[12..44];
        let payload_digest = &bytes[44..76];
        let len = u64::from_le_bytes(bytes[76..84].try_into().expect("8 bytes")) as usize;
        let payload = &bytes[HEADER_LEN..];
        if payload.len() != len {
            return Err(Error::Corrupt(format!("payload is {} bytes, header says {len}", payload.len())));
        }
        if Sha256::digest(payload).as_slice() != payload_digest {
            return Err(Error::Corrupt("payload digest mismatch".into()));
        }

        let mut r = Reader { buf: payload, pos: 0 };
        let config_text = r.string()?;
        if Sha256::digest(config_text.as_bytes()).as_slice() != config_digest {
            return Err(Error::Corrupt("config digest mismatch".into()));
        }
        let config = TrainConfig::from_text(&config_text)?;
        let vocab = Vocab::read_from(r.bytes()?)?;
        let step = r.u64()?;
        let count = r.u64()? as usize;
        let mut params = ParamStore::new();
        for _ in 0..count {
            let name = r.string()?;
            let rank = r.u64()? as usize;
            let shape = (0..rank).map(|_| r.u64().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
            let n: usize = shape.iter().product();
            let data = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
            params.insert(name, Tensor::new(shape, data)?)?;
        }
        if r.pos != payload.len() {
            return Err(Error::Corrupt("trailing bytes after tensors".into()));
        }
        let model = Model::from_parts(config.model.clone(), vocab, params)?;
        Ok(Checkpoint { config, model, step })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| io_err(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
        Self::from_bytes(&bytes)
    }
}

pub fn save_checkpoint(ck: &Checkpoint, path: &Path) -> Result<()> {
    ck.save(path)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    Checkpoint::load(path)
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

fn put_u64(out: &mut Vec<u8>, x: u64) {
    out.extend_from_slice(&x.to_le_bytes());
}

fn put_bytes(out: &mut Vec<u8>, b: &[u8]) {
    put_u64(out, b.len() as u64);
    out.extend_from_slice(b);
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Corrupt("payload ends early".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn bytes(&mut self) -> Result<&'a [u8]> {
        let n = self.u64()? as usize;
        self.take(n)
    }

    fn string(&mut self) -> Result<String> {
        String::from_utf8(self.bytes()?.to_vec()).map_err(|_| Error::Corrupt("invalid UTF-8 in payload".into()))
    }
}
