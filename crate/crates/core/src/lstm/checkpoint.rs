//! Checkpoint layout (little-endian):
//!
//! ```text
//! magic "WSDLSTM\0" | u32 version | u32 d | u32 K
//! u64 config length | config as JSON
//! every parameter field in storage order as f64
//! ```

use std::io::{Read, Write};

use super::{LstmConfig, LstmParams};
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"WSDLSTM\0";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(p: &LstmParams, cfg: &LstmConfig, mut w: W) -> Result<()> {
    let json = serde_json::to_vec(cfg).map_err(std::io::Error::from)?;
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(p.dim() as u32).to_le_bytes())?;
    w.write_all(&(p.n_classes() as u32).to_le_bytes())?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    for (_, f) in p.fields() {
        for v in f {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| Error::Format(format!("truncated {what}: {e}")))
}

fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<(LstmParams, LstmConfig)> {
    let mut magic = [0u8; 8];
    read_exact(&mut r, &mut magic, "magic")?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Format("not an LSTM checkpoint".into()));
    }
    let version = read_u32(&mut r, "version")?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let d = read_u32(&mut r, "dimension")? as usize;
    let k = read_u32(&mut r, "class count")? as usize;
    let mut len = [0u8; 8];
    read_exact(&mut r, &mut len, "config length")?;
    let len = u64::from_le_bytes(len) as usize;
    if len > 1 << 20 {
        return Err(Error::Format(format!("config block of {len} bytes")));
    }
    let mut json = vec![0u8; len];
    read_exact(&mut r, &mut json, "config")?;
    let cfg: LstmConfig = serde_json::from_slice(&json).map_err(|e| Error::Format(e.to_string()))?;
    let mut p = LstmParams::zeros(d, k);
    let mut b = [0u8; 8];
    for (name, f) in p.fields_mut() {
        for v in f.iter_mut() {
            read_exact(&mut r, &mut b, name)?;
            *v = f64::from_le_bytes(b);
        }
    }
    if !p.is_finite() {
        return Err(Error::Format("non-finite parameter".into()));
    }
    Ok((p, cfg))
}
