//! Model container: magic `WSDCLF\0\0`, u32 version (little-endian), u64
//! payload length, then the model and its feature space as UTF-8 JSON.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{FeatureSpace, KnnModel, NbModel, SvmModel};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"WSDCLF\0\0";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "lowercase")]
pub enum ModelKind {
    Nb(NbModel),
    Svm(SvmModel),
    Knn(KnnModel),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredModel {
    pub term: String,
    pub senses: Vec<String>,
    pub space: FeatureSpace,
    pub model: ModelKind,
}

pub fn save_model<W: Write>(m: &StoredModel, mut w: W) -> Result<()> {
    let payload = serde_json::to_vec(m).map_err(std::io::Error::from)?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(payload.len() as u64).to_le_bytes())?;
    w.write_all(&payload)?;
    w.flush()?;
    Ok(())
}

pub fn load_model<R: Read>(mut r: R) -> Result<StoredModel> {
    let mut head = [0u8; 20];
    r.read_exact(&mut head)
        .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    if &head[..8] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(head[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let len = u64::from_le_bytes(head[12..20].try_into().expect("8 bytes")) as usize;
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload)
        .map_err(|e| Error::Format(format!("truncated payload: {e}")))?;
    let mut m: StoredModel = serde_json::from_slice(&payload).map_err(|e| Error::Format(e.to_string()))?;
    m.space = FeatureSpace::from_keys(std::mem::take(&mut m.space.keys));
    Ok(m)
}
