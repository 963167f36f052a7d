//! Versioned JSON model store.
//!
//! Layout: `{"format_version": 1, "records": [...]}`, pretty-printed with a
//! fixed field order so that two stores can be diffed line by line. Floats are
//! written in shortest round-trip form, so reloaded models score bit-identically.

use serde::{Deserialize, Serialize};

use super::ModelRecord;
use crate::error::{Error, Result};

pub const STORE_FORMAT_VERSION: u64 = 1;

#[derive(Serialize)]
struct StoreOut<'a> {
    format_version: u64,
    records: &'a [ModelRecord],
}

#[derive(Deserialize)]
struct Envelope {
    format_version: u64,
    records: serde_json::Value,
}

pub fn save_models(records: &[ModelRecord]) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(&StoreOut {
        format_version: STORE_FORMAT_VERSION,
        records,
    })?;
    out.push(b'\n');
    Ok(out)
}

pub fn load_models(bytes: &[u8]) -> Result<Vec<ModelRecord>> {
    let env: Envelope =
        serde_json::from_slice(bytes).map_err(|e| Error::CorruptPayload(e.to_string()))?;
    if env.format_version != STORE_FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: env.format_version,
            expected: STORE_FORMAT_VERSION,
        });
    }
    serde_json::from_value(env.records).map_err(|e| Error::CorruptPayload(e.to_string()))
}
