//! Serialization of nets: OCPN and OPID JSON, PNML with an OPID tool extension, and DOT.

mod dot;
mod ocpn_json;
mod opid_json;
mod pnml;

pub use dot::{ocpn_to_dot, opid_to_dot};
pub use ocpn_json::{read_ocpn_json, write_ocpn_json};
pub use opid_json::{read_opid_json, write_opid_json};
pub use pnml::{read_opid_pnml, write_opid_pnml};

use serde::de::DeserializeOwned;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IoError {
    #[error("malformed document: {0}")]
    Malformed(String),
    /// `pointer` is a JSON pointer for JSON inputs and an element path for PNML.
    #[error("schema violation at {pointer}: {message}")]
    Schema { pointer: String, message: String },
}

impl IoError {
    pub(crate) fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        IoError::Schema { pointer: pointer.into(), message: message.into() }
    }
}

/// Parses JSON in two steps so syntax errors and shape errors are told apart; shape errors carry
/// the JSON pointer of the offending value.
pub(crate) fn from_json<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, IoError> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| IoError::Malformed(e.to_string()))?;
    serde_path_to_error::deserialize(value).map_err(|e| {
        let mut pointer = String::new();
        for seg in e.path().iter() {
            use serde_path_to_error::Segment;
            match seg {
                Segment::Seq { index } => pointer.push_str(&format!("/{index}")),
                Segment::Map { key } => pointer.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
                Segment::Enum { variant } => pointer.push_str(&format!("/{variant}")),
                Segment::Unknown => pointer.push_str("/?"),
            }
        }
        let message = e.inner().to_string();
        IoError::schema(if pointer.is_empty() { "/".to_string() } else { pointer }, message)
    })
}
