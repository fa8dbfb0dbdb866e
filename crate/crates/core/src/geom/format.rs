//! On-disk scene document: strict JSON with a fixed schema.
//!
//! ```json
//! {
//!   "version": 1,
//!   "units": "m",
//!   "materials": { "concrete": { "a": 5.24, "b": 0.0, "c": 0.0462, "d": 0.7822 } },
//!   "objects": [
//!     { "id": "ground", "material": "concrete",
//!       "vertices": [[0,0,0],[1,0,0],[1,1,0],[0,1,0]],
//!       "triangles": [[0,1,2],[0,2,3]] }
//!   ]
//! }
//! ```
//!
//! Unknown keys anywhere in the document are rejected, as are versions other
//! than 1 and units other than metres.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::SceneError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDoc {
    pub version: u32,
    pub units: String,
    #[serde(default)]
    pub materials: BTreeMap<String, MaterialDoc>,
    pub objects: Vec<ObjectDoc>,
}

/// Frequency power-law material entry: eps_r = a·f^b, sigma = c·f^d (f in GHz).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialDoc {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectDoc {
    pub id: String,
    pub material: String,
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
}

impl SceneDoc {
    pub fn from_str(text: &str) -> Result<SceneDoc, SceneError> {
        let doc: SceneDoc = serde_json::from_str(text)?;
        if doc.version != 1 {
            return Err(SceneError::Validation(format!(
                "unsupported scene version {} (expected 1)",
                doc.version
            )));
        }
        if doc.units != "m" {
            return Err(SceneError::Validation(format!(
                "unsupported units '{}' (expected \"m\")",
                doc.units
            )));
        }
        Ok(doc)
    }
}
