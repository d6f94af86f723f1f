//! Versioned JSON checkpoints of trained models.
//!
//! Layout (all numbers are JSON doubles written with round-trip precision):
//!
//! ```json
//! {
//!   "format": "bepgp-checkpoint",
//!   "version": 1,
//!   "family": "wave1d_halfline_neumann",
//!   "length": 3.141592653589793,
//!   "log_noise": -9.21,
//!   "elements": [
//!     { "theta": [[re, im], ...], "branch": "+", "log_var": 0.0, "log_scale": 0.0 }
//!   ],
//!   "train_config_sha256": "hex digest of the training config JSON"
//! }
//! ```

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ModelState, TrainConfig};
use crate::basis::{Branch, FamilyId, Params};
use crate::error::{Error, Result};

pub const FORMAT: &str = "bepgp-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementRecord {
    pub theta: Vec<[f64; 2]>,
    pub branch: Branch,
    pub log_var: f64,
    pub log_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub family: FamilyId,
    pub length: f64,
    pub log_noise: f64,
    pub elements: Vec<ElementRecord>,
    pub train_config_sha256: String,
}

/// SHA-256 of the config's canonical JSON serialization.
pub fn config_hash(cfg: &TrainConfig) -> String {
    let json = serde_json::to_vec(cfg).expect("train config serializes");
    hex::encode(Sha256::digest(&json))
}

impl Checkpoint {
    pub fn new(model: &ModelState, cfg: &TrainConfig) -> Self {
        let elements = model
            .thetas
            .iter()
            .zip(&model.log_var)
            .zip(&model.log_scales)
            .map(|((p, &log_var), &log_scale)| ElementRecord {
                theta: p.values.iter().map(|z| [z.re, z.im]).collect(),
                branch: p.branch,
                log_var,
                log_scale,
            })
            .collect();
        Self {
            format: FORMAT.into(),
            version: VERSION,
            family: model.family,
            length: model.length,
            log_noise: model.log_noise,
            elements,
            train_config_sha256: config_hash(cfg),
        }
    }

    pub fn model(&self) -> Result<ModelState> {
        if self.format != FORMAT {
            return Err(Error::Invalid(format!("not a checkpoint: format `{}`", self.format)));
        }
        if self.version != VERSION {
            return Err(Error::Invalid(format!(
                "unsupported checkpoint version {}",
                self.version
            )));
        }
        let thetas = self
            .elements
            .iter()
            .map(|e| Params {
                values: e.theta.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
                branch: e.branch,
            })
            .collect();
        let model = ModelState {
            family: self.family,
            length: self.length,
            thetas,
            log_var: self.elements.iter().map(|e| e.log_var).collect(),
            log_noise: self.log_noise,
            log_scales: self.elements.iter().map(|e| e.log_scale).collect(),
        };
        model.validate(&model.basis()?)?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
