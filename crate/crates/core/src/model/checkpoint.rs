use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ModelParams;
use crate::error::{Error, Result};

const FORMAT: &str = "splal-checkpoint";
const VERSION: u32 = 1;

/// Versioned JSON container for the evaluation (EMA) and live weights.
///
/// Floats are written in shortest round-trip form, so a reload reproduces
/// forward outputs bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub dims: Vec<usize>,
    pub ema: Vec<f64>,
    pub live: Vec<f64>,
}

impl Checkpoint {
    pub fn new(seed: u64, ema: &ModelParams, live: &ModelParams) -> Self {
        Self {
            format: FORMAT.to_string(),
            version: VERSION,
            seed,
            dims: ema.dims().to_vec(),
            ema: ema.as_slice().to_vec(),
            live: live.as_slice().to_vec(),
        }
    }

    pub fn ema_params(&self) -> Result<ModelParams> {
        ModelParams::from_flat(&self.dims, self.ema.clone())
    }

    pub fn live_params(&self) -> Result<ModelParams> {
        ModelParams::from_flat(&self.dims, self.live.clone())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ckpt: Checkpoint = serde_json::from_str(&text)?;
        if ckpt.format != FORMAT || ckpt.version != VERSION {
            return Err(Error::domain(format!(
                "{}: unsupported checkpoint {} v{}",
                path.display(),
                ckpt.format,
                ckpt.version
            )));
        }
        // validates the flat arrays against the recorded shapes
        ckpt.ema_params()?;
        ckpt.live_params()?;
        Ok(ckpt)
    }
}
