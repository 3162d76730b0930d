//! Model persistence: a versioned, self-describing JSON document.
//!
//! The random-projection map stores only `(d, r, sigma, seed)` and is
//! regenerated on load, which keeps files small at large feature counts and
//! reproduces scores bit-identically. The landmark map stores its arrays
//! explicitly. Weights serialize through the shortest decimal form that
//! parses back to the same float, so a save/load cycle is lossless.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ExposeError, Result};
use crate::features::{FeatureMap, NystroemMap, RksProjection};
use crate::model::{ExposeModel, Mode};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum MapSchema {
    Rks {
        d: usize,
        r: usize,
        sigma: f64,
        seed: u64,
    },
    Nystroem {
        landmarks: Vec<Vec<f64>>,
        sigma: f64,
        eigenvalues: Vec<f64>,
        eigenvectors: Vec<Vec<f64>>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ModeSchema {
    Batch,
    Online,
    Window { l: usize },
    Decay { gamma: f64 },
}

#[derive(Serialize, Deserialize)]
struct ModelSchema {
    format_version: u32,
    map: MapSchema,
    mode: ModeSchema,
    weights: Vec<f64>,
    count: u64,
    normalize: bool,
    /// Ring-buffer contents, oldest first; present only in window mode so
    /// updates resume exactly where they left off.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    window_buffer: Option<Vec<Vec<f64>>>,
}

fn to_schema(model: &ExposeModel) -> ModelSchema {
    let map = match model.map() {
        FeatureMap::Rks(p) => MapSchema::Rks {
            d: p.input_dim(),
            r: p.expansions(),
            sigma: p.sigma(),
            seed: p.seed(),
        },
        FeatureMap::Nystroem(m) => MapSchema::Nystroem {
            landmarks: m.landmarks().to_vec(),
            sigma: m.sigma(),
            eigenvalues: m.eigenvalues().to_vec(),
            eigenvectors: m.eigenvectors().to_vec(),
        },
    };
    let mode = match model.mode() {
        Mode::Batch => ModeSchema::Batch,
        Mode::Online => ModeSchema::Online,
        Mode::Window { len } => ModeSchema::Window { l: len },
        Mode::Decay { gamma } => ModeSchema::Decay { gamma },
    };
    let window_buffer = match model.mode() {
        Mode::Window { .. } => Some(model.window_buffer().map(|f| f.to_vec()).collect()),
        _ => None,
    };
    ModelSchema {
        format_version: FORMAT_VERSION,
        map,
        mode,
        weights: model.weights().to_vec(),
        count: model.count(),
        normalize: model.normalize_default(),
        window_buffer,
    }
}

fn from_schema(schema: ModelSchema) -> Result<ExposeModel> {
    if schema.format_version != FORMAT_VERSION {
        return Err(ExposeError::ModelFile(format!(
            "unsupported format_version {} (this build reads {FORMAT_VERSION})",
            schema.format_version
        )));
    }
    let map = match schema.map {
        MapSchema::Rks { d, r, sigma, seed } => {
            FeatureMap::Rks(RksProjection::fit(d, r, sigma, seed)?)
        }
        MapSchema::Nystroem {
            landmarks,
            sigma,
            eigenvalues,
            eigenvectors,
        } => FeatureMap::Nystroem(NystroemMap::from_parts(
            landmarks,
            sigma,
            eigenvalues,
            eigenvectors,
        )?),
    };
    let mode = match schema.mode {
        ModeSchema::Batch => Mode::Batch,
        ModeSchema::Online => Mode::Online,
        ModeSchema::Window { l } => Mode::Window { len: l },
        ModeSchema::Decay { gamma } => Mode::Decay { gamma },
    };
    ExposeModel::from_raw_parts(
        map,
        schema.weights,
        schema.count,
        mode,
        schema.window_buffer.unwrap_or_default(),
        schema.normalize,
    )
}

/// Serializes a model as pretty-printed JSON.
pub fn model_to_string(model: &ExposeModel) -> String {
    serde_json::to_string_pretty(&to_schema(model)).expect("model schema serializes")
}

pub fn save_model(model: &ExposeModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_string(model))?;
    Ok(())
}

/// Parses a model document, revalidating every invariant.
pub fn model_from_str(text: &str) -> Result<ExposeModel> {
    let schema: ModelSchema =
        serde_json::from_str(text).map_err(|e| ExposeError::ModelFile(e.to_string()))?;
    from_schema(schema)
}

pub fn load_model(path: &Path) -> Result<ExposeModel> {
    model_from_str(&fs::read_to_string(path)?)
}
