//! Self-describing model files.
//!
//! A model file is a single TOML document carrying the model kind, a
//! schema version, provenance metadata (platform, training scenario,
//! seed, timestamp) and the kind-specific payload. Serialization is
//! deterministic: identical content with identical metadata produces
//! byte-identical files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::mlp::{MlpModel, NormStats, TrainConfig, DEFAULT_LAYER_DIMS};
use crate::regression::{CustomRegParams, DefaultRegParams, Variant};

/// Current file schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// Kind tag of a model file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    DefaultReg,
    CustomReg,
    Mlp,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::DefaultReg => "default_reg",
            ModelKind::CustomReg => "custom_reg",
            ModelKind::Mlp => "mlp",
        }
    }

    pub fn parse(s: &str) -> Option<ModelKind> {
        match s {
            "default_reg" => Some(ModelKind::DefaultReg),
            "custom_reg" => Some(ModelKind::CustomReg),
            "mlp" => Some(ModelKind::Mlp),
            _ => None,
        }
    }
}

/// Kind-specific parameter record.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelPayload {
    DefaultReg(DefaultRegParams),
    CustomReg(CustomRegParams),
    /// Network weights plus the training configuration that produced them.
    Mlp {
        model: MlpModel,
        train_config: TrainConfig,
    },
}

impl ModelPayload {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelPayload::DefaultReg(_) => ModelKind::DefaultReg,
            ModelPayload::CustomReg(_) => ModelKind::CustomReg,
            ModelPayload::Mlp { .. } => ModelKind::Mlp,
        }
    }
}

/// A model plus its provenance metadata, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub payload: ModelPayload,
    pub platform: String,
    /// Free-form tag of the training scenario ("A".."D" or custom).
    pub train_scenario: String,
    pub seed: u64,
    /// ISO-8601 timestamp; part of the metadata, chosen by the caller.
    pub created_at: String,
}

impl ModelFile {
    pub fn model_kind(&self) -> ModelKind {
        self.payload.kind()
    }
}

#[derive(Serialize, Deserialize)]
struct Doc {
    schema_version: u32,
    model_kind: String,
    platform: String,
    train_scenario: String,
    seed: u64,
    created_at: String,
    payload: toml::Value,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DefaultRegDoc {
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomRegDoc {
    coeffs: Vec<f64>,
    variant: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MlpDoc {
    layer_dims: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    norm_mean: Vec<f64>,
    norm_std: Vec<f64>,
    learning_rate: f64,
    batch_size: usize,
    epochs: usize,
    l1_activity_coeff: f64,
    adam_beta1: f64,
    adam_beta2: f64,
    adam_eps: f64,
    shuffle_each_epoch: bool,
}

/// Renders the model file as its canonical TOML text.
pub fn model_to_string(m: &ModelFile) -> Result<String, CoreError> {
    let payload = match &m.payload {
        ModelPayload::DefaultReg(p) => toml::Value::try_from(DefaultRegDoc {
            coeffs: p.coeffs().to_vec(),
        }),
        ModelPayload::CustomReg(p) => toml::Value::try_from(CustomRegDoc {
            coeffs: p.coeffs().to_vec(),
            variant: p.variant.as_str().to_string(),
        }),
        ModelPayload::Mlp {
            model,
            train_config,
        } => toml::Value::try_from(MlpDoc {
            layer_dims: model.layer_dims().to_vec(),
            weights: model.weights().to_vec(),
            biases: model.biases().to_vec(),
            norm_mean: model.norm_stats().mean.to_vec(),
            norm_std: model.norm_stats().std.to_vec(),
            learning_rate: train_config.learning_rate,
            batch_size: train_config.batch_size,
            epochs: train_config.epochs,
            l1_activity_coeff: train_config.l1_activity_coeff,
            adam_beta1: train_config.adam_beta1,
            adam_beta2: train_config.adam_beta2,
            adam_eps: train_config.adam_eps,
            shuffle_each_epoch: train_config.shuffle_each_epoch,
        }),
    }
    .map_err(|e| CoreError::Toml {
        path: "<memory>".into(),
        detail: e.to_string(),
    })?;

    let doc = Doc {
        schema_version: SCHEMA_VERSION,
        model_kind: m.model_kind().as_str().to_string(),
        platform: m.platform.clone(),
        train_scenario: m.train_scenario.clone(),
        seed: m.seed,
        created_at: m.created_at.clone(),
        payload,
    };
    toml::to_string(&doc).map_err(|e| CoreError::Toml {
        path: "<memory>".into(),
        detail: e.to_string(),
    })
}

/// Writes the model file to disk.
pub fn save_model(m: &ModelFile, path: impl AsRef<Path>) -> Result<(), CoreError> {
    let path = path.as_ref();
    let text = model_to_string(m)?;
    fs::write(path, text).map_err(|e| CoreError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Reads a model file back, validating schema version, kind/payload
/// agreement and payload invariants.
pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile, CoreError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| CoreError::Io {
        path: display.clone(),
        source: e,
    })?;
    let doc: Doc = toml::from_str(&text).map_err(|e| CoreError::Toml {
        path: display.clone(),
        detail: e.to_string(),
    })?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(CoreError::SchemaVersion {
            path: display,
            found: doc.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    let kind = ModelKind::parse(&doc.model_kind).ok_or_else(|| CoreError::UnknownModelKind {
        path: display.clone(),
        kind: doc.model_kind.clone(),
    })?;

    let payload = parse_payload(kind, &doc, &display)?;
    Ok(ModelFile {
        payload,
        platform: doc.platform,
        train_scenario: doc.train_scenario,
        seed: doc.seed,
        created_at: doc.created_at,
    })
}

fn parse_payload(kind: ModelKind, doc: &Doc, path: &str) -> Result<ModelPayload, CoreError> {
    match try_parse_payload(kind, doc) {
        Ok(p) => Ok(p),
        Err(detail) => {
            // Distinguish a mislabeled payload from a broken one.
            for other in [ModelKind::DefaultReg, ModelKind::CustomReg, ModelKind::Mlp] {
                if other != kind && try_parse_payload(other, doc).is_ok() {
                    return Err(CoreError::KindMismatch {
                        path: path.to_string(),
                        declared: kind.as_str().to_string(),
                        detail: format!("payload parses as `{}`", other.as_str()),
                    });
                }
            }
            Err(CoreError::MalformedPayload {
                path: path.to_string(),
                detail,
            })
        }
    }
}

fn try_parse_payload(kind: ModelKind, doc: &Doc) -> Result<ModelPayload, String> {
    let value = doc.payload.clone();
    match kind {
        ModelKind::DefaultReg => {
            let d: DefaultRegDoc = value.try_into().map_err(|e| e.to_string())?;
            let coeffs: [f64; 5] = d
                .coeffs
                .try_into()
                .map_err(|v: Vec<f64>| format!("expected 5 coefficients, found {}", v.len()))?;
            Ok(ModelPayload::DefaultReg(DefaultRegParams::from_coeffs(
                coeffs,
            )))
        }
        ModelKind::CustomReg => {
            let d: CustomRegDoc = value.try_into().map_err(|e| e.to_string())?;
            let coeffs: [f64; 13] = d
                .coeffs
                .try_into()
                .map_err(|v: Vec<f64>| format!("expected 13 coefficients, found {}", v.len()))?;
            let variant = Variant::parse(&d.variant)
                .ok_or_else(|| format!("unknown variant `{}`", d.variant))?;
            let params = CustomRegParams::new(coeffs, variant).map_err(|e| e.to_string())?;
            Ok(ModelPayload::CustomReg(params))
        }
        ModelKind::Mlp => {
            let d: MlpDoc = value.try_into().map_err(|e| e.to_string())?;
            let mean: [f64; 3] = d
                .norm_mean
                .try_into()
                .map_err(|v: Vec<f64>| format!("norm_mean must have 3 entries, found {}", v.len()))?;
            let std: [f64; 3] = d
                .norm_std
                .try_into()
                .map_err(|v: Vec<f64>| format!("norm_std must have 3 entries, found {}", v.len()))?;
            let model = MlpModel::from_parts(
                d.layer_dims,
                d.weights,
                d.biases,
                NormStats { mean, std },
            )
            .map_err(|e| e.to_string())?;
            let train_config = TrainConfig {
                learning_rate: d.learning_rate,
                batch_size: d.batch_size,
                epochs: d.epochs,
                l1_activity_coeff: d.l1_activity_coeff,
                adam_beta1: d.adam_beta1,
                adam_beta2: d.adam_beta2,
                adam_eps: d.adam_eps,
                seed: doc.seed,
                shuffle_each_epoch: d.shuffle_each_epoch,
            };
            Ok(ModelPayload::Mlp {
                model,
                train_config,
            })
        }
    }
}

/// Convenience constructor for an MLP payload with stock dimensions.
pub fn mlp_payload(model: MlpModel, train_config: TrainConfig) -> ModelPayload {
    debug_assert_eq!(model.layer_dims(), DEFAULT_LAYER_DIMS);
    ModelPayload::Mlp {
        model,
        train_config,
    }
}
