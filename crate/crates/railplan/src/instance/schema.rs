//! JSON instance document schema.
//!
//! The document shape is part of the interface contract: field names are
//! fixed, unknown fields are rejected, and belts are `[lower, upper]` pairs.
//! Parsing applies defaults, then validates; an invalid document fails with
//! the full violation report.

use serde::{Deserialize, Serialize};

use super::validate::{validate_instance, ValidationReport};
use super::{CapacityBelt, Instance, Link, Params, ServicePair, Shipment, Yard};

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("instance document does not match the schema: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("instance document is semantically invalid:\n{0}")]
    Invalid(ValidationReport),
}

/// Parses and fully validates a JSON instance document.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let raw: RawInstance = serde_json::from_str(text)?;
    let inst = raw.into_instance();
    let report = validate_instance(&inst);
    if report.is_empty() {
        Ok(inst)
    } else {
        Err(ParseError::Invalid(report))
    }
}

/// Serializes an instance back to its document form.
///
/// All fields are written explicitly, so `parse ∘ serialize` is the identity
/// on any instance produced by [`parse_instance`].
pub fn serialize_instance(inst: &Instance) -> String {
    let raw = RawInstance::from_instance(inst);
    let mut out = serde_json::to_string_pretty(&raw).expect("instance serialization cannot fail");
    out.push('\n');
    out
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    yards: Vec<RawYard>,
    links: Vec<RawLink>,
    shipments: Vec<RawShipment>,
    #[serde(default)]
    params: RawParams,
    #[serde(default)]
    mandated_services: Vec<(String, String)>,
    #[serde(default)]
    forbidden_services: Vec<(String, String)>,
    #[serde(default)]
    mandated_paths: Vec<RawMandatedPath>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawYard {
    id: String,
    c: f64,
    tau: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reclass_belt: Option<CapacityBelt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    track_belt: Option<CapacityBelt>,
    #[serde(default = "one")]
    theta: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    id: String,
    from_yard: String,
    to_yard: String,
    length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    capacity_belt: Option<CapacityBelt>,
    #[serde(default = "one")]
    beta_n: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawShipment {
    origin: String,
    destination: String,
    volume: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(default = "default_train_size")]
    train_size: f64,
    #[serde(default)]
    train_size_overrides: Vec<RawTrainSizeOverride>,
    #[serde(default = "default_lambda")]
    lambda: f64,
    #[serde(default = "default_cars_per_track")]
    cars_per_track: f64,
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(default = "default_beta")]
    beta: f64,
    #[serde(default = "default_k", rename = "K")]
    k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    detour_cap: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrainSizeOverride {
    from: String,
    to: String,
    size: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMandatedPath {
    from: String,
    to: String,
    path: Vec<String>,
}

fn one() -> f64 {
    1.0
}

fn default_train_size() -> f64 {
    Params::DEFAULT_TRAIN_SIZE
}

fn default_lambda() -> f64 {
    Params::DEFAULT_LAMBDA
}

fn default_cars_per_track() -> f64 {
    Params::DEFAULT_CARS_PER_TRACK
}

fn default_alpha() -> f64 {
    Params::DEFAULT_ALPHA
}

fn default_beta() -> f64 {
    Params::DEFAULT_BETA
}

fn default_k() -> usize {
    Params::DEFAULT_K_PATHS
}

impl Default for RawParams {
    fn default() -> Self {
        RawParams {
            train_size: default_train_size(),
            train_size_overrides: Vec::new(),
            lambda: default_lambda(),
            cars_per_track: default_cars_per_track(),
            alpha: default_alpha(),
            beta: default_beta(),
            k: default_k(),
            detour_cap: None,
        }
    }
}

impl RawInstance {
    fn into_instance(self) -> Instance {
        Instance {
            yards: self
                .yards
                .into_iter()
                .map(|y| Yard {
                    id: y.id,
                    c: y.c,
                    tau: y.tau,
                    reclass_belt: y.reclass_belt,
                    track_belt: y.track_belt,
                    theta: y.theta,
                })
                .collect(),
            links: self
                .links
                .into_iter()
                .map(|l| Link {
                    id: l.id,
                    from_yard: l.from_yard,
                    to_yard: l.to_yard,
                    length: l.length,
                    capacity_belt: l.capacity_belt,
                    beta_n: l.beta_n,
                })
                .collect(),
            shipments: self
                .shipments
                .into_iter()
                .map(|s| Shipment {
                    origin: s.origin,
                    destination: s.destination,
                    volume: s.volume,
                })
                .collect(),
            params: Params {
                train_size: self.params.train_size,
                train_size_overrides: self
                    .params
                    .train_size_overrides
                    .into_iter()
                    .map(|o| (ServicePair::new(o.from, o.to), o.size))
                    .collect(),
                lambda: self.params.lambda,
                cars_per_track: self.params.cars_per_track,
                alpha: self.params.alpha,
                beta: self.params.beta,
                k_paths: self.params.k,
                detour_cap: self.params.detour_cap,
            },
            mandated_services: self
                .mandated_services
                .into_iter()
                .map(|(f, t)| ServicePair(f, t))
                .collect(),
            forbidden_services: self
                .forbidden_services
                .into_iter()
                .map(|(f, t)| ServicePair(f, t))
                .collect(),
            mandated_paths: self
                .mandated_paths
                .into_iter()
                .map(|p| (ServicePair::new(p.from, p.to), p.path))
                .collect(),
        }
    }

    fn from_instance(inst: &Instance) -> Self {
        RawInstance {
            yards: inst
                .yards
                .iter()
                .map(|y| RawYard {
                    id: y.id.clone(),
                    c: y.c,
                    tau: y.tau,
                    reclass_belt: y.reclass_belt,
                    track_belt: y.track_belt,
                    theta: y.theta,
                })
                .collect(),
            links: inst
                .links
                .iter()
                .map(|l| RawLink {
                    id: l.id.clone(),
                    from_yard: l.from_yard.clone(),
                    to_yard: l.to_yard.clone(),
                    length: l.length,
                    capacity_belt: l.capacity_belt,
                    beta_n: l.beta_n,
                })
                .collect(),
            shipments: inst
                .shipments
                .iter()
                .map(|s| RawShipment {
                    origin: s.origin.clone(),
                    destination: s.destination.clone(),
                    volume: s.volume,
                })
                .collect(),
            params: RawParams {
                train_size: inst.params.train_size,
                train_size_overrides: inst
                    .params
                    .train_size_overrides
                    .iter()
                    .map(|(pair, size)| RawTrainSizeOverride {
                        from: pair.0.clone(),
                        to: pair.1.clone(),
                        size: *size,
                    })
                    .collect(),
                lambda: inst.params.lambda,
                cars_per_track: inst.params.cars_per_track,
                alpha: inst.params.alpha,
                beta: inst.params.beta,
                k: inst.params.k_paths,
                detour_cap: inst.params.detour_cap,
            },
            mandated_services: inst
                .mandated_services
                .iter()
                .map(|p| (p.0.clone(), p.1.clone()))
                .collect(),
            forbidden_services: inst
                .forbidden_services
                .iter()
                .map(|p| (p.0.clone(), p.1.clone()))
                .collect(),
            mandated_paths: inst
                .mandated_paths
                .iter()
                .map(|(pair, path)| RawMandatedPath {
                    from: pair.0.clone(),
                    to: pair.1.clone(),
                    path: path.clone(),
                })
                .collect(),
        }
    }
}
