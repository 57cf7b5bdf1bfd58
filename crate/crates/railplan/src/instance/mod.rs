//! Problem data model: yards, links, shipments, parameters, and capacity belts.
//!
//! An [`Instance`] is a faithful in-memory image of the JSON instance document
//! (see [`parse_instance`]). References between entities are kept as symbolic
//! yard ids; [`validate_instance`] reports dangling references and every other
//! broken invariant instead of failing on construction, so a report can name
//! all problems at once.

mod fixtures;
mod schema;
mod validate;

pub use fixtures::{canonical_instances, fig1, fig2, yard_c};
pub use schema::{parse_instance, serialize_instance, ParseError};
pub use validate::{validate_instance, ValidationReport, Violation};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// An ordered (origin, destination) pair of yard ids, the index domain of
/// services, shipments, and routing decisions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ServicePair(pub String, pub String);

impl ServicePair {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        ServicePair(from.into(), to.into())
    }

    pub fn from(&self) -> &str {
        &self.0
    }

    pub fn to(&self) -> &str {
        &self.1
    }

    /// Reverses `"A->E"` style keys used in plan documents and CSV tables.
    pub fn parse_key(key: &str) -> Option<Self> {
        let (from, to) = key.split_once("->")?;
        if from.is_empty() || to.is_empty() {
            return None;
        }
        Some(ServicePair::new(from, to))
    }
}

impl fmt::Display for ServicePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.0, self.1)
    }
}

/// An elastic capacity interval `[lower, upper]`.
///
/// `lower` is the guaranteed (rigid) capacity, `upper` the maximal capacity
/// the facility can stretch to. A degenerate belt (`lower == upper`) behaves
/// as a rigid bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct CapacityBelt {
    pub lower: f64,
    pub upper: f64,
}

impl CapacityBelt {
    pub fn new(lower: f64, upper: f64) -> Self {
        CapacityBelt { lower, upper }
    }

    /// A rigid bound expressed as a zero-width belt.
    pub fn rigid(bound: f64) -> Self {
        CapacityBelt { lower: bound, upper: bound }
    }

    pub fn is_degenerate(&self) -> bool {
        self.lower == self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

impl From<(f64, f64)> for CapacityBelt {
    fn from((lower, upper): (f64, f64)) -> Self {
        CapacityBelt { lower, upper }
    }
}

impl From<CapacityBelt> for (f64, f64) {
    fn from(belt: CapacityBelt) -> Self {
        (belt.lower, belt.upper)
    }
}

/// A classification yard.
#[derive(Debug, Clone, PartialEq)]
pub struct Yard {
    pub id: String,
    /// Accumulation cost parameter: cost units per car of dispatched train size.
    pub c: f64,
    /// Unit reclassification cost: cost units per reclassified car.
    pub tau: f64,
    /// Reclassification capacity belt in cars/day; `None` means unconstrained.
    pub reclass_belt: Option<CapacityBelt>,
    /// Classification track belt in tracks; `None` means unconstrained.
    pub track_belt: Option<CapacityBelt>,
    /// Rigid-mode utilization coefficient in (0, 1].
    pub theta: f64,
}

/// A directed track section between two adjacent yards.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub id: String,
    pub from_yard: String,
    pub to_yard: String,
    /// Section length in km.
    pub length: f64,
    /// Transport capacity belt in trains/day; `None` means unconstrained.
    pub capacity_belt: Option<CapacityBelt>,
    /// Rigid-mode utilization coefficient in (0, 1].
    pub beta_n: f64,
}

/// A daily origin-destination car volume.
#[derive(Debug, Clone, PartialEq)]
pub struct Shipment {
    pub origin: String,
    pub destination: String,
    /// Cars per day.
    pub volume: f64,
}

/// Network-wide parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// Default train size in cars per dispatched train.
    pub train_size: f64,
    /// Per-service-pair train size overrides.
    pub train_size_overrides: BTreeMap<ServicePair, f64>,
    /// Detour cost per car-km.
    pub lambda: f64,
    /// Cars accommodated per classification track.
    pub cars_per_track: f64,
    /// Penalty factor on lost membership degree.
    pub alpha: f64,
    /// Penalty factor on load overflow beyond a belt's upper bound.
    pub beta: f64,
    /// Maximum number of candidate paths enumerated per service pair.
    pub k_paths: usize,
    /// Maximum accepted extra km over the shortest path; `None` means
    /// 40% of the pair's shortest length.
    pub detour_cap: Option<f64>,
}

impl Params {
    pub const DEFAULT_TRAIN_SIZE: f64 = 50.0;
    pub const DEFAULT_LAMBDA: f64 = 1.0;
    pub const DEFAULT_CARS_PER_TRACK: f64 = 200.0;
    pub const DEFAULT_ALPHA: f64 = 1500.0;
    pub const DEFAULT_BETA: f64 = 1500.0;
    pub const DEFAULT_K_PATHS: usize = 5;
    /// Relative detour cap applied when no absolute cap is configured.
    pub const DEFAULT_RELATIVE_DETOUR: f64 = 0.4;

    /// Train size for one service pair, honoring overrides.
    pub fn train_size_for(&self, pair: &ServicePair) -> f64 {
        self.train_size_overrides
            .get(pair)
            .copied()
            .unwrap_or(self.train_size)
    }
}

impl Default for Params {
    fn default() -> Self {
        Params {
            train_size: Self::DEFAULT_TRAIN_SIZE,
            train_size_overrides: BTreeMap::new(),
            lambda: Self::DEFAULT_LAMBDA,
            cars_per_track: Self::DEFAULT_CARS_PER_TRACK,
            alpha: Self::DEFAULT_ALPHA,
            beta: Self::DEFAULT_BETA,
            k_paths: Self::DEFAULT_K_PATHS,
            detour_cap: None,
        }
    }
}

/// An immutable problem description.
///
/// Construction does not enforce the semantic invariants; run
/// [`validate_instance`] (or parse through [`parse_instance`], which does) to
/// obtain a guaranteed-consistent instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub yards: Vec<Yard>,
    pub links: Vec<Link>,
    pub shipments: Vec<Shipment>,
    pub params: Params,
    /// Service pairs that must be provided (`y = 1`).
    pub mandated_services: BTreeSet<ServicePair>,
    /// Service pairs that must not be provided (`y = 0`).
    pub forbidden_services: BTreeSet<ServicePair>,
    /// Designated physical path (yard sequence) a provided service must use.
    pub mandated_paths: BTreeMap<ServicePair, Vec<String>>,
}

impl Instance {
    pub fn yard(&self, id: &str) -> Option<&Yard> {
        self.yards.iter().find(|y| y.id == id)
    }

    pub fn shipment(&self, pair: &ServicePair) -> Option<&Shipment> {
        self.shipments
            .iter()
            .find(|s| s.origin == pair.0 && s.destination == pair.1)
    }

    pub fn shipment_pairs(&self) -> impl Iterator<Item = ServicePair> + '_ {
        self.shipments
            .iter()
            .map(|s| ServicePair::new(s.origin.clone(), s.destination.clone()))
    }
}
