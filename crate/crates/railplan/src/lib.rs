//! Integrated train formation plan and traffic routing with elastic capacities.
//!
//! The library models a railway network of classification yards and directed
//! links, a set of daily shipments, and a plan that decides which direct train
//! services run, where shipments are reclassified, and which physical path
//! each service uses. Yard and link capacities are *elastic*: each one is a
//! belt `[lower, upper]` between the guaranteed and the maximal achievable
//! capacity, scored by a piecewise-linear membership degree and converted
//! into penalty costs for heuristic search.
//!
//! Main entry points:
//!
//! - [`instance`]: the problem data model, JSON schema, validation, and the
//!   canonical example fixtures.
//! - [`model::Model`]: a compiled instance with routing tables; everything
//!   downstream evaluates against it.
//! - [`flow`]: plan representation, structural feasibility, and volume
//!   propagation into service/yard/link loads.
//! - [`elastic`]: operating cost, rigid capacity checks, membership degrees,
//!   and penalty terms.
//! - [`solver`]: an exhaustive exact solver for desk-scale instances and a
//!   simulated-annealing heuristic.

pub mod elastic;
pub mod flow;
pub mod instance;
pub mod model;
pub mod routing;
pub mod solver;

pub use elastic::{membership, total_cost, CostBreakdown, SatisfactionProfile};
pub use flow::{check_structural_feasibility, propagate_flows, FlowState, Plan};
pub use instance::{
    canonical_instances, parse_instance, serialize_instance, validate_instance, CapacityBelt,
    Instance, ServicePair,
};
pub use model::Model;
pub use solver::{solve_exact, solve_sa, Solution};
