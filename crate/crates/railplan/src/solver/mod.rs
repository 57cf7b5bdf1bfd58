//! Plan search: exhaustive enumeration for desk-scale instances and a
//! simulated-annealing heuristic for everything else.
//!
//! Both solvers share the same objective. In elastic mode (the default) the
//! objective is the penalized total cost, so capacity pressure is handled
//! entirely by the penalty terms. In rigid mode the guaranteed capacities are
//! hard constraints: the exact solver discards violating plans and the
//! annealer scores overloads against the rigid bounds and only returns plans
//! that pass the rigid check.

mod exact;
mod sa;

pub use exact::{enumerate_plans, solve_exact, ExactError, ExactLimits};
pub use sa::{initial_plan, neighbor, solve_sa, SaConfig, SaError};

use std::time::Duration;

use crate::elastic::CostBreakdown;
use crate::flow::Plan;

/// How capacity constraints enter the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CapacityMode {
    /// Belts with membership penalties (the default).
    #[default]
    Elastic,
    /// Guaranteed lower bounds as hard constraints.
    Rigid,
}

/// A solver result. The cost breakdown is always recomputed from scratch
/// against the instance belts, regardless of the search mode.
#[derive(Debug, Clone)]
pub struct Solution {
    pub plan: Plan,
    pub cost: CostBreakdown,
    pub solver_id: &'static str,
    pub seed: Option<u64>,
    /// Plans evaluated (exact) or moves performed (annealing).
    pub iterations: u64,
    pub wall_time: Duration,
}
