//! Operating cost, elastic capacity satisfaction, and penalty terms.
//!
//! Every capacity belt scores its load with a piecewise-linear membership
//! degree: 1 at or below the guaranteed lower bound, falling linearly to 0 at
//! the upper bound, 0 beyond it. Lost degree and overflow beyond the upper
//! bound convert into the penalty terms G (yard reclassification), H (yard
//! tracks), and M (link capacity) that steer heuristic search. Rigid mode
//! instead enforces the lower bounds, scaled by the utilization coefficients,
//! as hard constraints.

use std::collections::BTreeMap;
use std::fmt;

use crate::flow::{
    check_structural_feasibility, propagate_flows_with, FlowError, FlowOptions, FlowState, Plan,
};
use crate::instance::CapacityBelt;
use crate::model::Model;

/// Satisfaction degree of a load against a belt, in [0, 1].
///
/// A degenerate belt steps from 1 to 0 at its single bound.
pub fn membership(load: f64, belt: &CapacityBelt) -> f64 {
    if load <= belt.lower {
        1.0
    } else if load > belt.upper {
        0.0
    } else {
        (belt.upper - load) / (belt.upper - belt.lower)
    }
}

/// The cost components of a plan.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct CostBreakdown {
    /// Train accumulation cost over provided services.
    pub accumulation: f64,
    /// Sorting cost over yards.
    pub reclassification: f64,
    /// Extra car-km cost of services running on non-shortest paths.
    pub detour: f64,
    /// Operating cost: accumulation + reclassification + detour.
    pub z: f64,
    /// Yard reclassification capacity penalty.
    pub g: f64,
    /// Yard track capacity penalty.
    pub h: f64,
    /// Link capacity penalty.
    pub m: f64,
    /// Search objective: z + g + h + m.
    pub total: f64,
}

/// Membership degree of every belted resource.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SatisfactionProfile {
    /// Degree of each yard's reclassification load.
    pub yard_reclass: BTreeMap<String, f64>,
    /// Degree of each yard's track demand.
    pub yard_tracks: BTreeMap<String, f64>,
    /// Degree of each link's train load.
    pub links: BTreeMap<String, f64>,
}

impl SatisfactionProfile {
    pub fn min_degree(&self) -> f64 {
        self.yard_reclass
            .values()
            .chain(self.yard_tracks.values())
            .chain(self.links.values())
            .fold(1.0, |acc, &d| acc.min(d))
    }
}

/// The penalty terms with their satisfaction profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Penalties {
    pub g: f64,
    pub h: f64,
    pub m: f64,
    pub profile: SatisfactionProfile,
}

/// Operating cost Z of a plan at the given flow state; penalty fields stay 0.
pub fn operating_cost(model: &Model, plan: &Plan, fs: &FlowState) -> CostBreakdown {
    let inst = model.instance();
    let mut accumulation = 0.0;
    let mut detour = 0.0;
    for (pair, rank) in plan.services() {
        let yard = inst.yard(&pair.0).expect("validated yard");
        accumulation += yard.c * model.train_size(pair);
        if rank > 0 {
            let set = model.pathset(pair).expect("provided service is routable");
            let load = fs.service_loads.get(pair).copied().unwrap_or(0.0);
            detour += inst.params.lambda * load * set.extra_lengths[rank];
        }
    }
    let reclassification = inst
        .yards
        .iter()
        .map(|y| y.tau * fs.yard_reclass.get(&y.id).copied().unwrap_or(0.0))
        .sum();

    let z = accumulation + reclassification + detour;
    CostBreakdown {
        accumulation,
        reclassification,
        detour,
        z,
        g: 0.0,
        h: 0.0,
        m: 0.0,
        total: z,
    }
}

/// Which capacity a rigid violation exceeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResourceKind {
    YardReclassification,
    YardTracks,
    LinkCapacity,
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResourceKind::YardReclassification => write!(f, "yard reclassification"),
            ResourceKind::YardTracks => write!(f, "yard tracks"),
            ResourceKind::LinkCapacity => write!(f, "link capacity"),
        }
    }
}

/// A load exceeding its rigid capacity bound.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidViolation {
    pub kind: ResourceKind,
    pub id: String,
    pub load: f64,
    pub bound: f64,
}

impl fmt::Display for RigidViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: load {} exceeds bound {}",
            self.kind, self.id, self.load, self.bound
        )
    }
}

/// Hard capacity checks against the belts' guaranteed lower bounds.
///
/// Yard reclassification loads are checked against `theta * lower`, link
/// loads against `beta_n * lower`, track demands against `lower`. Unbelted
/// resources are unconstrained.
pub fn rigid_check(model: &Model, fs: &FlowState) -> Vec<RigidViolation> {
    let mut out = Vec::new();
    for yard in model.yards() {
        if let Some(belt) = &yard.reclass_belt {
            let load = fs.yard_reclass.get(&yard.id).copied().unwrap_or(0.0);
            let bound = yard.theta * belt.lower;
            if load > bound {
                out.push(RigidViolation {
                    kind: ResourceKind::YardReclassification,
                    id: yard.id.clone(),
                    load,
                    bound,
                });
            }
        }
        if let Some(belt) = &yard.track_belt {
            let load = fs.yard_tracks.get(&yard.id).copied().unwrap_or(0.0);
            if load > belt.lower {
                out.push(RigidViolation {
                    kind: ResourceKind::YardTracks,
                    id: yard.id.clone(),
                    load,
                    bound: belt.lower,
                });
            }
        }
    }
    for link in &model.instance().links {
        if let Some(belt) = &link.capacity_belt {
            let load = fs.link_trains.get(&link.id).copied().unwrap_or(0.0);
            let bound = link.beta_n * belt.lower;
            if load > bound {
                out.push(RigidViolation {
                    kind: ResourceKind::LinkCapacity,
                    id: link.id.clone(),
                    load,
                    bound,
                });
            }
        }
    }
    out
}

/// Penalty terms G, H, M with the full satisfaction profile.
///
/// Each term charges `alpha * (1 - degree)` for partially satisfied belts
/// plus `beta * overflow` beyond the upper bound. Unbelted resources count
/// as fully satisfied.
pub fn penalties(model: &Model, fs: &FlowState) -> Penalties {
    let inst = model.instance();
    let alpha = inst.params.alpha;
    let beta = inst.params.beta;

    let mut g = 0.0;
    let mut h = 0.0;
    let mut yard_reclass = BTreeMap::new();
    let mut yard_tracks = BTreeMap::new();
    for yard in &inst.yards {
        let load = fs.yard_reclass.get(&yard.id).copied().unwrap_or(0.0);
        let degree = score(yard.reclass_belt.as_ref(), load, alpha, beta, &mut g);
        yard_reclass.insert(yard.id.clone(), degree);

        let tracks = fs.yard_tracks.get(&yard.id).copied().unwrap_or(0.0);
        let degree = score(yard.track_belt.as_ref(), tracks, alpha, beta, &mut h);
        yard_tracks.insert(yard.id.clone(), degree);
    }

    let mut m = 0.0;
    let mut links = BTreeMap::new();
    for link in &inst.links {
        let load = fs.link_trains.get(&link.id).copied().unwrap_or(0.0);
        let degree = score(link.capacity_belt.as_ref(), load, alpha, beta, &mut m);
        links.insert(link.id.clone(), degree);
    }

    Penalties {
        g,
        h,
        m,
        profile: SatisfactionProfile { yard_reclass, yard_tracks, links },
    }
}

fn score(belt: Option<&CapacityBelt>, load: f64, alpha: f64, beta: f64, term: &mut f64) -> f64 {
    let Some(belt) = belt else { return 1.0 };
    let degree = membership(load, belt);
    *term += alpha * (1.0 - degree) + beta * (load - belt.upper).max(0.0);
    degree
}

#[derive(Debug, thiserror::Error)]
pub enum CostError {
    #[error("plan is structurally infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// The full search objective of a plan: Z plus the three penalty terms.
pub fn total_cost(model: &Model, plan: &Plan) -> Result<CostBreakdown, CostError> {
    let violations = check_structural_feasibility(model, plan);
    if let Some(first) = violations.first() {
        return Err(CostError::Infeasible(first.to_string()));
    }
    Ok(total_cost_with(model, plan, &FlowOptions::default())?)
}

/// Like [`total_cost`] but with explicit flow options and without the
/// structural pre-check; propagation still rejects undecided or cyclic plans.
pub fn total_cost_with(
    model: &Model,
    plan: &Plan,
    options: &FlowOptions,
) -> Result<CostBreakdown, FlowError> {
    let fs = propagate_flows_with(model, plan, options)?;
    Ok(cost_of_state(model, plan, &fs))
}

/// Assembles the breakdown from an already-propagated flow state.
pub fn cost_of_state(model: &Model, plan: &Plan, fs: &FlowState) -> CostBreakdown {
    let mut breakdown = operating_cost(model, plan, fs);
    let pen = penalties(model, fs);
    breakdown.g = pen.g;
    breakdown.h = pen.h;
    breakdown.m = pen.m;
    breakdown.total = breakdown.z + pen.g + pen.h + pen.m;
    breakdown
}
