//! Plan representation, structural feasibility, and flow propagation.
//!
//! A [`Plan`] decides, per ordered yard pair, whether the pair gets a direct
//! train service (and on which physical path) or defers its cars to a first
//! reclassification yard, from where they follow that yard's own decision
//! toward the same destination. Propagation turns shipment volumes into
//! per-pair commodity flows, per-service car loads, and yard/track/link
//! resource loads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::instance::ServicePair;
use crate::model::Model;

/// One assignment of all decision variables.
///
/// A pair present in `services` is served directly on the selected path rank
/// of its path set; a pair present in `defers` hands its cars to the given
/// first reclassification yard. The two sides are mutually exclusive for any
/// pair, and every pair that carries flow must appear in exactly one.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Plan {
    services: BTreeMap<ServicePair, usize>,
    defers: BTreeMap<ServicePair, String>,
}

impl Plan {
    pub fn new() -> Self {
        Plan::default()
    }

    pub fn provides(&self, pair: &ServicePair) -> bool {
        self.services.contains_key(pair)
    }

    /// Selected path rank of a provided service.
    pub fn path_rank(&self, pair: &ServicePair) -> Option<usize> {
        self.services.get(pair).copied()
    }

    pub fn defer_of(&self, pair: &ServicePair) -> Option<&str> {
        self.defers.get(pair).map(String::as_str)
    }

    pub fn set_service(&mut self, pair: ServicePair, rank: usize) {
        self.services.insert(pair, rank);
    }

    pub fn remove_service(&mut self, pair: &ServicePair) {
        self.services.remove(pair);
    }

    pub fn set_defer(&mut self, pair: ServicePair, via: impl Into<String>) {
        self.defers.insert(pair, via.into());
    }

    pub fn clear_defer(&mut self, pair: &ServicePair) {
        self.defers.remove(pair);
    }

    pub fn services(&self) -> impl Iterator<Item = (&ServicePair, usize)> {
        self.services.iter().map(|(p, r)| (p, *r))
    }

    pub fn service_count(&self) -> usize {
        self.services.len()
    }

    pub fn defers(&self) -> impl Iterator<Item = (&ServicePair, &str)> {
        self.defers.iter().map(|(p, v)| (p, v.as_str()))
    }
}

/// Derived load quantities of a plan at given shipment volumes.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    /// Commodity flow f per active pair: own volume plus deferred-in flow.
    pub flows: BTreeMap<ServicePair, f64>,
    /// Cars riding each provided service (D).
    pub service_loads: BTreeMap<ServicePair, f64>,
    /// Cars sorted per yard and day.
    pub yard_reclass: BTreeMap<String, f64>,
    /// Occupied classification tracks per yard.
    pub yard_tracks: BTreeMap<String, f64>,
    /// Trains per day on each link.
    pub link_trains: BTreeMap<String, f64>,
}

/// Evaluation switches for [`propagate_flows_with`].
#[derive(Debug, Clone, Default)]
pub struct FlowOptions {
    /// Count fractional trains (load / train size) instead of whole trains.
    pub fractional_trains: bool,
    /// Shipment volume overrides keyed by shipment pair; missing pairs keep
    /// their instance volume.
    pub volumes: BTreeMap<ServicePair, f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlowError {
    #[error("pair {0} carries flow but has no routing decision")]
    Undecided(ServicePair),
    #[error("deferral cycle toward {destination} through {yards:?}")]
    DeferralCycle { destination: String, yards: Vec<String> },
    #[error("service {0} selects path rank {1} but only {2} paths exist")]
    BadPathRank(ServicePair, usize, usize),
}

/// A violated structural constraint of a plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructuralViolation {
    /// A pair is both served directly and deferred.
    PartitionBoth { pair: ServicePair },
    /// A flow-carrying pair has no decision at all.
    PartitionNone { pair: ServicePair },
    /// A deferring pair whose first-leg service is not provided.
    UnsupportedDefer { pair: ServicePair, via: String },
    /// Path rank outside the pair's path set.
    InvalidPathRank { pair: ServicePair, rank: usize, available: usize },
    /// Mandated service not provided.
    MissingMandatedService { pair: ServicePair },
    /// Forbidden service provided.
    ForbiddenService { pair: ServicePair },
    /// Provided service ignores its designated path.
    WrongMandatedPath { pair: ServicePair, expected: usize, actual: usize },
    /// Deferral decisions chase each other in a circle.
    DeferralCycle { destination: String, yards: Vec<String> },
    /// Defer target outside the pair's candidate yards.
    InvalidCandidate { pair: ServicePair, via: String },
    /// Service for a pair with no physical route (or unknown yards).
    UnroutablePair { pair: ServicePair },
}

impl fmt::Display for StructuralViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use StructuralViolation::*;
        match self {
            PartitionBoth { pair } => {
                write!(f, "partition: {pair} is both direct and reclassified")
            }
            PartitionNone { pair } => {
                write!(f, "partition: {pair} carries flow but has no decision")
            }
            UnsupportedDefer { pair, via } => {
                write!(f, "support: {pair} reclassifies at {via} but service {}->{via} is not provided", pair.0)
            }
            InvalidPathRank { pair, rank, available } => {
                write!(f, "path selection: {pair} selects rank {rank} of {available} paths")
            }
            MissingMandatedService { pair } => {
                write!(f, "mandate: service {pair} must be provided")
            }
            ForbiddenService { pair } => {
                write!(f, "mandate: service {pair} must not be provided")
            }
            WrongMandatedPath { pair, expected, actual } => {
                write!(f, "mandated path: {pair} must use path rank {expected}, selects {actual}")
            }
            DeferralCycle { destination, yards } => {
                write!(f, "acyclicity: cycle toward {destination} through {}", yards.join(", "))
            }
            InvalidCandidate { pair, via } => {
                write!(f, "candidates: {via} is not a candidate reclassification yard for {pair}")
            }
            UnroutablePair { pair } => {
                write!(f, "routing: no physical path for service {pair}")
            }
        }
    }
}

/// Checks every structural constraint; empty iff the plan is feasible.
pub fn check_structural_feasibility(model: &Model, plan: &Plan) -> Vec<StructuralViolation> {
    use StructuralViolation::*;
    let mut out = Vec::new();

    for (pair, rank) in plan.services() {
        match model.pathset(pair) {
            None => out.push(UnroutablePair { pair: pair.clone() }),
            Some(set) => {
                if rank >= set.len() {
                    out.push(InvalidPathRank {
                        pair: pair.clone(),
                        rank,
                        available: set.len(),
                    });
                } else if let Some(expected) = model.mandated_rank(pair) {
                    if rank != expected {
                        out.push(WrongMandatedPath {
                            pair: pair.clone(),
                            expected,
                            actual: rank,
                        });
                    }
                }
            }
        }
        if model.is_forbidden(pair) {
            out.push(ForbiddenService { pair: pair.clone() });
        }
        if plan.defer_of(pair).is_some() {
            out.push(PartitionBoth { pair: pair.clone() });
        }
    }

    for pair in &model.instance().mandated_services {
        if !plan.provides(pair) {
            out.push(MissingMandatedService { pair: pair.clone() });
        }
    }

    for (pair, via) in plan.defers() {
        if !model.candidates(pair).iter().any(|c| c == via) {
            out.push(InvalidCandidate { pair: pair.clone(), via: via.to_string() });
        }
        let leg = ServicePair::new(pair.0.clone(), via);
        if !plan.provides(&leg) {
            out.push(UnsupportedDefer { pair: pair.clone(), via: via.to_string() });
        }
    }

    // Every flow-carrying pair needs exactly one decision, following the
    // deferral closure out of the shipment pairs.
    let mut active: BTreeSet<ServicePair> = BTreeSet::new();
    let mut queue: Vec<ServicePair> = model.instance().shipment_pairs().collect();
    while let Some(pair) = queue.pop() {
        if !active.insert(pair.clone()) {
            continue;
        }
        match (plan.provides(&pair), plan.defer_of(&pair)) {
            (false, None) => out.push(PartitionNone { pair: pair.clone() }),
            (_, Some(via)) => queue.push(ServicePair::new(via.to_string(), pair.1.clone())),
            (true, None) => {}
        }
    }

    // Deferral acyclicity per destination.
    let mut reported: BTreeSet<(String, String)> = BTreeSet::new();
    for (start, _) in plan.defers() {
        let destination = start.1.clone();
        let mut yards = vec![start.0.clone()];
        let mut seen: BTreeSet<String> = BTreeSet::from([start.0.clone()]);
        let mut cur = start.clone();
        while let Some(via) = plan.defer_of(&cur) {
            if !seen.insert(via.to_string()) {
                yards.push(via.to_string());
                let key = (destination.clone(), via.to_string());
                if reported.insert(key) {
                    out.push(DeferralCycle { destination: destination.clone(), yards });
                }
                break;
            }
            yards.push(via.to_string());
            cur = ServicePair::new(via.to_string(), destination.clone());
        }
    }

    out
}

/// The pairs that carry flow under a plan: every shipment pair plus the
/// closure of their deferral chains.
pub fn active_pairs(model: &Model, plan: &Plan) -> BTreeSet<ServicePair> {
    let mut active = BTreeSet::new();
    let mut queue: Vec<ServicePair> = model.instance().shipment_pairs().collect();
    while let Some(pair) = queue.pop() {
        if !active.insert(pair.clone()) {
            continue;
        }
        if let Some(via) = plan.defer_of(&pair) {
            queue.push(ServicePair::new(via.to_string(), pair.1.clone()));
        }
    }
    active
}

/// Propagates instance volumes through the plan with default options.
pub fn propagate_flows(model: &Model, plan: &Plan) -> Result<FlowState, FlowError> {
    propagate_flows_with(model, plan, &FlowOptions::default())
}

/// Propagates volumes through the plan.
///
/// For every flow-carrying pair, `f = own volume + deferred-in flow`; cars of
/// a deferring pair ride the first-leg service and are counted as sorted at
/// the transfer yard, while the pair's originating cars are counted as sorted
/// at the origin. Track demand charges one track per started `cars_per_track`
/// block with a one-track minimum per open outbound service; link load counts
/// whole trains per provided service unless `fractional_trains` is set.
pub fn propagate_flows_with(
    model: &Model,
    plan: &Plan,
    options: &FlowOptions,
) -> Result<FlowState, FlowError> {
    let inst = model.instance();
    let volume_of = |pair: &ServicePair| -> f64 {
        options
            .volumes
            .get(pair)
            .copied()
            .unwrap_or_else(|| model.shipment_volume(pair))
    };

    // Deferred-in suppliers per pair, and the active pair closure.
    let mut active: BTreeSet<ServicePair> = BTreeSet::new();
    let mut queue: Vec<ServicePair> = model.instance().shipment_pairs().collect();
    let mut suppliers: BTreeMap<ServicePair, Vec<ServicePair>> = BTreeMap::new();
    while let Some(pair) = queue.pop() {
        if !active.insert(pair.clone()) {
            continue;
        }
        if let Some(via) = plan.defer_of(&pair) {
            let next = ServicePair::new(via.to_string(), pair.1.clone());
            suppliers.entry(next.clone()).or_default().push(pair.clone());
            queue.push(next);
        } else if !plan.provides(&pair) {
            return Err(FlowError::Undecided(pair));
        }
    }

    // f per active pair, walking supplier chains depth-first.
    let mut flows: BTreeMap<ServicePair, f64> = BTreeMap::new();
    for pair in &active {
        compute_flow(pair, &suppliers, &volume_of, &mut flows, &mut Vec::new())?;
    }

    // D per provided service.
    let mut service_loads: BTreeMap<ServicePair, f64> =
        plan.services().map(|(p, _)| (p.clone(), 0.0)).collect();
    for pair in &active {
        let flow = flows[pair];
        match plan.defer_of(pair) {
            Some(via) => {
                let leg = ServicePair::new(pair.0.clone(), via.to_string());
                *service_loads.entry(leg).or_insert(0.0) += flow;
            }
            None => *service_loads.entry(pair.clone()).or_insert(0.0) += flow,
        }
    }

    // Cars sorted per yard: deferred-in flow at the transfer yard plus the
    // deferring pair's own volume at its origin.
    let mut yard_reclass: BTreeMap<String, f64> =
        inst.yards.iter().map(|y| (y.id.clone(), 0.0)).collect();
    for (pair, via) in plan.defers() {
        if !active.contains(pair) {
            continue;
        }
        *yard_reclass.get_mut(via).expect("validated yard") += flows[pair];
        *yard_reclass.get_mut(&pair.0).expect("validated yard") += volume_of(pair);
    }

    // Track demand per yard.
    let a = inst.params.cars_per_track;
    let mut yard_tracks: BTreeMap<String, f64> =
        inst.yards.iter().map(|y| (y.id.clone(), 0.0)).collect();
    for (pair, load) in &service_loads {
        let phi = if *load == 0.0 { 0.0 } else { load.max(a) };
        *yard_tracks.get_mut(&pair.0).expect("validated yard") += phi / a;
    }

    // Trains per link.
    let mut link_trains: BTreeMap<String, f64> =
        inst.links.iter().map(|l| (l.id.clone(), 0.0)).collect();
    for (pair, rank) in plan.services() {
        let set = model
            .pathset(pair)
            .ok_or_else(|| FlowError::BadPathRank(pair.clone(), rank, 0))?;
        let path = set
            .paths
            .get(rank)
            .ok_or_else(|| FlowError::BadPathRank(pair.clone(), rank, set.len()))?;
        let load = service_loads.get(pair).copied().unwrap_or(0.0);
        let m = model.train_size(pair);
        let trains = if options.fractional_trains {
            load / m
        } else {
            (load / m).ceil()
        };
        if trains == 0.0 {
            continue;
        }
        for link in &path.links {
            *link_trains.get_mut(link).expect("validated link") += trains;
        }
    }

    Ok(FlowState {
        flows,
        service_loads,
        yard_reclass,
        yard_tracks,
        link_trains,
    })
}

fn compute_flow(
    pair: &ServicePair,
    suppliers: &BTreeMap<ServicePair, Vec<ServicePair>>,
    volume_of: &impl Fn(&ServicePair) -> f64,
    flows: &mut BTreeMap<ServicePair, f64>,
    stack: &mut Vec<String>,
) -> Result<f64, FlowError> {
    if let Some(f) = flows.get(pair) {
        return Ok(*f);
    }
    if stack.contains(&pair.0) {
        return Err(FlowError::DeferralCycle {
            destination: pair.1.clone(),
            yards: stack.clone(),
        });
    }
    stack.push(pair.0.clone());
    let mut total = volume_of(pair);
    for upstream in suppliers.get(pair).into_iter().flatten() {
        total += compute_flow(upstream, suppliers, volume_of, flows, stack)?;
    }
    stack.pop();
    flows.insert(pair.clone(), total);
    Ok(total)
}

/// The sequence of services a shipment rides from `from` to `to`.
pub fn strategy_chain(
    plan: &Plan,
    from: &str,
    to: &str,
) -> Result<Vec<ServicePair>, FlowError> {
    let mut chain = Vec::new();
    let mut seen = BTreeSet::from([from.to_string()]);
    let mut at = from.to_string();
    loop {
        let pair = ServicePair::new(at.clone(), to);
        match plan.defer_of(&pair) {
            Some(via) => {
                chain.push(ServicePair::new(at.clone(), via));
                if !seen.insert(via.to_string()) {
                    return Err(FlowError::DeferralCycle {
                        destination: to.to_string(),
                        yards: seen.into_iter().collect(),
                    });
                }
                at = via.to_string();
            }
            None if plan.provides(&pair) => {
                chain.push(pair);
                return Ok(chain);
            }
            None => return Err(FlowError::Undecided(pair)),
        }
    }
}

/// Number of distinct shipping strategies from `from` to `to` over a set of
/// provided services.
///
/// A strategy is an acyclic service chain in which every intermediate
/// transfer yard is a candidate reclassification yard of the remaining
/// (yard, destination) pair, mirroring what deferral decisions can realize.
pub fn count_strategies(
    model: &Model,
    services: &BTreeSet<ServicePair>,
    from: &str,
    to: &str,
) -> u64 {
    let mut visited = BTreeSet::from([from.to_string()]);
    count_from(model, services, from, to, &mut visited)
}

fn count_from(
    model: &Model,
    services: &BTreeSet<ServicePair>,
    at: &str,
    to: &str,
    visited: &mut BTreeSet<String>,
) -> u64 {
    let mut count = 0;
    if services.contains(&ServicePair::new(at, to)) {
        count += 1;
    }
    let remaining = ServicePair::new(at, to);
    for via in model.candidates(&remaining) {
        if visited.contains(via) || !services.contains(&ServicePair::new(at, via.clone())) {
            continue;
        }
        visited.insert(via.clone());
        count += count_from(model, services, via, to, visited);
        visited.remove(via);
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{fig2, yard_c};
    use crate::instance::{Instance, Link, Params, Shipment, Yard};

    fn three_yard_line() -> Instance {
        let yard = |id: &str, tau: f64| Yard {
            id: id.into(),
            c: 1.0,
            tau,
            reclass_belt: None,
            track_belt: None,
            theta: 1.0,
        };
        let link = |from: &str, to: &str| Link {
            id: format!("{from}{to}"),
            from_yard: from.into(),
            to_yard: to.into(),
            length: 100.0,
            capacity_belt: None,
            beta_n: 1.0,
        };
        Instance {
            yards: vec![yard("A", 0.0), yard("B", 2.0), yard("C", 0.0)],
            links: vec![link("A", "B"), link("B", "C")],
            shipments: vec![
                Shipment { origin: "A".into(), destination: "C".into(), volume: 10.0 },
                Shipment { origin: "A".into(), destination: "B".into(), volume: 5.0 },
                Shipment { origin: "B".into(), destination: "C".into(), volume: 7.0 },
            ],
            params: Params::default(),
            mandated_services: Default::default(),
            forbidden_services: Default::default(),
            mandated_paths: Default::default(),
        }
    }

    /// Plan for the three-yard line: A->C reclassified at B, locals direct.
    fn three_yard_plan() -> Plan {
        let mut plan = Plan::new();
        plan.set_service(ServicePair::new("A", "B"), 0);
        plan.set_service(ServicePair::new("B", "C"), 0);
        plan.set_defer(ServicePair::new("A", "C"), "B");
        plan
    }

    #[test]
    fn three_yard_line_propagation() {
        let model = Model::build(three_yard_line()).unwrap();
        let fs = propagate_flows(&model, &three_yard_plan()).unwrap();
        assert_eq!(fs.flows[&ServicePair::new("A", "C")], 10.0);
        assert_eq!(fs.flows[&ServicePair::new("B", "C")], 17.0);
        assert_eq!(fs.service_loads[&ServicePair::new("A", "B")], 15.0);
        assert_eq!(fs.service_loads[&ServicePair::new("B", "C")], 17.0);
        assert_eq!(fs.yard_reclass["B"], 10.0);
        // The deferring pair's own cars are sorted at their origin.
        assert_eq!(fs.yard_reclass["A"], 10.0);
        assert_eq!(fs.yard_reclass["C"], 0.0);
    }

    #[test]
    fn yard_c_merges_to_300() {
        let model = Model::build(yard_c()).unwrap();
        let mut plan = Plan::new();
        plan.set_service(ServicePair::new("A", "C"), 0);
        plan.set_service(ServicePair::new("C", "D"), 0);
        plan.set_service(ServicePair::new("D", "E"), 0);
        plan.set_defer(ServicePair::new("A", "E"), "C");
        plan.set_defer(ServicePair::new("C", "E"), "D");
        assert!(check_structural_feasibility(&model, &plan).is_empty());

        let fs = propagate_flows(&model, &plan).unwrap();
        assert_eq!(fs.yard_reclass["C"], 300.0);
        assert_eq!(fs.flows[&ServicePair::new("C", "E")], 300.0);
    }

    #[test]
    fn all_direct_plan_has_no_reclassification() {
        let inst = three_yard_line();
        let model = Model::build(inst).unwrap();
        let mut plan = Plan::new();
        for pair in model.instance().shipment_pairs() {
            plan.set_service(pair, 0);
        }
        let fs = propagate_flows(&model, &plan).unwrap();
        for shipment in &model.instance().shipments {
            let pair = ServicePair::new(shipment.origin.clone(), shipment.destination.clone());
            assert_eq!(fs.flows[&pair], shipment.volume);
        }
        assert!(fs.yard_reclass.values().all(|&v| v == 0.0));
    }

    #[test]
    fn partition_violation_when_direct_and_deferred() {
        let model = Model::build(fig2()).unwrap();
        let mut plan = all_direct_fig2(&model);
        plan.set_service(ServicePair::new("A", "E"), 0);
        plan.set_defer(ServicePair::new("A", "E"), "C");
        let violations = check_structural_feasibility(&model, &plan);
        assert!(violations.iter().any(|v| matches!(
            v,
            StructuralViolation::PartitionBoth { pair } if *pair == ServicePair::new("A", "E")
        )));
    }

    /// Direct-where-allowed baseline plan for fig2 (forbidden pairs defer).
    fn all_direct_fig2(model: &Model) -> Plan {
        let mut plan = Plan::new();
        for pair in &model.instance().mandated_services {
            plan.set_service(pair.clone(), 0);
        }
        for pair in model.instance().shipment_pairs() {
            if model.is_forbidden(&pair) {
                continue;
            }
            plan.set_service(pair, 0);
        }
        // Forbidden shipment pairs hop through the first candidate that has
        // a provided first leg.
        for pair in model.instance().shipment_pairs() {
            if !model.is_forbidden(&pair) {
                continue;
            }
            let via = model
                .candidates(&pair)
                .iter()
                .find(|via| {
                    plan.provides(&ServicePair::new(pair.0.clone(), (*via).clone()))
                        && !model.is_forbidden(&ServicePair::new((*via).clone(), pair.1.clone()))
                })
                .expect("fixture pairs are routable")
                .clone();
            plan.set_defer(pair, via);
        }
        plan
    }

    #[test]
    fn fig2_all_direct_is_feasible() {
        let model = Model::build(fig2()).unwrap();
        let plan = all_direct_fig2(&model);
        let violations = check_structural_feasibility(&model, &plan);
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn deferral_cycle_is_detected() {
        let model = Model::build(fig2()).unwrap();
        let mut plan = all_direct_fig2(&model);
        // A->E defers to B, B->E defers back to A.
        plan.remove_service(&ServicePair::new("B", "E"));
        plan.set_defer(ServicePair::new("A", "E"), "B");
        plan.set_defer(ServicePair::new("B", "E"), "A");
        let violations = check_structural_feasibility(&model, &plan);
        assert!(violations.iter().any(|v| matches!(
            v,
            StructuralViolation::DeferralCycle { destination, .. } if destination == "E"
        )));
    }

    #[test]
    fn strategy_chain_follows_deferrals() {
        let model = Model::build(fig2()).unwrap();
        let mut plan = all_direct_fig2(&model);
        plan.set_defer(ServicePair::new("A", "E"), "B");
        assert_eq!(
            strategy_chain(&plan, "A", "E").unwrap(),
            vec![ServicePair::new("A", "B"), ServicePair::new("B", "E")]
        );
        assert_eq!(
            strategy_chain(&plan, "D", "E").unwrap(),
            vec![ServicePair::new("D", "E")]
        );
    }

    #[test]
    fn fig2_a_to_e_has_four_strategies() {
        let model = Model::build(fig2()).unwrap();
        let services = fig2_service_network(&model);
        assert_eq!(count_strategies(&model, &services, "A", "E"), 4);
    }

    #[test]
    fn fig2_b_to_e_strategies_match_enumeration() {
        let model = Model::build(fig2()).unwrap();
        let services = fig2_service_network(&model);
        // Direct B->E, via C (then forced through D), via D.
        assert_eq!(count_strategies(&model, &services, "B", "E"), 3);
    }

    #[test]
    fn adjacent_pair_with_local_service_only() {
        let model = Model::build(fig2()).unwrap();
        let services = BTreeSet::from([ServicePair::new("D", "E")]);
        assert_eq!(count_strategies(&model, &services, "D", "E"), 1);
    }

    /// The 14 allowed services of the fig2 network.
    fn fig2_service_network(model: &Model) -> BTreeSet<ServicePair> {
        let yards = ["A", "B", "C", "D", "E"];
        let mut services = BTreeSet::new();
        for from in yards {
            for to in yards {
                let pair = ServicePair::new(from, to);
                if from != to && !model.is_forbidden(&pair) {
                    services.insert(pair);
                }
            }
        }
        services
    }

    #[test]
    fn zero_volume_shipment_changes_nothing() {
        let mut base = three_yard_line();
        base.shipments.retain(|s| !(s.origin == "A" && s.destination == "B"));
        let plan = three_yard_plan();
        let model = Model::build(base.clone()).unwrap();
        let before = propagate_flows(&model, &plan).unwrap();

        let mut widened = base;
        widened.shipments.push(Shipment {
            origin: "A".into(),
            destination: "B".into(),
            volume: 0.0,
        });
        let model_widened = Model::build(widened).unwrap();
        let after = propagate_flows(&model_widened, &plan).unwrap();
        for (pair, f) in &before.flows {
            assert_eq!(after.flows[pair], *f);
        }
        assert_eq!(after.flows[&ServicePair::new("A", "B")], 0.0);
        assert_eq!(after.service_loads, before.service_loads);
        assert_eq!(after.yard_reclass, before.yard_reclass);
        assert_eq!(after.yard_tracks, before.yard_tracks);
        assert_eq!(after.link_trains, before.link_trains);
    }

    #[test]
    fn volume_scaling_is_exact() {
        let base = three_yard_line();
        let plan = three_yard_plan();
        let model = Model::build(base.clone()).unwrap();
        let before = propagate_flows(&model, &plan).unwrap();

        let mut scaled = base;
        for s in &mut scaled.shipments {
            s.volume *= 4.0;
        }
        let model_scaled = Model::build(scaled).unwrap();
        let after = propagate_flows(&model_scaled, &plan).unwrap();
        for (pair, f) in &before.flows {
            assert_eq!(after.flows[pair], f * 4.0);
        }
        for (pair, d) in &before.service_loads {
            assert_eq!(after.service_loads[pair], d * 4.0);
        }
        for (yard, r) in &before.yard_reclass {
            assert_eq!(after.yard_reclass[yard], r * 4.0);
        }
    }

    #[test]
    fn conservation_of_sorting_events() {
        let model = Model::build(yard_c()).unwrap();
        let mut plan = Plan::new();
        plan.set_service(ServicePair::new("A", "C"), 0);
        plan.set_service(ServicePair::new("C", "D"), 0);
        plan.set_service(ServicePair::new("D", "E"), 0);
        plan.set_defer(ServicePair::new("A", "E"), "C");
        plan.set_defer(ServicePair::new("C", "E"), "D");
        let fs = propagate_flows(&model, &plan).unwrap();

        let total_sorted: f64 = fs.yard_reclass.values().sum();
        let mut expected = 0.0;
        for shipment in &model.instance().shipments {
            let chain = strategy_chain(&plan, &shipment.origin, &shipment.destination).unwrap();
            // A deferring shipment is sorted once at its origin and once at
            // every transfer yard; a direct shipment is never sorted.
            let events = if chain.len() > 1 { chain.len() as f64 } else { 0.0 };
            expected += events * shipment.volume;
        }
        assert_eq!(total_sorted, expected);
    }
}
