//! Flow propagation checked against a car-by-car simulation.
//!
//! The oracle walks every shipment along its strategy chain, accumulating
//! pair flows, service loads, and sorting events one hop at a time, entirely
//! independently of the propagation recursion.

mod common;

use std::collections::BTreeMap;

use railplan::flow::{propagate_flows, strategy_chain, Plan};
use railplan::instance::ServicePair;
use railplan::model::Model;
use railplan::solver::{enumerate_plans, ExactLimits};

#[derive(Default)]
struct Simulated {
    flows: BTreeMap<ServicePair, f64>,
    service_loads: BTreeMap<ServicePair, f64>,
    yard_reclass: BTreeMap<String, f64>,
}

/// Walks each shipment hop by hop. Cars are sorted at their origin when
/// their shipment is not served directly, and at every transfer yard they
/// pass through.
fn simulate(model: &Model, plan: &Plan) -> Simulated {
    let mut sim = Simulated::default();
    for s in &model.instance().shipments {
        let volume = s.volume;
        let mut at = s.origin.clone();
        loop {
            let pair = ServicePair::new(at.clone(), s.destination.clone());
            *sim.flows.entry(pair.clone()).or_insert(0.0) += volume;
            match plan.defer_of(&pair) {
                Some(via) => {
                    if at == s.origin {
                        *sim.yard_reclass.entry(at.clone()).or_insert(0.0) += volume;
                    }
                    let leg = ServicePair::new(at.clone(), via);
                    *sim.service_loads.entry(leg).or_insert(0.0) += volume;
                    *sim.yard_reclass.entry(via.to_string()).or_insert(0.0) += volume;
                    at = via.to_string();
                }
                None => {
                    assert!(plan.provides(&pair), "oracle requires a feasible plan");
                    *sim.service_loads.entry(pair).or_insert(0.0) += volume;
                    break;
                }
            }
        }
    }
    sim
}

fn assert_matches(model: &Model, plan: &Plan) {
    let fs = propagate_flows(model, plan).unwrap();
    let sim = simulate(model, plan);

    for (pair, flow) in &sim.flows {
        assert_eq!(fs.flows.get(pair).copied().unwrap_or(0.0), *flow, "f({pair})");
    }
    for (pair, flow) in &fs.flows {
        if sim.flows.get(pair).is_none() {
            assert_eq!(*flow, 0.0, "f({pair}) should be flowless");
        }
    }
    for (pair, load) in &fs.service_loads {
        assert_eq!(sim.service_loads.get(pair).copied().unwrap_or(0.0), *load, "D({pair})");
    }
    for yard in model.yards() {
        assert_eq!(
            sim.yard_reclass.get(&yard.id).copied().unwrap_or(0.0),
            fs.yard_reclass[&yard.id],
            "reclass({})",
            yard.id
        );
    }
}

#[test]
fn four_yard_line_matches_simulation_on_every_plan() {
    let inst = common::line_instance(&["W", "X", "Y", "Z"], &[10.0, 20.0, 30.0, 40.0, 50.0, 60.0]);
    let model = Model::build(inst).unwrap();
    let mut plans = 0;
    enumerate_plans(&model, ExactLimits::default(), |plan| {
        assert_matches(&model, plan);
        plans += 1;
    })
    .unwrap();
    assert_eq!(plans, 12);
}

#[test]
fn random_instances_match_simulation() {
    for seed in 0..40 {
        let inst = common::random_instance(seed);
        let model = Model::build(inst).unwrap();
        for plan_seed in 0..5 {
            let plan = common::random_plan(&model, plan_seed);
            assert_matches(&model, &plan);
        }
    }
}

#[test]
fn each_shipment_rides_exactly_its_chain() {
    let inst = common::line_instance(&["W", "X", "Y", "Z"], &[10.0, 20.0, 30.0, 40.0, 50.0, 60.0]);
    let model = Model::build(inst).unwrap();
    enumerate_plans(&model, ExactLimits::default(), |plan| {
        let fs = propagate_flows(&model, plan).unwrap();
        let total_ridden: f64 = fs.service_loads.values().sum();
        let expected: f64 = model
            .instance()
            .shipments
            .iter()
            .map(|s| {
                let chain = strategy_chain(plan, &s.origin, &s.destination).unwrap();
                chain.len() as f64 * s.volume
            })
            .sum();
        assert_eq!(total_ridden, expected);
    })
    .unwrap();
}
