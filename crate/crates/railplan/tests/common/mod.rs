//! Shared generators for the integration suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use railplan::flow::Plan;
use railplan::instance::{CapacityBelt, Instance, Link, Params, Shipment, Yard};
use railplan::model::Model;
use railplan::solver::{initial_plan, neighbor};

pub fn yard(id: &str, c: f64, tau: f64) -> Yard {
    Yard {
        id: id.into(),
        c,
        tau,
        reclass_belt: None,
        track_belt: None,
        theta: 1.0,
    }
}

pub fn link(from: &str, to: &str, length: f64) -> Link {
    Link {
        id: format!("{from}{to}"),
        from_yard: from.into(),
        to_yard: to.into(),
        length,
        capacity_belt: None,
        beta_n: 1.0,
    }
}

pub fn shipment(origin: &str, destination: &str, volume: f64) -> Shipment {
    Shipment {
        origin: origin.into(),
        destination: destination.into(),
        volume,
    }
}

/// A directed line over the given yard ids with 100 km sections and one
/// shipment per forward pair, volumes cycling through the given list.
pub fn line_instance(ids: &[&str], volumes: &[f64]) -> Instance {
    let mut shipments = Vec::new();
    let mut v = volumes.iter().cycle();
    for (i, from) in ids.iter().enumerate() {
        for to in &ids[i + 1..] {
            shipments.push(shipment(from, to, *v.next().unwrap()));
        }
    }
    Instance {
        yards: ids.iter().map(|id| yard(id, 1.0, 2.0)).collect(),
        links: ids.windows(2).map(|w| link(w[0], w[1], 100.0)).collect(),
        shipments,
        params: Params::default(),
        mandated_services: Default::default(),
        forbidden_services: Default::default(),
        mandated_paths: Default::default(),
    }
}

/// A seeded random 4-yard instance: a directed line with an optional chord,
/// integer volumes, and a sprinkling of tight capacity belts.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids = ["W", "X", "Y", "Z"];

    let mut yards: Vec<Yard> = ids
        .iter()
        .map(|id| yard(id, 1.0, rng.random_range(0..=3) as f64))
        .collect();
    for y in &mut yards {
        if rng.random_bool(0.4) {
            let lower = rng.random_range(100..=400) as f64;
            let upper = lower + rng.random_range(0..=200) as f64;
            y.reclass_belt = Some(CapacityBelt::new(lower, upper));
        }
        if rng.random_bool(0.3) {
            let lower = rng.random_range(1..=3) as f64;
            let upper = lower + rng.random_range(0..=2) as f64;
            y.track_belt = Some(CapacityBelt::new(lower, upper));
        }
    }

    let mut links = vec![
        link("W", "X", rng.random_range(50..=150) as f64),
        link("X", "Y", rng.random_range(50..=150) as f64),
        link("Y", "Z", rng.random_range(50..=150) as f64),
    ];
    if rng.random_bool(0.5) {
        links.push(link("X", "Z", rng.random_range(100..=300) as f64));
    }
    if rng.random_bool(0.5) {
        links.push(link("W", "Y", rng.random_range(100..=300) as f64));
    }
    for l in &mut links {
        if rng.random_bool(0.3) {
            let lower = rng.random_range(2..=8) as f64;
            let upper = lower + rng.random_range(0..=4) as f64;
            l.capacity_belt = Some(CapacityBelt::new(lower, upper));
        }
    }

    let mut shipments = Vec::new();
    for (i, from) in ids.iter().enumerate() {
        for to in &ids[i + 1..] {
            if rng.random_bool(0.8) {
                shipments.push(shipment(from, to, rng.random_range(10..=300) as f64));
            }
        }
    }
    if shipments.is_empty() {
        shipments.push(shipment("W", "Z", 100.0));
    }

    Instance {
        yards,
        links,
        shipments,
        params: Params::default(),
        mandated_services: Default::default(),
        forbidden_services: Default::default(),
        mandated_paths: Default::default(),
    }
}

/// A structurally feasible plan reached by a few random moves from the
/// initial plan.
pub fn random_plan(model: &Model, seed: u64) -> Plan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plan = initial_plan(model).expect("generated instances are routable");
    for _ in 0..rng.random_range(0..20) {
        plan = neighbor(model, &plan, &mut rng);
    }
    plan
}
