//! Canonical example instances.
//!
//! Three small networks exercise the three motivating scenarios: capacity-bound
//! traffic routing (`fig1`), shipping-strategy choice on a corridor service
//! network (`fig2`), and merged reclassification flow at a tight yard
//! (`yard_c`). Cost parameters are library defaults (c = 1, tau = 2,
//! train size 50, lambda = 1), not sourced values.

use std::collections::BTreeMap;

use super::{CapacityBelt, Instance, Link, Params, ServicePair, Shipment, Yard};

/// All canonical fixtures keyed by name: `fig1`, `fig2`, `yard_c`.
pub fn canonical_instances() -> BTreeMap<&'static str, Instance> {
    BTreeMap::from([("fig1", fig1()), ("fig2", fig2()), ("yard_c", yard_c())])
}

fn yard(id: &str) -> Yard {
    Yard {
        id: id.to_string(),
        c: 1.0,
        tau: 2.0,
        reclass_belt: None,
        track_belt: None,
        theta: 1.0,
    }
}

fn link(from: &str, to: &str, length: f64, trains_per_day: Option<f64>) -> Link {
    Link {
        id: format!("{from}{to}"),
        from_yard: from.to_string(),
        to_yard: to.to_string(),
        length,
        capacity_belt: trains_per_day.map(CapacityBelt::rigid),
        beta_n: 1.0,
    }
}

fn shipment(origin: &str, destination: &str, volume: f64) -> Shipment {
    Shipment {
        origin: origin.to_string(),
        destination: destination.to_string(),
        volume,
    }
}

/// Six-yard network with two routes between B and D.
///
/// The corridor B→C→D admits 200 cars/day (4 trains of 50), the bypass
/// B→F→D and the outer links admit 1000 (20 trains). Path A→B→C→D→E totals
/// 520 km, path A→B→F→D→E totals 550 km. The B→C shipment of 200 cars
/// saturates the B→C link, so the A→E traffic has to take the bypass.
pub fn fig1() -> Instance {
    // 200 cars/day = 4 trains, 1000 cars/day = 20 trains at the default
    // train size of 50. Rigid (zero-width) belts reproduce hard capacities.
    Instance {
        yards: ["A", "B", "C", "D", "E", "F"].iter().map(|id| yard(id)).collect(),
        links: vec![
            link("A", "B", 100.0, Some(20.0)),
            link("B", "C", 140.0, Some(4.0)),
            link("C", "D", 140.0, Some(4.0)),
            link("D", "E", 140.0, Some(20.0)),
            link("B", "F", 170.0, Some(20.0)),
            link("F", "D", 140.0, Some(20.0)),
        ],
        shipments: vec![shipment("A", "E", 100.0), shipment("B", "C", 200.0)],
        params: Params::default(),
        mandated_services: Default::default(),
        forbidden_services: Default::default(),
        mandated_paths: Default::default(),
    }
}

/// Linear corridor A–B–C–D–E carrying a 14-service train network.
///
/// The 8 local services between adjacent yards are mandated; 6 direct
/// services (A→C, B→D, B→E and their mirrors) are candidates; every other
/// pair is not offered. Yard capacities are ample. The A→E shipment has
/// exactly four shipping strategies over this network.
pub fn fig2() -> Instance {
    let ids = ["A", "B", "C", "D", "E"];
    let lengths = [100.0, 140.0, 140.0, 140.0];
    let mut links = Vec::new();
    for (i, len) in lengths.iter().enumerate() {
        links.push(link(ids[i], ids[i + 1], *len, None));
        links.push(link(ids[i + 1], ids[i], *len, None));
    }

    let mut shipments = Vec::new();
    for from in ids {
        for to in ids {
            if from == to {
                continue;
            }
            let volume = match (from, to) {
                ("A", "E") => 100.0,
                ("C", "E") => 200.0,
                _ => 150.0,
            };
            shipments.push(shipment(from, to, volume));
        }
    }

    let mandated_services = [
        ("A", "B"), ("B", "A"), ("B", "C"), ("C", "B"),
        ("C", "D"), ("D", "C"), ("D", "E"), ("E", "D"),
    ]
    .into_iter()
    .map(|(f, t)| ServicePair::new(f, t))
    .collect();

    // Direct candidates: A->C, B->D, B->E and mirrors. The remaining six
    // pairs are not offered at all.
    let forbidden_services = [
        ("A", "D"), ("A", "E"), ("C", "E"),
        ("D", "A"), ("E", "A"), ("E", "C"),
    ]
    .into_iter()
    .map(|(f, t)| ServicePair::new(f, t))
    .collect();

    Instance {
        yards: ids.iter().map(|id| yard(id)).collect(),
        links,
        shipments,
        params: Params::default(),
        mandated_services,
        forbidden_services,
        mandated_paths: Default::default(),
    }
}

/// Linear corridor where the A→E and C→E flows merge at yard C.
///
/// Yard C sorts 300 cars/day at the nominal volumes (100 + 200), exactly its
/// guaranteed reclassification capacity; the belt stretches to 400. No direct
/// service is offered for A→E, C→E, B→E, or A→D, so the optimal plan sends
/// A→E via C and C→E via D.
pub fn yard_c() -> Instance {
    let ids = ["A", "B", "C", "D", "E"];
    let lengths = [100.0, 140.0, 140.0, 140.0];
    let links = lengths
        .iter()
        .enumerate()
        .map(|(i, len)| link(ids[i], ids[i + 1], *len, None))
        .collect();

    let mut yards: Vec<Yard> = ids.iter().map(|id| yard(id)).collect();
    yards[2].reclass_belt = Some(CapacityBelt::new(300.0, 400.0));

    let forbidden_services = [("A", "E"), ("C", "E"), ("B", "E"), ("A", "D")]
        .into_iter()
        .map(|(f, t)| ServicePair::new(f, t))
        .collect();

    Instance {
        yards,
        links,
        shipments: vec![shipment("A", "E", 100.0), shipment("C", "E", 200.0)],
        params: Params::default(),
        mandated_services: Default::default(),
        forbidden_services,
        mandated_paths: Default::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::super::validate_instance;
    use super::*;

    #[test]
    fn fixtures_validate_clean() {
        for (name, inst) in canonical_instances() {
            let report = validate_instance(&inst);
            assert!(report.is_empty(), "{name}: {report}");
        }
    }

    #[test]
    fn fig1_path_totals_match() {
        let inst = fig1();
        let total = |seq: &[&str]| -> f64 {
            seq.windows(2)
                .map(|w| {
                    inst.links
                        .iter()
                        .find(|l| l.from_yard == w[0] && l.to_yard == w[1])
                        .expect("link exists")
                        .length
                })
                .sum()
        };
        assert_eq!(total(&["A", "B", "C", "D", "E"]), 520.0);
        assert_eq!(total(&["A", "B", "F", "D", "E"]), 550.0);
    }

    #[test]
    fn fig1_volumes_match() {
        let inst = fig1();
        assert_eq!(inst.shipment(&ServicePair::new("A", "E")).unwrap().volume, 100.0);
        assert_eq!(inst.shipment(&ServicePair::new("B", "C")).unwrap().volume, 200.0);
    }

    #[test]
    fn fig2_has_fourteen_allowed_services() {
        let inst = fig2();
        let yards = ["A", "B", "C", "D", "E"];
        let mut allowed = 0;
        for from in yards {
            for to in yards {
                if from != to
                    && !inst
                        .forbidden_services
                        .contains(&ServicePair::new(from, to))
                {
                    allowed += 1;
                }
            }
        }
        assert_eq!(allowed, 14);
        assert_eq!(inst.mandated_services.len(), 8);
    }

    #[test]
    fn yard_c_merged_volume_equals_guaranteed_capacity() {
        let inst = yard_c();
        let merged: f64 = inst.shipments.iter().map(|s| s.volume).sum();
        let belt = inst.yard("C").unwrap().reclass_belt.unwrap();
        assert_eq!(merged, 300.0);
        assert_eq!(belt.lower, 300.0);
    }
}
