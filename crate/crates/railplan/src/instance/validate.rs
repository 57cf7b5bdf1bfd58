//! Semantic validation of an [`Instance`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use super::{CapacityBelt, Instance, ServicePair};

/// One broken invariant, locating the offending entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Every violated instance invariant; empty iff the instance is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            location: location.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every instance invariant and reports all violations found.
pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut yard_ids = BTreeSet::new();
    for yard in &inst.yards {
        let loc = format!("yard {}", yard.id);
        if yard.id.is_empty() {
            report.push("yards", "yard id must not be empty");
        }
        if yard.id.contains("->") {
            report.push(&loc, "yard id must not contain \"->\"");
        }
        if !yard_ids.insert(yard.id.clone()) {
            report.push(&loc, "duplicate yard id");
        }
        check_nonnegative(&mut report, &loc, "c", yard.c);
        check_nonnegative(&mut report, &loc, "tau", yard.tau);
        if !(yard.theta > 0.0 && yard.theta <= 1.0) {
            report.push(&loc, format!("theta must be in (0, 1], got {}", yard.theta));
        }
        check_belt(&mut report, &loc, "reclass_belt", yard.reclass_belt.as_ref());
        check_belt(&mut report, &loc, "track_belt", yard.track_belt.as_ref());
    }

    let mut link_ids = BTreeSet::new();
    let mut link_pairs = BTreeSet::new();
    for link in &inst.links {
        let loc = format!("link {}", link.id);
        if !link_ids.insert(link.id.clone()) {
            report.push(&loc, "duplicate link id");
        }
        for yard in [&link.from_yard, &link.to_yard] {
            if !yard_ids.contains(yard) {
                report.push(&loc, format!("references unknown yard \"{yard}\""));
            }
        }
        if link.from_yard == link.to_yard {
            report.push(&loc, "from_yard and to_yard must differ");
        }
        if !(link.length > 0.0 && link.length.is_finite()) {
            report.push(&loc, format!("length must be positive, got {}", link.length));
        }
        if !(link.beta_n > 0.0 && link.beta_n <= 1.0) {
            report.push(&loc, format!("beta_n must be in (0, 1], got {}", link.beta_n));
        }
        check_belt(&mut report, &loc, "capacity_belt", link.capacity_belt.as_ref());
        if !link_pairs.insert((link.from_yard.clone(), link.to_yard.clone())) {
            report.push(
                &loc,
                format!(
                    "duplicate link between {} and {}; one directed link per ordered yard pair",
                    link.from_yard, link.to_yard
                ),
            );
        }
    }

    let adjacency = build_adjacency(inst);
    let mut shipment_pairs = BTreeSet::new();
    for shipment in &inst.shipments {
        let pair = ServicePair::new(shipment.origin.clone(), shipment.destination.clone());
        let loc = format!("shipment {pair}");
        for yard in [&shipment.origin, &shipment.destination] {
            if !yard_ids.contains(yard) {
                report.push(&loc, format!("references unknown yard \"{yard}\""));
            }
        }
        if shipment.origin == shipment.destination {
            report.push(&loc, "origin and destination must differ");
        }
        if !(shipment.volume >= 0.0 && shipment.volume.is_finite()) {
            report.push(&loc, format!("volume must be nonnegative, got {}", shipment.volume));
        }
        if !shipment_pairs.insert(pair.clone()) {
            report.push(&loc, "duplicate shipment for this ordered pair");
        }
        if yard_ids.contains(&shipment.origin)
            && yard_ids.contains(&shipment.destination)
            && shipment.origin != shipment.destination
            && !reachable(&adjacency, &shipment.origin, &shipment.destination)
        {
            report.push(
                &loc,
                format!(
                    "destination {} is not reachable from origin {}",
                    shipment.destination, shipment.origin
                ),
            );
        }
    }

    let p = &inst.params;
    if !(p.train_size > 0.0 && p.train_size.is_finite()) {
        report.push("params", format!("train_size must be positive, got {}", p.train_size));
    }
    for (pair, size) in &p.train_size_overrides {
        let loc = format!("params.train_size_overrides {pair}");
        if !(*size > 0.0 && size.is_finite()) {
            report.push(&loc, format!("train size must be positive, got {size}"));
        }
        check_pair(&mut report, &loc, pair, &yard_ids);
    }
    check_nonnegative(&mut report, "params", "lambda", p.lambda);
    if !(p.cars_per_track > 0.0 && p.cars_per_track.is_finite()) {
        report.push("params", format!("cars_per_track must be positive, got {}", p.cars_per_track));
    }
    check_nonnegative(&mut report, "params", "alpha", p.alpha);
    check_nonnegative(&mut report, "params", "beta", p.beta);
    if p.k_paths == 0 {
        report.push("params", "K must be at least 1");
    }
    if let Some(cap) = p.detour_cap {
        check_nonnegative(&mut report, "params", "detour_cap", cap);
    }

    for pair in &inst.mandated_services {
        let loc = format!("mandated_services {pair}");
        check_pair(&mut report, &loc, pair, &yard_ids);
        if inst.forbidden_services.contains(pair) {
            report.push(&loc, "pair is both mandated and forbidden");
        }
        if yard_ids.contains(&pair.0)
            && yard_ids.contains(&pair.1)
            && pair.0 != pair.1
            && !reachable(&adjacency, &pair.0, &pair.1)
        {
            report.push(&loc, "mandated service has no physical path");
        }
    }
    for pair in &inst.forbidden_services {
        check_pair(&mut report, &format!("forbidden_services {pair}"), pair, &yard_ids);
    }

    for (pair, path) in &inst.mandated_paths {
        let loc = format!("mandated_paths {pair}");
        check_pair(&mut report, &loc, pair, &yard_ids);
        if inst.forbidden_services.contains(pair) {
            report.push(&loc, "mandated path given for a forbidden service");
        }
        if path.len() < 2 {
            report.push(&loc, "path must list at least two yards");
            continue;
        }
        if path.first() != Some(&pair.0) || path.last() != Some(&pair.1) {
            report.push(&loc, "path must start at the service origin and end at its destination");
        }
        let mut seen = BTreeSet::new();
        for yard in path {
            if !yard_ids.contains(yard) {
                report.push(&loc, format!("references unknown yard \"{yard}\""));
            }
            if !seen.insert(yard.clone()) {
                report.push(&loc, format!("path repeats yard {yard}"));
            }
        }
        for hop in path.windows(2) {
            if !link_pairs.contains(&(hop[0].clone(), hop[1].clone())) {
                report.push(&loc, format!("no link from {} to {}", hop[0], hop[1]));
            }
        }
    }

    report
}

fn check_nonnegative(report: &mut ValidationReport, loc: &str, field: &str, value: f64) {
    if !(value >= 0.0 && value.is_finite()) {
        report.push(loc, format!("{field} must be nonnegative, got {value}"));
    }
}

fn check_belt(report: &mut ValidationReport, loc: &str, field: &str, belt: Option<&CapacityBelt>) {
    let Some(belt) = belt else { return };
    if !(belt.lower >= 0.0 && belt.lower.is_finite() && belt.upper.is_finite()) {
        report.push(loc, format!("{field} bounds must be nonnegative and finite"));
    }
    if belt.lower > belt.upper {
        report.push(
            loc,
            format!("{field} lower exceeds upper ({} > {})", belt.lower, belt.upper),
        );
    }
}

fn check_pair(
    report: &mut ValidationReport,
    loc: &str,
    pair: &ServicePair,
    yard_ids: &BTreeSet<String>,
) {
    for yard in [&pair.0, &pair.1] {
        if !yard_ids.contains(yard) {
            report.push(loc, format!("references unknown yard \"{yard}\""));
        }
    }
    if pair.0 == pair.1 {
        report.push(loc, "origin and destination must differ");
    }
}

fn build_adjacency(inst: &Instance) -> BTreeMap<&str, Vec<&str>> {
    let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for link in &inst.links {
        adj.entry(link.from_yard.as_str())
            .or_default()
            .push(link.to_yard.as_str());
    }
    adj
}

fn reachable(adj: &BTreeMap<&str, Vec<&str>>, from: &str, to: &str) -> bool {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([from]);
    seen.insert(from);
    while let Some(cur) = queue.pop_front() {
        if cur == to {
            return true;
        }
        for next in adj.get(cur).into_iter().flatten() {
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    false
}
