//! A validated instance compiled for evaluation and search.
//!
//! Building a [`Model`] validates the instance, enumerates the candidate
//! path set of every reachable ordered yard pair once, injects mandated
//! paths, and derives the candidate reclassification yards of every pair.
//! A model is immutable and can be shared freely across threads.

use std::collections::BTreeMap;

use crate::instance::{validate_instance, Instance, ServicePair};
use crate::instance::{ValidationReport, Yard};
use crate::routing::{effective_detour_cap, Graph, Path, PathSet};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("instance is invalid:\n{0}")]
    Invalid(ValidationReport),
}

pub struct Model {
    inst: Instance,
    pathsets: BTreeMap<ServicePair, PathSet>,
    /// Shortest path length per reachable ordered pair.
    distances: BTreeMap<ServicePair, f64>,
    /// Candidate reclassification yards P(i, j), sorted by (detour, id).
    candidates: BTreeMap<ServicePair, Vec<String>>,
}

impl Model {
    pub fn build(inst: Instance) -> Result<Self, ModelError> {
        let report = validate_instance(&inst);
        if !report.is_empty() {
            return Err(ModelError::Invalid(report));
        }

        let graph = Graph::new(&inst);
        let ids = graph.ids.clone();
        let mut pathsets = BTreeMap::new();
        let mut distances = BTreeMap::new();
        for from in &ids {
            for to in &ids {
                if from == to {
                    continue;
                }
                if let Ok(set) = graph.enumerate_pair(&inst, from, to) {
                    let pair = ServicePair::new(from.clone(), to.clone());
                    distances.insert(pair.clone(), set.shortest().total_length);
                    pathsets.insert(pair, set);
                }
            }
        }

        for (pair, yard_seq) in &inst.mandated_paths {
            let set = pathsets
                .get_mut(pair)
                .expect("validated mandated path implies a reachable pair");
            inject_path(&inst, set, yard_seq);
        }

        let mut candidates = BTreeMap::new();
        for (pair, dist) in &distances {
            let cap = effective_detour_cap(&inst.params, *dist);
            let mut found: Vec<(f64, String)> = Vec::new();
            for via in &ids {
                if via == &pair.0 || via == &pair.1 {
                    continue;
                }
                let to_via = distances.get(&ServicePair::new(pair.0.clone(), via.clone()));
                let from_via = distances.get(&ServicePair::new(via.clone(), pair.1.clone()));
                if let (Some(a), Some(b)) = (to_via, from_via) {
                    let detour = a + b - dist;
                    if detour <= cap + 1e-9 {
                        found.push((detour, via.clone()));
                    }
                }
            }
            found.sort_by(|(da, ia), (db, ib)| da.total_cmp(db).then_with(|| ia.cmp(ib)));
            candidates.insert(pair.clone(), found.into_iter().map(|(_, id)| id).collect());
        }

        Ok(Model { inst, pathsets, distances, candidates })
    }

    pub fn instance(&self) -> &Instance {
        &self.inst
    }

    pub fn yards(&self) -> &[Yard] {
        &self.inst.yards
    }

    /// The candidate paths of a pair, if the destination is reachable.
    pub fn pathset(&self, pair: &ServicePair) -> Option<&PathSet> {
        self.pathsets.get(pair)
    }

    pub fn pathsets(&self) -> &BTreeMap<ServicePair, PathSet> {
        &self.pathsets
    }

    pub fn path(&self, pair: &ServicePair, rank: usize) -> Option<&Path> {
        self.pathsets.get(pair).and_then(|set| set.paths.get(rank))
    }

    pub fn distance(&self, pair: &ServicePair) -> Option<f64> {
        self.distances.get(pair).copied()
    }

    /// Candidate reclassification yards P(i, j): every yard within the
    /// pair's detour cap, ordered by detour then id.
    pub fn candidates(&self, pair: &ServicePair) -> &[String] {
        self.candidates.get(pair).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_mandated(&self, pair: &ServicePair) -> bool {
        self.inst.mandated_services.contains(pair)
    }

    pub fn is_forbidden(&self, pair: &ServicePair) -> bool {
        self.inst.forbidden_services.contains(pair)
    }

    /// The path rank a mandated path occupies in the pair's path set.
    pub fn mandated_rank(&self, pair: &ServicePair) -> Option<usize> {
        let yard_seq = self.inst.mandated_paths.get(pair)?;
        let set = self.pathsets.get(pair)?;
        set.paths.iter().position(|p| &p.yards == yard_seq)
    }

    /// Path rank a newly provided service should use: the mandated path if
    /// one is designated, otherwise the shortest.
    pub fn default_rank(&self, pair: &ServicePair) -> usize {
        self.mandated_rank(pair).unwrap_or(0)
    }

    /// Whether a service may be provided at all.
    pub fn service_allowed(&self, pair: &ServicePair) -> bool {
        !self.is_forbidden(pair) && self.pathsets.contains_key(pair)
    }

    pub fn train_size(&self, pair: &ServicePair) -> f64 {
        self.inst.params.train_size_for(pair)
    }

    pub fn shipment_volume(&self, pair: &ServicePair) -> f64 {
        self.inst.shipment(pair).map(|s| s.volume).unwrap_or(0.0)
    }
}

/// Adds a mandated path to a pair's path set if the enumeration missed it
/// (over the detour cap or beyond rank K), preserving the sort order.
fn inject_path(inst: &Instance, set: &mut PathSet, yard_seq: &[String]) {
    if set.paths.iter().any(|p| p.yards == yard_seq) {
        return;
    }
    let mut links = Vec::new();
    let mut total_length = 0.0;
    for hop in yard_seq.windows(2) {
        let link = inst
            .links
            .iter()
            .find(|l| l.from_yard == hop[0] && l.to_yard == hop[1])
            .expect("validated mandated path uses existing links");
        links.push(link.id.clone());
        total_length += link.length;
    }
    let path = Path {
        pair: set.pair.clone(),
        yards: yard_seq.to_vec(),
        links,
        total_length,
    };
    let pos = set
        .paths
        .partition_point(|p| (p.total_length, &p.yards) < (path.total_length, &path.yards));
    set.paths.insert(pos, path);
    let shortest = set.paths[0].total_length;
    set.extra_lengths = set.paths.iter().map(|p| p.total_length - shortest).collect();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{fig1, fig2, yard_c};

    #[test]
    fn builds_all_fixtures() {
        for inst in [fig1(), fig2(), yard_c()] {
            Model::build(inst).unwrap();
        }
    }

    #[test]
    fn fig1_candidates_for_a_to_e() {
        let model = Model::build(fig1()).unwrap();
        let p = model.candidates(&ServicePair::new("A", "E"));
        assert_eq!(p, ["B", "C", "D", "F"]);
    }

    #[test]
    fn fig2_excludes_backtracking_candidates() {
        let model = Model::build(fig2()).unwrap();
        assert_eq!(model.candidates(&ServicePair::new("C", "E")), ["D"]);
        assert_eq!(model.candidates(&ServicePair::new("B", "E")), ["C", "D"]);
    }

    #[test]
    fn invalid_instance_is_rejected() {
        let mut inst = fig1();
        inst.shipments[0].origin = "Z".into();
        assert!(matches!(Model::build(inst), Err(ModelError::Invalid(_))));
    }

    #[test]
    fn mandated_path_outside_cap_is_injected() {
        let mut inst = fig1();
        inst.params.detour_cap = Some(10.0);
        let pair = ServicePair::new("A", "E");
        let long_route = ["A", "B", "F", "D", "E"].map(String::from).to_vec();
        inst.mandated_paths.insert(pair.clone(), long_route.clone());
        let model = Model::build(inst).unwrap();
        let set = model.pathset(&pair).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(model.mandated_rank(&pair), Some(1));
        assert_eq!(set.paths[1].yards, long_route);
    }
}
