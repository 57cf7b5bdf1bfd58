//! Physical path enumeration for candidate train services.
//!
//! For every service pair the plan may select one loopless physical path from
//! a precomputed candidate set: the K shortest loopless paths whose extra
//! length over the shortest stays within the detour cap. Ties in length are
//! broken by lexicographic yard-id sequence so results are deterministic.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use crate::instance::{Instance, Link, Params, ServicePair};

/// One loopless physical route for a service pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub pair: ServicePair,
    /// Yard sequence from origin to destination.
    pub yards: Vec<String>,
    /// Link ids in travel order.
    pub links: Vec<String>,
    /// Sum of member link lengths in km.
    pub total_length: f64,
}

/// The ranked candidate paths of one service pair.
///
/// Paths are sorted by total length ascending (ties by yard sequence), so the
/// shortest path always sits at rank 0 and `extra_lengths` is nondecreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub pair: ServicePair,
    pub paths: Vec<Path>,
    pub shortest_index: usize,
    /// Extra km of each path over the shortest one.
    pub extra_lengths: Vec<f64>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn shortest(&self) -> &Path {
        &self.paths[self.shortest_index]
    }

    fn from_paths(pair: ServicePair, paths: Vec<Path>) -> Self {
        let shortest = paths.first().map(|p| p.total_length).unwrap_or(0.0);
        let extra_lengths = paths.iter().map(|p| p.total_length - shortest).collect();
        PathSet { pair, paths, shortest_index: 0, extra_lengths }
    }
}

/// 1 iff `link` is a member of `path`.
pub fn arc_incidence(path: &Path, link: &Link) -> bool {
    path.links.iter().any(|id| *id == link.id)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RouteError {
    #[error("unknown yard \"{0}\"")]
    UnknownYard(String),
    #[error("no path from {0} to {1}")]
    Unreachable(String, String),
}

/// The minimum-length loopless path from `from` to `to`.
pub fn shortest_path(inst: &Instance, from: &str, to: &str) -> Result<Path, RouteError> {
    let graph = Graph::new(inst);
    let (f, t) = graph.endpoints(from, to)?;
    graph
        .shortest(f, t, &BTreeSet::new(), &BTreeSet::new())
        .map(|route| graph.to_path(from, to, &route))
        .ok_or_else(|| RouteError::Unreachable(from.to_string(), to.to_string()))
}

/// The candidate path set for `(from, to)` under the instance's `K` and
/// detour-cap parameters.
pub fn enumerate_paths(inst: &Instance, from: &str, to: &str) -> Result<PathSet, RouteError> {
    let graph = Graph::new(inst);
    graph.enumerate_pair(inst, from, to)
}

/// Effective detour cap in km for a pair whose shortest path has the given
/// length: the configured absolute cap, or 40% of the shortest length.
pub fn effective_detour_cap(params: &Params, shortest_length: f64) -> f64 {
    params
        .detour_cap
        .unwrap_or(Params::DEFAULT_RELATIVE_DETOUR * shortest_length)
}

/// An instance's network indexed for path search. Yard indices follow sorted
/// id order, so index sequences compare like yard-id sequences.
pub(crate) struct Graph {
    pub ids: Vec<String>,
    adjacency: Vec<Vec<Edge>>,
    link_ids: Vec<String>,
}

struct Edge {
    to: usize,
    length: f64,
    link: usize,
}

/// A route as (total length, yard index sequence).
type Route = (f64, Vec<usize>);

impl Graph {
    pub fn new(inst: &Instance) -> Self {
        let ids: Vec<String> = {
            let set: BTreeSet<&str> = inst.yards.iter().map(|y| y.id.as_str()).collect();
            set.into_iter().map(str::to_string).collect()
        };
        let index = |id: &str| ids.binary_search_by(|probe| probe.as_str().cmp(id)).ok();
        let mut adjacency: Vec<Vec<Edge>> = (0..ids.len()).map(|_| Vec::new()).collect();
        let mut link_ids = Vec::with_capacity(inst.links.len());
        for link in &inst.links {
            let (Some(f), Some(t)) = (index(&link.from_yard), index(&link.to_yard)) else {
                continue;
            };
            adjacency[f].push(Edge { to: t, length: link.length, link: link_ids.len() });
            link_ids.push(link.id.clone());
        }
        for edges in &mut adjacency {
            edges.sort_by_key(|e| e.to);
        }
        Graph { ids, adjacency, link_ids }
    }

    pub fn index(&self, id: &str) -> Option<usize> {
        self.ids.binary_search_by(|probe| probe.as_str().cmp(id)).ok()
    }

    fn endpoints(&self, from: &str, to: &str) -> Result<(usize, usize), RouteError> {
        let f = self.index(from).ok_or_else(|| RouteError::UnknownYard(from.to_string()))?;
        let t = self.index(to).ok_or_else(|| RouteError::UnknownYard(to.to_string()))?;
        Ok((f, t))
    }

    pub fn enumerate_pair(
        &self,
        inst: &Instance,
        from: &str,
        to: &str,
    ) -> Result<PathSet, RouteError> {
        let (f, t) = self.endpoints(from, to)?;
        let routes = self.k_shortest(f, t, inst.params.k_paths);
        if routes.is_empty() {
            return Err(RouteError::Unreachable(from.to_string(), to.to_string()));
        }
        let cap = effective_detour_cap(&inst.params, routes[0].0);
        let paths = routes
            .iter()
            .take_while(|(len, _)| *len - routes[0].0 <= cap + 1e-9)
            .map(|route| self.to_path(from, to, route))
            .collect();
        Ok(PathSet::from_paths(ServicePair::new(from, to), paths))
    }

    fn to_path(&self, from: &str, to: &str, (length, seq): &Route) -> Path {
        let links = seq
            .windows(2)
            .map(|w| {
                let edge = self.adjacency[w[0]]
                    .iter()
                    .find(|e| e.to == w[1])
                    .expect("route uses existing edges");
                self.link_ids[edge.link].clone()
            })
            .collect();
        Path {
            pair: ServicePair::new(from, to),
            yards: seq.iter().map(|&i| self.ids[i].clone()).collect(),
            links,
            total_length: *length,
        }
    }

    /// Dijkstra over (length, sequence) keys. Ties in length settle on the
    /// lexicographically smallest yard sequence. `banned_nodes` and
    /// `banned_edges` support the spur searches of the Yen enumeration.
    fn shortest(
        &self,
        from: usize,
        to: usize,
        banned_nodes: &BTreeSet<usize>,
        banned_edges: &BTreeSet<(usize, usize)>,
    ) -> Option<Route> {
        if banned_nodes.contains(&from) {
            return None;
        }
        let mut settled = vec![false; self.ids.len()];
        let mut heap = BinaryHeap::new();
        heap.push(HeapRoute(0.0, vec![from]));
        while let Some(HeapRoute(length, seq)) = heap.pop() {
            let node = *seq.last().expect("route is nonempty");
            if settled[node] {
                continue;
            }
            settled[node] = true;
            if node == to {
                return Some((length, seq));
            }
            for edge in &self.adjacency[node] {
                if settled[edge.to]
                    || banned_nodes.contains(&edge.to)
                    || banned_edges.contains(&(node, edge.to))
                {
                    continue;
                }
                let mut next = seq.clone();
                next.push(edge.to);
                heap.push(HeapRoute(length + edge.length, next));
            }
        }
        None
    }

    /// Yen's algorithm: the k shortest loopless routes in deterministic
    /// (length, sequence) order.
    fn k_shortest(&self, from: usize, to: usize, k: usize) -> Vec<Route> {
        let Some(first) = self.shortest(from, to, &BTreeSet::new(), &BTreeSet::new()) else {
            return Vec::new();
        };
        let mut routes = vec![first];
        let mut candidates: BinaryHeap<std::cmp::Reverse<HeapRoute>> = BinaryHeap::new();
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        seen.insert(routes[0].1.clone());

        while routes.len() < k {
            let previous = routes.last().expect("at least one route").1.clone();
            for spur_pos in 0..previous.len() - 1 {
                let spur_node = previous[spur_pos];
                let root = &previous[..=spur_pos];

                let mut banned_edges = BTreeSet::new();
                for (_, route) in routes.iter().map(|(l, r)| (l, r)) {
                    if route.len() > spur_pos && route[..=spur_pos] == *root {
                        if let Some(&next) = route.get(spur_pos + 1) {
                            banned_edges.insert((spur_node, next));
                        }
                    }
                }
                let banned_nodes: BTreeSet<usize> = root[..spur_pos].iter().copied().collect();

                if let Some((spur_len, spur_seq)) =
                    self.shortest(spur_node, to, &banned_nodes, &banned_edges)
                {
                    let mut seq: Vec<usize> = root[..spur_pos].to_vec();
                    seq.extend(spur_seq);
                    if seen.insert(seq.clone()) {
                        let length = self.route_length(&seq);
                        let _ = spur_len;
                        candidates.push(std::cmp::Reverse(HeapRoute(length, seq)));
                    }
                }
            }
            match candidates.pop() {
                Some(std::cmp::Reverse(HeapRoute(length, seq))) => routes.push((length, seq)),
                None => break,
            }
        }
        routes
    }

    fn route_length(&self, seq: &[usize]) -> f64 {
        seq.windows(2)
            .map(|w| {
                self.adjacency[w[0]]
                    .iter()
                    .find(|e| e.to == w[1])
                    .expect("route uses existing edges")
                    .length
            })
            .sum()
    }
}

/// Max-heap entry ordered by (length, sequence); `BinaryHeap` pops the
/// greatest, so the ordering is reversed to make it a min-heap.
#[derive(Debug, PartialEq)]
struct HeapRoute(f64, Vec<usize>);

impl Eq for HeapRoute {}

impl Ord for HeapRoute {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapRoute {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{fig1, fig2};

    #[test]
    fn fig1_shortest_a_to_e() {
        let path = shortest_path(&fig1(), "A", "E").unwrap();
        assert_eq!(path.yards, ["A", "B", "C", "D", "E"]);
        assert_eq!(path.total_length, 520.0);
    }

    #[test]
    fn single_link_pair_is_that_link() {
        let inst = fig1();
        let path = shortest_path(&inst, "B", "F").unwrap();
        assert_eq!(path.yards, ["B", "F"]);
        assert_eq!(path.links, ["BF"]);
        assert_eq!(path.total_length, 170.0);
    }

    #[test]
    fn fig1_b_to_d_prefers_inner_route() {
        let path = shortest_path(&fig1(), "B", "D").unwrap();
        assert_eq!(path.yards, ["B", "C", "D"]);
        assert_eq!(path.total_length, 280.0);
    }

    #[test]
    fn fig1_a_to_e_has_two_candidates() {
        let set = enumerate_paths(&fig1(), "A", "E").unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.paths[0].total_length, 520.0);
        assert_eq!(set.paths[1].total_length, 550.0);
        assert_eq!(set.extra_lengths, [0.0, 30.0]);
        assert_eq!(set.shortest_index, 0);
    }

    #[test]
    fn line_network_has_single_path() {
        let set = enumerate_paths(&fig2(), "A", "E").unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.paths[0].yards, ["A", "B", "C", "D", "E"]);
    }

    #[test]
    fn tight_detour_cap_drops_the_long_route() {
        let mut inst = fig1();
        inst.params.detour_cap = Some(10.0);
        let set = enumerate_paths(&inst, "A", "E").unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.paths[0].total_length, 520.0);
    }

    #[test]
    fn unreachable_pair_errors() {
        let err = shortest_path(&fig1(), "E", "A").unwrap_err();
        assert_eq!(err, RouteError::Unreachable("E".into(), "A".into()));
    }

    #[test]
    fn incidence_matches_membership_and_lengths() {
        let inst = fig1();
        let path = shortest_path(&inst, "A", "E").unwrap();
        let on = inst.links.iter().find(|l| l.id == "BC").unwrap();
        let off = inst.links.iter().find(|l| l.id == "BF").unwrap();
        assert!(arc_incidence(&path, on));
        assert!(!arc_incidence(&path, off));

        let reconstructed: f64 = inst
            .links
            .iter()
            .filter(|l| arc_incidence(&path, l))
            .map(|l| l.length)
            .sum();
        assert_eq!(reconstructed, path.total_length);
    }
}
