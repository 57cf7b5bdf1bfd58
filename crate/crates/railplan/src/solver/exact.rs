//! Exhaustive enumeration of structurally feasible plans.
//!
//! The enumeration walks the routing decisions of every flow-carrying pair
//! (every shipment pair plus every pair activated by a deferral), pruning
//! forbidden services, deferral cycles, and partition contradictions as it
//! goes, then expands every path-selection combination. Idle services are
//! never generated: a minimizer cannot need a service no flow rides unless it
//! is mandated, and mandated services are always included.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::elastic::{cost_of_state, rigid_check, CostBreakdown};
use crate::flow::{propagate_flows, Plan};
use crate::instance::ServicePair;
use crate::model::Model;

use super::{CapacityMode, Solution};

/// Caps on the enumeration effort.
#[derive(Debug, Clone, Copy)]
pub struct ExactLimits {
    /// Maximum number of plans to visit.
    pub max_plans: u64,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits { max_plans: 2_000_000 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExactError {
    #[error(
        "search space exceeds the enumeration cap of {cap} plans \
         (upper-bound estimate: {estimate})"
    )]
    SearchSpaceExceeded { cap: u64, estimate: u64 },
    #[error("no structurally feasible plan satisfies the constraints")]
    NoFeasiblePlan,
}

/// Solves by full enumeration, minimizing the mode objective with
/// deterministic lexicographic tie-breaking on the plan encoding.
pub fn solve_exact(
    model: &Model,
    limits: ExactLimits,
    mode: CapacityMode,
) -> Result<Solution, ExactError> {
    let started = Instant::now();
    let mut best: Option<(f64, Plan, CostBreakdown)> = None;
    let visited = enumerate_plans(model, limits, |plan| {
        let fs = propagate_flows(model, plan).expect("enumerated plans are feasible");
        if mode == CapacityMode::Rigid && !rigid_check(model, &fs).is_empty() {
            return;
        }
        let cost = cost_of_state(model, plan, &fs);
        let objective = match mode {
            CapacityMode::Elastic => cost.total,
            CapacityMode::Rigid => cost.z,
        };
        let better = match &best {
            None => true,
            Some((incumbent, incumbent_plan, _)) => {
                match objective.total_cmp(incumbent) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Greater => false,
                    std::cmp::Ordering::Equal => plan < incumbent_plan,
                }
            }
        };
        if better {
            best = Some((objective, plan.clone(), cost));
        }
    })?;

    let (_, plan, cost) = best.ok_or(ExactError::NoFeasiblePlan)?;
    Ok(Solution {
        plan,
        cost,
        solver_id: "exact",
        seed: None,
        iterations: visited,
        wall_time: started.elapsed(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Decision {
    Direct,
    Defer(String),
}

/// Visits every structurally feasible plan without idle services; returns
/// the number of plans visited.
pub fn enumerate_plans(
    model: &Model,
    limits: ExactLimits,
    mut visit: impl FnMut(&Plan),
) -> Result<u64, ExactError> {
    let mut state = Enumeration {
        model,
        limits,
        decisions: BTreeMap::new(),
        pair_need: BTreeMap::new(),
        service_need: BTreeMap::new(),
        visited: 0,
        visit: &mut visit,
    };
    for pair in model.instance().shipment_pairs() {
        *state.pair_need.entry(pair).or_insert(0) += 1;
    }
    for pair in &model.instance().mandated_services {
        *state.service_need.entry(pair.clone()).or_insert(0) += 1;
    }
    state.assign_next()?;
    Ok(state.visited)
}

struct Enumeration<'a> {
    model: &'a Model,
    limits: ExactLimits,
    /// Routing decision per active pair.
    decisions: BTreeMap<ServicePair, Decision>,
    /// How many activations keep a pair in play (shipments and deferred-in).
    pair_need: BTreeMap<ServicePair, usize>,
    /// How many decisions require a service (defer first legs, mandates).
    service_need: BTreeMap<ServicePair, usize>,
    visited: u64,
    visit: &'a mut dyn FnMut(&Plan),
}

impl Enumeration<'_> {
    fn assign_next(&mut self) -> Result<(), ExactError> {
        let next = self
            .pair_need
            .iter()
            .find(|(pair, need)| **need > 0 && !self.decisions.contains_key(pair))
            .map(|(pair, _)| pair.clone());
        let Some(pair) = next else {
            return self.expand_paths();
        };

        // A pair whose service other decisions rely on must stay direct.
        let forced_direct = self.service_need.get(&pair).copied().unwrap_or(0) > 0;

        if self.model.service_allowed(&pair) {
            self.decisions.insert(pair.clone(), Decision::Direct);
            self.assign_next()?;
            self.decisions.remove(&pair);
        }

        if !forced_direct {
            for via in self.model.candidates(&pair).to_vec() {
                let leg = ServicePair::new(pair.0.clone(), via.clone());
                if !self.model.service_allowed(&leg) {
                    continue;
                }
                // The first-leg pair must not itself be deferred.
                if matches!(self.decisions.get(&leg), Some(Decision::Defer(_))) {
                    continue;
                }
                if self.creates_cycle(&pair, &via) {
                    continue;
                }

                self.decisions.insert(pair.clone(), Decision::Defer(via.clone()));
                *self.service_need.entry(leg.clone()).or_insert(0) += 1;
                let next_pair = ServicePair::new(via.clone(), pair.1.clone());
                *self.pair_need.entry(next_pair.clone()).or_insert(0) += 1;

                self.assign_next()?;

                *self.pair_need.get_mut(&next_pair).expect("tracked") -= 1;
                *self.service_need.get_mut(&leg).expect("tracked") -= 1;
                self.decisions.remove(&pair);
            }
        }
        Ok(())
    }

    /// Whether deferring `pair` via `via` closes a cycle over already
    /// decided deferrals toward the same destination.
    fn creates_cycle(&self, pair: &ServicePair, via: &str) -> bool {
        let mut at = via.to_string();
        loop {
            if at == pair.0 {
                return true;
            }
            match self.decisions.get(&ServicePair::new(at, pair.1.clone())) {
                Some(Decision::Defer(next)) => at = next.clone(),
                _ => return false,
            }
        }
    }

    /// All structural decisions are made; expand the path choices of every
    /// needed service and emit the plans.
    fn expand_paths(&mut self) -> Result<(), ExactError> {
        let mut base = Plan::new();
        let mut services: Vec<ServicePair> = Vec::new();
        for (pair, need) in &self.service_need {
            if *need > 0 {
                services.push(pair.clone());
            }
        }
        for (pair, decision) in &self.decisions {
            match decision {
                Decision::Direct => {
                    if !services.contains(pair) {
                        services.push(pair.clone());
                    }
                }
                Decision::Defer(via) => base.set_defer(pair.clone(), via.clone()),
            }
        }
        services.sort();
        services.dedup();

        let rank_choices: Vec<(ServicePair, Vec<usize>)> = services
            .into_iter()
            .map(|pair| {
                let ranks = match self.model.mandated_rank(&pair) {
                    Some(rank) => vec![rank],
                    None => {
                        let n = self.model.pathset(&pair).map(|s| s.len()).unwrap_or(0);
                        (0..n).collect()
                    }
                };
                (pair, ranks)
            })
            .collect();

        self.emit(&mut base, &rank_choices, 0)
    }

    fn emit(
        &mut self,
        plan: &mut Plan,
        rank_choices: &[(ServicePair, Vec<usize>)],
        depth: usize,
    ) -> Result<(), ExactError> {
        if depth == rank_choices.len() {
            self.visited += 1;
            if self.visited > self.limits.max_plans {
                return Err(ExactError::SearchSpaceExceeded {
                    cap: self.limits.max_plans,
                    estimate: self.estimate_space(),
                });
            }
            (self.visit)(plan);
            return Ok(());
        }
        let (pair, ranks) = &rank_choices[depth];
        for rank in ranks {
            plan.set_service(pair.clone(), *rank);
            self.emit(plan, rank_choices, depth + 1)?;
        }
        plan.remove_service(pair);
        Ok(())
    }

    /// Crude saturating upper bound on the state space, for the cap error.
    fn estimate_space(&self) -> u64 {
        let model = self.model;
        let mut reachable: BTreeMap<ServicePair, ()> = BTreeMap::new();
        let mut queue: Vec<ServicePair> = model.instance().shipment_pairs().collect();
        while let Some(pair) = queue.pop() {
            if reachable.insert(pair.clone(), ()).is_some() {
                continue;
            }
            for via in model.candidates(&pair) {
                queue.push(ServicePair::new(via.clone(), pair.1.clone()));
            }
        }
        let mut estimate: u64 = 1;
        for pair in reachable.keys() {
            let options = 1 + model.candidates(pair).len() as u64;
            let paths = model.pathset(pair).map(|s| s.len() as u64).unwrap_or(1).max(1);
            estimate = estimate.saturating_mul(options.saturating_mul(paths));
        }
        estimate
    }
}
