//! Placement solvers over a [`Topology`].
//!
//! All three solvers work off a [`CostTable`]: for every stream, the linked
//! nodes whose latency meets the stream's deadline, with their costs, sorted
//! by `Φ` ascending and then by tier and node id. Capacity is checked against
//! a live [`Assignment`].

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::cost::{composite_cost, CostBreakdown, CostModel};
use crate::error::Result;
use crate::model::{Assignment, Topology, CAPACITY_EPS};

pub mod dual;
pub mod greedy;
pub mod oracle;

pub use dual::{dual_solve, DualIterate, DualOptions, DualState, RepairOrder, StepSchedule};
pub use greedy::greedy_assign;
pub use oracle::{exact_oracle, OracleOptions};

/// Relative slack on deadline comparisons.
const DEADLINE_REL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub node: usize,
    pub cost: CostBreakdown,
}

/// Deadline-feasible candidates of every stream, cheapest first.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    per_stream: Vec<Vec<Candidate>>,
}

pub fn meets_deadline(latency_s: f64, deadline_s: f64) -> bool {
    latency_s <= deadline_s * (1.0 + DEADLINE_REL_EPS)
}

fn candidate_order(t: &Topology, a: &Candidate, b: &Candidate) -> Ordering {
    a.cost
        .phi
        .total_cmp(&b.cost.phi)
        .then_with(|| t.nodes[a.node].tier.cmp(&t.nodes[b.node].tier))
        .then_with(|| t.nodes[a.node].id.cmp(&t.nodes[b.node].id))
}

impl CostTable {
    pub fn build(t: &Topology, model: &CostModel) -> Result<Self> {
        let mut per_stream = Vec::with_capacity(t.streams.len());
        for s in &t.streams {
            let mut c = Vec::new();
            for (n, node) in t.nodes.iter().enumerate() {
                let Some(link) = t.stream_link(s, &node.id) else { continue };
                let cost = composite_cost(s, node, link, model)?;
                if meets_deadline(cost.latency_s, s.deadline_s) {
                    c.push(Candidate { node: n, cost });
                }
            }
            c.sort_by(|a, b| candidate_order(t, a, b));
            per_stream.push(c);
        }
        Ok(CostTable { per_stream })
    }

    pub fn candidates(&self, stream: usize) -> &[Candidate] {
        &self.per_stream[stream]
    }

    pub fn cost(&self, stream: usize, node: usize) -> Option<&CostBreakdown> {
        self.per_stream[stream].iter().find(|c| c.node == node).map(|c| &c.cost)
    }

    pub fn len(&self) -> usize {
        self.per_stream.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_stream.is_empty()
    }

    /// Candidates of `stream` that also fit the remaining capacity of `a`.
    pub fn feasible<'a>(&'a self, t: &'a Topology, stream: usize, a: &'a Assignment) -> impl Iterator<Item = &'a Candidate> + 'a {
        let beta = t.streams[stream].rate_beta;
        self.per_stream[stream].iter().filter(move |c| a.fits(t, c.node, beta))
    }

    /// `Σ Φ` over the placed streams of `a`. Placements outside the table
    /// (deadline-violating or unlinked) yield `None`.
    pub fn objective(&self, a: &Assignment) -> Option<f64> {
        let mut total = 0.0;
        for (s, n) in a.placement().iter().enumerate() {
            if let Some(n) = n {
                total += self.cost(s, *n)?.phi;
            }
        }
        Some(total)
    }
}

/// Nodes that satisfy the deadline and still have room for the stream, with
/// their costs, cheapest first (ties: Edge < Fog < Cloud, then node id).
pub fn feasible_candidates(t: &Topology, model: &CostModel, stream: usize, residual: &Assignment) -> Result<Vec<Candidate>> {
    let s = &t.streams[stream];
    let mut out = Vec::new();
    for (n, node) in t.nodes.iter().enumerate() {
        let Some(link) = t.stream_link(s, &node.id) else { continue };
        let cost = composite_cost(s, node, link, model)?;
        if meets_deadline(cost.latency_s, s.deadline_s) && residual.fits(t, n, s.rate_beta) {
            out.push(Candidate { node: n, cost });
        }
    }
    out.sort_by(|a, b| candidate_order(t, a, b));
    Ok(out)
}

/// Order in which the greedy heuristic visits streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "seed")]
pub enum StreamOrder {
    /// Topology order (stream index).
    #[default]
    Ascending,
    /// Highest arrival rate first; ties by index.
    DescendingRate,
    /// Seeded shuffle.
    Random(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub assignment: Assignment,
    /// `Σ Φ` over placed streams.
    pub objective: f64,
    /// Every stream placed and all constraints hold.
    pub feasible: bool,
    pub iterations: usize,
    /// Streams with no feasible node, by index.
    pub unplaced: Vec<usize>,
    /// `objective − max_j g(λ_j)` for the dual solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duality_gap: Option<f64>,
}

impl SolverResult {
    pub(crate) fn from_assignment(table: &CostTable, assignment: Assignment, iterations: usize) -> Self {
        let unplaced = assignment.unplaced();
        let objective = table.objective(&assignment).unwrap_or(f64::NAN);
        SolverResult {
            feasible: unplaced.is_empty(),
            assignment,
            objective,
            iterations,
            unplaced,
            duality_gap: None,
        }
    }
}

/// Re-check exclusivity, rate capacity and deadlines of a placement from
/// scratch. Returns one message per violated constraint.
pub fn check_assignment(t: &Topology, model: &CostModel, a: &Assignment) -> Result<Vec<String>> {
    let mut issues = Vec::new();
    if a.placement().len() != t.streams.len() {
        issues.push(alloc::format!("placement covers {} of {} streams", a.placement().len(), t.streams.len()));
        return Ok(issues);
    }
    let mut load = alloc::vec![0.0; t.nodes.len()];
    for (s, n) in a.placement().iter().enumerate() {
        let st = &t.streams[s];
        let Some(n) = *n else {
            issues.push(alloc::format!("stream {} unplaced", st.id));
            continue;
        };
        let node = &t.nodes[n];
        load[n] += st.rate_beta;
        match t.stream_link(st, &node.id) {
            None => issues.push(alloc::format!("stream {} placed on unlinked node {}", st.id, node.id)),
            Some(link) => {
                let c = composite_cost(st, node, link, model)?;
                if !meets_deadline(c.latency_s, st.deadline_s) {
                    issues.push(alloc::format!(
                        "stream {} on {} misses deadline: {} > {}",
                        st.id, node.id, c.latency_s, st.deadline_s
                    ));
                }
            }
        }
    }
    for (n, node) in t.nodes.iter().enumerate() {
        if load[n] > node.rate_limit() + CAPACITY_EPS {
            issues.push(alloc::format!("node {} overloaded: {} > {}", node.id, load[n], node.rate_limit()));
        }
    }
    Ok(issues)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::UrllcProfile;
    use crate::model::{CostWeights, EnergyMode, LinkSpec, NodeSpec, TaskStream, TierKind};
    use alloc::vec;

    fn model() -> CostModel {
        CostModel::new(CostWeights::default(), UrllcProfile::off(), EnergyMode::PerBit)
    }

    #[test]
    fn tight_deadline_excludes_far_cloud() {
        let t = Topology::new(
            vec![
                NodeSpec::new("e0", TierKind::Edge, 5.0).with_energy_per_bit(0.2),
                NodeSpec::new("c0", TierKind::Cloud, 60.0).with_energy_per_bit(2.0),
            ],
            vec![LinkSpec::new("e0", "c0", 8e6 / 0.2, 1.2)],
            vec![TaskStream::new("s0", "e0", 1.0, 8e6, 0.001)],
        );
        let a = Assignment::empty(&t);
        assert!(feasible_candidates(&t, &model(), 0, &a).unwrap().is_empty());
    }

    #[test]
    fn ample_capacity_keeps_every_linked_node() {
        let t = Topology::new(
            vec![
                NodeSpec::new("e0", TierKind::Edge, 5.0).with_energy_per_bit(0.2),
                NodeSpec::new("f0", TierKind::Fog, 15.0).with_energy_per_bit(0.5),
                NodeSpec::new("c0", TierKind::Cloud, 60.0).with_energy_per_bit(2.0),
                NodeSpec::new("c1", TierKind::Cloud, 60.0).with_energy_per_bit(2.0),
            ],
            vec![
                LinkSpec::new("e0", "e0", 1e9, 0.1),
                LinkSpec::new("e0", "f0", 1e8, 0.3),
                LinkSpec::new("e0", "c0", 1e8, 1.2),
            ],
            vec![TaskStream::new("s0", "e0", 1.0, 8e6, f64::INFINITY)],
        );
        let a = Assignment::empty(&t);
        let c = feasible_candidates(&t, &model(), 0, &a).unwrap();
        let nodes: Vec<_> = c.iter().map(|c| c.node).collect();
        assert_eq!(nodes, vec![0, 1, 2]);
    }

    #[test]
    fn equal_cost_prefers_edge() {
        let t = Topology::new(
            vec![
                NodeSpec::new("a-cloud", TierKind::Cloud, 10.0).with_energy_per_bit(0.2),
                NodeSpec::new("z-edge", TierKind::Edge, 10.0).with_energy_per_bit(0.2),
            ],
            vec![LinkSpec::new("z-edge", "a-cloud", 1e8, 0.1), LinkSpec::new("z-edge", "z-edge", 1e8, 0.1)],
            vec![TaskStream::new("s0", "z-edge", 1.0, 8e6, 1.0)],
        );
        let a = Assignment::empty(&t);
        let c = feasible_candidates(&t, &model(), 0, &a).unwrap();
        assert_eq!(c[0].cost.phi, c[1].cost.phi);
        assert_eq!(t.nodes[c[0].node].tier, TierKind::Edge);
    }
}
