//! Exhaustive placement oracle for small instances.
//!
//! Depth-first enumeration over every stream's deadline-feasible candidates,
//! pruning branches that break a node's rate capacity, an optional tier count
//! budget, or that cannot beat the incumbent even if every remaining stream
//! got its cheapest node. Candidates are visited cheapest first, and only a
//! strictly better total replaces the incumbent, so among equal optima the
//! lexicographically first placement in that order wins.

use alloc::vec;
use alloc::vec::Vec;

use super::{CostTable, SolverResult};
use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::model::{Assignment, TierBudgets, Topology};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Largest stream count accepted.
    pub max_streams: usize,
    /// Also enforce per-tier stream-count budgets.
    pub tier_budgets: Option<TierBudgets>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { max_streams: 12, tier_budgets: None }
    }
}

pub fn exact_oracle(t: &Topology, model: &CostModel, opts: OracleOptions) -> Result<SolverResult> {
    if t.streams.len() > opts.max_streams {
        return Err(Error::TooLarge { streams: t.streams.len(), bound: opts.max_streams });
    }
    t.validate().into_result()?;
    model.check()?;
    let table = CostTable::build(t, model)?;
    Ok(oracle_with_table(t, &table, opts.tier_budgets))
}

struct Search<'a> {
    t: &'a Topology,
    table: &'a CostTable,
    budgets: Option<TierBudgets>,
    /// `suffix_min[i]` = Σ_{s ≥ i} cheapest Φ of s.
    suffix_min: Vec<f64>,
    current: Assignment,
    tier_count: [usize; 3],
    best: Option<(f64, Vec<Option<usize>>)>,
    leaves: usize,
}

impl Search<'_> {
    fn descend(&mut self, s: usize, partial: f64) {
        if s == self.t.streams.len() {
            self.leaves += 1;
            if self.best.as_ref().is_none_or(|(b, _)| partial < *b) {
                self.best = Some((partial, self.current.placement().to_vec()));
            }
            return;
        }
        let beta = self.t.streams[s].rate_beta;
        for c in self.table.candidates(s) {
            let bound = partial + c.cost.phi + self.suffix_min[s + 1];
            if let Some((b, _)) = &self.best {
                if bound >= *b {
                    // later candidates are no cheaper
                    break;
                }
            }
            if !self.current.fits(self.t, c.node, beta) {
                continue;
            }
            let tier = self.t.nodes[c.node].tier.index();
            if let Some(b) = self.budgets {
                if self.tier_count[tier] + 1 > b.0[tier] {
                    continue;
                }
            }
            self.current.place(self.t, s, c.node).expect("fit checked");
            self.tier_count[tier] += 1;
            self.descend(s + 1, partial + c.cost.phi);
            self.tier_count[tier] -= 1;
            self.current.unplace(self.t, s);
        }
    }
}

pub(crate) fn oracle_with_table(t: &Topology, table: &CostTable, budgets: Option<TierBudgets>) -> SolverResult {
    let n = t.streams.len();
    let mut suffix_min = vec![0.0; n + 1];
    let mut any_empty = false;
    for s in (0..n).rev() {
        let m = table.candidates(s).first().map(|c| c.cost.phi);
        any_empty |= m.is_none();
        suffix_min[s] = suffix_min[s + 1] + m.unwrap_or(0.0);
    }
    if any_empty {
        // some stream has no candidate at all: no complete placement exists
        return infeasible(t, table);
    }
    let mut search = Search {
        t,
        table,
        budgets,
        suffix_min,
        current: Assignment::empty(t),
        tier_count: [0; 3],
        best: None,
        leaves: 0,
    };
    search.descend(0, 0.0);
    match search.best {
        Some((_, placement)) => {
            let a = Assignment::from_placement(t, &placement).expect("enumerated placements respect capacity");
            SolverResult::from_assignment(table, a, search.leaves)
        }
        None => infeasible(t, table),
    }
}

/// Consistent infeasible report: streams without any deadline-feasible node
/// are listed as unplaced; when every stream has candidates but no complete
/// placement fits capacity, all streams are listed.
fn infeasible(t: &Topology, table: &CostTable) -> SolverResult {
    let a = Assignment::empty(t);
    let no_candidate: Vec<usize> = (0..t.streams.len()).filter(|&s| table.candidates(s).is_empty()).collect();
    let unplaced = if no_candidate.is_empty() { (0..t.streams.len()).collect() } else { no_candidate };
    SolverResult { assignment: a, objective: 0.0, feasible: false, iterations: 0, unplaced, duality_gap: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::UrllcProfile;
    use crate::model::{CostWeights, EnergyMode, LinkSpec, NodeSpec, TaskStream, TierKind};
    use crate::solvers::{greedy_assign, StreamOrder};

    fn model() -> CostModel {
        CostModel::new(CostWeights::default(), UrllcProfile::off(), EnergyMode::PerBit)
    }

    fn base() -> (Vec<NodeSpec>, Vec<LinkSpec>) {
        (
            vec![
                NodeSpec::new("e0", TierKind::Edge, 5.0).with_energy_per_bit(0.2),
                NodeSpec::new("f0", TierKind::Fog, 15.0).with_energy_per_bit(0.5),
                NodeSpec::new("c0", TierKind::Cloud, 60.0).with_energy_per_bit(2.0),
            ],
            vec![
                LinkSpec::new("e0", "e0", 1e9, 0.1),
                LinkSpec::new("e0", "f0", 1e8, 0.3),
                LinkSpec::new("e0", "c0", 1e8, 1.2),
            ],
        )
    }

    #[test]
    fn single_stream_picks_cheapest() {
        let (nodes, links) = base();
        let t = Topology::new(nodes, links, vec![TaskStream::new("s0", "e0", 1.0, 8e6, 1.0)]);
        let r = exact_oracle(&t, &model(), OracleOptions::default()).unwrap();
        assert_eq!(r.assignment.placement(), &[Some(0)]);
    }

    #[test]
    fn beats_greedy_on_packing() {
        // greedy puts the 3.0 stream on the edge first and strands the two 2.5s
        let (nodes, links) = base();
        let streams = vec![
            TaskStream::new("s0", "e0", 3.0, 8e6, 1.0),
            TaskStream::new("s1", "e0", 2.5, 8e6, 1.0),
            TaskStream::new("s2", "e0", 2.5, 8e6, 1.0),
        ];
        let t = Topology::new(nodes, links, streams);
        let o = exact_oracle(&t, &model(), OracleOptions::default()).unwrap();
        let g = greedy_assign(&t, &model(), StreamOrder::Ascending).unwrap();
        assert!(o.objective < g.objective);
        assert_eq!(o.assignment.tier_counts(&t), [2, 1, 0]);
    }

    #[test]
    fn refuses_large_instances() {
        let (nodes, links) = base();
        let streams = (0..13).map(|i| TaskStream::new(alloc::format!("s{i}"), "e0", 0.1, 8e6, 1.0)).collect();
        let t = Topology::new(nodes, links, streams);
        assert_eq!(
            exact_oracle(&t, &model(), OracleOptions::default()).unwrap_err(),
            Error::TooLarge { streams: 13, bound: 12 }
        );
    }

    #[test]
    fn tier_budgets_bind() {
        let (nodes, links) = base();
        let streams = (0..3).map(|i| TaskStream::new(alloc::format!("s{i}"), "e0", 1.0, 8e6, 1.0)).collect();
        let t = Topology::new(nodes, links, streams);
        let opts = OracleOptions { tier_budgets: Some(TierBudgets::new(1, 1, 1)), ..Default::default() };
        let r = exact_oracle(&t, &model(), opts).unwrap();
        assert_eq!(r.assignment.tier_counts(&t), [1, 1, 1]);
    }

    #[test]
    fn infeasible_capacity_lists_all_streams() {
        let (mut nodes, links) = base();
        nodes.truncate(1);
        let links = links.into_iter().take(1).collect();
        let streams = (0..2).map(|i| TaskStream::new(alloc::format!("s{i}"), "e0", 3.0, 8e6, 1.0)).collect();
        let t = Topology::new(nodes, links, streams);
        let r = exact_oracle(&t, &model(), OracleOptions::default()).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.unplaced, vec![0, 1]);
    }
}
