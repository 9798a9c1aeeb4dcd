//! Greedy energy–latency placement.
//!
//! Streams are visited in a configured order. Each one goes to the cheapest
//! node (by `Φ`) that meets its deadline and still has room for its rate, and
//! that node's remaining capacity drops by the stream's rate. Streams with no
//! such node are left unplaced and the result is marked infeasible.

use alloc::vec::Vec;

use super::{CostTable, SolverResult, StreamOrder};
use crate::cost::CostModel;
use crate::error::Result;
use crate::model::{Assignment, Topology};
use crate::rng;

pub fn stream_sequence(t: &Topology, order: StreamOrder) -> Vec<usize> {
    let mut seq: Vec<usize> = (0..t.streams.len()).collect();
    match order {
        StreamOrder::Ascending => {}
        StreamOrder::DescendingRate => {
            seq.sort_by(|&a, &b| t.streams[b].rate_beta.total_cmp(&t.streams[a].rate_beta).then(a.cmp(&b)))
        }
        StreamOrder::Random(seed) => rng::shuffle(&mut rng::seeded(seed, rng::STREAM_ORDER), &mut seq),
    }
    seq
}

pub fn greedy_assign(t: &Topology, model: &CostModel, order: StreamOrder) -> Result<SolverResult> {
    t.validate().into_result()?;
    model.check()?;
    let table = CostTable::build(t, model)?;
    Ok(greedy_with_table(t, &table, order))
}

pub(crate) fn greedy_with_table(t: &Topology, table: &CostTable, order: StreamOrder) -> SolverResult {
    let mut a = Assignment::empty(t);
    for s in stream_sequence(t, order) {
        let best = table.feasible(t, s, &a).next().map(|c| c.node);
        if let Some(n) = best {
            a.place(t, s, n).expect("candidate was checked to fit");
        }
    }
    SolverResult::from_assignment(table, a, t.streams.len())
}
