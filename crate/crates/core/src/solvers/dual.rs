//! Lagrangian dual of the tier-budgeted placement problem.
//!
//! Tier costs `Φ_i^k` are the cheapest deadline-feasible node of tier `k` for
//! stream `i`. Relaxing the tier budgets `C_k` with multipliers `λ_k ≥ 0`
//! gives the dual function
//!
//! ```text
//! g(λ) = Σ_i min_k (Φ_i^k + λ_k) − Σ_k λ_k C_k
//! ```
//!
//! whose sub-gradient is `s_k = #{i : t_i*(λ) = k} − C_k`. Multipliers follow
//! `λ ← [λ + σ_j d_j]_+`. By default `d_j` is `s` deflected by the previous
//! direction and `σ_j` is a Polyak step towards the best repaired primal
//! value; plain diminishing and constant steps move along `s`. After the loop the tier choice at the best multiplier
//! is repaired so every tier respects its budget, then realized on concrete
//! nodes under their rate capacities.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{CostTable, SolverResult};
use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::model::{Assignment, TierBudgets, Topology};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSchedule {
    /// `σ_j = (UB − g(λ_j)) / ‖s_j‖²`, with `UB` the best tier-level primal
    /// value found so far by repairing the iterates. Falls back to the
    /// diminishing rule until a repaired choice fits the budgets.
    #[default]
    Polyak,
    /// `σ_j = scale / (1 + j)`; `scale` defaults to the mean `|Φ_i^k|`.
    Diminishing { scale: Option<f64> },
    Constant(f64),
}

/// Weight of the previous direction when the new sub-gradient turns back on
/// it; damps zig-zagging across narrow ridges of `g`.
const DEFLECTION: f64 = 1.5;

impl StepSchedule {
    /// Step length and direction at `it`, given the previous direction.
    fn direction(&self, j: usize, mean_phi: f64, upper: f64, it: &DualIterate, prev: &[f64; 3]) -> (f64, [f64; 3]) {
        let s = it.subgradient.map(|v| v as f64);
        let diminishing = |scale: Option<f64>| scale.unwrap_or(mean_phi) / (1.0 + j as f64);
        match *self {
            StepSchedule::Polyak if upper.is_finite() => {
                let dot: f64 = (0..3).map(|k| s[k] * prev[k]).sum();
                let prev2: f64 = prev.iter().map(|v| v * v).sum();
                let beta = if dot < 0.0 && prev2 > 0.0 { -DEFLECTION * dot / prev2 } else { 0.0 };
                let mut d = [0.0; 3];
                for k in 0..3 {
                    d[k] = s[k] + beta * prev[k];
                    // the projection would clip this component anyway
                    if it.lambda[k] <= 0.0 && d[k] < 0.0 {
                        d[k] = 0.0;
                    }
                }
                let norm2: f64 = d.iter().map(|v| v * v).sum();
                let step = if norm2 == 0.0 { 0.0 } else { (upper - it.dual_value).max(0.0) / norm2 };
                (step, d)
            }
            StepSchedule::Polyak => (diminishing(None), s),
            StepSchedule::Diminishing { scale } => (diminishing(scale), s),
            StepSchedule::Constant(c) => (c, s),
        }
    }
}

/// Which streams leave an overfull tier first during repair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairOrder {
    /// Smallest reassignment penalty `Δ` first (cheapest moves).
    #[default]
    SmallestGap,
    /// Largest `Δ` first.
    LargestGap,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DualOptions {
    /// Explicit tier budgets; derived from node capacities when `None`.
    pub budgets: Option<TierBudgets>,
    pub schedule: StepSchedule,
    /// Stop once the projected sub-gradient's sup-norm is at most this.
    pub epsilon: f64,
    /// Iteration budget; `10·N` when `None`.
    pub max_iter: Option<usize>,
    pub repair: RepairOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    pub lambda: [f64; 3],
    pub step: f64,
    pub iteration: usize,
    pub subgradient: [i64; 3],
    pub tier_budgets: TierBudgets,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualIterate {
    pub lambda: [f64; 3],
    pub dual_value: f64,
    pub subgradient: [i64; 3],
}

impl DualIterate {
    pub fn subgradient_norm(&self) -> i64 {
        self.subgradient.iter().map(|s| s.abs()).max().unwrap_or(0)
    }

    /// Sup-norm of the projected sub-gradient: components with `λ_k = 0` only
    /// count when positive.
    pub fn projected_norm(&self) -> i64 {
        (0..3)
            .map(|k| if self.lambda[k] > 0.0 { self.subgradient[k].abs() } else { self.subgradient[k].max(0) })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub result: SolverResult,
    /// State at the multiplier used for primal recovery.
    pub state: DualState,
    /// Every evaluated iterate, in order.
    pub trace: Vec<DualIterate>,
    /// `Φ_i^k` per stream and tier (`None` when the tier has no feasible node).
    pub tier_costs: Vec<[Option<f64>; 3]>,
}

impl DualSolution {
    pub fn best_dual_value(&self) -> f64 {
        self.trace.iter().map(|it| it.dual_value).fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn tier_costs(t: &Topology, table: &CostTable) -> Vec<[Option<f64>; 3]> {
    (0..t.streams.len())
        .map(|s| {
            let mut out = [None; 3];
            for c in table.candidates(s) {
                let k = t.nodes[c.node].tier.index();
                // candidates are sorted, the first of each tier is its cheapest
                if out[k].is_none() {
                    out[k] = Some(c.cost.phi);
                }
            }
            out
        })
        .collect()
}

fn argmin_tier(costs: &[Option<f64>; 3], lambda: &[f64; 3]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for k in 0..3 {
        if let Some(phi) = costs[k] {
            let v = phi + lambda[k];
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((k, v));
            }
        }
    }
    best
}

/// Evaluate `g(λ)` and the tier choice / sub-gradient at `λ`.
pub fn dual_value(costs: &[[Option<f64>; 3]], lambda: &[f64; 3], budgets: TierBudgets) -> (f64, Vec<Option<usize>>, [i64; 3]) {
    let mut g = 0.0;
    let mut counts = [0i64; 3];
    let mut choice = Vec::with_capacity(costs.len());
    for c in costs {
        match argmin_tier(c, lambda) {
            Some((k, v)) => {
                g += v;
                counts[k] += 1;
                choice.push(Some(k));
            }
            None => choice.push(None),
        }
    }
    let mut s = [0i64; 3];
    for k in 0..3 {
        g -= lambda[k] * budgets.0[k] as f64;
        s[k] = counts[k] - budgets.0[k] as i64;
    }
    (g, choice, s)
}

pub fn dual_solve(t: &Topology, model: &CostModel, opts: DualOptions) -> Result<DualSolution> {
    t.validate().into_result()?;
    model.check()?;
    if !t.one_stream_per_origin() {
        return Err(Error::Config("dual solver requires exactly one stream per edge origin".into()));
    }
    let budgets = opts.budgets.unwrap_or_else(|| TierBudgets::derived(t));
    let n = t.streams.len();
    if n > budgets.total() {
        return Err(Error::Infeasible { streams: n, capacity: budgets.total() });
    }
    let table = CostTable::build(t, model)?;
    let costs = tier_costs(t, &table);

    let finite: Vec<f64> = costs.iter().flat_map(|c| c.iter().flatten().copied()).collect();
    let mean_phi = if finite.is_empty() { 1.0 } else { finite.iter().map(|v| v.abs()).sum::<f64>() / finite.len() as f64 };
    let max_iter = opts.max_iter.unwrap_or(10 * n.max(1));

    let mut lambda = [0.0f64; 3];
    let mut trace = Vec::new();
    let mut best: Option<(usize, DualIterate)> = None;
    let mut last_step = 0.0;
    let mut dir = [0.0f64; 3];
    let mut upper = f64::INFINITY;
    for j in 0..max_iter {
        let (g, mut choice, s) = dual_value(&costs, &lambda, budgets);
        repair(&costs, &lambda, budgets, opts.repair, &mut choice);
        if let Some(v) = tier_objective(&costs, &choice, budgets) {
            upper = upper.min(v);
        }
        let it = DualIterate { lambda, dual_value: g, subgradient: s };
        trace.push(it);
        let better = match &best {
            None => true,
            Some((_, b)) => {
                (it.projected_norm(), it.subgradient_norm()) < (b.projected_norm(), b.subgradient_norm())
                    || ((it.projected_norm(), it.subgradient_norm()) == (b.projected_norm(), b.subgradient_norm())
                        && it.dual_value > b.dual_value)
            }
        };
        if better {
            best = Some((j, it));
        }
        if it.projected_norm() as f64 <= opts.epsilon {
            break;
        }
        let (step, d) = opts.schedule.direction(j, mean_phi, upper, &it, &dir);
        last_step = step;
        dir = d;
        if last_step <= 0.0 {
            // g(λ) reached the primal bound: λ is optimal
            break;
        }
        for k in 0..3 {
            lambda[k] = (lambda[k] + step * d[k]).max(0.0);
        }
    }
    let (best_j, best_it) = best.expect("max_iter >= 1");
    let lambda_star = best_it.lambda;

    let (_, mut tier_of, _) = dual_value(&costs, &lambda_star, budgets);
    repair(&costs, &lambda_star, budgets, opts.repair, &mut tier_of);
    let assignment = realize(t, &table, &costs, &lambda_star, &tier_of, opts.budgets);

    let mut result = SolverResult::from_assignment(&table, assignment, trace.len());
    if let Some(b) = opts.budgets {
        let counts = result.assignment.tier_counts(t);
        result.feasible &= (0..3).all(|k| counts[k] <= b.0[k]);
    }
    let best_g = trace.iter().map(|it| it.dual_value).fold(f64::NEG_INFINITY, f64::max);
    if result.feasible {
        result.duality_gap = Some(result.objective - best_g);
    }
    let state = DualState {
        lambda: lambda_star,
        step: last_step,
        iteration: best_j,
        subgradient: best_it.subgradient,
        tier_budgets: budgets,
    };
    Ok(DualSolution { result, state, trace, tier_costs: costs })
}

/// `Σ Φ_i^{k(i)}` of a complete tier choice within budgets.
fn tier_objective(costs: &[[Option<f64>; 3]], choice: &[Option<usize>], budgets: TierBudgets) -> Option<f64> {
    let mut counts = [0usize; 3];
    let mut total = 0.0;
    for (c, k) in costs.iter().zip(choice) {
        let k = (*k)?;
        counts[k] += 1;
        total += c[k]?;
    }
    (0..3).all(|k| counts[k] <= budgets.0[k]).then_some(total)
}

/// Move streams out of overfull tiers (largest overflow first) to their
/// next-best tier that still has budget, until every tier fits or no move is
/// possible.
fn repair(costs: &[[Option<f64>; 3]], lambda: &[f64; 3], budgets: TierBudgets, order: RepairOrder, tier_of: &mut [Option<usize>]) {
    let count = |tier_of: &[Option<usize>]| {
        let mut c = [0usize; 3];
        for k in tier_of.iter().flatten() {
            c[*k] += 1;
        }
        c
    };
    loop {
        let counts = count(tier_of);
        let over = (0..3)
            .filter(|&k| counts[k] > budgets.0[k])
            .max_by_key(|&k| (counts[k] - budgets.0[k], core::cmp::Reverse(k)));
        let Some(k) = over else { return };

        // best destination with room for each stream currently on k
        let mut moves: Vec<(f64, usize, usize)> = Vec::new();
        for (i, t) in tier_of.iter().enumerate() {
            if *t != Some(k) {
                continue;
            }
            let here = costs[i][k].expect("stream sits on a finite tier") + lambda[k];
            let dest = (0..3)
                .filter(|&k2| k2 != k && counts[k2] < budgets.0[k2])
                .filter_map(|k2| costs[i][k2].map(|phi| (phi + lambda[k2], k2)))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if let Some((there, k2)) = dest {
                moves.push((there - here, i, k2));
            }
        }
        let pick = match order {
            RepairOrder::SmallestGap => moves.iter().min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))),
            RepairOrder::LargestGap => moves.iter().max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1))),
        };
        match pick {
            Some(&(_, i, k2)) => tier_of[i] = Some(k2),
            None => return,
        }
    }
}

/// Map the tier choice onto nodes, then improve with single-stream moves.
fn realize(
    t: &Topology,
    table: &CostTable,
    costs: &[[Option<f64>; 3]],
    lambda: &[f64; 3],
    tier_of: &[Option<usize>],
    explicit: Option<TierBudgets>,
) -> Assignment {
    let n = t.streams.len();
    let mut a = Assignment::empty(t);
    let adjusted = |i: usize, k: usize| costs[i][k].map(|phi| phi + lambda[k]);

    // streams that lose most by leaving their tier are placed first
    let regret = |i: usize| -> f64 {
        let Some(k) = tier_of[i] else { return f64::NEG_INFINITY };
        let here = adjusted(i, k).unwrap_or(f64::INFINITY);
        (0..3).filter(|&k2| k2 != k).filter_map(|k2| adjusted(i, k2)).map(|v| v - here).fold(f64::INFINITY, f64::min)
    };
    let mut seq: Vec<usize> = (0..n).filter(|&i| tier_of[i].is_some()).collect();
    seq.sort_by(|&x, &y| regret(y).total_cmp(&regret(x)).then(x.cmp(&y)));

    let mut counts = [0usize; 3];
    let budget_ok = |counts: &[usize; 3], k: usize| explicit.is_none_or(|b| counts[k] < b.0[k]);
    let mut overflow = Vec::new();
    for &i in &seq {
        let k = tier_of[i].unwrap();
        let node = table.feasible(t, i, &a).find(|c| t.nodes[c.node].tier.index() == k).map(|c| c.node);
        match node {
            Some(nd) => {
                a.place(t, i, nd).expect("fit checked");
                counts[k] += 1;
            }
            None => overflow.push(i),
        }
    }
    for i in overflow {
        let mut tiers: Vec<(f64, usize)> = (0..3).filter_map(|k| adjusted(i, k).map(|v| (v, k))).collect();
        tiers.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for (_, k) in tiers {
            if !budget_ok(&counts, k) {
                continue;
            }
            let node = table.feasible(t, i, &a).find(|c| t.nodes[c.node].tier.index() == k).map(|c| c.node);
            if let Some(nd) = node {
                a.place(t, i, nd).expect("fit checked");
                counts[k] += 1;
                break;
            }
        }
    }

    // local improvement: strictly cheaper single moves, bounded passes
    for _ in 0..n.max(1) {
        let mut moved = false;
        for i in 0..n {
            let current = a.node_of(i).map(|nd| (nd, table.cost(i, nd).map_or(f64::INFINITY, |c| c.phi)));
            let from_tier = current.map(|(nd, _)| t.nodes[nd].tier.index());
            let cur_phi = current.map_or(f64::INFINITY, |(_, p)| p);
            if let Some((nd, _)) = current {
                a.unplace(t, i);
                counts[t.nodes[nd].tier.index()] -= 1;
            }
            let better = table.feasible(t, i, &a).find(|c| {
                let k = t.nodes[c.node].tier.index();
                c.cost.phi < cur_phi && (Some(k) == from_tier || budget_ok(&counts, k))
            });
            let target = match (better, current) {
                (Some(c), _) => {
                    moved = true;
                    Some(c.node)
                }
                (None, Some((nd, _))) => Some(nd),
                (None, None) => None,
            };
            if let Some(nd) = target {
                a.place(t, i, nd).expect("node had room");
                counts[t.nodes[nd].tier.index()] += 1;
            }
        }
        if !moved {
            break;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::UrllcProfile;
    use crate::model::{CostWeights, EnergyMode, LinkSpec, NodeSpec, TaskStream, TierKind};
    use crate::solvers::greedy_assign;
    use crate::solvers::StreamOrder;
    use alloc::format;
    use alloc::vec;

    fn model() -> CostModel {
        CostModel::new(CostWeights::default(), UrllcProfile::off(), EnergyMode::PerBit)
    }

    /// One stream per edge node; each stream can run locally, on f0 or on c0.
    fn analytical(n: usize, betas: &[f64], data: &[f64]) -> Topology {
        let mut nodes = Vec::new();
        let mut links = Vec::new();
        let mut streams = Vec::new();
        nodes.push(NodeSpec::new("f0", TierKind::Fog, 15.0).with_energy_per_bit(0.5));
        nodes.push(NodeSpec::new("c0", TierKind::Cloud, 60.0).with_energy_per_bit(2.0));
        for i in 0..n {
            let e = format!("e{i}");
            nodes.push(NodeSpec::new(e.clone(), TierKind::Edge, 5.0).with_energy_per_bit(0.2));
            links.push(LinkSpec::new(e.clone(), e.clone(), 1e9, 0.1));
            links.push(LinkSpec::new(e.clone(), "f0", 1e8, 0.3));
            links.push(LinkSpec::new(e.clone(), "c0", 1e8, 1.2));
            streams.push(TaskStream::new(format!("s{i}"), e, betas[i], data[i], 10.0));
        }
        Topology::new(nodes, links, streams)
    }

    #[test]
    fn nonbinding_budgets_keep_zero_multipliers() {
        let t = analytical(3, &[1.0; 3], &[8e6, 4e6, 2e6]);
        let sol = dual_solve(&t, &model(), DualOptions::default()).unwrap();
        assert_eq!(sol.state.lambda, [0.0; 3]);
        let g = greedy_assign(&t, &model(), StreamOrder::Ascending).unwrap();
        assert_eq!(sol.result.assignment, g.assignment);
        assert!(sol.result.feasible);
        assert!(sol.result.duality_gap.unwrap().abs() < 1e-6 * sol.result.objective);
    }

    #[test]
    fn saturated_near_identical_streams() {
        // tier offsets ~1e6 apart, streams differ by ~1e-3: a narrow ridge
        let data: Vec<f64> = (0..6).map(|i| 8e6 + 1e3 * i as f64).collect();
        let t = analytical(6, &[1.0; 6], &data);
        let budgets = TierBudgets::new(3, 2, 1);
        let polyak = dual_solve(&t, &model(), DualOptions { budgets: Some(budgets), ..Default::default() }).unwrap();
        assert!(polyak.state.subgradient.iter().all(|s| s.abs() <= 1), "{:?}", polyak.state);
        assert!(polyak.result.feasible);
        assert_eq!(polyak.result.assignment.tier_counts(&t), [3, 2, 1]);

        for schedule in [StepSchedule::Diminishing { scale: None }, StepSchedule::Constant(1e5)] {
            let opts = DualOptions { budgets: Some(budgets), schedule, ..Default::default() };
            let sol = dual_solve(&t, &model(), opts).unwrap();
            assert!(sol.result.feasible, "{schedule:?}");
            assert!(sol.best_dual_value() <= polyak.result.objective + 1e-6);
        }
    }

    #[test]
    fn under_provisioned_is_an_error() {
        let t = analytical(4, &[1.0; 4], &[8e6; 4]);
        let opts = DualOptions { budgets: Some(TierBudgets::new(1, 1, 1)), ..Default::default() };
        assert_eq!(dual_solve(&t, &model(), opts).unwrap_err(), Error::Infeasible { streams: 4, capacity: 3 });
    }

    #[test]
    fn multiple_streams_per_origin_rejected() {
        let mut t = analytical(2, &[1.0; 2], &[8e6; 2]);
        t.streams[1].origin = "e0".into();
        assert!(matches!(dual_solve(&t, &model(), DualOptions::default()), Err(Error::Config(_))));
    }

    #[test]
    fn repair_orders_pick_different_streams() {
        // all three want edge; budgets force two out
        let costs = vec![[Some(1.0), Some(2.0), Some(9.0)], [Some(1.0), Some(5.0), Some(9.0)], [Some(1.0), Some(3.0), Some(4.0)]];
        let b = TierBudgets::new(1, 1, 1);
        let mut small = vec![Some(0); 3];
        repair(&costs, &[0.0; 3], b, RepairOrder::SmallestGap, &mut small);
        assert_eq!(small, vec![Some(1), Some(0), Some(2)]);
        let mut large = vec![Some(0); 3];
        repair(&costs, &[0.0; 3], b, RepairOrder::LargestGap, &mut large);
        assert_eq!(large[1], Some(1));
    }

    #[test]
    fn dual_value_matches_hand_evaluation() {
        let costs = vec![[Some(1.0), Some(2.0), None], [Some(3.0), Some(1.0), Some(0.5)]];
        let (g, choice, s) = dual_value(&costs, &[0.5, 0.0, 1.0], TierBudgets::new(1, 1, 0));
        // min(1.5, 2) + min(3.5, 1, 1.5) − (0.5·1 + 0 + 1·0)
        assert_eq!(g, 1.5 + 1.0 - 0.5);
        assert_eq!(choice, vec![Some(0), Some(1)]);
        assert_eq!(s, [0, 0, 0]);
    }
}
