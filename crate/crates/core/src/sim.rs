//! Seeded scenario generation, strategy execution and trial sweeps.
//!
//! A trial draws, from one seed:
//!
//! 1. a field-network load `ρ_t ~ U[field_load]` shared by every access link,
//! 2. per stream an arrival rate `β_i ~ U[beta_range]` and an access quality
//!    `q_i ~ Pareto(quality_shape)` (scale 1),
//!
//! then builds a topology of edge gateways, fog nodes and cloud nodes. Stream
//! `i` originates at gateway `i mod E` and gets dedicated links to its gateway
//! and to every fog node at `rate_k·q_i·(1 − ρ_t)`. Cloud nodes are reached
//! over a shared backhaul whose rate ignores `ρ_t`. Every link's drop load is
//! `ρ_t`, plus `backhaul_load` on the backhaul.
//!
//! All three strategies are placed on the same scenario. Realized latencies
//! are the nominal latency plus an exponential delay spread scaled by the
//! URLLC jitter factor; spread draws come from a separate random stream, so
//! they are shared between strategies and URLLC settings.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cost::{CostBreakdown, CostModel, UrllcProfile};
use crate::error::{Error, Result};
use crate::metrics::{self, BandwidthUsage, LatencySummary, ReductionFactors, RunMetrics};
use crate::model::{Assignment, CostWeights, LinkSpec, NodeSpec, TaskStream, TierKind, Topology};
use crate::rng::{self, SimRng};
use crate::solvers::greedy::greedy_with_table;
use crate::solvers::{CostTable, SolverResult, StreamOrder};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    CloudOnly,
    EdgeFirst,
    #[default]
    GreedyHeuristic,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::CloudOnly, Strategy::EdgeFirst, Strategy::GreedyHeuristic];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::CloudOnly => "cloud_only",
            Strategy::EdgeFirst => "edge_first",
            Strategy::GreedyHeuristic => "greedy_heuristic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierProfile {
    pub count: usize,
    pub capacity_mu: f64,
    /// J/bit at the node.
    pub proc_energy_per_bit: f64,
    /// J/bit on links into nodes of this tier.
    pub comm_energy_per_bit: f64,
    #[serde(default = "one")]
    pub rho_max: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TierProfiles {
    pub edge: TierProfile,
    pub fog: TierProfile,
    pub cloud: TierProfile,
}

impl Default for TierProfiles {
    fn default() -> Self {
        TierProfiles {
            edge: TierProfile { count: 2, capacity_mu: 5.0, proc_energy_per_bit: 0.2, comm_energy_per_bit: 0.1, rho_max: 1.0 },
            fog: TierProfile { count: 3, capacity_mu: 15.0, proc_energy_per_bit: 0.5, comm_energy_per_bit: 0.3, rho_max: 1.0 },
            cloud: TierProfile { count: 2, capacity_mu: 60.0, proc_energy_per_bit: 2.0, comm_energy_per_bit: 1.2, rho_max: 1.0 },
        }
    }
}

impl TierProfiles {
    pub fn get(&self, tier: TierKind) -> &TierProfile {
        match tier {
            TierKind::Edge => &self.edge,
            TierKind::Fog => &self.fog,
            TierKind::Cloud => &self.cloud,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AccessProfile {
    /// Base rate of a stream's link to its gateway, bits/s.
    pub edge_rate_bps: f64,
    /// Base rate of a stream's link to each fog node, bits/s.
    pub fog_rate_bps: f64,
    /// Shared backhaul rate to cloud nodes, bits/s.
    pub cloud_rate_bps: f64,
    /// Pareto shape of the per-stream access quality.
    pub quality_shape: f64,
    /// Range of the trial's field-network load.
    pub field_load: [f64; 2],
    /// Extra drop load on the backhaul.
    pub backhaul_load: f64,
}

impl Default for AccessProfile {
    fn default() -> Self {
        AccessProfile {
            edge_rate_bps: 160e6,
            fog_rate_bps: 48e6,
            cloud_rate_bps: 1e9,
            quality_shape: 2.0,
            field_load: [0.0, 0.9],
            backhaul_load: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub strategy: Strategy,
    pub n_tasks: usize,
    /// Arrival rate interval, tasks/s.
    pub beta_range: [f64; 2],
    pub payload_bits: f64,
    pub deadline_s: f64,
    pub tiers: TierProfiles,
    pub access: AccessProfile,
    pub weights: CostWeights,
    pub urllc: UrllcProfile,
    pub seed: u64,
    pub trials: usize,
    /// Realized latency samples per stream.
    pub samples_per_stream: usize,
    /// Mean of the exponential delay spread, seconds.
    pub delay_spread_s: f64,
    /// Nominal DER generation behind one stream, kW.
    pub generation_kw: f64,
    /// Multiplier range on `generation_kw` per stream.
    pub generation_share: [f64; 2],
    pub stream_order: StreamOrder,
    /// Upstream bandwidth of one task before preprocessing, MB/s.
    pub bandwidth_per_task_mb_s: f64,
    pub reduction: ReductionFactors,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            strategy: Strategy::GreedyHeuristic,
            n_tasks: 50,
            beta_range: [0.67, 2.0],
            payload_bits: 8e6,
            deadline_s: 0.25,
            tiers: TierProfiles::default(),
            access: AccessProfile::default(),
            weights: CostWeights::default(),
            urllc: UrllcProfile::off(),
            seed: 1,
            trials: 1,
            samples_per_stream: 20,
            delay_spread_s: 0.005,
            generation_kw: 10.0,
            generation_share: [0.5, 1.5],
            stream_order: StreamOrder::Ascending,
            bandwidth_per_task_mb_s: 1.0,
            reduction: ReductionFactors::default(),
        }
    }
}

fn param(what: &'static str, value: f64, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter { what, value })
    }
}

impl ScenarioSpec {
    pub fn check(&self) -> Result<()> {
        let [lo, hi] = self.beta_range;
        param("scenario.beta_range", lo, lo > 0.0 && lo <= hi && hi.is_finite())?;
        param("scenario.payload_bits", self.payload_bits, self.payload_bits > 0.0)?;
        param("scenario.deadline_s", self.deadline_s, self.deadline_s > 0.0)?;
        for tier in TierKind::ALL {
            let p = self.tiers.get(tier);
            param("scenario.tiers.capacity_mu", p.capacity_mu, p.capacity_mu > 0.0 && p.capacity_mu.is_finite())?;
            param("scenario.tiers.proc_energy_per_bit", p.proc_energy_per_bit, p.proc_energy_per_bit >= 0.0)?;
            param("scenario.tiers.comm_energy_per_bit", p.comm_energy_per_bit, p.comm_energy_per_bit >= 0.0)?;
            param("scenario.tiers.rho_max", p.rho_max, p.rho_max > 0.0 && p.rho_max <= 1.0)?;
        }
        if self.n_tasks > 0 && self.tiers.edge.count == 0 {
            return Err(Error::Config("streams need at least one edge gateway".into()));
        }
        let a = &self.access;
        param("scenario.access.edge_rate_bps", a.edge_rate_bps, a.edge_rate_bps > 0.0)?;
        param("scenario.access.fog_rate_bps", a.fog_rate_bps, a.fog_rate_bps > 0.0)?;
        param("scenario.access.cloud_rate_bps", a.cloud_rate_bps, a.cloud_rate_bps > 0.0)?;
        param("scenario.access.quality_shape", a.quality_shape, a.quality_shape > 0.0)?;
        let [l0, l1] = a.field_load;
        param("scenario.access.field_load", l0, l0 >= 0.0 && l0 <= l1 && l1 < 1.0)?;
        param("scenario.access.backhaul_load", a.backhaul_load, a.backhaul_load >= 0.0)?;
        self.weights.check()?;
        self.urllc.check()?;
        param("scenario.trials", self.trials as f64, self.trials >= 1)?;
        param("scenario.samples_per_stream", self.samples_per_stream as f64, self.samples_per_stream >= 1)?;
        param("scenario.delay_spread_s", self.delay_spread_s, self.delay_spread_s >= 0.0)?;
        param("scenario.generation_kw", self.generation_kw, self.generation_kw > 0.0)?;
        let [g0, g1] = self.generation_share;
        param("scenario.generation_share", g0, g0 > 0.0 && g0 <= g1)?;
        param("scenario.bandwidth_per_task_mb_s", self.bandwidth_per_task_mb_s, self.bandwidth_per_task_mb_s >= 0.0)?;
        Ok(())
    }

    pub fn cost_model(&self) -> CostModel {
        CostModel::new(self.weights, self.urllc, crate::model::EnergyMode::PerBit)
    }
}

pub fn node_id(tier: TierKind, k: usize) -> String {
    format!("{}-{k}", tier.name())
}

pub fn stream_id(i: usize) -> String {
    format!("task-{i:03}")
}

/// `n_tasks` streams with uniform rates, round-robin over the gateways.
pub fn generate_streams(spec: &ScenarioSpec, r: &mut SimRng) -> Vec<TaskStream> {
    let gateways = spec.tiers.edge.count.max(1);
    (0..spec.n_tasks)
        .map(|i| {
            let beta = rng::uniform(r, spec.beta_range[0], spec.beta_range[1]);
            TaskStream::new(stream_id(i), node_id(TierKind::Edge, i % gateways), beta, spec.payload_bits, spec.deadline_s)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    pub field_load: f64,
    pub access_quality: Vec<f64>,
    pub topology: Topology,
}

pub fn generate(spec: &ScenarioSpec, seed: u64) -> Result<Scenario> {
    spec.check()?;
    let mut r = rng::seeded(seed, rng::STREAM_SCENARIO);
    let a = &spec.access;
    let field_load = rng::uniform(&mut r, a.field_load[0], a.field_load[1]);
    let streams = generate_streams(spec, &mut r);
    let access_quality: Vec<f64> = (0..streams.len()).map(|_| rng::pareto(&mut r, a.quality_shape)).collect();

    let mut nodes = Vec::new();
    for tier in TierKind::ALL {
        let p = spec.tiers.get(tier);
        for k in 0..p.count {
            let mut n = NodeSpec::new(node_id(tier, k), tier, p.capacity_mu).with_energy_per_bit(p.proc_energy_per_bit);
            n.rho_max = p.rho_max;
            nodes.push(n);
        }
    }
    let mut links = Vec::new();
    let (edge, fog, cloud) = (&spec.tiers.edge, &spec.tiers.fog, &spec.tiers.cloud);
    for (s, q) in streams.iter().zip(&access_quality) {
        let field = q * (1.0 - field_load);
        links.push(
            LinkSpec::new(s.origin.clone(), s.origin.clone(), a.edge_rate_bps * field, edge.comm_energy_per_bit)
                .with_load(field_load)
                .for_stream(s.id.clone()),
        );
        for k in 0..fog.count {
            links.push(
                LinkSpec::new(s.origin.clone(), node_id(TierKind::Fog, k), a.fog_rate_bps * field, fog.comm_energy_per_bit)
                    .with_load(field_load)
                    .for_stream(s.id.clone()),
            );
        }
    }
    for g in 0..edge.count {
        for k in 0..cloud.count {
            links.push(
                LinkSpec::new(node_id(TierKind::Edge, g), node_id(TierKind::Cloud, k), a.cloud_rate_bps, cloud.comm_energy_per_bit)
                    .with_load(field_load + a.backhaul_load),
            );
        }
    }
    let topology = Topology::new(nodes, links, streams);
    topology.validate().into_result()?;
    Ok(Scenario { seed, field_load, access_quality, topology })
}

/// Place the scenario's streams with `strategy`.
pub fn place(t: &Topology, table: &CostTable, strategy: Strategy, order: StreamOrder) -> SolverResult {
    match strategy {
        Strategy::GreedyHeuristic => greedy_with_table(t, table, order),
        Strategy::CloudOnly => tier_fill(t, table, &[TierKind::Cloud], false),
        Strategy::EdgeFirst => tier_fill(t, table, &TierKind::ALL, true),
    }
}

/// Each stream in index order goes to the first tier in `tiers` with a
/// deadline-feasible node that has room. Within a tier nodes are taken by
/// ascending id when `by_id`, else cheapest first.
fn tier_fill(t: &Topology, table: &CostTable, tiers: &[TierKind], by_id: bool) -> SolverResult {
    let mut a = Assignment::empty(t);
    for s in 0..t.streams.len() {
        for &tier in tiers {
            let mut fits: Vec<usize> = table.feasible(t, s, &a).filter(|c| t.nodes[c.node].tier == tier).map(|c| c.node).collect();
            if by_id {
                fits.sort_by(|x, y| t.nodes[*x].id.cmp(&t.nodes[*y].id));
            }
            if let Some(&n) = fits.first() {
                a.place(t, s, n).expect("candidate fits");
                break;
            }
        }
    }
    SolverResult::from_assignment(table, a, t.streams.len())
}

/// Common random numbers of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDraws {
    /// Generation behind each stream, kW.
    pub generation_kw: Vec<f64>,
    /// Unit-mean exponential draws, `samples_per_stream` per stream.
    pub spread: Vec<Vec<f64>>,
}

pub fn draw_samples(spec: &ScenarioSpec, seed: u64, n_streams: usize) -> SampleDraws {
    let mut r = rng::seeded(seed, rng::STREAM_SAMPLES);
    let mut generation_kw = Vec::with_capacity(n_streams);
    let mut spread = Vec::with_capacity(n_streams);
    for _ in 0..n_streams {
        generation_kw.push(spec.generation_kw * rng::uniform(&mut r, spec.generation_share[0], spec.generation_share[1]));
        spread.push((0..spec.samples_per_stream).map(|_| rng::exponential(&mut r, 1.0)).collect());
    }
    SampleDraws { generation_kw, spread }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRow {
    pub id: String,
    pub origin: String,
    pub rate_beta: f64,
    pub access_quality: f64,
    pub deadline_s: f64,
    pub node: Option<String>,
    pub tier: Option<TierKind>,
    pub transmission_s: Option<f64>,
    pub latency_s: Option<f64>,
    pub energy_j: Option<f64>,
    pub phi: Option<f64>,
    pub generation_kw: f64,
    pub deadline_misses: usize,
    /// Realized end-to-end latencies; empty when unplaced.
    pub latency_samples_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRow {
    pub id: String,
    pub tier: TierKind,
    pub capacity_mu: f64,
    pub load: f64,
    pub utilization: f64,
    pub streams: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyOutcome {
    pub strategy: Strategy,
    pub objective: f64,
    pub feasible: bool,
    pub unplaced: usize,
    pub tier_counts: [usize; 3],
    pub energy_j: f64,
    pub bandwidth: BandwidthUsage,
    pub curtailment_pct: f64,
    pub packet_loss_pct: f64,
    pub mean_latency_s: f64,
    pub jitter_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: ScenarioSpec,
    pub seed: u64,
    pub field_load: f64,
    pub strategy: Strategy,
    pub streams: Vec<StreamRow>,
    pub nodes: Vec<NodeRow>,
    pub metrics: RunMetrics,
    /// Every strategy on the same scenario and draws.
    pub comparison: Vec<StrategyOutcome>,
    pub unplaced_ids: Vec<String>,
}

/// A placement evaluated against a trial's draws.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub result: SolverResult,
    pub nominal: Vec<Option<CostBreakdown>>,
    pub samples: Vec<Vec<f64>>,
    pub latency: LatencySummary,
    pub curtailment_pct: f64,
    pub curtailment_events: usize,
    pub packet_loss_pct: f64,
    pub bandwidth: BandwidthUsage,
    pub energy_j: f64,
}

pub fn evaluate(spec: &ScenarioSpec, t: &Topology, model: &CostModel, result: SolverResult, draws: &SampleDraws) -> Result<Evaluation> {
    let jitter = spec.delay_spread_s * model.urllc.jitter_multiplier();
    let mut nominal = Vec::with_capacity(t.streams.len());
    let mut samples = Vec::with_capacity(t.streams.len());
    let mut transmission = Vec::new();
    let (mut p_gen, mut p_lost, mut events) = (0.0, 0.0, 0usize);
    for (s, st) in t.streams.iter().enumerate() {
        let per_sample_kw = draws.generation_kw[s];
        let k = draws.spread[s].len();
        p_gen += per_sample_kw * k as f64;
        let cost = match result.assignment.node_of(s) {
            Some(n) => {
                let link = t.stream_link(st, &t.nodes[n].id).ok_or_else(|| Error::UnknownId(t.nodes[n].id.clone()))?;
                Some(crate::cost::composite_cost(st, &t.nodes[n], link, model)?)
            }
            None => None,
        };
        match cost {
            Some(c) => {
                transmission.push(c.transmission_s);
                let xs: Vec<f64> = draws.spread[s].iter().map(|e| c.latency_s + jitter * e).collect();
                let misses = metrics::curtailment_events(xs.iter().map(|&l| (l, st.deadline_s)));
                events += misses;
                p_lost += per_sample_kw * misses as f64;
                samples.push(xs);
            }
            None => {
                // nothing processes this stream's control tasks
                events += k;
                p_lost += per_sample_kw * k as f64;
                samples.push(Vec::new());
            }
        }
        nominal.push(cost);
    }
    let placed: Vec<Vec<f64>> = samples.iter().filter(|v| !v.is_empty()).cloned().collect();
    let latency = LatencySummary::from_samples(&placed, &transmission);
    let curtailment_pct = if p_gen > 0.0 { metrics::curtailment(p_gen, p_gen - p_lost)? } else { 0.0 };
    Ok(Evaluation {
        packet_loss_pct: metrics::packet_loss(&result.assignment, t),
        bandwidth: metrics::bandwidth_usage(&result.assignment, t, spec.bandwidth_per_task_mb_s, &spec.reduction),
        energy_j: metrics::rate_weighted_energy(&result.assignment, t)?,
        result,
        nominal,
        samples,
        latency,
        curtailment_pct,
        curtailment_events: events,
    })
}

fn outcome(strategy: Strategy, t: &Topology, e: &Evaluation) -> StrategyOutcome {
    StrategyOutcome {
        strategy,
        objective: e.result.objective,
        feasible: e.result.feasible,
        unplaced: e.result.unplaced.len(),
        tier_counts: e.result.assignment.tier_counts(t),
        energy_j: e.energy_j,
        bandwidth: e.bandwidth,
        curtailment_pct: e.curtailment_pct,
        packet_loss_pct: e.packet_loss_pct,
        mean_latency_s: e.latency.mean_s,
        jitter_s: e.latency.jitter_s,
    }
}

/// Energy saving of `opt` against `base` over the streams both place.
fn common_savings(base: &Assignment, opt: &Assignment, t: &Topology) -> Result<metrics::EnergySavings> {
    let both = |s: usize| base.node_of(s).is_some() && opt.node_of(s).is_some();
    metrics::energy_savings(&base.restricted(t, both), &opt.restricted(t, both), t)
}

/// Run `spec.strategy` on the scenario of `seed` (all strategies are run for
/// the comparison table).
pub fn run_seed(spec: &ScenarioSpec, seed: u64) -> Result<RunRecord> {
    let sc = generate(spec, seed)?;
    let t = &sc.topology;
    let model = spec.cost_model();
    let table = CostTable::build(t, &model)?;
    let draws = draw_samples(spec, seed, t.streams.len());
    let mut evals = Vec::with_capacity(3);
    for s in Strategy::ALL {
        let r = place(t, &table, s, spec.stream_order);
        evals.push((s, evaluate(spec, t, &model, r, &draws)?));
    }
    let cloud = &evals[0].1;
    let chosen = &evals.iter().find(|(s, _)| *s == spec.strategy).expect("all strategies run").1;
    let a = &chosen.result.assignment;
    let saving = common_savings(&cloud.result.assignment, a, t)?;

    let utilization = metrics::utilization_map(a, t);
    let metrics = RunMetrics {
        energy_base_j: saving.base_j,
        energy_opt_j: saving.opt_j,
        energy_saving_fraction: saving.fraction,
        bandwidth: chosen.bandwidth,
        latency: chosen.latency,
        utilization: utilization.clone(),
        curtailment_pct: chosen.curtailment_pct,
        curtailment_events: chosen.curtailment_events,
        packet_loss_pct: chosen.packet_loss_pct,
        unplaced: chosen.result.unplaced.len(),
        objective: chosen.result.objective,
    };
    let streams = t
        .streams
        .iter()
        .enumerate()
        .map(|(s, st)| {
            let node = a.node_of(s);
            let c = chosen.nominal[s];
            StreamRow {
                id: st.id.clone(),
                origin: st.origin.clone(),
                rate_beta: st.rate_beta,
                access_quality: sc.access_quality[s],
                deadline_s: st.deadline_s,
                node: node.map(|n| t.nodes[n].id.clone()),
                tier: node.map(|n| t.nodes[n].tier),
                transmission_s: c.map(|c| c.transmission_s),
                latency_s: c.map(|c| c.latency_s),
                energy_j: c.map(|c| c.energy_j),
                phi: c.map(|c| c.phi),
                generation_kw: draws.generation_kw[s],
                deadline_misses: chosen.samples[s].iter().filter(|&&l| l > st.deadline_s).count(),
                latency_samples_s: chosen.samples[s].clone(),
            }
        })
        .collect();
    let nodes = t
        .nodes
        .iter()
        .enumerate()
        .map(|(n, nd)| NodeRow {
            id: nd.id.clone(),
            tier: nd.tier,
            capacity_mu: nd.capacity_mu,
            load: a.load(n),
            utilization: utilization[n],
            streams: a.placement().iter().filter(|p| **p == Some(n)).count(),
        })
        .collect();
    Ok(RunRecord {
        scenario: spec.clone(),
        seed,
        field_load: sc.field_load,
        strategy: spec.strategy,
        streams,
        nodes,
        metrics,
        comparison: evals.iter().map(|(s, e)| outcome(*s, t, e)).collect(),
        unplaced_ids: chosen.result.unplaced.iter().map(|&s| t.streams[s].id.clone()).collect(),
    })
}

pub fn run_scenario(spec: &ScenarioSpec) -> Result<RunRecord> {
    run_seed(spec, spec.seed)
}

/// Transport-layer effect of URLLC on one placement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UrllcEffect {
    pub transmission_off_s: f64,
    pub transmission_on_s: f64,
    pub transmission_ratio: f64,
    pub jitter_off_s: f64,
    pub jitter_on_s: f64,
    pub jitter_ratio: f64,
}

/// Evaluate URLLC off and on over the placement planned without URLLC, with
/// the same spread draws, so only the transport changes between the two.
pub fn urllc_effect(spec: &ScenarioSpec, seed: u64) -> Result<UrllcEffect> {
    let off_spec = ScenarioSpec { urllc: UrllcProfile { enabled: false, ..spec.urllc }, ..spec.clone() };
    let on_spec = ScenarioSpec { urllc: UrllcProfile { enabled: true, ..spec.urllc }, ..spec.clone() };
    let sc = generate(&off_spec, seed)?;
    let t = &sc.topology;
    let off_model = off_spec.cost_model();
    let table = CostTable::build(t, &off_model)?;
    let plan = place(t, &table, spec.strategy, spec.stream_order);
    let draws = draw_samples(spec, seed, t.streams.len());
    let off = evaluate(&off_spec, t, &off_model, plan.clone(), &draws)?;
    let on = evaluate(&on_spec, t, &on_spec.cost_model(), plan, &draws)?;
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 1.0 };
    Ok(UrllcEffect {
        transmission_off_s: off.latency.mean_transmission_s,
        transmission_on_s: on.latency.mean_transmission_s,
        transmission_ratio: ratio(on.latency.mean_transmission_s, off.latency.mean_transmission_s),
        jitter_off_s: off.latency.jitter_s,
        jitter_on_s: on.latency.jitter_s,
        jitter_ratio: ratio(on.latency.jitter_s, off.latency.jitter_s),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub seed: u64,
    pub field_load: f64,
    pub energy_saving_fraction: f64,
    pub objective: f64,
    pub bandwidth_mb_s: f64,
    pub edge_first_bandwidth_mb_s: f64,
    pub cloud_only_bandwidth_mb_s: f64,
    pub curtailment_pct: f64,
    pub packet_loss_pct: f64,
    pub mean_latency_s: f64,
    pub jitter_s: f64,
    pub unplaced: usize,
    pub tier_counts: [usize; 3],
}

impl TrialSummary {
    pub fn from_record(r: &RunRecord) -> Self {
        let bw = |s: Strategy| r.comparison.iter().find(|o| o.strategy == s).map_or(0.0, |o| o.bandwidth.total_mb_s);
        let mut tier_counts = [0; 3];
        for row in &r.streams {
            if let Some(t) = row.tier {
                tier_counts[t.index()] += 1;
            }
        }
        TrialSummary {
            seed: r.seed,
            field_load: r.field_load,
            energy_saving_fraction: r.metrics.energy_saving_fraction,
            objective: r.metrics.objective,
            bandwidth_mb_s: r.metrics.bandwidth.total_mb_s,
            edge_first_bandwidth_mb_s: bw(Strategy::EdgeFirst),
            cloud_only_bandwidth_mb_s: bw(Strategy::CloudOnly),
            curtailment_pct: r.metrics.curtailment_pct,
            packet_loss_pct: r.metrics.packet_loss_pct,
            mean_latency_s: r.metrics.latency.mean_s,
            jitter_s: r.metrics.latency.jitter_s,
            unplaced: r.metrics.unplaced,
            tier_counts,
        }
    }

    /// All placed streams sit on cloud nodes.
    pub fn all_cloud(&self) -> bool {
        self.tier_counts[0] == 0 && self.tier_counts[1] == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub mean: f64,
}

impl Distribution {
    pub fn of(xs: &[f64]) -> Self {
        let v = stats::sorted(xs);
        Distribution {
            min: v.first().copied().unwrap_or(0.0),
            median: stats::percentile_sorted(&v, 0.5),
            max: v.last().copied().unwrap_or(0.0),
            mean: stats::mean(&v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub trials: usize,
    pub base_seed: u64,
    pub strategy: Strategy,
    pub energy_saving_fraction: Distribution,
    pub objective: Distribution,
    pub bandwidth_mb_s: Distribution,
    pub curtailment_pct: Distribution,
    pub packet_loss_pct: Distribution,
    pub mean_latency_s: Distribution,
    pub jitter_s: Distribution,
    pub unplaced: Distribution,
    pub zero_saving_trials: usize,
    /// Zero-saving trials in which some stream was not on the cloud.
    pub zero_saving_not_all_cloud: usize,
}

impl SweepSummary {
    pub fn from_trials(base_seed: u64, strategy: Strategy, trials: &[TrialSummary]) -> Self {
        let col = |f: fn(&TrialSummary) -> f64| Distribution::of(&trials.iter().map(f).collect::<Vec<_>>());
        let zero: Vec<&TrialSummary> = trials.iter().filter(|t| t.energy_saving_fraction.abs() < 1e-12).collect();
        SweepSummary {
            trials: trials.len(),
            base_seed,
            strategy,
            energy_saving_fraction: col(|t| t.energy_saving_fraction),
            objective: col(|t| t.objective),
            bandwidth_mb_s: col(|t| t.bandwidth_mb_s),
            curtailment_pct: col(|t| t.curtailment_pct),
            packet_loss_pct: col(|t| t.packet_loss_pct),
            mean_latency_s: col(|t| t.mean_latency_s),
            jitter_s: col(|t| t.jitter_s),
            unplaced: col(|t| t.unplaced as f64),
            zero_saving_trials: zero.len(),
            zero_saving_not_all_cloud: zero.iter().filter(|t| !t.all_cloud()).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub summary: SweepSummary,
    pub trials: Vec<TrialSummary>,
}

/// Trial `i` runs seed `base_seed + i`; the full records go to `sink`.
pub fn sweep_with<F: FnMut(&RunRecord)>(spec: &ScenarioSpec, n_trials: usize, mut sink: F) -> Result<Sweep> {
    if n_trials == 0 {
        return Err(Error::InvalidParameter { what: "sweep.n_trials", value: 0.0 });
    }
    let mut trials = Vec::with_capacity(n_trials);
    for i in 0..n_trials {
        let rec = run_seed(spec, spec.seed.wrapping_add(i as u64))?;
        trials.push(TrialSummary::from_record(&rec));
        sink(&rec);
    }
    Ok(Sweep { summary: SweepSummary::from_trials(spec.seed, spec.strategy, &trials), trials })
}

pub fn sweep(spec: &ScenarioSpec, n_trials: usize) -> Result<Sweep> {
    sweep_with(spec, n_trials, |_| {})
}
