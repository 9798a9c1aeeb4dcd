//! Domain types: the compute/communication graph, task streams and placements.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed when comparing accumulated rates against a capacity limit.
pub const CAPACITY_EPS: f64 = 1e-9;

/// Compute tier. The derived order `Edge < Fog < Cloud` is the tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TierKind {
    Edge,
    Fog,
    Cloud,
}

impl TierKind {
    pub const ALL: [TierKind; 3] = [TierKind::Edge, TierKind::Fog, TierKind::Cloud];

    pub const fn index(self) -> usize {
        match self {
            TierKind::Edge => 0,
            TierKind::Fog => 1,
            TierKind::Cloud => 2,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            TierKind::Edge => "edge",
            TierKind::Fog => "fog",
            TierKind::Cloud => "cloud",
        }
    }
}

impl fmt::Display for TierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which processing-energy parameterization a scenario uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyMode {
    /// `d·η_comm + d·η_proc`, energies in J/bit.
    #[default]
    PerBit,
    /// `d·ε_comm + c·ε_proc`, processing energy in J/cycle.
    PerCycle,
}

fn default_rho_max() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: String,
    pub tier: TierKind,
    /// Service rate μ, tasks/s.
    pub capacity_mu: f64,
    /// J/bit, used in [`EnergyMode::PerBit`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proc_energy_per_bit: Option<f64>,
    /// J/cycle, used in [`EnergyMode::PerCycle`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proc_energy_per_cycle: Option<f64>,
    /// CPU speed in cycles/s. When set and the scenario is per-cycle, the
    /// service time is `cycles / cycles_per_s` instead of `1/μ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycles_per_s: Option<f64>,
    /// Utilization ceiling in (0, 1].
    #[serde(default = "default_rho_max")]
    pub rho_max: f64,
}

impl NodeSpec {
    pub fn new(id: impl Into<String>, tier: TierKind, capacity_mu: f64) -> Self {
        NodeSpec {
            id: id.into(),
            tier,
            capacity_mu,
            proc_energy_per_bit: None,
            proc_energy_per_cycle: None,
            cycles_per_s: None,
            rho_max: 1.0,
        }
    }

    pub fn with_energy_per_bit(mut self, joules: f64) -> Self {
        self.proc_energy_per_bit = Some(joules);
        self
    }

    pub fn with_energy_per_cycle(mut self, joules: f64) -> Self {
        self.proc_energy_per_cycle = Some(joules);
        self
    }

    /// Largest admissible assigned rate, `rho_max·μ`.
    pub fn rate_limit(&self) -> f64 {
        self.rho_max * self.capacity_mu
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub from: String,
    pub to: String,
    /// Achievable data rate, bits/s.
    pub rate_bps: f64,
    /// J/bit for moving the payload over this link.
    pub comm_energy_per_bit: f64,
    /// Offered load / buffer occupancy proxy, drives the drop probability.
    #[serde(default)]
    pub load_rho: f64,
    /// Dedicated to one stream; overrides the shared `from -> to` link for it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream: Option<String>,
}

impl LinkSpec {
    pub fn new(from: impl Into<String>, to: impl Into<String>, rate_bps: f64, comm_energy_per_bit: f64) -> Self {
        LinkSpec { from: from.into(), to: to.into(), rate_bps, comm_energy_per_bit, load_rho: 0.0, stream: None }
    }

    pub fn with_load(mut self, rho: f64) -> Self {
        self.load_rho = rho;
        self
    }

    pub fn for_stream(mut self, stream: impl Into<String>) -> Self {
        self.stream = Some(stream.into());
        self
    }
}

/// A flow of identical tasks generated at an edge node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskStream {
    pub id: String,
    pub origin: String,
    /// Arrival rate β, tasks/s.
    pub rate_beta: f64,
    /// Payload per task, bits.
    pub data_bits: f64,
    /// Compute demand per task, cycles (per-cycle mode only).
    #[serde(default)]
    pub compute_cycles: f64,
    /// Latency budget, seconds.
    pub deadline_s: f64,
}

impl TaskStream {
    pub fn new(id: impl Into<String>, origin: impl Into<String>, rate_beta: f64, data_bits: f64, deadline_s: f64) -> Self {
        TaskStream {
            id: id.into(),
            origin: origin.into(),
            rate_beta,
            data_bits,
            compute_cycles: 0.0,
            deadline_s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostWeights {
    pub w_latency: f64,
    pub w_energy: f64,
}

impl CostWeights {
    pub fn new(w_latency: f64, w_energy: f64) -> Result<Self> {
        let w = CostWeights { w_latency, w_energy };
        w.check()?;
        Ok(w)
    }

    pub fn check(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.w_latency) || !ok(self.w_energy) || (self.w_latency == 0.0 && self.w_energy == 0.0) {
            return Err(Error::Config(alloc::format!(
                "weights must be non-negative and not both zero, got ({}, {})",
                self.w_latency, self.w_energy
            )));
        }
        Ok(())
    }
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights { w_latency: 0.6, w_energy: 0.4 }
    }
}

/// Per-tier task-count budgets `(C^e, C^f, C^c)` used by the dual solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierBudgets(pub [usize; 3]);

impl TierBudgets {
    pub fn new(edge: usize, fog: usize, cloud: usize) -> Self {
        TierBudgets([edge, fog, cloud])
    }

    pub fn get(&self, tier: TierKind) -> usize {
        self.0[tier.index()]
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// `floor(Σ_{n∈tier} rho_max·μ_n / mean β)` per tier.
    pub fn derived(t: &Topology) -> Self {
        let n = t.streams.len();
        if n == 0 {
            return TierBudgets([0; 3]);
        }
        let mean_beta = t.streams.iter().map(|s| s.rate_beta).sum::<f64>() / n as f64;
        let mut out = [0usize; 3];
        for tier in TierKind::ALL {
            let cap: f64 = t.nodes.iter().filter(|nd| nd.tier == tier).map(NodeSpec::rate_limit).sum();
            // small slack so that e.g. 15 / 1.5 lands on 10, not 9
            out[tier.index()] = libm::floor(cap / mean_beta + 1e-9) as usize;
        }
        TierBudgets(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibilityClass {
    OverProvisioned,
    Saturated,
    UnderProvisioned,
}

/// Compare the number of streams with the aggregate tier budget.
pub fn classify_capacity(streams: usize, budgets: TierBudgets) -> FeasibilityClass {
    let total = budgets.total();
    match streams.cmp(&total) {
        core::cmp::Ordering::Less => FeasibilityClass::OverProvisioned,
        core::cmp::Ordering::Equal => FeasibilityClass::Saturated,
        core::cmp::Ordering::Greater => FeasibilityClass::UnderProvisioned,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateNodeId(String),
    DuplicateStreamId(String),
    DuplicateLink { from: String, to: String },
    UnknownOrigin { stream: String, origin: String },
    OriginNotEdge { stream: String, origin: String },
    UnknownLinkEndpoint { from: String, to: String },
    UnknownLinkStream { from: String, to: String, stream: String },
    NonPositiveCapacity(String),
    BadRhoMax(String),
    NonPositiveLinkRate { from: String, to: String },
    NegativeLinkLoad { from: String, to: String },
    NegativeEnergy(String),
    MissingProcessingEnergy { node: String, mode: EnergyMode },
    MixedEnergyModes,
    NonPositiveStreamRate(String),
    NonPositivePayload(String),
    NonPositiveDeadline(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateNodeId(id) => write!(f, "node {id}: id collision"),
            DuplicateStreamId(id) => write!(f, "stream {id}: id collision"),
            DuplicateLink { from, to } => write!(f, "link {from}->{to}: id collision"),
            UnknownOrigin { stream, origin } => write!(f, "stream {stream}: origin {origin} unknown"),
            OriginNotEdge { stream, origin } => write!(f, "stream {stream}: origin not Edge ({origin})"),
            UnknownLinkEndpoint { from, to } => write!(f, "link {from}->{to}: unknown endpoint"),
            UnknownLinkStream { from, to, stream } => write!(f, "link {from}->{to}: unknown stream {stream}"),
            NonPositiveCapacity(id) => write!(f, "node {id}: capacity must be positive"),
            BadRhoMax(id) => write!(f, "node {id}: rho_max must lie in (0, 1]"),
            NonPositiveLinkRate { from, to } => write!(f, "link {from}->{to}: rate must be positive"),
            NegativeLinkLoad { from, to } => write!(f, "link {from}->{to}: load must be non-negative"),
            NegativeEnergy(what) => write!(f, "{what}: energy coefficient must be non-negative"),
            MissingProcessingEnergy { node, mode } => {
                write!(f, "node {node}: no processing-energy coefficient for mode {mode:?}")
            }
            MixedEnergyModes => f.write_str("nodes mix per-bit and per-cycle processing energy"),
            NonPositiveStreamRate(id) => write!(f, "stream {id}: rate must be positive"),
            NonPositivePayload(id) => write!(f, "stream {id}: payload must be positive"),
            NonPositiveDeadline(id) => write!(f, "stream {id}: deadline must be positive"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_empty() {
            return Ok(());
        }
        let msg = self.violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
        Err(Error::InvalidTopology(msg))
    }
}

/// The directed compute/communication graph plus the streams to place.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Topology {
    pub nodes: Vec<NodeSpec>,
    pub links: Vec<LinkSpec>,
    pub streams: Vec<TaskStream>,
    #[serde(default)]
    pub energy_mode: EnergyMode,
}

impl Topology {
    pub fn new(nodes: Vec<NodeSpec>, links: Vec<LinkSpec>, streams: Vec<TaskStream>) -> Self {
        Topology { nodes, links, streams, energy_mode: EnergyMode::PerBit }
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn stream_index(&self, id: &str) -> Option<usize> {
        self.streams.iter().position(|s| s.id == id)
    }

    /// Shared link `from -> to`.
    pub fn link(&self, from: &str, to: &str) -> Option<&LinkSpec> {
        self.links.iter().find(|l| l.from == from && l.to == to && l.stream.is_none())
    }

    /// Link carrying `stream` to node `to`: its dedicated link if present,
    /// else the shared one from its origin.
    pub fn stream_link(&self, stream: &TaskStream, to: &str) -> Option<&LinkSpec> {
        self.links
            .iter()
            .find(|l| l.from == stream.origin && l.to == to && l.stream.as_deref() == Some(stream.id.as_str()))
            .or_else(|| self.link(&stream.origin, to))
    }

    /// Index of each stream's origin node.
    pub fn origin_indices(&self) -> Result<Vec<usize>> {
        self.streams
            .iter()
            .map(|s| self.node_index(&s.origin).ok_or_else(|| Error::UnknownId(s.origin.clone())))
            .collect()
    }

    pub fn nodes_in(&self, tier: TierKind) -> impl Iterator<Item = (usize, &NodeSpec)> + '_ {
        self.nodes.iter().enumerate().filter(move |(_, n)| n.tier == tier)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let mut seen = BTreeSet::new();
        for n in &self.nodes {
            if !seen.insert(n.id.as_str()) {
                v.push(Violation::DuplicateNodeId(n.id.clone()));
            }
            if !(n.capacity_mu > 0.0 && n.capacity_mu.is_finite()) {
                v.push(Violation::NonPositiveCapacity(n.id.clone()));
            }
            if !(n.rho_max > 0.0 && n.rho_max <= 1.0) {
                v.push(Violation::BadRhoMax(n.id.clone()));
            }
            let coeff = match self.energy_mode {
                EnergyMode::PerBit => n.proc_energy_per_bit,
                EnergyMode::PerCycle => n.proc_energy_per_cycle,
            };
            match coeff {
                None => v.push(Violation::MissingProcessingEnergy { node: n.id.clone(), mode: self.energy_mode }),
                Some(e) if !(e >= 0.0) => v.push(Violation::NegativeEnergy(alloc::format!("node {}", n.id))),
                _ => {}
            }
        }
        let per_bit_only = self.nodes.iter().any(|n| n.proc_energy_per_bit.is_some() && n.proc_energy_per_cycle.is_none());
        let per_cycle_only = self.nodes.iter().any(|n| n.proc_energy_per_cycle.is_some() && n.proc_energy_per_bit.is_none());
        if per_bit_only && per_cycle_only {
            v.push(Violation::MixedEnergyModes);
        }

        let mut seen_links = BTreeSet::new();
        for l in &self.links {
            if !seen_links.insert((l.from.as_str(), l.to.as_str(), l.stream.as_deref())) {
                v.push(Violation::DuplicateLink { from: l.from.clone(), to: l.to.clone() });
            }
            if !seen.contains(l.from.as_str()) || !seen.contains(l.to.as_str()) {
                v.push(Violation::UnknownLinkEndpoint { from: l.from.clone(), to: l.to.clone() });
            }
            if !(l.rate_bps > 0.0) {
                v.push(Violation::NonPositiveLinkRate { from: l.from.clone(), to: l.to.clone() });
            }
            if !(l.load_rho >= 0.0) {
                v.push(Violation::NegativeLinkLoad { from: l.from.clone(), to: l.to.clone() });
            }
            if !(l.comm_energy_per_bit >= 0.0) {
                v.push(Violation::NegativeEnergy(alloc::format!("link {}->{}", l.from, l.to)));
            }
        }

        let mut seen_streams = BTreeSet::new();
        for s in &self.streams {
            if !seen_streams.insert(s.id.as_str()) {
                v.push(Violation::DuplicateStreamId(s.id.clone()));
            }
            match self.nodes.iter().find(|n| n.id == s.origin) {
                None => v.push(Violation::UnknownOrigin { stream: s.id.clone(), origin: s.origin.clone() }),
                Some(n) if n.tier != TierKind::Edge => {
                    v.push(Violation::OriginNotEdge { stream: s.id.clone(), origin: s.origin.clone() })
                }
                _ => {}
            }
            if !(s.rate_beta > 0.0) {
                v.push(Violation::NonPositiveStreamRate(s.id.clone()));
            }
            if !(s.data_bits > 0.0) {
                v.push(Violation::NonPositivePayload(s.id.clone()));
            }
            if !(s.deadline_s > 0.0) {
                v.push(Violation::NonPositiveDeadline(s.id.clone()));
            }
        }
        for l in &self.links {
            if let Some(sid) = &l.stream {
                if !seen_streams.contains(sid.as_str()) {
                    v.push(Violation::UnknownLinkStream { from: l.from.clone(), to: l.to.clone(), stream: sid.clone() });
                }
            }
        }
        ValidationReport { violations: v }
    }

    /// Stream count against tier task budgets (derived when not given).
    pub fn feasible_total_capacity(&self, budgets: Option<TierBudgets>) -> FeasibilityClass {
        let budgets = budgets.unwrap_or_else(|| TierBudgets::derived(self));
        classify_capacity(self.streams.len(), budgets)
    }

    /// True when no origin emits more than one stream (the analytical model's shape).
    pub fn one_stream_per_origin(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.streams.iter().all(|s| seen.insert(s.origin.as_str()))
    }
}

/// Binary placement `x_{i,n}` plus per-node assigned load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    placement: Vec<Option<usize>>,
    load: Vec<f64>,
}

impl Assignment {
    pub fn empty(t: &Topology) -> Self {
        Assignment { placement: vec![None; t.streams.len()], load: vec![0.0; t.nodes.len()] }
    }

    /// Build from a per-stream node choice, rejecting any node overload.
    pub fn from_placement(t: &Topology, placement: &[Option<usize>]) -> Result<Self> {
        if placement.len() != t.streams.len() {
            return Err(Error::MismatchedStreams);
        }
        let mut a = Assignment::empty(t);
        for (s, node) in placement.iter().enumerate() {
            if let Some(n) = *node {
                a.place(t, s, n)?;
            }
        }
        Ok(a)
    }

    /// Set `x_{s,n} = 1`. Fails if the stream is already placed or the
    /// node would exceed `rho_max·μ`.
    pub fn place(&mut self, t: &Topology, stream: usize, node: usize) -> Result<()> {
        let nd = t.nodes.get(node).ok_or_else(|| Error::UnknownId(alloc::format!("node #{node}")))?;
        let st = t.streams.get(stream).ok_or_else(|| Error::UnknownId(alloc::format!("stream #{stream}")))?;
        if let Some(prev) = self.placement[stream] {
            return Err(Error::Config(alloc::format!(
                "stream {} already placed on {}",
                st.id, t.nodes[prev].id
            )));
        }
        if !self.fits(t, node, st.rate_beta) {
            return Err(Error::CapacityExceeded {
                node: nd.id.clone(),
                load: self.load[node] + st.rate_beta,
                limit: nd.rate_limit(),
            });
        }
        self.placement[stream] = Some(node);
        self.load[node] += st.rate_beta;
        Ok(())
    }

    pub fn unplace(&mut self, t: &Topology, stream: usize) -> Option<usize> {
        let node = self.placement[stream].take()?;
        self.load[node] -= t.streams[stream].rate_beta;
        if self.load[node].abs() < CAPACITY_EPS {
            self.load[node] = 0.0;
        }
        Some(node)
    }

    pub fn fits(&self, t: &Topology, node: usize, beta: f64) -> bool {
        self.load[node] + beta <= t.nodes[node].rate_limit() + CAPACITY_EPS
    }

    pub fn node_of(&self, stream: usize) -> Option<usize> {
        self.placement[stream]
    }

    pub fn placement(&self) -> &[Option<usize>] {
        &self.placement
    }

    /// Assigned rate Σβ on `node`.
    pub fn load(&self, node: usize) -> f64 {
        self.load[node]
    }

    /// `μ_n − Σ assigned β`.
    pub fn residual_mu(&self, t: &Topology, node: usize) -> f64 {
        t.nodes[node].capacity_mu - self.load[node]
    }

    pub fn unplaced(&self) -> Vec<usize> {
        self.placement.iter().enumerate().filter(|(_, p)| p.is_none()).map(|(i, _)| i).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.placement.iter().all(Option::is_some)
    }

    pub fn tier_counts(&self, t: &Topology) -> [usize; 3] {
        let mut c = [0; 3];
        for n in self.placement.iter().flatten() {
            c[t.nodes[*n].tier.index()] += 1;
        }
        c
    }

    /// Keep only the streams for which `keep` is true.
    pub fn restricted(&self, t: &Topology, keep: impl Fn(usize) -> bool) -> Assignment {
        let mut out = self.clone();
        for s in 0..self.placement.len() {
            if !keep(s) {
                out.unplace(t, s);
            }
        }
        out
    }

    /// stream id → node id for every placed stream.
    pub fn by_id(&self, t: &Topology) -> BTreeMap<String, String> {
        self.placement
            .iter()
            .enumerate()
            .filter_map(|(s, n)| n.map(|n| (t.streams[s].id.clone(), t.nodes[n].id.clone())))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_node() -> Topology {
        let nodes = vec![
            NodeSpec::new("e0", TierKind::Edge, 5.0).with_energy_per_bit(0.2),
            NodeSpec::new("f0", TierKind::Fog, 15.0).with_energy_per_bit(0.5),
            NodeSpec::new("c0", TierKind::Cloud, 60.0).with_energy_per_bit(2.0),
        ];
        let links = vec![
            LinkSpec::new("e0", "e0", 1e9, 0.1),
            LinkSpec::new("e0", "f0", 1e8, 0.3),
            LinkSpec::new("e0", "c0", 5e7, 1.2),
        ];
        let streams = vec![TaskStream::new("s0", "e0", 1.0, 8e6, 0.25)];
        Topology::new(nodes, links, streams)
    }

    #[test]
    fn well_formed_topology_has_empty_report() {
        assert!(three_node().validate().is_empty());
    }

    #[test]
    fn stream_from_fog_is_flagged() {
        let mut t = three_node();
        t.streams[0].origin = "f0".into();
        let r = t.validate();
        assert_eq!(r.violations.len(), 1);
        assert!(r.violations[0].to_string().contains("origin not Edge"));
    }

    #[test]
    fn duplicate_node_id_is_flagged() {
        let mut t = three_node();
        t.nodes[1].id = "e0".into();
        let r = t.validate();
        assert!(r.violations.iter().any(|v| v.to_string().contains("id collision")));
    }

    #[test]
    fn nonpositive_rates_are_flagged() {
        let mut t = three_node();
        t.streams[0].rate_beta = 0.0;
        t.links[0].rate_bps = -1.0;
        t.nodes[2].capacity_mu = 0.0;
        let r = t.validate();
        assert!(r.violations.contains(&Violation::NonPositiveStreamRate("s0".into())));
        assert!(r.violations.contains(&Violation::NonPositiveCapacity("c0".into())));
        assert!(r.violations.iter().any(|v| matches!(v, Violation::NonPositiveLinkRate { .. })));
    }

    #[test]
    fn missing_coefficient_for_active_mode() {
        let mut t = three_node();
        t.energy_mode = EnergyMode::PerCycle;
        let r = t.validate();
        assert_eq!(r.violations.len(), 3);
        t.nodes[0] = NodeSpec::new("e0", TierKind::Edge, 5.0).with_energy_per_cycle(1e-9);
        assert!(t.validate().violations.contains(&Violation::MixedEnergyModes));
    }

    #[test]
    fn capacity_classes() {
        let b = TierBudgets::new(3, 3, 3);
        assert_eq!(classify_capacity(5, b), FeasibilityClass::OverProvisioned);
        assert_eq!(classify_capacity(9, b), FeasibilityClass::Saturated);
        assert_eq!(classify_capacity(10, b), FeasibilityClass::UnderProvisioned);
    }

    #[test]
    fn derived_budgets() {
        let mut t = three_node();
        t.streams[0].rate_beta = 1.5;
        assert_eq!(TierBudgets::derived(&t), TierBudgets::new(3, 10, 40));
    }

    #[test]
    fn overload_rejected() {
        let mut t = three_node();
        t.streams.push(TaskStream::new("s1", "e0", 3.0, 8e6, 0.25));
        t.streams[0].rate_beta = 3.0;
        assert!(matches!(
            Assignment::from_placement(&t, &[Some(0), Some(0)]),
            Err(Error::CapacityExceeded { .. })
        ));
        let a = Assignment::from_placement(&t, &[Some(0), Some(1)]).unwrap();
        assert_eq!(a.residual_mu(&t, 0), 2.0);
        assert_eq!(a.tier_counts(&t), [1, 1, 0]);
    }

    #[test]
    fn double_placement_rejected() {
        let t = three_node();
        let mut a = Assignment::empty(&t);
        a.place(&t, 0, 0).unwrap();
        assert!(a.place(&t, 0, 1).is_err());
        assert_eq!(a.unplace(&t, 0), Some(0));
        assert_eq!(a.load(0), 0.0);
    }

    #[test]
    fn rho_max_limits_capacity() {
        let mut t = three_node();
        t.nodes[0].rho_max = 0.5;
        t.streams[0].rate_beta = 3.0;
        assert!(Assignment::from_placement(&t, &[Some(0)]).is_err());
    }
}
