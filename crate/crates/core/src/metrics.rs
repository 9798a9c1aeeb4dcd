//! System performance metrics computed from assignments and run traces.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cost::energy;
use crate::error::{Error, Result};
use crate::model::{Assignment, TierKind, Topology};
use crate::stats;

pub const HOURS_PER_YEAR: f64 = 8760.0;

/// Rate-weighted energy `Σ β_i·E_{i,n(i)}` over placed streams, in joules per
/// second of task arrivals.
pub fn rate_weighted_energy(a: &Assignment, t: &Topology) -> Result<f64> {
    let mut total = 0.0;
    for (s, n) in a.placement().iter().enumerate() {
        let Some(n) = *n else { continue };
        let st = &t.streams[s];
        let node = &t.nodes[n];
        let link = t
            .stream_link(st, &node.id)
            .ok_or_else(|| Error::Config(alloc::format!("stream {} placed on unlinked node {}", st.id, node.id)))?;
        total += st.rate_beta * energy(st, node, link, t.energy_mode)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySavings {
    pub base_j: f64,
    pub opt_j: f64,
    /// `base − opt`.
    pub delta_j: f64,
    /// `(base − opt)/base`; zero when the baseline uses no energy.
    pub fraction: f64,
}

/// Savings of `opt` relative to `base` (normally the all-cloud placement).
/// Both must place exactly the same streams.
pub fn energy_savings(base: &Assignment, opt: &Assignment, t: &Topology) -> Result<EnergySavings> {
    let n = t.streams.len();
    if base.placement().len() != n || opt.placement().len() != n {
        return Err(Error::MismatchedStreams);
    }
    if base.placement().iter().zip(opt.placement()).any(|(b, o)| b.is_some() != o.is_some()) {
        return Err(Error::MismatchedStreams);
    }
    let base_j = rate_weighted_energy(base, t)?;
    let opt_j = rate_weighted_energy(opt, t)?;
    let delta_j = base_j - opt_j;
    let fraction = if base_j > 0.0 { delta_j / base_j } else { 0.0 };
    Ok(EnergySavings { base_j, opt_j, delta_j, fraction })
}

/// Fraction of raw upstream traffic kept after local preprocessing, per tier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReductionFactors {
    pub edge: f64,
    pub fog: f64,
    pub cloud: f64,
}

impl Default for ReductionFactors {
    fn default() -> Self {
        ReductionFactors { edge: 0.10, fog: 0.50, cloud: 1.00 }
    }
}

impl ReductionFactors {
    pub fn get(&self, tier: TierKind) -> f64 {
        match tier {
            TierKind::Edge => self.edge,
            TierKind::Fog => self.fog,
            TierKind::Cloud => self.cloud,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BandwidthUsage {
    /// MB/s contributed by tasks placed on each tier, indexed edge, fog, cloud.
    pub per_tier_mb_s: [f64; 3],
    pub total_mb_s: f64,
}

/// Upstream bandwidth when every placed task needs `base_mb_s` before
/// preprocessing.
pub fn bandwidth_usage(a: &Assignment, t: &Topology, base_mb_s: f64, reduction: &ReductionFactors) -> BandwidthUsage {
    let mut per_tier_mb_s = [0.0; 3];
    for n in a.placement().iter().flatten() {
        let tier = t.nodes[*n].tier;
        per_tier_mb_s[tier.index()] += base_mb_s * reduction.get(tier);
    }
    BandwidthUsage { per_tier_mb_s, total_mb_s: per_tier_mb_s.iter().sum() }
}

/// `100·(P_gen − P_exported)/P_gen`.
pub fn curtailment(p_gen: f64, p_exported: f64) -> Result<f64> {
    if !(p_gen > 0.0) {
        return Err(Error::InvalidParameter { what: "curtailment.p_gen", value: p_gen });
    }
    if !(p_exported >= 0.0) || p_exported > p_gen {
        return Err(Error::InvalidParameter { what: "curtailment.p_exported", value: p_exported });
    }
    Ok(100.0 * (p_gen - p_exported) / p_gen)
}

/// Number of `(realized latency, deadline)` samples that miss their deadline.
pub fn curtailment_events<I: IntoIterator<Item = (f64, f64)>>(trace: I) -> usize {
    trace.into_iter().filter(|(l, d)| l > d).count()
}

/// Drop probability of a link at utilization `ρ`: `1 − e^(−ρ)`.
pub fn link_loss(rho: f64) -> f64 {
    -libm::expm1(-rho)
}

/// Rate-weighted loss in percent over `(β, ρ)` pairs.
pub fn packet_loss_weighted(pairs: &[(f64, f64)]) -> f64 {
    let total: f64 = pairs.iter().map(|p| p.0).sum();
    if total <= 0.0 {
        return 0.0;
    }
    100.0 * pairs.iter().map(|&(b, r)| b * link_loss(r)).sum::<f64>() / total
}

/// Loss in percent over placed streams, using the load of the link from each
/// stream's origin to its node.
pub fn packet_loss(a: &Assignment, t: &Topology) -> f64 {
    let pairs: Vec<(f64, f64)> = a
        .placement()
        .iter()
        .enumerate()
        .filter_map(|(s, n)| {
            let st = &t.streams[s];
            let link = t.stream_link(st, &t.nodes[(*n)?].id)?;
            Some((st.rate_beta, link.load_rho))
        })
        .collect();
    packet_loss_weighted(&pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvailabilitySpec {
    /// Mean time between failures, hours. Also read as MTTF.
    pub mtbf_h: f64,
    pub mttr_h: f64,
    /// Independent parallel layers.
    #[serde(default = "one")]
    pub redundancy_layers: u32,
    #[serde(default = "year")]
    pub period_h: f64,
    /// Directly measured uptime over `period_h`, if any.
    #[serde(default)]
    pub uptime_h: Option<f64>,
}

fn one() -> u32 {
    1
}

fn year() -> f64 {
    HOURS_PER_YEAR
}

impl AvailabilitySpec {
    pub fn new(mtbf_h: f64, mttr_h: f64, redundancy_layers: u32) -> Self {
        AvailabilitySpec { mtbf_h, mttr_h, redundancy_layers, period_h: HOURS_PER_YEAR, uptime_h: None }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.mtbf_h > 0.0 && self.mtbf_h.is_finite()) {
            return Err(Error::InvalidParameter { what: "availability.mtbf_h", value: self.mtbf_h });
        }
        if !(self.mttr_h >= 0.0 && self.mttr_h.is_finite()) {
            return Err(Error::InvalidParameter { what: "availability.mttr_h", value: self.mttr_h });
        }
        if self.redundancy_layers < 1 {
            return Err(Error::InvalidParameter { what: "availability.redundancy_layers", value: 0.0 });
        }
        if !(self.period_h > 0.0) {
            return Err(Error::InvalidParameter { what: "availability.period_h", value: self.period_h });
        }
        if let Some(u) = self.uptime_h {
            if !(0.0..=self.period_h).contains(&u) {
                return Err(Error::InvalidParameter { what: "availability.uptime_h", value: u });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvailabilityReport {
    pub layers: u32,
    /// Single-layer availability as a fraction.
    pub single: f64,
    /// Availability with all layers as a fraction.
    pub system: f64,
    pub single_pct: f64,
    pub system_pct: f64,
    pub downtime_single_h: f64,
    pub downtime_system_h: f64,
    /// Equivalent MTTF of the layered system, `MTTR·A/(1−A)`; infinite when
    /// `MTTR = 0`.
    pub mttf_system_h: f64,
    /// `uptime_h / period_h` when uptime was measured.
    pub measured: Option<f64>,
}

pub fn availability(spec: &AvailabilitySpec) -> Result<AvailabilityReport> {
    spec.check()?;
    // work with unavailability to keep the tiny multi-layer values exact
    let u1 = spec.mttr_h / (spec.mtbf_h + spec.mttr_h);
    let uk = libm::pow(u1, spec.redundancy_layers as f64);
    let single = 1.0 - u1;
    let system = 1.0 - uk;
    let mttf_system_h = if uk > 0.0 { spec.mttr_h * system / uk } else { f64::INFINITY };
    Ok(AvailabilityReport {
        layers: spec.redundancy_layers,
        single,
        system,
        single_pct: 100.0 * single,
        system_pct: 100.0 * system,
        downtime_single_h: u1 * spec.period_h,
        downtime_system_h: uk * spec.period_h,
        mttf_system_h,
        measured: spec.uptime_h.map(|u| u / spec.period_h),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub actual: bool,
    pub predicted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionRate {
    Rate { tpr: f64, meets_target: bool },
    NoPositives,
}

pub const DEFAULT_TPR_TARGET: f64 = 0.95;

/// `TP / positives`, checked against `target`.
pub fn true_positive_rate(events: &[Detection], target: f64) -> DetectionRate {
    let positives = events.iter().filter(|e| e.actual).count();
    if positives == 0 {
        return DetectionRate::NoPositives;
    }
    let tp = events.iter().filter(|e| e.actual && e.predicted).count();
    let tpr = tp as f64 / positives as f64;
    DetectionRate::Rate { tpr, meets_target: tpr >= target }
}

/// `Σ β / μ` per node.
pub fn utilization_map(a: &Assignment, t: &Topology) -> Vec<f64> {
    t.nodes.iter().enumerate().map(|(n, node)| a.load(n) / node.capacity_mu).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LatencySummary {
    pub mean_s: f64,
    pub p95_s: f64,
    /// Standard deviation of latency samples around their stream's mean.
    pub jitter_s: f64,
    /// Mean nominal transmission delay `d/b` over placed streams.
    pub mean_transmission_s: f64,
    pub samples: usize,
}

impl LatencySummary {
    /// `samples[i]` holds the realized latencies of placed stream `i`.
    pub fn from_samples(samples: &[Vec<f64>], transmission: &[f64]) -> Self {
        let all: Vec<f64> = samples.iter().flatten().copied().collect();
        if all.is_empty() {
            return LatencySummary::default();
        }
        let mut ss = 0.0;
        for s in samples {
            let m = stats::mean(s);
            ss += s.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
        }
        LatencySummary {
            mean_s: stats::mean(&all),
            p95_s: stats::percentile_sorted(&stats::sorted(&all), 0.95),
            jitter_s: libm::sqrt(ss / all.len() as f64),
            mean_transmission_s: stats::mean(transmission),
            samples: all.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub energy_base_j: f64,
    pub energy_opt_j: f64,
    pub energy_saving_fraction: f64,
    pub bandwidth: BandwidthUsage,
    pub latency: LatencySummary,
    pub utilization: Vec<f64>,
    pub curtailment_pct: f64,
    pub curtailment_events: usize,
    pub packet_loss_pct: f64,
    pub unplaced: usize,
    pub objective: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinkSpec, NodeSpec, TaskStream};
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn two_tier(load: f64) -> Topology {
        Topology::new(
            vec![
                NodeSpec::new("e0", TierKind::Edge, 5.0).with_energy_per_bit(0.2),
                NodeSpec::new("c0", TierKind::Cloud, 60.0).with_energy_per_bit(2.0),
            ],
            vec![LinkSpec::new("e0", "e0", 1e9, 0.1), LinkSpec::new("e0", "c0", 1e8, 1.2).with_load(load)],
            vec![TaskStream::new("s0", "e0", 3.0, 8e6, 1.0)],
        )
    }

    #[test]
    fn energy_savings_single_stream() {
        let t = two_tier(0.0);
        let base = Assignment::from_placement(&t, &[Some(1)]).unwrap();
        let opt = Assignment::from_placement(&t, &[Some(0)]).unwrap();
        let s = energy_savings(&base, &opt, &t).unwrap();
        assert!(close(s.fraction, 1.0 - 0.3 / 3.2, 1e-12));
        assert_eq!(energy_savings(&base, &base, &t).unwrap().delta_j, 0.0);
        let none = Assignment::empty(&t);
        assert_eq!(energy_savings(&base, &none, &t).unwrap_err(), Error::MismatchedStreams);
    }

    #[test]
    fn bandwidth_mix() {
        let mut nodes = vec![];
        let mut links = vec![];
        let mut streams = vec![];
        for (id, tier) in [("e0", TierKind::Edge), ("f0", TierKind::Fog), ("c0", TierKind::Cloud)] {
            nodes.push(NodeSpec::new(id, tier, 100.0).with_energy_per_bit(0.1));
            links.push(LinkSpec::new("e0", id, 1e9, 0.1));
        }
        let mut placement = vec![];
        for i in 0..50 {
            streams.push(TaskStream::new(alloc::format!("s{i}"), "e0", 1.0, 8e6, 1.0));
            placement.push(Some(if i < 30 { 0 } else if i < 45 { 1 } else { 2 }));
        }
        let t = Topology::new(nodes, links, streams);
        let a = Assignment::from_placement(&t, &placement).unwrap();
        let bw = bandwidth_usage(&a, &t, 1.0, &ReductionFactors::default());
        assert!(close(bw.total_mb_s, 15.5, 1e-12));
        assert!(close(bw.per_tier_mb_s[1], 7.5, 1e-12));
    }

    #[test]
    fn curtailment_cases() {
        assert_eq!(curtailment(100.0, 100.0).unwrap(), 0.0);
        assert_eq!(curtailment(100.0, 80.0).unwrap(), 20.0);
        assert!(curtailment(100.0, 120.0).is_err());
        assert!(curtailment(0.0, 0.0).is_err());
        assert_eq!(curtailment_events([(0.1, 0.2), (0.2, 0.2)]), 0);
        assert_eq!(curtailment_events([(0.3, 0.2)]), 1);
    }

    #[test]
    fn packet_loss_cases() {
        assert_eq!(packet_loss_weighted(&[(1.0, 0.0)]), 0.0);
        assert!(close(packet_loss_weighted(&[(1.0, 1.0)]), 63.21205588285577, 1e-12));
        assert!(close(packet_loss_weighted(&[(1.0, 0.0), (1.0, 1.0)]), 31.606027941427885, 1e-12));
        let t = two_tier(1.0);
        let a = Assignment::from_placement(&t, &[Some(1)]).unwrap();
        assert!(close(packet_loss(&a, &t), 63.21205588285577, 1e-12));
    }

    #[test]
    fn availability_cases() {
        let r = availability(&AvailabilitySpec::new(8670.0, 1.0, 3)).unwrap();
        assert!(close(r.single_pct, 99.9884673, 5e-8));
        assert!(close(r.system_pct, 99.9999999998466, 1e-12));
        assert!(close(r.downtime_system_h * 3.6e9, 48.0, 1.0));
        let z = availability(&AvailabilitySpec::new(8670.0, 0.0, 3)).unwrap();
        assert_eq!((z.single_pct, z.system_pct), (100.0, 100.0));
        assert!(availability(&AvailabilitySpec::new(0.0, 1.0, 1)).is_err());
        let one = availability(&AvailabilitySpec::new(8670.0, 1.0, 1)).unwrap();
        assert_eq!(one.single, one.system);
    }

    #[test]
    fn detection_rates() {
        let hit = Detection { actual: true, predicted: true };
        let miss = Detection { actual: true, predicted: false };
        assert_eq!(true_positive_rate(&[hit; 3], 0.95), DetectionRate::Rate { tpr: 1.0, meets_target: true });
        let mut ev = vec![hit; 94];
        ev.extend([miss; 6]);
        assert_eq!(true_positive_rate(&ev, 0.95), DetectionRate::Rate { tpr: 0.94, meets_target: false });
        let neg = Detection { actual: false, predicted: true };
        assert_eq!(true_positive_rate(&[neg], 0.95), DetectionRate::NoPositives);
    }

    #[test]
    fn utilization() {
        let t = two_tier(0.0);
        assert_eq!(utilization_map(&Assignment::empty(&t), &t), vec![0.0, 0.0]);
        let a = Assignment::from_placement(&t, &[Some(0)]).unwrap();
        assert_eq!(utilization_map(&a, &t)[0], 0.6);
    }
}
