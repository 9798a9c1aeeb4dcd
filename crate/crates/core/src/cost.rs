//! Latency, energy and composite cost for a (stream, node) pair.
//!
//! `L = d/b + 1/μ` (or `c/ν` for per-cycle nodes with a CPU speed),
//! `E = d·ε_comm + d·η_proc` per bit or `d·ε_comm + c·ε_proc` per cycle,
//! `Φ = ω₁·L + ω₂·E`. Seconds and joules are mixed without scaling unless a
//! [`CostScales`] normalization is attached to the model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CostWeights, EnergyMode, LinkSpec, NodeSpec, TaskStream, Topology};

/// Multipliers applied when ultra-reliable low-latency transport is enabled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UrllcProfile {
    /// Scales the transmission term `d/b`.
    pub delay_factor: f64,
    /// Scales the stochastic delay spread around the nominal latency.
    pub jitter_factor: f64,
    pub enabled: bool,
}

impl Default for UrllcProfile {
    fn default() -> Self {
        UrllcProfile { delay_factor: 0.85, jitter_factor: 0.75, enabled: false }
    }
}

impl UrllcProfile {
    pub fn on() -> Self {
        UrllcProfile { enabled: true, ..Self::default() }
    }

    pub fn off() -> Self {
        Self::default()
    }

    pub fn check(&self) -> Result<()> {
        for (what, v) in [("urllc.delay_factor", self.delay_factor), ("urllc.jitter_factor", self.jitter_factor)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidParameter { what, value: v });
            }
        }
        Ok(())
    }

    pub fn transmission_multiplier(&self) -> f64 {
        if self.enabled {
            self.delay_factor
        } else {
            1.0
        }
    }

    pub fn jitter_multiplier(&self) -> f64 {
        if self.enabled {
            self.jitter_factor
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub latency_s: f64,
    pub energy_j: f64,
    pub phi: f64,
    pub transmission_s: f64,
    pub service_s: f64,
    pub comm_j: f64,
    pub proc_j: f64,
}

/// Divisors for the optional per-scenario normalization of `Φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostScales {
    pub latency_s: f64,
    pub energy_j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostModel {
    pub weights: CostWeights,
    pub urllc: UrllcProfile,
    pub energy_mode: EnergyMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<CostScales>,
}

impl CostModel {
    pub fn new(weights: CostWeights, urllc: UrllcProfile, energy_mode: EnergyMode) -> Self {
        CostModel { weights, urllc, energy_mode, scales: None }
    }

    pub fn check(&self) -> Result<()> {
        self.weights.check()?;
        self.urllc.check()?;
        if let Some(s) = self.scales {
            if !(s.latency_s > 0.0 && s.energy_j > 0.0) {
                return Err(Error::Config("normalization scales must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn phi(&self, latency_s: f64, energy_j: f64) -> f64 {
        let (l, e) = match self.scales {
            Some(s) => (latency_s / s.latency_s, energy_j / s.energy_j),
            None => (latency_s, energy_j),
        };
        self.weights.w_latency * l + self.weights.w_energy * e
    }

    /// Attach normalization by the largest latency and energy over every linked
    /// (stream, node) pair of `t`.
    pub fn normalized_for(mut self, t: &Topology) -> Result<Self> {
        self.scales = None;
        let mut max_l = 0.0f64;
        let mut max_e = 0.0f64;
        for s in &t.streams {
            for n in &t.nodes {
                if let Some(l) = t.stream_link(s, &n.id) {
                    let c = composite_cost(s, n, l, &self)?;
                    max_l = max_l.max(c.latency_s);
                    max_e = max_e.max(c.energy_j);
                }
            }
        }
        if max_l > 0.0 && max_e > 0.0 {
            self.scales = Some(CostScales { latency_s: max_l, energy_j: max_e });
        }
        Ok(self)
    }
}

fn positive(what: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { what, value })
    }
}

fn non_negative(what: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { what, value })
    }
}

/// `d/b`, scaled by the URLLC delay factor when enabled.
pub fn transmission_time(stream: &TaskStream, link: &LinkSpec, urllc: &UrllcProfile) -> Result<f64> {
    let b = positive("link.rate_bps", link.rate_bps)?;
    let d = non_negative("stream.data_bits", stream.data_bits)?;
    Ok(urllc.transmission_multiplier() * (d / b))
}

pub fn service_time(stream: &TaskStream, node: &NodeSpec, mode: EnergyMode) -> Result<f64> {
    let mu = positive("node.capacity_mu", node.capacity_mu)?;
    match (mode, node.cycles_per_s) {
        (EnergyMode::PerCycle, Some(nu)) => {
            let nu = positive("node.cycles_per_s", nu)?;
            Ok(non_negative("stream.compute_cycles", stream.compute_cycles)? / nu)
        }
        _ => Ok(1.0 / mu),
    }
}

/// End-to-end latency `L_{i,n}` in seconds.
pub fn latency(stream: &TaskStream, node: &NodeSpec, link: &LinkSpec, urllc: &UrllcProfile, mode: EnergyMode) -> Result<f64> {
    Ok(transmission_time(stream, link, urllc)? + service_time(stream, node, mode)?)
}

/// Communication and processing energy in joules, as `(comm, proc)`.
pub fn energy_parts(stream: &TaskStream, node: &NodeSpec, link: &LinkSpec, mode: EnergyMode) -> Result<(f64, f64)> {
    let d = non_negative("stream.data_bits", stream.data_bits)?;
    let comm = d * non_negative("link.comm_energy_per_bit", link.comm_energy_per_bit)?;
    let proc = match mode {
        EnergyMode::PerBit => {
            let eta = node.proc_energy_per_bit.ok_or_else(|| {
                Error::Config(alloc::format!("node {} has no per-bit processing energy", node.id))
            })?;
            d * non_negative("node.proc_energy_per_bit", eta)?
        }
        EnergyMode::PerCycle => {
            let eps = node.proc_energy_per_cycle.ok_or_else(|| {
                Error::Config(alloc::format!("node {} has no per-cycle processing energy", node.id))
            })?;
            non_negative("stream.compute_cycles", stream.compute_cycles)? * non_negative("node.proc_energy_per_cycle", eps)?
        }
    };
    Ok((comm, proc))
}

/// Energy per task `E_{i,n}` in joules.
pub fn energy(stream: &TaskStream, node: &NodeSpec, link: &LinkSpec, mode: EnergyMode) -> Result<f64> {
    let (c, p) = energy_parts(stream, node, link, mode)?;
    Ok(c + p)
}

pub fn composite_cost(stream: &TaskStream, node: &NodeSpec, link: &LinkSpec, model: &CostModel) -> Result<CostBreakdown> {
    let transmission_s = transmission_time(stream, link, &model.urllc)?;
    let service_s = service_time(stream, node, model.energy_mode)?;
    let (comm_j, proc_j) = energy_parts(stream, node, link, model.energy_mode)?;
    let latency_s = transmission_s + service_s;
    let energy_j = comm_j + proc_j;
    Ok(CostBreakdown {
        latency_s,
        energy_j,
        phi: model.phi(latency_s, energy_j),
        transmission_s,
        service_s,
        comm_j,
        proc_j,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TierKind;

    fn stream(d: f64) -> TaskStream {
        TaskStream::new("s", "e", 1.0, d, 1.0)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn latency_without_urllc() {
        let n = NodeSpec::new("c", TierKind::Cloud, 60.0);
        let l = LinkSpec::new("e", "c", 1e8, 1.2);
        let got = latency(&stream(8e6), &n, &l, &UrllcProfile::off(), EnergyMode::PerBit).unwrap();
        assert!(close(got, 0.08 + 1.0 / 60.0), "{got}");
    }

    #[test]
    fn latency_with_empty_payload_is_service_time() {
        let n = NodeSpec::new("c", TierKind::Cloud, 60.0);
        let l = LinkSpec::new("e", "c", 1e8, 1.2);
        let got = latency(&stream(0.0), &n, &l, &UrllcProfile::off(), EnergyMode::PerBit).unwrap();
        assert_eq!(got, 1.0 / 60.0);
    }

    #[test]
    fn urllc_scales_transmission_only() {
        let n = NodeSpec::new("c", TierKind::Cloud, 60.0);
        let l = LinkSpec::new("e", "c", 1e8, 1.2);
        let got = latency(&stream(8e6), &n, &l, &UrllcProfile::on(), EnergyMode::PerBit).unwrap();
        assert!(close(got, 0.068 + 1.0 / 60.0), "{got}");
    }

    #[test]
    fn invalid_rates_are_errors() {
        let n = NodeSpec::new("c", TierKind::Cloud, 0.0);
        let l = LinkSpec::new("e", "c", 1e8, 1.2);
        assert!(matches!(
            latency(&stream(1.0), &n, &l, &UrllcProfile::off(), EnergyMode::PerBit),
            Err(Error::InvalidParameter { what: "node.capacity_mu", .. })
        ));
        let n = NodeSpec::new("c", TierKind::Cloud, 60.0);
        let l = LinkSpec::new("e", "c", 0.0, 1.2);
        assert!(latency(&stream(1.0), &n, &l, &UrllcProfile::off(), EnergyMode::PerBit).is_err());
    }

    #[test]
    fn per_cycle_service_uses_cpu_speed() {
        let mut n = NodeSpec::new("f", TierKind::Fog, 15.0).with_energy_per_cycle(1e-9);
        n.cycles_per_s = Some(2e9);
        let mut s = stream(0.0);
        s.compute_cycles = 1e8;
        assert_eq!(service_time(&s, &n, EnergyMode::PerCycle).unwrap(), 0.05);
        assert_eq!(service_time(&s, &n, EnergyMode::PerBit).unwrap(), 1.0 / 15.0);
    }

    #[test]
    fn per_bit_energy() {
        let cloud = NodeSpec::new("c", TierKind::Cloud, 60.0).with_energy_per_bit(2.0);
        let l = LinkSpec::new("e", "c", 1e8, 1.2);
        assert!(close(energy(&stream(1e6), &cloud, &l, EnergyMode::PerBit).unwrap(), 3.2e6));
        let edge = NodeSpec::new("e", TierKind::Edge, 5.0).with_energy_per_bit(0.2);
        let l = LinkSpec::new("e", "e", 1e9, 0.1);
        assert!(close(energy(&stream(1e6), &edge, &l, EnergyMode::PerBit).unwrap(), 3.0e5));
        assert_eq!(energy(&stream(0.0), &edge, &l, EnergyMode::PerBit).unwrap(), 0.0);
    }

    #[test]
    fn per_cycle_energy() {
        let n = NodeSpec::new("f", TierKind::Fog, 15.0).with_energy_per_cycle(1e-9);
        let l = LinkSpec::new("e", "f", 1e8, 0.3);
        let mut s = stream(10.0);
        s.compute_cycles = 2e9;
        assert!(close(energy(&s, &n, &l, EnergyMode::PerCycle).unwrap(), 3.0 + 2.0));
    }

    #[test]
    fn wrong_mode_is_a_configuration_error() {
        let n = NodeSpec::new("f", TierKind::Fog, 15.0).with_energy_per_bit(0.5);
        let l = LinkSpec::new("e", "f", 1e8, 0.3);
        assert!(matches!(energy(&stream(1.0), &n, &l, EnergyMode::PerCycle), Err(Error::Config(_))));
    }

    #[test]
    fn composite_weights() {
        let m = CostModel::new(CostWeights::new(0.6, 0.4).unwrap(), UrllcProfile::off(), EnergyMode::PerBit);
        assert!(close(m.phi(0.1, 2.0), 0.86));
        let n = NodeSpec::new("f", TierKind::Fog, 15.0).with_energy_per_bit(0.5);
        let l = LinkSpec::new("e", "f", 1e8, 0.3);
        let s = stream(8e6);
        let only_l = CostModel { weights: CostWeights::new(1.0, 0.0).unwrap(), ..m };
        let c = composite_cost(&s, &n, &l, &only_l).unwrap();
        assert_eq!(c.phi, c.latency_s);
        assert_eq!(c.latency_s, c.transmission_s + c.service_s);
        let only_e = CostModel { weights: CostWeights::new(0.0, 1.0).unwrap(), ..m };
        let c = composite_cost(&s, &n, &l, &only_e).unwrap();
        assert_eq!(c.phi, c.energy_j);
        assert_eq!(c.energy_j, c.comm_j + c.proc_j);
    }

    #[test]
    fn weights_validation() {
        assert!(CostWeights::new(0.0, 0.0).is_err());
        assert!(CostWeights::new(-0.1, 1.0).is_err());
        assert!(UrllcProfile { delay_factor: 1.2, ..UrllcProfile::on() }.check().is_err());
    }
}
