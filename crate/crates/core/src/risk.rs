//! Expected operational cost of reactive (edge) and predictive (fog) fault
//! handling, alone and combined.
//!
//! With fault probability `P_F`, edge detection probability `P_E` and fog
//! prediction probability `P_pred`:
//!
//! ```text
//! Ω_edge     = P_F(1 − P_E)·Ω_und + P_E·Ω_rea
//! Ω_fog      = P_pred·Ω_pro + (1 − P_pred)·P_F·Ω_und
//! Ω_combined = P_pred·Ω_pro + (1 − P_pred)·P_F(1 − P_E)·Ω_und + P_E·Ω_rea
//! ```
//!
//! `Ω_combined − Ω_edge = P_pred·(Ω_pro − P_F(1 − P_E)·Ω_und)`, so combining
//! only pays off against edge-only when proactive handling is cheaper than the
//! expected undetected loss it replaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RiskParams {
    pub p_fault: f64,
    pub p_edge_detect: f64,
    pub p_fog_predict: f64,
    pub cost_undetected: f64,
    pub cost_proactive: f64,
    pub cost_reactive: f64,
}

impl Default for RiskParams {
    fn default() -> Self {
        RiskParams {
            p_fault: 0.3,
            p_edge_detect: 0.9,
            p_fog_predict: 0.8,
            cost_undetected: 100.0,
            cost_proactive: 5.0,
            cost_reactive: 10.0,
        }
    }
}

impl RiskParams {
    pub fn check(&self) -> Result<()> {
        for (what, p) in [
            ("risk.p_fault", self.p_fault),
            ("risk.p_edge_detect", self.p_edge_detect),
            ("risk.p_fog_predict", self.p_fog_predict),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter { what, value: p });
            }
        }
        for (what, c) in [
            ("risk.cost_undetected", self.cost_undetected),
            ("risk.cost_proactive", self.cost_proactive),
            ("risk.cost_reactive", self.cost_reactive),
        ] {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::InvalidParameter { what, value: c });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    EdgeOnly,
    FogOnly,
    Combined,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::EdgeOnly, Strategy::FogOnly, Strategy::Combined];
}

pub fn cost_edge_only(p: &RiskParams) -> f64 {
    p.p_fault * (1.0 - p.p_edge_detect) * p.cost_undetected + p.p_edge_detect * p.cost_reactive
}

pub fn cost_fog_only(p: &RiskParams) -> f64 {
    p.p_fog_predict * p.cost_proactive + (1.0 - p.p_fog_predict) * p.p_fault * p.cost_undetected
}

pub fn cost_combined(p: &RiskParams) -> f64 {
    p.p_fog_predict * p.cost_proactive
        + (1.0 - p.p_fog_predict) * p.p_fault * (1.0 - p.p_edge_detect) * p.cost_undetected
        + p.p_edge_detect * p.cost_reactive
}

pub fn expected_cost(p: &RiskParams, s: Strategy) -> f64 {
    match s {
        Strategy::EdgeOnly => cost_edge_only(p),
        Strategy::FogOnly => cost_fog_only(p),
        Strategy::Combined => cost_combined(p),
    }
}

/// Probability that a fault is caught by the strategy's detectors.
pub fn reliability(p: &RiskParams, s: Strategy) -> f64 {
    match s {
        Strategy::EdgeOnly => p.p_edge_detect,
        Strategy::FogOnly => p.p_fog_predict,
        Strategy::Combined => {
            // 1 − (1 − P_E)(1 − P_pred), arranged so rounding cannot drop it
            // below either detector alone
            let (lo, hi) = if p.p_edge_detect <= p.p_fog_predict {
                (p.p_edge_detect, p.p_fog_predict)
            } else {
                (p.p_fog_predict, p.p_edge_detect)
            };
            hi + lo * (1.0 - hi)
        }
    }
}

/// `P_F(1 − P_E)·Ω_und − Ω_pro`; non-negative exactly when the predicate
/// [`combined_dominates_edge`] holds.
pub fn dominance_margin(p: &RiskParams) -> f64 {
    p.p_fault * (1.0 - p.p_edge_detect) * p.cost_undetected - p.cost_proactive
}

/// `Ω_pro ≤ P_F(1 − P_E)·Ω_und`. For `P_pred > 0` this is equivalent to
/// `Ω_combined ≤ Ω_edge`; at `P_pred = 0` the two costs coincide.
pub fn combined_dominates_edge(p: &RiskParams) -> bool {
    dominance_margin(p) >= 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error of the mean.
    pub std_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub edge_only: Estimate,
    pub fog_only: Estimate,
    pub combined: Estimate,
    pub samples: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn estimate(&self, n: u64) -> Estimate {
        let n = n as f64;
        let mean = self.sum / n;
        let var = (self.sum_sq / n - mean * mean).max(0.0);
        Estimate { mean, std_err: libm::sqrt(var / n) }
    }
}

/// Monte-Carlo estimate of the three expected costs. Each sample draws the
/// fault, edge detection and fog prediction as independent events and
/// charges every strategy on the same draw.
pub fn monte_carlo(p: &RiskParams, samples: u64, r: &mut SimRng) -> Result<RiskEstimate> {
    p.check()?;
    if samples == 0 {
        return Err(Error::InvalidParameter { what: "risk.samples", value: 0.0 });
    }
    let (mut e, mut f, mut c) = (Moments::default(), Moments::default(), Moments::default());
    for _ in 0..samples {
        let fault = rng::bernoulli(r, p.p_fault);
        let detect = rng::bernoulli(r, p.p_edge_detect);
        let predict = rng::bernoulli(r, p.p_fog_predict);
        let und = if fault { p.cost_undetected } else { 0.0 };
        let rea = if detect { p.cost_reactive } else { 0.0 };
        let pro = if predict { p.cost_proactive } else { 0.0 };
        e.push(if detect { 0.0 } else { und } + rea);
        f.push(pro + if predict { 0.0 } else { und });
        c.push(pro + if predict || detect { 0.0 } else { und } + rea);
    }
    Ok(RiskEstimate { edge_only: e.estimate(samples), fog_only: f.estimate(samples), combined: c.estimate(samples), samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    fn params(pf: f64, pe: f64, pp: f64) -> RiskParams {
        RiskParams { p_fault: pf, p_edge_detect: pe, p_fog_predict: pp, ..RiskParams::default() }
    }

    #[test]
    fn edge_only_cases() {
        assert!(close(cost_edge_only(&params(0.3, 1.0, 0.0)), 10.0));
        assert!(close(cost_edge_only(&params(1.0, 0.0, 0.0)), 100.0));
        assert!(close(cost_edge_only(&params(0.3, 0.9, 0.0)), 12.0));
    }

    #[test]
    fn fog_only_cases() {
        assert!(close(cost_fog_only(&params(0.3, 0.0, 1.0)), 5.0));
        assert!(close(cost_fog_only(&params(0.3, 0.0, 0.0)), 30.0));
        assert!(close(cost_fog_only(&params(0.3, 0.0, 0.8)), 10.0));
    }

    #[test]
    fn combined_cases() {
        let p = params(0.3, 0.9, 0.8);
        assert!(close(cost_combined(&p), 13.6));
        let no_pred = params(0.3, 0.9, 0.0);
        assert!(close(cost_combined(&no_pred), cost_edge_only(&no_pred)));
        let no_edge = params(0.3, 0.0, 0.8);
        assert!(close(cost_combined(&no_edge), cost_fog_only(&no_edge)));
        // 5 > 0.3·0.1·100 = 3, so combining costs more than edge alone here
        assert!(!combined_dominates_edge(&p));
        assert!(cost_combined(&p) > cost_edge_only(&p));
    }

    #[test]
    fn reliability_cases() {
        assert!(close(reliability(&params(0.3, 0.9, 0.8), Strategy::Combined), 0.98));
        assert_eq!(reliability(&params(0.3, 1.0, 0.2), Strategy::Combined), 1.0);
        assert_eq!(reliability(&params(0.3, 0.0, 0.0), Strategy::Combined), 0.0);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(params(1.5, 0.0, 0.0).check().is_err());
        let neg = RiskParams { cost_reactive: -1.0, ..RiskParams::default() };
        assert!(neg.check().is_err());
    }

    #[test]
    fn monte_carlo_agrees() {
        let p = params(0.3, 0.9, 0.8);
        let est = monte_carlo(&p, 200_000, &mut rng::seeded(1, rng::STREAM_SAMPLES)).unwrap();
        for (e, s) in [(est.edge_only, Strategy::EdgeOnly), (est.fog_only, Strategy::FogOnly), (est.combined, Strategy::Combined)] {
            assert!((e.mean - expected_cost(&p, s)).abs() <= 4.0 * e.std_err, "{s:?}");
        }
    }
}
