//! Stored run archive and the report bundle derived from it.
//!
//! `run_record.json` holds an [`Archive`]: every trial's `RunRecord` plus the
//! risk and availability evaluations of the config. The bundle (CSV series
//! and `report.txt`) is a pure function of the archive, so `report` can
//! regenerate it byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use tierplace_core::metrics::{self, AvailabilityReport, AvailabilitySpec};
use tierplace_core::risk::{self, RiskParams, Strategy as RiskStrategy};
use tierplace_core::sim::{RunRecord, Sweep, SweepSummary, TrialSummary};

pub const RECORD_FILE: &str = "run_record.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskSection {
    pub params: RiskParams,
    pub edge_only: f64,
    pub fog_only: f64,
    pub combined: f64,
    pub reliability_edge: f64,
    pub reliability_fog: f64,
    pub reliability_combined: f64,
    /// `Ω_pro ≤ P_F(1 − P_E)·Ω_und`.
    pub combined_dominates_edge: bool,
}

impl RiskSection {
    pub fn evaluate(params: &RiskParams) -> Result<Self> {
        params.check()?;
        Ok(RiskSection {
            params: *params,
            edge_only: risk::cost_edge_only(params),
            fog_only: risk::cost_fog_only(params),
            combined: risk::cost_combined(params),
            reliability_edge: risk::reliability(params, RiskStrategy::EdgeOnly),
            reliability_fog: risk::reliability(params, RiskStrategy::FogOnly),
            reliability_combined: risk::reliability(params, RiskStrategy::Combined),
            combined_dominates_edge: risk::combined_dominates_edge(params),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvailabilitySection {
    pub spec: AvailabilitySpec,
    pub report: AvailabilityReport,
}

impl AvailabilitySection {
    pub fn evaluate(spec: &AvailabilitySpec) -> Result<Self> {
        Ok(AvailabilitySection { spec: *spec, report: metrics::availability(spec)? })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Archive {
    pub records: Vec<RunRecord>,
    /// Present when more than one trial ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSummary>,
    pub risk: RiskSection,
    pub availability: AvailabilitySection,
}

impl Archive {
    pub fn trials(&self) -> Vec<TrialSummary> {
        self.records.iter().map(TrialSummary::from_record).collect()
    }

    pub fn from_sweep(records: Vec<RunRecord>, sweep: Option<Sweep>, risk: RiskSection, availability: AvailabilitySection) -> Self {
        Archive { records, sweep: sweep.map(|s| s.summary), risk, availability }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let p = dir.join(RECORD_FILE);
        let text = fs::read_to_string(&p).with_context(|| format!("cannot read {}", p.display()))?;
        serde_json::from_str(&text).with_context(|| format!("{} is not a run archive", p.display()))
    }
}

pub const STREAMS_HEADER: &[&str] = &[
    "seed", "stream_id", "origin", "rate_beta", "access_quality", "deadline_s", "node", "tier", "transmission_s",
    "latency_s", "energy_j", "phi", "generation_kw", "deadline_misses",
];
pub const NODES_HEADER: &[&str] = &["seed", "node_id", "tier", "capacity_mu", "load", "utilization", "streams"];
pub const LATENCY_HEADER: &[&str] = &["seed", "stream_id", "tier", "sample", "latency_s"];
pub const STRATEGIES_HEADER: &[&str] = &[
    "seed", "strategy", "objective", "feasible", "unplaced", "edge_tasks", "fog_tasks", "cloud_tasks", "energy_j",
    "bandwidth_edge_mb_s", "bandwidth_fog_mb_s", "bandwidth_cloud_mb_s", "bandwidth_total_mb_s", "curtailment_pct",
    "packet_loss_pct", "mean_latency_s", "jitter_s",
];
pub const PACKET_LOSS_HEADER: &[&str] = &["source", "load", "loss_pct"];
pub const TRIALS_HEADER: &[&str] = &[
    "seed", "field_load", "energy_saving_fraction", "objective", "bandwidth_mb_s", "edge_first_bandwidth_mb_s",
    "cloud_only_bandwidth_mb_s", "curtailment_pct", "packet_loss_pct", "mean_latency_s", "jitter_s", "unplaced",
    "edge_tasks", "fog_tasks", "cloud_tasks",
];
pub const AVAILABILITY_HEADER: &[&str] = &["metric", "single_layer", "layered"];
pub const RISK_HEADER: &[&str] = &["strategy", "expected_cost", "reliability"];

/// Every file of the bundle, in write order.
pub const BUNDLE_FILES: &[&str] = &[
    "streams.csv",
    "nodes.csv",
    "latency_samples.csv",
    "strategies.csv",
    "packet_loss_vs_load.csv",
    "trials.csv",
    "availability.csv",
    "risk.csv",
    "report.txt",
];

fn num(x: f64) -> String {
    // shortest representation that round-trips
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

/// Write the full bundle for `archive` into `dir`.
pub fn write_bundle(archive: &Archive, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let recs = &archive.records;

    write_csv(
        &dir.join("streams.csv"),
        STREAMS_HEADER,
        recs.iter().flat_map(|r| {
            r.streams.iter().map(move |s| {
                vec![
                    r.seed.to_string(),
                    s.id.clone(),
                    s.origin.clone(),
                    num(s.rate_beta),
                    num(s.access_quality),
                    num(s.deadline_s),
                    s.node.clone().unwrap_or_default(),
                    s.tier.map(|t| t.name().to_string()).unwrap_or_default(),
                    opt(s.transmission_s),
                    opt(s.latency_s),
                    opt(s.energy_j),
                    opt(s.phi),
                    num(s.generation_kw),
                    s.deadline_misses.to_string(),
                ]
            })
        }),
    )?;
    write_csv(
        &dir.join("nodes.csv"),
        NODES_HEADER,
        recs.iter().flat_map(|r| {
            r.nodes.iter().map(move |n| {
                vec![
                    r.seed.to_string(),
                    n.id.clone(),
                    n.tier.name().to_string(),
                    num(n.capacity_mu),
                    num(n.load),
                    num(n.utilization),
                    n.streams.to_string(),
                ]
            })
        }),
    )?;
    write_csv(
        &dir.join("latency_samples.csv"),
        LATENCY_HEADER,
        recs.iter().flat_map(|r| {
            r.streams.iter().flat_map(move |s| {
                s.latency_samples_s.iter().enumerate().map(move |(k, l)| {
                    vec![
                        r.seed.to_string(),
                        s.id.clone(),
                        s.tier.map(|t| t.name().to_string()).unwrap_or_default(),
                        k.to_string(),
                        num(*l),
                    ]
                })
            })
        }),
    )?;
    write_csv(
        &dir.join("strategies.csv"),
        STRATEGIES_HEADER,
        recs.iter().flat_map(|r| {
            r.comparison.iter().map(move |o| {
                vec![
                    r.seed.to_string(),
                    o.strategy.name().to_string(),
                    num(o.objective),
                    o.feasible.to_string(),
                    o.unplaced.to_string(),
                    o.tier_counts[0].to_string(),
                    o.tier_counts[1].to_string(),
                    o.tier_counts[2].to_string(),
                    num(o.energy_j),
                    num(o.bandwidth.per_tier_mb_s[0]),
                    num(o.bandwidth.per_tier_mb_s[1]),
                    num(o.bandwidth.per_tier_mb_s[2]),
                    num(o.bandwidth.total_mb_s),
                    num(o.curtailment_pct),
                    num(o.packet_loss_pct),
                    num(o.mean_latency_s),
                    num(o.jitter_s),
                ]
            })
        }),
    )?;
    let curve = (0..=40).map(|i| {
        let rho = i as f64 * 0.05;
        vec!["model".to_string(), num(rho), num(100.0 * metrics::link_loss(rho))]
    });
    let observed = recs.iter().flat_map(|r| {
        r.comparison.iter().map(move |o| vec![o.strategy.name().to_string(), num(r.field_load), num(o.packet_loss_pct)])
    });
    write_csv(&dir.join("packet_loss_vs_load.csv"), PACKET_LOSS_HEADER, curve.chain(observed))?;
    let trials = archive.trials();
    write_csv(
        &dir.join("trials.csv"),
        TRIALS_HEADER,
        trials.iter().map(|t| {
            vec![
                t.seed.to_string(),
                num(t.field_load),
                num(t.energy_saving_fraction),
                num(t.objective),
                num(t.bandwidth_mb_s),
                num(t.edge_first_bandwidth_mb_s),
                num(t.cloud_only_bandwidth_mb_s),
                num(t.curtailment_pct),
                num(t.packet_loss_pct),
                num(t.mean_latency_s),
                num(t.jitter_s),
                t.unplaced.to_string(),
                t.tier_counts[0].to_string(),
                t.tier_counts[1].to_string(),
                t.tier_counts[2].to_string(),
            ]
        }),
    )?;
    let a = &archive.availability.report;
    write_csv(
        &dir.join("availability.csv"),
        AVAILABILITY_HEADER,
        [
            vec!["availability_pct".into(), num(a.single_pct), num(a.system_pct)],
            vec!["mttf_h".into(), num(archive.availability.spec.mtbf_h), num(a.mttf_system_h)],
            vec!["downtime_per_period_h".into(), num(a.downtime_single_h), num(a.downtime_system_h)],
        ],
    )?;
    let rk = &archive.risk;
    write_csv(
        &dir.join("risk.csv"),
        RISK_HEADER,
        [
            vec!["edge_only".into(), num(rk.edge_only), num(rk.reliability_edge)],
            vec!["fog_only".into(), num(rk.fog_only), num(rk.reliability_fog)],
            vec!["combined".into(), num(rk.combined), num(rk.reliability_combined)],
        ],
    )?;
    fs::write(dir.join("report.txt"), report_text(archive))?;
    Ok(())
}

/// Human-readable duration for a number of hours.
pub fn human_hours(h: f64) -> String {
    let s = h * 3600.0;
    if !h.is_finite() {
        "inf".into()
    } else if h >= 1.0 {
        format!("{h:.2} h")
    } else if s >= 1.0 {
        format!("{s:.2} s")
    } else if s >= 1e-3 {
        format!("{:.2} ms", s * 1e3)
    } else {
        format!("{:.2} µs", s * 1e6)
    }
}

pub fn human_big_hours(h: f64) -> String {
    if !h.is_finite() {
        "inf".into()
    } else if h >= 1e6 {
        format!("{h:.3e} h")
    } else {
        format!("{h:.0} h")
    }
}

/// Availability comparison table: single layer against `k` layers.
pub fn availability_table(spec: &AvailabilitySpec, r: &AvailabilityReport) -> String {
    let mut s = String::new();
    let layered = format!("{} layer(s)", r.layers);
    let _ = writeln!(s, "{:<16}{:<28}{}", "Metric", "Single layer", layered);
    let single = format!("{:.13}%", r.single_pct);
    let _ = writeln!(s, "{:<16}{single:<28}{:.13}%", "Availability", r.system_pct);
    let _ = writeln!(s, "{:<16}{:<28}{}", "MTTF", human_big_hours(spec.mtbf_h), human_big_hours(r.mttf_system_h));
    let _ = writeln!(
        s,
        "{:<16}{:<28}{}",
        "Downtime/period",
        human_hours(r.downtime_single_h),
        human_hours(r.downtime_system_h)
    );
    s
}

pub fn report_text(archive: &Archive) -> String {
    let mut s = String::new();
    let trials = archive.trials();
    let summary = archive.sweep.clone().unwrap_or_else(|| {
        let first = &archive.records[0];
        SweepSummary::from_trials(first.seed, first.strategy, &trials)
    });
    let _ = writeln!(s, "Strategy: {}  trials: {}  base seed: {}", summary.strategy.name(), summary.trials, summary.base_seed);
    let _ = writeln!(s);
    let _ = writeln!(s, "{:<28}{:>12}{:>12}{:>12}", "Metric", "min", "median", "max");
    let row = |s: &mut String, name: &str, d: &tierplace_core::sim::Distribution, scale: f64| {
        let _ = writeln!(s, "{:<28}{:>12.3}{:>12.3}{:>12.3}", name, d.min * scale, d.median * scale, d.max * scale);
    };
    row(&mut s, "energy saving (%)", &summary.energy_saving_fraction, 100.0);
    row(&mut s, "bandwidth (MB/s)", &summary.bandwidth_mb_s, 1.0);
    row(&mut s, "mean latency (ms)", &summary.mean_latency_s, 1e3);
    row(&mut s, "jitter (ms)", &summary.jitter_s, 1e3);
    row(&mut s, "curtailment (%)", &summary.curtailment_pct, 1.0);
    row(&mut s, "packet loss (%)", &summary.packet_loss_pct, 1.0);
    row(&mut s, "unplaced streams", &summary.unplaced, 1.0);
    let _ = writeln!(
        s,
        "zero-saving trials: {} ({} not all-cloud)",
        summary.zero_saving_trials, summary.zero_saving_not_all_cloud
    );
    let _ = writeln!(s);

    let first = &archive.records[0];
    let _ = writeln!(s, "Per strategy, seed {}", first.seed);
    let _ = writeln!(
        s,
        "{:<18}{:>8}{:>6}{:>6}{:>14}{:>12}{:>12}{:>12}",
        "strategy", "edge", "fog", "cloud", "bandwidth", "latency_ms", "curtail_%", "loss_%"
    );
    for o in &first.comparison {
        let _ = writeln!(
            s,
            "{:<18}{:>8}{:>6}{:>6}{:>14.2}{:>12.2}{:>12.3}{:>12.3}",
            o.strategy.name(),
            o.tier_counts[0],
            o.tier_counts[1],
            o.tier_counts[2],
            o.bandwidth.total_mb_s,
            o.mean_latency_s * 1e3,
            o.curtailment_pct,
            o.packet_loss_pct
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "Availability (MTBF {} h, MTTR {} h)", archive.availability.spec.mtbf_h, archive.availability.spec.mttr_h);
    s.push_str(&availability_table(&archive.availability.spec, &archive.availability.report));
    let _ = writeln!(s);
    let rk = &archive.risk;
    let _ = writeln!(s, "Fault handling cost");
    let _ = writeln!(s, "{:<12}{:>16}{:>14}", "strategy", "expected cost", "reliability");
    for (name, c, r) in [
        ("edge_only", rk.edge_only, rk.reliability_edge),
        ("fog_only", rk.fog_only, rk.reliability_fog),
        ("combined", rk.combined, rk.reliability_combined),
    ] {
        let _ = writeln!(s, "{name:<12}{c:>16.4}{r:>14.4}");
    }
    let _ = writeln!(
        s,
        "combined <= edge_only: {} (proactive cost {} vs expected undetected loss {})",
        rk.combined_dominates_edge,
        rk.params.cost_proactive,
        rk.params.p_fault * (1.0 - rk.params.p_edge_detect) * rk.params.cost_undetected
    );
    s
}
