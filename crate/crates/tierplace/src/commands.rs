//! Subcommand bodies. Each returns the process exit code on success; errors
//! are mapped to codes by [`exit_code`].

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};

use tierplace_core::metrics::{self, AvailabilitySpec};
use tierplace_core::model::Topology;
use tierplace_core::sim::{self, RunRecord};
use tierplace_core::solvers::{self, dual_solve, exact_oracle, greedy_assign, OracleOptions, SolverResult};
use tierplace_core::Error as CoreError;

use crate::bundle::{self, Archive, AvailabilitySection, RiskSection, RECORD_FILE};
use crate::config::Config;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

pub const OUT_ENV: &str = "TIERPLACE_OUT";
pub const DEFAULT_OUT: &str = "tierplace-out";

/// Map an error to an exit code: infeasibility 2, broken internal
/// invariants 3, everything else (I/O, schema, bad parameters) 1.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::Infeasible { .. }) => EXIT_INFEASIBLE,
        Some(CoreError::CapacityExceeded { .. }) | Some(CoreError::MismatchedStreams) => EXIT_INVARIANT,
        _ => EXIT_USAGE,
    }
}

/// Output directory: flag, then `TIERPLACE_OUT`, then `./tierplace-out`.
pub fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Run every configured trial and build the archive (no I/O).
pub fn execute(cfg: &Config) -> Result<Archive> {
    let spec = &cfg.scenario;
    spec.check()?;
    let risk = RiskSection::evaluate(&cfg.risk)?;
    let availability = AvailabilitySection::evaluate(&cfg.availability)?;
    if spec.trials <= 1 {
        let rec = sim::run_scenario(spec)?;
        return Ok(Archive::from_sweep(vec![rec], None, risk, availability));
    }
    let mut records: Vec<RunRecord> = Vec::with_capacity(spec.trials);
    let sweep = sim::sweep_with(spec, spec.trials, |r| records.push(r.clone()))?;
    Ok(Archive::from_sweep(records, Some(sweep), risk, availability))
}

/// `run` and `sweep`: execute, store the archive, write the bundle and a
/// summary. Exits 2 when the chosen strategy left streams unplaced.
pub fn run(cfg: &Config, out: &Path, log: &mut dyn Write) -> Result<i32> {
    let start = Instant::now();
    let archive = execute(cfg)?;
    let wall = start.elapsed().as_secs_f64();
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    fs::write(out.join(RECORD_FILE), archive.to_json()?)?;
    bundle::write_bundle(&archive, out)?;
    let mut summary = bundle::report_text(&archive);
    summary.push_str(&format!("\nwall time: {wall:.3} s\n"));
    fs::write(out.join("summary.txt"), &summary)?;
    log.write_all(summary.as_bytes())?;

    let unplaced: Vec<String> = archive
        .records
        .iter()
        .filter(|r| !r.unplaced_ids.is_empty())
        .map(|r| format!("seed {}: {}", r.seed, r.unplaced_ids.join(", ")))
        .collect();
    if unplaced.is_empty() {
        Ok(EXIT_OK)
    } else {
        writeln!(log, "infeasible: unplaced streams")?;
        for u in unplaced {
            writeln!(log, "  {u}")?;
        }
        Ok(EXIT_INFEASIBLE)
    }
}

/// `report`: regenerate the bundle from a stored archive.
pub fn report(from: &Path, out: &Path) -> Result<i32> {
    let archive = Archive::read(from)?;
    bundle::write_bundle(&archive, out)?;
    Ok(EXIT_OK)
}

/// `availability`: print single-layer against `k`-layer figures.
pub fn availability(spec: &AvailabilitySpec, w: &mut dyn Write) -> Result<i32> {
    let r = metrics::availability(spec)?;
    w.write_all(bundle::availability_table(spec, &r).as_bytes())?;
    Ok(EXIT_OK)
}

/// The instance `verify` works on: explicit, or generated from the scenario.
pub fn verify_instance(cfg: &Config) -> Result<Topology> {
    match &cfg.instance {
        Some(t) => Ok(t.clone()),
        None => {
            cfg.scenario.check()?;
            Ok(sim::generate(&cfg.scenario, cfg.scenario.seed)?.topology)
        }
    }
}

struct Checks<'a> {
    w: &'a mut dyn Write,
    failed: usize,
}

impl Checks<'_> {
    fn check(&mut self, ok: bool, what: impl fmt::Display) -> Result<()> {
        if !ok {
            self.failed += 1;
        }
        writeln!(self.w, "{} {what}", if ok { "PASS" } else { "FAIL" })?;
        Ok(())
    }

    fn line(&mut self, s: impl fmt::Display) -> Result<()> {
        writeln!(self.w, "{s}")?;
        Ok(())
    }
}

fn describe(name: &str, r: &SolverResult) -> String {
    if r.feasible {
        format!("{name:<16} objective {}", r.objective)
    } else {
        format!("{name:<16} infeasible, {} unplaced", r.unplaced.len())
    }
}

/// Objectives agree up to summation order.
fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// `verify`: greedy, dual and exhaustive oracle on one instance, with
/// PASS/FAIL lines for the dominance invariants.
pub fn verify(cfg: &Config, w: &mut dyn Write) -> Result<i32> {
    let t = verify_instance(cfg)?;
    t.validate().into_result()?;
    let model = cfg.scenario.cost_model();
    model.check()?;
    let oracle = exact_oracle(&t, &model, OracleOptions { max_streams: cfg.oracle_max_streams, tier_budgets: None })
        .context("oracle refused the instance")?;
    let greedy = greedy_assign(&t, &model, cfg.scenario.stream_order)?;

    let mut c = Checks { w, failed: 0 };
    c.line(format!("instance: {} streams, {} nodes", t.streams.len(), t.nodes.len()))?;
    c.line(describe("greedy", &greedy))?;
    c.line(describe("oracle", &oracle))?;

    for (name, r) in [("greedy", &greedy), ("oracle", &oracle)] {
        if r.feasible {
            let issues = solvers::check_assignment(&t, &model, &r.assignment)?;
            c.check(issues.is_empty(), format_args!("{name} placement satisfies capacity and deadlines {issues:?}"))?;
        }
    }
    if oracle.feasible && greedy.feasible {
        c.check(oracle.objective <= greedy.objective + 1e-9, "oracle <= greedy")?;
    }
    // the oracle searches every placement, so a greedy success proves feasibility
    c.check(oracle.feasible || !greedy.feasible, "infeasibility reported consistently by greedy and oracle")?;
    if oracle.feasible && !greedy.feasible {
        c.line("note: greedy left streams unplaced on a feasible instance")?;
    }

    let mut infeasible = !oracle.feasible;
    if t.one_stream_per_origin() {
        match dual_solve(&t, &model, cfg.dual.options()) {
            Ok(d) => {
                let budgets = d.state.tier_budgets;
                let bounded = exact_oracle(
                    &t,
                    &model,
                    OracleOptions { max_streams: cfg.oracle_max_streams, tier_budgets: Some(budgets) },
                )?;
                let best = d.best_dual_value();
                c.line(describe("dual", &d.result))?;
                c.line(describe("oracle(budgets)", &bounded))?;
                c.line(format!(
                    "dual: budgets {:?}, {} iterations, max g {best}, duality gap {:?}",
                    budgets.0,
                    d.trace.len(),
                    d.result.duality_gap
                ))?;
                if bounded.feasible {
                    c.check(best <= bounded.objective + 1e-9, "dual bound <= budgeted oracle")?;
                    if d.result.feasible {
                        c.check(bounded.objective <= d.result.objective + 1e-9, "budgeted oracle <= dual")?;
                    }
                }
                if d.result.feasible {
                    let issues = solvers::check_assignment(&t, &model, &d.result.assignment)?;
                    c.check(issues.is_empty(), format_args!("dual placement satisfies capacity and deadlines {issues:?}"))?;
                    c.check(bounded.feasible, "budgeted oracle feasible whenever dual is")?;
                }
                if oracle.feasible && d.result.feasible && greedy.feasible && close(oracle.objective, greedy.objective) {
                    c.line(format!("all three objectives equal: {}", close(oracle.objective, d.result.objective)))?;
                }
                infeasible |= !bounded.feasible;
            }
            Err(CoreError::Infeasible { streams, capacity }) => {
                c.line(format!("dual             infeasible: {streams} streams, tier budget {capacity}"))?;
                infeasible = true;
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        c.line("dual             skipped: instance has several streams per origin")?;
    }

    if c.failed > 0 {
        c.line(format!("{} check(s) failed", c.failed))?;
        Ok(EXIT_INVARIANT)
    } else if infeasible {
        c.line("instance infeasible")?;
        Ok(EXIT_INFEASIBLE)
    } else {
        Ok(EXIT_OK)
    }
}
