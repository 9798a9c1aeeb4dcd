use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use tierplace::commands::{self, EXIT_USAGE};
use tierplace::config::Config;
use tierplace_core::metrics::AvailabilitySpec;

#[derive(Parser)]
#[command(name = "tierplace", version, about = "Edge/fog/cloud stream placement experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured scenario and write the record, CSVs and summary.
    Run(RunArgs),
    /// Like `run`, with 1000 trials unless the config or --trials says otherwise.
    Sweep(RunArgs),
    /// Cross-check greedy, dual and the exhaustive oracle on one instance.
    Verify(CommonArgs),
    /// Print the availability table for one and `layers` redundant layers.
    Availability {
        #[arg(long)]
        mtbf: f64,
        #[arg(long)]
        mttr: f64,
        #[arg(long, default_value_t = 3)]
        layers: u32,
        /// Period over which downtime is reported, in hours.
        #[arg(long, default_value_t = 8760.0)]
        period: f64,
    },
    /// Regenerate the report bundle from a stored run_record.json.
    Report {
        /// Directory holding run_record.json.
        #[arg(long)]
        from: Option<PathBuf>,
        /// Bundle destination; defaults to --from.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    CloudOnly,
    EdgeFirst,
    GreedyHeuristic,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    urllc: Option<OnOff>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    /// Dotted-path override, e.g. `scenario.n_tasks=20`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output directory; falls back to $TIERPLACE_OUT, then ./tierplace-out.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
}

impl CommonArgs {
    fn load(&self, trials: Option<usize>) -> Result<Config> {
        let mut overrides = self.set.clone();
        if let Some(s) = self.seed {
            overrides.push(format!("scenario.seed={s}"));
        }
        if let Some(u) = self.urllc {
            overrides.push(format!("scenario.urllc.enabled={}", matches!(u, OnOff::On)));
        }
        if let Some(s) = self.strategy {
            let name = match s {
                StrategyArg::CloudOnly => "cloud_only",
                StrategyArg::EdgeFirst => "edge_first",
                StrategyArg::GreedyHeuristic => "greedy_heuristic",
            };
            overrides.push(format!("scenario.strategy={name}"));
        }
        if let Some(n) = trials {
            overrides.push(format!("scenario.trials={n}"));
        }
        Config::load(self.config.as_deref(), &overrides)
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Run(a) => {
            let cfg = a.common.load(a.trials)?;
            commands::run(&cfg, &commands::out_dir(a.out), &mut stdout)
        }
        Command::Sweep(a) => {
            let mut cfg = a.common.load(a.trials)?;
            if a.trials.is_none() && cfg.scenario.trials <= 1 {
                cfg.scenario.trials = 1000;
            }
            commands::run(&cfg, &commands::out_dir(a.out), &mut stdout)
        }
        Command::Verify(a) => {
            let cfg = a.load(None)?;
            commands::verify(&cfg, &mut stdout)
        }
        Command::Availability { mtbf, mttr, layers, period } => {
            let spec = AvailabilitySpec { period_h: period, ..AvailabilitySpec::new(mtbf, mttr, layers) };
            commands::availability(&spec, &mut stdout)
        }
        Command::Report { from, out } => {
            let from = commands::out_dir(from);
            let out = out.unwrap_or_else(|| from.clone());
            commands::report(&from, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e) as u8)
        }
    }
}
