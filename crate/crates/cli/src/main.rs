use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wpcsma::commands::{self, Experiment};
use wpcsma::optimizer::{load_config, OptimizerConfig, SolveStatus};
use wpcsma::point::load_point;
use wpcsma::scenario::{bundled, bundled_text, load_scenario};
use wpcsma::sim::SimConfig;
use wpcsma::{Error, Result, Scenario};

/// Model, optimizer and simulator for wireless-powered CSMA/CA IoT networks.
#[derive(Parser)]
#[command(name = "wpcsma", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Throughput, air-time and energy at a given operating point.
    Analyze {
        /// Scenario file, or `bundled:example1` / `bundled:example2`.
        #[arg(long)]
        scenario: String,
        /// Point file with `n` and either `alpha` or `w`.
        #[arg(long)]
        point: PathBuf,
        /// Directory for `analysis.csv` and `analysis.json`; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Proportionally fair `(n, alpha)` under energy neutrality.
    Optimize {
        #[arg(long)]
        scenario: String,
        /// Optimizer configuration (JSON); defaults apply to omitted fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Slot-level Monte Carlo run next to the analytical model.
    Simulate {
        #[arg(long)]
        scenario: String,
        /// Point file; `n` must be integral, `alpha` is rounded to a window.
        #[arg(long)]
        point: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        slots: u64,
        #[arg(long)]
        seed: u64,
        /// Slots discarded before measuring; 1% of `--slots` by default.
        #[arg(long)]
        warmup: Option<u64>,
        /// Also write the per-slot `trace.csv`.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regenerate the series of one of the bundled experiments.
    Reproduce {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
        exp: u32,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a bundled scenario file.
    ShowScenario { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Infeasible(diag) = &e {
                for d in diag {
                    eprintln!("  {d}");
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Analyze {
            scenario,
            point,
            out,
        } => {
            let scen = scenario_arg(&scenario)?;
            let dv = load_point(&point)?.decision(&scen)?;
            let table = commands::analyze(&scen, &dv)?;
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    table.save_csv(dir.join("analysis.csv"))?;
                    wpcsma::report::save_json(&table.to_json(), dir.join("analysis.json"))?;
                    announce(&[dir.join("analysis.csv"), dir.join("analysis.json")]);
                }
                None => table.write_csv(io::stdout().lock())?,
            }
            Ok(0)
        }
        Command::Optimize {
            scenario,
            config,
            out,
        } => {
            let scen = scenario_arg(&scenario)?;
            let cfg = config_arg(config.as_deref())?;
            let res = commands::optimize(&scen, &cfg)?;
            announce(&commands::write_optimize(&res, &out)?);
            let r = &res.result;
            println!(
                "status {} after {} iterations, utility {:.10}",
                r.status.as_str(),
                r.outer_iterations,
                r.utility
            );
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            Ok(match r.status {
                SolveStatus::Converged => 0,
                SolveStatus::IterationCap => 4,
            })
        }
        Command::Simulate {
            scenario,
            point,
            slots,
            seed,
            warmup,
            trace,
            out,
        } => {
            let scen = scenario_arg(&scenario)?;
            let sp = load_point(&point)?.sim_point(&scen)?;
            let mut cfg = SimConfig::new(slots, seed);
            if let Some(w) = warmup {
                cfg.warmup_slots = w;
            }
            std::fs::create_dir_all(&out)?;
            let res = if trace {
                commands::simulate_traced(&scen, &sp, &cfg, &out.join("trace.csv"))?
            } else {
                commands::simulate(&scen, &sp, &cfg)?
            };
            announce(&commands::write_simulate(&res, &out)?);
            Ok(0)
        }
        Command::Reproduce { exp, config, out } => {
            let cfg = config_arg(config.as_deref())?;
            let res = commands::reproduce(Experiment::from_number(exp)?, &cfg)?;
            announce(&commands::write_tables(&res.tables, &out)?);
            Ok(match res.result.status {
                SolveStatus::Converged => 0,
                SolveStatus::IterationCap => 4,
            })
        }
        Command::ShowScenario { name } => {
            print!("{}", bundled_text(&name)?);
            Ok(0)
        }
    }
}

fn scenario_arg(arg: &str) -> Result<Scenario> {
    match arg.strip_prefix("bundled:") {
        Some(name) => bundled(name),
        None => load_scenario(arg),
    }
}

fn config_arg(path: Option<&Path>) -> Result<OptimizerConfig> {
    path.map_or_else(|| Ok(OptimizerConfig::default()), load_config)
}

fn announce(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}
