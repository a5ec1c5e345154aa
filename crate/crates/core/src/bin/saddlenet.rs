use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use saddlenet::harness::{figure1_suite, run_experiment, run_property_suite, ExperimentConfig, Scale};
use saddlenet::lowerbound::{probe_solution_bound, probe_zero_chain, ProbeAlgorithm, ZeroChainConfig};
use saddlenet::Error;

#[derive(Parser)]
#[command(name = "saddlenet", version, about = "Distributed saddle-point experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// `key=value` with dotted keys; repeatable, wins over the file.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Emit the three Figure-1 experiment groups.
    Figure1 {
        #[arg(long, value_enum)]
        scale: ScaleArg,
        #[arg(long)]
        out: PathBuf,
    },
    #[command(subcommand)]
    Probe(Probe),
    /// Randomized property checks.
    Props {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
}

#[derive(Subcommand)]
enum Probe {
    /// Frontier of nonzero coordinates on the lower-bound instance.
    ZeroChain {
        #[arg(long, value_enum, default_value = "all")]
        algorithm: AlgorithmArg,
        #[arg(long, default_value_t = 10.0)]
        l: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 16)]
        n: usize,
        /// Path length between the two special nodes.
        #[arg(long, default_value_t = 4)]
        delta: usize,
        /// Communication budget.
        #[arg(short = 'k', long = "comm-budget", default_value_t = 8)]
        k: usize,
        /// Oracle budget (or local steps).
        #[arg(short = 't', long = "oracle-budget", default_value_t = 40)]
        t: usize,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 1)]
        fastmix_rounds: usize,
        /// Write per-round frontiers here (one file per algorithm, suffixed).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Error of the geometric approximation to the construction's solution.
    SolutionBound {
        #[arg(long)]
        l: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Paper,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum AlgorithmArg {
    Centralized,
    Decentralized,
    LocalExtraStep,
    All,
}

enum Done {
    Ok,
    ChecksFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(Done::Ok) => ExitCode::SUCCESS,
        Ok(Done::ChecksFailed) => ExitCode::from(2),
        Err(e) => {
            let line = serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<Done, Error> {
    match command {
        Command::Run { config, overrides } => {
            let cfg = ExperimentConfig::load(&config, &overrides)?;
            let out = run_experiment(&cfg)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            for g in &out.groups {
                println!(
                    "{} gamma={:e} final_dist_sq={} final_gap={}",
                    g.label,
                    g.gamma,
                    g.final_dist_sq.map_or("-".into(), |v| format!("{v:e}")),
                    g.final_gap.map_or("-".into(), |v| format!("{v:e}")),
                );
            }
            println!("metadata: {}", out.metadata.display());
            Ok(Done::Ok)
        }
        Command::Figure1 { scale, out } => {
            let scale = match scale {
                ScaleArg::Desk => Scale::Desk,
                ScaleArg::Paper => Scale::Paper,
            };
            let report = figure1_suite(scale, &out)?;
            for (run, o) in &report.runs {
                for w in &o.warnings {
                    eprintln!("warning [{}]: {w}", run.config.name);
                }
            }
            println!("summary: {}", report.summary.display());
            Ok(Done::Ok)
        }
        Command::Probe(Probe::ZeroChain {
            algorithm,
            l,
            mu,
            n,
            delta,
            k,
            t,
            gamma,
            fastmix_rounds,
            csv,
        }) => {
            let algs: Vec<ProbeAlgorithm> = match algorithm {
                AlgorithmArg::Centralized => vec![ProbeAlgorithm::Centralized],
                AlgorithmArg::Decentralized => vec![ProbeAlgorithm::Decentralized],
                AlgorithmArg::LocalExtraStep => vec![ProbeAlgorithm::LocalExtraStep],
                AlgorithmArg::All => ProbeAlgorithm::ALL.to_vec(),
            };
            let mut all_pass = true;
            for alg in algs {
                let mut cfg = ZeroChainConfig::new(alg, l, mu, n, delta, k, t);
                cfg.gamma = gamma;
                cfg.fastmix_rounds = fastmix_rounds;
                let report = probe_zero_chain(&cfg)?;
                let name = serde_json::to_value(alg)?;
                let name = name.as_str().unwrap_or("algorithm");
                if let Some(path) = &csv {
                    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("zero_chain");
                    let file = path.with_file_name(format!("{stem}_{name}.csv"));
                    report.write_csv(std::fs::File::create(&file)?)?;
                }
                println!(
                    "{} zero-chain {name}: rounds used {} of {}, final frontier {}, cap {}",
                    if report.pass { "PASS" } else { "FAIL" },
                    report.comm_rounds_used,
                    report.comm_budget,
                    report.final_frontier,
                    report.terminal_cap
                );
                all_pass &= report.pass;
            }
            Ok(if all_pass { Done::Ok } else { Done::ChecksFailed })
        }
        Command::Probe(Probe::SolutionBound { l, mu, n }) => {
            let r = probe_solution_bound(l, mu, n)?;
            println!(
                "{} solution-bound L={l} mu={mu} n={n}: err {:e} (structured {:e}), bound {:e}",
                if r.pass { "PASS" } else { "FAIL" },
                r.err,
                r.err_structured,
                r.bound
            );
            Ok(if r.pass { Done::Ok } else { Done::ChecksFailed })
        }
        Command::Props { seed, cases } => {
            let outcomes = run_property_suite(seed, cases)?;
            let mut all = true;
            for o in &outcomes {
                println!(
                    "{} {} ({} cases): {}",
                    if o.pass { "PASS" } else { "FAIL" },
                    o.name,
                    o.cases,
                    o.detail
                );
                all &= o.pass;
            }
            Ok(if all { Done::Ok } else { Done::ChecksFailed })
        }
    }
}
