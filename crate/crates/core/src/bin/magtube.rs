use clap::{Args, Parser, Subcommand};
use magtube::runner::{self, Cache, RunOptions};
use magtube::scenario::{parse_scenario, Scenario};
use magtube::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Spectral experiments for magnetic Schrödinger operators in deformed tubes.
#[derive(Parser)]
#[command(name = "magtube", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output root; overrides `out` from the scenario.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Scenario seed; overrides `seed` from the scenario.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the selected experiments.
    Run {
        #[command(flatten)]
        common: Common,
        /// Ignore and do not populate the cache.
        #[arg(long)]
        no_cache: bool,
    },
    /// Print the resolved scenario and lattice size estimates without solving.
    DryRun {
        #[command(flatten)]
        common: Common,
    },
    /// Cache maintenance.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
    /// Re-emit CSV traces from the JSON summaries of a previous run.
    Export {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum CacheAction {
    /// Delete every cached summary and phase table under the output root.
    Clean {
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if matches!(e, Error::Config(_)) { EXIT_CONFIG } else { EXIT_NUMERICAL })
}

fn load(c: &Common) -> Result<(Scenario, PathBuf), Error> {
    if let Some(n) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot set thread count: {e}")))?;
    }
    let mut sc = parse_scenario(&c.config)?;
    if let Some(s) = c.seed {
        sc.seed = s;
    }
    let out = c.out.clone().unwrap_or_else(|| PathBuf::from(&sc.out));
    Ok((sc, out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { common, no_cache } => {
            let (sc, out) = match load(&common) {
                Ok(v) => v,
                Err(e) => return fail(&e),
            };
            let outcome = match runner::run(&sc, &RunOptions { out, use_cache: !no_cache }) {
                Ok(o) => o,
                Err(e) => return fail(&e),
            };
            for r in &outcome.experiments {
                match &r.error {
                    Some(e) => println!("{:<11} error: {e}", r.kind.name()),
                    None => {
                        let failed = r.checks.values().filter(|c| !c.pass).count();
                        let tag = if r.cached { " (cached)" } else { "" };
                        println!("{:<11} {} checks, {failed} failed{tag}", r.kind.name(), r.checks.len());
                    }
                }
            }
            println!("results in {}", outcome.dir.display());
            if outcome.config_failure() {
                ExitCode::from(EXIT_CONFIG)
            } else if outcome.failed() {
                ExitCode::from(EXIT_NUMERICAL)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::DryRun { common } => {
            let (sc, out) = match load(&common) {
                Ok(v) => v,
                Err(e) => return fail(&e),
            };
            match runner::dry_run(&sc) {
                Ok((dump, est)) => {
                    println!("# resolved scenario (hash {})\n{dump}", sc.hash());
                    println!("# output directory: {}", runner::run_dir(&sc, &out).display());
                    println!("# estimates (rough, single core)");
                    for e in est {
                        println!(
                            "# {:<11} nodes {:>10}  memory {:>9.1} MB  runtime {:>8.1} s",
                            e.experiment, e.nodes, e.memory_mb, e.runtime_s
                        );
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Cache { action: CacheAction::Clean { out } } => match Cache::clean(&out) {
            Ok(n) => {
                println!("removed {n} cached files from {}", out.join("cache").display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Export { common } => {
            let (sc, out) = match load(&common) {
                Ok(v) => v,
                Err(e) => return fail(&e),
            };
            match runner::export(&sc, &out) {
                Ok(paths) => {
                    for p in paths {
                        println!("{}", p.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
    }
}
