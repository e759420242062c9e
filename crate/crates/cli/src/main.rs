use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use d2d_core::ScenarioConfig;
use d2dsim::format::to_line;
use d2dsim::load_config;
use d2dsim::protocol::{serve_listener, serve_stream};
use d2dsim::runner::{run_to_writer, sweep, write_sweep_csv};

#[derive(Parser)]
#[command(
    name = "d2dsim",
    version,
    about = "D2D underlay spectrum sharing simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Scenario {
    /// Scenario JSON; the built-in default scenario when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Scenario {
    fn load(&self) -> anyhow::Result<(ScenarioConfig, u64)> {
        let config = match &self.config {
            Some(path) => load_config(path)?,
            None => ScenarioConfig::default(),
        };
        let seed = self.seed.unwrap_or(config.seed);
        Ok((config, seed))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a policy for a number of episodes.
    Run {
        #[command(flatten)]
        scenario: Scenario,
        /// random, greedy, greedy-per-pair, oracle or noop.
        #[arg(long, default_value = "random")]
        policy: String,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        /// Directory for steps.jsonl and summary.json; summary to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run trials at several D2D pair densities and tabulate the means.
    Sweep {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long, default_value = "random")]
        policy: String,
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50")]
        densities: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Episodes per trial.
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        /// CSV file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the JSON-lines protocol on stdio, or on TCP with --serve-port.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        serve_port: Option<u16>,
    },
    /// Write the default scenario as JSON.
    InitConfig {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Run {
            scenario,
            policy,
            episodes,
            out,
        } => {
            let (config, seed) = scenario.load()?;
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir)
                        .with_context(|| format!("creating {}", dir.display()))?;
                    let mut steps = create(&dir.join("steps.jsonl"))?;
                    let summary = run_to_writer(&config, &policy, episodes, seed, &mut steps)?;
                    let mut file = create(&dir.join("summary.json"))?;
                    writeln!(file, "{}", to_line(&summary)?)?;
                    file.flush()?;
                }
                None => {
                    let summary = run_to_writer(&config, &policy, episodes, seed, &mut io::sink())?;
                    println!("{}", to_line(&summary)?);
                }
            }
        }
        Command::Sweep {
            scenario,
            policy,
            densities,
            trials,
            episodes,
            out,
        } => {
            let (config, seed) = scenario.load()?;
            let rows = sweep(&config, &policy, &densities, trials, episodes, seed)?;
            match out {
                Some(path) => write_sweep_csv(&rows, create(&path)?)?,
                None => write_sweep_csv(&rows, io::stdout().lock())?,
            }
        }
        Command::Serve { config, serve_port } => {
            let config = match config {
                Some(path) => load_config(&path)?,
                None => ScenarioConfig::default(),
            };
            match serve_port {
                Some(port) => {
                    let listener = TcpListener::bind(("127.0.0.1", port))
                        .with_context(|| format!("binding port {port}"))?;
                    eprintln!("listening on {}", listener.local_addr()?);
                    serve_listener(config, listener)?;
                }
                None => serve_stream(config, io::stdin().lock(), io::stdout().lock())?,
            }
        }
        Command::InitConfig { out } => {
            let text = serde_json::to_string_pretty(&ScenarioConfig::default())?;
            match out {
                Some(path) => fs::write(&path, text + "\n")
                    .with_context(|| format!("writing {}", path.display()))?,
                None => println!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
