use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use sleeper_core::disinfo::{default_claims, parse_claims, Claim, RunReport};
use sleeper_core::social::{EventLog, LogEntry};
use sleeper_harness::{
    default_scenario, export_transcript, load_scenario, run_live, run_scripted, write_artifacts, LiveOptions,
    LiveSession, RunOutput, Scenario,
};

#[derive(Parser)]
#[command(name = "sleeper", about = "Run bot/human discussion scenarios and analyse their logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Scripted,
    Live,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write events, transcript, report and summary.
    Run {
        /// Scenario file; the bundled default room when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "scripted")]
        mode: Mode,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "run-out")]
        out: PathBuf,
    },
    /// Claim propagation and detection features for an event log.
    Report {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, conflicts_with = "text")]
        json: bool,
        #[arg(long)]
        text: bool,
        /// Claim inventory; the shipped claims when omitted.
        #[arg(long)]
        claims: Option<PathBuf>,
    },
    /// Human-readable transcript of an event log.
    Transcript {
        #[arg(long)]
        log: PathBuf,
        /// Label each line with the author's account kind.
        #[arg(long)]
        unblinded: bool,
    },
    /// Live server plus bots; runs until Ctrl-C.
    Serve {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        port: u16,
        #[arg(long, default_value = "serve-out")]
        out: PathBuf,
    },
}

type Failure = Box<dyn std::error::Error>;

fn scenario(path: Option<&Path>) -> Result<Scenario, Failure> {
    Ok(match path {
        Some(p) => load_scenario(p)?,
        None => default_scenario(),
    })
}

fn read_log(path: &Path) -> Result<Vec<LogEntry>, Failure> {
    Ok(EventLog::read_jsonl(std::io::BufReader::new(fs::File::open(path)?))?)
}

fn announce(s: &LiveSession) {
    println!("listening on http://{}", s.addr);
    for (handle, token) in &s.tokens {
        println!("  {handle}: {token}");
    }
}

fn finish(output: &RunOutput, out: &Path) -> Result<(), Failure> {
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    let result = write_artifacts(output, out)?;
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(())
}

async fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { scenario: path, seed, mode, port, out } => {
            let sc = scenario(path.as_deref())?;
            let output = match mode {
                Mode::Scripted => run_scripted(&sc, seed).await?,
                Mode::Live => {
                    let opts = LiveOptions { port, seed, run_for: Some(Duration::from_millis(sc.duration_ms)) };
                    run_live(&sc, opts, announce).await?
                }
            };
            finish(&output, &out)
        }
        Command::Serve { scenario: path, port, out } => {
            let sc = scenario(path.as_deref())?;
            let output = run_live(&sc, LiveOptions { port, seed: None, run_for: None }, announce).await?;
            finish(&output, &out)
        }
        Command::Report { log, json, text: _, claims } => {
            let claims: Vec<Claim> = match claims {
                Some(p) => parse_claims(&fs::read_to_string(p)?)?,
                None => default_claims(),
            };
            let report = RunReport::from_log(&read_log(&log)?, &claims)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.to_text());
            }
            Ok(())
        }
        Command::Transcript { log, unblinded } => {
            print!("{}", export_transcript(&read_log(&log)?, unblinded)?);
            Ok(())
        }
    }
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
