use std::fs;
use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::{Arc, RwLock};

use clap::{Parser, Subcommand, ValueEnum};
use paracom_core::gateway::http::{self, DEFAULT_PORT};
use paracom_core::gateway::Store;
use paracom_core::scenario::{self, parse_scenario, RunReport, SimConfig};

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "paracom", version, about = "Tilt-gesture patient messaging simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LogFormat {
    Text,
    Lines,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Channel seed mix-in; the scenario's channel seed is XORed with it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = LogFormat::Text)]
    log: LogFormat,
    /// TOML file overriding module defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory receiving events.log, outbox.jsonl and telemetry.jsonl.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute a scenario script and check its expectations.
    Run {
        file: PathBuf,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Run the built-in four-message demonstration.
    Demo {
        #[command(flatten)]
        args: RunArgs,
    },
    /// Serve the telemetry gateway over HTTP.
    Serve {
        /// Listening port; falls back to $PARACOM_PORT, then 8080.
        #[arg(long)]
        port: Option<u16>,
        /// Append-only record log, replayed on startup.
        #[arg(long, default_value = "paracom-telemetry.jsonl")]
        data: PathBuf,
    },
}

fn load_config(path: Option<&Path>) -> Result<SimConfig, String> {
    let Some(path) = path else { return Ok(SimConfig::default()) };
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    SimConfig::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_outputs(dir: &Path, report: &RunReport, log: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("events.log"), log)?;
    fs::write(dir.join("outbox.jsonl"), &report.outbox_log)?;
    fs::write(dir.join("telemetry.jsonl"), &report.telemetry_log)
}

fn run_text(name: &str, text: &str, args: &RunArgs) -> ExitCode {
    let cfg = match load_config(args.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let scenario = match parse_scenario(text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{name}: parse error at {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let report = scenario::run(&scenario, &cfg, args.seed);
    let log = match args.log {
        LogFormat::Text => report.log.to_text(),
        LogFormat::Lines => report.log.to_lines(),
    };
    print!("{log}");
    if let Some(dir) = &args.out {
        if let Err(e) = write_outputs(dir, &report, &log) {
            eprintln!("{}: {e}", dir.display());
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let failed = report.expectations.iter().filter(|e| !e.passed).count();
    eprintln!(
        "{name}: {} expectation(s), {failed} failed; {} sms sent",
        report.expectations.len(),
        report.outbox.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

fn serve(port: Option<u16>, data: &Path) -> ExitCode {
    let port = port.unwrap_or_else(|| http::port_from_env(DEFAULT_PORT));
    let store = match Store::open(data) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}: {e}", data.display());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    eprintln!("gateway: {} record(s) replayed from {}", store.len(), data.display());
    let addr = SocketAddr::from((Ipv4Addr::UNSPECIFIED, port));
    eprintln!("gateway: listening on http://{addr}/status");
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("runtime: {e}");
            return ExitCode::FAILURE;
        }
    };
    match runtime.block_on(http::serve(addr, Arc::new(RwLock::new(store)))) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gateway: {e}");
            ExitCode::FAILURE
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run { file, args } => match fs::read_to_string(&file) {
            Ok(text) => run_text(&file.display().to_string(), &text, &args),
            Err(e) => {
                eprintln!("{}: {e}", file.display());
                ExitCode::from(EXIT_USAGE)
            }
        },
        Command::Demo { args } => run_text("demo", scenario::DEMO, &args),
        Command::Serve { port, data } => serve(port, &data),
    }
}
