//! `rips` — the intrusion prevention daemon and its control client.
//!
//! - `rips run`: wire rules, modes, and map together and drive a scenario.
//! - `rips check`: parse and validate a rule file.
//! - `rips ctl`: talk to a running daemon over its control socket.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use rips_core::harness::control::send_command;
use rips_core::harness::{run_scenario, DaemonConfig};
use rips_core::rules::{parse_ruleset, validate_ruleset};

#[derive(Parser)]
#[command(name = "rips", version, about = "Robotic intrusion prevention system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the daemon over a scripted scenario.
    Run(RunArgs),
    /// Parse and validate a rule file, reporting every problem found.
    Check {
        /// Rule file to check.
        #[arg(long)]
        rules: PathBuf,
    },
    /// Send one command to a running daemon's control socket.
    Ctl(CtlArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Rule file (levels + rules).
    #[arg(long)]
    rules: PathBuf,
    /// System modes file.
    #[arg(long)]
    modes: PathBuf,
    /// Occupancy grid map file.
    #[arg(long)]
    map: PathBuf,
    /// Scenario script (JSONL timeline).
    #[arg(long)]
    scenario: PathBuf,
    /// Write every processed event with the rules it fired (JSONL).
    #[arg(long, value_name = "out.jsonl")]
    trace: Option<PathBuf>,
    /// Write per-tick metrics (CSV).
    #[arg(long, value_name = "out.csv")]
    metrics: Option<PathBuf>,
    /// Write alert records (JSONL).
    #[arg(long, value_name = "out.jsonl")]
    alert_log: Option<PathBuf>,
    /// Write level transition records (JSONL).
    #[arg(long, value_name = "out.jsonl")]
    transition_log: Option<PathBuf>,
    /// Consume `{"alert":"id"}` lines from this append-only feed.
    #[arg(long, value_name = "feed.jsonl")]
    ids_feed: Option<PathBuf>,
    /// Serve the control protocol on this Unix socket.
    #[arg(long, value_name = "path")]
    socket: Option<PathBuf>,
    /// Directory holding `exec(...)` action programs.
    #[arg(long, value_name = "dir")]
    actions_dir: Option<PathBuf>,
    /// Directory holding `plugin(...)` predicate programs.
    #[arg(long, value_name = "dir")]
    plugins_dir: Option<PathBuf>,
    /// Directory holding level enter/exit procedures.
    #[arg(long, value_name = "dir")]
    procs_dir: Option<PathBuf>,
    /// Pace ticks against the wall clock (default: free-running).
    #[arg(long)]
    realtime: bool,
    /// Ticks per second of the discrete clock.
    #[arg(long, default_value_t = 10)]
    tick_rate: u64,
    /// Value of the `Time` variable at tick 0.
    #[arg(long, default_value_t = 0)]
    epoch: i64,
    /// Topic whose delivery rate is reported as camera_hz.
    #[arg(long, default_value = "/camera/image_raw")]
    camera_topic: String,
    /// Keep-out zone as `x0,y0,x1,y1` (inclusive cells).
    #[arg(long, value_name = "x0,y0,x1,y1", value_parser = parse_zone)]
    keepout_zone: Option<rips_core::gridmap::Rect>,
    /// Mode-managed part whose activation arms the keep-out zone.
    #[arg(long, default_value = "filter_mask_server")]
    keepout_part: String,
}

#[derive(Args)]
struct CtlArgs {
    /// Control socket path (defaults to $RIPS_SOCKET).
    #[arg(long, value_name = "path")]
    socket: Option<PathBuf>,
    /// Command words: `level NAME`, `status`, `signal USR1|USR2`, `mode NAME`.
    #[arg(required = true)]
    words: Vec<String>,
}

fn parse_zone(text: &str) -> Result<rips_core::gridmap::Rect, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err("expected four comma-separated integers".to_string());
    }
    let mut nums = [0usize; 4];
    for (slot, part) in nums.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|e| format!("bad coordinate `{part}`: {e}"))?;
    }
    Ok(rips_core::gridmap::Rect::new(
        nums[0], nums[1], nums[2], nums[3],
    ))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("rips: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Check { rules } => cmd_check(&rules),
        Command::Ctl(args) => cmd_ctl(args),
    }
}

fn cmd_run(args: RunArgs) -> anyhow::Result<ExitCode> {
    let mut config = DaemonConfig::new(args.rules, args.modes, args.map);
    config.scenario_path = Some(args.scenario);
    config.trace_path = args.trace;
    config.metrics_path = args.metrics;
    config.alert_log_path = args.alert_log;
    config.transition_log_path = args.transition_log;
    config.ids_feed_path = args.ids_feed;
    config.socket_path = args.socket;
    config.actions_dir = args.actions_dir;
    config.plugins_dir = args.plugins_dir;
    config.procs_dir = args.procs_dir;
    config.realtime = args.realtime;
    config.install_signal_handlers = true;
    config.tick_rate = args.tick_rate;
    config.epoch = args.epoch;
    config.camera_topic = args.camera_topic;
    if let Some(zone) = args.keepout_zone {
        config.keepout_zone = zone;
    }
    config.keepout_part = args.keepout_part;

    let report = run_scenario(config)?;
    match &report.failure {
        None => {
            println!(
                "ok: {} ticks, {} transitions, {} alerts",
                report.ticks_run,
                report.transitions.len(),
                report.alerts.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Some(failure) => {
            eprintln!("scenario failed at tick {}: {}", failure.tick, failure.message);
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_check(rules: &std::path::Path) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(rules)
        .with_context(|| format!("cannot read `{}`", rules.display()))?;
    let ruleset = match parse_ruleset(&text) {
        Ok(rs) => rs,
        Err(e) => {
            eprintln!("{}: {e}", rules.display());
            return Ok(ExitCode::from(1));
        }
    };
    if let Err(errors) = validate_ruleset(&ruleset) {
        for e in &errors {
            eprintln!("{}: {e}", rules.display());
        }
        return Ok(ExitCode::from(1));
    }
    println!(
        "ok: {} levels, {} rules",
        ruleset.levels.len(),
        ruleset.rules.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_ctl(args: CtlArgs) -> anyhow::Result<ExitCode> {
    let socket = match args.socket.or_else(|| std::env::var_os("RIPS_SOCKET").map(PathBuf::from)) {
        Some(p) => p,
        None => bail!("no control socket: pass --socket or set RIPS_SOCKET"),
    };
    let line = args.words.join(" ");
    let reply = send_command(&socket, &line)
        .with_context(|| format!("cannot reach daemon at `{}`", socket.display()))?;
    println!("{reply}");
    if reply.starts_with("ok") {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
