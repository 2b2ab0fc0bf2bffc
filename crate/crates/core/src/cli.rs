//! Command-line front end: `agentloop run <scenario> [options]`.
//!
//! Exit codes: 0 success, 1 I/O error (pattern or trace file), 2 usage
//! error, 3 environment error, 4 transport error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::distributed::{
    client_loop, ClientExit, DistributedError, RemoteTurn, ServeEnd, Server, SharedChannel,
    SharedRegistry, WsChannel,
};
use crate::environment::EnvError;
use crate::scenarios::excuse::{self, ExcuseConfig, StubGenerator};
use crate::scenarios::gol::{self, GolConfig};
use crate::scenarios::porter;
use crate::scenarios::{HttpGenerator, TextGenerator};
use crate::trace::TraceRecord;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ENV: i32 = 3;
pub const EXIT_TRANSPORT: i32 = 4;

pub const ENDPOINT_ENV: &str = "AGENTLOOP_GENERATOR_ENDPOINT";
pub const TOKEN_ENV: &str = "AGENTLOOP_GENERATOR_TOKEN";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    Porter,
    PorterMas,
    Gol,
    Excuse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum TraceFormat {
    None,
    #[default]
    Text,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Role {
    #[default]
    Local,
    Server,
    Client,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum GeneratorKind {
    #[default]
    Stub,
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum RemoteTurnArg {
    #[default]
    Lockstep,
    Immediate,
}

#[derive(Debug, Parser)]
#[command(name = "agentloop", version, about = "Run belief-plan agent scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write its trace.
    Run(RunArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    scenario: Scenario,
    /// Environment steps (porter, porter-mas, gol) or message cycles
    /// (porter-mas --role server).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    steps: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t)]
    trace: TraceFormat,
    /// Write the trace here instead of stdout.
    #[arg(long)]
    trace_file: Option<PathBuf>,
    /// Grid size as WIDTHxHEIGHT (gol).
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    /// Initial grid as rows of `.` and `#` (gol).
    #[arg(long)]
    pattern: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    role: Role,
    /// Listen address for --role server.
    #[arg(long)]
    bind: Option<String>,
    /// Server URL for --role client, e.g. ws://127.0.0.1:9001.
    #[arg(long)]
    connect: Option<String>,
    /// When the shadow agent answers (--role server).
    #[arg(long, value_enum)]
    remote_turn: Option<RemoteTurnArg>,
    /// Stop after sending this many messages (--role client).
    #[arg(long)]
    max_messages: Option<u64>,
    /// Pause between excuse cycles.
    #[arg(long)]
    interval_ms: Option<u64>,
    /// Give up on the excuse after this many cycles.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_cycles: Option<u64>,
    #[arg(long, value_enum)]
    generator: Option<GeneratorKind>,
    #[arg(long, env = ENDPOINT_ENV)]
    endpoint: Option<String>,
    #[arg(long, env = TOKEN_ENV, hide_env_values = true)]
    token: Option<String>,
    #[arg(long)]
    timeout_ms: Option<u64>,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let dim = |d: &str| match d.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("grid dimensions must be positive integers, got {s:?}")),
    };
    Ok((dim(w)?, dim(h)?))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorConfig {
    Stub,
    Http {
        endpoint: String,
        token: Option<String>,
        timeout: Duration,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoleConfig {
    Local,
    Server { bind: String, remote_turn: RemoteTurn },
    Client { connect: String, max_messages: Option<u64> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridConfig {
    pub size: Option<(usize, usize)>,
    pub pattern: Option<PathBuf>,
}

/// A validated run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// Steps, message cycles (server) or maximum excuse cycles.
    pub steps: u64,
    pub seed: u64,
    pub trace: TraceFormat,
    pub trace_file: Option<PathBuf>,
    pub grid: GridConfig,
    pub role: RoleConfig,
    pub interval: Duration,
    pub generator: GeneratorConfig,
}

pub const DEFAULT_BIND: &str = "127.0.0.1:9001";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Error)]
pub enum CliError {
    /// `--help` or `--version`; print to stdout and exit 0.
    #[error("{0}")]
    Info(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => EXIT_OK,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(format!("error: {}", msg.into()))
}

pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    })?;
    let Command::Run(a) = cli.command;
    validate(a)
}

fn validate(a: RunArgs) -> Result<RunConfig, CliError> {
    let name = a.scenario.to_possible_value().expect("no skipped variants");
    let name = name.get_name();
    let only = |flag: &str, set: bool, allowed: bool, context: &str| {
        if set && !allowed {
            Err(usage(format!("{flag} only applies to {context}")))
        } else {
            Ok(())
        }
    };
    let gol = a.scenario == Scenario::Gol;
    let excuse = a.scenario == Scenario::Excuse;
    only("--grid", a.grid.is_some(), gol, "gol")?;
    only("--pattern", a.pattern.is_some(), gol, "gol")?;
    for (flag, set) in [
        ("--interval-ms", a.interval_ms.is_some()),
        ("--max-cycles", a.max_cycles.is_some()),
        ("--generator", a.generator.is_some()),
        ("--timeout-ms", a.timeout_ms.is_some()),
    ] {
        only(flag, set, excuse, "excuse")?;
    }
    if a.role != Role::Local && a.scenario != Scenario::PorterMas {
        return Err(usage(format!("--role {:?} is only valid for porter-mas, not {name}", a.role).to_lowercase()));
    }
    only("--bind", a.bind.is_some(), a.role == Role::Server, "--role server")?;
    only("--remote-turn", a.remote_turn.is_some(), a.role == Role::Server, "--role server")?;
    only("--connect", a.connect.is_some(), a.role == Role::Client, "--role client")?;
    only("--max-messages", a.max_messages.is_some(), a.role == Role::Client, "--role client")?;
    if excuse && a.steps.is_some() {
        return Err(usage("excuse runs until acceptance; use --max-cycles instead of --steps"));
    }
    if a.role == Role::Client && a.steps.is_some() {
        return Err(usage("a client runs until the server stops; use --max-messages instead of --steps"));
    }
    let role = match a.role {
        Role::Local => RoleConfig::Local,
        Role::Server => RoleConfig::Server {
            bind: a.bind.unwrap_or_else(|| DEFAULT_BIND.to_owned()),
            remote_turn: match a.remote_turn.unwrap_or_default() {
                RemoteTurnArg::Lockstep => RemoteTurn::Lockstep,
                RemoteTurnArg::Immediate => RemoteTurn::Immediate,
            },
        },
        Role::Client => RoleConfig::Client {
            connect: a.connect.ok_or_else(|| usage("--role client requires --connect"))?,
            max_messages: a.max_messages,
        },
    };
    let generator = match a.generator.unwrap_or_default() {
        GeneratorKind::Stub => GeneratorConfig::Stub,
        GeneratorKind::Http => GeneratorConfig::Http {
            endpoint: a
                .endpoint
                .filter(|e| !e.is_empty())
                .ok_or_else(|| usage(format!("--generator http requires --endpoint or {ENDPOINT_ENV}")))?,
            token: a.token.filter(|t| !t.is_empty()),
            timeout: a.timeout_ms.map_or(DEFAULT_TIMEOUT, Duration::from_millis),
        },
    };
    let steps = match a.scenario {
        Scenario::Excuse => a.max_cycles.unwrap_or(excuse::DEFAULT_MAX_CYCLES),
        Scenario::Gol => a.steps.unwrap_or(50),
        Scenario::Porter | Scenario::PorterMas => a.steps.unwrap_or(20),
    };
    Ok(RunConfig {
        scenario: a.scenario,
        steps,
        seed: a.seed,
        trace: a.trace,
        trace_file: a.trace_file,
        grid: GridConfig {
            size: a.grid,
            pattern: a.pattern,
        },
        role,
        interval: a.interval_ms.map_or(excuse::DEFAULT_INTERVAL, Duration::from_millis),
        generator,
    })
}

#[derive(Debug, Error)]
enum RunError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("{0}")]
    Registry(String),
    #[error("transport: {0}")]
    Transport(String),
}

impl RunError {
    fn exit_code(&self) -> i32 {
        match self {
            RunError::Io(_) => EXIT_IO,
            RunError::Config(_) => EXIT_USAGE,
            RunError::Env(_) | RunError::Registry(_) => EXIT_ENV,
            RunError::Transport(_) => EXIT_TRANSPORT,
        }
    }
}

impl From<DistributedError> for RunError {
    fn from(e: DistributedError) -> Self {
        match e {
            DistributedError::Env(e) => RunError::Env(e),
            DistributedError::Channel(e) => RunError::Transport(e.to_string()),
            other => RunError::Registry(other.to_string()),
        }
    }
}

struct TraceSink<'a> {
    format: TraceFormat,
    out: Box<dyn Write + 'a>,
    // gol text frames: grid width, and the generation last drawn
    gol_width: Option<usize>,
}

impl TraceSink<'_> {
    fn write(&mut self, records: &[TraceRecord]) -> Result<(), RunError> {
        self.try_write(records).map_err(|e| RunError::Io(format!("writing trace: {e}")))
    }

    fn try_write(&mut self, records: &[TraceRecord]) -> io::Result<()> {
        match (self.format, self.gol_width) {
            (TraceFormat::None, _) => {}
            (TraceFormat::Jsonl, _) => {
                for r in records {
                    writeln!(self.out, "{}", r.to_json_line())?;
                }
            }
            (TraceFormat::Text, Some(width)) => {
                // one frame per completed generation
                if let Some(last) = records.last() {
                    if let Some(cells) = gol::current_activity(&last.post_state) {
                        writeln!(self.out, "generation {}", last.step + 1)?;
                        write!(self.out, "{}", gol::Frame { width, cells: &cells })?;
                        writeln!(self.out)?;
                    }
                }
            }
            (TraceFormat::Text, None) => {
                for r in records {
                    let actions: Vec<String> = r.actions.iter().map(ToString::to_string).collect();
                    let state = crate::value::canonical_string(&r.post_state);
                    write!(self.out, "{:>4} {}: [{}] -> {state}", r.step, r.agent_id, actions.join(", "))?;
                    for e in &r.errors {
                        write!(self.out, " !{:?}: {}", e.kind, e.message)?;
                    }
                    writeln!(self.out)?;
                }
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<(), RunError> {
        self.out
            .flush()
            .map_err(|e| RunError::Io(format!("writing trace: {e}")))
    }
}

/// Runs a validated configuration and returns the process exit code.
/// The trace goes to `out` (unless a trace file is configured); status
/// messages go to `err`.
pub fn run_scenario(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match run(config, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn run(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), RunError> {
    let out: Box<dyn Write + '_> = match &config.trace_file {
        Some(path) => {
            let f = File::create(path)
                .map_err(|e| RunError::Io(format!("creating {}: {e}", path.display())))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(out),
    };
    let mut sink = TraceSink {
        format: config.trace,
        out,
        gol_width: None,
    };
    match (config.scenario, &config.role) {
        (Scenario::Porter, _) => {
            let mut env = porter::porter_environment(config.seed);
            run_steps(&mut env, config.steps, &mut sink)?;
        }
        (Scenario::PorterMas, RoleConfig::Local) => {
            let mut env = porter::porter_mas_environment();
            run_steps(&mut env, config.steps, &mut sink)?;
        }
        (Scenario::PorterMas, RoleConfig::Server { bind, remote_turn }) => {
            run_server(bind, *remote_turn, config.steps, &mut sink, err)?;
        }
        (Scenario::PorterMas, RoleConfig::Client { connect, max_messages }) => {
            run_client(connect, *max_messages, err)?;
        }
        (Scenario::Gol, _) => {
            let grid = gol_config(config)?;
            sink.gol_width = Some(grid.width());
            if config.trace == TraceFormat::Text {
                let _ = writeln!(sink.out, "generation 0");
                let _ = writeln!(sink.out, "{}", gol::Frame { width: grid.width(), cells: grid.initial_activity() });
            }
            let mut env = gol::gol_environment(&grid);
            run_steps(&mut env, config.steps, &mut sink)?;
        }
        (Scenario::Excuse, _) => {
            let generator: Arc<dyn TextGenerator> = match &config.generator {
                GeneratorConfig::Stub => Arc::new(StubGenerator),
                GeneratorConfig::Http { endpoint, token, timeout } => {
                    Arc::new(HttpGenerator::new(endpoint.clone(), token.clone(), *timeout))
                }
            };
            let mut env = excuse::excuse_environment(&ExcuseConfig::default(), generator);
            let mut write_err = None;
            let result = excuse::run_excuse_with(&mut env, config.interval, config.steps, |records| {
                if write_err.is_none() {
                    write_err = sink.write(records).err();
                }
            })?;
            if let Some(e) = write_err {
                return Err(e);
            }
            if result.accepted {
                let _ = writeln!(err, "excuse accepted after {} cycles", result.cycles);
            } else {
                let _ = writeln!(err, "no excuse accepted after {} cycles", result.cycles);
            }
        }
    }
    sink.finish()
}

fn run_steps(env: &mut crate::environment::Environment, steps: u64, sink: &mut TraceSink) -> Result<(), RunError> {
    for _ in 0..steps {
        let records = env.step()?;
        sink.write(&records)?;
    }
    Ok(())
}

fn gol_config(config: &RunConfig) -> Result<GolConfig, RunError> {
    let pattern = match &config.grid.pattern {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunError::Io(format!("reading {}: {e}", path.display())))?;
            Some(GolConfig::parse_pattern(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?)
        }
        None => None,
    };
    let result = match (pattern, config.grid.size) {
        (Some(p), Some((w, h))) => p.placed_in(w, h),
        (Some(p), None) => Ok(p),
        (None, size) => {
            let (w, h) = size.unwrap_or((gol::DEFAULT_WIDTH, gol::DEFAULT_HEIGHT));
            GolConfig::random(w, h, config.seed)
        }
    };
    result.map_err(|e| RunError::Config(e.to_string()))
}

fn run_server(
    bind: &str,
    remote_turn: RemoteTurn,
    cycles: u64,
    sink: &mut TraceSink,
    err: &mut dyn Write,
) -> Result<(), RunError> {
    let listener = TcpListener::bind(bind).map_err(|e| RunError::Transport(format!("binding {bind}: {e}")))?;
    let addr = listener
        .local_addr()
        .map_err(|e| RunError::Transport(e.to_string()))?;
    let _ = writeln!(err, "listening on ws://{addr}");
    let _ = err.flush();
    let channel = WsChannel::accept(&listener).map_err(|e| RunError::Transport(e.to_string()))?;
    let channel = SharedChannel::new(channel);
    let registry = SharedRegistry::new();
    let env = porter::porter_mas_server_environment(channel.clone(), registry.clone(), remote_turn)?;
    let mut server = Server::new(env, registry, channel)?;
    let mut write_err = None;
    let report = server.serve(Some(cycles), |records| {
        if write_err.is_none() {
            write_err = sink.write(records).err();
        }
    })?;
    if let Some(e) = write_err {
        return Err(e);
    }
    let why = match report.end {
        ServeEnd::PeerClosed => "client closed the connection",
        ServeEnd::CycleLimit => "cycle limit reached",
    };
    let _ = writeln!(
        err,
        "{} cycles from {} frames ({why}); {} protocol warnings",
        report.cycles,
        report.frames,
        server.warnings().len()
    );
    Ok(())
}

fn run_client(connect: &str, max_messages: Option<u64>, err: &mut dyn Write) -> Result<(), RunError> {
    let mut channel = WsChannel::connect(connect).map_err(|e| RunError::Transport(e.to_string()))?;
    let mut agent = porter::claustrophobe_agent();
    let exit = client_loop(&mut agent, &mut channel, max_messages)
        .map_err(|e| RunError::Transport(e.to_string()))?;
    let _ = match exit {
        ClientExit::RemoteClosed { sent } => writeln!(err, "server closed the connection after {sent} messages"),
        ClientExit::BudgetExhausted { sent } => writeln!(err, "stopped after {sent} messages"),
    };
    Ok(())
}
