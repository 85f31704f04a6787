//! `dualism`: build two-particle states, read them in both labellings, run
//! CHSH tests, coincidence experiments and decoherence sweeps.
//!
//! Failures print one JSON line to stderr and exit with a code per error kind
//! (see [`exit_code`]).

mod config;
mod run;

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dualism::DualismError;
use serde_json::json;

use config::{
    parse_grid, parse_settings, CommandKind, ConfigError, Form, Format, Routing, RunConfig, SettingsChoice, StateConfig,
    StatePreset, StatsArg, System,
};
use run::RunError;

#[derive(Parser)]
#[command(name = "dualism", version, about, args_conflicts_with_subcommands = true)]
struct Cli {
    /// Run the configuration stored in a JSON file instead of a subcommand.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Print the resolved configuration as JSON instead of running it.
    #[arg(long, global = true)]
    dump_config: bool,

    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Rewrite an EPR-form state in both labellings.
    Dualize {
        #[command(flatten)]
        state: StateArgs,
        /// Use two distinguishable species; the B-labelled reading then fails.
        #[arg(long)]
        nip: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Correlators and signed Bell expectation of one reading.
    Chsh {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_enum, default_value_t = Form::A)]
        form: Form,
        #[command(flatten)]
        settings: SettingsArg,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Same in-plane CHSH test on both readings.
    SignReport {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        settings: SettingsArg,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Route through polarizing beam splitters and sample coincidences.
    Sample {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        settings: SettingsArg,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-detector efficiency in [0, 1].
        #[arg(long, default_value_t = 1.0)]
        efficiency: f64,
        #[arg(long, value_enum, default_value_t = Routing::VToCharlie)]
        routing: Routing,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Bell expectation of both readings against the environment overlap.
    Sweep {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        settings: SettingsArg,
        /// Overlaps as `start:stop:step` or a comma list.
        #[arg(long, value_parser = grid)]
        gammas: Option<Grid>,
        /// Times mapped to overlaps by `exp(-t/tau)`; needs `--tau`.
        #[arg(long, value_parser = grid, requires = "tau", conflicts_with = "gammas")]
        times: Option<Grid>,
        #[arg(long, requires = "times")]
        tau: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct StateArgs {
    #[arg(long = "state", value_enum, default_value_t = StatePreset::Custom)]
    preset: StatePreset,
    #[arg(long, default_value_t = FRAC_1_SQRT_2, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha_im: f64,
    #[arg(long, default_value_t = FRAC_1_SQRT_2, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta_im: f64,
    #[arg(long, value_enum, default_value_t = StatsArg::Boson)]
    stats: StatsArg,
    /// Labels for the two variables [default: trapped-spins for sweep, photonic otherwise]
    #[arg(long, value_enum)]
    system: Option<System>,
}

#[derive(Args)]
struct SettingsArg {
    /// `canonical`, `optimal`, or `θa,φa,θa',φa',θb,φb,θb',φb'` in degrees
    /// [default: optimal for sweep, canonical otherwise]
    #[arg(long, value_parser = parse_settings, allow_hyphen_values = true)]
    settings: Option<SettingsChoice>,
}

#[derive(Args)]
struct OutputArgs {
    /// [default: csv for sample and sweep, json otherwise]
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone)]
struct Grid(Vec<f64>);

fn grid(s: &str) -> Result<Grid, String> {
    parse_grid(s).map(Grid)
}

fn resolve(cmd: Cmd) -> RunConfig {
    let (command, state, out) = match &cmd {
        Cmd::Dualize { state, out, .. } => (CommandKind::Dualize, state, out),
        Cmd::Chsh { state, out, .. } => (CommandKind::Chsh, state, out),
        Cmd::SignReport { state, out, .. } => (CommandKind::SignReport, state, out),
        Cmd::Sample { state, out, .. } => (CommandKind::Sample, state, out),
        Cmd::Sweep { state, out, .. } => (CommandKind::Sweep, state, out),
    };
    let is_sweep = command == CommandKind::Sweep;
    let mut config = RunConfig {
        command,
        state: StateConfig {
            preset: state.preset,
            alpha_re: state.alpha,
            alpha_im: state.alpha_im,
            beta_re: state.beta,
            beta_im: state.beta_im,
            statistics: state.stats,
            system: state.system.unwrap_or(if is_sweep { System::TrappedSpins } else { System::Photonic }),
        },
        nip: false,
        form: Form::A,
        settings: if is_sweep { SettingsChoice::Optimal } else { SettingsChoice::Canonical },
        shots: 100_000,
        seed: 0,
        efficiency: 1.0,
        gammas: None,
        times: None,
        tau: None,
        routing: Routing::VToCharlie,
        format: out.format.unwrap_or(match command {
            CommandKind::Sample | CommandKind::Sweep => Format::Csv,
            _ => Format::Json,
        }),
        output: out.output.clone(),
    };
    let mut set_settings = |s: &SettingsArg| {
        if let Some(choice) = s.settings {
            config.settings = choice;
        }
    };
    match cmd {
        Cmd::Dualize { nip, .. } => config.nip = nip,
        Cmd::Chsh { form, settings, .. } => {
            set_settings(&settings);
            config.form = form;
        }
        Cmd::SignReport { settings, .. } => set_settings(&settings),
        Cmd::Sample { settings, shots, seed, efficiency, routing, .. } => {
            set_settings(&settings);
            config.shots = shots;
            config.seed = seed;
            config.efficiency = efficiency;
            config.routing = routing;
        }
        Cmd::Sweep { settings, gammas, times, tau, .. } => {
            set_settings(&settings);
            config.gammas = gammas.map(|g| g.0);
            config.times = times.map(|g| g.0);
            config.tau = tau;
            if config.gammas.is_none() && config.times.is_none() {
                config.gammas = Some(parse_grid("0:1:0.1").expect("valid default range"));
            }
        }
    }
    config
}

/// Exit status per error kind.
///
/// | code | kind |
/// |------|------|
/// | 2 | ConfigError |
/// | 3 | ZeroState |
/// | 4 | ExclusionViolation |
/// | 5 | StatisticsMismatch |
/// | 6 | NotEprForm |
/// | 7 | SpeciesSuperpositionForbidden |
/// | 8 | SettingsNotInPlane |
/// | 9 | InsufficientShots |
/// | 10 | DegenerateExpectation |
/// | 11 | InvalidParameter |
/// | 12 | IoError |
fn exit_code(e: &RunError) -> u8 {
    match e {
        RunError::Config(_) => 2,
        RunError::Domain(d) => match d {
            DualismError::ZeroState => 3,
            DualismError::ExclusionViolation(_) => 4,
            DualismError::StatisticsMismatch => 5,
            DualismError::NotEprForm(_) => 6,
            DualismError::SpeciesSuperpositionForbidden(_) => 7,
            DualismError::SettingsNotInPlane(_) => 8,
            DualismError::InsufficientShots { .. } => 9,
            DualismError::DegenerateExpectation => 10,
            DualismError::InvalidParameter(_) => 11,
        },
        RunError::Io(_) => 12,
    }
}

fn report(e: &RunError) -> ExitCode {
    let code = exit_code(e);
    let mut doc = match e {
        RunError::Config(c) => json!({ "error": "ConfigError", "message": c.0 }),
        RunError::Domain(d) => json!({ "error": d.kind(), "message": d.to_string() }),
        RunError::Io(io) => json!({ "error": "IoError", "message": io.to_string() }),
    };
    doc["exit_code"] = json!(code);
    if let RunError::Domain(DualismError::SpeciesSuperpositionForbidden(conflict)) = e {
        doc["details"] = json!(conflict);
    }
    eprintln!("{doc}");
    ExitCode::from(code)
}

fn load_config(path: &PathBuf) -> Result<RunConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(RunError::Io)?;
    serde_json::from_str(&text).map_err(|e| RunError::Config(ConfigError(format!("{}: {e}", path.display()))))
}

fn write_output(config: &RunConfig, text: &str) -> Result<(), RunError> {
    match &config.output {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
    .map_err(RunError::Io)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or_default().trim_start_matches("error: ");
            return report(&RunError::Config(ConfigError(first.to_string())));
        }
    };
    let config = match (cli.config, cli.command) {
        (Some(path), None) => match load_config(&path) {
            Ok(c) => c,
            Err(e) => return report(&e),
        },
        (None, Some(cmd)) => resolve(cmd),
        _ => return report(&RunError::Config(ConfigError("give a subcommand or --config FILE".into()))),
    };
    if cli.dump_config {
        // always to stdout, so `--output` survives in the dumped config
        return match config.validate() {
            Ok(()) => {
                println!("{}", serde_json::to_string_pretty(&config).expect("config serializes"));
                ExitCode::SUCCESS
            }
            Err(e) => report(&RunError::Config(e)),
        };
    }
    match run::execute(&config).and_then(|text| write_output(&config, &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}
