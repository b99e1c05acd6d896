//! Command line front end for the chiral Otto cycle library.
//!
//! Every command emits one table: CSV by default (with a `# config` header
//! line echoing the resolved run), JSON with `--format json`. Rows go to
//! stdout, or atomically into `--output FILE` with a one-line summary on
//! stdout instead. Exit codes: 0 success, 1 warnings under `--strict`,
//! 2 usage or parameter errors, 3 I/O errors.

mod config;
mod emit;
mod run;

use clap::{Args, Parser, Subcommand};
use config::{
    convert_degree_keys, flags_object, load_config_file, merge, peek_axis, take_sink_overrides,
    Action, AxisArg, ChiralityArg, ChiralityPick, CycleParams, EfficiencyMapParams, FormatArg,
    ModeArg, PairingArg, RunConfig, SpectrumParams, SweepDetuningParams, SweepPhaseParams,
    ThermalizeParams,
};
use serde::Serialize;
use serde_json::{Map, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config keys, or parameter values the physics rejects.
    Usage(String),
    /// Filesystem trouble reading configs or writing results.
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Io(msg) => f.write_str(msg),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "chiral-otto",
    version,
    about = "Quantum Otto cycles that tell left-handed molecules from right-handed ones"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command; none of them enter the physics.
#[derive(Args, Debug)]
struct CommonArgs {
    /// JSON file with the same keys as the flags; flags win on conflict
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Write the table here (atomically) instead of stdout
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,

    /// Table format
    #[arg(long, value_enum)]
    format: Option<FormatArg>,

    /// Interpret the phase flags (and phase from/to values) in degrees
    #[arg(long)]
    degrees: bool,

    /// Exit with code 1 if any cycle record carries a gap or pairing warning
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug, Serialize)]
struct SpectrumArgs {
    /// left or right
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    chirality: Option<ChiralityArg>,

    /// Parameter the grid walks: phase or detuning
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    axis: Option<AxisArg>,

    /// Grid start
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    from: Option<f64>,

    /// Grid end
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    to: Option<f64>,

    /// Number of grid points; 1 evaluates the single point (phi, delta)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<usize>,

    /// Drive phase (fixed value, or the point itself when --grid 1)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    phi: Option<f64>,

    /// Detuning (fixed value, or the point itself when --grid 1)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,

    /// Rabi coupling of the 1-2 transition
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega12: Option<f64>,

    /// Rabi coupling of the 1-3 transition
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega13: Option<f64>,

    /// Rabi coupling of the 2-3 transition (the handedness-flipped one)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega23: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct CycleArgs {
    /// left, right, or both
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    chirality: Option<ChiralityPick>,

    /// Parameter the stroke moves: detuning or phase
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    control: Option<AxisArg>,

    /// Stroke start
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    from: Option<f64>,

    /// Stroke end
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    to: Option<f64>,

    /// Fixed phase for detuning strokes
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    phi: Option<f64>,

    /// Fixed detuning for phase strokes
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,

    /// Inverse temperature of the hot bath
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_hot: Option<f64>,

    /// Inverse temperature of the cold bath
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_cold: Option<f64>,

    /// Endpoint level matching: sorted or continuity
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pairing: Option<PairingArg>,

    /// Warn when the smallest gap along the stroke falls below this
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gap_threshold: Option<f64>,

    /// Samples of the gap/continuity scan along the stroke
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    path_samples: Option<usize>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega12: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega13: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega23: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct SweepPhaseArgs {
    /// Starting phase shared by every cycle
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    phi1: Option<f64>,

    /// Fixed detuning
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,

    /// Number of final-phase grid points
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<usize>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_hot: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_cold: Option<f64>,

    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pairing: Option<PairingArg>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gap_threshold: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    path_samples: Option<usize>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega12: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega13: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega23: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct SweepDetuningArgs {
    /// Starting detuning shared by every cycle
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta1: Option<f64>,

    /// Fixed phase
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    phi: Option<f64>,

    /// Number of final-detuning grid points, spread over (0, 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<usize>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_hot: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_cold: Option<f64>,

    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pairing: Option<PairingArg>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gap_threshold: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    path_samples: Option<usize>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega12: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega13: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega23: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct EfficiencyMapArgs {
    /// Detuning stroke start
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta1: Option<f64>,

    /// Detuning stroke end
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta2: Option<f64>,

    /// Number of phases on the grid
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<usize>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_hot: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_cold: Option<f64>,

    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pairing: Option<PairingArg>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gap_threshold: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    path_samples: Option<usize>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega12: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega13: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega23: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct ThermalizeArgs {
    /// left or right
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    chirality: Option<ChiralityArg>,

    /// Drive phase
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    phi: Option<f64>,

    /// Detuning
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,

    /// Jump-operator basis: dressed or bare
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<ModeArg>,

    /// Inverse temperature of the bath to relax toward
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,

    /// Inverse temperature of the starting Gibbs state
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_init: Option<f64>,

    /// Bath coupling rate
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa: Option<f64>,

    /// Fixed mean occupation (bare mode only)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    nbar: Option<f64>,

    /// Evolution span; defaults to 50 / kappa
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t_end: Option<f64>,

    /// Integrator step
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega12: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega13: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega23: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues along a phase or detuning grid
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        args: SpectrumArgs,
    },
    /// One Otto cycle, for one or both enantiomers
    Cycle {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        args: CycleArgs,
    },
    /// Cycles over a grid of final phases, both enantiomers per point
    SweepPhase {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        args: SweepPhaseArgs,
    },
    /// Cycles over a grid of final detunings, both enantiomers per point
    SweepDetuning {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        args: SweepDetuningArgs,
    },
    /// Engine efficiency of one detuning stroke across a phase grid
    EfficiencyMap {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        args: EfficiencyMapArgs,
    },
    /// Isochore relaxation toward the bath state
    Thermalize {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        args: ThermalizeArgs,
    },
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Sweeps fan out through a shared thread pool; CHIRAL_OTTO_THREADS caps its
/// size (0 or unset: one thread per core).
fn init_thread_pool() {
    if let Ok(raw) = std::env::var("CHIRAL_OTTO_THREADS") {
        if let Ok(n) = raw.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let (sink, action) = resolve(cli.command)?;
    let (output, format, strict) = sink;
    let config = RunConfig {
        action,
        output,
        format,
    };
    let rows = run::execute(&config.action)?;
    let text = emit::render(&config, &rows);
    match &config.output {
        Some(path) => {
            emit::write_atomic(path, &text)?;
            println!(
                "{}: {} rows -> {} ({} records with warnings)",
                config.action.command_name(),
                rows.len(),
                path.display(),
                rows.warned_records
            );
        }
        None => print!("{text}"),
    }
    if strict && rows.warned_records > 0 {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

type Sink = (Option<PathBuf>, FormatArg, bool);
type Layers = (Map<String, Value>, Map<String, Value>, Sink);

/// Folds flags over the config file over the defaults into a fully resolved
/// action, converting degree-valued inputs on the way in.
fn resolve(command: Command) -> Result<(Sink, Action), CliError> {
    match command {
        Command::Spectrum { common, args } => {
            let (mut cli_map, mut file_map, sink) = layers(&common, &args)?;
            let axis = peek_axis(&cli_map, &file_map, "axis", AxisArg::Phase)?;
            if common.degrees {
                let keys: &[&str] = match axis {
                    AxisArg::Phase => &["phi", "from", "to"],
                    AxisArg::Detuning => &["phi"],
                };
                convert_degree_keys(&mut cli_map, keys);
                convert_degree_keys(&mut file_map, keys);
            }
            let params: SpectrumParams = merge(cli_map, file_map)?;
            Ok((sink, Action::Spectrum(params)))
        }
        Command::Cycle { common, args } => {
            let (mut cli_map, mut file_map, sink) = layers(&common, &args)?;
            let control = peek_axis(&cli_map, &file_map, "control", AxisArg::Detuning)?;
            if common.degrees {
                let keys: &[&str] = match control {
                    AxisArg::Phase => &["phi", "from", "to"],
                    AxisArg::Detuning => &["phi"],
                };
                convert_degree_keys(&mut cli_map, keys);
                convert_degree_keys(&mut file_map, keys);
            }
            let params: CycleParams = merge(cli_map, file_map)?;
            Ok((sink, Action::Cycle(params)))
        }
        Command::SweepPhase { common, args } => {
            let (mut cli_map, mut file_map, sink) = layers(&common, &args)?;
            if common.degrees {
                convert_degree_keys(&mut cli_map, &["phi1"]);
                convert_degree_keys(&mut file_map, &["phi1"]);
            }
            let params: SweepPhaseParams = merge(cli_map, file_map)?;
            Ok((sink, Action::SweepPhase(params)))
        }
        Command::SweepDetuning { common, args } => {
            let (mut cli_map, mut file_map, sink) = layers(&common, &args)?;
            if common.degrees {
                convert_degree_keys(&mut cli_map, &["phi"]);
                convert_degree_keys(&mut file_map, &["phi"]);
            }
            let params: SweepDetuningParams = merge(cli_map, file_map)?;
            Ok((sink, Action::SweepDetuning(params)))
        }
        Command::EfficiencyMap { common, args } => {
            let (cli_map, file_map, sink) = layers(&common, &args)?;
            let params: EfficiencyMapParams = merge(cli_map, file_map)?;
            Ok((sink, Action::EfficiencyMap(params)))
        }
        Command::Thermalize { common, args } => {
            let (mut cli_map, mut file_map, sink) = layers(&common, &args)?;
            if common.degrees {
                convert_degree_keys(&mut cli_map, &["phi"]);
                convert_degree_keys(&mut file_map, &["phi"]);
            }
            let mut params: ThermalizeParams = merge(cli_map, file_map)?;
            if params.t_end.is_none() {
                if params.kappa <= 0.0 || !params.kappa.is_finite() {
                    return Err(CliError::Usage(format!(
                        "bath coupling must be positive and finite, got {}",
                        params.kappa
                    )));
                }
                params.t_end = Some(50.0 / params.kappa);
            }
            Ok((sink, Action::Thermalize(params)))
        }
    }
}

/// Splits a command invocation into its three layers: flags as a flat
/// object, the config file as a flat object (minus output/format overrides),
/// and the resolved output sink.
fn layers<T: Serialize>(common: &CommonArgs, args: &T) -> Result<Layers, CliError> {
    let cli_map = flags_object(args);
    let mut file_map = match &common.config {
        Some(path) => load_config_file(path)?,
        None => Map::new(),
    };
    let (file_output, file_format) = take_sink_overrides(&mut file_map)?;
    let output = common.output.clone().or(file_output);
    let format = common.format.or(file_format).unwrap_or(FormatArg::Csv);
    Ok((cli_map, file_map, (output, format, common.strict)))
}
