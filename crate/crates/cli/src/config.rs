//! Resolved run configurations and the flag/file/default merge.
//!
//! Every command resolves to a fully populated parameter struct. Values come
//! from three layers, later wins: built-in defaults, then the optional JSON
//! config file (a flat object with the same keys as the flags), then the
//! command line. The resolved configuration is echoed into the output header
//! so a result file always records what produced it.

use crate::CliError;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::f64::consts::PI;
use std::path::PathBuf;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChiralityArg {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChiralityPick {
    Left,
    Right,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisArg {
    Phase,
    Detuning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairingArg {
    Sorted,
    Continuity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Dressed,
    Bare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Json,
}

/// The fully resolved run: what to compute, where the rows go, which format.
/// Serializes to the flat provenance header (`command` tag next to a
/// `params` object) and parses back to an equal value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub action: Action,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub format: FormatArg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "kebab-case")]
pub enum Action {
    Spectrum(SpectrumParams),
    Cycle(CycleParams),
    SweepPhase(SweepPhaseParams),
    SweepDetuning(SweepDetuningParams),
    EfficiencyMap(EfficiencyMapParams),
    Thermalize(ThermalizeParams),
}

impl Action {
    pub fn command_name(&self) -> &'static str {
        match self {
            Action::Spectrum(_) => "spectrum",
            Action::Cycle(_) => "cycle",
            Action::SweepPhase(_) => "sweep-phase",
            Action::SweepDetuning(_) => "sweep-detuning",
            Action::EfficiencyMap(_) => "efficiency-map",
            Action::Thermalize(_) => "thermalize",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    pub chirality: ChiralityArg,
    /// Which control parameter the grid walks.
    pub axis: AxisArg,
    pub from: f64,
    pub to: f64,
    /// Grid size; 1 means a single point at (phi, delta).
    pub grid: usize,
    pub phi: f64,
    pub delta: f64,
    pub omega12: f64,
    pub omega13: f64,
    pub omega23: f64,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        SpectrumParams {
            chirality: ChiralityArg::Left,
            axis: AxisArg::Phase,
            from: 0.0,
            to: TWO_PI,
            grid: 201,
            phi: 0.0,
            delta: 0.0,
            omega12: 1.0,
            omega13: 1.0,
            omega23: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleParams {
    pub chirality: ChiralityPick,
    /// Which control parameter the stroke moves.
    pub control: AxisArg,
    pub from: f64,
    pub to: f64,
    /// Fixed phase when the stroke moves the detuning.
    pub phi: f64,
    /// Fixed detuning when the stroke moves the phase.
    pub delta: f64,
    pub beta_hot: f64,
    pub beta_cold: f64,
    pub pairing: PairingArg,
    pub gap_threshold: f64,
    pub path_samples: usize,
    pub omega12: f64,
    pub omega13: f64,
    pub omega23: f64,
}

impl Default for CycleParams {
    fn default() -> Self {
        CycleParams {
            chirality: ChiralityPick::Both,
            control: AxisArg::Detuning,
            from: 0.0,
            to: 1.0,
            phi: PI,
            delta: 0.0,
            beta_hot: chiral_otto::DEFAULT_BETA_HOT,
            beta_cold: chiral_otto::DEFAULT_BETA_COLD,
            pairing: PairingArg::Sorted,
            gap_threshold: chiral_otto::DEFAULT_GAP_THRESHOLD,
            path_samples: chiral_otto::DEFAULT_PATH_SAMPLES,
            omega12: 1.0,
            omega13: 1.0,
            omega23: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPhaseParams {
    /// Shared starting phase of every cycle in the sweep.
    pub phi1: f64,
    pub delta: f64,
    /// Number of final-phase grid points.
    pub points: usize,
    pub beta_hot: f64,
    pub beta_cold: f64,
    pub pairing: PairingArg,
    pub gap_threshold: f64,
    pub path_samples: usize,
    pub omega12: f64,
    pub omega13: f64,
    pub omega23: f64,
}

impl Default for SweepPhaseParams {
    fn default() -> Self {
        SweepPhaseParams {
            phi1: PI / 2.0,
            delta: 0.1,
            points: chiral_otto::DEFAULT_SWEEP_POINTS,
            beta_hot: chiral_otto::DEFAULT_BETA_HOT,
            beta_cold: chiral_otto::DEFAULT_BETA_COLD,
            pairing: PairingArg::Sorted,
            gap_threshold: chiral_otto::DEFAULT_GAP_THRESHOLD,
            path_samples: chiral_otto::DEFAULT_PATH_SAMPLES,
            omega12: 1.0,
            omega13: 1.0,
            omega23: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDetuningParams {
    /// Shared starting detuning of every cycle in the sweep.
    pub delta1: f64,
    pub phi: f64,
    /// Number of final-detuning grid points, spread over (0, 1].
    pub points: usize,
    pub beta_hot: f64,
    pub beta_cold: f64,
    pub pairing: PairingArg,
    pub gap_threshold: f64,
    pub path_samples: usize,
    pub omega12: f64,
    pub omega13: f64,
    pub omega23: f64,
}

impl Default for SweepDetuningParams {
    fn default() -> Self {
        SweepDetuningParams {
            delta1: 0.0,
            phi: PI / 2.0,
            points: chiral_otto::DEFAULT_SWEEP_POINTS,
            beta_hot: chiral_otto::DEFAULT_BETA_HOT,
            beta_cold: chiral_otto::DEFAULT_BETA_COLD,
            pairing: PairingArg::Sorted,
            gap_threshold: chiral_otto::DEFAULT_GAP_THRESHOLD,
            path_samples: chiral_otto::DEFAULT_PATH_SAMPLES,
            omega12: 1.0,
            omega13: 1.0,
            omega23: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencyMapParams {
    /// Detuning stroke shared by every phase on the grid.
    pub delta1: f64,
    pub delta2: f64,
    pub points: usize,
    pub beta_hot: f64,
    pub beta_cold: f64,
    pub pairing: PairingArg,
    pub gap_threshold: f64,
    pub path_samples: usize,
    pub omega12: f64,
    pub omega13: f64,
    pub omega23: f64,
}

impl Default for EfficiencyMapParams {
    fn default() -> Self {
        EfficiencyMapParams {
            delta1: 0.0,
            delta2: 1.0,
            points: chiral_otto::DEFAULT_SWEEP_POINTS,
            beta_hot: chiral_otto::DEFAULT_BETA_HOT,
            beta_cold: chiral_otto::DEFAULT_BETA_COLD,
            pairing: PairingArg::Sorted,
            gap_threshold: chiral_otto::DEFAULT_GAP_THRESHOLD,
            path_samples: chiral_otto::DEFAULT_PATH_SAMPLES,
            omega12: 1.0,
            omega13: 1.0,
            omega23: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalizeParams {
    pub chirality: ChiralityArg,
    pub phi: f64,
    pub delta: f64,
    /// Jump operators in the driven eigenbasis (dressed) or the undriven
    /// level basis (bare; requires nbar).
    pub mode: ModeArg,
    /// Inverse temperature of the bath being relaxed toward.
    pub beta: f64,
    /// Inverse temperature of the Gibbs state the run starts from.
    pub beta_init: f64,
    pub kappa: f64,
    /// Fixed mean occupation for bare mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbar: Option<f64>,
    /// Defaults to 50 / kappa when not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    pub dt: f64,
    pub omega12: f64,
    pub omega13: f64,
    pub omega23: f64,
}

impl Default for ThermalizeParams {
    fn default() -> Self {
        ThermalizeParams {
            chirality: ChiralityArg::Left,
            phi: PI / 2.0,
            delta: 0.1,
            mode: ModeArg::Dressed,
            beta: 1.0,
            beta_init: 0.01,
            kappa: chiral_otto::DEFAULT_KAPPA,
            nbar: None,
            t_end: None,
            dt: chiral_otto::DEFAULT_DT,
            omega12: 1.0,
            omega13: 1.0,
            omega23: 1.0,
        }
    }
}

/// Reads the config file into a flat key/value object.
pub fn load_config_file(path: &std::path::Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config file {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))?;
    match value {
        Value::Object(map) => {
            if map.contains_key("command") {
                return Err(CliError::Usage(
                    "config file sets \"command\"; choose the command on the command line".into(),
                ));
            }
            Ok(map)
        }
        _ => Err(CliError::Usage(format!(
            "config file {} must hold a JSON object",
            path.display()
        ))),
    }
}

/// Pulls an output/format override out of the config file, so those two keys
/// never reach the per-command parameter structs.
pub fn take_sink_overrides(
    file: &mut Map<String, Value>,
) -> Result<(Option<PathBuf>, Option<FormatArg>), CliError> {
    let output = match file.remove("output") {
        None => None,
        Some(v) => Some(
            serde_json::from_value(v)
                .map_err(|e| CliError::Usage(format!("config key \"output\": {e}")))?,
        ),
    };
    let format = match file.remove("format") {
        None => None,
        Some(v) => Some(
            serde_json::from_value(v)
                .map_err(|e| CliError::Usage(format!("config key \"format\": {e}")))?,
        ),
    };
    Ok((output, format))
}

fn to_object(value: Value) -> Map<String, Value> {
    match value {
        Value::Object(map) => map,
        _ => unreachable!("parameter structs serialize to objects"),
    }
}

/// Multiplies the named keys by pi/180 wherever they carry a number. Applied
/// to the flag and file layers before merging, never to the defaults, so
/// only values the user actually supplied get converted.
pub fn convert_degree_keys(map: &mut Map<String, Value>, keys: &[&str]) {
    for key in keys {
        if let Some(v) = map.get_mut(*key) {
            if let Some(x) = v.as_f64() {
                *v = Value::from(x * PI / 180.0);
            }
        }
    }
}

/// Looks up which control parameter a command will sweep, to decide whether
/// its from/to values are angles. Checks the flag layer, then the file
/// layer, then the default.
pub fn peek_axis(
    cli: &Map<String, Value>,
    file: &Map<String, Value>,
    key: &str,
    default: AxisArg,
) -> Result<AxisArg, CliError> {
    for layer in [cli, file] {
        if let Some(v) = layer.get(key) {
            return serde_json::from_value(v.clone())
                .map_err(|e| CliError::Usage(format!("key \"{key}\": {e}")));
        }
    }
    Ok(default)
}

/// Defaults, overlaid with the config file, overlaid with the flags; the
/// result must deserialize cleanly into the parameter struct, which is what
/// rejects unknown or ill-typed keys.
pub fn merge<P>(cli: Map<String, Value>, file: Map<String, Value>) -> Result<P, CliError>
where
    P: Default + Serialize + DeserializeOwned,
{
    let mut merged = to_object(serde_json::to_value(P::default()).expect("defaults serialize"));
    for (k, v) in file {
        merged.insert(k, v);
    }
    for (k, v) in cli {
        merged.insert(k, v);
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(e.to_string()))
}

/// Serializes the flag layer of a command into the same flat key space the
/// config file uses. Flags left unset disappear here, which is what lets the
/// file layer show through.
pub fn flags_object<T: Serialize>(args: &T) -> Map<String, Value> {
    to_object(serde_json::to_value(args).expect("flag structs serialize"))
}
