//! Dispatch from resolved parameters to the library and row production.

use crate::config::{
    Action, AxisArg, ChiralityArg, ChiralityPick, ModeArg, PairingArg, SpectrumParams,
    ThermalizeParams,
};
use crate::emit::{cell, opt_cell, RowSet};
use crate::CliError;
use chiral_otto::{
    build_hamiltonian, efficiency_vs_phase, eigensystem, gibbs_state, linspace, run_cycle,
    spectrum_along_path, sweep_detuning, sweep_phase, thermalization_trace, BasisMode, BathSpec,
    Chirality, ControlParameter, ControlPath, CycleConfig, CycleRecord, DriveParameters,
    OccupationModel, PairingMode, SweepConfig, PHASE_GRID_OFFSET, TWO_PI,
};
use serde::Serialize;

impl From<ChiralityArg> for Chirality {
    fn from(c: ChiralityArg) -> Chirality {
        match c {
            ChiralityArg::Left => Chirality::Left,
            ChiralityArg::Right => Chirality::Right,
        }
    }
}

impl From<AxisArg> for ControlParameter {
    fn from(a: AxisArg) -> ControlParameter {
        match a {
            AxisArg::Phase => ControlParameter::Phase,
            AxisArg::Detuning => ControlParameter::Detuning,
        }
    }
}

impl From<PairingArg> for PairingMode {
    fn from(p: PairingArg) -> PairingMode {
        match p {
            PairingArg::Sorted => PairingMode::Sorted,
            PairingArg::Continuity => PairingMode::Continuity,
        }
    }
}

fn domain<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Serialize)]
struct SpectrumRow {
    param: f64,
    #[serde(rename = "E1")]
    e1: f64,
    #[serde(rename = "E2")]
    e2: f64,
    #[serde(rename = "E3")]
    e3: f64,
}

impl SpectrumRow {
    fn new(param: f64, values: [f64; 3]) -> Self {
        SpectrumRow {
            param: crate::emit::round12(param),
            e1: crate::emit::round12(values[0]),
            e2: crate::emit::round12(values[1]),
            e3: crate::emit::round12(values[2]),
        }
    }

    fn csv(&self) -> String {
        format!(
            "{},{},{},{}",
            cell(self.param),
            cell(self.e1),
            cell(self.e2),
            cell(self.e3)
        )
    }
}

#[derive(Serialize)]
struct CycleRow {
    param: f64,
    chirality: &'static str,
    #[serde(rename = "Qh")]
    q_hot: f64,
    #[serde(rename = "Qc")]
    q_cold: f64,
    #[serde(rename = "W")]
    work: f64,
    eta_percent: Option<f64>,
    regime: &'static str,
    min_gap: f64,
}

impl CycleRow {
    fn new(param: f64, record: &CycleRecord) -> Self {
        CycleRow {
            param: crate::emit::round12(param),
            chirality: record.chirality.label(),
            q_hot: crate::emit::round12(record.q_hot),
            q_cold: crate::emit::round12(record.q_cold),
            work: crate::emit::round12(record.work),
            eta_percent: record.eta_percent.map(crate::emit::round12),
            regime: record.regime.label(),
            min_gap: crate::emit::round12(record.min_gap),
        }
    }

    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            cell(self.param),
            self.chirality,
            cell(self.q_hot),
            cell(self.q_cold),
            cell(self.work),
            opt_cell(self.eta_percent),
            self.regime,
            cell(self.min_gap)
        )
    }
}

#[derive(Serialize)]
struct ThermalizeRow {
    t: f64,
    epsilon: f64,
    fidelity: f64,
}

impl ThermalizeRow {
    fn new(t: f64, epsilon: f64) -> Self {
        ThermalizeRow {
            t: crate::emit::round12(t),
            epsilon: crate::emit::round12(epsilon),
            fidelity: crate::emit::round12(1.0 - epsilon),
        }
    }

    fn csv(&self) -> String {
        format!(
            "{},{},{}",
            cell(self.t),
            cell(self.epsilon),
            cell(self.fidelity)
        )
    }
}

#[derive(Serialize)]
struct EfficiencyRow {
    phi: f64,
    eta_left: Option<f64>,
    eta_right: Option<f64>,
}

impl EfficiencyRow {
    fn csv(&self) -> String {
        format!(
            "{},{},{}",
            cell(self.phi),
            opt_cell(self.eta_left),
            opt_cell(self.eta_right)
        )
    }
}

const CYCLE_HEADER: &str = "param,chirality,Qh,Qc,W,eta_percent,regime,min_gap";

/// Runs the resolved command and produces its rows.
pub fn execute(action: &Action) -> Result<RowSet, CliError> {
    match action {
        Action::Spectrum(p) => spectrum_rows(p),
        Action::Cycle(p) => {
            let drive = drive_for(p.omega12, p.omega13, p.omega23, p.phi, p.delta)?;
            let path = ControlPath::new(
                p.control.into(),
                p.from,
                p.to,
                match p.control {
                    AxisArg::Detuning => p.phi,
                    AxisArg::Phase => p.delta,
                },
                p.path_samples,
            )
            .map_err(domain)?;
            let sides: &[Chirality] = match p.chirality {
                ChiralityPick::Left => &[Chirality::Left],
                ChiralityPick::Right => &[Chirality::Right],
                ChiralityPick::Both => &[Chirality::Left, Chirality::Right],
            };
            let mut rows = RowSet::new(CYCLE_HEADER);
            for &side in sides {
                let cfg =
                    CycleConfig::new(drive.with_chirality(side), path, p.beta_hot, p.beta_cold)
                        .map_err(domain)?
                        .with_pairing(p.pairing.into())
                        .with_gap_threshold(p.gap_threshold)
                        .map_err(domain)?;
                let record = run_cycle(&cfg).map_err(domain)?;
                push_cycle_row(&mut rows, p.to, &record);
            }
            Ok(rows)
        }
        Action::SweepPhase(p) => {
            let cfg = sweep_config(
                p.omega12,
                p.omega13,
                p.omega23,
                p.phi1,
                p.delta,
                p.beta_hot,
                p.beta_cold,
                p.pairing,
                p.gap_threshold,
                p.path_samples,
            )?;
            let grid = phase_grid(p.points)?;
            let points = sweep_phase(&cfg, p.phi1, p.delta, &grid).map_err(domain)?;
            let mut rows = RowSet::new(CYCLE_HEADER);
            for point in &points {
                push_cycle_row(&mut rows, point.x, &point.left);
                push_cycle_row(&mut rows, point.x, &point.right);
            }
            Ok(rows)
        }
        Action::SweepDetuning(p) => {
            let cfg = sweep_config(
                p.omega12,
                p.omega13,
                p.omega23,
                p.phi,
                p.delta1,
                p.beta_hot,
                p.beta_cold,
                p.pairing,
                p.gap_threshold,
                p.path_samples,
            )?;
            let grid = detuning_grid(p.points)?;
            let points = sweep_detuning(&cfg, p.delta1, p.phi, &grid).map_err(domain)?;
            let mut rows = RowSet::new(CYCLE_HEADER);
            for point in &points {
                push_cycle_row(&mut rows, point.x, &point.left);
                push_cycle_row(&mut rows, point.x, &point.right);
            }
            Ok(rows)
        }
        Action::EfficiencyMap(p) => {
            let cfg = sweep_config(
                p.omega12,
                p.omega13,
                p.omega23,
                0.0,
                p.delta1,
                p.beta_hot,
                p.beta_cold,
                p.pairing,
                p.gap_threshold,
                p.path_samples,
            )?;
            let grid = phase_grid(p.points)?;
            let points = efficiency_vs_phase(&cfg, p.delta1, p.delta2, &grid).map_err(domain)?;
            let mut rows = RowSet::new("phi,eta_left,eta_right");
            for point in &points {
                let row = EfficiencyRow {
                    phi: crate::emit::round12(point.x),
                    eta_left: point.left.eta_percent.map(crate::emit::round12),
                    eta_right: point.right.eta_percent.map(crate::emit::round12),
                };
                let line = row.csv();
                rows.push(&row, line);
                rows.warned_records += [&point.left, &point.right]
                    .iter()
                    .filter(|r| !r.warnings.is_empty())
                    .count();
            }
            Ok(rows)
        }
        Action::Thermalize(p) => thermalize_rows(p),
    }
}

fn drive_for(
    omega12: f64,
    omega13: f64,
    omega23: f64,
    phi: f64,
    delta: f64,
) -> Result<DriveParameters, CliError> {
    DriveParameters::new(Chirality::Left, phi, delta)
        .map_err(domain)?
        .with_rabi(omega12, omega13, omega23)
        .map_err(domain)
}

#[allow(clippy::too_many_arguments)]
fn sweep_config(
    omega12: f64,
    omega13: f64,
    omega23: f64,
    phi: f64,
    delta: f64,
    beta_hot: f64,
    beta_cold: f64,
    pairing: PairingArg,
    gap_threshold: f64,
    path_samples: usize,
) -> Result<SweepConfig, CliError> {
    if !beta_hot.is_finite() || !beta_cold.is_finite() || beta_hot < 0.0 || beta_cold < 0.0 {
        return Err(CliError::Usage(format!(
            "bath temperatures must be finite and nonnegative, got beta_hot = {beta_hot}, beta_cold = {beta_cold}"
        )));
    }
    if beta_hot > beta_cold {
        return Err(CliError::Usage(format!(
            "hot bath must not be colder than the cold bath: beta_hot = {beta_hot} > beta_cold = {beta_cold}"
        )));
    }
    if !gap_threshold.is_finite() || gap_threshold < 0.0 {
        return Err(CliError::Usage(format!(
            "gap threshold must be finite and nonnegative, got {gap_threshold}"
        )));
    }
    Ok(SweepConfig {
        drive: drive_for(omega12, omega13, omega23, phi, delta)?,
        beta_hot,
        beta_cold,
        pairing: pairing.into(),
        gap_threshold,
        path_samples,
    })
}

fn phase_grid(points: usize) -> Result<Vec<f64>, CliError> {
    if points == 0 {
        return Err(CliError::Usage("points must be at least 1".into()));
    }
    Ok(linspace(
        PHASE_GRID_OFFSET,
        TWO_PI - PHASE_GRID_OFFSET,
        points,
    ))
}

fn detuning_grid(points: usize) -> Result<Vec<f64>, CliError> {
    if points == 0 {
        return Err(CliError::Usage("points must be at least 1".into()));
    }
    Ok((1..=points).map(|k| k as f64 / points as f64).collect())
}

fn push_cycle_row(rows: &mut RowSet, param: f64, record: &CycleRecord) {
    let row = CycleRow::new(param, record);
    let line = row.csv();
    rows.push(&row, line);
    if !record.warnings.is_empty() {
        rows.warned_records += 1;
    }
}

fn spectrum_rows(p: &SpectrumParams) -> Result<RowSet, CliError> {
    let drive = drive_for(p.omega12, p.omega13, p.omega23, p.phi, p.delta)?
        .with_chirality(p.chirality.into());
    let mut rows = RowSet::new("param,E1,E2,E3");
    if p.grid == 1 {
        let param = match p.axis {
            AxisArg::Phase => drive.phi(),
            AxisArg::Detuning => drive.delta(),
        };
        let row = SpectrumRow::new(param, eigensystem(&build_hamiltonian(&drive)).values());
        let line = row.csv();
        rows.push(&row, line);
        return Ok(rows);
    }
    let fixed = match p.axis {
        AxisArg::Phase => p.delta,
        AxisArg::Detuning => p.phi,
    };
    let path = ControlPath::new(p.axis.into(), p.from, p.to, fixed, p.grid).map_err(domain)?;
    for (x, spectrum) in spectrum_along_path(&drive, &path) {
        let row = SpectrumRow::new(x, spectrum.values());
        let line = row.csv();
        rows.push(&row, line);
    }
    Ok(rows)
}

fn thermalize_rows(p: &ThermalizeParams) -> Result<RowSet, CliError> {
    let drive = drive_for(p.omega12, p.omega13, p.omega23, p.phi, p.delta)?
        .with_chirality(p.chirality.into());
    let occupation = match (p.mode, p.nbar) {
        (ModeArg::Bare, Some(nbar)) => OccupationModel::Fixed(nbar),
        (ModeArg::Bare, None) => {
            return Err(CliError::Usage(
                "bare mode needs an explicit mean occupation; pass --nbar".into(),
            ))
        }
        (ModeArg::Dressed, None) => OccupationModel::PerGapBose,
        (ModeArg::Dressed, Some(_)) => {
            return Err(CliError::Usage(
                "--nbar only applies to bare mode; dressed mode draws occupations from the bath temperature".into(),
            ))
        }
    };
    if !p.beta_init.is_finite() || p.beta_init < 0.0 {
        return Err(CliError::Usage(format!(
            "initial inverse temperature must be finite and nonnegative, got {}",
            p.beta_init
        )));
    }
    let bath = BathSpec::new(p.beta, p.kappa, occupation).map_err(domain)?;
    let mode = match p.mode {
        ModeArg::Dressed => BasisMode::Dressed,
        ModeArg::Bare => BasisMode::Bare,
    };
    let t_end = p.t_end.expect("resolved before execution");
    let rho0 = gibbs_state(&eigensystem(&build_hamiltonian(&drive)), p.beta_init);
    let trace = thermalization_trace(&drive, &bath, mode, &rho0, t_end, p.dt).map_err(domain)?;
    let mut rows = RowSet::new("t,epsilon,fidelity");
    for (&t, &eps) in trace.times.iter().zip(&trace.epsilons) {
        let row = ThermalizeRow::new(t, eps);
        let line = row.csv();
        rows.push(&row, line);
    }
    Ok(rows)
}
