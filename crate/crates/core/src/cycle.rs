//! The quasi-static Otto cycle and the left/right discrimination sweeps.
//!
//! One cycle runs between two points A and B of control space (two values of
//! the drive phase or of the detuning):
//!
//! 1. at A, in contact with the cold bath, the molecule starts in the cold
//!    Gibbs distribution of the spectrum at A;
//! 2. the hot isochore rethermalizes it at A to the hot distribution,
//!    absorbing `Q_hot = sum_n E_n(A) (p_hot_n - p_cold_n)`;
//! 3. the stroke A -> B is quasi-static, populations frozen, only the
//!    energies relabel;
//! 4. the cold isochore at B undoes the population swing, exchanging
//!    `Q_cold = -sum_n E_n(B) (p_hot_n - p_cold_n)` with the cold bath, and
//!    the return stroke closes the cycle.
//!
//! Both heats share one population difference, so the first law
//! `W = Q_hot + Q_cold = sum_n (E_n(A) - E_n(B)) (p_hot_n - p_cold_n)`
//! holds to machine precision by construction. Which eigenvalue of B a level
//! of A maps onto is the pairing question; `Sorted` keeps the ascending
//! order, `Continuity` follows eigenvectors along the path. The two agree
//! whenever every crossing along the path is avoided, which is what the
//! minimum-gap scan and its warning threshold are for.

use crate::spectral::{
    min_gap_of_scan, pair_endpoint_states, spectrum_along_path, Chirality, ControlParameter,
    ControlPath, DriveParameters, PairingMode, SpectralError, DEGENERACY_TOL, TWO_PI,
};
use crate::thermo::{
    classify_regime, efficiency, gibbs_populations, heat_hot, work_net, RegimeLabel,
};
use rayon::prelude::*;
use std::fmt;
use thiserror::Error;

/// Default hot-bath inverse temperature (nearly infinite temperature).
pub const DEFAULT_BETA_HOT: f64 = 0.01;

/// Default cold-bath inverse temperature.
pub const DEFAULT_BETA_COLD: f64 = 1.0;

/// A cycle whose smallest gap along the path falls below this is flagged:
/// the quasi-static stroke assumption is doubtful near a crossing.
pub const DEFAULT_GAP_THRESHOLD: f64 = 1e-3;

/// Default resolution of the per-cycle path scan.
pub const DEFAULT_PATH_SAMPLES: usize = 2001;

/// Default number of grid points in the parameter sweeps.
pub const DEFAULT_SWEEP_POINTS: usize = 201;

/// Default phase grids stay this far away from the exact crossing points at
/// 0 and 2 pi.
pub const PHASE_GRID_OFFSET: f64 = 1e-3;

/// Work difference below which two cycles are not considered distinguishable
/// by work alone.
pub const WORK_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum CycleError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(
        "bath temperatures must be finite and nonnegative, got beta_hot = {0}, beta_cold = {1}"
    )]
    InvalidBeta(f64, f64),
    #[error("hot bath must not be colder than the cold bath: beta_hot = {0} > beta_cold = {1}")]
    BathOrdering(f64, f64),
    #[error("gap threshold must be finite and nonnegative, got {0}")]
    InvalidGapThreshold(f64),
    #[error("cycle records are not comparable: {0} differs")]
    ConfigMismatch(&'static str),
}

/// Everything needed to run one cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleConfig {
    drive: DriveParameters,
    path: ControlPath,
    beta_hot: f64,
    beta_cold: f64,
    pairing: PairingMode,
    gap_threshold: f64,
}

impl CycleConfig {
    /// `drive` supplies the couplings and the handedness; the swept and the
    /// pinned control values come from `path`. Allows `beta_hot ==
    /// beta_cold` (a degenerate cycle with zero heats), rejects a hot bath
    /// colder than the cold one.
    pub fn new(
        drive: DriveParameters,
        path: ControlPath,
        beta_hot: f64,
        beta_cold: f64,
    ) -> Result<Self, CycleError> {
        let bad = |x: f64| !x.is_finite() || x < 0.0;
        if bad(beta_hot) || bad(beta_cold) {
            return Err(CycleError::InvalidBeta(beta_hot, beta_cold));
        }
        if beta_hot > beta_cold {
            return Err(CycleError::BathOrdering(beta_hot, beta_cold));
        }
        Ok(CycleConfig {
            drive,
            path,
            beta_hot,
            beta_cold,
            pairing: PairingMode::Sorted,
            gap_threshold: DEFAULT_GAP_THRESHOLD,
        })
    }

    pub fn with_pairing(mut self, pairing: PairingMode) -> Self {
        self.pairing = pairing;
        self
    }

    pub fn with_gap_threshold(mut self, threshold: f64) -> Result<Self, CycleError> {
        if !threshold.is_finite() || threshold < 0.0 {
            return Err(CycleError::InvalidGapThreshold(threshold));
        }
        self.gap_threshold = threshold;
        Ok(self)
    }

    pub fn drive(&self) -> &DriveParameters {
        &self.drive
    }

    pub fn path(&self) -> &ControlPath {
        &self.path
    }

    pub fn beta_hot(&self) -> f64 {
        self.beta_hot
    }

    pub fn beta_cold(&self) -> f64 {
        self.beta_cold
    }

    pub fn pairing(&self) -> PairingMode {
        self.pairing
    }

    pub fn gap_threshold(&self) -> f64 {
        self.gap_threshold
    }
}

/// Non-fatal observations attached to a cycle record.
#[derive(Debug, Clone, PartialEq)]
pub enum CycleWarning {
    /// The smallest gap along the path fell below the configured threshold.
    SmallGap { gap: f64, at: f64, threshold: f64 },
    /// An endpoint spectrum is degenerate, so its level ordering is
    /// arbitrary.
    DegenerateEndpoint { endpoint: &'static str, gap: f64 },
    /// The continuity tracker hit steps where the best eigenvector match was
    /// nearly a tie.
    PairingAmbiguity {
        count: usize,
        worst_at: f64,
        worst_margin: f64,
    },
    /// Following eigenvectors along the path ends in a different level
    /// assignment than sorting by energy.
    PairingDisagreement { permutation: [usize; 3] },
}

impl fmt::Display for CycleWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CycleWarning::SmallGap { gap, at, threshold } => write!(
                f,
                "minimum gap {gap:.3e} at parameter {at:.6} is below the threshold {threshold:.1e}; \
                 the quasi-static stroke assumption is doubtful here"
            ),
            CycleWarning::DegenerateEndpoint { endpoint, gap } => write!(
                f,
                "spectrum at the {endpoint} of the path is degenerate (gap {gap:.3e})"
            ),
            CycleWarning::PairingAmbiguity {
                count,
                worst_at,
                worst_margin,
            } => write!(
                f,
                "eigenvector continuity was ambiguous at {count} step(s), worst margin \
                 {worst_margin:.3e} at parameter {worst_at:.6}"
            ),
            CycleWarning::PairingDisagreement { permutation } => write!(
                f,
                "continuity pairing permutes the levels as {permutation:?}, disagreeing with \
                 the sorted convention"
            ),
        }
    }
}

/// Outcome of one cycle: configuration echo, endpoint data, heats, work,
/// efficiency (engines only), regime and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub chirality: Chirality,
    pub control: ControlParameter,
    pub start: f64,
    pub end: f64,
    pub fixed: f64,
    pub rabi: [f64; 3],
    pub beta_hot: f64,
    pub beta_cold: f64,
    pub pairing: PairingMode,
    pub spectrum_a: [f64; 3],
    pub spectrum_b: [f64; 3],
    pub pops_hot: [f64; 3],
    pub pops_cold: [f64; 3],
    /// Level `n` at A is paired with level `permutation[n]` at B.
    pub permutation: [usize; 3],
    pub q_hot: f64,
    pub q_cold: f64,
    pub work: f64,
    pub eta_percent: Option<f64>,
    pub regime: RegimeLabel,
    pub min_gap: f64,
    pub min_gap_at: f64,
    pub warnings: Vec<CycleWarning>,
}

/// Runs one quasi-static Otto cycle.
///
/// Scans the spectrum along the whole path (for the minimum gap and the
/// continuity tracking), takes the endpoint spectra, forms the two Gibbs
/// distributions on the starting spectrum and books the heats as described
/// in the module docs. Efficiency is reported for engine runs only.
pub fn run_cycle(cfg: &CycleConfig) -> Result<CycleRecord, CycleError> {
    let scan = spectrum_along_path(&cfg.drive, &cfg.path);
    let min_gap = min_gap_of_scan(&scan);
    let continuity = pair_endpoint_states(&scan, PairingMode::Continuity);
    let permutation = match cfg.pairing {
        PairingMode::Sorted => [0, 1, 2],
        PairingMode::Continuity => continuity.permutation,
    };

    let spectrum_a = &scan.first().expect("paths have >= 2 samples").1;
    let spectrum_b = &scan.last().expect("paths have >= 2 samples").1;

    let mut warnings = Vec::new();
    if min_gap.gap < cfg.gap_threshold {
        warnings.push(CycleWarning::SmallGap {
            gap: min_gap.gap,
            at: min_gap.at,
            threshold: cfg.gap_threshold,
        });
    }
    for (endpoint, s) in [("start", spectrum_a), ("end", spectrum_b)] {
        if s.min_gap() < DEGENERACY_TOL {
            warnings.push(CycleWarning::DegenerateEndpoint {
                endpoint,
                gap: s.min_gap(),
            });
        }
    }
    if cfg.pairing == PairingMode::Continuity && !continuity.ambiguities.is_empty() {
        let worst = continuity
            .ambiguities
            .iter()
            .min_by(|a, b| a.margin.partial_cmp(&b.margin).unwrap())
            .expect("nonempty");
        warnings.push(CycleWarning::PairingAmbiguity {
            count: continuity.ambiguities.len(),
            worst_at: worst.at,
            worst_margin: worst.margin,
        });
    }
    if !continuity.is_identity() {
        warnings.push(CycleWarning::PairingDisagreement {
            permutation: continuity.permutation,
        });
    }

    let pops_hot = gibbs_populations(spectrum_a, cfg.beta_hot);
    let pops_cold = gibbs_populations(spectrum_a, cfg.beta_cold);
    let q_hot = heat_hot(spectrum_a, &pops_hot, &pops_cold);
    let q_cold: f64 = (0..3)
        .map(|n| spectrum_b.value(permutation[n]) * (pops_cold.get(n) - pops_hot.get(n)))
        .sum();
    let work = work_net(q_hot, q_cold);
    let regime = classify_regime(work, q_hot, q_cold);
    let eta_percent = match regime {
        RegimeLabel::Engine => {
            Some(efficiency(work, q_hot).expect("engine regime implies positive hot heat"))
        }
        _ => None,
    };

    Ok(CycleRecord {
        chirality: cfg.drive.chirality(),
        control: cfg.path.parameter(),
        start: cfg.path.start(),
        end: cfg.path.end(),
        fixed: cfg.path.fixed_other(),
        rabi: cfg.drive.rabi(),
        beta_hot: cfg.beta_hot,
        beta_cold: cfg.beta_cold,
        pairing: cfg.pairing,
        spectrum_a: spectrum_a.values(),
        spectrum_b: spectrum_b.values(),
        pops_hot: pops_hot.as_array(),
        pops_cold: pops_cold.as_array(),
        permutation,
        q_hot,
        q_cold,
        work,
        eta_percent,
        regime,
        min_gap: min_gap.gap,
        min_gap_at: min_gap.at,
        warnings,
    })
}

/// Shared settings for the paired left/right sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    /// Couplings template; the handedness field is overridden per enantiomer.
    pub drive: DriveParameters,
    pub beta_hot: f64,
    pub beta_cold: f64,
    pub pairing: PairingMode,
    pub gap_threshold: f64,
    pub path_samples: usize,
}

impl SweepConfig {
    pub fn new(drive: DriveParameters) -> Self {
        SweepConfig {
            drive,
            beta_hot: DEFAULT_BETA_HOT,
            beta_cold: DEFAULT_BETA_COLD,
            pairing: PairingMode::Sorted,
            gap_threshold: DEFAULT_GAP_THRESHOLD,
            path_samples: DEFAULT_PATH_SAMPLES,
        }
    }
}

/// One grid point of a sweep: the same cycle run for both enantiomers.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub x: f64,
    pub left: CycleRecord,
    pub right: CycleRecord,
}

fn paired_cycle(cfg: &SweepConfig, path: ControlPath, x: f64) -> Result<SweepPoint, CycleError> {
    let run = |chirality| -> Result<CycleRecord, CycleError> {
        let drive = cfg.drive.with_chirality(chirality);
        let cycle = CycleConfig::new(drive, path, cfg.beta_hot, cfg.beta_cold)?
            .with_pairing(cfg.pairing)
            .with_gap_threshold(cfg.gap_threshold)?;
        run_cycle(&cycle)
    };
    Ok(SweepPoint {
        x,
        left: run(Chirality::Left)?,
        right: run(Chirality::Right)?,
    })
}

/// Phase-driven cycles `phi1 -> phi2` for every `phi2` in `grid`, at fixed
/// detuning, for both enantiomers. Grid points are independent and run in
/// parallel; results come back in grid order.
pub fn sweep_phase(
    cfg: &SweepConfig,
    phi1: f64,
    delta: f64,
    grid: &[f64],
) -> Result<Vec<SweepPoint>, CycleError> {
    grid.par_iter()
        .map(|&phi2| {
            let path =
                ControlPath::new(ControlParameter::Phase, phi1, phi2, delta, cfg.path_samples)?;
            paired_cycle(cfg, path, phi2)
        })
        .collect()
}

/// Detuning-driven cycles `delta1 -> delta2` for every `delta2` in `grid`,
/// at fixed phase, for both enantiomers.
pub fn sweep_detuning(
    cfg: &SweepConfig,
    delta1: f64,
    phi: f64,
    grid: &[f64],
) -> Result<Vec<SweepPoint>, CycleError> {
    grid.par_iter()
        .map(|&delta2| {
            let path = ControlPath::new(
                ControlParameter::Detuning,
                delta1,
                delta2,
                phi,
                cfg.path_samples,
            )?;
            paired_cycle(cfg, path, delta2)
        })
        .collect()
}

/// The same detuning cycle run at every phase of `phi_grid`, for both
/// enantiomers. The efficiency landscape over phase comes from the
/// `eta_percent` fields of the records.
pub fn efficiency_vs_phase(
    cfg: &SweepConfig,
    delta1: f64,
    delta2: f64,
    phi_grid: &[f64],
) -> Result<Vec<SweepPoint>, CycleError> {
    phi_grid
        .par_iter()
        .map(|&phi| {
            let path = ControlPath::new(
                ControlParameter::Detuning,
                delta1,
                delta2,
                phi,
                cfg.path_samples,
            )?;
            paired_cycle(cfg, path, phi)
        })
        .collect()
}

/// Uniform inclusive grid; `points == 1` collapses to `[start]`.
pub fn linspace(start: f64, end: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![start];
    }
    let step = (end - start) / (points - 1) as f64;
    (0..points)
        .map(|k| {
            if k == points - 1 {
                end
            } else {
                start + step * k as f64
            }
        })
        .collect()
}

/// The default phase grid: [`DEFAULT_SWEEP_POINTS`] points spanning
/// `[offset, 2 pi - offset]`, symmetric about pi (which it contains).
pub fn default_phase_grid() -> Vec<f64> {
    linspace(
        PHASE_GRID_OFFSET,
        TWO_PI - PHASE_GRID_OFFSET,
        DEFAULT_SWEEP_POINTS,
    )
}

/// The default detuning grid: `k / N` for `k = 1..=N`, covering `(0, 1]`.
pub fn default_detuning_grid() -> Vec<f64> {
    (1..=DEFAULT_SWEEP_POINTS)
        .map(|k| k as f64 / DEFAULT_SWEEP_POINTS as f64)
        .collect()
}

/// What told the two enantiomers apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistinguishedBy {
    /// They sit in different operating regimes.
    Regime,
    /// Same regime, but the works differ by more than [`WORK_TOLERANCE`].
    WorkGap,
}

/// Verdict of comparing the same cycle run on the two enantiomers.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminationReport {
    pub regimes: (RegimeLabel, RegimeLabel),
    pub delta_work: f64,
    pub delta_eta: Option<f64>,
    pub distinguishable: bool,
    pub reason: Option<DistinguishedBy>,
}

/// Compares a left-handed record against a right-handed one from the same
/// cycle configuration.
///
/// Rejects pairs whose non-chirality configuration differs (they would not
/// be measuring the same protocol). Regime disagreement counts as
/// distinguishable outright; otherwise the work gap must clear
/// [`WORK_TOLERANCE`].
pub fn discriminate(
    left: &CycleRecord,
    right: &CycleRecord,
) -> Result<DiscriminationReport, CycleError> {
    if left.chirality != Chirality::Left || right.chirality != Chirality::Right {
        return Err(CycleError::ConfigMismatch("chirality assignment"));
    }
    if left.control != right.control {
        return Err(CycleError::ConfigMismatch("control parameter"));
    }
    if (left.start, left.end, left.fixed) != (right.start, right.end, right.fixed) {
        return Err(CycleError::ConfigMismatch("control path"));
    }
    if left.rabi != right.rabi {
        return Err(CycleError::ConfigMismatch("Rabi couplings"));
    }
    if (left.beta_hot, left.beta_cold) != (right.beta_hot, right.beta_cold) {
        return Err(CycleError::ConfigMismatch("bath temperatures"));
    }
    if left.pairing != right.pairing {
        return Err(CycleError::ConfigMismatch("pairing mode"));
    }

    let delta_work = left.work - right.work;
    let delta_eta = match (left.eta_percent, right.eta_percent) {
        (Some(l), Some(r)) => Some(l - r),
        _ => None,
    };
    let (distinguishable, reason) = if left.regime != right.regime {
        (true, Some(DistinguishedBy::Regime))
    } else if delta_work.abs() > WORK_TOLERANCE {
        (true, Some(DistinguishedBy::WorkGap))
    } else {
        (false, None)
    };
    Ok(DiscriminationReport {
        regimes: (left.regime, right.regime),
        delta_work,
        delta_eta,
        distinguishable,
        reason,
    })
}
