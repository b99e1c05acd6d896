//! Quantum Otto cycles that tell left-handed molecules from right-handed ones.
//!
//! A cyclic three-level molecule driven on all three transitions picks up a
//! handedness-dependent sign in its closed-loop coupling. Running a quantum
//! Otto cycle whose strokes move the drive phase or the detuning therefore
//! produces different heat and work for the two mirror images of the same
//! molecule, up to the point of putting them into different operating regimes
//! (one an engine, the other a thermal accelerator). This crate implements
//! the pieces of that protocol:
//!
//! * [`spectral`]: the drive Hamiltonian, its eigensystem with deterministic
//!   conventions, control paths, gap scans and endpoint-state pairing.
//! * [`thermo`]: Gibbs populations and states, fidelity, the isochore heat
//!   bookkeeping and the operating-regime classification.
//! * [`lindblad`]: dissipative dynamics of the isochores, with jump operators
//!   built either in the bare basis or in the instantaneous eigenbasis, and a
//!   fixed-step integrator with trace and positivity guards.
//! * [`cycle`]: the quasi-static Otto cycle itself, parameter sweeps over
//!   phase and detuning grids, efficiency maps and the left/right
//!   discrimination verdict.
//!
//! Throughout, energies are in units of a reference quantum `E0`, `hbar = 1`,
//! and times are in units of `1/E0`.

pub mod cycle;
pub mod lindblad;
pub mod spectral;
pub mod thermo;

pub use cycle::{
    default_detuning_grid, default_phase_grid, discriminate, efficiency_vs_phase, linspace,
    run_cycle, sweep_detuning, sweep_phase, CycleConfig, CycleError, CycleRecord, CycleWarning,
    DiscriminationReport, DistinguishedBy, SweepConfig, SweepPoint, DEFAULT_BETA_COLD,
    DEFAULT_BETA_HOT, DEFAULT_GAP_THRESHOLD, DEFAULT_PATH_SAMPLES, DEFAULT_SWEEP_POINTS,
    PHASE_GRID_OFFSET, WORK_TOLERANCE,
};
pub use lindblad::{
    build_jump_operators, evolve, lindblad_rhs, thermalization_trace, BasisMode, JumpOperator,
    JumpOperatorSet, LindbladError, ThermalizationTrace, Trajectory, CONVERGENCE_EPSILON,
    DEFAULT_DT, DEFAULT_KAPPA, TRACE_DRIFT_LIMIT,
};
pub use spectral::{
    build_hamiltonian, eigensystem, min_gap_along_path, pair_endpoint_states, spectrum_along_path,
    Chirality, ControlParameter, ControlPath, DriveParameters, HermitianMatrix3, MinGap, Pairing,
    PairingAmbiguity, PairingMode, SpectralError, Spectrum, TWO_PI,
};
pub use thermo::{
    classify_regime, efficiency, fidelity, gibbs_populations, gibbs_state, heat_cold, heat_hot,
    work_from_spectra, work_net, BathSpec, DensityMatrix, OccupationModel, Populations,
    RegimeLabel, ThermoError, TIE_TOLERANCE,
};
