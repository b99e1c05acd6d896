//! Dissipative isochore dynamics.
//!
//! The coupling to a bath is modeled by a Lindblad master equation
//!
//! ```text
//!   d rho / dt = -i [H, rho] + sum_k  r_k ( L_k rho L_k†  -  1/2 {L_k† L_k, rho} )
//! ```
//!
//! with jump operators built in one of two ways. `Bare` mode uses the
//! diabatic transition operators `|i><j|` (i < j) with a single bath
//! occupation number supplied explicitly, which is the form the master
//! equation is usually written in. `Dressed` mode builds the jumps between
//! instantaneous eigenstates with per-gap Bose occupations, whose detailed
//! balance guarantees the Gibbs state of `H` is stationary. Whether the bare
//! form actually thermalizes the driven molecule is checked empirically by
//! the tests rather than assumed (it does not, in general).
//!
//! Integration is fixed-step RK4. The generator is exactly traceless, so the
//! trace renormalization applied after every step only mops up roundoff; a
//! drift beyond [`TRACE_DRIFT_LIMIT`] in a single step means the integration
//! has gone wrong and aborts. Stored states are checked for positivity.

use crate::spectral::DriveParameters;
use crate::spectral::{hermitize, HermitianMatrix3, Spectrum, DEGENERACY_TOL};
use crate::thermo::{
    bose_occupation, fidelity, gibbs_state, BathSpec, DensityMatrix, OccupationModel,
};
use nalgebra::Matrix3;
use num_complex::Complex64;
use thiserror::Error;

/// Terminal distance `1 - F` below which a thermalization run counts as
/// converged.
pub const CONVERGENCE_EPSILON: f64 = 1e-4;

/// Largest tolerated single-step trace drift before renormalization.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-9;

/// Default system-bath coupling rate.
pub const DEFAULT_KAPPA: f64 = 0.05;

/// Default integrator step.
pub const DEFAULT_DT: f64 = 1e-3;

/// Upper bound on the number of trajectory samples kept in memory; longer
/// runs are subsampled with a uniform stride (the final state is always
/// kept).
const STORED_SAMPLES_MAX: usize = 2001;

#[derive(Debug, Error, PartialEq)]
pub enum LindbladError {
    #[error("dressed jump operators need a nondegenerate spectrum (smallest gap {0:.3e})")]
    DegenerateSpectrum(f64),
    #[error("Bose occupation overflows: beta * omega = {0:.3e} is not positive")]
    OccupationOverflow(f64),
    #[error("bare mode needs an explicit fixed occupation number")]
    BareNeedsFixedOccupation,
    #[error("time grid rejected: need finite 0 < dt <= t_end, got dt = {dt}, t_end = {t_end}")]
    InvalidTimeGrid { dt: f64, t_end: f64 },
    #[error("trace drifted by {drift:.3e} in one step at t = {t:.6}; integration aborted")]
    TraceDrift { t: f64, drift: f64 },
    #[error(
        "state lost positivity at t = {t:.6} (min eigenvalue {min_eig:.3e}); \
         the step dt = {dt} is too large for these rates"
    )]
    PositivityLost { t: f64, min_eig: f64, dt: f64 },
}

/// Basis the jump operators are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisMode {
    /// Diabatic transition operators `|i><j|`, one shared occupation number.
    Bare,
    /// Eigenbasis transition operators with per-gap occupations.
    Dressed,
}

impl BasisMode {
    pub fn label(self) -> &'static str {
        match self {
            BasisMode::Bare => "bare",
            BasisMode::Dressed => "dressed",
        }
    }
}

/// One jump channel pair: `emission_rate` weighs the dissipator of `op`
/// (which lowers energy), `absorption_rate` that of `op†`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    pub op: Matrix3<Complex64>,
    pub emission_rate: f64,
    pub absorption_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperatorSet {
    pub operators: Vec<JumpOperator>,
    pub basis: BasisMode,
}

/// Builds the jump operators for a bath acting on a molecule with the given
/// spectrum.
///
/// Bare mode ignores the spectrum and returns the three diabatic lowering
/// operators weighted by the bath's fixed occupation number. Dressed mode
/// pairs eigenstates `m < n`, with emission rate `kappa (nbar(w) + 1)` and
/// absorption rate `kappa nbar(w)` for gap `w = E_n - E_m`; it requires a
/// nondegenerate spectrum and, in per-gap mode, `beta w > 0`.
pub fn build_jump_operators(
    spectrum: &Spectrum,
    bath: &BathSpec,
    mode: BasisMode,
) -> Result<JumpOperatorSet, LindbladError> {
    let mut operators = Vec::with_capacity(3);
    match mode {
        BasisMode::Bare => {
            let nbar = match bath.occupation {
                OccupationModel::Fixed(n) => n,
                OccupationModel::PerGapBose => return Err(LindbladError::BareNeedsFixedOccupation),
            };
            for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
                let mut op = Matrix3::zeros();
                op[(i, j)] = Complex64::new(1.0, 0.0);
                operators.push(JumpOperator {
                    op,
                    emission_rate: bath.kappa * (nbar + 1.0),
                    absorption_rate: bath.kappa * nbar,
                });
            }
        }
        BasisMode::Dressed => {
            if spectrum.min_gap() < DEGENERACY_TOL {
                return Err(LindbladError::DegenerateSpectrum(spectrum.min_gap()));
            }
            for (m, n) in [(0usize, 1usize), (0, 2), (1, 2)] {
                let omega = spectrum.value(n) - spectrum.value(m);
                let nbar = match bath.occupation {
                    OccupationModel::Fixed(v) => v,
                    OccupationModel::PerGapBose => {
                        let x = bath.beta * omega;
                        if x <= 0.0 {
                            return Err(LindbladError::OccupationOverflow(x));
                        }
                        bose_occupation(bath.beta, omega)
                    }
                };
                let vm = spectrum.vector(m);
                let vn = spectrum.vector(n);
                operators.push(JumpOperator {
                    op: vm * vn.adjoint(),
                    emission_rate: bath.kappa * (nbar + 1.0),
                    absorption_rate: bath.kappa * nbar,
                });
            }
        }
    }
    Ok(JumpOperatorSet {
        operators,
        basis: mode,
    })
}

// one dissipator term with its products precomputed for the hot loop
struct Channel {
    l: Matrix3<Complex64>,
    ldag: Matrix3<Complex64>,
    ldl: Matrix3<Complex64>,
    rate: f64,
}

fn channels(jumps: &JumpOperatorSet) -> Vec<Channel> {
    let mut out = Vec::with_capacity(2 * jumps.operators.len());
    for j in &jumps.operators {
        let adj = j.op.adjoint();
        if j.emission_rate > 0.0 {
            out.push(Channel {
                l: j.op,
                ldag: adj,
                ldl: adj * j.op,
                rate: j.emission_rate,
            });
        }
        if j.absorption_rate > 0.0 {
            out.push(Channel {
                l: adj,
                ldag: j.op,
                ldl: j.op * adj,
                rate: j.absorption_rate,
            });
        }
    }
    out
}

fn rhs_raw(
    rho: &Matrix3<Complex64>,
    h: &Matrix3<Complex64>,
    chans: &[Channel],
) -> Matrix3<Complex64> {
    let minus_i = Complex64::new(0.0, -1.0);
    let half = Complex64::new(0.5, 0.0);
    let mut acc = (h * rho - rho * h) * minus_i;
    for c in chans {
        let sandwich = c.l * rho * c.ldag;
        let anti = c.ldl * rho + rho * c.ldl;
        acc += (sandwich - anti * half) * Complex64::new(c.rate, 0.0);
    }
    acc
}

/// Right-hand side of the master equation for a single state.
pub fn lindblad_rhs(
    rho: &DensityMatrix,
    h: &HermitianMatrix3,
    jumps: &JumpOperatorSet,
) -> Matrix3<Complex64> {
    rhs_raw(rho.matrix(), h.matrix(), &channels(jumps))
}

/// A stored, subsampled trajectory of the master equation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<DensityMatrix>,
    pub max_trace_drift: f64,
    pub dt: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds at least rho0")
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory holds at least rho0")
    }
}

/// Integrates the master equation with fixed-step RK4 from `rho0` for
/// `round(t_end / dt)` steps.
///
/// The state is re-hermitized and trace-renormalized after every step (both
/// are exact identities of the generator, so the corrections are roundoff
/// sized; a larger drift aborts). Long runs keep at most
/// ~2000 evenly strided samples plus the final state, and every stored state
/// is checked for positivity.
pub fn evolve(
    rho0: &DensityMatrix,
    h: &HermitianMatrix3,
    jumps: &JumpOperatorSet,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory, LindbladError> {
    if !(dt.is_finite() && t_end.is_finite()) || dt <= 0.0 || t_end < dt {
        return Err(LindbladError::InvalidTimeGrid { dt, t_end });
    }
    let steps = (t_end / dt).round().max(1.0) as usize;
    let stride = steps.div_ceil(STORED_SAMPLES_MAX - 1).max(1);

    let chans = channels(jumps);
    let hm = *h.matrix();
    let half_dt = Complex64::new(dt / 2.0, 0.0);
    let full_dt = Complex64::new(dt, 0.0);
    let sixth = Complex64::new(dt / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);

    let mut rho = *rho0.matrix();
    let mut times = Vec::with_capacity(steps / stride + 2);
    let mut states = Vec::with_capacity(steps / stride + 2);
    times.push(0.0);
    states.push(rho0.clone());
    let mut max_drift = 0.0f64;

    for k in 1..=steps {
        let k1 = rhs_raw(&rho, &hm, &chans);
        let k2 = rhs_raw(&(rho + k1 * half_dt), &hm, &chans);
        let k3 = rhs_raw(&(rho + k2 * half_dt), &hm, &chans);
        let k4 = rhs_raw(&(rho + k3 * full_dt), &hm, &chans);
        rho += (k1 + (k2 + k3) * two + k4) * sixth;
        rho = hermitize(&rho);

        let t = k as f64 * dt;
        let tr = rho.trace().re;
        let drift = (tr - 1.0).abs();
        if !drift.is_finite() || drift > TRACE_DRIFT_LIMIT {
            return Err(LindbladError::TraceDrift { t, drift });
        }
        max_drift = max_drift.max(drift);
        rho *= Complex64::new(1.0 / tr, 0.0);

        if k % stride == 0 || k == steps {
            let eigs = crate::thermo::hermitian_eigenvalues_of(&rho);
            if eigs[0] < -1e-8 {
                return Err(LindbladError::PositivityLost {
                    t,
                    min_eig: eigs[0],
                    dt,
                });
            }
            times.push(t);
            states.push(DensityMatrix::new_unchecked(rho));
        }
    }

    Ok(Trajectory {
        times,
        states,
        max_trace_drift: max_drift,
        dt,
        steps,
    })
}

/// Distance from thermal equilibrium along a dissipative evolution,
/// `epsilon(t) = 1 - F(rho(t), rho_thermal)`.
#[derive(Debug, Clone)]
pub struct ThermalizationTrace {
    pub times: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub converged: bool,
}

impl ThermalizationTrace {
    pub fn terminal_epsilon(&self) -> f64 {
        *self.epsilons.last().expect("trace holds at least t = 0")
    }
}

/// Evolves `rho0` under the bath attached to the molecule at drive point `p`
/// and records the distance to the Gibbs state of the same Hamiltonian.
///
/// Convergence means the terminal `epsilon` fell below
/// [`CONVERGENCE_EPSILON`].
pub fn thermalization_trace(
    p: &DriveParameters,
    bath: &BathSpec,
    mode: BasisMode,
    rho0: &DensityMatrix,
    t_end: f64,
    dt: f64,
) -> Result<ThermalizationTrace, LindbladError> {
    let h = crate::spectral::build_hamiltonian(p);
    let spectrum = crate::spectral::eigensystem(&h);
    let jumps = build_jump_operators(&spectrum, bath, mode)?;
    let target = gibbs_state(&spectrum, bath.beta);
    let traj = evolve(rho0, &h, &jumps, t_end, dt)?;
    let epsilons: Vec<f64> = traj
        .states()
        .iter()
        .map(|s| (1.0 - fidelity(s, &target)).clamp(0.0, 1.0))
        .collect();
    let converged = *epsilons.last().expect("nonempty") < CONVERGENCE_EPSILON;
    Ok(ThermalizationTrace {
        times: traj.times().to_vec(),
        epsilons,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_hamiltonian, eigensystem, Chirality, DriveParameters};
    use crate::thermo::gibbs_populations;
    use std::f64::consts::PI;

    fn demo_spectrum() -> (HermitianMatrix3, Spectrum) {
        let p = DriveParameters::new(Chirality::Left, PI / 2.0, 0.1).unwrap();
        let h = build_hamiltonian(&p);
        let s = eigensystem(&h);
        (h, s)
    }

    #[test]
    fn bare_mode_builds_the_three_diabatic_channels() {
        let (_, s) = demo_spectrum();
        let bath = BathSpec::new(1.0, 0.05, OccupationModel::Fixed(0.5)).unwrap();
        let set = build_jump_operators(&s, &bath, BasisMode::Bare).unwrap();
        assert_eq!(set.operators.len(), 3);
        for (k, (i, j)) in [(0usize, 1usize), (0, 2), (1, 2)].iter().enumerate() {
            let op = &set.operators[k].op;
            assert_eq!(op[(*i, *j)], Complex64::new(1.0, 0.0));
            assert!((set.operators[k].emission_rate - 0.075).abs() < 1e-15);
            assert!((set.operators[k].absorption_rate - 0.025).abs() < 1e-15);
        }
    }

    #[test]
    fn bare_mode_without_fixed_occupation_is_rejected() {
        let (_, s) = demo_spectrum();
        let bath = BathSpec::new(1.0, 0.05, OccupationModel::PerGapBose).unwrap();
        assert_eq!(
            build_jump_operators(&s, &bath, BasisMode::Bare).unwrap_err(),
            LindbladError::BareNeedsFixedOccupation
        );
    }

    #[test]
    fn dressed_mode_uses_per_gap_bose_occupations() {
        let (_, s) = demo_spectrum();
        let bath = BathSpec::new(1.0, 0.05, OccupationModel::PerGapBose).unwrap();
        let set = build_jump_operators(&s, &bath, BasisMode::Dressed).unwrap();
        assert_eq!(set.operators.len(), 3);
        for (k, (m, n)) in [(0usize, 1usize), (0, 2), (1, 2)].iter().enumerate() {
            let w = s.value(*n) - s.value(*m);
            let nbar = bose_occupation(1.0, w);
            assert!((set.operators[k].emission_rate - 0.05 * (nbar + 1.0)).abs() < 1e-15);
            assert!((set.operators[k].absorption_rate - 0.05 * nbar).abs() < 1e-15);
            // the jump really maps eigenstate n onto eigenstate m
            let mapped = set.operators[k].op * s.vector(*n);
            assert!((mapped - s.vector(*m)).norm() < 1e-12);
        }
    }

    #[test]
    fn dressed_mode_rejects_degenerate_spectra_and_zero_beta() {
        let p = DriveParameters::new(Chirality::Left, 0.0, 0.0).unwrap();
        let s = eigensystem(&build_hamiltonian(&p));
        let bath = BathSpec::new(1.0, 0.05, OccupationModel::PerGapBose).unwrap();
        assert!(matches!(
            build_jump_operators(&s, &bath, BasisMode::Dressed),
            Err(LindbladError::DegenerateSpectrum(_))
        ));
        let (_, s) = demo_spectrum();
        let bath0 = BathSpec::new(0.0, 0.05, OccupationModel::PerGapBose).unwrap();
        assert!(matches!(
            build_jump_operators(&s, &bath0, BasisMode::Dressed),
            Err(LindbladError::OccupationOverflow(_))
        ));
    }

    #[test]
    fn gibbs_state_is_stationary_under_dressed_jumps() {
        let (h, s) = demo_spectrum();
        let bath = BathSpec::new(1.0, 0.05, OccupationModel::PerGapBose).unwrap();
        let jumps = build_jump_operators(&s, &bath, BasisMode::Dressed).unwrap();
        let rho = gibbs_state(&s, 1.0);
        let deriv = lindblad_rhs(&rho, &h, &jumps);
        assert!(deriv.norm() < 1e-10, "residual {}", deriv.norm());
    }

    #[test]
    fn rhs_is_traceless_and_hermiticity_preserving() {
        let (h, s) = demo_spectrum();
        let bath = BathSpec::new(0.7, 0.2, OccupationModel::PerGapBose).unwrap();
        let jumps = build_jump_operators(&s, &bath, BasisMode::Dressed).unwrap();
        let rho = gibbs_state(&s, 0.05);
        let d = lindblad_rhs(&rho, &h, &jumps);
        assert!(d.trace().norm() < 1e-14);
        assert!((d - hermitize(&d)).norm() < 1e-14);
    }

    #[test]
    fn undriven_excited_population_decays_exponentially() {
        // no drive, zero-occupation bath: the middle level empties at rate
        // kappa with nothing feeding back
        let p = DriveParameters::new(Chirality::Left, 0.0, 0.3)
            .unwrap()
            .with_rabi(0.0, 0.0, 0.0)
            .unwrap();
        let h = build_hamiltonian(&p);
        let s = eigensystem(&h);
        let kappa = 0.25;
        let bath = BathSpec::new(1.0, kappa, OccupationModel::Fixed(0.0)).unwrap();
        let jumps = build_jump_operators(&s, &bath, BasisMode::Bare).unwrap();
        let rho0 = DensityMatrix::basis_state(1);
        let traj = evolve(&rho0, &h, &jumps, 10.0, 1e-3).unwrap();
        for (t, state) in traj.times().iter().zip(traj.states()) {
            let want = (-kappa * t).exp();
            assert!(
                (state.population(1) - want).abs() < 1e-9,
                "t = {t}: {} vs {want}",
                state.population(1)
            );
        }
        assert!(traj.max_trace_drift < 1e-12);
    }

    #[test]
    fn dressed_evolution_thermalizes_from_both_sides() {
        let p = DriveParameters::new(Chirality::Left, PI / 2.0, 0.1).unwrap();
        let kappa = 0.5;
        let bath = BathSpec::new(1.0, kappa, OccupationModel::PerGapBose).unwrap();
        let (_, s) = demo_spectrum();
        let hot = gibbs_state(&s, 0.01);
        let trace =
            thermalization_trace(&p, &bath, BasisMode::Dressed, &hot, 50.0 / kappa, 1e-3).unwrap();
        assert!(trace.converged, "terminal eps {}", trace.terminal_epsilon());
        assert!(trace.terminal_epsilon() < CONVERGENCE_EPSILON);
        // epsilon must not grow over the tail of the run
        let n = trace.epsilons.len();
        let tail = &trace.epsilons[n - n / 10..];
        for w in tail.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn step_halving_shows_fourth_order_convergence() {
        let (h, s) = demo_spectrum();
        let bath = BathSpec::new(1.0, 0.5, OccupationModel::PerGapBose).unwrap();
        let jumps = build_jump_operators(&s, &bath, BasisMode::Dressed).unwrap();
        let rho0 = gibbs_state(&s, 0.01);
        let t_end = 2.0;
        let reference = evolve(&rho0, &h, &jumps, t_end, t_end / 1600.0).unwrap();
        let coarse = evolve(&rho0, &h, &jumps, t_end, 0.02).unwrap();
        let fine = evolve(&rho0, &h, &jumps, t_end, 0.01).unwrap();
        let err =
            |t: &Trajectory| (t.final_state().matrix() - reference.final_state().matrix()).norm();
        let ratio = err(&coarse) / err(&fine);
        // fourth order means a factor of 16 per halving; allow a factor-4 band
        assert!(
            (4.0..=64.0).contains(&ratio),
            "convergence ratio {ratio}, errors {} / {}",
            err(&coarse),
            err(&fine)
        );
    }

    #[test]
    fn oversized_steps_abort_instead_of_returning_garbage() {
        let (h, s) = demo_spectrum();
        // hot bath: occupations near 60 push the fastest rate well past 1/dt
        let bath = BathSpec::new(0.01, 0.5, OccupationModel::PerGapBose).unwrap();
        let jumps = build_jump_operators(&s, &bath, BasisMode::Dressed).unwrap();
        let rho0 = DensityMatrix::maximally_mixed();
        let out = evolve(&rho0, &h, &jumps, 50.0, 0.5);
        assert!(
            matches!(
                out,
                Err(LindbladError::PositivityLost { .. }) | Err(LindbladError::TraceDrift { .. })
            ),
            "expected an instability abort"
        );
    }

    #[test]
    fn time_grid_validation() {
        let (h, s) = demo_spectrum();
        let bath = BathSpec::new(1.0, 0.05, OccupationModel::PerGapBose).unwrap();
        let jumps = build_jump_operators(&s, &bath, BasisMode::Dressed).unwrap();
        let rho0 = DensityMatrix::maximally_mixed();
        assert!(matches!(
            evolve(&rho0, &h, &jumps, 1.0, 0.0),
            Err(LindbladError::InvalidTimeGrid { .. })
        ));
        assert!(matches!(
            evolve(&rho0, &h, &jumps, 0.5, 1.0),
            Err(LindbladError::InvalidTimeGrid { .. })
        ));
    }

    #[test]
    fn trajectories_subsample_long_runs_but_keep_endpoints() {
        let (h, s) = demo_spectrum();
        let bath = BathSpec::new(1.0, 0.05, OccupationModel::PerGapBose).unwrap();
        let jumps = build_jump_operators(&s, &bath, BasisMode::Dressed).unwrap();
        let rho0 = gibbs_state(&s, 0.2);
        let traj = evolve(&rho0, &h, &jumps, 10.0, 1e-3).unwrap();
        assert_eq!(traj.steps, 10_000);
        assert!(traj.len() <= STORED_SAMPLES_MAX + 1);
        assert_eq!(traj.times()[0], 0.0);
        assert!((traj.final_time() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn bare_relaxation_is_recorded_without_a_convergence_claim() {
        // the diabatic dissipator reaches a steady state of its own; how far
        // that lies from the dressed Gibbs state is measured, not asserted
        let p = DriveParameters::new(Chirality::Left, PI / 2.0, 0.1).unwrap();
        let bath = BathSpec::new(1.0, 0.5, OccupationModel::Fixed(0.582)).unwrap();
        let (_, s) = demo_spectrum();
        let hot = gibbs_state(&s, 0.01);
        let trace = thermalization_trace(&p, &bath, BasisMode::Bare, &hot, 100.0, 1e-3).unwrap();
        let terminal = trace.terminal_epsilon();
        assert!((0.0..=1.0).contains(&terminal));
        println!("bare-basis terminal epsilon: {terminal:.6}");
    }

    #[test]
    fn gibbs_populations_are_the_fixed_point_weights() {
        // under dressed jumps the stationary populations match Gibbs exactly,
        // so long evolution from anywhere lands on them
        let kappa = 0.5;
        let bath = BathSpec::new(1.0, kappa, OccupationModel::PerGapBose).unwrap();
        let (h, s) = demo_spectrum();
        let jumps = build_jump_operators(&s, &bath, BasisMode::Dressed).unwrap();
        let rho0 = DensityMatrix::basis_state(0);
        let traj = evolve(&rho0, &h, &jumps, 50.0 / kappa, 1e-3).unwrap();
        let p_want = gibbs_populations(&s, 1.0);
        let rho_end = traj.final_state();
        for n in 0..3 {
            let v = s.vector(n);
            let got = (v.adjoint() * rho_end.matrix() * v)[(0, 0)].re;
            assert!((got - p_want.get(n)).abs() < 1e-8, "level {n}");
        }
    }
}
