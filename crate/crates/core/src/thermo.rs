//! Thermal states, fidelity and the isochore heat bookkeeping.
//!
//! The cycle layer treats the two isochores as classical population updates
//! between Gibbs distributions while the work strokes only relabel energies,
//! so everything here is small and exact: populations over three levels,
//! density matrices built from them, Uhlmann fidelity for judging how close a
//! dissipative evolution got to its thermal target, and the sign bookkeeping
//! that turns heats into an operating regime.
//!
//! Sign conventions: heat absorbed by the molecule is positive, so an engine
//! run has `Q_hot >= 0`, `Q_cold <= 0` and net work `W = Q_hot + Q_cold <= 0`.

use crate::spectral::{eigensystem, hermitize, HermitianMatrix3, Spectrum};
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use thiserror::Error;

/// Anything smaller in magnitude is treated as zero when classifying regimes
/// or guarding divisions.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ThermoError {
    #[error("efficiency undefined: hot-isochore heat {0} is not positive")]
    UndefinedEfficiency(f64),
    #[error("populations must lie in [0,1] and sum to 1, got sum {0}")]
    InvalidPopulations(f64),
    #[error("density matrix rejected: {0}")]
    InvalidDensityMatrix(&'static str),
    #[error("bath parameters must be finite and nonnegative (beta = {beta}, kappa = {kappa})")]
    InvalidBath { beta: f64, kappa: f64 },
}

/// How the bath occupation number entering the jump rates is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OccupationModel {
    /// Bose-Einstein occupation of each transition gap at the bath inverse
    /// temperature.
    PerGapBose,
    /// One occupation number applied to every jump channel.
    Fixed(f64),
}

/// A thermal bath: inverse temperature, system-bath coupling rate and the
/// occupation model used when building jump operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub beta: f64,
    pub kappa: f64,
    pub occupation: OccupationModel,
}

impl BathSpec {
    pub fn new(beta: f64, kappa: f64, occupation: OccupationModel) -> Result<Self, ThermoError> {
        let bad = |x: f64| !x.is_finite() || x < 0.0;
        if bad(beta) || bad(kappa) {
            return Err(ThermoError::InvalidBath { beta, kappa });
        }
        if let OccupationModel::Fixed(n) = occupation {
            if bad(n) {
                return Err(ThermoError::InvalidBath { beta, kappa: n });
            }
        }
        Ok(BathSpec {
            beta,
            kappa,
            occupation,
        })
    }
}

/// Bose-Einstein occupation `1 / (e^{beta omega} - 1)`.
///
/// Callers are expected to keep `beta * omega > 0`; the expression itself is
/// evaluated with `expm1` so small products stay accurate.
pub fn bose_occupation(beta: f64, omega: f64) -> f64 {
    1.0 / (beta * omega).exp_m1()
}

/// Level populations: three numbers in `[0, 1]` summing to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Populations([f64; 3]);

impl Populations {
    pub fn new(p: [f64; 3]) -> Result<Self, ThermoError> {
        let sum: f64 = p.iter().sum();
        let in_range = p.iter().all(|&x| (0.0..=1.0).contains(&x));
        if !in_range || (sum - 1.0).abs() > 1e-12 {
            return Err(ThermoError::InvalidPopulations(sum));
        }
        Ok(Populations(p))
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }

    pub fn get(&self, n: usize) -> f64 {
        self.0[n]
    }
}

/// A valid quantum state of the three-level system. Construction checks
/// Hermiticity (to 1e-10), unit trace (to 1e-9) and positivity (eigenvalues
/// above -1e-8); the stored matrix is the hermitized input.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Matrix3<Complex64>);

impl DensityMatrix {
    pub fn from_matrix(m: Matrix3<Complex64>) -> Result<Self, ThermoError> {
        let herm = hermitize(&m);
        let dev = (m - herm).norm();
        if dev > 1e-10 {
            return Err(ThermoError::InvalidDensityMatrix(
                "not Hermitian within 1e-10",
            ));
        }
        let tr = herm.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(ThermoError::InvalidDensityMatrix(
                "trace differs from 1 by more than 1e-9",
            ));
        }
        let eigs = hermitian_eigenvalues_of(&herm);
        if eigs[0] < -1e-8 {
            return Err(ThermoError::InvalidDensityMatrix(
                "negative eigenvalue below -1e-8",
            ));
        }
        Ok(DensityMatrix(herm))
    }

    /// Projector onto a (normalized copy of a) state vector.
    pub fn pure(v: &Vector3<Complex64>) -> Result<Self, ThermoError> {
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(ThermoError::InvalidDensityMatrix(
                "pure state vector has no norm",
            ));
        }
        let u = v / Complex64::new(n, 0.0);
        DensityMatrix::from_matrix(u * u.adjoint())
    }

    pub fn basis_state(n: usize) -> Self {
        let mut m = Matrix3::zeros();
        m[(n, n)] = Complex64::new(1.0, 0.0);
        DensityMatrix(m)
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Matrix3::identity() * Complex64::new(1.0 / 3.0, 0.0))
    }

    pub fn matrix(&self) -> &Matrix3<Complex64> {
        &self.0
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        hermitian_eigenvalues_of(&self.0)
    }

    /// Population of basis state `n` (the diagonal entry).
    pub fn population(&self, n: usize) -> f64 {
        self.0[(n, n)].re
    }

    /// For the integrator's hot loop, which maintains the invariants itself
    /// and validates at checkpoints. `m` must already be exactly Hermitian.
    pub(crate) fn new_unchecked(m: Matrix3<Complex64>) -> Self {
        DensityMatrix(m)
    }
}

pub(crate) fn hermitian_eigenvalues_of(m: &Matrix3<Complex64>) -> [f64; 3] {
    // the input is exactly Hermitian here, so the wrapper cannot fail
    let h = HermitianMatrix3::from_matrix(*m).expect("hermitized matrix");
    eigensystem(&h).values()
}

/// Gibbs populations of a spectrum at inverse temperature `beta`.
///
/// Computed with energies shifted by the ground level, so large `beta`
/// underflows gracefully instead of overflowing: `beta = 0` gives the uniform
/// distribution, `beta -> inf` concentrates on the ground state(s).
pub fn gibbs_populations(spectrum: &Spectrum, beta: f64) -> Populations {
    let e0 = spectrum.value(0);
    let w = [
        (-beta * (spectrum.value(0) - e0)).exp(),
        (-beta * (spectrum.value(1) - e0)).exp(),
        (-beta * (spectrum.value(2) - e0)).exp(),
    ];
    let z: f64 = w.iter().sum();
    Populations([w[0] / z, w[1] / z, w[2] / z])
}

/// The Gibbs state `sum_n p_n |v_n><v_n|` of a spectrum at `beta`.
pub fn gibbs_state(spectrum: &Spectrum, beta: f64) -> DensityMatrix {
    let p = gibbs_populations(spectrum, beta);
    let mut m = Matrix3::zeros();
    for n in 0..3 {
        let v = spectrum.vector(n);
        m += (v * v.adjoint()) * Complex64::new(p.get(n), 0.0);
    }
    DensityMatrix(hermitize(&m))
}

/// Uhlmann fidelity `F(rho, sigma) = tr sqrt(sqrt(rho) sigma sqrt(rho))`.
///
/// For commuting states this reduces to the Bhattacharyya overlap
/// `sum_n sqrt(p_n q_n)`. Eigenvalues that dip a hair below zero from
/// roundoff are clamped before the square roots, and the result is clamped
/// into `[0, 1]`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let sa = eigensystem(&HermitianMatrix3::from_matrix(a.0).expect("hermitian"));
    let mut sqrt_a = Matrix3::zeros();
    for n in 0..3 {
        let v = sa.vector(n);
        let lam = sa.value(n).max(0.0).sqrt();
        sqrt_a += (v * v.adjoint()) * Complex64::new(lam, 0.0);
    }
    let inner = hermitize(&(sqrt_a * b.0 * sqrt_a));
    let eigs = hermitian_eigenvalues_of(&inner);
    let f: f64 = eigs.iter().map(|&x| x.max(0.0).sqrt()).sum();
    f.clamp(0.0, 1.0)
}

/// Heat absorbed from the hot bath while the spectrum is pinned at the start
/// point of the cycle: `sum_n E_n (p_hot_n - p_cold_n)`.
pub fn heat_hot(spectrum_a: &Spectrum, pops_hot: &Populations, pops_cold: &Populations) -> f64 {
    (0..3)
        .map(|n| spectrum_a.value(n) * (pops_hot.get(n) - pops_cold.get(n)))
        .sum()
}

/// Heat absorbed from the cold bath while the spectrum is pinned at the end
/// point: `sum_n E_n (p_cold_n - p_hot_n)`. Negative values mean the
/// molecule dumps heat into the cold bath.
pub fn heat_cold(spectrum_b: &Spectrum, pops_cold: &Populations, pops_hot: &Populations) -> f64 {
    (0..3)
        .map(|n| spectrum_b.value(n) * (pops_cold.get(n) - pops_hot.get(n)))
        .sum()
}

/// Net work per cycle, first law: `W = Q_hot + Q_cold`. Negative values mean
/// the cycle outputs work.
pub fn work_net(q_hot: f64, q_cold: f64) -> f64 {
    q_hot + q_cold
}

/// The same net work evaluated directly from the two endpoint spectra,
/// `sum_n (E_n(A) - E_n(B)) (p_hot_n - p_cold_n)`. Agrees with
/// [`work_net`] of the two heats to machine precision; both routes are kept
/// so the identity can be asserted.
pub fn work_from_spectra(
    spectrum_a: &Spectrum,
    spectrum_b: &Spectrum,
    pops_hot: &Populations,
    pops_cold: &Populations,
) -> f64 {
    (0..3)
        .map(|n| (spectrum_a.value(n) - spectrum_b.value(n)) * (pops_hot.get(n) - pops_cold.get(n)))
        .sum()
}

/// Thermodynamic efficiency in percent, `100 |W| / Q_hot`. Only meaningful
/// when the hot isochore actually absorbs heat.
pub fn efficiency(work: f64, q_hot: f64) -> Result<f64, ThermoError> {
    if q_hot <= TIE_TOLERANCE {
        return Err(ThermoError::UndefinedEfficiency(q_hot));
    }
    Ok(100.0 * work.abs() / q_hot)
}

/// Operating regime of one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeLabel {
    Engine,
    Refrigerator,
    Heater,
    ThermalAccelerator,
    Degenerate,
}

impl RegimeLabel {
    pub fn label(self) -> &'static str {
        match self {
            RegimeLabel::Engine => "engine",
            RegimeLabel::Refrigerator => "refrigerator",
            RegimeLabel::Heater => "heater",
            RegimeLabel::ThermalAccelerator => "thermal_accelerator",
            RegimeLabel::Degenerate => "degenerate",
        }
    }
}

/// Classifies a cycle by the signs of `(W, Q_hot, Q_cold)`.
///
/// Engine: work out, heat in from hot, heat out to cold. Refrigerator: work
/// in, heat out to hot, heat in from cold. Heater: work in, heat out to both
/// baths. Thermal accelerator: work in, heat in from hot and out to cold
/// (hot-to-cold flow sped up by the work input). Any quantity within
/// [`TIE_TOLERANCE`] of zero makes the cycle `Degenerate`.
///
/// Sign patterns outside those four rows would need heat flowing out of both
/// baths while work is extracted (or into both while it is consumed), which
/// two baths at distinct temperatures cannot sustain; such triples never
/// arise from a cycle and are binned as `Degenerate` too.
pub fn classify_regime(work: f64, q_hot: f64, q_cold: f64) -> RegimeLabel {
    let tie = |x: f64| x.abs() <= TIE_TOLERANCE;
    if tie(work) || tie(q_hot) || tie(q_cold) {
        return RegimeLabel::Degenerate;
    }
    match (work > 0.0, q_hot > 0.0, q_cold > 0.0) {
        (false, true, false) => RegimeLabel::Engine,
        (true, true, false) => RegimeLabel::ThermalAccelerator,
        (true, false, true) => RegimeLabel::Refrigerator,
        (true, false, false) => RegimeLabel::Heater,
        _ => RegimeLabel::Degenerate,
    }
}
