//! Hamiltonians and spectra of driven chiral three-level molecules.
//!
//! A cyclic three-level system with all three transitions driven is described,
//! in the interaction picture and under the detuning convention
//! `delta12 = delta23 = delta13/2 = delta`, by the Hermitian matrix
//!
//! ```text
//!       | 2*delta              Omega12 e^{+i phi}   Omega13   |
//!   H = | Omega12 e^{-i phi}   delta                s Omega23 |
//!       | Omega13              s Omega23            0         |
//! ```
//!
//! where `s = +1` for a left-handed molecule and `s = -1` for the right-handed
//! mirror image. The sign of the closed-loop coupling is the only place the
//! handedness enters, and it interacts with the overall drive phase `phi`:
//! conjugating the phase (`phi -> 2pi - phi`) transposes the matrix, so the
//! spectrum is even in `phi` about `pi`, and flipping the sign of the middle
//! basis state maps a left molecule at `phi` onto a right molecule at
//! `phi + pi`. Both symmetries are exact and are relied on by the cycle layer.
//!
//! Energies are measured in units of a reference quantum `E0` with `hbar = 1`,
//! so times are in units of `1/E0`.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;
use thiserror::Error;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Margin below which two candidate eigenvector matches along a path are
/// considered ambiguous.
pub const PAIRING_AMBIGUITY_MARGIN: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("Rabi couplings must be finite and nonnegative, got ({0}, {1}, {2})")]
    InvalidRabi(f64, f64, f64),
    #[error("phase and detuning must be finite, got phi = {0}, delta = {1}")]
    NonFiniteDrive(f64, f64),
    #[error("matrix is not Hermitian: entry ({0},{1}) does not match the conjugate of ({1},{0})")]
    NotHermitian(usize, usize),
    #[error("a control path needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("control path endpoints coincide at {0}")]
    DegeneratePath(f64),
    #[error("control path bounds must be finite")]
    NonFinitePath,
}

/// Handedness of the molecule. Enters the Hamiltonian only through the sign
/// of the 2-3 coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chirality {
    Left,
    Right,
}

impl Chirality {
    pub fn sign(self) -> f64 {
        match self {
            Chirality::Left => 1.0,
            Chirality::Right => -1.0,
        }
    }

    pub fn mirror(self) -> Self {
        match self {
            Chirality::Left => Chirality::Right,
            Chirality::Right => Chirality::Left,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Chirality::Left => "left",
            Chirality::Right => "right",
        }
    }
}

fn normalize_phase(phi: f64) -> f64 {
    let mut out = phi.rem_euclid(TWO_PI);
    // rem_euclid can round up to exactly 2*pi for tiny negative inputs
    if out >= TWO_PI {
        out -= TWO_PI;
    }
    out
}

/// Drive configuration for one molecule: three Rabi couplings, the overall
/// drive phase and the common detuning.
///
/// The phase is kept normalized into `[0, 2pi)`; construct through [`new`]
/// and the `with_*` builders so that stays true.
///
/// [`new`]: DriveParameters::new
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParameters {
    omega12: f64,
    omega13: f64,
    omega23: f64,
    chirality: Chirality,
    phi: f64,
    delta: f64,
}

impl DriveParameters {
    /// Unit Rabi couplings on all three transitions, the common default.
    pub fn new(chirality: Chirality, phi: f64, delta: f64) -> Result<Self, SpectralError> {
        if !phi.is_finite() || !delta.is_finite() {
            return Err(SpectralError::NonFiniteDrive(phi, delta));
        }
        Ok(DriveParameters {
            omega12: 1.0,
            omega13: 1.0,
            omega23: 1.0,
            chirality,
            phi: normalize_phase(phi),
            delta,
        })
    }

    pub fn with_rabi(
        mut self,
        omega12: f64,
        omega13: f64,
        omega23: f64,
    ) -> Result<Self, SpectralError> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !(ok(omega12) && ok(omega13) && ok(omega23)) {
            return Err(SpectralError::InvalidRabi(omega12, omega13, omega23));
        }
        self.omega12 = omega12;
        self.omega13 = omega13;
        self.omega23 = omega23;
        Ok(self)
    }

    pub fn with_phi(mut self, phi: f64) -> Result<Self, SpectralError> {
        if !phi.is_finite() {
            return Err(SpectralError::NonFiniteDrive(phi, self.delta));
        }
        self.phi = normalize_phase(phi);
        Ok(self)
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self, SpectralError> {
        if !delta.is_finite() {
            return Err(SpectralError::NonFiniteDrive(self.phi, delta));
        }
        self.delta = delta;
        Ok(self)
    }

    pub fn with_chirality(mut self, chirality: Chirality) -> Self {
        self.chirality = chirality;
        self
    }

    /// The mirror molecule under the same drive.
    pub fn mirrored(self) -> Self {
        self.with_chirality(self.chirality.mirror())
    }

    pub fn omega12(&self) -> f64 {
        self.omega12
    }

    pub fn omega13(&self) -> f64 {
        self.omega13
    }

    pub fn omega23(&self) -> f64 {
        self.omega23
    }

    pub fn chirality(&self) -> Chirality {
        self.chirality
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn rabi(&self) -> [f64; 3] {
        [self.omega12, self.omega13, self.omega23]
    }
}

/// A 3x3 complex matrix that is Hermitian by construction: the lower triangle
/// is stored as the exact conjugate of the upper one, so `m == m.adjoint()`
/// holds bitwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianMatrix3(Matrix3<Complex64>);

impl HermitianMatrix3 {
    /// Wraps a matrix after checking exact Hermitian symmetry. Use
    /// [`hermitize`] first if the input only holds up to roundoff.
    pub fn from_matrix(m: Matrix3<Complex64>) -> Result<Self, SpectralError> {
        for i in 0..3 {
            for j in i..3 {
                if m[(i, j)] != m[(j, i)].conj() {
                    return Err(SpectralError::NotHermitian(i, j));
                }
            }
        }
        Ok(HermitianMatrix3(m))
    }

    pub fn from_diagonal(d: [f64; 3]) -> Self {
        HermitianMatrix3(Matrix3::from_diagonal(&Vector3::new(
            Complex64::new(d[0], 0.0),
            Complex64::new(d[1], 0.0),
            Complex64::new(d[2], 0.0),
        )))
    }

    pub fn matrix(&self) -> &Matrix3<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix3<Complex64> {
        self.0
    }
}

/// Averages a matrix with its adjoint. The result is exactly Hermitian in
/// floating point (the two mirrored entries are sums of the same two terms).
pub fn hermitize(m: &Matrix3<Complex64>) -> Matrix3<Complex64> {
    let mut out = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            out[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * Complex64::new(0.5, 0.0);
        }
    }
    out
}

/// Builds the three-level drive Hamiltonian for the given parameters.
///
/// Diagonal `(2 delta, delta, 0)`; the 1-2 coupling carries the drive phase,
/// the 2-3 coupling carries the handedness sign.
pub fn build_hamiltonian(p: &DriveParameters) -> HermitianMatrix3 {
    let r = |x: f64| Complex64::new(x, 0.0);
    let e = Complex64::from_polar(1.0, p.phi);
    let c12 = e * p.omega12;
    let c23 = r(p.chirality.sign() * p.omega23);
    let m = Matrix3::new(
        r(2.0 * p.delta),
        c12,
        r(p.omega13),
        c12.conj(),
        r(p.delta),
        c23,
        r(p.omega13),
        c23.conj(),
        r(0.0),
    );
    HermitianMatrix3(m)
}

/// Eigendecomposition of a drive Hamiltonian with a deterministic
/// presentation: values ascending, eigenvectors orthonormal, each vector's
/// largest-magnitude component made real and positive, and near-degenerate
/// clusters re-orthonormalized in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: [f64; 3],
    vectors: Matrix3<Complex64>,
}

impl Spectrum {
    pub fn values(&self) -> [f64; 3] {
        self.values
    }

    pub fn value(&self, n: usize) -> f64 {
        self.values[n]
    }

    /// Eigenvector belonging to `values()[n]`, stored as column `n`.
    pub fn vector(&self, n: usize) -> Vector3<Complex64> {
        self.vectors.column(n).into_owned()
    }

    pub fn vectors(&self) -> &Matrix3<Complex64> {
        &self.vectors
    }

    /// Smallest gap between adjacent levels.
    pub fn min_gap(&self) -> f64 {
        (self.values[1] - self.values[0]).min(self.values[2] - self.values[1])
    }

    pub fn trace(&self) -> f64 {
        self.values[0] + self.values[1] + self.values[2]
    }
}

/// Index of the largest-magnitude component, lowest index on ties.
fn dominant_component(v: &Vector3<Complex64>) -> usize {
    let mut best = 0;
    for i in 1..3 {
        if v[i].norm() > v[best].norm() {
            best = i;
        }
    }
    best
}

/// Multiplies the vector by the global phase that makes its dominant
/// component real and positive.
fn fix_phase(v: &mut Vector3<Complex64>) {
    let k = dominant_component(v);
    let mag = v[k].norm();
    if mag > 0.0 {
        let factor = v[k].conj() / Complex64::new(mag, 0.0);
        *v *= factor;
    }
}

/// Diagonalizes a Hermitian matrix into a [`Spectrum`].
///
/// The underlying solver is exact to machine precision for these 3x3
/// problems; this wrapper only adds the deterministic ordering and phase
/// conventions that make spectra comparable across runs.
pub fn eigensystem(h: &HermitianMatrix3) -> Spectrum {
    let se = SymmetricEigen::new(h.0);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());

    let mut values = [0.0; 3];
    let mut cols: [Vector3<Complex64>; 3] = [Vector3::zeros(), Vector3::zeros(), Vector3::zeros()];
    for (n, &k) in order.iter().enumerate() {
        values[n] = se.eigenvalues[k];
        cols[n] = se.eigenvectors.column(k).into_owned();
    }

    // Re-orthonormalize degenerate clusters in a fixed order so the basis
    // spanning the cluster does not depend on solver internals: sort the
    // cluster by (index of first nonzero component, then descending magnitude
    // of that component) and run Gram-Schmidt in that order.
    let mut start = 0;
    while start < 3 {
        let mut end = start + 1;
        while end < 3 && values[end] - values[end - 1] < DEGENERACY_TOL {
            end += 1;
        }
        if end - start > 1 {
            let first_nz = |v: &Vector3<Complex64>| -> (usize, f64) {
                for i in 0..3 {
                    if v[i].norm() > 1e-9 {
                        return (i, v[i].norm());
                    }
                }
                (3, 0.0)
            };
            let mut idx: Vec<usize> = (start..end).collect();
            idx.sort_by(|&a, &b| {
                let (ia, ma) = first_nz(&cols[a]);
                let (ib, mb) = first_nz(&cols[b]);
                ia.cmp(&ib).then(mb.partial_cmp(&ma).unwrap())
            });
            let picked: Vec<Vector3<Complex64>> = idx.iter().map(|&i| cols[i]).collect();
            let mut basis: Vec<Vector3<Complex64>> = Vec::with_capacity(picked.len());
            for mut v in picked {
                for b in &basis {
                    let overlap = b.dotc(&v);
                    v -= b * overlap;
                }
                let n = v.norm();
                v /= Complex64::new(n, 0.0);
                basis.push(v);
            }
            for (slot, v) in (start..end).zip(basis) {
                cols[slot] = v;
            }
        }
        start = end;
    }

    let mut vectors = Matrix3::zeros();
    for (n, col) in cols.iter_mut().enumerate() {
        fix_phase(col);
        vectors.set_column(n, col);
    }
    Spectrum { values, vectors }
}

/// Which drive parameter a path moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlParameter {
    Phase,
    Detuning,
}

impl ControlParameter {
    pub fn label(self) -> &'static str {
        match self {
            ControlParameter::Phase => "phase",
            ControlParameter::Detuning => "detuning",
        }
    }
}

/// A straight line in control space from `start` to `end`, sampled on a
/// uniform inclusive grid. The parameter not being swept is pinned at
/// `fixed_other`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlPath {
    parameter: ControlParameter,
    start: f64,
    end: f64,
    fixed_other: f64,
    samples: usize,
}

impl ControlPath {
    pub fn new(
        parameter: ControlParameter,
        start: f64,
        end: f64,
        fixed_other: f64,
        samples: usize,
    ) -> Result<Self, SpectralError> {
        if !(start.is_finite() && end.is_finite() && fixed_other.is_finite()) {
            return Err(SpectralError::NonFinitePath);
        }
        if samples < 2 {
            return Err(SpectralError::TooFewSamples(samples));
        }
        if start == end {
            return Err(SpectralError::DegeneratePath(start));
        }
        Ok(ControlPath {
            parameter,
            start,
            end,
            fixed_other,
            samples,
        })
    }

    pub fn parameter(&self) -> ControlParameter {
        self.parameter
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn fixed_other(&self) -> f64 {
        self.fixed_other
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.samples;
        let step = (self.end - self.start) / (n - 1) as f64;
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    self.end
                } else {
                    self.start + step * k as f64
                }
            })
            .collect()
    }

    /// Drive parameters at one point of the path, inheriting couplings and
    /// chirality from `base`.
    pub fn drive_at(&self, base: &DriveParameters, x: f64) -> DriveParameters {
        let mut p = *base;
        match self.parameter {
            ControlParameter::Phase => {
                p.phi = normalize_phase(x);
                p.delta = self.fixed_other;
            }
            ControlParameter::Detuning => {
                p.delta = x;
                p.phi = normalize_phase(self.fixed_other);
            }
        }
        p
    }
}

/// Spectra at every grid point of a path.
pub fn spectrum_along_path(base: &DriveParameters, path: &ControlPath) -> Vec<(f64, Spectrum)> {
    path.grid()
        .into_iter()
        .map(|x| {
            let p = path.drive_at(base, x);
            (x, eigensystem(&build_hamiltonian(&p)))
        })
        .collect()
}

/// Smallest adjacent-level gap seen along a path and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinGap {
    pub gap: f64,
    pub at: f64,
}

pub fn min_gap_along_path(base: &DriveParameters, path: &ControlPath) -> MinGap {
    min_gap_of_scan(&spectrum_along_path(base, path))
}

pub fn min_gap_of_scan(scan: &[(f64, Spectrum)]) -> MinGap {
    let mut best = MinGap {
        gap: f64::INFINITY,
        at: f64::NAN,
    };
    for (x, s) in scan {
        let g = s.min_gap();
        if g < best.gap {
            best = MinGap { gap: g, at: *x };
        }
    }
    best
}

/// How endpoint eigenstates are matched up when a cycle compares the two
/// ends of a stroke.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairingMode {
    /// Match by position in the ascending eigenvalue order.
    Sorted,
    /// Follow each eigenvector continuously along the path by maximal
    /// overlap between consecutive samples.
    Continuity,
}

impl PairingMode {
    pub fn label(self) -> &'static str {
        match self {
            PairingMode::Sorted => "sorted",
            PairingMode::Continuity => "continuity",
        }
    }
}

/// One path step where the maximum-overlap assignment was nearly a tie.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingAmbiguity {
    /// Path parameter value of the step.
    pub at: f64,
    /// Gap between the best and the competing overlap.
    pub margin: f64,
}

/// Result of matching endpoint eigenstates: `permutation[n]` is the index at
/// the end of the path of the state that started as index `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    pub permutation: [usize; 3],
    pub ambiguities: Vec<PairingAmbiguity>,
}

impl Pairing {
    pub fn identity() -> Self {
        Pairing {
            permutation: [0, 1, 2],
            ambiguities: Vec::new(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.permutation == [0, 1, 2]
    }
}

/// Matches the eigenstates at the two ends of a sampled path.
///
/// `Sorted` is the identity by definition. `Continuity` walks the scan,
/// assigning each state at step `k+1` to the step-`k` state with the largest
/// overlap magnitude (greedy on the 3x3 overlap table), and composes the
/// per-step permutations. Steps where the winning assignment beats a
/// competing one by less than [`PAIRING_AMBIGUITY_MARGIN`] are reported.
pub fn pair_endpoint_states(scan: &[(f64, Spectrum)], mode: PairingMode) -> Pairing {
    if mode == PairingMode::Sorted || scan.len() < 2 {
        return Pairing::identity();
    }
    let mut total = [0usize, 1, 2];
    let mut ambiguities = Vec::new();
    for w in scan.windows(2) {
        let (_, prev) = &w[0];
        let (x, next) = &w[1];
        let mut overlap = [[0.0f64; 3]; 3];
        for (i, row) in overlap.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = prev.vector(i).dotc(&next.vector(j)).norm();
            }
        }
        let mut row_used = [false; 3];
        let mut col_used = [false; 3];
        let mut step = [usize::MAX; 3];
        let mut worst_margin = f64::INFINITY;
        for _ in 0..3 {
            let mut best = (0usize, 0usize, -1.0f64);
            for i in 0..3 {
                for j in 0..3 {
                    if !row_used[i] && !col_used[j] && overlap[i][j] > best.2 {
                        best = (i, j, overlap[i][j]);
                    }
                }
            }
            // margin against the best competing cell in the same row or column
            let mut second = -1.0f64;
            for j in 0..3 {
                if j != best.1 && !col_used[j] {
                    second = second.max(overlap[best.0][j]);
                }
            }
            for i in 0..3 {
                if i != best.0 && !row_used[i] {
                    second = second.max(overlap[i][best.1]);
                }
            }
            if second >= 0.0 {
                worst_margin = worst_margin.min(best.2 - second);
            }
            row_used[best.0] = true;
            col_used[best.1] = true;
            step[best.0] = best.1;
        }
        if worst_margin < PAIRING_AMBIGUITY_MARGIN {
            ambiguities.push(PairingAmbiguity {
                at: *x,
                margin: worst_margin,
            });
        }
        for slot in total.iter_mut() {
            *slot = step[*slot];
        }
    }
    Pairing {
        permutation: total,
        ambiguities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spectrum_at(c: Chirality, phi: f64, delta: f64) -> Spectrum {
        let p = DriveParameters::new(c, phi, delta).unwrap();
        eigensystem(&build_hamiltonian(&p))
    }

    fn assert_values(s: &Spectrum, want: [f64; 3], tol: f64) {
        for (n, target) in want.iter().enumerate() {
            assert!(
                (s.value(n) - target).abs() < tol,
                "level {}: got {}, want {}",
                n,
                s.value(n),
                target
            );
        }
    }

    #[test]
    fn hamiltonian_entries_match_construction() {
        let p = DriveParameters::new(Chirality::Left, PI / 2.0, 0.1).unwrap();
        let h = build_hamiltonian(&p);
        let m = h.matrix();
        assert_eq!(m[(0, 0)], Complex64::new(0.2, 0.0));
        assert_eq!(m[(1, 1)], Complex64::new(0.1, 0.0));
        assert_eq!(m[(2, 2)], Complex64::new(0.0, 0.0));
        assert!((m[(0, 1)] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(m[(0, 2)], Complex64::new(1.0, 0.0));
        assert_eq!(m[(1, 2)], Complex64::new(1.0, 0.0));
        // handedness flips only the 2-3 sign
        let hr = build_hamiltonian(&p.mirrored());
        assert_eq!(hr.matrix()[(1, 2)], Complex64::new(-1.0, 0.0));
        // exact Hermitian storage
        assert_eq!(m[(1, 0)], m[(0, 1)].conj());
    }

    #[test]
    fn phase_is_normalized_at_construction() {
        let p = DriveParameters::new(Chirality::Left, -PI / 2.0, 0.0).unwrap();
        assert!((p.phi() - 3.0 * PI / 2.0).abs() < 1e-12);
        let q = DriveParameters::new(Chirality::Right, 2.0 * TWO_PI + 0.25, 0.0).unwrap();
        assert!((q.phi() - 0.25).abs() < 1e-12);
        assert!(DriveParameters::new(Chirality::Left, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn rabi_validation_rejects_negative_couplings() {
        let p = DriveParameters::new(Chirality::Left, 0.0, 0.0).unwrap();
        assert!(p.with_rabi(1.0, -0.5, 1.0).is_err());
        assert!(p.with_rabi(f64::INFINITY, 1.0, 1.0).is_err());
        assert!(p.with_rabi(0.0, 0.0, 0.0).is_ok());
    }

    // Resonant anchor points. At delta = 0 the left spectrum at phi = 0 is
    // {-1, -1, 2} and at phi = pi it is {-2, 1, 1}; the right molecule shows
    // the same two spectra with the phases swapped.
    #[test]
    fn resonant_spectra_at_phase_zero_and_pi() {
        assert_values(
            &spectrum_at(Chirality::Left, 0.0, 0.0),
            [-1.0, -1.0, 2.0],
            1e-12,
        );
        assert_values(
            &spectrum_at(Chirality::Left, PI, 0.0),
            [-2.0, 1.0, 1.0],
            1e-12,
        );
        assert_values(
            &spectrum_at(Chirality::Right, 0.0, 0.0),
            [-2.0, 1.0, 1.0],
            1e-12,
        );
        assert_values(
            &spectrum_at(Chirality::Right, PI, 0.0),
            [-1.0, -1.0, 2.0],
            1e-12,
        );
    }

    // Frozen from an independent diagonalization (scipy.linalg.eigh) of the
    // same matrices.
    #[test]
    fn detuned_spectra_match_reference_values() {
        assert_values(
            &spectrum_at(Chirality::Left, PI / 2.0, 0.1),
            [-1.634935157289747, 0.1, 1.834935157289748],
            1e-12,
        );
        assert_values(
            &spectrum_at(Chirality::Left, PI, 0.1),
            [-1.902221399482123, 1.043386349663435, 1.158835049818689],
            1e-12,
        );
        assert_values(
            &spectrum_at(Chirality::Left, PI, 1.0),
            [-1.214319743377535, 1.539188872810889, 2.675130870566646],
            1e-12,
        );
        assert_values(
            &spectrum_at(Chirality::Right, PI, 1.0),
            [-0.675130870566646, 0.460811127189111, 3.214319743377534],
            1e-12,
        );
    }

    #[test]
    fn eigensystem_is_a_faithful_orthonormal_decomposition() {
        let p = DriveParameters::new(Chirality::Right, 1.234, 0.37).unwrap();
        let h = build_hamiltonian(&p);
        let s = eigensystem(&h);
        for n in 0..3 {
            let v = s.vector(n);
            let resid = h.matrix() * v - v * Complex64::new(s.value(n), 0.0);
            assert!(resid.norm() < 1e-9, "residual {}", resid.norm());
        }
        let gram = s.vectors().adjoint() * s.vectors();
        assert!((gram - Matrix3::identity()).norm() < 1e-10);
        assert!(s.value(0) <= s.value(1) && s.value(1) <= s.value(2));
        // phase convention: dominant component real positive
        for n in 0..3 {
            let v = s.vector(n);
            let k = super::dominant_component(&v);
            assert!(v[k].im.abs() < 1e-12 && v[k].re > 0.0);
        }
    }

    #[test]
    fn degenerate_cluster_still_diagonalizes_cleanly() {
        let s = spectrum_at(Chirality::Left, 0.0, 0.0);
        let p = DriveParameters::new(Chirality::Left, 0.0, 0.0).unwrap();
        let h = build_hamiltonian(&p);
        for n in 0..3 {
            let v = s.vector(n);
            let resid = h.matrix() * v - v * Complex64::new(s.value(n), 0.0);
            assert!(resid.norm() < 1e-9);
        }
        let gram = s.vectors().adjoint() * s.vectors();
        assert!((gram - Matrix3::identity()).norm() < 1e-10);
    }

    #[test]
    fn trace_equals_three_delta() {
        for &delta in &[0.0, 0.1, 0.7, 1.5] {
            let s = spectrum_at(Chirality::Left, 2.1, delta);
            assert!((s.trace() - 3.0 * delta).abs() < 1e-10);
        }
    }

    #[test]
    fn phase_conjugation_leaves_the_spectrum_unchanged() {
        for &phi in &[0.3, 1.1, 2.9, 4.4] {
            let a = spectrum_at(Chirality::Left, phi, 0.23);
            let b = spectrum_at(Chirality::Left, TWO_PI - phi, 0.23);
            for n in 0..3 {
                assert!((a.value(n) - b.value(n)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn handedness_swap_equals_phase_shift_by_pi() {
        for &phi in &[0.0, 0.8, 2.0, 5.1] {
            let left = spectrum_at(Chirality::Left, phi, 0.4);
            let right = spectrum_at(Chirality::Right, phi + PI, 0.4);
            for n in 0..3 {
                assert!((left.value(n) - right.value(n)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn control_path_grid_is_inclusive_and_uniform() {
        let path = ControlPath::new(ControlParameter::Detuning, 0.0, 1.0, PI, 5).unwrap();
        let g = path.grid();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(ControlPath::new(ControlParameter::Phase, 1.0, 1.0, 0.0, 5).is_err());
        assert!(ControlPath::new(ControlParameter::Phase, 0.0, 1.0, 0.0, 1).is_err());
    }

    #[test]
    fn min_gap_near_avoided_crossing_matches_regression_value() {
        // phase path through pi at delta = 0.1: strictly avoided crossing
        let p = DriveParameters::new(Chirality::Left, 0.0, 0.0).unwrap();
        let path =
            ControlPath::new(ControlParameter::Phase, PI / 2.0, 3.0 * PI / 2.0, 0.1, 2001).unwrap();
        let mg = min_gap_along_path(&p, &path);
        assert!(mg.gap > 0.0);
        assert!((mg.gap - 0.115448700155254).abs() < 1e-9, "gap {}", mg.gap);
        assert!((mg.at - PI).abs() < 1e-9);
    }

    #[test]
    fn min_gap_vanishes_at_true_crossing() {
        // at phi = 0 the lower pair is degenerate exactly at delta = 0
        let p = DriveParameters::new(Chirality::Left, 0.0, 0.0).unwrap();
        let path = ControlPath::new(ControlParameter::Detuning, -0.5, 0.5, 0.0, 2001).unwrap();
        let mg = min_gap_along_path(&p, &path);
        assert!(mg.gap < 1e-12);
        assert!(mg.at.abs() < 1e-9);
    }

    #[test]
    fn continuity_pairing_is_identity_on_a_gentle_path() {
        let p = DriveParameters::new(Chirality::Left, 0.0, 0.0).unwrap();
        let path = ControlPath::new(ControlParameter::Detuning, 0.2, 1.0, 2.0, 257).unwrap();
        let scan = spectrum_along_path(&p, &path);
        let pairing = pair_endpoint_states(&scan, PairingMode::Continuity);
        assert!(pairing.is_identity());
        assert!(pairing.ambiguities.is_empty());
        assert!(pair_endpoint_states(&scan, PairingMode::Sorted).is_identity());
    }

    #[test]
    fn continuity_pairing_crosses_the_avoided_gap_smoothly() {
        // through the avoided crossing at phi = pi the sorted and continuity
        // conventions agree as long as the scan is dense enough
        let p = DriveParameters::new(Chirality::Left, 0.0, 0.0).unwrap();
        let path =
            ControlPath::new(ControlParameter::Phase, PI / 2.0, 3.0 * PI / 2.0, 0.1, 2001).unwrap();
        let scan = spectrum_along_path(&p, &path);
        let pairing = pair_endpoint_states(&scan, PairingMode::Continuity);
        assert!(pairing.is_identity());
    }
}
