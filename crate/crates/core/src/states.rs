//! Quantum states: purified amplitudes, density matrices, the canonical
//! GHZ/W test states and the fidelity and purity metrics.
//!
//! Qubit basis states are indexed by their binary value with `|0> = |V>` and
//! `|1> = |H>`, leftmost qubit most significant, so `|HHH>` is index 7.

use crate::error::{Result, TomoError};
use crate::linalg::{self, CMatrix, C64, ONE, ZERO};
use crate::seeds::rng_from_seed;

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// An `s x r` complex matrix `c` with unit Frobenius norm, purifying the
/// state `rho = c c^dagger`. Rank 1 is a pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct PurifiedAmplitude {
    c: CMatrix,
}

impl PurifiedAmplitude {
    /// Wrap `c`, checking unit norm and `r <= s`.
    pub fn new(c: CMatrix) -> Result<Self> {
        check_shape(&c)?;
        let norm = linalg::frobenius_norm(&c);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(TomoError::InvalidArgument(format!(
                "amplitude norm {norm} differs from 1"
            )));
        }
        Ok(Self { c })
    }

    /// Scale `c` to unit Frobenius norm.
    pub fn normalized(c: CMatrix) -> Result<Self> {
        check_shape(&c)?;
        let norm = linalg::frobenius_norm(&c);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(TomoError::InvalidArgument(
                "cannot normalize a zero or non-finite amplitude".into(),
            ));
        }
        Ok(Self {
            c: c / C64::new(norm, 0.0),
        })
    }

    pub fn from_vector(amplitudes: &[C64]) -> Result<Self> {
        Self::normalized(CMatrix::from_column_slice(amplitudes.len(), 1, amplitudes))
    }

    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn rank(&self) -> usize {
        self.c.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.c
    }

    pub fn into_matrix(self) -> CMatrix {
        self.c
    }

    /// First column; the state vector for rank-1 amplitudes.
    pub fn column(&self, k: usize) -> Vec<C64> {
        self.c.column(k).iter().copied().collect()
    }

    pub fn density(&self) -> DensityMatrix {
        density_from_amplitude(self)
    }
}

fn check_shape(c: &CMatrix) -> Result<()> {
    if c.nrows() == 0 || c.ncols() == 0 {
        return Err(TomoError::InvalidArgument("empty amplitude matrix".into()));
    }
    if c.ncols() > c.nrows() {
        return Err(TomoError::InvalidArgument(format!(
            "rank {} exceeds dimension {}",
            c.ncols(),
            c.nrows()
        )));
    }
    Ok(())
}

/// Hermitian, unit-trace, positive semidefinite `s x s` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: CMatrix,
}

impl DensityMatrix {
    pub fn new(rho: CMatrix) -> Result<Self> {
        if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
            return Err(TomoError::InvalidArgument(
                "density matrix must be square and non-empty".into(),
            ));
        }
        let herm_err = linalg::max_abs_diff(&rho, &rho.adjoint());
        if herm_err > HERMITIAN_TOL {
            return Err(TomoError::InvalidArgument(format!(
                "matrix is not Hermitian (deviation {herm_err:.3e})"
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(TomoError::InvalidArgument(format!("trace {tr} differs from 1")));
        }
        let rho = linalg::hermitian_part(&rho);
        let (vals, _) = linalg::hermitian_eigen(&rho);
        if let Some(&min) = vals.last() {
            if min < -PSD_TOL {
                return Err(TomoError::InvalidArgument(format!(
                    "matrix is not positive semidefinite (eigenvalue {min:.3e})"
                )));
            }
        }
        Ok(Self { rho })
    }

    pub fn maximally_mixed(s: usize) -> Self {
        Self {
            rho: CMatrix::identity(s, s) / C64::new(s as f64, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.rho).0
    }

    /// Number of eigenvalues above `tol * max eigenvalue`.
    pub fn numerical_rank(&self, tol: f64) -> usize {
        let vals = self.eigenvalues();
        let max = vals.first().copied().unwrap_or(0.0);
        vals.iter().filter(|&&v| v > tol * max).count()
    }

    /// Purification `c = V sqrt(D)` from the eigendecomposition, negative
    /// eigenvalues clamped to zero. With `rank = Some(r)` only the `r`
    /// dominant eigenpairs are kept; otherwise all `s` columns are returned.
    pub fn purification(&self, rank: Option<usize>) -> PurifiedAmplitude {
        let s = self.dim();
        let r = rank.unwrap_or(s).clamp(1, s);
        let (vals, vecs) = linalg::hermitian_eigen(&self.rho);
        let c = CMatrix::from_fn(s, r, |i, k| vecs[(i, k)] * vals[k].max(0.0).sqrt());
        PurifiedAmplitude::normalized(c).expect("density matrix has unit trace")
    }
}

/// `rho = c c^dagger`.
pub fn density_from_amplitude(c: &PurifiedAmplitude) -> DensityMatrix {
    let m = c.matrix();
    DensityMatrix {
        rho: linalg::hermitian_part(&(m * m.adjoint())),
    }
}

fn basis_vector(s: usize, index: usize) -> Vec<C64> {
    let mut v = vec![ZERO; s];
    v[index] = ONE;
    v
}

/// Computational basis state `index` in dimension `s` (pure amplitude).
pub fn basis_state(s: usize, index: usize) -> Result<PurifiedAmplitude> {
    if index >= s {
        return Err(TomoError::InvalidArgument(format!(
            "basis index {index} out of range for dimension {s}"
        )));
    }
    PurifiedAmplitude::from_vector(&basis_vector(s, index))
}

/// `(|0...0> + |1...1>) / sqrt(2)` on `qubits` qubits.
pub fn ghz(qubits: u32) -> Result<PurifiedAmplitude> {
    if !(2..=16).contains(&qubits) {
        return Err(TomoError::InvalidArgument(format!(
            "GHZ state needs 2..=16 qubits, got {qubits}"
        )));
    }
    let s = 1usize << qubits;
    let mut v = vec![ZERO; s];
    let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[0] = a;
    v[s - 1] = a;
    PurifiedAmplitude::from_vector(&v)
}

/// Equal superposition of all single-excitation basis states.
pub fn w_state(qubits: u32) -> Result<PurifiedAmplitude> {
    if !(2..=16).contains(&qubits) {
        return Err(TomoError::InvalidArgument(format!(
            "W state needs 2..=16 qubits, got {qubits}"
        )));
    }
    let s = 1usize << qubits;
    let a = C64::new(1.0 / (qubits as f64).sqrt(), 0.0);
    let mut v = vec![ZERO; s];
    for q in 0..qubits {
        v[1usize << q] = a;
    }
    PurifiedAmplitude::from_vector(&v)
}

/// `f I/s + (1 - f) |GHZ><GHZ|` for `s = 8` (three qubits) or `s = 4` (the
/// symmetric ququart image of the three-qubit GHZ state, which coincides with
/// the two-qubit GHZ vector).
pub fn ghz_mixture(weight: f64, s: usize) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&weight) {
        return Err(TomoError::InvalidArgument(format!(
            "mixture weight {weight} outside [0, 1]"
        )));
    }
    let pure = match s {
        8 => ghz(3)?,
        4 => crate::degenerate::basis_map().project_state(&ghz(3)?)?.0,
        _ => {
            return Err(TomoError::InvalidArgument(format!(
                "GHZ mixture defined for s = 4 or 8, got {s}"
            )))
        }
    };
    let proj = pure.density();
    let rho = DensityMatrix::maximally_mixed(s).rho * C64::new(weight, 0.0)
        + proj.rho * C64::new(1.0 - weight, 0.0);
    DensityMatrix::new(rho)
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(TomoError::DimensionMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}

/// `|<a|b>|^2` for rank-1 amplitudes.
pub fn fidelity_pure(a: &PurifiedAmplitude, b: &PurifiedAmplitude) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    if a.rank() != 1 || b.rank() != 1 {
        return Err(TomoError::InvalidArgument(
            "fidelity_pure needs rank-1 amplitudes".into(),
        ));
    }
    let overlap: C64 = a
        .matrix()
        .iter()
        .zip(b.matrix().iter())
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(overlap.norm_sqr().clamp(0.0, 1.0))
}

/// Squared Uhlmann fidelity between the states purified by `a` and `b`:
/// the squared trace norm of `a^dagger b`. Ranks may differ.
pub fn fidelity_amplitudes(a: &PurifiedAmplitude, b: &PurifiedAmplitude) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    Ok(uhlmann(a.matrix(), b.matrix()))
}

pub(crate) fn uhlmann(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap = a.adjoint() * b;
    let f = if overlap.len() == 1 {
        overlap[0].norm_sqr()
    } else {
        linalg::trace_norm(&overlap).powi(2)
    };
    f.clamp(0.0, 1.0)
}

/// Squared Uhlmann fidelity `(Tr sqrt(sqrt(a) b sqrt(a)))^2`.
///
/// Both arguments are purified through their eigendecompositions with negative
/// eigenvalues clamped to zero; the fidelity is then the squared trace norm of
/// the overlap of the purifications, which equals the square-root formula but
/// avoids taking a second matrix square root.
pub fn fidelity_mixed(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let pa = a.purification(None);
    let pb = b.purification(None);
    Ok(uhlmann(pa.matrix(), pb.matrix()))
}

/// `Tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

/// Haar-random pure state in dimension `s`, deterministic in `seed`.
pub fn random_pure(s: usize, seed: u64) -> Result<PurifiedAmplitude> {
    if s == 0 {
        return Err(TomoError::InvalidArgument("dimension must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    PurifiedAmplitude::normalized(linalg::complex_gaussian(s, 1, &mut rng))
}

/// Random rank-`r` purified amplitude (Ginibre columns), used by property tests.
pub fn random_amplitude(s: usize, r: usize, seed: u64) -> Result<PurifiedAmplitude> {
    let mut rng = rng_from_seed(seed);
    PurifiedAmplitude::normalized(linalg::complex_gaussian(s, r, &mut rng))
}

/// Number of nines `z = -log10(1 - F)`; `1 - F` is floored at 1e-15 so the
/// result never exceeds 15.
pub fn nines(fidelity: f64) -> f64 {
    let loss = (1.0 - fidelity).max(1e-15);
    (-loss.log10()).clamp(0.0, 15.0)
}
