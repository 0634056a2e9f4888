//! Reduction of three-qubit states and protocols to the four-dimensional
//! permutation-symmetric subspace (the triphoton polarization ququart).
//!
//! Column `k` of the 8x4 isometry `G` is the normalized symmetric state with
//! `k` photons in `|H>`: its support is exactly the basis indices of Hamming
//! weight `k` (weight 1 = {1, 2, 4}, weight 2 = {3, 5, 6}).

use crate::error::{Result, TomoError};
use crate::linalg::{self, CMatrix, C64};
use crate::protocols::Protocol;
use crate::states::PurifiedAmplitude;

const MIN_SYMMETRIC_WEIGHT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricBasisMap {
    g: CMatrix,
}

/// The 8x4 isometry onto the symmetric subspace.
pub fn basis_map() -> SymmetricBasisMap {
    let mut g = CMatrix::zeros(8, 4);
    for index in 0..8usize {
        let weight = index.count_ones() as usize;
        let size = [1.0, 3.0, 3.0, 1.0][weight];
        g[(index, weight)] = C64::new(1.0 / f64::sqrt(size), 0.0);
    }
    SymmetricBasisMap { g }
}

impl SymmetricBasisMap {
    pub fn matrix(&self) -> &CMatrix {
        &self.g
    }

    /// `c4 = G^dagger c8`, renormalized. Returns the reduced amplitude and the
    /// squared norm of `G^dagger c8` (the weight of the symmetric component).
    pub fn project_state(&self, c8: &PurifiedAmplitude) -> Result<(PurifiedAmplitude, f64)> {
        if c8.dim() != 8 {
            return Err(TomoError::DimensionMismatch {
                expected: 8,
                found: c8.dim(),
            });
        }
        let c4 = self.g.adjoint() * c8.matrix();
        let weight = c4.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if weight < MIN_SYMMETRIC_WEIGHT {
            return Err(TomoError::NotSymmetric(weight));
        }
        Ok((PurifiedAmplitude::normalized(c4)?, weight))
    }

    /// `c8 = G c4`. Since `G` is an isometry the norm is preserved.
    pub fn lift_state(&self, c4: &PurifiedAmplitude) -> Result<PurifiedAmplitude> {
        if c4.dim() != 4 {
            return Err(TomoError::DimensionMismatch {
                expected: 4,
                found: c4.dim(),
            });
        }
        PurifiedAmplitude::normalized(&self.g * c4.matrix())
    }

    /// `X4 = X8 G`, keeping the row count and exposures.
    pub fn reduce_protocol(&self, p: &Protocol) -> Result<Protocol> {
        if p.dim() != 8 {
            return Err(TomoError::DimensionMismatch {
                expected: 8,
                found: p.dim(),
            });
        }
        let reduced = Protocol::new(format!("{}-sym", p.name()), p.matrix() * &self.g)?;
        match p.exposures() {
            Some(t) => reduced.with_exposures(t.to_vec()),
            None => Ok(reduced),
        }
    }

    /// `G G^dagger`, the projector onto the symmetric subspace.
    pub fn projector(&self) -> CMatrix {
        &self.g * self.g.adjoint()
    }
}

pub fn project_state(c8: &PurifiedAmplitude) -> Result<(PurifiedAmplitude, f64)> {
    basis_map().project_state(c8)
}

pub fn lift_state(c4: &PurifiedAmplitude) -> Result<PurifiedAmplitude> {
    basis_map().lift_state(c4)
}

pub fn reduce_protocol(p: &Protocol) -> Result<Protocol> {
    basis_map().reduce_protocol(p)
}

/// Largest entrywise deviation of `G^dagger G` from the identity.
pub fn isometry_error(map: &SymmetricBasisMap) -> f64 {
    let gg = map.g.adjoint() * &map.g;
    linalg::max_abs_diff(&gg, &CMatrix::identity(4, 4))
}
