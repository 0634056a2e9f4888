//! Maximum-likelihood tomography of polarization qubits and qudits with
//! Platonic-solid measurement protocols, together with the asymptotic
//! fidelity-loss model used to assess reconstruction accuracy.

pub mod campaign;
pub mod degenerate;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod nelder_mead;
pub mod par;
pub mod precision;
pub mod protocols;
pub mod sampling;
pub mod seeds;
pub mod states;
pub mod stats;

pub use error::{Result, TomoError};
