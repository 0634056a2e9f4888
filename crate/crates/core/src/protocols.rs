//! Measurement protocols: instrumental matrices whose rows are the projection
//! amplitudes of each measurement setting, with per-row exposure times.
//!
//! The one-qubit protocols put projection directions at the face centres of a
//! regular tetrahedron, cube or octahedron on the Bloch sphere. Multi-qubit
//! protocols are Kronecker products of one-qubit ones.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt::Write as _;

use crate::error::{Result, TomoError};
use crate::linalg::{self, CMatrix, C64, ZERO};
use crate::states::{DensityMatrix, PurifiedAmplitude};

/// Default cap on the Hilbert dimension of tensor-product protocols.
pub const DEFAULT_DIMENSION_CAP: usize = 64;

const COMPLETENESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    name: String,
    x: CMatrix,
    exposures: Option<Vec<f64>>,
    trace_factor: Option<f64>,
}

impl Protocol {
    /// Build a protocol from an `m x s` instrumental matrix. Exposures start
    /// unassigned; the trace factor is recorded when the protocol is complete.
    pub fn new(name: impl Into<String>, x: CMatrix) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(TomoError::InvalidArgument("empty instrumental matrix".into()));
        }
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(TomoError::InvalidArgument(
                "instrumental matrix has non-finite entries".into(),
            ));
        }
        let trace_factor = trace_factor_of(&x);
        Ok(Self {
            name: name.into(),
            x,
            exposures: None,
            trace_factor,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of rows `m`.
    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    /// Hilbert dimension `s`.
    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.x
    }

    pub fn row(&self, j: usize) -> Vec<C64> {
        self.x.row(j).iter().copied().collect()
    }

    pub fn exposures(&self) -> Option<&[f64]> {
        self.exposures.as_deref()
    }

    pub fn require_exposures(&self) -> Result<&[f64]> {
        self.exposures.as_deref().ok_or(TomoError::UnassignedExposures)
    }

    /// `a` with `sum_j X_j^dagger X_j = a I`, if the protocol is complete.
    pub fn trace_factor(&self) -> Option<f64> {
        self.trace_factor
    }

    pub fn with_exposures(mut self, t: Vec<f64>) -> Result<Self> {
        if t.len() != self.rows() {
            return Err(TomoError::DimensionMismatch {
                expected: self.rows(),
                found: t.len(),
            });
        }
        if t.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(TomoError::InvalidArgument(
                "exposure times must be positive and finite".into(),
            ));
        }
        self.exposures = Some(t);
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Copy of the protocol with row `j` removed (exposures dropped).
    pub fn without_row(&self, j: usize) -> Result<Self> {
        if j >= self.rows() {
            return Err(TomoError::IndexOutOfRange {
                index: j,
                rows: self.rows(),
            });
        }
        Protocol::new(format!("{}-drop{j}", self.name), self.x.clone().remove_row(j))
    }

    /// Text export: header `name m s a`, then one row per line with entries
    /// written as `re+imi` at 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let a = self
            .trace_factor
            .map(fmt17)
            .unwrap_or_else(|| "nan".to_string());
        let _ = writeln!(out, "{} {} {} {}", self.name, self.rows(), self.dim(), a);
        for j in 0..self.rows() {
            let line: Vec<String> = self.x.row(j).iter().map(|z| fmt_complex(*z)).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    /// Parse the format written by [`Protocol::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| TomoError::Config("empty protocol text".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(TomoError::Config(format!("bad protocol header '{header}'")));
        }
        let parse_usize = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| TomoError::Config(format!("bad integer '{s}' in protocol header")))
        };
        let m = parse_usize(fields[1])?;
        let s = parse_usize(fields[2])?;
        let mut data = Vec::with_capacity(m * s);
        for j in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| TomoError::Config(format!("protocol text ends before row {j}")))?;
            let row: Vec<C64> = line
                .split_whitespace()
                .map(parse_complex)
                .collect::<Result<_>>()?;
            if row.len() != s {
                return Err(TomoError::Config(format!(
                    "protocol row {j} has {} entries, expected {s}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Protocol::new(fields[0], CMatrix::from_row_slice(m, s, &data))
    }
}

pub(crate) fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn fmt_complex(z: C64) -> String {
    let sign = if z.im < 0.0 { '-' } else { '+' };
    format!("{}{}{}i", fmt17(z.re), sign, fmt17(z.im.abs()))
}

pub(crate) fn parse_complex(tok: &str) -> Result<C64> {
    let bad = || TomoError::Config(format!("bad complex entry '{tok}'"));
    let body = tok.strip_suffix('i').ok_or_else(bad)?;
    // The separator is the last sign that does not follow an exponent marker.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| {
            (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E')
        })
        .ok_or_else(bad)?;
    let re: f64 = body[..split].parse().map_err(|_| bad())?;
    let im: f64 = body[split..].parse().map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

fn frame_operator(x: &CMatrix) -> CMatrix {
    x.adjoint() * x
}

fn trace_factor_of(x: &CMatrix) -> Option<f64> {
    let frame = frame_operator(x);
    let s = x.ncols();
    let a = frame.trace().re / s as f64;
    if !(a > 0.0) {
        return None;
    }
    let target = CMatrix::identity(s, s) * C64::new(a, 0.0);
    (linalg::max_abs_diff(&frame, &target) <= COMPLETENESS_TOL * a).then_some(a)
}

/// `a` such that `sum_j Lambda_j = a I`, or an error when the sum is not
/// proportional to the identity.
pub fn completeness_factor(p: &Protocol) -> Result<f64> {
    trace_factor_of(&p.x).ok_or(TomoError::IncompleteProtocol)
}

fn polar(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

fn real(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Large and small amplitudes of the tetrahedron/octahedron rows:
/// `sqrt(sqrt3 +- 1) / 12^(1/4)`.
fn platonic_amplitudes() -> (f64, f64) {
    let sqrt3 = 3f64.sqrt();
    let scale = 12f64.powf(0.25);
    ((sqrt3 + 1.0).sqrt() / scale, (sqrt3 - 1.0).sqrt() / scale)
}

pub fn tetrahedron() -> Protocol {
    let (big, small) = platonic_amplitudes();
    let rows = [
        [real(big), polar(FRAC_PI_4) * small],
        [real(big), polar(5.0 * FRAC_PI_4) * small],
        [real(small), polar(3.0 * FRAC_PI_4) * big],
        [real(small), polar(7.0 * FRAC_PI_4) * big],
    ];
    Protocol::new("tetrahedron", CMatrix::from_row_iterator(4, 2, rows.into_iter().flatten()))
        .expect("tetrahedron matrix is valid")
}

pub fn cube() -> Protocol {
    let h = FRAC_1_SQRT_2;
    let rows = [
        [real(1.0), ZERO],
        [ZERO, real(1.0)],
        [real(h), real(h)],
        [real(h), real(-h)],
        [real(h), C64::new(0.0, h)],
        [real(h), C64::new(0.0, -h)],
    ];
    Protocol::new("cube", CMatrix::from_row_iterator(6, 2, rows.into_iter().flatten()))
        .expect("cube matrix is valid")
}

pub fn octahedron() -> Protocol {
    let (big, small) = platonic_amplitudes();
    let phases = [1.0, 3.0, 5.0, 7.0].map(|k| polar(k * FRAC_PI_4));
    let upper = phases.iter().map(|&p| [real(big), p * small]);
    let lower = phases.iter().map(|&p| [real(small), p * big]);
    Protocol::new(
        "octahedron",
        CMatrix::from_row_iterator(8, 2, upper.chain(lower).flatten()),
    )
    .expect("octahedron matrix is valid")
}

/// One-qubit protocol by name: `tetrahedron`, `cube` or `octahedron`.
pub fn by_name(name: &str) -> Result<Protocol> {
    match name {
        "tetrahedron" | "tetra" => Ok(tetrahedron()),
        "cube" => Ok(cube()),
        "octahedron" | "octa" => Ok(octahedron()),
        other => Err(TomoError::Config(format!("unknown protocol '{other}'"))),
    }
}

/// `l`-fold tensor power of a one-qubit protocol.
pub fn qubit_protocol(name: &str, qubits: u32) -> Result<Protocol> {
    if qubits == 0 {
        return Err(TomoError::InvalidArgument("need at least one qubit".into()));
    }
    let base = by_name(name)?;
    tensor_protocol(&vec![base; qubits as usize])
}

pub fn tensor_protocol(parts: &[Protocol]) -> Result<Protocol> {
    tensor_protocol_capped(parts, DEFAULT_DIMENSION_CAP)
}

/// Kronecker product of the parts' rows in lexicographic order, first part
/// varying slowest. A single part is returned unchanged.
pub fn tensor_protocol_capped(parts: &[Protocol], cap: usize) -> Result<Protocol> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| TomoError::InvalidArgument("tensor product of no protocols".into()))?;
    if rest.is_empty() {
        return Ok(first.clone());
    }
    let dimension = parts
        .iter()
        .try_fold(1usize, |acc, p| acc.checked_mul(p.dim()))
        .unwrap_or(usize::MAX);
    if dimension > cap {
        return Err(TomoError::DimensionCap { dimension, cap });
    }
    let mut rows: Vec<Vec<C64>> = (0..first.rows()).map(|j| first.row(j)).collect();
    for part in rest {
        let mut next = Vec::with_capacity(rows.len() * part.rows());
        for row in &rows {
            for j in 0..part.rows() {
                next.push(linalg::kron_row(row, &part.row(j)));
            }
        }
        rows = next;
    }
    let m = rows.len();
    let x = CMatrix::from_row_iterator(m, dimension, rows.into_iter().flatten());
    let name = if parts.iter().all(|p| p.name == first.name) {
        format!("{}^{}", first.name, parts.len())
    } else {
        parts.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join("*")
    };
    let mut out = Protocol::new(name, x)?;
    // Product of the factors' trace factors, exact rather than re-estimated.
    if let Some(a) = parts.iter().map(|p| p.trace_factor).product::<Option<f64>>() {
        out.trace_factor = Some(a);
    }
    Ok(out)
}

/// `Lambda_j = X_j^dagger X_j`, the rank-1 intensity operator of row `j`
/// (zero-based).
pub fn intensity_operator(p: &Protocol, j: usize) -> Result<CMatrix> {
    if j >= p.rows() {
        return Err(TomoError::IndexOutOfRange {
            index: j,
            rows: p.rows(),
        });
    }
    let row = p.x.row(j);
    Ok(row.adjoint() * row)
}

/// A state given either as a purified amplitude or as a density matrix.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Amplitude(&'a PurifiedAmplitude),
    Density(&'a DensityMatrix),
}

impl<'a> From<&'a PurifiedAmplitude> for StateRef<'a> {
    fn from(c: &'a PurifiedAmplitude) -> Self {
        StateRef::Amplitude(c)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(rho: &'a DensityMatrix) -> Self {
        StateRef::Density(rho)
    }
}

impl StateRef<'_> {
    fn dim(&self) -> usize {
        match self {
            StateRef::Amplitude(c) => c.dim(),
            StateRef::Density(rho) => rho.dim(),
        }
    }
}

/// Event intensities `lambda_j = Tr(Lambda_j rho)`. For amplitudes this is
/// `sum_k |X_j c_k|^2`, which for rank 1 is `|M_j|^2` with `M = X c`.
pub fn intensities<'a>(p: &Protocol, state: impl Into<StateRef<'a>>) -> Result<Vec<f64>> {
    let state = state.into();
    if state.dim() != p.dim() {
        return Err(TomoError::DimensionMismatch {
            expected: p.dim(),
            found: state.dim(),
        });
    }
    Ok(match state {
        StateRef::Amplitude(c) => amplitude_intensities(&p.x, c.matrix()),
        StateRef::Density(rho) => {
            let xr = &p.x * rho.matrix();
            (0..p.rows())
                .map(|j| {
                    let v: C64 = xr
                        .row(j)
                        .iter()
                        .zip(p.x.row(j).iter())
                        .map(|(a, b)| a * b.conj())
                        .sum();
                    v.re.max(0.0)
                })
                .collect()
        }
    })
}

pub(crate) fn amplitude_intensities(x: &CMatrix, c: &CMatrix) -> Vec<f64> {
    let m = x * c;
    (0..m.nrows())
        .map(|j| m.row(j).iter().map(|z| z.norm_sqr()).sum())
        .collect()
}

/// Uniform exposures `t_j = n / a`, so that the expected total number of
/// events is `n` for every unit-trace state.
pub fn assign_exposures(p: &Protocol, n: f64) -> Result<Protocol> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(TomoError::InvalidArgument(format!(
            "sample size must be positive, got {n}"
        )));
    }
    let a = completeness_factor(p)?;
    p.clone().with_exposures(vec![n / a; p.rows()])
}
