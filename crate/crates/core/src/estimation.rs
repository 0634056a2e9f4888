//! Maximum-likelihood reconstruction by fixed-point iteration on the
//! likelihood equation `I c = J c`, with
//!
//! ```text
//! I = sum_j t_j Lambda_j,    J(c) = sum_j (k_j / lambda_j(c)) Lambda_j
//! ```
//!
//! The update is `c <- normalize(I^-1 J(c) c)`, optionally relaxed towards the
//! previous iterate. For rank `r > 1` the amplitude is an `s x r` matrix and
//! the update acts on all columns at once. Convergence is judged on density
//! matrices, since `c` is only defined up to `c -> c U`.

use statrs::function::gamma::ln_gamma;

use crate::error::{Result, TomoError};
use crate::linalg::{self, CMatrix, C64};
use crate::protocols::{amplitude_intensities, Protocol};
use crate::sampling::CountData;
use crate::seeds::{child_seed, rng_from_seed};
use crate::states::{uhlmann, DensityMatrix, PurifiedAmplitude};

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionConfig {
    /// Model rank `r`: 1 for a pure-state model, `s` for full rank.
    pub rank: usize,
    /// Stop once `1 - F(rho_i, rho_{i+1})` falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Independent random starts; the highest likelihood wins.
    pub restarts: usize,
    /// Floor applied to `lambda_j` on rows with `k_j > 0`.
    pub intensity_floor: f64,
    pub init_seed: u64,
    /// Weight of the previous iterate in the update (0 = plain step).
    pub damping: f64,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self {
            rank: 1,
            tolerance: 1e-10,
            max_iterations: 5000,
            restarts: 1,
            intensity_floor: 1e-12,
            init_seed: 0,
            damping: 0.0,
        }
    }
}

impl ReconstructionConfig {
    pub fn with_rank(rank: usize) -> Self {
        Self {
            rank,
            ..Self::default()
        }
    }

    pub fn validate(&self, s: usize) -> Result<()> {
        if self.rank == 0 || self.rank > s {
            return Err(TomoError::InvalidArgument(format!(
                "rank {} outside 1..={s}",
                self.rank
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(TomoError::InvalidArgument("tolerance must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(TomoError::InvalidArgument("need at least one start".into()));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(TomoError::InvalidArgument("damping must lie in [0, 1)".into()));
        }
        if !(self.intensity_floor > 0.0) {
            return Err(TomoError::InvalidArgument("intensity floor must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub amplitude: PurifiedAmplitude,
    pub density: DensityMatrix,
    pub iterations: usize,
    pub converged: bool,
    /// `||I c - J c||_F / ||I c||_F` at the returned amplitude.
    pub final_residual: f64,
    pub log_likelihood: f64,
    /// Log-likelihood at the starting point of the winning restart.
    pub initial_log_likelihood: f64,
    /// Index of the winning restart.
    pub restart: usize,
}

fn check_inputs(counts: &CountData, p: &Protocol, c: &CMatrix) -> Result<()> {
    if counts.rows() != p.rows() {
        return Err(TomoError::DimensionMismatch {
            expected: p.rows(),
            found: counts.rows(),
        });
    }
    if c.nrows() != p.dim() {
        return Err(TomoError::DimensionMismatch {
            expected: p.dim(),
            found: c.nrows(),
        });
    }
    Ok(())
}

fn poisson_log_likelihood(k: &[f64], t: &[f64], lam: &[f64], floor: f64) -> f64 {
    k.iter()
        .zip(t)
        .zip(lam)
        .map(|((&k, &t), &l)| {
            let mean = l * t;
            if k > 0.0 {
                k * mean.max(floor * t).ln() - mean - ln_gamma(k + 1.0)
            } else {
                -mean
            }
        })
        .sum()
}

/// Poisson log-likelihood `sum_j [k_j ln(lambda_j t_j) - lambda_j t_j - ln k_j!]`
/// with `lambda_j` floored at `1e-12` on rows that registered events.
pub fn log_likelihood(counts: &CountData, p: &Protocol, c: &PurifiedAmplitude) -> Result<f64> {
    check_inputs(counts, p, c.matrix())?;
    let lam = amplitude_intensities(p.matrix(), c.matrix());
    Ok(poisson_log_likelihood(
        &counts.k,
        &counts.t,
        &lam,
        ReconstructionConfig::default().intensity_floor,
    ))
}

/// The `I` and `J` matrices at amplitude `c`.
pub fn build_ij(
    counts: &CountData,
    p: &Protocol,
    c: &PurifiedAmplitude,
    floor: f64,
) -> Result<(CMatrix, CMatrix)> {
    check_inputs(counts, p, c.matrix())?;
    let x = p.matrix();
    let lam = amplitude_intensities(x, c.matrix());
    let w = likelihood_weights(&counts.k, &lam, floor);
    Ok((weighted_frame(x, &counts.t), weighted_frame(x, &w)))
}

fn likelihood_weights(k: &[f64], lam: &[f64], floor: f64) -> Vec<f64> {
    k.iter()
        .zip(lam)
        .map(|(&k, &l)| if k > 0.0 { k / l.max(floor) } else { 0.0 })
        .collect()
}

/// `sum_j w_j X_j^dagger X_j`.
fn weighted_frame(x: &CMatrix, w: &[f64]) -> CMatrix {
    let mut scaled = x.clone();
    for (j, &wj) in w.iter().enumerate() {
        scaled.row_mut(j).scale_mut(wj);
    }
    linalg::hermitian_part(&(x.adjoint() * scaled))
}

/// Stationarity measure `||I c - J c||_F / ||I c||_F`.
///
/// `c` is a normalized amplitude while the likelihood equation holds for the
/// unnormalized one, whose squared norm is the ratio of observed to expected
/// events. The residual is therefore evaluated at `alpha c` with
/// `alpha^2 = tr(c^dagger J c) / tr(c^dagger I c)`, using `J(alpha c) = J(c) / alpha^2`.
pub fn residual(counts: &CountData, p: &Protocol, c: &PurifiedAmplitude) -> Result<f64> {
    let (i, j) = build_ij(counts, p, c, ReconstructionConfig::default().intensity_floor)?;
    let ic = &i * c.matrix();
    let jc = &j * c.matrix();
    let cic = c.matrix().dotc(&ic).re;
    let cjc = c.matrix().dotc(&jc).re;
    if !(cic > 0.0 && cjc > 0.0) {
        return Ok(1.0);
    }
    let scaled = ic * C64::new(cjc / cic, 0.0);
    Ok(linalg::frobenius_norm(&(&scaled - &jc)) / linalg::frobenius_norm(&scaled))
}

enum InverseI {
    Scalar(f64),
    Matrix(CMatrix),
}

/// Precomputed pieces of the iteration for one data set.
struct Iteration<'a> {
    x: &'a CMatrix,
    x_adj: CMatrix,
    k: &'a [f64],
    t: &'a [f64],
    inv_i: InverseI,
    floor: f64,
    damping: f64,
}

impl<'a> Iteration<'a> {
    fn new(counts: &'a CountData, p: &'a Protocol, cfg: &ReconstructionConfig) -> Result<Self> {
        let a = p.trace_factor().ok_or(TomoError::IncompleteProtocol)?;
        let t = counts.t.as_slice();
        let uniform = t.iter().all(|&v| v == t[0]);
        let inv_i = if uniform {
            InverseI::Scalar(1.0 / (a * t[0]))
        } else {
            let i = weighted_frame(p.matrix(), t);
            let inv = i
                .cholesky()
                .ok_or_else(|| TomoError::Numerical("I matrix is not positive definite".into()))?
                .inverse();
            InverseI::Matrix(inv)
        };
        Ok(Self {
            x: p.matrix(),
            x_adj: p.matrix().adjoint(),
            k: &counts.k,
            t,
            inv_i,
            floor: cfg.intensity_floor,
            damping: cfg.damping,
        })
    }

    /// Returns `(J c, lambda)` at `c`.
    fn j_times(&self, c: &CMatrix) -> (CMatrix, Vec<f64>) {
        let mut m = self.x * c;
        let lam: Vec<f64> = (0..m.nrows())
            .map(|j| m.row(j).iter().map(|z| z.norm_sqr()).sum())
            .collect();
        let w = likelihood_weights(self.k, &lam, self.floor);
        for (j, &wj) in w.iter().enumerate() {
            m.row_mut(j).scale_mut(wj);
        }
        (&self.x_adj * m, lam)
    }

    fn apply_inverse_i(&self, v: CMatrix) -> CMatrix {
        match &self.inv_i {
            InverseI::Scalar(s) => v * C64::new(*s, 0.0),
            InverseI::Matrix(inv) => inv * v,
        }
    }

    fn log_likelihood(&self, c: &CMatrix) -> f64 {
        let lam = amplitude_intensities(self.x, c);
        poisson_log_likelihood(self.k, self.t, &lam, self.floor)
    }

    fn step(&self, c: &CMatrix) -> CMatrix {
        let (jc, _) = self.j_times(c);
        let mut next = self.apply_inverse_i(jc);
        if self.damping > 0.0 {
            next = next * C64::new(1.0 - self.damping, 0.0) + c * C64::new(self.damping, 0.0);
        }
        let norm = linalg::frobenius_norm(&next);
        next / C64::new(norm, 0.0)
    }
}

/// One update `c -> normalize(I^-1 J(c) c)` (with the configured damping).
pub fn fixed_point_step(
    counts: &CountData,
    p: &Protocol,
    c: &PurifiedAmplitude,
    cfg: &ReconstructionConfig,
) -> Result<PurifiedAmplitude> {
    check_inputs(counts, p, c.matrix())?;
    let it = Iteration::new(counts, p, cfg)?;
    PurifiedAmplitude::normalized(it.step(c.matrix()))
}

/// Random start: `r` orthonormalized complex Gaussian columns scaled to unit
/// Frobenius norm.
pub fn initial_amplitude(s: usize, r: usize, seed: u64) -> PurifiedAmplitude {
    let mut rng = rng_from_seed(seed);
    let z = linalg::complex_gaussian(s, r, &mut rng);
    let q = linalg::orthonormal_columns(&z).columns(0, r).into_owned();
    PurifiedAmplitude::normalized(q).expect("orthonormal columns are nonzero")
}

struct Run {
    c: CMatrix,
    iterations: usize,
    converged: bool,
    ll: f64,
    initial_ll: f64,
}

fn run_from(it: &Iteration<'_>, start: CMatrix, cfg: &ReconstructionConfig) -> Run {
    let initial_ll = it.log_likelihood(&start);
    let mut c = start;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        let next = it.step(&c);
        iterations += 1;
        let change = 1.0 - uhlmann(&c, &next);
        c = next;
        if change < cfg.tolerance {
            converged = true;
            break;
        }
    }
    let ll = it.log_likelihood(&c);
    Run {
        c,
        iterations,
        converged,
        ll,
        initial_ll,
    }
}

/// Maximum-likelihood amplitude of rank `cfg.rank` for `counts`.
///
/// Each restart `i` starts from [`initial_amplitude`] seeded with
/// `child_seed(cfg.init_seed, i)`. The restart with the highest final
/// log-likelihood is returned, ties going to the lower index. Hitting
/// `max_iterations` is not an error: the last iterate is returned with
/// `converged = false`.
pub fn solve_likelihood(
    counts: &CountData,
    p: &Protocol,
    cfg: &ReconstructionConfig,
) -> Result<ReconstructionResult> {
    let s = p.dim();
    cfg.validate(s)?;
    if counts.rows() != p.rows() {
        return Err(TomoError::DimensionMismatch {
            expected: p.rows(),
            found: counts.rows(),
        });
    }
    let it = Iteration::new(counts, p, cfg)?;
    let mut best: Option<(usize, Run)> = None;
    for restart in 0..cfg.restarts {
        let start = initial_amplitude(s, cfg.rank, child_seed(cfg.init_seed, restart as u64));
        let run = run_from(&it, start.into_matrix(), cfg);
        if !run.ll.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|(_, b)| run.ll > b.ll) {
            best = Some((restart, run));
        }
    }
    let (restart, run) = best.ok_or_else(|| {
        TomoError::Numerical("no restart reached a finite log-likelihood".into())
    })?;
    let amplitude = PurifiedAmplitude::normalized(run.c)?;
    let final_residual = residual(counts, p, &amplitude)?;
    Ok(ReconstructionResult {
        density: amplitude.density(),
        amplitude,
        iterations: run.iterations,
        converged: run.converged,
        final_residual,
        log_likelihood: run.ll,
        initial_log_likelihood: run.initial_ll,
        restart,
    })
}
