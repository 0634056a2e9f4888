//! Asymptotic accuracy of the maximum-likelihood estimate: the Fisher
//! information `H`, the quadratic form `B` of the fidelity loss, the
//! chi-square-mixture coefficients `d_j` with `1 - F ~ sum_j d_j xi_j^2`, and
//! the loss functional `L = n sum_j d_j`.
//!
//! Parameters are real: `theta = (Re vec c, Im vec c)` with `vec` column-major,
//! the same layout as [`linalg::realify`].

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Result, TomoError};
use crate::linalg::{self, CMatrix, RMatrix, C64};
use crate::nelder_mead::{self, NelderMeadOptions};
use crate::par::{self, Execution};
use crate::protocols::{assign_exposures, Protocol};
use crate::seeds::{child_seed, rng_from_seed};
use crate::states::{random_pure, uhlmann, PurifiedAmplitude};

/// Rows whose intensity is below this contribute nothing to `H`.
pub const INTENSITY_EPSILON: f64 = 1e-12;
/// Eigenvalues of `H` below this fraction of the largest count as zero.
pub const H_ZERO_RATIO: f64 = 1e-8;
/// Eigenvalues of `Sigma^1/2 B Sigma^1/2` below this fraction of the largest are discarded.
pub const D_ZERO_RATIO: f64 = 1e-10;
/// Finite-difference step for the fidelity Hessian.
pub const HESSIAN_STEP: f64 = 1e-4;

const SAMPLE_CHUNK: usize = 8192;

#[derive(Debug, Clone, PartialEq)]
pub struct InformationMatrix {
    pub h: RMatrix,
    pub dim: usize,
    pub rank: usize,
    /// `sum_j t_j lambda_j`, the expected number of events.
    pub n_expected: f64,
}

impl InformationMatrix {
    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::symmetric_eigen(&self.h).0
    }

    /// Number of eigenvalues below `1e-8` times the largest.
    pub fn zero_count(&self) -> usize {
        let ev = self.eigenvalues();
        let cut = H_ZERO_RATIO * ev[0].max(0.0);
        ev.iter().filter(|&&v| v <= cut).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossModel {
    /// Positive coefficients, descending.
    pub d: Vec<f64>,
    pub nu: usize,
    pub n: f64,
    /// `sum d`, the expected fidelity loss.
    pub mean_loss: f64,
    /// `n sum d`.
    pub loss: f64,
}

impl LossModel {
    /// A model with given coefficients, e.g. for tests of the sampling code.
    pub fn from_coefficients(d: Vec<f64>, n: f64) -> Self {
        let mean_loss = d.iter().sum();
        Self {
            nu: d.len(),
            loss: n * mean_loss,
            mean_loss,
            n,
            d,
        }
    }
}

/// `(2s - r) r - 1`, the number of free real parameters of a rank-`r` state.
pub fn degrees_of_freedom(s: usize, r: usize) -> usize {
    (2 * s - r) * r - 1
}

/// Gradient of `lambda_j = ||X_j c||^2` with respect to `theta`:
/// `2 (Re vec(Lambda_j c), Im vec(Lambda_j c))`.
pub fn intensity_gradient(p: &Protocol, j: usize, c: &PurifiedAmplitude) -> Result<Vec<f64>> {
    if j >= p.rows() {
        return Err(TomoError::IndexOutOfRange {
            index: j,
            rows: p.rows(),
        });
    }
    check_dim(p, c)?;
    let row = p.matrix().row(j);
    let xc = row * c.matrix();
    let w = row.adjoint() * xc;
    Ok(linalg::realify(&w).iter().map(|v| 2.0 * v).collect())
}

fn check_dim(p: &Protocol, c: &PurifiedAmplitude) -> Result<()> {
    if p.dim() != c.dim() {
        return Err(TomoError::DimensionMismatch {
            expected: p.dim(),
            found: c.dim(),
        });
    }
    Ok(())
}

/// Poisson Fisher information `H = sum_j (t_j / lambda_j) g_j g_j^T`.
pub fn information_matrix(p: &Protocol, c: &PurifiedAmplitude) -> Result<InformationMatrix> {
    check_dim(p, c)?;
    if p.trace_factor().is_none() {
        return Err(TomoError::IncompleteProtocol);
    }
    let t = p.require_exposures()?;
    let x = p.matrix();
    let (s, r) = (c.dim(), c.rank());
    let xc = x * c.matrix();
    let dim = 2 * s * r;
    let mut g = RMatrix::zeros(x.nrows(), dim);
    let mut n_expected = 0.0;
    for j in 0..x.nrows() {
        let lam: f64 = xc.row(j).iter().map(|z| z.norm_sqr()).sum();
        n_expected += t[j] * lam;
        if lam < INTENSITY_EPSILON {
            continue;
        }
        let scale = 2.0 * (t[j] / lam).sqrt();
        // vec(Lambda_j c)[k s + l] = conj(X_jl) (X_j c)_k
        for k in 0..r {
            for l in 0..s {
                let v = x[(j, l)].conj() * xc[(j, k)];
                g[(j, k * s + l)] = scale * v.re;
                g[(j, s * r + k * s + l)] = scale * v.im;
            }
        }
    }
    let h = g.transpose() * &g;
    Ok(InformationMatrix {
        h: (&h + h.transpose()) * 0.5,
        dim: s,
        rank: r,
        n_expected,
    })
}

/// `1 - F(c, normalize(c + delta))`.
fn infidelity_at(c: &CMatrix, theta: &[f64]) -> f64 {
    let (s, r) = (c.nrows(), c.ncols());
    let moved = c + linalg::complexify(theta, s, r);
    let norm = linalg::frobenius_norm(&moved);
    1.0 - uhlmann(c, &(moved / C64::new(norm, 0.0)))
}

/// Central-difference Hessian of `1 - F` around `c`, halved so that
/// `1 - F ~ delta^T B delta`. Off-diagonal entries use the polarization
/// identity on `e_i + e_j` and `e_i - e_j`.
pub fn fidelity_hessian_raw(c: &PurifiedAmplitude, step: f64) -> RMatrix {
    let c = c.matrix();
    let dim = 2 * c.len();
    let mut delta = vec![0.0; dim];
    let mut f = |entries: &[(usize, f64)]| {
        for &(i, v) in entries {
            delta[i] = v;
        }
        let out = infidelity_at(c, &delta);
        for &(i, _) in entries {
            delta[i] = 0.0;
        }
        out
    };
    let h = step;
    let mut b = RMatrix::zeros(dim, dim);
    for i in 0..dim {
        b[(i, i)] = (f(&[(i, h)]) + f(&[(i, -h)])) / (2.0 * h * h);
        for j in 0..i {
            let plus = f(&[(i, h), (j, h)]) + f(&[(i, -h), (j, -h)]);
            let minus = f(&[(i, h), (j, -h)]) + f(&[(i, -h), (j, h)]);
            let v = (plus - minus) / (8.0 * h * h);
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    b
}

/// Orthonormal basis (columns) of the directions along which the state does
/// not change: the radial direction `c` and the gauge directions `c A` for
/// anti-Hermitian `A`.
pub fn invariant_directions(c: &PurifiedAmplitude) -> RMatrix {
    let c = c.matrix();
    let r = c.ncols();
    let mut dirs: Vec<nalgebra::DVector<f64>> = vec![linalg::realify(c)];
    let i = C64::new(0.0, 1.0);
    for p in 0..r {
        for q in 0..=p {
            let mut a = CMatrix::zeros(r, r);
            if p == q {
                a[(p, p)] = i;
                dirs.push(linalg::realify(&(c * &a)));
            } else {
                a[(p, q)] = C64::new(1.0, 0.0);
                a[(q, p)] = C64::new(-1.0, 0.0);
                dirs.push(linalg::realify(&(c * &a)));
                a[(p, q)] = i;
                a[(q, p)] = i;
                dirs.push(linalg::realify(&(c * &a)));
            }
        }
    }
    let m = RMatrix::from_columns(&dirs);
    let svd = m.svd(true, false);
    let u = svd.u.expect("requested U");
    let top = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > 1e-10 * top)
        .collect();
    RMatrix::from_columns(&keep.iter().map(|&k| u.column(k).into_owned()).collect::<Vec<_>>())
}

/// Fidelity Hessian `B`: the finite-difference Hessian with the invariant
/// directions projected out, which removes difference noise along them.
pub fn fidelity_hessian(c: &PurifiedAmplitude) -> RMatrix {
    let raw = fidelity_hessian_raw(c, HESSIAN_STEP);
    let q = invariant_directions(c);
    let proj = RMatrix::identity(raw.nrows(), raw.nrows()) - &q * q.transpose();
    let b = &proj * raw * &proj;
    (&b + b.transpose()) * 0.5
}

/// Closed form for rank one: the projector orthogonal to `(Re c, Im c)` and
/// `(-Im c, Re c)`.
pub fn pure_fidelity_hessian(c: &PurifiedAmplitude) -> Result<RMatrix> {
    if c.rank() != 1 {
        return Err(TomoError::InvalidArgument("closed form needs rank 1".into()));
    }
    let a = linalg::realify(c.matrix());
    let b = linalg::realify(&(c.matrix() * C64::new(0.0, 1.0)));
    let n = a.len();
    Ok(RMatrix::identity(n, n) - &a * a.transpose() - &b * b.transpose())
}

/// `d` = nonzero eigenvalues of `Sigma^1/2 B Sigma^1/2`, `Sigma = pinv(H)`.
pub fn loss_coefficients(h: &InformationMatrix, b: &RMatrix) -> Result<LossModel> {
    let dim = h.h.nrows();
    if b.nrows() != dim || b.ncols() != dim {
        return Err(TomoError::DimensionMismatch {
            expected: dim,
            found: b.nrows(),
        });
    }
    let (ev, vecs) = linalg::symmetric_eigen(&h.h);
    let cut = H_ZERO_RATIO * ev[0].max(0.0);
    let mut sqrt_sigma = RMatrix::zeros(dim, dim);
    for (k, &v) in ev.iter().enumerate() {
        if v > cut {
            let col = vecs.column(k);
            sqrt_sigma += (col * col.transpose()) / v.sqrt();
        }
    }
    let m = &sqrt_sigma * b * &sqrt_sigma;
    let (dev, _) = linalg::symmetric_eigen(&((&m + m.transpose()) * 0.5));
    let dcut = D_ZERO_RATIO * dev[0].max(0.0);
    let d: Vec<f64> = dev.into_iter().filter(|&v| v > dcut).collect();
    let nu = degrees_of_freedom(h.dim, h.rank);
    if d.len() != nu {
        return Err(TomoError::DegeneratePrecisionModel {
            expected: nu,
            found: d.len(),
        });
    }
    Ok(LossModel::from_coefficients(d, h.n_expected))
}

/// Loss model at true amplitude `c` for a protocol with exposures.
pub fn loss_model(p: &Protocol, c: &PurifiedAmplitude) -> Result<LossModel> {
    let h = information_matrix(p, c)?;
    loss_coefficients(&h, &fidelity_hessian(c))
}

/// `count` draws of `sum_j d_j xi_j^2`. Draws are generated in chunks of
/// 8192, chunk `i` from stream `child_seed(seed, i)`, so the result does not
/// depend on `exec`.
pub fn loss_distribution_samples(model: &LossModel, count: usize, seed: u64, exec: Execution) -> Vec<f64> {
    let chunks = count.div_ceil(SAMPLE_CHUNK);
    par::map_indexed(exec, chunks, |i| {
        let mut rng = rng_from_seed(child_seed(seed, i as u64));
        let len = SAMPLE_CHUNK.min(count - i * SAMPLE_CHUNK);
        (0..len)
            .map(|_| {
                model
                    .d
                    .iter()
                    .map(|&d| {
                        let xi: f64 = StandardNormal.sample(&mut rng);
                        d * xi * xi
                    })
                    .sum()
            })
            .collect::<Vec<f64>>()
    })
    .concat()
}

/// `L_min = s - 1`, the smallest loss attainable for pure states.
pub fn minimal_loss(s: usize) -> Result<f64> {
    if s < 2 {
        return Err(TomoError::InvalidArgument("dimension must be at least 2".into()));
    }
    Ok((s - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    pub starts: usize,
    /// Objective evaluations per start, shared by the local restarts.
    pub max_evaluations: usize,
    pub spread_tolerance: f64,
    pub initial_step: f64,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            starts: 64,
            max_evaluations: 2000,
            spread_tolerance: 1e-6,
            initial_step: 0.2,
            seed: 0,
            exec: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossMaximum {
    pub state: PurifiedAmplitude,
    pub loss: f64,
    pub start: usize,
    pub evaluations: usize,
    /// Best value reached from each start, in start order.
    pub start_values: Vec<f64>,
}

/// `L(c)` for a pure state given by `2s` real coordinates (renormalized).
fn loss_at(p: &Protocol, x: &[f64]) -> Option<f64> {
    let s = p.dim();
    let m = linalg::complexify(x, s, 1);
    let c = PurifiedAmplitude::normalized(m).ok()?;
    loss_model(p, &c).ok().map(|m| m.loss)
}

/// Multi-start Nelder–Mead maximization of `L` over pure states.
///
/// Each start is a Haar-random state from `child_seed(settings.seed, i)`.
/// Within a start, the simplex is rebuilt around the best point whenever it
/// collapses, until the evaluation budget is spent or a rebuilt simplex stops
/// improving. The best start wins, ties going to the lower index.
pub fn maximize_loss(p: &Protocol, n: f64, settings: &OptimizerSettings) -> Result<LossMaximum> {
    if settings.starts == 0 || settings.max_evaluations == 0 {
        return Err(TomoError::InvalidArgument("optimizer needs starts and evaluations".into()));
    }
    let p = assign_exposures(p, n)?;
    let s = p.dim();
    let results = par::try_map_indexed(settings.exec, settings.starts, |i| {
        let start = random_pure(s, child_seed(settings.seed, i as u64))?;
        Ok(local_search(&p, start, settings))
    })?;
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.1 > results[best].1 {
            best = i;
        }
    }
    let evaluations = results.iter().map(|r| r.2).sum();
    let start_values = results.iter().map(|r| r.1).collect();
    let (x, loss, _) = results[best].clone();
    if !loss.is_finite() {
        return Err(TomoError::Numerical("no start produced a valid precision model".into()));
    }
    let state = PurifiedAmplitude::normalized(linalg::complexify(&x, s, 1))?;
    Ok(LossMaximum {
        state,
        loss,
        start: best,
        evaluations,
        start_values,
    })
}

fn local_search(p: &Protocol, start: PurifiedAmplitude, settings: &OptimizerSettings) -> (Vec<f64>, f64, usize) {
    let objective = |x: &[f64]| loss_at(p, x).map_or(f64::INFINITY, |l| -l);
    let mut x: Vec<f64> = linalg::realify(start.matrix()).iter().copied().collect();
    let mut value = f64::INFINITY;
    let mut used = 0;
    while used < settings.max_evaluations {
        let opts = NelderMeadOptions {
            initial_step: settings.initial_step,
            max_evaluations: settings.max_evaluations - used,
            spread_tolerance: settings.spread_tolerance,
        };
        let res = nelder_mead::minimize(objective, &x, &opts);
        used += res.evaluations;
        let improved = res.value < value - settings.spread_tolerance;
        if res.value < value {
            value = res.value;
            // Keep iterates on the unit sphere so the simplex scale stays meaningful.
            let norm = res.x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x = res.x.iter().map(|v| v / norm).collect();
        }
        if !improved {
            break;
        }
    }
    (x, -value, used)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{cube, qubit_protocol};
    use crate::states::{basis_state, ghz, ghz_mixture, random_amplitude};
    use approx::assert_relative_eq;

    fn tetra3(n: f64) -> Protocol {
        assign_exposures(&qubit_protocol("tetrahedron", 3).unwrap(), n).unwrap()
    }

    #[test]
    fn cube_information_eigenvalues() {
        let n = 300.0;
        let p = assign_exposures(&cube(), n).unwrap();
        let h = information_matrix(&p, &basis_state(2, 0).unwrap()).unwrap();
        let ev = h.eigenvalues();
        let want = [4.0 * n, 4.0 * n / 3.0, 4.0 * n / 3.0, 0.0];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-9 * n, "{ev:?}");
        }
        assert_relative_eq!(h.n_expected, n, max_relative = 1e-12);
    }

    #[test]
    fn phase_direction_is_null() {
        let p = tetra3(1e5);
        for seed in 0..10 {
            let c = random_pure(8, seed).unwrap();
            let h = information_matrix(&p, &c).unwrap();
            let ic = linalg::realify(&(c.matrix() * C64::new(0.0, 1.0)));
            let hv = &h.h * &ic;
            assert!(hv.amax() < 1e-8 * h.eigenvalues()[0], "{}", hv.amax());
        }
    }

    #[test]
    fn ghz_has_one_zero_eigenvalue() {
        let h = information_matrix(&tetra3(1e5), &ghz(3).unwrap()).unwrap();
        assert_eq!(h.zero_count(), 1);
        assert_eq!(h.h.nrows() - h.zero_count(), 15);
    }

    #[test]
    fn incomplete_protocol_rejected() {
        let p = tetra3(1e5).without_row(0).unwrap();
        assert!(matches!(
            information_matrix(&p, &ghz(3).unwrap()),
            Err(TomoError::IncompleteProtocol)
        ));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let p = tetra3(1.0);
        let h = 1e-6;
        for seed in 0..20 {
            let c = random_amplitude(8, 1 + (seed as usize % 3), seed).unwrap();
            let j = (seed as usize * 7) % 64;
            let g = intensity_gradient(&p, j, &c).unwrap();
            let base = linalg::realify(c.matrix());
            let lam = |theta: &[f64]| {
                let m = linalg::complexify(theta, 8, c.rank());
                (p.matrix().row(j) * m).iter().map(|z| z.norm_sqr()).sum::<f64>()
            };
            let scale = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
            for i in 0..g.len() {
                let mut up: Vec<f64> = base.iter().copied().collect();
                let mut down = up.clone();
                up[i] += h;
                down[i] -= h;
                let fd = (lam(&up) - lam(&down)) / (2.0 * h);
                assert!((fd - g[i]).abs() <= 1e-6 * scale, "{fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn ghz_hessian_spectrum() {
        let b = fidelity_hessian(&ghz(3).unwrap());
        let ev = linalg::symmetric_eigen(&b).0;
        for v in &ev[..14] {
            assert!((v - 1.0).abs() < 1e-6, "{ev:?}");
        }
        for v in &ev[14..] {
            assert!(v.abs() < 1e-6);
        }
    }

    #[test]
    fn hessian_matches_pure_closed_form() {
        for seed in 0..5 {
            let c = random_pure(8, seed).unwrap();
            let closed = pure_fidelity_hessian(&c).unwrap();
            assert!((fidelity_hessian(&c) - &closed).amax() < 1e-6);
            let raw = fidelity_hessian_raw(&c, HESSIAN_STEP);
            assert!((raw - &closed).amax() < 1e-6);
            let radial = linalg::realify(c.matrix());
            assert!((fidelity_hessian(&c) * radial).amax() < 1e-6);
        }
    }

    #[test]
    fn hessian_predicts_small_losses() {
        let c = random_amplitude(4, 2, 3).unwrap();
        let b = fidelity_hessian(&c);
        let mut rng = rng_from_seed(9);
        for _ in 0..5 {
            let z = linalg::complex_gaussian(4, 2, &mut rng);
            let delta = linalg::realify(&z) * 1e-4;
            let exact = infidelity_at(c.matrix(), delta.as_slice());
            let quad = (delta.transpose() * &b * &delta)[(0, 0)];
            assert!((exact - quad).abs() < 1e-3 * exact, "{exact} vs {quad}");
        }
    }

    #[test]
    fn mixture_hessian_has_gauge_null_space() {
        let rho = ghz_mixture(0.5, 8).unwrap();
        let c = rho.purification(Some(8));
        let raw = fidelity_hessian_raw(&c, HESSIAN_STEP);
        let q = invariant_directions(&c);
        assert_eq!(q.ncols(), 65);
        // Gauge and radial directions are null for the raw difference Hessian too.
        assert!((&raw * &q).amax() < 1e-5);
        let ev = linalg::symmetric_eigen(&fidelity_hessian(&c)).0;
        assert!(ev.iter().all(|&v| v > -1e-5));
        assert_eq!(ev.iter().filter(|&&v| v.abs() < 1e-5).count(), 65);
    }

    #[test]
    fn cube_loss_coefficients() {
        let n = 1e3;
        let p = assign_exposures(&cube(), n).unwrap();
        let m = loss_model(&p, &basis_state(2, 0).unwrap()).unwrap();
        assert_eq!(m.nu, 2);
        for d in &m.d {
            assert_relative_eq!(*d, 3.0 / (4.0 * n), max_relative = 1e-6);
        }
        assert_relative_eq!(m.loss, 1.5, max_relative = 1e-6);
    }

    #[test]
    fn d_scales_inversely_with_n() {
        let c = random_pure(8, 4).unwrap();
        let a = loss_model(&tetra3(1.0), &c).unwrap();
        let b = loss_model(&tetra3(1e5), &c).unwrap();
        for (x, y) in a.d.iter().zip(&b.d) {
            assert_relative_eq!(x / 1e5, *y, max_relative = 1e-8);
        }
        assert_relative_eq!(a.loss, b.loss, max_relative = 1e-8);
    }

    #[test]
    fn nonzero_count_matches_degrees_of_freedom() {
        let p = tetra3(1e5);
        for (r, seed) in [(1, 0), (2, 1), (3, 2), (8, 3)] {
            let c = random_amplitude(8, r, seed).unwrap();
            let h = information_matrix(&p, &c).unwrap();
            assert_eq!(h.zero_count(), r * r);
            let m = loss_model(&p, &c).unwrap();
            assert_eq!(m.nu, degrees_of_freedom(8, r));
            assert!(m.d.iter().all(|&d| d > 0.0));
        }
    }

    #[test]
    fn rank_deficient_amplitude_is_degenerate() {
        // A rank-2 model at a pure state: the second column is zero.
        let m = ghz(3).unwrap().into_matrix().insert_column(1, C64::new(0.0, 0.0));
        let c = PurifiedAmplitude::new(m).unwrap();
        assert!(matches!(
            loss_model(&tetra3(1e5), &c),
            Err(TomoError::DegeneratePrecisionModel { .. })
        ));
    }

    #[test]
    fn sample_mean_and_zero_model() {
        let zero = LossModel::from_coefficients(vec![0.0; 3], 1.0);
        assert!(loss_distribution_samples(&zero, 100, 1, Execution::Parallel)
            .iter()
            .all(|&v| v == 0.0));
        let model = LossModel::from_coefficients(vec![3e-6, 1e-6, 5e-7, 2e-7], 1e5);
        let draws = 1_000_000;
        let samples = loss_distribution_samples(&model, draws, 7, Execution::Parallel);
        assert_eq!(samples.len(), draws);
        let mean = samples.iter().sum::<f64>() / draws as f64;
        let var: f64 = model.d.iter().map(|d| 2.0 * d * d).sum();
        assert!((mean - model.mean_loss).abs() < 3.0 * (var / draws as f64).sqrt());
    }

    #[test]
    fn samples_independent_of_execution() {
        let model = LossModel::from_coefficients(vec![1.0, 0.5], 1.0);
        assert_eq!(
            loss_distribution_samples(&model, 20_000, 3, Execution::Parallel),
            loss_distribution_samples(&model, 20_000, 3, Execution::Sequential)
        );
    }

    #[test]
    fn minimal_loss_values() {
        assert_eq!(minimal_loss(8).unwrap(), 7.0);
        assert_eq!(minimal_loss(4).unwrap(), 3.0);
        assert_eq!(minimal_loss(2).unwrap(), 1.0);
        assert!(minimal_loss(1).is_err());
    }

    #[test]
    fn maximize_on_cube_is_bounded_below() {
        let settings = OptimizerSettings {
            starts: 4,
            max_evaluations: 300,
            ..Default::default()
        };
        let best = maximize_loss(&cube(), 1.0, &settings).unwrap();
        assert!(best.loss >= minimal_loss(2).unwrap());
        assert!(best.start_values.iter().all(|&v| v <= best.loss));
        assert_eq!(best.start_values.len(), 4);
        let again = maximize_loss(
            &cube(),
            1.0,
            &OptimizerSettings {
                exec: Execution::Sequential,
                ..settings
            },
        )
        .unwrap();
        assert_eq!(best, again);
    }
}
