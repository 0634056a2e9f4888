//! Monte Carlo campaigns: draw counts from a known state, reconstruct, and
//! compare the fidelity losses with the asymptotic loss model.

mod config;
mod output;

pub use config::{CampaignConfig, StateSpec, KEYS};
pub use output::{
    optimization_report, precision_report, read_state_file, write_campaign, write_optimization,
    write_precision, OptimizationReport, PrecisionReport,
};

use serde::Serialize;

use crate::degenerate;
use crate::error::{Result, TomoError};
use crate::estimation::solve_likelihood;
use crate::par::{self, Execution};
use crate::precision::{self, loss_distribution_samples, LossModel};
use crate::protocols::{assign_exposures, qubit_protocol, Protocol};
use crate::sampling::{draw_counts, CountData};
use crate::seeds::{child_seed, run_seed};
use crate::states::{
    fidelity_amplitudes, ghz, ghz_mixture, nines, w_state, DensityMatrix, PurifiedAmplitude,
};
use crate::stats;

/// Sub-stream of the base seed used for theoretical loss samples.
pub const THEORY_STREAM: u64 = 0x7468_656f_7279;
/// Number of grid points of the theoretical z density.
pub const THEORY_GRID: usize = 200;
/// Eigenvalues of the true state above this count towards its rank.
pub const STATE_RANK_TOL: f64 = 1e-10;

/// The state counts are drawn from.
#[derive(Debug, Clone)]
pub struct TrueState {
    pub rho: DensityMatrix,
    /// Purification with as many columns as the state's rank.
    pub amplitude: PurifiedAmplitude,
}

impl TrueState {
    pub fn rank(&self) -> usize {
        self.amplitude.rank()
    }

    fn from_amplitude(amplitude: PurifiedAmplitude) -> Self {
        Self {
            rho: amplitude.density(),
            amplitude,
        }
    }

    fn from_density(rho: DensityMatrix) -> Self {
        let rank = rho.numerical_rank(STATE_RANK_TOL).max(1);
        let amplitude = rho.purification(Some(rank));
        Self { rho, amplitude }
    }
}

/// Tensor protocol for the configured qubits, reduced to the symmetric
/// subspace when `degenerate` is set, with exposures `t = n / a`.
pub fn build_protocol(cfg: &CampaignConfig) -> Result<Protocol> {
    let mut p = qubit_protocol(&cfg.protocol, cfg.qubits)?;
    if cfg.degenerate {
        p = degenerate::reduce_protocol(&p)?;
    }
    assign_exposures(&p, cfg.n)
}

pub fn build_true_state(cfg: &CampaignConfig) -> Result<TrueState> {
    let reduce = |c: PurifiedAmplitude| -> Result<PurifiedAmplitude> {
        if cfg.degenerate {
            Ok(degenerate::project_state(&c)?.0)
        } else {
            Ok(c)
        }
    };
    Ok(match &cfg.state {
        StateSpec::Ghz => TrueState::from_amplitude(reduce(ghz(cfg.qubits)?)?),
        StateSpec::W => TrueState::from_amplitude(reduce(w_state(cfg.qubits)?)?),
        StateSpec::GhzMixture { weight } => {
            TrueState::from_density(ghz_mixture(*weight, cfg.dimension())?)
        }
        StateSpec::File { path } => {
            let rho = read_state_file(path)?;
            if rho.dim() != cfg.dimension() {
                return Err(TomoError::Config(format!(
                    "state file has dimension {}, configuration needs {}",
                    rho.dim(),
                    cfg.dimension()
                )));
            }
            TrueState::from_density(rho)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub total_counts: f64,
    pub iterations: usize,
    pub converged: bool,
    pub fidelity: f64,
    pub z: f64,
    pub log_likelihood: f64,
    pub initial_log_likelihood: f64,
    pub final_residual: f64,
}

impl RunRecord {
    pub fn loss(&self) -> f64 {
        1.0 - self.fidelity
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregates {
    pub runs: usize,
    pub converged_runs: usize,
    /// Converged runs whose final likelihood is below the initial one.
    pub likelihood_decreased_runs: usize,
    pub mean_fidelity: f64,
    pub mean_loss: f64,
    /// Standard error of `mean_loss`.
    pub loss_standard_error: f64,
    /// `n * mean(1 - F)`.
    pub empirical_loss: f64,
    pub mean_z: f64,
    pub mean_iterations: f64,
}

impl Aggregates {
    /// Summary of `records` in run order; `n` is the configured sample size.
    pub fn from_records(records: &[RunRecord], n: f64) -> Self {
        let count = records.len() as f64;
        let mean = |f: &dyn Fn(&RunRecord) -> f64| records.iter().map(f).sum::<f64>() / count;
        let mean_loss = mean(&|r| r.loss());
        let var = if records.len() > 1 {
            records
                .iter()
                .map(|r| (r.loss() - mean_loss).powi(2))
                .sum::<f64>()
                / (count - 1.0)
        } else {
            0.0
        };
        Self {
            runs: records.len(),
            converged_runs: records.iter().filter(|r| r.converged).count(),
            likelihood_decreased_runs: records
                .iter()
                .filter(|r| r.converged && r.log_likelihood < r.initial_log_likelihood)
                .count(),
            mean_fidelity: mean(&|r| r.fidelity),
            mean_loss,
            loss_standard_error: (var / count).sqrt(),
            empirical_loss: n * mean_loss,
            mean_z: mean(&|r| r.z),
            mean_iterations: mean(&|r| r.iterations as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheorySummary {
    pub model: LossModel,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryPoint {
    pub z: f64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub package: &'static str,
    pub version: &'static str,
    pub config: std::collections::BTreeMap<&'static str, String>,
}

impl Provenance {
    pub fn new(cfg: &CampaignConfig) -> Self {
        Self {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config: cfg.echo(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub provenance: Provenance,
    pub protocol: String,
    pub dimension: usize,
    pub rank: usize,
    pub true_rank: usize,
    pub aggregates: Aggregates,
    /// Absent when the model rank differs from the true rank, where the
    /// asymptotic model does not apply.
    pub theory: Option<TheorySummary>,
    pub records: Vec<RunRecord>,
    #[serde(skip)]
    pub hist_empirical: Vec<EmpiricalBin>,
    #[serde(skip)]
    pub hist_theory: Vec<TheoryPoint>,
    #[serde(skip)]
    pub counts: Vec<CountData>,
}

fn in_run(e: TomoError, run: usize, seed: u64) -> TomoError {
    let msg = format!("run {run} (seed {seed}): {e}");
    if e.exit_code() == 2 {
        TomoError::Config(msg)
    } else {
        TomoError::Numerical(msg)
    }
}

/// Counts for run `run`: Poisson draws from stream `run_seed(base, run)`, or
/// the exact expected counts when `noiseless` is set.
pub fn run_counts(cfg: &CampaignConfig, p: &Protocol, truth: &TrueState, run: usize) -> Result<CountData> {
    let seed = run_seed(cfg.base_seed, run as u64);
    if cfg.noiseless {
        let mut data = CountData::noiseless(p, &truth.rho)?;
        data.seed = seed;
        Ok(data)
    } else {
        draw_counts(p, &truth.rho, seed)
    }
}

/// Reconstruct every run at model rank `rank`; records come back in run order.
pub fn run_reconstructions(
    cfg: &CampaignConfig,
    p: &Protocol,
    truth: &TrueState,
    rank: usize,
    exec: Execution,
) -> Result<Vec<(RunRecord, CountData)>> {
    let mut rc = cfg.reconstruction();
    rc.rank = rank;
    par::try_map_indexed(exec, cfg.runs, |run| {
        let seed = run_seed(cfg.base_seed, run as u64);
        let attempt = || -> Result<(RunRecord, CountData)> {
            let counts = run_counts(cfg, p, truth, run)?;
            let mut rc = rc.clone();
            rc.init_seed = child_seed(seed, 1);
            let res = solve_likelihood(&counts, p, &rc)?;
            let fidelity = fidelity_amplitudes(&res.amplitude, &truth.amplitude)?;
            Ok((
                RunRecord {
                    run,
                    seed,
                    total_counts: counts.total(),
                    iterations: res.iterations,
                    converged: res.converged,
                    fidelity,
                    z: nines(fidelity),
                    log_likelihood: res.log_likelihood,
                    initial_log_likelihood: res.initial_log_likelihood,
                    final_residual: res.final_residual,
                },
                counts,
            ))
        };
        attempt().map_err(|e| in_run(e, run, seed))
    })
}

/// Loss model at the true state for model rank `rank`, or `None` when the
/// ranks differ.
pub fn true_loss_model(p: &Protocol, truth: &TrueState, rank: usize) -> Result<Option<LossModel>> {
    if truth.rank() != rank {
        return Ok(None);
    }
    precision::loss_model(p, &truth.amplitude).map(Some)
}

pub fn theory_samples(cfg: &CampaignConfig, model: &LossModel, exec: Execution) -> Vec<f64> {
    loss_distribution_samples(
        model,
        cfg.theory_samples,
        child_seed(cfg.base_seed, THEORY_STREAM),
        exec,
    )
}

pub fn run_campaign(cfg: &CampaignConfig, exec: Execution) -> Result<CampaignReport> {
    cfg.validate()?;
    let p = build_protocol(cfg)?;
    let truth = build_true_state(cfg)?;
    let model = true_loss_model(&p, &truth, cfg.rank)?;
    let runs = run_reconstructions(cfg, &p, &truth, cfg.rank, exec)?;
    let (records, counts): (Vec<RunRecord>, Vec<CountData>) = runs.into_iter().unzip();
    let aggregates = Aggregates::from_records(&records, cfg.n);
    let z: Vec<f64> = records.iter().map(|r| r.z).collect();
    let losses: Vec<f64> = records.iter().map(RunRecord::loss).collect();
    let hist_empirical = empirical_histogram(&z, cfg.bins);
    let (theory, hist_theory) = match model {
        Some(model) => {
            let samples = theory_samples(cfg, &model, exec);
            let (ks_statistic, ks_p_value) = ks_against_samples(&losses, &samples);
            let curve = theory_density(&samples, THEORY_GRID);
            (
                Some(TheorySummary {
                    model,
                    ks_statistic,
                    ks_p_value,
                    samples: samples.len(),
                }),
                curve,
            )
        }
        None => (None, Vec::new()),
    };
    Ok(CampaignReport {
        provenance: Provenance::new(cfg),
        protocol: p.name().to_string(),
        dimension: p.dim(),
        rank: cfg.rank,
        true_rank: truth.rank(),
        aggregates,
        theory,
        records,
        hist_empirical,
        hist_theory,
        counts: if cfg.write_counts { counts } else { Vec::new() },
    })
}

/// Equal-width histogram of `z` over `[min z, max z]` (widened by 0.5 on
/// each side when all values coincide), with densities integrating to 1.
pub fn empirical_histogram(z: &[f64], bins: usize) -> Vec<EmpiricalBin> {
    assert!(!z.is_empty() && bins > 0, "histogram needs values and bins");
    let mut lo = z.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 0.0 {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in z {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let total = z.len() as f64;
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| EmpiricalBin {
            left: lo + k as f64 * width,
            right: if k + 1 == bins { hi } else { lo + (k + 1) as f64 * width },
            count,
            density: count as f64 / (total * width),
        })
        .collect()
}

/// Histogram density of `z = -log10(loss)` for theoretical loss samples,
/// reported at the centers of `grid` equal bins spanning the samples' range.
pub fn theory_density(losses: &[f64], grid: usize) -> Vec<TheoryPoint> {
    let z: Vec<f64> = losses.iter().map(|&l| nines(1.0 - l)).collect();
    empirical_histogram(&z, grid)
        .into_iter()
        .map(|b| TheoryPoint {
            z: 0.5 * (b.left + b.right),
            density: b.density,
        })
        .collect()
}

/// Empirical and theoretical z tables for a set of runs.
pub fn emit_histogram(
    z: &[f64],
    bins: usize,
    model: &LossModel,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> (Vec<EmpiricalBin>, Vec<TheoryPoint>) {
    let draws = loss_distribution_samples(model, samples, seed, exec);
    (empirical_histogram(z, bins), theory_density(&draws, THEORY_GRID))
}

fn ks_against_samples(losses: &[f64], samples: &[f64]) -> (f64, f64) {
    let d = stats::ks_two_sample(losses, samples);
    let ne = stats::effective_size(losses.len(), samples.len());
    (d, stats::ks_p_value(d, ne))
}

/// Two-sample KS statistic and p-value of per-run losses against `samples`
/// draws from the loss model.
pub fn ks_statistic(
    losses: &[f64],
    model: &LossModel,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<(f64, f64)> {
    if losses.len() < 20 {
        return Err(TomoError::InvalidArgument("KS comparison needs at least 20 runs".into()));
    }
    let draws = loss_distribution_samples(model, samples, seed, exec);
    Ok(ks_against_samples(losses, &draws))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelComparison {
    pub pure_mean_loss: f64,
    pub full_mean_loss: f64,
    /// `full_mean_loss / pure_mean_loss`; absent for a degenerate comparison.
    pub ratio: Option<f64>,
    /// Set when the pure model's mean loss is below the convergence tolerance,
    /// so the ratio would be noise over noise.
    pub degenerate_comparison: bool,
}

/// Mean loss of the full-rank model over that of the pure model, both fitted
/// to the same per-run counts of a pure true state.
pub fn compare_models(cfg: &CampaignConfig, exec: Execution) -> Result<ModelComparison> {
    cfg.validate()?;
    let p = build_protocol(cfg)?;
    let truth = build_true_state(cfg)?;
    if truth.rank() != 1 {
        return Err(TomoError::InvalidArgument("model comparison needs a pure true state".into()));
    }
    let mean_loss = |rank: usize| -> Result<f64> {
        let runs = run_reconstructions(cfg, &p, &truth, rank, exec)?;
        let records: Vec<RunRecord> = runs.into_iter().map(|r| r.0).collect();
        Ok(Aggregates::from_records(&records, cfg.n).mean_loss)
    };
    let pure_mean_loss = mean_loss(1)?;
    let full_mean_loss = mean_loss(cfg.dimension())?;
    // Losses below the convergence tolerance are indistinguishable from zero.
    let degenerate_comparison = pure_mean_loss <= cfg.tolerance;
    Ok(ModelComparison {
        pure_mean_loss,
        full_mean_loss,
        ratio: (!degenerate_comparison).then(|| full_mean_loss / pure_mean_loss),
        degenerate_comparison,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(text: &str) -> CampaignConfig {
        CampaignConfig::parse(&format!("runs = 4\ntheory_samples = 20000\n{text}")).unwrap()
    }

    #[test]
    fn histogram_of_constant_values() {
        let h = empirical_histogram(&[4.0; 4], 1);
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].count, 4);
        assert!((h[0].density * (h[0].right - h[0].left) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_integrates_to_one() {
        let z: Vec<f64> = (0..97).map(|i| 3.0 + (i as f64 * 0.37).sin()).collect();
        let h = empirical_histogram(&z, 13);
        let total: f64 = h.iter().map(|b| b.density * (b.right - b.left)).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), 97);
    }

    #[test]
    fn octahedron_curve_sits_at_higher_z() {
        let mean_z = |name: &str| {
            let cfg = small(&format!("protocol = {name}"));
            let p = build_protocol(&cfg).unwrap();
            let truth = build_true_state(&cfg).unwrap();
            let model = true_loss_model(&p, &truth, 1).unwrap().unwrap();
            let curve = theory_density(&theory_samples(&cfg, &model, Execution::Parallel), 200);
            let w: f64 = curve.iter().map(|c| c.density).sum();
            curve.iter().map(|c| c.z * c.density).sum::<f64>() / w
        };
        assert!(mean_z("octahedron") > mean_z("tetrahedron"));
    }

    #[test]
    fn theory_omitted_for_rank_mismatch() {
        let report = run_campaign(&small("rank = 8\nmax_iterations = 50"), Execution::Parallel).unwrap();
        assert!(report.theory.is_none());
        assert_eq!(report.true_rank, 1);
    }

    #[test]
    fn report_is_self_consistent() {
        let cfg = small("n = 1e4");
        let report = run_campaign(&cfg, Execution::Parallel).unwrap();
        assert_eq!(report.records.len(), 4);
        assert_eq!(Aggregates::from_records(&report.records, cfg.n), report.aggregates);
        assert!(report.theory.is_some());
        let seq = run_campaign(&cfg, Execution::Sequential).unwrap();
        assert_eq!(seq, report);
    }

    #[test]
    fn degenerate_path_matches_full_intensities() {
        let cfg = small("degenerate = true");
        let full = small("");
        let p4 = build_protocol(&cfg).unwrap();
        let p8 = build_protocol(&full).unwrap();
        let a = crate::protocols::intensities(&p4, &build_true_state(&cfg).unwrap().rho).unwrap();
        let b = crate::protocols::intensities(&p8, &build_true_state(&full).unwrap().rho).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_comparison_is_flagged() {
        let cmp = compare_models(&small("noiseless = true\nqubits = 2\nprotocol = octahedron"), Execution::Parallel)
            .unwrap();
        assert!(cmp.degenerate_comparison, "{cmp:?}");
        assert!(cmp.ratio.is_none());
    }

    #[test]
    fn comparison_needs_pure_state() {
        let cfg = small("state = ghz_mixture\nmixture_weight = 0.5");
        assert!(compare_models(&cfg, Execution::Parallel).is_err());
    }

    #[test]
    fn ks_needs_twenty_runs() {
        let model = LossModel::from_coefficients(vec![1.0], 1.0);
        assert!(ks_statistic(&[0.5; 10], &model, 100, 1, Execution::Parallel).is_err());
    }
}
