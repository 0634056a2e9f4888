//! Report files. CSV uses `,` separators, `.` decimals, LF line endings and
//! 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{
    build_protocol, build_true_state, theory_density, theory_samples, true_loss_model,
    CampaignConfig, CampaignReport, Provenance, THEORY_GRID,
};
use crate::error::{Result, TomoError};
use crate::linalg::CMatrix;
use crate::par::Execution;
use crate::precision::{self, information_matrix, minimal_loss, LossModel};
use crate::protocols::{fmt17, fmt_complex, parse_complex, Protocol};
use crate::states::{DensityMatrix, PurifiedAmplitude};

/// Density matrix from text: one matrix row per line, entries `re+imi`
/// separated by whitespace; blank lines and `#` comments ignored.
pub fn read_state_file(path: &Path) -> Result<DensityMatrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| TomoError::Config(format!("cannot read state file {}: {e}", path.display())))?;
    let rows: Vec<Vec<_>> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| l.split_whitespace().map(parse_complex).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let s = rows.len();
    if s == 0 || rows.iter().any(|r| r.len() != s) {
        return Err(TomoError::Config(format!(
            "state file {} is not a square matrix",
            path.display()
        )));
    }
    let m = CMatrix::from_row_iterator(s, s, rows.into_iter().flatten());
    DensityMatrix::new(m).map_err(|e| TomoError::Config(format!("state file {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| TomoError::Numerical(format!("cannot serialize report: {e}")))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn theory_csv(points: &[super::TheoryPoint]) -> String {
    let mut out = String::from("z,density\n");
    for p in points {
        let _ = writeln!(out, "{},{}", fmt17(p.z), fmt17(p.density));
    }
    out
}

fn count_field(k: f64) -> String {
    if k.fract() == 0.0 {
        format!("{k:.0}")
    } else {
        fmt17(k)
    }
}

/// `report.json`, `runs.csv`, `hist_empirical.csv`, `hist_theory.csv`,
/// `protocol.txt`, and `counts/run_NNNN.csv` when counts were kept.
pub fn write_campaign(report: &CampaignReport, protocol: &Protocol, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join("report.json"), report)?;

    let mut runs = String::from("run,seed,total_counts,iterations,converged,fidelity,z\n");
    for r in &report.records {
        let _ = writeln!(
            runs,
            "{},{},{},{},{},{},{}",
            r.run,
            r.seed,
            count_field(r.total_counts),
            r.iterations,
            r.converged,
            fmt17(r.fidelity),
            fmt17(r.z)
        );
    }
    fs::write(dir.join("runs.csv"), runs)?;

    let mut hist = String::from("bin_left,bin_right,count,density\n");
    for b in &report.hist_empirical {
        let _ = writeln!(
            hist,
            "{},{},{},{}",
            fmt17(b.left),
            fmt17(b.right),
            b.count,
            fmt17(b.density)
        );
    }
    fs::write(dir.join("hist_empirical.csv"), hist)?;
    fs::write(dir.join("hist_theory.csv"), theory_csv(&report.hist_theory))?;
    fs::write(dir.join("protocol.txt"), protocol.to_text())?;

    if !report.counts.is_empty() {
        let counts_dir = dir.join("counts");
        fs::create_dir_all(&counts_dir)?;
        for (run, data) in report.counts.iter().enumerate() {
            let mut buf = Vec::new();
            data.write_csv(&mut buf)?;
            fs::write(counts_dir.join(format!("run_{run:04}.csv")), buf)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionReport {
    pub provenance: Provenance,
    pub protocol: String,
    pub dimension: usize,
    pub rank: usize,
    /// Eigenvalues of the information matrix, descending.
    pub information_eigenvalues: Vec<f64>,
    pub information_zero_count: usize,
    pub model: LossModel,
    pub minimal_loss: f64,
    #[serde(skip)]
    pub hist_theory: Vec<super::TheoryPoint>,
}

/// Loss model at the configured true state plus its theoretical z curve.
pub fn precision_report(cfg: &CampaignConfig, exec: Execution) -> Result<(PrecisionReport, Protocol)> {
    cfg.validate()?;
    let p = build_protocol(cfg)?;
    let truth = build_true_state(cfg)?;
    let model = true_loss_model(&p, &truth, cfg.rank)?.ok_or_else(|| {
        TomoError::Config(format!(
            "rank = {} differs from the true state's rank {}",
            cfg.rank,
            truth.rank()
        ))
    })?;
    let h = information_matrix(&p, &truth.amplitude)?;
    let samples = theory_samples(cfg, &model, exec);
    Ok((
        PrecisionReport {
            provenance: Provenance::new(cfg),
            protocol: p.name().to_string(),
            dimension: p.dim(),
            rank: cfg.rank,
            information_eigenvalues: h.eigenvalues(),
            information_zero_count: h.zero_count(),
            model,
            minimal_loss: minimal_loss(p.dim())?,
            hist_theory: theory_density(&samples, THEORY_GRID),
        },
        p,
    ))
}

/// `report.json`, `hist_theory.csv`, `protocol.txt`.
pub fn write_precision(report: &PrecisionReport, protocol: &Protocol, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join("report.json"), report)?;
    fs::write(dir.join("hist_theory.csv"), theory_csv(&report.hist_theory))?;
    fs::write(dir.join("protocol.txt"), protocol.to_text())?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationReport {
    pub provenance: Provenance,
    pub protocol: String,
    pub dimension: usize,
    pub max_loss: f64,
    pub minimal_loss: f64,
    /// Loss at the configured true state when it is pure.
    pub true_state_loss: Option<f64>,
    pub best_start: usize,
    pub evaluations: usize,
    pub start_values: Vec<f64>,
    /// Worst-case state as `[re, im]` pairs.
    pub state: Vec<[f64; 2]>,
    #[serde(skip)]
    pub amplitude: Option<PurifiedAmplitude>,
}

/// Search for the pure state with the largest loss under the configured protocol.
pub fn optimization_report(cfg: &CampaignConfig, exec: Execution) -> Result<(OptimizationReport, Protocol)> {
    cfg.validate()?;
    let p = build_protocol(cfg)?;
    let truth = build_true_state(cfg)?;
    let true_state_loss = if truth.rank() == 1 {
        Some(precision::loss_model(&p, &truth.amplitude)?.loss)
    } else {
        None
    };
    let mut settings = cfg.optimizer();
    settings.exec = exec;
    let best = precision::maximize_loss(&p, cfg.n, &settings)?;
    Ok((
        OptimizationReport {
            provenance: Provenance::new(cfg),
            protocol: p.name().to_string(),
            dimension: p.dim(),
            max_loss: best.loss,
            minimal_loss: minimal_loss(p.dim())?,
            true_state_loss,
            best_start: best.start,
            evaluations: best.evaluations,
            start_values: best.start_values.clone(),
            state: best.state.column(0).iter().map(|z| [z.re, z.im]).collect(),
            amplitude: Some(best.state),
        },
        p,
    ))
}

/// `report.json`, `state.txt` (one amplitude `re+imi` per line), `protocol.txt`.
pub fn write_optimization(report: &OptimizationReport, protocol: &Protocol, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join("report.json"), report)?;
    let mut state = String::new();
    for [re, im] in &report.state {
        let _ = writeln!(state, "{}", fmt_complex(crate::linalg::C64::new(*re, *im)));
    }
    fs::write(dir.join("state.txt"), state)?;
    fs::write(dir.join("protocol.txt"), protocol.to_text())?;
    Ok(())
}
