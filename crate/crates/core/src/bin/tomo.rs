use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tomo_core::campaign::{self, CampaignConfig};
use tomo_core::degenerate;
use tomo_core::par::{self, Execution};
use tomo_core::protocols::qubit_protocol;
use tomo_core::{Result, TomoError};

#[derive(Parser)]
#[command(name = "tomo", version, about = "Polarization-qubit tomography campaigns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo campaign: simulate counts, reconstruct, compare with theory.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Loss model and theoretical z curve at the configured true state.
    Precision {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Search for the pure state with the largest loss.
    Optimize {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the three-qubit protocol reduced to the symmetric subspace.
    Reduce { config: PathBuf },
}

fn simulate(config: &Path, out: &Path, jobs: Option<usize>) -> Result<()> {
    let cfg = CampaignConfig::from_file(config)?;
    let p = campaign::build_protocol(&cfg)?;
    let report = par::with_jobs(jobs, || campaign::run_campaign(&cfg, Execution::Parallel))??;
    campaign::write_campaign(&report, &p, out)?;
    let a = &report.aggregates;
    println!(
        "{} runs ({} converged): mean F = {:.6}, empirical L = {:.4}",
        a.runs, a.converged_runs, a.mean_fidelity, a.empirical_loss
    );
    if let Some(t) = &report.theory {
        println!(
            "theoretical L = {:.4}, KS = {:.4} (p = {:.3})",
            t.model.loss, t.ks_statistic, t.ks_p_value
        );
    }
    Ok(())
}

fn precision(config: &Path, out: &Path, jobs: Option<usize>) -> Result<()> {
    let cfg = CampaignConfig::from_file(config)?;
    let (report, p) = par::with_jobs(jobs, || campaign::precision_report(&cfg, Execution::Parallel))??;
    campaign::write_precision(&report, &p, out)?;
    println!(
        "L = {:.6} (nu = {}, L_min = {})",
        report.model.loss, report.model.nu, report.minimal_loss
    );
    Ok(())
}

fn optimize(config: &Path, out: &Path, jobs: Option<usize>) -> Result<()> {
    let cfg = CampaignConfig::from_file(config)?;
    let (report, p) = par::with_jobs(jobs, || campaign::optimization_report(&cfg, Execution::Parallel))??;
    campaign::write_optimization(&report, &p, out)?;
    println!(
        "L_max = {:.6} (start {}, {} evaluations)",
        report.max_loss, report.best_start, report.evaluations
    );
    Ok(())
}

fn reduce(config: &Path) -> Result<()> {
    let cfg = CampaignConfig::from_file(config)?;
    if cfg.qubits != 3 {
        return Err(TomoError::Config("reduce requires qubits = 3".into()));
    }
    let p = degenerate::reduce_protocol(&qubit_protocol(&cfg.protocol, 3)?)?;
    let mut stdout = std::io::stdout().lock();
    match stdout.write_all(p.to_text().as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { config, out, jobs } => simulate(config, out, *jobs),
        Command::Precision { config, out, jobs } => precision(config, out, *jobs),
        Command::Optimize { config, out, jobs } => optimize(config, out, *jobs),
        Command::Reduce { config } => reduce(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
