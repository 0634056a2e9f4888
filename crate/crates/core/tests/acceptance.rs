//! Acceptance suite: one PASS/FAIL line per criterion, printed at the pinned
//! tolerances. Run with `cargo test --test acceptance -- --nocapture` to see
//! the lines; the test fails if any criterion fails.

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use tomo_core::campaign::{compare_models, run_campaign, CampaignConfig, CampaignReport};
use tomo_core::degenerate::{self, basis_map, isometry_error};
use tomo_core::estimation::{solve_likelihood, ReconstructionConfig};
use tomo_core::linalg;
use tomo_core::par::Execution;
use tomo_core::precision::{
    degrees_of_freedom, information_matrix, intensity_gradient, loss_distribution_samples,
    loss_model, maximize_loss, minimal_loss, OptimizerSettings,
};
use tomo_core::protocols::{assign_exposures, intensities, qubit_protocol, Protocol};
use tomo_core::sampling::CountData;
use tomo_core::states::{fidelity_pure, ghz, random_amplitude, random_pure, w_state};
use tomo_core::stats;

const EXEC: Execution = Execution::Parallel;

struct Ledger {
    lines: Vec<(bool, String)>,
}

impl Ledger {
    fn check(&mut self, id: &str, pass: bool, detail: String) {
        let line = format!("[{}] {id}: {detail}", if pass { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push((pass, line));
    }

    fn within(&mut self, id: &str, value: f64, target: f64, tol: f64) {
        let pass = (value - target).abs() <= tol;
        self.check(id, pass, format!("{value:.6} (target {target} +/- {tol})"));
    }
}

fn tetra3() -> Protocol {
    assign_exposures(&qubit_protocol("tetrahedron", 3).unwrap(), 1e5).unwrap()
}

fn octa3() -> Protocol {
    assign_exposures(&qubit_protocol("octahedron", 3).unwrap(), 1e5).unwrap()
}

fn campaign(text: &str) -> CampaignReport {
    run_campaign(&CampaignConfig::parse(text).unwrap(), EXEC).unwrap()
}

fn ghz_losses(ledger: &mut Ledger) {
    let g = ghz(3).unwrap();
    ledger.within("1 L(GHZ) tetrahedron^3", loss_model(&tetra3(), &g).unwrap().loss, 8.63, 0.15);
    ledger.within("1 L(GHZ) octahedron^3", loss_model(&octa3(), &g).unwrap().loss, 7.73, 0.15);
}

fn worst_case(ledger: &mut Ledger) {
    for (name, target) in [("tetrahedron", 10.4), ("octahedron", 7.9)] {
        let start = Instant::now();
        let best = maximize_loss(
            &qubit_protocol(name, 3).unwrap(),
            1e5,
            &OptimizerSettings::default(),
        )
        .unwrap();
        let elapsed = start.elapsed();
        ledger.within(&format!("2 L_max {name}^3"), best.loss, target, 0.3);
        ledger.check(
            &format!("2 L_max {name}^3 runtime"),
            elapsed <= Duration::from_secs(30 * 60),
            format!("{:.1} s (limit 1800 s)", elapsed.as_secs_f64()),
        );
    }
}

struct Reports {
    tetra: CampaignReport,
    octa: CampaignReport,
    mixture: CampaignReport,
    ghz_full: CampaignReport,
    sym_pure: CampaignReport,
    sym_full: CampaignReport,
    sym_mixture: CampaignReport,
}

fn monte_carlo(ledger: &mut Ledger) -> Reports {
    let r = Reports {
        tetra: campaign("protocol = tetrahedron"),
        octa: campaign("protocol = octahedron"),
        mixture: campaign("state = ghz_mixture\nmixture_weight = 0.5\nrank = 8"),
        ghz_full: campaign("rank = 8"),
        sym_pure: campaign("degenerate = true"),
        sym_full: campaign("degenerate = true\nrank = 4"),
        sym_mixture: campaign("degenerate = true\nstate = ghz_mixture\nmixture_weight = 0.5\nrank = 4"),
    };
    let pct = |rep: &CampaignReport| 100.0 * rep.aggregates.mean_fidelity;
    ledger.within("3 mean F % tetrahedron^3 GHZ r=1", pct(&r.tetra), 99.991, 0.002);
    ledger.within("3 mean F % octahedron^3 GHZ r=1", pct(&r.octa), 99.9922, 0.002);
    ledger.within("3 mean F % tetrahedron^3 mixture f=0.5 r=8", pct(&r.mixture), 99.596, 0.03);
    ledger.within("3 mean F % tetrahedron^3 GHZ counts r=8", pct(&r.ghz_full), 99.278, 0.05);
    ledger.within("3 mean F % symmetric GHZ r=1", pct(&r.sym_pure), 99.996, 0.002);
    ledger.within("3 mean F % symmetric GHZ r=4", pct(&r.sym_full), 99.669, 0.03);
    ledger.within("3 mean F % symmetric mixture r=4", pct(&r.sym_mixture), 99.956, 0.01);

    let all = [&r.tetra, &r.octa, &r.mixture, &r.ghz_full, &r.sym_pure, &r.sym_full, &r.sym_mixture];
    let decreased: usize = all.iter().map(|x| x.aggregates.likelihood_decreased_runs).sum();
    let unconverged: usize = all.iter().map(|x| x.aggregates.runs - x.aggregates.converged_runs).sum();
    ledger.check(
        "3 likelihood never decreases over converged runs",
        decreased == 0,
        format!("{decreased} decreasing runs, {unconverged} unconverged runs of 1400"),
    );
    for (name, rep) in [
        ("tetrahedron^3 GHZ", &r.tetra),
        ("octahedron^3 GHZ", &r.octa),
        ("tetrahedron^3 mixture", &r.mixture),
        ("symmetric GHZ", &r.sym_pure),
        ("symmetric mixture", &r.sym_mixture),
    ] {
        let theory = rep.theory.as_ref().unwrap();
        let se = rep.aggregates.loss_standard_error;
        let gap = (rep.aggregates.mean_loss - theory.model.mean_loss).abs();
        ledger.check(
            &format!("3 simulated vs theoretical mean loss, {name}"),
            gap <= 4.0 * se,
            format!("gap {:.2} standard errors (limit 4)", gap / se),
        );
    }
    r
}

fn ratios(ledger: &mut Ledger, reports: &Reports) {
    let full = compare_models(&CampaignConfig::parse("protocol = tetrahedron").unwrap(), EXEC).unwrap();
    ledger.within("4 compare_models ratio, 8 dims", full.ratio.unwrap_or(f64::NAN), 80.0, 16.0);
    let sym = compare_models(&CampaignConfig::parse("degenerate = true").unwrap(), EXEC).unwrap();
    ledger.within("4 compare_models ratio, 4 dims", sym.ratio.unwrap_or(f64::NAN), 83.0, 17.0);
    let mixed = reports.mixture.aggregates.mean_loss / reports.sym_mixture.aggregates.mean_loss;
    ledger.within("4 mixed-state loss ratio 8 dims / 4 dims", mixed, 9.0, 2.0);
}

fn lower_bound(ledger: &mut Ledger) {
    for name in ["tetrahedron", "octahedron"] {
        let p8 = assign_exposures(&qubit_protocol(name, 3).unwrap(), 1e5).unwrap();
        let p4 = degenerate::reduce_protocol(&p8).unwrap();
        for (p, s) in [(&p8, 8usize), (&p4, 4)] {
            let min = (0..200u64)
                .map(|seed| loss_model(p, &random_pure(s, 10_000 + seed).unwrap()).unwrap().loss)
                .fold(f64::INFINITY, f64::min);
            let bound = minimal_loss(s).unwrap();
            ledger.check(
                &format!("5 min L over 200 Haar states, {name} s={s}"),
                min >= bound - 0.01,
                format!("{min:.4} (bound {bound} - 0.01)"),
            );
        }
    }
}

fn distribution(ledger: &mut Ledger, reports: &Reports) {
    let theory = reports.tetra.theory.as_ref().unwrap();
    ledger.check(
        "6 KS, 200 runs vs theory, tetrahedron^3 GHZ r=1",
        theory.ks_p_value > 0.01,
        format!("D = {:.4}, p = {:.3} (alpha 0.01)", theory.ks_statistic, theory.ks_p_value),
    );

    let model = &theory.model;
    let reference = loss_distribution_samples(model, 1_000_000, 99, EXEC);
    let ne = stats::effective_size(200, reference.len());
    let mut passed = 0;
    let mut first = Vec::new();
    for trial in 0..100u64 {
        let sample = loss_distribution_samples(model, 200, 5_000 + trial, EXEC);
        let d = stats::ks_two_sample(&sample, &reference);
        if stats::ks_p_value(d, ne) > 0.01 {
            passed += 1;
        }
        if trial == 0 {
            first = sample;
        }
    }
    ledger.check(
        "6 KS meta-test, model vs itself",
        passed >= 95,
        format!("{passed}/100 trials pass at alpha 0.01 (need 95)"),
    );
    let doubled: Vec<f64> = first.iter().map(|v| 2.0 * v).collect();
    let d = stats::ks_two_sample(&doubled, &reference);
    let p = stats::ks_p_value(d, ne);
    ledger.check(
        "6 KS meta-test, doubled losses rejected",
        p < 0.01,
        format!("D = {d:.4}, p = {p:.2e}"),
    );
}

fn properties(ledger: &mut Ledger) {
    // Fixed-point recovery from noiseless counts.
    let p8 = tetra3();
    let mut worst: f64 = 1.0;
    let mut states = vec![ghz(3).unwrap(), w_state(3).unwrap()];
    states.extend((0..5).map(|seed| random_pure(8, seed).unwrap()));
    for truth in &states {
        let counts = CountData::noiseless(&p8, truth).unwrap();
        let res = solve_likelihood(&counts, &p8, &ReconstructionConfig::default()).unwrap();
        worst = worst.min(fidelity_pure(&res.amplitude, truth).unwrap());
    }
    ledger.check(
        "7 noiseless recovery F >= 1 - 1e-9",
        worst >= 1.0 - 1e-9,
        format!("worst 1 - F = {:.2e} over {} states", 1.0 - worst, states.len()),
    );

    // Isometry and intensity equivalence of the symmetric reduction.
    let iso = isometry_error(&basis_map());
    let mut gap: f64 = 0.0;
    for name in ["tetrahedron", "cube", "octahedron"] {
        let full = assign_exposures(&qubit_protocol(name, 3).unwrap(), 1e5).unwrap();
        let reduced = degenerate::reduce_protocol(&full).unwrap();
        for seed in 0..20 {
            let c4 = random_pure(4, seed).unwrap();
            let c8 = degenerate::lift_state(&c4).unwrap();
            let a = intensities(&reduced, &c4).unwrap();
            let b = intensities(&full, &c8).unwrap();
            gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(gap, f64::max);
        }
    }
    ledger.check(
        "7 G isometry and intensity equivalence within 1e-12",
        iso <= 1e-12 && gap <= 1e-12,
        format!("isometry error {iso:.1e}, intensity gap {gap:.1e}"),
    );

    // Analytic intensity gradient against central differences.
    let mut worst_rel: f64 = 0.0;
    let h = 1e-6;
    for pair in 0..100u64 {
        let r = 1 + (pair % 3) as usize;
        let c = random_amplitude(8, r, 300 + pair).unwrap();
        let j = ((pair * 37) % 64) as usize;
        let g = intensity_gradient(&p8, j, &c).unwrap();
        let base: Vec<f64> = linalg::realify(c.matrix()).iter().copied().collect();
        let lam = |theta: &[f64]| {
            let m = linalg::complexify(theta, 8, r);
            (p8.matrix().row(j) * m).iter().map(|z| z.norm_sqr()).sum::<f64>()
        };
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let fd: Vec<f64> = (0..g.len())
            .map(|i| {
                let mut up = base.clone();
                let mut down = base.clone();
                up[i] += h;
                down[i] -= h;
                (lam(&up) - lam(&down)) / (2.0 * h)
            })
            .collect();
        let err = fd.iter().zip(&g).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        worst_rel = worst_rel.max(err / norm);
    }
    ledger.check(
        "7 intensity gradient vs finite differences (1e-6 relative)",
        worst_rel <= 1e-6,
        format!("worst relative error {worst_rel:.1e} over 100 pairs"),
    );

    // Null space of H and number of loss coefficients.
    let mut zero_ok = true;
    let mut nu_ok = true;
    let mut cases = 0;
    let sym = |name: &str| degenerate::reduce_protocol(&assign_exposures(&qubit_protocol(name, 3).unwrap(), 1e5).unwrap()).unwrap();
    let protocols: Vec<Protocol> = vec![
        tetra3(),
        octa3(),
        assign_exposures(&qubit_protocol("cube", 3).unwrap(), 1e5).unwrap(),
        sym("tetrahedron"),
        sym("octahedron"),
    ];
    for p in &protocols {
        let s = p.dim();
        for r in [1, s] {
            for seed in 0..20u64 {
                let c = random_amplitude(s, r, 700 + seed).unwrap();
                zero_ok &= information_matrix(p, &c).unwrap().zero_count() == r * r;
                nu_ok &= loss_model(p, &c).map(|m| m.nu == degrees_of_freedom(s, r)).unwrap_or(false);
                cases += 1;
            }
        }
    }
    ledger.check("7 H has r^2 zero eigenvalues", zero_ok, format!("{cases} (protocol, rank, state) cases"));
    ledger.check("7 (2s - r) r - 1 nonzero d_j", nu_ok, format!("{cases} (protocol, rank, state) cases"));

    // Byte-exact campaign output for different thread counts.
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("campaign.cfg");
    fs::write(&config, "runs = 24\ntheory_samples = 50000\nwrite_counts = true\n").unwrap();
    let run = |jobs: &str| {
        let out = dir.path().join(format!("out{jobs}"));
        let status = Command::new(env!("CARGO_BIN_EXE_tomo"))
            .args(["simulate", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", jobs])
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        out
    };
    let outputs: Vec<_> = ["1", "2", "5"].iter().map(|j| run(j)).collect();
    let mut files = Vec::new();
    for entry in walk(&outputs[0]) {
        files.push(entry.strip_prefix(&outputs[0]).unwrap().to_path_buf());
    }
    let identical = files.iter().all(|rel| {
        let a = fs::read(outputs[0].join(rel)).unwrap();
        outputs[1..].iter().all(|o| fs::read(o.join(rel)).ok().as_ref() == Some(&a))
    }) && outputs[1..].iter().all(|o| walk(o).len() == files.len());
    ledger.check(
        "7 campaign output byte-exact for --jobs 1, 2, 5",
        identical,
        format!("{} files compared", files.len()),
    );
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out.sort();
    out
}

fn main() {
    let mut ledger = Ledger { lines: Vec::new() };
    ghz_losses(&mut ledger);
    worst_case(&mut ledger);
    let reports = monte_carlo(&mut ledger);
    ratios(&mut ledger, &reports);
    lower_bound(&mut ledger);
    distribution(&mut ledger, &reports);
    properties(&mut ledger);

    let failed: Vec<&String> = ledger.lines.iter().filter(|l| !l.0).map(|l| &l.1).collect();
    println!(
        "acceptance: {} of {} checks passed",
        ledger.lines.len() - failed.len(),
        ledger.lines.len()
    );
    if !failed.is_empty() {
        eprintln!("failed checks:");
        for line in failed {
            eprintln!("  {line}");
        }
        std::process::exit(1);
    }
}
