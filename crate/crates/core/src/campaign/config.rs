//! Campaign configuration: flat `key = value` text, `#` comments, unknown or
//! repeated keys rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Result, TomoError};
use crate::estimation::ReconstructionConfig;
use crate::precision::OptimizerSettings;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    Ghz,
    W,
    GhzMixture { weight: f64 },
    /// Density matrix in the working dimension, one matrix row per line,
    /// entries `re+imi` separated by whitespace.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub protocol: String,
    pub qubits: u32,
    pub degenerate: bool,
    pub state: StateSpec,
    pub n: f64,
    pub runs: usize,
    pub rank: usize,
    pub base_seed: u64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restarts: usize,
    pub damping: f64,
    pub intensity_floor: f64,
    pub bins: usize,
    pub theory_samples: usize,
    /// Use exact expected counts instead of Poisson draws.
    pub noiseless: bool,
    pub write_counts: bool,
    pub optimizer_starts: usize,
    pub optimizer_evaluations: usize,
    pub optimizer_spread: f64,
    pub optimizer_step: f64,
    pub optimizer_seed: u64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        let opt = OptimizerSettings::default();
        Self {
            protocol: "tetrahedron".into(),
            qubits: 3,
            degenerate: false,
            state: StateSpec::Ghz,
            n: 1e5,
            runs: 200,
            rank: 1,
            base_seed: 1,
            tolerance: 1e-10,
            max_iterations: 5000,
            restarts: 4,
            damping: 0.0,
            intensity_floor: 1e-12,
            bins: 20,
            theory_samples: 1_000_000,
            noiseless: false,
            write_counts: false,
            optimizer_starts: opt.starts,
            optimizer_evaluations: opt.max_evaluations,
            optimizer_spread: opt.spread_tolerance,
            optimizer_step: opt.initial_step,
            optimizer_seed: opt.seed,
        }
    }
}

pub const KEYS: &[&str] = &[
    "protocol",
    "qubits",
    "degenerate",
    "state",
    "mixture_weight",
    "state_file",
    "n",
    "runs",
    "rank",
    "base_seed",
    "tolerance",
    "max_iterations",
    "restarts",
    "damping",
    "intensity_floor",
    "bins",
    "theory_samples",
    "noiseless",
    "write_counts",
    "optimizer_starts",
    "optimizer_evaluations",
    "optimizer_spread",
    "optimizer_step",
    "optimizer_seed",
];

fn config_err(msg: impl Into<String>) -> TomoError {
    TomoError::Config(msg.into())
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| config_err(format!("invalid value '{v}' for '{key}'")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(config_err(format!("invalid value '{v}' for '{key}' (expected true/false)"))),
    }
}

impl CampaignConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        // Relative state files are resolved against the config's directory.
        if let StateSpec::File { path: p } = &mut cfg.state {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(config_err(format!("line {}: unknown key '{key}'", lineno + 1)));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(config_err(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
        }

        let mut cfg = CampaignConfig::default();
        let get = |k: &str| entries.get(k).map(String::as_str);
        if let Some(v) = get("protocol") {
            cfg.protocol = v.to_string();
        }
        macro_rules! set {
            ($field:ident, $key:literal) => {
                if let Some(v) = get($key) {
                    cfg.$field = parse_value($key, v)?;
                }
            };
        }
        set!(qubits, "qubits");
        set!(n, "n");
        set!(runs, "runs");
        set!(rank, "rank");
        set!(base_seed, "base_seed");
        set!(tolerance, "tolerance");
        set!(max_iterations, "max_iterations");
        set!(restarts, "restarts");
        set!(damping, "damping");
        set!(intensity_floor, "intensity_floor");
        set!(bins, "bins");
        set!(theory_samples, "theory_samples");
        set!(optimizer_starts, "optimizer_starts");
        set!(optimizer_evaluations, "optimizer_evaluations");
        set!(optimizer_spread, "optimizer_spread");
        set!(optimizer_step, "optimizer_step");
        set!(optimizer_seed, "optimizer_seed");
        if let Some(v) = get("degenerate") {
            cfg.degenerate = parse_bool("degenerate", v)?;
        }
        if let Some(v) = get("noiseless") {
            cfg.noiseless = parse_bool("noiseless", v)?;
        }
        if let Some(v) = get("write_counts") {
            cfg.write_counts = parse_bool("write_counts", v)?;
        }

        let weight = get("mixture_weight");
        let file = get("state_file");
        cfg.state = match get("state").unwrap_or("ghz") {
            "ghz" => StateSpec::Ghz,
            "w" => StateSpec::W,
            "ghz_mixture" => StateSpec::GhzMixture {
                weight: parse_value(
                    "mixture_weight",
                    weight.ok_or_else(|| config_err("state = ghz_mixture needs mixture_weight"))?,
                )?,
            },
            "file" => StateSpec::File {
                path: PathBuf::from(file.ok_or_else(|| config_err("state = file needs state_file"))?),
            },
            other => return Err(config_err(format!("unknown state '{other}'"))),
        };
        if weight.is_some() && !matches!(cfg.state, StateSpec::GhzMixture { .. }) {
            return Err(config_err("mixture_weight given but state is not ghz_mixture"));
        }
        if file.is_some() && !matches!(cfg.state, StateSpec::File { .. }) {
            return Err(config_err("state_file given but state is not file"));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.protocol.as_str(), "tetrahedron" | "cube" | "octahedron") {
            return Err(config_err(format!("unknown protocol '{}'", self.protocol)));
        }
        if !(1..=6).contains(&self.qubits) {
            return Err(config_err("qubits must be between 1 and 6"));
        }
        if self.degenerate && self.qubits != 3 {
            return Err(config_err("degenerate = true requires qubits = 3"));
        }
        if !(self.n > 0.0 && self.n.is_finite()) {
            return Err(config_err("n must be positive"));
        }
        if self.runs == 0 {
            return Err(config_err("runs must be at least 1"));
        }
        if self.rank == 0 || self.rank > self.dimension() {
            return Err(config_err(format!(
                "rank must be between 1 and {}",
                self.dimension()
            )));
        }
        if let StateSpec::GhzMixture { weight } = self.state {
            if !(0.0..=1.0).contains(&weight) {
                return Err(config_err("mixture_weight must lie in [0, 1]"));
            }
            if self.qubits != 3 {
                return Err(config_err("ghz_mixture requires qubits = 3"));
            }
        }
        if self.bins == 0 || self.theory_samples == 0 {
            return Err(config_err("bins and theory_samples must be positive"));
        }
        if self.optimizer_starts == 0 || self.optimizer_evaluations == 0 {
            return Err(config_err("optimizer_starts and optimizer_evaluations must be positive"));
        }
        self.reconstruction()
            .validate(self.dimension())
            .map_err(|e| config_err(e.to_string()))
    }

    /// Hilbert-space dimension after the optional symmetric reduction.
    pub fn dimension(&self) -> usize {
        if self.degenerate {
            4
        } else {
            1usize << self.qubits
        }
    }

    pub fn reconstruction(&self) -> ReconstructionConfig {
        ReconstructionConfig {
            rank: self.rank,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            restarts: self.restarts,
            intensity_floor: self.intensity_floor,
            init_seed: 0,
            damping: self.damping,
        }
    }

    pub fn optimizer(&self) -> OptimizerSettings {
        OptimizerSettings {
            starts: self.optimizer_starts,
            max_evaluations: self.optimizer_evaluations,
            spread_tolerance: self.optimizer_spread,
            initial_step: self.optimizer_step,
            seed: self.optimizer_seed,
            ..OptimizerSettings::default()
        }
    }

    /// Canonical `key = value` echo with every key spelled out.
    pub fn echo(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("protocol", self.protocol.clone());
        m.insert("qubits", self.qubits.to_string());
        m.insert("degenerate", self.degenerate.to_string());
        match &self.state {
            StateSpec::Ghz => {
                m.insert("state", "ghz".into());
            }
            StateSpec::W => {
                m.insert("state", "w".into());
            }
            StateSpec::GhzMixture { weight } => {
                m.insert("state", "ghz_mixture".into());
                m.insert("mixture_weight", weight.to_string());
            }
            StateSpec::File { path } => {
                m.insert("state", "file".into());
                m.insert("state_file", path.display().to_string());
            }
        }
        m.insert("n", self.n.to_string());
        m.insert("runs", self.runs.to_string());
        m.insert("rank", self.rank.to_string());
        m.insert("base_seed", self.base_seed.to_string());
        m.insert("tolerance", self.tolerance.to_string());
        m.insert("max_iterations", self.max_iterations.to_string());
        m.insert("restarts", self.restarts.to_string());
        m.insert("damping", self.damping.to_string());
        m.insert("intensity_floor", self.intensity_floor.to_string());
        m.insert("bins", self.bins.to_string());
        m.insert("theory_samples", self.theory_samples.to_string());
        m.insert("noiseless", self.noiseless.to_string());
        m.insert("write_counts", self.write_counts.to_string());
        m.insert("optimizer_starts", self.optimizer_starts.to_string());
        m.insert("optimizer_evaluations", self.optimizer_evaluations.to_string());
        m.insert("optimizer_spread", self.optimizer_spread.to_string());
        m.insert("optimizer_step", self.optimizer_step.to_string());
        m.insert("optimizer_seed", self.optimizer_seed.to_string());
        m
    }
}
