//! Seeded Poisson event counts for a protocol and a true state.
//!
//! The sampler is fixed so that counts are bit-reproducible per seed:
//! one `ChaCha8Rng` stream per call, rows drawn in order, each row consuming
//! uniforms from that stream. Means below 10 use sequential inversion of the
//! CDF; larger means use Hörmann's transformed rejection with squeeze (PTRS).

use std::io::{BufRead, Write};

use rand::Rng;
use statrs::function::gamma::ln_gamma;

use crate::error::{Result, TomoError};
use crate::protocols::{intensities, Protocol, StateRef};
use crate::seeds::rng_from_seed;

/// Counts below this mean are drawn by CDF inversion.
pub const INVERSION_LIMIT: f64 = 10.0;

/// Observed event counts per protocol row.
///
/// Sampled counts are always integral. The noiseless oracle
/// ([`CountData::noiseless`]) stores the exact expected counts, which may be
/// fractional; every consumer treats `k` as a real number.
#[derive(Debug, Clone, PartialEq)]
pub struct CountData {
    pub k: Vec<f64>,
    pub t: Vec<f64>,
    pub seed: u64,
    pub n_expected: f64,
}

impl CountData {
    pub fn new(k: Vec<f64>, t: Vec<f64>, seed: u64) -> Result<Self> {
        if k.len() != t.len() {
            return Err(TomoError::DimensionMismatch {
                expected: t.len(),
                found: k.len(),
            });
        }
        if k.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(TomoError::InvalidArgument("counts must be nonnegative".into()));
        }
        if t.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(TomoError::InvalidArgument("exposures must be positive".into()));
        }
        Ok(Self {
            k,
            t,
            seed,
            n_expected: f64::NAN,
        })
    }

    /// Exact expected counts `lambda_j t_j` in place of a sample.
    pub fn noiseless<'a>(p: &Protocol, state: impl Into<StateRef<'a>>) -> Result<Self> {
        let k = expected_counts(p, state)?;
        let n_expected = k.iter().sum();
        Ok(Self {
            k,
            t: p.require_exposures()?.to_vec(),
            seed: 0,
            n_expected,
        })
    }

    pub fn rows(&self) -> usize {
        self.k.len()
    }

    pub fn total(&self) -> f64 {
        self.k.iter().sum()
    }

    /// CSV with header `j,k,t`; `j` is zero-based, `t` at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "j,k,t")?;
        for (j, (k, t)) in self.k.iter().zip(&self.t).enumerate() {
            let k = if k.fract() == 0.0 {
                format!("{k:.0}")
            } else {
                crate::protocols::fmt17(*k)
            };
            writeln!(out, "{j},{k},{}", crate::protocols::fmt17(*t))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| TomoError::Config("empty counts file".into()))??;
        if header.trim() != "j,k,t" {
            return Err(TomoError::Config(format!("bad counts header '{header}'")));
        }
        let mut k = Vec::new();
        let mut t = Vec::new();
        for (row, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let bad = || TomoError::Config(format!("bad counts line {}: '{line}'", row + 2));
            if fields.len() != 3 || fields[0].trim().parse::<usize>().ok() != Some(k.len()) {
                return Err(bad());
            }
            k.push(fields[1].trim().parse::<f64>().map_err(|_| bad())?);
            t.push(fields[2].trim().parse::<f64>().map_err(|_| bad())?);
        }
        let mut data = CountData::new(k, t, 0)?;
        data.n_expected = data.total();
        Ok(data)
    }
}

/// `lambda_j t_j` for every row.
pub fn expected_counts<'a>(p: &Protocol, state: impl Into<StateRef<'a>>) -> Result<Vec<f64>> {
    let t = p.require_exposures()?;
    let lam = intensities(p, state)?;
    Ok(lam.iter().zip(t).map(|(l, t)| l * t).collect())
}

/// Independent Poisson counts with means `lambda_j t_j`, deterministic in `seed`.
pub fn draw_counts<'a>(p: &Protocol, state: impl Into<StateRef<'a>>, seed: u64) -> Result<CountData> {
    let means = expected_counts(p, state)?;
    let mut rng = rng_from_seed(seed);
    let k = means.iter().map(|&mu| poisson(mu, &mut rng) as f64).collect();
    Ok(CountData {
        k,
        t: p.require_exposures()?.to_vec(),
        seed,
        n_expected: means.iter().sum(),
    })
}

/// One Poisson variate with mean `mu`.
pub fn poisson<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> u64 {
    if !(mu > 0.0) {
        return 0;
    }
    if mu < INVERSION_LIMIT {
        poisson_inversion(mu, rng)
    } else {
        poisson_ptrs(mu, rng)
    }
}

fn poisson_inversion<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-mu).exp();
    let mut cdf = p;
    // The cap only matters when rounding keeps the CDF below u forever.
    while u > cdf && k < 1000 {
        k += 1;
        p *= mu / k as f64;
        cdf += p;
    }
    k
}

/// Transformed rejection with squeeze, W. Hörmann (1993), valid for mu >= 10.
fn poisson_ptrs<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> u64 {
    let log_mu = mu.ln();
    let smu = mu.sqrt();
    let b = 0.931 + 2.53 * smu;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mu + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln()
            <= -mu + k * log_mu - ln_gamma(k + 1.0)
        {
            return k as u64;
        }
    }
}
