//! Coverage and expected-length simulation over grids of
//! (distribution, n, ρ, method).
//!
//! Every replicate draws from its own stream derived from the cell key and
//! the replicate index, and results are reduced in index order, so a run is
//! reproducible for any thread count.

use std::fmt;

use rayon::prelude::*;

use crate::distributions::{
    sample_bvlognormal, sample_bvnormal, sample_bvt, CovMatrix2, RngStream,
};
use crate::error::{Error, Result};
use crate::methods::{compute, Input, McConfig, MethodId};
use crate::summary::{suff_stats, DataSet};

pub const DEFAULT_REPS: usize = 10_000;
pub const DEFAULT_EXPENSIVE_REPS: usize = 2_000;
const MIN_REPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dist {
    Normal,
    T { df: f64 },
    LogNormal,
}

impl Dist {
    pub fn name(&self) -> &'static str {
        match self {
            Dist::Normal => "normal",
            Dist::T { .. } => "t",
            Dist::LogNormal => "lognormal",
        }
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::T { df } => write!(f, "t({df})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Correlation of `(exp X₁, exp X₂)` for bivariate normal `X`.
pub fn lognormal_rho_star(rho: f64, sigma1: f64, sigma2: f64) -> f64 {
    (rho * sigma1 * sigma2).exp_m1() / (sigma1.powi(2).exp_m1() * sigma2.powi(2).exp_m1()).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dist: Dist,
    pub mu: [f64; 2],
    pub sigma: [f64; 2],
    pub rho_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    /// Replicates for Exact and the likelihood-ratio methods; `None` uses `reps`.
    pub expensive_reps: Option<usize>,
    pub level: f64,
    pub methods: Vec<MethodId>,
    pub inner_m: usize,
    pub seed: u64,
    /// Score failed replicates as non-covering instead of dropping them.
    pub failures_as_misses: bool,
}

impl SimConfig {
    pub fn new(dist: Dist) -> Self {
        Self {
            dist,
            mu: [0.0, 0.0],
            sigma: [1.0, 1.0],
            rho_grid: (0..10).map(|i| i as f64 / 10.0).collect(),
            n_grid: vec![5, 10, 15, 20],
            reps: DEFAULT_REPS,
            expensive_reps: Some(DEFAULT_EXPENSIVE_REPS),
            level: 0.95,
            methods: MethodId::ALL.to_vec(),
            inner_m: crate::methods::montecarlo::DEFAULT_INNER_DRAWS,
            seed: 1,
            failures_as_misses: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < MIN_REPS || self.expensive_reps.is_some_and(|r| r < MIN_REPS) {
            return Err(Error::domain(format!("replicate count below {MIN_REPS}")));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::domain(format!("confidence level {} outside (0, 1)", self.level)));
        }
        if let Some(rho) = self.rho_grid.iter().find(|r| !(r.abs() < 1.0)) {
            return Err(Error::domain(format!("grid correlation {rho} outside (-1, 1)")));
        }
        if let Some(n) = self.n_grid.iter().find(|&&n| n < 3) {
            return Err(Error::domain(format!("grid sample size {n} < 3")));
        }
        if !(self.sigma[0] > 0.0 && self.sigma[1] > 0.0) {
            return Err(Error::domain("standard deviations must be positive"));
        }
        if let Dist::T { df } = self.dist {
            if !(df > 2.0) {
                return Err(Error::domain(format!("t degrees of freedom {df} must exceed 2")));
            }
        }
        if self.methods.is_empty() {
            return Err(Error::domain("no methods selected"));
        }
        Ok(())
    }

    pub fn reps_for(&self, method: MethodId) -> usize {
        match self.expensive_reps {
            Some(r) if method.is_expensive() => r,
            _ => self.reps,
        }
    }

    /// Parameter coverage is scored against at correlation `rho`.
    pub fn target(&self, rho: f64) -> f64 {
        match self.dist {
            Dist::LogNormal => lognormal_rho_star(rho, self.sigma[0], self.sigma[1]),
            _ => rho,
        }
    }

    fn cell_stream(&self, n: usize, rho: f64) -> RngStream {
        let key = format!(
            "{}|mu={:?}|sigma={:?}|n={n}|rho={rho}",
            self.dist, self.mu, self.sigma
        );
        RngStream::keyed(self.seed, &key)
    }

    fn sample(&self, stream: RngStream, n: usize, rho: f64) -> Result<DataSet> {
        let sigma = CovMatrix2::from_sd_rho(self.sigma[0], self.sigma[1], rho);
        let mut rng = stream.generator();
        match self.dist {
            Dist::Normal => sample_bvnormal(&mut rng, self.mu, &sigma, n),
            Dist::T { df } => sample_bvt(&mut rng, self.mu, &sigma, df, n),
            Dist::LogNormal => sample_bvlognormal(&mut rng, self.mu, &sigma, n),
        }
    }
}

/// Aggregated outcome of one method in one (distribution, n, ρ) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub dist: Dist,
    pub n: usize,
    pub rho: f64,
    pub target: f64,
    pub method: MethodId,
    /// `None` when the method does not apply at this n or every replicate failed.
    pub coverage: Option<f64>,
    pub mean_length: Option<f64>,
    pub failures: usize,
    pub reps: usize,
    pub applicable: bool,
}

#[derive(Debug, Clone, Copy)]
enum Outcome {
    Skipped,
    Failed,
    Scored { covered: bool, length: f64 },
}

pub fn run_cell(cfg: &SimConfig, n: usize, rho: f64) -> Result<Vec<SimResult>> {
    cfg.validate()?;
    let alpha = 1.0 - cfg.level;
    let target = cfg.target(rho);
    let active: Vec<(MethodId, usize)> = cfg
        .methods
        .iter()
        .filter(|m| n >= m.min_n())
        .map(|&m| (m, cfg.reps_for(m)))
        .collect();
    let total = active.iter().map(|a| a.1).max().unwrap_or(0);
    let cell = cfg.cell_stream(n, rho);

    let per_rep: Vec<Vec<Outcome>> = (0..total)
        .into_par_iter()
        .map(|rep| {
            let stream = cell.child(rep as u64);
            let stats = cfg
                .sample(stream.named("data"), n, rho)
                .and_then(|d| suff_stats(&d).map(|s| (d, s)));
            let mc = McConfig::new(cfg.inner_m, stream);
            active
                .iter()
                .map(|&(method, reps)| {
                    if rep >= reps {
                        return Outcome::Skipped;
                    }
                    let Ok((data, stats)) = &stats else {
                        return Outcome::Failed;
                    };
                    let input = Input::Raw { data, stats };
                    match compute(method, &input, alpha, &mc) {
                        Ok(ci) => Outcome::Scored {
                            covered: ci.contains(target),
                            length: ci.length(),
                        },
                        Err(_) => Outcome::Failed,
                    }
                })
                .collect()
        })
        .collect();

    let mut out = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let base = SimResult {
            dist: cfg.dist,
            n,
            rho,
            target,
            method,
            coverage: None,
            mean_length: None,
            failures: 0,
            reps: 0,
            applicable: false,
        };
        let Some(col) = active.iter().position(|a| a.0 == method) else {
            out.push(base);
            continue;
        };
        let (mut hits, mut scored, mut failures, mut length) = (0usize, 0usize, 0usize, 0.0);
        for row in &per_rep {
            match row[col] {
                Outcome::Skipped => {}
                Outcome::Failed => failures += 1,
                Outcome::Scored { covered, length: l } => {
                    scored += 1;
                    hits += covered as usize;
                    length += l;
                }
            }
        }
        let denom = if cfg.failures_as_misses { scored + failures } else { scored };
        out.push(SimResult {
            coverage: (denom > 0).then(|| hits as f64 / denom as f64),
            mean_length: (scored > 0).then(|| length / scored as f64),
            failures,
            reps: active[col].1,
            applicable: true,
            ..base
        });
    }
    Ok(out)
}

pub fn run_grid(cfg: &SimConfig) -> Result<Vec<SimResult>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for &n in &cfg.n_grid {
        for &rho in &cfg.rho_grid {
            out.extend(run_cell(cfg, n, rho)?);
        }
    }
    Ok(out)
}
