//! Simulation-based intervals: the Krishnamoorthy–Xia generalized pivot, the
//! Wishart generalized pivot, and the parametric bootstrap on Fisher's z.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::distributions::{CovMatrix2, RngStream, Wishart2};
use crate::error::{Error, Result};
use crate::numeric::{empirical_quantile, select_quantile};
use crate::summary::SuffStats;

use super::{check_alpha, check_n, check_r, is_singular, ConfidenceInterval, MethodId};

pub const DEFAULT_INNER_DRAWS: usize = 10_000;
const MIN_INNER_DRAWS: usize = 100;

/// Inner Monte Carlo size and the stream the draws come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub m: usize,
    pub stream: RngStream,
}

impl McConfig {
    pub fn new(m: usize, stream: RngStream) -> Self {
        Self { m, stream }
    }

    fn validate(&self) -> Result<()> {
        if self.m < MIN_INNER_DRAWS {
            return Err(Error::domain(format!(
                "inner draw count {} below {MIN_INNER_DRAWS}",
                self.m
            )));
        }
        Ok(())
    }
}

/// `v² ~ χ²_{n−1}`, `w² ~ χ²_{n−2}` and a standard normal, independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BartlettDraw {
    pub v: f64,
    pub w: f64,
    pub nn: f64,
}

#[derive(Debug, Clone)]
struct BartlettSampler {
    chi_v: ChiSquared<f64>,
    chi_w: ChiSquared<f64>,
}

impl BartlettSampler {
    fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::domain(format!("sample size {n} < 3")));
        }
        let chi = |k: usize| ChiSquared::new(k as f64).map_err(|e| Error::domain(e.to_string()));
        Ok(Self { chi_v: chi(n - 1)?, chi_w: chi(n - 2)? })
    }
}

impl Distribution<BartlettDraw> for BartlettSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BartlettDraw {
        BartlettDraw {
            v: self.chi_v.sample(rng).sqrt(),
            w: self.chi_w.sample(rng).sqrt(),
            nn: rng.sample(StandardNormal),
        }
    }
}

impl BartlettDraw {
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        Ok(BartlettSampler::new(n)?.sample(rng))
    }

    /// `(r̃V + N) / W`, whose `x/√(1+x²)` is a bootstrap correlation.
    fn bootstrap_ratio(&self, rtilde: f64) -> f64 {
        (rtilde * self.v + self.nn) / self.w
    }

    fn kx_pivot(&self, rtilde: f64) -> f64 {
        let num = rtilde * self.w - self.nn;
        num / num.hypot(self.v)
    }
}

/// One bootstrap sample correlation given `r̃ = r/√(1−r²)`.
pub fn pb_sample_r<R: Rng + ?Sized>(rtilde: f64, n: usize, rng: &mut R) -> Result<f64> {
    let x = BartlettDraw::sample(n, rng)?.bootstrap_ratio(rtilde);
    Ok(x / x.hypot(1.0))
}

/// One draw of the Krishnamoorthy–Xia pivot.
pub fn kx_pivot_draw<R: Rng + ?Sized>(rtilde: f64, n: usize, rng: &mut R) -> Result<f64> {
    Ok(BartlettDraw::sample(n, rng)?.kx_pivot(rtilde))
}

/// Sorted pivot draws; one set serves every confidence level.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotDraws {
    method: MethodId,
    sorted: Vec<f64>,
}

impl PivotDraws {
    fn new(method: MethodId, mut draws: Vec<f64>) -> Self {
        draws.sort_by(f64::total_cmp);
        Self { method, sorted: draws }
    }

    pub fn draws(&self) -> &[f64] {
        &self.sorted
    }

    /// Equal-tailed percentile interval.
    pub fn interval(&self, alpha: f64) -> Result<ConfidenceInterval> {
        check_alpha(alpha)?;
        Ok(ConfidenceInterval::from_values(
            self.method,
            alpha,
            empirical_quantile(&self.sorted, alpha / 2.0),
            empirical_quantile(&self.sorted, 1.0 - alpha / 2.0),
        ))
    }
}

fn percentile_interval(method: MethodId, alpha: f64, mut draws: Vec<f64>) -> ConfidenceInterval {
    let lo = select_quantile(&mut draws, alpha / 2.0);
    let hi = select_quantile(&mut draws, 1.0 - alpha / 2.0);
    ConfidenceInterval::from_values(method, alpha, lo, hi)
}

fn prepare(method: MethodId, r: f64, n: usize, alpha: f64, cfg: &McConfig) -> Result<()> {
    check_alpha(alpha)?;
    check_r(r)?;
    check_n(method, n)?;
    cfg.validate()
}

fn rtilde(r: f64) -> f64 {
    r / ((1.0 - r) * (1.0 + r)).sqrt()
}

fn kx_raw(r: f64, n: usize, cfg: &McConfig) -> Result<Vec<f64>> {
    let rt = rtilde(r);
    let sampler = BartlettSampler::new(n)?;
    let mut rng = cfg.stream.generator();
    Ok((0..cfg.m).map(|_| sampler.sample(&mut rng).kx_pivot(rt)).collect())
}

pub fn kx_draws(r: f64, n: usize, cfg: &McConfig) -> Result<PivotDraws> {
    prepare(MethodId::KrishnamoorthyGci, r, n, 0.05, cfg)?;
    Ok(PivotDraws::new(MethodId::KrishnamoorthyGci, kx_raw(r, n, cfg)?))
}

pub fn kx_ci(r: f64, n: usize, alpha: f64, cfg: &McConfig) -> Result<ConfidenceInterval> {
    let method = MethodId::KrishnamoorthyGci;
    prepare(method, r, n, alpha, cfg)?;
    if is_singular(r) {
        return Ok(ConfidenceInterval::degenerate(method, alpha, r));
    }
    Ok(percentile_interval(method, alpha, kx_raw(r, n, cfg)?))
}

pub fn pb_ci(r: f64, n: usize, alpha: f64, cfg: &McConfig) -> Result<ConfidenceInterval> {
    let method = MethodId::ParametricBootstrap;
    prepare(method, r, n, alpha, cfg)?;
    if is_singular(r) {
        return Ok(ConfidenceInterval::degenerate(method, alpha, r));
    }
    let rt = rtilde(r);
    // atanh(r) = asinh(r̃), and likewise for the bootstrap replicate
    let z = rt.asinh();
    let sampler = BartlettSampler::new(n)?;
    let mut rng = cfg.stream.generator();
    let mut q: Vec<f64> = (0..cfg.m)
        .map(|_| (sampler.sample(&mut rng).bootstrap_ratio(rt).asinh() - z).powi(2))
        .collect();
    let half = select_quantile(&mut q, 1.0 - alpha).sqrt();
    Ok(ConfidenceInterval::from_values(method, alpha, (z - half).tanh(), (z + half).tanh()))
}

/// Draws of `−V₁₂/√(V₁₁V₂₂)` with `V ~ W(n−1, a⁻¹)`.
pub fn new_gci_draws(scatter: &CovMatrix2, n: usize, cfg: &McConfig) -> Result<PivotDraws> {
    Ok(PivotDraws::new(MethodId::NewGci, new_gci_raw(scatter, n, cfg)?))
}

fn new_gci_raw(scatter: &CovMatrix2, n: usize, cfg: &McConfig) -> Result<Vec<f64>> {
    check_n(MethodId::NewGci, n)?;
    cfg.validate()?;
    if !scatter.is_positive_definite() {
        return Err(Error::DegenerateData("scatter matrix is not positive definite".into()));
    }
    let wishart = Wishart2::new(n - 1, &scatter.inverse()?)?;
    let mut rng = cfg.stream.generator();
    Ok((0..cfg.m)
        .map(|_| {
            let v = wishart.sample(&mut rng);
            -v.s12 / (v.s11 * v.s22).sqrt()
        })
        .collect())
}

pub fn new_gci_from_scatter(
    scatter: &CovMatrix2,
    n: usize,
    alpha: f64,
    cfg: &McConfig,
) -> Result<ConfidenceInterval> {
    check_alpha(alpha)?;
    Ok(percentile_interval(MethodId::NewGci, alpha, new_gci_raw(scatter, n, cfg)?))
}

pub fn new_gci(stats: &SuffStats, alpha: f64, cfg: &McConfig) -> Result<ConfidenceInterval> {
    new_gci_from_scatter(&stats.scatter(), stats.n, alpha, cfg)
}
