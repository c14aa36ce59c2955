//! 2×2 covariance algebra and the bivariate samplers used by the methods
//! and the simulation harness.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::summary::DataSet;

/// Symmetric 2×2 covariance matrix stored as its three free entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovMatrix2 {
    pub s11: f64,
    pub s12: f64,
    pub s22: f64,
}

impl CovMatrix2 {
    pub fn new(s11: f64, s12: f64, s22: f64) -> Self {
        Self { s11, s12, s22 }
    }

    /// Σ built from marginal standard deviations and a correlation.
    pub fn from_sd_rho(sd1: f64, sd2: f64, rho: f64) -> Self {
        Self::new(sd1 * sd1, rho * sd1 * sd2, sd2 * sd2)
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.s11 * self.s22 - self.s12 * self.s12
    }

    pub fn is_positive_definite(&self) -> bool {
        self.s11 > 0.0 && self.s22 > 0.0 && self.det() > 0.0
    }

    pub fn correlation(&self) -> f64 {
        self.s12 / (self.s11 * self.s22).sqrt()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(factor * self.s11, factor * self.s12, factor * self.s22)
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::DegenerateData(format!(
                "covariance matrix is singular (det = {det:e})"
            )));
        }
        Ok(Self::new(self.s22 / det, -self.s12 / det, self.s11 / det))
    }

    pub fn cholesky(&self) -> Result<CholeskyFactor2> {
        if !self.is_positive_definite() {
            return Err(Error::domain(format!(
                "covariance matrix {self:?} is not positive definite"
            )));
        }
        let l11 = self.s11.sqrt();
        let l21 = self.s12 / l11;
        let l22 = (self.s22 - l21 * l21).sqrt();
        Ok(CholeskyFactor2 { l11, l21, l22 })
    }
}

/// Lower-triangular factor `L` with `L·Lᵀ = Σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CholeskyFactor2 {
    pub l11: f64,
    pub l21: f64,
    pub l22: f64,
}

impl CholeskyFactor2 {
    /// Closed-form factor of the Σ parameterized by `(sd1, sd2, rho)`.
    pub fn from_sd_rho(sd1: f64, sd2: f64, rho: f64) -> Self {
        Self {
            l11: sd1,
            l21: rho * sd2,
            l22: sd2 * (1.0 - rho * rho).sqrt(),
        }
    }

    pub fn apply(&self, z1: f64, z2: f64) -> (f64, f64) {
        (self.l11 * z1, self.l21 * z1 + self.l22 * z2)
    }

    pub fn reconstruct(&self) -> CovMatrix2 {
        CovMatrix2::new(
            self.l11 * self.l11,
            self.l11 * self.l21,
            self.l21 * self.l21 + self.l22 * self.l22,
        )
    }
}

fn check_rows(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(format!("sample size {n} < 2")));
    }
    Ok(())
}

fn normal_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    (rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `n` rows of `mu + L·z`, `z` a pair of independent standard normals.
pub fn sample_bvnormal<R: Rng + ?Sized>(
    rng: &mut R,
    mu: [f64; 2],
    sigma: &CovMatrix2,
    n: usize,
) -> Result<DataSet> {
    check_rows(n)?;
    let l = sigma.cholesky()?;
    let rows = (0..n)
        .map(|_| {
            let (z1, z2) = normal_pair(rng);
            let (y1, y2) = l.apply(z1, z2);
            (mu[0] + y1, mu[1] + y2)
        })
        .collect();
    Ok(DataSet::new_unchecked(rows))
}

/// Bivariate t with `nu` degrees of freedom: each row shares one χ²_ν
/// divisor across both coordinates. For `nu > 2` the population correlation
/// equals the correlation of `sigma`.
pub fn sample_bvt<R: Rng + ?Sized>(
    rng: &mut R,
    mu: [f64; 2],
    sigma: &CovMatrix2,
    nu: f64,
    n: usize,
) -> Result<DataSet> {
    check_rows(n)?;
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::domain(format!("t degrees of freedom {nu} must be positive")));
    }
    let l = sigma.cholesky()?;
    let chi = ChiSquared::new(nu).map_err(|e| Error::domain(e.to_string()))?;
    let rows = (0..n)
        .map(|_| {
            let (z1, z2) = normal_pair(rng);
            let (y1, y2) = l.apply(z1, z2);
            let c: f64 = chi.sample(rng);
            let w = (c / nu).sqrt();
            (mu[0] + y1 / w, mu[1] + y2 / w)
        })
        .collect();
    Ok(DataSet::new_unchecked(rows))
}

/// Componentwise exponential of a bivariate normal draw.
pub fn sample_bvlognormal<R: Rng + ?Sized>(
    rng: &mut R,
    mu: [f64; 2],
    sigma: &CovMatrix2,
    n: usize,
) -> Result<DataSet> {
    let normal = sample_bvnormal(rng, mu, sigma, n)?;
    Ok(DataSet::new_unchecked(
        normal.rows().iter().map(|&(a, b)| (a.exp(), b.exp())).collect(),
    ))
}

/// Bartlett-decomposition sampler for the 2×2 Wishart law `W(df, scale)`.
#[derive(Debug, Clone)]
pub struct Wishart2 {
    chol: CholeskyFactor2,
    chi_first: ChiSquared<f64>,
    chi_second: ChiSquared<f64>,
}

impl Wishart2 {
    pub fn new(df: usize, scale: &CovMatrix2) -> Result<Self> {
        if df < 2 {
            return Err(Error::domain(format!("Wishart degrees of freedom {df} < 2")));
        }
        let chol = scale.cholesky()?;
        let chi = |k: usize| ChiSquared::new(k as f64).map_err(|e| Error::domain(e.to_string()));
        Ok(Self {
            chol,
            chi_first: chi(df)?,
            chi_second: chi(df - 1)?,
        })
    }
}

impl Distribution<CovMatrix2> for Wishart2 {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CovMatrix2 {
        let c11 = self.chi_first.sample(rng).sqrt();
        let c22 = self.chi_second.sample(rng).sqrt();
        let c21: f64 = rng.sample(StandardNormal);
        // M = L·C, W = M·Mᵀ
        let CholeskyFactor2 { l11, l21, l22 } = self.chol;
        let m11 = l11 * c11;
        let m21 = l21 * c11 + l22 * c21;
        let m22 = l22 * c22;
        CovMatrix2::new(m11 * m11, m11 * m21, m21 * m21 + m22 * m22)
    }
}

/// One draw from `W(df, scale)`.
pub fn sample_wishart2<R: Rng + ?Sized>(
    rng: &mut R,
    df: usize,
    scale: &CovMatrix2,
) -> Result<CovMatrix2> {
    Ok(Wishart2::new(df, scale)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::RngStream;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn cholesky_round_trip(sd1 in 1e-3f64..1e3, sd2 in 1e-3f64..1e3, rho in -0.999f64..0.999) {
            let sigma = CovMatrix2::from_sd_rho(sd1, sd2, rho);
            let back = sigma.cholesky().unwrap().reconstruct();
            for (a, b) in [(back.s11, sigma.s11), (back.s12, sigma.s12), (back.s22, sigma.s22)] {
                prop_assert!((a - b).abs() <= 1e-12 * sigma.s11.max(sigma.s22));
            }
        }

        #[test]
        fn cholesky_matches_closed_form(sd1 in 1e-2f64..1e2, sd2 in 1e-2f64..1e2, rho in -0.99f64..0.99) {
            let l = CovMatrix2::from_sd_rho(sd1, sd2, rho).cholesky().unwrap();
            let c = CholeskyFactor2::from_sd_rho(sd1, sd2, rho);
            prop_assert!((l.l11 - c.l11).abs() <= 1e-12 * sd1);
            prop_assert!((l.l21 - c.l21).abs() <= 1e-12 * sd2);
            prop_assert!((l.l22 - c.l22).abs() <= 1e-10 * sd2);
        }
    }

    #[test]
    fn non_pd_rejected() {
        let bad = CovMatrix2::new(1.0, 1.0, 1.0);
        assert!(bad.cholesky().is_err());
        let mut rng = RngStream::new(1, 1).generator();
        assert!(sample_bvnormal(&mut rng, [0.0, 0.0], &bad, 10).is_err());
        assert!(sample_wishart2(&mut rng, 5, &bad).is_err());
        assert!(sample_bvt(&mut rng, [0.0, 0.0], &CovMatrix2::identity(), 0.0, 10).is_err());
    }

    #[test]
    fn inverse_round_trip() {
        let a = CovMatrix2::new(2.0, 0.7, 3.0);
        let inv = a.inverse().unwrap();
        // a · a⁻¹ = I
        assert_relative_eq!(a.s11 * inv.s11 + a.s12 * inv.s12, 1.0, epsilon = 1e-14);
        assert_relative_eq!(a.s11 * inv.s12 + a.s12 * inv.s22, 0.0, epsilon = 1e-14);
        assert_relative_eq!(a.s12 * inv.s12 + a.s22 * inv.s22, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let s = RngStream::new(9, 3);
        let sigma = CovMatrix2::from_sd_rho(1.0, 2.0, 0.4);
        let a = sample_bvt(&mut s.generator(), [1.0, 2.0], &sigma, 5.0, 50).unwrap();
        let b = sample_bvt(&mut s.generator(), [1.0, 2.0], &sigma, 5.0, 50).unwrap();
        assert_eq!(a, b);
        let w1 = sample_wishart2(&mut s.generator(), 7, &sigma).unwrap();
        let w2 = sample_wishart2(&mut s.generator(), 7, &sigma).unwrap();
        assert_eq!(w1, w2);
    }

    #[test]
    fn lognormal_rows_positive() {
        let mut rng = RngStream::new(2, 2).generator();
        let d = sample_bvlognormal(&mut rng, [1.0, 2.0], &CovMatrix2::from_sd_rho(2.0, 2.0, 0.5), 500)
            .unwrap();
        assert!(d.rows().iter().all(|&(a, b)| a > 0.0 && b > 0.0));
    }
}
