//! Paired samples and the sufficient statistics every interval method reads.

use crate::distributions::CovMatrix2;
use crate::error::{Error, Result};

/// Correlations this close to ±1 are treated as singular by the methods
/// that need `atanh(r)` or `r / sqrt(1 - r²)`.
pub const NEAR_SINGULAR: f64 = 1.0 - 1e-12;

/// Ordered paired observations `(x1, x2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    rows: Vec<(f64, f64)>,
}

impl DataSet {
    pub fn new(rows: Vec<(f64, f64)>) -> Result<Self> {
        if let Some(i) = rows.iter().position(|&(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::domain(format!("row {} has a non-finite entry", i + 1)));
        }
        Ok(Self { rows })
    }

    pub(crate) fn new_unchecked(rows: Vec<(f64, f64)>) -> Self {
        Self { rows }
    }

    pub fn from_columns(x1: &[f64], x2: &[f64]) -> Result<Self> {
        if x1.len() != x2.len() {
            return Err(Error::domain(format!(
                "column lengths differ ({} vs {})",
                x1.len(),
                x2.len()
            )));
        }
        Self::new(x1.iter().copied().zip(x2.iter().copied()).collect())
    }

    pub fn rows(&self) -> &[(f64, f64)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Apply a row-wise map, e.g. an affine change of units.
    pub fn map(&self, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        Self::new_unchecked(self.rows.iter().map(|&(a, b)| f(a, b)).collect())
    }
}

/// Sufficient statistics of a paired sample. Moments use divisor `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuffStats {
    pub n: usize,
    pub mean1: f64,
    pub mean2: f64,
    pub s1sq: f64,
    pub s2sq: f64,
    pub s12: f64,
    /// Sample correlation, clamped into [-1, 1].
    pub r: f64,
    /// `(s1² + s2²) / sqrt(4 s1² s2²)`, at least 1.
    pub b: f64,
    /// Σ (x1* + x2*)² over standardized rows.
    pub dplus: f64,
    /// Σ (x1* - x2*)² over standardized rows.
    pub dminus: f64,
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    /// `|r| >= 1 - 1e-12`.
    pub near_singular: bool,
}

impl SuffStats {
    /// Scatter matrix `a = n·S`.
    pub fn scatter(&self) -> CovMatrix2 {
        CovMatrix2::new(self.a11, self.a12, self.a22)
    }

    /// MLE covariance matrix `S`.
    pub fn covariance(&self) -> CovMatrix2 {
        CovMatrix2::new(self.s1sq, self.s12, self.s2sq)
    }
}

pub fn suff_stats(data: &DataSet) -> Result<SuffStats> {
    let n = data.len();
    if n < 2 {
        return Err(Error::domain(format!("need at least 2 rows, got {n}")));
    }
    let nf = n as f64;
    let rows = data.rows();
    let mean1 = rows.iter().map(|r| r.0).sum::<f64>() / nf;
    let mean2 = rows.iter().map(|r| r.1).sum::<f64>() / nf;

    let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
    for &(x1, x2) in rows {
        let (d1, d2) = (x1 - mean1, x2 - mean2);
        a11 += d1 * d1;
        a12 += d1 * d2;
        a22 += d2 * d2;
    }
    if !(a11 > 0.0) || !(a22 > 0.0) {
        return Err(Error::DegenerateData(
            "a coordinate has zero sample variance".into(),
        ));
    }
    let (s1sq, s2sq, s12) = (a11 / nf, a22 / nf, a12 / nf);
    let (sd1, sd2) = (s1sq.sqrt(), s2sq.sqrt());
    let r = (s12 / (sd1 * sd2)).clamp(-1.0, 1.0);
    let b = (s1sq + s2sq) / (4.0 * s1sq * s2sq).sqrt();

    let (mut dplus, mut dminus) = (0.0, 0.0);
    for &(x1, x2) in rows {
        let (z1, z2) = ((x1 - mean1) / sd1, (x2 - mean2) / sd2);
        dplus += (z1 + z2) * (z1 + z2);
        dminus += (z1 - z2) * (z1 - z2);
    }

    Ok(SuffStats {
        n,
        mean1,
        mean2,
        s1sq,
        s2sq,
        s12,
        r,
        b,
        dplus,
        dminus,
        a11,
        a12,
        a22,
        near_singular: r.abs() >= NEAR_SINGULAR,
    })
}

/// Fisher's `z = atanh(r)` and `r̃ = r / sqrt(1 - r²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedCorrelation {
    pub z: f64,
    pub rtilde: f64,
}

pub fn transform(r: f64) -> Result<TransformedCorrelation> {
    if r.is_nan() || r.abs() > 1.0 {
        return Err(Error::domain(format!("correlation {r} outside [-1, 1]")));
    }
    if r.abs() == 1.0 {
        return Err(Error::SingularTransform);
    }
    Ok(TransformedCorrelation {
        z: r.atanh(),
        rtilde: r / ((1.0 - r) * (1.0 + r)).sqrt(),
    })
}
