//! Distribution functions and lower-tail quantiles for the normal, Student t
//! and F laws.
//!
//! Every quantile here is a *lower*-tail quantile: `quantile(p)` returns `x`
//! with `P(X <= x) = p`. Interval formulas that are naturally written with
//! upper quantiles convert at the call site (`upper(γ) = quantile(1 - γ)`).

use std::f64::consts::{PI, SQRT_2};

use statrs::function::beta::beta_reg;
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("probability {p} outside (0, 1)")))
    }
}

fn check_df(df: f64) -> Result<()> {
    if df.is_finite() && df > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("invalid degrees of freedom {df}")))
    }
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

pub fn std_normal_quantile(p: f64) -> Result<f64> {
    check_probability(p)?;
    let mut x = -SQRT_2 * erfc_inv(2.0 * p);
    // two Newton polishing steps against the erfc-based CDF
    for _ in 0..2 {
        let dens = std_normal_pdf(x);
        if dens <= 0.0 {
            break;
        }
        x -= (std_normal_cdf(x) - p) / dens;
    }
    Ok(x)
}

pub fn t_pdf(x: f64, df: f64) -> f64 {
    let ln_norm = ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) - 0.5 * (df * PI).ln();
    (ln_norm - 0.5 * (df + 1.0) * (x * x / df).ln_1p()).exp()
}

pub fn t_cdf(x: f64, df: f64) -> f64 {
    let tail = 0.5 * beta_reg(0.5 * df, 0.5, df / (df + x * x));
    if x >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

pub fn t_quantile(p: f64, df: f64) -> Result<f64> {
    check_probability(p)?;
    check_df(df)?;
    if p == 0.5 {
        return Ok(0.0);
    }
    if p < 0.5 {
        return t_quantile(1.0 - p, df).map(|x| -x);
    }
    let mut hi = 1.0;
    while t_cdf(hi, df) < p {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::numeric("t quantile bracket overflow"));
        }
    }
    let start = std_normal_quantile(p)?.min(hi);
    Ok(invert_cdf(|x| t_cdf(x, df), |x| t_pdf(x, df), p, 0.0, hi, start))
}

fn beta_pdf(y: f64, a: f64, b: f64) -> f64 {
    let ln_b = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    ((a - 1.0) * y.ln() + (b - 1.0) * (-y).ln_1p() - ln_b).exp()
}

pub fn f_cdf(x: f64, df1: f64, df2: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    beta_reg(0.5 * df1, 0.5 * df2, df1 * x / (df1 * x + df2))
}

pub fn f_quantile(p: f64, df1: f64, df2: f64) -> Result<f64> {
    check_probability(p)?;
    check_df(df1)?;
    check_df(df2)?;
    let (a, b) = (0.5 * df1, 0.5 * df2);
    // invert the regularized incomplete beta in y = d1 x / (d1 x + d2)
    let y = invert_cdf(
        |y| beta_reg(a, b, y),
        |y| beta_pdf(y, a, b),
        p,
        0.0,
        1.0,
        0.5,
    );
    Ok(df2 * y / (df1 * (1.0 - y)))
}

/// Safeguarded Newton inversion of a continuous increasing CDF on `(lo, hi)`.
/// Falls back to bisection whenever a Newton step leaves the bracket.
fn invert_cdf(
    cdf: impl Fn(f64) -> f64,
    pdf: impl Fn(f64) -> f64,
    p: f64,
    mut lo: f64,
    mut hi: f64,
    start: f64,
) -> f64 {
    let mut x = if start > lo && start < hi {
        start
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..300 {
        let err = cdf(x) - p;
        if err == 0.0 {
            return x;
        }
        if err > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let dens = pdf(x);
        let newton = x - err / dens;
        let next = if dens > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            return next;
        }
        x = next;
    }
    x
}
