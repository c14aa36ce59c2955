//! Special functions: Gauss hypergeometric series and signed log-gamma.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const SERIES_REL_TOL: f64 = 1e-14;
const SERIES_MAX_TERMS: usize = 10_000;

/// Above this argument the series in `x` is replaced by the two series in
/// `1 - x` given by the linear connection formula, when that formula applies.
const CONNECTION_THRESHOLD: f64 = 0.9;

/// `ln |Γ(x)|` together with the sign of `Γ(x)`.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if x > 0.0 {
        (ln_gamma(x), 1.0)
    } else {
        // reflection: Γ(x) Γ(1 - x) = π / sin(πx)
        let s = (PI * x).sin();
        ((PI / s.abs()).ln() - ln_gamma(1.0 - x), s.signum())
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Gauss hypergeometric function ₂F₁(a, b; c; x) for `0 <= x < 1`.
///
/// Sums the power series until a term falls below `1e-14` relative to the
/// partial sum. For `x > 0.9` with `c - a - b` not an integer the value is
/// obtained from the connection formula around `x = 1`, whose two series
/// converge geometrically in `1 - x`.
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(Error::domain(format!(
            "2F1 undefined for non-positive integer c = {c}"
        )));
    }
    if !(0.0..1.0).contains(&x) {
        return Err(Error::domain(format!("2F1 argument {x} outside [0, 1)")));
    }
    let excess = c - a - b;
    let polynomial = is_nonpositive_integer(a) || is_nonpositive_integer(b);
    if x > CONNECTION_THRESHOLD && !polynomial && (excess - excess.round()).abs() > 1e-6 {
        return connection_near_one(a, b, c, x);
    }
    series_2f1(a, b, c, x)
}

/// Plain power series Σ (a)ₖ(b)ₖ / ((c)ₖ k!) xᵏ.
pub fn series_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * x;
        sum += term;
        if term == 0.0 || term.abs() < SERIES_REL_TOL * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::Numeric {
        msg: format!("2F1({a}, {b}; {c}; {x}) series did not converge in {SERIES_MAX_TERMS} terms"),
        partial: Some(sum),
    })
}

fn connection_near_one(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let y = 1.0 - x;
    let excess = c - a - b;

    let (lg_c, s_c) = ln_gamma_signed(c);
    let (lg_e, s_e) = ln_gamma_signed(excess);
    let (lg_ca, s_ca) = ln_gamma_signed(c - a);
    let (lg_cb, s_cb) = ln_gamma_signed(c - b);
    let first_coef = s_c * s_e * s_ca * s_cb * (lg_c + lg_e - lg_ca - lg_cb).exp();

    let (lg_ne, s_ne) = ln_gamma_signed(-excess);
    let (lg_a, s_a) = ln_gamma_signed(a);
    let (lg_b, s_b) = ln_gamma_signed(b);
    let second_coef =
        s_c * s_ne * s_a * s_b * (lg_c + lg_ne - lg_a - lg_b + excess * y.ln()).exp();

    let first = if first_coef == 0.0 {
        0.0
    } else {
        first_coef * series_2f1(a, b, 1.0 - excess, y)?
    };
    let second = if second_coef == 0.0 {
        0.0
    } else {
        second_coef * series_2f1(c - a, c - b, excess + 1.0, y)?
    };
    Ok(first + second)
}
