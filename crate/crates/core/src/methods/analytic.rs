//! Closed-form and root-solved intervals built on normal, t and F
//! approximations to functions of r.

use crate::distributions::{f_quantile, std_normal_quantile, t_quantile};
use crate::error::{Error, Result};
use crate::numeric::{monotone_root, Endpoint, RHO_EDGE};
use crate::summary::SuffStats;

use super::{check_alpha, check_n, check_r, is_singular, ConfidenceInterval, MethodId};

const ROOT_TOL: f64 = 1e-10;

fn upper_normal(alpha: f64) -> Result<f64> {
    std_normal_quantile(1.0 - alpha / 2.0)
}

fn prepare(method: MethodId, r: f64, n: usize, alpha: f64) -> Result<()> {
    check_alpha(alpha)?;
    check_r(r)?;
    check_n(method, n)
}

pub fn fisher_z_ci(r: f64, n: usize, alpha: f64) -> Result<ConfidenceInterval> {
    let method = MethodId::FisherZ;
    prepare(method, r, n, alpha)?;
    if is_singular(r) {
        return Ok(ConfidenceInterval::degenerate(method, alpha, r));
    }
    let h = upper_normal(alpha)? / ((n - 3) as f64).sqrt();
    let z = r.atanh();
    Ok(ConfidenceInterval::from_values(method, alpha, (z - h).tanh(), (z + h).tanh()))
}

/// `Z_i` evaluated at `(z, x)`; the same expression gives `ζ_i` at `(ζ, ρ)`.
fn hotelling_transform(variant: u8, z: f64, x: f64, n: usize) -> f64 {
    let m = (n - 1) as f64;
    match variant {
        1 => z - (7.0 * z + x) / (8.0 * m),
        2 => {
            z - (7.0 * z + x) / (8.0 * m)
                - (119.0 * z + 57.0 * x + 3.0 * x * x) / (384.0 * m * m)
        }
        3 => z - (3.0 * z + x) / (4.0 * m),
        _ => {
            z - (3.0 * z + x) / (4.0 * m) - (23.0 * z + 33.0 * x - 5.0 * x * x) / (96.0 * m * m)
        }
    }
}

fn hotelling_id(variant: u8) -> Result<MethodId> {
    match variant {
        1 => Ok(MethodId::Hotelling1),
        2 => Ok(MethodId::Hotelling2),
        3 => Ok(MethodId::Hotelling3),
        4 => Ok(MethodId::Hotelling4),
        v => Err(Error::domain(format!("Hotelling variant {v} not in 1..=4"))),
    }
}

pub fn hotelling_ci(r: f64, n: usize, alpha: f64, variant: u8) -> Result<ConfidenceInterval> {
    let method = hotelling_id(variant)?;
    prepare(method, r, n, alpha)?;
    if is_singular(r) {
        return Ok(ConfidenceInterval::degenerate(method, alpha, r));
    }
    let h = upper_normal(alpha)? / ((n - 1) as f64).sqrt();
    let stat = hotelling_transform(variant, r.atanh(), r, n);
    let zeta = |rho: f64| hotelling_transform(variant, rho.atanh(), rho, n);
    let lo = monotone_root(|rho| zeta(rho) - (stat - h), -RHO_EDGE, RHO_EDGE, ROOT_TOL)?;
    let hi = monotone_root(|rho| zeta(rho) - (stat + h), -RHO_EDGE, RHO_EDGE, ROOT_TOL)?;
    Ok(ConfidenceInterval::from_endpoints(method, alpha, lo, hi))
}

/// Real roots of `a x² + b x + c`, ascending, or `None` without real roots.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * a * c;
    if !(disc >= 0.0) || a == 0.0 {
        return None;
    }
    // avoid cancellation in the smaller-magnitude root
    let q = -0.5 * (b + disc.sqrt().copysign(b));
    let (x1, x2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    Some((x1.min(x2), x1.max(x2)))
}

pub fn ruben_ci(r: f64, n: usize, alpha: f64) -> Result<ConfidenceInterval> {
    let method = MethodId::Ruben;
    prepare(method, r, n, alpha)?;
    if is_singular(r) {
        return Ok(ConfidenceInterval::degenerate(method, alpha, r));
    }
    let q = upper_normal(alpha)?;
    let nf = n as f64;
    let rt = r / ((1.0 - r) * (1.0 + r)).sqrt();
    let v = ((2.0 * nf - 5.0) / 2.0).sqrt() * rt;
    let k = ((2.0 * nf - 3.0) / 2.0).sqrt();
    let a = k * k - q * q / 2.0;
    if a <= 0.0 {
        return Err(Error::failure(method, "leading coefficient is not positive"));
    }
    let (t1, t2) = quadratic_roots(a, -2.0 * v * k, v * v - q * q - q * q * rt * rt / 2.0)
        .ok_or_else(|| Error::failure(method, "negative discriminant"))?;
    let back = |t: f64| t / (1.0 + t * t).sqrt();
    Ok(ConfidenceInterval::from_values(method, alpha, back(t1), back(t2)))
}

pub fn muddapur_t_ci(stats: &SuffStats, alpha: f64) -> Result<ConfidenceInterval> {
    muddapur_t_interval(stats.r, stats.b, stats.n, alpha)
}

/// Inversion of the t statistic in `(r, b)` with `n − 2` degrees of freedom.
pub fn muddapur_t_interval(r: f64, b: f64, n: usize, alpha: f64) -> Result<ConfidenceInterval> {
    let method = MethodId::Muddapur1;
    prepare(method, r, n, alpha)?;
    if is_singular(r) {
        return Ok(ConfidenceInterval::degenerate(method, alpha, r));
    }
    let t = t_quantile(1.0 - alpha / 2.0, (n - 2) as f64)?;
    let m = (n - 2) as f64;
    let u = t * t * (1.0 - r * r);
    let (x1, x2) = quadratic_roots(m * b * b + u, -2.0 * m * r * b, m * r * r - u)
        .ok_or_else(|| Error::failure(method, "negative discriminant"))?;
    Ok(ConfidenceInterval::from_values(method, alpha, x1, x2))
}

pub fn jeyaratnam_ci(r: f64, n: usize, alpha: f64) -> Result<ConfidenceInterval> {
    let method = MethodId::Muddapur2;
    prepare(method, r, n, alpha)?;
    let m = (n - 2) as f64;
    let t = t_quantile(1.0 - alpha / 2.0, m)?;
    let w = (t / m.sqrt()) / (1.0 + t * t / m).sqrt();
    Ok(ConfidenceInterval::from_values(
        method,
        alpha,
        (r - w) / (1.0 - r * w),
        (r + w) / (1.0 + r * w),
    ))
}

/// The same interval written through upper F(n−2, n−2) quantiles.
pub fn muddapur_f_form(r: f64, n: usize, alpha: f64) -> Result<(f64, f64)> {
    prepare(MethodId::Muddapur2, r, n, alpha)?;
    let m = (n - 2) as f64;
    let f = f_quantile(1.0 - alpha / 2.0, m, m)?;
    let lower = ((1.0 + f) * r + (1.0 - f)) / ((1.0 + f) + (1.0 - f) * r);
    let upper = ((1.0 + f) * r - (1.0 - f)) / ((1.0 + f) - (1.0 - f) * r);
    Ok((lower, upper))
}

pub fn haddad_provost_ci(stats: &SuffStats, alpha: f64) -> Result<ConfidenceInterval> {
    haddad_provost_interval(stats.dplus, stats.dminus, stats.n, alpha)
}

pub fn haddad_provost_interval(
    dplus: f64,
    dminus: f64,
    n: usize,
    alpha: f64,
) -> Result<ConfidenceInterval> {
    let method = MethodId::HaddadProvost;
    check_alpha(alpha)?;
    check_n(method, n)?;
    if !(dplus >= 0.0 && dminus >= 0.0 && dplus + dminus > 0.0) {
        return Err(Error::DegenerateData(format!(
            "invalid standardized sums D+ = {dplus}, D- = {dminus}"
        )));
    }
    let m = (n - 1) as f64;
    let f_hi = f_quantile(1.0 - alpha / 2.0, m, m)?;
    let f_lo = f_quantile(alpha / 2.0, m, m)?;
    let end = |f: f64| (dplus - dminus * f) / (dplus + dminus * f);
    Ok(ConfidenceInterval::from_values(method, alpha, end(f_hi), end(f_lo)))
}

fn wn_g1(x: f64, rho: f64) -> f64 {
    rho / 2.0 + rho.powi(3) * (x * x - 1.0) / 6.0
}

fn wn_g2(x: f64, rho: f64) -> f64 {
    x.powi(3) / 12.0 + x / 4.0 - rho * rho * x / 4.0
        - rho.powi(6) * (2.0 * x.powi(3) - 5.0 * x) / 36.0
}

/// Cornish–Fisher corrected normal quantile at hypothesized `rho`.
pub(crate) fn wn_quantile(x: f64, rho: f64, n: usize, order: u8) -> f64 {
    let sn = (n as f64).sqrt();
    let mut y = x + wn_g1(x, rho) / sn;
    if order >= 2 {
        y += wn_g2(x, rho) / (n as f64);
    }
    y
}

/// `θ̂ − atanh(ρ) − y_p(ρ)/√n`; the endpoint is its root in ρ.
pub(crate) fn wn_defining(theta_hat: f64, x: f64, rho: f64, n: usize, order: u8) -> f64 {
    theta_hat - rho.atanh() - wn_quantile(x, rho, n, order) / (n as f64).sqrt()
}

pub fn withers_nadarajah_ci(
    r: f64,
    n: usize,
    alpha: f64,
    order: u8,
) -> Result<ConfidenceInterval> {
    let method = match order {
        1 => MethodId::WithersNadarajah1,
        2 => MethodId::WithersNadarajah2,
        o => return Err(Error::domain(format!("expansion order {o} not in 1..=2"))),
    };
    prepare(method, r, n, alpha)?;
    if is_singular(r) {
        return Ok(ConfidenceInterval::degenerate(method, alpha, r));
    }
    let x = upper_normal(alpha)?;
    let th = r.atanh();
    let solve = |xp: f64| -> Result<Endpoint> {
        monotone_root(|rho| wn_defining(th, xp, rho, n, order), -RHO_EDGE, RHO_EDGE, ROOT_TOL)
    };
    let lo = solve(x)?;
    let hi = solve(-x)?;
    Ok(ConfidenceInterval::from_endpoints(method, alpha, lo, hi))
}
