//! Exact sampling density of r under bivariate normality, its CDF, and the
//! interval obtained by inverting both tails in ρ.
//!
//! The CDF integrates in `u = atanh(r)`, where the density times the
//! Jacobian `sech²u` is smooth and has exponentially decaying tails.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::distributions::{gauss_2f1, std_normal_quantile};
use crate::error::{Error, Result};
use crate::numeric::{brent_root, integrate, Endpoint};

use super::{check_alpha, check_n, check_r, is_singular, ConfidenceInterval, MethodId};

const CDF_ABS_TOL: f64 = 1e-10;
const CDF_MAX_PANELS: usize = 400;
const RHO_BRACKET: f64 = 1.0 - 1e-9;
const RHO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactDensityParams {
    pub n: usize,
    pub rho: f64,
    log_norm: f64,
}

impl ExactDensityParams {
    pub fn new(n: usize, rho: f64) -> Result<Self> {
        if n < 4 {
            return Err(Error::NotApplicable { method: MethodId::Exact, n });
        }
        if !(rho.abs() < 1.0) {
            return Err(Error::domain(format!("correlation {rho} outside (-1, 1)")));
        }
        let nf = n as f64;
        let log_norm = (nf - 2.0).ln() + ln_gamma(nf - 1.0)
            + 0.5 * (nf - 1.0) * ((1.0 - rho) * (1.0 + rho)).ln()
            - 0.5 * (2.0 * PI).ln()
            - ln_gamma(nf - 0.5);
        Ok(Self { n, rho, log_norm })
    }

    /// Density of `u = atanh(r)`, i.e. `f(tanh u) · sech²u`.
    fn u_density(&self, u: f64) -> Result<f64> {
        let nf = self.n as f64;
        let rho = self.rho;
        let e = (-2.0 * u.abs()).exp();
        let ln_cosh = u.abs() + e.ln_1p() - std::f64::consts::LN_2;
        // ln(1 − ρ tanh u) without cancellation when ρ tanh u ≈ 1
        let s = if u >= 0.0 { rho } else { -rho };
        let ln_one_minus = ((1.0 - s) + (1.0 + s) * e).ln() - e.ln_1p();
        let x = 0.5 * (1.0 + rho * u.tanh());
        let hyp = gauss_2f1(0.5, 0.5, nf - 0.5, x.min(1.0 - f64::EPSILON))?;
        let log_f = self.log_norm - (nf - 2.0) * ln_cosh - (nf - 1.5) * ln_one_minus;
        Ok(log_f.exp() * hyp)
    }

    /// Effective support in u; mass outside is below double precision.
    fn u_range(&self) -> (f64, f64) {
        let center = self.rho.atanh();
        let width = 3.0 + 40.0 / (self.n as f64 - 1.0);
        (center - width, center + width)
    }
}

pub fn exact_density(r: f64, params: &ExactDensityParams) -> Result<f64> {
    if !(r.abs() < 1.0) {
        return Err(Error::domain(format!("r = {r} outside (-1, 1)")));
    }
    let one_minus = (1.0 - r) * (1.0 + r);
    Ok(params.u_density(r.atanh())? / one_minus)
}

pub fn exact_cdf(r: f64, params: &ExactDensityParams) -> Result<f64> {
    if r.is_nan() || r.abs() > 1.0 {
        return Err(Error::domain(format!("r = {r} outside [-1, 1]")));
    }
    let (lo, hi) = params.u_range();
    let u = if r.abs() < 1.0 { r.atanh() } else { r * f64::INFINITY };
    if u <= lo {
        return Ok(0.0);
    }
    let top = u.min(hi);
    let mode = params.rho.atanh();
    let mut err = None;
    let mut f = |v: f64| match params.u_density(v) {
        Ok(d) => d,
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    };
    let mut total = 0.0;
    // split at the mode so each panel sees a one-sided tail
    if mode > lo && mode < top {
        total += integrate(&mut f, lo, mode, CDF_ABS_TOL, CDF_MAX_PANELS)?;
        total += integrate(&mut f, mode, top, CDF_ABS_TOL, CDF_MAX_PANELS)?;
    } else {
        total += integrate(&mut f, lo, top, CDF_ABS_TOL, CDF_MAX_PANELS)?;
    }
    if let Some(e) = err {
        return Err(e);
    }
    Ok(total.clamp(0.0, 1.0))
}

/// ρ solving `cdf(r; ρ) = target`, a decreasing function of ρ.
fn solve_tail(r: f64, n: usize, target: f64, guess: (f64, f64)) -> Result<Endpoint> {
    let g = |rho: f64| -> f64 {
        match ExactDensityParams::new(n, rho).and_then(|p| exact_cdf(r, &p)) {
            Ok(c) => c - target,
            Err(_) => f64::NAN,
        }
    };
    let (a, b) = guess;
    let (ga, gb) = (g(a), g(b));
    if ga.is_finite() && gb.is_finite() && ga.signum() != gb.signum() {
        return brent_root(g, a, b, RHO_TOL, 200).map(Endpoint::solved);
    }
    let (glo, ghi) = (g(-RHO_BRACKET), g(RHO_BRACKET));
    if glo.is_nan() || ghi.is_nan() {
        return Err(Error::numeric("exact CDF failed at the edge of the bracket"));
    }
    if glo.signum() == ghi.signum() {
        // decreasing in ρ: positive everywhere puts the root above the bracket
        return Ok(Endpoint::clamped(if glo > 0.0 { 1.0 } else { -1.0 }));
    }
    brent_root(g, -RHO_BRACKET, RHO_BRACKET, RHO_TOL, 200).map(Endpoint::solved)
}

pub fn exact_ci(r_obs: f64, n: usize, alpha: f64) -> Result<ConfidenceInterval> {
    let method = MethodId::Exact;
    check_alpha(alpha)?;
    check_r(r_obs)?;
    check_n(method, n)?;
    if is_singular(r_obs) {
        return Ok(ConfidenceInterval::degenerate(method, alpha, r_obs));
    }
    // Fisher-z endpoints widened by 0.5 in z seed narrow brackets
    let z = r_obs.atanh();
    let h = std_normal_quantile(1.0 - alpha / 2.0)? / ((n - 3) as f64).sqrt();
    let bracket = |c: f64| ((c - 0.5).tanh().max(-RHO_BRACKET), (c + 0.5).tanh().min(RHO_BRACKET));
    let upper = solve_tail(r_obs, n, alpha / 2.0, bracket(z + h))?;
    let lower = solve_tail(r_obs, n, 1.0 - alpha / 2.0, bracket(z - h))?;
    Ok(ConfidenceInterval::from_endpoints(method, alpha, lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(n: usize, rho: f64) -> ExactDensityParams {
        ExactDensityParams::new(n, rho).unwrap()
    }

    /// Simpson's rule over r on a fine grid, independent of the u-space code path.
    fn simpson_mass(p: &ExactDensityParams) -> f64 {
        let m = 200_000;
        let h = 2.0 / m as f64;
        let mut s = 0.0;
        for i in 1..m {
            let r = -1.0 + i as f64 * h;
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * exact_density(r, p).unwrap();
        }
        s * h / 3.0
    }

    #[test]
    fn density_integrates_to_one() {
        for n in [5, 10, 25] {
            for rho in [0.0, 0.6, 0.9] {
                let p = params(n, rho);
                assert_abs_diff_eq!(exact_cdf(1.0, &p).unwrap(), 1.0, epsilon = 1e-8);
                assert_abs_diff_eq!(simpson_mass(&p), 1.0, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn symmetric_at_zero() {
        let p = params(9, 0.0);
        for r in [0.1, 0.5, 0.93] {
            let (a, b) = (exact_density(r, &p).unwrap(), exact_density(-r, &p).unwrap());
            assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
        assert_abs_diff_eq!(exact_cdf(0.0, &p).unwrap(), 0.5, epsilon = 1e-8);
    }

    #[test]
    fn cdf_monotone_in_r() {
        for (n, rho) in [(4, 0.0), (10, 0.6), (30, -0.95)] {
            let p = params(n, rho);
            let mut prev = 0.0;
            for i in 0..=1000 {
                let r = -1.0 + i as f64 * 0.002;
                let c = exact_cdf(r, &p).unwrap();
                assert!(c >= prev - 1e-12, "n={n} rho={rho} r={r}");
                prev = c;
            }
        }
    }

    #[test]
    fn cdf_decreasing_in_rho() {
        for (n, r) in [(5, 0.3), (11, 0.9755), (16, -0.7786)] {
            let mut prev = 1.0 + 1e-12;
            for i in 1..40 {
                let rho = -0.975 + i as f64 * 0.05;
                let c = exact_cdf(r, &params(n, rho)).unwrap();
                assert!(c < prev, "n={n} r={r} rho={rho}");
                prev = c;
            }
        }
    }

    #[test]
    fn known_intervals() {
        let a = exact_ci(0.9755, 11, 0.05).unwrap();
        assert_abs_diff_eq!(a.lower, 0.897, epsilon = 1e-3);
        assert_abs_diff_eq!(a.upper, 0.993, epsilon = 1e-3);
        let b = exact_ci(-0.7786, 16, 0.05).unwrap();
        assert_abs_diff_eq!(b.lower, -0.913, epsilon = 1e-3);
        assert_abs_diff_eq!(b.upper, -0.447, epsilon = 1e-3);
    }

    #[test]
    fn tails_hit_their_targets() {
        let ci = exact_ci(0.42, 7, 0.1).unwrap();
        let lo = exact_cdf(0.42, &params(7, ci.lower)).unwrap();
        let hi = exact_cdf(0.42, &params(7, ci.upper)).unwrap();
        assert_abs_diff_eq!(lo, 0.95, epsilon = 1e-7);
        assert_abs_diff_eq!(hi, 0.05, epsilon = 1e-7);
    }

    #[test]
    fn sign_equivariant_and_nested() {
        for (r, n) in [(0.3, 4), (-0.8, 9), (0.97, 30)] {
            let a = exact_ci(r, n, 0.05).unwrap();
            let b = exact_ci(-r, n, 0.05).unwrap();
            assert_abs_diff_eq!(a.lower, -b.upper, epsilon = 1e-6);
            assert_abs_diff_eq!(a.upper, -b.lower, epsilon = 1e-6);
            let w = exact_ci(r, n, 0.01).unwrap();
            assert!(w.lower <= a.lower && a.upper <= w.upper);
        }
    }

    #[test]
    fn rejects_small_n() {
        assert!(ExactDensityParams::new(3, 0.1).is_err());
        assert!(ExactDensityParams::new(5, 1.0).is_err());
        assert!(exact_ci(0.2, 3, 0.05).is_err());
    }
}
