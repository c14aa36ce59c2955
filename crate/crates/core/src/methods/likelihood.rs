//! Signed log-likelihood ratio `D(ρ)` and its modification `D*(ρ)`.
//!
//! Everything is evaluated through sufficient statistics, so a likelihood
//! evaluation costs O(1) after one pass over the data.

use std::f64::consts::PI;

use crate::distributions::std_normal_quantile;
use crate::error::{Error, Result};
use crate::numeric::{brent_root, Endpoint};
use crate::summary::{suff_stats, DataSet, SuffStats};

use super::{check_alpha, check_n, is_singular, ConfidenceInterval, MethodId};

const GRAD_TOL: f64 = 1e-8;
const MAX_ITER: usize = 500;
const INNER_OFFSET: f64 = 1e-3;
const ROOT_TOL: f64 = 1e-9;
/// Outer bracket ends tried in turn; the information determinants lose all
/// precision closer to ±1.
const OUTER_EDGES: [f64; 3] = [1.0 - 1e-8, 1.0 - 1e-6, 1.0 - 1e-4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamVector {
    pub mu1: f64,
    pub mu2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub rho: f64,
}

impl ParamVector {
    fn to_array(self) -> [f64; 5] {
        [self.mu1, self.mu2, self.sigma1, self.sigma2, self.rho]
    }

    fn is_valid(&self) -> bool {
        self.sigma1 > 0.0 && self.sigma2 > 0.0 && self.rho.abs() < 1.0
    }

    /// Closed-form unconstrained maximizer.
    pub fn mle(stats: &SuffStats) -> Self {
        Self {
            mu1: stats.mean1,
            mu2: stats.mean2,
            sigma1: stats.s1sq.sqrt(),
            sigma2: stats.s2sq.sqrt(),
            rho: stats.r,
        }
    }
}

/// Bivariate normal log-likelihood summed over the rows of `data`.
pub fn loglik(theta: &ParamVector, data: &DataSet) -> Result<f64> {
    if !theta.is_valid() {
        return Err(Error::domain(format!("invalid parameter vector {theta:?}")));
    }
    let ParamVector { mu1, mu2, sigma1, sigma2, rho } = *theta;
    let one_m = (1.0 - rho) * (1.0 + rho);
    let norm = -(2.0 * PI).ln() - (sigma1 * sigma2).ln() - 0.5 * one_m.ln();
    Ok(data
        .rows()
        .iter()
        .map(|&(x1, x2)| {
            let (z1, z2) = ((x1 - mu1) / sigma1, (x2 - mu2) / sigma2);
            norm - (z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2) / (2.0 * one_m)
        })
        .sum())
}

/// The same log-likelihood from sufficient statistics; NaN off the domain.
fn loglik_stats(theta: &[f64; 5], s: &SuffStats) -> f64 {
    let [mu1, mu2, sigma1, sigma2, rho] = *theta;
    if !(sigma1 > 0.0 && sigma2 > 0.0 && rho.abs() < 1.0) {
        return f64::NAN;
    }
    let n = s.n as f64;
    let (d1, d2) = (s.mean1 - mu1, s.mean2 - mu2);
    let q1 = s.a11 + n * d1 * d1;
    let q2 = s.a22 + n * d2 * d2;
    let q12 = s.a12 + n * d1 * d2;
    let one_m = (1.0 - rho) * (1.0 + rho);
    -n * (2.0 * PI).ln() - n * (sigma1 * sigma2).ln() - 0.5 * n * one_m.ln()
        - (q1 / (sigma1 * sigma1) - 2.0 * rho * q12 / (sigma1 * sigma2) + q2 / (sigma2 * sigma2))
            / (2.0 * one_m)
}

/// Negative profile log-likelihood in `(log σ₁, log σ₂)` at fixed ρ, with
/// means at their sample values, and its gradient.
fn neg_profile(t: [f64; 2], rho: f64, s: &SuffStats) -> (f64, [f64; 2]) {
    let n = s.n as f64;
    let one_m = (1.0 - rho) * (1.0 + rho);
    let (e1, e2) = ((-2.0 * t[0]).exp(), (-2.0 * t[1]).exp());
    let cross = (-t[0] - t[1]).exp();
    let quad = s.a11 * e1 - 2.0 * rho * s.a12 * cross + s.a22 * e2;
    let value = n * (t[0] + t[1]) + 0.5 * n * one_m.ln() + quad / (2.0 * one_m);
    let g1 = n - (s.a11 * e1 - rho * s.a12 * cross) / one_m;
    let g2 = n - (s.a22 * e2 - rho * s.a12 * cross) / one_m;
    (value, [g1, g2])
}

fn norm2(g: [f64; 2]) -> f64 {
    g[0].hypot(g[1])
}

fn bfgs(rho: f64, s: &SuffStats, start: [f64; 2]) -> Option<[f64; 2]> {
    let n = s.n as f64;
    let mut x = start;
    let (mut fx, mut g) = neg_profile(x, rho, s);
    let mut h = [[0.5 / n, 0.0], [0.0, 0.5 / n]];
    for _ in 0..MAX_ITER {
        if norm2(g) < GRAD_TOL {
            return Some(x);
        }
        let d = [
            -(h[0][0] * g[0] + h[0][1] * g[1]),
            -(h[1][0] * g[0] + h[1][1] * g[1]),
        ];
        let slope = d[0] * g[0] + d[1] * g[1];
        if !(slope < 0.0) {
            return None;
        }
        let mut step = 1.0;
        let (xn, fxn, gn) = loop {
            let xn = [x[0] + step * d[0], x[1] + step * d[1]];
            let (fxn, gn) = neg_profile(xn, rho, s);
            if fxn.is_finite() && fxn <= fx + 1e-4 * step * slope {
                break (xn, fxn, gn);
            }
            step *= 0.5;
            if step < 1e-16 {
                return None;
            }
        };
        let sv = [xn[0] - x[0], xn[1] - x[1]];
        let y = [gn[0] - g[0], gn[1] - g[1]];
        let sy = sv[0] * y[0] + sv[1] * y[1];
        if sy > 1e-300 {
            // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
            let rr = 1.0 / sy;
            let hy = [h[0][0] * y[0] + h[0][1] * y[1], h[1][0] * y[0] + h[1][1] * y[1]];
            let yhy = y[0] * hy[0] + y[1] * hy[1];
            for i in 0..2 {
                for j in 0..2 {
                    h[i][j] += (1.0 + yhy * rr) * rr * sv[i] * sv[j]
                        - rr * (hy[i] * sv[j] + sv[i] * hy[j]);
                }
            }
        }
        x = xn;
        fx = fxn;
        g = gn;
    }
    (norm2(g) < GRAD_TOL).then_some(x)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Coordinate-wise golden-section descent, used when BFGS stalls.
fn coordinate_descent(rho: f64, s: &SuffStats, start: [f64; 2]) -> [f64; 2] {
    let mut x = start;
    for _ in 0..200 {
        let prev = x;
        x[0] = golden_min(|v| neg_profile([v, x[1]], rho, s).0, x[0] - 2.0, x[0] + 2.0);
        x[1] = golden_min(|v| neg_profile([x[0], v], rho, s).0, x[1] - 2.0, x[1] + 2.0);
        if (x[0] - prev[0]).abs() + (x[1] - prev[1]).abs() < 1e-12 {
            break;
        }
    }
    x
}

fn constrained_from_stats(s: &SuffStats, rho0: f64) -> Result<ParamVector> {
    if !(rho0.abs() < 1.0) {
        return Err(Error::domain(format!("constrained correlation {rho0} outside (-1, 1)")));
    }
    let start = [0.5 * s.s1sq.ln(), 0.5 * s.s2sq.ln()];
    let t = match bfgs(rho0, s, start) {
        Some(t) => t,
        None => {
            let t = coordinate_descent(rho0, s, start);
            let g = neg_profile(t, rho0, s).1;
            if norm2(g) > 1e-6 * s.n as f64 {
                return Err(Error::Numeric {
                    msg: format!("profile optimization did not converge at rho = {rho0}"),
                    partial: None,
                });
            }
            t
        }
    };
    Ok(ParamVector {
        mu1: s.mean1,
        mu2: s.mean2,
        sigma1: t[0].exp(),
        sigma2: t[1].exp(),
        rho: rho0,
    })
}

pub fn constrained_mle(data: &DataSet, rho0: f64) -> Result<ParamVector> {
    constrained_from_stats(&suff_stats(data)?, rho0)
}

fn signed_lr_stats(s: &SuffStats, rho0: f64) -> Result<f64> {
    let full = loglik_stats(&ParamVector::mle(s).to_array(), s);
    let constrained = constrained_from_stats(s, rho0)?;
    let restricted = loglik_stats(&constrained.to_array(), s);
    let drop = (2.0 * (full - restricted)).max(0.0);
    Ok(if s.r >= rho0 { drop.sqrt() } else { -drop.sqrt() })
}

pub fn signed_lr(data: &DataSet, rho0: f64) -> Result<f64> {
    signed_lr_stats(&suff_stats(data)?, rho0)
}

/// Observed information `−∂²ℓ` at the MLE (5×5) and the nuisance block at
/// the constrained MLE (4×4, over μ₁, μ₂, σ₁, σ₂).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedInformation {
    pub full: [[f64; 5]; 5],
    pub nuisance: [[f64; 4]; 4],
}

fn fd_steps(theta: &[f64; 5]) -> [f64; 5] {
    let mut h = theta.map(|v| 1e-4 * v.abs().max(1.0));
    h[4] = h[4].min(0.5 * (1.0 - theta[4].abs()));
    h
}

/// Central-difference negative Hessian over the first `k` coordinates.
fn neg_hessian<const K: usize>(theta: &[f64; 5], s: &SuffStats) -> [[f64; K]; K] {
    let h = fd_steps(theta);
    let f = |di: usize, si: f64, dj: usize, sj: f64| {
        let mut t = *theta;
        t[di] += si * h[di];
        t[dj] += sj * h[dj];
        loglik_stats(&t, s)
    };
    let f0 = loglik_stats(theta, s);
    let mut out = [[0.0; K]; K];
    for i in 0..K {
        let mut up = *theta;
        up[i] += h[i];
        let mut dn = *theta;
        dn[i] -= h[i];
        out[i][i] = -(loglik_stats(&up, s) - 2.0 * f0 + loglik_stats(&dn, s)) / (h[i] * h[i]);
        for j in 0..i {
            let v = (f(i, 1.0, j, 1.0) - f(i, 1.0, j, -1.0) - f(i, -1.0, j, 1.0)
                + f(i, -1.0, j, -1.0))
                / (4.0 * h[i] * h[j]);
            out[i][j] = -v;
            out[j][i] = -v;
        }
    }
    out
}

fn determinant<const K: usize>(mut m: [[f64; K]; K]) -> f64 {
    let mut det = 1.0;
    for c in 0..K {
        let p = (c..K)
            .max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
            .unwrap_or(c);
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..K {
            let factor = m[r][c] / m[c][c];
            for k in c..K {
                m[r][k] -= factor * m[c][k];
            }
        }
    }
    det
}

fn information_stats(s: &SuffStats, rho0: f64) -> Result<ObservedInformation> {
    let constrained = constrained_from_stats(s, rho0)?;
    Ok(ObservedInformation {
        full: neg_hessian::<5>(&ParamVector::mle(s).to_array(), s),
        nuisance: neg_hessian::<4>(&constrained.to_array(), s),
    })
}

pub fn observed_information(data: &DataSet, rho0: f64) -> Result<ObservedInformation> {
    information_stats(&suff_stats(data)?, rho0)
}

/// `D*` given `D` and the determinant of the full information at the MLE.
fn modified_from_parts(s: &SuffStats, rho0: f64, d: f64, det_full: f64) -> Result<f64> {
    if d.abs() < 1e-6 {
        return Err(Error::numeric("D* is singular at the MLE"));
    }
    let constrained = constrained_from_stats(s, rho0)?;
    let det_nuis = determinant(neg_hessian::<4>(&constrained.to_array(), s));
    let ratio = det_full / det_nuis;
    if !(ratio > 0.0) {
        return Err(Error::numeric(format!("information determinant ratio {ratio:e} is not positive")));
    }
    let q = (s.r - rho0) * ratio.sqrt();
    Ok(d - (d / q).ln() / d)
}

fn modified_stats(s: &SuffStats, rho0: f64) -> Result<f64> {
    let d = signed_lr_stats(s, rho0)?;
    let det_full = determinant(neg_hessian::<5>(&ParamVector::mle(s).to_array(), s));
    modified_from_parts(s, rho0, d, det_full)
}

pub fn modified_signed_lr(data: &DataSet, rho0: f64) -> Result<f64> {
    modified_stats(&suff_stats(data)?, rho0)
}

/// Sufficient statistics of the standardized sample: zero means, unit
/// variances, same r. Both statistics are invariant under this map.
fn standardized(s: &SuffStats) -> SuffStats {
    let n = s.n as f64;
    SuffStats {
        mean1: 0.0,
        mean2: 0.0,
        s1sq: 1.0,
        s2sq: 1.0,
        s12: s.r,
        b: 1.0,
        a11: n,
        a12: n * s.r,
        a22: n,
        ..*s
    }
}

pub fn lr_ci(data: &DataSet, alpha: f64, modified: bool) -> Result<ConfidenceInterval> {
    let method = if modified { MethodId::ModifiedSignedLr } else { MethodId::SignedLr };
    check_alpha(alpha)?;
    check_n(method, data.len())?;
    let raw = suff_stats(data)?;
    let r = raw.r;
    if is_singular(r) {
        return Ok(ConfidenceInterval::degenerate(method, alpha, r));
    }
    let s = standardized(&raw);
    let z = std_normal_quantile(1.0 - alpha / 2.0)?;
    let det_full = determinant(neg_hessian::<5>(&ParamVector::mle(&s).to_array(), &s));
    let stat = |rho: f64| -> f64 {
        let value = signed_lr_stats(&s, rho).and_then(|d| {
            if modified {
                modified_from_parts(&s, rho, d, det_full)
            } else {
                Ok(d)
            }
        });
        value.unwrap_or(f64::NAN)
    };
    let lower = endpoint(&stat, z, r - INNER_OFFSET, -1.0)?;
    let upper = endpoint(&stat, -z, r + INNER_OFFSET, 1.0)?;
    Ok(ConfidenceInterval::from_endpoints(method, alpha, lower, upper))
}

/// Root of `stat(ρ) = target` between the inner point next to r and the
/// outer edge on the side of `sign`. The statistic has the sign of `target`
/// far from r.
fn endpoint(stat: &impl Fn(f64) -> f64, target: f64, inner: f64, sign: f64) -> Result<Endpoint> {
    let g = |rho: f64| stat(rho) - target;
    let Some((outer, go)) = OUTER_EDGES
        .iter()
        .map(|e| sign * e)
        .filter(|&o| (o - inner) * sign > 0.0)
        .map(|o| (o, g(o)))
        .find(|(_, v)| v.is_finite())
    else {
        return if (inner * sign) >= OUTER_EDGES[2] {
            Ok(Endpoint::clamped(sign))
        } else {
            Err(Error::numeric("likelihood statistic undefined near the boundary"))
        };
    };
    let gi = g(inner);
    if gi.is_nan() {
        return Err(Error::numeric("likelihood statistic undefined next to r"));
    }
    if gi.signum() == target.signum() || gi == 0.0 {
        // already past the target next to r
        return Ok(Endpoint::clamped(inner));
    }
    if go.signum() != target.signum() {
        return Ok(Endpoint::clamped(sign));
    }
    brent_root(g, inner, outer, ROOT_TOL, 200).map(Endpoint::solved)
}
