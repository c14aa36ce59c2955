//! Root finding, quadrature and order-statistic helpers shared by the
//! interval methods.

use crate::error::{Error, Result};

/// Lowest and highest correlation a root search may visit.
pub(crate) const RHO_EDGE: f64 = 1.0 - 1e-10;

/// Brent's method on a bracket `[a, b]` with `f(a)·f(b) <= 0`.
///
/// Combines inverse quadratic interpolation and secant steps with a
/// bisection fallback, so it never does worse than bisection on the same
/// bracket. Stops once the bracket is narrower than `xtol`.
pub fn brent_root<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    brent_with_values(&mut f, a, b, fa, fb, xtol, max_iter)
}

fn brent_with_values<F: FnMut(f64) -> f64>(
    f: &mut F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::numeric("root bracket evaluates to NaN"));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::numeric(format!(
            "no sign change on [{a}, {b}] ({fa:e}, {fb:e})"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::numeric(format!("root function is NaN at {b}")));
        }
    }
    Err(Error::Numeric {
        msg: format!("root search did not converge in {max_iter} iterations"),
        partial: Some(b),
    })
}

/// An interval endpoint, flagged when it had to be clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoint {
    pub value: f64,
    pub clamped: bool,
}

impl Endpoint {
    pub fn solved(value: f64) -> Self {
        Self { value, clamped: false }
    }

    pub fn clamped(value: f64) -> Self {
        Self { value, clamped: true }
    }
}

/// Root of a monotone `g` on `[lo, hi]`.
///
/// When `g` keeps one sign over the bracket the root lies outside it; the
/// endpoint is then clamped to -1 (root below `lo`) or +1 (root above `hi`).
pub(crate) fn monotone_root<F: FnMut(f64) -> f64>(
    mut g: F,
    lo: f64,
    hi: f64,
    xtol: f64,
) -> Result<Endpoint> {
    let glo = g(lo);
    let ghi = g(hi);
    if glo.is_nan() || ghi.is_nan() {
        return Err(Error::numeric("root bracket evaluates to NaN"));
    }
    if glo == 0.0 || ghi == 0.0 || glo.signum() != ghi.signum() {
        return brent_with_values(&mut g, lo, hi, glo, ghi, xtol, 200).map(Endpoint::solved);
    }
    let increasing = ghi > glo;
    let root_below = if increasing { glo > 0.0 } else { glo < 0.0 };
    Ok(Endpoint::clamped(if root_below { -1.0 } else { 1.0 }))
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and its difference from the embedded
/// 7-point Gauss rule.
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss–Kronrod quadrature of `f` over `[a, b]`.
///
/// Repeatedly bisects the panel with the largest error estimate until the
/// summed estimate drops below `abs_tol`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let (total, err) = panels
            .iter()
            .fold((0.0, 0.0), |(t, s), p| (t + p.2, s + p.3));
        if !total.is_finite() {
            return Err(Error::numeric("integrand is not finite"));
        }
        if err <= abs_tol {
            return Ok(total);
        }
        if panels.len() >= max_panels {
            return Err(Error::Numeric {
                msg: format!("quadrature error {err:e} above {abs_tol:e} after {max_panels} panels"),
                partial: Some(total),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

/// Empirical quantile of sorted data: linear interpolation between the
/// order statistics of ranks ⌊q(m+1)⌋ and ⌈q(m+1)⌉ (1-based), clamped to
/// the extreme observations.
pub fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    assert!(m > 0, "empirical quantile of an empty sample");
    let h = q * (m as f64 + 1.0);
    if h <= 1.0 {
        return sorted[0];
    }
    if h >= m as f64 {
        return sorted[m - 1];
    }
    let lo = h.floor();
    let i = lo as usize - 1;
    sorted[i] + (h - lo) * (sorted[i + 1] - sorted[i])
}

/// [`empirical_quantile`] of an unsorted sample, by partial selection.
/// Reorders `values`.
pub fn select_quantile(values: &mut [f64], q: f64) -> f64 {
    let m = values.len();
    assert!(m > 0, "empirical quantile of an empty sample");
    let h = q * (m as f64 + 1.0);
    let k = if h <= 1.0 {
        0
    } else if h >= m as f64 {
        m - 1
    } else {
        h.floor() as usize - 1
    };
    let (_, &mut at, above) = values.select_nth_unstable_by(k, f64::total_cmp);
    if h <= 1.0 || h >= m as f64 {
        return at;
    }
    let next = above.iter().copied().min_by(f64::total_cmp).unwrap_or(at);
    at + (h - h.floor()) * (next - at)
}
