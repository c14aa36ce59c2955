#![allow(dead_code)]

use rhoci::distributions::{std_normal_quantile, t_quantile, RngStream};
use rhoci::methods::{exact_cdf, exact_density, pb_sample_r, ExactDensityParams};
use rhoci::{compute, ConfidenceInterval, DataSet, Input, McConfig, MethodId};

pub const GRID: usize = 100_000;

pub fn rtilde(r: f64) -> f64 {
    r / ((1.0 - r) * (1.0 + r)).sqrt()
}

/// Midpoint grid of `GRID` points over (−1, 1).
pub fn rho_grid() -> impl Iterator<Item = f64> {
    (0..GRID).map(|i| -1.0 + (2.0 * i as f64 + 1.0) / GRID as f64)
}

/// Every crossing of `f = 0` along the grid, located by linear interpolation.
/// NaN values break the scan.
pub fn grid_roots(f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for x in rho_grid() {
        let y = f(x);
        if y.is_nan() {
            prev = None;
            continue;
        }
        if let Some((px, py)) = prev {
            if y == 0.0 {
                roots.push(x);
            } else if py != 0.0 && py.signum() != y.signum() {
                roots.push(px + (x - px) * py / (py - y));
            }
        }
        prev = Some((x, y));
    }
    roots
}

fn z(alpha: f64) -> f64 {
    std_normal_quantile(1.0 - alpha / 2.0).unwrap()
}

fn single(roots: Vec<f64>, what: &str) -> f64 {
    assert_eq!(roots.len(), 1, "{what}: roots {roots:?}");
    roots[0]
}

fn hotelling(variant: u8, z: f64, x: f64, n: usize) -> f64 {
    let m = (n - 1) as f64;
    let first = |a: f64, d: f64| z - (a * z + x) / (d * m);
    match variant {
        1 => first(7.0, 8.0),
        2 => first(7.0, 8.0) - (119.0 * z + 57.0 * x + 3.0 * x * x) / (384.0 * m * m),
        3 => first(3.0, 4.0),
        _ => first(3.0, 4.0) - (23.0 * z + 33.0 * x - 5.0 * x * x) / (96.0 * m * m),
    }
}

fn wn_y(x: f64, rho: f64, n: usize, order: u8) -> f64 {
    let nf = n as f64;
    let g1 = rho / 2.0 + rho.powi(3) * (x * x - 1.0) / 6.0;
    let g2 = x.powi(3) / 12.0 + x / 4.0 - rho * rho * x / 4.0
        - rho.powi(6) * (2.0 * x.powi(3) - 5.0 * x) / 36.0;
    x + g1 / nf.sqrt() + if order == 2 { g2 / nf } else { 0.0 }
}

/// Endpoints found by scanning the defining equation of `method` on the grid.
pub fn grid_interval(method: MethodId, r: f64, n: usize, alpha: f64) -> (f64, f64) {
    let name = method.name();
    let (nf, q) = (n as f64, z(alpha));
    match method {
        MethodId::Exact => {
            let cdf = |rho: f64| exact_cdf(r, &ExactDensityParams::new(n, rho).unwrap()).unwrap();
            let lo = single(grid_roots(|rho| 1.0 - cdf(rho) - alpha / 2.0), name);
            let hi = single(grid_roots(|rho| cdf(rho) - alpha / 2.0), name);
            (lo, hi)
        }
        MethodId::Hotelling1 | MethodId::Hotelling2 | MethodId::Hotelling3 | MethodId::Hotelling4 => {
            let v = match method {
                MethodId::Hotelling1 => 1,
                MethodId::Hotelling2 => 2,
                MethodId::Hotelling3 => 3,
                _ => 4,
            };
            let stat = hotelling(v, r.atanh(), r, n);
            let h = q / (nf - 1.0).sqrt();
            let zeta = |rho: f64| hotelling(v, rho.atanh(), rho, n);
            let lo = single(grid_roots(|rho| zeta(rho) - stat + h), name);
            let hi = single(grid_roots(|rho| zeta(rho) - stat - h), name);
            (lo, hi)
        }
        MethodId::WithersNadarajah1 | MethodId::WithersNadarajah2 => {
            let order = if method == MethodId::WithersNadarajah1 { 1 } else { 2 };
            let g = |x: f64, rho: f64| r.atanh() - rho.atanh() - wn_y(x, rho, n, order) / nf.sqrt();
            let lo = single(grid_roots(|rho| g(q, rho)), name);
            let hi = single(grid_roots(|rho| g(-q, rho)), name);
            (lo, hi)
        }
        MethodId::Ruben => {
            let (a, b) = (((2.0 * nf - 5.0) / 2.0).sqrt(), ((2.0 * nf - 3.0) / 2.0).sqrt());
            let rt = rtilde(r);
            let zhr = |rho: f64| {
                let pt = rtilde(rho);
                (a * rt - b * pt) / (1.0 + 0.5 * (rt * rt + pt * pt)).sqrt()
            };
            let roots = grid_roots(|rho| zhr(rho).powi(2) - q * q);
            assert_eq!(roots.len(), 2, "{name}: roots {roots:?}");
            (roots[0], roots[1])
        }
        _ => panic!("no grid oracle for {name}"),
    }
}

/// Muddapur's t statistic inverted on the grid, from raw `(r, b)`.
pub fn grid_muddapur_t(r: f64, b: f64, n: usize, alpha: f64) -> (f64, f64) {
    let m = (n - 2) as f64;
    let tq = t_quantile(1.0 - alpha / 2.0, m).unwrap();
    let t = |rho: f64| m.sqrt() * (r - rho * b) / ((1.0 - rho * rho) * (1.0 - r * r)).sqrt();
    let roots = grid_roots(|rho| t(rho).powi(2) - tq * tq);
    assert_eq!(roots.len(), 2, "muddapur-1: roots {roots:?}");
    (roots[0], roots[1])
}

/// Likelihood statistic inverted on the grid; points within 2e−3 of r are
/// skipped where `D*` is singular.
pub fn grid_lr(stat: impl Fn(f64) -> f64, r: f64, alpha: f64) -> (f64, f64) {
    let q = z(alpha);
    let near = |rho: f64| (rho - r).abs() < 2e-3;
    let lo = single(
        grid_roots(|rho| if near(rho) || rho > r { f64::NAN } else { stat(rho) - q }),
        "lr lower",
    );
    let hi = single(
        grid_roots(|rho| if near(rho) || rho < r { f64::NAN } else { stat(rho) + q }),
        "lr upper",
    );
    (lo, hi)
}

/// Kolmogorov–Smirnov distance between `m` bootstrap correlations and the
/// exact law. The reference CDF is anchored with `exact_cdf` every 1000
/// sorted draws and carried between them by Simpson steps of the density.
pub fn pb_ks(n: usize, rho: f64, m: usize, seed: u64) -> f64 {
    let mut rng = RngStream::new(seed, 0).generator();
    let rt = rtilde(rho);
    let mut xs: Vec<f64> = (0..m).map(|_| pb_sample_r(rt, n, &mut rng).unwrap()).collect();
    xs.sort_by(f64::total_cmp);
    let params = ExactDensityParams::new(n, rho).unwrap();
    let f = |x: f64| exact_density(x, &params).unwrap();
    let mut cdf = 0.0;
    let mut d: f64 = 0.0;
    let mf = m as f64;
    for (i, &x) in xs.iter().enumerate() {
        if i % 1000 == 0 {
            cdf = exact_cdf(x, &params).unwrap();
        } else {
            let a = xs[i - 1];
            cdf += (x - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + x)) + f(x));
        }
        d = d.max((cdf - i as f64 / mf).abs()).max(((i + 1) as f64 / mf - cdf).abs());
    }
    d
}

/// Simpson integral of the density over u = atanh r.
pub fn density_mass(n: usize, rho: f64) -> f64 {
    let params = ExactDensityParams::new(n, rho).unwrap();
    let (a, b) = (rho.atanh() - 25.0, rho.atanh() + 25.0);
    let k = 400_000;
    let h = (b - a) / k as f64;
    let g = |u: f64| {
        let r = u.tanh();
        if r.abs() >= 1.0 {
            0.0
        } else {
            let sech2 = 1.0 / u.cosh().powi(2);
            exact_density(r, &params).unwrap() * sech2
        }
    };
    let mut s = g(a) + g(b);
    for i in 1..k {
        s += g(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

pub fn summary_ci(method: MethodId, r: f64, n: usize, alpha: f64) -> rhoci::Result<ConfidenceInterval> {
    let mc = McConfig::new(1000, RngStream::new(0, 0));
    compute(method, &Input::Summary { r, n }, alpha, &mc)
}

pub fn raw_ci(method: MethodId, data: &DataSet, alpha: f64) -> rhoci::Result<ConfidenceInterval> {
    let stats = rhoci::suff_stats(data)?;
    let mc = McConfig::new(1000, RngStream::new(0, 0));
    compute(method, &Input::Raw { data, stats: &stats }, alpha, &mc)
}

pub fn reflect(data: &DataSet) -> DataSet {
    data.map(|a, b| (a, -b))
}

pub fn deterministic_methods() -> impl Iterator<Item = MethodId> {
    MethodId::ALL.into_iter().filter(|m| !m.is_monte_carlo())
}

/// Largest violation of `I(−data) = −I(data)` and of nesting across
/// `alphas` (ascending) over `cases` random samples.
pub fn sweep(method: MethodId, cases: usize, seed: u64) -> (f64, f64) {
    use rhoci::distributions::{sample_bvnormal, CovMatrix2};
    use rand::Rng;
    let mut rng = RngStream::new(seed, method as u64).generator();
    let alphas = [0.01, 0.05, 0.1, 0.2];
    let (mut sign, mut nest) = (0.0f64, 0.0f64);
    let mut done = 0;
    while done < cases {
        let n = rng.random_range(method.min_n().max(4)..=30);
        let rho = rng.random_range(-0.95..0.95);
        let sd = (rng.random_range(0.2..5.0), rng.random_range(0.2..5.0));
        let sigma = CovMatrix2::from_sd_rho(sd.0, sd.1, rho);
        let data = sample_bvnormal(&mut rng, [1.0, -2.0], &sigma, n).unwrap();
        let ci = |d: &DataSet, a: f64| raw_ci(method, d, a);
        let Ok(base) = ci(&data, 0.05) else { continue };
        let Ok(mirror) = ci(&reflect(&data), 0.05) else { continue };
        sign = sign.max((base.lower + mirror.upper).abs()).max((base.upper + mirror.lower).abs());
        let ladder: Vec<_> = alphas.iter().filter_map(|&a| ci(&data, a).ok()).collect();
        for w in ladder.windows(2) {
            nest = nest.max(w[0].lower - w[1].lower).max(w[1].upper - w[0].upper);
        }
        done += 1;
    }
    (sign, nest)
}
