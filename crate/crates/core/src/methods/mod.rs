//! The seventeen interval estimators and a single dispatch entry point.

use std::fmt;
use std::str::FromStr;

use crate::distributions::CovMatrix2;
use crate::error::{Error, Result};
use crate::numeric::Endpoint;
use crate::summary::{DataSet, SuffStats, NEAR_SINGULAR};

pub mod analytic;
pub mod exact;
pub mod likelihood;
pub mod montecarlo;

pub use analytic::{
    fisher_z_ci, haddad_provost_ci, haddad_provost_interval, hotelling_ci, jeyaratnam_ci,
    muddapur_f_form, muddapur_t_ci, muddapur_t_interval, ruben_ci, withers_nadarajah_ci,
};
pub use exact::{exact_cdf, exact_ci, exact_density, ExactDensityParams};
pub use likelihood::{
    constrained_mle, loglik, lr_ci, modified_signed_lr, signed_lr, ParamVector,
};
pub use montecarlo::{
    kx_ci, kx_pivot_draw, new_gci, new_gci_from_scatter, pb_ci, pb_sample_r, BartlettDraw,
    McConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodId {
    Exact,
    FisherZ,
    Hotelling1,
    Hotelling2,
    Hotelling3,
    Hotelling4,
    Ruben,
    Muddapur1,
    Muddapur2,
    SignedLr,
    ModifiedSignedLr,
    KrishnamoorthyGci,
    WithersNadarajah1,
    WithersNadarajah2,
    HaddadProvost,
    NewGci,
    ParametricBootstrap,
}

impl MethodId {
    pub const ALL: [MethodId; 17] = [
        MethodId::Exact,
        MethodId::FisherZ,
        MethodId::Hotelling1,
        MethodId::Hotelling2,
        MethodId::Hotelling3,
        MethodId::Hotelling4,
        MethodId::Ruben,
        MethodId::Muddapur1,
        MethodId::Muddapur2,
        MethodId::SignedLr,
        MethodId::ModifiedSignedLr,
        MethodId::KrishnamoorthyGci,
        MethodId::WithersNadarajah1,
        MethodId::WithersNadarajah2,
        MethodId::HaddadProvost,
        MethodId::NewGci,
        MethodId::ParametricBootstrap,
    ];

    /// Stable identifier used in files and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            MethodId::Exact => "exact",
            MethodId::FisherZ => "fisher-z",
            MethodId::Hotelling1 => "hotelling-1",
            MethodId::Hotelling2 => "hotelling-2",
            MethodId::Hotelling3 => "hotelling-3",
            MethodId::Hotelling4 => "hotelling-4",
            MethodId::Ruben => "ruben",
            MethodId::Muddapur1 => "muddapur-1",
            MethodId::Muddapur2 => "muddapur-2",
            MethodId::SignedLr => "signed-lr",
            MethodId::ModifiedSignedLr => "modified-signed-lr",
            MethodId::KrishnamoorthyGci => "krishnamoorthy-gci",
            MethodId::WithersNadarajah1 => "wn-1",
            MethodId::WithersNadarajah2 => "wn-2",
            MethodId::HaddadProvost => "haddad-provost",
            MethodId::NewGci => "new-gci",
            MethodId::ParametricBootstrap => "pb",
        }
    }

    /// Smallest sample size the method is run at.
    pub fn min_n(self) -> usize {
        match self {
            MethodId::Exact | MethodId::FisherZ | MethodId::Ruben => 4,
            _ => 3,
        }
    }

    /// Methods that read more of the sample than `(r, n)`.
    pub fn needs_raw_data(self) -> bool {
        matches!(
            self,
            MethodId::Muddapur1
                | MethodId::SignedLr
                | MethodId::ModifiedSignedLr
                | MethodId::HaddadProvost
        )
    }

    pub fn is_monte_carlo(self) -> bool {
        matches!(
            self,
            MethodId::KrishnamoorthyGci | MethodId::NewGci | MethodId::ParametricBootstrap
        )
    }

    /// Methods with nested quadrature or optimization per interval.
    pub fn is_expensive(self) -> bool {
        matches!(
            self,
            MethodId::Exact | MethodId::SignedLr | MethodId::ModifiedSignedLr
        )
    }

    /// Methods whose interval depends on the data only through `(r, n)` and
    /// flips sign with `r`. Hotelling Z₂ and Z₄ are excluded: their second-order
    /// terms contain an even power of r.
    pub fn is_sign_equivariant_in_r(self) -> bool {
        matches!(
            self,
            MethodId::Exact
                | MethodId::FisherZ
                | MethodId::Hotelling1
                | MethodId::Hotelling3
                | MethodId::Ruben
                | MethodId::Muddapur2
                | MethodId::WithersNadarajah1
                | MethodId::WithersNadarajah2
        )
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        MethodId::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| Error::domain(format!("unknown method '{s}'")))
    }
}

/// A two-sided interval for ρ inside [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub method: MethodId,
    pub level: f64,
    pub clamped_lower: bool,
    pub clamped_upper: bool,
}

impl ConfidenceInterval {
    /// Orders the endpoints and clamps them into [-1, 1]; a clamp flag is set
    /// when the solver flagged the endpoint or its value left the range.
    pub(crate) fn from_endpoints(method: MethodId, alpha: f64, a: Endpoint, b: Endpoint) -> Self {
        let (lo, hi) = if a.value <= b.value { (a, b) } else { (b, a) };
        let fix = |e: Endpoint| {
            if e.value < -1.0 {
                Endpoint::clamped(-1.0)
            } else if e.value > 1.0 {
                Endpoint::clamped(1.0)
            } else {
                e
            }
        };
        let (lo, hi) = (fix(lo), fix(hi));
        Self {
            lower: lo.value,
            upper: hi.value,
            method,
            level: 1.0 - alpha,
            clamped_lower: lo.clamped,
            clamped_upper: hi.clamped,
        }
    }

    pub(crate) fn from_values(method: MethodId, alpha: f64, a: f64, b: f64) -> Self {
        Self::from_endpoints(method, alpha, Endpoint::solved(a), Endpoint::solved(b))
    }

    /// `[r, r]` with both flags set, returned when `|r|` is numerically 1.
    pub(crate) fn degenerate(method: MethodId, alpha: f64, r: f64) -> Self {
        let r = r.clamp(-1.0, 1.0);
        Self::from_endpoints(method, alpha, Endpoint::clamped(r), Endpoint::clamped(r))
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, rho: f64) -> bool {
        self.lower <= rho && rho <= self.upper
    }

    pub fn is_clamped(&self) -> bool {
        self.clamped_lower || self.clamped_upper
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha {alpha} outside (0, 1)")))
    }
}

pub(crate) fn check_n(method: MethodId, n: usize) -> Result<()> {
    if n < method.min_n() {
        Err(Error::NotApplicable { method, n })
    } else {
        Ok(())
    }
}

pub(crate) fn check_r(r: f64) -> Result<()> {
    if r.is_nan() || r.abs() > 1.0 {
        Err(Error::domain(format!("correlation {r} outside [-1, 1]")))
    } else {
        Ok(())
    }
}

pub(crate) fn is_singular(r: f64) -> bool {
    r.abs() >= NEAR_SINGULAR
}

/// What an interval is computed from: a full sample, or only `(r, n)`.
#[derive(Debug, Clone, Copy)]
pub enum Input<'a> {
    Raw { data: &'a DataSet, stats: &'a SuffStats },
    Summary { r: f64, n: usize },
}

impl Input<'_> {
    pub fn r(&self) -> f64 {
        match self {
            Input::Raw { stats, .. } => stats.r,
            Input::Summary { r, .. } => *r,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Input::Raw { stats, .. } => stats.n,
            Input::Summary { n, .. } => *n,
        }
    }
}

/// Compute one interval. Monte Carlo methods draw from a child stream of
/// `mc.stream` named after the method, so several methods can share one
/// `McConfig` without sharing draws.
pub fn compute(
    method: MethodId,
    input: &Input<'_>,
    alpha: f64,
    mc: &McConfig,
) -> Result<ConfidenceInterval> {
    check_alpha(alpha)?;
    let (r, n) = (input.r(), input.n());
    check_r(r)?;
    check_n(method, n)?;
    let raw = match input {
        Input::Raw { data, stats } => Some((*data, *stats)),
        Input::Summary { .. } => None,
    };
    if method.needs_raw_data() && raw.is_none() {
        return Err(Error::RequiresRawData(method));
    }
    let mc = McConfig {
        m: mc.m,
        stream: mc.stream.named(method.name()),
    };
    match method {
        MethodId::Exact => exact_ci(r, n, alpha),
        MethodId::FisherZ => fisher_z_ci(r, n, alpha),
        MethodId::Hotelling1 => hotelling_ci(r, n, alpha, 1),
        MethodId::Hotelling2 => hotelling_ci(r, n, alpha, 2),
        MethodId::Hotelling3 => hotelling_ci(r, n, alpha, 3),
        MethodId::Hotelling4 => hotelling_ci(r, n, alpha, 4),
        MethodId::Ruben => ruben_ci(r, n, alpha),
        MethodId::Muddapur2 => jeyaratnam_ci(r, n, alpha),
        MethodId::WithersNadarajah1 => withers_nadarajah_ci(r, n, alpha, 1),
        MethodId::WithersNadarajah2 => withers_nadarajah_ci(r, n, alpha, 2),
        MethodId::KrishnamoorthyGci => kx_ci(r, n, alpha, &mc),
        MethodId::ParametricBootstrap => pb_ci(r, n, alpha, &mc),
        MethodId::NewGci => match raw {
            Some((_, stats)) => new_gci(stats, alpha, &mc),
            // the pivot depends on the scatter matrix only through its
            // correlation, so unit variances stand in for the unknown ones
            None => new_gci_from_scatter(
                &CovMatrix2::from_sd_rho(1.0, 1.0, r).scale(n as f64),
                n,
                alpha,
                &mc,
            ),
        },
        MethodId::Muddapur1 => {
            let (_, stats) = raw.expect("checked above");
            muddapur_t_ci(stats, alpha)
        }
        MethodId::HaddadProvost => {
            let (_, stats) = raw.expect("checked above");
            haddad_provost_ci(stats, alpha)
        }
        MethodId::SignedLr => lr_ci(raw.expect("checked above").0, alpha, false),
        MethodId::ModifiedSignedLr => lr_ci(raw.expect("checked above").0, alpha, true),
    }
}
