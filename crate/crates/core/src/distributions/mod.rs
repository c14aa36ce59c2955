//! Scalar distribution functions, special functions and seeded samplers.

mod quantile;
mod rng;
mod sampling;
mod special;

pub use quantile::{
    f_cdf, f_quantile, std_normal_cdf, std_normal_pdf, std_normal_quantile, t_cdf, t_pdf,
    t_quantile,
};
pub use rng::RngStream;
pub use sampling::{
    sample_bvlognormal, sample_bvnormal, sample_bvt, sample_wishart2, CholeskyFactor2,
    CovMatrix2, Wishart2,
};
pub use special::{gauss_2f1, ln_gamma_signed, series_2f1};
