//! Interval estimation for the correlation coefficient of a bivariate
//! normal distribution, and a Monte Carlo harness that measures coverage
//! and expected length of the intervals under several sampling models.

pub mod distributions;
pub mod error;
pub mod methods;
pub mod numeric;
pub mod sim;
pub mod summary;

pub use error::{Error, Result};
pub use methods::{compute, ConfidenceInterval, Input, McConfig, MethodId};
pub use summary::{suff_stats, transform, DataSet, SuffStats, TransformedCorrelation};
