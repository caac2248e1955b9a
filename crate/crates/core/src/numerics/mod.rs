//! Numerical building blocks shared by the rest of the crate.

mod quadrature;
mod rng;
mod special;
mod stats;

pub use quadrature::{gauss_hermite_expect, LegendreRule, QuadratureRule, DEFAULT_ORDER};
pub use rng::{derive_stream, RngStream};
pub use special::{
    quantile_derivative, std_normal_cdf, std_normal_pdf, std_normal_quantile, LOG2_E,
};
pub use stats::{clopper_pearson, dkw_epsilon, BinomialEstimate};
