//! Numerical building blocks: normal distribution functions, dense least
//! squares, seeded random streams and goodness-of-fit helpers.

pub mod ks;
pub mod linalg;
pub mod normal;
pub mod rng;

pub use linalg::{least_squares, DenseMatrix, PivotedQr};
pub use normal::{std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf};
pub use rng::{gaussian_draws, RandomStream};
