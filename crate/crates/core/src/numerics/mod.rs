//! Numerical kernels: normal distributions, rectangle probabilities,
//! quadrature, root finding and seeded sampling.

pub mod bvn;
pub mod normal;
pub mod quad;
pub mod rng;
pub mod root;

pub use bvn::{bvn_cdf, bvn_pdf, bvn_rect_prob, Correlation, Rect};
pub use normal::{std_normal_cdf, std_normal_interval, std_normal_pdf, std_normal_quantile, std_normal_sf};
pub use quad::{quad1d, quad1d_with, quad2d, quad2d_with, QuadOptions};
pub use rng::{correlated_pair, sample_correlated_normals, SeedStream};
pub use root::{find_root, try_find_root};
