//! Special functions, Gauss–Hermite quadrature and bracketed root finding.
//!
//! All functions are pure and safe to call concurrently.

mod quadrature;
mod roots;
mod special;

pub use quadrature::{gauss_hermite, QuadratureRule};
pub use roots::{find_root, RootBracket, DEFAULT_ROOT_TOL};
pub use special::{
    f_cdf, f_quantile, f_quantile_upper, f_sf, inv_reg_inc_beta, ln_gamma, normal_cdf, normal_pdf,
    normal_quantile, normal_sf, reg_inc_beta,
};
