//! Numerical kernels shared by the optimizer and the analysis: adaptive
//! quadrature, bracketed root finding, and Laplace inversion.

pub mod laplace;
pub mod quadrature;
pub mod roots;

pub use laplace::EulerInverter;
pub use quadrature::{exponential_quantile_cut, integrate, integrate_with_breaks, Integral, QuadratureOptions};
pub use roots::{bisect, brent, golden_max};
