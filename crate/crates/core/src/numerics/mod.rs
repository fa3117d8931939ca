//! Quadrature, special functions and reproducible sampling primitives.

pub mod quadrature;
pub mod random;
pub mod special;

pub use quadrature::{
    integrate_finite, integrate_semi_infinite, integrate_semi_infinite_scaled, QuadratureResult,
    Tolerance,
};
pub use random::{sample_poisson_disk, Point, RandomStream};
pub use special::{log_gamma, q_function, upper_incomplete_gamma};
