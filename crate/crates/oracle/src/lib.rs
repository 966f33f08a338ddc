//! Brute-force cross-checks for `sol-geometry`.
//!
//! Everything here is deliberately simple and independent of the primary
//! implementations: tanh-sinh quadrature instead of Gauss–Kronrod and AGM,
//! Euler steps and products instead of RK4 on the frame equations, and the
//! coordinate Christoffel equations instead of the structure field.

mod geodesic;
mod quadrature;

pub use geodesic::{brute_distance, christoffel_exp, euler_product_exp, staircase_bound, BruteDistance};
pub use quadrature::{numeric_e, numeric_k, numeric_period, tanh_sinh};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("{what} = {value} is outside its domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("no candidate reached the target (best residual {best_residual:.3e})")]
    NoCandidate { best_residual: f64 },
}
