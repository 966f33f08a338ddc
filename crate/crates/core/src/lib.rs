//! Numerical geometry of the solvable Lie group Sol.
//!
//! * [`group`]: group law, metric and the Klein-4 / swap symmetries.
//! * [`specfun`]: AGM, `μ`, elliptic integrals, loop periods and holonomy.
//! * [`flow`]: the structure-field flow and the exponential map.
//! * [`cutlocus`]: minimality classification, cut locus, logarithm and distance.
//! * [`sphere`]: triangulated metric spheres.
//! * [`export`]: OBJ / PLY / CSV mesh files.

pub mod cutlocus;
pub mod error;
pub mod export;
pub mod flow;
pub mod group;
mod quadrature;
pub mod specfun;
pub mod sphere;

pub use error::{Result, SolError};
pub use group::{SolPoint, TangentVector};
