//! Minimality classification and the cut locus.
//!
//! A tangent vector `V` is small, perfect or large according to whether
//! `μ(V)` is below, at, or above `π`; the geodesic `t ↦ E(tV)`, `t ∈ [0,1]`,
//! minimizes exactly when `V` is small or perfect.

mod log;
mod polar;
mod wavefront;

pub use log::{distance, log_map, log_map_with, LogOptions, LogResult};
pub use polar::{
    boundary_membership, cut_locus_curve, cut_locus_polar, polar_f, spine_holonomy, CutLocusCurve,
    Membership, PLANE_TOL, SPINE_TOL,
};
pub use wavefront::{wavefront, wavefront_with_dt, Wavefront, WavefrontSample};

use std::f64::consts::PI;

use crate::error::{Result, SolError};
use crate::flow::flow_exact_invariants;
use crate::group::TangentVector;
use crate::specfun::{mu, LoopLevelSet};

/// Default width of the perfect band `|μ − π| ≤ tol`.
pub const DEFAULT_TOL_PERFECT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassTag {
    Small,
    Perfect,
    Large,
}

impl ClassTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassTag::Small => "Small",
            ClassTag::Perfect => "Perfect",
            ClassTag::Large => "Large",
        }
    }
}

impl std::fmt::Display for ClassTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicClass {
    pub tag: ClassTag,
    pub mu: f64,
    /// `μ − π`.
    pub margin: f64,
}

impl GeodesicClass {
    /// Whether the segment `t ↦ E(tV)`, `t ∈ [0, 1]`, is a distance minimizer.
    pub fn is_minimizing(&self) -> bool {
        self.tag != ClassTag::Large
    }
}

pub fn classify(v: TangentVector) -> GeodesicClass {
    classify_with(v, DEFAULT_TOL_PERFECT)
}

pub fn classify_with(v: TangentVector, tol_perfect: f64) -> GeodesicClass {
    let m = mu(v);
    let margin = m - PI;
    let tag = if margin.abs() <= tol_perfect {
        ClassTag::Perfect
    } else if margin < 0.0 {
        ClassTag::Small
    } else {
        ClassTag::Large
    };
    GeodesicClass { tag, mu: m, margin }
}

/// `π/μ(u)` for a unit vector `u`, or infinity when `μ(u) = 0`.
pub fn cut_time(u: TangentVector) -> Result<f64> {
    let n = u.norm();
    if !((n - 1.0).abs() <= 1e-9) {
        return Err(SolError::domain("cut_time: |u|", n, "|u| = 1 within 1e-9"));
    }
    let m = mu(u);
    Ok(if m > 0.0 { PI / m } else { f64::INFINITY })
}

/// `(x, y, z) ↦ (x, y, −z)`.
pub fn partner(v: TangentVector) -> TangentVector {
    TangentVector::new(v.x, v.y, -v.z)
}

/// The perfect vector `L·g(phase·L)`, where `g` is the flowline of the level
/// set through its diagonal point `U_a` and `phase ∈ [0, 1)`.
pub fn perfect_vector(level: &LoopLevelSet, phase: f64, dt: f64) -> Result<TangentVector> {
    if !(0.0..1.0).contains(&phase) {
        return Err(SolError::domain("perfect_vector: phase", phase, "0 <= phase < 1"));
    }
    let start = level.diagonal_point();
    let u = if phase == 0.0 {
        start
    } else {
        flow_exact_invariants(start, phase * level.period, dt)?.end()
    };
    Ok(level.period * u)
}
