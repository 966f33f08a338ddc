//! Inverse of the exponential map on `N ∪ ∂N`, and geodesic distance.

use nalgebra::Vector3;

use super::polar::{boundary_membership, spine_holonomy, Membership};
use crate::error::{Result, SolError};
use crate::flow::{exp_map, exp_map_steps, exp_with_jacobian, DEFAULT_DT};
use crate::group::{checked_exp, inverse, multiply, Sector, SolPoint, Symmetric, TangentVector};
use crate::specfun::{level_set_from_holonomy, mu, A_MAX};

use std::f64::consts::{PI, SQRT_2};

/// Solver settings for [`log_map_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogOptions {
    /// Step of the final [`exp_map`] check.
    pub dt: f64,
    /// Accepted `|E(V) − p|`, relative to `max(1, |p|)`.
    pub tol: f64,
    /// Accepted excess `μ(V) − π` of a solution.
    pub tol_mu: f64,
    /// Newton iterations per attempt.
    pub max_iter: usize,
    /// Smallest continuation step before giving up.
    pub min_step: f64,
}

impl Default for LogOptions {
    fn default() -> Self {
        LogOptions {
            dt: DEFAULT_DT,
            tol: 1e-8,
            tol_mu: 1e-6,
            max_iter: 40,
            min_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogResult {
    /// A minimizing vector with `E(V) = p`.
    pub vector: TangentVector,
    /// The second solution, a perfect partner of `vector`, when `p ∈ ∂N − ∂₀N`.
    pub partner: Option<TangentVector>,
    /// `|E(V) − p|` of `vector`.
    pub residual: f64,
    pub membership: Membership,
}

impl LogResult {
    pub fn multiplicity(&self) -> usize {
        1 + self.partner.is_some() as usize
    }

    pub fn solutions(&self) -> Vec<TangentVector> {
        std::iter::once(self.vector).chain(self.partner).collect()
    }

    pub fn distance(&self) -> f64 {
        self.vector.norm()
    }
}

pub fn log_map(p: SolPoint) -> Result<LogResult> {
    log_map_with(p, &LogOptions::default())
}

pub fn log_map_with(p: SolPoint, opts: &LogOptions) -> Result<LogResult> {
    if !p.is_finite() {
        return Err(SolError::domain("log_map: |p|", p.coord_norm(), "finite"));
    }
    checked_exp(p.z)?;
    let sym = Sector::of(p.x, p.y).symmetry();
    let q = p.apply(sym);
    let mut r = solve_positive(q, opts)?;
    r.vector = r.vector.apply(sym);
    r.partner = r.partner.map(|v| v.apply(sym));
    Ok(r)
}

/// `‖log(p⁻¹ q)‖`.
pub fn distance(p: SolPoint, q: SolPoint) -> Result<f64> {
    Ok(log_map(multiply(inverse(p)?, q)?)?.distance())
}

fn exact(v: TangentVector, membership: Membership) -> LogResult {
    LogResult {
        vector: v,
        partner: None,
        residual: 0.0,
        membership,
    }
}

/// Inverse exponential in the hyperbolic plane `(X, η = e^ζ)`: the unit
/// direction `(u_par, u_perp)` at `(0, 1)` and length reaching `(x1, ζ1)`.
fn half_plane_log(x1: f64, zeta1: f64) -> (f64, f64, f64) {
    let eta = zeta1.exp();
    let d = (1.0 + (x1 * x1 + (eta - 1.0).powi(2)) / (2.0 * eta)).acosh();
    if x1 == 0.0 {
        return (0.0, zeta1.signum(), zeta1.abs());
    }
    let c = (x1 * x1 + eta * eta - 1.0) / (2.0 * x1);
    let n = c.hypot(1.0);
    (x1.signum() / n, x1.signum() * c / n, d)
}

fn solve_positive(q: SolPoint, opts: &LogOptions) -> Result<LogResult> {
    if q.x == 0.0 && q.y == 0.0 {
        return Ok(exact(TangentVector::new(0.0, 0.0, q.z), Membership::InN));
    }
    if q.y == 0.0 {
        let (ux, uz, d) = half_plane_log(q.x, q.z);
        return Ok(exact(TangentVector::new(d * ux, 0.0, d * uz), Membership::InN));
    }
    if q.x == 0.0 {
        let (uy, uz, d) = half_plane_log(q.y, -q.z);
        return Ok(exact(TangentVector::new(0.0, d * uy, -d * uz), Membership::InN));
    }
    let membership = boundary_membership(q);
    if q.z == 0.0 && q.x == q.y && q.x <= PI {
        return Ok(exact(TangentVector::new(q.x, q.y, 0.0), membership));
    }
    if membership != Membership::InN {
        return boundary_route(q, membership, opts);
    }

    let scale = q.coord_norm().max(1.0);
    let mut guesses = Vec::new();
    let near_plane = q.z.abs() < 1e-2 * scale;
    if near_plane {
        let gap = 0.5 * (q.x.ln() + q.y.ln()) - spine_holonomy((q.y / q.x).atan())?.ln();
        if gap > -1e-2 {
            let (a, b) = spine_candidates(q)?;
            if q.z >= 0.0 {
                guesses.extend([a, b]);
            } else {
                guesses.extend([b, a]);
            }
        }
    }
    guesses.push(TangentVector::new(q.x, q.y, q.z));
    for g in guesses {
        if let Some((v, _)) = newton(q, g, opts.max_iter) {
            if mu(v) <= PI + opts.tol_mu {
                if let Some(r) = verified(q, v, membership, opts) {
                    return Ok(r);
                }
            }
        }
    }
    let v = continuation(q, opts)?;
    verified(q, v, membership, opts).ok_or_else(|| SolError::NonConvergence {
        what: "log_map",
        residual: exp_residual(q, v, opts.dt),
    })
}

fn exp_residual(q: SolPoint, v: TangentVector, dt: f64) -> f64 {
    exp_map(v, dt).map_or(f64::INFINITY, |e| e.coord_dist(q))
}

fn verified(q: SolPoint, v: TangentVector, membership: Membership, opts: &LogOptions) -> Option<LogResult> {
    let residual = exp_residual(q, v, opts.dt);
    (residual <= opts.tol * q.coord_norm().max(1.0)).then_some(LogResult {
        vector: v,
        partner: None,
        residual,
        membership,
    })
}

/// The perfect partners `L·(α√(Q/P), α√(P/Q), ±√(1 − α²(Q/P + P/Q)))` whose
/// common image is `(P, Q, 0)`: the level set has holonomy `√(PQ)` and the
/// direction obeys the reciprocity `P u_x = Q u_y`.
fn spine_candidates(q: SolPoint) -> Result<(TangentVector, TangentVector)> {
    let h = (q.x * q.y).sqrt().max(PI);
    let (alpha, period) = if h <= PI * (1.0 + 1e-12) {
        (A_MAX, PI * SQRT_2)
    } else {
        let ls = level_set_from_holonomy(h)?;
        (ls.a, ls.period)
    };
    let ratio = (q.y / q.x).sqrt();
    let ux = alpha * ratio;
    let uy = alpha / ratio;
    let uz = (1.0 - ux * ux - uy * uy).max(0.0).sqrt();
    Ok((
        period * TangentVector::new(ux, uy, uz),
        period * TangentVector::new(ux, uy, -uz),
    ))
}

fn boundary_route(q: SolPoint, membership: Membership, opts: &LogOptions) -> Result<LogResult> {
    let (plus, minus) = spine_candidates(q)?;
    let scale = q.coord_norm().max(1.0);
    let settle = |v: TangentVector| -> Result<(TangentVector, f64)> {
        let r = exp_residual(q, v, opts.dt);
        if r <= opts.tol * scale {
            return Ok((v, r));
        }
        if let Some((w, _)) = newton(q, v, opts.max_iter) {
            let rw = exp_residual(q, w, opts.dt);
            if rw <= opts.tol * scale && mu(w) <= PI + opts.tol_mu {
                return Ok((w, rw));
            }
        }
        Err(SolError::NonConvergence {
            what: "log_map (cut locus)",
            residual: r,
        })
    };
    let (v, residual) = settle(plus)?;
    let partner = if membership == Membership::OnBoundary && plus.z != 0.0 {
        Some(settle(minus)?.0)
    } else {
        None
    };
    Ok(LogResult {
        vector: v,
        partner,
        residual,
        membership,
    })
}

fn steps_for(v: TangentVector) -> usize {
    ((v.norm() / 2e-3).ceil() as usize).max(16)
}

fn residual_vec(e: SolPoint, q: SolPoint) -> Vector3<f64> {
    Vector3::new(e.x - q.x, e.y - q.y, e.z - q.z)
}

/// Damped Newton iteration on `V ↦ E(V) − q` with the variational Jacobian.
fn newton(q: SolPoint, v0: TangentVector, max_iter: usize) -> Option<(TangentVector, f64)> {
    let scale = q.coord_norm().max(1.0);
    let mut v = v0;
    for _ in 0..max_iter {
        let n = steps_for(v);
        let (e, jac) = exp_with_jacobian(v, n).ok()?;
        let r = residual_vec(e, q);
        let rn = r.norm();
        if rn <= 1e-11 * scale {
            return Some((v, rn));
        }
        let delta = jac.lu().solve(&r)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1.0 / 256.0 {
            let trial = v - lambda * TangentVector::new(delta[0], delta[1], delta[2]);
            if let Ok(et) = exp_map_steps(trial, steps_for(trial)) {
                if residual_vec(et, q).norm() < rn {
                    v = trial;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return (rn <= 1e-9 * scale).then_some((v, rn));
        }
    }
    None
}

/// Follow the small-vector solution of `E(V) = s·q` from `s = 0` to `s = 1`.
fn continuation(q: SolPoint, opts: &LogOptions) -> Result<TangentVector> {
    let target = Vector3::new(q.x, q.y, q.z);
    let mut s = 0.0;
    let mut v = TangentVector::ZERO;
    let mut ds: f64 = 0.25;
    while s < 1.0 {
        if ds < opts.min_step {
            return Err(SolError::NonConvergence {
                what: "log_map continuation",
                residual: 1.0 - s,
            });
        }
        let s1 = (s + ds).min(1.0);
        let (_, jac) = exp_with_jacobian(v, steps_for(v))?;
        let tangent = jac.lu().solve(&target).ok_or(SolError::NonConvergence {
            what: "log_map continuation (singular Jacobian)",
            residual: 1.0 - s,
        })?;
        let pred = v + (s1 - s) * TangentVector::new(tangent[0], tangent[1], tangent[2]);
        let goal = SolPoint::new(s1 * q.x, s1 * q.y, s1 * q.z);
        match newton(goal, pred, 8) {
            Some((w, _)) if mu(w) <= PI + opts.tol_mu => {
                s = s1;
                v = w;
                ds = (ds * 2.0).min(0.5);
            }
            _ => ds *= 0.25,
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutlocus::{classify, partner, perfect_vector, ClassTag};
    use crate::specfun::level_set_from_a;

    #[test]
    fn vertical_and_planes() {
        let r = log_map(SolPoint::new(0.0, 0.0, 5.0)).unwrap();
        assert_eq!(r.vector, TangentVector::new(0.0, 0.0, 5.0));
        assert_eq!(log_map(SolPoint::IDENTITY).unwrap().vector, TangentVector::ZERO);
        for v in [
            TangentVector::new(1.2, 0.0, 0.7),
            TangentVector::new(-0.4, 0.0, -2.1),
            TangentVector::new(0.0, 1.5, 0.9),
            TangentVector::new(0.0, -2.3, -1.9),
        ] {
            let p = exp_map(v, 1e-3).unwrap();
            let w = log_map(p).unwrap().vector;
            assert!((w - v).norm() < 1e-10, "{v} -> {w}");
        }
    }

    #[test]
    fn round_trip_small() {
        let v = TangentVector::new(0.3, 0.7, 1.1);
        assert_eq!(classify(v).tag, ClassTag::Small);
        let r = log_map(exp_map(v, 1e-3).unwrap()).unwrap();
        assert!((r.vector - v).norm() < 1e-6);
        assert_eq!(r.multiplicity(), 1);
        for v in [
            TangentVector::new(-2.0, 1.1, 0.4),
            TangentVector::new(2.5, 2.4, -0.1),
            TangentVector::new(0.01, -3.0, 2.0),
            TangentVector::new(2.0, 2.0, 0.0),
        ] {
            assert_eq!(classify(v).tag, ClassTag::Small);
            let r = log_map(exp_map(v, 1e-3).unwrap()).unwrap();
            assert!((r.vector - v).norm() < 1e-6, "{v} -> {}", r.vector);
        }
    }

    #[test]
    fn perfect_targets_have_two_solutions() {
        let ls = level_set_from_a(0.4).unwrap();
        let v = perfect_vector(&ls, 0.3, 1e-3).unwrap();
        let p = exp_map(v, 1e-3).unwrap();
        let r = log_map(p).unwrap();
        assert_eq!(r.membership, Membership::OnBoundary);
        assert_eq!(r.multiplicity(), 2);
        let w = r.partner.unwrap();
        assert!((partner(r.vector) - w).norm() < 1e-7);
        assert!((r.vector.norm() - w.norm()).abs() < 1e-9);
        assert!((r.vector - v).norm() < 1e-6 || (w - v).norm() < 1e-6);
    }

    #[test]
    fn spine_target() {
        let r = log_map(SolPoint::new(PI, PI, 0.0)).unwrap();
        assert_eq!(r.multiplicity(), 1);
        assert!((r.distance() - PI * SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn distance_examples() {
        assert!((distance(SolPoint::IDENTITY, SolPoint::new(0.0, 0.0, 5.0)).unwrap() - 5.0).abs() < 1e-12);
        let d = distance(SolPoint::IDENTITY, SolPoint::new(PI, PI, 0.0)).unwrap();
        assert!((d - PI * SQRT_2).abs() < 1e-8);
        let p = SolPoint::new(0.3, -1.2, 0.8);
        assert_eq!(distance(p, p).unwrap(), 0.0);
        let q = SolPoint::new(-1.0, 0.5, -0.3);
        let (a, b) = (distance(p, q).unwrap(), distance(q, p).unwrap());
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }

    #[test]
    fn large_vectors_are_not_minimizing() {
        let v = TangentVector::new(4.0, 4.0, 0.0);
        let d = distance(SolPoint::IDENTITY, exp_map(v, 1e-3).unwrap()).unwrap();
        assert!(d < v.norm() - 1e-3);
    }
}
