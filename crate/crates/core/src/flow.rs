//! The geodesic flow of Sol in a left-invariant frame.
//!
//! A unit-speed geodesic `γ` is encoded by `γ*(t) = dLEFT_{γ(t)⁻¹} γ'(t)`, a
//! curve on the unit sphere of the Lie algebra that follows the structure field
//!
//! ```text
//! Σ(x, y, z) = (xz, −yz, −x² + y²)
//! ```
//!
//! and stays on a level set of `F = xy`. The position is recovered from the
//! coupled system `p' = dLEFT_p(u) = (e^{p.z}uₓ, e^{−p.z}u_y, u_z)`.
//!
//! All integrators here are fixed-step classical RK4. The frame vector is
//! projected back onto `{|u| = 1, xy = const}` after each step.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Result, SolError};
use crate::group::{checked_exp, left_translate, multiply, SolPoint, TangentVector};
use crate::specfun::LoopLevelSet;

/// Default integration step.
pub const DEFAULT_DT: f64 = 1e-3;

/// Default ceiling on the number of steps of a single integration.
pub const DEFAULT_MAX_STEPS: usize = 20_000_000;

/// Relative change allowed between successive step halvings in [`exp_map`].
pub const EXP_SELF_CONSISTENCY: f64 = 1e-9;

const UNIT_TOL: f64 = 1e-9;

/// A unit tangent vector evolving under the structure field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState {
    pub u: TangentVector,
}

/// Position and frame tangent of a unit-speed geodesic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicState {
    pub p: SolPoint,
    pub u: TangentVector,
}

impl GeodesicState {
    /// Metric speed of `dLEFT_p(u)`; 1 along a unit-speed geodesic.
    pub fn speed(&self) -> Result<f64> {
        let v = left_translate(self.p, self.u)?;
        crate::group::metric_norm(self.p, v)
    }
}

/// A sample of a flowline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample {
    pub t: f64,
    pub u: FlowState,
}

/// An integrated flowline `g: [0, T] → S'`, sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Flowline {
    pub samples: Vec<FlowSample>,
}

impl Flowline {
    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn start(&self) -> TangentVector {
        self.samples[0].u.u
    }

    pub fn end(&self) -> TangentVector {
        self.samples.last().expect("flowline has samples").u.u
    }

    /// The tangent vector `T·g(0)` whose geodesic this flowline encodes.
    pub fn initial_vector(&self) -> TangentVector {
        self.duration() * self.start()
    }

    /// Split `g = u|v` at sample `index`; both halves contain that sample and
    /// `v` is re-timed to start at 0.
    pub fn split(&self, index: usize) -> (Flowline, Flowline) {
        assert!(index < self.samples.len());
        let head = self.samples[..=index].to_vec();
        let t0 = self.samples[index].t;
        let tail = self.samples[index..]
            .iter()
            .map(|s| FlowSample { t: s.t - t0, u: s.u })
            .collect();
        (Flowline { samples: head }, Flowline { samples: tail })
    }
}

/// `Σ(x,y,z) = (xz, −yz, −x² + y²)`.
pub fn sigma(u: TangentVector) -> TangentVector {
    TangentVector::new(u.x * u.z, -u.y * u.z, -u.x * u.x + u.y * u.y)
}

fn sigma_jacobian(w: TangentVector) -> Matrix3<f64> {
    Matrix3::new(
        w.z, 0.0, w.x, //
        0.0, -w.z, -w.y, //
        -2.0 * w.x, 2.0 * w.y, 0.0,
    )
}

/// Project `u` onto `{|u| = 1, u.x·u.y = c}`. Near the equilibria, where the two
/// constraints are tangent, only the norm is restored.
pub(crate) fn project_invariants(u: TangentVector, c: f64) -> TangentVector {
    let mut v = u;
    for _ in 0..3 {
        let r1 = v.dot(v) - 1.0;
        let r2 = v.x * v.y - c;
        let g1 = TangentVector::new(2.0 * v.x, 2.0 * v.y, 2.0 * v.z);
        let g2 = TangentVector::new(v.y, v.x, 0.0);
        let a11 = g1.dot(g1);
        let a12 = g1.dot(g2);
        let a22 = g2.dot(g2);
        let det = a11 * a22 - a12 * a12;
        if det <= 1e-10 * a11 * a22.max(1e-300) || !det.is_finite() {
            break;
        }
        let l1 = (a22 * r1 - a12 * r2) / det;
        let l2 = (a11 * r2 - a12 * r1) / det;
        v = v - (l1 * g1 + l2 * g2);
        if r1.abs() < 1e-16 && r2.abs() < 1e-16 {
            break;
        }
    }
    v.normalized().unwrap_or(v)
}

fn rk4_sigma(u: TangentVector, h: f64) -> TangentVector {
    let k1 = sigma(u);
    let k2 = sigma(u + (0.5 * h) * k1);
    let k3 = sigma(u + (0.5 * h) * k2);
    let k4 = sigma(u + h * k3);
    u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

fn check_unit(u0: TangentVector, what: &'static str) -> Result<TangentVector> {
    let n = u0.norm();
    if !((n - 1.0).abs() <= UNIT_TOL) {
        return Err(SolError::domain(what, n, "|u| = 1 within 1e-9"));
    }
    Ok(u0 * (1.0 / n))
}

fn step_count(duration: f64, dt: f64, max_steps: usize) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(SolError::domain("integration step dt", dt, "dt > 0"));
    }
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(SolError::domain("integration time", duration, "finite and >= 0"));
    }
    let n = (duration / dt).ceil();
    if n > max_steps as f64 {
        return Err(SolError::StepLimit {
            needed: n as usize,
            limit: max_steps,
        });
    }
    Ok((n as usize).max(1))
}

/// Integrate `u' = ±Σ(u)` from `u0` for time `duration` with `n` uniform steps.
fn integrate_flow(u0: TangentVector, duration: f64, n: usize, backward: bool) -> Vec<FlowSample> {
    let h = duration / n as f64;
    let signed_h = if backward { -h } else { h };
    let c = u0.x * u0.y;
    let mut u = u0;
    let mut samples = Vec::with_capacity(n + 1);
    samples.push(FlowSample {
        t: 0.0,
        u: FlowState { u },
    });
    for k in 1..=n {
        u = project_invariants(rk4_sigma(u, signed_h), c);
        let t = if k == n { duration } else { k as f64 * h };
        samples.push(FlowSample {
            t,
            u: FlowState { u },
        });
    }
    samples
}

/// Integrate the structure field from the unit vector `u0` for time `duration`
/// with RK4 steps no longer than `dt`, preserving `|u| = 1` and `xy`.
pub fn flow_exact_invariants(u0: TangentVector, duration: f64, dt: f64) -> Result<Flowline> {
    flow_with_limit(u0, duration, dt, DEFAULT_MAX_STEPS)
}

/// As [`flow_exact_invariants`] with an explicit step ceiling.
pub fn flow_with_limit(
    u0: TangentVector,
    duration: f64,
    dt: f64,
    max_steps: usize,
) -> Result<Flowline> {
    let u0 = check_unit(u0, "flow: |u0|")?;
    let n = step_count(duration, dt, max_steps)?;
    Ok(Flowline {
        samples: integrate_flow(u0, duration, n, false),
    })
}

/// Flow backwards (along `−Σ`) from `u0` for time `duration`; returns the endpoint.
pub fn flow_backward(u0: TangentVector, duration: f64, dt: f64) -> Result<TangentVector> {
    let u0 = check_unit(u0, "flow: |u0|")?;
    let n = step_count(duration, dt, DEFAULT_MAX_STEPS)?;
    Ok(integrate_flow(u0, duration, n, true)
        .last()
        .expect("non-empty")
        .u
        .u)
}

/// First time `t > 0` at which the flowline through `u0` returns to `u0`.
///
/// The return is detected as a sign change of `Σ(u0)·(u − u0)` from negative to
/// positive, then located by Newton iteration on a single RK4 sub-step.
pub fn first_return_time(u0: TangentVector, dt: f64, max_time: f64) -> Result<f64> {
    let u0 = check_unit(u0, "first_return_time: |u0|")?;
    let normal = sigma(u0);
    let speed2 = normal.dot(normal);
    if speed2 < 1e-24 {
        return Err(SolError::domain(
            "first_return_time: |Σ(u0)|",
            speed2.sqrt(),
            "u0 is not an equilibrium",
        ));
    }
    step_count(max_time, dt, DEFAULT_MAX_STEPS)?;
    let c = u0.x * u0.y;
    let g = |u: TangentVector| normal.dot(u - u0);
    let mut u = u0;
    let mut t = 0.0;
    let mut left = false;
    while t < max_time {
        let next = project_invariants(rk4_sigma(u, dt), c);
        let (g0, g1) = (g(u), g(next));
        if g0 < 0.0 {
            left = true;
        }
        if left && g0 < 0.0 && g1 >= 0.0 {
            // Newton on h ↦ g(RK4(u, h)), h ∈ [0, dt].
            let mut h = dt * g0 / (g0 - g1);
            for _ in 0..20 {
                let uh = rk4_sigma(u, h);
                let gh = g(uh);
                let dg = normal.dot(sigma(uh));
                if dg == 0.0 {
                    break;
                }
                let delta = gh / dg;
                h = (h - delta).clamp(0.0, dt);
                if delta.abs() < 1e-15 {
                    break;
                }
            }
            return Ok(t + h);
        }
        u = next;
        t += dt;
    }
    Err(SolError::NonConvergence {
        what: "first_return_time",
        residual: max_time,
    })
}

fn lncosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Unit-speed geodesic of the upper half-plane `(X, η)`, `η = e^ζ`, with metric
/// `(dX² + dη²)/η²`, starting at `(0, 1)` in direction `(u_par, u_perp)` (unit),
/// followed for time `t`. Returns `(X, ζ)`.
fn half_plane_geodesic(u_par: f64, u_perp: f64, t: f64) -> (f64, f64) {
    if u_par == 0.0 {
        return (0.0, u_perp.signum() * t);
    }
    let sgn = u_par.signum();
    let tau0 = -sgn * u_perp.clamp(-1.0, 1.0).atanh();
    let tau = tau0 + sgn * t;
    // sinh(t)/cosh(tau), written to avoid overflow.
    let ratio = if t.abs() < 20.0 && tau.abs() < 20.0 {
        t.sinh() / tau.cosh()
    } else {
        let lnum = t.abs() + (-(-2.0 * t.abs()).exp()).ln_1p();
        (lnum - lncosh(tau) - std::f64::consts::LN_2).exp() * t.signum()
    };
    let zeta = lncosh(tau0) - lncosh(tau);
    (sgn * ratio, zeta)
}

/// Closed-form exponential for the degenerate directions: the vertical axis,
/// the diagonal lines in `z = 0`, and the two hyperbolic planes `x = 0`, `y = 0`.
pub fn exp_closed_form(v: TangentVector) -> Option<SolPoint> {
    let t = v.norm();
    if t == 0.0 {
        return Some(SolPoint::IDENTITY);
    }
    if v.x == 0.0 && v.y == 0.0 {
        return Some(SolPoint::new(0.0, 0.0, v.z));
    }
    if v.z == 0.0 && v.x.abs() == v.y.abs() {
        return Some(SolPoint::new(v.x, v.y, 0.0));
    }
    if v.y == 0.0 {
        let (x, zeta) = half_plane_geodesic(v.x / t, v.z / t, t);
        return Some(SolPoint::new(x, 0.0, zeta));
    }
    if v.x == 0.0 {
        // On x = 0 the metric is e^{2z}dy² + dz²; use η = e^{−z}.
        let (y, zeta) = half_plane_geodesic(v.y / t, -v.z / t, t);
        return Some(SolPoint::new(0.0, y, -zeta));
    }
    None
}

#[derive(Clone, Copy)]
struct Coupled {
    w: TangentVector,
    p: SolPoint,
}

fn coupled_rhs(s: &Coupled) -> Result<(TangentVector, [f64; 3])> {
    let dp = left_translate(s.p, s.w)?;
    Ok((sigma(s.w), dp))
}

fn coupled_add(s: &Coupled, h: f64, k: &(TangentVector, [f64; 3])) -> Coupled {
    Coupled {
        w: s.w + h * k.0,
        p: SolPoint::new(s.p.x + h * k.1[0], s.p.y + h * k.1[1], s.p.z + h * k.1[2]),
    }
}

fn coupled_rk4(s: &Coupled, h: f64) -> Result<Coupled> {
    let k1 = coupled_rhs(s)?;
    let k2 = coupled_rhs(&coupled_add(s, 0.5 * h, &k1))?;
    let k3 = coupled_rhs(&coupled_add(s, 0.5 * h, &k2))?;
    let k4 = coupled_rhs(&coupled_add(s, h, &k3))?;
    let w = s.w + (h / 6.0) * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
    let mut p = [s.p.x, s.p.y, s.p.z];
    for (i, pi) in p.iter_mut().enumerate() {
        *pi += h / 6.0 * (k1.1[i] + 2.0 * k2.1[i] + 2.0 * k3.1[i] + k4.1[i]);
    }
    let p = SolPoint::new(p[0], p[1], p[2]);
    checked_exp(p.z)?;
    Ok(Coupled { w, p })
}

/// Exponential map by integrating the coupled system with exactly `n` steps
/// (unit speed, time `|V|`), without the degenerate-direction shortcuts.
pub fn exp_map_steps(v: TangentVector, n: usize) -> Result<SolPoint> {
    let t = v.norm();
    if t == 0.0 {
        return Ok(SolPoint::IDENTITY);
    }
    let u0 = v * (1.0 / t);
    let c = u0.x * u0.y;
    let h = t / n.max(1) as f64;
    let mut s = Coupled {
        w: u0,
        p: SolPoint::IDENTITY,
    };
    for _ in 0..n.max(1) {
        s = coupled_rk4(&s, h)?;
        s.w = project_invariants(s.w, c);
    }
    Ok(s.p)
}

/// Options for [`exp_map_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpOptions {
    /// Initial step size.
    pub dt: f64,
    /// Relative change tolerated when the step is halved.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for ExpOptions {
    fn default() -> Self {
        ExpOptions {
            dt: DEFAULT_DT,
            tol: EXP_SELF_CONSISTENCY,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

/// The Riemannian exponential map `E(V)`, with step `dt` refined until halving
/// it changes the result by less than `1e-9` (relative to `max(1, |E(V)|)`).
pub fn exp_map(v: TangentVector, dt: f64) -> Result<SolPoint> {
    exp_map_with(
        v,
        &ExpOptions {
            dt,
            ..ExpOptions::default()
        },
    )
}

pub fn exp_map_with(v: TangentVector, opts: &ExpOptions) -> Result<SolPoint> {
    if !v.is_finite() {
        return Err(SolError::domain("exp_map: |V|", v.norm(), "finite"));
    }
    if let Some(p) = exp_closed_form(v) {
        return Ok(p);
    }
    let mut n = step_count(v.norm(), opts.dt, opts.max_steps)?;
    let mut coarse = exp_map_steps(v, n)?;
    loop {
        if 2 * n > opts.max_steps {
            return Err(SolError::StepLimit {
                needed: 2 * n,
                limit: opts.max_steps,
            });
        }
        let fine = exp_map_steps(v, 2 * n)?;
        let scale = fine.coord_norm().max(1.0);
        if fine.coord_dist(coarse) < opts.tol * scale {
            return Ok(fine);
        }
        coarse = fine;
        n *= 2;
    }
}

/// `E(V)` together with its derivative `dE_V`, from the variational equations
/// of the system `w' = Σ(w)`, `p' = dLEFT_p(w)` over `s ∈ [0, 1]` with `w(0) = V`.
pub fn exp_with_jacobian(v: TangentVector, n: usize) -> Result<(SolPoint, Matrix3<f64>)> {
    #[derive(Clone, Copy)]
    struct State {
        w: TangentVector,
        p: SolPoint,
        jw: Matrix3<f64>,
        jp: Matrix3<f64>,
    }
    fn rhs(s: &State) -> Result<(TangentVector, [f64; 3], Matrix3<f64>, Matrix3<f64>)> {
        let ez = checked_exp(s.p.z)?;
        let dp = [ez * s.w.x, s.w.y / ez, s.w.z];
        let djw = sigma_jacobian(s.w) * s.jw;
        let scale = Matrix3::from_diagonal(&Vector3::new(ez, 1.0 / ez, 1.0));
        let coupling = Vector3::new(ez * s.w.x, -s.w.y / ez, 0.0);
        let djp = scale * s.jw + coupling * s.jp.row(2);
        Ok((sigma(s.w), dp, djw, djp))
    }
    fn add(
        s: &State,
        h: f64,
        k: &(TangentVector, [f64; 3], Matrix3<f64>, Matrix3<f64>),
    ) -> State {
        State {
            w: s.w + h * k.0,
            p: SolPoint::new(s.p.x + h * k.1[0], s.p.y + h * k.1[1], s.p.z + h * k.1[2]),
            jw: s.jw + k.2 * h,
            jp: s.jp + k.3 * h,
        }
    }
    let n = n.max(1);
    let h = 1.0 / n as f64;
    let mut s = State {
        w: v,
        p: SolPoint::IDENTITY,
        jw: Matrix3::identity(),
        jp: Matrix3::zeros(),
    };
    for _ in 0..n {
        let k1 = rhs(&s)?;
        let k2 = rhs(&add(&s, 0.5 * h, &k1))?;
        let k3 = rhs(&add(&s, 0.5 * h, &k2))?;
        let k4 = rhs(&add(&s, h, &k3))?;
        let w = s.w + (h / 6.0) * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        let mut p = [s.p.x, s.p.y, s.p.z];
        for (i, pi) in p.iter_mut().enumerate() {
            *pi += h / 6.0 * (k1.1[i] + 2.0 * k2.1[i] + 2.0 * k3.1[i] + k4.1[i]);
        }
        let jw = s.jw + (k1.2 + k2.2 * 2.0 + k3.2 * 2.0 + k4.2) * (h / 6.0);
        let jp = s.jp + (k1.3 + k2.3 * 2.0 + k3.3 * 2.0 + k4.3) * (h / 6.0);
        s = State {
            w,
            p: SolPoint::new(p[0], p[1], p[2]),
            jw,
            jp,
        };
    }
    checked_exp(s.p.z)?;
    Ok((s.p, s.jp))
}

/// Unit-speed geodesic from the identity in direction `V/|V|`, sampled at
/// uniform times in `[0, |V|]` with step at most `dt`.
pub fn geodesic_trajectory(v: TangentVector, dt: f64) -> Result<Vec<(f64, GeodesicState)>> {
    let t = v.norm();
    let n = step_count(t, dt, DEFAULT_MAX_STEPS)?;
    let u0 = v.normalized().unwrap_or(TangentVector::new(0.0, 0.0, 1.0));
    let c = u0.x * u0.y;
    let h = t / n as f64;
    let mut s = Coupled {
        w: u0,
        p: SolPoint::IDENTITY,
    };
    let mut out = Vec::with_capacity(n + 1);
    out.push((0.0, GeodesicState { p: s.p, u: s.w }));
    if t == 0.0 {
        return Ok(out);
    }
    for k in 1..=n {
        s = coupled_rk4(&s, h)?;
        s.w = project_invariants(s.w, c);
        out.push((k as f64 * h, GeodesicState { p: s.p, u: s.w }));
    }
    Ok(out)
}

/// Concatenation product `(εg₀) * … * (εg_n)`, `ε = T/(n+1)`, over `n + 1`
/// uniformly spaced samples of the RK4 flowline. First-order accurate in `1/n`.
pub fn exp_map_product_oracle(v: TangentVector, n: usize) -> Result<SolPoint> {
    if n < 1 {
        return Err(SolError::domain("exp_map_product_oracle: n", n as f64, "n >= 1"));
    }
    let t = v.norm();
    if t == 0.0 {
        return Ok(SolPoint::IDENTITY);
    }
    let u0 = v * (1.0 / t);
    let samples = integrate_flow(u0, t, n, false);
    let eps = t / (n as f64 + 1.0);
    let mut p = SolPoint::IDENTITY;
    for s in &samples {
        let u = s.u.u;
        p = multiply(p, SolPoint::new(eps * u.x, eps * u.y, eps * u.z))?;
    }
    Ok(p)
}

/// `π_z(Λ_g) = ∫₀ᵀ z(t) dt` by composite Simpson quadrature of the samples.
pub fn z_displacement(g: &Flowline) -> f64 {
    let n = g.samples.len().saturating_sub(1);
    if n == 0 {
        return 0.0;
    }
    let z = |k: usize| g.samples[k].u.u.z;
    let h = g.duration() / n as f64;
    let simpson = |from: usize, to: usize| {
        let mut acc = z(from) + z(to);
        for k in from + 1..to {
            acc += if (k - from) % 2 == 1 { 4.0 } else { 2.0 } * z(k);
        }
        acc * h / 3.0
    };
    match n {
        1 => 0.5 * h * (z(0) + z(1)),
        _ if n % 2 == 0 => simpson(0, n),
        _ => {
            let tail = 3.0 * h / 8.0 * (z(n - 3) + 3.0 * z(n - 2) + 3.0 * z(n - 1) + z(n));
            if n == 3 {
                tail
            } else {
                simpson(0, n - 3) + tail
            }
        }
    }
}

/// The point `p_t` reached by flowing backwards for time `t` from the
/// equator point `(x, y, 0)`, `x > y`, of the level set.
pub fn symmetric_start(level: &LoopLevelSet, t: f64, dt: f64) -> Result<TangentVector> {
    flow_backward(level.equator_point(), t, dt)
}

/// The symmetric flowline of duration `2t` on `level`: it starts at `p_t`
/// and ends at the partner point of `p_t`.
pub fn symmetric_flowline(level: &LoopLevelSet, t: f64, dt: f64) -> Result<Flowline> {
    if !(t > 0.0 && t <= 0.5 * level.period * (1.0 + 1e-12)) {
        return Err(SolError::domain(
            "symmetric_flowline: t",
            t,
            "0 < t <= L/2",
        ));
    }
    let pt = symmetric_start(level, t, dt)?;
    flow_exact_invariants(pt, 2.0 * t, dt)
}

/// Tangent vector `2t·p_t` of the symmetric flowline of duration `2t`.
pub fn symmetric_vector(level: &LoopLevelSet, t: f64, dt: f64) -> Result<TangentVector> {
    Ok(2.0 * t * symmetric_start(level, t, dt)?)
}

/// Conserved momenta `(A, B, J)` of a geodesic: the pairings of its velocity
/// with the Killing fields `∂x`, `∂y` and `x∂x − y∂y + ∂z`.
pub fn momenta(state: &GeodesicState) -> (f64, f64, f64) {
    let ez = state.p.z.exp();
    let a = state.u.x / ez;
    let b = state.u.y * ez;
    (a, b, a * state.p.x - b * state.p.y + state.u.z)
}

/// Residual of the Grayson cylinder equation for the geodesic from the
/// identity in direction `±U_a`:
///
/// `(w − w₀)² + cosh 2z − 1/(2a²)`, `w = (x−y)/√2`, `w₀ = √(1−2a²)/(√2 a)`.
///
/// The axis offset `w₀` places the cylinder so that it contains the identity.
pub fn grayson_cylinder_residual(a: f64, state: &GeodesicState) -> f64 {
    let w = (state.p.x - state.p.y) / std::f64::consts::SQRT_2;
    let w0 = (1.0 - 2.0 * a * a).max(0.0).sqrt() / (std::f64::consts::SQRT_2 * a);
    (w - w0).powi(2) + (2.0 * state.p.z).cosh() - 1.0 / (2.0 * a * a)
}
