//! Scalar special functions: the arithmetic-geometric mean, the minimality
//! functional `μ`, complete elliptic integrals, and the period and holonomy
//! of loop level sets.
//!
//! A loop level set is labelled by its diagonal parameter `a ∈ (0, √2/2)`: it
//! is the closed orbit through `U_a = (a, a, √(1−2a²))`. Its period, elliptic
//! parameter and holonomy invariant are related by
//!
//! ```text
//! L = π / AGM(a, ½√(1+2a²)) = √(8+8m)·K(m),   m = (1−2a²)/(1+2a²)
//! H = 4E(m)/√(1−m) − √(4−4m)·K(m)
//! ```

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2};

use crate::error::{Result, SolError};
use crate::group::TangentVector;
use crate::quadrature;

/// `π√2`, the shortest loop period and the injectivity radius of Sol.
pub const MIN_PERIOD: f64 = PI * SQRT_2;

/// Upper end of the diagonal parameter range, `√2/2`.
pub const A_MAX: f64 = FRAC_1_SQRT_2;

const AGM_REL_GAP: f64 = 1e-15;
const AGM_MAX_ITER: usize = 64;

/// A closed orbit of the structure field, with its invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopLevelSet {
    /// Diagonal parameter: the orbit passes through `(a, a, √(1−2a²))`.
    pub a: f64,
    /// Period `L`.
    pub period: f64,
    /// Elliptic parameter `m = (1−2a²)/(1+2a²)`.
    pub m: f64,
    /// Holonomy invariant `H`.
    pub holonomy: f64,
}

impl LoopLevelSet {
    /// Value of `F(x,y,z) = xy` on the orbit.
    pub fn product(&self) -> f64 {
        self.a * self.a
    }

    /// The point of the orbit in the plane `z = 0` with `x > y > 0`.
    pub fn equator_point(&self) -> TangentVector {
        let s = (1.0 + 2.0 * self.a * self.a).sqrt();
        let d = (1.0 - 2.0 * self.a * self.a).max(0.0).sqrt();
        TangentVector::new(0.5 * (s + d), 0.5 * (s - d), 0.0)
    }

    /// `U_a = (a, a, √(1−2a²))`.
    pub fn diagonal_point(&self) -> TangentVector {
        TangentVector::new(
            self.a,
            self.a,
            (1.0 - 2.0 * self.a * self.a).max(0.0).sqrt(),
        )
    }
}

fn agm_unchecked(mut a: f64, mut b: f64) -> f64 {
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    if a == 0.0 || a == b {
        return a;
    }
    let gap = AGM_REL_GAP * b.max(1.0);
    for _ in 0..AGM_MAX_ITER {
        if b - a <= gap {
            break;
        }
        let g = (a * b).sqrt();
        b = 0.5 * (a + b);
        a = g;
    }
    0.5 * (a + b)
}

/// Arithmetic-geometric mean of two non-negative numbers.
pub fn agm(alpha0: f64, beta0: f64) -> Result<f64> {
    for v in [alpha0, beta0] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(SolError::domain("agm argument", v, "finite and >= 0"));
        }
    }
    Ok(agm_unchecked(alpha0, beta0))
}

/// `μ(V) = AGM(√|xy|, ½√((|x|+|y|)² + z²))`.
pub fn mu(v: TangentVector) -> f64 {
    let g = (v.x * v.y).abs().sqrt();
    let s = v.x.abs() + v.y.abs();
    agm_unchecked(g, 0.5 * s.hypot(v.z))
}

/// `(K, E)` from the complementary modulus `k' = √(1−m)`, by AGM descent.
/// Passing `k'` directly keeps full precision as `m → 1`.
pub(crate) fn elliptic_ke_from_complement(kp: f64) -> (f64, f64) {
    debug_assert!(kp > 0.0 && kp <= 1.0);
    let m = (1.0 - kp) * (1.0 + kp);
    let mut a = 1.0_f64;
    let mut b = kp;
    let mut weight = 0.5;
    let mut sum = weight * m;
    for _ in 0..AGM_MAX_ITER {
        if a - b <= AGM_REL_GAP * a {
            break;
        }
        let c = 0.5 * (a - b);
        let g = (a * b).sqrt();
        a = 0.5 * (a + b);
        b = g;
        weight *= 2.0;
        sum += weight * c * c;
    }
    let k = FRAC_PI_2 / (0.5 * (a + b));
    (k, k * (1.0 - sum))
}

/// Complete elliptic integral of the first kind, `K(m) = (π/2)/AGM(√(1−m), 1)`.
pub fn elliptic_k(m: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&m) {
        return Err(SolError::domain("elliptic_k parameter m", m, "0 <= m < 1"));
    }
    Ok(FRAC_PI_2 / agm_unchecked((1.0 - m).sqrt(), 1.0))
}

/// Complete elliptic integral of the second kind `E(m)`.
pub fn elliptic_e(m: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&m) {
        return Err(SolError::domain("elliptic_e parameter m", m, "0 <= m <= 1"));
    }
    if m == 1.0 {
        return Ok(1.0);
    }
    Ok(elliptic_ke_from_complement((1.0 - m).sqrt()).1)
}

fn check_a(a: f64) -> Result<()> {
    if a > 0.0 && a < A_MAX {
        Ok(())
    } else {
        Err(SolError::domain("diagonal parameter a", a, "0 < a < √2/2"))
    }
}

fn period_unchecked(a: f64) -> f64 {
    PI / agm_unchecked(a, 0.5 * (1.0 + 2.0 * a * a).sqrt())
}

/// Period of the loop level set through `U_a`.
pub fn period_from_a(a: f64) -> Result<f64> {
    check_a(a)?;
    Ok(period_unchecked(a))
}

/// Elliptic parameter `m = (1−2a²)/(1+2a²)` of the level set through `U_a`.
pub fn elliptic_parameter(a: f64) -> f64 {
    (1.0 - 2.0 * a * a) / (1.0 + 2.0 * a * a)
}

/// Time `t_a = ½ cosh⁻¹(1/(2a²))` for the orbit to descend from `U_a` to `z = 0`
/// in the `(aeᵗ, ae⁻ᵗ, ·)` parametrisation.
pub fn quarter_time(a: f64) -> Result<f64> {
    check_a(a)?;
    Ok(0.5 * (1.0 / (2.0 * a * a)).acosh())
}

/// The raw period integrand `4/√(1 − 2a² cosh 2t)`.
pub fn period_integrand(a: f64, t: f64) -> f64 {
    4.0 / (1.0 - 2.0 * a * a * (2.0 * t).cosh()).sqrt()
}

/// Period of the level set through `U_a` by adaptive quadrature of
/// `∫₀^{t_a} 4 dt / √(1 − 2a² cosh 2t)`.
///
/// The inverse square-root singularity at `t_a` is removed by substituting
/// `t = t_a sin² s`; the radicand is rewritten as
/// `4a² sinh(t_a + t) sinh(t_a − t)` to avoid cancellation.
pub fn period_integral(a: f64) -> Result<f64> {
    let ta = quarter_time(a)?;
    let integrand = |s: f64| {
        let (sin, cos) = s.sin_cos();
        let t = ta * sin * sin;
        let q = ta * cos * cos;
        let sinhc = if q == 0.0 { 1.0 } else { q.sinh() / q };
        4.0 * ta.sqrt() * sin / (a * ((ta + t).sinh() * sinhc).sqrt())
    };
    let (v, _) = quadrature::integrate(integrand, 0.0, FRAC_PI_2, 1e-13, 400);
    Ok(v)
}

fn holonomy_unchecked(a: f64) -> f64 {
    let kp = 2.0 * a / (1.0 + 2.0 * a * a).sqrt();
    if kp >= 1.0 {
        return PI;
    }
    let (k, e) = elliptic_ke_from_complement(kp);
    4.0 * e / kp - 2.0 * kp * k
}

/// Holonomy invariant of the level set through `U_a`.
pub fn holonomy_from_a(a: f64) -> Result<f64> {
    check_a(a)?;
    Ok(holonomy_unchecked(a))
}

/// Level set with diagonal parameter `a`.
pub fn level_set_from_a(a: f64) -> Result<LoopLevelSet> {
    check_a(a)?;
    Ok(LoopLevelSet {
        a,
        period: period_unchecked(a),
        m: elliptic_parameter(a),
        holonomy: holonomy_unchecked(a),
    })
}

/// Bisect in `ln a` for a decreasing function of `a`, to full precision.
fn invert_decreasing(target: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut lo = -700.0_f64;
    let mut hi = A_MAX.ln();
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid.exp()) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// The unique level set of period `L > π√2`.
pub fn level_set_from_period(period: f64) -> Result<LoopLevelSet> {
    if !(period > MIN_PERIOD * (1.0 + 1e-12)) || !period.is_finite() {
        return Err(SolError::domain(
            "level_set_from_period: L",
            period,
            "L > π√2 (no loop level set otherwise)",
        ));
    }
    let a = invert_decreasing(period, period_unchecked);
    if a >= A_MAX || a <= 0.0 {
        return Err(SolError::domain(
            "level_set_from_period: L",
            period,
            "a period representable in double precision",
        ));
    }
    level_set_from_a(a)
}

/// `H_L`, the holonomy invariant of the level set of period `L ≥ π√2`.
/// `H(π√2) = π`.
pub fn holonomy_from_period(period: f64) -> Result<f64> {
    if !(period >= MIN_PERIOD * (1.0 - 1e-14)) || !period.is_finite() {
        return Err(SolError::domain(
            "holonomy_from_period: L",
            period,
            "L >= π√2",
        ));
    }
    if period <= MIN_PERIOD * (1.0 + 1e-12) {
        return Ok(PI);
    }
    Ok(level_set_from_period(period)?.holonomy)
}

/// Inverse of [`holonomy_from_period`]: the period `L` with `H_L = h`, `h ≥ π`.
pub fn period_from_holonomy(h: f64) -> Result<f64> {
    if !(h >= PI * (1.0 - 1e-14)) || !h.is_finite() {
        return Err(SolError::domain("period_from_holonomy: H", h, "H >= π"));
    }
    if h <= PI * (1.0 + 1e-13) {
        return Ok(MIN_PERIOD);
    }
    let a = invert_decreasing(h, holonomy_unchecked);
    Ok(period_unchecked(a))
}

/// Level set whose holonomy invariant is `h > π`.
pub fn level_set_from_holonomy(h: f64) -> Result<LoopLevelSet> {
    if !(h > PI * (1.0 + 1e-13)) || !h.is_finite() {
        return Err(SolError::domain("level_set_from_holonomy: H", h, "H > π"));
    }
    let a = invert_decreasing(h, holonomy_unchecked);
    level_set_from_a(a)
}
