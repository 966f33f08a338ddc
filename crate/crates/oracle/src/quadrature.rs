use std::f64::consts::FRAC_PI_2;

use crate::OracleError;

/// Tanh-sinh quadrature of `f(t, b − t)` over `[a, b]`; the second argument
/// gives the integrand the distance to the right endpoint without cancellation.
pub fn tanh_sinh(f: impl Fn(f64, f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let node = |tau: f64| -> f64 {
        let u = FRAC_PI_2 * tau.sinh();
        let w = FRAC_PI_2 * tau.cosh() / u.cosh().powi(2);
        if !w.is_finite() || w == 0.0 {
            return 0.0;
        }
        let x = u.tanh();
        // 1 − x and 1 + x without cancellation.
        let right = 2.0 / ((2.0 * u).exp() + 1.0);
        let left = 2.0 / ((-2.0 * u).exp() + 1.0);
        let (t, to_b) = if x >= 0.0 {
            (b - half * right, half * right)
        } else {
            (a + half * left, b - a - half * left)
        };
        if !(to_b > 0.0) || t <= a {
            return 0.0;
        }
        let v = f(t, to_b);
        if v.is_finite() {
            w * v
        } else {
            0.0
        }
    };
    let tau_max = 4.0;
    let mut h = 0.5;
    let mut sum = node(0.0);
    let mut k = 1;
    while (k as f64) * h <= tau_max {
        sum += node(k as f64 * h) + node(-(k as f64) * h);
        k += 1;
    }
    let mut estimate = half * h * sum;
    for _ in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= tau_max {
            sum += node(k as f64 * h) + node(-(k as f64) * h);
            k += 2;
        }
        let next = half * h * sum;
        if (next - estimate).abs() <= tol * next.abs().max(1e-300) {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// `∫ 4 dt / √(1 − 2a² cosh 2t)` over `[0, t_a]`, `cosh 2t_a = 1/(2a²)`.
pub fn numeric_period(a: f64) -> Result<f64, OracleError> {
    if !(a > 0.0 && a < 0.5f64.sqrt()) {
        return Err(OracleError::Domain {
            what: "numeric_period: a",
            value: a,
            expected: "0 < a < √2/2",
        });
    }
    let ta = 0.5 * (1.0 / (2.0 * a * a)).acosh();
    // 1 − 2a² cosh 2t = 4a² sinh(t_a + t) sinh(t_a − t).
    let f = |t: f64, to_end: f64| 4.0 / (4.0 * a * a * (ta + t).sinh() * to_end.sinh()).sqrt();
    Ok(tanh_sinh(f, 0.0, ta, 1e-13))
}

fn check_m(m: f64, upper_closed: bool) -> Result<(), OracleError> {
    let ok = m >= 0.0 && (m < 1.0 || (upper_closed && m == 1.0));
    if ok {
        Ok(())
    } else {
        Err(OracleError::Domain {
            what: "elliptic parameter m",
            value: m,
            expected: if upper_closed { "0 <= m <= 1" } else { "0 <= m < 1" },
        })
    }
}

/// `K(m) = ∫₀^{π/2} dθ / √(1 − m sin²θ)`.
pub fn numeric_k(m: f64) -> Result<f64, OracleError> {
    check_m(m, false)?;
    Ok(tanh_sinh(|t, _| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2, 1e-14))
}

/// `E(m) = ∫₀^{π/2} √(1 − m sin²θ) dθ`.
pub fn numeric_e(m: f64) -> Result<f64, OracleError> {
    check_m(m, true)?;
    if m == 1.0 {
        return Ok(1.0);
    }
    Ok(tanh_sinh(|t, _| (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2, 1e-14))
}


#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn elementary_integrals() {
        assert_abs_diff_eq!(tanh_sinh(|t, _| t * t, 0.0, 3.0, 1e-14), 9.0, epsilon = 1e-12);
        // ∫₀¹ dt/√(1−t) = 2, singular at the right end.
        assert_abs_diff_eq!(tanh_sinh(|_, r| 1.0 / r.sqrt(), 0.0, 1.0, 1e-14), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn complete_integrals_at_zero() {
        assert_abs_diff_eq!(numeric_k(0.0).unwrap(), FRAC_PI_2, epsilon = 1e-14);
        assert_abs_diff_eq!(numeric_e(0.0).unwrap(), FRAC_PI_2, epsilon = 1e-14);
        assert_eq!(numeric_e(1.0).unwrap(), 1.0);
        assert!(numeric_k(1.0).is_err());
        assert!(numeric_e(-0.1).is_err());
    }

    #[test]
    fn known_values() {
        // K(1/2), E(1/2) and the period at a = 1/2, from mpmath.
        assert_abs_diff_eq!(numeric_k(0.5).unwrap(), 1.854_074_677_301_372, epsilon = 1e-12);
        assert_abs_diff_eq!(numeric_e(0.5).unwrap(), 1.350_643_881_047_675_5, epsilon = 1e-12);
        assert_abs_diff_eq!(numeric_period(0.5).unwrap(), 5.662_948_833_703_825, epsilon = 1e-9);
        assert!(numeric_period(0.8).is_err());
    }
}
