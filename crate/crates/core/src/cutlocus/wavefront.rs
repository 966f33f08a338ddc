//! The wavefront `Λ_L(t) = E(2t·p_t)`: exponential images of the symmetric
//! vectors of one level set, which land in the plane `z = 0`.

use crate::error::{Result, SolError};
use crate::flow::DEFAULT_DT;
use crate::specfun::{level_set_from_period, LoopLevelSet, MIN_PERIOD};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavefrontSample {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    /// `ψ = ab′ − ba′`.
    pub psi: f64,
    /// `ψ′ = 2ab(y² − x²)`.
    pub dpsi: f64,
    /// The point `p_t` of the level set.
    pub p: [f64; 3],
}

impl WavefrontSample {
    /// `(a′, b′) = (2x + za, 2y − zb)`.
    pub fn velocity(&self) -> (f64, f64) {
        let [x, y, z] = self.p;
        (2.0 * x + z * self.a, 2.0 * y - z * self.b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Wavefront {
    pub period: f64,
    pub level: LoopLevelSet,
    /// Samples at `t = ℓk/n`, `k = 1..=n`, `ℓ = L/2`.
    pub samples: Vec<WavefrontSample>,
}

impl Wavefront {
    pub fn half_period(&self) -> f64 {
        0.5 * self.period
    }

    /// `Λ_L(ℓ) = (a(ℓ), b(ℓ))`.
    pub fn endpoint(&self) -> (f64, f64) {
        let s = self.samples.last().expect("wavefront has samples");
        (s.a, s.b)
    }

    /// Vertices of the bounding triangle `Δ_L`.
    pub fn triangle(&self) -> [(f64, f64); 3] {
        let (a, b) = self.endpoint();
        [(0.0, 0.0), (a, 0.0), (a, b)]
    }

    /// Smallest distance from `(a, b)` to the three edge lines of `Δ_L`,
    /// negative when the point is outside.
    pub fn triangle_margin(&self, a: f64, b: f64) -> f64 {
        let (al, bl) = self.endpoint();
        let hyp = (bl * a - al * b) / al.hypot(bl);
        (al - a).min(b).min(hyp)
    }
}

/// The wavefront of the level set of period `L`, with `n` samples.
pub fn wavefront(period: f64, n: usize) -> Result<Wavefront> {
    wavefront_with_dt(period, n, DEFAULT_DT)
}

pub fn wavefront_with_dt(period: f64, n: usize, dt: f64) -> Result<Wavefront> {
    if !(period > MIN_PERIOD) {
        return Err(SolError::domain("wavefront: L", period, "L > π√2"));
    }
    if n < 2 {
        return Err(SolError::domain("wavefront: n_samples", n as f64, "n >= 2"));
    }
    if !(dt > 0.0) {
        return Err(SolError::domain("wavefront: dt", dt, "dt > 0"));
    }
    let level = level_set_from_period(period)?;
    let ell = 0.5 * period;
    let p0 = level.equator_point();

    // State (a, b, x, y, z, ψ).
    fn rhs(s: &[f64; 6]) -> [f64; 6] {
        let [a, b, x, y, z, _] = *s;
        [
            2.0 * x + z * a,
            2.0 * y - z * b,
            -x * z,
            y * z,
            x * x - y * y,
            2.0 * a * b * (y * y - x * x),
        ]
    }
    fn axpy(s: &[f64; 6], h: f64, k: &[f64; 6]) -> [f64; 6] {
        std::array::from_fn(|i| s[i] + h * k[i])
    }
    let interval = ell / n as f64;
    let m = (interval / dt).ceil().max(1.0) as usize;
    let h = interval / m as f64;
    let mut s = [0.0, 0.0, p0.x, p0.y, p0.z, 0.0];
    let mut samples = Vec::with_capacity(n);
    for k in 1..=n {
        for _ in 0..m {
            let k1 = rhs(&s);
            let k2 = rhs(&axpy(&s, 0.5 * h, &k1));
            let k3 = rhs(&axpy(&s, 0.5 * h, &k2));
            let k4 = rhs(&axpy(&s, h, &k3));
            s = std::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        }
        let [a, b, x, y, z, psi] = s;
        samples.push(WavefrontSample {
            t: if k == n { ell } else { k as f64 * interval },
            a,
            b,
            psi,
            dpsi: 2.0 * a * b * (y * y - x * x),
            p: [x, y, z],
        });
    }
    Ok(Wavefront {
        period,
        level,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{exp_map, symmetric_vector};

    #[test]
    fn endpoint_and_triangle() {
        let w = wavefront(5.0, 200).unwrap();
        let (a, b) = w.endpoint();
        assert!(a > b && b > 0.0);
        for s in &w.samples[..w.samples.len() - 1] {
            assert!(w.triangle_margin(s.a, s.b) > 0.0, "t={}", s.t);
            assert!(s.velocity().0 > 0.0);
        }
        assert!(w.samples.windows(2).all(|p| p[0].a < p[1].a));
    }

    #[test]
    fn samples_match_exponential_of_symmetric_vectors() {
        let w = wavefront(6.0, 8).unwrap();
        for s in [&w.samples[2], &w.samples[7]] {
            let v = symmetric_vector(&w.level, s.t, 1e-3).unwrap();
            let e = exp_map(v, 1e-3).unwrap();
            assert!((e.x - s.a).abs() < 1e-7 && (e.y - s.b).abs() < 1e-7 && e.z.abs() < 1e-7);
        }
    }

    #[test]
    fn psi_matches_definition() {
        let w = wavefront(8.0, 50).unwrap();
        for s in &w.samples {
            let (da, db) = s.velocity();
            assert!((s.psi - (s.a * db - s.b * da)).abs() < 1e-9);
        }
    }

    #[test]
    fn psi_cubic_onset() {
        let w = wavefront_with_dt(5.0, 10_000, 1e-4).unwrap();
        let p0 = w.level.equator_point();
        let s = &w.samples[0];
        let lead = 8.0 / 3.0 * p0.x * p0.y * (p0.y * p0.y - p0.x * p0.x) * s.t.powi(3);
        assert!(s.psi < 0.0);
        assert!((s.psi / lead - 1.0).abs() < 1e-2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(wavefront(4.0, 10).is_err());
        assert!(wavefront(5.0, 1).is_err());
    }
}
