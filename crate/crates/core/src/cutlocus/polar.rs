//! The polar curves `∂₀N′` (radius `f`) and `∂₀N` (radius `g`) in the plane
//! `z = 0`, and the membership test against `∂N`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use crate::error::{Result, SolError};
use crate::group::{SolPoint, Sector};
use crate::specfun::{agm, holonomy_from_period};

/// `|z|` below which a point is treated as lying in the plane `z = 0`.
pub const PLANE_TOL: f64 = 1e-9;

/// Relative band around `g(θ)` reported as [`Membership::OnSpine`].
pub const SPINE_TOL: f64 = 1e-8;

const GRID_POINTS: usize = 2048;
const GRID_SPAN: f64 = 36.0;

/// Position of a point relative to the cut locus image `∂N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Membership {
    InN,
    OnBoundary,
    OnSpine,
}

impl Membership {
    pub fn as_str(self) -> &'static str {
        match self {
            Membership::InN => "InN",
            Membership::OnBoundary => "OnBoundary",
            Membership::OnSpine => "OnSpine",
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(SolError::domain("cut_locus_polar: θ", theta, "0 < θ < π/2"));
    }
    Ok(())
}

/// `f(θ) = π / AGM(sin θ, cos θ)`.
pub fn polar_f(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(PI / agm(theta.sin(), theta.cos())?)
}

/// `H(f(θ))`, the common value of `√(x y)` along the ray of angle `θ` on `∂₀N`.
pub fn spine_holonomy(theta: f64) -> Result<f64> {
    holonomy_from_period(polar_f(theta)?)
}

/// `(f(θ), g(θ))` with `g(θ) = √(2/sin 2θ)·H(f(θ))`.
pub fn cut_locus_polar(theta: f64) -> Result<(f64, f64)> {
    let f = polar_f(theta)?;
    let h = holonomy_from_period(f)?;
    Ok((f, (2.0 / (2.0 * theta).sin()).sqrt() * h))
}

/// Sampled polar graph of `∂₀N` within one sector.
#[derive(Debug, Clone, PartialEq)]
pub struct CutLocusCurve {
    pub sector: Sector,
    /// `(θ, r)` with `θ` the angle inside the positive sector.
    pub samples: Vec<(f64, f64)>,
}

impl CutLocusCurve {
    /// Cartesian points `(x, y, 0)` of the samples, placed in `self.sector`.
    pub fn points(&self) -> Vec<SolPoint> {
        self.samples
            .iter()
            .map(|&(t, r)| {
                SolPoint::new(
                    self.sector.sign_x as f64 * r * t.cos(),
                    self.sector.sign_y as f64 * r * t.sin(),
                    0.0,
                )
            })
            .collect()
    }
}

/// `∂₀N` in `sector` sampled at `n` angles evenly spaced in `(0, π/2)`.
pub fn cut_locus_curve(sector: Sector, n: usize) -> Result<CutLocusCurve> {
    let samples = (1..=n)
        .map(|k| {
            let theta = FRAC_PI_2 * k as f64 / (n + 1) as f64;
            cut_locus_polar(theta).map(|(_, g)| (theta, g))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CutLocusCurve { sector, samples })
}

/// Monotone cubic Hermite interpolant on a uniform grid: centred slopes with
/// the Fritsch–Carlson limiter.
struct Pchip {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    fn new(x0: f64, h: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        let delta: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let mut d = vec![0.0; n];
        for k in 1..n - 1 {
            let (a, b) = (delta[k - 1], delta[k]);
            if a * b > 0.0 {
                let limit = 3.0 * a.abs().min(b.abs());
                d[k] = (0.5 * (a + b)).clamp(-limit, limit);
            }
        }
        // The tabulated function is even about the first node.
        d[0] = 0.0;
        d[n - 1] = delta[n - 2];
        Pchip { x0, h, y, d }
    }

    fn x_max(&self) -> f64 {
        self.x0 + self.h * (self.y.len() - 1) as f64
    }

    fn eval(&self, x: f64) -> f64 {
        let s = ((x - self.x0) / self.h).clamp(0.0, (self.y.len() - 1) as f64);
        let k = (s.floor() as usize).min(self.y.len() - 2);
        let t = s - k as f64;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[k] + h10 * self.h * self.d[k] + h01 * self.y[k + 1] + h11 * self.h * self.d[k + 1]
    }
}

/// `ln H(f(θ))` tabulated against `s = |ln tan θ|`, which it depends on only.
fn spline() -> &'static Pchip {
    static SPLINE: OnceLock<Pchip> = OnceLock::new();
    SPLINE.get_or_init(|| {
        let h = GRID_SPAN / (GRID_POINTS - 1) as f64;
        let y = (0..GRID_POINTS)
            .map(|k| {
                let s = k as f64 * h;
                let theta = (-s).exp().atan();
                spine_holonomy(theta).expect("θ in range").ln()
            })
            .collect();
        Pchip::new(0.0, h, y)
    })
}

/// `ln H(f(θ))` for the angle with `tan θ = q/p`, `p, q > 0`.
fn ln_spine_holonomy(p: f64, q: f64, exact: bool) -> f64 {
    let s = (q.ln() - p.ln()).abs();
    if exact || s > spline().x_max() {
        let theta = (q / p).atan();
        return spine_holonomy(theta.clamp(f64::MIN_POSITIVE, FRAC_PI_2)).unwrap_or(f64::INFINITY).ln();
    }
    spline().eval(s)
}

/// Classify `p` against `∂N`: points of the plane `z = 0` are compared with the
/// polar graph `g(θ)` of their sector; everything else, including the
/// coordinate axes, lies in `N`.
pub fn boundary_membership(p: SolPoint) -> Membership {
    if p.z.abs() > PLANE_TOL || p.x == 0.0 || p.y == 0.0 || !p.is_finite() {
        return Membership::InN;
    }
    let (a, b) = (p.x.abs(), p.y.abs());
    // Compare ln √(ab) with ln H, which is ln(r/g(θ)) up to a constant.
    let lhs = 0.5 * (a.ln() + b.ln());
    let mut gap = lhs - ln_spine_holonomy(a, b, false);
    if gap.abs() < 1e-5 {
        gap = lhs - ln_spine_holonomy(a, b, true);
    }
    if gap.abs() <= SPINE_TOL {
        Membership::OnSpine
    } else if gap > 0.0 {
        Membership::OnBoundary
    } else {
        Membership::InN
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, SQRT_2};

    #[test]
    fn polar_at_diagonal() {
        let (f, g) = cut_locus_polar(FRAC_PI_4).unwrap();
        assert!((f - PI * SQRT_2).abs() < 1e-12);
        assert!((g - PI * SQRT_2).abs() < 1e-8);
        assert!(cut_locus_polar(0.0).is_err());
        assert!(cut_locus_polar(FRAC_PI_2).is_err());
    }

    #[test]
    fn polar_bounds_and_symmetry() {
        for k in 1..64 {
            let theta = FRAC_PI_2 * k as f64 / 64.0;
            let (f, g) = cut_locus_polar(theta).unwrap();
            let (f2, g2) = cut_locus_polar(FRAC_PI_2 - theta).unwrap();
            assert!((f - f2).abs() < 1e-12 * f && (g - g2).abs() < 1e-9 * g);
            assert!(g * (2.0 * theta).sin().sqrt() >= PI * SQRT_2 * (1.0 - 1e-12));
            assert!(f >= PI * SQRT_2 * (1.0 - 1e-14));
        }
    }

    #[test]
    fn spline_matches_direct() {
        for k in 0..200 {
            let s = 0.013 + k as f64 * 0.17;
            let (p, q) = (1.0, (-s).exp());
            let approx = ln_spine_holonomy(p, q, false);
            let exact = ln_spine_holonomy(p, q, true);
            assert!((approx - exact).abs() < 1e-7, "s={s}: {approx} vs {exact}");
        }
    }

    #[test]
    fn membership_examples() {
        assert_eq!(boundary_membership(SolPoint::new(1.0, 1.0, 0.0)), Membership::InN);
        assert_eq!(boundary_membership(SolPoint::new(PI, PI, 0.0)), Membership::OnSpine);
        assert_eq!(boundary_membership(SolPoint::new(10.0, 10.0, 0.0)), Membership::OnBoundary);
        assert_eq!(boundary_membership(SolPoint::new(-10.0, 10.0, 0.0)), Membership::OnBoundary);
        assert_eq!(boundary_membership(SolPoint::new(10.0, 10.0, 0.1)), Membership::InN);
        assert_eq!(boundary_membership(SolPoint::new(100.0, 0.0, 0.0)), Membership::InN);
        let theta: f64 = 0.3;
        let (_, g) = cut_locus_polar(theta).unwrap();
        let on = |r: f64| SolPoint::new(r * theta.cos(), -r * theta.sin(), 0.0);
        assert_eq!(boundary_membership(on(g)), Membership::OnSpine);
        assert_eq!(boundary_membership(on(g * (1.0 + 1e-6))), Membership::OnBoundary);
        assert_eq!(boundary_membership(on(g * (1.0 - 1e-6))), Membership::InN);
    }

    #[test]
    fn curve_is_polar_graph() {
        for sector in Sector::ALL {
            let c = cut_locus_curve(sector, 64).unwrap();
            assert!(c.samples.windows(2).all(|w| w[0].0 < w[1].0));
            for (p, &(t, r)) in c.points().iter().zip(&c.samples) {
                assert_eq!(Sector::of(p.x, p.y), sector);
                assert!(r >= PI * SQRT_2 / (2.0 * t).sin().sqrt() * (1.0 - 1e-12));
                assert_eq!(boundary_membership(*p), Membership::OnSpine);
            }
        }
    }
}
