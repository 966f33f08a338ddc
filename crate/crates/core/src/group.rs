//! Group law, metric and discrete symmetries of Sol.
//!
//! Sol is `R³` with the product
//! `(x,y,z) * (a,b,c) = (eᶻa + x, e⁻ᶻb + y, c + z)` and the left-invariant
//! metric `e⁻²ᶻdx² + e²ᶻdy² + dz²`. Group elements ([`SolPoint`]) and Lie
//! algebra elements ([`TangentVector`]) are both coordinate triples but are kept
//! as separate types.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Result, SolError};

/// Largest `|z|` for which `e^{|z|}` is accepted.
pub const Z_LIMIT: f64 = 700.0;

/// Tolerance on `h.z` for [`conjugate_horizontal`].
pub const HORIZONTAL_TOL: f64 = 1e-12;

pub(crate) fn checked_exp(z: f64) -> Result<f64> {
    if !z.is_finite() || z.abs() > Z_LIMIT {
        return Err(SolError::Overflow { z, limit: Z_LIMIT });
    }
    Ok(z.exp())
}

/// An element of the group Sol.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// An element of the Lie algebra of Sol, identified with `R³` so that the
/// Euclidean inner product agrees with the metric at the identity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TangentVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SolPoint {
    pub const IDENTITY: SolPoint = SolPoint {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        SolPoint { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Euclidean distance between coordinate triples. Not the Sol distance.
    pub fn coord_dist(self, other: SolPoint) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2))
            .sqrt()
    }

    pub fn coord_norm(self) -> f64 {
        self.coord_dist(SolPoint::IDENTITY)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl TangentVector {
    pub const ZERO: TangentVector = TangentVector {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        TangentVector { x, y, z }
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(self, other: TangentVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// `self / |self|`, or `None` for the zero vector.
    pub fn normalized(self) -> Option<TangentVector> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        TangentVector::new(a[0], a[1], a[2])
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for TangentVector {
    type Output = TangentVector;
    fn add(self, o: TangentVector) -> TangentVector {
        TangentVector::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for TangentVector {
    type Output = TangentVector;
    fn sub(self, o: TangentVector) -> TangentVector {
        TangentVector::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for TangentVector {
    type Output = TangentVector;
    fn neg(self) -> TangentVector {
        TangentVector::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<TangentVector> for f64 {
    type Output = TangentVector;
    fn mul(self, v: TangentVector) -> TangentVector {
        TangentVector::new(self * v.x, self * v.y, self * v.z)
    }
}

impl Mul<f64> for TangentVector {
    type Output = TangentVector;
    fn mul(self, s: f64) -> TangentVector {
        s * self
    }
}

impl fmt::Display for SolPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl fmt::Display for TangentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.x, self.y, self.z)
    }
}

/// `p * q`.
pub fn multiply(p: SolPoint, q: SolPoint) -> Result<SolPoint> {
    let ez = checked_exp(p.z)?;
    Ok(SolPoint::new(ez * q.x + p.x, q.y / ez + p.y, q.z + p.z))
}

/// `p⁻¹ = (-e⁻ᶻx, -eᶻy, -z)`.
pub fn inverse(p: SolPoint) -> Result<SolPoint> {
    let ez = checked_exp(p.z)?;
    Ok(SolPoint::new(-p.x / ez, -p.y * ez, -p.z))
}

/// `g⁻¹ * h * g` for a horizontal element `h` (`h.z = 0`).
///
/// The result is `(e^{-g.z} h.x, e^{g.z} h.y, 0)`; the product of the first two
/// coordinates is preserved.
pub fn conjugate_horizontal(g: SolPoint, h: SolPoint) -> Result<SolPoint> {
    if h.z.abs() > HORIZONTAL_TOL {
        return Err(SolError::domain(
            "conjugate_horizontal: h.z",
            h.z,
            "|h.z| <= 1e-12",
        ));
    }
    let ez = checked_exp(g.z)?;
    Ok(SolPoint::new(h.x / ez, h.y * ez, 0.0))
}

/// Metric coefficients `(g_xx, g_yy, g_zz) = (e⁻²ᶻ, e²ᶻ, 1)` at `p`.
pub fn metric_coefficients(p: SolPoint) -> Result<(f64, f64, f64)> {
    let e2z = checked_exp(2.0 * p.z)?;
    Ok((1.0 / e2z, e2z, 1.0))
}

/// Push a Lie algebra vector to the tangent space at `p`:
/// `dLEFT_p(u) = (eᶻuₓ, e⁻ᶻu_y, u_z)`.
pub fn left_translate(p: SolPoint, u: TangentVector) -> Result<[f64; 3]> {
    let ez = checked_exp(p.z)?;
    Ok([ez * u.x, u.y / ez, u.z])
}

/// Metric length of a coordinate velocity `dp` at `p`.
pub fn metric_norm(p: SolPoint, dp: [f64; 3]) -> Result<f64> {
    let (gxx, gyy, gzz) = metric_coefficients(p)?;
    Ok((gxx * dp[0] * dp[0] + gyy * dp[1] * dp[1] + gzz * dp[2] * dp[2]).sqrt())
}

/// One of the four open sectors `{sign(x) = sx, sign(y) = sy}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sector {
    pub sign_x: i8,
    pub sign_y: i8,
}

impl Sector {
    pub const POSITIVE: Sector = Sector {
        sign_x: 1,
        sign_y: 1,
    };

    pub const ALL: [Sector; 4] = [
        Sector {
            sign_x: 1,
            sign_y: 1,
        },
        Sector {
            sign_x: -1,
            sign_y: 1,
        },
        Sector {
            sign_x: -1,
            sign_y: -1,
        },
        Sector {
            sign_x: 1,
            sign_y: -1,
        },
    ];

    /// Sector containing `(x, y)`; zero coordinates count as positive.
    pub fn of(x: f64, y: f64) -> Sector {
        Sector {
            sign_x: if x < 0.0 { -1 } else { 1 },
            sign_y: if y < 0.0 { -1 } else { 1 },
        }
    }

    /// The Klein-4 reflection carrying the positive sector onto this one.
    pub fn symmetry(self) -> Symmetry {
        match (self.sign_x < 0, self.sign_y < 0) {
            (false, false) => Symmetry::Identity,
            (true, false) => Symmetry::ReflectX,
            (false, true) => Symmetry::ReflectY,
            (true, true) => Symmetry::ReflectXY,
        }
    }
}

/// Isometries of Sol fixing the identity that are used to reduce computations
/// to the positive sector. Each one is also a group automorphism and a linear
/// isometry of the Lie algebra, and commutes with the exponential map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symmetry {
    Identity,
    /// `(x,y,z) -> (-x,y,z)`
    ReflectX,
    /// `(x,y,z) -> (x,-y,z)`
    ReflectY,
    /// `(x,y,z) -> (-x,-y,z)`
    ReflectXY,
    /// `(x,y,z) -> (y,x,-z)`
    Swap,
}

impl Symmetry {
    pub const ALL: [Symmetry; 5] = [
        Symmetry::Identity,
        Symmetry::ReflectX,
        Symmetry::ReflectY,
        Symmetry::ReflectXY,
        Symmetry::Swap,
    ];

    fn apply_raw(self, [x, y, z]: [f64; 3]) -> [f64; 3] {
        match self {
            Symmetry::Identity => [x, y, z],
            Symmetry::ReflectX => [-x, y, z],
            Symmetry::ReflectY => [x, -y, z],
            Symmetry::ReflectXY => [-x, -y, z],
            Symmetry::Swap => [y, x, -z],
        }
    }
}

/// Types on which the symmetries act.
pub trait Symmetric: Sized {
    fn apply(self, s: Symmetry) -> Self;
}

impl Symmetric for TangentVector {
    fn apply(self, s: Symmetry) -> Self {
        TangentVector::from_array(s.apply_raw(self.to_array()))
    }
}

impl Symmetric for SolPoint {
    fn apply(self, s: Symmetry) -> Self {
        let [x, y, z] = s.apply_raw(self.to_array());
        SolPoint::new(x, y, z)
    }
}

/// Apply a symmetry to a tangent vector or a group element.
pub fn apply_symmetry<T: Symmetric>(s: Symmetry, v: T) -> T {
    v.apply(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn close(p: SolPoint, q: SolPoint, tol: f64) -> bool {
        p.coord_dist(q) <= tol
    }

    #[test]
    fn identity_is_neutral() {
        let p = SolPoint::new(1.5, -2.0, 0.7);
        assert_eq!(multiply(SolPoint::IDENTITY, p).unwrap(), p);
        assert_eq!(multiply(p, SolPoint::IDENTITY).unwrap(), p);
    }

    #[test]
    fn multiply_examples() {
        let q = multiply(SolPoint::new(0.0, 0.0, 1.0), SolPoint::new(1.0, 0.0, 0.0)).unwrap();
        assert!(close(q, SolPoint::new(E, 0.0, 1.0), 1e-15));
        let q = multiply(SolPoint::new(1.0, 2.0, 3.0), SolPoint::new(1.0, 1.0, 0.0)).unwrap();
        let e3 = 3.0_f64.exp();
        assert!(close(q, SolPoint::new(1.0 + e3, 2.0 + 1.0 / e3, 3.0), 1e-13));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inverse(SolPoint::IDENTITY).unwrap(), SolPoint::IDENTITY);
        assert_eq!(
            inverse(SolPoint::new(1.0, 0.0, 0.0)).unwrap(),
            SolPoint::new(-1.0, 0.0, 0.0)
        );
        let p = inverse(SolPoint::new(1.0, 1.0, 1.0)).unwrap();
        assert!(close(p, SolPoint::new(-1.0 / E, -E, -1.0), 1e-15));
    }

    #[test]
    fn conjugation_examples() {
        let h = SolPoint::new(1.0, 1.0, 0.0);
        assert_eq!(conjugate_horizontal(SolPoint::IDENTITY, h).unwrap(), h);
        let c = conjugate_horizontal(SolPoint::new(0.0, 0.0, 1.0), h).unwrap();
        assert!(close(c, SolPoint::new(1.0 / E, E, 0.0), 1e-15));
        assert!((c.x * c.y - 1.0).abs() < 1e-15);
        assert!(conjugate_horizontal(SolPoint::IDENTITY, SolPoint::new(1.0, 1.0, 1e-6)).is_err());
    }

    #[test]
    fn conjugation_matches_group_law() {
        let g = SolPoint::new(0.3, -1.2, 0.8);
        let h = SolPoint::new(2.0, 0.5, 0.0);
        let direct = multiply(multiply(inverse(g).unwrap(), h).unwrap(), g).unwrap();
        let c = conjugate_horizontal(g, h).unwrap();
        assert!(close(direct, c, 1e-13));
    }

    #[test]
    fn overflow_is_reported() {
        let far = SolPoint::new(0.0, 0.0, 701.0);
        assert!(matches!(
            multiply(far, SolPoint::IDENTITY),
            Err(SolError::Overflow { .. })
        ));
        assert!(inverse(far).is_err());
        assert!(metric_coefficients(SolPoint::new(0.0, 0.0, 400.0)).is_err());
        assert!(multiply(SolPoint::new(0.0, 0.0, f64::NAN), SolPoint::IDENTITY).is_err());
    }

    #[test]
    fn metric_examples() {
        assert_eq!(
            metric_coefficients(SolPoint::IDENTITY).unwrap(),
            (1.0, 1.0, 1.0)
        );
        let (gx, gy, gz) = metric_coefficients(SolPoint::new(5.0, 5.0, 1.0)).unwrap();
        assert!((gx - (-2.0f64).exp()).abs() < 1e-15);
        assert!((gy - 2.0f64.exp()).abs() < 1e-14);
        assert_eq!(gz, 1.0);
        for z in [-3.0, -0.1, 0.0, 2.5] {
            let (gx, gy, _) = metric_coefficients(SolPoint::new(0.0, 0.0, z)).unwrap();
            assert!((gx * gy - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetry_examples() {
        let v = TangentVector::new(1.0, 2.0, 3.0);
        assert_eq!(v.apply(Symmetry::Swap), TangentVector::new(2.0, 1.0, -3.0));
        assert_eq!(
            apply_symmetry(Symmetry::ReflectX, v),
            TangentVector::new(-1.0, 2.0, 3.0)
        );
        let w = TangentVector::new(0.3, 0.7, -1.1);
        for s in Symmetry::ALL {
            assert_eq!(w.apply(s).apply(s), w);
        }
    }

    #[test]
    fn symmetries_are_automorphisms() {
        let p = SolPoint::new(0.4, -1.3, 0.9);
        let q = SolPoint::new(-2.0, 0.25, -0.6);
        for s in Symmetry::ALL {
            let lhs = multiply(p, q).unwrap().apply(s);
            let rhs = multiply(p.apply(s), q.apply(s)).unwrap();
            assert!(close(lhs, rhs, 1e-14), "{s:?}");
        }
    }

    #[test]
    fn sector_symmetry_maps_positive_sector() {
        for sec in Sector::ALL {
            let p = SolPoint::new(1.0, 2.0, 0.5).apply(sec.symmetry());
            assert_eq!(Sector::of(p.x, p.y), sec);
        }
    }

    #[test]
    fn left_translation_is_isometric() {
        let p = SolPoint::new(3.0, -1.0, 1.7);
        let u = TangentVector::new(0.6, 0.0, 0.8);
        let dp = left_translate(p, u).unwrap();
        assert!((metric_norm(p, dp).unwrap() - 1.0).abs() < 1e-14);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn coord(r: f64) -> impl Strategy<Value = f64> {
            -r..r
        }

        fn point(r: f64) -> impl Strategy<Value = SolPoint> {
            (coord(r), coord(r), coord(r)).prop_map(|(x, y, z)| SolPoint::new(x, y, z))
        }

        proptest! {
            #[test]
            fn inverse_cancels(p in point(50.0)) {
                let e = multiply(p, inverse(p).unwrap()).unwrap();
                prop_assert!(e.x.abs() <= 1e-12);
                prop_assert!(e.y.abs() <= 1e-12);
                prop_assert!(e.z.abs() <= 1e-12);
            }

            #[test]
            fn associative(p in point(10.0), q in point(10.0), r in point(10.0)) {
                let lhs = multiply(multiply(p, q).unwrap(), r).unwrap();
                let rhs = multiply(p, multiply(q, r).unwrap()).unwrap();
                let scale = 1.0 + lhs.coord_norm();
                prop_assert!(lhs.coord_dist(rhs) <= 1e-10 * scale);
            }

            #[test]
            fn conjugation_preserves_xy(g in point(5.0), a in -5.0..5.0f64, b in -5.0..5.0f64) {
                let c = conjugate_horizontal(g, SolPoint::new(a, b, 0.0)).unwrap();
                prop_assert!((c.x * c.y - a * b).abs() <= 1e-12 * (1.0 + (a * b).abs()));
            }
        }
    }
}
