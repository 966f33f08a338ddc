use sol_geometry::{SolPoint, TangentVector};

use crate::OracleError;

/// Product `(εg₀) * (εg₁) * … * (εg_n)`, `ε = T/(n+1)`, where `g` is the
/// explicit-Euler flowline of `u' = (xz, −yz, y² − x²)` from `V/|V|` with
/// step `T/n`, `T = |V|`. First-order accurate.
pub fn euler_product_exp(v: TangentVector, n: usize) -> SolPoint {
    let t = v.norm();
    if t == 0.0 || n == 0 {
        return SolPoint::new(0.0, 0.0, 0.0);
    }
    let (mut x, mut y, mut z) = (v.x / t, v.y / t, v.z / t);
    let h = t / n as f64;
    let eps = t / (n as f64 + 1.0);
    let (mut px, mut py, mut pz) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..=n {
        px += pz.exp() * eps * x;
        py += (-pz).exp() * eps * y;
        pz += eps * z;
        if k < n {
            let (dx, dy, dz) = (x * z, -y * z, y * y - x * x);
            x += h * dx;
            y += h * dy;
            z += h * dz;
        }
    }
    SolPoint::new(px, py, pz)
}

type State = [f64; 6];

fn christoffel(s: &State) -> State {
    let [_, _, z, vx, vy, vz] = *s;
    [
        vx,
        vy,
        vz,
        2.0 * vz * vx,
        -2.0 * vz * vy,
        -(-2.0 * z).exp() * vx * vx + (2.0 * z).exp() * vy * vy,
    ]
}

fn rk4(s: &State, h: f64) -> State {
    let add = |a: &State, k: &State, c: f64| -> State { std::array::from_fn(|i| a[i] + c * k[i]) };
    let k1 = christoffel(s);
    let k2 = christoffel(&add(s, &k1, 0.5 * h));
    let k3 = christoffel(&add(s, &k2, 0.5 * h));
    let k4 = christoffel(&add(s, &k3, h));
    std::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Geodesic from the identity with initial coordinate velocity `V`, followed
/// for unit time by RK4 on the coordinate geodesic equations.
pub fn christoffel_exp(v: TangentVector, steps: usize) -> SolPoint {
    let n = steps.max(1);
    let mut s = [0.0, 0.0, 0.0, v.x, v.y, v.z];
    for _ in 0..n {
        s = rk4(&s, 1.0 / n as f64);
    }
    SolPoint::new(s[0], s[1], s[2])
}

/// Length of the best "staircase" path to `p`: vertical moves cost `|Δz|`,
/// moving `x` at height `h` costs `|Δx| e^{−h}` and moving `y` costs `|Δy| e^h`.
pub fn staircase_bound(p: SolPoint) -> f64 {
    let heights: Vec<f64> = (-400..=400).map(|k| k as f64 * 0.02).collect();
    let mut best = f64::INFINITY;
    for &h1 in &heights {
        let cx = p.x.abs() * (-h1).exp();
        let cy1 = p.y.abs() * h1.exp();
        // Both moves at a single height.
        best = best.min(h1.abs() + cx + cy1 + (p.z - h1).abs());
        if cx >= best {
            continue;
        }
        for &h2 in &heights {
            let cy = p.y.abs() * h2.exp();
            let xy = h1.abs() + cx + (h2 - h1).abs() + cy + (p.z - h2).abs();
            let cx2 = p.x.abs() * (-h2).exp();
            let yx = h1.abs() + cy1 + (h2 - h1).abs() + cx2 + (p.z - h2).abs();
            best = best.min(xy).min(yx);
        }
    }
    best
}

/// Result of [`brute_distance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteDistance {
    pub length: f64,
    pub vector: TangentVector,
    pub residual: f64,
    /// The staircase upper bound used to cap the search.
    pub bound: f64,
}

fn fibonacci_directions(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

fn dist(p: SolPoint, q: SolPoint) -> f64 {
    ((p.x - q.x).powi(2) + (p.y - q.y).powi(2) + (p.z - q.z).powi(2)).sqrt()
}

const REFINE_STEPS_PER_UNIT: f64 = 400.0;

fn shoot(v: [f64; 3]) -> SolPoint {
    let tv = TangentVector::new(v[0], v[1], v[2]);
    christoffel_exp(tv, ((tv.norm() * REFINE_STEPS_PER_UNIT).ceil() as usize).max(50))
}

/// Gauss–Newton on `V ↦ exp(V) − p` with a central-difference Jacobian.
fn refine(p: SolPoint, v0: [f64; 3]) -> Option<([f64; 3], f64)> {
    let mut v = v0;
    let mut r = dist(shoot(v), p);
    for _ in 0..40 {
        if r < 1e-10 {
            break;
        }
        let e = shoot(v);
        let f = [e.x - p.x, e.y - p.y, e.z - p.z];
        let h = 1e-6 * (1.0 + (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt());
        let mut j = [[0.0; 3]; 3];
        for (k, col) in (0..3).map(|k| {
            let mut a = v;
            let mut b = v;
            a[k] += h;
            b[k] -= h;
            let (ea, eb) = (shoot(a), shoot(b));
            (k, [(ea.x - eb.x) / (2.0 * h), (ea.y - eb.y) / (2.0 * h), (ea.z - eb.z) / (2.0 * h)])
        }) {
            for i in 0..3 {
                j[i][k] = col[i];
            }
        }
        let delta = solve3(j, f)?;
        let mut lambda = 1.0;
        let mut moved = false;
        while lambda > 1e-3 {
            let trial = std::array::from_fn(|i| v[i] - lambda * delta[i]);
            let rt = dist(shoot(trial), p);
            if rt < r {
                v = trial;
                r = rt;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Some((v, r))
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    Some(std::array::from_fn(|k| {
        let mut m = a;
        for i in 0..3 {
            m[i][k] = b[i];
        }
        det(m) / d
    }))
}

/// Shortest geodesic found by scanning `grid_dirs` Fibonacci directions, each
/// sampled at `grid_len` lengths up to the staircase bound, then refining the
/// most promising well-separated candidates. The returned length is that of
/// an actual geodesic reaching `p`, hence an upper bound for the distance.
pub fn brute_distance(p: SolPoint, grid_dirs: usize, grid_len: usize) -> Result<BruteDistance, OracleError> {
    if !(p.x.abs() <= 10.0 && p.y.abs() <= 10.0 && p.z.abs() <= 10.0) {
        return Err(OracleError::Domain {
            what: "brute_distance: max |p_i|",
            value: p.x.abs().max(p.y.abs()).max(p.z.abs()),
            expected: "p within [-10, 10]^3",
        });
    }
    let bound = staircase_bound(p);
    if dist(p, SolPoint::new(0.0, 0.0, 0.0)) == 0.0 {
        return Ok(BruteDistance {
            length: 0.0,
            vector: TangentVector::new(0.0, 0.0, 0.0),
            residual: 0.0,
            bound,
        });
    }
    let dirs = fibonacci_directions(grid_dirs.max(8));
    let h = bound / grid_len.max(2) as f64;
    // Per direction: best (residual, t) along the unit-speed geodesic.
    let mut candidates: Vec<(f64, usize, f64)> = dirs
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let mut s = [0.0, 0.0, 0.0, d[0], d[1], d[2]];
            let mut best = (f64::INFINITY, 0.0);
            for step in 1..=grid_len.max(2) {
                s = rk4(&s, h);
                let r = dist(SolPoint::new(s[0], s[1], s[2]), p);
                if r < best.0 {
                    best = (r, step as f64 * h);
                }
            }
            (best.0, k, best.1)
        })
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));

    let spacing = (4.0 * std::f64::consts::PI / dirs.len() as f64).sqrt();
    let mut chosen: Vec<(usize, f64)> = Vec::new();
    for &(_, k, t) in &candidates {
        if chosen.len() >= 12 {
            break;
        }
        let d = dirs[k];
        let separated = chosen.iter().all(|&(c, _)| {
            let e = dirs[c];
            let dot = d[0] * e[0] + d[1] * e[1] + d[2] * e[2];
            dot.clamp(-1.0, 1.0).acos() > 3.0 * spacing
        });
        if separated {
            chosen.push((k, t));
        }
    }
    let mut best: Option<BruteDistance> = None;
    let mut best_residual = f64::INFINITY;
    for (k, t) in chosen {
        let d = dirs[k];
        if let Some((v, r)) = refine(p, [t * d[0], t * d[1], t * d[2]]) {
            best_residual = best_residual.min(r);
            let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if r <= 1e-4 && best.map_or(true, |b| len < b.length) {
                best = Some(BruteDistance {
                    length: len,
                    vector: TangentVector::new(v[0], v[1], v[2]),
                    residual: r,
                    bound,
                });
            }
        }
    }
    best.ok_or(OracleError::NoCandidate { best_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn christoffel_closed_forms() {
        let p = christoffel_exp(TangentVector::new(0.0, 0.0, 2.0), 100);
        assert_abs_diff_eq!(p.z, 2.0, epsilon = 1e-14);
        let p = christoffel_exp(TangentVector::new(1.0, 0.0, 0.0), 2000);
        assert_abs_diff_eq!(p.x, 1f64.tanh(), epsilon = 1e-11);
        assert_abs_diff_eq!(p.z, -(1f64.cosh().ln()), epsilon = 1e-11);
        let p = christoffel_exp(TangentVector::new(2.0, 2.0, 0.0), 100);
        assert_abs_diff_eq!(p.x, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn euler_product_vertical() {
        let p = euler_product_exp(TangentVector::new(0.0, 0.0, 3.0), 10);
        assert_abs_diff_eq!(p.z, 3.0, epsilon = 1e-14);
        assert_eq!((p.x, p.y), (0.0, 0.0));
    }

    #[test]
    fn euler_product_converges_to_christoffel() {
        let v = TangentVector::new(0.7, -0.4, 0.9);
        let e = christoffel_exp(v, 5000);
        let g1 = dist(euler_product_exp(v, 20_000), e);
        let g2 = dist(euler_product_exp(v, 40_000), e);
        assert!(g1 < 1e-3 && g2 < g1 / 1.5);
    }

    #[test]
    fn staircase_examples() {
        assert_abs_diff_eq!(staircase_bound(SolPoint::new(0.0, 0.0, 3.0)), 3.0, epsilon = 1e-12);
        assert!(staircase_bound(SolPoint::new(1.0, 0.0, 0.0)) <= 1.0);
        assert!(staircase_bound(SolPoint::new(8.0, 8.0, 0.0)) < 16.0);
    }

    #[test]
    fn vertical_target() {
        let b = brute_distance(SolPoint::new(0.0, 0.0, 3.0), 400, 300).unwrap();
        assert_abs_diff_eq!(b.length, 3.0, epsilon = 1e-3);
        assert!(brute_distance(SolPoint::new(11.0, 0.0, 0.0), 10, 10).is_err());
        assert_eq!(brute_distance(SolPoint::new(0.0, 0.0, 0.0), 10, 10).unwrap().length, 0.0);
    }

    #[test]
    fn hyperbolic_target() {
        // E(1,0,0) = (tanh 1, 0, −ln cosh 1) at distance 1.
        let p = SolPoint::new(1f64.tanh(), 0.0, -(1f64.cosh().ln()));
        let b = brute_distance(p, 600, 300).unwrap();
        assert_abs_diff_eq!(b.length, 1.0, epsilon = 1e-6);
    }
}
