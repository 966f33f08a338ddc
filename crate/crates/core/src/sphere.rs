//! Triangulated metric spheres `S_L = E(S′_L ∩ (N′ ∪ ∂N′))`.
//!
//! The sphere of directions is covered by four lunes, one per sector, each
//! parametrized in polar coordinates `(ρ, ω)` about its elliptic direction
//! `(±1, ±1, 0)/√2`. Rings are level sets of `xy`, so for `L > π√2` the hole
//! `μ > π/L` around each elliptic direction is cut out exactly along a ring.
//! That ring consists of perfect vectors; partners `ω ↔ −ω` are glued, which
//! folds each hole boundary 2-to-1 onto a singular arc in the plane `z = 0`.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use rayon::prelude::*;

use crate::error::{Result, SolError};
use crate::flow::{exp_closed_form, exp_map_steps};
use crate::group::{Sector, SolPoint, Symmetric, Symmetry, TangentVector};
use crate::specfun::{holonomy_from_period, level_set_from_period, MIN_PERIOD};

/// Integration step used for the mesh pushforward.
pub const MESH_DT: f64 = 2e-3;

const CUSP_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexTag {
    Smooth,
    Singular,
    Cusp,
}

impl VertexTag {
    pub fn as_str(self) -> &'static str {
        match self {
            VertexTag::Smooth => "smooth",
            VertexTag::Singular => "singular",
            VertexTag::Cusp => "cusp",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            VertexTag::Smooth => 0,
            VertexTag::Singular => 1,
            VertexTag::Cusp => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<VertexTag> {
        match code {
            0 => Some(VertexTag::Smooth),
            1 => Some(VertexTag::Singular),
            2 => Some(VertexTag::Cusp),
            _ => None,
        }
    }
}

impl std::str::FromStr for VertexTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "smooth" => Ok(VertexTag::Smooth),
            "singular" => Ok(VertexTag::Singular),
            "cusp" => Ok(VertexTag::Cusp),
            _ => Err(format!("unknown vertex tag '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshVertex {
    pub point: SolPoint,
    pub tag: VertexTag,
    /// A tangent vector of length `L` whose image is `point`.
    pub source: TangentVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereMesh {
    pub radius: f64,
    pub vertices: Vec<MeshVertex>,
    pub faces: Vec<[usize; 3]>,
    /// Ordered vertex chains, one per folded hole.
    pub singular_arcs: Vec<Vec<usize>>,
}

/// Edge and vertex statistics of a triangle complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Topology {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    /// Every edge borders exactly two faces.
    pub closed: bool,
    /// Every directed edge occurs at most once.
    pub oriented: bool,
}

impl Topology {
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.faces as i64
    }
}

/// Topology of the complex `faces` on `n_vertices` vertices.
pub fn topology(n_vertices: usize, faces: &[[usize; 3]]) -> Topology {
    let mut undirected: HashMap<(usize, usize), usize> = HashMap::new();
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for f in faces {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            *undirected.entry((a.min(b), a.max(b))).or_default() += 1;
            *directed.entry((a, b)).or_default() += 1;
        }
    }
    Topology {
        vertices: n_vertices,
        edges: undirected.len(),
        faces: faces.len(),
        closed: undirected.values().all(|&c| c == 2),
        oriented: directed.values().all(|&c| c == 1),
    }
}

impl SphereMesh {
    pub fn topology(&self) -> Topology {
        topology(self.vertices.len(), &self.faces)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.topology().euler_characteristic()
    }

    pub fn count(&self, tag: VertexTag) -> usize {
        self.vertices.iter().filter(|v| v.tag == tag).count()
    }

    /// Check the closed-surface, degeneracy and singular-vertex invariants.
    pub fn validate(&self) -> Result<()> {
        let t = self.topology();
        if !t.closed || !t.oriented {
            return Err(SolError::Mesh(format!(
                "face complex is not a closed oriented surface (closed={}, oriented={})",
                t.closed, t.oriented
            )));
        }
        if t.euler_characteristic() != 2 {
            return Err(SolError::Mesh(format!(
                "Euler characteristic {} != 2",
                t.euler_characteristic()
            )));
        }
        if self.faces.iter().any(|f| f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
            return Err(SolError::Mesh("degenerate face".into()));
        }
        if self.radius < MIN_PERIOD {
            if self.count(VertexTag::Singular) + self.count(VertexTag::Cusp) > 0 {
                return Err(SolError::Mesh("singular vertex on a smooth sphere".into()));
            }
        } else if self.count(VertexTag::Singular) > 0 {
            let h = holonomy_from_period(self.radius)?;
            for v in self.vertices.iter().filter(|v| v.tag == VertexTag::Singular) {
                let p = v.point;
                if p.z.abs() > 1e-6 || ((p.x * p.y).abs() - h * h).abs() > 1e-4 * h * h {
                    return Err(SolError::Mesh(format!("singular vertex {p} is off |xy| = H²")));
                }
            }
        }
        Ok(())
    }
}

/// Unit direction with lune coordinates `(c, ω)` in the positive sector:
/// `u = cos ρ·(1,1,0)/√2 + sin ρ·(cos ω (1,−1,0)/√2 + sin ω (0,0,1))` with
/// `ρ` fixed by `xy = c`.
fn lune_direction(c: f64, cos_w: f64, sin_w: f64) -> TangentVector {
    let cc = cos_w * cos_w;
    let cos2 = ((2.0 * c + cc) / (1.0 + cc)).clamp(0.0, 1.0);
    let (cr, sr) = (cos2.sqrt(), (1.0 - cos2).sqrt());
    let x = (cr + sr * cos_w) * FRAC_1_SQRT_2;
    let y = (cr - sr * cos_w) * FRAC_1_SQRT_2;
    TangentVector::new(x, y, sr * sin_w)
}

/// Ring-0 point, snapped onto the bounding meridian.
fn meridian_direction(cos_w: f64, sin_w: f64) -> TangentVector {
    if cos_w == 0.0 {
        return TangentVector::new(0.0, 0.0, sin_w.signum());
    }
    let h = SQRT_2 * cos_w.abs();
    let n = h.hypot(sin_w);
    if cos_w > 0.0 {
        TangentVector::new(h / n, 0.0, sin_w / n)
    } else {
        TangentVector::new(0.0, h / n, sin_w / n)
    }
}

/// `(cos ω_j, sin ω_j)` for `ω_j = 2πj/M`, exactly symmetric under
/// `ω → −ω` and `ω → ω + π`.
fn angle_table(m: usize) -> Vec<(f64, f64)> {
    let q = m / 4;
    let first: Vec<(f64, f64)> = (0..=q)
        .map(|j| {
            if j == q {
                (0.0, 1.0)
            } else {
                let w = 2.0 * PI * j as f64 / m as f64;
                (w.cos(), w.sin())
            }
        })
        .collect();
    (0..m)
        .map(|j| {
            let (k, sc, ss) = match j {
                _ if j <= q => (j, 1.0, 1.0),
                _ if j <= 2 * q => (2 * q - j, -1.0, 1.0),
                _ if j <= 3 * q => (j - 2 * q, -1.0, -1.0),
                _ => (m - j, 1.0, -1.0),
            };
            let (c, s) = first[k];
            (sc * c, ss * s)
        })
        .collect()
}

/// The parametrized lune of one sector.
#[derive(Debug, Clone, PartialEq)]
pub struct LuneChart {
    pub sector: Sector,
    pub radius: f64,
    /// `xy` levels of the rings, from the bounding meridians (0) inwards.
    pub levels: Vec<f64>,
    /// Angular samples per ring.
    pub angles: usize,
    /// Whether the innermost ring bounds a hole; otherwise it is the centre.
    pub holed: bool,
}

impl LuneChart {
    /// Index of the innermost ring.
    pub fn rings(&self) -> usize {
        self.levels.len() - 1
    }

    /// Unit direction at ring `i`, angle `j`, in this chart's sector.
    pub fn direction(&self, i: usize, j: usize) -> TangentVector {
        let (c, s) = angle_table(self.angles)[j % self.angles];
        self.direction_from(i, c, s)
    }

    fn direction_from(&self, i: usize, cos_w: f64, sin_w: f64) -> TangentVector {
        let u = if i == 0 {
            meridian_direction(cos_w, sin_w)
        } else if !self.holed && i + 1 == self.levels.len() {
            TangentVector::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0)
        } else {
            lune_direction(self.levels[i], cos_w, sin_w)
        };
        u.apply(self.sector.symmetry())
    }

    /// Hole boundary `L·u`, `u` on the innermost ring; `j` and `M − j` are partners.
    pub fn boundary(&self) -> Vec<TangentVector> {
        if !self.holed {
            return Vec::new();
        }
        let i = self.levels.len() - 1;
        angle_table(self.angles)
            .into_iter()
            .map(|(c, s)| self.radius * self.direction_from(i, c, s))
            .collect()
    }
}

fn charts(radius: f64, resolution: usize) -> Result<Vec<LuneChart>> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(SolError::domain("build_sphere: L", radius, "L > 0"));
    }
    if resolution < 8 {
        return Err(SolError::domain("build_sphere: resolution", resolution as f64, "resolution >= 8"));
    }
    let angles = resolution.div_ceil(4) * 4;
    let rings = (resolution / 4).max(2);
    let holed = radius > MIN_PERIOD * (1.0 + CUSP_BAND);
    let rho_hole = if holed {
        let alpha = level_set_from_period(radius)?.a;
        let rho = (SQRT_2 * alpha).clamp(-1.0, 1.0).acos();
        if rho * rings as f64 <= 1e-3 * std::f64::consts::FRAC_PI_2 {
            return Err(SolError::Mesh(format!(
                "resolution {resolution} cannot resolve the holes at L = {radius} (hole radius {rho:.3e})"
            )));
        }
        rho
    } else {
        0.0
    };
    let top = std::f64::consts::FRAC_PI_2;
    let levels: Vec<f64> = (0..=rings)
        .map(|i| {
            if i == 0 {
                0.0
            } else if i == rings && holed {
                level_set_from_period(radius).map(|l| l.a * l.a).unwrap_or(0.5)
            } else {
                let rho = top - (top - rho_hole) * i as f64 / rings as f64;
                0.5 * rho.cos().powi(2)
            }
        })
        .collect();
    Ok(Sector::ALL
        .iter()
        .map(|&sector| LuneChart {
            sector,
            radius,
            levels: levels.clone(),
            angles,
            holed,
        })
        .collect())
}

/// The domain `S″_L` as four lune charts whose innermost rings are the four
/// boundary loops, each homothetic to the level set of period `L`.
pub fn clip_lie_sphere(radius: f64, resolution: usize) -> Result<Vec<LuneChart>> {
    if !(radius > MIN_PERIOD) {
        return Err(SolError::domain("clip_lie_sphere: L", radius, "L > π√2"));
    }
    charts(radius, resolution)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereOptions {
    pub resolution: usize,
    /// Fixed RK4 step of the pushforward.
    pub dt: f64,
}

impl Default for SphereOptions {
    fn default() -> Self {
        SphereOptions {
            resolution: 128,
            dt: MESH_DT,
        }
    }
}

pub fn build_sphere(radius: f64, resolution: usize) -> Result<SphereMesh> {
    build_sphere_with(
        radius,
        &SphereOptions {
            resolution,
            ..SphereOptions::default()
        },
    )
}

fn push_forward(v: TangentVector, dt: f64) -> Result<SolPoint> {
    match exp_closed_form(v) {
        Some(p) => Ok(p),
        None => exp_map_steps(v, ((v.norm() / dt).ceil() as usize).max(1)),
    }
}

fn key(u: TangentVector) -> [u64; 3] {
    // `+ 0.0` folds −0 into +0.
    [(u.x + 0.0).to_bits(), (u.y + 0.0).to_bits(), (u.z + 0.0).to_bits()]
}

pub fn build_sphere_with(radius: f64, opts: &SphereOptions) -> Result<SphereMesh> {
    if !(opts.dt > 0.0) {
        return Err(SolError::domain("build_sphere: dt", opts.dt, "dt > 0"));
    }
    let charts = charts(radius, opts.resolution)?;
    let base = &charts[0];
    let (m, r, holed) = (base.angles, base.rings(), base.holed);
    let table = angle_table(m);
    let cusp = !holed && (radius - MIN_PERIOD).abs() <= CUSP_BAND * MIN_PERIOD;

    // Images over the positive lune; the half ω ∈ [π, 2π) follows by swap.
    let computed_rings = if holed { r + 1 } else { r };
    let half: Vec<(usize, usize)> = (0..computed_rings).flat_map(|i| (0..m / 2).map(move |j| (i, j))).collect();
    let computed: Vec<SolPoint> = half
        .par_iter()
        .map(|&(i, j)| {
            let (c, s) = table[j];
            push_forward(radius * base.direction_from(i, c, s), opts.dt)
        })
        .collect::<Result<_>>()?;
    let positive = |i: usize, j: usize| -> (TangentVector, SolPoint) {
        let (c, s) = table[j];
        let u = base.direction_from(i, c, s);
        let p = if j < m / 2 {
            computed[i * (m / 2) + j]
        } else {
            computed[i * (m / 2) + j - m / 2].apply(Symmetry::Swap)
        };
        (radius * u, p)
    };
    let centre_image = if holed {
        None
    } else {
        Some(push_forward(radius * base.direction(r, 0), opts.dt)?)
    };

    let mut vertices: Vec<MeshVertex> = Vec::new();
    let mut index: HashMap<[u64; 3], usize> = HashMap::new();
    let mut faces = Vec::new();
    let mut singular_arcs = Vec::new();
    for chart in &charts {
        let sym = chart.sector.symmetry();
        let flip = sym == Symmetry::ReflectX || sym == Symmetry::ReflectY;
        let mut add = |v: TangentVector, p: SolPoint, tag: VertexTag| -> usize {
            *index.entry(key(v * (1.0 / radius))).or_insert_with(|| {
                vertices.push(MeshVertex {
                    point: p,
                    tag,
                    source: v,
                });
                vertices.len() - 1
            })
        };
        // grid[i][j] for i < r; the innermost ring is handled separately.
        let mut grid = vec![vec![0usize; m]; r];
        for (i, row) in grid.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                let (v, p) = positive(i, j);
                *slot = add(v.apply(sym), p.apply(sym), VertexTag::Smooth);
            }
        }
        let inner: Vec<usize> = if holed {
            let mut reps = vec![0usize; m];
            let mut arc = Vec::with_capacity(m / 2 + 1);
            for j in 0..=m / 2 {
                let (v, p) = positive(r, j);
                let (_, q) = positive(r, (m - j) % m);
                let avg = SolPoint::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y), 0.5 * (p.z + q.z));
                let id = add(v.apply(sym), avg.apply(sym), VertexTag::Singular);
                reps[j] = id;
                reps[(m - j) % m] = id;
                arc.push(id);
            }
            singular_arcs.push(arc);
            reps
        } else {
            let tag = if cusp { VertexTag::Cusp } else { VertexTag::Smooth };
            let v = radius * base.direction(r, 0);
            let id = add(v.apply(sym), centre_image.expect("centre").apply(sym), tag);
            vec![id; m]
        };
        let mut tri = |a: usize, b: usize, c: usize| {
            faces.push(if flip { [a, c, b] } else { [a, b, c] });
        };
        for i in 0..r {
            for j in 0..m {
                let j1 = (j + 1) % m;
                let (a, b) = (grid[i][j], grid[i][j1]);
                let (c, d) = if i + 1 < r {
                    (grid[i + 1][j], grid[i + 1][j1])
                } else {
                    (inner[j], inner[j1])
                };
                if c == d {
                    tri(a, c, b);
                } else {
                    tri(a, c, b);
                    tri(b, c, d);
                }
            }
        }
    }
    // Corners merged at the poles give degenerate faces.
    faces.retain(|f| f[0] != f[1] && f[1] != f[2] && f[0] != f[2]);
    Ok(SphereMesh {
        radius,
        vertices,
        faces,
        singular_arcs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{holonomy_from_a, mu};

    #[test]
    fn angle_table_symmetries() {
        let m = 32;
        let t = angle_table(m);
        for j in 0..m {
            let (c, s) = t[j];
            assert!((c - (2.0 * PI * j as f64 / m as f64).cos()).abs() < 1e-15);
            assert_eq!(t[(m - j) % m], (c, if j == 0 || j == m / 2 { s } else { -s }));
            assert_eq!(t[(j + m / 2) % m], (-c, -s));
        }
    }

    #[test]
    fn lune_levels() {
        for (c, w) in [(0.1, 0.3), (0.2, 2.0), (0.45, -1.0)] {
            let u = lune_direction(c, f64::cos(w), f64::sin(w));
            assert!((u.norm() - 1.0).abs() < 1e-15);
            assert!((u.x * u.y - c).abs() < 1e-15);
        }
        let u = meridian_direction(0.6, 0.8);
        let v = lune_direction(0.0, 0.6, 0.8);
        assert!((u - v).norm() < 1e-15 && u.y == 0.0);
    }

    #[test]
    fn clip_boundaries() {
        let l = 5.0;
        let charts = clip_lie_sphere(l, 32).unwrap();
        assert_eq!(charts.len(), 4);
        let h = holonomy_from_period(l).unwrap();
        for c in &charts {
            let b = c.boundary();
            assert_eq!(b.len(), c.angles);
            for v in &b {
                assert!((mu(*v) - PI).abs() <= 1e-8);
                let u = *v * (1.0 / l);
                assert!((holonomy_from_a((u.x * u.y).abs().sqrt()).unwrap() - h).abs() < 1e-6);
            }
            for j in 1..c.angles / 2 {
                let (p, q) = (b[j], b[c.angles - j]);
                assert_eq!((p.x, p.y, p.z), (q.x, q.y, -q.z));
            }
        }
        assert!(clip_lie_sphere(4.0, 32).is_err());
    }

    #[test]
    fn small_sphere() {
        let s = build_sphere(1.0, 16).unwrap();
        s.validate().unwrap();
        assert_eq!(s.euler_characteristic(), 2);
        assert_eq!(s.count(VertexTag::Singular) + s.count(VertexTag::Cusp), 0);
        assert!(s.singular_arcs.is_empty());
        for v in &s.vertices {
            assert!((v.source.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cusp_sphere() {
        let s = build_sphere(MIN_PERIOD, 16).unwrap();
        assert_eq!(s.euler_characteristic(), 2);
        assert_eq!(s.count(VertexTag::Cusp), 4);
        for v in s.vertices.iter().filter(|v| v.tag == VertexTag::Cusp) {
            assert!((v.point.x.abs() - PI).abs() < 1e-9 && (v.point.y.abs() - PI).abs() < 1e-9);
        }
    }

    #[test]
    fn folded_sphere() {
        let s = build_sphere(5.0, 32).unwrap();
        s.validate().unwrap();
        assert_eq!(s.singular_arcs.len(), 4);
        for arc in &s.singular_arcs {
            assert_eq!(arc.len(), 32 / 2 + 1);
        }
        assert_eq!(s.count(VertexTag::Cusp), 0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_sphere(0.0, 16).is_err());
        assert!(build_sphere(1.0, 4).is_err());
        assert!(matches!(build_sphere(MIN_PERIOD * (1.0 + 1e-9), 16), Err(SolError::Mesh(_))));
    }
}
