//! `sol`: command-line front end for the Sol geometry toolkit.

mod config;

use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sol_geometry::cutlocus::{classify_with, cut_locus_polar, cut_time, distance, log_map, wavefront_with_dt};
use sol_geometry::export::{write_mesh, MeshData, MeshFormat};
use sol_geometry::flow::{exp_map, geodesic_trajectory};
use sol_geometry::group::Sector;
use sol_geometry::specfun::{elliptic_parameter, holonomy_from_period, level_set_from_a, level_set_from_period, A_MAX};
use sol_geometry::sphere::{build_sphere_with, SphereOptions, VertexTag, MESH_DT};
use sol_geometry::{SolError, SolPoint, TangentVector};

use config::{FileConfig, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Numeric(#[from] SolError),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(SolError::NonConvergence { .. } | SolError::StepLimit { .. }) => 3,
            CliError::Numeric(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sol", version, about = "Geodesics, cut locus and metric spheres of Sol")]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// RK4 step for geodesic integration.
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Tolerance of the μ = π test.
    #[arg(long, global = true)]
    tol_perfect: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Mesh format: obj, ply or csv.
    #[arg(long, global = true)]
    format: Option<MeshFormat>,
    /// Flat key=value file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print 17 significant digits instead of 9.
    #[arg(long, global = true)]
    full: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Riemannian exponential of a tangent vector at the identity.
    Exp {
        #[arg(allow_negative_numbers = true)]
        x: f64,
        #[arg(allow_negative_numbers = true)]
        y: f64,
        #[arg(allow_negative_numbers = true)]
        z: f64,
        /// CSV of t,x,y,z,ux,uy,uz along the geodesic.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Small, Perfect or Large, with μ and the cut time of the direction.
    Classify {
        #[arg(allow_negative_numbers = true, required_unless_present = "random")]
        v: Vec<f64>,
        /// Classify this many seeded random vectors instead.
        #[arg(long)]
        random: Option<usize>,
        /// Largest coordinate of the random vectors.
        #[arg(long, default_value_t = 4.0)]
        scale: f64,
    },
    /// Sol distance between two points.
    Distance {
        #[arg(allow_negative_numbers = true, num_args = 6)]
        coords: Vec<f64>,
    },
    /// Minimizing initial vectors reaching a point.
    Log {
        #[arg(allow_negative_numbers = true)]
        x: f64,
        #[arg(allow_negative_numbers = true)]
        y: f64,
        #[arg(allow_negative_numbers = true)]
        z: f64,
    },
    /// CSV θ,f,g,x,y of the planar cut locus; θ is the angle within the sector.
    Cutlocus {
        #[arg(long, default_value_t = 64)]
        thetas: usize,
        /// Quadrant as pp, pn, np or nn (or ++, +-, -+, --).
        #[arg(long, default_value = "pp")]
        sector: String,
    },
    /// CSV of the wavefront of period L with its bounding triangle.
    Wavefront {
        #[arg(name = "L")]
        period: f64,
        #[arg(default_value_t = 100)]
        n: usize,
    },
    /// Triangulated metric sphere of radius L.
    Sphere {
        #[arg(name = "L")]
        radius: f64,
        #[arg(default_value_t = 128)]
        resolution: usize,
        /// Print topology and tag counts to stderr.
        #[arg(long)]
        check: bool,
    },
    /// Period, parameter and holonomy of a level set.
    Period {
        #[arg(required_unless_present = "from_l")]
        a: Option<f64>,
        #[arg(long = "from-L", conflicts_with = "a")]
        from_l: Option<f64>,
    },
    /// Holonomy of the level set of period L.
    Holonomy {
        #[arg(name = "L")]
        period: f64,
    },
}

/// Number printer honouring `--full`.
#[derive(Debug, Clone, Copy)]
struct Num {
    digits: usize,
}

impl Num {
    fn new(full: bool) -> Num {
        Num { digits: if full { 17 } else { 9 } }
    }

    fn f(self, x: f64) -> String {
        if x.is_nan() {
            return "nan".into();
        }
        if x.is_infinite() {
            return if x > 0.0 { "inf".into() } else { "-inf".into() };
        }
        let rounded: f64 = format!("{:.*e}", self.digits - 1, x).parse().expect("float round trip");
        if rounded == 0.0 {
            "0".into()
        } else {
            format!("{rounded}")
        }
    }

    fn join(self, xs: &[f64], sep: &str) -> String {
        xs.iter().map(|&x| self.f(x)).collect::<Vec<_>>().join(sep)
    }
}

fn output(cfg: &RunConfig) -> Result<Box<dyn Write>, CliError> {
    Ok(match &cfg.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Input(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn finite(name: &str, xs: &[f64]) -> Result<(), CliError> {
    match xs.iter().find(|x| !x.is_finite()) {
        Some(x) => Err(CliError::Input(format!("{name}: {x} is not a finite number"))),
        None => Ok(()),
    }
}

fn parse_sector(s: &str) -> Result<Sector, CliError> {
    let sign = |c: char| match c {
        'p' | '+' => Ok(1),
        'n' | 'm' | '-' => Ok(-1),
        _ => Err(CliError::Input(format!("bad sector '{s}' (expected pp, pn, np or nn)"))),
    };
    let cs: Vec<char> = s.chars().collect();
    if cs.len() != 2 {
        return Err(CliError::Input(format!("bad sector '{s}' (expected pp, pn, np or nn)")));
    }
    Ok(Sector { sign_x: sign(cs[0])?, sign_y: sign(cs[1])? })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.global.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let flags = FileConfig {
        dt: cli.global.dt,
        tol_perfect: cli.global.tol_perfect,
        seed: cli.global.seed,
        out: cli.global.out.clone(),
        format: cli.global.format,
        full: cli.global.full.then_some(true),
    };
    let explicit_dt = flags.dt.or(file.dt);
    let cfg = RunConfig::merge(flags, file)?;
    let num = Num::new(cfg.full);

    match cli.command {
        Command::Exp { x, y, z, trace } => {
            finite("exp", &[x, y, z])?;
            let v = TangentVector::new(x, y, z);
            let p = exp_map(v, cfg.dt)?;
            if let Some(path) = trace {
                let traj = geodesic_trajectory(v, cfg.dt)?;
                let mut w = BufWriter::new(File::create(&path)?);
                writeln!(w, "t,x,y,z,ux,uy,uz")?;
                for (t, s) in traj {
                    writeln!(w, "{}", num.join(&[t, s.p.x, s.p.y, s.p.z, s.u.x, s.u.y, s.u.z], ","))?;
                }
                w.flush()?;
            }
            let mut out = output(&cfg)?;
            writeln!(out, "{}", num.join(&[p.x, p.y, p.z], " "))?;
            out.flush()?;
        }
        Command::Classify { v, random, scale } => {
            let mut out = output(&cfg)?;
            let describe = |v: TangentVector| -> Result<(String, f64, f64), CliError> {
                let class = classify_with(v, cfg.tol_perfect);
                let ct = match v.normalized() {
                    Some(u) => cut_time(u)?,
                    None => f64::INFINITY,
                };
                Ok((class.tag.to_string(), class.mu, ct))
            };
            match random {
                Some(n) => {
                    finite("scale", &[scale])?;
                    if !(scale > 0.0) {
                        return Err(CliError::Input(format!("scale must be positive, got {scale}")));
                    }
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    writeln!(out, "x,y,z,class,mu,cut_time")?;
                    for _ in 0..n {
                        let v = TangentVector::new(
                            rng.gen_range(-scale..scale),
                            rng.gen_range(-scale..scale),
                            rng.gen_range(-scale..scale),
                        );
                        let (tag, mu, ct) = describe(v)?;
                        writeln!(out, "{},{tag},{},{}", num.join(&[v.x, v.y, v.z], ","), num.f(mu), num.f(ct))?;
                    }
                }
                None => {
                    if v.len() != 3 {
                        return Err(CliError::Input(format!("classify takes 3 coordinates, got {}", v.len())));
                    }
                    finite("classify", &v)?;
                    let (tag, mu, ct) = describe(TangentVector::new(v[0], v[1], v[2]))?;
                    writeln!(out, "class {tag}\nmu {}\ncut_time {}", num.f(mu), num.f(ct))?;
                }
            }
            out.flush()?;
        }
        Command::Distance { coords } => {
            finite("distance", &coords)?;
            let p = SolPoint::new(coords[0], coords[1], coords[2]);
            let q = SolPoint::new(coords[3], coords[4], coords[5]);
            let d = distance(p, q)?;
            let mut out = output(&cfg)?;
            writeln!(out, "{}", num.f(d))?;
            out.flush()?;
        }
        Command::Log { x, y, z } => {
            finite("log", &[x, y, z])?;
            let r = log_map(SolPoint::new(x, y, z))?;
            let mut out = output(&cfg)?;
            for v in r.solutions() {
                writeln!(out, "{}", num.join(&[v.x, v.y, v.z], " "))?;
            }
            out.flush()?;
        }
        Command::Cutlocus { thetas, sector } => {
            let sector = parse_sector(&sector)?;
            if thetas == 0 {
                return Err(CliError::Input("thetas must be at least 1".into()));
            }
            let mut out = output(&cfg)?;
            writeln!(out, "theta,f,g,x,y")?;
            for k in 1..=thetas {
                let theta = FRAC_PI_2 * k as f64 / (thetas + 1) as f64;
                let (f, g) = cut_locus_polar(theta)?;
                let x = sector.sign_x as f64 * g * theta.cos();
                let y = sector.sign_y as f64 * g * theta.sin();
                writeln!(out, "{}", num.join(&[theta, f, g, x, y], ","))?;
            }
            out.flush()?;
        }
        Command::Wavefront { period, n } => {
            finite("L", &[period])?;
            if n == 0 {
                return Err(CliError::Input("n must be at least 1".into()));
            }
            let w = wavefront_with_dt(period, n, cfg.dt)?;
            let mut out = output(&cfg)?;
            let tri = w.triangle();
            writeln!(
                out,
                "# triangle {}",
                tri.iter().map(|&(a, b)| num.join(&[a, b], " ")).collect::<Vec<_>>().join(" ; ")
            )?;
            writeln!(out, "t,a,b,x,y,z,psi,inside")?;
            for s in &w.samples {
                let inside = w.triangle_margin(s.a, s.b) >= -1e-9;
                writeln!(out, "{},{inside}", num.join(&[s.t, s.a, s.b, s.p[0], s.p[1], s.p[2], s.psi], ","))?;
            }
            out.flush()?;
        }
        Command::Sphere { radius, resolution, check } => {
            finite("L", &[radius])?;
            if resolution < 4 {
                return Err(CliError::Input(format!("resolution must be at least 4, got {resolution}")));
            }
            let opts = SphereOptions { resolution, dt: explicit_dt.unwrap_or(MESH_DT) };
            let mesh = build_sphere_with(radius, &opts)?;
            let mut out = output(&cfg)?;
            write_mesh(&MeshData::from(&mesh), cfg.format.unwrap_or(MeshFormat::Obj), &mut out)?;
            out.flush()?;
            if check {
                mesh.validate()?;
                let t = mesh.topology();
                eprintln!(
                    "vertices {} edges {} faces {} euler {} closed {} oriented {} singular {} cusp {} arcs {}",
                    t.vertices,
                    t.edges,
                    t.faces,
                    t.euler_characteristic(),
                    t.closed,
                    t.oriented,
                    mesh.count(VertexTag::Singular),
                    mesh.count(VertexTag::Cusp),
                    mesh.singular_arcs.len()
                );
            }
        }
        Command::Period { a, from_l } => {
            let ls = match (a, from_l) {
                (Some(a), _) => {
                    finite("a", &[a])?;
                    if !(a > 0.0 && a < A_MAX) {
                        return Err(CliError::Input(format!("a must lie in (0, √2/2), got {a}")));
                    }
                    level_set_from_a(a)?
                }
                (None, Some(l)) => {
                    finite("L", &[l])?;
                    level_set_from_period(l)?
                }
                (None, None) => unreachable!("clap requires a or --from-L"),
            };
            let mut out = output(&cfg)?;
            writeln!(
                out,
                "a {}\nL {}\nm {}\nH {}",
                num.f(ls.a),
                num.f(ls.period),
                num.f(elliptic_parameter(ls.a)),
                num.f(ls.holonomy)
            )?;
            out.flush()?;
        }
        Command::Holonomy { period } => {
            finite("L", &[period])?;
            let h = holonomy_from_period(period)?;
            let mut out = output(&cfg)?;
            writeln!(out, "{}", num.f(h))?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sol: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
