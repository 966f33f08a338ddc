//! OBJ, PLY and CSV mesh files. Coordinates are written with 17 significant
//! digits, which round-trips every `f64` exactly.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::group::SolPoint;
use crate::sphere::{SphereMesh, VertexTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeshFormat {
    Obj,
    Ply,
    Csv,
}

impl FromStr for MeshFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "ply" => Ok(MeshFormat::Ply),
            "csv" => Ok(MeshFormat::Csv),
            _ => Err(format!("unknown mesh format '{s}' (expected obj, ply or csv)")),
        }
    }
}

impl fmt::Display for MeshFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeshFormat::Obj => "obj",
            MeshFormat::Ply => "ply",
            MeshFormat::Csv => "csv",
        })
    }
}

/// Vertices and faces as stored in a mesh file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeshData {
    pub vertices: Vec<(SolPoint, VertexTag)>,
    pub faces: Vec<[usize; 3]>,
}

impl From<&SphereMesh> for MeshData {
    fn from(m: &SphereMesh) -> Self {
        MeshData {
            vertices: m.vertices.iter().map(|v| (v.point, v.tag)).collect(),
            faces: m.faces.clone(),
        }
    }
}

/// `f64` with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

pub fn write_mesh<W: Write>(data: &MeshData, format: MeshFormat, out: W) -> io::Result<()> {
    let mut w = BufWriter::new(out);
    match format {
        MeshFormat::Obj => {
            writeln!(w, "# Sol metric sphere")?;
            let mut group = None;
            for (p, tag) in &data.vertices {
                if group != Some(*tag) {
                    writeln!(w, "g {}", tag.as_str())?;
                    group = Some(*tag);
                }
                writeln!(w, "v {} {} {}", fmt17(p.x), fmt17(p.y), fmt17(p.z))?;
            }
            for f in &data.faces {
                writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
            }
        }
        MeshFormat::Ply => {
            writeln!(w, "ply")?;
            writeln!(w, "format ascii 1.0")?;
            writeln!(w, "element vertex {}", data.vertices.len())?;
            writeln!(w, "property double x")?;
            writeln!(w, "property double y")?;
            writeln!(w, "property double z")?;
            writeln!(w, "property uchar tag")?;
            writeln!(w, "element face {}", data.faces.len())?;
            writeln!(w, "property list uchar int vertex_indices")?;
            writeln!(w, "end_header")?;
            for (p, tag) in &data.vertices {
                writeln!(w, "{} {} {} {}", fmt17(p.x), fmt17(p.y), fmt17(p.z), tag.code())?;
            }
            for f in &data.faces {
                writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
            }
        }
        MeshFormat::Csv => {
            writeln!(w, "x,y,z,tag")?;
            for (p, tag) in &data.vertices {
                writeln!(w, "{},{},{},{}", fmt17(p.x), fmt17(p.y), fmt17(p.z), tag.as_str())?;
            }
            writeln!(w, "# faces")?;
            for f in &data.faces {
                writeln!(w, "{},{},{}", f[0], f[1], f[2])?;
            }
        }
    }
    w.flush()
}

pub fn export_mesh(mesh: &SphereMesh, format: MeshFormat, path: &Path) -> io::Result<()> {
    write_mesh(&MeshData::from(mesh), format, File::create(path)?)
}

fn bad(line: usize, msg: impl fmt::Display) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, format!("line {line}: {msg}"))
}

fn num<T: FromStr>(line: usize, s: Option<&str>) -> io::Result<T> {
    s.and_then(|t| t.trim().parse().ok())
        .ok_or_else(|| bad(line, format!("expected a number, found {s:?}")))
}

fn point(line: usize, it: &mut dyn Iterator<Item = &str>) -> io::Result<SolPoint> {
    Ok(SolPoint::new(num(line, it.next())?, num(line, it.next())?, num(line, it.next())?))
}

fn face(line: usize, it: &mut dyn Iterator<Item = &str>, offset: usize) -> io::Result<[usize; 3]> {
    let mut f = [0usize; 3];
    for slot in &mut f {
        let k: usize = num(line, it.next())?;
        *slot = k.checked_sub(offset).ok_or_else(|| bad(line, "face index out of range"))?;
    }
    Ok(f)
}

pub fn read_mesh<R: io::Read>(format: MeshFormat, input: R) -> io::Result<MeshData> {
    let lines: Vec<String> = BufReader::new(input).lines().collect::<io::Result<_>>()?;
    let mut data = MeshData::default();
    match format {
        MeshFormat::Obj => {
            let mut tag = VertexTag::Smooth;
            for (n, l) in lines.iter().enumerate() {
                let mut it = l.split_whitespace();
                match it.next() {
                    Some("g") => {
                        tag = it.next().unwrap_or("").parse().map_err(|e| bad(n + 1, e))?;
                    }
                    Some("v") => data.vertices.push((point(n + 1, &mut it)?, tag)),
                    Some("f") => data.faces.push(face(n + 1, &mut it, 1)?),
                    _ => {}
                }
            }
        }
        MeshFormat::Ply => {
            let end = lines
                .iter()
                .position(|l| l.trim() == "end_header")
                .ok_or_else(|| bad(0, "missing end_header"))?;
            let count = |name: &str| -> io::Result<usize> {
                lines[..end]
                    .iter()
                    .enumerate()
                    .find_map(|(n, l)| {
                        l.strip_prefix(&format!("element {name} "))
                            .map(|c| num(n + 1, Some(c)))
                    })
                    .unwrap_or(Ok(0))
            };
            let (nv, nf) = (count("vertex")?, count("face")?);
            let body = &lines[end + 1..];
            if body.len() < nv + nf {
                return Err(bad(end + 1, "truncated PLY body"));
            }
            for (k, l) in body[..nv].iter().enumerate() {
                let n = end + 2 + k;
                let mut it = l.split_whitespace();
                let p = point(n, &mut it)?;
                let code: u8 = num(n, it.next())?;
                let tag = VertexTag::from_code(code).ok_or_else(|| bad(n, "unknown tag code"))?;
                data.vertices.push((p, tag));
            }
            for (k, l) in body[nv..nv + nf].iter().enumerate() {
                let n = end + 2 + nv + k;
                let mut it = l.split_whitespace();
                if num::<usize>(n, it.next())? != 3 {
                    return Err(bad(n, "only triangles are supported"));
                }
                data.faces.push(face(n, &mut it, 0)?);
            }
        }
        MeshFormat::Csv => {
            let mut in_faces = false;
            for (n, l) in lines.iter().enumerate().skip(1) {
                if l.trim() == "# faces" {
                    in_faces = true;
                    continue;
                }
                if l.trim().is_empty() {
                    continue;
                }
                let mut it = l.split(',');
                if in_faces {
                    data.faces.push(face(n + 1, &mut it, 0)?);
                } else {
                    let p = point(n + 1, &mut it)?;
                    let tag = it.next().unwrap_or("").trim().parse().map_err(|e| bad(n + 1, e))?;
                    data.vertices.push((p, tag));
                }
            }
        }
    }
    if let Some(f) = data.faces.iter().find(|f| f.iter().any(|&k| k >= data.vertices.len())) {
        return Err(bad(0, format!("face {f:?} references a missing vertex")));
    }
    Ok(data)
}

pub fn import_mesh(format: MeshFormat, path: &Path) -> io::Result<MeshData> {
    read_mesh(format, File::open(path)?)
}
