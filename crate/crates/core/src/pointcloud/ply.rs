//! Binary little-endian PLY for colored point clouds.
//!
//! Written layout: `x y z` as float32, `red green blue` as uchar, and an
//! optional float32 `confidence`. The reader accepts any scalar property types
//! for these names, in any order, and ignores unknown vertex properties.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::Point3;

use super::{CloudError, ColoredPointCloud};

fn ply_err(m: impl Into<String>) -> CloudError {
    CloudError::Ply(m.into())
}

pub fn write_ply<W: Write>(cloud: &ColoredPointCloud, mut w: W) -> Result<(), CloudError> {
    let io = |e: std::io::Error| ply_err(e.to_string());
    let mut header = format!(
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\n\
         property float x\nproperty float y\nproperty float z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\n",
        cloud.len()
    );
    if cloud.confidences().is_some() {
        header.push_str("property float confidence\n");
    }
    header.push_str("end_header\n");
    w.write_all(header.as_bytes()).map_err(io)?;

    let stride = 15 + if cloud.confidences().is_some() { 4 } else { 0 };
    let mut buf = Vec::with_capacity(cloud.len() * stride);
    for (i, (p, c)) in cloud.positions().iter().zip(cloud.colors()).enumerate() {
        for v in [p.x, p.y, p.z] {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
        buf.extend_from_slice(c);
        if let Some(conf) = cloud.confidences() {
            buf.extend_from_slice(&conf[i].to_le_bytes());
        }
    }
    w.write_all(&buf).map_err(io)?;
    w.flush().map_err(io)
}

pub fn write_ply_file(cloud: &ColoredPointCloud, path: &Path) -> Result<(), CloudError> {
    let f = std::fs::File::create(path).map_err(|source| CloudError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_ply(cloud, std::io::BufWriter::new(f))
}

pub fn read_ply_file(path: &Path) -> Result<ColoredPointCloud, CloudError> {
    let f = std::fs::File::open(path).map_err(|source| CloudError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_ply(BufReader::new(f)).map_err(|e| match e {
        CloudError::Ply(m) => CloudError::Ply(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[derive(Debug, Clone, Copy)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn read(self, b: &[u8]) -> f64 {
        match self {
            Self::I8 => b[0] as i8 as f64,
            Self::U8 => b[0] as f64,
            Self::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Self::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Self::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::F64 => f64::from_le_bytes([b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7]]),
        }
    }
}

struct Property {
    name: String,
    kind: Scalar,
    offset: usize,
}

pub fn read_ply<R: BufRead>(mut r: R) -> Result<ColoredPointCloud, CloudError> {
    let mut line = String::new();
    let next_line = |r: &mut R, line: &mut String| -> Result<(), CloudError> {
        line.clear();
        let n = r.read_line(line).map_err(|e| ply_err(e.to_string()))?;
        if n == 0 {
            return Err(ply_err("unexpected end of header"));
        }
        Ok(())
    };

    next_line(&mut r, &mut line)?;
    if line.trim_end() != "ply" {
        return Err(ply_err("missing 'ply' magic"));
    }
    let mut count: Option<usize> = None;
    let mut props: Vec<Property> = Vec::new();
    let mut stride = 0;
    let mut in_vertex = false;
    let mut seen_format = false;
    loop {
        next_line(&mut r, &mut line)?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["end_header"] => break,
            ["format", "binary_little_endian", _] => seen_format = true,
            ["format", other, _] => return Err(ply_err(format!("unsupported format '{other}'"))),
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", "vertex", n] => {
                if count.is_some() {
                    return Err(ply_err("duplicate vertex element"));
                }
                count = Some(n.parse().map_err(|_| ply_err(format!("bad vertex count '{n}'")))?);
                in_vertex = true;
            }
            ["element", name, _] => {
                if count.is_none() {
                    return Err(ply_err(format!("element '{name}' before vertex is not supported")));
                }
                // trailing elements (faces, ...) are never read
                in_vertex = false;
            }
            ["property", "list", ..] if in_vertex => {
                return Err(ply_err("list properties on vertices are not supported"))
            }
            ["property", ty, name] if in_vertex => {
                let kind = Scalar::parse(ty).ok_or_else(|| ply_err(format!("unknown type '{ty}'")))?;
                props.push(Property {
                    name: name.to_string(),
                    kind,
                    offset: stride,
                });
                stride += kind.size();
            }
            ["property", ..] => {}
            _ => return Err(ply_err(format!("unexpected header line '{}'", line.trim_end()))),
        }
    }
    if !seen_format {
        return Err(ply_err("missing format line"));
    }
    let count = count.ok_or_else(|| ply_err("no vertex element"))?;
    let find = |name: &str| props.iter().find(|p| p.name == name);
    let need = |name: &str| find(name).ok_or_else(|| ply_err(format!("missing vertex property '{name}'")));
    let (px, py, pz) = (need("x")?, need("y")?, need("z")?);
    let (cr, cg, cb) = (need("red")?, need("green")?, need("blue")?);
    let conf = find("confidence");

    let mut data = vec![0u8; count * stride];
    r.read_exact(&mut data)
        .map_err(|_| ply_err(format!("truncated body: expected {count} vertices")))?;

    let mut positions = Vec::with_capacity(count);
    let mut colors = Vec::with_capacity(count);
    let mut confidences = conf.map(|_| Vec::with_capacity(count));
    let get = |rec: &[u8], p: &Property| p.kind.read(&rec[p.offset..]);
    let to_u8 = |v: f64| v.clamp(0.0, 255.0) as u8;
    for rec in data.chunks_exact(stride.max(1)).take(count) {
        positions.push(Point3::new(get(rec, px), get(rec, py), get(rec, pz)));
        colors.push([to_u8(get(rec, cr)), to_u8(get(rec, cg)), to_u8(get(rec, cb))]);
        if let (Some(c), Some(p)) = (&mut confidences, conf) {
            c.push(get(rec, p) as f32);
        }
    }
    ColoredPointCloud::new(positions, colors, confidences)
}
