//! `HCK1` labeled point cloud container.
//!
//! Little-endian layout:
//!
//! | offset | size | field |
//! |---|---|---|
//! | 0 | 4 | magic `HCK1` |
//! | 4 | 4 | flags (bit 0: provenance present) |
//! | 8 | 8 | point count |
//!
//! followed by one record per point: `x, y, z` as f32, semantic u8,
//! instance u32, part u8 and, with provenance, camera, row and col as u32.
//! Positions are stored as f32; any f32-representable cloud round-trips
//! exactly.

use std::io::{BufRead, Read, Write};
use std::path::Path;

use nalgebra::Point3;

use super::IoError;
use crate::geometry::{LabeledPointCloud, Provenance};

pub const MAGIC: [u8; 4] = *b"HCK1";
pub const FLAG_PROVENANCE: u32 = 1;
pub const HEADER_LEN: usize = 16;
const BASE_RECORD: usize = 12 + 1 + 4 + 1;
const PROVENANCE_RECORD: usize = 12;

pub fn record_len(flags: u32) -> usize {
    BASE_RECORD
        + if flags & FLAG_PROVENANCE != 0 {
            PROVENANCE_RECORD
        } else {
            0
        }
}

pub fn encode_cloud(cloud: &LabeledPointCloud) -> Result<Vec<u8>, IoError> {
    cloud.validate()?;
    let flags = if cloud.provenance.is_some() {
        FLAG_PROVENANCE
    } else {
        0
    };
    let n = cloud.len();
    let mut buf = Vec::with_capacity(HEADER_LEN + n * record_len(flags));
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&flags.to_le_bytes());
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    for i in 0..n {
        let p = &cloud.positions[i];
        for v in [p.x, p.y, p.z] {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
        buf.push(cloud.semantic[i]);
        buf.extend_from_slice(&cloud.instance[i].to_le_bytes());
        buf.push(cloud.part[i]);
        if let Some(prov) = &cloud.provenance {
            let pr = prov[i];
            for v in [pr.camera, pr.row, pr.col] {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    Ok(buf)
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn f32_at(b: &[u8], at: usize) -> f32 {
    f32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

pub fn decode_cloud(bytes: &[u8]) -> Result<LabeledPointCloud, IoError> {
    if bytes.len() < 4 || bytes[..4] != MAGIC {
        let mut found = [0u8; 4];
        let k = bytes.len().min(4);
        found[..k].copy_from_slice(&bytes[..k]);
        return Err(IoError::BadMagic(found));
    }
    if bytes.len() < HEADER_LEN {
        return Err(IoError::Truncated {
            expected: HEADER_LEN,
            got: bytes.len(),
        });
    }
    let flags = u32_at(bytes, 4);
    if flags & !FLAG_PROVENANCE != 0 {
        return Err(IoError::FlagMismatch(flags));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let rec = record_len(flags);
    let expected = usize::try_from(count)
        .ok()
        .and_then(|c| c.checked_mul(rec))
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or(IoError::Truncated {
            expected: usize::MAX,
            got: bytes.len(),
        })?;
    if bytes.len() != expected {
        // a body that fits the other layout exactly means the flags lie
        let other = (count as usize)
            .checked_mul(record_len(flags ^ FLAG_PROVENANCE))
            .and_then(|b| b.checked_add(HEADER_LEN));
        if other == Some(bytes.len()) && count > 0 {
            return Err(IoError::FlagMismatch(flags));
        }
    }
    if bytes.len() < expected {
        return Err(IoError::Truncated {
            expected,
            got: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(IoError::TrailingBytes(bytes.len() - expected));
    }
    let n = count as usize;
    let mut cloud = LabeledPointCloud {
        positions: Vec::with_capacity(n),
        semantic: Vec::with_capacity(n),
        instance: Vec::with_capacity(n),
        part: Vec::with_capacity(n),
        provenance: (flags & FLAG_PROVENANCE != 0).then(|| Vec::with_capacity(n)),
    };
    for i in 0..n {
        let at = HEADER_LEN + i * rec;
        cloud.positions.push(Point3::new(
            f64::from(f32_at(bytes, at)),
            f64::from(f32_at(bytes, at + 4)),
            f64::from(f32_at(bytes, at + 8)),
        ));
        cloud.semantic.push(bytes[at + 12]);
        cloud.instance.push(u32_at(bytes, at + 13));
        cloud.part.push(bytes[at + 17]);
        if let Some(prov) = cloud.provenance.as_mut() {
            prov.push(Provenance {
                camera: u32_at(bytes, at + 18),
                row: u32_at(bytes, at + 22),
                col: u32_at(bytes, at + 26),
            });
        }
    }
    cloud.validate()?;
    Ok(cloud)
}

pub fn write_labeled_cloud(path: &Path, cloud: &LabeledPointCloud) -> Result<(), IoError> {
    let bytes = encode_cloud(cloud)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

pub fn read_labeled_cloud(path: &Path) -> Result<LabeledPointCloud, IoError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_cloud(&bytes)
}

/// ASCII PLY with position and label properties. Provenance is dropped.
pub fn write_ply(mut w: impl Write, cloud: &LabeledPointCloud) -> Result<(), IoError> {
    cloud.validate()?;
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "element vertex {}", cloud.len())?;
    for name in ["x", "y", "z"] {
        writeln!(w, "property float {name}")?;
    }
    writeln!(w, "property uchar semantic")?;
    writeln!(w, "property uint instance")?;
    writeln!(w, "property uchar part")?;
    writeln!(w, "end_header")?;
    for i in 0..cloud.len() {
        let p = &cloud.positions[i];
        writeln!(
            w,
            "{} {} {} {} {} {}",
            p.x as f32, p.y as f32, p.z as f32, cloud.semantic[i], cloud.instance[i], cloud.part[i]
        )?;
    }
    Ok(())
}

/// Reads an ASCII PLY vertex element. `x`, `y`, `z` are required; the
/// label properties default to 0 when absent.
pub fn read_ply(r: impl BufRead) -> Result<LabeledPointCloud, IoError> {
    let mut lines = r.lines();
    let mut next = |what: &str| -> Result<String, IoError> {
        lines
            .next()
            .transpose()?
            .ok_or_else(|| IoError::Ply(format!("unexpected end of file in {what}")))
    };
    if next("header")?.trim() != "ply" {
        return Err(IoError::Ply("missing ply signature".into()));
    }
    let mut count = None;
    let mut props: Vec<String> = Vec::new();
    let mut in_vertex = false;
    loop {
        let line = next("header")?;
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok.as_slice() {
            ["end_header"] => break,
            ["format", fmt, ..] if *fmt != "ascii" => {
                return Err(IoError::Ply(format!("unsupported format {fmt}")))
            }
            ["element", name, n] => {
                in_vertex = *name == "vertex";
                if in_vertex {
                    count = Some(n.parse::<usize>().map_err(|e| IoError::Ply(e.to_string()))?);
                } else if count.is_none() {
                    return Err(IoError::Ply("vertex element must come first".into()));
                }
            }
            ["property", _, name] if in_vertex => props.push((*name).to_string()),
            _ => {}
        }
    }
    let count = count.ok_or_else(|| IoError::Ply("no vertex element".into()))?;
    let col = |name: &str| props.iter().position(|p| p == name);
    let (Some(ix), Some(iy), Some(iz)) = (col("x"), col("y"), col("z")) else {
        return Err(IoError::Ply("vertex needs x, y and z".into()));
    };
    let (is, ii, ip) = (col("semantic"), col("instance"), col("part"));
    let mut cloud = LabeledPointCloud::from_positions(Vec::with_capacity(count));
    for _ in 0..count {
        let line = next("vertex data")?;
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() < props.len() {
            return Err(IoError::Ply(format!("short vertex line: {line}")));
        }
        let f = |k: usize| vals[k].parse::<f64>().map_err(|e| IoError::Ply(e.to_string()));
        let u = |k: Option<usize>| -> Result<u64, IoError> {
            k.map_or(Ok(0), |k| vals[k].parse::<u64>().map_err(|e| IoError::Ply(e.to_string())))
        };
        cloud.positions.push(Point3::new(f(ix)?, f(iy)?, f(iz)?));
        let label_err = || IoError::Ply(format!("label out of range: {line}"));
        cloud.semantic.push(u8::try_from(u(is)?).map_err(|_| label_err())?);
        cloud.instance.push(u32::try_from(u(ii)?).map_err(|_| label_err())?);
        cloud.part.push(u8::try_from(u(ip)?).map_err(|_| label_err())?);
    }
    cloud.validate()?;
    Ok(cloud)
}

/// Reads `.hck` or `.ply` by extension.
pub fn load_cloud(path: &Path) -> Result<LabeledPointCloud, IoError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("ply") => read_ply(std::io::BufReader::new(std::fs::File::open(path)?)),
        _ => read_labeled_cloud(path),
    }
}
