//! Binary field dumps and the kernel metadata sidecar.
//!
//! A dump is the magic `LLAP`, then `version: u32`, `d: u32`, `n: u32`,
//! `L: f64`, then `n^d` values as `f64`, all little-endian and row-major
//! with the last axis fastest.
//!
//! A kernel dump at `path` may carry a sidecar `path.meta` of
//! `key = value` lines; blank lines and lines starting with `#` are
//! ignored. The `family` key holds the family tag.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelFamily};
use crate::spectral::{Grid, RealField};

pub const MAGIC: &[u8; 4] = b"LLAP";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8;

pub type KernelMeta = BTreeMap<String, String>;

pub fn encode_field(field: &RealField) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * grid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.points() as u32).to_le_bytes());
    out.extend_from_slice(&grid.half_width().to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<RealField> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format("truncated header".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = u32_at(8) as usize;
    let n = u32_at(12) as usize;
    let half_width = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let grid = Grid::new(dim, half_width, n)?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != 8 * grid.len() {
        return Err(Error::Format(format!(
            "payload holds {} bytes, expected {}",
            payload.len(),
            8 * grid.len()
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    RealField::new(grid, values)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_field(path: &Path, field: &RealField) -> Result<()> {
    write_atomic(path, &encode_field(field))
}

pub fn read_field(path: &Path) -> Result<RealField> {
    decode_field(&fs::read(path)?)
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".meta");
    PathBuf::from(p)
}

/// Sidecar entries describing a kernel family.
pub fn family_meta(family: &KernelFamily) -> KernelMeta {
    let mut meta = KernelMeta::new();
    meta.insert("family".into(), family.tag().into());
    let mut put = |k: &str, v: f64| {
        meta.insert(k.into(), format!("{v:e}"));
    };
    match family {
        KernelFamily::Gaussian { width, amplitude } => {
            put("width", *width);
            put("amplitude", *amplitude);
        }
        KernelFamily::Bump {
            radius,
            amplitude,
            center,
        } => {
            put("radius", *radius);
            put("amplitude", *amplitude);
            let c: Vec<String> = center.iter().map(|v| format!("{v:e}")).collect();
            meta.insert("center".into(), c.join(","));
        }
        KernelFamily::Difference { w1, w2, c1, a } => {
            put("w1", *w1);
            put("w2", *w2);
            put("c1", *c1);
            put("a", *a);
        }
        KernelFamily::File { path } => {
            meta.insert("path".into(), path.clone());
        }
    }
    meta
}

pub fn format_meta(meta: &KernelMeta) -> String {
    let mut out = String::from("# kernel metadata\n");
    for (k, v) in meta {
        out.push_str(&format!("{k} = {v}\n"));
    }
    out
}

pub fn parse_meta(text: &str) -> Result<KernelMeta> {
    let mut meta = KernelMeta::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("line {}: expected key = value", i + 1)))?;
        let key = k.trim();
        if key.is_empty() {
            return Err(Error::Format(format!("line {}: empty key", i + 1)));
        }
        meta.insert(key.to_string(), v.trim().to_string());
    }
    Ok(meta)
}

/// Writes the samples and, when the kernel has a family, its sidecar.
pub fn write_kernel(path: &Path, kernel: &Kernel) -> Result<()> {
    write_field(path, kernel.samples())?;
    if let Some(family) = kernel.family() {
        write_atomic(
            &meta_path(path),
            format_meta(&family_meta(family)).as_bytes(),
        )?;
    }
    Ok(())
}

/// Reads kernel samples and the optional sidecar.
pub fn read_kernel(path: &Path) -> Result<(RealField, Option<KernelMeta>)> {
    let field = read_field(path)?;
    let meta = match fs::read_to_string(meta_path(path)) {
        Ok(text) => Some(parse_meta(&text)?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(e.into()),
    };
    Ok((field, meta))
}
