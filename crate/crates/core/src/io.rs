//! Binary field files (`BSF1`), operator dumps (`BSO1`) and CSV export.
//!
//! Field layout: 24-byte header (`b"BSF1"`, `u32` version, `u64` N, `f64` R)
//! followed by N² little-endian `(f32, f32)` pairs in row-major order.
//! Operator layout: `b"BSO1"`, `u64` n, `f64` λ (NaN when absent), `u32`
//! label length, UTF-8 label, then n² `(f64, f64)` pairs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fourier::{Field, PlaneGrid};
use crate::linalg::CMat;

const FIELD_MAGIC: &[u8; 4] = b"BSF1";
const OP_MAGIC: &[u8; 4] = b"BSO1";

fn read_exact<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn write_field(path: impl AsRef<Path>, u: &Field) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&1u32.to_le_bytes())?;
    w.write_all(&(u.grid.n() as u64).to_le_bytes())?;
    w.write_all(&u.grid.half_width().to_le_bytes())?;
    for z in &u.data {
        w.write_all(&(z.re as f32).to_le_bytes())?;
        w.write_all(&(z.im as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<Field> {
    let mut r = BufReader::new(File::open(path)?);
    let magic: [u8; 4] = read_exact(&mut r)?;
    if &magic != FIELD_MAGIC {
        return Err(Error::Io("not a BSF1 field file".into()));
    }
    let _version = u32::from_le_bytes(read_exact(&mut r)?);
    let n = u64::from_le_bytes(read_exact(&mut r)?) as usize;
    let half = f64::from_le_bytes(read_exact(&mut r)?);
    let grid = PlaneGrid::new(n, half)?;
    let mut data = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = f32::from_le_bytes(read_exact(&mut r)?);
        let im = f32::from_le_bytes(read_exact(&mut r)?);
        data.push(C64::new(re as f64, im as f64));
    }
    Ok(Field { grid, data })
}

/// CSV with header `x1,x2,re,im`.
pub fn write_field_csv(path: impl AsRef<Path>, u: &Field) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x1,x2,re,im")?;
    for (idx, z) in u.data.iter().enumerate() {
        let (x, y) = u.grid.point(idx);
        writeln!(w, "{x},{y},{},{}", z.re, z.im)?;
    }
    w.flush()?;
    Ok(())
}

/// Rows `x1,x2,V` (header optional).
pub fn read_potential_csv(path: impl AsRef<Path>) -> Result<Vec<(f64, f64, f64)>> {
    let r = BufReader::new(File::open(path)?);
    let mut rows = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Io(format!("line {}: expected 3 columns", k + 1)));
        }
        let parsed: std::result::Result<Vec<f64>, _> = parts.iter().map(|s| s.parse::<f64>()).collect();
        match parsed {
            Ok(v) => rows.push((v[0], v[1], v[2])),
            Err(_) if k == 0 => continue,
            Err(e) => return Err(Error::Io(format!("line {}: {e}", k + 1))),
        }
    }
    Ok(rows)
}

pub fn write_operator(path: impl AsRef<Path>, m: &CMat, lambda: Option<f64>, label: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Invalid("operator dump needs a square matrix".into()));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(OP_MAGIC)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&lambda.unwrap_or(f64::NAN).to_le_bytes())?;
    w.write_all(&(label.len() as u32).to_le_bytes())?;
    w.write_all(label.as_bytes())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_operator(path: impl AsRef<Path>) -> Result<(CMat, Option<f64>, String)> {
    let mut r = BufReader::new(File::open(path)?);
    let magic: [u8; 4] = read_exact(&mut r)?;
    if &magic != OP_MAGIC {
        return Err(Error::Io("not a BSO1 operator file".into()));
    }
    let n = u64::from_le_bytes(read_exact(&mut r)?) as usize;
    let lam = f64::from_le_bytes(read_exact(&mut r)?);
    let len = u32::from_le_bytes(read_exact(&mut r)?) as usize;
    let mut label = vec![0u8; len];
    r.read_exact(&mut label)?;
    let label = String::from_utf8(label).map_err(|e| Error::Io(e.to_string()))?;
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re = f64::from_le_bytes(read_exact(&mut r)?);
            let im = f64::from_le_bytes(read_exact(&mut r)?);
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok((m, if lam.is_nan() { None } else { Some(lam) }, label))
}
