//! Field serialization.
//!
//! Binary: magic `GRSH1`, then `d1`, `d2` and the node count of every axis
//! (x' axes first) as `u32` little-endian, then each sample as two `f64`
//! little-endian (re, im) in the field's flat order. The node coordinates are
//! not stored; reading attaches the samples to a caller-supplied grid with
//! matching counts.
//!
//! CSV: optional `# config_hash=...` comment, header
//! `x1_0,..,x2_0,..,re,im`, one node per row. Floats are written in
//! shortest round-trip form, so a CSV round trip is also bit-exact.

use crate::error::{Error, Result};
use crate::field::GriddedField;
use crate::grid::Grid;
use num_complex::Complex64;
use std::io::{BufRead, Read, Write};

pub const MAGIC: &[u8; 5] = b"GRSH1";

pub fn write_binary(h: &GriddedField, mut w: impl Write) -> Result<()> {
    let g = &h.grid;
    w.write_all(MAGIC)?;
    for v in [g.dims.d1, g.dims.d2].into_iter().chain(g.counts()) {
        let v = u32::try_from(v).map_err(|_| Error::Format(format!("count {v} exceeds u32")))?;
        w.write_all(&v.to_le_bytes())?;
    }
    for v in &h.values {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_binary(mut r: impl Read, grid: &Grid) -> Result<GriddedField> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let d1 = read_u32(&mut r)? as usize;
    let d2 = read_u32(&mut r)? as usize;
    if (d1, d2) != (grid.dims.d1, grid.dims.d2) {
        return Err(Error::Mismatch(format!("file has dims ({d1}, {d2}), grid has ({}, {})", grid.dims.d1, grid.dims.d2)));
    }
    let counts: Vec<usize> = (0..d1 + d2).map(|_| read_u32(&mut r).map(|c| c as usize)).collect::<Result<_>>()?;
    if counts != grid.counts() {
        return Err(Error::Mismatch(format!("file has axis counts {counts:?}, grid has {:?}", grid.counts())));
    }
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        values.push(Complex64::new(re, im));
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes", rest.len())));
    }
    Ok(GriddedField { grid: grid.clone(), values })
}

fn csv_header(grid: &Grid) -> String {
    let mut cols: Vec<String> = (0..grid.dims.d1).map(|a| format!("x1_{a}")).collect();
    cols.extend((0..grid.dims.d2).map(|a| format!("x2_{a}")));
    cols.push("re".into());
    cols.push("im".into());
    cols.join(",")
}

pub fn write_csv(h: &GriddedField, config_hash: Option<&str>, mut w: impl Write) -> Result<()> {
    let g = &h.grid;
    if let Some(hash) = config_hash {
        writeln!(w, "# config_hash={hash}")?;
    }
    writeln!(w, "{}", csv_header(g))?;
    let n2 = g.n2();
    for (i, v) in h.values.iter().enumerate() {
        let mut row: Vec<String> = g.x1.point(i / n2).iter().map(|x| format!("{x:?}")).collect();
        row.extend(g.x2_point(i % n2).iter().map(|x| format!("{x:?}")));
        row.push(format!("{:?}", v.re));
        row.push(format!("{:?}", v.im));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Reads a CSV written for `grid`; coordinates must match the grid's nodes.
pub fn read_csv(r: impl BufRead, grid: &Grid) -> Result<GriddedField> {
    let d = grid.dims.d();
    let n2 = grid.n2();
    let mut values = Vec::with_capacity(grid.len());
    let mut header_seen = false;
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line != csv_header(grid) {
                return Err(Error::Format(format!("unexpected header {line:?}")));
            }
            header_seen = true;
            continue;
        }
        let cells: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|_| Error::Format(format!("bad number {c:?}"))))
            .collect::<Result<_>>()?;
        if cells.len() != d + 2 {
            return Err(Error::Format(format!("expected {} columns, got {}", d + 2, cells.len())));
        }
        let i = values.len();
        if i >= grid.len() {
            return Err(Error::Mismatch("more rows than grid nodes".into()));
        }
        let expect: Vec<f64> = grid.x1.point(i / n2).into_iter().chain(grid.x2_point(i % n2)).collect();
        let tol = 1e-9 * expect.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if expect.iter().zip(&cells).any(|(a, b)| (a - b).abs() > tol) {
            return Err(Error::Mismatch(format!("row {i}: coordinates {:?} do not match grid node {expect:?}", &cells[..d])));
        }
        values.push(Complex64::new(cells[d], cells[d + 1]));
    }
    if values.len() != grid.len() {
        return Err(Error::Mismatch(format!("{} rows for {} grid nodes", values.len(), grid.len())));
    }
    Ok(GriddedField { grid: grid.clone(), values })
}
