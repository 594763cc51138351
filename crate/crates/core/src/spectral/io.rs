//! Binary field format and CSV axis slices.
//!
//! Layout (little endian): magic `CHQF`, u32 version, u32 N, u32 n, f64 L,
//! u32 offset flag, f64 delta, then `n^N` pairs of f64 (re, im) in storage
//! order.

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;
use std::io::{Read, Write};

use super::{Grid, SpectralField};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"CHQF";
const VERSION: u32 = 1;

pub fn write_field<W: Write>(mut w: W, field: &SpectralField, delta: f64) -> Result<()> {
    let g = field.grid();
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    w.write_u32::<LittleEndian>(g.dim as u32)?;
    w.write_u32::<LittleEndian>(g.n as u32)?;
    w.write_f64::<LittleEndian>(g.half_width)?;
    w.write_u32::<LittleEndian>(g.offset as u32)?;
    w.write_f64::<LittleEndian>(delta)?;
    for v in field.values() {
        w.write_f64::<LittleEndian>(v.re)?;
        w.write_f64::<LittleEndian>(v.im)?;
    }
    Ok(())
}

/// Reads a field and the `delta` it was written with.
pub fn read_field<R: Read>(mut r: R) -> Result<(SpectralField, f64)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a field file (bad magic)".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported field version {version}")));
    }
    let dim = r.read_u32::<LittleEndian>()? as usize;
    let n = r.read_u32::<LittleEndian>()? as usize;
    let half_width = r.read_f64::<LittleEndian>()?;
    let offset = match r.read_u32::<LittleEndian>()? {
        0 => false,
        1 => true,
        other => return Err(Error::Format(format!("bad offset flag {other}"))),
    };
    let delta = r.read_f64::<LittleEndian>()?;
    let grid = Grid::new(dim, n, half_width, offset).map_err(|e| Error::Format(e.to_string()))?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = r.read_f64::<LittleEndian>()?;
        let im = r.read_f64::<LittleEndian>()?;
        values.push(Complex64::new(re, im));
    }
    Ok((SpectralField::from_values(grid, values)?, delta))
}

/// Writes the line along `axis` through the node nearest the origin as
/// `x,re,im,abs` rows.
pub fn write_axis_slice_csv<W: Write>(mut w: W, field: &SpectralField, axis: usize) -> Result<()> {
    let g = field.grid();
    if axis >= g.dim {
        return Err(Error::Grid(format!("axis {axis} out of range")));
    }
    let n = g.n;
    let stride = n.pow((g.dim - 1 - axis) as u32);
    let center = g.center_index();
    let base = center - (n / 2) * stride;
    writeln!(w, "x,re,im,abs")?;
    for j in 0..n {
        let v = field.values()[base + j * stride];
        writeln!(w, "{},{},{},{}", g.coord(j), v.re, v.im, v.norm())?;
    }
    Ok(())
}
