//! Binary field file format "MKF1".
//!
//! Layout, all little-endian:
//!   bytes 0..4    magic "MKF1"
//!   u32           dims d
//!   u32           degrees of freedom n
//!   f64           hbar
//!   d x u32       points per axis (all equal, power of two)
//!   d x f64       extent per axis
//!   u32           payload dtype tag (0 = complex128)
//!   payload       16 * N^d bytes: (re, im) f64 pairs, row-major
//!
//! write(read(x)) is bit-exact.

use crate::error::{MoyalError, Result};
use crate::grid::{C64, GridSpec, SampledField};
use crate::symplectic::HbarContext;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"MKF1";
const DTYPE_C128: u32 = 0;

pub fn write_field(field: &SampledField, ctx: &HbarContext, path: &Path) -> Result<()> {
    let g = field.grid();
    let mut buf: Vec<u8> = Vec::with_capacity(4 + 4 + 4 + 8 + 12 * g.dims() + 4 + 16 * g.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(g.dims() as u32).to_le_bytes());
    buf.extend_from_slice(&(ctx.n as u32).to_le_bytes());
    buf.extend_from_slice(&ctx.hbar.to_le_bytes());
    for _ in 0..g.dims() {
        buf.extend_from_slice(&(g.points() as u32).to_le_bytes());
    }
    for a in 0..g.dims() {
        buf.extend_from_slice(&g.extent(a).to_le_bytes());
    }
    buf.extend_from_slice(&DTYPE_C128.to_le_bytes());
    for v in field.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<(SampledField, HbarContext)> {
    let mut raw = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut raw)?;
    let mut off = 0usize;
    let take = |off: &mut usize, len: usize| -> Result<&[u8]> {
        if *off + len > raw.len() {
            return Err(MoyalError::FieldFile(format!(
                "truncated file: needed {} bytes at offset {}, have {}",
                len,
                off,
                raw.len()
            )));
        }
        let s = &raw[*off..*off + len];
        *off += len;
        Ok(s)
    };
    let magic = take(&mut off, 4)?;
    if magic != MAGIC {
        return Err(MoyalError::FieldFile("bad magic (not an MKF1 file)".into()));
    }
    let rd_u32 = |off: &mut usize| -> Result<u32> {
        Ok(u32::from_le_bytes(take(off, 4)?.try_into().unwrap()))
    };
    let rd_f64 = |off: &mut usize| -> Result<f64> {
        Ok(f64::from_le_bytes(take(off, 8)?.try_into().unwrap()))
    };
    let dims = rd_u32(&mut off)? as usize;
    if dims == 0 || dims > 8 {
        return Err(MoyalError::FieldFile(format!("implausible dims = {dims}")));
    }
    let n_dof = rd_u32(&mut off)? as usize;
    let hbar = rd_f64(&mut off)?;
    let mut pts = Vec::with_capacity(dims);
    for _ in 0..dims {
        pts.push(rd_u32(&mut off)? as usize);
    }
    if pts.iter().any(|p| *p != pts[0]) {
        return Err(MoyalError::FieldFile("per-axis point counts differ".into()));
    }
    let mut extents = Vec::with_capacity(dims);
    for _ in 0..dims {
        extents.push(rd_f64(&mut off)?);
    }
    let dtype = rd_u32(&mut off)?;
    if dtype != DTYPE_C128 {
        return Err(MoyalError::FieldFile(format!("unsupported dtype tag {dtype}")));
    }
    let grid = GridSpec::new(dims, pts[0], extents)
        .map_err(|e| MoyalError::FieldFile(format!("invalid header grid: {e}")))?;
    let expect = 16 * grid.len();
    if raw.len() - off != expect {
        return Err(MoyalError::FieldFile(format!(
            "payload length {} does not match header ({} expected)",
            raw.len() - off,
            expect
        )));
    }
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let base = off + 16 * i;
        let re = f64::from_le_bytes(raw[base..base + 8].try_into().unwrap());
        let im = f64::from_le_bytes(raw[base + 8..base + 16].try_into().unwrap());
        values.push(C64::new(re, im));
    }
    let field = SampledField::new(grid, values)
        .map_err(|e| MoyalError::FieldFile(format!("invalid payload: {e}")))?;
    let ctx = HbarContext::new(hbar, n_dof)
        .map_err(|e| MoyalError::FieldFile(format!("invalid context: {e}")))?;
    Ok((field, ctx))
}
