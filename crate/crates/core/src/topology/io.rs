//! Mask persistence: a raw cell-occupancy file, a JSON geometry sidecar
//! and a PGM rendering for eyeballing slices.
//!
//! Binary layout (little-endian throughout):
//!
//! ```text
//! offset 0   u32  magic 0x4B53414D ("MASK")
//! offset 4   u32  nx
//! offset 8   u32  ny
//! offset 12  u32  nz   (0 marks a 2-D mask)
//! offset 16  one byte per cell, 0 or 1, x-fastest order
//! ```
//!
//! The sidecar records the grid geometry (`dimension`, `dims`, `origin`,
//! `spacing`) plus the cell count as a cross-check. Reading requires both
//! files and verifies they agree.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde_json::json;

use super::{CellMask, GridSpec, TopologyError};
use crate::real::Real;

const MAGIC: u32 = 0x4B53_414D;

/// Writes the raw mask and its geometry sidecar.
pub fn write_mask<T: Real>(
    mask: &CellMask<T>,
    bin_path: &Path,
    json_path: &Path,
) -> Result<(), TopologyError> {
    let grid = mask.grid();
    let dims = grid.dims();
    let nz = if grid.dimension() == 3 { dims[2] as u32 } else { 0 };
    let mut bytes = Vec::with_capacity(16 + grid.len());
    bytes.extend_from_slice(&MAGIC.to_le_bytes());
    bytes.extend_from_slice(&(dims[0] as u32).to_le_bytes());
    bytes.extend_from_slice(&(dims[1] as u32).to_le_bytes());
    bytes.extend_from_slice(&nz.to_le_bytes());
    bytes.extend(mask.bits().iter().map(|&b| b as u8));
    fs::write(bin_path, bytes)?;

    let sidecar = json!({
        "dimension": grid.dimension(),
        "dims": dims,
        "origin": grid.origin().iter().map(|&c| to_f64(c)).collect::<Vec<_>>(),
        "spacing": to_f64(grid.spacing()),
        "cells_in_mask": mask.count(),
    });
    let mut file = fs::File::create(json_path)?;
    serde_json::to_writer_pretty(&mut file, &sidecar)
        .map_err(|e| TopologyError::Format(e.to_string()))?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Reads a mask written by [`write_mask`], verifying the binary header
/// against the sidecar.
pub fn read_mask<T: Real>(bin_path: &Path, json_path: &Path) -> Result<CellMask<T>, TopologyError> {
    let bytes = fs::read(bin_path)?;
    if bytes.len() < 16 {
        return Err(TopologyError::Format("binary mask shorter than its header".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap());
    if word(0) != MAGIC {
        return Err(TopologyError::Format(format!(
            "bad magic 0x{:08X}, expected 0x{MAGIC:08X}",
            word(0)
        )));
    }
    let (nx, ny, nz) = (word(1) as usize, word(2) as usize, word(3) as usize);
    let bin_dims: Vec<usize> = if nz == 0 { vec![nx, ny] } else { vec![nx, ny, nz] };

    let sidecar: serde_json::Value = serde_json::from_slice(&fs::read(json_path)?)
        .map_err(|e| TopologyError::Format(format!("sidecar: {e}")))?;
    let side_dims: Vec<usize> = as_array(&sidecar, "dims")?
        .iter()
        .map(|v| v.as_u64().map(|n| n as usize))
        .collect::<Option<_>>()
        .ok_or_else(|| TopologyError::Format("sidecar: dims must be integers".into()))?;
    if side_dims != bin_dims {
        return Err(TopologyError::Format(format!(
            "sidecar dims {side_dims:?} disagree with binary header {bin_dims:?}"
        )));
    }
    let origin: Vec<T> = as_array(&sidecar, "origin")?
        .iter()
        .map(|v| v.as_f64().and_then(T::from))
        .collect::<Option<_>>()
        .ok_or_else(|| TopologyError::Format("sidecar: origin must be numbers".into()))?;
    let spacing = sidecar
        .get("spacing")
        .and_then(|v| v.as_f64())
        .and_then(T::from)
        .ok_or_else(|| TopologyError::Format("sidecar: missing numeric spacing".into()))?;

    let grid = GridSpec::new(&bin_dims, &origin, spacing)?;
    let cell_bytes = &bytes[16..];
    if cell_bytes.len() != grid.len() {
        return Err(TopologyError::Format(format!(
            "expected {} cell bytes, found {}",
            grid.len(),
            cell_bytes.len()
        )));
    }
    let mut bits = Vec::with_capacity(cell_bytes.len());
    for (i, &b) in cell_bytes.iter().enumerate() {
        match b {
            0 => bits.push(false),
            1 => bits.push(true),
            other => {
                return Err(TopologyError::Format(format!(
                    "cell byte {i} is {other}, expected 0 or 1"
                )))
            }
        }
    }
    let mask = CellMask::from_bits(grid, bits)?;
    if let Some(n) = sidecar.get("cells_in_mask").and_then(|v| v.as_u64()) {
        if n as usize != mask.count() {
            return Err(TopologyError::Format(format!(
                "sidecar records {n} mask cells, binary holds {}",
                mask.count()
            )));
        }
    }
    Ok(mask)
}

fn as_array<'a>(
    value: &'a serde_json::Value,
    key: &str,
) -> Result<&'a Vec<serde_json::Value>, TopologyError> {
    value
        .get(key)
        .and_then(|v| v.as_array())
        .ok_or_else(|| TopologyError::Format(format!("sidecar: missing array '{key}'")))
}

fn to_f64<T: Real>(x: T) -> f64 {
    num_traits::cast(x).expect("Real scalars fit in f64")
}

/// Renders a 2-D mask, or one z-slice of a 3-D mask, as a binary PGM
/// (P5, maxval 255, mask cells white). Rows run from the top of the image,
/// which corresponds to the largest y, so the picture is in the usual
/// mathematical orientation.
pub fn write_slice_pgm<T: Real>(
    mask: &CellMask<T>,
    path: &Path,
    z_slice: Option<usize>,
) -> Result<(), TopologyError> {
    let grid = mask.grid();
    let dims = grid.dims();
    let (nx, ny) = (dims[0], dims[1]);
    let iz = match (grid.dimension(), z_slice) {
        (2, None) => 0,
        (2, Some(index)) => return Err(TopologyError::SliceOutOfRange { index, cells: 1 }),
        (3, Some(index)) if index < dims[2] => index,
        (3, other) => {
            return Err(TopologyError::SliceOutOfRange {
                index: other.unwrap_or(dims[2]),
                cells: dims[2],
            })
        }
        _ => unreachable!("grids are 2- or 3-dimensional"),
    };
    let mut bytes = Vec::with_capacity(32 + nx * ny);
    bytes.extend_from_slice(format!("P5\n{nx} {ny}\n255\n").as_bytes());
    for iy in (0..ny).rev() {
        for ix in 0..nx {
            let idx = ix + nx * (iy + ny * iz);
            bytes.push(if mask.get(idx) { 255 } else { 0 });
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}
