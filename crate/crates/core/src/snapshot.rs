//! Binary snapshots: a single-line JSON header followed by little-endian
//! `f64` values in storage order.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::distribution::{DiscreteDistribution, VelocityGrid};
use crate::transport::{PhaseField, PhaseGrid};
use crate::{KineticsError, Result};

const VELOCITY_ORDER: &str = "row-major-z-fastest";
const PHASE_ORDER: &str = "row-major-v-fastest";
const PHASE_KIND: &str = "phase-1d1v";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VelocityHeader {
    nodes_per_axis: usize,
    vmax: f64,
    order: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseHeader {
    kind: String,
    nx: usize,
    nv: usize,
    xmax: f64,
    vmax: f64,
    order: String,
}

fn write_payload<W: Write>(w: &mut W, values: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&bytes)?;
    Ok(())
}

fn read_header_line<R: BufRead>(r: &mut R) -> Result<String> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    if !line.ends_with('\n') {
        return Err(KineticsError::Snapshot("missing header line".into()));
    }
    Ok(line)
}

fn read_payload<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)
        .map_err(|e| KineticsError::Snapshot(format!("payload shorter than {count} values: {e}")))?;
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(KineticsError::Snapshot(format!("{} trailing bytes after payload", rest.len())));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn write_velocity_snapshot<W: Write>(w: &mut W, f: &DiscreteDistribution) -> Result<()> {
    let header = VelocityHeader {
        nodes_per_axis: f.grid().nodes_per_axis(),
        vmax: f.grid().vmax(),
        order: VELOCITY_ORDER.into(),
    };
    writeln!(w, "{}", serde_json::to_string(&header).map_err(|e| KineticsError::Snapshot(e.to_string()))?)?;
    write_payload(w, f.values())
}

pub fn read_velocity_snapshot<R: BufRead>(r: &mut R) -> Result<DiscreteDistribution> {
    let line = read_header_line(r)?;
    let header: VelocityHeader =
        serde_json::from_str(line.trim_end()).map_err(|e| KineticsError::Snapshot(e.to_string()))?;
    if header.order != VELOCITY_ORDER {
        return Err(KineticsError::Snapshot(format!("unsupported order `{}`", header.order)));
    }
    let grid = VelocityGrid::new(header.vmax, header.nodes_per_axis)?;
    let values = read_payload(r, grid.len())?;
    DiscreteDistribution::new(grid, values)
}

pub fn write_phase_snapshot<W: Write>(w: &mut W, f: &PhaseField) -> Result<()> {
    let g = f.grid();
    let header = PhaseHeader {
        kind: PHASE_KIND.into(),
        nx: g.nx,
        nv: g.nv,
        xmax: g.xmax,
        vmax: g.vmax,
        order: PHASE_ORDER.into(),
    };
    writeln!(w, "{}", serde_json::to_string(&header).map_err(|e| KineticsError::Snapshot(e.to_string()))?)?;
    write_payload(w, f.values())
}

pub fn read_phase_snapshot<R: BufRead>(r: &mut R) -> Result<PhaseField> {
    let line = read_header_line(r)?;
    let header: PhaseHeader =
        serde_json::from_str(line.trim_end()).map_err(|e| KineticsError::Snapshot(e.to_string()))?;
    if header.kind != PHASE_KIND || header.order != PHASE_ORDER {
        return Err(KineticsError::Snapshot(format!(
            "unsupported phase snapshot `{}` / `{}`",
            header.kind, header.order
        )));
    }
    let grid = PhaseGrid::new(header.xmax, header.nx, header.vmax, header.nv)?;
    let values = read_payload(r, grid.len())?;
    PhaseField::new(grid, values)
}
