//! Field snapshots: a compact little-endian binary layout and a CSV view.
//!
//! Binary layout: `u64 n`, `f64 h`, `f64 c`, `u64 components`, then
//! `n³ · components` `f64` values, point by point in lattice order with the
//! components of each point adjacent.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarFieldGrid, Vec3, VectorFieldGrid};

/// A lattice field with 1 or 3 components per point.
#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    Scalar(ScalarFieldGrid),
    Vector(VectorFieldGrid),
}

impl Snapshot {
    pub fn spec(&self) -> &GridSpec {
        match self {
            Snapshot::Scalar(f) => f.spec(),
            Snapshot::Vector(f) => f.spec(),
        }
    }

    pub fn components(&self) -> usize {
        match self {
            Snapshot::Scalar(_) => 1,
            Snapshot::Vector(_) => 3,
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Snapshot(e.to_string())
}

pub fn write_binary(w: &mut impl Write, s: &Snapshot) -> Result<()> {
    let spec = s.spec();
    w.write_all(&(spec.n() as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&spec.h().to_le_bytes()).map_err(io)?;
    w.write_all(&spec.c().to_le_bytes()).map_err(io)?;
    w.write_all(&(s.components() as u64).to_le_bytes()).map_err(io)?;
    let mut buf = Vec::with_capacity(spec.len() * s.components() * 8);
    match s {
        Snapshot::Scalar(f) => f.values().iter().for_each(|v| buf.extend_from_slice(&v.to_le_bytes())),
        Snapshot::Vector(f) => f.values().iter().flatten().for_each(|v| buf.extend_from_slice(&v.to_le_bytes())),
    }
    w.write_all(&buf).map_err(io)
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|_| Error::Snapshot("truncated header".into()))?;
    Ok(u64::from_le_bytes(b))
}

/// Reads a snapshot written by [`write_binary`]; trailing bytes are an error.
pub fn read_binary(r: &mut impl Read) -> Result<Snapshot> {
    let n = read_u64(r)?;
    let h = f64::from_bits(read_u64(r)?);
    let c = f64::from_bits(read_u64(r)?);
    let comps = read_u64(r)?;
    if comps != 1 && comps != 3 {
        return Err(Error::Snapshot(format!("unsupported component count {comps}")));
    }
    let n = usize::try_from(n).map_err(|_| Error::Snapshot("grid size overflows".into()))?;
    let spec = GridSpec::with_c(n, h, c).map_err(|e| Error::Snapshot(e.to_string()))?;
    let count = spec
        .len()
        .checked_mul(comps as usize * 8)
        .ok_or_else(|| Error::Snapshot("payload size overflows".into()))?;
    let mut payload = Vec::new();
    r.take(count as u64 + 1).read_to_end(&mut payload).map_err(io)?;
    if payload.len() != count {
        return Err(Error::Snapshot(format!("expected {count} payload bytes, found {}", payload.len().min(count + 1))));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
        .collect();
    let snap = if comps == 1 {
        Snapshot::Scalar(ScalarFieldGrid::from_values(spec, values).map_err(|e| Error::Snapshot(e.to_string()))?)
    } else {
        let v: Vec<Vec3> = values.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Snapshot::Vector(VectorFieldGrid::from_values(spec, v).map_err(|e| Error::Snapshot(e.to_string()))?)
    };
    Ok(snap)
}

/// One row per lattice point: `x,y,z,f` or `x,y,z,fx,fy,fz`, all in `{:.16e}`.
pub fn write_csv(w: &mut impl Write, s: &Snapshot) -> Result<()> {
    let spec = s.spec();
    let header = match s {
        Snapshot::Scalar(_) => "x,y,z,f",
        Snapshot::Vector(_) => "x,y,z,fx,fy,fz",
    };
    writeln!(w, "{header}").map_err(io)?;
    for i in 0..spec.len() {
        let p = spec.position(i);
        write!(w, "{:.16e},{:.16e},{:.16e}", p[0], p[1], p[2]).map_err(io)?;
        match s {
            Snapshot::Scalar(f) => writeln!(w, ",{:.16e}", f.values()[i]),
            Snapshot::Vector(f) => {
                let v = f.values()[i];
                writeln!(w, ",{:.16e},{:.16e},{:.16e}", v[0], v[1], v[2])
            }
        }
        .map_err(io)?;
    }
    Ok(())
}
