//! Field snapshots as CSV and legacy VTK, and snapshot reading.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::mesh::{build_uniform_rect_mesh, Mesh};

pub const SNAPSHOT_HEADER: [&str; 5] = ["cell_index", "cx", "cy", "u", "c"];

/// Writes `cell_index,cx,cy,u,c` rows in cell order.
pub fn write_snapshot_csv<W: Write>(out: W, mesh: &Mesh, u: &[f64], c: &[f64]) -> Result<()> {
    let n = mesh.num_cells();
    for len in [u.len(), c.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SNAPSHOT_HEADER)?;
    for cell in mesh.cells() {
        let k = cell.index;
        w.write_record(&[
            k.to_string(),
            cell.center[0].to_string(),
            cell.center[1].to_string(),
            u[k].to_string(),
            c[k].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotData {
    pub centers: Vec<[f64; 2]>,
    pub u: Vec<f64>,
    pub c: Vec<f64>,
}

impl SnapshotData {
    /// Rebuilds the uniform grid the snapshot was written on from its cell
    /// centers.
    pub fn infer_mesh(&self) -> Result<Mesh> {
        let axis = |pick: fn(&[f64; 2]) -> f64| -> Result<(usize, (f64, f64))> {
            let mut v: Vec<f64> = self.centers.iter().map(pick).collect();
            v.sort_by(f64::total_cmp);
            v.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
            let n = v.len();
            let spacing = if n > 1 { (v[n - 1] - v[0]) / (n - 1) as f64 } else { 0.0 };
            if n == 1 {
                return Err(Error::Malformed("cannot infer cell size from a single row or column".into()));
            }
            Ok((n, (v[0] - 0.5 * spacing, v[n - 1] + 0.5 * spacing)))
        };
        let (nx, x_range) = axis(|p| p[0])?;
        let (ny, y_range) = axis(|p| p[1])?;
        if nx * ny != self.centers.len() {
            return Err(Error::Malformed(format!(
                "{} cells do not form a {nx}x{ny} grid",
                self.centers.len()
            )));
        }
        let mesh = build_uniform_rect_mesh(x_range, y_range, nx, ny)?;
        let tol = 1e-6 * ((x_range.1 - x_range.0) / nx as f64).min((y_range.1 - y_range.0) / ny as f64);
        for (cell, p) in mesh.cells().iter().zip(&self.centers) {
            if (cell.center[0] - p[0]).abs() > tol || (cell.center[1] - p[1]).abs() > tol {
                return Err(Error::Malformed(format!("cell {} is not on a uniform row-major grid", cell.index)));
            }
        }
        Ok(mesh)
    }
}

pub fn read_snapshot_csv<R: Read>(input: R) -> Result<SnapshotData> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != SNAPSHOT_HEADER {
        return Err(Error::Malformed(format!("unexpected snapshot header {:?}", header)));
    }
    let mut data = SnapshotData { centers: Vec::new(), u: Vec::new(), c: Vec::new() };
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            let v: f64 = rec[i]
                .trim()
                .parse()
                .map_err(|_| Error::Malformed(format!("row {}: bad number `{}`", line + 1, &rec[i])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Malformed(format!("row {}: non-finite value", line + 1)))
            }
        };
        let index: usize = rec[0]
            .trim()
            .parse()
            .map_err(|_| Error::Malformed(format!("row {}: bad cell index", line + 1)))?;
        if index != line {
            return Err(Error::Malformed(format!("row {} carries cell index {index}", line + 1)));
        }
        data.centers.push([num(1)?, num(2)?]);
        data.u.push(num(3)?);
        data.c.push(num(4)?);
    }
    if data.u.is_empty() {
        return Err(Error::Malformed("snapshot has no rows".into()));
    }
    Ok(data)
}

/// Legacy ASCII VTK structured-points file holding one cell scalar field.
pub fn write_vtk_structured_points<W: Write>(mut out: W, mesh: &Mesh, name: &str, field: &[f64]) -> Result<()> {
    let g = mesh
        .grid()
        .ok_or_else(|| Error::InvalidMesh("VTK structured points need a uniform grid".into()))?;
    if field.len() != mesh.num_cells() {
        return Err(Error::DimensionMismatch { expected: mesh.num_cells(), found: field.len() });
    }
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{name}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET STRUCTURED_POINTS")?;
    writeln!(out, "DIMENSIONS {} {} 1", g.nx + 1, g.ny + 1)?;
    writeln!(out, "ORIGIN {} {} 0", g.x_range.0, g.y_range.0)?;
    writeln!(out, "SPACING {} {} 1", g.dx, g.dy)?;
    writeln!(out, "CELL_DATA {}", mesh.num_cells())?;
    writeln!(out, "SCALARS {name} double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for v in field {
        writeln!(out, "{v}")?;
    }
    Ok(())
}
