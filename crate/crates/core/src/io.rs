//! Snapshot writers: legacy ASCII VTK and flat CSV.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{GridSpec, MacVelocity, ScalarField};
use crate::real::Real;

/// Velocity interpolated to cell centres.
pub fn cell_velocity<T: Real>(vel: &MacVelocity<T>) -> (ScalarField<T>, ScalarField<T>) {
    let half = T::lit(0.5);
    let (nx, ny) = (vel.nx(), vel.ny());
    let u = ScalarField::from_fn(nx, ny, |i, j| half * (vel.u[(i + 1, j + 1)] + vel.u[(i + 2, j + 1)]));
    let v = ScalarField::from_fn(nx, ny, |i, j| half * (vel.v[(i + 1, j + 1)] + vel.v[(i + 1, j + 2)]));
    (u, v)
}

/// Legacy structured-points VTK with cell data `p` and `velocity`.
pub fn vtk_string<T: Real>(spec: &GridSpec, p: &ScalarField<T>, vel: &MacVelocity<T>, title: &str) -> Result<String> {
    p.check_dims(spec)?;
    vel.check_dims(spec)?;
    let (nx, ny, h) = (spec.nx, spec.ny, spec.h);
    let (u, v) = cell_velocity(vel);
    let mut s = String::with_capacity(40 * nx * ny);
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{}", title.lines().next().unwrap_or(""));
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET STRUCTURED_POINTS");
    let _ = writeln!(s, "DIMENSIONS {} {} 1", nx + 1, ny + 1);
    let _ = writeln!(s, "ORIGIN 0 0 0");
    let _ = writeln!(s, "SPACING {h} {h} 1");
    let _ = writeln!(s, "CELL_DATA {}", nx * ny);
    let _ = writeln!(s, "SCALARS p double 1");
    let _ = writeln!(s, "LOOKUP_TABLE default");
    for j in 0..ny {
        for i in 0..nx {
            let _ = writeln!(s, "{:e}", p.at(i, j).to_f64_lossy());
        }
    }
    let _ = writeln!(s, "VECTORS velocity double");
    for j in 0..ny {
        for i in 0..nx {
            let _ = writeln!(s, "{:e} {:e} 0", u.at(i, j).to_f64_lossy(), v.at(i, j).to_f64_lossy());
        }
    }
    Ok(s)
}

pub fn write_vtk<T: Real>(path: &Path, spec: &GridSpec, p: &ScalarField<T>, vel: &MacVelocity<T>) -> Result<()> {
    let s = vtk_string(spec, p, vel, "ismg snapshot")?;
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// `nx,ny,h` header line, its values, then `ny` rows of `nx` values (row-major,
/// south row first).
pub fn scalar_csv<T: Real>(field: &ScalarField<T>, h: f64) -> String {
    let (nx, ny) = field.dims();
    let mut s = String::with_capacity(16 * nx * ny + 32);
    let _ = writeln!(s, "nx,ny,h");
    let _ = writeln!(s, "{nx},{ny},{h}");
    for j in 0..ny {
        for i in 0..nx {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{:e}", field.at(i, j).to_f64_lossy());
        }
        s.push('\n');
    }
    s
}

pub fn write_scalar_csv<T: Real>(path: &Path, field: &ScalarField<T>, h: f64) -> Result<()> {
    std::fs::write(path, scalar_csv(field, h)).map_err(|e| Error::io(path, e))
}

/// Parses the output of [`scalar_csv`].
pub fn read_scalar_csv(text: &str) -> Result<(ScalarField<f64>, f64)> {
    let bad = |m: &str| Error::config(format!("scalar csv: {m}"));
    let mut lines = text.lines();
    if lines.next() != Some("nx,ny,h") {
        return Err(bad("missing header"));
    }
    let dims: Vec<&str> = lines.next().ok_or_else(|| bad("missing dimensions"))?.split(',').collect();
    if dims.len() != 3 {
        return Err(bad("dimension line needs nx,ny,h"));
    }
    let nx: usize = dims[0].parse().map_err(|_| bad("nx"))?;
    let ny: usize = dims[1].parse().map_err(|_| bad("ny"))?;
    let h: f64 = dims[2].parse().map_err(|_| bad("h"))?;
    let mut f = ScalarField::zeros(nx, ny);
    for j in 0..ny {
        let row = lines.next().ok_or_else(|| bad("missing row"))?;
        let vals: Vec<&str> = row.split(',').collect();
        if vals.len() != nx {
            return Err(bad("row length"));
        }
        for (i, v) in vals.iter().enumerate() {
            f.set(i, j, v.parse().map_err(|_| bad("value"))?);
        }
    }
    Ok((f, h))
}
