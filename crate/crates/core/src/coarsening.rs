//! Coarse operators and grid transfers.
//!
//! Three ways of building the coarse equations are provided:
//!
//! * [`build_ismg_operator`] sums, over the fine faces lying on each coarse-cell
//!   boundary, the fluxes of a bilinear interpolant of the coarse-centre values.
//!   The result is a nine-point stencil.
//! * [`build_acm_hierarchy`] agglomerates fine rows over 2x2 blocks, level by level.
//! * [`build_gmg_operator`] re-discretises the five-point flux form at the coarse
//!   spacing.
//!
//! Bilinear interpolation runs between neighbouring coarse centres. Beyond the
//! outermost centres the interpolation rectangle is closed by a node on the domain
//! wall: for a Neumann side the wall node repeats the adjacent centre (zero normal
//! gradient), for a Dirichlet side it is zero, and periodic sides wrap to the
//! image centre. Short edge tiles keep their true extents, so rectangles next to
//! the padded edge are narrower.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField};
use crate::real::Real;
use crate::smoother::{FaceClosure, FivePoint, LinearStage, StencilKind, SweepOrder};

/// Stencil slot order: C, E, W, N, S, NE, NW, SE, SW.
pub const STENCIL_OFFSETS: [(isize, isize); 9] = [
    (0, 0),
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (-1, 1),
    (1, -1),
    (-1, -1),
];

pub const STENCIL_NAMES: [&str; 9] = ["C", "E", "W", "N", "S", "NE", "NW", "SE", "SW"];

fn slot(dx: isize, dy: isize) -> usize {
    STENCIL_OFFSETS
        .iter()
        .position(|&o| o == (dx, dy))
        .unwrap_or_else(|| panic!("offset ({dx}, {dy}) outside the 3x3 stencil"))
}

/// Per-coarse-cell stencil rows plus the tile geometry they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseOperator<T> {
    pub ncx: usize,
    pub ncy: usize,
    /// Row-major over coarse cells, slots ordered as [`STENCIL_OFFSETS`].
    pub coeffs: Vec<[T; 9]>,
    /// Interior width of each tile column, in cells of the finer level.
    pub tile_w: Vec<usize>,
    pub tile_h: Vec<usize>,
    /// Horizontal extents of the interpolation rectangles, west wall to east wall
    /// (`ncx + 1` entries; periodic axes repeat the wrap interval at both ends).
    pub rect_dx: Vec<f64>,
    pub rect_dy: Vec<f64>,
    pub periodic_x: bool,
    pub periodic_y: bool,
}

impl<T: Real> CoarseOperator<T> {
    fn empty(x: &CoarseAxis, y: &CoarseAxis) -> Self {
        CoarseOperator {
            ncx: x.n(),
            ncy: y.n(),
            coeffs: vec![[T::zero(); 9]; x.n() * y.n()],
            tile_w: x.tiles.clone(),
            tile_h: y.tiles.clone(),
            rect_dx: x.extents(),
            rect_dy: y.extents(),
            periodic_x: x.lo == AxisEnd::Periodic,
            periodic_y: y.lo == AxisEnd::Periodic,
        }
    }

    pub fn row(&self, ci: usize, cj: usize) -> &[T; 9] {
        &self.coeffs[cj * self.ncx + ci]
    }

    pub fn row_mut(&mut self, ci: usize, cj: usize) -> &mut [T; 9] {
        &mut self.coeffs[cj * self.ncx + ci]
    }

    fn add(&mut self, ci: usize, cj: usize, dx: isize, dy: isize, value: f64) {
        let s = slot(dx, dy);
        let row = self.row_mut(ci, cj);
        row[s] = row[s] + T::lit(value);
    }

    /// 9 if any diagonal coupling is non-zero, otherwise 5.
    pub fn stencil_points(&self) -> usize {
        let diag = self.coeffs.iter().any(|r| r[5..].iter().any(|c| *c != T::zero()));
        if diag {
            9
        } else {
            5
        }
    }

    pub fn row_sum(&self, ci: usize, cj: usize) -> T {
        self.row(ci, cj).iter().copied().sum()
    }

    /// `ci,cj,C,E,W,N,S,NE,NW,SE,SW` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ci,cj,");
        out.push_str(&STENCIL_NAMES.join(","));
        out.push('\n');
        for cj in 0..self.ncy {
            for ci in 0..self.ncx {
                let _ = write!(out, "{ci},{cj}");
                for c in self.row(ci, cj) {
                    let _ = write!(out, ",{:e}", c.to_f64_lossy());
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn cast<U: Real>(&self) -> CoarseOperator<U> {
        CoarseOperator {
            ncx: self.ncx,
            ncy: self.ncy,
            coeffs: self
                .coeffs
                .iter()
                .map(|r| r.map(|c| U::lit(c.to_f64_lossy())))
                .collect(),
            tile_w: self.tile_w.clone(),
            tile_h: self.tile_h.clone(),
            rect_dx: self.rect_dx.clone(),
            rect_dy: self.rect_dy.clone(),
            periodic_x: self.periodic_x,
            periodic_y: self.periodic_y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisEnd {
    Neumann,
    Dirichlet,
    Periodic,
}

impl From<FaceClosure> for AxisEnd {
    fn from(c: FaceClosure) -> Self {
        match c {
            FaceClosure::Neumann => AxisEnd::Neumann,
            FaceClosure::Dirichlet => AxisEnd::Dirichlet,
            FaceClosure::Periodic => AxisEnd::Periodic,
        }
    }
}

/// One axis of a tiled coarse grid: tile extents, centres and the interpolation
/// nodes between them.
///
/// Nodes carry a geometric index `k` in `-1..=n`: `0..n` are coarse centres,
/// `-1` and `n` close the axis at the walls (or are periodic images).
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseAxis {
    pub h: f64,
    pub n_fine: usize,
    pub tiles: Vec<usize>,
    pub starts: Vec<usize>,
    pub centers: Vec<f64>,
    pub lo: AxisEnd,
    pub hi: AxisEnd,
    owner: Vec<usize>,
}

impl CoarseAxis {
    pub fn new(n_fine: usize, tile: usize, h: f64, lo: AxisEnd, hi: AxisEnd) -> Self {
        Self::from_tiles(crate::field::tile_extents(n_fine, tile), h, lo, hi)
    }

    pub fn from_tiles(tiles: Vec<usize>, h: f64, lo: AxisEnd, hi: AxisEnd) -> Self {
        let mut starts = Vec::with_capacity(tiles.len());
        let mut owner = Vec::new();
        let mut s = 0;
        for (k, &w) in tiles.iter().enumerate() {
            starts.push(s);
            owner.extend(std::iter::repeat(k).take(w));
            s += w;
        }
        let centers = starts
            .iter()
            .zip(&tiles)
            .map(|(&s, &w)| (s as f64 + 0.5 * w as f64) * h)
            .collect();
        CoarseAxis {
            h,
            n_fine: s,
            tiles,
            starts,
            centers,
            lo,
            hi,
            owner,
        }
    }

    pub fn n(&self) -> usize {
        self.tiles.len()
    }

    pub fn length(&self) -> f64 {
        self.n_fine as f64 * self.h
    }

    pub fn owner(&self, fine: usize) -> usize {
        self.owner[fine]
    }

    pub fn node_pos(&self, k: isize) -> f64 {
        let n = self.n() as isize;
        if (0..n).contains(&k) {
            self.centers[k as usize]
        } else if k < 0 {
            match self.lo {
                AxisEnd::Periodic => self.centers[(n - 1) as usize] - self.length(),
                _ => 0.0,
            }
        } else {
            match self.hi {
                AxisEnd::Periodic => self.centers[0] + self.length(),
                _ => self.length(),
            }
        }
    }

    /// Geometric coarse index a node's value is taken from, or `None` for a
    /// homogeneous Dirichlet wall node. Periodic images keep their out-of-range
    /// index so stencil offsets stay geometric.
    pub fn node_source(&self, k: isize) -> Option<isize> {
        let n = self.n() as isize;
        if (0..n).contains(&k) {
            return Some(k);
        }
        let end = if k < 0 { self.lo } else { self.hi };
        match end {
            AxisEnd::Periodic => Some(k),
            AxisEnd::Neumann => Some(if k < 0 { 0 } else { n - 1 }),
            AxisEnd::Dirichlet => None,
        }
    }

    pub fn wrap(&self, g: isize) -> usize {
        g.rem_euclid(self.n() as isize) as usize
    }

    /// Interpolation interval `(k, k + 1)` holding fine cell `i`'s centre, with the
    /// centre's offset from node `k` and the interval extent.
    pub fn cell_bracket(&self, i: usize) -> Bracket {
        let pos = (i as f64 + 0.5) * self.h;
        let owner = self.owner[i] as isize;
        let k = if pos < self.centers[owner as usize] { owner - 1 } else { owner };
        self.bracket_at(k, pos)
    }

    fn bracket_at(&self, k: isize, pos: f64) -> Bracket {
        let lo = self.node_pos(k);
        Bracket {
            k,
            offset: pos - lo,
            extent: self.node_pos(k + 1) - lo,
        }
    }

    /// Interval extents from the low wall to the high wall (`n + 1` entries).
    pub fn extents(&self) -> Vec<f64> {
        (-1..self.n() as isize)
            .map(|k| self.node_pos(k + 1) - self.node_pos(k))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub k: isize,
    pub offset: f64,
    pub extent: f64,
}

fn check_extents(dx: f64, dy: f64) -> Result<()> {
    if !(dx > 0.0 && dy > 0.0) {
        return Err(Error::config(format!(
            "interpolation rectangle extents must be positive, got {dx} x {dy}"
        )));
    }
    Ok(())
}

/// Bilinear interpolation inside a `dx x dy` rectangle with corner values
/// `q11` (origin), `q21` (+x), `q12` (+y) and `q22`.
pub fn bilinear_eval(q11: f64, q21: f64, q12: f64, q22: f64, x: f64, y: f64, dx: f64, dy: f64) -> Result<f64> {
    check_extents(dx, dy)?;
    Ok((q11 * (dx - x) * (dy - y) + q21 * x * (dy - y) + q12 * (dx - x) * y + q22 * x * y) / (dx * dy))
}

/// `dp/dx` of the bilinear interpolant along the line at height `y`.
pub fn face_flux_x(q11: f64, q21: f64, q12: f64, q22: f64, y: f64, dx: f64, dy: f64) -> Result<f64> {
    check_extents(dx, dy)?;
    Ok((-q11 * (dy - y) + q21 * (dy - y) - q12 * y + q22 * y) / (dx * dy))
}

/// `dp/dy` of the bilinear interpolant along the line at abscissa `x`.
pub fn face_flux_y(q11: f64, q21: f64, q12: f64, q22: f64, x: f64, dx: f64, dy: f64) -> Result<f64> {
    check_extents(dx, dy)?;
    Ok((-q11 * (dx - x) - q21 * x + q12 * (dx - x) + q22 * x) / (dx * dy))
}

/// Corner weights `[q11, q21, q12, q22]` of a linear functional of the corners.
fn corner_weights(f: impl Fn(f64, f64, f64, f64) -> Result<f64>) -> Result<[f64; 4]> {
    Ok([f(1.0, 0.0, 0.0, 0.0)?, f(0.0, 1.0, 0.0, 0.0)?, f(0.0, 0.0, 1.0, 0.0)?, f(0.0, 0.0, 0.0, 1.0)?])
}

fn axes_for(spec: &GridSpec, tile: usize) -> (CoarseAxis, CoarseAxis) {
    let c = FivePoint::for_spec(spec).closures;
    (
        CoarseAxis::new(spec.nx, tile, spec.h, c.west.into(), c.east.into()),
        CoarseAxis::new(spec.ny, tile, spec.h, c.south.into(), c.north.into()),
    )
}

/// Adds `sign * weight` for each corner of a flux segment into row `(ci, cj)`.
#[allow(clippy::too_many_arguments)]
fn scatter_corners<T: Real>(
    op: &mut CoarseOperator<T>,
    x: &CoarseAxis,
    y: &CoarseAxis,
    row: (isize, isize),
    kx: isize,
    ky: isize,
    weights: &[f64; 4],
    sign: f64,
) {
    let (ci, cj) = (x.wrap(row.0), y.wrap(row.1));
    let corners = [(kx, ky), (kx + 1, ky), (kx, ky + 1), (kx + 1, ky + 1)];
    for (&(nx, ny), &w) in corners.iter().zip(weights) {
        if let (Some(gx), Some(gy)) = (x.node_source(nx), y.node_source(ny)) {
            op.add(ci, cj, gx - row.0, gy - row.1, sign * w);
        }
    }
}

/// Interpolated-stencil coarse operator: for every fine face segment on a coarse
/// cell boundary, the bilinear-interpolant gradient times the segment length is
/// added to the two adjacent coarse rows with opposite signs.
pub fn build_ismg_operator<T: Real>(spec: &GridSpec) -> Result<CoarseOperator<T>> {
    spec.validate()?;
    if spec.tile < 2 {
        return Err(Error::Unsupported(format!(
            "interpolated coarse stencil needs tile >= 2, got {}",
            spec.tile
        )));
    }
    let (x, y) = axes_for(spec, spec.tile);
    let mut op = CoarseOperator::empty(&x, &y);
    let h = spec.h;
    let (ncx, ncy) = (x.n() as isize, y.n() as isize);

    // Vertical coarse faces, west to east. Face line `k` separates coarse columns
    // `k - 1` and `k`; its interpolation interval is `(k - 1, k)`.
    let lines_x = if x.lo == AxisEnd::Periodic { 0..ncx } else { 0..ncx + 1 };
    for k in lines_x {
        let boundary = x.lo != AxisEnd::Periodic && (k == 0 || k == ncx);
        let end = if k == 0 { x.lo } else { x.hi };
        if boundary && end == AxisEnd::Neumann {
            continue;
        }
        let dx = x.node_pos(k) - x.node_pos(k - 1);
        for j in 0..spec.ny {
            let b = y.cell_bracket(j);
            let w = corner_weights(|a, bb, c, d| face_flux_x(a, bb, c, d, b.offset, dx, b.extent))?;
            let seg = w.map(|v| v * h);
            let cj = y.owner(j) as isize;
            if !boundary || k == ncx {
                // east face of column k - 1
                scatter_corners(&mut op, &x, &y, (k - 1, cj), k - 1, b.k, &seg, 1.0);
            }
            if !boundary || k == 0 {
                // west face of column k
                scatter_corners(&mut op, &x, &y, (k, cj), k - 1, b.k, &seg, -1.0);
            }
        }
    }

    // Horizontal coarse faces, south to north.
    let lines_y = if y.lo == AxisEnd::Periodic { 0..ncy } else { 0..ncy + 1 };
    for k in lines_y {
        let boundary = y.lo != AxisEnd::Periodic && (k == 0 || k == ncy);
        let end = if k == 0 { y.lo } else { y.hi };
        if boundary && end == AxisEnd::Neumann {
            continue;
        }
        let dy = y.node_pos(k) - y.node_pos(k - 1);
        for i in 0..spec.nx {
            let b = x.cell_bracket(i);
            let w = corner_weights(|a, bb, c, d| face_flux_y(a, bb, c, d, b.offset, b.extent, dy))?;
            let seg = w.map(|v| v * h);
            let ci = x.owner(i) as isize;
            if !boundary || k == ncy {
                scatter_corners(&mut op, &x, &y, (ci, k - 1), b.k, k - 1, &seg, 1.0);
            }
            if !boundary || k == 0 {
                scatter_corners(&mut op, &x, &y, (ci, k), b.k, k - 1, &seg, -1.0);
            }
        }
    }
    Ok(op)
}

/// Five-point flux-form operator re-discretised on the tiled coarse grid:
/// the coupling through a face is its length over the distance between the two
/// centres it separates.
pub fn build_gmg_operator<T: Real>(spec: &GridSpec) -> Result<CoarseOperator<T>> {
    spec.validate()?;
    if spec.tile < 2 {
        return Err(Error::Unsupported(format!("coarse operator needs tile >= 2, got {}", spec.tile)));
    }
    let (x, y) = axes_for(spec, spec.tile);
    let mut op = CoarseOperator::empty(&x, &y);
    let h = spec.h;
    let (ncx, ncy) = (x.n() as isize, y.n() as isize);

    let lines_x = if x.lo == AxisEnd::Periodic { 0..ncx } else { 0..ncx + 1 };
    for k in lines_x {
        let boundary = x.lo != AxisEnd::Periodic && (k == 0 || k == ncx);
        let end = if k == 0 { x.lo } else { x.hi };
        let dist = x.node_pos(k) - x.node_pos(k - 1);
        for cj in 0..ncy {
            let c = y.tiles[cj as usize] as f64 * h / dist;
            if !boundary {
                let (w, e) = (x.wrap(k - 1), x.wrap(k));
                op.add(w, cj as usize, 1, 0, c);
                op.add(w, cj as usize, 0, 0, -c);
                op.add(e, cj as usize, -1, 0, c);
                op.add(e, cj as usize, 0, 0, -c);
            } else if end == AxisEnd::Dirichlet {
                let cell = if k == 0 { 0 } else { (ncx - 1) as usize };
                op.add(cell, cj as usize, 0, 0, -c);
            }
        }
    }
    let lines_y = if y.lo == AxisEnd::Periodic { 0..ncy } else { 0..ncy + 1 };
    for k in lines_y {
        let boundary = y.lo != AxisEnd::Periodic && (k == 0 || k == ncy);
        let end = if k == 0 { y.lo } else { y.hi };
        let dist = y.node_pos(k) - y.node_pos(k - 1);
        for ci in 0..ncx {
            let c = x.tiles[ci as usize] as f64 * h / dist;
            if !boundary {
                let (s, n) = (y.wrap(k - 1), y.wrap(k));
                op.add(ci as usize, s, 0, 1, c);
                op.add(ci as usize, s, 0, 0, -c);
                op.add(ci as usize, n, 0, -1, c);
                op.add(ci as usize, n, 0, 0, -c);
            } else if end == AxisEnd::Dirichlet {
                let cell = if k == 0 { 0 } else { (ncy - 1) as usize };
                op.add(ci as usize, cell, 0, 0, -c);
            }
        }
    }
    Ok(op)
}

/// The fine five-point operator written as per-cell stencil rows.
pub fn fine_as_stencil_rows<T: Real>(spec: &GridSpec) -> CoarseOperator<T> {
    let c = FivePoint::for_spec(spec).closures;
    let x = CoarseAxis::new(spec.nx, 1, spec.h, c.west.into(), c.east.into());
    let y = CoarseAxis::new(spec.ny, 1, spec.h, c.south.into(), c.north.into());
    let mut op = CoarseOperator::empty(&x, &y);
    let (nx, ny) = (spec.nx, spec.ny);
    for j in 0..ny {
        for i in 0..nx {
            let faces = [
                (1isize, 0isize, i + 1 < nx, c.east),
                (-1, 0, i > 0, c.west),
                (0, 1, j + 1 < ny, c.north),
                (0, -1, j > 0, c.south),
            ];
            for (dx, dy, inside, closure) in faces {
                if inside || closure == FaceClosure::Periodic {
                    op.add(i, j, dx, dy, 1.0);
                    op.add(i, j, 0, 0, -1.0);
                } else if closure == FaceClosure::Dirichlet {
                    op.add(i, j, 0, 0, -2.0);
                }
            }
        }
    }
    op
}

/// Piecewise-constant agglomeration between two levels.
#[derive(Debug, Clone, PartialEq)]
pub struct Transfer {
    pub fine_nx: usize,
    pub fine_ny: usize,
    pub x: CoarseAxis,
    pub y: CoarseAxis,
}

impl Transfer {
    pub fn new(x: CoarseAxis, y: CoarseAxis) -> Self {
        Transfer {
            fine_nx: x.n_fine,
            fine_ny: y.n_fine,
            x,
            y,
        }
    }

    pub fn for_spec(spec: &GridSpec) -> Self {
        let (x, y) = axes_for(spec, spec.tile);
        Self::new(x, y)
    }

    pub fn coarse_dims(&self) -> (usize, usize) {
        (self.x.n(), self.y.n())
    }

    /// Sums fine values over each (possibly short) tile.
    pub fn restrict_sum<T: Real>(&self, fine: &ScalarField<T>) -> ScalarField<T> {
        let mut out = ScalarField::zeros(self.x.n(), self.y.n());
        self.restrict_sum_into(fine, &mut out);
        out
    }

    pub fn restrict_sum_into<T: Real>(&self, fine: &ScalarField<T>, out: &mut ScalarField<T>) {
        assert_eq!(fine.dims(), (self.fine_nx, self.fine_ny));
        out.fill_interior(T::zero());
        for j in 0..self.fine_ny {
            let cj = self.y.owner(j);
            for i in 0..self.fine_nx {
                let ci = self.x.owner(i);
                out.set(ci, cj, out.at(ci, cj) + fine.at(i, j));
            }
        }
    }

    /// `fine += P0 coarse`: each fine cell receives its parent value.
    pub fn prolongate_constant_add<T: Real>(&self, coarse: &ScalarField<T>, fine: &mut ScalarField<T>) {
        for j in 0..self.fine_ny {
            let cj = self.y.owner(j);
            for i in 0..self.fine_nx {
                let ci = self.x.owner(i);
                fine.set(i, j, fine.at(i, j) + coarse.at(ci, cj));
            }
        }
    }
}

/// Bilinear prolongation over the interpolation rectangles of a tiled grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearTransfer {
    pub transfer: Transfer,
    bx: Vec<Bracket>,
    by: Vec<Bracket>,
}

impl BilinearTransfer {
    pub fn new(transfer: Transfer) -> Self {
        let bx = (0..transfer.fine_nx).map(|i| transfer.x.cell_bracket(i)).collect();
        let by = (0..transfer.fine_ny).map(|j| transfer.y.cell_bracket(j)).collect();
        BilinearTransfer { transfer, bx, by }
    }

    pub fn for_spec(spec: &GridSpec) -> Self {
        Self::new(Transfer::for_spec(spec))
    }

    fn node_value<T: Real>(&self, coarse: &ScalarField<T>, kx: isize, ky: isize) -> f64 {
        let (x, y) = (&self.transfer.x, &self.transfer.y);
        match (x.node_source(kx), y.node_source(ky)) {
            (Some(gx), Some(gy)) => coarse.at(x.wrap(gx), y.wrap(gy)).to_f64_lossy(),
            _ => 0.0,
        }
    }

    /// Interpolated value at fine cell `(i, j)`.
    pub fn value_at<T: Real>(&self, coarse: &ScalarField<T>, i: usize, j: usize) -> f64 {
        let (bx, by) = (self.bx[i], self.by[j]);
        let q11 = self.node_value(coarse, bx.k, by.k);
        let q21 = self.node_value(coarse, bx.k + 1, by.k);
        let q12 = self.node_value(coarse, bx.k, by.k + 1);
        let q22 = self.node_value(coarse, bx.k + 1, by.k + 1);
        // extents are positive by construction of the node positions
        bilinear_eval(q11, q21, q12, q22, bx.offset, by.offset, bx.extent, by.extent)
            .expect("degenerate interpolation rectangle")
    }

    /// `fine += P coarse`.
    pub fn prolongate_add<T: Real>(&self, coarse: &ScalarField<T>, fine: &mut ScalarField<T>) {
        for j in 0..self.transfer.fine_ny {
            for i in 0..self.transfer.fine_nx {
                let v = T::lit(self.value_at(coarse, i, j));
                fine.set(i, j, fine.at(i, j) + v);
            }
        }
    }
}

/// Tile sums of `fine` on the coarse grid of `spec`.
pub fn restrict_sum<T: Real>(fine: &ScalarField<T>, spec: &GridSpec) -> Result<ScalarField<T>> {
    fine.check_dims(spec)?;
    Ok(Transfer::for_spec(spec).restrict_sum(fine))
}

/// Fine-grid increment obtained by bilinear interpolation of a coarse correction.
pub fn prolongate_bilinear<T: Real>(
    coarse: &ScalarField<T>,
    op: &CoarseOperator<T>,
    spec: &GridSpec,
) -> Result<ScalarField<T>> {
    let t = BilinearTransfer::for_spec(spec);
    if coarse.dims() != (op.ncx, op.ncy) || t.transfer.coarse_dims() != (op.ncx, op.ncy) {
        return Err(Error::SizeMismatch {
            expected: (op.ncx, op.ncy),
            found: coarse.dims(),
        });
    }
    let mut fine = ScalarField::for_spec(spec);
    t.prolongate_add(coarse, &mut fine);
    Ok(fine)
}

/// Fine-grid increment that repeats each coarse value over its tile.
pub fn prolongate_constant<T: Real>(coarse: &ScalarField<T>, spec: &GridSpec) -> Result<ScalarField<T>> {
    let t = Transfer::for_spec(spec);
    if coarse.dims() != t.coarse_dims() {
        return Err(Error::SizeMismatch {
            expected: t.coarse_dims(),
            found: coarse.dims(),
        });
    }
    let mut fine = ScalarField::for_spec(spec);
    t.prolongate_constant_add(coarse, &mut fine);
    Ok(fine)
}

/// Sums the rows of `fine` over the blocks of `transfer`, with unknowns
/// agglomerated per block (`R A P0`).
pub fn agglomerate<T: Real>(fine: &CoarseOperator<T>, transfer: &Transfer) -> CoarseOperator<T> {
    let (x, y) = (&transfer.x, &transfer.y);
    let mut op = CoarseOperator::empty(x, y);
    let parent = |axis: &CoarseAxis, g: isize| -> isize {
        let n = axis.n_fine as isize;
        if g < 0 {
            -1
        } else if g >= n {
            axis.n() as isize
        } else {
            axis.owner(g as usize) as isize
        }
    };
    for j in 0..fine.ncy {
        for i in 0..fine.ncx {
            let (pi, pj) = (x.owner(i) as isize, y.owner(j) as isize);
            for (k, &(dx, dy)) in STENCIL_OFFSETS.iter().enumerate() {
                let a = fine.row(i, j)[k];
                if a == T::zero() {
                    continue;
                }
                let (gi, gj) = (i as isize + dx, j as isize + dy);
                let out_x = gi < 0 || gi >= fine.ncx as isize;
                let out_y = gj < 0 || gj >= fine.ncy as isize;
                assert!(
                    (!out_x || fine.periodic_x) && (!out_y || fine.periodic_y),
                    "non-zero coupling leaves a non-periodic domain"
                );
                let (qi, qj) = (parent(x, gi), parent(y, gj));
                let s = slot(qi - pi, qj - pj);
                let row = op.row_mut(pi as usize, pj as usize);
                row[s] = row[s] + a;
            }
        }
    }
    op
}

/// Which coarse-equation construction a hierarchy uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    PlainGs,
    Ismg,
    Gmg,
    Acm,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::PlainGs => "PlainGS",
            Scheme::Ismg => "ISMG",
            Scheme::Gmg => "GMG",
            Scheme::Acm => "ACM",
        }
    }

    pub fn parse(s: &str) -> Option<Scheme> {
        match s.to_ascii_lowercase().as_str() {
            "plaings" | "plain_gs" | "gs" | "plain" => Some(Scheme::PlainGs),
            "ismg" => Some(Scheme::Ismg),
            "gmg" => Some(Scheme::Gmg),
            "acm" => Some(Scheme::Acm),
            _ => None,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Grid levels of a multigrid solve, finest first.
#[derive(Debug, Clone)]
pub struct MgHierarchy<T> {
    pub scheme: Scheme,
    pub levels: Vec<LinearStage<T>>,
    /// `transfers[k]` connects `levels[k]` and `levels[k + 1]`.
    pub transfers: Vec<Transfer>,
    /// Bilinear prolongation for the two-level schemes.
    pub bilinear: Option<BilinearTransfer>,
}

impl<T: Real> MgHierarchy<T> {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    fn two_level(spec: &GridSpec, scheme: Scheme, op: CoarseOperator<T>) -> Self {
        let fine = LinearStage::new(StencilKind::FivePointUniform(FivePoint::for_spec(spec)), SweepOrder::RedBlack);
        let coarse = LinearStage::new(StencilKind::NinePointPerCell(op), SweepOrder::Lexicographic);
        let bilinear = BilinearTransfer::for_spec(spec);
        MgHierarchy {
            scheme,
            levels: vec![fine, coarse],
            transfers: vec![bilinear.transfer.clone()],
            bilinear: Some(bilinear),
        }
    }
}

/// Fine level plus the interpolated-stencil coarse level.
pub fn build_ismg_hierarchy<T: Real>(spec: &GridSpec) -> Result<MgHierarchy<T>> {
    let op = build_ismg_operator(spec)?;
    Ok(MgHierarchy::two_level(spec, Scheme::Ismg, op))
}

/// Fine level plus the re-discretised five-point coarse level.
pub fn build_gmg_hierarchy<T: Real>(spec: &GridSpec) -> Result<MgHierarchy<T>> {
    let op = build_gmg_operator(spec)?;
    Ok(MgHierarchy::two_level(spec, Scheme::Gmg, op))
}

/// Additive-correction hierarchy of `depth` levels (fine included) with factor-2
/// agglomeration per level.
pub fn build_acm_hierarchy<T: Real>(spec: &GridSpec, depth: usize) -> Result<MgHierarchy<T>> {
    spec.validate()?;
    if depth < 2 {
        return Err(Error::config(format!("ACM hierarchy needs depth >= 2, got {depth}")));
    }
    let span = 1usize << (depth - 1);
    if spec.nx < span || spec.ny < span {
        return Err(Error::config(format!(
            "grid {}x{} too small for {depth} levels of 2x coarsening",
            spec.nx, spec.ny
        )));
    }
    let closures = FivePoint::for_spec(spec).closures;
    let mut levels = vec![LinearStage::new(
        StencilKind::FivePointUniform(FivePoint::for_spec(spec)),
        SweepOrder::RedBlack,
    )];
    let mut transfers = Vec::new();
    let mut current = fine_as_stencil_rows::<T>(spec);
    let mut h = spec.h;
    for level in 1..depth {
        let x = CoarseAxis::new(current.ncx, 2, h, closures.west.into(), closures.east.into());
        let y = CoarseAxis::new(current.ncy, 2, h, closures.south.into(), closures.north.into());
        let t = Transfer::new(x, y);
        let next = agglomerate(&current, &t);
        let order = if level + 1 == depth {
            SweepOrder::Lexicographic
        } else {
            SweepOrder::RedBlack
        };
        levels.push(LinearStage::new(StencilKind::NinePointPerCell(next.clone()), order));
        transfers.push(t);
        current = next;
        h *= 2.0;
    }
    Ok(MgHierarchy {
        scheme: Scheme::Acm,
        levels,
        transfers,
        bilinear: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{BoundaryCondition, Sides};

    fn spec(nx: usize, ny: usize, tile: usize, bc: Sides<BoundaryCondition>) -> GridSpec {
        GridSpec::new(nx, ny, 1.0, tile, bc).unwrap()
    }

    fn walls() -> Sides<BoundaryCondition> {
        Sides::all(BoundaryCondition::NO_SLIP)
    }

    #[test]
    fn bilinear_examples() {
        assert_eq!(bilinear_eval(3.0, 3.0, 3.0, 3.0, 0.3, 1.7, 2.0, 2.0).unwrap(), 3.0);
        assert_eq!(bilinear_eval(1.0, 2.0, 3.0, 4.0, 0.0, 0.0, 2.0, 5.0).unwrap(), 1.0);
        assert_eq!(bilinear_eval(0.0, 4.0, 8.0, 12.0, 1.0, 1.0, 2.0, 2.0).unwrap(), 6.0);
        assert!(bilinear_eval(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn face_flux_examples() {
        for y in [0.0, 0.25, 0.9] {
            assert_eq!(face_flux_x(0.0, 1.0, 0.0, 1.0, y, 1.0, 1.0).unwrap(), 1.0);
        }
        assert!(face_flux_x(2.0, 2.0, 2.0, 2.0, 0.4, 1.5, 3.0).unwrap().abs() < 1e-15);
        assert!(face_flux_y(2.0, 2.0, 2.0, 2.0, 0.4, 1.5, 3.0).unwrap().abs() < 1e-15);
        // [(-1)(1.5)0 + (1.5)4 + (-0.5)8 + (0.5)12] / 4 = 2
        assert_eq!(face_flux_x(0.0, 4.0, 8.0, 12.0, 0.5, 2.0, 2.0).unwrap(), 2.0);
        assert!(face_flux_y(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn face_flux_matches_finite_difference_of_bilinear() {
        let q = (0.3, -1.2, 2.5, 0.7);
        let (dx, dy) = (3.0, 1.75);
        for &(x, y) in &[(0.5, 0.25), (1.0, 1.0), (2.5, 1.5)] {
            let e = 1e-6;
            let fd_x = (bilinear_eval(q.0, q.1, q.2, q.3, x + e, y, dx, dy).unwrap()
                - bilinear_eval(q.0, q.1, q.2, q.3, x - e, y, dx, dy).unwrap())
                / (2.0 * e);
            let fd_y = (bilinear_eval(q.0, q.1, q.2, q.3, x, y + e, dx, dy).unwrap()
                - bilinear_eval(q.0, q.1, q.2, q.3, x, y - e, dx, dy).unwrap())
                / (2.0 * e);
            assert!((fd_x - face_flux_x(q.0, q.1, q.2, q.3, y, dx, dy).unwrap()).abs() < 1e-8);
            assert!((fd_y - face_flux_y(q.0, q.1, q.2, q.3, x, dx, dy).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn axis_nodes_and_brackets() {
        let a = CoarseAxis::new(20, 8, 1.0, AxisEnd::Neumann, AxisEnd::Dirichlet);
        assert_eq!(a.tiles, vec![8, 8, 4]);
        assert_eq!(a.centers, vec![4.0, 12.0, 18.0]);
        assert_eq!(a.extents(), vec![4.0, 8.0, 6.0, 2.0]);
        assert_eq!(a.node_source(-1), Some(0));
        assert_eq!(a.node_source(3), None);
        let b = a.cell_bracket(0);
        assert_eq!((b.k, b.offset, b.extent), (-1, 0.5, 4.0));
        let b = a.cell_bracket(4);
        assert_eq!((b.k, b.offset, b.extent), (0, 0.5, 8.0));
        let b = a.cell_bracket(19);
        assert_eq!((b.k, b.offset, b.extent), (2, 1.5, 2.0));

        let p = CoarseAxis::new(20, 8, 1.0, AxisEnd::Periodic, AxisEnd::Periodic);
        assert_eq!(p.node_pos(-1), -2.0);
        assert_eq!(p.node_pos(3), 24.0);
        assert_eq!(p.node_source(-1), Some(-1));
        assert_eq!(p.wrap(-1), 2);
    }

    #[test]
    fn ismg_constant_pressure_has_zero_row_sums() {
        let s = spec(32, 24, 8, walls());
        let op: CoarseOperator<f64> = build_ismg_operator(&s).unwrap();
        for cj in 0..op.ncy {
            for ci in 0..op.ncx {
                assert!(op.row_sum(ci, cj).abs() < 1e-12);
            }
        }
        assert_eq!(op.stencil_points(), 9);
    }

    #[test]
    fn ismg_interior_row_has_rotational_symmetry() {
        let s = spec(64, 64, 8, walls());
        let op: CoarseOperator<f64> = build_ismg_operator(&s).unwrap();
        let r = op.row(3, 4);
        let (e, w, n, so) = (r[1], r[2], r[3], r[4]);
        assert!((e - w).abs() < 1e-14 && (e - n).abs() < 1e-14 && (e - so).abs() < 1e-14);
        let d = r[5];
        assert!(r[6..].iter().all(|c| (c - d).abs() < 1e-14));
        assert!(e > 0.0 && d > 0.0 && r[0] < 0.0);
        // Hand summation over the T segments of each face, offsets d = h/2, 3h/2, ..
        // from the centre line: own face gives the side neighbour 2 * sum(T - d) / T^2
        // = 3/4, each perpendicular face takes back sum(d) / T^2 = 1/8; corners collect
        // 1/8 from two faces. Independent of T.
        assert!((e - 0.5).abs() < 1e-12, "{e}");
        assert!((d - 0.25).abs() < 1e-12, "{d}");
        assert!((r[0] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn ismg_rejects_tile_one() {
        let s = spec(8, 8, 1, walls());
        assert!(matches!(build_ismg_operator::<f64>(&s), Err(Error::Unsupported(_))));
    }

    #[test]
    fn gmg_coefficients() {
        let s = spec(64, 64, 16, walls());
        let op: CoarseOperator<f64> = build_gmg_operator(&s).unwrap();
        let r = op.row(1, 1);
        assert_eq!((r[0], r[1], r[2], r[3], r[4]), (-4.0, 1.0, 1.0, 1.0, 1.0));
        assert_eq!(op.stencil_points(), 5);
        for cj in 0..op.ncy {
            for ci in 0..op.ncx {
                assert!(op.row_sum(ci, cj).abs() < 1e-14);
            }
        }
        // 36 = 2*16 + 4: the corner cell (2, 2) is 4x4, its neighbours 16x4 / 4x16.
        let s = spec(36, 36, 16, walls());
        let op: CoarseOperator<f64> = build_gmg_operator(&s).unwrap();
        let r = op.row(2, 2);
        assert!((r[2] - 0.4).abs() < 1e-14 && (r[4] - 0.4).abs() < 1e-14);
    }

    #[test]
    fn acm_interior_row_from_summation() {
        let s = spec(16, 16, 2, walls());
        let h = build_acm_hierarchy::<f64>(&s, 3).unwrap();
        assert_eq!(h.levels.len(), 3);
        let StencilKind::NinePointPerCell(op) = &h.levels[1].stencil else {
            panic!("level 1 is a stencil-row operator")
        };
        let r = op.row(3, 3);
        assert_eq!(&r[..5], &[-8.0, 2.0, 2.0, 2.0, 2.0]);
        assert!(r[5..].iter().all(|&c| c == 0.0));
        let StencilKind::NinePointPerCell(op) = &h.levels[2].stencil else { unreachable!() };
        let r = op.row(1, 1);
        assert_eq!(&r[..5], &[-16.0, 4.0, 4.0, 4.0, 4.0]);
        for level in &h.levels[1..] {
            let StencilKind::NinePointPerCell(op) = &level.stencil else { unreachable!() };
            for cj in 0..op.ncy {
                for ci in 0..op.ncx {
                    assert_eq!(op.row_sum(ci, cj), 0.0);
                }
            }
        }
        assert_eq!(h.levels[2].order, SweepOrder::Lexicographic);
        assert_eq!(h.levels[1].order, SweepOrder::RedBlack);
    }

    #[test]
    fn acm_depth_checks() {
        let s = spec(16, 16, 2, walls());
        assert!(build_acm_hierarchy::<f64>(&s, 1).is_err());
        assert!(build_acm_hierarchy::<f64>(&s, 6).is_err());
        assert!(build_acm_hierarchy::<f64>(&s, 5).is_ok());
    }

    #[test]
    fn restriction_and_prolongation() {
        let s = spec(500, 20, 16, walls());
        let ones = ScalarField::<f64>::from_fn(500, 20, |_, _| 1.0);
        let c = restrict_sum(&ones, &s).unwrap();
        assert_eq!(c.dims(), (32, 2));
        assert_eq!(c.at(0, 0), 256.0);
        assert_eq!(c.at(31, 0), 64.0);
        assert_eq!(c.at(31, 1), 16.0);
        assert_eq!(c.interior_sum(), ones.interior_sum());

        let s = spec(16, 16, 4, walls());
        let coarse = ScalarField::<f64>::from_fn(4, 4, |i, j| ((i + j) % 2) as f64 * 3.0 - 1.0);
        let fine = prolongate_constant(&coarse, &s).unwrap();
        for j in 0..16 {
            for i in 0..16 {
                assert_eq!(fine.at(i, j), coarse.at(i / 4, j / 4));
            }
        }
        assert_eq!(fine.interior_sum(), 16.0 * coarse.interior_sum());
    }

    #[test]
    fn bilinear_prolongation_reproduces_constants_and_ramps() {
        let s = spec(32, 32, 8, walls());
        let op: CoarseOperator<f64> = build_ismg_operator(&s).unwrap();
        let c = ScalarField::from_fn(4, 4, |_, _| 2.5);
        let f = prolongate_bilinear(&c, &op, &s).unwrap();
        assert!(f.interior().all(|v| (v - 2.5).abs() < 1e-14));

        // ramp in x sampled at coarse centres (4, 12, 20, 28)
        let c = ScalarField::from_fn(4, 4, |i, _| 1.0 + 0.5 * (4.0 + 8.0 * i as f64));
        let f = prolongate_bilinear(&c, &op, &s).unwrap();
        for j in 0..32 {
            for i in 4..28 {
                let x = i as f64 + 0.5;
                assert!((f.at(i, j) - (1.0 + 0.5 * x)).abs() < 1e-12);
            }
        }

        // spot check against bilinear_eval with the quadrant's corners
        let c = ScalarField::from_fn(4, 4, |i, j| (i * 7 + j * 3) as f64 * 0.1);
        let f = prolongate_bilinear(&c, &op, &s).unwrap();
        // fine (13, 18): x = 13.5 in [12, 20], y = 18.5 in [12, 20]
        let q = bilinear_eval(c.at(1, 1), c.at(2, 1), c.at(1, 2), c.at(2, 2), 1.5, 6.5, 8.0, 8.0).unwrap();
        assert!((f.at(13, 18) - q).abs() < 1e-14);
    }

    #[test]
    fn operator_csv_dump() {
        let s = spec(16, 16, 8, walls());
        let op: CoarseOperator<f64> = build_ismg_operator(&s).unwrap();
        let csv = op.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "ci,cj,C,E,W,N,S,NE,NW,SE,SW");
        assert_eq!(lines.count(), 4);
    }
}
