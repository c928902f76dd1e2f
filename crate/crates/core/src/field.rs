//! Grid geometry, ghost-ringed field storage and boundary closures.
//!
//! Index conventions (all `usize`, ghost layer at index 0):
//!
//! * [`ScalarField`] stores `(nx + 2) x (ny + 2)` values; interior cell `(i, j)`
//!   lives at `1..=nx`, `1..=ny`.
//! * `MacVelocity::u` stores `(nx + 3) x (ny + 2)` values. Face column `fi` sits at
//!   `x = (fi - 1) h`, so the west wall is `fi = 1`, the east wall `fi = nx + 1`,
//!   and cell `i` is bounded by faces `i` and `i + 1`. Columns `0` and `nx + 2` are
//!   ghost faces used by periodic closures only.
//! * `MacVelocity::v` is the transpose: `(nx + 2) x (ny + 3)`, face row `fj` at
//!   `y = (fj - 1) h`.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    West,
    East,
    South,
    North,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::West, Side::East, Side::South, Side::North];

    pub fn opposite(self) -> Side {
        match self {
            Side::West => Side::East,
            Side::East => Side::West,
            Side::South => Side::North,
            Side::North => Side::South,
        }
    }
}

/// One value per domain side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sides<T> {
    pub west: T,
    pub east: T,
    pub south: T,
    pub north: T,
}

impl<T> Sides<T> {
    pub fn get(&self, side: Side) -> &T {
        match side {
            Side::West => &self.west,
            Side::East => &self.east,
            Side::South => &self.south,
            Side::North => &self.north,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Sides<U> {
        Sides {
            west: f(&self.west),
            east: f(&self.east),
            south: f(&self.south),
            north: f(&self.north),
        }
    }
}

impl<T: Clone> Sides<T> {
    pub fn all(value: T) -> Self {
        Sides {
            west: value.clone(),
            east: value.clone(),
            south: value.clone(),
            north: value,
        }
    }
}

/// Physical boundary condition on one side of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    /// Wall moving with velocity `(u_wall, v_wall)`; the wall-normal part is
    /// imposed on the boundary faces, the tangential part through ghosts.
    DirichletVelocity { u_wall: f64, v_wall: f64 },
    /// Free-slip for velocity and a fixed pressure value on the boundary face.
    SymmetryVelocityFixedPressure { p_wall: f64 },
    Periodic,
    /// No-slip wall with an inflow window of `width` cells starting at cell
    /// `start` (0-based along the side). `velocity` is the inflow speed into the
    /// domain.
    Inlet {
        velocity: f64,
        start: usize,
        width: usize,
    },
}

impl BoundaryCondition {
    pub const NO_SLIP: BoundaryCondition = BoundaryCondition::DirichletVelocity {
        u_wall: 0.0,
        v_wall: 0.0,
    };

    pub fn is_periodic(&self) -> bool {
        matches!(self, BoundaryCondition::Periodic)
    }

    /// True when the pressure is prescribed on this side.
    pub fn fixes_pressure(&self) -> bool {
        matches!(self, BoundaryCondition::SymmetryVelocityFixedPressure { .. })
    }
}

/// Closure applied to a cell-centred scalar at one side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarClosure {
    /// Zero normal gradient.
    Neumann,
    /// Prescribed face value.
    Dirichlet(f64),
    Periodic,
}

/// Which cell-centred pressure quantity a closure set is meant for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PressureKind {
    /// The pressure itself: fixed-pressure sides carry their `p_wall`.
    Pressure,
    /// The pressure increment: fixed-pressure sides become homogeneous Dirichlet.
    Increment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PaddedDims {
    pub padded_nx: usize,
    pub padded_ny: usize,
    /// Interior width of the last tile column.
    pub last_tile_w: usize,
    /// Interior height of the last tile row.
    pub last_tile_h: usize,
}

/// Fine-grid geometry, restriction factor and boundary conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub tile: usize,
    pub bc: Sides<BoundaryCondition>,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, h: f64, tile: usize, bc: Sides<BoundaryCondition>) -> Result<Self> {
        let spec = GridSpec { nx, ny, h, tile, bc };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::config("grid must have at least one interior cell per axis"));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::config(format!("grid spacing must be positive, got {}", self.h)));
        }
        if self.tile == 0 {
            return Err(Error::config("tile must be at least 1"));
        }
        if self.bc.west.is_periodic() != self.bc.east.is_periodic() {
            return Err(Error::config("periodic must be set on both west and east or neither"));
        }
        if self.bc.south.is_periodic() != self.bc.north.is_periodic() {
            return Err(Error::config("periodic must be set on both south and north or neither"));
        }
        for side in Side::ALL {
            if let BoundaryCondition::Inlet { start, width, velocity } = *self.bc.get(side) {
                let len = self.side_len(side);
                if width == 0 {
                    return Err(Error::config(format!("{side:?} inlet width must be >= 1")));
                }
                if start + width > len {
                    return Err(Error::config(format!(
                        "{side:?} inlet [{start}, {}) exceeds side length {len}",
                        start + width
                    )));
                }
                if !velocity.is_finite() {
                    return Err(Error::config(format!("{side:?} inlet velocity is not finite")));
                }
            }
        }
        Ok(())
    }

    /// Number of boundary cells along `side`.
    pub fn side_len(&self, side: Side) -> usize {
        match side {
            Side::West | Side::East => self.ny,
            Side::South | Side::North => self.nx,
        }
    }

    pub fn periodic_x(&self) -> bool {
        self.bc.west.is_periodic()
    }

    pub fn periodic_y(&self) -> bool {
        self.bc.south.is_periodic()
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn with_tile(&self, tile: usize) -> GridSpec {
        GridSpec { tile, ..self.clone() }
    }

    /// True if no side anchors the pressure, leaving the constant mode free.
    pub fn pressure_is_singular(&self) -> bool {
        !Side::ALL.iter().any(|s| self.bc.get(*s).fixes_pressure())
    }

    pub fn scalar_closures(&self, kind: PressureKind) -> Sides<ScalarClosure> {
        self.bc.map(|bc| match *bc {
            BoundaryCondition::Periodic => ScalarClosure::Periodic,
            BoundaryCondition::SymmetryVelocityFixedPressure { p_wall } => match kind {
                PressureKind::Pressure => ScalarClosure::Dirichlet(p_wall),
                PressureKind::Increment => ScalarClosure::Dirichlet(0.0),
            },
            BoundaryCondition::DirichletVelocity { .. } | BoundaryCondition::Inlet { .. } => {
                ScalarClosure::Neumann
            }
        })
    }

    pub fn padded_dims(&self) -> PaddedDims {
        padded_dims(self.nx, self.ny, self.tile)
    }

    /// Interior widths of each tile column.
    pub fn tile_widths(&self) -> Vec<usize> {
        tile_extents(self.nx, self.tile)
    }

    /// Interior heights of each tile row.
    pub fn tile_heights(&self) -> Vec<usize> {
        tile_extents(self.ny, self.tile)
    }
}

/// Tile-aligned extents and the interior size of the last (possibly short) tile.
pub fn padded_dims(nx: usize, ny: usize, tile: usize) -> PaddedDims {
    assert!(tile >= 1, "tile must be at least 1");
    let pad = |n: usize| n.div_ceil(tile) * tile;
    let last = |n: usize| match n % tile {
        0 => tile.min(n),
        r => r,
    };
    PaddedDims {
        padded_nx: pad(nx),
        padded_ny: pad(ny),
        last_tile_w: last(nx),
        last_tile_h: last(ny),
    }
}

/// Splits `n` cells into consecutive tiles of `tile` cells; the last one may be short.
pub fn tile_extents(n: usize, tile: usize) -> Vec<usize> {
    assert!(tile >= 1, "tile must be at least 1");
    let count = n.div_ceil(tile);
    (0..count).map(|k| tile.min(n - k * tile)).collect()
}

/// Dense row-major 2D array, `(i, j)` indexed with `i` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Array2<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Copy> Array2<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Array2 {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<T> Array2<T> {
    #[inline(always)]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline(always)]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline(always)]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.width && j < self.height, "({i},{j}) out of {}x{}", self.width, self.height);
        j * self.width + i
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }
}

impl<T> Index<(usize, usize)> for Array2<T> {
    type Output = T;
    #[inline(always)]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[self.idx(i, j)]
    }
}

impl<T> IndexMut<(usize, usize)> for Array2<T> {
    #[inline(always)]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        let k = self.idx(i, j);
        &mut self.data[k]
    }
}

/// Cell-centred scalar with one ghost ring.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    nx: usize,
    ny: usize,
    values: Array2<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        ScalarField {
            nx,
            ny,
            values: Array2::filled(nx + 2, ny + 2, T::zero()),
        }
    }

    pub fn for_spec(spec: &GridSpec) -> Self {
        Self::zeros(spec.nx, spec.ny)
    }

    /// Builds a field from `f(i, j)` evaluated on 0-based interior indices; ghosts are zero.
    pub fn from_fn(nx: usize, ny: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut out = Self::zeros(nx, ny);
        for j in 0..ny {
            for i in 0..nx {
                out.values[(i + 1, j + 1)] = f(i, j);
            }
        }
        out
    }

    #[inline(always)]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline(always)]
    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Ghost-ringed storage: interior at `1..=nx`, `1..=ny`.
    #[inline(always)]
    pub fn raw(&self) -> &Array2<T> {
        &self.values
    }

    #[inline(always)]
    pub fn raw_mut(&mut self) -> &mut Array2<T> {
        &mut self.values
    }

    /// Interior value at 0-based `(i, j)`.
    #[inline(always)]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[(i + 1, j + 1)]
    }

    #[inline(always)]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.values[(i + 1, j + 1)] = value;
    }

    pub fn check_dims(&self, spec: &GridSpec) -> Result<()> {
        if (self.nx, self.ny) != (spec.nx, spec.ny) {
            return Err(Error::SizeMismatch {
                expected: (spec.nx, spec.ny),
                found: (self.nx, self.ny),
            });
        }
        Ok(())
    }

    /// Interior values in row-major order.
    pub fn interior(&self) -> impl Iterator<Item = T> + '_ {
        (1..=self.ny).flat_map(move |j| (1..=self.nx).map(move |i| self.values[(i, j)]))
    }

    pub fn interior_sum(&self) -> T {
        self.interior().sum()
    }

    pub fn interior_mean(&self) -> T {
        self.interior_sum() / T::lit((self.nx * self.ny) as f64)
    }

    pub fn max_abs(&self) -> T {
        self.interior().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn fill_interior(&mut self, value: T) {
        for j in 1..=self.ny {
            for i in 1..=self.nx {
                self.values[(i, j)] = value;
            }
        }
    }

    pub fn add_interior(&mut self, delta: T) {
        for j in 1..=self.ny {
            for i in 1..=self.nx {
                self.values[(i, j)] = self.values[(i, j)] + delta;
            }
        }
    }

    /// `self += other` over the interior.
    pub fn add_assign(&mut self, other: &ScalarField<T>) {
        assert_eq!(self.dims(), other.dims());
        for j in 1..=self.ny {
            for i in 1..=self.nx {
                self.values[(i, j)] = self.values[(i, j)] + other.values[(i, j)];
            }
        }
    }

    /// Max-norm difference over the interior.
    pub fn max_diff(&self, other: &ScalarField<T>) -> T {
        assert_eq!(self.dims(), other.dims());
        self.interior()
            .zip(other.interior())
            .fold(T::zero(), |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Staggered velocity: `u` on vertical faces, `v` on horizontal faces.
#[derive(Debug, Clone, PartialEq)]
pub struct MacVelocity<T> {
    nx: usize,
    ny: usize,
    pub u: Array2<T>,
    pub v: Array2<T>,
}

impl<T: Real> MacVelocity<T> {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        MacVelocity {
            nx,
            ny,
            u: Array2::filled(nx + 3, ny + 2, T::zero()),
            v: Array2::filled(nx + 2, ny + 3, T::zero()),
        }
    }

    pub fn for_spec(spec: &GridSpec) -> Self {
        Self::zeros(spec.nx, spec.ny)
    }

    /// Samples `fu(x, y)` at u-face centres and `fv(x, y)` at v-face centres,
    /// including ghost positions. Coordinates are physical (`h` spacing, origin at
    /// the south-west corner).
    pub fn from_fn(
        nx: usize,
        ny: usize,
        h: f64,
        fu: impl Fn(f64, f64) -> f64,
        fv: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let mut vel = Self::zeros(nx, ny);
        for j in 0..ny + 2 {
            for fi in 0..nx + 3 {
                let x = (fi as f64 - 1.0) * h;
                let y = (j as f64 - 0.5) * h;
                vel.u[(fi, j)] = T::lit(fu(x, y));
            }
        }
        for fj in 0..ny + 3 {
            for i in 0..nx + 2 {
                let x = (i as f64 - 0.5) * h;
                let y = (fj as f64 - 1.0) * h;
                vel.v[(i, fj)] = T::lit(fv(x, y));
            }
        }
        vel
    }

    #[inline(always)]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline(always)]
    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn check_dims(&self, spec: &GridSpec) -> Result<()> {
        if (self.nx, self.ny) != (spec.nx, spec.ny) {
            return Err(Error::SizeMismatch {
                expected: (spec.nx, spec.ny),
                found: (self.nx, self.ny),
            });
        }
        Ok(())
    }

    /// Largest face speed over faces that belong to the domain (ghosts excluded).
    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for j in 1..=self.ny {
            for fi in 1..=self.nx + 1 {
                m = m.max(self.u[(fi, j)].abs());
            }
        }
        for fj in 1..=self.ny + 1 {
            for i in 1..=self.nx {
                m = m.max(self.v[(i, fj)].abs());
            }
        }
        m
    }

    /// Max-norm difference over domain faces.
    pub fn max_diff(&self, other: &MacVelocity<T>) -> T {
        let mut m = T::zero();
        for j in 1..=self.ny {
            for fi in 1..=self.nx + 1 {
                m = m.max((self.u[(fi, j)] - other.u[(fi, j)]).abs());
            }
        }
        for fj in 1..=self.ny + 1 {
            for i in 1..=self.nx {
                m = m.max((self.v[(i, fj)] - other.v[(i, fj)]).abs());
            }
        }
        m
    }

    /// Kinetic energy `0.5 * sum(u^2 + v^2) h^2`, counting each distinct face once.
    pub fn kinetic_energy(&self, spec: &GridSpec) -> f64 {
        let fi_end = if spec.periodic_x() { self.nx } else { self.nx + 1 };
        let fj_end = if spec.periodic_y() { self.ny } else { self.ny + 1 };
        let mut e = 0.0;
        for j in 1..=self.ny {
            for fi in 1..=fi_end {
                e += self.u[(fi, j)].to_f64_lossy().powi(2);
            }
        }
        for fj in 1..=fj_end {
            for i in 1..=self.nx {
                e += self.v[(i, fj)].to_f64_lossy().powi(2);
            }
        }
        0.5 * e * spec.h * spec.h
    }
}

/// Fills the ghost ring of `field` from its interior according to `closures`.
pub fn apply_scalar_bc<T: Real>(
    field: &mut ScalarField<T>,
    spec: &GridSpec,
    closures: &Sides<ScalarClosure>,
) -> Result<()> {
    field.check_dims(spec)?;
    fill_scalar_ghosts(field, closures);
    Ok(())
}

pub(crate) fn fill_scalar_ghosts<T: Real>(field: &mut ScalarField<T>, closures: &Sides<ScalarClosure>) {
    let (nx, ny) = field.dims();
    let a = field.raw_mut();
    let ghost = |closure: ScalarClosure, inner: T, wrap: T| match closure {
        ScalarClosure::Neumann => inner,
        ScalarClosure::Dirichlet(value) => T::lit(2.0 * value) - inner,
        ScalarClosure::Periodic => wrap,
    };
    for j in 1..=ny {
        a[(0, j)] = ghost(closures.west, a[(1, j)], a[(nx, j)]);
        a[(nx + 1, j)] = ghost(closures.east, a[(nx, j)], a[(1, j)]);
    }
    for i in 0..=nx + 1 {
        a[(i, 0)] = ghost(closures.south, a[(i, 1)], a[(i, ny)]);
        a[(i, ny + 1)] = ghost(closures.north, a[(i, ny)], a[(i, 1)]);
    }
}

/// Applies velocity boundary conditions: wall-normal faces, tangential ghosts,
/// periodic copies and inlet windows.
pub fn apply_velocity_bc<T: Real>(vel: &mut MacVelocity<T>, spec: &GridSpec) -> Result<()> {
    vel.check_dims(spec)?;
    fill_velocity_bc(vel, spec, true);
    Ok(())
}

/// Like [`apply_velocity_bc`], but with `set_open_normals == false` the normal
/// faces on fixed-pressure sides keep their current (pressure-corrected) values.
pub(crate) fn fill_velocity_bc<T: Real>(vel: &mut MacVelocity<T>, spec: &GridSpec, set_open_normals: bool) {
    let (nx, ny) = (vel.nx, vel.ny);
    let zero = T::zero();

    // x sides: normal u on face columns 1 / nx+1, tangential v ghosts in columns 0 / nx+1.
    for side in [Side::West, Side::East] {
        let (wall, inner, vg, vi) = if side == Side::West {
            (1, 2, 0, 1)
        } else {
            (nx + 1, nx, nx + 1, nx)
        };
        match *spec.bc.get(side) {
            BoundaryCondition::DirichletVelocity { u_wall, v_wall } => {
                for j in 0..ny + 2 {
                    vel.u[(wall, j)] = T::lit(u_wall);
                }
                for fj in 0..ny + 3 {
                    vel.v[(vg, fj)] = T::lit(2.0 * v_wall) - vel.v[(vi, fj)];
                }
            }
            BoundaryCondition::SymmetryVelocityFixedPressure { .. } => {
                if set_open_normals {
                    for j in 0..ny + 2 {
                        vel.u[(wall, j)] = vel.u[(inner, j)];
                    }
                }
                for fj in 0..ny + 3 {
                    vel.v[(vg, fj)] = vel.v[(vi, fj)];
                }
            }
            BoundaryCondition::Inlet { velocity, start, width } => {
                let sign = if side == Side::West { 1.0 } else { -1.0 };
                for j in 0..ny + 2 {
                    let inside = j >= start + 1 && j <= start + width;
                    vel.u[(wall, j)] = if inside { T::lit(sign * velocity) } else { zero };
                }
                for fj in 0..ny + 3 {
                    vel.v[(vg, fj)] = -vel.v[(vi, fj)];
                }
            }
            BoundaryCondition::Periodic => {
                if side == Side::West {
                    for j in 0..ny + 2 {
                        vel.u[(nx + 1, j)] = vel.u[(1, j)];
                        vel.u[(0, j)] = vel.u[(nx, j)];
                        vel.u[(nx + 2, j)] = vel.u[(2, j)];
                    }
                    for fj in 0..ny + 3 {
                        vel.v[(0, fj)] = vel.v[(nx, fj)];
                        vel.v[(nx + 1, fj)] = vel.v[(1, fj)];
                    }
                }
            }
        }
    }

    // y sides: normal v on face rows 1 / ny+1, tangential u ghosts in rows 0 / ny+1.
    for side in [Side::South, Side::North] {
        let (wall, inner, ug, ui) = if side == Side::South {
            (1, 2, 0, 1)
        } else {
            (ny + 1, ny, ny + 1, ny)
        };
        match *spec.bc.get(side) {
            BoundaryCondition::DirichletVelocity { u_wall, v_wall } => {
                for i in 0..nx + 2 {
                    vel.v[(i, wall)] = T::lit(v_wall);
                }
                for fi in 0..nx + 3 {
                    vel.u[(fi, ug)] = T::lit(2.0 * u_wall) - vel.u[(fi, ui)];
                }
            }
            BoundaryCondition::SymmetryVelocityFixedPressure { .. } => {
                if set_open_normals {
                    for i in 0..nx + 2 {
                        vel.v[(i, wall)] = vel.v[(i, inner)];
                    }
                }
                for fi in 0..nx + 3 {
                    vel.u[(fi, ug)] = vel.u[(fi, ui)];
                }
            }
            BoundaryCondition::Inlet { velocity, start, width } => {
                let sign = if side == Side::South { 1.0 } else { -1.0 };
                for i in 0..nx + 2 {
                    let inside = i >= start + 1 && i <= start + width;
                    vel.v[(i, wall)] = if inside { T::lit(sign * velocity) } else { zero };
                }
                for fi in 0..nx + 3 {
                    vel.u[(fi, ug)] = -vel.u[(fi, ui)];
                }
            }
            BoundaryCondition::Periodic => {
                if side == Side::South {
                    for i in 0..nx + 2 {
                        vel.v[(i, ny + 1)] = vel.v[(i, 1)];
                        vel.v[(i, 0)] = vel.v[(i, ny)];
                        vel.v[(i, ny + 2)] = vel.v[(i, 2)];
                    }
                    for fi in 0..nx + 3 {
                        vel.u[(fi, 0)] = vel.u[(fi, ny)];
                        vel.u[(fi, ny + 1)] = vel.u[(fi, 1)];
                    }
                }
            }
        }
    }

    // Wall-normal faces are exact: re-impose x-side normals over the y ghost rows
    // and vice versa so corners agree with both closures.
    for side in [Side::West, Side::East] {
        let wall = if side == Side::West { 1 } else { nx + 1 };
        match *spec.bc.get(side) {
            BoundaryCondition::DirichletVelocity { u_wall, .. } => {
                for j in 1..=ny {
                    vel.u[(wall, j)] = T::lit(u_wall);
                }
            }
            BoundaryCondition::Inlet { velocity, start, width } => {
                let sign = if side == Side::West { 1.0 } else { -1.0 };
                for j in 1..=ny {
                    let inside = j >= start + 1 && j <= start + width;
                    vel.u[(wall, j)] = if inside { T::lit(sign * velocity) } else { zero };
                }
            }
            _ => {}
        }
    }
}
