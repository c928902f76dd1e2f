//! Stencil application, residuals and Gauss-Seidel sweeps.
//!
//! Every operator here is in flux form: a row is `sum_faces w (x_nb - x_c)`, so the
//! fine five-point row has neighbour weight `+1` and centre `-(open faces)`, with a
//! homogeneous Dirichlet face contributing `-2 x_c`.

use crate::coarsening::{CoarseOperator, STENCIL_OFFSETS};
use crate::error::{Error, Result};
use crate::field::{GridSpec, PressureKind, ScalarClosure, ScalarField, Sides};
use crate::real::Real;

/// Face closure of the homogeneous fine operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceClosure {
    Neumann,
    Dirichlet,
    Periodic,
}

impl From<ScalarClosure> for FaceClosure {
    fn from(c: ScalarClosure) -> Self {
        match c {
            ScalarClosure::Neumann => FaceClosure::Neumann,
            ScalarClosure::Dirichlet(_) => FaceClosure::Dirichlet,
            ScalarClosure::Periodic => FaceClosure::Periodic,
        }
    }
}

/// Uniform five-point operator on the fine grid with per-side closures.
#[derive(Debug, Clone, PartialEq)]
pub struct FivePoint {
    pub nx: usize,
    pub ny: usize,
    pub closures: Sides<FaceClosure>,
}

impl FivePoint {
    /// The pressure-increment operator for `spec`.
    pub fn for_spec(spec: &GridSpec) -> Self {
        FivePoint {
            nx: spec.nx,
            ny: spec.ny,
            closures: spec.scalar_closures(PressureKind::Increment).map(|c| (*c).into()),
        }
    }

    pub fn is_singular(&self) -> bool {
        ![self.closures.west, self.closures.east, self.closures.south, self.closures.north]
            .contains(&FaceClosure::Dirichlet)
    }

    /// Off-diagonal sum and diagonal weight of row `(i, j)` (1-based storage indices).
    #[inline(always)]
    fn row_parts<T: Real>(&self, x: &ScalarField<T>, i: usize, j: usize) -> (T, T) {
        let a = x.raw();
        let (nx, ny) = (self.nx, self.ny);
        let one = T::one();
        let two = T::lit(2.0);
        let mut sum = T::zero();
        let mut diag = T::zero();
        let mut face = |closure: FaceClosure, inside: bool, nb: (usize, usize), wrap: (usize, usize)| {
            if inside {
                sum = sum + a[nb];
                diag = diag + one;
            } else {
                match closure {
                    FaceClosure::Neumann => {}
                    FaceClosure::Dirichlet => diag = diag + two,
                    FaceClosure::Periodic => {
                        sum = sum + a[wrap];
                        diag = diag + one;
                    }
                }
            }
        };
        face(self.closures.west, i > 1, (i.wrapping_sub(1), j), (nx, j));
        face(self.closures.east, i < nx, (i + 1, j), (1, j));
        face(self.closures.south, j > 1, (i, j.wrapping_sub(1)), (i, ny));
        face(self.closures.north, j < ny, (i, j + 1), (i, 1));
        (sum, diag)
    }

    #[inline(always)]
    fn is_edge(&self, i: usize, j: usize) -> bool {
        i == 1 || j == 1 || i == self.nx || j == self.ny
    }

    /// `(A x)` at 0-based interior cell `(i, j)`.
    pub fn apply_at<T: Real>(&self, x: &ScalarField<T>, i: usize, j: usize) -> T {
        let (s, d) = self.row_parts(x, i + 1, j + 1);
        s - d * x.at(i, j)
    }

    pub fn apply<T: Real>(&self, x: &ScalarField<T>) -> ScalarField<T> {
        ScalarField::from_fn(self.nx, self.ny, |i, j| self.apply_at(x, i, j))
    }

    /// Writes `rhs - A x` into `out` and returns its max and L2 norms.
    pub fn residual_into<T: Real>(
        &self,
        rhs: &ScalarField<T>,
        x: &ScalarField<T>,
        out: &mut ScalarField<T>,
    ) -> ResidualNorms<T> {
        let (nx, ny) = (self.nx, self.ny);
        let four = T::lit(4.0);
        let mut max = T::zero();
        let mut sq = T::zero();
        let xa = x.raw();
        let ba = rhs.raw();
        let w = xa.width();
        let xs = xa.as_slice();
        let bs = ba.as_slice();
        for j in 1..=ny {
            for i in 1..=nx {
                let r = if self.is_edge(i, j) {
                    let (s, d) = self.row_parts(x, i, j);
                    bs[j * w + i] - (s - d * xs[j * w + i])
                } else {
                    let k = j * w + i;
                    bs[k] - (xs[k - 1] + xs[k + 1] + xs[k - w] + xs[k + w] - four * xs[k])
                };
                out.raw_mut()[(i, j)] = r;
                max = max.max(r.abs());
                sq = sq + r * r;
            }
        }
        ResidualNorms { max, l2: sq.sqrt() }
    }

    /// Max-norm of `rhs - A x` without storing it.
    pub fn residual_max<T: Real>(&self, rhs: &ScalarField<T>, x: &ScalarField<T>) -> T {
        let (nx, ny) = (self.nx, self.ny);
        let four = T::lit(4.0);
        let w = x.raw().width();
        let xs = x.raw().as_slice();
        let bs = rhs.raw().as_slice();
        let mut max = T::zero();
        for j in 1..=ny {
            if j == 1 || j == ny {
                for i in 1..=nx {
                    let (s, d) = self.row_parts(x, i, j);
                    max = max.max((bs[j * w + i] - (s - d * xs[j * w + i])).abs());
                }
                continue;
            }
            for i in [1, nx] {
                let (s, d) = self.row_parts(x, i, j);
                max = max.max((bs[j * w + i] - (s - d * xs[j * w + i])).abs());
            }
            let row = j * w;
            for k in row + 2..row + nx {
                let r = bs[k] - (xs[k - 1] + xs[k + 1] + xs[k - w] + xs[k + w] - four * xs[k]);
                max = max.max(r.abs());
            }
        }
        max
    }

    /// One half-sweep over cells with `(i + j) % 2 == color` (0-based indices).
    pub fn half_sweep<T: Real>(&self, rhs: &ScalarField<T>, x: &mut ScalarField<T>, color: usize) -> Result<()> {
        let (nx, ny) = (self.nx, self.ny);
        let quarter = T::lit(0.25);
        let w = x.raw().width();
        for j in 1..=ny {
            // 1-based (i + j) has the same parity as 0-based (i - 1) + (j - 1).
            let first = 1 + ((color + j + 1) % 2);
            let edge_row = j == 1 || j == ny;
            let mut i = first;
            while i <= nx {
                if edge_row || i == 1 || i == nx {
                    let (s, d) = self.row_parts(x, i, j);
                    if d == T::zero() {
                        return Err(Error::SingularRow { i: i - 1, j: j - 1 });
                    }
                    let b = rhs.raw()[(i, j)];
                    x.raw_mut()[(i, j)] = (s - b) / d;
                } else {
                    let k = j * w + i;
                    let b = rhs.raw().as_slice()[k];
                    let xs = x.raw_mut().as_mut_slice();
                    xs[k] = (xs[k - 1] + xs[k + 1] + xs[k - w] + xs[k + w] - b) * quarter;
                }
                i += 2;
            }
        }
        Ok(())
    }

    /// Red half-sweep followed by black half-sweep.
    pub fn rbgs_sweep<T: Real>(&self, rhs: &ScalarField<T>, x: &mut ScalarField<T>) -> Result<()> {
        self.half_sweep(rhs, x, 0)?;
        self.half_sweep(rhs, x, 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualNorms<T> {
    pub max: T,
    pub l2: T,
}

/// The operator of one level of a linear solve.
#[derive(Debug, Clone, PartialEq)]
pub enum StencilKind<T> {
    FivePointUniform(FivePoint),
    NinePointPerCell(CoarseOperator<T>),
}

impl<T: Real> StencilKind<T> {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            StencilKind::FivePointUniform(op) => (op.nx, op.ny),
            StencilKind::NinePointPerCell(op) => (op.ncx, op.ncy),
        }
    }

    pub fn points(&self) -> usize {
        match self {
            StencilKind::FivePointUniform(_) => 5,
            StencilKind::NinePointPerCell(op) => op.stencil_points(),
        }
    }

    pub fn residual_into(&self, rhs: &ScalarField<T>, x: &ScalarField<T>, out: &mut ScalarField<T>) -> ResidualNorms<T> {
        match self {
            StencilKind::FivePointUniform(op) => op.residual_into(rhs, x, out),
            StencilKind::NinePointPerCell(op) => op.residual_into(rhs, x, out),
        }
    }

    pub fn residual_max(&self, rhs: &ScalarField<T>, x: &ScalarField<T>) -> T {
        match self {
            StencilKind::FivePointUniform(op) => op.residual_max(rhs, x),
            StencilKind::NinePointPerCell(op) => op.residual_max(rhs, x),
        }
    }
}

/// How a level is relaxed; fixes the synchronisation cost of one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOrder {
    /// Two half-sweeps separated by a synchronisation each.
    RedBlack,
    /// Serial lexicographic sweep, one synchronisation.
    Lexicographic,
}

impl SweepOrder {
    pub fn sync_cost(self) -> usize {
        match self {
            SweepOrder::RedBlack => 2,
            SweepOrder::Lexicographic => 1,
        }
    }
}

/// One level of a linear solve: operator, right-hand side and iterate.
#[derive(Debug, Clone)]
pub struct LinearStage<T> {
    pub stencil: StencilKind<T>,
    pub rhs: ScalarField<T>,
    pub x: ScalarField<T>,
    pub order: SweepOrder,
    pub sweeps: usize,
}

impl<T: Real> LinearStage<T> {
    pub fn new(stencil: StencilKind<T>, order: SweepOrder) -> Self {
        let (nx, ny) = stencil.dims();
        LinearStage {
            stencil,
            rhs: ScalarField::zeros(nx, ny),
            x: ScalarField::zeros(nx, ny),
            order,
            sweeps: 0,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.stencil.dims()
    }

    pub fn cells(&self) -> usize {
        let (a, b) = self.dims();
        a * b
    }

    pub fn sync_cost_per_sweep(&self) -> usize {
        self.order.sync_cost()
    }

    /// `r = rhs - A x`, returned with its max and L2 norms.
    pub fn residual(&self) -> (ScalarField<T>, ResidualNorms<T>) {
        let (nx, ny) = self.dims();
        let mut r = ScalarField::zeros(nx, ny);
        let norms = self.stencil.residual_into(&self.rhs, &self.x, &mut r);
        (r, norms)
    }

    pub fn residual_max(&self) -> T {
        self.stencil.residual_max(&self.rhs, &self.x)
    }

    /// One sweep in this stage's order.
    pub fn sweep(&mut self) -> Result<()> {
        match (&self.stencil, self.order) {
            (StencilKind::FivePointUniform(op), SweepOrder::RedBlack) => op.rbgs_sweep(&self.rhs, &mut self.x)?,
            (StencilKind::FivePointUniform(op), SweepOrder::Lexicographic) => {
                lexicographic_five_point(op, &self.rhs, &mut self.x)?
            }
            (StencilKind::NinePointPerCell(op), SweepOrder::Lexicographic) => op.gs_sweep(&self.rhs, &mut self.x)?,
            (StencilKind::NinePointPerCell(op), SweepOrder::RedBlack) => op.rb_sweep(&self.rhs, &mut self.x)?,
        }
        self.sweeps += 1;
        Ok(())
    }
}

/// Red-black sweep on a five-point stage.
pub fn rbgs_sweep<T: Real>(stage: &mut LinearStage<T>) -> Result<()> {
    if !matches!(stage.stencil, StencilKind::FivePointUniform(_)) {
        return Err(Error::Unsupported("red-black sweep expects the five-point fine stencil".into()));
    }
    let order = stage.order;
    stage.order = SweepOrder::RedBlack;
    let out = stage.sweep();
    stage.order = order;
    out
}

/// Lexicographic sweep on a nine-point coarse stage.
pub fn gs_sweep_coarse<T: Real>(stage: &mut LinearStage<T>) -> Result<()> {
    if !matches!(stage.stencil, StencilKind::NinePointPerCell(_)) {
        return Err(Error::Unsupported("coarse sweep expects a per-cell nine-point stencil".into()));
    }
    let order = stage.order;
    stage.order = SweepOrder::Lexicographic;
    let out = stage.sweep();
    stage.order = order;
    out
}

fn lexicographic_five_point<T: Real>(op: &FivePoint, rhs: &ScalarField<T>, x: &mut ScalarField<T>) -> Result<()> {
    for j in 1..=op.ny {
        for i in 1..=op.nx {
            let (s, d) = op.row_parts(x, i, j);
            if d == T::zero() {
                return Err(Error::SingularRow { i: i - 1, j: j - 1 });
            }
            x.raw_mut()[(i, j)] = (s - rhs.raw()[(i, j)]) / d;
        }
    }
    Ok(())
}

impl<T: Real> CoarseOperator<T> {
    #[inline(always)]
    fn neighbor(&self, ci: usize, cj: usize, k: usize) -> Option<(usize, usize)> {
        let (dx, dy) = STENCIL_OFFSETS[k];
        let wrap = |c: usize, d: isize, n: usize, periodic: bool| -> Option<usize> {
            let t = c as isize + d;
            if t >= 0 && (t as usize) < n {
                Some(t as usize)
            } else if periodic {
                Some(t.rem_euclid(n as isize) as usize)
            } else {
                None
            }
        };
        Some((
            wrap(ci, dx, self.ncx, self.periodic_x)?,
            wrap(cj, dy, self.ncy, self.periodic_y)?,
        ))
    }

    /// Off-diagonal sum and effective diagonal of row `(ci, cj)`; couplings that wrap
    /// back onto the cell itself are folded into the diagonal.
    #[inline]
    fn row_parts(&self, x: &ScalarField<T>, ci: usize, cj: usize) -> (T, T) {
        let row = &self.coeffs[cj * self.ncx + ci];
        let interior = ci > 0 && cj > 0 && ci + 1 < self.ncx && cj + 1 < self.ncy;
        let mut off = T::zero();
        let mut diag = row[0];
        if interior {
            let a = x.raw();
            for k in 1..9 {
                let (dx, dy) = STENCIL_OFFSETS[k];
                let v = a[((ci as isize + 1 + dx) as usize, (cj as isize + 1 + dy) as usize)];
                off = off + row[k] * v;
            }
            return (off, diag);
        }
        for k in 1..9 {
            if row[k] == T::zero() {
                continue;
            }
            match self.neighbor(ci, cj, k) {
                Some((ni, nj)) if (ni, nj) == (ci, cj) => diag = diag + row[k],
                Some((ni, nj)) => off = off + row[k] * x.at(ni, nj),
                None => {}
            }
        }
        (off, diag)
    }

    pub fn apply_at(&self, x: &ScalarField<T>, ci: usize, cj: usize) -> T {
        let (off, diag) = self.row_parts(x, ci, cj);
        off + diag * x.at(ci, cj)
    }

    pub fn apply(&self, x: &ScalarField<T>) -> ScalarField<T> {
        ScalarField::from_fn(self.ncx, self.ncy, |i, j| self.apply_at(x, i, j))
    }

    pub fn residual_into(&self, rhs: &ScalarField<T>, x: &ScalarField<T>, out: &mut ScalarField<T>) -> ResidualNorms<T> {
        let mut max = T::zero();
        let mut sq = T::zero();
        for cj in 0..self.ncy {
            for ci in 0..self.ncx {
                let r = rhs.at(ci, cj) - self.apply_at(x, ci, cj);
                out.set(ci, cj, r);
                max = max.max(r.abs());
                sq = sq + r * r;
            }
        }
        ResidualNorms { max, l2: sq.sqrt() }
    }

    pub fn residual_max(&self, rhs: &ScalarField<T>, x: &ScalarField<T>) -> T {
        let mut max = T::zero();
        for cj in 0..self.ncy {
            for ci in 0..self.ncx {
                max = max.max((rhs.at(ci, cj) - self.apply_at(x, ci, cj)).abs());
            }
        }
        max
    }

    #[inline]
    fn relax(&self, rhs: &ScalarField<T>, x: &mut ScalarField<T>, ci: usize, cj: usize) -> Result<()> {
        let (off, diag) = self.row_parts(x, ci, cj);
        if diag == T::zero() {
            return Err(Error::SingularRow { i: ci, j: cj });
        }
        x.set(ci, cj, (rhs.at(ci, cj) - off) / diag);
        Ok(())
    }

    /// Lexicographic Gauss-Seidel sweep over the full nine-point rows.
    pub fn gs_sweep(&self, rhs: &ScalarField<T>, x: &mut ScalarField<T>) -> Result<()> {
        for cj in 0..self.ncy {
            for ci in 0..self.ncx {
                self.relax(rhs, x, ci, cj)?;
            }
        }
        Ok(())
    }

    /// Two-colour sweep; exact red-black decoupling holds for five-point rows.
    pub fn rb_sweep(&self, rhs: &ScalarField<T>, x: &mut ScalarField<T>) -> Result<()> {
        for color in 0..2 {
            for cj in 0..self.ncy {
                let mut ci = (color + cj) % 2;
                while ci < self.ncx {
                    self.relax(rhs, x, ci, cj)?;
                    ci += 2;
                }
            }
        }
        Ok(())
    }
}

/// Subtracts the interior mean (removes the constant null-space component).
pub fn anchor_mean<T: Real>(x: &mut ScalarField<T>) {
    let mean = x.interior_mean();
    x.add_interior(-mean);
}
