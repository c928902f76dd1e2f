//! Solver drivers for the pressure-increment equation: plain red-black GS, the
//! two-level accommodative cycle (interpolated or re-discretised coarse stencil)
//! and additive-correction V-cycles.

use crate::coarsening::{
    build_acm_hierarchy, build_gmg_hierarchy, build_ismg_hierarchy, MgHierarchy, Scheme, Transfer,
};
use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField};
use crate::metrics::{LevelKind, RunMetrics};
use crate::real::Real;
use crate::smoother::{anchor_mean, FivePoint, LinearStage, StencilKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleConfig {
    pub scheme: Scheme,
    /// Restriction factor for the two-level schemes.
    pub tile: usize,
    /// Number of levels (fine included) for ACM.
    pub depth: usize,
    pub tol_fine: f64,
    /// Coarse-level threshold, in restricted (summed) residual units.
    pub tol_coarse: f64,
    /// Cap on all sweeps of one solve, every level counted.
    pub max_total_sweeps: usize,
    pub acm_pre_smooth: usize,
    pub acm_post_smooth: usize,
    /// Fine sweeps whose residual ratio exceeds this return to the coarse level.
    pub stall_factor: f64,
}

impl Default for CycleConfig {
    fn default() -> Self {
        CycleConfig {
            scheme: Scheme::Ismg,
            tile: 16,
            depth: 5,
            tol_fine: 1e-6,
            tol_coarse: 1e-5,
            max_total_sweeps: 20000,
            acm_pre_smooth: 0,
            acm_post_smooth: 1,
            stall_factor: 0.9,
        }
    }
}

impl CycleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_fine > 0.0) {
            return Err(Error::config(format!("tol_fine must be positive, got {}", self.tol_fine)));
        }
        if self.scheme != Scheme::PlainGs && self.tol_coarse < self.tol_fine {
            return Err(Error::config(format!(
                "tol_coarse ({}) must not be below tol_fine ({})",
                self.tol_coarse, self.tol_fine
            )));
        }
        if self.max_total_sweeps == 0 {
            return Err(Error::config("max_total_sweeps must be positive"));
        }
        if !(self.stall_factor > 0.0 && self.stall_factor <= 1.0) {
            return Err(Error::config(format!(
                "stall_factor must lie in (0, 1], got {}",
                self.stall_factor
            )));
        }
        match self.scheme {
            Scheme::Ismg | Scheme::Gmg if self.tile < 2 => {
                Err(Error::config(format!("tile must be >= 2 for {}, got {}", self.scheme, self.tile)))
            }
            Scheme::Acm if self.depth < 2 => Err(Error::config(format!("ACM depth must be >= 2, got {}", self.depth))),
            Scheme::Acm if self.acm_post_smooth + self.acm_pre_smooth == 0 => {
                Err(Error::config("ACM needs at least one smoothing sweep per level"))
            }
            _ => Ok(()),
        }
    }

    /// Tile (two-level) or depth (ACM) as shown in sweep tables.
    pub fn tile_or_depth(&self) -> usize {
        match self.scheme {
            Scheme::Acm => 1 << (self.depth - 1),
            Scheme::PlainGs => 1,
            _ => self.tile,
        }
    }
}

/// Outcome of one pressure solve.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConvergenceReport {
    pub converged: bool,
    /// Sweeps on every level except the coarsest.
    pub fine_sweeps: usize,
    pub coarse_sweeps: usize,
    /// Coarse visits (two-level) or V-cycles (ACM).
    pub cycles: usize,
    pub initial_residual: f64,
    pub final_residual: f64,
}

impl ConvergenceReport {
    pub fn total_sweeps(&self) -> usize {
        self.fine_sweeps + self.coarse_sweeps
    }

    fn into_result<T>(self, x: ScalarField<T>) -> Result<(ScalarField<T>, ConvergenceReport)> {
        if self.converged {
            Ok((x, self))
        } else {
            Err(Error::NonConvergence {
                iterations: self.total_sweeps(),
                final_residual: self.final_residual,
            })
        }
    }
}

fn remove_mean<T: Real>(f: &mut ScalarField<T>) {
    let m = f.interior_mean();
    f.add_interior(-m);
}

fn five_point_of<T: Real>(stage: &LinearStage<T>) -> &FivePoint {
    match &stage.stencil {
        StencilKind::FivePointUniform(op) => op,
        StencilKind::NinePointPerCell(_) => unreachable!("finest level is always five-point"),
    }
}

fn plain_gs_inner<T: Real>(
    op: &FivePoint,
    rhs: &ScalarField<T>,
    cfg: &CycleConfig,
    metrics: &mut RunMetrics,
) -> Result<(ScalarField<T>, ConvergenceReport)> {
    let singular = op.is_singular();
    let mut b = rhs.clone();
    if singular {
        remove_mean(&mut b);
    }
    let mut x = ScalarField::zeros(op.nx, op.ny);
    let cells = op.nx * op.ny;
    let tol = T::lit(cfg.tol_fine);
    let mut report = ConvergenceReport::default();
    let mut r = op.residual_max(&b, &x);
    report.initial_residual = r.to_f64_lossy();
    while r > tol && report.fine_sweeps < cfg.max_total_sweeps {
        op.rbgs_sweep(&b, &mut x)?;
        metrics.record_sweep(LevelKind::Fine, 5, cells, cells);
        report.fine_sweeps += 1;
        r = op.residual_max(&b, &x);
    }
    if singular {
        anchor_mean(&mut x);
        r = op.residual_max(&b, &x);
    }
    report.final_residual = r.to_f64_lossy();
    report.converged = r <= tol;
    Ok((x, report))
}

/// Red-black Gauss-Seidel on the fine grid until the max residual meets `tol_fine`.
pub fn solve_plain_gs<T: Real>(
    rhs: &ScalarField<T>,
    spec: &GridSpec,
    cfg: &CycleConfig,
    metrics: &mut RunMetrics,
) -> Result<(ScalarField<T>, ConvergenceReport)> {
    rhs.check_dims(spec)?;
    let op = FivePoint::for_spec(spec);
    let (x, report) = plain_gs_inner(&op, rhs, cfg, metrics)?;
    report.into_result(x)
}

fn two_level_inner<T: Real>(
    rhs: &ScalarField<T>,
    hierarchy: &mut MgHierarchy<T>,
    coarse_points: usize,
    cfg: &CycleConfig,
    metrics: &mut RunMetrics,
) -> Result<(ScalarField<T>, ConvergenceReport)> {
    let bilinear = hierarchy
        .bilinear
        .as_ref()
        .ok_or_else(|| Error::Unsupported("two-level cycle needs a bilinear transfer".into()))?;
    let transfer = &bilinear.transfer;
    let (fine, rest) = hierarchy.levels.split_at_mut(1);
    let fine = &mut fine[0];
    let coarse = &mut rest[0];
    let op = five_point_of(fine).clone();
    let singular = op.is_singular();
    let fine_cells = op.nx * op.ny;
    let coarse_cells = coarse.cells();

    fine.rhs = rhs.clone();
    if singular {
        remove_mean(&mut fine.rhs);
    }
    fine.x.fill_interior(T::zero());
    let tol_f = T::lit(cfg.tol_fine);
    let tol_c = T::lit(cfg.tol_coarse);
    let rho = T::lit(cfg.stall_factor);
    let mut resid = ScalarField::zeros(op.nx, op.ny);
    let mut report = ConvergenceReport::default();
    let mut total = 0usize;
    let mut first = true;

    loop {
        if singular {
            anchor_mean(&mut fine.x);
        }
        let r = op.residual_into(&fine.rhs, &fine.x, &mut resid).max;
        if first {
            report.initial_residual = r.to_f64_lossy();
            first = false;
        }
        report.final_residual = r.to_f64_lossy();
        if r <= tol_f {
            report.converged = true;
            break;
        }
        if total >= cfg.max_total_sweeps {
            break;
        }

        transfer.restrict_sum_into(&resid, &mut coarse.rhs);
        metrics.record_restriction();
        if singular {
            remove_mean(&mut coarse.rhs);
        }
        coarse.x.fill_interior(T::zero());
        let mut coarse_sweeps = 0;
        while total < cfg.max_total_sweeps && coarse.residual_max() > tol_c {
            coarse.sweep()?;
            metrics.record_sweep(LevelKind::Coarse, coarse_points, coarse_cells, fine_cells);
            coarse_sweeps += 1;
            total += 1;
        }
        report.coarse_sweeps += coarse_sweeps;
        report.cycles += 1;
        if coarse_sweeps > 0 {
            bilinear.prolongate_add(&coarse.x, &mut fine.x);
            metrics.record_prolongation();
        }

        // A visit without coarse work cannot help, so stall detection is off.
        let detect_stall = coarse_sweeps > 0;
        let mut prev: Option<T> = None;
        while total < cfg.max_total_sweeps {
            op.rbgs_sweep(&fine.rhs, &mut fine.x)?;
            metrics.record_sweep(LevelKind::Fine, 5, fine_cells, fine_cells);
            report.fine_sweeps += 1;
            total += 1;
            let r = op.residual_max(&fine.rhs, &fine.x);
            if r <= tol_f {
                break;
            }
            if detect_stall {
                if let Some(p) = prev {
                    if r > rho * p {
                        break;
                    }
                }
            }
            prev = Some(r);
        }
    }
    Ok((fine.x.clone(), report))
}

/// Two-level accommodative cycle: coarse solve of the restricted residual to
/// `tol_coarse`, bilinear prolongation, fine red-black sweeps until `tol_fine`
/// or until convergence stalls (then the coarse level is revisited).
pub fn solve_two_level<T: Real>(
    rhs: &ScalarField<T>,
    hierarchy: &mut MgHierarchy<T>,
    cfg: &CycleConfig,
    metrics: &mut RunMetrics,
) -> Result<(ScalarField<T>, ConvergenceReport)> {
    check_two_level(rhs, hierarchy)?;
    let points = hierarchy.levels[1].stencil.points();
    let (x, report) = two_level_inner(rhs, hierarchy, points, cfg, metrics)?;
    report.into_result(x)
}

fn check_two_level<T: Real>(rhs: &ScalarField<T>, hierarchy: &MgHierarchy<T>) -> Result<()> {
    if !matches!(hierarchy.scheme, Scheme::Ismg | Scheme::Gmg) || hierarchy.depth() != 2 {
        return Err(Error::Unsupported(format!(
            "two-level cycle expects an ISMG or GMG hierarchy, got {} with {} levels",
            hierarchy.scheme,
            hierarchy.depth()
        )));
    }
    check_fine_dims(rhs, hierarchy)
}

fn check_fine_dims<T: Real>(rhs: &ScalarField<T>, hierarchy: &MgHierarchy<T>) -> Result<()> {
    let d = hierarchy.levels[0].dims();
    if rhs.dims() != d {
        return Err(Error::SizeMismatch {
            expected: d,
            found: rhs.dims(),
        });
    }
    Ok(())
}

fn acm_inner<T: Real>(
    rhs: &ScalarField<T>,
    hierarchy: &mut MgHierarchy<T>,
    points: &[usize],
    cfg: &CycleConfig,
    metrics: &mut RunMetrics,
) -> Result<(ScalarField<T>, ConvergenceReport)> {
    let depth = hierarchy.depth();
    let transfers: &[Transfer] = &hierarchy.transfers;
    let levels = &mut hierarchy.levels;
    let op = five_point_of(&levels[0]).clone();
    let singular = op.is_singular();
    let fine_cells = op.nx * op.ny;
    let tol_f = T::lit(cfg.tol_fine);
    let tol_c = T::lit(cfg.tol_coarse);

    levels[0].rhs = rhs.clone();
    if singular {
        remove_mean(&mut levels[0].rhs);
    }
    levels[0].x.fill_interior(T::zero());
    let mut resid: Vec<ScalarField<T>> = levels
        .iter()
        .map(|l| {
            let (a, b) = l.dims();
            ScalarField::zeros(a, b)
        })
        .collect();
    let mut report = ConvergenceReport::default();
    let mut total = 0usize;
    let mut first = true;

    let sweep = |level: &mut LinearStage<T>, k: usize, metrics: &mut RunMetrics, total: &mut usize| -> Result<()> {
        level.sweep()?;
        let kind = if k + 1 == depth { LevelKind::Coarse } else { LevelKind::Fine };
        metrics.record_sweep(kind, points[k], level.cells(), fine_cells);
        *total += 1;
        Ok(())
    };

    loop {
        if singular {
            anchor_mean(&mut levels[0].x);
        }
        let r = levels[0].stencil.residual_into(&levels[0].rhs, &levels[0].x, &mut resid[0]).max;
        if first {
            report.initial_residual = r.to_f64_lossy();
            first = false;
        }
        report.final_residual = r.to_f64_lossy();
        if r <= tol_f {
            report.converged = true;
            break;
        }
        if total >= cfg.max_total_sweeps {
            break;
        }
        report.cycles += 1;

        // descend
        for k in 0..depth - 1 {
            if k > 0 {
                for _ in 0..cfg.acm_pre_smooth {
                    sweep(&mut levels[k], k, metrics, &mut total)?;
                }
                let (l, r_out) = (&levels[k], &mut resid[k]);
                l.stencil.residual_into(&l.rhs, &l.x, r_out);
            }
            transfers[k].restrict_sum_into(&resid[k], &mut levels[k + 1].rhs);
            metrics.record_restriction();
            levels[k + 1].x.fill_interior(T::zero());
        }

        // coarsest
        let c = depth - 1;
        if singular {
            remove_mean(&mut levels[c].rhs);
        }
        while total < cfg.max_total_sweeps && levels[c].residual_max() > tol_c {
            sweep(&mut levels[c], c, metrics, &mut total)?;
            report.coarse_sweeps += 1;
        }

        // ascend
        for k in (0..depth - 1).rev() {
            let (head, tail) = levels.split_at_mut(k + 1);
            transfers[k].prolongate_constant_add(&tail[0].x, &mut head[k].x);
            metrics.record_prolongation();
            for _ in 0..cfg.acm_post_smooth {
                if total >= cfg.max_total_sweeps {
                    break;
                }
                sweep(&mut head[k], k, metrics, &mut total)?;
            }
        }
    }
    // every level above the coarsest counts as fine, as in the metrics
    report.fine_sweeps = total - report.coarse_sweeps;
    Ok((levels[0].x.clone(), report))
}

/// Additive-correction V-cycles until the fine max residual meets `tol_fine`.
///
/// Residuals are restricted by block summation, corrections added piecewise
/// constant. Sweeps on the coarsest level are accounted as coarse, all others
/// (red-black) as fine.
pub fn v_cycle_acm<T: Real>(
    rhs: &ScalarField<T>,
    hierarchy: &mut MgHierarchy<T>,
    cfg: &CycleConfig,
    metrics: &mut RunMetrics,
) -> Result<(ScalarField<T>, ConvergenceReport)> {
    if hierarchy.scheme != Scheme::Acm || hierarchy.depth() < 2 {
        return Err(Error::Unsupported("V-cycle expects an ACM hierarchy of depth >= 2".into()));
    }
    check_fine_dims(rhs, hierarchy)?;
    let points: Vec<usize> = hierarchy.levels.iter().map(|l| l.stencil.points()).collect();
    let (x, report) = acm_inner(rhs, hierarchy, &points, cfg, metrics)?;
    report.into_result(x)
}

#[derive(Debug, Clone)]
enum Backend<T> {
    Plain(FivePoint),
    TwoLevel { hierarchy: MgHierarchy<T>, coarse_points: usize },
    Acm { hierarchy: MgHierarchy<T>, points: Vec<usize> },
}

/// A pressure-increment solver built once per run for a fixed geometry.
#[derive(Debug, Clone)]
pub struct PressureSolver<T> {
    pub cfg: CycleConfig,
    fine: FivePoint,
    backend: Backend<T>,
}

impl<T: Real> PressureSolver<T> {
    pub fn new(spec: &GridSpec, cfg: CycleConfig) -> Result<Self> {
        cfg.validate()?;
        spec.validate()?;
        let backend = match cfg.scheme {
            Scheme::PlainGs => Backend::Plain(FivePoint::for_spec(spec)),
            Scheme::Ismg | Scheme::Gmg => {
                if spec.nx < 2 * cfg.tile || spec.ny < 2 * cfg.tile {
                    return Err(Error::config(format!(
                        "grid {}x{} is smaller than two tiles of {}",
                        spec.nx, spec.ny, cfg.tile
                    )));
                }
                let s = spec.with_tile(cfg.tile);
                let hierarchy = if cfg.scheme == Scheme::Ismg {
                    build_ismg_hierarchy(&s)?
                } else {
                    build_gmg_hierarchy(&s)?
                };
                let coarse_points = hierarchy.levels[1].stencil.points();
                Backend::TwoLevel { hierarchy, coarse_points }
            }
            Scheme::Acm => {
                let hierarchy = build_acm_hierarchy(spec, cfg.depth)?;
                let points = hierarchy.levels.iter().map(|l| l.stencil.points()).collect();
                Backend::Acm { hierarchy, points }
            }
        };
        Ok(PressureSolver {
            cfg,
            fine: FivePoint::for_spec(spec),
            backend,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.cfg.scheme
    }

    pub fn fine_operator(&self) -> &FivePoint {
        &self.fine
    }

    pub fn hierarchy(&self) -> Option<&MgHierarchy<T>> {
        match &self.backend {
            Backend::Plain(_) => None,
            Backend::TwoLevel { hierarchy, .. } | Backend::Acm { hierarchy, .. } => Some(hierarchy),
        }
    }

    /// Solves `A x = rhs` from a zero start. A capped solve is returned with
    /// `converged == false` rather than as an error.
    pub fn solve_report(
        &mut self,
        rhs: &ScalarField<T>,
        metrics: &mut RunMetrics,
    ) -> Result<(ScalarField<T>, ConvergenceReport)> {
        if rhs.dims() != (self.fine.nx, self.fine.ny) {
            return Err(Error::SizeMismatch {
                expected: (self.fine.nx, self.fine.ny),
                found: rhs.dims(),
            });
        }
        let cfg = self.cfg;
        match &mut self.backend {
            Backend::Plain(op) => plain_gs_inner(op, rhs, &cfg, metrics),
            Backend::TwoLevel { hierarchy, coarse_points } => {
                two_level_inner(rhs, hierarchy, *coarse_points, &cfg, metrics)
            }
            Backend::Acm { hierarchy, points } => acm_inner(rhs, hierarchy, points, &cfg, metrics),
        }
    }

    /// As [`solve_report`](Self::solve_report), failing with `NonConvergence` at the cap.
    pub fn solve(&mut self, rhs: &ScalarField<T>, metrics: &mut RunMetrics) -> Result<(ScalarField<T>, ConvergenceReport)> {
        let (x, report) = self.solve_report(rhs, metrics)?;
        report.into_result(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{BoundaryCondition, Sides};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cavity(n: usize, tile: usize) -> GridSpec {
        GridSpec::new(n, n, 1.0, tile, Sides::all(BoundaryCondition::NO_SLIP)).unwrap()
    }

    fn random_rhs(n: usize, seed: u64) -> ScalarField<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = ScalarField::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        remove_mean(&mut f);
        f
    }

    fn cfg(scheme: Scheme) -> CycleConfig {
        CycleConfig {
            scheme,
            tile: 8,
            depth: 4,
            tol_fine: 1e-8,
            tol_coarse: 1e-6,
            ..CycleConfig::default()
        }
    }

    #[test]
    fn zero_rhs_needs_no_sweeps() {
        let spec = cavity(32, 8);
        let rhs = ScalarField::<f64>::for_spec(&spec);
        for scheme in [Scheme::PlainGs, Scheme::Ismg, Scheme::Gmg, Scheme::Acm] {
            let mut m = RunMetrics::new();
            let mut s = PressureSolver::<f64>::new(&spec, cfg(scheme)).unwrap();
            let (x, rep) = s.solve(&rhs, &mut m).unwrap();
            assert!(rep.converged);
            assert_eq!(rep.total_sweeps(), 0, "{scheme}");
            assert_eq!(x.max_abs(), 0.0);
            assert_eq!(m.current().ncc_t(), 0);
        }
    }

    #[test]
    fn single_cell_dirichlet_one_sweep() {
        let bc = Sides::all(BoundaryCondition::SymmetryVelocityFixedPressure { p_wall: 0.0 });
        let spec = GridSpec::new(1, 1, 1.0, 1, bc).unwrap();
        let mut rhs = ScalarField::for_spec(&spec);
        rhs.set(0, 0, 3.0);
        let mut m = RunMetrics::new();
        let (x, rep) = solve_plain_gs(&rhs, &spec, &cfg(Scheme::PlainGs), &mut m).unwrap();
        assert_eq!(rep.fine_sweeps, 1);
        assert!((x.at(0, 0) + 3.0_f64 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn schemes_agree_with_plain_gs() {
        let spec = cavity(32, 8);
        let rhs = random_rhs(32, 7);
        let mut m = RunMetrics::new();
        let (reference, _) = solve_plain_gs(&rhs, &spec, &cfg(Scheme::PlainGs), &mut m).unwrap();
        for scheme in [Scheme::Ismg, Scheme::Gmg, Scheme::Acm] {
            let mut s = PressureSolver::<f64>::new(&spec, cfg(scheme)).unwrap();
            let (x, rep) = s.solve(&rhs, &mut m).unwrap();
            assert!(rep.converged);
            assert!(x.max_diff(&reference) < 1e-6, "{scheme}: {}", x.max_diff(&reference));
        }
    }

    #[test]
    fn converged_report_is_rechecked() {
        let spec = cavity(24, 8);
        let rhs = random_rhs(24, 3);
        let op = FivePoint::for_spec(&spec);
        for scheme in [Scheme::Ismg, Scheme::Gmg, Scheme::Acm, Scheme::PlainGs] {
            let mut m = RunMetrics::new();
            let mut s = PressureSolver::<f64>::new(&spec, cfg(scheme)).unwrap();
            let (x, rep) = s.solve(&rhs, &mut m).unwrap();
            let mut b = rhs.clone();
            remove_mean(&mut b);
            assert!(op.residual_max(&b, &x) <= 1e-8);
            assert!(rep.final_residual <= 1e-8);
        }
    }

    #[test]
    fn accounting_matches_sweeps() {
        let spec = cavity(32, 8);
        let rhs = random_rhs(32, 11);
        for scheme in [Scheme::Ismg, Scheme::Acm] {
            let mut m = RunMetrics::new();
            let mut s = PressureSolver::<f64>::new(&spec, cfg(scheme)).unwrap();
            let (_, rep) = s.solve(&rhs, &mut m).unwrap();
            let row = m.close_timestep();
            assert_eq!(row.i_c, rep.coarse_sweeps);
            assert_eq!(row.ncc_t(), 2 * row.i_f + row.i_c);
            if scheme == Scheme::Ismg {
                assert_eq!(row.i_f, rep.fine_sweeps);
            }
        }
    }

    #[test]
    fn cap_reports_nonconvergence() {
        let spec = cavity(32, 8);
        let rhs = random_rhs(32, 5);
        let c = CycleConfig {
            max_total_sweeps: 3,
            ..cfg(Scheme::PlainGs)
        };
        let mut m = RunMetrics::new();
        match solve_plain_gs(&rhs, &spec, &c, &mut m) {
            Err(Error::NonConvergence { iterations, .. }) => assert_eq!(iterations, 3),
            other => panic!("expected NonConvergence, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let bad = CycleConfig {
            tol_coarse: 1e-9,
            tol_fine: 1e-6,
            ..CycleConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let spec = cavity(16, 16);
        assert!(PressureSolver::<f64>::new(&spec, CycleConfig::default()).is_err());
    }

    #[test]
    fn wrong_hierarchy_rejected() {
        let spec = cavity(16, 4);
        let mut h = build_acm_hierarchy::<f64>(&spec, 3).unwrap();
        let rhs = ScalarField::for_spec(&spec);
        let mut m = RunMetrics::new();
        assert!(solve_two_level(&rhs, &mut h, &cfg(Scheme::Ismg), &mut m).is_err());
    }
}
