//! Benchmark setups (shear-driven cavity, lid-driven cavity, jet, channel of
//! jets) and the parameter-sweep harness.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;

use log::info;

use crate::coarsening::Scheme;
use crate::cycles::{CycleConfig, PressureSolver};
use crate::error::{Error, Result};
use crate::field::{BoundaryCondition, GridSpec, Sides};
use crate::metrics::{MetricsSummary, RunMetrics, StepMetrics};
use crate::projection::{max_divergence, step, FluidState};
use crate::real::Real;

/// Scheme-independent parameter axes of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxes {
    /// Restriction factors for the two-level schemes.
    pub tiles: Vec<usize>,
    /// Hierarchy depths for ACM.
    pub depths: Vec<usize>,
    pub tol_coarse: Vec<f64>,
}

impl SweepAxes {
    /// ACM depths matching each tile (`2^(depth-1) = tile`).
    pub fn matched(tiles: &[usize], tol_coarse: &[f64]) -> Self {
        SweepAxes {
            tiles: tiles.to_vec(),
            depths: tiles.iter().map(|t| t.trailing_zeros() as usize + 1).collect(),
            tol_coarse: tol_coarse.to_vec(),
        }
    }
}

/// Stopping rule for runs towards a steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyCriterion {
    /// Largest face-velocity change per step below which the run stops.
    pub max_change: f64,
    /// Check every this many steps.
    pub check_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkCase {
    pub name: String,
    pub spec: GridSpec,
    pub nu: f64,
    pub v0: f64,
    pub dt: f64,
    pub steps: usize,
    /// Steps averaged in sweep rows.
    pub window: Range<usize>,
    pub axes: SweepAxes,
    pub tol_fine: f64,
    pub max_total_sweeps: usize,
    /// Keep running when a step hits the sweep cap.
    pub accept_capped: bool,
    pub steady: Option<SteadyCriterion>,
}

impl BenchmarkCase {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.axes.tol_coarse.is_empty() || (self.axes.tiles.is_empty() && self.axes.depths.is_empty()) {
            return Err(Error::config(format!("case {}: sweep axes must not be empty", self.name)));
        }
        if self.window.start > self.window.end || self.window.end > self.steps {
            return Err(Error::config(format!(
                "case {}: window {:?} does not fit in {} steps",
                self.name, self.window, self.steps
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::config(format!("case {}: dt must be positive", self.name)));
        }
        Ok(())
    }

    /// Solver settings for one sweep cell.
    pub fn cycle_config(&self, scheme: Scheme, tile_or_depth: usize, tol_coarse: f64) -> CycleConfig {
        let mut cfg = CycleConfig {
            scheme,
            tol_fine: self.tol_fine,
            tol_coarse,
            max_total_sweeps: self.max_total_sweeps,
            ..CycleConfig::default()
        };
        match scheme {
            Scheme::Acm => cfg.depth = tile_or_depth,
            _ => cfg.tile = tile_or_depth,
        }
        cfg
    }

    pub fn initial_state<T: Real>(&self) -> FluidState<T> {
        FluidState::quiescent(&self.spec, self.dt, self.nu)
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self.window = 0..steps;
        self
    }
}

fn default_axes() -> SweepAxes {
    SweepAxes::matched(&[4, 8, 16, 32], &[1e-6, 1e-5, 2e-5, 3e-5, 4e-5, 5e-5, 1e-4])
}

/// Square cavity driven by all four walls; bottom `u = +v0`, right `v = +v0`,
/// top `u = -v0`, left `v = +v0`.
pub fn setup_shear_cavity(n: usize) -> Result<BenchmarkCase> {
    setup_shear_cavity_variant(n, true)
}

/// As [`setup_shear_cavity`]; with `reversed_left == false` the left wall keeps
/// the counter-clockwise sense (`v = -v0`).
pub fn setup_shear_cavity_variant(n: usize, reversed_left: bool) -> Result<BenchmarkCase> {
    let v0 = 0.1;
    let left = if reversed_left { v0 } else { -v0 };
    let bc = Sides {
        south: BoundaryCondition::DirichletVelocity { u_wall: v0, v_wall: 0.0 },
        east: BoundaryCondition::DirichletVelocity { u_wall: 0.0, v_wall: v0 },
        north: BoundaryCondition::DirichletVelocity { u_wall: -v0, v_wall: 0.0 },
        west: BoundaryCondition::DirichletVelocity { u_wall: 0.0, v_wall: left },
    };
    let tile = 16.min(n / 2).max(2);
    Ok(BenchmarkCase {
        name: "shear_cavity".into(),
        spec: GridSpec::new(n, n, 1.0, tile, bc)?,
        nu: 0.1,
        v0,
        dt: 1.0,
        steps: 1000,
        window: 0..1000,
        axes: default_axes(),
        tol_fine: 1e-6,
        max_total_sweeps: 20000,
        accept_capped: false,
        steady: None,
    })
}

/// Lid-driven cavity at Reynolds number `re` with lid speed `0.1` and `h = 1`.
///
/// The time step is the largest that both the advective (lid CFL 0.4) and viscous
/// (`4 nu dt / h^2 <= 0.45`) limits allow; the run stops when the per-step
/// velocity change falls below `1e-8` or after `60 L/U`.
pub fn setup_lid_cavity(n: usize, re: f64) -> Result<BenchmarkCase> {
    let u = 0.1;
    let mut bc = Sides::all(BoundaryCondition::NO_SLIP);
    bc.north = BoundaryCondition::DirichletVelocity { u_wall: u, v_wall: 0.0 };
    let tile = 16.min(n / 2).max(2);
    let nu = u * n as f64 / re;
    let dt = (0.4 / u).min(0.45 / (4.0 * nu));
    let steps = (60.0 * n as f64 / (u * dt)).ceil() as usize;
    Ok(BenchmarkCase {
        name: "lid_cavity".into(),
        spec: GridSpec::new(n, n, 1.0, tile, bc)?,
        nu,
        v0: u,
        dt,
        steps,
        window: 0..steps,
        axes: SweepAxes::matched(&[tile], &[1e-5]),
        tol_fine: 1e-6,
        max_total_sweeps: 20000,
        accept_capped: false,
        steady: Some(SteadyCriterion {
            max_change: 1e-8,
            check_every: 100,
        }),
    })
}

pub const JET_INLET_WIDTH: usize = 16;
pub const CHANNEL_JET_WIDTH: usize = 25;
pub const CHANNEL_JET_SPACING: usize = 200;

/// Jet entering through a centred 16-cell inlet in the no-slip bottom wall;
/// no-slip sides, free-slip fixed-pressure top.
pub fn setup_jet(nx: usize, ny: usize) -> Result<BenchmarkCase> {
    if nx < JET_INLET_WIDTH {
        return Err(Error::config(format!("jet case needs nx >= {JET_INLET_WIDTH}, got {nx}")));
    }
    let v0 = 0.1;
    let bc = Sides {
        west: BoundaryCondition::NO_SLIP,
        east: BoundaryCondition::NO_SLIP,
        south: BoundaryCondition::Inlet {
            velocity: v0,
            start: (nx - JET_INLET_WIDTH) / 2,
            width: JET_INLET_WIDTH,
        },
        north: BoundaryCondition::SymmetryVelocityFixedPressure { p_wall: 0.0 },
    };
    Ok(BenchmarkCase {
        name: "jet".into(),
        spec: GridSpec::new(nx, ny, 1.0, 16.min(nx / 2).max(2), bc)?,
        nu: 0.01,
        v0,
        dt: 1.0,
        steps: 2000,
        window: 0..2000,
        axes: SweepAxes::matched(&[16, 32], &[1e-6, 1e-5, 2e-5, 3e-5, 4e-5, 5e-5, 1e-4]),
        tol_fine: 1e-6,
        max_total_sweeps: 20000,
        accept_capped: true,
        steady: None,
    })
}

/// One period of a channel fed by equally spaced side jets: periodic in x with
/// the period equal to the jet spacing, a 25-cell inlet in the bottom wall and a
/// free-slip fixed-pressure top.
pub fn setup_jet_channel(ny: usize) -> Result<BenchmarkCase> {
    let nx = CHANNEL_JET_SPACING;
    let v0 = 0.1;
    let bc = Sides {
        west: BoundaryCondition::Periodic,
        east: BoundaryCondition::Periodic,
        south: BoundaryCondition::Inlet {
            velocity: v0,
            start: (nx - CHANNEL_JET_WIDTH) / 2,
            width: CHANNEL_JET_WIDTH,
        },
        north: BoundaryCondition::SymmetryVelocityFixedPressure { p_wall: 0.0 },
    };
    Ok(BenchmarkCase {
        name: "jet_channel".into(),
        spec: GridSpec::new(nx, ny, 1.0, 16, bc)?,
        nu: 0.01,
        v0,
        dt: 1.0,
        steps: 2000,
        window: 0..2000,
        axes: SweepAxes::matched(&[16, 32], &[1e-5]),
        tol_fine: 1e-6,
        max_total_sweeps: 20000,
        accept_capped: true,
        steady: None,
    })
}

/// Centreline velocity extrema normalised by the lid speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityExtrema {
    /// Magnitude of the most negative `u` on the vertical centreline.
    pub u_ext: f64,
    pub v_min: f64,
    pub v_max: f64,
}

/// Vertex value of the parabola through `(k-1, k, k+1)` around the discrete
/// extremum `k` of `f`; end points are returned as they are.
pub fn refine_extremum(f: &[f64], k: usize) -> f64 {
    if k == 0 || k + 1 >= f.len() {
        return f[k];
    }
    let (a, b, c) = (f[k - 1], f[k], f[k + 1]);
    let curv = a - 2.0 * b + c;
    if curv == 0.0 {
        return b;
    }
    b - (c - a) * (c - a) / (8.0 * curv)
}

fn argmin(f: &[f64]) -> usize {
    (0..f.len()).fold(0, |best, i| if f[i] < f[best] { i } else { best })
}

fn argmax(f: &[f64]) -> usize {
    (0..f.len()).fold(0, |best, i| if f[i] > f[best] { i } else { best })
}

/// `u` along the vertical centreline and `v` along the horizontal one, sampled
/// at cell-centre heights (widths).
pub fn centerline_profiles<T: Real>(state: &FluidState<T>, spec: &GridSpec) -> (Vec<f64>, Vec<f64>) {
    let (nx, ny) = (spec.nx, spec.ny);
    let u_col = |fi: usize, j: usize| state.vel.u[(fi, j)].to_f64_lossy();
    let v_row = |i: usize, fj: usize| state.vel.v[(i, fj)].to_f64_lossy();
    let u: Vec<f64> = (1..=ny)
        .map(|j| {
            if nx % 2 == 0 {
                u_col(nx / 2 + 1, j)
            } else {
                0.5 * (u_col(nx / 2 + 1, j) + u_col(nx / 2 + 2, j))
            }
        })
        .collect();
    let v: Vec<f64> = (1..=nx)
        .map(|i| {
            if ny % 2 == 0 {
                v_row(i, ny / 2 + 1)
            } else {
                0.5 * (v_row(i, ny / 2 + 1) + v_row(i, ny / 2 + 2))
            }
        })
        .collect();
    (u, v)
}

pub fn cavity_extrema<T: Real>(state: &FluidState<T>, spec: &GridSpec, lid: f64) -> CavityExtrema {
    let (u, v) = centerline_profiles(state, spec);
    CavityExtrema {
        u_ext: -refine_extremum(&u, argmin(&u)) / lid,
        v_min: refine_extremum(&v, argmin(&v)) / lid,
        v_max: refine_extremum(&v, argmax(&v)) / lid,
    }
}

/// What a driven run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome<T> {
    pub state: FluidState<T>,
    pub metrics: RunMetrics,
    /// Steps whose solve hit the sweep cap.
    pub capped_steps: usize,
    /// Largest post-step divergence over the run.
    pub max_divergence: f64,
    pub reached_steady: bool,
    /// Set when the run stopped early on a non-converged solve.
    pub aborted: bool,
}

/// Runs `case` for up to `case.steps` steps with solver `cfg`.
///
/// `observer` sees the state and the closed metrics row after every step.
pub fn run_case<T: Real>(
    case: &BenchmarkCase,
    cfg: CycleConfig,
    observer: impl FnMut(&FluidState<T>, &StepMetrics),
) -> Result<RunOutcome<T>> {
    run_case_from(case, cfg, case.initial_state(), observer)
}

/// As [`run_case`], starting from `state` instead of the quiescent one.
pub fn run_case_from<T: Real>(
    case: &BenchmarkCase,
    cfg: CycleConfig,
    mut state: FluidState<T>,
    mut observer: impl FnMut(&FluidState<T>, &StepMetrics),
) -> Result<RunOutcome<T>> {
    case.validate()?;
    let spec = &case.spec;
    state.check(spec)?;
    let mut solver = PressureSolver::<T>::new(spec, cfg)?;
    let mut metrics = RunMetrics::new();
    let mut out_capped = 0;
    let mut max_div: f64 = 0.0;
    let mut reached_steady = false;
    let mut aborted = false;
    for n in 0..case.steps {
        let check = case.steady.filter(|s| (n + 1) % s.check_every.max(1) == 0);
        let before = check.map(|_| state.vel.clone());
        match step(&mut state, spec, &mut solver, &mut metrics) {
            Ok(_) => {}
            Err(Error::NonConvergence { iterations, final_residual }) => {
                out_capped += 1;
                if !case.accept_capped {
                    info!("{}: step {n} did not converge ({iterations} sweeps, residual {final_residual:e})", case.name);
                    aborted = true;
                }
            }
            Err(e) => return Err(e),
        }
        let div = max_divergence(&state.vel, spec)?;
        max_div = max_div.max(div);
        if !div.is_finite() {
            return Err(Error::NonConvergence {
                iterations: n,
                final_residual: f64::INFINITY,
            });
        }
        observer(&state, metrics.rows().last().expect("row closed by step"));
        if aborted {
            break;
        }
        if let (Some(c), Some(prev)) = (check, before) {
            let change = state.vel.max_diff(&prev).to_f64_lossy();
            if change < c.max_change {
                reached_steady = true;
                break;
            }
        }
    }
    Ok(RunOutcome {
        state,
        metrics,
        capped_steps: out_capped,
        max_divergence: max_div,
        reached_steady,
        aborted,
    })
}

pub const SWEEP_HEADER: &str = "scheme,tile_or_depth,tol_coarse,NCC_f,NCC_c,NCC_t,N_Lap,converged";

/// One parameter combination of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub scheme: Scheme,
    /// Tile for the two-level schemes, depth for ACM, 1 for plain GS.
    pub tile_or_depth: usize,
    /// `None` for plain GS, which has no coarse level.
    pub tol_coarse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub cell: SweepCell,
    pub summary: MetricsSummary,
    pub converged: bool,
}

impl SweepRow {
    pub fn csv_row(&self) -> String {
        let tol = self.cell.tol_coarse.map_or_else(|| "-".to_string(), |t| format!("{t:e}"));
        let s = &self.summary;
        format!(
            "{},{},{},{},{},{},{},{}",
            self.cell.scheme, self.cell.tile_or_depth, tol, s.ncc_f, s.ncc_c, s.ncc_t, s.n_lap, self.converged
        )
    }
}

/// All cells of a sweep over `schemes`, in table order.
pub fn sweep_cells(case: &BenchmarkCase, schemes: &[Scheme]) -> Vec<SweepCell> {
    let mut cells = Vec::new();
    for &scheme in schemes {
        match scheme {
            Scheme::PlainGs => cells.push(SweepCell {
                scheme,
                tile_or_depth: 1,
                tol_coarse: None,
            }),
            _ => {
                let sizes = if scheme == Scheme::Acm { &case.axes.depths } else { &case.axes.tiles };
                for &tol in &case.axes.tol_coarse {
                    for &s in sizes {
                        cells.push(SweepCell {
                            scheme,
                            tile_or_depth: s,
                            tol_coarse: Some(tol),
                        });
                    }
                }
            }
        }
    }
    cells
}

/// Result of one sweep cell plus the final state for cross-scheme checks.
#[derive(Debug, Clone)]
pub struct CellResult<T> {
    pub row: SweepRow,
    pub outcome: Option<RunOutcome<T>>,
}

/// Runs one sweep cell. Configuration errors are returned; a run that stops on
/// a non-converged solve gives a row with `converged == false`.
pub fn run_cell<T: Real>(case: &BenchmarkCase, cell: SweepCell) -> Result<CellResult<T>> {
    let tol = cell.tol_coarse.unwrap_or(case.tol_fine);
    let cfg = case.cycle_config(cell.scheme, cell.tile_or_depth, tol);
    info!(
        "{}: {} {} tol_coarse {:?}",
        case.name, cell.scheme, cell.tile_or_depth, cell.tol_coarse
    );
    let outcome = run_case::<T>(case, cfg, |_, _| {})?;
    let summary = outcome.metrics.summary(case.window.clone());
    let converged = !outcome.aborted && outcome.capped_steps == 0;
    Ok(CellResult {
        row: SweepRow {
            cell,
            summary,
            converged,
        },
        outcome: Some(outcome),
    })
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{}", r.csv_row());
    }
    s
}

/// Runs every cell sequentially and writes `sweep.csv` plus one per-step CSV per
/// cell into `out_dir` when given.
pub fn run_sweep<T: Real>(case: &BenchmarkCase, schemes: &[Scheme], out_dir: Option<&Path>) -> Result<Vec<SweepRow>> {
    case.validate()?;
    let mut rows = Vec::new();
    for cell in sweep_cells(case, schemes) {
        let res = run_cell::<T>(case, cell)?;
        if let (Some(dir), Some(o)) = (out_dir, &res.outcome) {
            o.metrics.write_csv(&dir.join(cell_file_name(&case.name, &cell)))?;
        }
        rows.push(res.row);
    }
    if let Some(dir) = out_dir {
        let path = dir.join("sweep.csv");
        std::fs::write(&path, sweep_csv(&rows)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(rows)
}

/// File name of a cell's per-step CSV.
pub fn cell_file_name(case: &str, cell: &SweepCell) -> String {
    match cell.tol_coarse {
        Some(t) => format!("{case}_{}_{}_{t:e}.csv", cell.scheme, cell.tile_or_depth),
        None => format!("{case}_{}.csv", cell.scheme),
    }
}

/// Lowest mean `NCC_t` among converged rows of `scheme`.
pub fn best_row(rows: &[SweepRow], scheme: Scheme) -> Option<&SweepRow> {
    rows.iter()
        .filter(|r| r.cell.scheme == scheme && r.converged)
        .min_by(|a, b| a.summary.ncc_t.total_cmp(&b.summary.ncc_t))
}
