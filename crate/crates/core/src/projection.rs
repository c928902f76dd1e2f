//! Incremental pressure-correction time stepping on the staggered grid.
//!
//! One step: explicit predictor with the current pressure, Poisson solve for the
//! pressure increment, face-gradient correction, pressure update.

use log::warn;

use crate::cycles::{ConvergenceReport, PressureSolver};
use crate::error::{Error, Result};
use crate::field::{
    fill_scalar_ghosts, fill_velocity_bc, BoundaryCondition, GridSpec, MacVelocity, PressureKind, ScalarField, Side,
};
use crate::metrics::RunMetrics;
use crate::real::Real;

/// Velocity, pressure and time of a running simulation.
#[derive(Debug, Clone)]
pub struct FluidState<T> {
    pub vel: MacVelocity<T>,
    pub p: ScalarField<T>,
    pub t: f64,
    pub dt: f64,
    /// Kinematic viscosity.
    pub nu: f64,
    pub steps: usize,
}

impl<T: Real> FluidState<T> {
    /// Fluid at rest with zero pressure and boundary conditions applied.
    pub fn quiescent(spec: &GridSpec, dt: f64, nu: f64) -> Self {
        let mut vel = MacVelocity::for_spec(spec);
        fill_velocity_bc(&mut vel, spec, true);
        FluidState {
            vel,
            p: ScalarField::for_spec(spec),
            t: 0.0,
            dt,
            nu,
            steps: 0,
        }
    }

    pub fn check(&self, spec: &GridSpec) -> Result<()> {
        self.vel.check_dims(spec)?;
        self.p.check_dims(spec)?;
        if !(self.dt >= 0.0) || !(self.nu >= 0.0) {
            return Err(Error::config(format!(
                "dt and nu must be non-negative (dt = {}, nu = {})",
                self.dt, self.nu
            )));
        }
        Ok(())
    }
}

/// Face columns (rows) updated along one axis; boundary faces on fixed-pressure
/// sides are included only when `with_open` is set.
fn face_range(spec: &GridSpec, lo: Side, hi: Side, n: usize, with_open: bool) -> (usize, usize) {
    if spec.bc.get(lo).is_periodic() {
        return (1, n);
    }
    let open = |s: Side| with_open && matches!(spec.bc.get(s), BoundaryCondition::SymmetryVelocityFixedPressure { .. });
    let first = if open(lo) { 1 } else { 2 };
    let last = if open(hi) { n + 1 } else { n };
    (first, last)
}

/// Cell divergence `(u_E - u_W)/h + (v_N - v_S)/h`.
pub fn divergence<T: Real>(vel: &MacVelocity<T>, spec: &GridSpec) -> Result<ScalarField<T>> {
    vel.check_dims(spec)?;
    let inv_h = T::lit(1.0 / spec.h);
    Ok(ScalarField::from_fn(spec.nx, spec.ny, |i, j| {
        let (ci, cj) = (i + 1, j + 1);
        ((vel.u[(ci + 1, cj)] - vel.u[(ci, cj)]) + (vel.v[(ci, cj + 1)] - vel.v[(ci, cj)])) * inv_h
    }))
}

/// Largest absolute cell divergence.
pub fn max_divergence<T: Real>(vel: &MacVelocity<T>, spec: &GridSpec) -> Result<f64> {
    Ok(divergence(vel, spec)?.max_abs().to_f64_lossy())
}

/// Predicted velocity `v + dt (-(v.grad)v + nu lap v - grad p)` with boundary
/// conditions applied. Normal faces on fixed-pressure sides are extrapolated.
pub fn predictor<T: Real>(state: &FluidState<T>, spec: &GridSpec) -> Result<MacVelocity<T>> {
    state.check(spec)?;
    let (nx, ny) = (spec.nx, spec.ny);
    let vel = &state.vel;
    let mut p = state.p.clone();
    fill_scalar_ghosts(&mut p, &spec.scalar_closures(PressureKind::Pressure));
    let p = p.raw();
    let u = &vel.u;
    let v = &vel.v;
    let dt = T::lit(state.dt);
    let inv_h = T::lit(1.0 / spec.h);
    let nu_h2 = T::lit(state.nu / (spec.h * spec.h));
    let half = T::lit(0.5);
    let four = T::lit(4.0);
    let mut out = vel.clone();

    let (f0, f1) = face_range(spec, Side::West, Side::East, nx, false);
    for j in 1..=ny {
        for fi in f0..=f1 {
            let uc = u[(fi, j)];
            let ue = half * (uc + u[(fi + 1, j)]);
            let uw = half * (u[(fi - 1, j)] + uc);
            let un = half * (uc + u[(fi, j + 1)]);
            let us = half * (u[(fi, j - 1)] + uc);
            let vn = half * (v[(fi - 1, j + 1)] + v[(fi, j + 1)]);
            let vs = half * (v[(fi - 1, j)] + v[(fi, j)]);
            let adv = (ue * ue - uw * uw + un * vn - us * vs) * inv_h;
            let lap = u[(fi + 1, j)] + u[(fi - 1, j)] + u[(fi, j + 1)] + u[(fi, j - 1)] - four * uc;
            let dpdx = (p[(fi, j)] - p[(fi - 1, j)]) * inv_h;
            out.u[(fi, j)] = uc + dt * (nu_h2 * lap - adv - dpdx);
        }
    }

    let (g0, g1) = face_range(spec, Side::South, Side::North, ny, false);
    for fj in g0..=g1 {
        for i in 1..=nx {
            let vc = v[(i, fj)];
            let vn = half * (vc + v[(i, fj + 1)]);
            let vs = half * (v[(i, fj - 1)] + vc);
            let ve = half * (vc + v[(i + 1, fj)]);
            let vw = half * (v[(i - 1, fj)] + vc);
            let ue = half * (u[(i + 1, fj - 1)] + u[(i + 1, fj)]);
            let uw = half * (u[(i, fj - 1)] + u[(i, fj)]);
            let adv = (vn * vn - vs * vs + ue * ve - uw * vw) * inv_h;
            let lap = v[(i + 1, fj)] + v[(i - 1, fj)] + v[(i, fj + 1)] + v[(i, fj - 1)] - four * vc;
            let dpdy = (p[(i, fj)] - p[(i, fj - 1)]) * inv_h;
            out.v[(i, fj)] = vc + dt * (nu_h2 * lap - adv - dpdy);
        }
    }
    // fixed-pressure sides: extrapolate the normal component, then refresh ghosts
    fill_velocity_bc(&mut out, spec, true);
    Ok(out)
}

/// `v* - dt grad(dp)` on every face whose normal velocity is not prescribed.
pub fn correct<T: Real>(v_star: &MacVelocity<T>, dp: &ScalarField<T>, dt: f64, spec: &GridSpec) -> Result<MacVelocity<T>> {
    v_star.check_dims(spec)?;
    dp.check_dims(spec)?;
    let (nx, ny) = (spec.nx, spec.ny);
    let mut d = dp.clone();
    fill_scalar_ghosts(&mut d, &spec.scalar_closures(PressureKind::Increment));
    let d = d.raw();
    let c = T::lit(dt / spec.h);
    let mut out = v_star.clone();
    let (f0, f1) = face_range(spec, Side::West, Side::East, nx, true);
    for j in 1..=ny {
        for fi in f0..=f1 {
            out.u[(fi, j)] = out.u[(fi, j)] - c * (d[(fi, j)] - d[(fi - 1, j)]);
        }
    }
    let (g0, g1) = face_range(spec, Side::South, Side::North, ny, true);
    for fj in g0..=g1 {
        for i in 1..=nx {
            out.v[(i, fj)] = out.v[(i, fj)] - c * (d[(i, fj)] - d[(i, fj - 1)]);
        }
    }
    fill_velocity_bc(&mut out, spec, false);
    Ok(out)
}

/// Right-hand side of the increment equation in flux form: `h^2 div(v*) / dt`.
pub fn pressure_rhs<T: Real>(div: &ScalarField<T>, spec: &GridSpec, dt: f64) -> ScalarField<T> {
    let s = T::lit(spec.h * spec.h / dt);
    ScalarField::from_fn(div.nx(), div.ny(), |i, j| div.at(i, j) * s)
}

fn warn_stability<T: Real>(state: &FluidState<T>, spec: &GridSpec) {
    let cfl = state.dt * state.vel.max_abs().to_f64_lossy() / spec.h;
    let diff = state.dt * state.nu * 4.0 / (spec.h * spec.h);
    if cfl > 0.5 || diff > 0.5 {
        warn!(
            "step {}: stability numbers exceed 0.5 (advective {cfl:.3}, diffusive {diff:.3})",
            state.steps
        );
    }
}

/// Advances `state` by one step and closes one metrics row.
///
/// A solve that hits the sweep cap still updates the state with its best
/// iterate; `NonConvergence` is then returned so the caller can decide whether
/// to continue.
pub fn step<T: Real>(
    state: &mut FluidState<T>,
    spec: &GridSpec,
    solver: &mut PressureSolver<T>,
    metrics: &mut RunMetrics,
) -> Result<ConvergenceReport> {
    state.check(spec)?;
    if state.dt == 0.0 {
        metrics.close_timestep();
        state.steps += 1;
        return Ok(ConvergenceReport {
            converged: true,
            ..ConvergenceReport::default()
        });
    }
    warn_stability(state, spec);
    let v_star = predictor(state, spec)?;
    let div = divergence(&v_star, spec)?;
    let rhs = pressure_rhs(&div, spec, state.dt);
    let solved = solver.solve_report(&rhs, metrics);
    let (dp, report) = match solved {
        Ok(r) => r,
        Err(e) => {
            metrics.close_timestep();
            return Err(e);
        }
    };
    state.vel = correct(&v_star, &dp, state.dt, spec)?;
    state.p.add_assign(&dp);
    state.t += state.dt;
    state.steps += 1;
    metrics.set_residual(report.final_residual);
    metrics.close_timestep();
    if report.converged {
        Ok(report)
    } else {
        Err(Error::NonConvergence {
            iterations: report.total_sweeps(),
            final_residual: report.final_residual,
        })
    }
}
