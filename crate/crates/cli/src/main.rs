//! `ismg`: runs the flow benchmarks and the solver parameter sweeps.
//!
//! Exit codes: 0 success, 1 a pressure solve did not converge (or a validation
//! check failed), 2 configuration or i/o error.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ismg_core::bench::{
    self, cavity_extrema, run_case, run_cell, setup_lid_cavity, sweep_cells, sweep_csv, CavityExtrema,
};
use ismg_core::coarsening::{build_acm_hierarchy, build_gmg_operator, build_ismg_operator, Scheme};
use ismg_core::field::apply_velocity_bc;
use ismg_core::io::write_vtk;
use ismg_core::projection::FluidState;
use ismg_core::smoother::StencilKind;
use ismg_core::Real;

use config::{Precision, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ismg_core::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(ismg_core::Error::Config(_) | ismg_core::Error::Io { .. }) => 2,
            CliError::Core(_) | CliError::Failed(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "ismg", version, about = "2D incompressible flow with multigrid pressure solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Default)]
struct Common {
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Floating point precision, 32 or 64 (overrides `output.precision`).
    #[arg(long, value_parser = ["32", "64"])]
    precision: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation. CONFIG is a file or `builtin:<name>`.
    Run {
        config: String,
        #[command(flatten)]
        common: Common,
        /// Write a VTK snapshot every K steps.
        #[arg(long)]
        snapshot_every: Option<usize>,
    },
    /// Run the solver parameter sweep of a benchmark.
    Sweep {
        config: String,
        #[command(flatten)]
        common: Common,
        /// Number of sweep cells run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Lid-driven cavity at Re = 1000 compared with the reference extrema.
    ValidateCavity {
        #[arg(long, default_value_t = 256)]
        n: usize,
    },
    /// Write the coarse operator of the configured solver as CSV.
    DumpOperator {
        config: String,
        /// Level to dump (1 = first coarse level).
        #[arg(long, default_value_t = 1)]
        level: usize,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in configs.
    Builtins,
}

fn load(arg: &str, common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = config::parse(&config::load_text(arg)?)?;
    if let Some(out) = &common.out {
        cfg.output_dir = Some(out.clone());
    }
    if let Some(p) = &common.precision {
        cfg.precision = Precision::parse(p).expect("checked by clap");
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> Result<Option<&Path>, CliError> {
    match &cfg.output_dir {
        Some(d) => {
            std::fs::create_dir_all(d).map_err(|e| CliError::Config(format!("cannot create {}: {e}", d.display())))?;
            Ok(Some(d.as_path()))
        }
        None => Ok(None),
    }
}

fn perturbed_state<T: Real>(cfg: &RunConfig) -> Result<Option<FluidState<T>>, CliError> {
    let (Some(seed), true) = (cfg.seed, cfg.perturbation > 0.0) else {
        return Ok(None);
    };
    let mut state = cfg.case.initial_state::<T>();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = cfg.perturbation;
    for x in state.vel.u.as_mut_slice().iter_mut().chain(state.vel.v.as_mut_slice().iter_mut()) {
        *x = *x + T::lit(rng.gen_range(-a..=a));
    }
    apply_velocity_bc(&mut state.vel, &cfg.case.spec)?;
    Ok(Some(state))
}

fn run_sim<T: Real>(cfg: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(cfg)?;
    let case = &cfg.case;
    let start = Instant::now();
    let initial = perturbed_state::<T>(cfg)?;
    let mut snapshot_err = None;
    let every = cfg.snapshot_interval;
    let observer = |s: &FluidState<T>, _: &ismg_core::metrics::StepMetrics| {
        if let (Some(d), true) = (dir, every > 0 && s.steps % every.max(1) == 0) {
            let path = d.join(format!("snapshot_{:06}.vtk", s.steps));
            if let Err(e) = write_vtk(&path, &case.spec, &s.p, &s.vel) {
                snapshot_err.get_or_insert(e);
            }
        }
    };
    let outcome = match initial {
        Some(state) => bench::run_case_from(case, cfg.solver, state, observer)?,
        None => run_case::<T>(case, cfg.solver, observer)?,
    };
    if let Some(e) = snapshot_err {
        return Err(e.into());
    }
    let summary = outcome.metrics.summary(0..outcome.metrics.rows().len());
    if let Some(d) = dir {
        outcome.metrics.write_csv(&d.join("metrics.csv"))?;
        let path = d.join("summary.txt");
        std::fs::write(&path, summary.to_text()).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    println!(
        "{}: {} steps with {} ({}), {:.1}s",
        case.name,
        outcome.state.steps,
        cfg.solver.scheme,
        cfg.solver.tile_or_depth(),
        start.elapsed().as_secs_f64()
    );
    print!("{}", summary.to_text());
    println!("max_divergence = {:e}", outcome.max_divergence);
    if outcome.reached_steady {
        println!("reached steady state at t = {}", outcome.state.t);
    }
    if outcome.aborted {
        return Err(CliError::Failed(format!(
            "stopped at step {}: pressure solve did not converge within {} sweeps",
            outcome.state.steps, cfg.solver.max_total_sweeps
        )));
    }
    if outcome.capped_steps > 0 {
        eprintln!("warning: {} steps hit the sweep cap", outcome.capped_steps);
    }
    Ok(())
}

fn sweep<T: Real>(cfg: &RunConfig, jobs: usize) -> Result<(), CliError> {
    let dir = out_dir(cfg)?;
    let case = &cfg.case;
    let cells = sweep_cells(case, &cfg.schemes);
    info!("{}: {} sweep cells on {} jobs", case.name, cells.len(), jobs);
    let run_one = |cell| -> Result<_, CliError> {
        let res = run_cell::<T>(case, cell)?;
        if let (Some(d), Some(o)) = (dir, &res.outcome) {
            o.metrics.write_csv(&d.join(bench::cell_file_name(&case.name, &cell)))?;
        }
        eprintln!("{}", res.row.csv_row());
        Ok(res.row)
    };
    let rows: Vec<_> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
        pool.install(|| cells.par_iter().map(|c| run_one(*c)).collect::<Result<_, _>>())?
    } else {
        cells.iter().map(|c| run_one(*c)).collect::<Result<_, _>>()?
    };
    let csv = sweep_csv(&rows);
    if let Some(d) = dir {
        let path = d.join("sweep.csv");
        std::fs::write(&path, &csv).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    print!("{csv}");
    for scheme in &cfg.schemes {
        if let Some(b) = bench::best_row(&rows, *scheme) {
            println!("best {}: {}", scheme, b.csv_row());
        }
    }
    Ok(())
}

const REFERENCE: CavityExtrema = CavityExtrema {
    u_ext: 0.3781,
    v_min: -0.5142,
    v_max: 0.3659,
};

fn validate_cavity(n: usize) -> Result<(), CliError> {
    let case = setup_lid_cavity(n, 1000.0)?;
    let cfg = case.cycle_config(Scheme::Ismg, case.spec.tile, 1e-5);
    let start = Instant::now();
    let out = run_case::<f64>(&case, cfg, |_, _| {})?;
    if out.aborted {
        return Err(CliError::Failed(format!("pressure solve did not converge at step {}", out.state.steps)));
    }
    let e = cavity_extrema(&out.state, &case.spec, case.v0);
    let tol = if n >= 256 { 0.02 } else { 0.03 };
    println!(
        "lid cavity {n}x{n}, Re 1000: {} steps, t U/L = {:.1}, steady {}, {:.0}s",
        out.state.steps,
        out.state.t * case.v0 / (n as f64 * case.spec.h),
        out.reached_steady,
        start.elapsed().as_secs_f64()
    );
    println!("{:<8} {:>9} {:>9} {:>9}", "", "u_ext", "v_min", "v_max");
    println!("{:<8} {:>9.4} {:>9.4} {:>9.4}", "computed", e.u_ext, e.v_min, e.v_max);
    println!("{:<8} {:>9.4} {:>9.4} {:>9.4}", "ref", REFERENCE.u_ext, REFERENCE.v_min, REFERENCE.v_max);
    let worst = (e.u_ext - REFERENCE.u_ext)
        .abs()
        .max((e.v_min - REFERENCE.v_min).abs())
        .max((e.v_max - REFERENCE.v_max).abs());
    let pass = worst <= tol;
    println!("max deviation {worst:.4} (tolerance {tol}): {}", if pass { "PASS" } else { "FAIL" });
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed("extrema outside tolerance".into()))
    }
}

fn dump_operator(arg: &str, level: usize, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = config::parse(&config::load_text(arg)?)?;
    let spec = cfg.case.spec.with_tile(cfg.solver.tile);
    let op = match cfg.solver.scheme {
        Scheme::Ismg if level == 1 => build_ismg_operator::<f64>(&spec)?,
        Scheme::Gmg if level == 1 => build_gmg_operator::<f64>(&spec)?,
        Scheme::Acm if level >= 1 && level < cfg.solver.depth => {
            let h = build_acm_hierarchy::<f64>(&cfg.case.spec, cfg.solver.depth)?;
            match &h.levels[level].stencil {
                StencilKind::NinePointPerCell(op) => op.clone(),
                StencilKind::FivePointUniform(_) => unreachable!("coarse ACM levels are per-cell"),
            }
        }
        s => return Err(CliError::Config(format!("{s} has no coarse level {level}"))),
    };
    match out {
        Some(path) => op.write_csv(path)?,
        None => print!("{}", op.to_csv()),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            common,
            snapshot_every,
        } => {
            let mut cfg = load(&config, &common)?;
            if let Some(k) = snapshot_every {
                cfg.snapshot_interval = k;
            }
            if cfg.snapshot_interval > 0 && cfg.output_dir.is_none() {
                return Err(CliError::Config("snapshots need an output directory (--out)".into()));
            }
            match cfg.precision {
                Precision::Single => run_sim::<f32>(&cfg),
                Precision::Double => run_sim::<f64>(&cfg),
            }
        }
        Command::Sweep { config, common, jobs } => {
            let cfg = load(&config, &common)?;
            match cfg.precision {
                Precision::Single => sweep::<f32>(&cfg, jobs.max(1)),
                Precision::Double => sweep::<f64>(&cfg, jobs.max(1)),
            }
        }
        Command::ValidateCavity { n } => validate_cavity(n),
        Command::DumpOperator { config, level, out } => dump_operator(&config, level, out.as_deref()),
        Command::Builtins => {
            for (name, text) in config::BUILTIN {
                let first = text.lines().next().unwrap_or("").trim_start_matches('#').trim();
                println!("builtin:{name:<16} {first}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ISMG_LOG", "warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
