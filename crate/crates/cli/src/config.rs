//! Flat `section.key = value` run configuration.
//!
//! A config names a base `case` (one of the built-in benchmark setups or
//! `custom`) and overrides any of its fields. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::PathBuf;

use ismg_core::bench::{
    setup_jet, setup_jet_channel, setup_lid_cavity, setup_shear_cavity, BenchmarkCase, SteadyCriterion, SweepAxes,
};
use ismg_core::coarsening::Scheme;
use ismg_core::cycles::CycleConfig;
use ismg_core::field::{BoundaryCondition, GridSpec, Sides};

use crate::CliError;

/// Benchmark configurations shipped with the binary, addressed as `builtin:<name>`.
pub const BUILTIN: &[(&str, &str)] = &[
    ("shear_cavity", include_str!("../configs/shear_cavity.cfg")),
    ("shear_cavity_ci", include_str!("../configs/shear_cavity_ci.cfg")),
    ("lid_cavity", include_str!("../configs/lid_cavity.cfg")),
    ("jet", include_str!("../configs/jet.cfg")),
    ("jet_channel", include_str!("../configs/jet_channel.cfg")),
    ("quiescent", include_str!("../configs/quiescent.cfg")),
];

const KEYS: &[&str] = &[
    "case",
    "grid.nx",
    "grid.ny",
    "grid.h",
    "grid.tile",
    "bc.west",
    "bc.east",
    "bc.south",
    "bc.north",
    "flow.nu",
    "flow.v0",
    "flow.re",
    "time.dt",
    "time.steps",
    "time.window",
    "steady.max_change",
    "steady.check_every",
    "solver.scheme",
    "solver.tile",
    "solver.depth",
    "solver.tol_fine",
    "solver.tol_coarse",
    "solver.max_total_sweeps",
    "solver.stall_factor",
    "solver.acm_pre_smooth",
    "solver.acm_post_smooth",
    "solver.accept_capped",
    "sweep.schemes",
    "sweep.tiles",
    "sweep.depths",
    "sweep.tol_coarse",
    "output.dir",
    "output.snapshot_every",
    "output.precision",
    "init.seed",
    "init.perturbation",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Single,
    Double,
}

impl Precision {
    pub fn parse(s: &str) -> Option<Precision> {
        match s {
            "32" | "f32" | "single" => Some(Precision::Single),
            "64" | "f64" | "double" => Some(Precision::Double),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub case: BenchmarkCase,
    pub solver: CycleConfig,
    pub schemes: Vec<Scheme>,
    pub output_dir: Option<PathBuf>,
    /// Write a VTK snapshot every this many steps (0 = never).
    pub snapshot_interval: usize,
    pub precision: Precision,
    pub seed: Option<u64>,
    /// Amplitude of the random initial velocity perturbation.
    pub perturbation: f64,
}

/// Raw `key = value` pairs; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!("line {}: expected `key = value`, got `{line}`", n + 1)));
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(CliError::Config(format!("line {}: unknown key `{k}`", n + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key `{k}`", n + 1)));
        }
    }
    Ok(out)
}

/// Reads a config file, or a built-in one for `builtin:<name>`.
pub fn load_text(arg: &str) -> Result<String, CliError> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return BUILTIN
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| t.to_string())
            .ok_or_else(|| {
                let names: Vec<&str> = BUILTIN.iter().map(|(n, _)| *n).collect();
                CliError::Config(format!("no built-in config `{name}` (have: {})", names.join(", ")))
            });
    }
    std::fs::read_to_string(arg).map_err(|e| CliError::Config(format!("cannot read {arg}: {e}")))
}

struct Pairs(BTreeMap<String, String>);

impl Pairs {
    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{v}`"))),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        let Some(v) = self.0.get(key) else { return Ok(None) };
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{}`", s.trim())))
            })
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    fn scheme(&self, key: &str, s: &str) -> Result<Scheme, CliError> {
        Scheme::parse(s).ok_or_else(|| CliError::Config(format!("`{key}`: unknown scheme `{s}`")))
    }
}

/// `no_slip`, `wall(u, v)`, `symmetry(p)`, `periodic`, `inlet(velocity, start, width)`.
pub fn parse_bc(key: &str, s: &str) -> Result<BoundaryCondition, CliError> {
    let bad = || CliError::Config(format!("`{key}`: cannot parse boundary condition `{s}`"));
    let (name, args) = match s.split_once('(') {
        Some((n, rest)) => {
            let inner = rest.strip_suffix(')').ok_or_else(bad)?;
            let vals: Vec<&str> = inner.split(',').map(str::trim).collect();
            (n.trim(), vals)
        }
        None => (s.trim(), Vec::new()),
    };
    let num = |i: usize| args.get(i).and_then(|a| a.parse::<f64>().ok()).ok_or_else(bad);
    let int = |i: usize| args.get(i).and_then(|a| a.parse::<usize>().ok()).ok_or_else(bad);
    let bc = match (name, args.len()) {
        ("no_slip", 0) => BoundaryCondition::NO_SLIP,
        ("periodic", 0) => BoundaryCondition::Periodic,
        ("symmetry", 0) => BoundaryCondition::SymmetryVelocityFixedPressure { p_wall: 0.0 },
        ("symmetry", 1) => BoundaryCondition::SymmetryVelocityFixedPressure { p_wall: num(0)? },
        ("wall", 2) => BoundaryCondition::DirichletVelocity {
            u_wall: num(0)?,
            v_wall: num(1)?,
        },
        ("inlet", 3) => BoundaryCondition::Inlet {
            velocity: num(0)?,
            start: int(1)?,
            width: int(2)?,
        },
        _ => return Err(bad()),
    };
    Ok(bc)
}

fn base_case(p: &Pairs) -> Result<BenchmarkCase, CliError> {
    let name: String = p.get("case")?.ok_or_else(|| CliError::Config("missing key `case`".into()))?;
    let nx: Option<usize> = p.get("grid.nx")?;
    let ny: Option<usize> = p.get("grid.ny")?;
    let square = |default: usize| -> Result<usize, CliError> {
        match (nx, ny) {
            (Some(a), Some(b)) if a != b => Err(CliError::Config(format!("case {name} needs grid.nx == grid.ny"))),
            (Some(a), _) | (None, Some(a)) => Ok(a),
            (None, None) => Ok(default),
        }
    };
    let case = match name.as_str() {
        "shear_cavity" => setup_shear_cavity(square(500)?)?,
        "lid_cavity" => setup_lid_cavity(square(256)?, p.get("flow.re")?.unwrap_or(1000.0))?,
        "jet" => setup_jet(nx.unwrap_or(250), ny.unwrap_or(500))?,
        "jet_channel" => {
            if nx.is_some_and(|n| n != ismg_core::bench::CHANNEL_JET_SPACING) {
                return Err(CliError::Config(format!(
                    "case jet_channel has a fixed period nx = {}",
                    ismg_core::bench::CHANNEL_JET_SPACING
                )));
            }
            setup_jet_channel(ny.unwrap_or(500))?
        }
        "custom" => {
            let (Some(nx), Some(ny)) = (nx, ny) else {
                return Err(CliError::Config("case custom needs grid.nx and grid.ny".into()));
            };
            let side = |k: &str| -> Result<BoundaryCondition, CliError> {
                match p.0.get(k) {
                    Some(v) => parse_bc(k, v),
                    None => Ok(BoundaryCondition::NO_SLIP),
                }
            };
            let bc = Sides {
                west: side("bc.west")?,
                east: side("bc.east")?,
                south: side("bc.south")?,
                north: side("bc.north")?,
            };
            let tile = 16.min(nx.min(ny) / 2).max(2);
            BenchmarkCase {
                name: "custom".into(),
                spec: GridSpec::new(nx, ny, 1.0, tile, bc)?,
                nu: 0.01,
                v0: 0.1,
                dt: 1.0,
                steps: 100,
                window: 0..100,
                axes: SweepAxes::matched(&[tile], &[1e-5]),
                tol_fine: 1e-6,
                max_total_sweeps: 20000,
                accept_capped: false,
                steady: None,
            }
        }
        other => return Err(CliError::Config(format!("`case`: unknown case `{other}`"))),
    };
    if name != "custom" && ["bc.west", "bc.east", "bc.south", "bc.north"].iter().any(|k| p.0.contains_key(*k)) {
        return Err(CliError::Config(format!("bc.* keys need case = custom (case is {name})")));
    }
    Ok(case)
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let p = Pairs(parse_pairs(text)?);
    let mut case = base_case(&p)?;

    if let Some(h) = p.get("grid.h")? {
        case.spec.h = h;
    }
    if let Some(t) = p.get("grid.tile")? {
        case.spec.tile = t;
    }
    if let Some(nu) = p.get("flow.nu")? {
        case.nu = nu;
    }
    if let Some(v0) = p.get("flow.v0")? {
        case.v0 = v0;
    }
    if let Some(dt) = p.get("time.dt")? {
        case.dt = dt;
    }
    if let Some(steps) = p.get::<usize>("time.steps")? {
        case = case.with_steps(steps);
    }
    if let Some(w) = p.list::<usize>("time.window")? {
        if w.len() != 2 {
            return Err(CliError::Config("`time.window`: expected `start, end`".into()));
        }
        case.window = w[0]..w[1];
    }
    match (p.get::<f64>("steady.max_change")?, p.get::<usize>("steady.check_every")?) {
        (Some(max_change), every) => {
            case.steady = Some(SteadyCriterion {
                max_change,
                check_every: every.unwrap_or(1),
            })
        }
        (None, Some(every)) => match &mut case.steady {
            Some(s) => s.check_every = every,
            None => return Err(CliError::Config("`steady.check_every` needs `steady.max_change`".into())),
        },
        (None, None) => {}
    }
    if let Some(t) = p.get("solver.tol_fine")? {
        case.tol_fine = t;
    }
    if let Some(m) = p.get("solver.max_total_sweeps")? {
        case.max_total_sweeps = m;
    }
    if let Some(a) = p.get("solver.accept_capped")? {
        case.accept_capped = a;
    }
    if let Some(t) = p.list::<usize>("sweep.tiles")? {
        case.axes.depths = t.iter().map(|t| t.trailing_zeros() as usize + 1).collect();
        case.axes.tiles = t;
    }
    if let Some(d) = p.list("sweep.depths")? {
        case.axes.depths = d;
    }
    if let Some(t) = p.list("sweep.tol_coarse")? {
        case.axes.tol_coarse = t;
    }

    let scheme = match p.0.get("solver.scheme") {
        Some(s) => p.scheme("solver.scheme", s)?,
        None => Scheme::Ismg,
    };
    let tol_coarse = p.get("solver.tol_coarse")?.unwrap_or(case.axes.tol_coarse[0].max(case.tol_fine));
    let size = match scheme {
        Scheme::Acm => p.get("solver.depth")?.unwrap_or(case.spec.tile.trailing_zeros() as usize + 1),
        _ => p.get("solver.tile")?.unwrap_or(case.spec.tile),
    };
    let mut solver = case.cycle_config(scheme, size, tol_coarse);
    if let Some(s) = p.get("solver.stall_factor")? {
        solver.stall_factor = s;
    }
    if let Some(s) = p.get("solver.acm_pre_smooth")? {
        solver.acm_pre_smooth = s;
    }
    if let Some(s) = p.get("solver.acm_post_smooth")? {
        solver.acm_post_smooth = s;
    }

    let schemes = match p.0.get("sweep.schemes") {
        Some(list) => list
            .split(',')
            .map(|s| p.scheme("sweep.schemes", s.trim()))
            .collect::<Result<Vec<_>, _>>()?,
        None => vec![Scheme::Ismg, Scheme::Gmg, Scheme::Acm],
    };
    let precision = match p.0.get("output.precision") {
        Some(s) => Precision::parse(s)
            .ok_or_else(|| CliError::Config(format!("`output.precision`: expected 32 or 64, got `{s}`")))?,
        None => Precision::Double,
    };

    let cfg = RunConfig {
        case,
        solver,
        schemes,
        output_dir: p.get::<String>("output.dir")?.map(PathBuf::from),
        snapshot_interval: p.get("output.snapshot_every")?.unwrap_or(0),
        precision,
        seed: p.get("init.seed")?,
        perturbation: p.get("init.perturbation")?.unwrap_or(0.0),
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.case.validate()?;
        self.solver.validate()?;
        if self.schemes.is_empty() {
            return Err(CliError::Config("`sweep.schemes` must not be empty".into()));
        }
        if !(self.perturbation >= 0.0) {
            return Err(CliError::Config("`init.perturbation` must be non-negative".into()));
        }
        if self.perturbation > 0.0 && self.seed.is_none() {
            return Err(CliError::Config("`init.perturbation` needs `init.seed`".into()));
        }
        Ok(())
    }
}
