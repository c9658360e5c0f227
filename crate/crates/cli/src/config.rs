//! `key = value` run configuration with dotted keys.
//!
//! Unset keys take the defaults of the canonical configuration of
//! `model.kind`. The resolved set of keys is echoed into every output file.

use adg_core::models::acoustic::AcousticBoundary;
use adg_core::models::{AcousticVariant, Form, ModelKind, Profile, Signal};
use adg_core::objective::{CostSpec, VolumeTerm};
use adg_core::problem::{canonical_parts, Direction, ModelSpec, Problem, StepCount};
use adg_core::time::StoragePolicy;
use adg_core::{BoundaryKind, Mesh1D, NodalBasis, QuadratureMode};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{key}: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: &str, message: impl Into<String>) -> Self {
        Self {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

const COMMON_KEYS: &[&str] = &[
    "model.kind",
    "model.form",
    "mesh.K",
    "mesh.x_left",
    "mesh.x_right",
    "mesh.boundary",
    "basis.N",
    "basis.quadrature",
    "time.T",
    "time.steps",
    "time.cfl",
    "time.output_every",
    "cost.volume",
    "cost.components",
    "cost.outflow",
    "cost.terminal",
    "cost.beta",
    "storage.policy",
    "storage.interval",
    "output.dir",
    "seed",
    "gradient.direction",
];

const ADVECTION_KEYS: &[&str] = &[
    "model.speed",
    "model.alpha",
    "model.inflow",
    "model.initial",
    "model.forcing",
    "model.forcing_signal",
];

const ACOUSTIC_KEYS: &[&str] = &[
    "model.variant",
    "model.density",
    "model.speed",
    "model.initial_e",
    "model.initial_v",
    "model.left.e",
    "model.left.v",
    "model.left.traction",
    "model.right.e",
    "model.right.v",
    "model.right.traction",
    "model.forcing",
    "model.forcing_signal",
];

const MAXWELL_KEYS: &[&str] = &[
    "model.permeability",
    "model.permittivity",
    "model.current_left",
    "model.current_right",
    "model.initial_h",
    "model.initial_e",
];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut entries = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::new(&format!("line {}", i + 1), "expected 'key = value'"))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::new(&format!("line {}", i + 1), "empty key"));
        }
        if entries.insert(key.to_string(), value.to_string()).is_some() {
            return Err(ConfigError::new(key, "key given more than once"));
        }
    }
    Ok(entries)
}

/// A fully resolved run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: Problem,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub direction: Direction,
    /// Steps between solution snapshots written by `forward`.
    pub output_every: usize,
    /// Every key with its effective value.
    pub resolved: BTreeMap<String, String>,
}

impl RunConfig {
    /// Header lines for output files.
    pub fn header(&self) -> Vec<String> {
        let mut lines = vec![format!("adg {}", env!("CARGO_PKG_VERSION"))];
        lines.extend(self.resolved.iter().map(|(k, v)| format!("{k} = {v}")));
        lines
    }
}

struct Lookup {
    entries: BTreeMap<String, String>,
}

impl Lookup {
    fn get(&self, key: &str) -> &str {
        self.entries.get(key).map(String::as_str).unwrap_or("")
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .parse::<T>()
            .map_err(|e| ConfigError::new(key, format!("cannot parse '{}': {e}", self.get(key))))
    }

    fn list(&self, key: &str) -> Result<Vec<usize>, ConfigError> {
        self.get(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| ConfigError::new(key, format!("bad index '{s}'"))))
            .collect()
    }
}

fn list_string(values: &[usize]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn boundary_string(bc: [BoundaryKind; 2]) -> String {
    if bc[0] == bc[1] {
        bc[0].to_string()
    } else {
        format!("{},{}", bc[0], bc[1])
    }
}

fn kind_defaults(kind: ModelKind) -> BTreeMap<String, String> {
    let (model, bc, cost) = canonical_parts(kind);
    let mut d: BTreeMap<String, String> = BTreeMap::new();
    let mut set = |k: &str, v: String| {
        d.insert(k.to_string(), v);
    };
    set("model.kind", kind.to_string());
    set("model.form", Form::Strong.to_string());
    set("mesh.K", "8".into());
    set("mesh.x_left", "0".into());
    set("mesh.x_right", "1".into());
    set("mesh.boundary", boundary_string(bc));
    set("basis.N", "3".into());
    set("basis.quadrature", "collocation".into());
    set("time.T", "1".into());
    set("time.cfl", "0.25".into());
    set("time.output_every", "0".into());
    let components = match &cost.volume {
        VolumeTerm::Energy { components } => components.clone(),
        _ => Vec::new(),
    };
    set("cost.volume", "energy".into());
    set("cost.components", list_string(&components));
    set("cost.outflow", cost.outflow_weight.to_string());
    set("cost.terminal", list_string(&cost.terminal));
    set("cost.beta", cost.beta.to_string());
    set("storage.policy", "all".into());
    set("storage.interval", "10".into());
    set("output.dir", "out".into());
    set("seed", "0".into());
    set("gradient.direction", Direction::Smooth.to_string());
    match model {
        ModelSpec::Advection {
            speed,
            alpha,
            inflow,
            initial,
            ..
        } => {
            set("model.speed", speed.to_string());
            set("model.alpha", alpha.to_string());
            set("model.inflow", inflow.to_string());
            set("model.initial", initial.to_string());
            set("model.forcing", Profile::Const(0.0).to_string());
            set("model.forcing_signal", Signal::Zero.to_string());
        }
        ModelSpec::Acoustic {
            density,
            speed,
            initial_e,
            initial_v,
            boundary,
            ..
        } => {
            set("model.variant", "continuous".into());
            set("model.density", density.to_string());
            set("model.speed", speed.to_string());
            set("model.initial_e", initial_e.to_string());
            set("model.initial_v", initial_v.to_string());
            for (side, b) in ["left", "right"].iter().zip(boundary) {
                set(&format!("model.{side}.e"), b.e.to_string());
                set(&format!("model.{side}.v"), b.v.to_string());
                set(&format!("model.{side}.traction"), b.traction.to_string());
            }
            set("model.forcing", Profile::Const(0.0).to_string());
            set("model.forcing_signal", Signal::Zero.to_string());
        }
        ModelSpec::Maxwell {
            permeability,
            permittivity,
            currents,
            initial_h,
            initial_e,
        } => {
            set("model.permeability", permeability.to_string());
            set("model.permittivity", permittivity.to_string());
            set("model.current_left", currents[0].to_string());
            set("model.current_right", currents[1].to_string());
            set("model.initial_h", initial_h.to_string());
            set("model.initial_e", initial_e.to_string());
        }
    }
    d
}

fn parse_quadrature(value: &str, order: usize) -> Result<QuadratureMode, String> {
    match value {
        "collocation" | "gll" => Ok(QuadratureMode::Collocation),
        "over" => Ok(QuadratureMode::exact_for(order)),
        other => match other.strip_prefix("over:") {
            Some(p) => p
                .parse()
                .map(|points| QuadratureMode::OverIntegration { points })
                .map_err(|_| format!("bad point count '{p}'")),
            None => Err(format!("expected collocation, over, or over:<points>, got '{other}'")),
        },
    }
}

fn parse_boundary(value: &str) -> Result<[BoundaryKind; 2], String> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [one] => Ok([one.parse()?; 2]),
        [l, r] => Ok([l.parse()?, r.parse()?]),
        _ => Err("expected one kind or 'left,right'".into()),
    }
}

fn forcing(l: &Lookup) -> Result<Option<(Profile, Signal)>, ConfigError> {
    let signal: Signal = l.parse("model.forcing_signal")?;
    let profile: Profile = l.parse("model.forcing")?;
    Ok((!signal.is_zero() && profile != Profile::Const(0.0)).then_some((profile, signal)))
}

fn model_spec(kind: ModelKind, l: &Lookup) -> Result<ModelSpec, ConfigError> {
    Ok(match kind {
        ModelKind::Advection => ModelSpec::Advection {
            speed: l.parse("model.speed")?,
            alpha: l.parse("model.alpha")?,
            inflow: l.parse("model.inflow")?,
            initial: l.parse("model.initial")?,
            forcing: forcing(l)?,
        },
        ModelKind::Acoustic => {
            let variant = match l.get("model.variant") {
                "continuous" => AcousticVariant::Continuous,
                "discontinuous" => AcousticVariant::Discontinuous,
                other => {
                    return Err(ConfigError::new(
                        "model.variant",
                        format!("expected continuous or discontinuous, got '{other}'"),
                    ))
                }
            };
            let side = |s: &str| -> Result<AcousticBoundary, ConfigError> {
                Ok(AcousticBoundary {
                    e: l.parse(&format!("model.{s}.e"))?,
                    v: l.parse(&format!("model.{s}.v"))?,
                    traction: l.parse(&format!("model.{s}.traction"))?,
                })
            };
            ModelSpec::Acoustic {
                variant,
                density: l.parse("model.density")?,
                speed: l.parse("model.speed")?,
                initial_e: l.parse("model.initial_e")?,
                initial_v: l.parse("model.initial_v")?,
                boundary: [side("left")?, side("right")?],
                forcing: forcing(l)?,
            }
        }
        ModelKind::Maxwell1d => ModelSpec::Maxwell {
            permeability: l.parse("model.permeability")?,
            permittivity: l.parse("model.permittivity")?,
            currents: [l.parse("model.current_left")?, l.parse("model.current_right")?],
            initial_h: l.parse("model.initial_h")?,
            initial_e: l.parse("model.initial_e")?,
        },
    })
}

/// Maps a problem-construction error to the key most likely responsible.
fn problem_error_key(err: &adg_core::Error) -> &'static str {
    use adg_core::error::{CostError, ModelError, SolverError};
    match err {
        adg_core::Error::Mesh(_) => "mesh",
        adg_core::Error::Basis(_) => "basis",
        adg_core::Error::Solver(SolverError::NonPositiveStep(_)) => "time",
        adg_core::Error::Cost(CostError::UnstableBoundaryCost) => "cost.outflow",
        adg_core::Error::Cost(CostError::NegativeBeta(_)) => "cost.beta",
        adg_core::Error::Cost(_) => "cost.components",
        adg_core::Error::Model(ModelError::AlphaOutOfRange(_)) => "model.alpha",
        adg_core::Error::Model(ModelError::UnsupportedBoundary { .. }) => "mesh.boundary",
        _ => "model",
    }
}

/// Resolves user entries against the defaults of `model.kind`.
pub fn resolve(user: &BTreeMap<String, String>) -> Result<RunConfig, ConfigError> {
    let kind: ModelKind = match user.get("model.kind") {
        Some(v) => v.parse().map_err(|e: String| ConfigError::new("model.kind", e))?,
        None => ModelKind::Advection,
    };
    let model_keys = match kind {
        ModelKind::Advection => ADVECTION_KEYS,
        ModelKind::Acoustic => ACOUSTIC_KEYS,
        ModelKind::Maxwell1d => MAXWELL_KEYS,
    };
    for key in user.keys() {
        if !COMMON_KEYS.contains(&key.as_str()) && !model_keys.contains(&key.as_str()) {
            return Err(ConfigError::new(key, format!("unknown key for model {kind}")));
        }
    }
    let mut entries = kind_defaults(kind);
    entries.extend(user.iter().map(|(k, v)| (k.clone(), v.clone())));
    if let Ok(dir) = std::env::var("ADG_OUTPUT_DIR") {
        if !dir.is_empty() {
            entries.insert("output.dir".into(), dir);
        }
    }
    let l = Lookup { entries };

    let k: usize = l.parse("mesh.K")?;
    if k == 0 {
        return Err(ConfigError::new("mesh.K", "element count must be at least 1"));
    }
    let (x_left, x_right): (f64, f64) = (l.parse("mesh.x_left")?, l.parse("mesh.x_right")?);
    let bc = parse_boundary(l.get("mesh.boundary")).map_err(|e| ConfigError::new("mesh.boundary", e))?;
    let mesh = Mesh1D::uniform(x_left, x_right, k, bc).map_err(|e| ConfigError::new("mesh.x_right", e.to_string()))?;
    let order: usize = l.parse("basis.N")?;
    let quadrature =
        parse_quadrature(l.get("basis.quadrature"), order).map_err(|e| ConfigError::new("basis.quadrature", e))?;
    let basis = NodalBasis::new(order, quadrature).map_err(|e| {
        let key = if order == 0 { "basis.N" } else { "basis.quadrature" };
        ConfigError::new(key, e.to_string())
    })?;
    let form: Form = l.parse("model.form")?;
    let t_final: f64 = l.parse("time.T")?;
    if !(t_final > 0.0) {
        return Err(ConfigError::new("time.T", "final time must be positive"));
    }
    let steps = if l.entries.contains_key("time.steps") {
        let n: usize = l.parse("time.steps")?;
        if n == 0 {
            return Err(ConfigError::new("time.steps", "step count must be at least 1"));
        }
        StepCount::Fixed(n)
    } else {
        let safety: f64 = l.parse("time.cfl")?;
        if !(safety > 0.0) {
            return Err(ConfigError::new("time.cfl", "CFL safety factor must be positive"));
        }
        StepCount::Cfl(safety)
    };
    let volume = match l.get("cost.volume") {
        "energy" => VolumeTerm::Energy {
            components: l.list("cost.components")?,
        },
        "none" => VolumeTerm::None,
        other => {
            return Err(ConfigError::new(
                "cost.volume",
                format!("expected energy or none, got '{other}'"),
            ))
        }
    };
    let cost = CostSpec {
        volume,
        outflow_weight: l.parse("cost.outflow")?,
        terminal: l.list("cost.terminal")?,
        beta: l.parse("cost.beta")?,
    };
    let storage = match l.get("storage.policy") {
        "all" => StoragePolicy::StoreAll,
        "checkpoint" => {
            let interval: usize = l.parse("storage.interval")?;
            if interval == 0 {
                return Err(ConfigError::new("storage.interval", "interval must be at least 1"));
            }
            StoragePolicy::UniformCheckpoint { interval }
        }
        other => {
            return Err(ConfigError::new(
                "storage.policy",
                format!("expected all or checkpoint, got '{other}'"),
            ))
        }
    };
    let model = model_spec(kind, &l)?;
    let problem = Problem::new(model, mesh, basis, form, t_final, steps, cost, storage)
        .map_err(|e| ConfigError::new(problem_error_key(&e), e.to_string()))?;

    let seed: u64 = l.parse("seed")?;
    let direction: Direction = l.parse("gradient.direction")?;
    let output_every: usize = l.parse("time.output_every")?;
    let mut resolved = l.entries;
    resolved.insert("time.steps".into(), problem.grid.n_steps.to_string());
    Ok(RunConfig {
        problem,
        output_dir: PathBuf::from(&resolved["output.dir"]),
        seed,
        direction,
        output_every,
        resolved,
    })
}

/// Reads and resolves a configuration file; `None` uses all defaults.
pub fn load(path: Option<&std::path::Path>) -> Result<RunConfig, ConfigError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| ConfigError::new("--config", format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    resolve(&parse_entries(&text)?)
}
