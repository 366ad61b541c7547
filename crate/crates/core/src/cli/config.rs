//! JSON run configuration.
//!
//! ```json
//! {
//!   "scenario": "nonlocal",
//!   "parameters": { "p": 0.0, "delta": 0.1, "theta": 3.5 },
//!   "grid": { "t1": 2.0, "steps": 400 },
//!   "outputs": { "csv": "fig1.csv", "svg": "fig1.svg", "units": "nats" },
//!   "bound": "unitary",
//!   "seed": 7
//! }
//! ```
//!
//! Only `scenario` and `parameters` are required. Unknown keys are rejected
//! and every error names the offending key path, e.g. `parameters.p`.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bounds::{BoundKind, EslMode};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::measures::SolverConfig;
use crate::scenarios::{DephasingParams, NonlocalParams};

/// Default end of the time grid.
pub const DEFAULT_T1: f64 = 2.0;
/// Default number of grid intervals.
pub const DEFAULT_STEPS: usize = 400;
/// Fewest intervals the five-point rate stencils can work with.
pub const MIN_STEPS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Nonlocal,
    Dephasing,
    CustomGkls,
}

impl ScenarioKind {
    /// Bound used when the config names none.
    pub fn default_bound(self) -> BoundKind {
        match self {
            ScenarioKind::Nonlocal => BoundKind::Unitary,
            ScenarioKind::Dephasing | ScenarioKind::CustomGkls => BoundKind::Cptp,
        }
    }
}

/// A complex matrix written as rows of entries, each entry either a real
/// number or a `[re, im]` pair: `[[1, [0, -1]], [[0, 1], 1]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixLiteral(pub Vec<Vec<Entry>>);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Real(re) => Complex64::new(re, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

impl MatrixLiteral {
    pub fn from_matrix(m: &CMatrix) -> Self {
        MatrixLiteral(
            (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| {
                            let z = m[(i, j)];
                            if z.im == 0.0 {
                                Entry::Real(z.re)
                            } else {
                                Entry::Complex([z.re, z.im])
                            }
                        })
                        .collect()
                })
                .collect(),
        )
    }

    /// Square matrix of side `dim`; `path` names the literal in errors.
    pub fn to_matrix(&self, dim: usize, path: &str) -> Result<CMatrix> {
        if self.0.len() != dim {
            return Err(Error::config(
                path,
                format!("expected {dim} rows, found {}", self.0.len()),
            ));
        }
        let mut m = CMatrix::zeros(dim, dim);
        for (i, row) in self.0.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::config(
                    format!("{path}[{i}]"),
                    format!("expected {dim} entries, found {}", row.len()),
                ));
            }
            for (j, e) in row.iter().enumerate() {
                let z = e.value();
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::config(format!("{path}[{i}][{j}]"), "entry is not finite"));
                }
                m[(i, j)] = z;
            }
        }
        Ok(m)
    }
}

/// A GKLS model and initial state given inline, on `dims[0] ⊗ dims[1]`.
///
/// The generator is `-i[H, ρ] + Σ (2 L ρ L† − {L†L, ρ})`. The companion
/// separable state starts at the numerically found closest separable state of
/// `state` and is moved by the same generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomGklsParams {
    #[serde(default = "qubit_dims")]
    pub dims: [usize; 2],
    pub hamiltonian: MatrixLiteral,
    #[serde(default)]
    pub jumps: Vec<MatrixLiteral>,
    /// Initial density matrix.
    pub state: MatrixLiteral,
}

fn qubit_dims() -> [usize; 2] {
    [2, 2]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Parameters {
    Nonlocal(NonlocalParams),
    Dephasing(DephasingParams),
    CustomGkls(CustomGklsParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub t1: f64,
    pub steps: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            t1: DEFAULT_T1,
            steps: DEFAULT_STEPS,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    /// Factor taking nats to these units.
    pub fn from_nats(self) -> f64 {
        match self {
            Units::Nats => 1.0,
            Units::Bits => std::f64::consts::LOG2_E,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
    /// Units of the entanglement axis in the SVG; the CSV carries both.
    pub units: Units,
}

/// A validated run description with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: ScenarioKind,
    pub parameters: Parameters,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub outputs: OutputConfig,
    pub bound: BoundKind,
    pub mode: EslMode,
    /// Root of every random stream in the run.
    pub seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: ScenarioKind,
    parameters: Value,
    #[serde(default)]
    grid: GridConfig,
    #[serde(default)]
    solver: SolverConfig,
    #[serde(default)]
    outputs: OutputConfig,
    #[serde(default)]
    bound: Option<BoundKind>,
    #[serde(default)]
    mode: EslMode,
    #[serde(default)]
    seed: u64,
}

fn path_error<E: std::fmt::Display>(prefix: &str, err: serde_path_to_error::Error<E>) -> Error {
    let inner = err.path().to_string();
    let path = match (prefix.is_empty(), inner.as_str()) {
        (true, _) => inner.clone(),
        (false, ".") => prefix.to_string(),
        (false, _) => format!("{prefix}.{inner}"),
    };
    Error::config(path, err.into_inner().to_string())
}

fn decode<T: serde::de::DeserializeOwned>(value: Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| path_error(prefix, e))
}

fn require_finite(path: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(path, format!("{v} is not finite")))
    }
}

fn require_probability(path: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::config(path, format!("must lie in [0, 1], got {p}")))
    }
}

/// Parses and validates a JSON config document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| path_error("", e))?;
    let parameters = match raw.scenario {
        ScenarioKind::Nonlocal => {
            let p: NonlocalParams = decode(raw.parameters, "parameters")?;
            require_probability("parameters.p", p.p)?;
            require_finite("parameters.delta", p.delta)?;
            require_finite("parameters.theta", p.theta)?;
            if let Some(mz) = p.mu_z {
                require_finite("parameters.mu_z", mz)?;
            }
            Parameters::Nonlocal(p)
        }
        ScenarioKind::Dephasing => {
            let p: DephasingParams = decode(raw.parameters, "parameters")?;
            require_probability("parameters.p", p.p)?;
            if !(p.gamma.is_finite() && p.gamma >= 0.0) {
                return Err(Error::config(
                    "parameters.gamma",
                    format!("must be finite and non-negative, got {}", p.gamma),
                ));
            }
            Parameters::Dephasing(p)
        }
        ScenarioKind::CustomGkls => {
            let p: CustomGklsParams = decode(raw.parameters, "parameters")?;
            if p.dims.iter().any(|&d| d < 2) {
                return Err(Error::config(
                    "parameters.dims",
                    "both factors need dimension at least 2",
                ));
            }
            let n = p.dims[0] * p.dims[1];
            p.hamiltonian.to_matrix(n, "parameters.hamiltonian")?;
            for (i, l) in p.jumps.iter().enumerate() {
                l.to_matrix(n, &format!("parameters.jumps[{i}]"))?;
            }
            p.state.to_matrix(n, "parameters.state")?;
            Parameters::CustomGkls(p)
        }
    };
    if !(raw.grid.t1.is_finite() && raw.grid.t1 > 0.0) {
        return Err(Error::config(
            "grid.t1",
            format!("must be finite and positive, got {}", raw.grid.t1),
        ));
    }
    if raw.grid.steps < MIN_STEPS {
        return Err(Error::config(
            "grid.steps",
            format!("must be at least {MIN_STEPS}, got {}", raw.grid.steps),
        ));
    }
    if raw.solver.seed != 0 {
        return Err(Error::config(
            "solver.seed",
            "solver streams derive from the top-level `seed`",
        ));
    }
    if raw.solver.restarts == 0 {
        return Err(Error::config("solver.restarts", "must be at least 1"));
    }
    if !(raw.solver.value_tol.is_finite() && raw.solver.value_tol > 0.0) {
        return Err(Error::config("solver.value_tol", "must be finite and positive"));
    }
    let bound = raw.bound.unwrap_or(raw.scenario.default_bound());
    if bound.needs_hamiltonian() && raw.scenario == ScenarioKind::Dephasing {
        return Err(Error::config(
            "bound",
            format!("the {bound} bound needs unitary dynamics"),
        ));
    }
    if bound.needs_hamiltonian() {
        if let Parameters::CustomGkls(p) = &parameters {
            if !p.jumps.is_empty() {
                return Err(Error::config(
                    "bound",
                    format!("the {bound} bound needs unitary dynamics"),
                ));
            }
        }
    }
    Ok(RunConfig {
        scenario: raw.scenario,
        parameters,
        grid: raw.grid,
        solver: raw.solver,
        outputs: raw.outputs,
        bound,
        mode: raw.mode,
        seed: raw.seed,
    })
}

impl RunConfig {
    /// Pretty JSON with all defaults spelled out; parsing it gives back `self`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes to JSON")
    }
}
