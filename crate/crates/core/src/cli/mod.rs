//! Config-driven runs behind the `qesl` binary.
//!
//! Random streams: the top-level `seed` is split with
//! [`derive_seed`](crate::measures::derive_seed); stream [`SOLVER_STREAM`]
//! seeds the closest-separable-state search of `custom-gkls` runs and stream
//! [`REE_STREAM`] seeds the `ree` command. Nothing else in a run is random.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::path::Path;

use log::{info, warn};
use serde::Serialize;

use crate::bounds::{bound_report, BoundReport, ReportOptions};
use crate::dynamics::{gkls_evolve, GklsModel, TimeGrid};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::measures::{derive_seed, ree, MeasureResult, SolverConfig};
use crate::scenarios::{run_dephasing, run_nonlocal, Comparison, ScenarioOptions};
use crate::states::{is_ppt, BipartiteSplit, DensityMatrix};

pub use config::{parse_config, MatrixLiteral, Parameters, RunConfig, ScenarioKind, Units};
pub use output::{render_csv, render_svg, write_atomic, CSV_HEADER};

pub const SOLVER_STREAM: usize = 1;
pub const REE_STREAM: usize = 2;

/// Process exit status for an error: 2 for configuration problems, 4 for
/// I/O failures, 3 for everything raised by the numerics.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } => 2,
        Error::Io(_) => 4,
        _ => 3,
    }
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: BoundReport,
    /// Pipeline-versus-closed-form table of the built-in scenarios.
    pub comparison: Option<Comparison>,
    pub csv: String,
    pub svg: Option<String>,
}

/// Short machine-readable digest of a run, printed by the binary.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub trajectory: String,
    pub bound_kind: String,
    pub nodes: usize,
    pub lambda: f64,
    pub t_esl: f64,
    pub total_time: f64,
    pub max_t_esl_ratio: f64,
    /// Largest `rate_lhs − bound_total` over interior nodes; positive values
    /// are finite-difference error or a violated bound.
    pub max_rate_excess: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failover_from: Option<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub closed_form_max_abs_diff: BTreeMap<String, f64>,
}

impl RunOutcome {
    pub fn summary(&self) -> RunSummary {
        let r = &self.report;
        RunSummary {
            trajectory: r.trajectory_id.clone(),
            bound_kind: r.kind.to_string(),
            nodes: r.samples.len(),
            lambda: r.lambda(),
            t_esl: r.t_esl(),
            total_time: r.total_time(),
            max_t_esl_ratio: r.max_saturation(),
            max_rate_excess: r.samples[1..r.samples.len() - 1]
                .iter()
                .map(|s| -s.slack())
                .fold(f64::NEG_INFINITY, f64::max),
            failover_from: r.failover.map(|f| f.requested.to_string()),
            closed_form_max_abs_diff: self
                .comparison
                .iter()
                .flat_map(|c| c.fields.iter().map(|f| (f.field.clone(), f.max_abs_diff)))
                .collect(),
        }
    }
}

fn solver_for(config: &RunConfig, stream: usize) -> SolverConfig {
    SolverConfig {
        seed: derive_seed(config.seed, stream),
        ..config.solver.clone()
    }
}

fn input_error(path: &str) -> impl FnOnce(Error) -> Error + '_ {
    move |e| match e {
        Error::Config { .. } => e,
        other => Error::config(path, other.to_string()),
    }
}

fn custom_report(config: &RunConfig, p: &config::CustomGklsParams, grid: TimeGrid) -> Result<BoundReport> {
    let split = BipartiteSplit::new(p.dims[0], p.dims[1]).map_err(input_error("parameters.dims"))?;
    let n = split.dim();
    let h = p.hamiltonian.to_matrix(n, "parameters.hamiltonian")?;
    let jumps = p
        .jumps
        .iter()
        .enumerate()
        .map(|(i, l)| l.to_matrix(n, &format!("parameters.jumps[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let model = GklsModel::new(h.clone(), jumps, split).map_err(input_error("parameters.hamiltonian"))?;
    let rho0 = DensityMatrix::new(p.state.to_matrix(n, "parameters.state")?, split)
        .map_err(input_error("parameters.state"))?;
    let css = ree(&rho0, &solver_for(config, SOLVER_STREAM))?;
    info!("initial closest separable state: F_E = {:.12} nats", css.value);
    let traj = gkls_evolve(&model, &rho0, grid)?;
    let companion = gkls_evolve(&model, &css.css, grid)?;
    let last = companion.states.last().expect("grid has nodes");
    let ppt = is_ppt(last, 1e-10);
    if !ppt.is_ppt {
        warn!(
            "the companion left the PPT set (min eigenvalue {:.3e}); F_E is then a relative entropy \
             to an entangled reference",
            ppt.min_eigenvalue
        );
    }
    let traj = traj.with_companions(companion.states, companion.state_rates)?;
    let hamiltonian: Option<&CMatrix> = model.is_unitary().then_some(&h);
    bound_report(
        &traj,
        "custom-gkls",
        ReportOptions {
            kind: config.bound,
            mode: config.mode,
            hamiltonian,
            ..Default::default()
        },
    )
}

/// Runs `config` and writes the CSV and SVG files it names.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let grid = TimeGrid::new(0.0, config.grid.t1, config.grid.steps).map_err(input_error("grid"))?;
    let opts = ScenarioOptions {
        kinds: vec![config.bound],
        mode: config.mode,
        ..Default::default()
    };
    let (report, comparison) = match &config.parameters {
        Parameters::Nonlocal(p) => {
            let mut run = run_nonlocal(p, grid, &opts)?;
            (run.reports.remove(0), Some(run.comparison))
        }
        Parameters::Dephasing(p) => {
            let mut run = run_dephasing(p, grid, &opts)?;
            (run.reports.remove(0), Some(run.comparison))
        }
        Parameters::CustomGkls(p) => (custom_report(config, p, grid)?, None),
    };
    if let Some(f) = report.failover {
        warn!(
            "{} bound failed over to the trace bound at node {:?}",
            f.requested, f.node
        );
    }
    let csv = render_csv(&report);
    let svg = config
        .outputs
        .svg
        .as_ref()
        .map(|_| render_svg(&report, config.outputs.units));
    if let Some(path) = &config.outputs.csv {
        write_atomic(path, csv.as_bytes())?;
        info!("wrote {}", path.display());
    }
    if let (Some(path), Some(svg)) = (&config.outputs.svg, &svg) {
        write_atomic(path, svg.as_bytes())?;
        info!("wrote {}", path.display());
    }
    Ok(RunOutcome {
        report,
        comparison,
        csv,
        svg,
    })
}

/// Reads a whole input file; the error names the file.
pub fn read_input(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    parse_config(&read_input(path)?)
}

/// Result of the `ree` command.
#[derive(Debug, Clone, Serialize)]
pub struct ReeSummary {
    pub value_nats: f64,
    pub value_bits: f64,
    pub converged: bool,
    pub multiplicity: bool,
    pub iterations: usize,
    pub css: MatrixLiteral,
}

impl From<&MeasureResult> for ReeSummary {
    fn from(r: &MeasureResult) -> Self {
        Self {
            value_nats: r.value,
            value_bits: r.value * std::f64::consts::LOG2_E,
            converged: r.converged,
            multiplicity: r.multiplicity,
            iterations: r.iterations,
            css: MatrixLiteral::from_matrix(r.css.matrix()),
        }
    }
}

/// Relative entropy of entanglement of a state given as a JSON matrix
/// literal. `dims` defaults to two qubits; the solver is seeded from `seed`.
pub fn ree_of_literal(text: &str, dims: Option<[usize; 2]>, solver: &SolverConfig, seed: u64) -> Result<ReeSummary> {
    let literal: MatrixLiteral = serde_path_to_error::deserialize(&mut serde_json::Deserializer::from_str(text))
        .map_err(|e| Error::config("state", e.to_string()))?;
    let n = literal.0.len();
    let dims = match dims {
        Some(d) => d,
        None if n == 4 => [2, 2],
        None => {
            return Err(Error::config(
                "dims",
                format!("cannot infer the split of a {n}×{n} state"),
            ))
        }
    };
    let split = BipartiteSplit::new(dims[0], dims[1]).map_err(input_error("dims"))?;
    let rho = DensityMatrix::new(literal.to_matrix(split.dim(), "state")?, split).map_err(input_error("state"))?;
    let cfg = SolverConfig {
        seed: derive_seed(seed, REE_STREAM),
        ..solver.clone()
    };
    let result = ree(&rho, &cfg)?;
    if !result.converged {
        warn!("separable-set search stopped before converging");
    }
    Ok(ReeSummary::from(&result))
}
