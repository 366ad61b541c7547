//! The two worked two-qubit examples, non-local unitary dynamics and local
//! pure dephasing, as closed forms and as end-to-end numeric runs that are
//! checked against them.

pub mod corpus;

use log::info;
use serde::{Deserialize, Serialize};

use crate::bounds::{bound_report, unitary_rate_bound, BoundKind, BoundReport, EslMode, ReportOptions};
use crate::choi::{apply_channel, closest_separable_map_unitary};
use crate::dynamics::{gkls_evolve, numeric_derivative, unitary_trajectory, GklsModel, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{c, identity, pauli_x, pauli_y, pauli_z, tensor, CMatrix, HermitianOperator, ZERO};
use crate::measures::{xlnx, SUPPORT_TOL};
use crate::states::{two_qubit_schmidt_state, BipartiteSplit, DensityMatrix};

/// Nodes with `2 − |x|` below this are singular for the non-local closed forms.
pub const SINGULAR_MARGIN: f64 = 1e-9;

/// Default step of the central difference used for companion rates.
pub const DERIVATIVE_STEP: f64 = 1e-5;

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
    }
    Ok(())
}

/// Binary entropy `−p ln p − (1−p) ln(1−p)` in nats.
pub fn binary_entropy(p: f64) -> f64 {
    -xlnx(p) - xlnx(1.0 - p)
}

/// `σ* = p|00⟩⟨00| + (1−p)|11⟩⟨11|`, the closest separable state of
/// `√p|00⟩ + √(1−p)|11⟩`.
pub fn schmidt_css(p: f64) -> Result<DensityMatrix> {
    check_p(p)?;
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = c(p, 0.0);
    m[(3, 3)] = c(1.0 - p, 0.0);
    Ok(DensityMatrix::from_trusted(m, BipartiteSplit::qubits()))
}

/// Parameters of `H = μx XX + μy YY + μz ZZ` acting on `√p|00⟩ + √(1−p)|11⟩`.
///
/// `delta = μx − μy` drives the state; `theta` enters only through the
/// closest separable map, and the couplings are taken as
/// `μx = (θ + δ)/2`, `μy = (θ − δ)/2`, so `θ = μx + μy`. The ordering
/// `μx ≥ μy ≥ μz ≥ 0` is not enforced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlocalParams {
    pub p: f64,
    pub delta: f64,
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_z: Option<f64>,
}

impl NonlocalParams {
    pub fn new(p: f64, delta: f64, theta: f64) -> Result<Self> {
        let out = Self {
            p,
            delta,
            theta,
            mu_z: None,
        };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        check_p(self.p)?;
        for (name, v) in [
            ("delta", self.delta),
            ("theta", self.theta),
            ("mu_z", self.mu_z.unwrap_or(0.0)),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} = {v} is not finite")));
            }
        }
        Ok(())
    }

    /// `(μx, μy, μz)`.
    pub fn couplings(&self) -> (f64, f64, f64) {
        (
            0.5 * (self.theta + self.delta),
            0.5 * (self.theta - self.delta),
            self.mu_z.unwrap_or(0.0),
        )
    }

    pub fn hamiltonian(&self) -> HermitianOperator {
        let (mx, my, mz) = self.couplings();
        xyz_hamiltonian(mx, my, mz)
    }
}

/// `μx XX + μy YY + μz ZZ`.
pub fn xyz_hamiltonian(mx: f64, my: f64, mz: f64) -> HermitianOperator {
    let h = tensor(&pauli_x(), &pauli_x()).scale(mx)
        + tensor(&pauli_y(), &pauli_y()).scale(my)
        + tensor(&pauli_z(), &pauli_z()).scale(mz);
    HermitianOperator::new(h).expect("sum of Hermitian Pauli products")
}

/// Closed-form quantities of the non-local example at one time.
#[derive(Debug, Clone)]
pub struct NonlocalClosedForm {
    pub t: f64,
    pub psi_t: DensityMatrix,
    /// Image of `σ*₀` under the closest separable map,
    /// `((x+2)|00⟩⟨00| + (2−x)|11⟩⟨11|)/4`.
    pub sigma_t: CMatrix,
    pub x: f64,
    pub y: f64,
    pub f_e: f64,
    pub u_lnsigma: f64,
    pub u_h: f64,
    pub correction: f64,
    /// `|x|` within [`SINGULAR_MARGIN`] of 2, where `y` and the correction
    /// diverge or become `0/0`.
    pub singular: bool,
}

impl NonlocalClosedForm {
    /// `2√(U_{ln σ} U_H) + correction`, NaN at singular nodes.
    pub fn integrand(&self) -> f64 {
        if self.singular {
            f64::NAN
        } else {
            2.0 * (self.u_lnsigma * self.u_h).max(0.0).sqrt() + self.correction
        }
    }
}

/// `a ln b` with `0 ln 0 = 0`.
fn weighted_log(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * b.ln()
    }
}

pub fn nonlocal_closed_forms(params: &NonlocalParams, t: f64) -> Result<NonlocalClosedForm> {
    params.validate()?;
    let NonlocalParams { p, delta, theta, .. } = *params;
    let q = 2.0 * p - 1.0;
    let (c2d, s2d) = ((2.0 * delta * t).cos(), (2.0 * delta * t).sin());
    let (c2t, s2t) = ((2.0 * theta * t).cos(), (2.0 * theta * t).sin());
    let coherence = (p * (1.0 - p)).sqrt();

    let mut psi = CMatrix::zeros(4, 4);
    psi[(0, 0)] = c(0.5 * (1.0 + q * c2d), 0.0);
    psi[(0, 3)] = c(coherence, 0.5 * q * s2d);
    psi[(3, 0)] = c(coherence, -0.5 * q * s2d);
    psi[(3, 3)] = c(0.5 * (1.0 - q * c2d), 0.0);
    let psi_t = DensityMatrix::new(psi, BipartiteSplit::qubits())?;

    let x = q * c2d + q * c2t;
    let mut sigma_t = CMatrix::zeros(4, 4);
    sigma_t[(0, 0)] = c(0.25 * (x + 2.0), 0.0);
    sigma_t[(3, 3)] = c(0.25 * (2.0 - x), 0.0);

    let y = (0.5 * x).atanh().powi(2);
    let f_e =
        -weighted_log(0.5 * (q * c2d + 1.0), 0.25 * (x + 2.0)) - weighted_log(0.5 * (-q * c2d + 1.0), 0.25 * (2.0 - x));
    let u_lnsigma = -0.5 * (q * q * (4.0 * delta * t).cos() + 4.0 * (p - 1.0) * p - 1.0) * y;
    let u_h = delta * delta * q * q;
    let g = q * q * (c2d - c2t) * (delta * s2d + theta * s2t);
    let correction = 2.0 * (g / ((x - 2.0) * (x + 2.0))).abs();
    Ok(NonlocalClosedForm {
        t,
        psi_t,
        sigma_t,
        x,
        y,
        f_e,
        u_lnsigma,
        u_h,
        correction,
        singular: 2.0 - x.abs() <= SINGULAR_MARGIN,
    })
}

/// Equal-rate local pure dephasing of `√p|00⟩ + √(1−p)|11⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingParams {
    pub p: f64,
    pub gamma: f64,
}

impl DephasingParams {
    pub fn new(p: f64, gamma: f64) -> Result<Self> {
        let out = Self { p, gamma };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        check_p(self.p)?;
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma = {} must be finite and non-negative",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Jump operators `√(γ/2) Z⊗I` and `√(γ/2) I⊗Z`.
    pub fn model(&self) -> GklsModel {
        let amp = (0.5 * self.gamma).sqrt();
        let jumps = vec![
            tensor(&pauli_z(), &identity(2)).scale(amp),
            tensor(&identity(2), &pauli_z()).scale(amp),
        ];
        GklsModel::new(CMatrix::zeros(4, 4), jumps, BipartiteSplit::qubits()).expect("local Pauli jumps on two qubits")
    }
}

/// Closed-form quantities of the dephasing example at one time.
#[derive(Debug, Clone)]
pub struct DephasingClosedForm {
    pub t: f64,
    pub rho_t: DensityMatrix,
    pub sigma_star: DensityMatrix,
    pub f_e: f64,
    /// `‖L(ρ_t)‖₂ = 4√2 γ √(p(1−p)) e^{−4γt}`.
    pub speed: f64,
    /// `tr|ρ̇_t| = 8γ√(p(1−p)) e^{−4γt}`.
    pub trace_rate: f64,
    /// `‖ln ρ_t − ln σ*‖₂`, in closed form only at `p = 1/2`.
    pub surprisal: Option<f64>,
    pub correction: f64,
}

pub fn dephasing_closed_forms(params: &DephasingParams, t: f64) -> Result<DephasingClosedForm> {
    params.validate()?;
    let DephasingParams { p, gamma } = *params;
    let decay = (-4.0 * gamma * t).exp();
    let coherence = (p * (1.0 - p)).sqrt() * decay;
    let mut rho = CMatrix::zeros(4, 4);
    rho[(0, 0)] = c(p, 0.0);
    rho[(0, 3)] = c(coherence, 0.0);
    rho[(3, 0)] = c(coherence, 0.0);
    rho[(3, 3)] = c(1.0 - p, 0.0);
    Ok(DephasingClosedForm {
        t,
        rho_t: DensityMatrix::new(rho, BipartiteSplit::qubits())?,
        sigma_star: schmidt_css(p)?,
        f_e: dephasing_h(p, t, gamma),
        speed: 4.0 * 2f64.sqrt() * (gamma * gamma * (1.0 - p) * p * (-8.0 * gamma * t).exp()).sqrt(),
        trace_rate: 8.0 * gamma * coherence,
        surprisal: (p == 0.5).then(|| surprisal_at_half(t, gamma)),
        correction: 0.0,
    })
}

/// `‖ln ρ_t − ln σ*‖₂` at `p = 1/2`: with `e = e^{−4γt}` the eigenvalues of
/// the difference are `ln(1 ± e)`, so the norm is
/// `√(½(ln(1+e) + ln(1−e))² + 2 artanh(e)²)`.
pub fn surprisal_at_half(t: f64, gamma: f64) -> f64 {
    let e = (-4.0 * gamma * t).exp();
    let sum = e.ln_1p() + (-e).ln_1p();
    (0.5 * sum * sum + 2.0 * e.atanh().powi(2)).sqrt()
}

/// `F_E(t) = D(ρ_t‖σ*)` along the dephasing example, in nats.
///
/// Written in terms of `a = (1−2p)² e^{8γt} − 4(p−1)p` and four logarithms
/// of ratios of the eigenvalues of `ρ_t` to those of `σ*`. At `t = 0` it is the
/// binary entropy of `p`; at `p ∈ {0, 1}` the coherence vanishes, `ρ_t = σ*`,
/// and the value is the limit 0.
pub fn dephasing_h(p: f64, t: f64, gamma: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    if t == 0.0 || gamma == 0.0 {
        return binary_entropy(p);
    }
    let e = (4.0 * gamma * t).exp();
    let q = 1.0 - 2.0 * p;
    let a = q * q * e * e - 4.0 * (p - 1.0) * p;
    let sa = a.sqrt();
    let a1 = (sa - e) / (e * 2.0 * (p - 1.0));
    let a2 = -(sa + e) / (e * 2.0 * (p - 1.0));
    let a3 = (e - sa) / (e * 2.0 * p);
    let a4 = (sa + e) / (e * 2.0 * p);
    let terms = -(p - 1.0) * weighted_log_pos(sa * e + (2.0 * p - 1.0) * e * e - 2.0 * p, a1)
        - (p - 1.0) * weighted_log_pos(sa * e + (1.0 - 2.0 * p) * e * e + 2.0 * p, a2)
        + p * weighted_log_pos(sa * e + (1.0 - 2.0 * p) * e * e + 2.0 * (p - 1.0), a3)
        + p * weighted_log_pos(sa * e + (2.0 * p - 1.0) * e * e - 2.0 * p + 2.0, a4);
    terms / (2.0 * sa * e)
}

/// `a ln b` where a vanishing or round-off-negative `b` comes with a
/// vanishing `a`.
fn weighted_log_pos(a: f64, b: f64) -> f64 {
    if b <= 0.0 {
        0.0
    } else {
        weighted_log(a, b)
    }
}

/// Options shared by the scenario runners.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOptions {
    /// Bound kinds to evaluate, each giving one report.
    pub kinds: Vec<BoundKind>,
    pub mode: EslMode,
    /// Step of the central difference for the companion rates.
    pub derivative_step: f64,
    pub support_tol: f64,
}

impl ScenarioOptions {
    pub fn with_kinds(kinds: &[BoundKind]) -> Self {
        Self {
            kinds: kinds.to_vec(),
            ..Default::default()
        }
    }
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        Self {
            kinds: vec![BoundKind::Cptp],
            mode: EslMode::Change,
            derivative_step: DERIVATIVE_STEP,
            support_tol: SUPPORT_TOL,
        }
    }
}

/// Largest absolute disagreement between the numeric pipeline and a closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldComparison {
    pub field: String,
    pub max_abs_diff: f64,
    /// Time of the largest disagreement.
    pub at_t: f64,
    pub nodes_compared: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub fields: Vec<FieldComparison>,
    /// Nodes skipped because the closed form is singular there.
    pub singular_nodes: Vec<usize>,
}

impl Comparison {
    pub fn get(&self, field: &str) -> Option<f64> {
        self.fields.iter().find(|f| f.field == field).map(|f| f.max_abs_diff)
    }

    fn push(&mut self, field: &str, times: &[f64], diffs: impl IntoIterator<Item = (usize, f64)>) {
        let mut worst = (0.0, times.first().copied().unwrap_or(0.0));
        let mut count = 0;
        for (k, d) in diffs {
            count += 1;
            if d > worst.0 || d.is_nan() {
                worst = (d, times[k]);
            }
        }
        self.fields.push(FieldComparison {
            field: field.to_string(),
            max_abs_diff: worst.0,
            at_t: worst.1,
            nodes_compared: count,
        });
    }
}

fn max_entry_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Numeric trajectory with its bound reports and the closed-form comparison.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub trajectory: Trajectory,
    pub hamiltonian: Option<CMatrix>,
    pub reports: Vec<BoundReport>,
    pub comparison: Comparison,
}

impl ScenarioRun {
    pub fn report(&self, kind: BoundKind) -> Option<&BoundReport> {
        self.reports
            .iter()
            .find(|r| r.kind == kind || r.failover.is_some_and(|f| f.requested == kind))
    }
}

/// Companion states `σ_t` from a family of separable states, with central
/// differences for their rates.
pub fn companions_from_family<F>(grid: TimeGrid, step: f64, family: F) -> Result<(Vec<DensityMatrix>, Vec<CMatrix>)>
where
    F: Fn(f64) -> Result<DensityMatrix>,
{
    let domain = (f64::NEG_INFINITY, f64::INFINITY);
    let mut states = Vec::with_capacity(grid.len());
    let mut rates = Vec::with_capacity(grid.len());
    for t in grid.nodes() {
        rates.push(numeric_derivative(
            |s| family(s).map(DensityMatrix::into_matrix),
            t,
            step,
            domain,
        )?);
        states.push(family(t)?);
    }
    Ok((states, rates))
}

/// `σ_t = E*_t(σ₀)` with `E*_t` the closest separable map of `e^{−iHt}`.
pub fn unitary_companions(
    h: &HermitianOperator,
    sigma0: &DensityMatrix,
    grid: TimeGrid,
    step: f64,
) -> Result<(Vec<DensityMatrix>, Vec<CMatrix>)> {
    let split = sigma0.split();
    companions_from_family(grid, step, |t| {
        let map = closest_separable_map_unitary(h, t - grid.t0, split)?;
        apply_channel(&map, sigma0)
    })
}

fn reports_for(traj: &Trajectory, id: &str, h: Option<&CMatrix>, opts: &ScenarioOptions) -> Result<Vec<BoundReport>> {
    opts.kinds
        .iter()
        .map(|&kind| {
            bound_report(
                traj,
                id,
                ReportOptions {
                    kind,
                    mode: opts.mode,
                    hamiltonian: h,
                    support_tol: opts.support_tol,
                    failover: true,
                    ree_end: None,
                },
            )
        })
        .collect()
}

/// Non-local example: exact unitary evolution, companions from the closest
/// separable map of the propagator, bound reports and a node-by-node
/// comparison against [`nonlocal_closed_forms`].
pub fn run_nonlocal(params: &NonlocalParams, grid: TimeGrid, opts: &ScenarioOptions) -> Result<ScenarioRun> {
    params.validate()?;
    let split = BipartiteSplit::qubits();
    let h = params.hamiltonian();
    let rho0 = DensityMatrix::from_pure(&two_qubit_schmidt_state(params.p)?, split)?;
    let sigma0 = schmidt_css(params.p)?;
    let traj = unitary_trajectory(&h, &rho0, grid)?;
    let (companions, rates) = unitary_companions(&h, &sigma0, grid, opts.derivative_step)?;
    let traj = traj.with_companions(companions, rates)?;
    let id = format!(
        "nonlocal(p={}, delta={}, theta={})",
        params.p, params.delta, params.theta
    );
    let reports = reports_for(&traj, &id, Some(h.matrix()), opts)?;

    let times = traj.times();
    let closed: Vec<NonlocalClosedForm> = times
        .iter()
        .map(|&t| nonlocal_closed_forms(params, t - grid.t0))
        .collect::<Result<_>>()?;
    let regular: Vec<usize> = (0..closed.len()).filter(|&k| !closed[k].singular).collect();
    let mut cmp = Comparison {
        singular_nodes: (0..closed.len()).filter(|&k| closed[k].singular).collect(),
        ..Default::default()
    };
    if !cmp.singular_nodes.is_empty() {
        info!("{id}: {} singular closed-form nodes", cmp.singular_nodes.len());
    }
    cmp.push(
        "psi",
        &times,
        (0..closed.len()).map(|k| (k, max_entry_diff(traj.states[k].matrix(), closed[k].psi_t.matrix()))),
    );
    cmp.push(
        "sigma",
        &times,
        (0..closed.len()).map(|k| (k, max_entry_diff(traj.companions[k].matrix(), &closed[k].sigma_t))),
    );
    let fe = crate::bounds::fe_along_trajectory(&traj, opts.support_tol).ok();
    if let Some(fe) = &fe {
        cmp.push(
            "f_e",
            &times,
            regular.iter().map(|&k| (k, (fe[k].1 - closed[k].f_e).abs())),
        );
    }
    let mut u_h = Vec::new();
    let mut u_log = Vec::new();
    let mut corr = Vec::new();
    for &k in &regular {
        let terms = unitary_rate_bound(
            &traj.states[k],
            h.matrix(),
            &traj.companions[k],
            &traj.companion_rates[k],
            false,
            opts.support_tol,
        );
        if let Ok(terms) = terms {
            u_h.push((k, ((0.5 * terms.speed_term).powi(2) - closed[k].u_h).abs()));
            u_log.push((k, (terms.surprisal_term.powi(2) - closed[k].u_lnsigma).abs()));
            corr.push((k, (terms.css_correction - closed[k].correction).abs()));
        }
    }
    cmp.push("u_h", &times, u_h);
    cmp.push("u_lnsigma", &times, u_log);
    cmp.push("correction", &times, corr);
    Ok(ScenarioRun {
        trajectory: traj,
        hamiltonian: Some(h.into_matrix()),
        reports,
        comparison: cmp,
    })
}

/// Dephasing example: RK4 integration of the GKLS equation, the stationary
/// companion `σ*` (the dephasing map is its own closest separable map and
/// fixes `σ*`), bound reports and a comparison against
/// [`dephasing_closed_forms`].
pub fn run_dephasing(params: &DephasingParams, grid: TimeGrid, opts: &ScenarioOptions) -> Result<ScenarioRun> {
    params.validate()?;
    let split = BipartiteSplit::qubits();
    let rho0 = DensityMatrix::from_pure(&two_qubit_schmidt_state(params.p)?, split)?;
    let sigma = schmidt_css(params.p)?;
    let traj = gkls_evolve(&params.model(), &rho0, grid)?;
    let n = traj.len();
    let traj = traj.with_companions(vec![sigma; n], vec![CMatrix::from_element(4, 4, ZERO); n])?;
    let id = format!("dephasing(p={}, gamma={})", params.p, params.gamma);
    let reports = reports_for(&traj, &id, None, opts)?;

    let times = traj.times();
    let closed: Vec<DephasingClosedForm> = times
        .iter()
        .map(|&t| dephasing_closed_forms(params, t - grid.t0))
        .collect::<Result<_>>()?;
    let mut cmp = Comparison::default();
    cmp.push(
        "rho",
        &times,
        (0..n).map(|k| (k, max_entry_diff(traj.states[k].matrix(), closed[k].rho_t.matrix()))),
    );
    if let Ok(fe) = crate::bounds::fe_along_trajectory(&traj, opts.support_tol) {
        cmp.push("f_e", &times, (0..n).map(|k| (k, (fe[k].1 - closed[k].f_e).abs())));
    }
    cmp.push(
        "speed",
        &times,
        (0..n).map(|k| {
            let s = crate::linalg::schatten_norm(&traj.state_rates[k], crate::linalg::SchattenP::Two);
            (k, (s - closed[k].speed).abs())
        }),
    );
    if let Some(report) = reports.iter().find(|r| r.kind == BoundKind::Cptp) {
        cmp.push(
            "correction",
            &times,
            report
                .samples
                .iter()
                .enumerate()
                .map(|(k, s)| (k, s.terms.css_correction.abs())),
        );
        if params.p == 0.5 {
            cmp.push(
                "surprisal",
                &times,
                report.samples.iter().enumerate().filter_map(|(k, s)| {
                    let exact = closed[k].surprisal.filter(|v| v.is_finite())?;
                    Some((k, (s.terms.surprisal_term - exact).abs()))
                }),
            );
        }
    }
    Ok(ScenarioRun {
        trajectory: traj,
        hamiltonian: None,
        reports,
        comparison: cmp,
    })
}
