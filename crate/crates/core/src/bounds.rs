//! Entanglement-rate bounds and the speed-limit times obtained by integrating
//! them along a trajectory.
//!
//! Every bound compares a left-hand rate, the finite-difference derivative of
//! `F_E(t) = D(ρ_t‖σ_t)` or of `D_tr(t) = tr|ρ_t − σ_t|`, with an integrand
//! assembled from instantaneous quantities at the same node.

use std::fmt;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::linalg::{
    check_dim, eigh, eigh_unchecked, hadamard_perturbation_with, log_from_spectrum, schatten_norm,
    trace_norm_hermitian, trace_product, CMatrix, RankTolerance, SchattenP, SpectralDecomposition,
};
use crate::measures::{populations, u_quantity, variance, von_neumann_entropy, RelativeEntropy};
use crate::states::DensityMatrix;

/// Below this a time-averaged integrand counts as zero.
pub const LAMBDA_FLOOR: f64 = 1e-14;

/// Purity accepted by the pure-state form of the unitary bound.
pub const PURITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `‖ρ̇‖₂ ‖ln ρ − ln σ‖₂ + |tr ρ G_σ(σ̇)|`.
    Cptp,
    /// `2√(U_{ln σ} U_H) + |tr ρ G_σ(σ̇)|`.
    Unitary,
    /// `2 Δ(ln σ) ΔH + |tr ρ G_σ(σ̇)|`, pure states only.
    UnitaryPure,
    /// `tr|ρ̇ − σ̇|`, bounding the trace-distance rate.
    Trace,
}

impl BoundKind {
    pub const ALL: [BoundKind; 4] = [Self::Cptp, Self::Unitary, Self::UnitaryPure, Self::Trace];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Cptp => "cptp",
            Self::Unitary => "unitary",
            Self::UnitaryPure => "unitary_pure",
            Self::Trace => "trace",
        }
    }

    /// Whether the left-hand side is the relative-entropy rate (as opposed to
    /// the trace-distance rate).
    pub fn uses_relative_entropy(self) -> bool {
        self != Self::Trace
    }

    pub fn needs_hamiltonian(self) -> bool {
        matches!(self, Self::Unitary | Self::UnitaryPure)
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Right-hand side of a rate bound, split into its named parts.
///
/// The meaning of the first two terms depends on the kind:
///
/// | kind           | `speed_term` | `surprisal_term` |
/// |----------------|--------------|------------------|
/// | `cptp`         | `‖ρ̇‖₂`       | `‖ln ρ − ln σ‖₂` |
/// | `unitary`      | `2√U_H`      | `√U_{ln σ}`      |
/// | `unitary_pure` | `2ΔH`        | `Δ ln σ`         |
/// | `trace`        | `tr|ρ̇ − σ̇|`  | `1`              |
///
/// and always `total = speed_term · surprisal_term + css_correction`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateTerms {
    pub kind: BoundKind,
    pub speed_term: f64,
    pub surprisal_term: f64,
    pub css_correction: f64,
    pub total: f64,
}

impl RateTerms {
    fn new(kind: BoundKind, speed_term: f64, surprisal_term: f64, css_correction: f64) -> Self {
        Self {
            kind,
            speed_term,
            surprisal_term,
            css_correction,
            total: speed_term * surprisal_term + css_correction,
        }
    }
}

/// One node of a bound check: the observed rate and the bound on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBoundSample {
    pub t: f64,
    pub lhs_rate: f64,
    pub terms: RateTerms,
}

impl RateBoundSample {
    /// `total − lhs_rate`; negative means the bound is violated.
    pub fn slack(&self) -> f64 {
        self.terms.total - self.lhs_rate
    }
}

/// Spectral data of a companion state shared by the relative-entropy bounds.
struct Companion {
    spec: SpectralDecomposition,
    log: CMatrix,
    cut: f64,
}

impl Companion {
    fn new(sigma: &CMatrix) -> Self {
        let spec = eigh_unchecked(sigma);
        let tol = RankTolerance::default();
        let cut = tol.cutoff(spec.max_abs());
        let log = log_from_spectrum(&spec, tol);
        Self { spec, log, cut }
    }

    /// `tr((I − Π_σ) ρ)`, i.e. `‖(I − Π_σ)ρ(I − Π_σ)‖₁` for PSD `ρ`.
    fn leakage(&self, rho: &CMatrix) -> f64 {
        populations(rho, &self.spec.eigenvectors)
            .iter()
            .zip(&self.spec.eigenvalues)
            .filter(|(_, &s)| s <= self.cut)
            .map(|(p, _)| p.max(0.0))
            .sum()
    }

    fn check_support(&self, rho: &CMatrix, tol: f64) -> Result<()> {
        let leakage = self.leakage(rho);
        if leakage >= tol {
            return Err(Error::SupportViolation { leakage, node: None });
        }
        Ok(())
    }

    fn correction(&self, rho: &CMatrix, sigma_dot: &CMatrix) -> Result<f64> {
        if sigma_dot.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
            return Ok(0.0);
        }
        let g = hadamard_perturbation_with(&self.spec, sigma_dot, RankTolerance::default())?;
        Ok(trace_product(rho, &g).re.abs())
    }
}

fn check_pair(
    rho: &DensityMatrix,
    rho_dot: Option<&CMatrix>,
    sigma: &DensityMatrix,
    sigma_dot: &CMatrix,
) -> Result<()> {
    let n = rho.dim();
    check_dim(sigma.matrix(), n, "companion state")?;
    check_dim(sigma_dot, n, "companion rate")?;
    if let Some(r) = rho_dot {
        check_dim(r, n, "state rate")?;
    }
    Ok(())
}

/// Rate bound for arbitrary CPTP dynamics.
///
/// Fails with [`Error::SupportViolation`] when
/// `‖(I − Π_σ)ρ(I − Π_σ)‖₁ ≥ tol`, since `F_E` is then infinite.
pub fn cptp_rate_bound(
    rho: &DensityMatrix,
    rho_dot: &CMatrix,
    sigma: &DensityMatrix,
    sigma_dot: &CMatrix,
    tol: f64,
) -> Result<RateTerms> {
    check_pair(rho, Some(rho_dot), sigma, sigma_dot)?;
    let comp = Companion::new(sigma.matrix());
    comp.check_support(rho.matrix(), tol)?;
    let rho_log = log_from_spectrum(&eigh_unchecked(rho.matrix()), RankTolerance::default());
    let speed = schatten_norm(rho_dot, SchattenP::Two);
    let surprisal = schatten_norm(&(rho_log - &comp.log), SchattenP::Two);
    let correction = comp.correction(rho.matrix(), sigma_dot)?;
    Ok(RateTerms::new(BoundKind::Cptp, speed, surprisal, correction))
}

/// Rate bound for unitary dynamics generated by `h`.
///
/// With `pure` set the variances `Δ(ln σ)`, `ΔH` replace `√U`; the state must
/// then have purity `1 ± 1e-8`.
pub fn unitary_rate_bound(
    rho: &DensityMatrix,
    h: &CMatrix,
    sigma: &DensityMatrix,
    sigma_dot: &CMatrix,
    pure: bool,
    tol: f64,
) -> Result<RateTerms> {
    check_pair(rho, None, sigma, sigma_dot)?;
    check_dim(h, rho.dim(), "hamiltonian")?;
    let comp = Companion::new(sigma.matrix());
    comp.check_support(rho.matrix(), tol)?;
    let correction = comp.correction(rho.matrix(), sigma_dot)?;
    if pure {
        let purity = rho.purity();
        if (purity - 1.0).abs() > PURITY_TOL {
            return Err(Error::NotPure { purity });
        }
        let dh = variance(rho, h)?.max(0.0).sqrt();
        let dlog = variance(rho, &comp.log)?.max(0.0).sqrt();
        Ok(RateTerms::new(BoundKind::UnitaryPure, 2.0 * dh, dlog, correction))
    } else {
        let uh = u_quantity(rho, h)?;
        let ulog = u_quantity(rho, &comp.log)?;
        Ok(RateTerms::new(
            BoundKind::Unitary,
            2.0 * uh.sqrt(),
            ulog.sqrt(),
            correction,
        ))
    }
}

/// Bound `tr|ρ̇ − σ̇|` on the rate of `tr|ρ_t − σ_t|`.
pub fn trace_rate_bound(rho_dot: &CMatrix, sigma_dot: &CMatrix) -> Result<RateTerms> {
    check_dim(sigma_dot, rho_dot.nrows(), "companion rate")?;
    let total = trace_norm_hermitian(&(rho_dot - sigma_dot));
    Ok(RateTerms::new(BoundKind::Trace, total, 1.0, 0.0))
}

/// `F_E(t) = D(ρ_t‖σ_t)` in nats at every node.
///
/// A node where `ρ_t` leaks out of `supp σ_t` fails with a
/// [`Error::SupportViolation`] naming that node.
pub fn fe_along_trajectory(traj: &Trajectory, tol: f64) -> Result<Vec<(f64, f64)>> {
    require_companions(traj)?;
    let times = traj.times();
    let values: Vec<Result<f64>> = traj
        .states
        .par_iter()
        .zip(traj.companions.par_iter())
        .enumerate()
        .map(|(k, (rho, sigma))| {
            let spec = eigh_unchecked(sigma.matrix());
            let cut = RankTolerance::default().cutoff(spec.max_abs());
            let value = crate::measures::relative_entropy_with(rho.matrix(), von_neumann_entropy(rho), &spec, tol, cut);
            match value {
                RelativeEntropy::Finite(v) => Ok(v),
                RelativeEntropy::Infinite => Err(Error::SupportViolation {
                    leakage: Companion {
                        spec,
                        log: CMatrix::zeros(0, 0),
                        cut,
                    }
                    .leakage(rho.matrix()),
                    node: Some(k),
                }),
            }
        })
        .collect();
    times.into_iter().zip(values).map(|(t, v)| v.map(|v| (t, v))).collect()
}

/// `tr|ρ_t − σ_t|` at every node, plus a flag per interval `(t_k, t_{k+1})`
/// telling whether the sign pattern of `ρ − σ` changes across it (a kink of
/// the trace distance).
pub fn trace_distance_along_trajectory(traj: &Trajectory) -> Result<(Vec<f64>, Vec<bool>)> {
    require_companions(traj)?;
    let per_node: Vec<(f64, (usize, usize))> = traj
        .states
        .par_iter()
        .zip(traj.companions.par_iter())
        .map(|(rho, sigma)| {
            let diff = rho.matrix() - sigma.matrix();
            let spec = eigh_unchecked(&diff);
            let zero = 1e-12 * spec.max_abs().max(1e-300);
            let pos = spec.eigenvalues.iter().filter(|&&l| l > zero).count();
            let neg = spec.eigenvalues.iter().filter(|&&l| l < -zero).count();
            (spec.eigenvalues.iter().map(|l| l.abs()).sum(), (pos, neg))
        })
        .collect();
    let values = per_node.iter().map(|(v, _)| *v).collect();
    let kinks = per_node.windows(2).map(|w| w[0].1 != w[1].1).collect();
    Ok((values, kinks))
}

fn require_companions(traj: &Trajectory) -> Result<()> {
    if !traj.has_companions() {
        return Err(Error::InvalidArgument(
            "trajectory carries no companion separable states".into(),
        ));
    }
    Ok(())
}

/// Rank of a density matrix, counting eigenvalues above `1e-12`.
fn numeric_rank(rho: &DensityMatrix) -> usize {
    eigh_unchecked(rho.matrix())
        .eigenvalues
        .iter()
        .filter(|&&l| l > 1e-12)
        .count()
}

/// Shape of the bound integrand right after the first node, in terms of
/// `τ = (t − t0)/h`.
///
/// A state or companion that gains rank at `t0` makes the relative-entropy
/// integrand non-analytic there, and the trapezoid rule then carries a
/// relative error on the first intervals that does not shrink with `h`. The
/// speed-limit quadrature integrates the first two intervals against the
/// matching model instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartBehaviour {
    Smooth,
    /// `f ≈ a + b ln τ`: the state gains rank, the surprisal diverges.
    LogDivergent,
    /// `f ≈ c + aτ + bτ ln τ`: only the companion gains rank.
    LogCorrected,
}

/// Start behaviour of the `kind` integrand along `traj`, read off the ranks of
/// the first two states and companions.
pub fn start_behaviour(traj: &Trajectory, kind: BoundKind) -> StartBehaviour {
    if !kind.uses_relative_entropy() || traj.len() < 3 || !traj.has_companions() {
        return StartBehaviour::Smooth;
    }
    if numeric_rank(&traj.states[1]) > numeric_rank(&traj.states[0]) {
        StartBehaviour::LogDivergent
    } else if numeric_rank(&traj.companions[1]) > numeric_rank(&traj.companions[0]) {
        StartBehaviour::LogCorrected
    } else {
        StartBehaviour::Smooth
    }
}

/// Bound terms at every node of a trajectory. `hamiltonian` is required for
/// the unitary kinds. Support violations name their node.
///
/// When the state gains rank right after the first node, the surprisal
/// diverges as `t → t0` and the value computed on the exact initial support
/// is not its limit. The first node then carries an infinite surprisal and
/// total (unless the speed vanishes there).
pub fn rate_terms_along(
    traj: &Trajectory,
    kind: BoundKind,
    hamiltonian: Option<&CMatrix>,
    tol: f64,
) -> Result<Vec<RateTerms>> {
    require_companions(traj)?;
    let h = match (kind.needs_hamiltonian(), hamiltonian) {
        (true, None) => {
            return Err(Error::InvalidArgument(format!(
                "the {kind} bound needs the Hamiltonian"
            )))
        }
        (_, h) => h,
    };
    (0..traj.len())
        .into_par_iter()
        .map(|k| {
            let (rho, rho_dot) = (&traj.states[k], &traj.state_rates[k]);
            let (sigma, sigma_dot) = (&traj.companions[k], &traj.companion_rates[k]);
            let terms = match kind {
                BoundKind::Cptp => cptp_rate_bound(rho, rho_dot, sigma, sigma_dot, tol),
                BoundKind::Unitary | BoundKind::UnitaryPure => unitary_rate_bound(
                    rho,
                    h.expect("checked above"),
                    sigma,
                    sigma_dot,
                    kind == BoundKind::UnitaryPure,
                    tol,
                ),
                BoundKind::Trace => trace_rate_bound(rho_dot, sigma_dot),
            };
            terms.map_err(|e| match e {
                Error::SupportViolation { leakage, .. } => Error::SupportViolation { leakage, node: Some(k) },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(|mut terms| {
            let divergent = start_behaviour(traj, kind) == StartBehaviour::LogDivergent;
            if divergent && terms[0].speed_term > 0.0 {
                terms[0].surprisal_term = f64::INFINITY;
                terms[0].total = f64::INFINITY;
            }
            terms
        })
}

/// Weights of the first derivative at offset 0 for the given node offsets
/// (in units of the grid spacing), from the derivative of the Lagrange basis.
fn derivative_weights(offsets: &[f64]) -> Vec<f64> {
    let n = offsets.len();
    (0..n)
        .map(|j| {
            let denom: f64 = (0..n).filter(|&l| l != j).map(|l| offsets[j] - offsets[l]).product();
            let numer: f64 = (0..n)
                .filter(|&m| m != j)
                .map(|m| {
                    (0..n)
                        .filter(|&l| l != j && l != m)
                        .map(|l| -offsets[l])
                        .product::<f64>()
                })
                .sum();
            numer / denom
        })
        .collect()
}

/// Absolute finite-difference derivative of a node sequence on a uniform grid.
///
/// Each node uses the most central window of up to five consecutive nodes
/// that does not cross a flagged interval (`breaks[k]` covers
/// `(t_k, t_{k+1})`), so the estimate is fourth order wherever the sequence is
/// smooth and a one-sided derivative next to a kink. Windows shrink only when
/// kinks are closer than five nodes.
pub fn finite_difference_rates(values: &[f64], dt: f64, breaks: Option<&[bool]>) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "a derivative needs at least two nodes, got {n}"
        )));
    }
    if let Some(b) = breaks {
        if b.len() + 1 != n {
            return Err(Error::DimensionMismatch {
                context: "kink flags",
                expected: n - 1,
                found: b.len(),
            });
        }
    }
    let clean = |s: usize, w: usize| breaks.map_or(true, |b| b[s..s + w - 1].iter().all(|f| !f));
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut chosen = None;
        for w in (2..=n.min(5)).rev() {
            let lo = i.saturating_sub(w - 1);
            let hi = i.min(n - w);
            let best = (lo..=hi).filter(|&s| clean(s, w)).min_by(|&a, &b| {
                let da = (2.0 * (i as f64 - a as f64) - (w - 1) as f64).abs();
                let db = (2.0 * (i as f64 - b as f64) - (w - 1) as f64).abs();
                da.total_cmp(&db)
            });
            if let Some(s) = best {
                chosen = Some((s, w));
                break;
            }
        }
        // Kinks on both sides of a node: fall back to the symmetric difference.
        let (s, w) = chosen.unwrap_or_else(|| {
            let s = i.saturating_sub(1).min(n - 3.min(n));
            (s, 3.min(n))
        });
        let offsets: Vec<f64> = (s..s + w).map(|j| j as f64 - i as f64).collect();
        let weights = derivative_weights(&offsets);
        let d: f64 = weights.iter().zip(&values[s..s + w]).map(|(c, v)| c * v).sum();
        out.push((d / dt).abs());
    }
    Ok(out)
}

/// Which entanglement change a speed-limit time refers to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EslMode {
    /// `|F(T) − F(0)| / Λ(T)`.
    #[default]
    Change,
    /// `F(T) / Λ(T)`: generation from a separable start.
    Generate,
    /// `F(0) / Λ(T)`: complete degradation to a separable end.
    Degrade,
}

impl EslMode {
    fn numerator(self, start: f64, end: f64) -> f64 {
        match self {
            Self::Change => (end - start).abs(),
            Self::Generate => end,
            Self::Degrade => start,
        }
    }
}

/// Comparison of the trapezoid rule on every node against every other node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureCheck {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
    /// `|fine − coarse| / |fine|`.
    pub relative_change: f64,
    /// `(coarse − fine)/(fine − extrapolated)`-style ratio of successive
    /// errors; close to 4 for a smooth integrand.
    pub richardson_ratio: Option<f64>,
}

/// Integrated form of a rate bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedLimit {
    pub mode: EslMode,
    /// Time average `Λ(T)` over the whole grid.
    pub lambda: f64,
    pub f_start: f64,
    pub f_end: f64,
    /// `+∞` when the bound is vacuous.
    pub t_esl: f64,
    /// `Λ ≤ 1e-14` while the numerator is nonzero.
    pub vacuous: bool,
    /// `Λ(t_k)` with `Λ(t_0) = k(t_0)`.
    pub lambda_cum: Vec<f64>,
    /// Speed-limit time for the interval `[t_0, t_k]`.
    pub t_esl_cum: Vec<f64>,
    /// Nodes whose integrand was not finite and were left out of the quadrature.
    pub excluded_nodes: usize,
    /// Model used for the first two intervals.
    pub start: StartBehaviour,
    pub quadrature: Option<QuadratureCheck>,
    /// `E(ρ_T)/Λ(T)` in generation mode when an independent REE value of the
    /// final state was supplied.
    pub ree_t_esl: Option<f64>,
}

fn esl_time(numerator: f64, lambda: f64) -> (f64, bool) {
    if numerator == 0.0 {
        (0.0, false)
    } else if lambda <= LAMBDA_FLOOR {
        (f64::INFINITY, true)
    } else {
        (numerator / lambda, false)
    }
}

/// Cumulative trapezoid integral. Non-finite interior nodes are bridged by the
/// neighbouring finite ones. On an evenly spaced start, the first two
/// intervals follow the `start` model fitted to the first three nodes (the
/// first node is ignored for [`StartBehaviour::LogDivergent`]). A fitted
/// `b ln(t − t₀)` singularity also gets the exact trapezoid error of that
/// term added on every later interval, which would otherwise leave an
/// `O(h)` error.
fn trapezoid_cumulative(times: &[f64], integrand: &[f64], start: StartBehaviour) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = vec![0.0; times.len()];
    let mut last: Option<usize> = None;
    let mut log_coeff = 0.0;
    if let Some(fit) = start_integrals(times, integrand, start) {
        out[1] = fit.one;
        out[2] = fit.two;
        acc = fit.two;
        last = Some(2);
        log_coeff = fit.log_coeff;
    }
    let t0 = times[0];
    let log_antiderivative = |t: f64| {
        let u = t - t0;
        u * u.ln() - u
    };
    for k in last.map_or(0, |j| j + 1)..times.len() {
        if integrand[k].is_finite() {
            if let Some(j) = last {
                let h = times[k] - times[j];
                acc += 0.5 * h * (integrand[k] + integrand[j]);
                if log_coeff != 0.0 {
                    let exact = log_antiderivative(times[k]) - log_antiderivative(times[j]);
                    let trapezoid = 0.5 * h * ((times[k] - t0).ln() + (times[j] - t0).ln());
                    acc += log_coeff * (exact - trapezoid);
                }
            }
            last = Some(k);
        }
        out[k] = acc;
    }
    out
}

/// Start-model integrals over `[t₀, t₁]` and `[t₀, t₂]`, and the
/// coefficient of a fitted `ln(t − t₀)` term (zero if there is none).
struct StartFit {
    one: f64,
    two: f64,
    log_coeff: f64,
}

/// Integrals over `[t0, t1]` and `[t0, t2]` under the `start` model, or `None`
/// when the trapezoid rule applies.
fn start_integrals(times: &[f64], f: &[f64], start: StartBehaviour) -> Option<StartFit> {
    use std::f64::consts::LN_2;
    if start == StartBehaviour::Smooth || times.len() < 3 {
        return None;
    }
    let h = times[1] - times[0];
    if (times[2] - times[0] - 2.0 * h).abs() > 1e-9 * h || !f[1].is_finite() || !f[2].is_finite() {
        return None;
    }
    match start {
        StartBehaviour::LogDivergent => {
            // a + b ln(τ/h) + c τ/h through the first three finite nodes when a
            // fourth node lies on the same spacing; a + b ln(τ/h) otherwise.
            let (a, b, c) = if times.len() >= 4 && (times[3] - times[0] - 3.0 * h).abs() <= 1e-9 * h && f[3].is_finite()
            {
                let b = (2.0 * f[2] - f[1] - f[3]) / (4.0f64 / 3.0).ln();
                let c = f[2] - f[1] - b * LN_2;
                (f[1] - c, b, c)
            } else {
                (f[1], (f[2] - f[1]) / LN_2, 0.0)
            };
            if b > 0.0 {
                // Rising away from the start: no singular part to integrate.
                let one = h * f[1];
                return Some(StartFit {
                    one,
                    two: one + 0.5 * h * (f[1] + f[2]),
                    log_coeff: 0.0,
                });
            }
            Some(StartFit {
                one: h * (a - b + 0.5 * c),
                two: h * (2.0 * a + b * (2.0 * LN_2 - 2.0) + 2.0 * c),
                log_coeff: b,
            })
        }
        StartBehaviour::LogCorrected => {
            if !f[0].is_finite() {
                return None;
            }
            let a = f[1] - f[0];
            let b = (f[2] - 2.0 * f[1] + f[0]) / (2.0 * LN_2);
            Some(StartFit {
                one: h * (f[0] + 0.5 * a - 0.25 * b),
                two: h * (2.0 * f[0] + 2.0 * a + b * (2.0 * LN_2 - 1.0)),
                log_coeff: 0.0,
            })
        }
        StartBehaviour::Smooth => None,
    }
}

fn quadrature_check(times: &[f64], integrand: &[f64], start: StartBehaviour) -> Option<QuadratureCheck> {
    let n = times.len();
    let skip = usize::from(start == StartBehaviour::LogDivergent);
    if n < 5 || (n - 1) % 2 != 0 || integrand[skip..].iter().any(|v| !v.is_finite()) {
        return None;
    }
    let fine = *trapezoid_cumulative(times, integrand, start).last()?;
    let even = |v: &[f64]| v.iter().step_by(2).copied().collect::<Vec<_>>();
    let coarse = *trapezoid_cumulative(&even(times), &even(integrand), start).last()?;
    let richardson_ratio = if (n - 1) % 4 == 0 {
        let coarser = *trapezoid_cumulative(&even(&even(times)), &even(&even(integrand)), start).last()?;
        let d1 = coarse - fine;
        let d2 = coarser - coarse;
        (d1.abs() > 1e-15 * fine.abs().max(1.0)).then(|| d2 / d1)
    } else {
        None
    };
    let span = times[n - 1] - times[0];
    Some(QuadratureCheck {
        coarse: coarse / span,
        fine: fine / span,
        extrapolated: (4.0 * fine - coarse) / (3.0 * span),
        relative_change: if fine != 0.0 {
            ((fine - coarse) / fine).abs()
        } else {
            0.0
        },
        richardson_ratio,
    })
}

/// Speed-limit times from node values of `F_E` (or `D_tr`) and the bound
/// integrand, with `Λ` from the composite trapezoid rule.
///
/// Non-finite integrand entries mark singular nodes; they are excluded and
/// the quadrature runs over the remaining nodes.
pub fn speed_limit_time(
    times: &[f64],
    values: &[f64],
    integrand: &[f64],
    start: StartBehaviour,
    mode: EslMode,
    ree_end: Option<f64>,
) -> Result<SpeedLimit> {
    let n = times.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "a speed-limit time needs at least two samples, got {n}"
        )));
    }
    if values.len() != n || integrand.len() != n {
        return Err(Error::DimensionMismatch {
            context: "speed-limit samples",
            expected: n,
            found: values.len().min(integrand.len()),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite entanglement value".into()));
    }
    let skip = usize::from(start == StartBehaviour::LogDivergent);
    let excluded_nodes = integrand[skip..].iter().filter(|v| !v.is_finite()).count();
    if excluded_nodes > 0 {
        info!("{excluded_nodes} singular nodes left out of the quadrature");
    }
    let cumulative = trapezoid_cumulative(times, integrand, start);
    let t0 = times[0];
    let first_finite = integrand.iter().copied().find(|v| v.is_finite()).unwrap_or(0.0);
    let lambda_cum: Vec<f64> = (0..n)
        .map(|k| {
            let span = times[k] - t0;
            if span > 0.0 {
                cumulative[k] / span
            } else {
                first_finite
            }
        })
        .collect();
    let f_start = values[0];
    let t_esl_cum: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 && mode == EslMode::Change {
                0.0
            } else {
                esl_time(mode.numerator(f_start, values[k]), lambda_cum[k]).0
            }
        })
        .collect();
    let f_end = values[n - 1];
    let lambda = lambda_cum[n - 1];
    let (t_esl, vacuous) = esl_time(mode.numerator(f_start, f_end), lambda);
    if vacuous {
        warn!("speed-limit bound is vacuous: Λ = {lambda:.3e} with a nonzero change");
    }
    let ree_t_esl = match (mode, ree_end) {
        (EslMode::Generate, Some(e)) => Some(esl_time(e, lambda).0),
        _ => None,
    };
    Ok(SpeedLimit {
        mode,
        lambda,
        f_start,
        f_end,
        t_esl,
        vacuous,
        lambda_cum,
        t_esl_cum,
        excluded_nodes,
        start,
        quadrature: quadrature_check(times, integrand, start),
        ree_t_esl,
    })
}

/// A bound kind that could not be evaluated and the one used instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Failover {
    pub requested: BoundKind,
    pub node: Option<usize>,
    pub leakage: f64,
}

/// Node-by-node bound check and speed-limit time along one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub trajectory_id: String,
    pub kind: BoundKind,
    pub samples: Vec<RateBoundSample>,
    /// `F_E(t)` in nats, or `tr|ρ_t − σ_t|` for the trace kind.
    pub values: Vec<f64>,
    pub limit: SpeedLimit,
    /// Set when a relative-entropy bound hit a support violation and the
    /// trace bound was used instead.
    pub failover: Option<Failover>,
}

impl BoundReport {
    pub fn lambda(&self) -> f64 {
        self.limit.lambda
    }

    pub fn t_esl(&self) -> f64 {
        self.limit.t_esl
    }

    pub fn total_time(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t) - self.samples.first().map_or(0.0, |s| s.t)
    }

    /// Interior samples whose observed rate exceeds the bound by more than `slack`.
    pub fn violations(&self, slack: f64) -> Vec<&RateBoundSample> {
        let n = self.samples.len();
        self.samples
            .iter()
            .enumerate()
            .filter(|(k, s)| *k > 0 && *k + 1 < n && s.lhs_rate > s.terms.total + slack)
            .map(|(_, s)| s)
            .collect()
    }

    /// `max_k t_esl_cum[k] / (t_k − t_0)` over nodes with positive elapsed time.
    pub fn max_saturation(&self) -> f64 {
        let t0 = self.samples.first().map_or(0.0, |s| s.t);
        self.samples
            .iter()
            .zip(&self.limit.t_esl_cum)
            .filter(|(s, _)| s.t > t0)
            .map(|(s, e)| e / (s.t - t0))
            .fold(0.0, f64::max)
    }
}

/// Options for [`bound_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions<'a> {
    pub kind: BoundKind,
    pub mode: EslMode,
    pub hamiltonian: Option<&'a CMatrix>,
    /// Support tolerance for the relative-entropy kinds.
    pub support_tol: f64,
    /// Fall back to the trace bound on a support violation.
    pub failover: bool,
    /// Independent REE of the final state, for generation mode.
    pub ree_end: Option<f64>,
}

impl Default for ReportOptions<'_> {
    fn default() -> Self {
        Self {
            kind: BoundKind::Cptp,
            mode: EslMode::Change,
            hamiltonian: None,
            support_tol: crate::measures::SUPPORT_TOL,
            failover: true,
            ree_end: None,
        }
    }
}

/// Evaluates one bound kind along a trajectory carrying companion states.
pub fn bound_report(traj: &Trajectory, id: &str, opts: ReportOptions<'_>) -> Result<BoundReport> {
    match evaluate(traj, id, opts) {
        Err(Error::SupportViolation { leakage, node }) if opts.failover && opts.kind != BoundKind::Trace => {
            warn!(
                "{id}: {} bound hit a support violation at node {node:?}; using the trace bound",
                opts.kind
            );
            let mut report = evaluate(
                traj,
                id,
                ReportOptions {
                    kind: BoundKind::Trace,
                    ..opts
                },
            )?;
            report.failover = Some(Failover {
                requested: opts.kind,
                node,
                leakage,
            });
            Ok(report)
        }
        other => other,
    }
}

fn evaluate(traj: &Trajectory, id: &str, opts: ReportOptions<'_>) -> Result<BoundReport> {
    let times = traj.times();
    let dt = traj.grid.dt();
    let (values, lhs) = if opts.kind.uses_relative_entropy() {
        let values: Vec<f64> = fe_along_trajectory(traj, opts.support_tol)?
            .into_iter()
            .map(|(_, v)| v)
            .collect();
        let lhs = finite_difference_rates(&values, dt, None)?;
        (values, lhs)
    } else {
        let (values, kinks) = trace_distance_along_trajectory(traj)?;
        let lhs = finite_difference_rates(&values, dt, Some(&kinks))?;
        (values, lhs)
    };
    let terms = rate_terms_along(traj, opts.kind, opts.hamiltonian, opts.support_tol)?;
    let integrand: Vec<f64> = terms.iter().map(|t| t.total).collect();
    let start = match start_behaviour(traj, opts.kind) {
        // A vanishing speed turns the divergent surprisal into `τ ln τ`.
        StartBehaviour::LogDivergent if integrand[0].is_finite() => StartBehaviour::LogCorrected,
        s => s,
    };
    let limit = speed_limit_time(&times, &values, &integrand, start, opts.mode, opts.ree_end)?;
    let samples = times
        .iter()
        .zip(lhs)
        .zip(terms)
        .map(|((&t, lhs_rate), terms)| RateBoundSample { t, lhs_rate, terms })
        .collect();
    Ok(BoundReport {
        trajectory_id: id.to_string(),
        kind: opts.kind,
        samples,
        values,
        limit,
        failover: None,
    })
}

/// `G_σ(σ̇)` restricted to the support of `σ`, exposed for oracle checks.
pub fn log_perturbation(sigma: &CMatrix, sigma_dot: &CMatrix) -> Result<CMatrix> {
    let spec = eigh(sigma)?;
    hadamard_perturbation_with(&spec, sigma_dot, RankTolerance::default())
}
