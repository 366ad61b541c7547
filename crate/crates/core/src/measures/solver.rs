//! Multi-start search over convex mixtures of product states.
//!
//! A candidate separable state is `σ = Σ_i p_i |a_i⟩⟨a_i| ⊗ |b_i⟩⟨b_i|` with
//! `p = softmax(w)` and unnormalized complex vectors `a_i`, `b_i`. Each term is
//! one optimization block of `1 + 2 d_A + 2 d_B` real coordinates. A local
//! search visits the blocks cyclically and runs a bounded Nelder–Mead on the
//! visited block with the others frozen.

use log::debug;
use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{entropy_of_spectrum, nats_to_bits, populations};
use crate::error::{Error, Result};
use crate::linalg::{
    c, eigh_unchecked, hermitian_operator_basis, trace_norm_hermitian, CMatrix, CVector, RankTolerance, C64, ZERO,
};
use crate::states::{ppt_of_matrix, schmidt_decompose, BipartiteSplit, DensityMatrix};

/// Logits are clamped to this magnitude before exponentiation.
const LOGIT_CLAMP: f64 = 40.0;
/// Logit given to padding terms appended to a short warm start.
const PAD_LOGIT: f64 = -LOGIT_CLAMP;

/// Tuning of the separable-set search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Number of product terms; `None` means `(d_A d_B)²`.
    pub ensemble_size: Option<usize>,
    pub restarts: usize,
    /// Block visits per restart.
    pub max_iters: usize,
    pub value_tol: f64,
    pub seed: u64,
    /// Stop once the best value improves by less than `value_tol` over this
    /// many block visits (raised to the ensemble size when that is larger, so
    /// every block is visited inside one window).
    pub stall_window: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            ensemble_size: None,
            restarts: 24,
            max_iters: 2000,
            value_tol: 1e-6,
            seed: 0,
            stall_window: 50,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if self.ensemble_size == Some(0) {
            return Err(Error::InvalidArgument("ensemble_size must be at least 1".into()));
        }
        if !(self.value_tol.is_finite() && self.value_tol > 0.0) {
            return Err(Error::InvalidArgument("value_tol must be positive".into()));
        }
        Ok(())
    }

    fn terms(&self, split: BipartiteSplit) -> usize {
        self.ensemble_size.unwrap_or(split.dim() * split.dim())
    }
}

/// Result of an entanglement-measure minimization.
#[derive(Debug, Clone)]
pub struct MeasureResult {
    /// Minimum found, in nats for the relative entropy.
    pub value: f64,
    pub css: DensityMatrix,
    pub converged: bool,
    /// Block visits summed over restarts.
    pub iterations: usize,
    /// Several restarts reached the minimum (within `value_tol`) at clearly
    /// different states; `css` is then the one reached from the earliest warm
    /// start, or the lexicographically smallest if no warm start tied.
    pub multiplicity: bool,
}

impl MeasureResult {
    pub fn bits(&self) -> f64 {
        nats_to_bits(self.value)
    }
}

/// An explicit separable decomposition `Σ_i p_i |a_i⟩⟨a_i| ⊗ |b_i⟩⟨b_i|`.
#[derive(Debug, Clone)]
pub struct ProductEnsemble {
    pub weights: Vec<f64>,
    pub a: Vec<CVector>,
    pub b: Vec<CVector>,
}

impl ProductEnsemble {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn to_matrix(&self) -> CMatrix {
        let n = self.a[0].len() * self.b[0].len();
        let total: f64 = self.weights.iter().sum();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..self.len() {
            let v = normalized(&self.a[i]).kronecker(&normalized(&self.b[i]));
            out += (&v * v.adjoint()).scale(self.weights[i] / total);
        }
        out
    }

    /// Eigen-decomposition of the product of marginals `ρ_A ⊗ ρ_B`.
    pub fn product_of_marginals(rho: &DensityMatrix) -> Self {
        let split = rho.split();
        let ra = crate::linalg::partial_trace(rho.matrix(), split, crate::states::Subsystem::A).expect("split matches");
        let rb = crate::linalg::partial_trace(rho.matrix(), split, crate::states::Subsystem::B).expect("split matches");
        let (sa, sb) = (eigh_unchecked(&ra), eigh_unchecked(&rb));
        let mut out = Self {
            weights: vec![],
            a: vec![],
            b: vec![],
        };
        for (i, &la) in sa.eigenvalues.iter().enumerate() {
            for (j, &lb) in sb.eigenvalues.iter().enumerate() {
                out.weights.push((la * lb).max(0.0));
                out.a.push(sa.eigenvectors.column(i).into_owned());
                out.b.push(sb.eigenvectors.column(j).into_owned());
            }
        }
        out
    }

    /// Schmidt-basis dephasing of the dominant eigenvector of `rho`, using the
    /// left basis `reference` to resolve tied coefficients.
    pub fn dephased_dominant(rho: &DensityMatrix) -> Self {
        let spec = eigh_unchecked(rho.matrix());
        let top = spec.eigenvectors.column(spec.dim() - 1).into_owned();
        Self::schmidt_dephased(&top, rho.split())
    }

    pub fn schmidt_dephased(psi: &CVector, split: BipartiteSplit) -> Self {
        let form = schmidt_decompose(psi, split).expect("unit eigenvector");
        Self::from_schmidt(&form)
    }

    pub(crate) fn from_schmidt(form: &crate::states::SchmidtForm) -> Self {
        Self {
            weights: form.coefficients.iter().map(|s| s * s).collect(),
            a: (0..form.rank()).map(|k| form.left.column(k).into_owned()).collect(),
            b: (0..form.rank()).map(|k| form.right.column(k).into_owned()).collect(),
        }
    }
}

fn normalized(v: &CVector) -> CVector {
    let n = v.norm();
    if n > 0.0 {
        v / c(n, 0.0)
    } else {
        let mut e = CVector::zeros(v.len());
        e[0] = c(1.0, 0.0);
        e
    }
}

#[derive(Clone, Copy)]
enum ObjectiveKind {
    RelativeEntropy,
    TraceDistance,
}

struct Objective<'a> {
    kind: ObjectiveKind,
    rho: &'a CMatrix,
    rho_entropy: f64,
    /// Copy of `rho` used by the two-qubit fast path.
    rho4: Option<Matrix4<C64>>,
    support_tol: f64,
}

impl Objective<'_> {
    fn eval(&self, sigma: &CMatrix) -> f64 {
        match self.kind {
            ObjectiveKind::TraceDistance => trace_norm_hermitian(&(self.rho - sigma)),
            ObjectiveKind::RelativeEntropy => {
                let (cross, leak) = match &self.rho4 {
                    Some(rho4) => cross_and_leak_4(rho4, sigma),
                    None => cross_and_leak(self.rho, sigma),
                };
                if leak >= self.support_tol {
                    f64::INFINITY
                } else {
                    -self.rho_entropy - cross
                }
            }
        }
    }
}

// Both helpers return `(Σ_k ⟨v_k|ρ|v_k⟩ ln s_k, Σ_k ⟨v_k|ρ|v_k⟩)`, the first
// sum over the support of `σ` and the second over its kernel. Neither depends
// on the basis chosen inside a degenerate eigenspace, so the raw
// decomposition is used without the alignment step of `eigh`.

fn cross_and_leak(rho: &CMatrix, sigma: &CMatrix) -> (f64, f64) {
    let spec = sigma.clone().symmetric_eigen();
    let max_abs = spec.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = RankTolerance::default().cutoff(max_abs);
    let pops = populations(rho, &spec.eigenvectors);
    split_sum(spec.eigenvalues.iter().copied().zip(pops), cut)
}

/// Two-qubit case on stack-allocated matrices; this is the hot path of the
/// search.
fn cross_and_leak_4(rho: &Matrix4<C64>, sigma: &CMatrix) -> (f64, f64) {
    let spec = Matrix4::from_fn(|i, j| sigma[(i, j)]).symmetric_eigen();
    let max_abs = spec.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = RankTolerance::default().cutoff(max_abs);
    let rv = rho * spec.eigenvectors;
    let pops = (0..4).map(|k| spec.eigenvectors.column(k).dotc(&rv.column(k)).re);
    split_sum(spec.eigenvalues.iter().copied().zip(pops), cut)
}

fn split_sum(pairs: impl Iterator<Item = (f64, f64)>, cut: f64) -> (f64, f64) {
    let mut cross = 0.0;
    let mut leak = 0.0;
    for (s, pop) in pairs {
        if s > cut {
            cross += pop * s.ln();
        } else {
            leak += pop;
        }
    }
    (cross, leak)
}

/// Flat parameter blocks, one per product term.
#[derive(Clone)]
struct Params {
    split: BipartiteSplit,
    blocks: Vec<Vec<f64>>,
}

impl Params {
    fn block_len(split: BipartiteSplit) -> usize {
        1 + 2 * split.d_a + 2 * split.d_b
    }

    fn random<R: Rng>(split: BipartiteSplit, terms: usize, rng: &mut R) -> Self {
        let len = Self::block_len(split);
        let blocks = (0..terms)
            .map(|_| (0..len).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        Self { split, blocks }
    }

    fn from_ensemble<R: Rng>(split: BipartiteSplit, ens: &ProductEnsemble, terms: usize, rng: &mut R) -> Self {
        let mut out = Self::random(split, terms, rng);
        let keep = ens.len().min(terms);
        // keep the heaviest terms if the warm start is longer than the ensemble
        let mut order: Vec<usize> = (0..ens.len()).collect();
        order.sort_by(|&i, &j| ens.weights[j].total_cmp(&ens.weights[i]));
        let total: f64 = order[..keep].iter().map(|&i| ens.weights[i]).sum();
        for (slot, &i) in order[..keep].iter().enumerate() {
            let block = &mut out.blocks[slot];
            let w = ens.weights[i] / total;
            block[0] = if w > 0.0 {
                w.ln().max(-LOGIT_CLAMP)
            } else {
                -LOGIT_CLAMP
            };
            write_vec(&mut block[1..1 + 2 * split.d_a], &ens.a[i]);
            write_vec(&mut block[1 + 2 * split.d_a..], &ens.b[i]);
        }
        for block in out.blocks.iter_mut().skip(keep) {
            block[0] = PAD_LOGIT;
        }
        out
    }

    fn term(&self, block: &[f64]) -> (f64, CVector) {
        term_of_block(self.split, block)
    }

    /// `(Σ_{j≠skip} e^{w_j} v_j v_j†, Σ_{j≠skip} e^{w_j})`.
    fn partial_sum(&self, skip: Option<usize>) -> (CMatrix, f64) {
        let n = self.split.dim();
        let mut s = CMatrix::zeros(n, n);
        let mut z = 0.0;
        for (j, block) in self.blocks.iter().enumerate() {
            if Some(j) == skip {
                continue;
            }
            let (w, v) = self.term(block);
            add_outer(&mut s, &v, w);
            z += w;
        }
        (s, z)
    }

    fn sigma(&self) -> CMatrix {
        let (s, z) = self.partial_sum(None);
        s.scale(1.0 / z)
    }
}

/// Unnormalized term `(e^{w}, a⊗b normalized)` of one parameter block.
fn term_of_block(split: BipartiteSplit, block: &[f64]) -> (f64, CVector) {
    let (da, db) = (split.d_a, split.d_b);
    let a = read_vec(&block[1..1 + 2 * da]);
    let b = read_vec(&block[1 + 2 * da..1 + 2 * da + 2 * db]);
    let weight = block[0].clamp(-LOGIT_CLAMP, LOGIT_CLAMP).exp();
    (weight, normalized(&a).kronecker(&normalized(&b)))
}

fn add_outer(m: &mut CMatrix, v: &CVector, w: f64) {
    let n = v.len();
    for j in 0..n {
        let vj = v[j].conj() * w;
        for i in 0..n {
            m[(i, j)] += v[i] * vj;
        }
    }
}

fn read_vec(x: &[f64]) -> CVector {
    let d = x.len() / 2;
    CVector::from_fn(d, |i, _| c(x[i], x[d + i]))
}

fn write_vec(x: &mut [f64], v: &CVector) {
    let d = v.len();
    for i in 0..d {
        x[i] = v[i].re;
        x[d + i] = v[i].im;
    }
}

/// Minimizes `f` from `x0` with an initial simplex of edge `step`.
/// Returns the best point, its value and the number of evaluations.
pub(crate) fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_evals: usize,
    ftol: f64,
) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let mut evals = n + 1;
    let point = |centroid: &[f64], worst: &[f64], coef: f64| -> Vec<f64> {
        centroid.iter().zip(worst).map(|(c, w)| c + coef * (c - w)).collect()
    };
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[n].1);
        if worst.is_finite() && worst - best <= ftol {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let xr = point(&centroid, &simplex[n].0, 1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = point(&centroid, &simplex[n].0, 2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = point(&centroid, &simplex[n].0, 0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = point(&centroid, &simplex[n].0, -0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for (x, fx) in simplex.iter_mut().skip(1) {
                    for (xi, bi) in x.iter_mut().zip(&x0) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    *fx = f(x);
                }
                evals += n;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    (x, fx, evals)
}

struct RestartOutcome {
    value: f64,
    sigma: CMatrix,
    converged: bool,
    iterations: usize,
}

fn local_search(obj: &Objective, mut params: Params, cfg: &SolverConfig) -> RestartOutcome {
    let terms = params.blocks.len();
    let window = cfg.stall_window.max(terms).max(1);
    let dim = Params::block_len(params.split);
    let mut best = obj.eval(&params.sigma());
    let mut steps = vec![0.5f64; terms];
    let mut history = Vec::with_capacity(cfg.max_iters + 1);
    history.push(best);
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..cfg.max_iters {
        iterations = it + 1;
        let i = it % terms;
        let (rest, z_rest) = params.partial_sum(Some(i));
        let split = params.split;
        let block_obj = |x: &[f64]| {
            let (w, v) = term_of_block(split, x);
            let mut s = rest.clone();
            add_outer(&mut s, &v, w);
            obj.eval(&s.scale(1.0 / (z_rest + w)))
        };
        let (x, fx, _) = nelder_mead(block_obj, &params.blocks[i], steps[i], 10 * dim, 1e-14);
        if fx < best {
            params.blocks[i] = x;
            best = fx;
            steps[i] = (steps[i] * 1.5).min(1.0);
        } else {
            steps[i] = (steps[i] * 0.5).max(1e-5);
        }
        history.push(best);
        if history.len() > window && history[history.len() - 1 - window] - best < cfg.value_tol {
            converged = true;
            break;
        }
    }
    RestartOutcome {
        value: best,
        sigma: params.sigma(),
        converged,
        iterations,
    }
}

/// SplitMix64 step, used to derive independent per-restart seeds.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-stream `stream` derived from a top-level seed.
pub fn derive_seed(seed: u64, stream: usize) -> u64 {
    splitmix64(seed ^ splitmix64(stream as u64 + 1))
}

fn lexicographic_cmp(a: &CMatrix, b: &CMatrix) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord.is_ne() {
            return ord;
        }
    }
    std::cmp::Ordering::Equal
}

fn minimize(
    rho: &DensityMatrix,
    cfg: &SolverConfig,
    kind: ObjectiveKind,
    warm: &[ProductEnsemble],
) -> Result<MeasureResult> {
    cfg.validate()?;
    let split = rho.split();
    if split.dim() <= 6 && ppt_of_matrix(rho.matrix(), split, 1e-12).is_ppt {
        debug!(
            "PPT input on a {}x{} split is its own closest separable state",
            split.d_a, split.d_b
        );
        return Ok(MeasureResult {
            value: 0.0,
            css: rho.clone(),
            converged: true,
            iterations: 0,
            multiplicity: false,
        });
    }
    for w in warm {
        if w.is_empty() || w.a.iter().any(|v| v.len() != split.d_a) || w.b.iter().any(|v| v.len() != split.d_b) {
            return Err(Error::InvalidArgument("warm start does not match the split".into()));
        }
    }
    let obj = Objective {
        kind,
        rho: rho.matrix(),
        rho_entropy: entropy_of_spectrum(&eigh_unchecked(rho.matrix())),
        rho4: (rho.dim() == 4).then(|| Matrix4::from_fn(|i, j| rho.matrix()[(i, j)])),
        support_tol: super::SUPPORT_TOL,
    };
    let terms = cfg.terms(split);
    let outcomes: Vec<RestartOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, r));
            let params = match warm.get(r) {
                Some(ens) => Params::from_ensemble(split, ens, terms, &mut rng),
                None => Params::random(split, terms, &mut rng),
            };
            local_search(&obj, params, cfg)
        })
        .collect();

    let best_idx = (0..outcomes.len())
        .min_by(|&i, &j| outcomes[i].value.total_cmp(&outcomes[j].value))
        .expect("at least one restart");
    let best = &outcomes[best_idx];
    if !best.value.is_finite() {
        return Err(Error::InvalidArgument(
            "no separable candidate with finite objective was found".into(),
        ));
    }
    let near: Vec<(usize, &RestartOutcome)> = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.value <= best.value + cfg.value_tol)
        .collect();
    let multiplicity = near
        .iter()
        .any(|(_, o)| 0.5 * trace_norm_hermitian(&(&o.sigma - &best.sigma)) > 1e-3);
    // Among tied minima, one reached from a warm start wins (the earliest
    // supplied); otherwise the lexicographically smallest state.
    let chosen = if multiplicity {
        near.iter()
            .find(|(r, _)| *r < warm.len())
            .or_else(|| near.iter().min_by(|a, b| lexicographic_cmp(&a.1.sigma, &b.1.sigma)))
            .map(|(_, o)| *o)
            .expect("non-empty")
    } else {
        best
    };
    let iterations = outcomes.iter().map(|o| o.iterations).sum();
    let sigma = crate::linalg::hermitian_part(&chosen.sigma);
    let trace = sigma.trace().re;
    let css = DensityMatrix::from_trusted(sigma.scale(1.0 / trace), split);
    let value = chosen.value.max(0.0);
    debug!(
        "separable search: value {value:.9}, {iterations} block visits, converged={}",
        chosen.converged
    );
    Ok(MeasureResult {
        value,
        css,
        converged: chosen.converged,
        iterations,
        multiplicity,
    })
}

/// Default warm starts: the product of marginals, and for states within trace
/// distance 0.1 of a pure state the Schmidt dephasing of the dominant
/// eigenvector.
fn default_warm_starts(rho: &DensityMatrix) -> Vec<ProductEnsemble> {
    let mut out = Vec::new();
    if rho.max_eigenvalue() >= 0.9 {
        out.push(ProductEnsemble::dephased_dominant(rho));
    }
    out.push(ProductEnsemble::product_of_marginals(rho));
    out
}

/// Relative entropy of entanglement `min_σ D(ρ‖σ)` over separable `σ`.
pub fn ree(rho: &DensityMatrix, cfg: &SolverConfig) -> Result<MeasureResult> {
    ree_with_warm_starts(rho, cfg, &[])
}

/// [`ree`] with extra caller-supplied starting ensembles, tried before the
/// default warm starts and the random restarts.
pub fn ree_with_warm_starts(
    rho: &DensityMatrix,
    cfg: &SolverConfig,
    warm: &[ProductEnsemble],
) -> Result<MeasureResult> {
    let mut starts = warm.to_vec();
    starts.extend(default_warm_starts(rho));
    minimize(rho, cfg, ObjectiveKind::RelativeEntropy, &starts)
}

/// Trace-distance entanglement `min_σ tr|ρ − σ|` over separable `σ`.
pub fn trace_distance_entanglement(rho: &DensityMatrix, cfg: &SolverConfig) -> Result<MeasureResult> {
    trace_distance_entanglement_with_warm_starts(rho, cfg, &[])
}

pub fn trace_distance_entanglement_with_warm_starts(
    rho: &DensityMatrix,
    cfg: &SolverConfig,
    warm: &[ProductEnsemble],
) -> Result<MeasureResult> {
    let mut starts = warm.to_vec();
    starts.extend(default_warm_starts(rho));
    minimize(rho, cfg, ObjectiveKind::TraceDistance, &starts)
}

/// Ensemble built from the operator-basis-aligned Schmidt form of `psi`.
pub(crate) fn schmidt_dephased_with_reference(
    psi: &CVector,
    split: BipartiteSplit,
    reference: &CMatrix,
) -> Result<ProductEnsemble> {
    let form = crate::states::schmidt_decompose_with_reference(psi, split, reference)?;
    Ok(ProductEnsemble::from_schmidt(&form))
}

/// Columns are the row-major vectorizations of the normalized Hermitian
/// operator basis of `d × d` matrices (dimension `d²`).
pub(crate) fn operator_basis_reference(d: usize) -> CMatrix {
    let basis = hermitian_operator_basis(d);
    let mut out = CMatrix::from_element(d * d, d * d, ZERO);
    for (k, p) in basis.iter().enumerate() {
        out.set_column(k, &crate::linalg::vectorize(p));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::relative_entropy;
    use crate::states::{bell_phi_plus, two_qubit_schmidt_state, werner};

    fn quick() -> SolverConfig {
        SolverConfig {
            restarts: 4,
            ..Default::default()
        }
    }

    #[test]
    fn nelder_mead_minimizes_a_quadratic() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2);
        let (x, fx, _) = nelder_mead(f, &[0.0, 0.0], 0.5, 2000, 1e-16);
        assert!(fx < 1e-10);
        assert!((x[0] - 1.0).abs() < 1e-4 && (x[1] + 2.0).abs() < 1e-4);
    }

    #[test]
    fn restart_seeds_are_distinct() {
        let seeds: std::collections::HashSet<u64> = (0..100).map(|r| derive_seed(7, r)).collect();
        assert_eq!(seeds.len(), 100);
    }

    #[test]
    fn ppt_states_have_zero_ree() {
        let w = werner(0.2).unwrap();
        let r = ree(&w, &quick()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn pure_states_match_analytic_css() {
        for p in [0.1, 0.3, 0.5] {
            let psi = two_qubit_schmidt_state(p).unwrap();
            let rho = DensityMatrix::from_pure(&psi, BipartiteSplit::qubits()).unwrap();
            let r = ree(&rho, &quick()).unwrap();
            let oracle = -(p * p.ln() + (1.0 - p) * (1.0 - p).ln());
            assert!((r.value - oracle).abs() < 1e-6, "p={p}: {} vs {oracle}", r.value);
        }
    }

    #[test]
    fn werner_state_ree() {
        for w in [0.5, 0.8] {
            let rho = werner(w).unwrap();
            let f = (1.0 + 3.0 * w) / 4.0;
            let oracle = std::f64::consts::LN_2 + f * f.ln() + (1.0 - f) * (1.0 - f).ln();
            let r = ree(&rho, &quick()).unwrap();
            assert!((r.value - oracle).abs() < 1e-4, "w={w}: {} vs {oracle}", r.value);
            let check = relative_entropy(&rho, r.css.matrix(), 1e-9).unwrap().value().unwrap();
            assert!((check - r.value).abs() < 1e-9);
            assert!(ppt_of_matrix(r.css.matrix(), BipartiteSplit::qubits(), 1e-9).is_ppt);
        }
    }

    #[test]
    fn bell_trace_distance_is_one() {
        let rho = DensityMatrix::from_pure(&bell_phi_plus(), BipartiteSplit::qubits()).unwrap();
        let r = trace_distance_entanglement(&rho, &quick()).unwrap();
        assert!(r.value >= 1.0 - 1e-9);
        assert!(r.value < 1.0 + 1e-3, "{}", r.value);
    }

    #[test]
    fn same_seed_same_answer() {
        let rho = werner(0.7).unwrap();
        let a = ree(&rho, &quick()).unwrap();
        let b = ree(&rho, &quick()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.css.matrix(), b.css.matrix());
    }
}
