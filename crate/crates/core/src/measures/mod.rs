//! Entropies, relative entropy, skew information and the entanglement
//! measures computed by minimizing over separable states.

pub(crate) mod solver;

pub use solver::{
    derive_seed, ree, ree_with_warm_starts, trace_distance_entanglement, trace_distance_entanglement_with_warm_starts,
    MeasureResult, ProductEnsemble, SolverConfig,
};

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::linalg::{check_dim, eigh, eigh_unchecked, trace_product, CMatrix, RankTolerance, SpectralDecomposition};
use crate::states::DensityMatrix;

/// Default trace-norm leakage tolerated outside `supp(σ)`.
pub const SUPPORT_TOL: f64 = 1e-9;

/// `x ln x` with the convention `0 ln 0 = 0`.
pub fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

pub fn nats_to_bits(v: f64) -> f64 {
    v / LN_2
}

/// `−Σ λ ln λ` over the support, in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&eigh_unchecked(rho.matrix()))
}

pub(crate) fn entropy_of_spectrum(spec: &SpectralDecomposition) -> f64 {
    let cut = RankTolerance::default().cutoff(spec.max_abs());
    -spec
        .eigenvalues
        .iter()
        .filter(|&&l| l > cut)
        .map(|&l| xlnx(l))
        .sum::<f64>()
}

/// Quantum relative entropy, which is `+∞` when the state leaks outside the
/// support of the reference operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelativeEntropy {
    Finite(f64),
    Infinite,
}

impl RelativeEntropy {
    pub fn is_finite(&self) -> bool {
        matches!(self, RelativeEntropy::Finite(_))
    }

    /// The finite value in nats; the infinite case is an error rather than a
    /// number that could leak into further arithmetic.
    pub fn value(&self) -> Result<f64> {
        match *self {
            RelativeEntropy::Finite(v) => Ok(v),
            RelativeEntropy::Infinite => Err(Error::InfiniteRelativeEntropy),
        }
    }

    pub fn bits(&self) -> Result<f64> {
        self.value().map(nats_to_bits)
    }
}

/// `D(ρ‖σ) = tr ρ(ln ρ − ln σ)` on supports, `+∞` if
/// `‖(I − Π_σ) ρ (I − Π_σ)‖₁ ≥ tol`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &CMatrix, tol: f64) -> Result<RelativeEntropy> {
    check_dim(sigma, rho.dim(), "relative_entropy")?;
    let sigma_spec = eigh(sigma)?;
    let rank_tol = RankTolerance::default();
    let cut = rank_tol.cutoff(sigma_spec.max_abs());
    if sigma_spec.min() < -cut {
        return Err(Error::NotPsd {
            min_eigenvalue: sigma_spec.min(),
        });
    }
    let trace: f64 = sigma_spec.eigenvalues.iter().sum();
    if trace > 1.0 + 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "reference operator has trace {trace} > 1"
        )));
    }
    let rho_entropy = von_neumann_entropy(rho);
    Ok(relative_entropy_with(rho.matrix(), rho_entropy, &sigma_spec, tol, cut))
}

/// Core evaluation against a precomputed spectrum of σ.
pub(crate) fn relative_entropy_with(
    rho: &CMatrix,
    rho_entropy: f64,
    sigma_spec: &SpectralDecomposition,
    tol: f64,
    cut: f64,
) -> RelativeEntropy {
    let v = &sigma_spec.eigenvectors;
    let rotated_diag = populations(rho, v);
    let mut leakage = 0.0;
    let mut cross = 0.0;
    for (k, &s) in sigma_spec.eigenvalues.iter().enumerate() {
        if s > cut {
            cross += rotated_diag[k] * s.ln();
        } else {
            leakage += rotated_diag[k];
        }
    }
    if leakage >= tol {
        RelativeEntropy::Infinite
    } else {
        RelativeEntropy::Finite(-rho_entropy - cross)
    }
}

/// `⟨v_k|ρ|v_k⟩` for each column of `v`.
pub(crate) fn populations(rho: &CMatrix, v: &CMatrix) -> Vec<f64> {
    let rv = rho * v;
    (0..v.ncols()).map(|k| v.column(k).dotc(&rv.column(k)).re).collect()
}

fn expectation(rho: &CMatrix, o: &CMatrix) -> f64 {
    trace_product(rho, o).re
}

/// `V_O = tr(ρO²) − tr(ρO)²`.
pub fn variance(rho: &DensityMatrix, o: &CMatrix) -> Result<f64> {
    check_dim(o, rho.dim(), "variance")?;
    let m = rho.matrix();
    let mean = expectation(m, o);
    Ok(expectation(m, &(o * o)) - mean * mean)
}

/// Wigner–Yanase skew information `−½ tr([√ρ, O]²)`.
pub fn wigner_yanase_skew(rho: &DensityMatrix, o: &CMatrix) -> Result<f64> {
    check_dim(o, rho.dim(), "wigner_yanase_skew")?;
    let m = rho.matrix();
    let spec = eigh_unchecked(m);
    // round-off eigenvalues would otherwise be amplified by the square root
    let cut = RankTolerance::default().cutoff(spec.max_abs());
    let sqrt = spec.map(|l| crate::linalg::c(if l > cut { l.sqrt() } else { 0.0 }, 0.0));
    let so = &sqrt * o;
    // −½ tr([√ρ,O]²) = tr(ρO²) − tr(√ρ O √ρ O)
    Ok(expectation(m, &(o * o)) - trace_product(&so, &so).re)
}

/// `U_O = √(V² − (V − I)²)`, with a radicand down to `−1e-12` clamped to 0.
pub fn u_quantity(rho: &DensityMatrix, o: &CMatrix) -> Result<f64> {
    let v = variance(rho, o)?;
    let i = wigner_yanase_skew(rho, o)?;
    let radicand = v * v - (v - i) * (v - i);
    if radicand < -1e-12 * (1.0 + v * v) {
        return Err(Error::InvalidArgument(format!(
            "negative radicand {radicand:.3e} in U_O (V = {v}, I = {i})"
        )));
    }
    Ok(radicand.max(0.0).sqrt())
}
