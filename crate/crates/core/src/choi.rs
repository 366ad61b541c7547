//! Choi–Jamiołkowski duality for maps on a bipartite system `AB`, and the
//! closest separable map obtained by replacing a channel's Choi state with
//! its closest separable state.
//!
//! The Choi operator lives on `A A' B B'` (primed factors are the input
//! copies), ordered row-major as `(a, a', b, b')`:
//!
//! `Φ[(a,a',b,b'), (c,c',d,d')] = E(|a'b'⟩⟨c'd'|)[(a,b), (c,d)] / (d_A d_B)`.
//!
//! The inverse is `E(ρ) = d_A d_B tr_{A'B'}(Φ (ρᵀ ⊗ I))`, with `ρᵀ` acting on
//! the primed copies.

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    check_dim, eigh, hermitian_part, identity, pauli_z, random_complex_gaussian, tensor, CMatrix, CVector,
    HermitianOperator, RankTolerance, ONE, ZERO,
};
use crate::measures::solver::{operator_basis_reference, schmidt_dephased_with_reference};
use crate::measures::{ree_with_warm_starts, MeasureResult, SolverConfig};
use crate::states::{ppt_of_matrix, schmidt_decompose_with_reference, BipartiteSplit, DensityMatrix, PptCertificate};

/// Residual of `Σ K†K − I` (max entry) accepted as trace preserving.
pub const TP_TOL: f64 = 1e-8;

/// The `AA' : BB'` split of the Choi space.
pub fn choi_split(split: BipartiteSplit) -> BipartiteSplit {
    BipartiteSplit {
        d_a: split.d_a * split.d_a,
        d_b: split.d_b * split.d_b,
    }
}

/// Index of `|a a' b b'⟩`.
pub fn choi_index(split: BipartiteSplit, a: usize, a_in: usize, b: usize, b_in: usize) -> usize {
    ((a * split.d_a + a_in) * split.d_b + b) * split.d_b + b_in
}

/// Normalized Choi operator of a linear map given by its action.
///
/// Linearity is checked on a random superposition of basis operators; a
/// residual above `1e-9` (relative) is rejected.
pub fn choi_of_map<F>(action: F, split: BipartiteSplit) -> Result<CMatrix>
where
    F: Fn(&CMatrix) -> CMatrix,
{
    let n = split.dim();
    let (da, db) = (split.d_a, split.d_b);
    let mut images = Vec::with_capacity(n * n);
    for r in 0..n {
        for s in 0..n {
            let mut e = CMatrix::zeros(n, n);
            e[(r, s)] = ONE;
            let out = action(&e);
            check_dim(&out, n, "choi_of_map output")?;
            images.push(out);
        }
    }
    let probe = random_complex_gaussian(n, n, &mut ChaCha8Rng::seed_from_u64(0x5EED));
    let mut combined = CMatrix::zeros(n, n);
    for r in 0..n {
        for s in 0..n {
            combined += &images[r * n + s] * probe[(r, s)];
        }
    }
    let direct = action(&probe);
    let residual = (&direct - &combined).camax();
    if residual > 1e-9 * (1.0 + combined.camax()) {
        return Err(Error::NonLinearMap { residual });
    }
    let mut phi = CMatrix::zeros(n * n, n * n);
    let scale = 1.0 / n as f64;
    for ai in 0..da {
        for bi in 0..db {
            for ci in 0..da {
                for di in 0..db {
                    let img = &images[(ai * db + bi) * n + ci * db + di];
                    for a in 0..da {
                        for b in 0..db {
                            for cc in 0..da {
                                for d in 0..db {
                                    let row = choi_index(split, a, ai, b, bi);
                                    let col = choi_index(split, cc, ci, d, di);
                                    phi[(row, col)] = img[(a * db + b, cc * db + d)] * scale;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(phi)
}

/// Action `X ↦ d_A d_B tr_{A'B'}(Φ (Xᵀ ⊗ I))` of a Choi operator.
#[derive(Debug, Clone)]
pub struct ChoiMap {
    split: BipartiteSplit,
    choi: CMatrix,
}

impl ChoiMap {
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        let split = self.split;
        let n = split.dim();
        check_dim(x, n, "ChoiMap input")?;
        let (da, db) = (split.d_a, split.d_b);
        let mut out = CMatrix::zeros(n, n);
        for a in 0..da {
            for b in 0..db {
                for cc in 0..da {
                    for d in 0..db {
                        let mut acc = ZERO;
                        for ai in 0..da {
                            for bi in 0..db {
                                for ci in 0..da {
                                    for di in 0..db {
                                        let row = choi_index(split, a, ai, b, bi);
                                        let col = choi_index(split, cc, ci, d, di);
                                        acc += self.choi[(row, col)] * x[(ai * db + bi, ci * db + di)];
                                    }
                                }
                            }
                        }
                        out[(a * db + b, cc * db + d)] = acc * n as f64;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Map of a PSD Choi operator.
pub fn map_of_choi(choi: &CMatrix, split: BipartiteSplit) -> Result<ChoiMap> {
    check_dim(choi, split.dim() * split.dim(), "map_of_choi")?;
    let spec = eigh(choi)?;
    if spec.min() < -RankTolerance::default().cutoff(spec.max_abs()).max(1e-12) {
        return Err(Error::NotPsd {
            min_eigenvalue: spec.min(),
        });
    }
    Ok(ChoiMap {
        split,
        choi: choi.clone(),
    })
}

/// A completely positive map on `AB`, held as its normalized Choi operator
/// with a Kraus list derived from the Choi spectrum.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    split: BipartiteSplit,
    choi: CMatrix,
    kraus: Vec<CMatrix>,
    tp_residual: f64,
    trace_nonpreserving: bool,
}

impl QuantumChannel {
    /// Builds the channel from a normalized Choi operator.
    pub fn from_choi(choi: CMatrix, split: BipartiteSplit) -> Result<Self> {
        let n = split.dim();
        check_dim(&choi, n * n, "QuantumChannel Choi")?;
        let spec = eigh(&choi)?;
        let cut = RankTolerance::default().cutoff(spec.max_abs());
        if spec.min() < -cut.max(1e-12) {
            return Err(Error::NotPsd {
                min_eigenvalue: spec.min(),
            });
        }
        let (da, db) = (split.d_a, split.d_b);
        let mut kraus = Vec::new();
        for (k, &lambda) in spec.eigenvalues.iter().enumerate() {
            if lambda <= cut {
                continue;
            }
            // eigenvalue of the unnormalized Choi n·Φ
            let amp = (lambda * n as f64).sqrt();
            let w = spec.eigenvectors.column(k);
            let mut op = CMatrix::zeros(n, n);
            for a in 0..da {
                for ai in 0..da {
                    for b in 0..db {
                        for bi in 0..db {
                            op[(a * db + b, ai * db + bi)] = w[choi_index(split, a, ai, b, bi)] * amp;
                        }
                    }
                }
            }
            kraus.push(op);
        }
        let completeness = kraus.iter().fold(CMatrix::zeros(n, n), |acc, k| acc + k.adjoint() * k);
        let tp_residual = (completeness - identity(n)).camax();
        Ok(Self {
            split,
            choi: hermitian_part(&choi),
            kraus,
            tp_residual,
            trace_nonpreserving: tp_residual > TP_TOL,
        })
    }

    pub fn from_kraus(kraus: &[CMatrix], split: BipartiteSplit) -> Result<Self> {
        for k in kraus {
            check_dim(k, split.dim(), "Kraus operator")?;
        }
        let choi = choi_of_map(|x| kraus_apply(kraus, x), split)?;
        Self::from_choi(choi, split)
    }

    pub fn from_unitary(u: &CMatrix, split: BipartiteSplit) -> Result<Self> {
        Self::from_kraus(std::slice::from_ref(u), split)
    }

    pub fn identity(split: BipartiteSplit) -> Self {
        Self::from_unitary(&identity(split.dim()), split).expect("identity is a channel")
    }

    pub fn split(&self) -> BipartiteSplit {
        self.split
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn trace_nonpreserving(&self) -> bool {
        self.trace_nonpreserving
    }

    /// Max-entry residual of `Σ K†K − I`.
    pub fn tp_residual(&self) -> f64 {
        self.tp_residual
    }

    /// Kraus-sum action on an arbitrary operator, without renormalization.
    pub fn apply_operator(&self, x: &CMatrix) -> Result<CMatrix> {
        check_dim(x, self.split.dim(), "channel input")?;
        Ok(kraus_apply(&self.kraus, x))
    }

    /// PPT test of the Choi state across `AA' : BB'`. A failing test proves
    /// the channel is not a separable operation.
    pub fn separability(&self) -> PptCertificate {
        ppt_of_matrix(&self.choi, choi_split(self.split), 1e-10)
    }
}

fn kraus_apply(kraus: &[CMatrix], x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    kraus
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, k| acc + k * x * k.adjoint())
}

/// Applies `channel` to a state. Outputs of a channel flagged
/// `trace_nonpreserving` are renormalized and the factor is logged.
pub fn apply_channel(channel: &QuantumChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.split() != channel.split {
        return Err(Error::DimensionMismatch {
            context: "apply_channel",
            expected: channel.split.dim(),
            found: rho.dim(),
        });
    }
    let out = hermitian_part(&channel.apply_operator(rho.matrix())?);
    let trace = out.trace().re;
    if channel.trace_nonpreserving {
        if trace <= 0.0 {
            return Err(Error::InvalidState(format!(
                "channel output has non-positive trace {trace}"
            )));
        }
        info!("renormalized output of a trace-nonpreserving channel by 1/{trace:.12}");
        return Ok(DensityMatrix::from_trusted(out.scale(1.0 / trace), channel.split));
    }
    Ok(DensityMatrix::from_trusted(out, channel.split))
}

/// Unit Choi vector of `e^{−iHt}` from the spectral data of `H`:
/// `ψ[(m,i,n,j)] = R_{mi,nj}/√(d_A d_B)` with
/// `R_{mi,nj} = Σ_k conj(V^k_{ij}) V^k_{mn} e^{−iE_k t}`, `V^k_{ij} = ⟨ij|e_k⟩`.
pub fn unitary_choi_state(h: &HermitianOperator, t: f64, split: BipartiteSplit) -> Result<CVector> {
    let n = split.dim();
    check_dim(h.matrix(), n, "unitary_choi_state")?;
    let spec = crate::linalg::eig_hermitian(h);
    let v = &spec.eigenvectors;
    let phases: Vec<_> = spec
        .eigenvalues
        .iter()
        .map(|&e| crate::linalg::C64::from_polar(1.0, -e * t))
        .collect();
    let (da, db) = (split.d_a, split.d_b);
    let norm = 1.0 / (n as f64).sqrt();
    let mut psi = CVector::zeros(n * n);
    for m in 0..da {
        for i in 0..da {
            for nn in 0..db {
                for j in 0..db {
                    let out_idx = m * db + nn;
                    let in_idx = i * db + j;
                    let mut r = ZERO;
                    for k in 0..n {
                        r += v[(in_idx, k)].conj() * v[(out_idx, k)] * phases[k];
                    }
                    psi[choi_index(split, m, i, nn, j)] = r * norm;
                }
            }
        }
    }
    Ok(psi)
}

/// Closest separable map of `e^{−iHt}`: the Choi vector is Schmidt-decomposed
/// across `AA' : BB'` and dephased in its Schmidt product basis. Tied
/// Schmidt coefficients are resolved against the normalized Hermitian
/// operator basis of `A`, so the map stays a mixture of local operations of
/// the form `P ⊗ Q` when the unitary has that structure.
pub fn closest_separable_map_unitary(h: &HermitianOperator, t: f64, split: BipartiteSplit) -> Result<QuantumChannel> {
    let psi = unitary_choi_state(h, t, split)?;
    let reference = operator_basis_reference(split.d_a);
    let form = schmidt_decompose_with_reference(&psi, choi_split(split), &reference)?;
    QuantumChannel::from_choi(form.dephased(), split)
}

/// Closest separable map found numerically: the relative-entropy CSS of the
/// Choi state across `AA' : BB'`, dualized back to a map.
pub fn closest_separable_map_numeric(
    choi: &CMatrix,
    split: BipartiteSplit,
    cfg: &SolverConfig,
) -> Result<(QuantumChannel, MeasureResult)> {
    let cs = choi_split(split);
    let state = DensityMatrix::new(choi.clone(), cs)?;
    let mut warm = Vec::new();
    if state.max_eigenvalue() >= 0.9 {
        let spec = eigh(state.matrix())?;
        let top = spec.eigenvectors.column(spec.dim() - 1).into_owned();
        warm.push(schmidt_dephased_with_reference(
            &top,
            cs,
            &operator_basis_reference(split.d_a),
        )?);
    }
    let result = ree_with_warm_starts(&state, cfg, &warm)?;
    let channel = QuantumChannel::from_choi(result.css.matrix().clone(), split)?;
    Ok((channel, result))
}

/// Controlled-NOT with A as control.
pub fn cnot() -> CMatrix {
    let mut u = CMatrix::zeros(4, 4);
    u[(0, 0)] = ONE;
    u[(1, 1)] = ONE;
    u[(2, 3)] = ONE;
    u[(3, 2)] = ONE;
    u
}

pub fn swap() -> CMatrix {
    let mut u = CMatrix::zeros(4, 4);
    u[(0, 0)] = ONE;
    u[(1, 2)] = ONE;
    u[(2, 1)] = ONE;
    u[(3, 3)] = ONE;
    u
}

/// Two-qubit local dephasing generated by `L = √(γ/2) Z` on each qubit for
/// time `t`: each qubit keeps its state with probability `(1 + e^{−2γt})/2`
/// and is hit by `Z` otherwise.
pub fn local_dephasing_channel(gamma: f64, t: f64) -> Result<QuantumChannel> {
    let keep = 0.5 * (1.0 + (-2.0 * gamma * t).exp());
    let single = [identity(2).scale(keep.sqrt()), pauli_z().scale((1.0 - keep).sqrt())];
    let kraus: Vec<CMatrix> = single
        .iter()
        .flat_map(|ka| single.iter().map(move |kb| tensor(ka, kb)))
        .collect();
    QuantumChannel::from_kraus(&kraus, BipartiteSplit::qubits())
}

/// Independent depolarizing noise `ρ ↦ (1 − q) ρ + q I/2` on each qubit.
pub fn local_depolarizing_channel(q: f64) -> Result<QuantumChannel> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("q = {q} outside [0, 1]")));
    }
    let paulis = [
        identity(2),
        crate::linalg::pauli_x(),
        crate::linalg::pauli_y(),
        pauli_z(),
    ];
    let weights = [1.0 - 0.75 * q, q / 4.0, q / 4.0, q / 4.0];
    let single: Vec<CMatrix> = paulis.iter().zip(weights).map(|(p, w)| p.scale(w.sqrt())).collect();
    let kraus: Vec<CMatrix> = single
        .iter()
        .flat_map(|ka| single.iter().map(move |kb| tensor(ka, kb)))
        .collect();
    QuantumChannel::from_kraus(&kraus, BipartiteSplit::qubits())
}
