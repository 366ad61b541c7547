//! Time evolution: unitary propagation, GKLS integration with fixed-step RK4,
//! the Liouvillian and evolution speed, and central differences of operator
//! families.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    anticommutator, check_dim, commutator, eigh_unchecked, hermitian_part, log_from_spectrum, projector_from_spectrum,
    schatten_norm, trace_product, unitary_propagator, CMatrix, HermitianOperator, RankTolerance, SchattenP, I,
};
use crate::states::{BipartiteSplit, DensityMatrix};

/// Eigenvalues of an integrated state below this are a step-size failure.
pub const PSD_FAILURE: f64 = -1e-8;

/// Eigenvalues between this and zero are round-off and left untouched.
const ROUND_OFF_NEGATIVE: f64 = -1e-14;

/// `dρ/dt = −i[H, ρ] + Σ_α (2 L_α ρ L_α† − {L_α† L_α, ρ})` with `ħ = 1` and the
/// rates folded into the jump operators.
#[derive(Debug, Clone)]
pub struct GklsModel {
    split: BipartiteSplit,
    hamiltonian: HermitianOperator,
    jumps: Vec<CMatrix>,
    /// `Σ_α L_α† L_α`, cached.
    jump_sum: CMatrix,
}

impl GklsModel {
    pub fn new(hamiltonian: CMatrix, jumps: Vec<CMatrix>, split: BipartiteSplit) -> Result<Self> {
        let n = split.dim();
        check_dim(&hamiltonian, n, "GKLS Hamiltonian")?;
        for l in &jumps {
            check_dim(l, n, "GKLS jump operator")?;
        }
        let jump_sum = jumps.iter().fold(CMatrix::zeros(n, n), |acc, l| acc + l.adjoint() * l);
        Ok(Self {
            split,
            hamiltonian: HermitianOperator::new(hamiltonian)?,
            jumps,
            jump_sum,
        })
    }

    pub fn unitary(hamiltonian: CMatrix, split: BipartiteSplit) -> Result<Self> {
        Self::new(hamiltonian, Vec::new(), split)
    }

    pub fn split(&self) -> BipartiteSplit {
        self.split
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        self.hamiltonian.matrix()
    }

    pub fn jumps(&self) -> &[CMatrix] {
        &self.jumps
    }

    pub fn is_unitary(&self) -> bool {
        self.jumps.is_empty()
    }

    /// `L(ρ)` for any square matrix of the right size.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = commutator(self.hamiltonian.matrix(), rho) * (-I);
        for l in &self.jumps {
            out += (l * rho * l.adjoint()).scale(2.0);
        }
        out -= anticommutator(&self.jump_sum, rho);
        out
    }
}

/// `L(ρ)`, Hermitian and traceless.
pub fn liouvillian_apply(model: &GklsModel, rho: &DensityMatrix) -> Result<CMatrix> {
    check_dim(rho.matrix(), model.split.dim(), "liouvillian_apply")?;
    Ok(hermitian_part(&model.apply(rho.matrix())))
}

/// Evolution speed `‖L(ρ)‖₂`.
pub fn evolution_speed(model: &GklsModel, rho: &DensityMatrix) -> Result<f64> {
    Ok(schatten_norm(&liouvillian_apply(model, rho)?, SchattenP::Two))
}

/// `e^{−iHt} ρ₀ e^{iHt}`.
pub fn unitary_evolve(h: &HermitianOperator, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    check_dim(h.matrix(), rho0.dim(), "unitary_evolve")?;
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let u = unitary_propagator(h.matrix(), t)?;
    let out = hermitian_part(&(&u * rho0.matrix() * u.adjoint()));
    Ok(DensityMatrix::from_trusted(out, rho0.split()))
}

/// Uniform grid `t0 + k (t1 − t0)/steps`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
            return Err(Error::InvalidArgument(format!(
                "time grid needs finite t1 > t0, got [{t0}, {t1}]"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidArgument("time grid needs at least one step".into()));
        }
        Ok(Self { t0, t1, steps })
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    /// Number of nodes, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t1
        } else {
            self.t0 + k as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.t(k)).collect()
    }
}

/// States `ρ_t` on a grid with their derivatives, and optionally the
/// companion separable states `σ_t` with theirs.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<DensityMatrix>,
    pub state_rates: Vec<CMatrix>,
    pub companions: Vec<DensityMatrix>,
    pub companion_rates: Vec<CMatrix>,
    /// Number of nodes where small negative eigenvalues were clipped.
    pub psd_repairs: usize,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, states: Vec<DensityMatrix>, state_rates: Vec<CMatrix>) -> Result<Self> {
        if states.len() != grid.len() || state_rates.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                context: "trajectory nodes",
                expected: grid.len(),
                found: states.len().min(state_rates.len()),
            });
        }
        Ok(Self {
            grid,
            states,
            state_rates,
            companions: Vec::new(),
            companion_rates: Vec::new(),
            psd_repairs: 0,
        })
    }

    pub fn with_companions(mut self, companions: Vec<DensityMatrix>, rates: Vec<CMatrix>) -> Result<Self> {
        if companions.len() != self.grid.len() || rates.len() != self.grid.len() {
            return Err(Error::DimensionMismatch {
                context: "companion nodes",
                expected: self.grid.len(),
                found: companions.len().min(rates.len()),
            });
        }
        self.companions = companions;
        self.companion_rates = rates;
        Ok(self)
    }

    pub fn has_companions(&self) -> bool {
        !self.companions.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.nodes()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Exact unitary trajectory with `ρ̇ = −i[H, ρ]` at every node.
pub fn unitary_trajectory(h: &HermitianOperator, rho0: &DensityMatrix, grid: TimeGrid) -> Result<Trajectory> {
    let model = GklsModel::unitary(h.matrix().clone(), rho0.split())?;
    let mut states = Vec::with_capacity(grid.len());
    let mut rates = Vec::with_capacity(grid.len());
    for t in grid.nodes() {
        let rho = unitary_evolve(h, rho0, t - grid.t0)?;
        rates.push(liouvillian_apply(&model, &rho)?);
        states.push(rho);
    }
    Trajectory::new(grid, states, rates)
}

/// Integrates the GKLS equation with classic RK4, one step per grid interval.
///
/// After each step the state is symmetrized; a minimum eigenvalue in
/// `[−1e-8, −1e-14)` is clipped and the trace renormalized (counted in
/// `psd_repairs`), anything lower fails with [`Error::StepFailure`].
pub fn gkls_evolve(model: &GklsModel, rho0: &DensityMatrix, grid: TimeGrid) -> Result<Trajectory> {
    check_dim(rho0.matrix(), model.split.dim(), "gkls_evolve")?;
    let dt = grid.dt();
    let mut rho = rho0.matrix().clone();
    let mut states = Vec::with_capacity(grid.len());
    let mut rates = Vec::with_capacity(grid.len());
    states.push(rho0.clone());
    rates.push(hermitian_part(&model.apply(&rho)));
    let mut repairs = 0;
    for k in 1..grid.len() {
        let k1 = model.apply(&rho);
        let k2 = model.apply(&(&rho + k1.scale(0.5 * dt)));
        let k3 = model.apply(&(&rho + k2.scale(0.5 * dt)));
        let k4 = model.apply(&(&rho + k3.scale(dt)));
        rho += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0);
        rho = hermitian_part(&rho);
        let min = eigh_unchecked(&rho).min();
        let state = if min < ROUND_OFF_NEGATIVE {
            if min < PSD_FAILURE {
                return Err(Error::StepFailure {
                    t: grid.t(k),
                    min_eigenvalue: min,
                });
            }
            repairs += 1;
            debug!("clipped eigenvalue {min:.3e} at t = {}", grid.t(k));
            let (fixed, _) = DensityMatrix::repaired(&rho, model.split);
            rho = fixed.matrix().clone();
            fixed
        } else {
            DensityMatrix::from_trusted(rho.clone(), model.split)
        };
        rates.push(hermitian_part(&model.apply(&rho)));
        states.push(state);
    }
    let mut traj = Trajectory::new(grid, states, rates)?;
    traj.psd_repairs = repairs;
    Ok(traj)
}

/// Central difference `(σ(t+h) − σ(t−h))/2h` of an operator family defined on
/// `[lo, hi]`.
pub fn numeric_derivative<F>(family: F, t: f64, h: f64, domain: (f64, f64)) -> Result<CMatrix>
where
    F: Fn(f64) -> Result<CMatrix>,
{
    let (lo, hi) = domain;
    if h.is_nan() || h <= 0.0 || t - h < lo || t + h > hi {
        return Err(Error::OutsideDomain { t, h, lo, hi });
    }
    let plus = family(t + h)?;
    let minus = family(t - h)?;
    Ok(hermitian_part(&((plus - minus).scale(0.5 / h))))
}

/// Entropy production `Γ = −tr(ρ̇ Π_ρ ln ρ)`.
pub fn entropy_rate(rho: &DensityMatrix, rho_dot: &CMatrix) -> Result<f64> {
    check_dim(rho_dot, rho.dim(), "entropy_rate")?;
    let spec = eigh_unchecked(rho.matrix());
    let tol = RankTolerance::default();
    let log = log_from_spectrum(&spec, tol);
    let proj = projector_from_spectrum(&spec, tol);
    Ok(-trace_product(rho_dot, &(proj * log)).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, identity, pauli_z, random_hermitian, tensor};
    use crate::measures::von_neumann_entropy;
    use crate::states::random_density;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dephasing_model(gamma: f64) -> GklsModel {
        let s = (gamma / 2.0).sqrt();
        let l1 = tensor(&pauli_z(), &identity(2)).scale(s);
        let l2 = tensor(&identity(2), &pauli_z()).scale(s);
        GklsModel::new(CMatrix::zeros(4, 4), vec![l1, l2], BipartiteSplit::qubits()).unwrap()
    }

    #[test]
    fn liouvillian_examples() {
        let q = BipartiteSplit::qubits();
        let model = dephasing_model(0.7);
        let diag = DensityMatrix::new(
            CMatrix::from_diagonal(&crate::linalg::CVector::from_vec(vec![
                c(0.1, 0.0),
                c(0.2, 0.0),
                c(0.3, 0.0),
                c(0.4, 0.0),
            ])),
            q,
        )
        .unwrap();
        assert!(liouvillian_apply(&model, &diag).unwrap().norm() < 1e-15);
        assert!(evolution_speed(&model, &diag).unwrap() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_hermitian(4, &mut rng);
        let rho = random_density(q, 4, 2).unwrap();
        let unitary = GklsModel::unitary(h.clone(), q).unwrap();
        let direct = commutator(&h, rho.matrix()) * (-I);
        let out = liouvillian_apply(&unitary, &rho).unwrap();
        assert!((out - &direct).norm() < 1e-13);
        let speed = evolution_speed(&unitary, &rho).unwrap();
        assert!((speed - direct.norm()).abs() < 1e-13);

        let gamma = 0.7;
        let out = liouvillian_apply(&model, &rho).unwrap();
        assert!(out.trace().norm() < 1e-14);
        // the |00⟩⟨11| coherence decays at rate 4γ
        let ratio = out[(0, 3)] / rho.matrix()[(0, 3)];
        assert!((ratio - c(-4.0 * gamma, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn unitary_evolution_preserves_spectrum() {
        let q = BipartiteSplit::qubits();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..10 {
            let h = HermitianOperator::new(random_hermitian(4, &mut rng)).unwrap();
            let rho0 = random_density(q, 3, seed).unwrap();
            assert_eq!(unitary_evolve(&h, &rho0, 0.0).unwrap(), rho0);
            let rho = unitary_evolve(&h, &rho0, 1.3).unwrap();
            assert!((rho.purity() - rho0.purity()).abs() < 1e-10);
            assert!((von_neumann_entropy(&rho) - von_neumann_entropy(&rho0)).abs() < 1e-8);
        }
    }

    #[test]
    fn rk4_agrees_with_unitary_evolution() {
        let q = BipartiteSplit::qubits();
        let h = random_hermitian(4, &mut ChaCha8Rng::seed_from_u64(8));
        let rho0 = random_density(q, 2, 9).unwrap();
        let grid = TimeGrid::new(0.0, 2.0, 400).unwrap();
        let model = GklsModel::unitary(h.clone(), q).unwrap();
        let numeric = gkls_evolve(&model, &rho0, grid).unwrap();
        let exact = unitary_trajectory(&HermitianOperator::new(h).unwrap(), &rho0, grid).unwrap();
        for (a, b) in numeric.states.iter().zip(&exact.states) {
            assert!((a.matrix() - b.matrix()).camax() < 1e-8);
        }
    }

    #[test]
    fn rk4_is_fourth_order_on_dephasing() {
        let q = BipartiteSplit::qubits();
        let rho0 = random_density(q, 4, 12).unwrap();
        let model = dephasing_model(1.0);
        let exact = |t: f64| rho0.matrix()[(0, 3)] * (-4.0 * t).exp();
        let err = |steps: usize| {
            let traj = gkls_evolve(&model, &rho0, TimeGrid::new(0.0, 2.0, steps).unwrap()).unwrap();
            (traj.states.last().unwrap().matrix()[(0, 3)] - exact(2.0)).norm()
        };
        let (coarse, fine) = (err(20), err(40));
        let order = (coarse / fine).log2();
        assert!(order > 3.8 && order < 4.3, "observed order {order}");
        let traj = gkls_evolve(&model, &rho0, TimeGrid::new(0.0, 2.0, 400).unwrap()).unwrap();
        for s in &traj.states {
            assert!((s.matrix().trace().re - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn numeric_derivative_contract() {
        let sigma0 = random_density(BipartiteSplit::qubits(), 4, 5).unwrap();
        let constant = |_t: f64| Ok(sigma0.matrix().clone());
        let d = numeric_derivative(constant, 0.5, 1e-5, (0.0, 1.0)).unwrap();
        assert!(d.norm() < 1e-15);
        assert!(matches!(
            numeric_derivative(constant, 0.0, 1e-5, (0.0, 1.0)),
            Err(Error::OutsideDomain { .. })
        ));

        let h = random_hermitian(4, &mut ChaCha8Rng::seed_from_u64(6));
        let hop = HermitianOperator::new(h.clone()).unwrap();
        let family = |t: f64| Ok(unitary_evolve(&hop, &sigma0, t)?.into_matrix());
        let t = 0.7;
        let sigma_t = unitary_evolve(&hop, &sigma0, t).unwrap();
        let exact = commutator(&h, sigma_t.matrix()) * (-I);
        let e1 = (numeric_derivative(family, t, 1e-2, (-10.0, 10.0)).unwrap() - &exact).norm();
        let e2 = (numeric_derivative(family, t, 5e-3, (-10.0, 10.0)).unwrap() - &exact).norm();
        let ratio = e1 / e2;
        assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
        let d = numeric_derivative(family, t, 1e-5, (-10.0, 10.0)).unwrap();
        assert!(d.trace().norm() < 1e-6);
    }

    #[test]
    fn entropy_rate_matches_finite_difference() {
        let q = BipartiteSplit::qubits();
        let rho0 = random_density(q, 4, 21).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let h = random_hermitian(4, &mut rng);
        let l = crate::linalg::random_complex_gaussian(4, 4, &mut rng).scale(0.3);
        let model = GklsModel::new(h, vec![l], q).unwrap();
        let traj = gkls_evolve(&model, &rho0, TimeGrid::new(0.0, 1.0, 1000).unwrap()).unwrap();
        let dt = traj.grid.dt();
        for k in [100, 500, 900] {
            let s = |j: usize| von_neumann_entropy(&traj.states[j]);
            let fd1 = (s(k + 1) - s(k - 1)) / (2.0 * dt);
            let fd2 = (s(k + 2) - s(k - 2)) / (4.0 * dt);
            let fd = (4.0 * fd1 - fd2) / 3.0;
            let gamma = entropy_rate(&traj.states[k], &traj.state_rates[k]).unwrap();
            assert!((fd - gamma).abs() < 1e-5, "{fd} vs {gamma}");
        }
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 4).is_err());
        let g = TimeGrid::new(0.0, 2.0, 400).unwrap();
        assert_eq!(g.len(), 401);
        assert_eq!(g.t(400), 2.0);
        assert!((g.dt() - 0.005).abs() < 1e-15);
    }
}
