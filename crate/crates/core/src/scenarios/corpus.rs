//! A fixed collection of two-qubit trajectories with companion separable
//! states, used to check the rate bounds and speed-limit times in bulk.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    run_dephasing, run_nonlocal, unitary_companions, xyz_hamiltonian, DephasingParams, NonlocalParams, ScenarioOptions,
    DERIVATIVE_STEP,
};
use crate::bounds::BoundKind;
use crate::dynamics::{gkls_evolve, unitary_trajectory, GklsModel, TimeGrid, Trajectory};
use crate::error::Result;
use crate::linalg::{identity, random_complex_gaussian, random_hermitian, tensor, CMatrix};
use crate::measures::{derive_seed, ree, SolverConfig};
use crate::states::{closest_separable_pure, random_density, random_pure_state, BipartiteSplit, DensityMatrix};

/// One trajectory of the corpus and the bound kinds that apply to it.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub id: String,
    pub trajectory: Trajectory,
    /// Generator of the dynamics when it is unitary.
    pub hamiltonian: Option<CMatrix>,
    pub kinds: Vec<BoundKind>,
}

/// GKLS model built from local terms only: `H = H_A⊗I + I⊗H_B` and one jump
/// operator on each side. Its flow is a product of local channels, so it
/// keeps separable states separable.
pub fn random_local_gkls(seed: u64, strength: f64) -> GklsModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id2 = identity(2);
    let ha = random_hermitian(2, &mut rng).scale(0.5);
    let hb = random_hermitian(2, &mut rng).scale(0.5);
    let h = tensor(&ha, &id2) + tensor(&id2, &hb);
    let la = random_complex_gaussian(2, 2, &mut rng).scale(strength);
    let lb = random_complex_gaussian(2, 2, &mut rng).scale(strength);
    let jumps = vec![tensor(&la, &id2), tensor(&id2, &lb)];
    GklsModel::new(h, jumps, BipartiteSplit::qubits()).expect("two-qubit local model")
}

fn gkls_entry(
    id: String,
    model: &GklsModel,
    rho0: &DensityMatrix,
    sigma0: &DensityMatrix,
    grid: TimeGrid,
) -> Result<CorpusEntry> {
    let traj = gkls_evolve(model, rho0, grid)?;
    let companion = gkls_evolve(model, sigma0, grid)?;
    let traj = traj.with_companions(companion.states, companion.state_rates)?;
    Ok(CorpusEntry {
        id,
        trajectory: traj,
        hamiltonian: None,
        kinds: vec![BoundKind::Cptp, BoundKind::Trace],
    })
}

/// Non-local example parameters in the corpus: `(p, δ, θ, μz)`.
pub const NONLOCAL_CASES: [(f64, f64, f64, f64); 8] = [
    (0.0, 0.1, 3.5, 0.0),
    (0.0, 0.0, 3.15, 0.0),
    (0.3, 0.5, 1.2, 0.0),
    (0.2, 1.0, 0.4, 0.0),
    (0.7, 0.3, 2.0, 0.0),
    (0.5, 0.4, 0.9, 0.0),
    (0.1, 0.8, 0.8, 0.0),
    (0.4, 0.2, 2.5, 0.3),
];

/// Dephasing example parameters in the corpus: `(p, γ)`.
pub const DEPHASING_CASES: [(f64, f64); 8] = [
    (0.25, 0.2),
    (0.25, 1.0),
    (0.5, 0.2),
    (0.5, 1.0),
    (0.1, 0.5),
    (0.8, 0.5),
    (0.6, 2.0),
    (0.95, 0.3),
];

/// Builds the corpus on `grid`. All randomness derives from `seed`.
///
/// Contents: the non-local and dephasing cases above; six random local GKLS
/// models started from random pure states with their analytic closest
/// separable state as companion; four random local GKLS models started from
/// random mixed states with a numerically found closest separable state; four
/// random `XX + YY + ZZ` unitaries acting on random mixed states, with
/// companions moved by the closest separable map of the propagator.
pub fn standard_corpus(grid: TimeGrid, seed: u64) -> Result<Vec<CorpusEntry>> {
    let q = BipartiteSplit::qubits();
    let mut out = Vec::new();
    let all = ScenarioOptions::with_kinds(&[]);
    for (p, delta, theta, mu_z) in NONLOCAL_CASES {
        let params = NonlocalParams {
            p,
            delta,
            theta,
            mu_z: (mu_z != 0.0).then_some(mu_z),
        };
        let run = run_nonlocal(&params, grid, &all)?;
        out.push(CorpusEntry {
            id: format!("nonlocal p={p} delta={delta} theta={theta} mu_z={mu_z}"),
            trajectory: run.trajectory,
            hamiltonian: run.hamiltonian,
            kinds: BoundKind::ALL.to_vec(),
        });
    }
    for (p, gamma) in DEPHASING_CASES {
        let run = run_dephasing(&DephasingParams::new(p, gamma)?, grid, &all)?;
        out.push(CorpusEntry {
            id: format!("dephasing p={p} gamma={gamma}"),
            trajectory: run.trajectory,
            hamiltonian: None,
            kinds: vec![BoundKind::Cptp, BoundKind::Trace],
        });
    }
    let mut stream = 0;
    let mut next_seed = || {
        stream += 1;
        derive_seed(seed, stream)
    };
    for i in 0..6 {
        let model = random_local_gkls(next_seed(), 0.4);
        let psi = random_pure_state(q, next_seed());
        let rho0 = DensityMatrix::from_pure(&psi, q)?;
        let sigma0 = closest_separable_pure(&psi, q)?;
        out.push(gkls_entry(
            format!("local-gkls pure #{i}"),
            &model,
            &rho0,
            &sigma0,
            grid,
        )?);
    }
    let solver = SolverConfig {
        restarts: 6,
        seed: next_seed(),
        ..Default::default()
    };
    for i in 0..4 {
        let model = random_local_gkls(next_seed(), 0.3);
        let rho0 = random_density(q, 2 + i % 3, next_seed())?;
        let sigma0 = ree(&rho0, &solver)?.css;
        out.push(gkls_entry(
            format!("local-gkls mixed #{i}"),
            &model,
            &rho0,
            &sigma0,
            grid,
        )?);
    }
    for i in 0..4 {
        let mut rng = ChaCha8Rng::seed_from_u64(next_seed());
        let mut mu: [f64; 3] = [
            rng.random_range(0.0..1.5),
            rng.random_range(0.0..1.5),
            rng.random_range(0.0..1.5),
        ];
        mu.sort_by(|a, b| b.total_cmp(a));
        let h = xyz_hamiltonian(mu[0], mu[1], mu[2]);
        let rho0 = random_density(q, 3 + i % 2, next_seed())?;
        let sigma0 = ree(&rho0, &solver)?.css;
        let traj = unitary_trajectory(&h, &rho0, grid)?;
        let (companions, rates) = unitary_companions(&h, &sigma0, grid, DERIVATIVE_STEP)?;
        out.push(CorpusEntry {
            id: format!("xyz-unitary mixed #{i} mu={mu:?}"),
            trajectory: traj.with_companions(companions, rates)?,
            hamiltonian: Some(h.into_matrix()),
            kinds: vec![BoundKind::Unitary, BoundKind::Cptp, BoundKind::Trace],
        });
    }
    Ok(out)
}
