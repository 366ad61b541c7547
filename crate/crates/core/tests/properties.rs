//! Randomized structural properties of the library.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qesl_core::choi::{choi_of_map, map_of_choi, QuantumChannel};
use qesl_core::cli::{parse_config, RunConfig};
use qesl_core::dynamics::{unitary_evolve, TimeGrid};
use qesl_core::linalg::{
    partial_trace, partial_transpose, random_hermitian, random_unitary, tensor, trace_norm_hermitian, HermitianOperator,
};
use qesl_core::measures::{relative_entropy, u_quantity, variance, wigner_yanase_skew};
use qesl_core::scenarios::corpus::random_local_gkls;
use qesl_core::states::{random_density, BipartiteSplit, DensityMatrix, Subsystem};

fn split_strategy() -> impl Strategy<Value = BipartiteSplit> {
    prop_oneof![Just((2, 2)), Just((2, 3)), Just((3, 2)), Just((1, 3))]
        .prop_map(|(a, b)| BipartiteSplit::new(a, b).unwrap())
}

fn state_strategy() -> impl Strategy<Value = DensityMatrix> {
    (split_strategy(), any::<u64>(), 0usize..6).prop_map(|(split, seed, r)| {
        let rank = 1 + r % split.dim();
        random_density(split, rank, seed).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_operations_are_consistent(rho in state_strategy()) {
        let split = rho.split();
        let m = rho.matrix();
        let twice = partial_transpose(&partial_transpose(m, split, Subsystem::B).unwrap(), split, Subsystem::B).unwrap();
        prop_assert!((&twice - m).camax() < 1e-15);
        let ta = partial_transpose(m, split, Subsystem::A).unwrap();
        let tb = partial_transpose(m, split, Subsystem::B).unwrap();
        prop_assert!((ta.transpose() - tb).camax() < 1e-15);
        for keep in [Subsystem::A, Subsystem::B] {
            let reduced = partial_trace(m, split, keep).unwrap();
            prop_assert!((reduced.trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn relative_entropy_is_nonnegative_and_zero_on_the_diagonal(rho in state_strategy(), seed in any::<u64>()) {
        let sigma = random_density(rho.split(), rho.dim(), seed).unwrap();
        let d = relative_entropy(&rho, sigma.matrix(), 1e-9).unwrap().value().unwrap();
        prop_assert!(d >= -1e-10, "{d}");
        let full = random_density(rho.split(), rho.dim(), seed ^ 1).unwrap();
        let self_d = relative_entropy(&full, full.matrix(), 1e-9).unwrap().value().unwrap();
        prop_assert!(self_d.abs() < 1e-10, "{self_d}");
        // Pinsker: D ≥ ½‖ρ − σ‖₁²
        let tr = trace_norm_hermitian(&(rho.matrix() - sigma.matrix()));
        prop_assert!(d >= 0.5 * tr * tr - 1e-10);
    }

    #[test]
    fn skew_information_sits_below_variance(rho in state_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o = random_hermitian(rho.dim(), &mut rng);
        let v = variance(&rho, &o).unwrap();
        let i = wigner_yanase_skew(&rho, &o).unwrap();
        let u = u_quantity(&rho, &o).unwrap();
        prop_assert!(i >= -1e-12 && i <= v + 1e-12, "I = {i}, V = {v}");
        prop_assert!(u >= 0.0 && u <= v + 1e-12, "U = {u}, V = {v}");
    }

    #[test]
    fn unitary_evolution_keeps_the_spectrum(rho in state_strategy(), seed in any::<u64>(), t in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = HermitianOperator::new(random_hermitian(rho.dim(), &mut rng)).unwrap();
        let out = unitary_evolve(&h, &rho, t).unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
        prop_assert!((out.purity() - rho.purity()).abs() < 1e-12);
    }

    #[test]
    fn choi_round_trip_reproduces_the_channel(seed in any::<u64>()) {
        let q = BipartiteSplit::qubits();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = tensor(&random_unitary(2, &mut rng), &random_unitary(2, &mut rng));
        let channel = QuantumChannel::from_unitary(&u, q).unwrap();
        let choi = choi_of_map(|x| &u * x * u.adjoint(), q).unwrap();
        prop_assert!((&choi - channel.choi()).camax() < 1e-12);
        let rho = random_density(q, 3, seed).unwrap();
        let via_choi = map_of_choi(&choi, q).unwrap().apply(rho.matrix()).unwrap();
        let direct = &u * rho.matrix() * u.adjoint();
        prop_assert!((via_choi - direct).camax() < 1e-12);
        prop_assert!(channel.separability().is_ppt);
    }

    #[test]
    fn config_serialization_is_idempotent(p in 0.0f64..=1.0, gamma in 0.0f64..5.0, steps in 4usize..2000, seed in any::<u64>()) {
        let text = format!(
            r#"{{"scenario":"dephasing","parameters":{{"p":{p},"gamma":{gamma}}},"grid":{{"steps":{steps}}},"seed":{seed}}}"#
        );
        let first: RunConfig = parse_config(&text).unwrap();
        let again = parse_config(&first.to_json()).unwrap();
        prop_assert_eq!(first.to_json(), again.to_json());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Local GKLS flows never increase the relative entropy to the flowed
    /// companion (data processing), so observed rates stay at or below zero
    /// up to finite-difference error.
    #[test]
    fn local_flows_do_not_increase_relative_entropy(seed in any::<u64>()) {
        use qesl_core::bounds::fe_along_trajectory;
        use qesl_core::dynamics::gkls_evolve;
        let q = BipartiteSplit::qubits();
        let model = random_local_gkls(seed, 0.4);
        let rho = random_density(q, 4, seed ^ 0xA5).unwrap();
        let sigma = random_density(q, 4, seed ^ 0x5A).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let traj = gkls_evolve(&model, &rho, grid).unwrap();
        let companion = gkls_evolve(&model, &sigma, grid).unwrap();
        let traj = traj.with_companions(companion.states, companion.state_rates).unwrap();
        let values: Vec<f64> = fe_along_trajectory(&traj, 1e-9).unwrap().into_iter().map(|(_, v)| v).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "{} -> {}", w[0], w[1]);
        }
    }
}
