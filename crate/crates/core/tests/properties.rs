use hcrep::random::{random_bases, random_split_state, random_state, random_unitary};
use hcrep::{
    biorthogonal_decompose, born_joint_probability, cascade_distribution, classical_observable,
    combined_hidden_measurement, compare_distributions, conditional_remainder, oracle_distribution,
    outcome_probabilities, partial_trace, project_entity, proper_state, CVector, CascadeState,
    DensityMatrix, Factorization, HiddenMeasurementRep, LambdaVector, MeasurementBasis,
    ProperState, StateVector, C64,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 2..=4)
}

fn setup(dims: &[usize], seed: u64) -> (StateVector, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<String> = (0..dims.len()).map(|i| format!("e{i}")).collect();
    let f = Factorization::new(dims.to_vec(), labels).unwrap();
    (random_state(f, &mut rng), rng)
}

fn vector_close_up_to_phase(a: &StateVector, b: &StateVector) -> f64 {
    a.projector().distance(&b.projector())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_reconstructs(dims in dims_strategy(), seed in any::<u64>()) {
        let (psi, _) = setup(&dims, seed);
        for label in psi.factorization().labels() {
            let d = biorthogonal_decompose(&psi, label).unwrap();
            prop_assert!((d.reconstruct() - psi.amplitudes()).norm() < 1e-10);
            let weight: f64 = d.coefficients().iter().map(|a| a.norm_sqr()).sum();
            prop_assert!((weight - 1.0).abs() < 1e-10);
            let focus_dim = psi.factorization().factor_dim(label).unwrap();
            let rest_dim = psi.factorization().total_dim() / focus_dim;
            prop_assert!(d.rank() <= focus_dim.min(rest_dim));
            for family in [d.left_vectors(), d.right_vectors()] {
                for (i, x) in family.iter().enumerate() {
                    for (j, y) in family.iter().enumerate() {
                        let target = if i == j { 1.0 } else { 0.0 };
                        prop_assert!((x.dotc(y) - C64::from(target)).norm() < 1e-10);
                    }
                }
            }
            for w in d.coefficients().windows(2) {
                prop_assert!(w[0].re >= w[1].re);
            }
        }
    }

    #[test]
    fn schmidt_weights_match_partial_trace(dims in dims_strategy(), seed in any::<u64>()) {
        let (psi, _) = setup(&dims, seed);
        let cascade = CascadeState::new(psi.clone());
        for label in psi.factorization().labels() {
            let rho = partial_trace(&psi, label).unwrap();
            let from_schmidt = biorthogonal_decompose(&psi, label).unwrap().reduced_density();
            prop_assert!(from_schmidt.distance(&rho) < 1e-9);
            let omega = proper_state(&cascade, label).unwrap();
            prop_assert!(omega.matrix().distance(&rho) < 1e-9);
            prop_assert!(DensityMatrix::new(omega.matrix().entries().clone()).is_ok());
        }
    }

    #[test]
    fn remainder_is_partial_projection(dims in dims_strategy(), seed in any::<u64>()) {
        let (psi, mut rng) = setup(&dims, seed);
        let cascade = CascadeState::new(psi.clone());
        for (label, &d) in psi.factorization().labels().iter().zip(psi.factorization().dims()) {
            let phi: CVector = random_unitary(d, &mut rng).column(0).into_owned();
            let p = hcrep::outcome_probability(&proper_state(&cascade, label).unwrap(), &phi).unwrap();
            if p <= 1e-6 {
                continue;
            }
            let via_schmidt = conditional_remainder(&cascade, label, &phi).unwrap();
            let direct = project_entity(&psi, label, &phi).unwrap();
            prop_assert!(vector_close_up_to_phase(&via_schmidt, &direct) < 1e-9);
        }
    }

    #[test]
    fn cascade_matches_born_rule_in_every_order(dims in prop::collection::vec(2usize..=3, 2..=3), seed in any::<u64>()) {
        let (psi, mut rng) = setup(&dims, seed);
        let bases = random_bases(psi.factorization(), &mut rng).unwrap();
        let oracle = oracle_distribution(&psi, &bases).unwrap();
        prop_assert!((oracle.total() - 1.0).abs() < 1e-9);
        let mut order = psi.factorization().labels().to_vec();
        order.reverse();
        for _ in 0..2 {
            let d = cascade_distribution(&psi, &order, &bases).unwrap();
            let report = compare_distributions(&oracle, &d, 1e-9).unwrap();
            prop_assert!(report.passed(), "{report:?}");
            order.rotate_left(1);
        }
    }

    #[test]
    fn stepwise_probabilities_sum_to_one(dims in dims_strategy(), seed in any::<u64>(), us in prop::collection::vec(0.0f64..1.0, 4)) {
        let (psi, mut rng) = setup(&dims, seed);
        let bases = random_bases(psi.factorization(), &mut rng).unwrap();
        let mut state = CascadeState::new(psi);
        for (basis, u) in bases.iter().zip(us) {
            let omega = proper_state(&state, basis.entity()).unwrap();
            let total: f64 = outcome_probabilities(&omega, basis).unwrap().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            let (_, next) = hcrep::measure_step(&state, basis, u).unwrap();
            state = next;
        }
        prop_assert!(state.is_complete());
    }

    #[test]
    fn separated_entity_has_constant_correlation_map(dims in dims_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<String> = (0..dims.len()).map(|i| format!("e{i}")).collect();
        let f = Factorization::new(dims.clone(), labels.clone()).unwrap();
        let psi = random_split_state(&f, &labels[0], &mut rng).unwrap();
        let cascade = CascadeState::new(psi);
        let basis = hcrep::random::random_basis(&labels[0], dims[0], &mut rng).unwrap();
        let omega = proper_state(&cascade, &labels[0]).unwrap();
        let probabilities = outcome_probabilities(&omega, &basis).unwrap();
        let mut reference: Option<ProperState> = None;
        for (phi, p) in basis.vectors().iter().zip(probabilities) {
            if p <= 1e-6 {
                continue;
            }
            let w = hcrep::hidden_correlation_map(&cascade, &labels[0], phi, &labels[1]).unwrap();
            if let Some(r) = &reference {
                prop_assert!(w.matrix().distance(r.matrix()) < 1e-9);
            }
            reference = Some(w);
        }
    }

    #[test]
    fn born_is_invariant_under_joint_permutation(seed in any::<u64>()) {
        let (psi, mut rng) = setup(&[2, 3, 2], seed);
        let outcomes: Vec<CVector> = psi
            .factorization()
            .dims()
            .iter()
            .map(|&d| random_unitary(d, &mut rng).column(0).into_owned())
            .collect();
        let p = born_joint_probability(&psi, &outcomes).unwrap();
        // reorder factors (a, b, c) -> (c, a, b)
        let f = psi.factorization();
        let permuted_f = Factorization::new(
            vec![f.dims()[2], f.dims()[0], f.dims()[1]],
            vec![f.labels()[2].clone(), f.labels()[0].clone(), f.labels()[1].clone()],
        )
        .unwrap();
        let mut amps = CVector::zeros(12);
        for a in 0..2 {
            for b in 0..3 {
                for c in 0..2 {
                    amps[(c * 2 + a) * 3 + b] = psi.amplitudes()[(a * 3 + b) * 2 + c];
                }
            }
        }
        let permuted = StateVector::new(amps, permuted_f).unwrap();
        let q = born_joint_probability(
            &permuted,
            &[outcomes[2].clone(), outcomes[0].clone(), outcomes[1].clone()],
        )
        .unwrap();
        prop_assert!((p - q).abs() < 1e-12);
    }

    #[test]
    fn classical_observable_cells_have_born_measure(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Factorization::new(vec![d, 2], vec!["a", "b"]).unwrap();
        let psi = random_state(f, &mut rng);
        let omega = proper_state(&CascadeState::new(psi), "a").unwrap();
        let rep = HiddenMeasurementRep::new(hcrep::random::random_basis("a", d, &mut rng).unwrap());
        let probabilities = outcome_probabilities(&omega, rep.basis()).unwrap();
        for cell in rep.cells(&omega).unwrap() {
            prop_assert!((cell.width() - probabilities[cell.index]).abs() < 1e-12);
            prop_assert_eq!(classical_observable(&rep, &omega, cell.lower).unwrap(), cell.index);
            let inner = 0.5 * (cell.lower + cell.upper);
            prop_assert_eq!(classical_observable(&rep, &omega, inner).unwrap(), cell.index);
        }
    }

    #[test]
    fn combined_measurement_is_deterministic(seed in any::<u64>(), lambda in prop::collection::vec(0.0f64..1.0, 3)) {
        let (psi, mut rng) = setup(&[2, 3, 2], seed);
        let reps: Vec<HiddenMeasurementRep> = random_bases(psi.factorization(), &mut rng)
            .unwrap()
            .into_iter()
            .map(HiddenMeasurementRep::new)
            .collect();
        let order = ["e1", "e2", "e0"];
        let lambda = LambdaVector::new(lambda).unwrap();
        let a = combined_hidden_measurement(&psi, &order, &reps, &lambda).unwrap();
        let b = combined_hidden_measurement(&psi, &order, &reps, &lambda).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn fixed_entity_order_reindexing_is_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let f = Factorization::new(vec![2, 2], vec!["x", "y"]).unwrap();
    let psi = random_state(f, &mut rng);
    let bases = vec![
        MeasurementBasis::fourier("y", 2),
        MeasurementBasis::computational("x", 2),
    ];
    let forward = cascade_distribution(&psi, &["x", "y"], &bases).unwrap();
    let backward = cascade_distribution(&psi, &["y", "x"], &bases).unwrap();
    let report = compare_distributions(&forward, &backward, 1e-12).unwrap();
    assert!(report.passed(), "{report:?}");
}
