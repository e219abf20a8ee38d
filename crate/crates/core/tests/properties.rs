use ness_core::linalg::{identity, max_abs, max_abs_diff, min_eigenvalue, trace, vec_col};
use ness_core::model::{tfim_chain, xxz_boundary_driven, xxz_dephasing, xxz_hamiltonian};
use ness_core::oracle::{build_liouvillian, lindblad_action, true_residual};
use ness_core::pauli::{ops, Pauli, PauliString};
use ness_core::symmetry::{twirl_all, vandermonde_extract, TRACE_FLOOR};
use ness_core::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

fn random_matrix(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(d, d, |_, _| gaussian(rng))
}

fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    let a = random_matrix(d, rng);
    (&a + a.adjoint()).scale(0.5)
}

fn random_string(n: usize, rng: &mut ChaCha8Rng) -> PauliString {
    let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    PauliString::new((0..n).map(|_| letters[rng.random_range(0..4)]).collect())
}

fn random_model(n: usize, rng: &mut ChaCha8Rng) -> OpenSystemModel {
    let h: Vec<_> = (0..rng.random_range(1..6))
        .map(|_| (Complex64::new(StandardNormal.sample(rng), 0.0), random_string(n, rng)))
        .collect();
    let dissipators = (0..rng.random_range(0..3))
        .map(|_| {
            let terms: Vec<_> = (0..rng.random_range(1..4)).map(|_| (gaussian(rng), random_string(n, rng))).collect();
            Dissipator {
                rate: rng.random_range(0.1..2.0),
                jump: PauliSum::from_terms(n, terms).unwrap(),
            }
        })
        .collect();
    OpenSystemModel {
        n_qubits: n,
        hamiltonian: PauliSum::from_terms(n, h).unwrap(),
        dissipators,
        label: "random".into(),
        symmetries: Vec::new(),
    }
}

fn random_ansatz(n: usize, rng: &mut ChaCha8Rng) -> AnsatzSet {
    let size = rng.random_range(1..6);
    AnsatzSet::from_states((0..size).map(|_| StateVector::random(n, rng.random())).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn galerkin_trace_and_expectation_identities(n in 1usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(n, &mut rng);
        let ansatz = random_ansatz(n, &mut rng);
        let beta = random_hermitian(ansatz.len(), &mut rng);
        let overlaps = assemble(&model, &ansatz).unwrap();
        let chi = ansatz.state_matrix();
        let rho = &chi * &beta * chi.adjoint();
        let projected = chi.adjoint() * lindblad_action(&model, &rho).unwrap() * &chi;
        prop_assert!(max_abs_diff(&overlaps.galerkin(&beta), &projected) <= 1e-10);
        prop_assert!((trace(&rho).re - overlaps.trace_of(&beta)).abs() <= 1e-12 * rho.norm().max(1.0));
        let op = PauliSum::from_terms(n, vec![(gaussian(&mut rng), random_string(n, &mut rng))]).unwrap();
        let dense = trace(&(&rho * op.to_dense().unwrap()));
        let via_beta = observable_matrix("O", &op, &ansatz).unwrap().expectation(&beta);
        prop_assert!((dense - via_beta).norm() <= 1e-12 * dense.norm().max(1.0));
    }

    #[test]
    fn liouvillian_preserves_hermiticity_and_trace(n in 1usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(n, &mut rng);
        let rho = random_matrix(1 << n, &mut rng);
        let a = lindblad_action(&model, &rho).unwrap().adjoint();
        let b = lindblad_action(&model, &rho.adjoint()).unwrap();
        prop_assert!(max_abs_diff(&a, &b) <= 1e-10 * a.norm().max(1.0));
        let l = build_liouvillian(&model).unwrap();
        let row = vec_col(&identity(1 << n)).adjoint() * &l.matrix;
        prop_assert!(row.iter().all(|z| z.norm() <= 1e-10));
    }

    #[test]
    fn builders_are_pure_and_valid(n in 2usize..=5, g in 0.0f64..3.0, delta in -2.0f64..2.0, mu in 0.0f64..=1.0) {
        let models = [
            (tfim_chain(n, g, 1.0).unwrap(), tfim_chain(n, g, 1.0).unwrap()),
            (xxz_dephasing(n, delta, g).unwrap(), xxz_dephasing(n, delta, g).unwrap()),
            (xxz_boundary_driven(n, delta, 1.0, mu).unwrap(), xxz_boundary_driven(n, delta, 1.0, mu).unwrap()),
        ];
        for (a, b) in &models {
            prop_assert_eq!(&a.hamiltonian, &b.hamiltonian);
            prop_assert_eq!(a.dissipators.len(), b.dissipators.len());
            for (x, y) in a.dissipators.iter().zip(&b.dissipators) {
                prop_assert_eq!(&x.jump, &y.jump);
                prop_assert_eq!(x.rate, y.rate);
            }
            prop_assert!(a.validate().is_empty());
        }
        prop_assert_eq!(xxz_hamiltonian(n, delta), xxz_hamiltonian(n, delta));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn constrained_solutions_are_valid(m in -2.9f64..2.9) {
        let model = xxz_dephasing(3, 1.0, 1.0).unwrap();
        let ansatz = moment_states(&model.hamiltonian, &SeedDescriptor::Random { rng_seed: 1 }, 3).unwrap();
        let constraint = symmetry::sector_constraint(&ops::magnetization(3), m, &ansatz).unwrap();
        let problem = FeasibilityProblem::new(assemble(&model, &ansatz).unwrap()).with_constraint(constraint.clone());
        let beta = solve_feasibility(&problem).unwrap();
        let d = &beta.diagnostics;
        prop_assert!(d.hermitian_error == 0.0);
        prop_assert!(d.psd_violation >= -problem.options.psd_tol);
        prop_assert!(d.trace_error <= problem.options.feas_tol);
        prop_assert!(d.subspace_residual <= problem.options.feas_tol);
        prop_assert!((constraint.observable.expectation(&beta.beta).re - m).abs() <= problem.options.feas_tol);
        prop_assert_eq!(solve_feasibility(&problem).unwrap(), beta);
    }

    #[test]
    fn twirl_and_extraction_invariants(seed in any::<u64>()) {
        let model = xxz_dephasing(3, 0.8, 1.0).unwrap();
        let spec = SymmetrySpec::magnetization("M", &ops::magnetization(3)).unwrap();
        let ansatz = moment_states(&model.hamiltonian, &SeedDescriptor::Random { rng_seed: 1 }, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(8, &mut rng);
        let rho = &a * a.adjoint();
        let rho = rho.unscale(trace(&rho).re);
        let phys = twirl_all(&RhoCombination::new(rho), &spec).unwrap();
        let rotated = &spec.unitary * &phys.dense * spec.unitary.adjoint();
        prop_assert!((&phys.dense - rotated).norm() <= 1e-9);
        prop_assert!(max_abs_diff(&phys.realize(&spec), &phys.dense) <= 1e-10);
        let comps = vandermonde_extract(&phys, &spec, TRACE_FLOOR).unwrap();
        let mut remixed = CMat::zeros(8, 8);
        for c in &comps {
            remixed += &c.combination.dense;
        }
        prop_assert!(max_abs_diff(&remixed, &phys.dense) <= 1e-10);

        let options = ExtractionOptions::default();
        let report = extract_all_ness(&model, &spec, &ansatz, &options).unwrap();
        for s in &report.states {
            prop_assert!((trace(&s.state).re - 1.0).abs() <= 1e-10);
            prop_assert!(min_eigenvalue(&s.state) >= -1e-9);
            prop_assert!(true_residual(&s.state, &model).unwrap() <= 1e-7);
        }
    }
}

fn pad(beta: &CMat, size: usize) -> CMat {
    let mut out = CMat::zeros(size, size);
    out.view_mut((0, 0), beta.shape()).copy_from(beta);
    out
}

#[test]
fn padded_solution_keeps_its_residual_block() {
    let model = tfim_chain(2, 0.5, 1.0).unwrap();
    let seed = SeedDescriptor::Bitstring { bits: "00".into() };
    let small = moment_states(&model.hamiltonian, &seed, 1).unwrap();
    let big = moment_states(&model.hamiltonian, &seed, 2).unwrap();
    assert_eq!(&big.states()[..small.len()], small.states());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let beta = random_hermitian(small.len(), &mut rng);
    let g_small = assemble(&model, &small).unwrap().galerkin(&beta);
    let g_big = assemble(&model, &big).unwrap().galerkin(&pad(&beta, big.len()));
    let block = g_big.view((0, 0), g_small.shape()).into_owned();
    assert!(max_abs_diff(&block, &g_small) <= 1e-12);
}

#[test]
fn feasibility_does_not_extend_to_larger_ansatz() {
    // {|11⟩} is Galerkin-feasible for any field, but is not the steady state
    let model = tfim_chain(2, 0.5, 1.0).unwrap();
    let seed = SeedDescriptor::Bitstring { bits: "11".into() };
    let small = moment_states(&model.hamiltonian, &seed, 0).unwrap();
    let beta = solve_feasibility(&FeasibilityProblem::new(assemble(&model, &small).unwrap())).unwrap();
    let big = moment_states(&model.hamiltonian, &seed, 2).unwrap();
    let residual = assemble(&model, &big).unwrap().galerkin(&pad(&beta.beta, big.len()));
    assert!(max_abs(&residual) > 1e-3);
    let full = solve_feasibility(&FeasibilityProblem::new(assemble(&model, &big).unwrap())).unwrap();
    assert!(true_residual(&big.density(&full.beta).unwrap(), &model).unwrap() <= 1e-8);
}

#[test]
fn saturated_krylov_space_stops_growing() {
    let model = tfim_chain(2, 1.0, 1.0).unwrap();
    let seed = SeedDescriptor::Random { rng_seed: 5 };
    let sizes: Vec<usize> = (0..8).map(|k| moment_states(&model.hamiltonian, &seed, k).unwrap().len()).collect();
    let last = sizes[sizes.len() - 1];
    assert_eq!(sizes[sizes.len() - 2], last);
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
}
