use super::*;
use crate::linalg::{kron, max_abs, max_abs_diff, min_eigenvalue};
use crate::model::{tfim_chain, xxz_boundary_driven, xxz_dephasing, Dissipator};
use crate::pauli::{ops, Pauli};

fn random_matrix(d: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMat::from_fn(d, d, |_, _| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
}

fn random_density(d: usize, seed: u64) -> CMat {
    let a = random_matrix(d, seed);
    let p = &a * a.adjoint();
    p.unscale(trace(&p).re)
}

fn single_qubit(jump: PauliSum) -> OpenSystemModel {
    OpenSystemModel {
        n_qubits: 1,
        hamiltonian: PauliSum::zero(1),
        dissipators: vec![Dissipator { rate: 1.0, jump }],
        label: "single".into(),
        symmetries: Vec::new(),
    }
}

#[test]
fn column_stacking_identity() {
    let (b, rho, c) = (random_matrix(3, 1), random_matrix(3, 2), random_matrix(3, 3));
    let lhs = vec_col(&(&b * &rho * &c));
    let rhs = kron(&c.transpose(), &b) * vec_col(&rho);
    assert!((lhs - rhs).norm() < 1e-12);
}

#[test]
fn superoperator_matches_direct_action() {
    let model = tfim_chain(3, 0.8, 0.6).unwrap();
    let l = build_liouvillian(&model).unwrap();
    for seed in 0..3 {
        let rho = random_matrix(8, seed);
        let direct = lindblad_action(&model, &rho).unwrap();
        assert!(max_abs_diff(&l.apply(&rho), &direct) < 1e-10);
        let sparse = sparse_lindblad_action(&model, &rho).unwrap();
        assert!(max_abs_diff(&sparse, &direct) < 1e-10);
    }
}

#[test]
fn trace_annihilation_and_hermiticity_preservation() {
    let model = xxz_boundary_driven(3, 0.7, 1.0, 0.3).unwrap();
    let l = build_liouvillian(&model).unwrap();
    let row = vec_col(&identity(8)).adjoint() * &l.matrix;
    assert!(row.iter().all(|z| z.norm() < 1e-10));
    let rho = random_matrix(8, 9);
    let a = lindblad_action(&model, &rho).unwrap().adjoint();
    let b = lindblad_action(&model, &rho.adjoint()).unwrap();
    assert!(max_abs_diff(&a, &b) < 1e-10);
    assert!(trace(&lindblad_action(&model, &rho).unwrap()).norm() < 1e-10);
}

#[test]
fn dephasing_qubit_has_two_steady_states() {
    let model = single_qubit(ops::single(1, 0, Pauli::Z));
    let basis = steady_states(&model, NULL_TOL).unwrap();
    assert_eq!(basis.dimension(), 2);
    assert_eq!(basis.physical_count(), 2);
}

#[test]
fn amplitude_damping_fixed_point() {
    let model = single_qubit(ops::lowering(1, 0));
    let rho = exact_ness(&model).unwrap();
    // σ₋ pumps |0⟩ into |1⟩
    assert!((rho[(1, 1)].re - 1.0).abs() < 1e-10);
    assert!(max_abs(&lindblad_action(&model, &rho).unwrap()) < 1e-12);
    let mixed = identity(2).unscale(2.0);
    assert!(true_residual(&mixed, &model).unwrap() > 0.1);
}

#[test]
fn two_qubit_tfim_is_unique() {
    for g in [0.0, 0.5, 1.0, 2.5] {
        let model = tfim_chain(2, g, 1.0).unwrap();
        let basis = steady_states(&model, NULL_TOL).unwrap();
        assert_eq!(basis.dimension(), 1, "g = {g}");
        let rho = exact_ness(&model).unwrap();
        assert!(true_residual(&rho, &model).unwrap() <= 1e-10);
        assert!(min_eigenvalue(&rho) > -1e-12);
    }
}

#[test]
fn tfim_without_field_relaxes_to_all_ones() {
    let model = tfim_chain(3, 0.0, 1.0).unwrap();
    let rho = exact_ness(&model).unwrap();
    assert!((rho[(7, 7)].re - 1.0).abs() < 1e-10);
}

#[test]
fn dephasing_xxz_sectors() {
    let model = xxz_dephasing(3, 1.0, 1.0).unwrap();
    let basis = steady_states(&model, NULL_TOL).unwrap();
    assert_eq!(basis.dimension(), 4);
    assert!(basis.physical_count() >= 4);
    for rho in basis.physical_states() {
        assert!((trace(rho).re - 1.0).abs() < 1e-10);
        assert!(min_eigenvalue(rho) > -1e-9);
        assert!(true_residual(rho, &model).unwrap() < 1e-9);
    }
    assert!(matches!(exact_ness(&model), Err(Error::DegenerateSteadySpace(4))));
}

#[test]
fn boundary_driven_has_multiple_physical_states() {
    let model = xxz_boundary_driven(4, 1.0, 1.0, 0.5).unwrap();
    let basis = steady_states(&model, NULL_TOL).unwrap();
    assert_eq!(basis.dimension(), 10);
    assert!(basis.physical_count() >= 2);
    for (rho, &phys) in basis.elements.iter().zip(&basis.physical) {
        assert!(lindblad_action(&model, rho).unwrap().norm() <= 1e-9 * rho.norm());
        if phys {
            assert!(min_eigenvalue(rho) > -1e-9);
        }
    }
}

#[test]
fn fidelity_values() {
    let rho = random_density(4, 5);
    assert!((fidelity(&rho, &rho) - 1.0).abs() < 1e-10);
    let mut a = CMat::zeros(2, 2);
    a[(0, 0)] = ONE;
    let mut b = CMat::zeros(2, 2);
    b[(1, 1)] = ONE;
    assert!(fidelity(&a, &b) < 1e-15);
    let mixed = identity(4).unscale(4.0);
    let (values, _) = eigh(&rho);
    let expected: f64 = values.iter().map(|&l| (l / 4.0).sqrt()).sum::<f64>().powi(2);
    assert!((fidelity(&rho, &mixed) - expected).abs() < 1e-10);
}

#[test]
fn sparse_agrees_with_dense() {
    for (n, g) in [(2, 1.0), (4, 0.5)] {
        let model = tfim_chain(n, g, 1.0).unwrap();
        let dense = exact_ness(&model).unwrap();
        let sparse = sparse_steady_state(&model, &SparseOptions::default()).unwrap();
        assert!(fidelity(&dense, &sparse) >= 1.0 - 1e-8);
    }
    assert!(sparse_steady_state(&tfim_chain(11, 1.0, 1.0).unwrap(), &SparseOptions::default()).is_err());
}

#[test]
fn top_eigenvector_of_pure_state() {
    let model = tfim_chain(2, 0.0, 1.0).unwrap();
    let rho = exact_ness(&model).unwrap();
    let (lambda, v) = top_eigenvector(&rho, 2).unwrap();
    assert!((lambda - 1.0).abs() < 1e-10);
    assert!((v.amplitudes()[3] - ONE).norm() < 1e-10);
}

#[test]
fn dense_limit() {
    let model = tfim_chain(7, 1.0, 1.0).unwrap();
    assert!(matches!(build_liouvillian(&model), Err(Error::SizeLimit { .. })));
}
