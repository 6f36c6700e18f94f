mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synclab::liouvillian::{
    bordered_solve, build_superoperator, evolve, full_spectrum, steady_state, validate_density_operator, LindbladModel,
    SteadyState,
};
use synclab::models::{spin1_chain, spin_half_pair, Spin1ChainParams, SpinHalfPairParams};
use synclab::operators::{Operator, Spin, SpinSpec};

use common::{lindblad_rhs, random_density, random_matrix};

fn random_model(seed: u64, jumps: usize) -> LindbladModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = SpinSpec::new(vec![Spin::ONE, Spin::HALF]).unwrap();
    let a = random_matrix(6, &mut rng);
    let h = (&a + &a.adjoint()).scale_real(0.5);
    let ls = (0..jumps).map(|_| random_matrix(6, &mut rng)).collect();
    LindbladModel::new(spec, h, ls).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn superoperator_matches_matrix_form(seed in any::<u64>(), jumps in 0usize..4) {
        let model = random_model(seed, jumps);
        let l = build_superoperator(&model).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let x = random_matrix(6, &mut rng);
        let want = lindblad_rhs(model.hamiltonian(), model.jumps(), &x);
        prop_assert!((&l.apply(&x).unwrap() - &want).frobenius_norm() < 1e-11 * want.frobenius_norm().max(1.0));
        prop_assert!(l.trace_preservation_defect() < 1e-12);
        // ℒ[X†] = ℒ[X]†
        let lhs = l.apply(&x.adjoint()).unwrap();
        prop_assert!((&lhs - &l.apply(&x).unwrap().adjoint()).frobenius_norm() < 1e-11);
    }

    #[test]
    fn generic_model_has_valid_unique_steady_state(seed in any::<u64>()) {
        let l = build_superoperator(&random_model(seed, 2)).unwrap();
        let st = steady_state(&l).unwrap();
        let SteadyState::Unique { rho, residual, .. } = st else {
            return Err(TestCaseError::fail("expected a unique steady state"));
        };
        prop_assert!(residual < 1e-10);
        prop_assert!(validate_density_operator(&rho, 1e-9).is_ok());
        let b = bordered_solve(&l).unwrap();
        prop_assert!((b.rho().unwrap() - &rho).frobenius_norm() < 1e-9);
    }

    #[test]
    fn spectrum_closes_under_conjugation(seed in any::<u64>()) {
        let l = build_superoperator(&random_model(seed, 2)).unwrap();
        let dec = full_spectrum(&l).unwrap();
        prop_assert_eq!(dec.len(), 36);
        prop_assert!(dec.conjugation_defect() < 1e-8 * dec.norm);
        prop_assert!(dec.max_real_part() < 1e-9 * dec.norm);
        prop_assert!(dec.max_residual() < 1e-9 * dec.norm);
    }

    #[test]
    fn evolution_preserves_trace_and_positivity(seed in any::<u64>()) {
        let model = random_model(seed, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let rho0 = random_density(6, &mut rng);
        let traj = evolve(&model, &rho0, &[0.0, 0.1, 1.0, 5.0]).unwrap();
        prop_assert!(traj.max_trace_drift() < 1e-11);
        for s in &traj.states {
            prop_assert!(validate_density_operator(s, 1e-9).is_ok());
        }
    }
}

#[test]
fn unperturbed_models_are_degenerate() {
    let chain = build_superoperator(&spin1_chain(&Spin1ChainParams::default()).unwrap()).unwrap();
    assert_eq!(steady_state(&chain).unwrap().multiplicity(), 8);
    let pair = build_superoperator(&spin_half_pair(&SpinHalfPairParams::default()).unwrap().model).unwrap();
    assert_eq!(steady_state(&pair).unwrap().multiplicity(), 2);
}

#[test]
fn rejects_non_hermitian_hamiltonian() {
    let spec = SpinSpec::uniform(Spin::HALF, 1).unwrap();
    let h = Operator::unit(2, 0, 1);
    assert!(LindbladModel::new(spec, h, vec![]).is_err());
}
