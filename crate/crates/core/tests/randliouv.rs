mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synclab::liouvillian::{build_superoperator, LindbladModel};
use synclab::operators::{Spin, SpinSpec};
use synclab::randliouv::{
    derive_seed, jump_operators, superoperator_checksum, RandomLiouvillian, TraceOrthonormalBasis,
};

use common::{lindblad_rhs, random_matrix};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn basis_is_trace_orthonormal(d in 2usize..7) {
        let b = TraceOrthonormalBasis::new(d).unwrap();
        prop_assert_eq!(b.len(), d * d - 1);
        prop_assert!(b.orthonormality_defect() < 1e-14);
        for f in b.members() {
            prop_assert!(f.trace().norm() < 1e-14);
        }
    }

    #[test]
    fn generator_is_rebuilt_from_jump_operators(d in 2usize..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = RandomLiouvillian::sample(d, &mut rng).unwrap();
        let basis = TraceOrthonormalBasis::new(d).unwrap();
        let jumps = jump_operators(&draw.kossakowski, &basis).unwrap();
        let spec = SpinSpec::uniform(Spin::new((d as f64 - 1.0) / 2.0).unwrap(), 1).unwrap();
        let model = LindbladModel::new(spec, draw.hamiltonian.clone(), jumps.clone()).unwrap();
        let rebuilt = build_superoperator(&model).unwrap();
        let diff = rebuilt.add_scaled(&draw.generator, -1.0).unwrap().frobenius_norm();
        prop_assert!(diff < 1e-10 * draw.generator.frobenius_norm());

        let x = random_matrix(d, &mut rng);
        let want = lindblad_rhs(&draw.hamiltonian, &jumps, &x);
        prop_assert!((&draw.generator.apply(&x).unwrap() - &want).frobenius_norm() < 1e-10 * want.frobenius_norm().max(1.0));
        prop_assert!(draw.generator.trace_preservation_defect() < 1e-12);
    }

    #[test]
    fn draws_are_deterministic(seed in any::<u64>()) {
        let a = RandomLiouvillian::sample(3, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = RandomLiouvillian::sample(3, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(superoperator_checksum(&a.generator), superoperator_checksum(&b.generator));
        prop_assert_ne!(derive_seed(seed, 0), derive_seed(seed, 1));
    }
}
