mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synclab::operators::{Operator, Spin, SpinSpec};
use synclab::phasespace::{
    coherent_state, husimi_q, phase_distribution, reduce_over_global_phase, sync_measure, threshold_region,
    uniform_density, AngleTuple, ThresholdMode,
};
use synclab::C64;

use common::{coherent_product, husimi, phase_density_by_quadrature, random_density};

fn lattice() -> impl Strategy<Value = SpinSpec> {
    prop::collection::vec(1u32..=3, 2..=3)
        .prop_filter("keep dimension small", |t| t.iter().map(|x| x + 1).product::<u32>() <= 16)
        .prop_map(|t| SpinSpec::new(t.into_iter().map(|x| Spin::from_twice(x).unwrap()).collect()).unwrap())
}

fn angles(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..2.0 * PI, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coherent_state_and_husimi_match_closed_form(spec in lattice(), seed in any::<u64>(), t in angles(3), p in angles(3)) {
        let n = spec.n_sites();
        let thetas: Vec<f64> = t[..n].iter().map(|x| x / 2.0).collect();
        let phis = p[..n].to_vec();
        let a = AngleTuple::new(phis.clone(), thetas.clone()).unwrap();
        let got = coherent_state(&a, &spec).unwrap();
        let want = coherent_product(&spec, &thetas, &phis);
        let err: f64 = got.iter().zip(&want).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-13);
        let rho = random_density(spec.dim(), &mut ChaCha8Rng::seed_from_u64(seed));
        let q = husimi_q(&rho, &spec, &a).unwrap();
        prop_assert!((q - husimi(&rho, &spec, &thetas, &phis)).abs() < 1e-13);
        prop_assert!(q >= -1e-14);
    }

    #[test]
    fn phase_polynomial_matches_quadrature(spec in lattice(), seed in any::<u64>(), p in angles(3)) {
        let rho = random_density(spec.dim(), &mut ChaCha8Rng::seed_from_u64(seed));
        let s = phase_distribution(&rho, &spec).unwrap();
        let phis = &p[..spec.n_sites()];
        let nodes = if spec.n_sites() == 3 { 12 } else { 24 };
        let oracle = phase_density_by_quadrature(&rho, &spec, phis, nodes);
        prop_assert!((s.value(phis).unwrap() - oracle).abs() < 1e-10);
        prop_assert!((s.integral() - 1.0).abs() < 1e-12);
        prop_assert!(s.reality_defect() < 1e-14);
    }

    #[test]
    fn reduction_integrates_out_last_angle(spec in lattice(), seed in any::<u64>(), p in angles(3), shift in 0.0..2.0 * PI) {
        let rho = random_density(spec.dim(), &mut ChaCha8Rng::seed_from_u64(seed));
        let s = phase_distribution(&rho, &spec).unwrap();
        let n = spec.n_sites();
        let diffs = &p[..n - 1];
        let sd = reduce_over_global_phase(&s).unwrap();
        // trapezoid over φ_N, exact for the band-limited integrand
        let m = 64;
        let h = 2.0 * PI / m as f64;
        let direct: f64 = (0..m)
            .map(|i| {
                let last = i as f64 * h;
                let mut phis: Vec<f64> = diffs.iter().map(|d| d + last).collect();
                phis.push(last);
                h * s.value(&phis).unwrap()
            })
            .sum();
        prop_assert!((sd.value(diffs) - direct).abs() < 1e-12);
        prop_assert!((sd.integral() - 1.0).abs() < 1e-12);
        prop_assert!((sd.uniform_level() - uniform_density(n - 1)).abs() < 1e-15);

        // Dephased in total magnetization, S depends on differences only.
        let total = |k: usize| spec.twice_magnetizations(k).iter().sum::<i32>();
        let dephased = Operator::from_fn(spec.dim(), |r, c| if total(r) == total(c) { rho.get(r, c) } else { C64::new(0.0, 0.0) });
        let s = phase_distribution(&dephased, &spec).unwrap();
        let phis = &p[..n];
        let shifted: Vec<f64> = phis.iter().map(|x| x + shift).collect();
        prop_assert!((s.value(phis).unwrap() - s.value(&shifted).unwrap()).abs() < 1e-13);
        let rel: Vec<f64> = phis[..n - 1].iter().map(|x| x - phis[n - 1]).collect();
        let sd = reduce_over_global_phase(&s).unwrap();
        prop_assert!((sd.value(&rel) - 2.0 * PI * s.value(phis).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn sync_measure_bounds_grid_values(spec in lattice(), seed in any::<u64>()) {
        let rho = random_density(spec.dim(), &mut ChaCha8Rng::seed_from_u64(seed));
        let sd = reduce_over_global_phase(&phase_distribution(&rho, &spec).unwrap()).unwrap();
        let m = sync_measure(&sd, 32).unwrap();
        let grid_max = sd.grid_values(32).into_iter().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(m.max_value >= grid_max - 1e-15);
        prop_assert!((m.s_max - (m.max_value - sd.uniform_level())).abs() < 1e-15);
        for x in &m.argmax {
            prop_assert!((sd.value(x) - m.max_value).abs() < 1e-9 * m.max_value);
        }
        let r = threshold_region(&sd, 32, 0.9, ThresholdMode::Calibrated).unwrap();
        prop_assert!(!r.cells.is_empty());
    }
}

#[test]
fn unitary_phase_rotation_shifts_distribution() {
    let spec = SpinSpec::new(vec![Spin::ONE, Spin::HALF]).unwrap();
    let rho = random_density(6, &mut ChaCha8Rng::seed_from_u64(1));
    let alpha = 0.7;
    // exp(−iα S_z) on the last site moves phase mass by −α along φ'.
    let u = Operator::diagonal(
        &(0..6).map(|k| C64::from_polar(1.0, -alpha * spec.twice_magnetizations(k)[1] as f64 / 2.0)).collect::<Vec<_>>(),
    );
    let rotated = &(&u * &rho) * &u.adjoint();
    let a = reduce_over_global_phase(&phase_distribution(&rho, &spec).unwrap()).unwrap();
    let b = reduce_over_global_phase(&phase_distribution(&rotated, &spec).unwrap()).unwrap();
    // Q'(φ) = Q(φ₁, φ₂ − α)
    for x in [0.0, 1.0, 2.5, 4.0] {
        assert!((a.value(&[x + alpha]) - b.value(&[x])).abs() < 1e-13);
    }
}
