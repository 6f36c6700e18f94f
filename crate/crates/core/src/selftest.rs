//! Fast invariant checks of the whole stack, runnable from the command
//! line.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::liouvillian::{build_superoperator, steady_state, LindbladModel};
use crate::models::{spin1_chain, spin_half_pair, Spin1ChainParams, SpinHalfPairParams};
use crate::operators::{spin_operators, Operator, Spin, SpinSpec};
use crate::phasespace::{phase_distribution, reduce_over_global_phase, sync_measure, theta_moments, wigner_d_top};
use crate::randliouv::RandomLiouvillian;
use crate::syncstats::uniformity_oracle;
use crate::C64;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

fn random_density(d: usize, rng: &mut ChaCha8Rng) -> Operator {
    let a = Operator::from_fn(d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let rho = &a * &a.adjoint();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

/// Every check, in a fixed order.
pub fn run() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut out = Vec::new();

    out.push(check("spin_algebra", || {
        let mut worst: f64 = 0.0;
        for twice in 1..=4 {
            let ops = spin_operators(Spin::from_twice(twice)?);
            let lhs = ops.sx.commutator(&ops.sy);
            worst = worst.max((&lhs - &ops.sz.scale(C64::new(0.0, 1.0))).frobenius_norm());
        }
        Ok((worst < 1e-13, format!("max ‖[Sx,Sy] − iSz‖ = {worst:.2e}")))
    }));

    out.push(check("superoperator_matches_matrix_form", || {
        let spec = SpinSpec::uniform(Spin::HALF, 2)?;
        let h = random_density(4, &mut rng);
        let jumps = vec![random_density(4, &mut rng), Operator::from_fn(4, |i, j| C64::new((i * j) as f64, 1.0))];
        let model = LindbladModel::new(spec, h, jumps)?;
        let l = build_superoperator(&model)?;
        let rho = random_density(4, &mut rng);
        let err = (&l.apply(&rho)? - &model.apply(&rho)?).frobenius_norm();
        Ok((err < 1e-12, format!("difference {err:.2e}")))
    }));

    out.push(check("random_perturbation_trace_preserving", || {
        let draw = RandomLiouvillian::sample(4, &mut rng)?;
        let defect = draw.generator.trace_preservation_defect();
        Ok((defect < 1e-12, format!("defect {defect:.2e}")))
    }));

    out.push(check("theta_kernel_quadrature", || {
        let mut worst: f64 = 0.0;
        for twice in 1..=3 {
            let spin = Spin::from_twice(twice)?;
            let k = theta_moments(spin);
            let steps = 4000;
            for i in 0..spin.dim() {
                for j in 0..spin.dim() {
                    // Simpson on [0, π]
                    let f = |t: f64| t.sin() * wigner_d_top(spin, i, t) * wigner_d_top(spin, j, t);
                    let h = PI / steps as f64;
                    let mut s = f(0.0) + f(PI);
                    for n in 1..steps {
                        s += f(n as f64 * h) * if n % 2 == 1 { 4.0 } else { 2.0 };
                    }
                    worst = worst.max((s * h / 3.0 - k.get(i, j)).abs());
                }
            }
        }
        Ok((worst < 1e-10, format!("max deviation {worst:.2e}")))
    }));

    out.push(check("phase_distribution_normalized", || {
        let spec = SpinSpec::new(vec![Spin::ONE, Spin::HALF])?;
        let rho = random_density(spec.dim(), &mut rng);
        let s = phase_distribution(&rho, &spec)?;
        let sd = reduce_over_global_phase(&s)?;
        let err = (s.integral() - 1.0).abs().max((sd.integral() - 1.0).abs());
        Ok((err < 1e-12 && s.reality_defect() < 1e-14, format!("integral error {err:.2e}")))
    }));

    out.push(check("diagonal_state_not_synchronized", || {
        let spec = SpinSpec::uniform(Spin::ONE, 3)?;
        let w: Vec<f64> = (0..27).map(|_| rng.random::<f64>()).collect();
        let total: f64 = w.iter().sum();
        let rho = Operator::real_diagonal(&w.iter().map(|x| x / total).collect::<Vec<_>>());
        let m = sync_measure(&reduce_over_global_phase(&phase_distribution(&rho, &spec)?)?, 64)?;
        Ok((m.s_max.abs() < 1e-12, format!("S_max = {:.2e}", m.s_max)))
    }));

    out.push(check("chi_uniform_for_random_angles", || {
        let r = uniformity_oracle(20_000, &mut rng);
        Ok((r.ks_chi < 0.02 && r.ks_l < 0.02, format!("KS χ {:.4}, KS l {:.4}", r.ks_chi, r.ks_l)))
    }));

    out.push(check("spin1_chain_steady_multiplicity", || {
        let l = build_superoperator(&spin1_chain(&Spin1ChainParams::default())?)?;
        let k = steady_state(&l)?.multiplicity();
        Ok((k == 8, format!("multiplicity {k}")))
    }));

    out.push(check("spin_half_pair_perturbed_unique", || {
        let pair = spin_half_pair(&SpinHalfPairParams::default())?;
        let l0 = build_superoperator(&pair.model)?;
        let l1 = RandomLiouvillian::sample(4, &mut rng)?.generator;
        let k0 = steady_state(&l0)?.multiplicity();
        let k1 = steady_state(&l0.add_scaled(&l1, 1e-2)?)?.multiplicity();
        Ok((k0 == 2 && k1 == 1, format!("unperturbed {k0}, perturbed {k1}")))
    }));

    out
}
