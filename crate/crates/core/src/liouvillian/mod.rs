//! The Lindblad generator
//!
//! `ℒ[ρ] = −i[H, ρ] + Σ_μ (L_μ ρ L_μ† − ½{L_μ†L_μ, ρ})`
//!
//! as a dense superoperator, together with its spectrum, decay-free mode
//! classification, steady states, first-order degenerate perturbation
//! theory on the zero-eigenvalue subspace, and exact time evolution.

mod evolve;
mod perturb;
mod spectrum;
mod steady;

pub use evolve::{evolve, evolve_superoperator, validate_density_operator, Trajectory};
pub use perturb::{perturbative_coefficients, perturbed_steady_state, PerturbativeSteadyState};
pub use spectrum::{
    classify_decay_free, full_spectrum, full_spectrum_with, write_spectrum_csv, ModeClass, ModeClassification, OscillatingMode,
    SpectralDecomposition, SpectrumOptions, ZeroSpace,
};
pub use steady::{bordered_solve, steady_state, steady_state_with_tol, SteadyState};

use crate::error::{Error, Result};
use crate::operators::{Operator, SpinSpec, Superoperator};
use crate::C64;

/// Hermiticity tolerance applied to Hamiltonians.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A Hamiltonian and jump operators over a spin lattice.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    spec: SpinSpec,
    hamiltonian: Operator,
    jumps: Vec<Operator>,
}

impl LindbladModel {
    pub fn new(spec: SpinSpec, hamiltonian: Operator, jumps: Vec<Operator>) -> Result<Self> {
        let d = spec.dim();
        hamiltonian.check_dim(d)?;
        for l in &jumps {
            l.check_dim(d)?;
        }
        let scale = hamiltonian.frobenius_norm().max(1.0);
        let defect = hamiltonian.hermiticity_defect();
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(defect));
        }
        Ok(LindbladModel { spec, hamiltonian, jumps })
    }

    pub fn spec(&self) -> &SpinSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Operator] {
        &self.jumps
    }

    /// Matrix-form action of the generator, used as an oracle for the
    /// vectorized superoperator.
    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        rho.check_dim(self.dim())?;
        let mut out = self.hamiltonian.commutator(rho).scale(C64::new(0.0, -1.0));
        for l in &self.jumps {
            let ld = l.adjoint();
            let ldl = &ld * l;
            out = &out + &(&(l * rho) * &ld);
            out = &out - &ldl.anticommutator(rho).scale_real(0.5);
        }
        Ok(out)
    }
}

/// Superoperator of the Lindblad generator.
///
/// With column stacking, `A ρ B ↦ (Bᵀ ⊗ A)`, so
/// `ℒ = −i(𝟙⊗H − Hᵀ⊗𝟙) + Σ_μ [L̄_μ⊗L_μ − ½ 𝟙⊗L_μ†L_μ − ½ (L_μ†L_μ)ᵀ⊗𝟙]`.
pub fn build_superoperator(model: &LindbladModel) -> Result<Superoperator> {
    let d = model.dim();
    let id = Operator::identity(d);
    let minus_i = C64::new(0.0, -1.0);
    let h = model.hamiltonian.scale(minus_i);
    let mut total = &Superoperator::sandwich(&h, &id) - &Superoperator::sandwich(&id, &h);
    for l in &model.jumps {
        let ld = l.adjoint();
        let ldl = (&ld * l).scale_real(0.5);
        total = &total + &Superoperator::sandwich(l, &ld);
        total = &total - &Superoperator::sandwich(&ldl, &id);
        total = &total - &Superoperator::sandwich(&id, &ldl);
    }
    Ok(total)
}

/// `‖ℒ[ρ] − λρ‖_F / max(‖ρ‖_F, ε)`.
pub fn residual(l: &Superoperator, rho: &Operator, lambda: C64) -> Result<f64> {
    let image = l.apply(rho)?;
    let diff = &image - &rho.scale(lambda);
    Ok(diff.frobenius_norm() / rho.frobenius_norm().max(f64::EPSILON))
}

/// `ℒ₀ + η ℒ₁`.
pub fn perturbed(l0: &Superoperator, l1: &Superoperator, eta: f64) -> Result<Superoperator> {
    l0.add_scaled(l1, eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{spin_operators, Spin};

    #[test]
    fn single_spin_decay_spectrum() {
        let spec = SpinSpec::uniform(Spin::HALF, 1).unwrap();
        let sm = spin_operators(Spin::HALF).sminus;
        let model = LindbladModel::new(spec, Operator::zeros(2), vec![sm]).unwrap();
        let l = build_superoperator(&model).unwrap();
        let mut ev: Vec<f64> = l.mat().eigenvalues().unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let expect = [0.0, -0.5, -0.5, -1.0];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
        let down = Operator::unit(2, 1, 1);
        assert!(residual(&l, &down, C64::new(0.0, 0.0)).unwrap() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian_hamiltonian() {
        let spec = SpinSpec::uniform(Spin::HALF, 1).unwrap();
        let h = spin_operators(Spin::HALF).splus;
        assert!(matches!(LindbladModel::new(spec, h, vec![]), Err(Error::NotHermitian(_))));
    }
}
