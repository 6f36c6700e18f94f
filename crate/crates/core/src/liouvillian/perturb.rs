use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::operators::{devectorize, Superoperator};
use crate::C64;

use super::spectrum::ZeroSpace;
use super::steady::{finish_unique, SteadyState};

/// Relative singular-value cutoff for the null space of the effective
/// generator on the zero subspace.
pub const EFFECTIVE_NULL_TOL: f64 = 1e-10;

/// Leading-order steady state `Σ_α c_α ρ_α` selected by a perturbation.
#[derive(Clone, Debug)]
pub struct PerturbativeSteadyState {
    /// Coefficients in the right basis of the zero space, with
    /// `Σ_α c_α Tr ρ_α = 1`.
    pub coefficients: Vec<C64>,
    pub rho: crate::operators::Operator,
    /// Singular values of `W`, descending.
    pub singular_values: Vec<f64>,
}

/// Null vector of `W_αβ = ⟨σ_α, ℒ₁[ρ_β]⟩`, the perturbation projected on
/// the zero-eigenvalue subspace of `ℒ₀`.
pub fn perturbative_coefficients(zero: &ZeroSpace, l1: &Superoperator) -> Result<PerturbativeSteadyState> {
    let w = effective_generator(zero, l1)?;
    let (c, singular_values) = trace_normalized_null_vector(zero, &w)?;
    let rho = zero.combine(&c).hermitian_part();
    Ok(PerturbativeSteadyState { coefficients: c, rho, singular_values })
}

fn effective_generator(zero: &ZeroSpace, l1: &Superoperator) -> Result<CMat> {
    let n = l1.dim();
    if zero.right().nrows() != n {
        return Err(Error::DimensionMismatch { expected: zero.right().nrows(), found: n });
    }
    Ok(zero.left().adjoint() * (l1.mat() * zero.right()))
}

fn trace_normalized_null_vector(zero: &ZeroSpace, w: &CMat) -> Result<(Vec<C64>, Vec<f64>)> {
    let k = w.nrows();
    if k == 0 {
        return Err(Error::DegenerateEffectiveGenerator(0));
    }
    let svd = linalg::svd(w.as_ref())?;
    let nullity = linalg::count_small(&svd.s, EFFECTIVE_NULL_TOL);
    if nullity != 1 {
        return Err(Error::DegenerateEffectiveGenerator(nullity));
    }
    let c: Vec<C64> = (0..k).map(|a| svd.v[(a, k - 1)]).collect();
    let tr: C64 = zero.traces().iter().zip(&c).map(|(t, x)| t * x).sum();
    if tr.norm() < 1e-12 {
        return Err(Error::DegenerateEffectiveGenerator(1));
    }
    Ok((c.iter().map(|x| x / tr).collect(), svd.s))
}

/// Exact steady state of `ℒ₀ + ηℒ₁` obtained by eliminating the
/// complement `Q = 1 − P₀` of the zero space of `ℒ₀`:
///
/// `W(η) = Σ†ℒ₁R − η Σ†ℒ₁ (Qℒ(η)Q)⁻¹ Qℒ₁R`,  `x = Rc − η (Qℒ(η)Q)⁻¹ Qℒ₁R c`,
///
/// where `c` spans the null space of `W(η)`. Every solve involves only
/// the gapped part of `ℒ₀`, so the result stays accurate as `η → 0` where a
/// direct solve of `ℒ₀ + ηℒ₁` loses digits in proportion to `1/η`.
pub fn perturbed_steady_state(
    l0: &Superoperator,
    zero: &ZeroSpace,
    l1: &Superoperator,
    eta: f64,
) -> Result<SteadyState> {
    let n = l0.dim();
    if l1.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: l1.dim() });
    }
    let total = l0.add_scaled(l1, eta)?;
    let r = zero.right();
    let s = zero.left();
    let b = total.mat();

    let sb = s.adjoint() * b; // k × n
    let br = b * r; // n × k
    let sbr = s.adjoint() * &br; // k × k
    // A = QBQ + P, invertible and block diagonal over range(P) ⊕ range(Q).
    let correction = r * (&sbr + Mat::<C64>::identity(r.ncols(), r.ncols()));
    let a = Mat::from_fn(n, n, |i, j| {
        let mut x = b[(i, j)];
        for al in 0..r.ncols() {
            x -= r[(i, al)] * sb[(al, j)] + br[(i, al)] * s[(j, al)].conj();
            x += correction[(i, al)] * s[(j, al)].conj();
        }
        x
    });
    let l1r = l1.mat() * r;
    let q_l1r = &l1r - r * (s.adjoint() * &l1r);
    let y = linalg::solve(a.as_ref(), q_l1r.as_ref());
    let l1y = l1.mat() * &y;
    let w = s.adjoint() * &l1r - linalg::scaled((s.adjoint() * &l1y).as_ref(), C64::new(eta, 0.0));
    let svd = linalg::svd(w.as_ref())?;
    let k = w.nrows();
    let nullity = linalg::count_small(&svd.s, EFFECTIVE_NULL_TOL);
    let states = (k - nullity..k)
        .map(|col| {
            let c = Mat::from_fn(k, 1, |a, _| svd.v[(a, col)]);
            let x = r * &c - linalg::scaled((&y * &c).as_ref(), C64::new(eta, 0.0));
            let v: Vec<C64> = (0..n).map(|i| x[(i, 0)]).collect();
            devectorize(&v)
        })
        .collect::<Result<Vec<_>>>()?;
    match nullity {
        0 => Err(Error::DegenerateEffectiveGenerator(0)),
        1 => finish_unique(&total, states.into_iter().next().unwrap()),
        _ => Ok(SteadyState::Degenerate { basis: states }),
    }
}
