use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{devectorize, Operator, Superoperator};
use crate::C64;

use super::residual;

/// Tolerance on `‖vec(𝟙)ᵀ ℒ‖ / ‖ℒ‖_F` accepted by [`steady_state`].
pub const TRACE_PRESERVATION_TOL: f64 = 1e-10;

/// Steady state eigenvalues below this are logged.
pub const NEGATIVITY_WARN: f64 = -1e-8;

/// Outcome of a steady-state solve.
#[derive(Clone, Debug)]
pub enum SteadyState {
    Unique {
        rho: Operator,
        /// `‖ρ − ρ†‖_F` before hermitization.
        hermiticity_defect: f64,
        min_eigenvalue: f64,
        /// `‖ℒ[ρ]‖_F / ‖ρ‖_F` after hermitization.
        residual: f64,
    },
    /// Null space of dimension > 1; no single state is selected.
    Degenerate { basis: Vec<Operator> },
}

impl SteadyState {
    pub fn multiplicity(&self) -> usize {
        match self {
            SteadyState::Unique { .. } => 1,
            SteadyState::Degenerate { basis } => basis.len(),
        }
    }

    pub fn rho(&self) -> Option<&Operator> {
        match self {
            SteadyState::Unique { rho, .. } => Some(rho),
            SteadyState::Degenerate { .. } => None,
        }
    }

    pub fn into_rho(self) -> Option<Operator> {
        match self {
            SteadyState::Unique { rho, .. } => Some(rho),
            SteadyState::Degenerate { .. } => None,
        }
    }
}

/// Steady state of `ℒ`, with multiplicity the number of singular values
/// at or below `n · ε · σ_max`.
pub fn steady_state(l: &Superoperator) -> Result<SteadyState> {
    steady_state_with_tol(l, linalg::default_rank_tol(l.dim()))
}

pub fn steady_state_with_tol(l: &Superoperator, rel_tol: f64) -> Result<SteadyState> {
    let norm = l.frobenius_norm();
    let defect = l.trace_preservation_defect();
    if defect > TRACE_PRESERVATION_TOL * norm.max(1.0) {
        return Err(Error::NotTracePreserving(defect));
    }
    let s = linalg::singular_values(l.mat())?;
    let k = linalg::count_small(&s, rel_tol);
    if k > 1 {
        let ns = linalg::smallest_singular_subspace(l.mat(), k)?;
        let basis = (0..k)
            .map(|c| {
                let v: Vec<C64> = (0..l.dim()).map(|i| ns.right[(i, c)]).collect();
                devectorize(&v)
            })
            .collect::<Result<_>>()?;
        return Ok(SteadyState::Degenerate { basis });
    }
    bordered_solve(l)
}

/// Solve `[[ℒ, vec(𝟙)/D], [vec(𝟙)ᵀ, 0]] [x; μ] = [0; 1]`. The border
/// makes the system nonsingular whenever the null space is one dimensional
/// and fixes `Tr x = 1`.
pub fn bordered_solve(l: &Superoperator) -> Result<SteadyState> {
    let d = l.hilbert_dim();
    let n = l.dim();
    let inv_d = 1.0 / d as f64;
    let lm = l.mat();
    let a = Mat::from_fn(n + 1, n + 1, |i, j| {
        if i < n && j < n {
            lm[(i, j)]
        } else if i == n && j == n {
            C64::new(0.0, 0.0)
        } else {
            let k = if i == n { j } else { i };
            let on_diag = k % (d + 1) == 0;
            let w = if i == n { 1.0 } else { inv_d };
            C64::new(if on_diag { w } else { 0.0 }, 0.0)
        }
    });
    let mut rhs = Mat::<C64>::zeros(n + 1, 1);
    rhs[(n, 0)] = C64::new(1.0, 0.0);
    let x = linalg::solve(a.as_ref(), rhs.as_ref());
    let v: Vec<C64> = (0..n).map(|i| x[(i, 0)]).collect();
    let raw = devectorize(&v)?;
    finish_unique(l, raw)
}

pub(crate) fn finish_unique(l: &Superoperator, raw: Operator) -> Result<SteadyState> {
    let hermiticity_defect = raw.hermiticity_defect();
    let mut rho = raw.hermitian_part();
    let tr = rho.trace().re;
    rho = rho.scale_real(1.0 / tr);
    let min_eigenvalue = rho.hermitian_eigenvalues()?.first().copied().unwrap_or(0.0);
    if min_eigenvalue < NEGATIVITY_WARN {
        log::warn!("steady state has a negative eigenvalue {min_eigenvalue:.3e}");
    }
    let residual = residual(l, &rho, C64::new(0.0, 0.0))?;
    Ok(SteadyState::Unique { rho, hermiticity_defect, min_eigenvalue, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::{build_superoperator, LindbladModel};
    use crate::operators::{spin_operators, Spin, SpinSpec};

    #[test]
    fn damped_spin_relaxes_to_ground_state() {
        let spec = SpinSpec::uniform(Spin::HALF, 1).unwrap();
        let ops = spin_operators(Spin::HALF);
        let model = LindbladModel::new(spec, ops.sz.scale_real(0.7), vec![ops.sminus]).unwrap();
        let l = build_superoperator(&model).unwrap();
        let ss = steady_state(&l).unwrap();
        assert_eq!(ss.multiplicity(), 1);
        let rho = ss.rho().unwrap();
        assert!((rho - &Operator::unit(2, 1, 1)).frobenius_norm() < 1e-14);
    }

    #[test]
    fn pure_dephasing_is_degenerate() {
        let spec = SpinSpec::uniform(Spin::HALF, 1).unwrap();
        let sz = spin_operators(Spin::HALF).sz;
        let model = LindbladModel::new(spec, Operator::zeros(2), vec![sz]).unwrap();
        let l = build_superoperator(&model).unwrap();
        assert_eq!(steady_state(&l).unwrap().multiplicity(), 2);
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let l = Superoperator::identity(2);
        assert!(matches!(steady_state(&l), Err(Error::NotTracePreserving(_))));
    }
}
