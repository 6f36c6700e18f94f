use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::operators::{devectorize_col, vectorize, Operator, Superoperator};
use crate::C64;

use super::{build_superoperator, LindbladModel};

/// States `ρ(t_k)` on a time grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Operator>,
}

impl Trajectory {
    /// `max_k |Tr ρ(t_k) − 1|`.
    pub fn max_trace_drift(&self) -> f64 {
        self.states.iter().map(|r| (r.trace() - C64::new(1.0, 0.0)).norm()).fold(0.0, f64::max)
    }

    /// `Tr[A ρ(t_k)]` along the grid.
    pub fn expectation(&self, a: &Operator) -> Vec<C64> {
        self.states.iter().map(|r| (a * r).trace()).collect()
    }

    pub fn last(&self) -> Option<&Operator> {
        self.states.last()
    }
}

/// Check that `rho` is Hermitian, unit trace and positive semidefinite,
/// each within `tol`.
pub fn validate_density_operator(rho: &Operator, tol: f64) -> Result<()> {
    let h = rho.hermiticity_defect();
    if h > tol {
        return Err(Error::InvalidDensityOperator(format!("hermiticity defect {h:.3e}")));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > tol {
        return Err(Error::InvalidDensityOperator(format!("trace {tr}")));
    }
    let min = rho.hermitian_eigenvalues()?.first().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(Error::InvalidDensityOperator(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// `ρ(t) = exp(ℒt) ρ₀` on a nondecreasing grid of times `t ≥ 0`.
pub fn evolve(model: &LindbladModel, rho0: &Operator, times: &[f64]) -> Result<Trajectory> {
    let l = build_superoperator(model)?;
    evolve_superoperator(&l, rho0, times)
}

pub fn evolve_superoperator(l: &Superoperator, rho0: &Operator, times: &[f64]) -> Result<Trajectory> {
    rho0.check_dim(l.hilbert_dim())?;
    validate_density_operator(rho0, 1e-10)?;
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("time grid must be finite, nonnegative and nondecreasing".into()));
    }
    let n = l.dim();
    let mut v = vectorize(rho0).as_mat().to_owned();
    let mut now = 0.0;
    let mut cached: Option<(f64, CMat)> = None;
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        let dt = t - now;
        if dt > 0.0 {
            let reuse = matches!(&cached, Some((h, _)) if (h - dt).abs() <= 1e-14 * dt.max(1.0));
            if !reuse {
                let scaled = faer::Mat::from_fn(n, n, |i, j| l.mat()[(i, j)] * dt);
                cached = Some((dt, linalg::expm(scaled.as_ref())?));
            }
            let prop = &cached.as_ref().unwrap().1;
            v = prop * &v;
            now = t;
        }
        states.push(devectorize_col(v.col(0))?);
    }
    Ok(Trajectory { times: times.to_vec(), states })
}
