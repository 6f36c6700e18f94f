use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::operators::{Operator, SpinSpec};
use crate::C64;

use super::kernel::{theta_moments, ThetaMomentKernel};
use super::uniform_density;

/// `S(φ⃗) = Σ_k a_k e^{i k⃗·φ⃗}` with `k_j = m_j − m'_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePolynomial {
    spec: SpinSpec,
    coefficients: BTreeMap<Vec<i32>, C64>,
    normalization: f64,
}

impl PhasePolynomial {
    pub fn spec(&self) -> &SpinSpec {
        &self.spec
    }

    pub fn n_sites(&self) -> usize {
        self.spec.n_sites()
    }

    /// `𝒩 = Π_j (2S_j+1)/4π`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn coefficients(&self) -> &BTreeMap<Vec<i32>, C64> {
        &self.coefficients
    }

    pub fn coefficient(&self, k: &[i32]) -> C64 {
        self.coefficients.get(k).copied().unwrap_or_default()
    }

    pub fn zero_frequency(&self) -> C64 {
        self.coefficient(&vec![0; self.n_sites()])
    }

    /// `max_k |a_{−k} − conj(a_k)|`.
    pub fn reality_defect(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|(k, a)| {
                let neg: Vec<i32> = k.iter().map(|x| -x).collect();
                (self.coefficient(&neg) - a.conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `∫ S dφ⃗ = (2π)^N a_0`.
    pub fn integral(&self) -> f64 {
        self.zero_frequency().re / uniform_density(self.n_sites())
    }

    pub fn value(&self, phis: &[f64]) -> Result<f64> {
        if phis.len() != self.n_sites() {
            return Err(Error::DimensionMismatch { expected: self.n_sites(), found: phis.len() });
        }
        Ok(eval_terms(self.coefficients.iter().map(|(k, a)| (k.as_slice(), *a)), phis))
    }
}

fn eval_terms<'a>(terms: impl Iterator<Item = (&'a [i32], C64)>, phis: &[f64]) -> f64 {
    terms
        .map(|(k, a)| {
            let arg: f64 = k.iter().zip(phis).map(|(&kj, &p)| f64::from(kj) * p).sum();
            (a * C64::from_polar(1.0, arg)).re
        })
        .sum()
}

/// Exact `S(φ⃗)` of `rho`: `𝒩 Σ ρ_{m⃗m⃗'} Π_j C_{m_j m'_j} e^{i(m_j−m'_j)φ_j}`.
pub fn phase_distribution(rho: &Operator, spec: &SpinSpec) -> Result<PhasePolynomial> {
    let d = spec.dim();
    rho.check_dim(d)?;
    let kernels: Vec<ThetaMomentKernel> = spec.sites().iter().map(|s| theta_moments(*s)).collect();
    let normalization: f64 =
        spec.sites().iter().map(|s| f64::from(s.twice() + 1) / (4.0 * PI)).product();
    let locals: Vec<Vec<usize>> = (0..d).map(|i| spec.decompose(i)).collect();
    let mut coefficients: BTreeMap<Vec<i32>, C64> = BTreeMap::new();
    for (r, lr) in locals.iter().enumerate() {
        for (c, lc) in locals.iter().enumerate() {
            let entry = rho.get(r, c);
            if entry == C64::default() {
                continue;
            }
            let mut weight = normalization;
            let mut k = Vec::with_capacity(lr.len());
            for ((kern, &i), &j) in kernels.iter().zip(lr).zip(lc) {
                weight *= kern.get(i, j);
                // m_j − m'_j with m = S − index
                k.push(j as i32 - i as i32);
            }
            *coefficients.entry(k).or_default() += entry * weight;
        }
    }
    Ok(PhasePolynomial { spec: spec.clone(), coefficients, normalization })
}

/// `S_d(φ⃗') = ∫₀^{2π} dφ_N S(φ'_1+φ_N, …, φ'_{N−1}+φ_N, φ_N)` as a
/// trigonometric polynomial in the `N−1` differences.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedPhaseDistribution {
    dims: usize,
    terms: Vec<(Vec<i32>, C64)>,
}

impl ReducedPhaseDistribution {
    pub fn from_terms(dims: usize, terms: Vec<(Vec<i32>, C64)>) -> Result<Self> {
        if dims == 0 {
            return Err(Error::InvalidParameter("reduced distribution needs at least two sites".into()));
        }
        if let Some((k, _)) = terms.iter().find(|(k, _)| k.len() != dims) {
            return Err(Error::DimensionMismatch { expected: dims, found: k.len() });
        }
        Ok(ReducedPhaseDistribution { dims, terms })
    }

    /// Number of difference angles, `N − 1`.
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn terms(&self) -> &[(Vec<i32>, C64)] {
        &self.terms
    }

    /// `(1/2π)^{N−1}`.
    pub fn uniform_level(&self) -> f64 {
        uniform_density(self.dims)
    }

    pub fn zero_frequency(&self) -> C64 {
        self.terms.iter().filter(|(k, _)| k.iter().all(|&x| x == 0)).map(|(_, a)| *a).sum()
    }

    /// `∫ S_d dφ⃗'`.
    pub fn integral(&self) -> f64 {
        self.zero_frequency().re / self.uniform_level()
    }

    /// True when only the constant term survives.
    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(k, a)| k.iter().all(|&x| x == 0) || *a == C64::default())
    }

    pub fn value(&self, phis: &[f64]) -> f64 {
        eval_terms(self.terms.iter().map(|(k, a)| (k.as_slice(), *a)), phis)
    }

    /// Value, gradient and row-major Hessian at `phis`.
    pub fn derivatives(&self, phis: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let n = self.dims;
        let mut v = 0.0;
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n * n];
        for (k, a) in &self.terms {
            let arg: f64 = k.iter().zip(phis).map(|(&kj, &p)| f64::from(kj) * p).sum();
            let z = a * C64::from_polar(1.0, arg);
            v += z.re;
            for i in 0..n {
                let ki = f64::from(k[i]);
                g[i] -= ki * z.im;
                for j in 0..n {
                    h[i * n + j] -= ki * f64::from(k[j]) * z.re;
                }
            }
        }
        (v, g, h)
    }

    /// Values on the periodic grid `φ_i = 2π i / grid`, row-major with the
    /// first axis slowest.
    pub fn grid_values(&self, grid: usize) -> Vec<f64> {
        let n = self.dims;
        let total = grid.pow(n as u32);
        let h = 2.0 * PI / grid as f64;
        // phase tables per term and axis: e^{i k_a φ}
        let tables: Vec<Vec<Vec<C64>>> = self
            .terms
            .iter()
            .map(|(k, _)| {
                k.iter()
                    .map(|&ka| (0..grid).map(|i| C64::from_polar(1.0, f64::from(ka) * h * i as f64)).collect())
                    .collect()
            })
            .collect();
        let mut out = vec![0.0; total];
        let mut idx = vec![0usize; n];
        for slot in out.iter_mut() {
            let mut v = 0.0;
            for ((_, a), table) in self.terms.iter().zip(&tables) {
                let mut z = *a;
                for (axis, &i) in idx.iter().enumerate() {
                    z *= table[axis][i];
                }
                v += z.re;
            }
            *slot = v;
            for axis in (0..n).rev() {
                idx[axis] += 1;
                if idx[axis] < grid {
                    break;
                }
                idx[axis] = 0;
            }
        }
        out
    }
}

/// Integrates out `φ_N`: only tuples with `Σ_j k_j = 0` survive, each
/// re-expressed on the differences with weight `2π`.
pub fn reduce_over_global_phase(s: &PhasePolynomial) -> Result<ReducedPhaseDistribution> {
    let n = s.n_sites();
    if n < 2 {
        return Err(Error::InvalidParameter("reduced distribution needs at least two sites".into()));
    }
    let mut acc: BTreeMap<Vec<i32>, C64> = BTreeMap::new();
    for (k, a) in s.coefficients() {
        if k.iter().sum::<i32>() == 0 {
            *acc.entry(k[..n - 1].to_vec()).or_default() += a * (2.0 * PI);
        }
    }
    ReducedPhaseDistribution::from_terms(n - 1, acc.into_iter().collect())
}
