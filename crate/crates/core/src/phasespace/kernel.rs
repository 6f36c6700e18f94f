use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::operators::{Operator, Spin, SpinSpec};
use crate::C64;

/// Azimuths `φ_j ∈ [0, 2π)` and polar angles `θ_j ∈ [0, π]`, one per site.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleTuple {
    pub phis: Vec<f64>,
    pub thetas: Vec<f64>,
}

impl AngleTuple {
    pub fn new(phis: Vec<f64>, thetas: Vec<f64>) -> Result<Self> {
        if phis.len() != thetas.len() {
            return Err(Error::DimensionMismatch { expected: phis.len(), found: thetas.len() });
        }
        if phis.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("azimuths must be finite".into()));
        }
        if thetas.iter().any(|t| !(0.0..=PI).contains(t)) {
            return Err(Error::InvalidParameter("polar angles must lie in [0, π]".into()));
        }
        Ok(AngleTuple { phis: phis.into_iter().map(super::wrap_angle).collect(), thetas })
    }

    /// All polar angles at `π/2`.
    pub fn equatorial(phis: Vec<f64>) -> Result<Self> {
        let n = phis.len();
        Self::new(phis, vec![PI / 2.0; n])
    }

    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// `d^S_{m,S}(θ) = √C(2S, S+m) cos^{S+m}(θ/2) sin^{S−m}(θ/2)` for the
/// local basis index `index` (index 0 is `m = S`).
pub fn wigner_d_top(spin: Spin, index: usize, theta: f64) -> f64 {
    let n = spin.twice();
    let down = index as u32;
    let up = n - down;
    let (s, c) = (theta / 2.0).sin_cos();
    binomial(n, up).sqrt() * c.powi(up as i32) * s.powi(down as i32)
}

/// `⊗_j e^{−iφ_j S_j^z} e^{−iθ_j S_j^y} |S_j⟩`.
pub fn coherent_state(angles: &AngleTuple, spec: &SpinSpec) -> Result<Vec<C64>> {
    if angles.len() != spec.n_sites() {
        return Err(Error::DimensionMismatch { expected: spec.n_sites(), found: angles.len() });
    }
    let mut state = vec![C64::new(1.0, 0.0)];
    for ((spin, &phi), &theta) in spec.sites().iter().zip(&angles.phis).zip(&angles.thetas) {
        let local: Vec<C64> = (0..spin.dim())
            .map(|i| {
                let m = spin.magnetization(i);
                C64::from_polar(wigner_d_top(*spin, i, theta), -phi * m)
            })
            .collect();
        state = state.iter().flat_map(|a| local.iter().map(move |b| a * b)).collect();
    }
    Ok(state)
}

/// `⟨coh(angles)|ρ|coh(angles)⟩`.
pub fn husimi_q(rho: &Operator, spec: &SpinSpec, angles: &AngleTuple) -> Result<f64> {
    rho.check_dim(spec.dim())?;
    let psi = coherent_state(angles, spec)?;
    Ok(rho.expectation(&psi, &psi).re)
}

/// `C_{mm'} = ∫₀^π sinθ d^S_{m,S}(θ) d^S_{m',S}(θ) dθ`, indexed by local
/// basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaMomentKernel {
    spin: Spin,
    c: Vec<f64>,
}

impl ThetaMomentKernel {
    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c[i * self.spin.dim() + j]
    }

    pub fn dim(&self) -> usize {
        self.spin.dim()
    }
}

/// `Γ(n/2)` for a positive integer `n`.
fn gamma_half(n: u32) -> f64 {
    let (mut x, mut g) = if n % 2 == 0 { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    while 2.0 * x < f64::from(n) - 0.5 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Closed form: with `p = 2S+m+m'` and `q = 2S−m−m'`,
/// `C_{mm'} = √(C(2S,S+m) C(2S,S+m')) · 2B((q+2)/2, (p+2)/2)`.
pub fn theta_moments(spin: Spin) -> ThetaMomentKernel {
    let n = spin.twice();
    let d = spin.dim();
    let mut c = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let (qi, qj) = (i as u32, j as u32);
            let q = qi + qj;
            let p = 2 * n - q;
            let beta = gamma_half(q + 2) * gamma_half(p + 2) / gamma_half(p + q + 4);
            c[i * d + j] = (binomial(n, n - qi) * binomial(n, n - qj)).sqrt() * 2.0 * beta;
        }
    }
    ThetaMomentKernel { spin, c }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_at_half_integers() {
        assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-15);
        assert!((gamma_half(2) - 1.0).abs() < 1e-15);
        assert!((gamma_half(5) - 0.75 * PI.sqrt()).abs() < 1e-14);
        assert!((gamma_half(8) - 6.0).abs() < 1e-13);
    }

    #[test]
    fn spin_half_kernel() {
        let k = theta_moments(Spin::HALF);
        assert!((k.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((k.get(0, 1) - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_angles() {
        assert!(AngleTuple::new(vec![0.0], vec![4.0]).is_err());
        assert!(AngleTuple::new(vec![0.0, 1.0], vec![0.0]).is_err());
    }
}
