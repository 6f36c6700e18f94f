//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use synclab::operators::{Operator, SpinSpec};
use synclab::C64;

/// Gauss-Legendre nodes and weights on `[a, b]`, by Newton iteration on
/// `P_n`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w));
    }
    out
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Single-site coherent state from its closed form,
/// `√C(2S, i) cos^{2S−i}(θ/2) sin^i(θ/2) e^{−i m φ}` with `m = S − i`.
pub fn coherent_site(twice: u32, theta: f64, phi: f64) -> Vec<C64> {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    (0..=twice)
        .map(|i| {
            let amp = binomial(twice, i).sqrt() * c.powi((twice - i) as i32) * s.powi(i as i32);
            let m = twice as f64 / 2.0 - i as f64;
            C64::from_polar(amp, -m * phi)
        })
        .collect()
}

/// Product coherent state, site 0 slowest.
pub fn coherent_product(spec: &SpinSpec, thetas: &[f64], phis: &[f64]) -> Vec<C64> {
    let mut psi = vec![C64::new(1.0, 0.0)];
    for (j, spin) in spec.sites().iter().enumerate() {
        let site = coherent_site(spin.twice(), thetas[j], phis[j]);
        psi = psi.iter().flat_map(|a| site.iter().map(move |b| a * b)).collect();
    }
    psi
}

pub fn husimi(rho: &Operator, spec: &SpinSpec, thetas: &[f64], phis: &[f64]) -> f64 {
    let psi = coherent_product(spec, thetas, phis);
    let d = psi.len();
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..d {
        for c in 0..d {
            acc += psi[r].conj() * rho.get(r, c) * psi[c];
        }
    }
    acc.re
}

/// `S(φ⃗) = Π_j (2S_j+1)/4π · ∫ Q Π_j sin θ_j dθ_j` by a tensor
/// Gauss-Legendre rule over the polar angles.
pub fn phase_density_by_quadrature(rho: &Operator, spec: &SpinSpec, phis: &[f64], nodes: usize) -> f64 {
    let rule = gauss_legendre(nodes, 0.0, PI);
    let n = spec.n_sites();
    let norm: f64 = spec.sites().iter().map(|s| s.dim() as f64 / (4.0 * PI)).product();
    let mut idx = vec![0usize; n];
    let mut total = 0.0;
    loop {
        let thetas: Vec<f64> = idx.iter().map(|&i| rule[i].0).collect();
        let w: f64 = idx.iter().map(|&i| rule[i].1 * rule[i].0.sin()).product();
        total += w * husimi(rho, spec, &thetas, phis);
        let mut j = 0;
        while j < n {
            idx[j] += 1;
            if idx[j] < nodes {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == n {
            break;
        }
    }
    norm * total
}

/// `−i[H, ρ] + Σ_μ (L_μ ρ L_μ† − ½{L_μ†L_μ, ρ})` by matrix products.
pub fn lindblad_rhs(h: &Operator, jumps: &[Operator], rho: &Operator) -> Operator {
    let mut out = (&(h * rho) - &(rho * h)).scale(C64::new(0.0, -1.0));
    for l in jumps {
        let ld = l.adjoint();
        let ldl = &ld * l;
        out = &out + &(&(l * rho) * &ld);
        out = &out - &(&(&ldl * rho) + &(rho * &ldl)).scale_real(0.5);
    }
    out
}

pub fn random_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    Operator::from_fn(d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// `A A† / Tr(A A†)` for a random complex `A`: full rank, unit trace.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    let a = random_matrix(d, rng);
    let rho = &a * &a.adjoint();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

pub fn random_diagonal_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let total: f64 = w.iter().sum();
    Operator::real_diagonal(&w.iter().map(|x| x / total).collect::<Vec<_>>())
}

/// `½ Σ |eigenvalues of (a − b)|` for Hermitian `a − b`.
pub fn trace_distance(a: &Operator, b: &Operator) -> f64 {
    let diff = (a - b).hermitian_part();
    0.5 * diff.hermitian_eigenvalues().unwrap().iter().map(|x| x.abs()).sum::<f64>()
}

/// Periodic distance on the circle.
pub fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}
