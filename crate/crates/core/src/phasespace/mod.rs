//! Husimi-Q phase space of spin lattices.
//!
//! `S(φ⃗)` is the Husimi function integrated over every polar angle with
//! the normalization `𝒩 = Π_j (2S_j+1)/4π`, so `∫ S dφ⃗ = 1`. It is held as
//! an exact trigonometric polynomial in the azimuths; grids only appear
//! when it is maximized or exported.

mod kernel;
mod poly;
mod sync;

pub use kernel::{coherent_state, husimi_q, theta_moments, wigner_d_top, AngleTuple, ThetaMomentKernel};
pub use poly::{phase_distribution, reduce_over_global_phase, PhasePolynomial, ReducedPhaseDistribution};
pub use sync::{
    sync_measure, threshold_region, write_reduced_csv, SyncMeasure, ThresholdMode, ThresholdRegion, DEFAULT_GRID,
};

/// `(1/2π)^n`, the density of the uniform distribution on the `n`-torus.
pub fn uniform_density(n: usize) -> f64 {
    (2.0 * std::f64::consts::PI).powi(-(n as i32))
}

/// `φ mod 2π` in `[0, 2π)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let r = phi.rem_euclid(tau);
    if r >= tau {
        0.0
    } else {
        r
    }
}
