//! Lindblad superoperators for small spin lattices, decay-free mode
//! analysis, and steady-state phase synchronization diagnostics.
//!
//! ```
//! use synclab::models::{spin1_chain, Spin1ChainParams};
//! use synclab::liouvillian::{build_superoperator, steady_state};
//!
//! let model = spin1_chain(&Spin1ChainParams::default()).unwrap();
//! let l = build_superoperator(&model).unwrap();
//! let steady = steady_state(&l).unwrap();
//! assert_eq!(steady.multiplicity(), 8);
//! ```

pub use num_complex::Complex64 as C64;

pub mod error;
pub mod harness;
pub mod linalg;
pub mod liouvillian;
pub mod models;
pub mod operators;
pub mod phasespace;
pub mod randliouv;
pub mod selftest;
pub mod syncstats;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/conventions.md")]
    mod conventions {}
    #[doc = include_str!("../../../book/src/generators.md")]
    mod generators {}
    #[doc = include_str!("../../../book/src/steady_states.md")]
    mod steady_states {}
    #[doc = include_str!("../../../book/src/phase_space.md")]
    mod phase_space {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
    #[doc = include_str!("../../../book/src/random_generators.md")]
    mod random_generators {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
}
