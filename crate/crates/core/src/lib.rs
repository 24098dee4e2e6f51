//! Bistable traveling wavefronts of the delayed Belousov–Zhabotinsky system
//!
//! ```text
//! u_t = u_xx + u (1 - r - u + r v(t - h, x))
//! v_t = v_xx + (b u - eps v)(1 - v)
//! ```
//!
//! The crate solves the wave-profile problem with unknown speed, continues
//! profiles in `eps` toward the degenerate limit, simulates the PDE and the
//! homogeneous delay system, builds the local unstable manifold at the origin
//! by a contraction in a weighted space, and certifies explicit comparison
//! functions for the intermediate equilibrium.

pub mod acceptance;
pub mod cli;
pub mod dde;
pub mod error;
pub mod manifold;
pub mod model;
pub mod numerics;
pub mod profile;
pub mod rdsim;
pub mod subsuper;

pub use error::{Error, Result};
pub use model::{
    equilibria, homogeneous_spectra, kernel_mass, profile_char_roots, reaction_terms, EquilibriaSet,
    KernelSpec, ModelParams, Point, Spectrum,
};
pub use profile::{solve_profile, WaveProfile};
