//! Numerical toolkit for the one-dimensional Anderson model with a decaying
//! random potential, `H = Δ + λV` on `ℓ²(ℕ)` with `V δ_n = a_n ω_n δ_n` and
//! envelope `a_n = n^{-α}`.
//!
//! The crate provides:
//!
//! - reproducible disorder sampling and model parametrization ([`model`]);
//! - transfer matrices, overflow-safe products and the polar (Prüfer)
//!   recursion for solutions ([`prufer`]);
//! - Monte Carlo estimation of the log-radius growth rate, fourth-moment
//!   boundedness curves, and decomposition diagnostics ([`asymptotics`]);
//! - finite-box diagonalization, eigenfunction decay fits, and the decaying
//!   initial direction ([`spectrum`]);
//! - time evolution, transport moments, eigenfunction correlators and
//!   Green's-function fractional moments ([`dynamics`]).

pub mod asymptotics;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod prufer;
pub mod spectrum;
pub mod stats;

pub use error::Error;
pub use model::{
    DecayEnvelope, DisorderKind, DisorderRealization, DisorderSpec, EnergyPoint, ModelParams,
};
pub use prufer::{PruferState, TransferMatrix, TransferProduct};
