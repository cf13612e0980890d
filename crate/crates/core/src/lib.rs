//! Deterministic simulator and analytics toolkit for a four-step
//! quantum-information-transfer protocol between two Λ-type three-level
//! qubits coupled to a single resonator mode.
//!
//! The crate models the transfer (α|0⟩ + β|1⟩)_a |1⟩_b |0⟩_c →
//! |1⟩_a (α|0⟩ + β|1⟩)_b |0⟩_c in three ways:
//!
//! - an *analytic* engine composing the exact closed-form step maps,
//! - an *effective* engine propagating the adiabatically-eliminated
//!   Raman and resonant-drive Hamiltonians,
//! - a *full* engine propagating the time-dependent interaction-picture
//!   Hamiltonian with both qubit–resonator couplings active.
//!
//! Conventions used throughout: ħ = 1, every frequency (g, Ω, Δ, ω) is an
//! angular frequency in rad/s, durations are in seconds, and tensor factors
//! are ordered (qubit a, qubit b, resonator).

pub mod analytics;
pub mod cli;
pub mod config;
pub mod error;
pub mod hilbert;
pub mod model;
pub mod propagator;
pub mod protocol;

pub use error::{Error, Result};
