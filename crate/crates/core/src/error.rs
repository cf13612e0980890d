//! Error type shared by all modules.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Invalid static configuration (cutoffs, frequencies, grids, files).
    #[error("configuration error: {0}")]
    Config(String),

    /// Operator kind applied to an incompatible tensor slot.
    #[error("operator/slot mismatch: {0}")]
    SlotMismatch(String),

    /// Matrix or vector dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An operator flagged Hermitian fails the elementwise check.
    #[error("operator flagged Hermitian deviates from its adjoint by {max_deviation:.3e}")]
    NotHermitian { max_deviation: f64 },

    /// A drive does not address the qubit it is paired with.
    #[error("drive target mismatch: {0}")]
    TargetMismatch(String),

    /// The Raman construction requires equal resonator and drive detunings.
    #[error("detuning mismatch: delta_c = {delta_c:.6e}, delta_uw = {delta_uw:.6e}")]
    DetuningMismatch { delta_c: f64, delta_uw: f64 },

    /// Norm drift after propagation exceeded the integrator tolerance.
    #[error("norm drift {drift:.3e} exceeds tolerance {tolerance:.3e}")]
    NormDrift { drift: f64, tolerance: f64 },

    /// An input state violates a protocol precondition.
    #[error("invalid input state: {0}")]
    InputState(String),

    /// A formula argument lies outside its physical domain.
    #[error("domain error: {0}")]
    Domain(String),
}
