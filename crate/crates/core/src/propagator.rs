//! State evolution under constant or time-dependent Hamiltonians with
//! controlled accuracy and surfaced (never silently corrected) norm drift.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{Operator, StateVector};
use crate::model::FullHamiltonian;

/// Default |‖ψ‖ − 1| bound after any propagation.
pub const DEFAULT_NORM_TOLERANCE: f64 = 1e-9;

/// Hard upper bound on dt: (1/50) · 2π/ω_max (enforced at schedule build).
pub const DT_BOUND_PERIOD_FRACTION: f64 = 50.0;

/// Default dt: 2π/(200 · ω_max), four times under the hard bound.
pub const DT_DEFAULT_PERIOD_FRACTION: f64 = 200.0;

/// Integration method. The matrix exponential applies to constant
/// Hamiltonians only; time-dependent propagation is fixed-step RK4 so that
/// identical inputs always reproduce identical bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Method {
    MatrixExponential,
    RungeKutta4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dt: f64,
    pub norm_tolerance: f64,
}

impl IntegratorConfig {
    pub fn new(method: Method, dt: f64, norm_tolerance: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {dt:.6e}")));
        }
        if !(norm_tolerance.is_finite() && norm_tolerance > 0.0) {
            return Err(Error::Config(format!(
                "norm tolerance must be positive, got {norm_tolerance:.6e}"
            )));
        }
        Ok(Self {
            method,
            dt,
            norm_tolerance,
        })
    }

    /// RK4 config with dt = 2π/(200 ω_max) for the fastest rotating phase.
    pub fn for_max_frequency(omega_max: f64) -> Result<Self> {
        if !(omega_max.is_finite() && omega_max > 0.0) {
            return Err(Error::Config(format!(
                "dt selection requires a positive max frequency, got {omega_max:.6e}"
            )));
        }
        Self::new(
            Method::RungeKutta4,
            2.0 * std::f64::consts::PI / (DT_DEFAULT_PERIOD_FRACTION * omega_max),
            DEFAULT_NORM_TOLERANCE,
        )
    }

    /// Checks dt against the hard bound for the fastest phase present.
    pub fn validate_dt(&self, omega_max: f64) -> Result<()> {
        if omega_max <= 0.0 {
            return Ok(());
        }
        let bound = 2.0 * std::f64::consts::PI / (DT_BOUND_PERIOD_FRACTION * omega_max);
        if self.dt > bound {
            return Err(Error::Config(format!(
                "dt {:.6e} exceeds the bound {:.6e} for max frequency {:.6e}",
                self.dt, bound, omega_max
            )));
        }
        Ok(())
    }
}

/// Hamiltonian evaluable at arbitrary times, for time-ordered propagation.
pub trait TimeDependent {
    fn dim(&self) -> usize;
    fn evaluate_into(&self, t: f64, out: &mut DMatrix<Complex64>);
}

impl TimeDependent for FullHamiltonian {
    fn dim(&self) -> usize {
        FullHamiltonian::dim(self)
    }

    fn evaluate_into(&self, t: f64, out: &mut DMatrix<Complex64>) {
        FullHamiltonian::evaluate_into(self, t, out)
    }
}

/// A constant Hamiltonian viewed as a (trivially) time-dependent one.
impl TimeDependent for Operator {
    fn dim(&self) -> usize {
        Operator::dim(self)
    }

    fn evaluate_into(&self, _t: f64, out: &mut DMatrix<Complex64>) {
        out.copy_from(self.matrix());
    }
}

/// e^{−iHt}|ψ⟩ by spectral decomposition of a Hermitian-flagged H.
pub fn evolve_constant(state: &StateVector, h: &Operator, duration: f64) -> Result<StateVector> {
    if !h.is_hermitian() {
        return Err(Error::Config(
            "evolve_constant requires an operator flagged Hermitian".into(),
        ));
    }
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::Domain(format!(
            "duration must be non-negative, got {duration:.6e}"
        )));
    }
    if h.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            got: h.dim(),
        });
    }
    if duration == 0.0 {
        return Ok(state.clone());
    }
    let eigen = h.matrix().clone().symmetric_eigen();
    let mut rotated = eigen.eigenvectors.adjoint() * state.amplitudes();
    for (value, amp) in eigen.eigenvalues.iter().zip(rotated.iter_mut()) {
        *amp *= Complex64::from_polar(1.0, -value * duration);
    }
    let out = StateVector::from_amplitudes(state.space(), &eigen.eigenvectors * rotated)?;
    let drift = (out.norm() - state.norm()).abs();
    if drift > DEFAULT_NORM_TOLERANCE {
        return Err(Error::NormDrift {
            drift,
            tolerance: DEFAULT_NORM_TOLERANCE,
        });
    }
    Ok(out)
}

/// Time-ordered propagation of dψ/dt = −iH(t)ψ from `t0` over `duration`
/// with fixed-step RK4 (uniform step ≤ cfg.dt; two interior evaluations
/// share the midpoint). Deterministic for fixed inputs; errors if the norm
/// drifts beyond cfg.norm_tolerance.
pub fn evolve_time_dependent(
    state: &StateVector,
    h: &impl TimeDependent,
    t0: f64,
    duration: f64,
    cfg: &IntegratorConfig,
) -> Result<StateVector> {
    if cfg.method != Method::RungeKutta4 {
        return Err(Error::Config(
            "time-dependent propagation requires the RK4 method".into(),
        ));
    }
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::Domain(format!(
            "duration must be non-negative, got {duration:.6e}"
        )));
    }
    if h.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            got: h.dim(),
        });
    }
    if duration == 0.0 {
        return Ok(state.clone());
    }

    let dim = state.dim();
    let steps = (duration / cfg.dt).ceil().max(1.0) as usize;
    let step = duration / steps as f64;
    let minus_i = Complex64::new(0.0, -1.0);
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);

    let mut y = state.amplitudes().clone();
    let mut hm = DMatrix::<Complex64>::zeros(dim, dim);
    let mut k1 = DVector::<Complex64>::zeros(dim);
    let mut k2 = DVector::<Complex64>::zeros(dim);
    let mut k3 = DVector::<Complex64>::zeros(dim);
    let mut k4 = DVector::<Complex64>::zeros(dim);
    let mut stage = DVector::<Complex64>::zeros(dim);

    for index in 0..steps {
        let t = t0 + index as f64 * step;
        let half = Complex64::new(step / 2.0, 0.0);

        h.evaluate_into(t, &mut hm);
        k1.gemv(minus_i, &hm, &y, zero);

        h.evaluate_into(t + step / 2.0, &mut hm);
        stage.copy_from(&y);
        stage.axpy(half, &k1, one);
        k2.gemv(minus_i, &hm, &stage, zero);

        stage.copy_from(&y);
        stage.axpy(half, &k2, one);
        k3.gemv(minus_i, &hm, &stage, zero);

        h.evaluate_into(t + step, &mut hm);
        stage.copy_from(&y);
        stage.axpy(Complex64::new(step, 0.0), &k3, one);
        k4.gemv(minus_i, &hm, &stage, zero);

        let sixth = Complex64::new(step / 6.0, 0.0);
        let third = Complex64::new(step / 3.0, 0.0);
        y.axpy(sixth, &k1, one);
        y.axpy(third, &k2, one);
        y.axpy(third, &k3, one);
        y.axpy(sixth, &k4, one);
    }

    let out = StateVector::from_amplitudes(state.space(), y)?;
    let drift = (out.norm() - state.norm()).abs();
    if drift > cfg.norm_tolerance {
        return Err(Error::NormDrift {
            drift,
            tolerance: cfg.norm_tolerance,
        });
    }
    Ok(out)
}

/// Propagates like [`evolve_time_dependent`] while recording `n_samples`
/// uniformly spaced states including both endpoints.
pub fn step_and_record(
    state: &StateVector,
    h: &impl TimeDependent,
    t0: f64,
    duration: f64,
    n_samples: usize,
    cfg: &IntegratorConfig,
) -> Result<Vec<(f64, StateVector)>> {
    if n_samples < 2 {
        return Err(Error::Config(format!(
            "trajectory recording needs at least 2 samples, got {n_samples}"
        )));
    }
    let mut trace = Vec::with_capacity(n_samples);
    trace.push((t0, state.clone()));
    let mut current = state.clone();
    for k in 1..n_samples {
        let start = t0 + duration * (k - 1) as f64 / (n_samples - 1) as f64;
        let end = t0 + duration * k as f64 / (n_samples - 1) as f64;
        current = evolve_time_dependent(&current, h, start, end - start, cfg)?;
        trace.push((end, current.clone()));
    }
    Ok(trace)
}
