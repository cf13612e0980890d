//! C ABI over the core simulator: opaque schedule handles, flat structs,
//! and integer status codes. Every function is panic-safe at the boundary.
//!
//! Ownership rules: `qit_schedule_default` and `qit_schedule_new` allocate a
//! handle released only by `qit_schedule_free`; all other pointers are
//! borrowed for the duration of the call; returned strings are static and
//! must not be freed. Enums cross the boundary as plain integers so an
//! out-of-range value from C is an error code, never undefined behavior.

use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use qit_core::analytics::{average_fidelity, average_fidelity_mc, occupation_p2, pq_factors, FidelityParams};
use qit_core::config::RunConfig;
use qit_core::error::Error;
use qit_core::model::{detunings, QubitId, QubitParams, ResonatorParams};
use qit_core::propagator::IntegratorConfig;
use qit_core::protocol::{build_schedule, run_transfer, Engine, Schedule};

/// Call outcome; non-zero means the outputs were not written.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Constraint = 3,
    Integration = 4,
    Internal = 5,
}

/// Engine selector values accepted by `qit_run_transfer`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QitEngine {
    Analytic = 0,
    Effective = 1,
    Full = 2,
}

/// Flat transfer outcome: final fidelity against the ideal target, photon
/// number left in the resonator, norm drift, and the per-step maxima of the
/// |2> population on each qubit (index 0 is step 1).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QitTransferOutcome {
    pub fidelity: f64,
    pub residual_photon: f64,
    pub norm_drift: f64,
    pub leakage_a: [f64; 4],
    pub leakage_b: [f64; 4],
}

/// Opaque protocol schedule plus its default integrator.
pub struct QitSchedule {
    schedule: Schedule,
    integrator: IntegratorConfig,
}

fn status_of(error: &Error) -> QitStatus {
    match error {
        Error::Config(_) => QitStatus::InvalidArgument,
        Error::Domain(_) | Error::InputState(_) => QitStatus::Constraint,
        Error::NormDrift { .. } => QitStatus::Integration,
        _ => QitStatus::Internal,
    }
}

fn guarded(body: impl FnOnce() -> QitStatus) -> QitStatus {
    catch_unwind(AssertUnwindSafe(body)).unwrap_or(QitStatus::Internal)
}

fn boxed_schedule(schedule: Schedule, out: *mut *mut QitSchedule) -> QitStatus {
    let integrator = match schedule.default_integrator() {
        Ok(integrator) => integrator,
        Err(e) => return status_of(&e),
    };
    let handle = Box::new(QitSchedule {
        schedule,
        integrator,
    });
    unsafe { out.write(Box::into_raw(handle)) };
    QitStatus::Ok
}

/// Builds the reference device at detuning ratio `ratio` (Delta = ratio * g
/// with g = 3.0e9 rad/s) and returns an owned handle in `*out`.
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn qit_schedule_default(
    ratio: f64,
    out: *mut *mut QitSchedule,
) -> QitStatus {
    guarded(|| {
        if out.is_null() {
            return QitStatus::NullPointer;
        }
        let config = RunConfig::default_device(ratio);
        let schedule = match config.validate().and_then(|_| config.schedule()) {
            Ok(schedule) => schedule,
            Err(e) => return status_of(&e),
        };
        boxed_schedule(schedule, out)
    })
}

/// Builds a schedule from explicit device parameters, all in rad/s, and
/// returns an owned handle in `*out`.
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn qit_schedule_new(
    omega02_a: f64,
    omega12_a: f64,
    g_a: f64,
    omega02_b: f64,
    omega12_b: f64,
    g_b: f64,
    omega_c: f64,
    rabi_tilde: f64,
    out: *mut *mut QitSchedule,
) -> QitStatus {
    guarded(|| {
        if out.is_null() {
            return QitStatus::NullPointer;
        }
        let built = QubitParams::new(QubitId::A, omega02_a, omega12_a, g_a)
            .and_then(|qa| {
                QubitParams::new(QubitId::B, omega02_b, omega12_b, g_b).map(|qb| (qa, qb))
            })
            .and_then(|(qa, qb)| {
                ResonatorParams::new(omega_c).map(|resonator| (qa, qb, resonator))
            })
            .and_then(|(qa, qb, resonator)| build_schedule(qa, qb, resonator, rabi_tilde));
        match built {
            Ok(schedule) => boxed_schedule(schedule, out),
            Err(e) => status_of(&e),
        }
    })
}

/// Releases a handle returned by a `qit_schedule_*` constructor. A null
/// pointer is ignored.
/// # Safety
/// `schedule` must be null or a handle from a `qit_schedule_*`
/// constructor not yet freed; the handle is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn qit_schedule_free(schedule: *mut QitSchedule) {
    if !schedule.is_null() {
        drop(unsafe { Box::from_raw(schedule) });
    }
}

/// Writes the total protocol duration in seconds to `*out`.
/// # Safety
/// `schedule` must be a live handle and `out` valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn qit_schedule_total_time(
    schedule: *const QitSchedule,
    out: *mut f64,
) -> QitStatus {
    guarded(|| {
        if schedule.is_null() || out.is_null() {
            return QitStatus::NullPointer;
        }
        let handle = unsafe { &*schedule };
        unsafe { out.write(handle.schedule.total_duration()) };
        QitStatus::Ok
    })
}

/// Runs one transfer of alpha|0> + beta|1> under the selected engine
/// (a `QitEngine` value) and fills `*out`.
/// # Safety
/// `schedule` must be a live handle and `out` valid for writing one
/// `QitTransferOutcome`.
#[no_mangle]
pub unsafe extern "C" fn qit_run_transfer(
    schedule: *const QitSchedule,
    engine: i32,
    alpha_re: f64,
    alpha_im: f64,
    beta_re: f64,
    beta_im: f64,
    out: *mut QitTransferOutcome,
) -> QitStatus {
    guarded(|| {
        if schedule.is_null() || out.is_null() {
            return QitStatus::NullPointer;
        }
        let engine = match engine {
            0 => Engine::Analytic,
            1 => Engine::Effective,
            2 => Engine::Full,
            _ => return QitStatus::InvalidArgument,
        };
        let handle = unsafe { &*schedule };
        let report = match run_transfer(
            Complex64::new(alpha_re, alpha_im),
            Complex64::new(beta_re, beta_im),
            &handle.schedule,
            engine,
            &handle.integrator,
        ) {
            Ok(report) => report,
            Err(e) => return status_of(&e),
        };
        let mut outcome = QitTransferOutcome {
            fidelity: report.fidelity_vs_ideal,
            residual_photon: report.residual_photon,
            norm_drift: report.final_state.norm_drift(),
            leakage_a: [0.0; 4],
            leakage_b: [0.0; 4],
        };
        for (step, leakage) in report.leakage.iter().enumerate() {
            outcome.leakage_a[step] = leakage.qubit_a;
            outcome.leakage_b[step] = leakage.qubit_b;
        }
        unsafe { out.write(outcome) };
        QitStatus::Ok
    })
}

/// Writes the driven |2> occupation of qubit 0 (a) or 1 (b) under its own
/// Raman pulse to `*out`.
/// # Safety
/// `schedule` must be a live handle and `out` valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn qit_occupation_p2(
    schedule: *const QitSchedule,
    qubit: i32,
    out: *mut f64,
) -> QitStatus {
    guarded(|| {
        if schedule.is_null() || out.is_null() {
            return QitStatus::NullPointer;
        }
        let (id, step) = match qubit {
            0 => (QubitId::A, 1),
            1 => (QubitId::B, 4),
            _ => return QitStatus::InvalidArgument,
        };
        let handle = unsafe { &*schedule };
        let params = handle.schedule.qubit(id);
        let drive = &handle.schedule.step(step).drives()[0];
        let value = detunings(params, handle.schedule.resonator(), drive)
            .and_then(|d| occupation_p2(drive.rabi(), d.delta_uw, params.g(), d.delta_c));
        match value {
            Ok(value) => {
                unsafe { out.write(value) };
                QitStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Writes the closed-form uniform-average transfer fidelity for Stark
/// scales (s_a, s_b) and pulse Rabi frequency rabi_tilde to `*out`.
/// # Safety
/// `out` must be valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn qit_average_fidelity(
    s_a: f64,
    s_b: f64,
    rabi_tilde: f64,
    out: *mut f64,
) -> QitStatus {
    guarded(|| {
        if out.is_null() {
            return QitStatus::NullPointer;
        }
        let value = FidelityParams::new(s_a, s_b, rabi_tilde)
            .and_then(|params| pq_factors(&params))
            .map(|(p, q)| average_fidelity(p, q));
        match value {
            Ok(value) => {
                unsafe { out.write(value) };
                QitStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Seeded Monte-Carlo average transfer fidelity with the photon-branch
/// phase shifts composed in; writes the mean and its standard error.
/// # Safety
/// `mean_out` and `std_error_out` must each be valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn qit_average_fidelity_mc(
    s_a: f64,
    s_b: f64,
    rabi_tilde: f64,
    n_samples: usize,
    seed: u64,
    mean_out: *mut f64,
    std_error_out: *mut f64,
) -> QitStatus {
    guarded(|| {
        if mean_out.is_null() || std_error_out.is_null() {
            return QitStatus::NullPointer;
        }
        let estimate = FidelityParams::new(s_a, s_b, rabi_tilde)
            .and_then(|params| average_fidelity_mc(&params, n_samples, seed));
        match estimate {
            Ok(estimate) => {
                unsafe { mean_out.write(estimate.mean) };
                unsafe { std_error_out.write(estimate.std_error) };
                QitStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Static description of a status code; never null, never to be freed.
#[no_mangle]
pub extern "C" fn qit_status_message(status: i32) -> *const std::os::raw::c_char {
    let text: &'static [u8] = match status {
        0 => b"ok\0",
        1 => b"null pointer\0",
        2 => b"invalid argument\0",
        3 => b"constraint violated\0",
        4 => b"integration failure\0",
        _ => b"internal error\0",
    };
    text.as_ptr().cast()
}
