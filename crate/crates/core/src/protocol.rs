//! Four-step transfer schedule: construction, execution under the analytic,
//! effective, and full engines, and truth-table verification.

use num_complex::Complex64;

use crate::analytics::{rabi_rotation, INPUT_NORM_TOLERANCE};
use crate::error::{Error, Result};
use crate::hilbert::{Operator, Slot, SpaceConfig, StateVector, QUBIT_LEVELS};
use crate::model::{
    effective_raman_hamiltonian, resonant_drive_hamiltonian, DriveParams, FullHamiltonian,
    QubitId, QubitParams, ResonatorParams, Transition,
};
use crate::propagator::{evolve_constant, step_and_record, IntegratorConfig};

/// Intra-step samples used for leakage maxima and trajectory recording.
pub const TRACE_SAMPLES: usize = 401;

/// Which model propagates each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Exact closed-form step maps; coefficients are hard-coded at the
    /// symbolic special angles, so ideal paths incur zero rounding.
    Analytic,
    /// Matrix exponentials of the constant effective step Hamiltonians.
    Effective,
    /// Time-ordered integration of the rotating interaction Hamiltonian
    /// with both qubit couplings always on.
    Full,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Effective => "effective",
            Engine::Full => "full",
        }
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Engine::Analytic),
            "effective" => Ok(Engine::Effective),
            "full" => Ok(Engine::Full),
            other => Err(Error::Config(format!(
                "unknown engine '{other}', expected analytic, effective, or full"
            ))),
        }
    }
}

/// One protocol step: its drives, duration, and a note on which
/// interactions each engine keeps.
#[derive(Debug, Clone)]
pub struct Step {
    index: usize,
    drives: Vec<DriveParams>,
    duration: f64,
    engine_note: &'static str,
}

impl Step {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn drives(&self) -> &[DriveParams] {
        &self.drives
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn engine_note(&self) -> &'static str {
        self.engine_note
    }
}

/// The four-step schedule over fixed device parameters. The transfer starts
/// from (α|0⟩ + β|1⟩)_a|1⟩_b with the resonator in vacuum.
#[derive(Debug, Clone)]
pub struct Schedule {
    qubit_a: QubitParams,
    qubit_b: QubitParams,
    resonator: ResonatorParams,
    rabi_tilde: f64,
    steps: [Step; 4],
}

impl Schedule {
    pub fn qubit(&self, id: QubitId) -> &QubitParams {
        match id {
            QubitId::A => &self.qubit_a,
            QubitId::B => &self.qubit_b,
        }
    }

    pub fn resonator(&self) -> &ResonatorParams {
        &self.resonator
    }

    pub fn rabi_tilde(&self) -> f64 {
        self.rabi_tilde
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// One-based step accessor; panics outside 1..=4.
    pub fn step(&self, index: usize) -> &Step {
        assert!((1..=4).contains(&index), "step index must be 1..=4");
        &self.steps[index - 1]
    }

    pub fn total_duration(&self) -> f64 {
        self.steps.iter().map(Step::duration).sum()
    }

    /// Fastest rotating phase retained by the full engine: the larger
    /// qubit-resonator detuning (drive detunings never exceed it).
    pub fn omega_max(&self) -> f64 {
        let delta_a = self.qubit_a.omega02() - self.resonator.omega_c();
        let delta_b = self.qubit_b.omega02() - self.resonator.omega_c();
        delta_a.max(delta_b)
    }

    /// RK4 configuration resolving the fastest retained phase.
    pub fn default_integrator(&self) -> Result<IntegratorConfig> {
        IntegratorConfig::for_max_frequency(self.omega_max())
    }
}

/// Builds the four steps from device parameters:
///
///   1. Raman pulse on qubit a (drive on (1,2), Δ_μw = Δ_c, Ω = g, φ = π)
///      for t₁ = πΔ_c^a/(2g_a²);
///   2. resonant pulses on qubit a (0,2) and qubit b (1,2), φ = −π/2,
///      for t₂ = π/(2Ω̃);
///   3. resonant pulses on qubit a (1,2) and qubit b (0,2), φ = +π/2,
///      for t₃ = π/(2Ω̃);
///   4. Raman pulse on qubit b, mirroring step 1, for t₄ = πΔ_c^b/(2g_b²).
///
/// Nonuniform devices (g_a ≠ g_b, different splittings) are allowed.
pub fn build_schedule(
    qubit_a: QubitParams,
    qubit_b: QubitParams,
    resonator: ResonatorParams,
    rabi_tilde: f64,
) -> Result<Schedule> {
    if qubit_a.label() != QubitId::A || qubit_b.label() != QubitId::B {
        return Err(Error::Config(
            "schedule expects parameters labeled (a, b) in that order".into(),
        ));
    }
    let delta_a = qubit_a.omega02() - resonator.omega_c();
    let delta_b = qubit_b.omega02() - resonator.omega_c();
    for (name, delta) in [("a", delta_a), ("b", delta_b)] {
        if delta <= 0.0 {
            return Err(Error::Config(format!(
                "qubit {name} must sit above the resonator, got detuning {delta:.6e}"
            )));
        }
    }
    if !(rabi_tilde.is_finite() && rabi_tilde > 0.0) {
        return Err(Error::Config(format!(
            "pulse Rabi frequency must be positive, got {rabi_tilde:.6e}"
        )));
    }

    let pi = std::f64::consts::PI;
    let raman = |q: &QubitParams, delta: f64| -> Result<DriveParams> {
        DriveParams::new(
            q.label(),
            Transition::OneTwo,
            q.omega12() - delta,
            q.g(),
            pi,
        )
    };
    let resonant = |q: &QubitParams, tr: Transition, phase: f64| -> Result<DriveParams> {
        DriveParams::new(q.label(), tr, q.transition_frequency(tr), rabi_tilde, phase)
    };

    let t_pulse = pi / (2.0 * rabi_tilde);
    let steps = [
        Step {
            index: 1,
            drives: vec![raman(&qubit_a, delta_a)?],
            duration: pi * delta_a / (2.0 * qubit_a.g() * qubit_a.g()),
            engine_note: "raman swap on qubit a; reduced engines drop qubit b's \
                          far-detuned coupling, the full engine keeps both couplings",
        },
        Step {
            index: 2,
            drives: vec![
                resonant(&qubit_a, Transition::ZeroTwo, -pi / 2.0)?,
                resonant(&qubit_b, Transition::OneTwo, -pi / 2.0)?,
            ],
            duration: t_pulse,
            engine_note: "resonant half swaps into |2⟩ on both qubits; only the \
                          full engine keeps the off-resonant cavity couplings",
        },
        Step {
            index: 3,
            drives: vec![
                resonant(&qubit_a, Transition::OneTwo, pi / 2.0)?,
                resonant(&qubit_b, Transition::ZeroTwo, pi / 2.0)?,
            ],
            duration: t_pulse,
            engine_note: "resonant half swaps out of |2⟩ on both qubits; only the \
                          full engine keeps the off-resonant cavity couplings",
        },
        Step {
            index: 4,
            drives: vec![raman(&qubit_b, delta_b)?],
            duration: pi * delta_b / (2.0 * qubit_b.g() * qubit_b.g()),
            engine_note: "raman swap on qubit b; reduced engines drop qubit a's \
                          far-detuned coupling, the full engine keeps both couplings",
        },
    ];

    Ok(Schedule {
        qubit_a,
        qubit_b,
        resonator,
        rabi_tilde,
        steps,
    })
}

/// Exact closed-form coefficient of each step at its special angle; the
/// ±1 entries are written out symbolically so ideal paths never round.
/// Steps 1 and 4 are defined only on the idle label (lower level 0, vacuum)
/// and the single-excitation pair of the addressed qubit; a nonzero
/// amplitude elsewhere is an input error.
pub(crate) fn exact_step_map(step_index: usize, state: &StateVector) -> Result<StateVector> {
    if !(1..=4).contains(&step_index) {
        return Err(Error::Config(format!(
            "step index must be 1..=4, got {step_index}"
        )));
    }
    let space = state.space();
    if space.fock_dim() < 2 {
        return Err(Error::Config(
            "step maps need at least the single-photon level".into(),
        ));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut out = StateVector::zero(space);
    for a in 0..QUBIT_LEVELS {
        for b in 0..QUBIT_LEVELS {
            for n in 0..space.fock_dim() {
                let amp = state.amplitude(a, b, n)?;
                if amp == zero {
                    continue;
                }
                let (na, nb, nn, sign) = match step_index {
                    1 | 4 => {
                        let level = if step_index == 1 { a } else { b };
                        let (level_out, n_out) = match (level, n) {
                            (0, 0) => (0, 0),
                            (1, 0) => (0, 1),
                            (0, 1) => (1, 0),
                            _ => {
                                return Err(Error::InputState(format!(
                                    "swap step {step_index} is undefined on |{a}{b}⟩|{n}⟩_c"
                                )))
                            }
                        };
                        if step_index == 1 {
                            (level_out, b, n_out, 1.0)
                        } else {
                            (a, level_out, n_out, 1.0)
                        }
                    }
                    _ => {
                        let (na, sa) = half_swap_exact(step_index, QubitId::A, a);
                        let (nb, sb) = half_swap_exact(step_index, QubitId::B, b);
                        (na, nb, n, sa * sb)
                    }
                };
                let previous = out.amplitude(na, nb, nn)?;
                out.set_amplitude(na, nb, nn, previous + amp * sign)?;
            }
        }
    }
    Ok(out)
}

/// Quarter-period resonant rotation at the exact angle: step 2 (φ = −π/2)
/// sends the lower level to |2⟩ with +1 and |2⟩ back with −1; step 3
/// (φ = +π/2) sends |2⟩ to the lower level with +1 and the lower level to
/// |2⟩ with −1. Step 2 addresses (0,2) on a and (1,2) on b; step 3 swaps
/// the transitions.
fn half_swap_exact(step_index: usize, qubit: QubitId, level: usize) -> (usize, f64) {
    let lower = match (step_index, qubit) {
        (2, QubitId::A) | (3, QubitId::B) => 0,
        _ => 1,
    };
    if level == lower {
        if step_index == 2 {
            (2, 1.0)
        } else {
            (2, -1.0)
        }
    } else if level == 2 {
        if step_index == 2 {
            (lower, -1.0)
        } else {
            (lower, 1.0)
        }
    } else {
        (level, 1.0)
    }
}

/// Largest |2⟩ populations reached by each qubit during one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLeakage {
    pub qubit_a: f64,
    pub qubit_b: f64,
}

/// Outcome of one transfer: the recorded states, the overlap with the ideal
/// target |1⟩_a(α|0⟩ + β|1⟩)_b|0⟩_c, per-step |2⟩ maxima, and the photon
/// number left in the resonator.
#[derive(Debug, Clone)]
pub struct TransferReport {
    pub engine: Engine,
    pub step_trace: Vec<StateVector>,
    pub final_state: StateVector,
    pub fidelity_vs_ideal: f64,
    pub leakage: [StepLeakage; 4],
    pub residual_photon: f64,
}

/// Runs the transfer in the default space (photon cutoff 2).
pub fn run_transfer(
    alpha: Complex64,
    beta: Complex64,
    schedule: &Schedule,
    engine: Engine,
    cfg: &IntegratorConfig,
) -> Result<TransferReport> {
    run_transfer_in_space(alpha, beta, schedule, engine, cfg, SpaceConfig::default())
}

/// Runs the transfer in an explicit space; `cfg` is consulted only by the
/// full engine (the analytic and effective engines have closed-form or
/// exactly exponentiated steps).
pub fn run_transfer_in_space(
    alpha: Complex64,
    beta: Complex64,
    schedule: &Schedule,
    engine: Engine,
    cfg: &IntegratorConfig,
    space: SpaceConfig,
) -> Result<TransferReport> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > INPUT_NORM_TOLERANCE {
        return Err(Error::InputState(format!(
            "input must be normalized, |alpha|^2 + |beta|^2 = {norm:.15}"
        )));
    }
    if space.fock_dim() < 2 {
        return Err(Error::Config(
            "transfer needs at least the single-photon level".into(),
        ));
    }
    if engine == Engine::Full {
        cfg.validate_dt(schedule.omega_max())?;
    }

    let mut state = StateVector::zero(space);
    state.set_amplitude(0, 1, 0, alpha)?;
    state.set_amplitude(1, 1, 0, beta)?;
    let mut ideal = StateVector::zero(space);
    ideal.set_amplitude(1, 0, 0, alpha)?;
    ideal.set_amplitude(1, 1, 0, beta)?;

    let mut step_trace = vec![state.clone()];
    let mut leakage = Vec::with_capacity(4);
    let mut t0 = 0.0;
    for step in schedule.steps() {
        let (next, leak) = match engine {
            Engine::Analytic => run_step_analytic(step, &state)?,
            Engine::Effective => run_step_effective(schedule, step, &state, space)?,
            Engine::Full => run_step_full(schedule, step, &state, t0, cfg, space)?,
        };
        t0 += step.duration();
        state = next;
        step_trace.push(state.clone());
        leakage.push(leak);
    }

    let fidelity_vs_ideal = ideal.overlap(&state)?.norm_sqr();
    let residual_photon = state.photon_expectation();
    let leakage: [StepLeakage; 4] = leakage.try_into().expect("four steps");
    Ok(TransferReport {
        engine,
        final_state: state.clone(),
        step_trace,
        fidelity_vs_ideal,
        leakage,
        residual_photon,
    })
}

/// Applies one drive's resonant rotation for time `t` to every amplitude
/// pair of the addressed transition (closed form, any bystander labels).
fn rotate_qubit(state: &StateVector, drive: &DriveParams, t: f64) -> Result<StateVector> {
    let space = state.space();
    let lower = drive.transition().lower_level();
    let label = |level: usize, other: usize| match drive.target() {
        QubitId::A => (level, other),
        QubitId::B => (other, level),
    };
    let mut out = state.clone();
    for other in 0..QUBIT_LEVELS {
        for n in 0..space.fock_dim() {
            let (ia, ib) = label(lower, other);
            let (ja, jb) = label(2, other);
            let (amp_i, amp_j) = rabi_rotation(
                state.amplitude(ia, ib, n)?,
                state.amplitude(ja, jb, n)?,
                drive.rabi(),
                drive.phase(),
                t,
            );
            out.set_amplitude(ia, ib, n, amp_i)?;
            out.set_amplitude(ja, jb, n, amp_j)?;
        }
    }
    Ok(out)
}

fn leakage_of(state: &StateVector) -> Result<(f64, f64)> {
    Ok((
        state.level_population(Slot::QubitA, 2)?,
        state.level_population(Slot::QubitB, 2)?,
    ))
}

fn run_step_analytic(step: &Step, state: &StateVector) -> Result<(StateVector, StepLeakage)> {
    let next = exact_step_map(step.index(), state)?;
    let leak = match step.index() {
        // The closed-form Raman map never populates |2⟩.
        1 | 4 => StepLeakage {
            qubit_a: 0.0,
            qubit_b: 0.0,
        },
        _ => {
            let mut qubit_a = 0.0f64;
            let mut qubit_b = 0.0f64;
            for k in 0..TRACE_SAMPLES {
                let t = step.duration() * k as f64 / (TRACE_SAMPLES - 1) as f64;
                let mut sampled = state.clone();
                for drive in step.drives() {
                    sampled = rotate_qubit(&sampled, drive, t)?;
                }
                let (la, lb) = leakage_of(&sampled)?;
                qubit_a = qubit_a.max(la);
                qubit_b = qubit_b.max(lb);
            }
            StepLeakage { qubit_a, qubit_b }
        }
    };
    Ok((next, leak))
}

fn effective_step_hamiltonian(
    schedule: &Schedule,
    step: &Step,
    space: &SpaceConfig,
) -> Result<Operator> {
    match step.index() {
        1 => effective_raman_hamiltonian(
            schedule.qubit(QubitId::A),
            schedule.resonator(),
            &step.drives()[0],
            space,
        ),
        4 => effective_raman_hamiltonian(
            schedule.qubit(QubitId::B),
            schedule.resonator(),
            &step.drives()[0],
            space,
        ),
        _ => {
            let first = resonant_drive_hamiltonian(&step.drives()[0], space)?;
            let second = resonant_drive_hamiltonian(&step.drives()[1], space)?;
            Operator::hermitian(first.matrix() + second.matrix())
        }
    }
}

fn run_step_effective(
    schedule: &Schedule,
    step: &Step,
    state: &StateVector,
    space: SpaceConfig,
) -> Result<(StateVector, StepLeakage)> {
    let h = effective_step_hamiltonian(schedule, step, &space)?;
    let next = evolve_constant(state, &h, step.duration())?;
    let mut qubit_a = 0.0f64;
    let mut qubit_b = 0.0f64;
    for k in 0..TRACE_SAMPLES {
        let t = step.duration() * k as f64 / (TRACE_SAMPLES - 1) as f64;
        let sampled = evolve_constant(state, &h, t)?;
        let (la, lb) = leakage_of(&sampled)?;
        qubit_a = qubit_a.max(la);
        qubit_b = qubit_b.max(lb);
    }
    Ok((next, StepLeakage { qubit_a, qubit_b }))
}

fn run_step_full(
    schedule: &Schedule,
    step: &Step,
    state: &StateVector,
    t0: f64,
    cfg: &IntegratorConfig,
    space: SpaceConfig,
) -> Result<(StateVector, StepLeakage)> {
    let qubits = [*schedule.qubit(QubitId::A), *schedule.qubit(QubitId::B)];
    let h = FullHamiltonian::new(&qubits, schedule.resonator(), step.drives(), &space)?;
    let trace = step_and_record(state, &h, t0, step.duration(), TRACE_SAMPLES, cfg)?;
    let mut qubit_a = 0.0f64;
    let mut qubit_b = 0.0f64;
    for (_, sampled) in &trace {
        let (la, lb) = leakage_of(sampled)?;
        qubit_a = qubit_a.max(la);
        qubit_b = qubit_b.max(lb);
    }
    let next = trace.last().expect("at least two samples").1.clone();
    Ok((next, StepLeakage { qubit_a, qubit_b }))
}

/// Expected basis labels (a, b, photon) at each stage 0..=4 for the two
/// basis inputs |01⟩|0⟩_c and |11⟩|0⟩_c.
pub const TRUTH_TABLE_EXPECTED: [[(usize, usize, usize); 5]; 2] = [
    [(0, 1, 0), (0, 1, 0), (2, 2, 0), (1, 0, 0), (1, 0, 0)],
    [(1, 1, 0), (0, 1, 1), (2, 2, 1), (1, 0, 1), (1, 1, 0)],
];

/// One stage of a truth-table row: the expected label, the evolved
/// amplitude found on it, the largest per-amplitude deviation of the
/// evolved state from the expected basis state taken literally, the same
/// after removing one global phase, and that logged phase.
#[derive(Debug, Clone, Copy)]
pub struct StageCheck {
    pub stage: usize,
    pub expected: (usize, usize, usize),
    pub amplitude: Complex64,
    pub raw_deviation: f64,
    pub phase_aligned_deviation: f64,
    pub global_phase: f64,
}

#[derive(Debug, Clone)]
pub struct TruthTableRow {
    pub input: (usize, usize, usize),
    pub stages: Vec<StageCheck>,
}

#[derive(Debug, Clone)]
pub struct TruthTableReport {
    pub engine: Engine,
    pub rows: [TruthTableRow; 2],
}

impl TruthTableReport {
    pub fn max_raw_deviation(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|row| row.stages.iter())
            .map(|s| s.raw_deviation)
            .fold(0.0, f64::max)
    }

    pub fn max_phase_aligned_deviation(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|row| row.stages.iter())
            .map(|s| s.phase_aligned_deviation)
            .fold(0.0, f64::max)
    }

    /// Deviation the engine budget applies to: the effective budget is
    /// stated after per-stage global-phase alignment, the analytic and
    /// full budgets on the literal amplitudes.
    pub fn thresholded_deviation(&self) -> f64 {
        match self.engine {
            Engine::Effective => self.max_phase_aligned_deviation(),
            _ => self.max_raw_deviation(),
        }
    }
}

/// Raw-deviation budget per engine: the analytic maps are exact by
/// construction, the effective engine rounds at exponentiation accuracy,
/// and the full engine carries leakage and off-resonant phase shifts.
pub fn deviation_threshold(engine: Engine) -> f64 {
    match engine {
        Engine::Analytic => 0.0,
        Engine::Effective => 1e-8,
        Engine::Full => 0.25,
    }
}

/// Largest per-amplitude deviation |ψ_i − e^{iγ}t_i| over the basis.
fn max_amplitude_deviation(state: &StateVector, target: &StateVector, phase: Complex64) -> f64 {
    state
        .amplitudes()
        .iter()
        .zip(target.amplitudes().iter())
        .map(|(s, t)| (s - phase * t).norm())
        .fold(0.0, f64::max)
}

/// Evolves the two basis inputs and checks every stage against the expected
/// basis labels, reporting raw and phase-aligned per-amplitude deviations
/// with the removed global phase logged per stage.
pub fn verify_truth_table(
    schedule: &Schedule,
    engine: Engine,
    cfg: &IntegratorConfig,
) -> Result<TruthTableReport> {
    let space = SpaceConfig::default();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut rows = Vec::with_capacity(2);
    for (row_index, expected_row) in TRUTH_TABLE_EXPECTED.iter().enumerate() {
        let (alpha, beta) = if row_index == 0 { (one, zero) } else { (zero, one) };
        let report = run_transfer_in_space(alpha, beta, schedule, engine, cfg, space)?;
        let mut stages = Vec::with_capacity(5);
        for (stage, &(a, b, n)) in expected_row.iter().enumerate() {
            let state = &report.step_trace[stage];
            let target = StateVector::basis_state(space, a, b, n)?;
            let overlap = target.overlap(state)?;
            let global_phase = overlap.arg();
            let raw = max_amplitude_deviation(state, &target, one);
            let aligned = max_amplitude_deviation(
                state,
                &target,
                Complex64::from_polar(1.0, global_phase),
            );
            stages.push(StageCheck {
                stage,
                expected: (a, b, n),
                amplitude: overlap,
                raw_deviation: raw,
                phase_aligned_deviation: aligned,
                global_phase,
            });
        }
        rows.push(TruthTableRow {
            input: expected_row[0],
            stages,
        });
    }
    let rows: [TruthTableRow; 2] = rows.try_into().expect("two rows");
    Ok(TruthTableReport { engine, rows })
}
