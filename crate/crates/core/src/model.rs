//! Hamiltonian builders: the full interaction-picture qubit–resonator–drive
//! Hamiltonian, the effective Raman Hamiltonian obtained by adiabatic
//! elimination of level |2⟩, and the resonant single-transition drive.
//!
//! Simulation frame: interaction picture with respect to the free Hamiltonian
//! Σ_l E_l σ_ll + ω_c a⁺a, so every rotating phase oscillates at a detuning
//! rather than at a carrier frequency. Rotating-wave form is taken as given.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{single_site_operator, Operator, OperatorKind, Slot, SpaceConfig};

/// Relative tolerance for the Δ_c = Δ_μw constraint of the Raman construction.
pub const DETUNING_MATCH_TOLERANCE: f64 = 1e-9;

/// Which qubit a parameter set or drive addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum QubitId {
    A,
    B,
}

impl QubitId {
    pub fn slot(self) -> Slot {
        match self {
            QubitId::A => Slot::QubitA,
            QubitId::B => Slot::QubitB,
        }
    }
}

/// Driven transition of a Λ-type qubit; the shared upper level is |2⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Transition {
    ZeroTwo,
    OneTwo,
}

impl Transition {
    pub fn lower_level(self) -> usize {
        match self {
            Transition::ZeroTwo => 0,
            Transition::OneTwo => 1,
        }
    }
}

/// Physical qubit parameters: transition frequencies and resonator coupling.
///
/// The Λ configuration requires ω₀₂ > ω₁₂ > 0 (|0⟩ below |1⟩ below |2⟩); the
/// resonator couples to the |0⟩↔|2⟩ transition with strength g > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitParams {
    label: QubitId,
    omega02: f64,
    omega12: f64,
    g: f64,
}

impl QubitParams {
    pub fn new(label: QubitId, omega02: f64, omega12: f64, g: f64) -> Result<Self> {
        if !(omega02.is_finite() && omega12.is_finite() && g.is_finite()) {
            return Err(Error::Config("qubit frequencies must be finite".into()));
        }
        if !(omega02 > omega12 && omega12 > 0.0) {
            return Err(Error::Config(format!(
                "lambda configuration requires omega02 > omega12 > 0, got ({omega02:.6e}, {omega12:.6e})"
            )));
        }
        if g <= 0.0 {
            return Err(Error::Config(format!(
                "resonator coupling must be positive, got {g:.6e}"
            )));
        }
        Ok(Self {
            label,
            omega02,
            omega12,
            g,
        })
    }

    pub fn label(&self) -> QubitId {
        self.label
    }

    pub fn omega02(&self) -> f64 {
        self.omega02
    }

    pub fn omega12(&self) -> f64 {
        self.omega12
    }

    /// Implied |0⟩↔|1⟩ splitting; absolute level energies are never needed.
    pub fn omega01(&self) -> f64 {
        self.omega02 - self.omega12
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn transition_frequency(&self, transition: Transition) -> f64 {
        match transition {
            Transition::ZeroTwo => self.omega02,
            Transition::OneTwo => self.omega12,
        }
    }
}

/// Resonator mode frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonatorParams {
    omega_c: f64,
}

impl ResonatorParams {
    pub fn new(omega_c: f64) -> Result<Self> {
        if !(omega_c.is_finite() && omega_c > 0.0) {
            return Err(Error::Config(format!(
                "resonator frequency must be positive, got {omega_c:.6e}"
            )));
        }
        Ok(Self { omega_c })
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }
}

/// Classical microwave pulse addressing one transition of one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    target: QubitId,
    transition: Transition,
    omega_uw: f64,
    rabi: f64,
    phase: f64,
}

impl DriveParams {
    pub fn new(
        target: QubitId,
        transition: Transition,
        omega_uw: f64,
        rabi: f64,
        phase: f64,
    ) -> Result<Self> {
        if !(omega_uw.is_finite() && omega_uw > 0.0) {
            return Err(Error::Config(format!(
                "pulse frequency must be positive, got {omega_uw:.6e}"
            )));
        }
        if !(rabi.is_finite() && rabi >= 0.0) {
            return Err(Error::Config(format!(
                "Rabi frequency must be non-negative, got {rabi:.6e}"
            )));
        }
        if !(phase.is_finite() && -std::f64::consts::PI < phase && phase <= std::f64::consts::PI) {
            return Err(Error::Config(format!(
                "drive phase must lie in (-pi, pi], got {phase:.6e}"
            )));
        }
        Ok(Self {
            target,
            transition,
            omega_uw,
            rabi,
            phase,
        })
    }

    pub fn target(&self) -> QubitId {
        self.target
    }

    pub fn transition(&self) -> Transition {
        self.transition
    }

    pub fn omega_uw(&self) -> f64 {
        self.omega_uw
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }
}

/// Detunings of the resonator and drive from their addressed transitions.
/// Derived-only: always recomputed from parameters, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detunings {
    pub delta_c: f64,
    pub delta_uw: f64,
}

/// Δ_c = ω₀₂ − ω_c and Δ_μw = ω₁₂ − ω_μw for a drive paired with its qubit.
pub fn detunings(q: &QubitParams, r: &ResonatorParams, d: &DriveParams) -> Result<Detunings> {
    if d.target != q.label {
        return Err(Error::TargetMismatch(format!(
            "drive targets {:?}, parameters describe {:?}",
            d.target, q.label
        )));
    }
    Ok(Detunings {
        delta_c: q.omega02 - r.omega_c,
        delta_uw: q.omega12 - d.omega_uw,
    })
}

/// One rotating term M e^{i(φ − ωt)} + h.c., with M stored as sparse triplets.
#[derive(Debug, Clone)]
struct RotatingTerm {
    entries: Vec<(usize, usize, Complex64)>,
    frequency: f64,
    phase: f64,
}

/// Precompiled full interaction-picture Hamiltonian
///
///   H(t) = Σ_k g_k (a⁺ σ₀₂⁻(k) e^{−iΔ_c^k t} + h.c.)
///        + Σ_d Ω_d (σ⁻_d e^{i(φ_d − Δ_d t)} + h.c.),
///
/// where Δ_d is the detuning of drive d from its addressed transition and
/// σ⁻_d = |lower⟩⟨2| on the addressed qubit. Time is global: phases are
/// referenced to t = 0 of the whole schedule, so steps compose coherently.
///
/// Qubits are passed as a subset: a qubit absent from the slice contributes
/// no coupling term, which realizes the idealized decoupling of far-detuned
/// transitions as exactly zero coupling.
#[derive(Debug, Clone)]
pub struct FullHamiltonian {
    dim: usize,
    space: SpaceConfig,
    terms: Vec<RotatingTerm>,
}

impl FullHamiltonian {
    pub fn new(
        qubits: &[QubitParams],
        r: &ResonatorParams,
        drives: &[DriveParams],
        config: &SpaceConfig,
    ) -> Result<Self> {
        if qubits.len() > 2 {
            return Err(Error::Config("at most two qubits are supported".into()));
        }
        if qubits.len() == 2 && qubits[0].label == qubits[1].label {
            return Err(Error::Config("qubit labels must be distinct".into()));
        }
        let mut terms = Vec::new();
        let create = single_site_operator(OperatorKind::Create, Slot::Resonator, config)?;
        for q in qubits {
            let lower =
                single_site_operator(OperatorKind::Sigma(0, 2), q.label.slot(), config)?;
            let matrix = (create.matrix() * lower.matrix()) * Complex64::new(q.g, 0.0);
            terms.push(RotatingTerm {
                entries: sparse_entries(&matrix),
                frequency: q.omega02 - r.omega_c,
                phase: 0.0,
            });
        }
        for d in drives {
            let q = qubits
                .iter()
                .find(|q| q.label == d.target)
                .ok_or_else(|| {
                    Error::TargetMismatch(format!(
                        "drive targets {:?}, which is not among the coupled qubits",
                        d.target
                    ))
                })?;
            let lower = single_site_operator(
                OperatorKind::Sigma(d.transition.lower_level(), 2),
                d.target.slot(),
                config,
            )?;
            let matrix = lower.matrix() * Complex64::new(d.rabi, 0.0);
            terms.push(RotatingTerm {
                entries: sparse_entries(&matrix),
                frequency: q.transition_frequency(d.transition) - d.omega_uw,
                phase: d.phase,
            });
        }
        Ok(Self {
            dim: config.dim(),
            space: *config,
            terms,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn space(&self) -> SpaceConfig {
        self.space
    }

    /// Largest rotating-phase frequency present; 0 for a static Hamiltonian.
    pub fn max_frequency(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.frequency.abs())
            .fold(0.0, f64::max)
    }

    /// Writes H(t) into `out`, overwriting its contents.
    pub fn evaluate_into(&self, t: f64, out: &mut DMatrix<Complex64>) {
        out.fill(Complex64::new(0.0, 0.0));
        for term in &self.terms {
            let rotation = Complex64::from_polar(1.0, term.phase - term.frequency * t);
            for &(row, col, value) in &term.entries {
                let rotated = value * rotation;
                out[(row, col)] += rotated;
                out[(col, row)] += rotated.conj();
            }
        }
    }

    pub fn at(&self, t: f64) -> Operator {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        self.evaluate_into(t, &mut out);
        Operator::hermitian(out).expect("rotating-term construction is Hermitian by pairing")
    }
}

fn sparse_entries(matrix: &DMatrix<Complex64>) -> Vec<(usize, usize, Complex64)> {
    let mut entries = Vec::new();
    for col in 0..matrix.ncols() {
        for row in 0..matrix.nrows() {
            let value = matrix[(row, col)];
            if value != Complex64::new(0.0, 0.0) {
                entries.push((row, col, value));
            }
        }
    }
    entries
}

/// Full Hamiltonian at a single time; see [`FullHamiltonian`] for the terms.
pub fn full_interaction_hamiltonian(
    t: f64,
    qubits: &[QubitParams; 2],
    r: &ResonatorParams,
    drives: &[DriveParams],
    config: &SpaceConfig,
) -> Result<Operator> {
    Ok(FullHamiltonian::new(qubits, r, drives, config)?.at(t))
}

/// Effective Raman Hamiltonian after adiabatic elimination of level |2⟩:
///
///   H = −[(Ω²/Δ_μw) σ₁₁ + (g²/Δ_c) a⁺a σ₀₀ + (Ωg/Δ_c)(e^{−iφ} a⁺σ₀₁⁻ + h.c.)]
///
/// embedded on the addressed qubit; valid only for Δ_c = Δ_μw. The drive
/// phase φ survives elimination on the flip-flop term; φ = 0 is the plain
/// printed form, and the schedule's Raman pulses use φ = π so that the
/// composed half-period swap has coefficient exactly +1.
pub fn effective_raman_hamiltonian(
    q: &QubitParams,
    r: &ResonatorParams,
    d: &DriveParams,
    config: &SpaceConfig,
) -> Result<Operator> {
    if d.transition != Transition::OneTwo {
        return Err(Error::Config(
            "raman construction requires the drive on the (1,2) transition".into(),
        ));
    }
    let dets = detunings(q, r, d)?;
    let scale = dets.delta_c.abs().max(dets.delta_uw.abs());
    if (dets.delta_c - dets.delta_uw).abs() > DETUNING_MATCH_TOLERANCE * scale {
        return Err(Error::DetuningMismatch {
            delta_c: dets.delta_c,
            delta_uw: dets.delta_uw,
        });
    }
    if dets.delta_c <= 0.0 {
        return Err(Error::Domain(format!(
            "raman construction requires a positive detuning, got {:.6e}",
            dets.delta_c
        )));
    }
    let slot = q.label.slot();
    let sigma11 = single_site_operator(OperatorKind::Sigma(1, 1), slot, config)?;
    let sigma00 = single_site_operator(OperatorKind::Sigma(0, 0), slot, config)?;
    let sigma01 = single_site_operator(OperatorKind::Sigma(0, 1), slot, config)?;
    let a = single_site_operator(OperatorKind::Annihilate, Slot::Resonator, config)?;
    let adag = single_site_operator(OperatorKind::Create, Slot::Resonator, config)?;

    let stark_drive = sigma11.matrix() * Complex64::new(d.rabi * d.rabi / dets.delta_uw, 0.0);
    let stark_photon = (adag.matrix() * a.matrix() * sigma00.matrix())
        * Complex64::new(q.g * q.g / dets.delta_c, 0.0);
    let flip = (adag.matrix() * sigma01.matrix())
        * Complex64::from_polar(d.rabi * q.g / dets.delta_c, -d.phase);
    let matrix = -(stark_drive + stark_photon + &flip + flip.adjoint());
    Operator::hermitian(matrix)
}

/// Resonant drive Hamiltonian Ω̃ (e^{iφ}|i⟩⟨j| + h.c.) on the addressed
/// transition, with |i⟩ the lower level and |j⟩ = |2⟩.
pub fn resonant_drive_hamiltonian(d: &DriveParams, config: &SpaceConfig) -> Result<Operator> {
    let lower = single_site_operator(
        OperatorKind::Sigma(d.transition.lower_level(), 2),
        d.target.slot(),
        config,
    )?;
    let half = lower.matrix() * Complex64::from_polar(d.rabi, d.phase);
    Operator::hermitian(&half + half.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const G: f64 = 3.0e9;
    const OMEGA_C: f64 = 1.0e11;

    fn qubit(label: QubitId, ratio: f64) -> QubitParams {
        let omega02 = OMEGA_C + ratio * G;
        QubitParams::new(label, omega02, omega02 - 1.0e10, G).unwrap()
    }

    fn resonator() -> ResonatorParams {
        ResonatorParams::new(OMEGA_C).unwrap()
    }

    #[test]
    fn qubit_params_enforce_lambda_ordering() {
        assert!(QubitParams::new(QubitId::A, 1.0e10, 2.0e10, G).is_err());
        assert!(QubitParams::new(QubitId::A, 2.0e10, -1.0, G).is_err());
        assert!(QubitParams::new(QubitId::A, 2.0e10, 1.0e10, 0.0).is_err());
        assert!(QubitParams::new(QubitId::A, 2.0e10, 1.0e10, G).is_ok());
    }

    #[test]
    fn drive_phase_range_is_half_open() {
        let mk = |phase| DriveParams::new(QubitId::A, Transition::OneTwo, 1.0e10, G, phase);
        assert!(mk(PI).is_ok());
        assert!(mk(-PI).is_err());
        assert!(mk(0.0).is_ok());
        assert!(DriveParams::new(QubitId::A, Transition::OneTwo, 1.0e10, -1.0, 0.0).is_err());
    }

    #[test]
    fn detunings_follow_their_definitions() {
        let q = qubit(QubitId::A, 10.0);
        let r = resonator();
        let resonant = DriveParams::new(QubitId::A, Transition::OneTwo, q.omega12(), G, 0.0).unwrap();
        let dets = detunings(&q, &r, &resonant).unwrap();
        assert_eq!(dets.delta_c, 10.0 * G);
        assert_eq!(dets.delta_uw, 0.0);

        let on_resonance = QubitParams::new(QubitId::A, OMEGA_C, OMEGA_C - 1.0, G).unwrap();
        let d2 =
            DriveParams::new(QubitId::A, Transition::OneTwo, 1.0e10, G, 0.0).unwrap();
        assert_eq!(detunings(&on_resonance, &r, &d2).unwrap().delta_c, 0.0);

        let mismatched = DriveParams::new(QubitId::B, Transition::OneTwo, 1.0e10, G, 0.0).unwrap();
        assert!(matches!(
            detunings(&q, &r, &mismatched),
            Err(Error::TargetMismatch(_))
        ));
    }

    #[test]
    fn empty_system_gives_zero_hamiltonian() {
        let space = SpaceConfig::default();
        let h = FullHamiltonian::new(&[], &resonator(), &[], &space).unwrap();
        let at = h.at(1.0e-9);
        assert!(at.matrix().iter().all(|z| *z == c(0.0, 0.0)));
        assert_eq!(h.max_frequency(), 0.0);
    }

    #[test]
    fn resonant_coupling_is_static_jaynes_cummings() {
        let space = SpaceConfig::default();
        let q = QubitParams::new(QubitId::A, OMEGA_C, OMEGA_C - 1.0e10, G).unwrap();
        let h = FullHamiltonian::new(&[q], &resonator(), &[], &space).unwrap();
        let at0 = h.at(0.0);
        let at1 = h.at(3.7e-10);
        assert_eq!(at0.matrix(), at1.matrix());

        let adag = single_site_operator(OperatorKind::Create, Slot::Resonator, &space).unwrap();
        let lower = single_site_operator(OperatorKind::Sigma(0, 2), Slot::QubitA, &space).unwrap();
        let half = adag.matrix() * lower.matrix() * c(G, 0.0);
        let expected = &half + half.adjoint();
        assert_eq!(*at0.matrix(), expected);
    }

    #[test]
    fn rotating_phase_is_periodic_in_the_detuning() {
        let space = SpaceConfig::default();
        let q = qubit(QubitId::A, 10.0);
        let h = FullHamiltonian::new(&[q], &resonator(), &[], &space).unwrap();
        let t = 2.3e-10;
        let period = 2.0 * PI / (10.0 * G);
        let first = h.at(t);
        let second = h.at(t + period);
        let max = (first.matrix() - second.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(max <= 1e-12 * G, "periodicity deviation {max:.3e}");
    }

    #[test]
    fn couplings_add_per_qubit() {
        let space = SpaceConfig::default();
        let qa = qubit(QubitId::A, 10.0);
        let qb = qubit(QubitId::B, 10.0);
        let r = resonator();
        let t = 1.1e-10;
        let both = FullHamiltonian::new(&[qa, qb], &r, &[], &space).unwrap().at(t);
        let only_a = FullHamiltonian::new(&[qa], &r, &[], &space).unwrap().at(t);
        let only_b = FullHamiltonian::new(&[qb], &r, &[], &space).unwrap().at(t);
        assert_eq!(*both.matrix(), only_a.matrix() + only_b.matrix());
    }

    #[test]
    fn drive_must_target_a_coupled_qubit() {
        let space = SpaceConfig::default();
        let qa = qubit(QubitId::A, 10.0);
        let d = DriveParams::new(QubitId::B, Transition::OneTwo, 1.0e10, G, 0.0).unwrap();
        assert!(matches!(
            FullHamiltonian::new(&[qa], &resonator(), &[d], &space),
            Err(Error::TargetMismatch(_))
        ));
    }

    #[test]
    fn raman_hamiltonian_with_zero_rabi_keeps_only_the_photon_stark_term() {
        let space = SpaceConfig::default();
        let q = qubit(QubitId::A, 10.0);
        let r = resonator();
        let uw = q.omega12() - 10.0 * G;
        let d = DriveParams::new(QubitId::A, Transition::OneTwo, uw, 0.0, 0.0).unwrap();
        let h = effective_raman_hamiltonian(&q, &r, &d, &space).unwrap();

        let a = single_site_operator(OperatorKind::Annihilate, Slot::Resonator, &space).unwrap();
        let adag = single_site_operator(OperatorKind::Create, Slot::Resonator, &space).unwrap();
        let sigma00 = single_site_operator(OperatorKind::Sigma(0, 0), Slot::QubitA, &space).unwrap();
        let expected =
            -(adag.matrix() * a.matrix() * sigma00.matrix()) * c(G * G / (10.0 * G), 0.0);
        assert_eq!(*h.matrix(), expected);
    }

    #[test]
    fn raman_flip_flop_coefficient_is_g_squared_over_detuning() {
        let space = SpaceConfig::default();
        let q = qubit(QubitId::A, 10.0);
        let r = resonator();
        let uw = q.omega12() - 10.0 * G;
        for (phase, sign) in [(0.0, -1.0), (PI, 1.0)] {
            let d = DriveParams::new(QubitId::A, Transition::OneTwo, uw, G, phase).unwrap();
            let h = effective_raman_hamiltonian(&q, &r, &d, &space).unwrap();
            let row = space.index_of(0, 0, 1).unwrap();
            let col = space.index_of(1, 0, 0).unwrap();
            let coupling = h.matrix()[(row, col)];
            let expected = c(sign * G / 10.0, 0.0);
            assert!(
                (coupling - expected).norm() <= 1e-6 * G,
                "phase {phase}: coupling {coupling}, expected {expected}"
            );
        }
    }

    #[test]
    fn raman_construction_rejects_mismatched_detunings() {
        let space = SpaceConfig::default();
        let q = qubit(QubitId::A, 10.0);
        let r = resonator();
        let uw = q.omega12() - 9.0 * G;
        let d = DriveParams::new(QubitId::A, Transition::OneTwo, uw, G, 0.0).unwrap();
        assert!(matches!(
            effective_raman_hamiltonian(&q, &r, &d, &space),
            Err(Error::DetuningMismatch { .. })
        ));

        let wrong_transition =
            DriveParams::new(QubitId::A, Transition::ZeroTwo, uw, G, 0.0).unwrap();
        assert!(effective_raman_hamiltonian(&q, &r, &wrong_transition, &space).is_err());
    }

    #[test]
    fn resonant_drive_matches_its_closed_form() {
        let space = SpaceConfig::default();
        let rabi = 3.0e10;
        let phase = -PI / 2.0;
        let d = DriveParams::new(QubitId::B, Transition::ZeroTwo, OMEGA_C, rabi, phase).unwrap();
        let h = resonant_drive_hamiltonian(&d, &space).unwrap();
        let row = space.index_of(0, 0, 0).unwrap();
        let col = space.index_of(0, 2, 0).unwrap();
        assert_eq!(h.matrix()[(row, col)], Complex64::from_polar(rabi, phase));
        assert_eq!(
            h.matrix()[(col, row)],
            Complex64::from_polar(rabi, -phase)
        );

        let off = DriveParams::new(QubitId::B, Transition::ZeroTwo, OMEGA_C, 0.0, 0.0).unwrap();
        let zero = resonant_drive_hamiltonian(&off, &space).unwrap();
        assert!(zero.matrix().iter().all(|z| *z == c(0.0, 0.0)));
    }
}
