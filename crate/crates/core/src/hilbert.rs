//! Finite tensor-product Hilbert space shared by all engines: two three-level
//! systems and a truncated resonator Fock space, with elementary operators.
//!
//! Tensor factors are ordered (qubit a, qubit b, resonator); basis labels are
//! |i⟩_a|j⟩_b|n⟩_c with i, j ∈ {0, 1, 2} and n ∈ {0..N}, indexed
//! lexicographically. All embeddings go through [`embed_single_site`] so the
//! slot order is fixed in exactly one place.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Levels per qubit: |0⟩, |1⟩ and the auxiliary excited level |2⟩.
pub const QUBIT_LEVELS: usize = 3;

/// Elementwise tolerance for the declared-Hermitian check.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Tensor slot, in the fixed factor order (qubit a, qubit b, resonator).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    QubitA,
    QubitB,
    Resonator,
}

/// Space layout parameterized by the Fock cutoff N (max photon number kept).
///
/// N ≥ 1 always: the protocol populates the single-photon state, so at least
/// |0⟩_c and |1⟩_c must exist. Total dimension is 3 · 3 · (N + 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceConfig {
    fock_cutoff: usize,
}

impl SpaceConfig {
    pub fn new(fock_cutoff: usize) -> Result<Self> {
        if fock_cutoff < 1 {
            return Err(Error::Config(format!(
                "fock cutoff must be at least 1, got {fock_cutoff}"
            )));
        }
        Ok(Self { fock_cutoff })
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_cutoff + 1
    }

    pub fn dim(&self) -> usize {
        QUBIT_LEVELS * QUBIT_LEVELS * self.fock_dim()
    }

    pub fn slot_dim(&self, slot: Slot) -> usize {
        match slot {
            Slot::QubitA | Slot::QubitB => QUBIT_LEVELS,
            Slot::Resonator => self.fock_dim(),
        }
    }

    /// Lexicographic index of |a⟩|b⟩|n⟩.
    pub fn index_of(&self, a: usize, b: usize, n: usize) -> Result<usize> {
        if a >= QUBIT_LEVELS || b >= QUBIT_LEVELS || n > self.fock_cutoff {
            return Err(Error::Config(format!(
                "basis label ({a}, {b}, {n}) outside space with fock cutoff {}",
                self.fock_cutoff
            )));
        }
        Ok((a * QUBIT_LEVELS + b) * self.fock_dim() + n)
    }

    /// Inverse of [`SpaceConfig::index_of`].
    pub fn label_of(&self, index: usize) -> Result<(usize, usize, usize)> {
        if index >= self.dim() {
            return Err(Error::Config(format!(
                "basis index {index} outside space of dimension {}",
                self.dim()
            )));
        }
        let n = index % self.fock_dim();
        let rest = index / self.fock_dim();
        Ok((rest / QUBIT_LEVELS, rest % QUBIT_LEVELS, n))
    }
}

impl Default for SpaceConfig {
    /// N = 2: the protocol populates at most one photon, and keeping n = 2
    /// exposes truncation-edge leakage instead of silently discarding it.
    fn default() -> Self {
        Self { fock_cutoff: 2 }
    }
}

/// Normalized complex amplitude vector over the tensor basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: SpaceConfig,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(space: SpaceConfig, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: amplitudes.len(),
            });
        }
        Ok(Self { space, amplitudes })
    }

    pub fn basis_state(space: SpaceConfig, a: usize, b: usize, n: usize) -> Result<Self> {
        let index = space.index_of(a, b, n)?;
        let mut amplitudes = DVector::zeros(space.dim());
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { space, amplitudes })
    }

    pub fn zero(space: SpaceConfig) -> Self {
        Self {
            space,
            amplitudes: DVector::zeros(space.dim()),
        }
    }

    pub fn space(&self) -> SpaceConfig {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, a: usize, b: usize, n: usize) -> Result<Complex64> {
        Ok(self.amplitudes[self.space.index_of(a, b, n)?])
    }

    pub fn set_amplitude(&mut self, a: usize, b: usize, n: usize, value: Complex64) -> Result<()> {
        let index = self.space.index_of(a, b, n)?;
        self.amplitudes[index] = value;
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// |‖ψ‖ − 1|, the quantity bounded by the integrator norm tolerance.
    pub fn norm_drift(&self) -> f64 {
        (self.norm() - 1.0).abs()
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    /// Total population of `level` on a qubit slot, summed over the rest.
    pub fn level_population(&self, slot: Slot, level: usize) -> Result<f64> {
        if slot == Slot::Resonator {
            return Err(Error::SlotMismatch(
                "level_population addresses qubit slots; use photon_expectation".into(),
            ));
        }
        if level >= QUBIT_LEVELS {
            return Err(Error::Config(format!("qubit level {level} out of range")));
        }
        let mut total = 0.0;
        for a in 0..QUBIT_LEVELS {
            for b in 0..QUBIT_LEVELS {
                let matches = match slot {
                    Slot::QubitA => a == level,
                    Slot::QubitB => b == level,
                    Slot::Resonator => unreachable!(),
                };
                if !matches {
                    continue;
                }
                for n in 0..self.space.fock_dim() {
                    total += self.amplitudes[self.space.index_of(a, b, n)?].norm_sqr();
                }
            }
        }
        Ok(total)
    }

    /// ⟨a⁺a⟩ of the resonator slot.
    pub fn photon_expectation(&self) -> f64 {
        let mut total = 0.0;
        for (index, amp) in self.amplitudes.iter().enumerate() {
            let n = index % self.space.fock_dim();
            total += n as f64 * amp.norm_sqr();
        }
        total
    }

    pub fn scale(&self, factor: Complex64) -> StateVector {
        Self {
            space: self.space,
            amplitudes: &self.amplitudes * factor,
        }
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(Self {
            space: self.space,
            amplitudes: &self.amplitudes + &other.amplitudes,
        })
    }
}

/// Dense complex square matrix with a declared (validated) hermiticity flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: DMatrix<Complex64>,
    hermitian: bool,
}

impl Operator {
    /// Wraps a square matrix; a `hermitian` flag is checked, never inferred.
    pub fn new(matrix: DMatrix<Complex64>, hermitian: bool) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows().max(1),
                got: matrix.ncols(),
            });
        }
        if hermitian {
            let max_deviation = (&matrix - matrix.adjoint())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            if max_deviation > HERMITIAN_TOLERANCE {
                return Err(Error::NotHermitian { max_deviation });
            }
        }
        Ok(Self { matrix, hermitian })
    }

    pub fn hermitian(matrix: DMatrix<Complex64>) -> Result<Self> {
        Self::new(matrix, true)
    }

    pub fn general(matrix: DMatrix<Complex64>) -> Result<Self> {
        Self::new(matrix, false)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
            hermitian: true,
        }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if self.dim() != state.dim() {
            return Err(Error::DimensionMismatch {
                expected: state.dim(),
                got: self.dim(),
            });
        }
        StateVector::from_amplitudes(state.space(), &self.matrix * state.amplitudes())
    }
}

/// Elementary single-site operator kinds.
///
/// `Sigma(l, m)` is |l⟩⟨m| on a qubit slot; `Annihilate`/`Create` are the
/// resonator ladder operators truncated at the Fock cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Sigma(usize, usize),
    Annihilate,
    Create,
    Identity,
}

/// Embeds a single-slot matrix into the full space by Kronecker products with
/// identities on the other slots, preserving the (a, b, resonator) order.
pub fn embed_single_site(
    local: &DMatrix<Complex64>,
    slot: Slot,
    config: &SpaceConfig,
) -> Result<DMatrix<Complex64>> {
    let expected = config.slot_dim(slot);
    if local.nrows() != expected || local.ncols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: local.nrows(),
        });
    }
    let iq = DMatrix::<Complex64>::identity(QUBIT_LEVELS, QUBIT_LEVELS);
    let ic = DMatrix::<Complex64>::identity(config.fock_dim(), config.fock_dim());
    Ok(match slot {
        Slot::QubitA => local.kronecker(&iq).kronecker(&ic),
        Slot::QubitB => iq.kronecker(local).kronecker(&ic),
        Slot::Resonator => iq.kronecker(&iq).kronecker(local),
    })
}

/// Builds an elementary operator on one slot, embedded in the full space.
pub fn single_site_operator(
    kind: OperatorKind,
    slot: Slot,
    config: &SpaceConfig,
) -> Result<Operator> {
    let local = match (kind, slot) {
        (OperatorKind::Sigma(l, m), Slot::QubitA | Slot::QubitB) => {
            if l >= QUBIT_LEVELS || m >= QUBIT_LEVELS {
                return Err(Error::Config(format!(
                    "sigma levels ({l}, {m}) out of range"
                )));
            }
            let mut local = DMatrix::zeros(QUBIT_LEVELS, QUBIT_LEVELS);
            local[(l, m)] = Complex64::new(1.0, 0.0);
            local
        }
        (OperatorKind::Annihilate, Slot::Resonator) => {
            let dim = config.fock_dim();
            DMatrix::from_fn(dim, dim, |row, col| {
                if col == row + 1 {
                    Complex64::new((col as f64).sqrt(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        }
        (OperatorKind::Create, Slot::Resonator) => {
            let dim = config.fock_dim();
            DMatrix::from_fn(dim, dim, |row, col| {
                if row == col + 1 {
                    Complex64::new((row as f64).sqrt(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        }
        (OperatorKind::Identity, slot) => {
            let dim = config.slot_dim(slot);
            DMatrix::identity(dim, dim)
        }
        (OperatorKind::Sigma(..), Slot::Resonator) => {
            return Err(Error::SlotMismatch(
                "sigma operators act on qubit slots only".into(),
            ));
        }
        (OperatorKind::Annihilate | OperatorKind::Create, Slot::QubitA | Slot::QubitB) => {
            return Err(Error::SlotMismatch(
                "ladder operators act on the resonator slot only".into(),
            ));
        }
    };
    let hermitian = matches!(kind, OperatorKind::Identity)
        || matches!(kind, OperatorKind::Sigma(l, m) if l == m);
    Operator::new(embed_single_site(&local, slot, config)?, hermitian)
}

/// Kronecker product of two operators; left factor is the more significant
/// slot under the documented (a, b, resonator) order.
pub fn tensor_product(op_a: &Operator, op_b: &Operator) -> Result<Operator> {
    let matrix = op_a.matrix().kronecker(op_b.matrix());
    Operator::new(matrix, op_a.is_hermitian() && op_b.is_hermitian())
}

/// ⟨ψ|M|ψ⟩; real within 1e-12 whenever M is flagged Hermitian.
pub fn expectation(state: &StateVector, op: &Operator) -> Result<Complex64> {
    if op.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            got: op.dim(),
        });
    }
    Ok(state.amplitudes().dotc(&(op.matrix() * state.amplitudes())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_fock_cutoff_below_one() {
        assert!(matches!(SpaceConfig::new(0), Err(Error::Config(_))));
    }

    #[test]
    fn dimension_is_nine_times_fock_dim() {
        let space = SpaceConfig::new(2).unwrap();
        assert_eq!(space.dim(), 27);
        assert_eq!(SpaceConfig::new(1).unwrap().dim(), 18);
    }

    #[test]
    fn indexing_round_trips_for_every_label() {
        let space = SpaceConfig::new(3).unwrap();
        for index in 0..space.dim() {
            let (a, b, n) = space.label_of(index).unwrap();
            assert_eq!(space.index_of(a, b, n).unwrap(), index);
        }
        assert!(space.label_of(space.dim()).is_err());
        assert!(space.index_of(0, 0, 4).is_err());
        assert!(space.index_of(3, 0, 0).is_err());
    }

    #[test]
    fn projector_on_one_slot_has_complement_trace() {
        let space = SpaceConfig::new(1).unwrap();
        let op = single_site_operator(OperatorKind::Sigma(0, 0), Slot::QubitA, &space).unwrap();
        let trace: Complex64 = op.matrix().diagonal().iter().sum();
        assert_eq!(trace, c(6.0, 0.0));
    }

    #[test]
    fn annihilate_lowers_with_sqrt_weight() {
        let space = SpaceConfig::new(2).unwrap();
        let a = single_site_operator(OperatorKind::Annihilate, Slot::Resonator, &space).unwrap();
        let state = StateVector::basis_state(space, 0, 0, 2).unwrap();
        let lowered = a.apply(&state).unwrap();
        assert_eq!(lowered.amplitude(0, 0, 1).unwrap(), c(2.0f64.sqrt(), 0.0));
        assert_eq!(lowered.amplitude(0, 0, 2).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn ladder_commutator_deviates_only_at_truncation_edge() {
        let space = SpaceConfig::new(3).unwrap();
        let a = single_site_operator(OperatorKind::Annihilate, Slot::Resonator, &space).unwrap();
        let adag = single_site_operator(OperatorKind::Create, Slot::Resonator, &space).unwrap();
        let commutator = a.matrix() * adag.matrix() - adag.matrix() * a.matrix();
        let mut edge = DMatrix::<Complex64>::identity(4, 4);
        edge[(3, 3)] = c(-3.0, 0.0);
        let expected = embed_single_site(&edge, Slot::Resonator, &space).unwrap();
        let max = (&commutator - &expected)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(max <= 1e-12, "commutator deviation {max:.3e}");
    }

    #[test]
    fn number_operator_is_diagonal_in_each_qubit_sector() {
        let space = SpaceConfig::new(2).unwrap();
        let a = single_site_operator(OperatorKind::Annihilate, Slot::Resonator, &space).unwrap();
        let adag = single_site_operator(OperatorKind::Create, Slot::Resonator, &space).unwrap();
        let number = adag.matrix() * a.matrix();
        for index in 0..space.dim() {
            let (_, _, n) = space.label_of(index).unwrap();
            assert!((number[(index, index)] - c(n as f64, 0.0)).norm() <= 1e-12);
            for other in 0..space.dim() {
                if other != index {
                    assert_eq!(number[(index, other)], c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn sigma_adjoint_swaps_levels_exactly() {
        let space = SpaceConfig::new(1).unwrap();
        for slot in [Slot::QubitA, Slot::QubitB] {
            for l in 0..QUBIT_LEVELS {
                for m in 0..QUBIT_LEVELS {
                    let lm =
                        single_site_operator(OperatorKind::Sigma(l, m), slot, &space).unwrap();
                    let ml =
                        single_site_operator(OperatorKind::Sigma(m, l), slot, &space).unwrap();
                    assert_eq!(lm.matrix().adjoint(), *ml.matrix());
                }
            }
        }
    }

    #[test]
    fn kind_slot_mismatch_is_rejected() {
        let space = SpaceConfig::new(1).unwrap();
        assert!(matches!(
            single_site_operator(OperatorKind::Sigma(0, 1), Slot::Resonator, &space),
            Err(Error::SlotMismatch(_))
        ));
        assert!(matches!(
            single_site_operator(OperatorKind::Annihilate, Slot::QubitA, &space),
            Err(Error::SlotMismatch(_))
        ));
    }

    #[test]
    fn tensor_product_of_identities_is_identity() {
        let i3 = Operator::identity(3);
        let i2 = Operator::identity(2);
        let full = tensor_product(&tensor_product(&i3, &i3).unwrap(), &i2).unwrap();
        assert_eq!(*full.matrix(), DMatrix::<Complex64>::identity(18, 18));
        assert!(full.is_hermitian());
    }

    #[test]
    fn embedded_sigma_maps_basis_states() {
        let space = SpaceConfig::new(1).unwrap();
        let op = single_site_operator(OperatorKind::Sigma(0, 2), Slot::QubitA, &space).unwrap();
        let state = StateVector::basis_state(space, 2, 1, 0).unwrap();
        let mapped = op.apply(&state).unwrap();
        assert_eq!(mapped.amplitude(0, 1, 0).unwrap(), c(1.0, 0.0));
        assert_eq!(mapped.norm(), 1.0);
    }

    #[test]
    fn hermitian_flag_is_validated() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            Operator::hermitian(m.clone()),
            Err(Error::NotHermitian { .. })
        ));
        assert!(Operator::general(m).is_ok());
    }

    #[test]
    fn expectation_reproduces_populations() {
        let space = SpaceConfig::new(1).unwrap();
        let state = StateVector::basis_state(space, 2, 1, 0).unwrap();
        let p2a = single_site_operator(OperatorKind::Sigma(2, 2), Slot::QubitA, &space).unwrap();
        assert_eq!(expectation(&state, &p2a).unwrap(), c(1.0, 0.0));

        let photon = StateVector::basis_state(space, 0, 0, 1).unwrap();
        let a = single_site_operator(OperatorKind::Annihilate, Slot::Resonator, &space).unwrap();
        let adag = single_site_operator(OperatorKind::Create, Slot::Resonator, &space).unwrap();
        let number = Operator::hermitian(adag.matrix() * a.matrix()).unwrap();
        assert_eq!(expectation(&photon, &number).unwrap(), c(1.0, 0.0));
        assert_eq!(photon.photon_expectation(), 1.0);
        assert_eq!(state.level_population(Slot::QubitA, 2).unwrap(), 1.0);
    }

    #[test]
    fn expectation_rejects_dimension_mismatch() {
        let space = SpaceConfig::new(1).unwrap();
        let state = StateVector::basis_state(space, 0, 0, 0).unwrap();
        let op = Operator::identity(5);
        assert!(matches!(
            expectation(&state, &op),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn complex_strategy() -> impl Strategy<Value = Complex64> {
        (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
    }

    fn matrix2_strategy() -> impl Strategy<Value = DMatrix<Complex64>> {
        proptest::collection::vec(complex_strategy(), 4)
            .prop_map(|v| DMatrix::from_vec(2, 2, v))
    }

    proptest! {
        #[test]
        fn label_index_bijection(cutoff in 1usize..6, raw in 0usize..100) {
            let space = SpaceConfig::new(cutoff).unwrap();
            let index = raw % space.dim();
            let (a, b, n) = space.label_of(index).unwrap();
            prop_assert_eq!(space.index_of(a, b, n).unwrap(), index);
        }

        #[test]
        fn kronecker_is_associative(
            a in matrix2_strategy(),
            b in matrix2_strategy(),
            c in matrix2_strategy(),
        ) {
            let left = a.kronecker(&b).kronecker(&c);
            let right = a.kronecker(&b.kronecker(&c));
            let max = (&left - &right).iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(max <= 1e-14);
        }
    }
}
