//! Black-box access to the unknown object. Learners see only these traits.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::metrics::choi_pauli_frame;
use crate::qcore::gate::{circuit_unitary, Circuit};
use crate::qcore::kernel;
use crate::qcore::random::stabilizer_prep;
use crate::qcore::state::{run_circuit, spread, PureState, DEFAULT_CAP};
use crate::qcore::unitary::DenseUnitary;
use crate::scalar::{czero, Real};
use crate::seeding::derive_seed;

/// Copies of an unknown pure state.
pub trait StateOracle<R: Real>: Sync {
    fn n_qubits(&self) -> usize;
    /// One fresh copy.
    fn copy(&self) -> PureState<R>;
    fn copies_used(&self) -> usize;
}

/// Lazily evaluated i.i.d. uniform stabilizer labels over all qubits: the
/// label of qubit `q` is a hash of `(seed, q)`, so only the qubits a
/// computation touches are ever drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StabilizerLabels {
    seed: u64,
}

impl StabilizerLabels {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn get(&self, q: usize) -> u8 {
        (derive_seed(self.seed, q as u64) % 6) as u8
    }
}

/// Query access to an unknown unitary on `n_qubits` qubits.
pub trait UnitaryOracle<R: Real>: Sync {
    fn n_qubits(&self) -> usize;

    /// Applies the unitary to `state`, with system qubit `q` mapped to state
    /// qubit `wires[q]`.
    fn apply(&self, state: &mut PureState<R>, wires: &[usize]) -> Result<()>;

    /// `U_x† U U_x |0⟩^{⊗n}` for the stabilizer-product input `x`.
    fn conjugated_query(&self, labels: &StabilizerLabels) -> Result<PureState<R>>;

    /// The Choi state of the unitary measured in the Pauli–Choi frame:
    /// a state on `2n` qubits where pair `(2q, 2q+1)` carries the Pauli label
    /// of system qubit `q`.
    fn choi_query(&self) -> Result<PureState<R>>;

    fn queries_used(&self) -> usize;
}

/// Serves copies of a fixed state.
#[derive(Debug)]
pub struct FixedStateOracle<R: Real> {
    state: PureState<R>,
    used: AtomicUsize,
}

impl<R: Real> FixedStateOracle<R> {
    pub fn new(state: PureState<R>) -> Self {
        Self { state, used: AtomicUsize::new(0) }
    }

    /// Prepares `circuit|0⟩` once and serves copies of it.
    pub fn from_circuit(circuit: &Circuit<R>, cap: usize) -> Result<Self> {
        let zero = PureState::zero(circuit.n_qubits()).with_cap(cap)?;
        Ok(Self::new(run_circuit(circuit, &zero)?))
    }
}

impl<R: Real> StateOracle<R> for FixedStateOracle<R> {
    fn n_qubits(&self) -> usize {
        self.state.n_total()
    }

    fn copy(&self) -> PureState<R> {
        self.used.fetch_add(1, Ordering::Relaxed);
        self.state.clone()
    }

    fn copies_used(&self) -> usize {
        self.used.load(Ordering::Relaxed)
    }
}

/// Unitary that acts as the dense matrix `u` on the ordered `support` and
/// as the identity elsewhere.
#[derive(Debug)]
pub struct LocalUnitaryOracle<R: Real> {
    n: usize,
    support: Vec<usize>,
    u: DenseUnitary<R>,
    choi: OnceLock<PureState<R>>,
    used: AtomicUsize,
}

impl<R: Real> LocalUnitaryOracle<R> {
    pub fn new(n: usize, support: Vec<usize>, u: DenseUnitary<R>) -> Result<Self> {
        if u.qubits() != support.len() {
            return Err(Error::DimensionMismatch { expected: 1 << support.len(), found: u.dim() });
        }
        if support.iter().any(|&q| q >= n) {
            return Err(Error::InvalidGate("support outside the register".into()));
        }
        Ok(Self { n, support, u, choi: OnceLock::new(), used: AtomicUsize::new(0) })
    }

    /// Dense restriction of `circuit` to its own support.
    pub fn from_circuit(circuit: &Circuit<R>, cap: usize) -> Result<Self> {
        let support = circuit.support();
        let u = circuit_unitary(circuit, &support, cap)?;
        Self::new(circuit.n_qubits(), support, u)
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }
}

impl<R: Real> UnitaryOracle<R> for LocalUnitaryOracle<R> {
    fn n_qubits(&self) -> usize {
        self.n
    }

    fn apply(&self, state: &mut PureState<R>, wires: &[usize]) -> Result<()> {
        if wires.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, found: wires.len() });
        }
        self.used.fetch_add(1, Ordering::Relaxed);
        let targets: Vec<usize> = self.support.iter().map(|&q| wires[q]).collect();
        state.expand(&targets)?;
        let pos: Vec<usize> = targets.iter().map(|&t| state.position(t).expect("expanded")).collect();
        let k = state.active().len();
        kernel::apply_dense(state.amps_mut(), k, &pos, self.u.matrix());
        Ok(())
    }

    fn conjugated_query(&self, labels: &StabilizerLabels) -> Result<PureState<R>> {
        self.used.fetch_add(1, Ordering::Relaxed);
        let k = self.support.len();
        let mut amps = DVector::from_element(1 << k, czero::<R>());
        amps[0] = crate::scalar::cone();
        let slice = amps.as_mut_slice();
        let preps: Vec<_> = self.support.iter().map(|&q| stabilizer_prep::<R>(labels.get(q))).collect();
        for (p, m) in preps.iter().enumerate() {
            kernel::apply_one(slice, k, p, m);
        }
        let pos: Vec<usize> = (0..k).collect();
        kernel::apply_dense(slice, k, &pos, self.u.matrix());
        for (p, m) in preps.iter().enumerate() {
            kernel::apply_one(slice, k, p, &m.adjoint());
        }
        // `support` is ordered as the columns of `u`; the state needs sorted qubits.
        let mut sorted = self.support.clone();
        sorted.sort_unstable();
        let amps = if sorted == self.support { amps } else { reorder(&amps, &self.support, &sorted) };
        PureState::from_amplitudes_unnormalized(self.n, sorted, amps)
    }

    fn choi_query(&self) -> Result<PureState<R>> {
        self.used.fetch_add(1, Ordering::Relaxed);
        if let Some(c) = self.choi.get() {
            return Ok(c.clone());
        }
        let c = choi_pauli_frame(&self.u, &self.support, self.n, DEFAULT_CAP)?;
        Ok(self.choi.get_or_init(|| c).clone())
    }

    fn queries_used(&self) -> usize {
        self.used.load(Ordering::Relaxed)
    }
}

/// Permutes qubit order of an amplitude vector from `from` to `to` (same set).
fn reorder<R: Real>(amps: &DVector<crate::scalar::C<R>>, from: &[usize], to: &[usize]) -> DVector<crate::scalar::C<R>> {
    spread(amps, from, to)
}
