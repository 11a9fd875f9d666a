//! Learning algorithms: shadow-based hypothesis selection for states and
//! unitaries, the powered-query bootstrap, and exact learners from
//! classically described data.

pub mod bootstrap;
pub mod classical;
pub mod selection;
pub mod state;
pub mod unitary;

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::junta::SupportEstimate;
use crate::qcore::gate::Circuit;
use crate::qcore::state::{restrict, PureState, DEFAULT_CAP};
use crate::scalar::{norm_sqr, Real, C};
use crate::shadows::{MedianOfMeansConfig, ShadowScheme};

pub use bootstrap::{bootstrap_learn, matrix_power_root, BootstrapConfig, BootstrapOutcome, BootstrapState, ExactSelector, PowerSelector, ShadowSelector};
pub use classical::{learn_from_entangled_data, learn_from_mixed_data, ClassicalDataset, DataMode};
pub use selection::{argmax, helstrom_observable, HelstromObservable, Selection, SelectionRule};
pub use state::learn_state;
pub use unitary::{learn_unitary_choi, learn_unitary_no_ancilla};

/// How a learner decides which qubits to keep before postselecting the
/// rest onto `|0⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SupportStrategy {
    /// Keep exactly the qubits touched by some candidate (gate placements
    /// known to the learner).
    #[default]
    CandidateRegion,
    /// Run the junta identification for `rounds` rounds and keep its output
    /// together with the candidates' qubits.
    Identify { rounds: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub shadow_scheme: ShadowScheme,
    /// Overrides the budget derived from `(epsilon, delta)`.
    pub mom: Option<MedianOfMeansConfig>,
    pub selection_rule: SelectionRule,
    pub support: SupportStrategy,
    /// Active-support cap for the simulated copies.
    pub cap: usize,
}

impl LearnConfig {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Config(format!("ε must lie in (0, 1), got {epsilon}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!("δ must lie in (0, 1), got {delta}")));
        }
        Ok(Self {
            epsilon,
            delta,
            shadow_scheme: ShadowScheme::HaarDirect,
            mom: None,
            selection_rule: SelectionRule::OverlapArgmax,
            support: SupportStrategy::CandidateRegion,
            cap: DEFAULT_CAP,
        })
    }

    pub fn with_mom(mut self, mom: MedianOfMeansConfig) -> Self {
        self.mom = Some(mom);
        self
    }

    pub fn with_rule(mut self, rule: SelectionRule) -> Self {
        self.selection_rule = rule;
        self
    }

    pub fn with_scheme(mut self, scheme: ShadowScheme) -> Self {
        self.shadow_scheme = scheme;
        self
    }

    pub fn with_support(mut self, support: SupportStrategy) -> Self {
        self.support = support;
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    /// Per-observable accuracy needed for a trace-distance guarantee
    /// `3η + ε` under the configured rule: `ε/2` for the tournament,
    /// `ε²/2` for the argmax rule (whose overlap error enters squared).
    pub fn state_accuracy(&self) -> f64 {
        match self.selection_rule {
            SelectionRule::HelstromTournament => self.epsilon / 2.0,
            SelectionRule::OverlapArgmax => self.epsilon * self.epsilon / 2.0,
        }
    }
}

/// What a learner returns.
#[derive(Clone, Debug)]
pub struct LearnOutcome<R: Real> {
    pub index: usize,
    /// The selected circuit, when the net was built from circuits.
    pub circuit: Option<Circuit<R>>,
    pub selection: Selection,
    /// Qubits kept after postselection (system qubits for unitary learners).
    pub region: Vec<usize>,
    pub support: Option<SupportEstimate>,
    /// Copies or queries consumed, including junta rounds and discarded
    /// postselection attempts.
    pub oracle_calls: usize,
}

/// Sorted union.
pub(crate) fn union_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Attempts before a run of failed postselections is declared impossible.
const MAX_POSTSELECTION_ATTEMPTS: usize = 1 << 20;

/// Measures every active qubit outside `region` and keeps the copy only on
/// the all-zero outcome. Returns the normalized state on `region`, or
/// `None` when the copy is discarded.
pub(crate) fn postselect_region<R: Real, G: Rng + ?Sized>(state: &PureState<R>, region: &[usize], rng: &mut G) -> Result<Option<DVector<C<R>>>> {
    let mut full = state.clone();
    full.expand(region)?;
    let amps = restrict(full.amplitudes(), full.active(), region);
    if full.active().len() == region.len() {
        return Ok(Some(amps));
    }
    let p = amps.iter().fold(R::zero(), |a, z| a + norm_sqr(*z)).as_f64();
    if p < crate::junta::POSTSELECTION_FLOOR {
        return Err(Error::PostselectionImpossible(p));
    }
    if rng.random::<f64>() >= p {
        return Ok(None);
    }
    let n = R::lit(p.sqrt());
    Ok(Some(amps.map(|z| z / n)))
}

/// Repeats `draw` until postselection succeeds.
pub(crate) fn until_kept<R: Real, G: Rng + ?Sized>(
    rng: &mut G,
    mut draw: impl FnMut(&mut G) -> Result<Option<DVector<C<R>>>>,
) -> Result<DVector<C<R>>> {
    for _ in 0..MAX_POSTSELECTION_ATTEMPTS {
        if let Some(v) = draw(rng)? {
            return Ok(v);
        }
    }
    Err(Error::PostselectionImpossible(1.0 / MAX_POSTSELECTION_ATTEMPTS as f64))
}
