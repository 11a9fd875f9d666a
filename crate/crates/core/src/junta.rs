//! Identifying the qubits an unknown state or unitary acts on, and
//! postselecting the rest onto `|0⟩`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::oracle::{StabilizerLabels, StateOracle, UnitaryOracle};
use crate::qcore::state::{restrict, sample_computational, PureState};
use crate::scalar::{norm_sqr, Real};

/// Estimated support `Â`, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SupportEstimate {
    pub support: Vec<usize>,
    pub rounds_used: usize,
}

impl SupportEstimate {
    fn absorb(&mut self, active: &[usize], outcome: usize) {
        let k = active.len();
        for (p, &q) in active.iter().enumerate() {
            if (outcome >> (k - 1 - p)) & 1 == 1 {
                if let Err(at) = self.support.binary_search(&q) {
                    self.support.insert(at, q);
                }
            }
        }
        self.rounds_used += 1;
    }
}

/// Round count `⌈28 ln(2^{2G}/δ) / (3ε₁)⌉` after which the postselected
/// copies keep overlap at least `1 − ε₁` except with probability `δ`.
pub fn default_rounds(gates: usize, epsilon1: f64, delta: f64) -> usize {
    let ln = 2.0 * gates as f64 * std::f64::consts::LN_2 + (1.0 / delta).ln();
    (28.0 * ln / (3.0 * epsilon1)).ceil() as usize
}

/// `ε₁ = (ε/24)²`, the per-copy overlap loss tolerated for a target trace
/// distance `ε`.
pub fn epsilon1_for(epsilon: f64) -> f64 {
    (epsilon / 24.0).powi(2)
}

/// Union of the supports of `rounds` computational-basis outcomes.
pub fn identify_support_state<R: Real, O: StateOracle<R> + ?Sized, G: Rng + ?Sized>(
    oracle: &O,
    rounds: usize,
    rng: &mut G,
) -> SupportEstimate {
    let mut est = SupportEstimate::default();
    for _ in 0..rounds {
        let copy = oracle.copy();
        let b = sample_computational(&copy, rng);
        est.absorb(copy.active(), b);
    }
    est
}

/// Each round measures `U_x† U U_x |0⟩` for a fresh random stabilizer
/// product `x`.
pub fn identify_support_unitary<R: Real, O: UnitaryOracle<R> + ?Sized, G: Rng + ?Sized>(
    oracle: &O,
    rounds: usize,
    rng: &mut G,
) -> Result<SupportEstimate> {
    let mut est = SupportEstimate::default();
    for _ in 0..rounds {
        let labels = StabilizerLabels::new(rng.random());
        let out = oracle.conjugated_query(&labels)?;
        let b = sample_computational(&out, rng);
        est.absorb(out.active(), b);
    }
    Ok(est)
}

/// Each round measures the Choi state in the Pauli–Choi basis; a system
/// qubit enters `Â` when its pair reads anything other than `I`.
pub fn identify_support_choi<R: Real, O: UnitaryOracle<R> + ?Sized, G: Rng + ?Sized>(
    oracle: &O,
    rounds: usize,
    rng: &mut G,
) -> Result<SupportEstimate> {
    let mut est = SupportEstimate::default();
    for _ in 0..rounds {
        let choi = oracle.choi_query()?;
        let b = sample_computational(&choi, rng);
        let mut pairs = SupportEstimate::default();
        pairs.absorb(choi.active(), b);
        for q in pairs.support.into_iter().map(|w| w / 2) {
            if let Err(at) = est.support.binary_search(&q) {
                est.support.insert(at, q);
            }
        }
        est.rounds_used += 1;
    }
    Ok(est)
}

/// Success probability below which postselection is refused.
pub const POSTSELECTION_FLOOR: f64 = 1e-12;

/// Projects the qubits `bhat` onto `|0⟩`, renormalizes, and drops them
/// from the active set. Returns the projected state and `Tr(Λρ)`.
pub fn postselect_zero<R: Real>(state: &PureState<R>, bhat: &[usize]) -> Result<(PureState<R>, R)> {
    let keep: Vec<usize> = state.active().iter().copied().filter(|q| !bhat.contains(q)).collect();
    if keep.len() == state.active().len() {
        return Ok((state.clone(), R::one()));
    }
    let amps = restrict(state.amplitudes(), state.active(), &keep);
    let p = amps.iter().fold(R::zero(), |a, z| a + norm_sqr(*z));
    if p.as_f64() < POSTSELECTION_FLOOR {
        return Err(Error::PostselectionImpossible(p.as_f64()));
    }
    let mut out = PureState::from_amplitudes_unnormalized(state.n_total(), keep, amps)?.with_cap(state.cap())?;
    out.renormalize();
    Ok((out, p))
}
