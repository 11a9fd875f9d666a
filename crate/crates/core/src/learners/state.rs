use rand::Rng;

use crate::error::{Error, Result};
use crate::junta::identify_support_state;
use crate::learners::selection::select_streamed;
use crate::learners::{postselect_region, union_sorted, until_kept, LearnConfig, LearnOutcome, SupportStrategy};
use crate::nets::CandidateNet;
use crate::oracle::StateOracle;
use crate::scalar::Real;
use crate::shadows::MedianOfMeansConfig;

/// Selects the net member closest to the oracle's state: optional junta
/// identification, postselection of everything outside the working region,
/// then shadow-based hypothesis selection on the region.
pub fn learn_state<R: Real, O: StateOracle<R> + ?Sized, G: Rng + ?Sized>(
    oracle: &O,
    net: &CandidateNet<R>,
    cfg: &LearnConfig,
    rng: &mut G,
) -> Result<LearnOutcome<R>> {
    let states = net.states().ok_or_else(|| Error::Config("learn_state needs a state-mode net".into()))?;
    if states.is_empty() {
        return Err(Error::EmptyNet);
    }
    if let Some(s) = states.iter().find(|s| s.n_total() != oracle.n_qubits()) {
        return Err(Error::DimensionMismatch { expected: oracle.n_qubits(), found: s.n_total() });
    }
    let start = oracle.copies_used();
    let mut region = states.iter().fold(Vec::new(), |acc, s| union_sorted(&acc, s.active()));
    let support = match cfg.support {
        SupportStrategy::CandidateRegion => None,
        SupportStrategy::Identify { rounds } => {
            let est = identify_support_state(oracle, rounds, rng);
            region = union_sorted(&region, &est.support);
            Some(est)
        }
    };
    if region.len() > cfg.cap {
        return Err(Error::SupportCapExceeded { requested: region.len(), cap: cfg.cap });
    }
    let candidates = states.iter().map(|s| s.embed(&region)).collect::<Result<Vec<_>>>()?;
    let n_obs = match cfg.selection_rule {
        crate::learners::SelectionRule::OverlapArgmax => candidates.len(),
        crate::learners::SelectionRule::HelstromTournament => candidates.len() * (candidates.len() - 1),
    };
    let mom = match cfg.mom {
        Some(m) => m,
        None => MedianOfMeansConfig::guarantee(cfg.state_accuracy(), cfg.delta, n_obs.max(1))?,
    };
    let selection = select_streamed(candidates, cfg.selection_rule, cfg.shadow_scheme, mom, rng.random(), |r| {
        until_kept(r, |r| postselect_region(&oracle.copy(), &region, r))
    })?;
    Ok(LearnOutcome {
        index: selection.index,
        circuit: net.circuit(selection.index).cloned(),
        selection,
        region,
        support,
        oracle_calls: oracle.copies_used() - start,
    })
}
