use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::junta::{identify_support_choi, identify_support_unitary};
use crate::learners::selection::{select_streamed, SelectionRule};
use crate::learners::{postselect_region, union_sorted, until_kept, LearnConfig, LearnOutcome, SupportStrategy};
use crate::metrics::choi_pauli_frame;
use crate::nets::CandidateNet;
use crate::oracle::{StabilizerLabels, UnitaryOracle};
use crate::qcore::kernel;
use crate::qcore::random::{stabilizer_prep, stabilizer_vector};
use crate::qcore::unitary::DenseUnitary;
use crate::scalar::{norm_sqr, Real, C};
use crate::shadows::{measure_vector, medians, stream_batch_means, MedianOfMeansConfig, ShadowScheme};
use crate::learners::selection::{argmax, Selection};

/// `u` (acting on the ordered `support`) as a unitary on the sorted
/// superset `region`.
pub fn embed_unitary<R: Real>(u: &DenseUnitary<R>, support: &[usize], region: &[usize]) -> Result<DenseUnitary<R>> {
    if u.qubits() != support.len() {
        return Err(Error::DimensionMismatch { expected: 1 << support.len(), found: u.dim() });
    }
    if support == region {
        return Ok(u.clone());
    }
    let pos = support
        .iter()
        .map(|q| region.iter().position(|r| r == q).ok_or(Error::TargetOutsideSubset(*q)))
        .collect::<Result<Vec<_>>>()?;
    let k = region.len();
    let d = 1usize << k;
    let mut m = DMatrix::<C<R>>::identity(d, d);
    for mut col in m.column_iter_mut() {
        kernel::apply_dense(col.as_mut_slice(), k, &pos, u.matrix());
    }
    Ok(DenseUnitary::new_unchecked(m))
}

fn unitary_net<R: Real>(net: &CandidateNet<R>) -> Result<(&[usize], &[DenseUnitary<R>])> {
    let (support, unitaries) = net.unitaries().ok_or_else(|| Error::Config("unitary learners need a unitary-mode net".into()))?;
    if unitaries.is_empty() {
        return Err(Error::EmptyNet);
    }
    Ok((support, unitaries))
}

/// Product state `⊗_{q ∈ region} |x_q⟩`.
fn label_vector<R: Real>(labels: &StabilizerLabels, region: &[usize]) -> DVector<C<R>> {
    let mut v = DVector::from_element(1, C::new(R::one(), R::zero()));
    for &q in region {
        v = v.kronecker(&DVector::from_row_slice(&stabilizer_vector::<R>(labels.get(q))));
    }
    v
}

/// Learner without ancillas: each query feeds a random stabilizer product
/// `|x⟩` through the unitary, and one shadow of the output scores every
/// candidate by `(d+1)|⟨u|U_i|x⟩|² − 1`, an unbiased estimate of
/// `1 − d_Q²(U_i, U)`. The largest median-of-means score wins.
pub fn learn_unitary_no_ancilla<R: Real, O: UnitaryOracle<R> + ?Sized, G: Rng + ?Sized>(
    oracle: &O,
    net: &CandidateNet<R>,
    cfg: &LearnConfig,
    rng: &mut G,
) -> Result<LearnOutcome<R>> {
    let (net_support, unitaries) = unitary_net(net)?;
    let start = oracle.queries_used();
    let mut region = net_support.to_vec();
    region.sort_unstable();
    let support = match cfg.support {
        SupportStrategy::CandidateRegion => None,
        SupportStrategy::Identify { rounds } => {
            let est = identify_support_unitary(oracle, rounds, rng)?;
            region = union_sorted(&region, &est.support);
            Some(est)
        }
    };
    if region.len() > cfg.cap {
        return Err(Error::SupportCapExceeded { requested: region.len(), cap: cfg.cap });
    }
    let candidates = unitaries.iter().map(|u| embed_unitary(u, net_support, &region)).collect::<Result<Vec<_>>>()?;
    let mom = match cfg.mom {
        Some(m) => m,
        None => MedianOfMeansConfig::guarantee(cfg.epsilon * cfg.epsilon / 8.0, cfg.delta, candidates.len())?,
    };
    let scheme = cfg.shadow_scheme;
    let means = stream_batch_means(candidates.len(), mom, rng.random(), |r, out| {
        no_ancilla_scores(oracle, &region, &candidates, scheme, r, out)
    })?;
    let estimates = medians(&means);
    let index = argmax(&estimates);
    Ok(LearnOutcome {
        index,
        circuit: net.circuit(index).cloned(),
        selection: Selection { index, estimates, mom },
        region,
        support,
        oracle_calls: oracle.queries_used() - start,
    })
}

/// One ancilla-free query: prepares a random stabilizer product on
/// `region`, postselects the rest onto `|0⟩`, takes a shadow and writes
/// `(d+1)|⟨u|U_i|x⟩|² − 1` for every candidate into `out`.
pub(crate) fn no_ancilla_scores<R: Real, O: UnitaryOracle<R> + ?Sized, G: Rng>(
    oracle: &O,
    region: &[usize],
    candidates: &[DenseUnitary<R>],
    scheme: ShadowScheme,
    r: &mut G,
    out: &mut [f64],
) -> Result<()> {
    let labels = StabilizerLabels::new(r.random());
    let psi = until_kept(r, |r| {
        let mut s = oracle.conjugated_query(&labels)?;
        s.expand(region)?;
        let kk = s.active().len();
        let positions: Vec<usize> = region.iter().map(|q| s.position(*q).expect("expanded")).collect();
        for (&p, &q) in positions.iter().zip(region) {
            kernel::apply_one(s.amps_mut(), kk, p, &stabilizer_prep::<R>(labels.get(q)));
        }
        postselect_region(&s, region, r)
    })?;
    let u = measure_vector(&psi, scheme, r)?;
    let x = label_vector::<R>(&labels, region);
    let scale = ((1usize << region.len()) + 1) as f64;
    for (o, cand) in out.iter_mut().zip(candidates) {
        let y = cand.matrix() * &x;
        *o = scale * norm_sqr(u.dotc(&y)).as_f64() - 1.0;
    }
    Ok(())
}

/// Pauli-frame Choi states of the candidates over `region`, as vectors on
/// the pair qubits `{2q, 2q+1 : q ∈ region}`.
pub(crate) fn candidate_choi_vectors<R: Real>(
    unitaries: &[DenseUnitary<R>],
    net_support: &[usize],
    region: &[usize],
    n: usize,
) -> Result<Vec<DVector<C<R>>>> {
    let pairs: Vec<usize> = region.iter().flat_map(|q| [2 * q, 2 * q + 1]).collect();
    unitaries
        .iter()
        .map(|u| {
            let e = embed_unitary(u, net_support, region)?;
            choi_pauli_frame(&e, region, n, 2 * region.len())?.embed(&pairs)
        })
        .collect()
}

/// Learner with ancillas: hypothesis selection on Choi states, each query
/// yielding one copy of the unknown Choi state.
pub fn learn_unitary_choi<R: Real, O: UnitaryOracle<R> + ?Sized, G: Rng + ?Sized>(
    oracle: &O,
    net: &CandidateNet<R>,
    cfg: &LearnConfig,
    rng: &mut G,
) -> Result<LearnOutcome<R>> {
    let (net_support, unitaries) = unitary_net(net)?;
    let n = oracle.n_qubits();
    let start = oracle.queries_used();
    let mut region = net_support.to_vec();
    region.sort_unstable();
    let support = match cfg.support {
        SupportStrategy::CandidateRegion => None,
        SupportStrategy::Identify { rounds } => {
            let est = identify_support_choi(oracle, rounds, rng)?;
            region = union_sorted(&region, &est.support);
            Some(est)
        }
    };
    if 2 * region.len() > cfg.cap {
        return Err(Error::SupportCapExceeded { requested: 2 * region.len(), cap: cfg.cap });
    }
    let candidates = candidate_choi_vectors(unitaries, net_support, &region, n)?;
    let pairs: Vec<usize> = region.iter().flat_map(|q| [2 * q, 2 * q + 1]).collect();
    let n_obs = match cfg.selection_rule {
        SelectionRule::OverlapArgmax => candidates.len(),
        SelectionRule::HelstromTournament => candidates.len() * (candidates.len() - 1),
    };
    let mom = match cfg.mom {
        Some(m) => m,
        None => MedianOfMeansConfig::guarantee(cfg.state_accuracy(), cfg.delta, n_obs.max(1))?,
    };
    let selection = select_streamed(candidates, cfg.selection_rule, cfg.shadow_scheme, mom, rng.random(), |r| {
        until_kept(r, |r| postselect_region(&oracle.choi_query()?, &pairs, r))
    })?;
    Ok(LearnOutcome {
        index: selection.index,
        circuit: net.circuit(selection.index).cloned(),
        selection,
        region,
        support,
        oracle_calls: oracle.queries_used() - start,
    })
}
