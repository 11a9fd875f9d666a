//! Hypothesis selection over pure candidates from streamed shadow data.

use nalgebra::DVector;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qcore::state::PureState;
use crate::scalar::{norm_sqr, Real, C};
use crate::shadows::{measure_vector, medians, stream_batch_means, LowRankObservable, MedianOfMeansConfig, ShadowScheme};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// Estimate every `tr(σ_i ρ)` and take the largest.
    #[default]
    OverlapArgmax,
    /// Estimate `tr(A_ij ρ)` for every ordered pair and pick the candidate
    /// minimizing `max_j |tr(A_ij σ_i) − tr(A_ij ρ)|`.
    HelstromTournament,
}

impl std::str::FromStr for SelectionRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "overlap_argmax" | "argmax" => Ok(Self::OverlapArgmax),
            "helstrom_tournament" | "helstrom" => Ok(Self::HelstromTournament),
            other => Err(Error::Config(format!("unknown selection rule {other:?}"))),
        }
    }
}

/// Projector onto the positive eigenspace of `σ_i − σ_j` for pure
/// `σ_i, σ_j`: at most one eigenvector, lying in their span.
#[derive(Clone, Debug, PartialEq)]
pub struct HelstromObservable<R: Real> {
    pub eigenpairs: Vec<(R, DVector<C<R>>)>,
    pub pair_ids: (usize, usize),
}

impl<R: Real> HelstromObservable<R> {
    pub fn as_observable(&self) -> LowRankObservable<R> {
        LowRankObservable::new(self.eigenpairs.clone()).expect("consistent dimensions")
    }
}

/// Coefficients `(α, β)` with `e = α v_i + β v_j` the positive eigenvector
/// of `|v_i⟩⟨v_i| − |v_j⟩⟨v_j|`, or `None` if the states coincide.
fn helstrom_coefficients<R: Real>(vi: &DVector<C<R>>, vj: &DVector<C<R>>) -> Option<(C<R>, C<R>)> {
    let s = vi.dotc(vj);
    let t2 = R::one() - norm_sqr(s);
    if t2.as_f64() < 1e-24 {
        return None;
    }
    let t = t2.sqrt();
    // In the basis {v_i, w}, w ∝ v_j − s v_i, the eigenvector is
    // (1 + t, −s̄)/√(2 + 2t).
    let n = (R::lit(2.0) * (R::one() + t)).sqrt();
    let x1 = (R::one() + t) / n;
    let x2 = -s.conj() / C::new(n, R::zero());
    // e = x1 v_i + x2 (v_j − s v_i)/t
    let beta = x2 / C::new(t, R::zero());
    let alpha = C::new(x1, R::zero()) - beta * s;
    Some((alpha, beta))
}

/// Helstrom projector for a pair of pure states given on the same qubits
/// (aligned with `|0⟩` padding).
pub fn helstrom_observable<R: Real>(sigma_i: &PureState<R>, sigma_j: &PureState<R>) -> Result<HelstromObservable<R>> {
    if sigma_i.n_total() != sigma_j.n_total() {
        return Err(Error::DimensionMismatch { expected: sigma_i.n_total(), found: sigma_j.n_total() });
    }
    let mut union: Vec<usize> = sigma_i.active().iter().chain(sigma_j.active()).copied().collect();
    union.sort_unstable();
    union.dedup();
    let vi = sigma_i.embed(&union)?;
    let vj = sigma_j.embed(&union)?;
    Ok(helstrom_from_vectors(&vi, &vj, (0, 1)))
}

pub(crate) fn helstrom_from_vectors<R: Real>(vi: &DVector<C<R>>, vj: &DVector<C<R>>, ids: (usize, usize)) -> HelstromObservable<R> {
    let eigenpairs = match helstrom_coefficients(vi, vj) {
        None => Vec::new(),
        Some((a, b)) => {
            let mut e = vi * a + vj * b;
            let n = e.iter().fold(R::zero(), |acc, z| acc + norm_sqr(*z)).sqrt();
            e.iter_mut().for_each(|z| *z = *z / n);
            vec![(R::one(), e)]
        }
    };
    HelstromObservable { eigenpairs, pair_ids: ids }
}

/// Precomputed per-snapshot scoring for a candidate list.
pub(crate) struct Scorer<R: Real> {
    candidates: Vec<DVector<C<R>>>,
    rule: SelectionRule,
    /// Ordered pairs `(i, j, α, β, tr(A_ij σ_i))`; empty for the argmax rule.
    pairs: Vec<(usize, usize, C<R>, C<R>, f64)>,
}

impl<R: Real> Scorer<R> {
    pub fn new(candidates: Vec<DVector<C<R>>>, rule: SelectionRule) -> Self {
        let mut pairs = Vec::new();
        if rule == SelectionRule::HelstromTournament {
            let m = candidates.len();
            for i in 0..m {
                for j in 0..m {
                    if i == j {
                        continue;
                    }
                    let (a, b) = helstrom_coefficients(&candidates[i], &candidates[j]).unwrap_or((C::new(R::zero(), R::zero()), C::new(R::zero(), R::zero())));
                    let s = candidates[i].dotc(&candidates[j]);
                    // ⟨e|v_i⟩ = ᾱ + β̄ s
                    let ov = a.conj() + b.conj() * s;
                    pairs.push((i, j, a, b, norm_sqr(ov).as_f64()));
                }
            }
        }
        Self { candidates, rule, pairs }
    }

    pub fn n_obs(&self) -> usize {
        match self.rule {
            SelectionRule::OverlapArgmax => self.candidates.len(),
            SelectionRule::HelstromTournament => self.pairs.len(),
        }
    }

    pub fn dim(&self) -> usize {
        self.candidates[0].len()
    }

    /// Single-shot values for the measured vector `u`.
    pub fn score(&self, u: &DVector<C<R>>, overlaps: &mut Vec<C<R>>, out: &mut [f64]) {
        let scale = (u.len() + 1) as f64;
        overlaps.clear();
        overlaps.extend(self.candidates.iter().map(|v| v.dotc(u)));
        match self.rule {
            SelectionRule::OverlapArgmax => {
                for (o, c) in out.iter_mut().zip(overlaps.iter()) {
                    *o = scale * norm_sqr(*c).as_f64() - 1.0;
                }
            }
            SelectionRule::HelstromTournament => {
                for (o, &(i, j, a, b, _)) in out.iter_mut().zip(&self.pairs) {
                    let e = a.conj() * overlaps[i] + b.conj() * overlaps[j];
                    *o = if a == C::new(R::zero(), R::zero()) && b == C::new(R::zero(), R::zero()) {
                        0.0
                    } else {
                        scale * norm_sqr(e).as_f64() - 1.0
                    };
                }
            }
        }
    }

    /// Selected index from the median-of-means estimates (ties go to the
    /// lowest index).
    pub fn select(&self, estimates: &[f64]) -> usize {
        match self.rule {
            SelectionRule::OverlapArgmax => argmax(estimates),
            SelectionRule::HelstromTournament => {
                let m = self.candidates.len();
                let mut worst = vec![0.0f64; m];
                for (&(i, _, _, _, own), est) in self.pairs.iter().zip(estimates) {
                    worst[i] = worst[i].max((own - est).abs());
                }
                argmin(&worst)
            }
        }
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

/// Result of a streamed selection.
#[derive(Clone, Debug)]
pub struct Selection {
    pub index: usize,
    /// Median-of-means estimate per observable (per candidate for the
    /// argmax rule, per ordered pair for the tournament).
    pub estimates: Vec<f64>,
    pub mom: MedianOfMeansConfig,
}

/// Runs `mom.total()` shadows of states produced by `prepare` (one oracle
/// access each) and selects a candidate.
pub(crate) fn select_streamed<R, F>(
    candidates: Vec<DVector<C<R>>>,
    rule: SelectionRule,
    scheme: ShadowScheme,
    mom: MedianOfMeansConfig,
    seed: u64,
    prepare: F,
) -> Result<Selection>
where
    R: Real,
    F: Fn(&mut ChaCha8Rng) -> Result<DVector<C<R>>> + Sync,
{
    if candidates.is_empty() {
        return Err(Error::EmptyNet);
    }
    let scorer = Scorer::new(candidates, rule);
    let dim = scorer.dim();
    let means = stream_batch_means(scorer.n_obs(), mom, seed, |rng, out| {
        let psi = prepare(rng)?;
        if psi.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: psi.len() });
        }
        let u = measure_vector(&psi, scheme, rng)?;
        let mut overlaps = Vec::with_capacity(scorer.candidates.len());
        scorer.score(&u, &mut overlaps, out);
        Ok(())
    })?;
    let estimates = medians(&means);
    let index = scorer.select(&estimates);
    Ok(Selection { index, estimates, mom })
}
