//! Classical shadows: randomized single-copy measurements and the
//! median-of-means estimates built from them.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qcore::clifford::{sample_random_clifford, MAX_DENSE_CLIFFORD};
use crate::qcore::random::{gaussian, sample_haar_unitary};
use crate::qcore::state::{sample_index, PureState};
use crate::qcore::unitary::DenseUnitary;
use crate::scalar::{cis, norm_sqr, Real, C};
use crate::seeding::rng_for;

/// Random rotation applied before the computational-basis measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShadowScheme {
    /// Haar-random global unitary, sampled explicitly.
    Haar,
    /// Uniform random Clifford (at most six qubits).
    Clifford,
    /// Samples the measured vector `C†|b⟩` of the Haar scheme directly from
    /// its exact law in `O(d)` work, without building `C`.
    HaarDirect,
}

impl std::str::FromStr for ShadowScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(Self::Haar),
            "clifford" => Ok(Self::Clifford),
            "haar_direct" => Ok(Self::HaarDirect),
            other => Err(Error::Config(format!("unknown shadow scheme {other:?}"))),
        }
    }
}

/// One shadow record. `measured = C†|b⟩` determines every estimate; the
/// rotation and outcome are kept when the scheme materializes them.
#[derive(Clone, Debug)]
pub struct Snapshot<R: Real> {
    pub k: usize,
    pub scheme: ShadowScheme,
    pub rotation: Option<DenseUnitary<R>>,
    pub outcome: Option<usize>,
    pub measured: DVector<C<R>>,
}

fn rotate_and_measure<R: Real, G: Rng + ?Sized>(amps: &DVector<C<R>>, c: &DenseUnitary<R>, rng: &mut G) -> (usize, DVector<C<R>>) {
    let rotated = c.matrix() * amps;
    let b = sample_index(rotated.as_slice(), rng);
    let u = c.matrix().row(b).adjoint();
    (b, u)
}

/// Measured vector for the direct Haar law: `|⟨u|ψ⟩|² ~ Beta(2, d−1)` and
/// the orthogonal part is Haar on `ψ^⊥`.
pub(crate) fn haar_direct_vector<R: Real, G: Rng + ?Sized>(psi: &DVector<C<R>>, rng: &mut G) -> DVector<C<R>> {
    let d = psi.len();
    if d == 1 {
        return psi.clone();
    }
    let x: f64 = Beta::new(2.0, (d - 1) as f64).expect("valid beta").sample(rng);
    let mut w = DVector::<C<R>>::from_fn(d, |_, _| gaussian(rng));
    let proj = psi.dotc(&w);
    w -= psi * proj;
    let wn = w.iter().fold(R::zero(), |a, z| a + norm_sqr(*z)).sqrt();
    let phase = cis(R::lit(rng.random::<f64>() * std::f64::consts::TAU));
    let a = R::lit(x.sqrt());
    let b = R::lit((1.0 - x).max(0.0).sqrt()) / wn;
    psi * (phase * a) + w * C::new(b, R::zero())
}

/// The measured vector `C†|b⟩` for one shadow of `psi` under `scheme`.
pub fn measure_vector<R: Real, G: Rng + ?Sized>(psi: &DVector<C<R>>, scheme: ShadowScheme, rng: &mut G) -> Result<DVector<C<R>>> {
    let d = psi.len();
    let k = d.trailing_zeros() as usize;
    Ok(match scheme {
        ShadowScheme::HaarDirect => haar_direct_vector(psi, rng),
        ShadowScheme::Haar => rotate_and_measure(psi, &sample_haar_unitary(d, rng), rng).1,
        ShadowScheme::Clifford => {
            if k > MAX_DENSE_CLIFFORD {
                return Err(Error::SupportCapExceeded { requested: k, cap: MAX_DENSE_CLIFFORD });
            }
            rotate_and_measure(psi, &sample_random_clifford(k, rng), rng).1
        }
    })
}

/// Draws one snapshot of `state` over its active qubits.
pub fn collect_snapshot<R: Real, G: Rng + ?Sized>(state: &PureState<R>, scheme: ShadowScheme, rng: &mut G) -> Result<Snapshot<R>> {
    let k = state.active().len();
    let psi = state.amplitudes();
    match scheme {
        ShadowScheme::HaarDirect => Ok(Snapshot { k, scheme, rotation: None, outcome: None, measured: haar_direct_vector(psi, rng) }),
        ShadowScheme::Haar | ShadowScheme::Clifford => {
            if scheme == ShadowScheme::Clifford && k > MAX_DENSE_CLIFFORD {
                return Err(Error::SupportCapExceeded { requested: k, cap: MAX_DENSE_CLIFFORD });
            }
            let c = if scheme == ShadowScheme::Haar { sample_haar_unitary(1 << k, rng) } else { sample_random_clifford(k, rng) };
            let (b, u) = rotate_and_measure(psi, &c, rng);
            Ok(Snapshot { k, scheme, rotation: Some(c), outcome: Some(b), measured: u })
        }
    }
}

/// Snapshot with a caller-chosen rotation.
pub fn collect_snapshot_with_rotation<R: Real, G: Rng + ?Sized>(
    state: &PureState<R>,
    rotation: DenseUnitary<R>,
    scheme: ShadowScheme,
    rng: &mut G,
) -> Result<Snapshot<R>> {
    let k = state.active().len();
    if rotation.dim() != 1 << k {
        return Err(Error::DimensionMismatch { expected: 1 << k, found: rotation.dim() });
    }
    let (b, u) = rotate_and_measure(state.amplitudes(), &rotation, rng);
    Ok(Snapshot { k, scheme, rotation: Some(rotation), outcome: Some(b), measured: u })
}

/// Observable in spectral form `Σ λ_m |v_m⟩⟨v_m|` with orthonormal `v_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRankObservable<R: Real> {
    pairs: Vec<(R, DVector<C<R>>)>,
}

impl<R: Real> LowRankObservable<R> {
    pub fn new(pairs: Vec<(R, DVector<C<R>>)>) -> Result<Self> {
        if let Some((_, v0)) = pairs.first() {
            if let Some((_, v)) = pairs.iter().find(|(_, v)| v.len() != v0.len()) {
                return Err(Error::DimensionMismatch { expected: v0.len(), found: v.len() });
            }
        }
        Ok(Self { pairs })
    }

    pub fn projector(v: DVector<C<R>>) -> Self {
        Self { pairs: vec![(R::one(), v)] }
    }

    pub fn pairs(&self) -> &[(R, DVector<C<R>>)] {
        &self.pairs
    }

    pub fn trace(&self) -> R {
        self.pairs.iter().fold(R::zero(), |a, (l, _)| a + *l)
    }

    pub fn trace_sq(&self) -> R {
        self.pairs.iter().fold(R::zero(), |a, (l, _)| a + *l * *l)
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, psi: &DVector<C<R>>) -> R {
        self.pairs.iter().fold(R::zero(), |a, (l, v)| a + *l * norm_sqr(v.dotc(psi)))
    }
}

/// Single-shot value `tr(O ρ̂)` with `ρ̂ = (d+1)|u⟩⟨u| − I`.
pub fn estimate_observable<R: Real>(snapshot: &Snapshot<R>, obs: &LowRankObservable<R>) -> Result<R> {
    single_shot(&snapshot.measured, obs)
}

pub(crate) fn single_shot<R: Real>(u: &DVector<C<R>>, obs: &LowRankObservable<R>) -> Result<R> {
    let d = u.len();
    let scale = R::lit((d + 1) as f64);
    let mut acc = R::zero();
    for (l, v) in &obs.pairs {
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: v.len() });
        }
        acc += *l * scale * norm_sqr(v.dotc(u));
    }
    Ok(acc - obs.trace())
}

/// `K` batches of `N`; `K` is kept odd.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MedianOfMeansConfig {
    batch_size: usize,
    batches: usize,
}

impl MedianOfMeansConfig {
    /// Rounds an even `batches` up to the next odd number.
    pub fn new(batch_size: usize, batches: usize) -> Result<Self> {
        if batch_size == 0 || batches == 0 {
            return Err(Error::Config("median of means needs N ≥ 1 and K ≥ 1".into()));
        }
        Ok(Self { batch_size, batches: batches | 1 })
    }

    /// Budget that estimates `m` observables of single-shot variance at most
    /// 3 to within `ε` simultaneously, except with probability `δ`:
    /// `K = ⌈2 ln(2m/δ)⌉`, `N = ⌈102/ε²⌉`.
    pub fn guarantee(epsilon: f64, delta: f64, m: usize) -> Result<Self> {
        if !(epsilon > 0.0 && delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!("need ε > 0 and 0 < δ < 1, got ε = {epsilon}, δ = {delta}")));
        }
        Self::new(
            (102.0 / (epsilon * epsilon)).ceil() as usize,
            guarantee_batches(delta, m),
        )
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn batches(&self) -> usize {
        self.batches
    }

    pub fn total(&self) -> usize {
        self.batch_size * self.batches
    }
}

/// `⌈2 ln(2m/δ)⌉` rounded up to odd.
pub fn guarantee_batches(delta: f64, m: usize) -> usize {
    ((2.0 * (2.0 * m.max(1) as f64 / delta).ln()).ceil().max(1.0) as usize) | 1
}

pub(crate) fn median_in_place(v: &mut [f64]) -> f64 {
    let mid = v.len() / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).expect("finite estimate"));
    *m
}

/// Median over `K` consecutive batch means.
pub fn median_of_means<R: Real>(values: &[R], cfg: MedianOfMeansConfig) -> Result<R> {
    if values.len() != cfg.total() {
        return Err(Error::LengthMismatch { expected: cfg.total(), found: values.len() });
    }
    let mut means: Vec<f64> = values
        .chunks(cfg.batch_size)
        .map(|b| b.iter().map(|x| x.as_f64()).sum::<f64>() / cfg.batch_size as f64)
        .collect();
    Ok(R::lit(median_in_place(&mut means)))
}

/// Per-observable median-of-means over one shared snapshot set.
pub fn estimate_all_candidates<R: Real>(
    snapshots: &[Snapshot<R>],
    observables: &[LowRankObservable<R>],
    cfg: MedianOfMeansConfig,
) -> Result<Vec<R>> {
    if snapshots.len() != cfg.total() {
        return Err(Error::LengthMismatch { expected: cfg.total(), found: snapshots.len() });
    }
    let mut values = vec![R::zero(); snapshots.len()];
    observables
        .iter()
        .map(|o| {
            for (v, s) in values.iter_mut().zip(snapshots) {
                *v = estimate_observable(s, o)?;
            }
            median_of_means(&values, cfg)
        })
        .collect()
}

/// Snapshots per parallel work unit. Reduction happens in unit order, so
/// results do not depend on the number of threads.
const CHUNK: usize = 1024;

/// Batch means of a streamed estimator: snapshot `j` draws from
/// `rng_for(seed, j)` and writes one value per observable through `score`.
/// Returns `batch_means[b][o]`.
pub fn stream_batch_means<F>(n_obs: usize, cfg: MedianOfMeansConfig, seed: u64, score: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) -> Result<()> + Sync,
{
    let total = cfg.total();
    let n_chunks = total.div_ceil(CHUNK);
    let partials: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(total);
            let first_batch = lo / cfg.batch_size();
            let last_batch = (hi - 1) / cfg.batch_size();
            let mut sums = vec![0.0; (last_batch - first_batch + 1) * n_obs];
            let mut buf = vec![0.0; n_obs];
            for j in lo..hi {
                let mut rng = rng_for(seed, j as u64);
                score(&mut rng, &mut buf)?;
                let b = j / cfg.batch_size() - first_batch;
                for (s, v) in sums[b * n_obs..(b + 1) * n_obs].iter_mut().zip(&buf) {
                    *s += v;
                }
            }
            Ok(sums)
        })
        .collect::<Result<_>>()?;
    let mut means = vec![vec![0.0; n_obs]; cfg.batches()];
    for (c, part) in partials.iter().enumerate() {
        let first_batch = c * CHUNK / cfg.batch_size();
        for (bi, row) in part.chunks(n_obs.max(1)).enumerate() {
            for (m, v) in means[first_batch + bi].iter_mut().zip(row) {
                *m += v;
            }
        }
    }
    let n = cfg.batch_size() as f64;
    means.iter_mut().for_each(|row| row.iter_mut().for_each(|m| *m /= n));
    Ok(means)
}

/// Column-wise medians of `batch_means`.
pub fn medians(batch_means: &[Vec<f64>]) -> Vec<f64> {
    let n_obs = batch_means.first().map_or(0, |r| r.len());
    let mut col = vec![0.0; batch_means.len()];
    (0..n_obs)
        .map(|o| {
            for (c, row) in col.iter_mut().zip(batch_means) {
                *c = row[o];
            }
            median_in_place(&mut col)
        })
        .collect()
}
