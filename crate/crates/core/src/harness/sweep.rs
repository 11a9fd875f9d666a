//! Sample-complexity sweeps: one snapshot pool per trial, evaluated at every
//! `N` by taking prefixes.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::config::{Case, SweepConfig, SweepMode};
use crate::learners::selection::{Scorer, SelectionRule};
use crate::learners::unitary::{candidate_choi_vectors, embed_unitary, no_ancilla_scores};
use crate::learners::{postselect_region, until_kept};
use crate::metrics::choi_pauli_frame;
use crate::nets::{assignment, build_circuit, enumerate_net, Configuration, GateSet, NetMode};
use crate::oracle::{FixedStateOracle, LocalUnitaryOracle, StateOracle, UnitaryOracle};
use crate::qcore::gate::circuit_unitary;
use crate::scalar::{norm_sqr, C};
use crate::seeding::{hash_words, rng_for};
use crate::shadows::{median_in_place, measure_vector};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Record {
    #[serde(rename = "G")]
    pub g: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub trial: usize,
    pub fidelity: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Summary {
    #[serde(rename = "G")]
    pub g: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub mean: f64,
    pub median: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Mean,
    Median,
}

/// `N*(G)` for one threshold: the smallest swept `N` from which the
/// statistic stays at or above the threshold for every larger swept `N`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Curve {
    pub statistic: Statistic,
    pub threshold: f64,
    /// `(G, N*)`, `None` when the threshold is not held at the largest `N`.
    pub points: Vec<(usize, Option<usize>)>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepResult {
    pub records: Vec<Record>,
    pub summaries: Vec<Summary>,
    pub curves: Vec<Curve>,
}

impl SweepResult {
    /// Sorts `records` by `(G, N, trial)` and derives summaries and curves.
    pub fn from_records(mut records: Vec<Record>, thresholds: &[f64]) -> Self {
        records.sort_by_key(|r| (r.g, r.n, r.trial));
        let mut summaries = Vec::new();
        let mut i = 0;
        while i < records.len() {
            let (g, n) = (records[i].g, records[i].n);
            let mut fids: Vec<f64> = records[i..].iter().take_while(|r| r.g == g && r.n == n).map(|r| r.fidelity).collect();
            i += fids.len();
            let mean = fids.iter().sum::<f64>() / fids.len() as f64;
            let median = median_even(&mut fids);
            summaries.push(Summary { g, n, mean, median });
        }
        let mut curves = Vec::new();
        for &statistic in &[Statistic::Median, Statistic::Mean] {
            for &threshold in thresholds {
                curves.push(Curve { statistic, threshold, points: threshold_curve(&summaries, statistic, threshold) });
            }
        }
        Self { records, summaries, curves }
    }

    pub fn curve(&self, statistic: Statistic, threshold: f64) -> Option<&Curve> {
        self.curves.iter().find(|c| c.statistic == statistic && c.threshold == threshold)
    }
}

/// Median with the two middle values averaged for even counts.
fn median_even(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `N*(G)` from `summaries` sorted by `(G, N)`.
pub fn threshold_curve(summaries: &[Summary], statistic: Statistic, threshold: f64) -> Vec<(usize, Option<usize>)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < summaries.len() {
        let g = summaries[i].g;
        let rows: Vec<&Summary> = summaries[i..].iter().take_while(|s| s.g == g).collect();
        i += rows.len();
        let mut star = None;
        for s in rows.iter().rev() {
            let v = match statistic {
                Statistic::Mean => s.mean,
                Statistic::Median => s.median,
            };
            if v >= threshold {
                star = Some(s.n);
            } else {
                break;
            }
        }
        out.push((g, star));
    }
    out
}

/// Neighbouring-pair placement for `g` gates.
pub fn sample_configuration<G: Rng + ?Sized>(cfg: &SweepConfig, g: usize, rng: &mut G) -> Result<Configuration> {
    let max_active = cfg.effective_max_active();
    match cfg.case {
        Case::Concentrated => {
            if cfg.region_width > max_active {
                return Err(Error::SupportCapExceeded { requested: cfg.region_width, cap: max_active });
            }
            Ok((0..g)
                .map(|_| {
                    let q = rng.random_range(0..cfg.region_width - 1);
                    (q, q + 1)
                })
                .collect())
        }
        Case::RandomPlacement => {
            if max_active < 2 {
                return Err(Error::SupportCapExceeded { requested: 2, cap: max_active });
            }
            let mut touched: Vec<usize> = Vec::new();
            let mut config = Vec::with_capacity(g);
            while config.len() < g {
                let q = rng.random_range(0..cfg.n_total - 1);
                let new = [q, q + 1].iter().filter(|x| !touched.contains(x)).count();
                if touched.len() + new > max_active {
                    // Too many fresh qubits: redraw. A placement over already
                    // touched qubits always exists once two are touched.
                    if touched.len() >= 2 {
                        continue;
                    }
                }
                for x in [q, q + 1] {
                    if !touched.contains(&x) {
                        touched.push(x);
                    }
                }
                config.push((q, q + 1));
            }
            Ok(config)
        }
    }
}

/// Snapshot scores `table[j * n_obs + o]` plus the selection machinery and
/// the fidelity of every candidate to the truth.
struct TrialData {
    table: Vec<f64>,
    n_obs: usize,
    scorer_select: Box<dyn Fn(&[f64]) -> usize + Send + Sync>,
    fidelity: Vec<f64>,
}

fn trial_data(cfg: &SweepConfig, gate_set: &GateSet<f64>, g: usize, seed: u64, n_max: usize) -> Result<TrialData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = sample_configuration(cfg, g, &mut rng)?;
    let truth_index = rng.random_range(0..gate_set.len().pow(g as u32));
    let truth = build_circuit(gate_set, cfg.n_total, &config, &assignment(truth_index, gate_set.len(), g))?;
    let snap_seed = rng.random::<u64>();
    let scheme = cfg.shadow_scheme;
    match cfg.mode {
        SweepMode::State => {
            let net = enumerate_net(gate_set, cfg.n_total, &[config], g, NetMode::State, cfg.enumeration_cap, cfg.cap)?;
            let states = net.states().expect("state net");
            let region = states.iter().fold(Vec::new(), |acc, s| crate::learners::union_sorted(&acc, s.active()));
            let candidates: Vec<DVector<C<f64>>> = states.iter().map(|s| s.embed(&region)).collect::<Result<_>>()?;
            let oracle = FixedStateOracle::from_circuit(&truth, cfg.cap)?;
            let truth_vec = oracle.copy().embed(&region)?;
            let fidelity = candidates.iter().map(|v| norm_sqr(v.dotc(&truth_vec))).collect();
            let scorer = Scorer::new(candidates, cfg.selection_rule);
            let table = score_table(&scorer, n_max, snap_seed, |r| until_kept(r, |r| postselect_region(&oracle.copy(), &region, r)), scheme)?;
            let n_obs = scorer.n_obs();
            Ok(TrialData { table, n_obs, scorer_select: Box::new(move |e| scorer.select(e)), fidelity })
        }
        SweepMode::UnitaryChoi => {
            let net = enumerate_net(gate_set, cfg.n_total, &[config], g, NetMode::Unitary, cfg.enumeration_cap, cfg.cap)?;
            let (support, unitaries) = net.unitaries().expect("unitary net");
            if 2 * support.len() > cfg.cap {
                return Err(Error::SupportCapExceeded { requested: 2 * support.len(), cap: cfg.cap });
            }
            let candidates = candidate_choi_vectors(unitaries, support, support, cfg.n_total)?;
            let pairs: Vec<usize> = support.iter().flat_map(|q| [2 * q, 2 * q + 1]).collect();
            let u_true = circuit_unitary(&truth, support, cfg.cap)?;
            let truth_vec = choi_pauli_frame(&u_true, support, cfg.n_total, 2 * support.len())?.embed(&pairs)?;
            let fidelity = candidates.iter().map(|v| norm_sqr(v.dotc(&truth_vec))).collect();
            let oracle = LocalUnitaryOracle::new(cfg.n_total, support.to_vec(), u_true)?;
            let scorer = Scorer::new(candidates, cfg.selection_rule);
            let table = score_table(&scorer, n_max, snap_seed, |r| until_kept(r, |r| postselect_region(&oracle.choi_query()?, &pairs, r)), scheme)?;
            let n_obs = scorer.n_obs();
            Ok(TrialData { table, n_obs, scorer_select: Box::new(move |e| scorer.select(e)), fidelity })
        }
        SweepMode::UnitaryNoAncilla => {
            if cfg.selection_rule != SelectionRule::OverlapArgmax {
                return Err(Error::Config("the ancilla-free learner uses the argmax rule only".into()));
            }
            let net = enumerate_net(gate_set, cfg.n_total, &[config], g, NetMode::Unitary, cfg.enumeration_cap, cfg.cap)?;
            let (support, unitaries) = net.unitaries().expect("unitary net");
            let region = support.to_vec();
            let candidates = unitaries.iter().map(|u| embed_unitary(u, support, &region)).collect::<Result<Vec<_>>>()?;
            let u_true = circuit_unitary(&truth, support, cfg.cap)?;
            let d = u_true.dim() as f64;
            let fidelity = candidates.iter().map(|v| Ok(norm_sqr(u_true.overlap(v)?) / (d * d))).collect::<Result<_>>()?;
            let oracle = LocalUnitaryOracle::new(cfg.n_total, support.to_vec(), u_true)?;
            let n_obs = candidates.len();
            let table = fill_table(n_obs, n_max, snap_seed, |r, out| no_ancilla_scores(&oracle, &region, &candidates, scheme, r, out))?;
            Ok(TrialData { table, n_obs, scorer_select: Box::new(crate::learners::selection::argmax), fidelity })
        }
    }
}

fn score_table<F>(scorer: &Scorer<f64>, n_max: usize, seed: u64, prepare: F, scheme: crate::shadows::ShadowScheme) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<DVector<C<f64>>>,
{
    let mut overlaps = Vec::new();
    fill_table(scorer.n_obs(), n_max, seed, |r, out| {
        let psi = prepare(r)?;
        let u = measure_vector(&psi, scheme, r)?;
        scorer.score(&u, &mut overlaps, out);
        Ok(())
    })
}

fn fill_table(n_obs: usize, n_max: usize, seed: u64, mut score: impl FnMut(&mut ChaCha8Rng, &mut [f64]) -> Result<()>) -> Result<Vec<f64>> {
    let mut table = vec![0.0; n_obs * n_max];
    for (j, row) in table.chunks_mut(n_obs).enumerate() {
        let mut r = rng_for(seed, j as u64);
        score(&mut r, row)?;
    }
    Ok(table)
}

/// Median-of-means estimates from `k` consecutive equal batches of
/// `⌊n/k⌋` snapshots; the last `n mod k` snapshots of the prefix are unused.
fn prefix_estimates(prefix: &[f64], n_obs: usize, n: usize, k: usize, buf: &mut Vec<f64>) -> Vec<f64> {
    let b = n / k;
    (0..n_obs)
        .map(|o| {
            buf.clear();
            buf.extend((0..k).map(|i| (prefix[(i + 1) * b * n_obs + o] - prefix[i * b * n_obs + o]) / b as f64));
            median_in_place(buf)
        })
        .collect()
}

/// Fidelities at every swept `N` for one trial.
fn run_trial(cfg: &SweepConfig, gate_set: &GateSet<f64>, g: usize, trial: usize) -> Result<Vec<Record>> {
    let seed = hash_words(&[cfg.trial_seed_base, cfg.case.code(), g as u64, trial as u64]);
    let n_max = *cfg.n_range.last().expect("validated");
    let data = trial_data(cfg, gate_set, g, seed, n_max)?;
    let n_obs = data.n_obs;
    // Row j holds the column sums of the first j snapshots.
    let mut prefix = vec![0.0; n_obs * (n_max + 1)];
    for j in 0..n_max {
        let (done, rest) = prefix.split_at_mut((j + 1) * n_obs);
        let prev = &done[j * n_obs..];
        for ((p, a), b) in rest[..n_obs].iter_mut().zip(prev).zip(&data.table[j * n_obs..(j + 1) * n_obs]) {
            *p = a + b;
        }
    }
    let m = data.fidelity.len();
    let mut buf = Vec::new();
    Ok(cfg
        .n_range
        .iter()
        .map(|&n| {
            let k = cfg.batches_for(n, m);
            let est = prefix_estimates(&prefix, n_obs, n, k, &mut buf);
            let pick = (data.scorer_select)(&est);
            Record { g, n, trial, fidelity: data.fidelity[pick].clamp(0.0, 1.0) }
        })
        .collect())
}

/// Runs every `(G, trial)` pair on the current rayon pool.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let gate_set = GateSet::<f64>::random_haar(cfg.gate_set_size, &mut ChaCha8Rng::seed_from_u64(cfg.gate_set_seed));
    let jobs: Vec<(usize, usize)> = cfg.g_range.iter().flat_map(|&g| (0..cfg.trials).map(move |t| (g, t))).collect();
    let records: Vec<Record> = jobs
        .par_iter()
        .map(|&(g, t)| run_trial(cfg, &gate_set, g, t))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(SweepResult::from_records(records, &cfg.fidelity_thresholds))
}

/// [`run_sweep`] on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(cfg: &SweepConfig, threads: usize) -> Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_sweep(cfg))
}
