//! Acceptance suite: one `criterion N: PASS|FAIL` line per criterion on
//! stderr (written past the test harness capture), tolerances fixed below.

mod common;

use std::io::Write;
use std::sync::OnceLock;

use bgtomo::harness::{export, run_sweep, run_sweep_with_threads, Format, Statistic, SweepConfig, SweepResult};
use bgtomo::junta::identify_support_state;
use bgtomo::learners::{
    bootstrap_learn, learn_from_entangled_data, learn_from_mixed_data, learn_state, BootstrapConfig, ClassicalDataset, ExactSelector, LearnConfig,
    SelectionRule,
};
use bgtomo::metrics::{d2_prime, davg, df_prime, diamond_distance};
use bgtomo::nets::CandidateNet;
use bgtomo::oracle::FixedStateOracle;
use bgtomo::qcore::{sample_haar_state, sample_haar_vector};
use bgtomo::shadows::{collect_snapshot, estimate_observable, LowRankObservable, ShadowScheme};
use bgtomo::learners::helstrom_observable;
use bgtomo::{DenseUnitary, Error, PureState};
use common::*;
use nalgebra::DVector;

fn report(n: usize, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n}: {verdict}: {detail}");
}

// -- 1, 2: Case (a) sweep ----------------------------------------------------

/// Largest admissible `N*` at `G = 10`, and the factor-of-two window around
/// the reference value 50.
const NSTAR_CAP: usize = 100;
const NSTAR_WINDOW: (usize, usize) = (25, 100);
const MIN_R2: f64 = 0.8;
const THRESHOLD: f64 = 0.999;

fn case_a() -> &'static SweepResult {
    static RESULT: OnceLock<SweepResult> = OnceLock::new();
    RESULT.get_or_init(|| {
        let cfg = SweepConfig { trials: 1000, ..SweepConfig::default() };
        assert_eq!((cfg.n_total, cfg.region_width, cfg.gate_set_size), (10_000, 4, 2));
        run_sweep(&cfg).unwrap()
    })
}

fn nstar() -> Vec<(usize, Option<usize>)> {
    case_a().curve(Statistic::Median, THRESHOLD).unwrap().points.clone()
}

#[test]
fn criterion_01_case_a_sample_complexity() {
    let pts = nstar();
    let vals: Vec<Option<usize>> = pts.iter().map(|p| p.1).collect();
    let all = vals.iter().all(Option::is_some);
    let ns: Vec<usize> = vals.iter().map(|v| v.unwrap_or(usize::MAX)).collect();
    let monotone = ns.windows(2).all(|w| w[0] <= w[1]);
    let last = *ns.last().unwrap();
    let pass = all && monotone && last <= NSTAR_CAP && (NSTAR_WINDOW.0..=NSTAR_WINDOW.1).contains(&last);
    report(1, pass, format!("N*(G) for median fidelity ≥ {THRESHOLD}: {ns:?}; nondecreasing {monotone}; N*(10) = {last}"));
    assert!(pass);
}

#[test]
fn criterion_02_linear_trend() {
    let pts = nstar();
    let xy: Vec<(f64, f64)> = pts.iter().filter_map(|&(g, n)| n.map(|n| (g as f64, n as f64))).collect();
    let m = xy.len() as f64;
    let (mx, my) = (xy.iter().map(|p| p.0).sum::<f64>() / m, xy.iter().map(|p| p.1).sum::<f64>() / m);
    let sxy: f64 = xy.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xy.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let syy: f64 = xy.iter().map(|(_, y)| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = sxy * sxy / (sxx * syy);
    let pass = xy.len() == pts.len() && slope > 0.0 && r2 >= MIN_R2;
    report(2, pass, format!("slope {slope:.3} per gate, intercept {:.2}, R² {r2:.3} (need > 0 and ≥ {MIN_R2})", my - slope * mx));
    assert!(pass);
}

// -- 3: hypothesis selection --------------------------------------------------

const SELECTION_SUCCESS: f64 = 0.9;

/// A state at trace distance `t` from `psi`.
fn at_distance(psi: &DVector<bgtomo::Complex64>, t: f64, r: &mut rand_chacha::ChaCha8Rng) -> DVector<bgtomo::Complex64> {
    let w = sample_haar_vector::<f64, _>(psi.len(), r);
    let perp = &w - psi * psi.dotc(&w);
    let perp = &perp / c(perp.norm(), 0.0);
    let theta = t.asin();
    psi * c(theta.cos(), 0.0) + perp * c(theta.sin(), 0.0)
}

#[test]
fn criterion_03_hypothesis_selection() {
    let (eta, epsilon, delta, k) = (0.05, 0.1, 0.05, 3);
    let bound = 3.0 * eta + epsilon;
    let planted = [0.05, 0.2, 0.3, 0.6];
    let trials = 200;
    let mut r = rng(300);
    let mut ok = 0;
    let mut copies = 0;
    for _ in 0..trials {
        let truth = sample_haar_state::<f64, _>(k, (0..k).collect(), &mut r).unwrap();
        let psi = truth.amplitudes().clone();
        let states: Vec<PureState> =
            planted.iter().map(|&t| PureState::from_amplitudes(k, (0..k).collect(), at_distance(&psi, t, &mut r)).unwrap()).collect();
        let net = CandidateNet::from_states(states.clone()).unwrap();
        let oracle = FixedStateOracle::new(truth.clone());
        let cfg = LearnConfig::new(epsilon, delta).unwrap().with_rule(SelectionRule::HelstromTournament);
        let out = learn_state(&oracle, &net, &cfg, &mut r).unwrap();
        copies = out.oracle_calls;
        let d = bgtomo::metrics::trace_distance_pure(&truth, &states[out.index]).unwrap();
        ok += usize::from(d <= bound + 1e-12);
    }
    let rate = ok as f64 / trials as f64;
    let pass = rate >= SELECTION_SUCCESS;
    report(3, pass, format!("d_tr ≤ 3η + ε = {bound} in {ok}/{trials} trials ({:.1}%), {copies} copies per run", 100.0 * rate));
    assert!(pass);
}

// -- 4: shadow calibration ----------------------------------------------------

const CALIBRATION_SE: f64 = 5.0;
const VARIANCE_SLACK: f64 = 4.0;

#[test]
fn criterion_04_shadow_calibration() {
    let mut r = rng(400);
    let snapshots = 100_000;
    let mut worst_z = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for scheme in [ShadowScheme::HaarDirect, ShadowScheme::Haar, ShadowScheme::Clifford] {
        for k in 1..=3 {
            let rho = sample_haar_state::<f64, _>(k, (0..k).collect(), &mut r).unwrap();
            let proj = LowRankObservable::projector(sample_haar_vector::<f64, _>(1 << k, &mut r));
            let a = sample_haar_state::<f64, _>(k, (0..k).collect(), &mut r).unwrap();
            let b = sample_haar_state::<f64, _>(k, (0..k).collect(), &mut r).unwrap();
            let hel = helstrom_observable(&a, &b).unwrap().as_observable();
            let mut v1 = Vec::with_capacity(snapshots);
            let mut v2 = Vec::with_capacity(snapshots);
            for _ in 0..snapshots {
                let s = collect_snapshot(&rho, scheme, &mut r).unwrap();
                v1.push(estimate_observable(&s, &proj).unwrap());
                v2.push(estimate_observable(&s, &hel).unwrap());
            }
            let (m1, se1) = mean_se(&v1);
            worst_z = worst_z.max((m1 - proj.expectation(rho.amplitudes())).abs() / se1);
            let (_, se2) = mean_se(&v2);
            let var = se2 * se2 * snapshots as f64;
            worst_ratio = worst_ratio.max(var / hel.trace_sq());
        }
    }
    let pass = worst_z <= CALIBRATION_SE && worst_ratio <= VARIANCE_SLACK;
    report(
        4,
        pass,
        format!("largest bias {worst_z:.2} SE (≤ {CALIBRATION_SE}); largest Helstrom variance / tr(O²) = {worst_ratio:.3} (≤ {VARIANCE_SLACK})"),
    );
    assert!(pass);
}

// -- 5: metric identities and inequalities ------------------------------------

const IDENTITY_TOL: f64 = 1e-10;
const INEQUALITY_TOL: f64 = 1e-9;

#[test]
fn criterion_05_metric_identities() {
    let mut r = rng(500);
    let mut identity_err = 0.0f64;
    for d in [2usize, 4, 8] {
        for _ in 0..100 {
            let (u, v) = (haar(d, &mut r), haar(d, &mut r));
            let dt = pure_trace_distance(&choi_vector(&u), &choi_vector(&v));
            identity_err = identity_err.max((davg(&u, &v).unwrap() - (d as f64 / (d as f64 + 1.0)).sqrt() * dt).abs());
        }
    }
    // Violation counts per inequality over 10³ pairs (d cycling 2, 4, 8).
    let names = ["d2'/√2 ≤ d⋄/2", "d⋄/2 ≤ d2'", "d2' ≤ ‖U−V‖", "d2'/√d ≤ dF'", "dF' ≤ d2'", "dF'/2 ≤ davg", "davg ≤ dF'"];
    let mut violations = [0usize; 7];
    let mut by_dim = [0usize; 3];
    for i in 0..1000 {
        let d = [2usize, 4, 8][i % 3];
        let u = haar(d, &mut r);
        let v = if i % 2 == 0 { haar(d, &mut r) } else { perturb(&u, 10f64.powf(-3.0 + 3.0 * i as f64 / 1000.0), &mut r) };
        let (d2, dd, df, da) = (d2_prime(&u, &v).unwrap(), diamond_distance(&u, &v).unwrap(), df_prime(&u, &v).unwrap(), davg(&u, &v).unwrap());
        let spec = op_norm(&(u.matrix() - v.matrix()));
        let holds = [
            d2 / 2f64.sqrt() <= 0.5 * dd + INEQUALITY_TOL,
            0.5 * dd <= d2 + INEQUALITY_TOL,
            d2 <= spec + INEQUALITY_TOL,
            d2 / (d as f64).sqrt() <= df + INEQUALITY_TOL,
            df <= d2 + INEQUALITY_TOL,
            0.5 * df <= da + INEQUALITY_TOL,
            da <= df + INEQUALITY_TOL,
        ];
        for (c, h) in violations.iter_mut().zip(holds) {
            *c += usize::from(!h);
        }
        if !holds[0] {
            by_dim[i % 3] += 1;
        }
    }
    let pass = identity_err <= IDENTITY_TOL && violations.iter().all(|&v| v == 0);
    let counts: Vec<String> = names.iter().zip(violations).map(|(n, v)| format!("{n}: {v}")).collect();
    report(
        5,
        pass,
        format!(
            "davg vs Choi identity max error {identity_err:.1e}; violations over 1000 pairs: {}; first inequality fails for d = 2/4/8 in {:?} pairs",
            counts.join(", "),
            by_dim
        ),
    );
    assert!(pass, "the lower spectral bound fails for spectra spread over more than a half circle");
}

// -- 6: diamond distance ------------------------------------------------------

const DIAMOND_TOL: f64 = 1e-3;

#[test]
fn criterion_06_diamond_oracle() {
    let mut r = rng(600);
    let mut worst = 0.0f64;
    for d in [2usize, 4] {
        for _ in 0..50 {
            let (u, v) = (haar(d, &mut r), haar(d, &mut r));
            let oracle = diamond_oracle(&u, &v, 100_000, &mut r);
            worst = worst.max((diamond_distance(&u, &v).unwrap() - oracle).abs());
        }
    }
    let z = DenseUnitary::new(pauli(3, 1)).unwrap();
    let iz = diamond_distance(&DenseUnitary::identity(1), &z).unwrap();
    let pass = worst <= DIAMOND_TOL && iz == 2.0;
    report(6, pass, format!("max |hull value − state maximization| = {worst:.2e} over 100 pairs (≤ {DIAMOND_TOL}); d⋄(I, Z) = {iz}"));
    assert!(pass);
}

// -- 7: junta identification --------------------------------------------------

const BINOMIAL_Z: f64 = 4.0;

#[test]
fn criterion_07_junta() {
    let mut r = rng(700);
    let runs = 10_000;
    // Soundness on random states with known support.
    let mut unsound = 0;
    for i in 0..runs {
        let n = 40;
        let support = vec![i % n, (i * 7 + 3) % n].into_iter().collect::<std::collections::BTreeSet<_>>().into_iter().collect::<Vec<_>>();
        let state = sample_haar_state::<f64, _>(n, support.clone(), &mut r).unwrap();
        let est = identify_support_state(&FixedStateOracle::new(state), 1 + i % 6, &mut r);
        unsound += usize::from(!est.support.iter().all(|q| support.contains(q)));
    }
    // Detection of |+⟩ ⊗ |0⟩^{n−1}.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = PureState::from_amplitudes(10_000, vec![0], DVector::from_vec(vec![c(h, 0.0), c(h, 0.0)])).unwrap();
    let oracle = FixedStateOracle::new(plus);
    let mut worst_z = 0.0f64;
    let mut rates = Vec::new();
    for rounds in 1..=6 {
        let hits = (0..runs).filter(|_| identify_support_state(&oracle, rounds, &mut r).support == vec![0]).count();
        let p = 1.0 - 0.5f64.powi(rounds as i32);
        let se = (p * (1.0 - p) / runs as f64).sqrt();
        let rate = hits as f64 / runs as f64;
        worst_z = worst_z.max((rate - p).abs() / se);
        rates.push(format!("{rounds}: {rate:.4}/{p:.4}"));
    }
    let pass = unsound == 0 && worst_z <= BINOMIAL_Z;
    report(
        7,
        pass,
        format!("{unsound} unsound outputs in {runs} runs; detection vs 1 − 2^-N ({}), largest deviation {worst_z:.2} SE (≤ {BINOMIAL_Z})", rates.join(", ")),
    );
    assert!(pass);
}

// -- 8: bootstrap contraction -------------------------------------------------

#[test]
fn criterion_08_bootstrap_contraction() {
    let mut r = rng(800);
    let (d, epsilon) = (2usize, 0.2);
    let accuracy = epsilon / 4.0;
    let cases = 20;
    let mut failures = Vec::new();
    let mut worst_final = 0.0f64;
    let mut example = Vec::new();
    for case in 0..cases {
        let u = haar(d, &mut r);
        let cands: Vec<DenseUnitary> = (0..200).map(|i| perturb(&u, 10f64.powf(-10.0 + 10.0 * i as f64 / 199.0), &mut r)).collect();
        let net = CandidateNet::from_unitaries(vec![0], cands).unwrap();
        let mut sel = ExactSelector::with_accuracy(u.clone(), accuracy);
        let out = bootstrap_learn(&net, BootstrapConfig { epsilon, delta: 0.1 }, &mut sel).unwrap();
        let mut errs = vec![df_prime(&u, &out.iterations[0].v).unwrap()];
        errs.extend(out.refined().iter().map(|v| df_prime(&u, v).unwrap()));
        let last = *errs.last().unwrap();
        worst_final = worst_final.max(last);
        if !(errs.windows(2).all(|w| w[1] < w[0]) && last <= epsilon) {
            failures.push(case);
        }
        if case == 0 {
            example = errs;
        }
    }
    let pass = failures.is_empty();
    let shown: Vec<String> = example.iter().map(|e| format!("{e:.2e}")).collect();
    report(
        8,
        pass,
        format!(
            "exact selection within d_avg {accuracy}, d = {d}, ε = {epsilon}: strictly decreasing errors in {}/{cases} runs, worst final d_F' {worst_final:.2e}; example [{}]",
            cases - failures.len(),
            shown.join(", ")
        ),
    );
    assert!(pass, "failing runs {failures:?}");
}

// -- 9: classical data ---------------------------------------------------------

const RECONSTRUCTION_TOL: f64 = 1e-9;

#[test]
fn criterion_09_classical_learners() {
    let mut r = rng(900);
    let mut worst = 0.0f64;
    let mut incomplete = 0;
    let mut checked = 0;
    for n in 1..=3usize {
        let d = 1usize << n;
        let mut ranks = vec![1, 2, 4, d];
        ranks.retain(|&x| x <= d);
        ranks.dedup();
        for rank in ranks {
            let u = haar(d, &mut r);
            let ent = ClassicalDataset::canonical_entangled(&u, rank).unwrap();
            let mix = ClassicalDataset::canonical_mixed(&u, rank).unwrap();
            assert_eq!(ent.samples.len(), d.div_ceil(rank));
            worst = worst.max(davg(&u, &learn_from_entangled_data(&ent).unwrap()).unwrap());
            worst = worst.max(davg(&u, &learn_from_mixed_data(&mix).unwrap()).unwrap());
            for drop in 0..ent.samples.len() {
                let mut e = ent.clone();
                e.samples.remove(drop);
                let mut m = mix.clone();
                m.samples.remove(drop);
                incomplete += usize::from(matches!(learn_from_entangled_data(&e), Err(Error::IncompleteDataset(_))));
                incomplete += usize::from(matches!(learn_from_mixed_data(&m), Err(Error::IncompleteDataset(_))));
                checked += 2;
            }
        }
    }
    let pass = worst <= RECONSTRUCTION_TOL && incomplete == checked;
    report(9, pass, format!("max d_avg after reconstruction {worst:.1e} (≤ {RECONSTRUCTION_TOL}); withheld blocks rejected {incomplete}/{checked}"));
    assert!(pass);
}

// -- 10: determinism ----------------------------------------------------------

#[test]
fn criterion_10_determinism() {
    let cfg = SweepConfig { g_range: (1..=4).collect(), n_range: (1..=40).collect(), trials: 50, ..SweepConfig::default() };
    let dir = tempfile::tempdir().unwrap();
    let mut files: Vec<Vec<Vec<u8>>> = Vec::new();
    for (i, threads) in [1usize, 4, 4, 2].into_iter().enumerate() {
        let res = run_sweep_with_threads(&cfg, threads).unwrap();
        let paths = export(&res, &dir.path().join(format!("run{i}.csv")), Format::Csv).unwrap();
        files.push(paths.iter().map(|p| std::fs::read(p).unwrap()).collect());
    }
    let pass = files.windows(2).all(|w| w[0] == w[1]);
    let bytes: usize = files[0].iter().map(Vec::len).sum();
    report(10, pass, format!("4 runs on 1, 4, 4 and 2 threads produced identical CSV exports ({bytes} bytes each): {pass}"));
    assert!(pass);
}
