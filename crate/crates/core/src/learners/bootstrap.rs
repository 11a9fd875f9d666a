//! Iterative refinement with powered queries `(U V_j†)^{p_j}`, `p_j = 2^j`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::learners::selection::{select_streamed, SelectionRule};
use crate::learners::LearnConfig;
use crate::metrics::davg;
use crate::nets::CandidateNet;
use crate::oracle::UnitaryOracle;
use crate::qcore::kernel;
use crate::qcore::unitary::{unitarity_defect, unitary_eigendecomposition, DenseUnitary};
use crate::scalar::{arg, cis, modulus, Real, C};
use crate::shadows::MedianOfMeansConfig;

/// `U^{num/den}` on the principal branch: eigenphases `θ ∈ (−π, π]` map
/// to `θ·num/den`.
pub fn matrix_power_root<R: Real>(u: &DenseUnitary<R>, num: i64, den: u64) -> Result<DenseUnitary<R>> {
    if den == 0 {
        return Err(Error::EigRootFailure("zero denominator".into()));
    }
    let d = u.dim();
    let (q, eig) = unitary_eigendecomposition(u.matrix())?;
    let pi = R::pi();
    let ratio = R::lit(num as f64) / R::lit(den as f64);
    let diag = DVector::from_fn(d, |i, _| {
        let mut theta = arg(eig[i]);
        if theta <= -pi + R::lit(1e-12) {
            theta = pi;
        }
        cis(theta * ratio)
    });
    let m = &q * DMatrix::from_diagonal(&diag) * q.adjoint();
    let defect = unitarity_defect(&m);
    if defect > 1e3 * R::UNITARY_TOL {
        return Err(Error::EigRootFailure(format!("recomposed matrix not unitary ({defect:.2e})")));
    }
    Ok(DenseUnitary::new_unchecked(m))
}

/// Multiplies by the phase making the trace real and nonnegative.
fn remove_trace_phase<R: Real>(w: &DenseUnitary<R>) -> DenseUnitary<R> {
    let tr = w.trace();
    let m = modulus(tr);
    if m.as_f64() < 1e-300 {
        return w.clone();
    }
    w.scale_phase(tr.conj() / C::new(m, R::zero()))
}

/// Picks one of the powered candidates `(U_i V_j†)^p`.
pub trait PowerSelector<R: Real> {
    /// `powered[i] = (U_i V†)^p` with the trace phase of `U_i V†` removed.
    fn select(&mut self, powered: &[DenseUnitary<R>], v: &DenseUnitary<R>, p: u64, eta: f64) -> Result<usize>;

    /// Queries consumed so far.
    fn queries(&self) -> usize {
        0
    }
}

/// Noiseless selection against a known target. With `accuracy = 0` this is
/// the exact nearest candidate; otherwise it returns the farthest candidate
/// still within `accuracy` in `d_avg` (a worst case for an estimator of that
/// accuracy), falling back to the nearest one.
#[derive(Clone, Debug)]
pub struct ExactSelector<R: Real> {
    target: DenseUnitary<R>,
    accuracy: f64,
}

impl<R: Real> ExactSelector<R> {
    pub fn nearest(target: DenseUnitary<R>) -> Self {
        Self { target, accuracy: 0.0 }
    }

    pub fn with_accuracy(target: DenseUnitary<R>, accuracy: f64) -> Self {
        Self { target, accuracy }
    }
}

impl<R: Real> PowerSelector<R> for ExactSelector<R> {
    fn select(&mut self, powered: &[DenseUnitary<R>], v: &DenseUnitary<R>, p: u64, _eta: f64) -> Result<usize> {
        let truth = self.target.compose(&v.adjoint())?.pow(p);
        let dist = powered.iter().map(|c| davg(c, &truth).map(|x| x.as_f64())).collect::<Result<Vec<_>>>()?;
        let admissible = dist.iter().enumerate().filter(|(_, &x)| x <= self.accuracy).max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)));
        if let Some((i, _)) = admissible {
            return Ok(i);
        }
        let mut best = 0;
        for (i, x) in dist.iter().enumerate() {
            if *x < dist[best] {
                best = i;
            }
        }
        Ok(best)
    }
}

/// Shadow-based selection on Choi states of the powered unknown: each copy
/// applies `V†` then the oracle, `p` times, to half of `|Φ⟩`.
pub struct ShadowSelector<'a, R: Real, O: UnitaryOracle<R> + ?Sized, G: Rng> {
    oracle: &'a O,
    cfg: LearnConfig,
    rng: G,
    _r: std::marker::PhantomData<R>,
}

impl<'a, R: Real, O: UnitaryOracle<R> + ?Sized, G: Rng> ShadowSelector<'a, R, O, G> {
    pub fn new(oracle: &'a O, cfg: LearnConfig, rng: G) -> Self {
        Self { oracle, cfg, rng, _r: std::marker::PhantomData }
    }
}

/// Blocked Choi vector of `w` (system qubits first).
fn choi_vector<R: Real>(w: &DenseUnitary<R>) -> DVector<C<R>> {
    let d = w.dim();
    let s = R::lit(d as f64).sqrt();
    DVector::from_fn(d * d, |idx, _| w.matrix()[(idx / d, idx % d)] / s)
}

impl<R: Real, O: UnitaryOracle<R> + ?Sized, G: Rng> PowerSelector<R> for ShadowSelector<'_, R, O, G> {
    fn select(&mut self, powered: &[DenseUnitary<R>], v: &DenseUnitary<R>, p: u64, eta: f64) -> Result<usize> {
        let k = v.qubits();
        if self.oracle.n_qubits() != k {
            return Err(Error::DimensionMismatch { expected: k, found: self.oracle.n_qubits() });
        }
        let candidates: Vec<_> = powered.iter().map(choi_vector).collect();
        let n_obs = match self.cfg.selection_rule {
            SelectionRule::OverlapArgmax => candidates.len(),
            SelectionRule::HelstromTournament => candidates.len() * (candidates.len() - 1),
        };
        let mom = match self.cfg.mom {
            Some(m) => m,
            None => MedianOfMeansConfig::guarantee(self.cfg.state_accuracy(), eta, n_obs.max(1))?,
        };
        let v_dag = v.adjoint();
        let phi = choi_vector(&DenseUnitary::<R>::identity(k));
        let wires: Vec<usize> = (0..k).collect();
        let sys: Vec<usize> = (0..k).collect();
        let oracle = self.oracle;
        let sel = select_streamed(candidates, self.cfg.selection_rule, self.cfg.shadow_scheme, mom, self.rng.random(), |_| {
            let mut s = crate::qcore::state::PureState::from_amplitudes_unnormalized(2 * k, (0..2 * k).collect(), phi.clone())?;
            for _ in 0..p {
                kernel::apply_dense(s.amps_mut(), 2 * k, &sys, v_dag.matrix());
                oracle.apply(&mut s, &wires)?;
            }
            Ok(s.amplitudes().clone())
        })?;
        Ok(sel.index)
    }

    fn queries(&self) -> usize {
        self.oracle.queries_used()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BootstrapConfig {
    pub epsilon: f64,
    pub delta: f64,
}

/// Iteration record: `v` is `V_j`, the estimate entering iteration `j`.
#[derive(Clone, Debug)]
pub struct BootstrapState<R: Real> {
    pub j: usize,
    pub p: u64,
    pub eta: f64,
    pub v: DenseUnitary<R>,
    pub t: usize,
    pub selected: usize,
}

#[derive(Clone, Debug)]
pub struct BootstrapOutcome<R: Real> {
    pub iterations: Vec<BootstrapState<R>>,
    /// `V_{t+1}`.
    pub estimate: DenseUnitary<R>,
}

impl<R: Real> BootstrapOutcome<R> {
    /// `V_1, …, V_{t+1}`.
    pub fn refined(&self) -> Vec<&DenseUnitary<R>> {
        self.iterations.iter().skip(1).map(|s| &s.v).chain(std::iter::once(&self.estimate)).collect()
    }
}

/// Number of refinement iterations after the first: `⌈log₂(1/(ε√d))⌉`.
pub fn bootstrap_rounds(epsilon: f64, dim: usize) -> usize {
    (1.0 / (epsilon * (dim as f64).sqrt())).log2().ceil().max(0.0) as usize
}

/// Runs iterations `j = 0..=t`: select `R_j` among `(U_i V_j†)^{2^j}` and set
/// `V_{j+1} = R_j^{1/2^j} V_j`, starting from `V_0 = I`.
pub fn bootstrap_learn<R: Real, S: PowerSelector<R> + ?Sized>(net: &CandidateNet<R>, cfg: BootstrapConfig, selector: &mut S) -> Result<BootstrapOutcome<R>> {
    let (_, unitaries) = net.unitaries().ok_or_else(|| Error::Config("bootstrap needs a unitary-mode net".into()))?;
    let first = unitaries.first().ok_or(Error::EmptyNet)?;
    let d = first.dim();
    if d > 8 {
        return Err(Error::InvalidRegime(format!("dimension {d} exceeds 8")));
    }
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0 / (d as f64).sqrt()) {
        return Err(Error::InvalidRegime(format!("need 0 < ε < 1/√d = {:.4}, got {}", 1.0 / (d as f64).sqrt(), cfg.epsilon)));
    }
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidRegime(format!("δ must lie in (0, 1), got {}", cfg.delta)));
    }
    let t = bootstrap_rounds(cfg.epsilon, d);
    let mut v = DenseUnitary::<R>::identity(first.qubits());
    let mut iterations = Vec::with_capacity(t + 1);
    for j in 0..=t {
        let p = 1u64 << j;
        let eta = 8f64.powi(j as i32 - t as i32 - 1) * cfg.delta;
        let v_dag = v.adjoint();
        let powered = unitaries
            .iter()
            .map(|u| Ok(remove_trace_phase(&u.compose(&v_dag)?).pow(p)))
            .collect::<Result<Vec<_>>>()?;
        let i = selector.select(&powered, &v, p, eta)?;
        let root = matrix_power_root(&powered[i], 1, p)?;
        let next = root.compose(&v)?;
        iterations.push(BootstrapState { j, p, eta, v, t, selected: i });
        v = next;
    }
    Ok(BootstrapOutcome { iterations, estimate: v })
}
