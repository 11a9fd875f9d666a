use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::qcore::gate::Circuit;
use crate::qcore::kernel;
use crate::scalar::{cone, czero, norm_sqr, Real, C};

pub const DEFAULT_CAP: usize = 20;

/// Pure state on `n_total` qubits, stored only over the sorted `active`
/// subset; every other qubit is implicitly `|0⟩`. `active[0]` is the most
/// significant bit of the amplitude index.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState<R: Real> {
    n_total: usize,
    active: Vec<usize>,
    amps: DVector<C<R>>,
    cap: usize,
}

impl<R: Real> PureState<R> {
    /// `|0⟩^{⊗n}`.
    pub fn zero(n_total: usize) -> Self {
        Self { n_total, active: Vec::new(), amps: DVector::from_element(1, cone()), cap: DEFAULT_CAP }
    }

    /// Builds a state from amplitudes over `active` (must be sorted,
    /// distinct, in range) and checks normalization.
    pub fn from_amplitudes(n_total: usize, active: Vec<usize>, amps: DVector<C<R>>) -> Result<Self> {
        let s = Self::from_amplitudes_unnormalized(n_total, active, amps)?;
        let n = s.norm_sqr();
        if (n - R::one()).abs().as_f64() > R::NORM_TOL.max(1e3 * f64::EPSILON) {
            return Err(Error::InvalidState(format!("norm² = {n}")));
        }
        Ok(s)
    }

    pub(crate) fn from_amplitudes_unnormalized(n_total: usize, active: Vec<usize>, amps: DVector<C<R>>) -> Result<Self> {
        if active.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidState("active set must be strictly increasing".into()));
        }
        if let Some(&q) = active.last() {
            if q >= n_total {
                return Err(Error::InvalidState(format!("active qubit {q} outside {n_total} qubits")));
            }
        }
        if amps.len() != 1usize << active.len() {
            return Err(Error::DimensionMismatch { expected: 1 << active.len(), found: amps.len() });
        }
        if active.len() > DEFAULT_CAP {
            return Err(Error::SupportCapExceeded { requested: active.len(), cap: DEFAULT_CAP });
        }
        Ok(Self { n_total, active, amps, cap: DEFAULT_CAP })
    }

    /// Computational basis state `|b⟩` over the given active qubits, where
    /// `bits` is read with `active[0]` most significant.
    pub fn basis(n_total: usize, active: Vec<usize>, bits: usize) -> Result<Self> {
        let mut amps = DVector::from_element(1 << active.len(), czero());
        if bits >= amps.len() {
            return Err(Error::InvalidState(format!("basis index {bits} out of range")));
        }
        amps[bits] = cone();
        Self::from_amplitudes(n_total, active, amps)
    }

    pub fn with_cap(mut self, cap: usize) -> Result<Self> {
        if self.active.len() > cap {
            return Err(Error::SupportCapExceeded { requested: self.active.len(), cap });
        }
        self.cap = cap;
        Ok(self)
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn amplitudes(&self) -> &DVector<C<R>> {
        &self.amps
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn norm_sqr(&self) -> R {
        self.amps.iter().fold(R::zero(), |a, z| a + norm_sqr(*z))
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [C<R>] {
        self.amps.as_mut_slice()
    }

    /// Adds `qubits` (in `|0⟩`) to the active set.
    pub fn expand(&mut self, qubits: &[usize]) -> Result<()> {
        let mut merged = self.active.clone();
        for &q in qubits {
            if q >= self.n_total {
                return Err(Error::InvalidState(format!("qubit {q} outside {} qubits", self.n_total)));
            }
            merged.push(q);
        }
        merged.sort_unstable();
        merged.dedup();
        if merged.len() == self.active.len() {
            return Ok(());
        }
        if merged.len() > self.cap {
            return Err(Error::SupportCapExceeded { requested: merged.len(), cap: self.cap });
        }
        self.amps = spread(&self.amps, &self.active, &merged);
        self.active = merged;
        Ok(())
    }

    /// Amplitudes over a superset `target` of the active qubits.
    pub fn embed(&self, target: &[usize]) -> Result<DVector<C<R>>> {
        for q in &self.active {
            if !target.contains(q) {
                return Err(Error::TargetOutsideSubset(*q));
            }
        }
        Ok(spread(&self.amps, &self.active, target))
    }

    /// `⟨self|other⟩` with implicit `|0⟩` padding on both sides.
    pub fn inner(&self, other: &Self) -> Result<C<R>> {
        if self.n_total != other.n_total {
            return Err(Error::DimensionMismatch { expected: self.n_total, found: other.n_total });
        }
        let mut union: Vec<usize> = self.active.iter().chain(other.active.iter()).copied().collect();
        union.sort_unstable();
        union.dedup();
        let a = self.embed(&union)?;
        let b = other.embed(&union)?;
        Ok(a.dotc(&b))
    }

    /// Drops active qubits whose amplitude mass on `|1⟩` is below `tol`,
    /// leaving the state otherwise unchanged.
    pub fn trim(&mut self, tol: R) {
        let k = self.active.len();
        let mut keep = Vec::new();
        for (p, &q) in self.active.iter().enumerate() {
            let m = 1usize << (k - 1 - p);
            let mass = self.amps.iter().enumerate().filter(|(i, _)| i & m != 0).fold(R::zero(), |a, (_, z)| a + norm_sqr(*z));
            if mass > tol {
                keep.push(q);
            }
        }
        if keep.len() == k {
            return;
        }
        self.amps = restrict(&self.amps, &self.active, &keep);
        self.active = keep;
        self.renormalize();
    }

    pub(crate) fn renormalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > R::zero() {
            self.amps.iter_mut().for_each(|z| *z = *z / n);
        }
    }

    /// Position of `q` in the active list.
    pub fn position(&self, q: usize) -> Option<usize> {
        self.active.binary_search(&q).ok()
    }
}

/// Re-index amplitudes from `from` to the superset `to` (new qubits in `|0⟩`).
pub(crate) fn spread<R: Real>(amps: &DVector<C<R>>, from: &[usize], to: &[usize]) -> DVector<C<R>> {
    let kf = from.len();
    let kt = to.len();
    let shifts: Vec<usize> = from.iter().map(|q| kt - 1 - to.iter().position(|t| t == q).expect("superset")).collect();
    let mut out = DVector::from_element(1 << kt, czero());
    for (i, a) in amps.iter().enumerate() {
        let mut j = 0usize;
        for (p, s) in shifts.iter().enumerate() {
            if (i >> (kf - 1 - p)) & 1 == 1 {
                j |= 1 << s;
            }
        }
        out[j] = *a;
    }
    out
}

/// Keep only the amplitudes with the dropped qubits in `|0⟩` (unnormalized).
pub(crate) fn restrict<R: Real>(amps: &DVector<C<R>>, from: &[usize], keep: &[usize]) -> DVector<C<R>> {
    let kf = from.len();
    let kk = keep.len();
    let shifts: Vec<usize> = keep.iter().map(|q| kf - 1 - from.iter().position(|f| f == q).expect("subset")).collect();
    DVector::from_fn(1 << kk, |j, _| {
        let mut i = 0usize;
        for (p, s) in shifts.iter().enumerate() {
            if (j >> (kk - 1 - p)) & 1 == 1 {
                i |= 1 << s;
            }
        }
        amps[i]
    })
}

/// Applies `circuit` to `input`; the output's active set is the input's
/// active set united with every gate target.
pub fn run_circuit<R: Real>(circuit: &Circuit<R>, input: &PureState<R>) -> Result<PureState<R>> {
    if input.n_total != circuit.n_qubits() {
        return Err(Error::DimensionMismatch { expected: circuit.n_qubits(), found: input.n_total });
    }
    let mut out = input.clone();
    out.expand(&circuit.support())?;
    let k = out.active.len();
    for g in circuit.gates() {
        let (a, b) = g.targets();
        let (p1, p2) = (out.position(a).expect("expanded"), out.position(b).expect("expanded"));
        kernel::apply_two(out.amps.as_mut_slice(), k, p1, p2, g.matrix());
    }
    Ok(out)
}

/// Computational-basis measurement of the active qubits. Bit `k−1−p` of
/// the returned index is the outcome of `active[p]`.
pub fn sample_computational<R: Real, G: Rng + ?Sized>(state: &PureState<R>, rng: &mut G) -> usize {
    sample_index(state.amps.as_slice(), rng)
}

pub(crate) fn sample_index<R: Real, G: Rng + ?Sized>(amps: &[C<R>], rng: &mut G) -> usize {
    let total: f64 = amps.iter().map(|z| norm_sqr(*z).as_f64()).sum();
    let r: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, z) in amps.iter().enumerate() {
        let p = norm_sqr(*z).as_f64();
        if p > 0.0 {
            last = i;
            acc += p;
            if r < acc {
                return i;
            }
        }
    }
    last
}
