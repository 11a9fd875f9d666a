//! Distances between pure states and between unitaries, Choi states and
//! the stabilizer-input distance `d_Q`.

use nalgebra::{DMatrix, DVector, Matrix4};
use rand::Rng;

use crate::error::{Error, Result};
use crate::qcore::random::{stabilizer_product_vector, StabilizerProductLabel};
use crate::qcore::state::PureState;
use crate::qcore::unitary::{unitary_eigendecomposition, DenseUnitary};
use crate::qcore::kernel;
use crate::scalar::{arg, c, modulus, norm_sqr, sqrt_unit, Real, C};

/// `√(1 − |⟨ψ|φ⟩|²)`, with implicit `|0⟩` padding aligning the supports.
pub fn trace_distance_pure<R: Real>(psi: &PureState<R>, phi: &PureState<R>) -> Result<R> {
    let ov = psi.inner(phi)?;
    Ok(sqrt_unit(R::one() - norm_sqr(ov)))
}

/// Fidelity `|⟨ψ|φ⟩|²`.
pub fn fidelity_pure<R: Real>(psi: &PureState<R>, phi: &PureState<R>) -> Result<R> {
    Ok(norm_sqr(psi.inner(phi)?).min(R::one()))
}

/// Root-mean-square output trace distance over Haar inputs:
/// `d_avg² = 1 − (d + |tr U†V|²) / (d(d+1))`.
pub fn davg<R: Real>(u: &DenseUnitary<R>, v: &DenseUnitary<R>) -> Result<R> {
    let t = norm_sqr(u.overlap(v)?);
    let d = R::lit(u.dim() as f64);
    Ok(sqrt_unit(R::one() - (d + t) / (d * (d + R::one()))))
}

/// Phase-quotient normalized Frobenius distance: `d_F′² = 2 − (2/d)|tr U†V|`.
pub fn df_prime<R: Real>(u: &DenseUnitary<R>, v: &DenseUnitary<R>) -> Result<R> {
    let t = modulus(u.overlap(v)?);
    let d = R::lit(u.dim() as f64);
    let x = R::lit(2.0) - R::lit(2.0) * t / d;
    Ok(if x <= R::zero() { R::zero() } else { x.sqrt() })
}

/// Eigenvalues of a unitary.
pub fn unitary_eigenvalues<R: Real>(w: &DMatrix<C<R>>) -> Result<Vec<C<R>>> {
    if w.nrows() == 1 {
        return Ok(vec![w[(0, 0)]]);
    }
    Ok(unitary_eigendecomposition(w)?.1)
}

/// Eigenphases of `U†V` in `(−π, π]`.
pub fn relative_eigenphases<R: Real>(u: &DenseUnitary<R>, v: &DenseUnitary<R>) -> Result<Vec<R>> {
    u.check_dim(v)?;
    let w = u.matrix().adjoint() * v.matrix();
    Ok(unitary_eigenvalues(&w)?.into_iter().map(arg).collect())
}

/// Length of the shortest arc of the unit circle containing every phase.
pub(crate) fn covering_arc<R: Real>(phases: &[R]) -> R {
    let two_pi = R::two_pi();
    let mut p: Vec<R> = phases
        .iter()
        .map(|&t| {
            let mut x = t % two_pi;
            if x < R::zero() {
                x += two_pi;
            }
            x
        })
        .collect();
    p.sort_by(|a, b| a.partial_cmp(b).expect("finite phase"));
    let mut widest = two_pi - (p[p.len() - 1] - p[0]);
    for w in p.windows(2) {
        widest = widest.max(w[1] - w[0]);
    }
    (two_pi - widest).max(R::zero())
}

/// Phase-quotient spectral distance `min_φ ‖U − e^{iφ}V‖`. The optimal
/// phase sits at the centre of the shortest arc `L` covering the spectrum
/// of `U†V`, giving `2 sin(L/4)`.
pub fn d2_prime<R: Real>(u: &DenseUnitary<R>, v: &DenseUnitary<R>) -> Result<R> {
    let phases = relative_eigenphases(u, v)?;
    let l = covering_arc(&phases);
    Ok(R::lit(2.0) * (l / R::lit(4.0)).sin())
}

/// Diamond distance between the channels of two unitaries,
/// `2√(1 − m²)` with `m` the distance from the origin to the convex hull of
/// the spectrum of `U†V`.
pub fn diamond_distance<R: Real>(u: &DenseUnitary<R>, v: &DenseUnitary<R>) -> Result<R> {
    u.check_dim(v)?;
    let w = u.matrix().adjoint() * v.matrix();
    let pts: Vec<(f64, f64)> = unitary_eigenvalues(&w)?.into_iter().map(|z| (z.re.as_f64(), z.im.as_f64())).collect();
    let m = origin_hull_distance(&pts);
    Ok(R::lit(2.0) * sqrt_unit(R::lit(1.0 - m * m)))
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn segment_origin_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (-(a.0 * dx + a.1 * dy) / len2).clamp(0.0, 1.0) };
    let (px, py) = (a.0 + t * dx, a.1 + t * dy);
    (px * px + py * py).sqrt()
}

/// Euclidean distance from the origin to the convex hull of `pts`.
pub(crate) fn origin_hull_distance(pts: &[(f64, f64)]) -> f64 {
    let mut p = pts.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).expect("finite point"));
    p.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-15);
    if p.len() == 1 {
        return (p[0].0 * p[0].0 + p[0].1 * p[0].1).sqrt();
    }
    // Andrew's monotone chain, counter-clockwise.
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        let a = hull[0];
        let b = *hull.get(1).unwrap_or(&a);
        return segment_origin_distance(a, b);
    }
    let o = (0.0, 0.0);
    let inside = (0..hull.len()).all(|i| cross(hull[i], hull[(i + 1) % hull.len()], o) >= 0.0);
    if inside {
        return 0.0;
    }
    (0..hull.len())
        .map(|i| segment_origin_distance(hull[i], hull[(i + 1) % hull.len()]))
        .fold(f64::INFINITY, f64::min)
}

/// `(U ⊗ I)|Φ⟩` on `2k` qubits: system qubits first, ancillas second.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiState<R: Real> {
    base_dim: usize,
    state: PureState<R>,
}

impl<R: Real> ChoiState<R> {
    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn state(&self) -> &PureState<R> {
        &self.state
    }

    pub fn into_state(self) -> PureState<R> {
        self.state
    }
}

/// Choi state with amplitudes `U_{ij}/√d` at index `i·d + j`.
pub fn choi_state<R: Real>(u: &DenseUnitary<R>, cap: usize) -> Result<ChoiState<R>> {
    let k = u.qubits();
    if 2 * k > cap {
        return Err(Error::SupportCapExceeded { requested: 2 * k, cap });
    }
    let d = u.dim();
    let s = R::lit(d as f64).sqrt();
    let amps = DVector::from_fn(d * d, |idx, _| u.matrix()[(idx / d, idx % d)] / s);
    let state = PureState::from_amplitudes_unnormalized(2 * k, (0..2 * k).collect(), amps)?;
    Ok(ChoiState { base_dim: d, state })
}

/// Maps `∥σ_b⟫ ↦ |b⟩` on one (system, ancilla) pair, with labels
/// `I = 00, X = 01, Y = 10, Z = 11`.
pub fn bell_rotation<R: Real>() -> Matrix4<C<R>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Matrix4::new(
        c(h, 0.), c(0., 0.), c(0., 0.), c(h, 0.), //
        c(0., 0.), c(h, 0.), c(h, 0.), c(0., 0.), //
        c(0., 0.), c(0., h), c(0., -h), c(0., 0.), //
        c(h, 0.), c(0., 0.), c(0., 0.), c(-h, 0.),
    )
}

/// Choi state of `u` rotated into the Pauli–Choi frame, as a state on
/// `2·n_total` qubits. Qubit `q` of the system owns the pair
/// `(2q, 2q+1)`, which holds the 2-bit Pauli label of that qubit. `u` acts
/// on the ordered `support`; pairs outside it read `I = |00⟩`.
pub fn choi_pauli_frame<R: Real>(u: &DenseUnitary<R>, support: &[usize], n_total: usize, cap: usize) -> Result<PureState<R>> {
    let k = support.len();
    if u.qubits() != k {
        return Err(Error::DimensionMismatch { expected: 1 << k, found: u.dim() });
    }
    if 2 * k > cap {
        return Err(Error::SupportCapExceeded { requested: 2 * k, cap });
    }
    let amps = pauli_frame_amplitudes(u);
    // pauli_frame_amplitudes orders pairs by position in `support`; the
    // active list must be sorted by qubit index.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&p| support[p]);
    let amps = permute_pairs(&amps, k, &order);
    let active: Vec<usize> = order.iter().flat_map(|&p| [2 * support[p], 2 * support[p] + 1]).collect();
    PureState::from_amplitudes_unnormalized(2 * n_total, active, amps)
}

/// Pauli coefficients `tr(σ_b U)/d` indexed by interleaved labels, pair `p`
/// at bits `(2k−2−2p, 2k−1−2p)`.
pub fn pauli_frame_amplitudes<R: Real>(u: &DenseUnitary<R>) -> DVector<C<R>> {
    let k = u.qubits();
    let d = u.dim();
    let s = R::lit(d as f64).sqrt();
    // Blocked Choi vector: system qubits 0..k, ancillas k..2k.
    let mut blocked: Vec<C<R>> = (0..d * d).map(|idx| u.matrix()[(idx / d, idx % d)] / s).collect();
    let b = bell_rotation::<R>();
    for q in 0..k {
        kernel::apply_two(&mut blocked, 2 * k, q, k + q, &b);
    }
    // Reorder bits from (s_0..s_{k−1}, a_0..a_{k−1}) to (s_0, a_0, s_1, a_1, …).
    let mut out = DVector::from_element(d * d, C::new(R::zero(), R::zero()));
    for (idx, z) in blocked.iter().enumerate() {
        let sys = idx / d;
        let anc = idx % d;
        let mut j = 0usize;
        for q in 0..k {
            let sb = (sys >> (k - 1 - q)) & 1;
            let ab = (anc >> (k - 1 - q)) & 1;
            j = (j << 2) | (sb << 1) | ab;
        }
        out[j] = *z;
    }
    out
}

/// Reorders 2-bit pair blocks: output pair `i` takes input pair `order[i]`.
fn permute_pairs<R: Real>(amps: &DVector<C<R>>, k: usize, order: &[usize]) -> DVector<C<R>> {
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        return amps.clone();
    }
    let mut out = DVector::from_element(amps.len(), C::new(R::zero(), R::zero()));
    for (idx, z) in amps.iter().enumerate() {
        let mut j = 0usize;
        for &src in order {
            j = (j << 2) | ((idx >> (2 * (k - 1 - src))) & 3);
        }
        out[j] = *z;
    }
    out
}

/// Exact `d_Q(U, V) = √(E_x [1 − |⟨x|U†V|x⟩|²])` over the `6^k` stabilizer
/// product inputs.
pub fn dq_exact<R: Real>(u: &DenseUnitary<R>, v: &DenseUnitary<R>) -> Result<R> {
    u.check_dim(v)?;
    let k = u.qubits();
    let w = u.matrix().adjoint() * v.matrix();
    let total = 6usize.pow(k as u32);
    let mut acc = 0.0f64;
    for idx in 0..total {
        let x = stabilizer_product_vector::<R>(&StabilizerProductLabel::from_index(idx, k));
        let wx = &w * &x;
        acc += (R::one() - norm_sqr(x.dotc(&wx))).as_f64();
    }
    Ok(sqrt_unit(R::lit(acc / total as f64)))
}

/// Monte-Carlo `d_Q²` with its standard error, from `samples` random
/// stabilizer product inputs.
pub fn dq_squared_monte_carlo<R: Real, G: Rng + ?Sized>(
    u: &DenseUnitary<R>,
    v: &DenseUnitary<R>,
    samples: usize,
    rng: &mut G,
) -> Result<(f64, f64)> {
    u.check_dim(v)?;
    let k = u.qubits();
    let w = u.matrix().adjoint() * v.matrix();
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..samples {
        let label = StabilizerProductLabel::new((0..k).map(|_| rng.random_range(0..6u8)).collect())?;
        let x = stabilizer_product_vector::<R>(&label);
        let val = (R::one() - norm_sqr(x.dotc(&(&w * &x)))).as_f64();
        sum += val;
        sum2 += val * val;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    Ok((mean, (var / n).sqrt()))
}
