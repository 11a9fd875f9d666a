use nalgebra::{DMatrix, DVector, Matrix2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::qcore::state::PureState;
use crate::qcore::unitary::DenseUnitary;
use crate::scalar::{c, modulus, Real, C};

pub(crate) fn gaussian<R: Real, G: Rng + ?Sized>(rng: &mut G) -> C<R> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C::new(R::lit(re), R::lit(im))
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal divided out.
pub fn sample_haar_unitary<R: Real, G: Rng + ?Sized>(dim: usize, rng: &mut G) -> DenseUnitary<R> {
    assert!(dim.is_power_of_two(), "dimension must be a power of two");
    let z = DMatrix::<C<R>>::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let m = modulus(rjj);
        let ph = if m > R::zero() { rjj / m } else { C::new(R::one(), R::zero()) };
        for i in 0..dim {
            q[(i, j)] *= ph;
        }
    }
    DenseUnitary::new_unchecked(q)
}

/// Haar-random unit vector of length `dim`.
pub fn sample_haar_vector<R: Real, G: Rng + ?Sized>(dim: usize, rng: &mut G) -> DVector<C<R>> {
    let mut v = DVector::<C<R>>::from_fn(dim, |_, _| gaussian(rng));
    let n = v.iter().fold(R::zero(), |a, z| a + z.re * z.re + z.im * z.im).sqrt();
    v.iter_mut().for_each(|z| *z = *z / n);
    v
}

/// Haar-random pure state on the qubits `active` of an `n_total` register.
pub fn sample_haar_state<R: Real, G: Rng + ?Sized>(n_total: usize, active: Vec<usize>, rng: &mut G) -> Result<PureState<R>> {
    let v = sample_haar_vector(1 << active.len(), rng);
    PureState::from_amplitudes(n_total, active, v)
}

/// Per-qubit labels over the six single-qubit stabilizer states:
/// 0 = |0⟩, 1 = |1⟩, 2 = |+⟩, 3 = |−⟩, 4 = |+i⟩, 5 = |−i⟩.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StabilizerProductLabel(Vec<u8>);

impl StabilizerProductLabel {
    pub fn new(labels: Vec<u8>) -> Result<Self> {
        if let Some(l) = labels.iter().find(|&&l| l > 5) {
            return Err(Error::InvalidState(format!("stabilizer label {l} outside 0..=5")));
        }
        Ok(Self(labels))
    }

    pub fn labels(&self) -> &[u8] {
        &self.0
    }

    /// Mixed-radix index in `0..6^k`, first qubit most significant.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &l| acc * 6 + l as usize)
    }

    pub fn from_index(mut index: usize, k: usize) -> Self {
        let mut v = vec![0u8; k];
        for slot in v.iter_mut().rev() {
            *slot = (index % 6) as u8;
            index /= 6;
        }
        Self(v)
    }
}

/// The unitary `U_x` with `U_x|0⟩` equal to the labelled stabilizer state.
pub fn stabilizer_prep<R: Real>(label: u8) -> Matrix2<C<R>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match label {
        0 => Matrix2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)),
        1 => Matrix2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)),
        2 => Matrix2::new(c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)),
        3 => Matrix2::new(c(h, 0.), c(h, 0.), c(-h, 0.), c(h, 0.)),
        4 => Matrix2::new(c(h, 0.), c(0., h), c(0., h), c(h, 0.)),
        5 => Matrix2::new(c(h, 0.), c(0., -h), c(0., -h), c(h, 0.)),
        _ => panic!("stabilizer label {label} outside 0..=5"),
    }
}

/// Single-qubit stabilizer vector for a label.
pub fn stabilizer_vector<R: Real>(label: u8) -> [C<R>; 2] {
    let m = stabilizer_prep::<R>(label);
    [m[(0, 0)], m[(1, 0)]]
}

/// Tensor product of the labelled states, as a dense vector over `k` qubits.
pub fn stabilizer_product_vector<R: Real>(label: &StabilizerProductLabel) -> DVector<C<R>> {
    let mut v = DVector::from_element(1, C::new(R::one(), R::zero()));
    for &l in label.labels() {
        let s = stabilizer_vector::<R>(l);
        v = v.kronecker(&DVector::from_row_slice(&s));
    }
    v
}

/// Uniform label over `6^k` and the matching product state on qubits `0..k`.
pub fn sample_stabilizer_product<R: Real, G: Rng + ?Sized>(k: usize, rng: &mut G) -> (StabilizerProductLabel, PureState<R>) {
    assert!(k >= 1, "need at least one qubit");
    let label = StabilizerProductLabel((0..k).map(|_| rng.random_range(0..6u8)).collect());
    let v = stabilizer_product_vector(&label);
    let state = PureState::from_amplitudes_unnormalized(k, (0..k).collect(), v).expect("valid product state");
    (label, state)
}
