//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use bgtomo::qcore::{sample_haar_unitary, sample_haar_vector};
use bgtomo::{Complex64, DenseUnitary};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn haar(d: usize, r: &mut ChaCha8Rng) -> DenseUnitary {
    sample_haar_unitary(d, r)
}

pub fn diag_phases(phases: &[f64]) -> DenseUnitary {
    let d = phases.len();
    DenseUnitary::new(DMatrix::from_fn(d, d, |i, j| if i == j { Complex64::from_polar(1.0, phases[i]) } else { c(0.0, 0.0) })).unwrap()
}

/// Dense Pauli string `idx` (two bits per qubit, I=0 X=1 Y=2 Z=3), qubit 0
/// most significant.
pub fn pauli(idx: usize, k: usize) -> DMatrix<Complex64> {
    let mats = [
        [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
    ];
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for q in 0..k {
        let p = mats[(idx >> (2 * (k - 1 - q))) & 3];
        m = m.kronecker(&DMatrix::from_row_slice(2, 2, &p));
    }
    m
}

pub fn op_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone().singular_values().max()
}

fn minimize_over_phase(f: impl Fn(f64) -> f64) -> f64 {
    let grid = 4096;
    let step = std::f64::consts::TAU / grid as f64;
    let (mut best_phi, mut best) = (0.0, f64::INFINITY);
    for i in 0..grid {
        let phi = i as f64 * step;
        let v = f(phi);
        if v < best {
            best = v;
            best_phi = phi;
        }
    }
    // Golden-section refinement inside the neighbouring grid cells.
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (best_phi - step, best_phi + step);
    for _ in 0..100 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if f(x1) < f(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    best.min(f(0.5 * (a + b)))
}

/// `min_φ ‖U − e^{iφ}V‖` by phase search with singular values.
pub fn d2_prime_oracle(u: &DenseUnitary, v: &DenseUnitary) -> f64 {
    minimize_over_phase(|phi| op_norm(&(u.matrix() - v.matrix() * Complex64::from_polar(1.0, phi))))
}

/// `min_φ ‖U − e^{iφ}V‖_F / √d` by phase search.
pub fn df_prime_oracle(u: &DenseUnitary, v: &DenseUnitary) -> f64 {
    let d = u.dim() as f64;
    minimize_over_phase(|phi| (u.matrix() - v.matrix() * Complex64::from_polar(1.0, phi)).norm() / d.sqrt())
}

fn random_state(d: usize, r: &mut ChaCha8Rng) -> DVector<Complex64> {
    sample_haar_vector(d, r)
}

fn diamond_objective(w: &DMatrix<Complex64>, psi: &DVector<Complex64>) -> f64 {
    let e = psi.dotc(&(w * psi)).norm_sqr();
    2.0 * (1.0 - e).max(0.0).sqrt()
}

/// `max_ψ 2√(1 − |⟨ψ|U†V|ψ⟩|²)`: best of `samples` random states, then a
/// shrinking random-perturbation hill climb from the best.
pub fn diamond_oracle(u: &DenseUnitary, v: &DenseUnitary, samples: usize, r: &mut ChaCha8Rng) -> f64 {
    let d = u.dim();
    let w = u.matrix().adjoint() * v.matrix();
    let mut best_psi = random_state(d, r);
    let mut best = diamond_objective(&w, &best_psi);
    for _ in 1..samples {
        let psi = random_state(d, r);
        let val = diamond_objective(&w, &psi);
        if val > best {
            best = val;
            best_psi = psi;
        }
    }
    let mut sigma = 0.1;
    let mut fails = 0;
    while sigma > 1e-8 {
        let noise = DVector::from_fn(d, |_, _| c(r.sample::<f64, _>(StandardNormal), r.sample::<f64, _>(StandardNormal)));
        let mut cand = &best_psi + noise * c(sigma, 0.0);
        let n = cand.norm();
        cand /= c(n, 0.0);
        let val = diamond_objective(&w, &cand);
        if val > best {
            best = val;
            best_psi = cand;
            fails = 0;
        } else {
            fails += 1;
            if fails > 60 {
                sigma *= 0.5;
                fails = 0;
            }
        }
    }
    best
}

/// `(U ⊗ I)|Φ⟩` built directly from the matrix entries, row-major.
pub fn choi_vector(u: &DenseUnitary) -> DVector<Complex64> {
    let d = u.dim();
    DVector::from_fn(d * d, |idx, _| u.matrix()[(idx / d, idx % d)] / (d as f64).sqrt())
}

pub fn pure_trace_distance(a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    (1.0 - a.dotc(b).norm_sqr()).max(0.0).sqrt()
}

/// Monte-Carlo `E_ψ[1 − |⟨ψ|U†V|ψ⟩|²]` over Haar inputs: `(mean, se)`.
pub fn davg_sq_monte_carlo(u: &DenseUnitary, v: &DenseUnitary, samples: usize, r: &mut ChaCha8Rng) -> (f64, f64) {
    let w = u.matrix().adjoint() * v.matrix();
    let vals: Vec<f64> = (0..samples)
        .map(|_| {
            let psi = random_state(u.dim(), r);
            1.0 - psi.dotc(&(&w * &psi)).norm_sqr()
        })
        .collect();
    mean_se(&vals)
}

pub fn mean_se(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Random unitary of the form `U exp(iεH)` for Hermitian `H` of unit
/// operator norm.
pub fn perturb(u: &DenseUnitary, eps: f64, r: &mut ChaCha8Rng) -> DenseUnitary {
    let d = u.dim();
    let g = DMatrix::from_fn(d, d, |_, _| c(r.sample::<f64, _>(StandardNormal), r.sample::<f64, _>(StandardNormal)));
    let h = (&g + g.adjoint()) * c(0.5, 0.0);
    let h = &h / c(op_norm(&h), 0.0);
    let eig = h.clone().symmetric_eigen();
    let phases = DMatrix::from_fn(d, d, |i, j| if i == j { Complex64::from_polar(1.0, eps * eig.eigenvalues[i]) } else { c(0.0, 0.0) });
    let e = &eig.eigenvectors * phases * eig.eigenvectors.adjoint();
    DenseUnitary::with_tolerance(u.matrix() * e, 1e-9).unwrap()
}
