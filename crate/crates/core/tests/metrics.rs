mod common;

use bgtomo::metrics::{
    choi_pauli_frame, choi_state, d2_prime, davg, df_prime, diamond_distance, dq_exact, dq_squared_monte_carlo, fidelity_pure,
    pauli_frame_amplitudes, trace_distance_pure,
};
use bgtomo::{DenseUnitary, Error, PureState};
use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

fn z() -> DenseUnitary {
    diag_phases(&[0.0, PI])
}

#[test]
fn trace_distance_examples() {
    let zero = PureState::zero(3);
    let one = PureState::basis(3, vec![0], 1).unwrap();
    let plus = PureState::from_amplitudes(3, vec![0], DVector::from_vec(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)])).unwrap();
    assert_eq!(trace_distance_pure(&zero, &zero).unwrap(), 0.0);
    assert!((trace_distance_pure(&zero, &one).unwrap() - 1.0).abs() < 1e-15);
    // Half the trace norm of |0⟩⟨0| − |+⟩⟨+|, from its 2×2 eigenvalues.
    let diff = DMatrix::<f64>::from_row_slice(2, 2, &[0.5, -0.5, -0.5, -0.5]);
    let half_trace_norm = 0.5 * diff.symmetric_eigen().eigenvalues.iter().map(|e: &f64| e.abs()).sum::<f64>();
    assert!((trace_distance_pure(&zero, &plus).unwrap() - half_trace_norm).abs() < 1e-12);
    assert!((fidelity_pure(&zero, &plus).unwrap() - 0.5).abs() < 1e-12);
    assert!(matches!(trace_distance_pure(&zero, &PureState::zero(4)), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn davg_of_identity_and_z_matches_haar_average() {
    let id = DenseUnitary::identity(1);
    let expected = (2.0f64 / 3.0).sqrt();
    assert!((davg(&id, &z()).unwrap() - expected).abs() < 1e-12);
    let (mean, se) = davg_sq_monte_carlo(&id, &z(), 100_000, &mut rng(1));
    assert!((mean - expected * expected).abs() < 3.0 * se);
}

#[test]
fn davg_matches_haar_average_on_random_pairs() {
    let mut r = rng(2);
    for d in [2, 4, 8] {
        let (u, v) = (haar(d, &mut r), haar(d, &mut r));
        let (mean, se) = davg_sq_monte_carlo(&u, &v, 20_000, &mut r);
        assert!((mean - davg(&u, &v).unwrap().powi(2)).abs() < 4.0 * se);
    }
}

#[test]
fn df_prime_matches_phase_search() {
    assert!((df_prime(&DenseUnitary::identity(1), &z()).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    let mut r = rng(3);
    for d in [2, 4, 8] {
        for _ in 0..5 {
            let (u, v) = (haar(d, &mut r), haar(d, &mut r));
            assert!((df_prime(&u, &v).unwrap() - df_prime_oracle(&u, &v)).abs() < 1e-7);
        }
    }
}

#[test]
fn d2_prime_matches_phase_search() {
    let mut r = rng(4);
    for d in [2, 4, 8] {
        for _ in 0..5 {
            let (u, v) = (haar(d, &mut r), haar(d, &mut r));
            assert!((d2_prime(&u, &v).unwrap() - d2_prime_oracle(&u, &v)).abs() < 1e-7);
        }
        let u = haar(d, &mut r);
        let v = perturb(&u, 0.01, &mut r);
        assert!((d2_prime(&u, &v).unwrap() - d2_prime_oracle(&u, &v)).abs() < 1e-7);
    }
}

#[test]
fn diamond_examples() {
    let id = DenseUnitary::identity(1);
    assert_eq!(diamond_distance(&id, &z()).unwrap(), 2.0);
    assert!(diamond_distance(&id, &id).unwrap() < 1e-12);
    for theta in [1e-3, 0.1, 0.7, 2.0] {
        let v = diag_phases(&[0.0, theta]);
        let exact = 2.0 * (theta / 2.0).sin();
        assert!((diamond_distance(&id, &v).unwrap() - exact).abs() < 1e-12);
        assert!((diamond_oracle(&id, &v, 2_000, &mut rng(5)) - exact).abs() < 1e-3);
    }
    // Global phase is invisible.
    let mut r = rng(6);
    let u = haar(4, &mut r);
    assert!(diamond_distance(&u, &u.scale_phase(c(0.0, 1.0))).unwrap() < 1e-7);
}

#[test]
fn diamond_matches_state_maximization() {
    let mut r = rng(7);
    for d in [2, 4] {
        for _ in 0..4 {
            let u = haar(d, &mut r);
            let v = perturb(&u, 0.6, &mut r);
            let exact = diamond_distance(&u, &v).unwrap();
            assert!((exact - diamond_oracle(&u, &v, 5_000, &mut r)).abs() < 1e-3);
        }
    }
}

#[test]
fn choi_state_examples() {
    let id = choi_state(&DenseUnitary::identity(1), 20).unwrap();
    let expected = [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2];
    for (a, e) in id.state().amplitudes().iter().zip(expected) {
        assert!((a - c(e, 0.0)).norm() < 1e-15);
    }
    let x = DenseUnitary::new(DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
    let cx = choi_state(&x, 20).unwrap();
    let expected = [0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0];
    for (a, e) in cx.state().amplitudes().iter().zip(expected) {
        assert!((a - c(e, 0.0)).norm() < 1e-15);
    }
    assert!(matches!(choi_state(&haar(8, &mut rng(8)), 4), Err(Error::SupportCapExceeded { .. })));
}

#[test]
fn choi_inner_product_and_maximal_entanglement() {
    let mut r = rng(9);
    for d in [2, 4, 8] {
        let (u, v) = (haar(d, &mut r), haar(d, &mut r));
        let (cu, cv) = (choi_state(&u, 20).unwrap(), choi_state(&v, 20).unwrap());
        let ip = cu.state().inner(cv.state()).unwrap();
        let tr = (u.matrix().adjoint() * v.matrix()).trace() / c(d as f64, 0.0);
        assert!((ip - tr).norm() < 1e-12);
        assert!((cu.state().amplitudes() - choi_vector(&u)).norm() < 1e-14);
        // Ancilla marginal: ρ_A[j, j'] = Σ_i ψ_{ij} conj(ψ_{ij'}).
        let a = cu.state().amplitudes();
        for j in 0..d {
            for jp in 0..d {
                let m: bgtomo::Complex64 = (0..d).map(|i| a[i * d + j] * a[i * d + jp].conj()).sum();
                let e = if j == jp { 1.0 / d as f64 } else { 0.0 };
                assert!((m - c(e, 0.0)).norm() < 1e-9);
            }
        }
    }
}

#[test]
fn davg_equals_scaled_choi_trace_distance() {
    let mut r = rng(10);
    for d in [2usize, 4, 8] {
        for _ in 0..100 {
            let (u, v) = (haar(d, &mut r), haar(d, &mut r));
            let dt = pure_trace_distance(&choi_vector(&u), &choi_vector(&v));
            let scale = (d as f64 / (d as f64 + 1.0)).sqrt();
            assert!((davg(&u, &v).unwrap() - scale * dt).abs() < 1e-10);
        }
    }
}

#[test]
fn pauli_frame_amplitudes_are_pauli_coefficients() {
    let mut r = rng(11);
    for k in 1..=3 {
        let u = haar(1 << k, &mut r);
        let amps = pauli_frame_amplitudes(&u);
        let d = (1 << k) as f64;
        for b in 0..(1 << (2 * k)) {
            let coeff = (pauli(b, k) * u.matrix()).trace() / c(d, 0.0);
            // ⟪σ_b∥U⟫ = tr(σ_b† U)/d, Paulis are Hermitian.
            assert!((amps[b] - coeff).norm() < 1e-12, "k={k} b={b}");
        }
    }
}

#[test]
fn pauli_frame_places_pairs_by_qubit() {
    let mut r = rng(12);
    let u = haar(4, &mut r);
    // u's first tensor factor is qubit 3, its second qubit 1.
    let state = choi_pauli_frame(&u, &[3, 1], 5, 20).unwrap();
    assert_eq!(state.active(), &[2, 3, 6, 7]);
    let amps = state.amplitudes();
    for a in 0..4 {
        for b in 0..4 {
            // Pair of qubit 1 (label a) is more significant in the state.
            let coeff = (pauli((b << 2) | a, 2) * u.matrix()).trace() / c(4.0, 0.0);
            assert!((amps[(a << 2) | b] - coeff).norm() < 1e-12);
        }
    }
}

#[test]
fn sandwich_inequalities_that_hold_in_every_dimension() {
    let mut r = rng(13);
    let tol = 1e-9;
    for d in [2, 4, 8] {
        for i in 0..250 {
            let u = haar(d, &mut r);
            let v = if i % 2 == 0 { haar(d, &mut r) } else { perturb(&u, 10f64.powf(-3.0 + 3.0 * (i as f64 / 250.0)), &mut r) };
            let (df, d2, da, dd) = (df_prime(&u, &v).unwrap(), d2_prime(&u, &v).unwrap(), davg(&u, &v).unwrap(), diamond_distance(&u, &v).unwrap());
            assert!(df <= d2 + tol);
            assert!(d2 / (d as f64).sqrt() <= df + tol);
            assert!(0.5 * df <= da + tol);
            assert!(da <= df + tol);
            assert!(0.5 * dd <= d2 + tol);
        }
    }
}

#[test]
fn spectral_lower_bound_holds_for_qubits() {
    let mut r = rng(14);
    for _ in 0..1000 {
        let (u, v) = (haar(2, &mut r), haar(2, &mut r));
        assert!(d2_prime(&u, &v).unwrap() / 2f64.sqrt() <= 0.5 * diamond_distance(&u, &v).unwrap() + 1e-9);
    }
}

#[test]
fn spectral_lower_bound_fails_for_spread_spectra() {
    // Eigenphases {0, 0, 2π/3, 4π/3}: the hull contains the origin so
    // ½d⋄ = 1, while the shortest covering arc is 4π/3 and d₂′ = √3.
    let u = diag_phases(&[0.0, 0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0]);
    let id = DenseUnitary::identity(2);
    let d2 = d2_prime(&id, &u).unwrap();
    assert!((d2 - 3f64.sqrt()).abs() < 1e-12);
    assert!((d2_prime_oracle(&id, &u) - d2).abs() < 1e-7);
    assert_eq!(diamond_distance(&id, &u).unwrap(), 2.0);
    assert!(d2 / 2f64.sqrt() > 1.0 + 1e-3);
}

#[test]
fn df_prime_power_subadditivity() {
    let mut r = rng(15);
    for d in [2, 4, 8] {
        for i in 0..20 {
            let u = haar(d, &mut r);
            let v = perturb(&u, 0.02 * (i + 1) as f64, &mut r);
            let base = df_prime(&u, &v).unwrap();
            for p in 1..=8u64 {
                assert!(df_prime(&u.pow(p), &v.pow(p)).unwrap() <= p as f64 * base + 1e-9);
            }
        }
    }
}

#[test]
fn dq_exact_matches_monte_carlo() {
    let mut r = rng(16);
    for k in 1..=3 {
        let (u, v) = (haar(1 << k, &mut r), haar(1 << k, &mut r));
        let exact = dq_exact(&u, &v).unwrap();
        let (mean, se) = dq_squared_monte_carlo(&u, &v, 20_000, &mut r).unwrap();
        assert!((mean - exact * exact).abs() < 4.0 * se);
    }
}

#[test]
fn dq_triangle_inequality_and_equivalence_with_davg() {
    let mut r = rng(17);
    for k in 1..=3 {
        let d = 1 << k;
        for i in 0..30 {
            let a = haar(d, &mut r);
            let scale = 0.05 * (i + 1) as f64;
            let b = perturb(&a, scale, &mut r);
            let cc = perturb(&b, scale, &mut r);
            let (ab, bc, ac) = (dq_exact(&a, &b).unwrap(), dq_exact(&b, &cc).unwrap(), dq_exact(&a, &cc).unwrap());
            assert!(ac <= ab + bc + 1e-9);
            let da = davg(&a, &b).unwrap();
            assert!(da / 2f64.sqrt() <= ab + 1e-9 && ab <= 2f64.sqrt() * da + 1e-9, "k={k} dq={ab} davg={da}");
        }
    }
}

#[test]
fn dimension_mismatch_is_reported() {
    let (a, b) = (DenseUnitary::identity(1), DenseUnitary::identity(2));
    assert!(matches!(davg(&a, &b), Err(Error::DimensionMismatch { .. })));
    assert!(matches!(diamond_distance(&a, &b), Err(Error::DimensionMismatch { .. })));
    assert!(matches!(d2_prime(&a, &b), Err(Error::DimensionMismatch { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn distances_are_symmetric_and_phase_invariant(seed in any::<u64>(), k in 1usize..=3, phi in 0.0..6.28f64) {
        let mut r = rng(seed);
        let d = 1 << k;
        let (u, v) = (haar(d, &mut r), haar(d, &mut r));
        let vp = v.scale_phase(bgtomo::Complex64::from_polar(1.0, phi));
        for f in [davg::<f64>, df_prime::<f64>, d2_prime::<f64>, diamond_distance::<f64>] {
            let x = f(&u, &v).unwrap();
            prop_assert!((x - f(&v, &u).unwrap()).abs() < 1e-7);
            prop_assert!((x - f(&u, &vp).unwrap()).abs() < 1e-7);
            prop_assert!(x >= 0.0);
        }
        prop_assert!(davg(&u, &u).unwrap() < 1e-7);
        prop_assert!(diamond_distance(&u, &v).unwrap() <= 2.0);
    }
}
