//! In-place gate kernels on amplitude slices. Qubit position 0 is the most
//! significant bit of the index.

use crate::scalar::{Real, C};
use nalgebra::{Matrix2, Matrix4};

#[inline]
fn mask(k: usize, pos: usize) -> usize {
    1usize << (k - 1 - pos)
}

/// Apply a 4×4 gate to positions `(p1, p2)` of a `k`-qubit register.
/// `p1` addresses the more significant bit of the gate's basis.
pub fn apply_two<R: Real>(amps: &mut [C<R>], k: usize, p1: usize, p2: usize, g: &Matrix4<C<R>>) {
    debug_assert_eq!(amps.len(), 1 << k);
    debug_assert_ne!(p1, p2);
    let m1 = mask(k, p1);
    let m2 = mask(k, p2);
    let both = m1 | m2;
    for base in 0..amps.len() {
        if base & both != 0 {
            continue;
        }
        let idx = [base, base | m2, base | m1, base | m1 | m2];
        let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
        for (r, &i) in idx.iter().enumerate() {
            amps[i] = g[(r, 0)] * v[0] + g[(r, 1)] * v[1] + g[(r, 2)] * v[2] + g[(r, 3)] * v[3];
        }
    }
}

/// Apply a 2×2 gate to position `p` of a `k`-qubit register.
pub fn apply_one<R: Real>(amps: &mut [C<R>], k: usize, p: usize, g: &Matrix2<C<R>>) {
    debug_assert_eq!(amps.len(), 1 << k);
    let m = mask(k, p);
    for base in 0..amps.len() {
        if base & m != 0 {
            continue;
        }
        let a = amps[base];
        let b = amps[base | m];
        amps[base] = g[(0, 0)] * a + g[(0, 1)] * b;
        amps[base | m] = g[(1, 0)] * a + g[(1, 1)] * b;
    }
}

/// Apply a dense `2^w × 2^w` matrix to the ordered positions `pos` of a
/// `k`-qubit register; `pos[0]` is the matrix's most significant bit.
pub fn apply_dense<R: Real>(amps: &mut [C<R>], k: usize, pos: &[usize], m: &nalgebra::DMatrix<C<R>>) {
    let w = pos.len();
    let dw = 1usize << w;
    debug_assert_eq!(m.nrows(), dw);
    let masks: Vec<usize> = pos.iter().map(|&p| mask(k, p)).collect();
    let all: usize = masks.iter().fold(0, |a, b| a | b);
    let offsets: Vec<usize> = (0..dw)
        .map(|j| {
            (0..w)
                .filter(|&b| (j >> (w - 1 - b)) & 1 == 1)
                .fold(0, |acc, b| acc | masks[b])
        })
        .collect();
    let mut buf = vec![C::new(R::zero(), R::zero()); dw];
    for base in 0..amps.len() {
        if base & all != 0 {
            continue;
        }
        for (j, off) in offsets.iter().enumerate() {
            buf[j] = amps[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = C::new(R::zero(), R::zero());
            for (j, v) in buf.iter().enumerate() {
                acc += m[(r, j)] * v;
            }
            amps[base | off] = acc;
        }
    }
}
