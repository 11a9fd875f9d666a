//! Uniform random Cliffords via canonical-form tableau sampling, with dense
//! materialization for small registers.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::qcore::unitary::DenseUnitary;
use crate::scalar::{cone, czero, norm_sqr, Real, C};

/// Largest register for which a dense Clifford is materialized.
pub const MAX_DENSE_CLIFFORD: usize = 6;

/// Images of `X_0..X_{k−1}` (rows `0..k`) and `Z_0..Z_{k−1}` (rows `k..2k`)
/// under conjugation. Each row is a Hermitian Pauli `(−1)^sign ∏ σ(x_j, z_j)`
/// with `σ(1,1) = Y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    k: usize,
    x: Vec<Vec<bool>>,
    z: Vec<Vec<bool>>,
    sign: Vec<bool>,
}

fn mat_mul_mod2(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = b[0].len();
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| row.iter().zip(b.iter()).fold(false, |acc, (&r, brow)| acc ^ (r & brow[j])))
                .collect()
        })
        .collect()
}

/// Inverse of a unit lower-triangular matrix over GF(2).
fn inverse_unit_lower(l: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = l.len();
    let mut inv = vec![vec![false; n]; n];
    for col in 0..n {
        inv[col][col] = true;
        for i in col + 1..n {
            let mut s = false;
            for j in col..i {
                s ^= l[i][j] & inv[j][col];
            }
            inv[i][col] = s;
        }
    }
    inv
}

fn sample_qmallows<G: Rng + ?Sized>(n: usize, rng: &mut G) -> (Vec<bool>, Vec<usize>) {
    let mut had = vec![false; n];
    let mut perm = vec![0; n];
    let mut inds: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let m = n - i;
        let eps = 4f64.powi(-(m as i32));
        let r: f64 = rng.random();
        let index = -((r + (1.0 - r) * eps).log2().ceil()) as i64;
        let m = m as i64;
        had[i] = index < m;
        let k = if index < m { index } else { 2 * m - index - 1 };
        perm[i] = inds.remove(k as usize);
    }
    (had, perm)
}

impl Tableau {
    /// Uniform sample over the `k`-qubit Clifford group modulo phase.
    pub fn random<G: Rng + ?Sized>(k: usize, rng: &mut G) -> Self {
        assert!(k >= 1);
        let n = k;
        let (had, perm) = sample_qmallows(n, rng);
        let mut bit = || rng.random::<bool>();
        let mut gamma1 = vec![vec![false; n]; n];
        let mut gamma2 = vec![vec![false; n]; n];
        let mut delta1 = vec![vec![false; n]; n];
        let mut delta2 = vec![vec![false; n]; n];
        for i in 0..n {
            gamma1[i][i] = bit();
            gamma2[i][i] = bit();
            delta1[i][i] = true;
            delta2[i][i] = true;
        }
        for g in [&mut gamma1, &mut gamma2] {
            for i in 0..n {
                for j in 0..i {
                    let b = bit();
                    g[i][j] = b;
                    g[j][i] = b;
                }
            }
        }
        for dl in [&mut delta1, &mut delta2] {
            for i in 0..n {
                for j in 0..i {
                    dl[i][j] = bit();
                }
            }
        }
        let block = |delta: &Vec<Vec<bool>>, gamma: &Vec<Vec<bool>>| -> Vec<Vec<bool>> {
            let prod = mat_mul_mod2(gamma, delta);
            let inv = inverse_unit_lower(delta);
            let mut t = vec![vec![false; 2 * n]; 2 * n];
            for i in 0..n {
                for j in 0..n {
                    t[i][j] = delta[i][j];
                    t[n + i][j] = prod[i][j];
                    t[n + i][n + j] = inv[j][i];
                }
            }
            t
        };
        let table1 = block(&delta1, &gamma1);
        let table2 = block(&delta2, &gamma2);
        let mut table: Vec<Vec<bool>> = perm
            .iter()
            .map(|&p| table2[p].clone())
            .chain(perm.iter().map(|&p| table2[n + p].clone()))
            .collect();
        for i in (0..n).filter(|&i| had[i]) {
            table.swap(i, n + i);
        }
        let full = mat_mul_mod2(&table1, &table);
        let x = full.iter().map(|r| r[..n].to_vec()).collect();
        let z = full.iter().map(|r| r[n..].to_vec()).collect();
        let sign = (0..2 * n).map(|_| rng.random::<bool>()).collect();
        Self { k, x, z, sign }
    }

    pub fn qubits(&self) -> usize {
        self.k
    }

    /// Row `r` as `(x bits, z bits, sign)`.
    pub fn row(&self, r: usize) -> (&[bool], &[bool], bool) {
        (&self.x[r], &self.z[r], self.sign[r])
    }

    /// Symplectic form between rows: true when they anticommute.
    pub fn anticommute(&self, a: usize, b: usize) -> bool {
        (0..self.k).fold(false, |acc, j| acc ^ (self.x[a][j] & self.z[b][j]) ^ (self.z[a][j] & self.x[b][j]))
    }

    /// Checks the symplectic relations that every Clifford tableau satisfies.
    pub fn is_symplectic(&self) -> bool {
        let k = self.k;
        (0..2 * k).all(|a| (0..2 * k).all(|b| self.anticommute(a, b) == (a + k == b || b + k == a)))
    }

    /// Dense unitary, defined up to a global phase.
    pub fn to_dense<R: Real>(&self) -> DenseUnitary<R> {
        assert!(self.k <= MAX_DENSE_CLIFFORD, "dense Clifford limited to {MAX_DENSE_CLIFFORD} qubits");
        let k = self.k;
        let d = 1usize << k;
        let pack = |bits: &[bool]| bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        let rows: Vec<(usize, usize, bool)> = (0..2 * k).map(|r| (pack(&self.x[r]), pack(&self.z[r]), self.sign[r])).collect();
        // Image of |0..0⟩: the joint +1 eigenvector of the stabilizer rows.
        let project = |mut v: DVector<C<R>>| {
            for &(x, z, s) in &rows[k..] {
                let pv = apply_pauli(&v, x, z, s);
                v = (v + pv) * C::new(R::lit(0.5), R::zero());
            }
            v
        };
        let mut psi0 = None;
        for m in 0..d {
            let mut e = DVector::from_element(d, czero::<R>());
            e[m] = cone();
            let v = project(e);
            let n2 = v.iter().fold(R::zero(), |a, z| a + norm_sqr(*z));
            if n2.as_f64() * d as f64 > 0.5 {
                psi0 = Some(v / C::new(n2.sqrt(), R::zero()));
                break;
            }
        }
        let psi0 = psi0.expect("stabilizer projector has rank one");
        let mut out = DMatrix::from_element(d, d, czero::<R>());
        for col in 0..d {
            let mut v = psi0.clone();
            for (q, &(x, z, s)) in rows[..k].iter().enumerate() {
                if (col >> (k - 1 - q)) & 1 == 1 {
                    v = apply_pauli(&v, x, z, s);
                }
            }
            out.set_column(col, &v);
        }
        DenseUnitary::new_unchecked(out)
    }
}

/// `P|b⟩ = (−1)^sign · i^{#Y} · (−1)^{|b ∧ z|} |b ⊕ x⟩`.
pub(crate) fn apply_pauli<R: Real>(v: &DVector<C<R>>, x: usize, z: usize, sign: bool) -> DVector<C<R>> {
    let ny = (x & z).count_ones();
    let base = match (ny + if sign { 2 } else { 0 }) % 4 {
        0 => C::new(R::one(), R::zero()),
        1 => C::new(R::zero(), R::one()),
        2 => C::new(-R::one(), R::zero()),
        _ => C::new(R::zero(), -R::one()),
    };
    let mut out = DVector::from_element(v.len(), czero());
    for (b, a) in v.iter().enumerate() {
        let ph = if (b & z).count_ones() % 2 == 1 { -base } else { base };
        out[b ^ x] = ph * a;
    }
    out
}

/// Uniformly random `k`-qubit Clifford as a dense unitary (up to phase).
pub fn sample_random_clifford<R: Real, G: Rng + ?Sized>(k: usize, rng: &mut G) -> DenseUnitary<R> {
    Tableau::random(k, rng).to_dense()
}
