use nalgebra::{DMatrix, Matrix4};

use crate::error::{Error, Result};
use crate::qcore::kernel;
use crate::qcore::unitary::{unitarity_defect, DenseUnitary};
use crate::scalar::{Real, C};

/// A two-qubit gate on an ordered pair of qubits. `q1` addresses the more
/// significant bit of the 4×4 matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GatePlacement<R: Real> {
    matrix: Matrix4<C<R>>,
    q1: usize,
    q2: usize,
}

impl<R: Real> GatePlacement<R> {
    pub fn new(matrix: Matrix4<C<R>>, q1: usize, q2: usize) -> Result<Self> {
        if q1 == q2 {
            return Err(Error::InvalidGate(format!("repeated target {q1}")));
        }
        let dyn_m = DMatrix::from_iterator(4, 4, matrix.iter().cloned());
        let defect = unitarity_defect(&dyn_m);
        if !(defect <= R::UNITARY_TOL) {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self { matrix, q1, q2 })
    }

    pub fn from_unitary(u: &DenseUnitary<R>, q1: usize, q2: usize) -> Result<Self> {
        if u.dim() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: u.dim() });
        }
        Self::new(Matrix4::from_iterator(u.matrix().iter().cloned()), q1, q2)
    }

    pub fn matrix(&self) -> &Matrix4<C<R>> {
        &self.matrix
    }

    pub fn targets(&self) -> (usize, usize) {
        (self.q1, self.q2)
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), q1: self.q1, q2: self.q2 }
    }
}

/// Ordered gate list; index 0 acts first.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit<R: Real> {
    n_qubits: usize,
    gates: Vec<GatePlacement<R>>,
}

impl<R: Real> Circuit<R> {
    pub fn new(n_qubits: usize, gates: Vec<GatePlacement<R>>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidGate("circuit needs at least one qubit".into()));
        }
        for g in &gates {
            let (a, b) = g.targets();
            if a >= n_qubits || b >= n_qubits {
                return Err(Error::InvalidGate(format!("target ({a},{b}) outside {n_qubits} qubits")));
            }
        }
        Ok(Self { n_qubits, gates })
    }

    pub fn empty(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[GatePlacement<R>] {
        &self.gates
    }

    /// Gate count G.
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: GatePlacement<R>) -> Result<()> {
        let (a, b) = gate.targets();
        if a >= self.n_qubits || b >= self.n_qubits {
            return Err(Error::InvalidGate(format!("target ({a},{b}) outside {} qubits", self.n_qubits)));
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Sorted union of all gate targets.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.gates.iter().flat_map(|g| [g.q1, g.q2]).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, found: other.n_qubits });
        }
        let mut gates = self.gates.clone();
        gates.extend(other.gates.iter().cloned());
        Ok(Self { n_qubits: self.n_qubits, gates })
    }

    pub fn inverse(&self) -> Self {
        Self { n_qubits: self.n_qubits, gates: self.gates.iter().rev().map(|g| g.adjoint()).collect() }
    }
}

/// The full unitary of `circuit` on the ordered qubit `subset` (identity on
/// subset qubits that no gate touches). `subset[0]` is the most significant.
pub fn circuit_unitary<R: Real>(circuit: &Circuit<R>, subset: &[usize], cap: usize) -> Result<DenseUnitary<R>> {
    if subset.len() > cap {
        return Err(Error::SupportCapExceeded { requested: subset.len(), cap });
    }
    let pos = |q: usize| subset.iter().position(|&s| s == q).ok_or(Error::TargetOutsideSubset(q));
    let placed: Vec<(usize, usize, &Matrix4<C<R>>)> = circuit
        .gates
        .iter()
        .map(|g| Ok((pos(g.q1)?, pos(g.q2)?, &g.matrix)))
        .collect::<Result<_>>()?;
    let k = subset.len();
    let d = 1usize << k;
    let mut m = DMatrix::<C<R>>::identity(d, d);
    for mut col in m.column_iter_mut() {
        let slice = col.as_mut_slice();
        for &(p1, p2, g) in &placed {
            kernel::apply_two(slice, k, p1, p2, g);
        }
    }
    Ok(DenseUnitary::new_unchecked(m))
}
