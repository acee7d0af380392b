//! Brute-force oracles and random instances for tests.
//!
//! Everything here builds full-dimension operators with Kronecker products
//! and permutation matrices, independent of the stride enumeration used by
//! the kernels.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::densitylab::DensityMatrix;
use crate::gatekit::GateMatrix;
use crate::qstate::StateVector;
use crate::C64;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_state<R: Rng + ?Sized>(nq: usize, rng: &mut R) -> StateVector {
    let mut amps: Vec<C64> = (0..1usize << nq).map(|_| gaussian(rng)).collect();
    let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    StateVector::from_amplitudes(amps).expect("normalized by construction")
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(arity: usize, rng: &mut R) -> GateMatrix {
    let d = 1usize << arity;
    let g = DMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut entries = Vec::with_capacity(d * d);
    for row in 0..d {
        for col in 0..d {
            let phase = r[(col, col)] / r[(col, col)].norm();
            entries.push(q[(row, col)] * phase);
        }
    }
    GateMatrix::new(arity, entries).expect("square by construction")
}

/// `k` distinct qubits in random order.
pub fn random_qubits<R: Rng + ?Sized>(nq: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut all: Vec<usize> = (1..=nq).collect();
    all.shuffle(rng);
    all.truncate(k);
    all
}

/// Full-rank mixed state `G G† / Tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(nq: usize, rng: &mut R) -> DensityMatrix {
    let d = 1usize << nq;
    let g = DMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::new(nq, m / tr).expect("valid by construction")
}

pub fn to_column(psi: &StateVector) -> DMatrix<C64> {
    DMatrix::from_column_slice(psi.dim(), 1, psi.amplitudes())
}

/// Full `2^nq × 2^nq` operator for `gate` acting on `qubits`:
/// `P† (U ⊗ 1) P`, where `P` reorders the register so the targets come first.
pub fn dense_operator(gate: &GateMatrix, qubits: &[usize], nq: usize) -> DMatrix<C64> {
    let k = qubits.len();
    let d = gate.dim();
    let u = DMatrix::from_row_slice(d, d, gate.entries());
    let rest = DMatrix::<C64>::identity(1 << (nq - k), 1 << (nq - k));
    let kron = u.kronecker(&rest);

    let mut order: Vec<usize> = qubits.to_vec();
    order.extend((1..=nq).filter(|q| !qubits.contains(q)));
    let dim = 1usize << nq;
    let mut p = DMatrix::<C64>::zeros(dim, dim);
    for n in 0..dim {
        let bit = |q: usize| (n >> (nq - q)) & 1;
        let image = order.iter().fold(0usize, |acc, &q| (acc << 1) | bit(q));
        p[(image, n)] = C64::new(1.0, 0.0);
    }
    p.adjoint() * kron * p
}

pub fn dense_apply(gate: &GateMatrix, qubits: &[usize], psi: &StateVector) -> Vec<C64> {
    let full = dense_operator(gate, qubits, psi.nq());
    (full * to_column(psi)).iter().copied().collect()
}

/// Pauli-string operator: `σ_{k_i}` on qubit `i+1`, built by Kronecker products.
pub fn dense_pauli_string(components: &[usize]) -> DMatrix<C64> {
    let mut out = DMatrix::<C64>::identity(1, 1);
    for &k in components {
        let g = crate::gatekit::pauli(k).expect("valid component");
        out = out.kronecker(&DMatrix::from_row_slice(2, 2, g.entries()));
    }
    out
}
