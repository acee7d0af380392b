//! Three-qubit bit-flip and phase-flip repetition codes.
//!
//! Code qubits are 1..=3. Syndrome extraction appends two ancillas (qubits 4
//! and 5) that collect the parities `Z1Z2` and `Z2Z3`, measures them, and then
//! projects them out again so callers only ever see 3-qubit states.

use rand::Rng;

use crate::gatekit::{cnot, hadamard, op1, op2, pauli};
use crate::qstate::{basis_state, measure_qubit, tensor_product, StateVector};
use crate::{Error, Result, C64, STATE_TOL};

/// Ancilla readout `(Z1Z2, Z2Z3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Syndrome {
    pub bits: (u8, u8),
}

impl Syndrome {
    /// Code qubit implicated by a single flip, if any.
    pub fn flipped_qubit(self) -> Option<usize> {
        match self.bits {
            (0, 0) => None,
            (1, 0) => Some(1),
            (1, 1) => Some(2),
            (0, 1) => Some(3),
            _ => unreachable!("syndrome bits are 0 or 1"),
        }
    }
}

fn expect_qubits(psi: &StateVector, nq: usize) -> Result<()> {
    if psi.nq() != nq {
        Err(Error::DimensionMismatch(psi.dim(), 1 << nq))
    } else {
        Ok(())
    }
}

fn hadamard_all3(psi: &StateVector) -> Result<StateVector> {
    let h = hadamard();
    (1..=3).try_fold(psi.clone(), |s, q| op1(&h, q, &s))
}

/// `α|0⟩ + β|1⟩ → α|000⟩ + β|111⟩`.
pub fn encode_bitflip(psi: &StateVector) -> Result<StateVector> {
    expect_qubits(psi, 1)?;
    let padded = tensor_product(psi, &basis_state(2, 0)?);
    let c = cnot();
    op2(&c, 1, 3, &op2(&c, 1, 2, &padded)?)
}

/// Inverse of [`encode_bitflip`]; fails if qubits 2 and 3 are not left in `|00⟩`.
pub fn decode_bitflip(psi: &StateVector) -> Result<StateVector> {
    expect_qubits(psi, 3)?;
    let c = cnot();
    let undone = op2(&c, 1, 2, &op2(&c, 1, 3, psi)?)?;
    let a = undone.amplitudes();
    let residual: f64 = a
        .iter()
        .enumerate()
        .filter(|(n, _)| n & 0b011 != 0)
        .map(|(_, x)| x.norm_sqr())
        .sum();
    if residual > STATE_TOL {
        return Err(Error::Uncorrectable(residual));
    }
    StateVector::from_amplitudes_unnormalized(vec![a[0b000], a[0b100]])
}

/// Measures the two parity checks, flips the implicated qubit and returns the
/// corrected code state.
pub fn syndrome_and_correct_bitflip<R: Rng + ?Sized>(
    psi: &StateVector,
    rng: &mut R,
) -> Result<(StateVector, Syndrome)> {
    expect_qubits(psi, 3)?;
    let c = cnot();
    let mut s = tensor_product(psi, &basis_state(2, 0)?);
    for (control, ancilla) in [(1, 4), (2, 4), (2, 5), (3, 5)] {
        s = op2(&c, control, ancilla, &s)?;
    }
    let first = measure_qubit(&s, 4, rng)?;
    let second = measure_qubit(&first.collapsed, 5, rng)?;
    let syndrome = Syndrome {
        bits: (first.bit, second.bit),
    };

    // After both measurements the ancillas are in |s1 s2⟩; keep that slice.
    let ancilla = usize::from(first.bit) << 1 | usize::from(second.bit);
    let amps: Vec<C64> = (0..8)
        .map(|n| second.collapsed.amplitude(n << 2 | ancilla))
        .collect();
    let mut code = StateVector::from_amplitudes_unnormalized(amps)?;
    if let Some(q) = syndrome.flipped_qubit() {
        code = op1(&pauli(1)?, q, &code)?;
    }

    let residual: f64 = code.amplitudes()[1..7].iter().map(|x| x.norm_sqr()).sum();
    if residual > STATE_TOL {
        return Err(Error::Uncorrectable(residual));
    }
    Ok((code, syndrome))
}

/// Fidelity of a corrected state with the pre-error encoded state; a value
/// below `1 − 1e-10` means the error was not a correctable single flip.
pub fn check_recovery(corrected: &StateVector, reference: &StateVector) -> Result<f64> {
    let f = corrected.overlap(reference)?;
    if f < 1.0 - STATE_TOL {
        return Err(Error::Uncorrectable(1.0 - f));
    }
    Ok(f)
}

/// `α|0⟩ + β|1⟩ → α|+++⟩ + β|−−−⟩`.
pub fn encode_phaseflip(psi: &StateVector) -> Result<StateVector> {
    hadamard_all3(&encode_bitflip(psi)?)
}

pub fn decode_phaseflip(psi: &StateVector) -> Result<StateVector> {
    expect_qubits(psi, 3)?;
    decode_bitflip(&hadamard_all3(psi)?)
}

/// Bit-flip correction in the Hadamard-rotated basis; corrects one `σ_z` error.
pub fn syndrome_and_correct_phaseflip<R: Rng + ?Sized>(
    psi: &StateVector,
    rng: &mut R,
) -> Result<(StateVector, Syndrome)> {
    expect_qubits(psi, 3)?;
    let (fixed, syndrome) = syndrome_and_correct_bitflip(&hadamard_all3(psi)?, rng)?;
    Ok((hadamard_all3(&fixed)?, syndrome))
}
