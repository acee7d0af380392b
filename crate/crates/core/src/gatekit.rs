//! Gate matrices and the strided application kernels.
//!
//! A k-qubit gate is stored as its `2^k × 2^k` matrix, rows and columns
//! ordered by the bit pattern of the target qubits in the order they are
//! passed to the kernel. Applying it to a register touches each partner group
//! from [`GroupLayout`] independently; the groups are disjoint, so the result
//! does not depend on the order in which they are visited.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use rand::Rng;

use crate::densitylab::DensityMatrix;
use crate::qstate::{GroupLayout, StateVector};
use crate::{Error, Result, C64};

const UNITARY_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Dense `2^arity × 2^arity` operator, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix {
    arity: usize,
    entries: Vec<C64>,
}

impl GateMatrix {
    pub fn new(arity: usize, entries: Vec<C64>) -> Result<Self> {
        if !(1..=3).contains(&arity) {
            return Err(Error::ArityMismatch {
                gate: arity,
                targets: arity,
            });
        }
        let d = 1usize << arity;
        if entries.len() != d * d {
            return Err(Error::BadMatrixSize {
                got: entries.len(),
                expected: d * d,
            });
        }
        Ok(Self { arity, entries })
    }

    /// Single-qubit gate from its rows.
    pub fn from_2x2(m: [[C64; 2]; 2]) -> Self {
        Self {
            arity: 1,
            entries: m.iter().flatten().copied().collect(),
        }
    }

    pub fn identity(arity: usize) -> Self {
        let d = 1usize << arity;
        let mut entries = vec![ZERO; d * d];
        for i in 0..d {
            entries[i * d + i] = ONE;
        }
        Self { arity, entries }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim() + col]
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim();
        let mut entries = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.entries[r * d + c].conj();
            }
        }
        Self {
            arity: self.arity,
            entries,
        }
    }

    /// Elementwise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            arity: self.arity,
            entries: self.entries.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            arity: self.arity,
            entries: self.entries.iter().map(|c| c * factor).collect(),
        }
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &GateMatrix) -> Result<Self> {
        if self.arity != rhs.arity {
            return Err(Error::ArityMismatch {
                gate: self.arity,
                targets: rhs.arity,
            });
        }
        let d = self.dim();
        let mut entries = vec![ZERO; d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.entries[r * d + k];
                for c in 0..d {
                    entries[r * d + c] += a * rhs.entries[k * d + c];
                }
            }
        }
        Ok(Self {
            arity: self.arity,
            entries,
        })
    }

    /// Largest entry of `|U·U† − 1|`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let s: C64 = (0..d)
                    .map(|k| self.entries[r * d + k] * self.entries[c * d + k].conj())
                    .sum();
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Checks unitarity of a user-supplied matrix.
    pub fn validate_unitary(&self) -> Result<()> {
        let defect = self.unitarity_defect();
        if defect > UNITARY_TOL {
            Err(Error::NotUnitary(defect))
        } else {
            Ok(())
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.arity)
    }
}

/// Pauli matrix `σ_k`, with `σ_0` the identity.
pub fn pauli(k: usize) -> Result<GateMatrix> {
    let m = match k {
        0 => [[ONE, ZERO], [ZERO, ONE]],
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -I], [I, ZERO]],
        3 => [[ONE, ZERO], [ZERO, -ONE]],
        _ => return Err(Error::InvalidPauli(k)),
    };
    Ok(GateMatrix::from_2x2(m))
}

pub fn hadamard() -> GateMatrix {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    GateMatrix::from_2x2([[h, h], [h, -h]])
}

fn permutation(arity: usize, map: impl Fn(usize) -> usize) -> GateMatrix {
    let d = 1usize << arity;
    let mut entries = vec![ZERO; d * d];
    for col in 0..d {
        entries[map(col) * d + col] = ONE;
    }
    GateMatrix { arity, entries }
}

/// CNOT with the first target qubit as control.
pub fn cnot() -> GateMatrix {
    permutation(2, |n| if n & 0b10 != 0 { n ^ 0b01 } else { n })
}

/// `diag(1, 1, 1, e^{iθ})`.
pub fn controlled_phase(theta: f64) -> GateMatrix {
    let mut g = GateMatrix::identity(2);
    g.entries[15] = C64::from_polar(1.0, theta);
    g
}

/// Toffoli: flips the third qubit when the first two are set.
pub fn toffoli() -> GateMatrix {
    permutation(3, |n| if n & 0b110 == 0b110 { n ^ 0b001 } else { n })
}

/// `exp(−i(θ/2) n̂·σ)` for a unit axis `n̂`.
pub fn axis_rotation(theta: f64, axis: [f64; 3]) -> GateMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    let [nx, ny, nz] = axis;
    GateMatrix::from_2x2([
        [C64::new(c, -s * nz), C64::new(-s * ny, -s * nx)],
        [C64::new(s * ny, -s * nx), C64::new(c, s * nz)],
    ])
}

/// Random single-qubit rotation: angle uniform on `[0, 2π)`, axis uniform on the sphere.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> GateMatrix {
    let theta = 2.0 * PI * rng.random::<f64>();
    let cos_polar = 2.0 * rng.random::<f64>() - 1.0;
    let azimuth = 2.0 * PI * rng.random::<f64>();
    let sin_polar = (1.0 - cos_polar * cos_polar).max(0.0).sqrt();
    axis_rotation(
        theta,
        [
            sin_polar * azimuth.cos(),
            sin_polar * azimuth.sin(),
            cos_polar,
        ],
    )
}

/// Applies `gate` to every partner group of `layout` within a strided view of
/// `data`: element `n` of the view lives at `data[offset + n * step]`.
pub(crate) fn apply_kernel(
    gate: &GateMatrix,
    layout: &GroupLayout,
    data: &mut [C64],
    offset: usize,
    step: usize,
) {
    let d = gate.dim();
    let offsets = layout.offsets();
    let m = gate.entries();
    let mut slots = [0usize; 8];
    let mut input = [ZERO; 8];
    for base in layout.bases() {
        for t in 0..d {
            slots[t] = offset + (base + offsets[t]) * step;
            input[t] = data[slots[t]];
        }
        for r in 0..d {
            let row = &m[r * d..(r + 1) * d];
            data[slots[r]] = row.iter().zip(&input[..d]).map(|(a, b)| a * b).sum();
        }
    }
}

fn apply(gate: &GateMatrix, qubits: &[usize], psi: &StateVector) -> Result<StateVector> {
    if gate.arity() != qubits.len() {
        return Err(Error::ArityMismatch {
            gate: gate.arity(),
            targets: qubits.len(),
        });
    }
    let layout = GroupLayout::new(psi.nq(), qubits)?;
    let mut out = psi.clone();
    apply_kernel(gate, &layout, out.amps_mut(), 0, 1);
    Ok(out)
}

/// Applies a 1-qubit gate to qubit `is` via the 2×2 pair kernel.
pub fn op1(gate: &GateMatrix, is: usize, psi: &StateVector) -> Result<StateVector> {
    apply(gate, &[is], psi)
}

/// Applies a 2-qubit gate; rows are ordered by the bits of `(is1, is2)`.
pub fn op2(gate: &GateMatrix, is1: usize, is2: usize, psi: &StateVector) -> Result<StateVector> {
    apply(gate, &[is1, is2], psi)
}

pub fn op3(
    gate: &GateMatrix,
    is1: usize,
    is2: usize,
    is3: usize,
    psi: &StateVector,
) -> Result<StateVector> {
    apply(gate, &[is1, is2, is3], psi)
}

/// Dispatches on the number of target qubits.
pub fn op_k(gate: &GateMatrix, qubits: &[usize], psi: &StateVector) -> Result<StateVector> {
    apply(gate, qubits, psi)
}

/// The same 1-qubit gate on every qubit, 1 through nq.
pub fn omega_all(gate: &GateMatrix, psi: &StateVector) -> Result<StateVector> {
    if gate.arity() != 1 {
        return Err(Error::ArityMismatch {
            gate: gate.arity(),
            targets: 1,
        });
    }
    let mut out = psi.clone();
    for is in 1..=psi.nq() {
        let layout = GroupLayout::new(psi.nq(), &[is])?;
        apply_kernel(gate, &layout, out.amps_mut(), 0, 1);
    }
    Ok(out)
}

/// In-place `ρ → Ω ρ Ω†` on a column-major matrix.
pub(crate) fn conjugate_matrix_in_place(
    gate: &GateMatrix,
    layout: &GroupLayout,
    m: &mut DMatrix<C64>,
) {
    let dim = m.nrows();
    let conj = gate.conj();
    let data = m.as_mut_slice();
    // Ω acts on every column (contiguous in column-major storage).
    for col in 0..dim {
        apply_kernel(gate, layout, data, col * dim, 1);
    }
    // Right multiplication by Ω† acts on every row with conj(Ω).
    for row in 0..dim {
        apply_kernel(&conj, layout, data, row, dim);
    }
}

/// `Ω ρ Ω†` using the strided kernel on columns and then rows.
pub fn conjugate_density(
    gate: &GateMatrix,
    qubits: &[usize],
    rho: &DensityMatrix,
) -> Result<DensityMatrix> {
    if gate.arity() != qubits.len() {
        return Err(Error::ArityMismatch {
            gate: gate.arity(),
            targets: qubits.len(),
        });
    }
    let layout = GroupLayout::new(rho.nq(), qubits)?;
    let mut m = rho.matrix().clone();
    conjugate_matrix_in_place(gate, &layout, &mut m);
    Ok(DensityMatrix::from_matrix_unchecked(rho.nq(), m))
}
