//! Density matrices, ensemble averages and decoherence diagnostics.

use nalgebra::DMatrix;

use crate::gatekit::pauli;
use crate::qstate::{check_qubit, StateVector};
use crate::{Error, Result, C64, STATE_TOL};

/// Eigenvalues more negative than this are reported instead of clamped.
const NEGATIVE_EIG_TOL: f64 = 1e-8;
const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Hermitian, unit-trace `2^nq × 2^nq` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    nq: usize,
    m: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates shape, hermiticity and trace.
    pub fn new(nq: usize, m: DMatrix<C64>) -> Result<Self> {
        let dim = 1usize << nq;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch(dim, m.nrows().max(m.ncols())));
        }
        let rho = Self { nq, m };
        rho.validate(STATE_TOL)?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(nq: usize, m: DMatrix<C64>) -> Self {
        Self { nq, m }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        let d = a.len();
        Self {
            nq: psi.nq(),
            m: DMatrix::from_fn(d, d, |r, c| a[r] * a[c].conj()),
        }
    }

    pub fn maximally_mixed(nq: usize) -> Self {
        let d = 1usize << nq;
        Self {
            nq,
            m: DMatrix::identity(d, d) / C64::new(d as f64, 0.0),
        }
    }

    pub fn nq(&self) -> usize {
        self.nq
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    /// Real part of the trace.
    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// `max |ρ − ρ†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for c in 0..d {
            for r in c..d {
                worst = worst.max((self.m[(r, c)] - self.m[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let h = self.hermiticity_defect();
        if h > tol {
            return Err(Error::NotHermitian(h));
        }
        let tr = self.m.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidTrace(tr.re));
        }
        Ok(())
    }

    pub(crate) fn hermitized(&self) -> DMatrix<C64> {
        (&self.m + self.m.adjoint()) * C64::new(0.5, 0.0)
    }
}

/// `C_ij = Tr[σ_i ⊗ σ_j ρ]`, indexed `[i][j]` over x, y, z.
pub type CorrelationTensor = [[f64; 3]; 3];

/// Per-qubit polarizations and per-pair correlation tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochData {
    /// `polarization[i]` belongs to qubit `i + 1`.
    pub polarization: Vec<[f64; 3]>,
    /// `((q1, q2), C)` for every pair `q1 < q2`.
    pub correlation: Vec<((usize, usize), CorrelationTensor)>,
}

pub fn pure_density(psi: &StateVector) -> DensityMatrix {
    DensityMatrix::pure(psi)
}

/// `Σ w_i ρ_i`.
pub fn ensemble_average(weights: &[f64], rhos: &[DensityMatrix]) -> Result<DensityMatrix> {
    if weights.len() != rhos.len() || rhos.is_empty() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} matrices",
            weights.len(),
            rhos.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
        return Err(Error::InvalidWeights(format!("negative weight {w}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {total}")));
    }
    let nq = rhos[0].nq;
    let mut acc = DMatrix::<C64>::zeros(rhos[0].dim(), rhos[0].dim());
    for (w, rho) in weights.iter().zip(rhos) {
        if rho.nq != nq {
            return Err(Error::DimensionMismatch(rhos[0].dim(), rho.dim()));
        }
        acc += &rho.m * C64::new(*w, 0.0);
    }
    Ok(DensityMatrix { nq, m: acc })
}

/// Real spectrum of a Hermitian matrix, descending.
fn hermitian_spectrum(m: DMatrix<C64>) -> Vec<f64> {
    let mut vals: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

/// Eigenvalues of `ρ`, descending.
pub fn eigenvalues(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let h = rho.hermiticity_defect();
    if h > STATE_TOL {
        return Err(Error::NotHermitian(h));
    }
    Ok(hermitian_spectrum(rho.hermitized()))
}

/// Von Neumann entropy in bits, `−Σ λ log₂ λ`.
pub fn entropy(rho: &DensityMatrix) -> f64 {
    hermitian_spectrum(rho.hermitized())
        .into_iter()
        .map(|l| l.clamp(0.0, 1.0))
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum()
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let mut s = 0.0;
    for r in 0..d {
        for c in 0..d {
            s += (rho.m[(r, c)] * rho.m[(c, r)]).re;
        }
    }
    s
}

fn clamp_nonnegative(l: f64) -> Result<f64> {
    if l < -NEGATIVE_EIG_TOL {
        Err(Error::NegativeEigenvalue(l))
    } else {
        Ok(l.max(0.0))
    }
}

/// Magnitude below which an eigenvalue is indistinguishable from round-off.
///
/// Square roots amplify round-off near zero (`√1e-17 ≈ 3e-9`), so spectra
/// fed to a square root are floored at this level first.
fn spectral_floor(dim: usize, largest: f64) -> f64 {
    16.0 * dim as f64 * f64::EPSILON * largest.max(1.0)
}

fn floored_sqrt(l: f64, floor: f64) -> f64 {
    if l.abs() <= floor {
        0.0
    } else {
        l.sqrt()
    }
}

/// Principal square root of a positive semidefinite Hermitian matrix.
fn psd_sqrt(m: DMatrix<C64>) -> Result<DMatrix<C64>> {
    let eig = m.symmetric_eigen();
    let largest = eig.eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let floor = spectral_floor(eig.eigenvalues.len(), largest);
    let mut scaled = eig.eigenvectors.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let s = floored_sqrt(clamp_nonnegative(l)?, floor);
        scaled.column_mut(j).scale_mut(s);
    }
    Ok(scaled * eig.eigenvectors.adjoint())
}

fn same_shape(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        Err(Error::DimensionMismatch(a.dim(), b.dim()))
    } else {
        Ok(())
    }
}

/// Uhlmann fidelity `Tr √(√ρ₀ ρ √ρ₀)`.
pub fn fidelity(rho: &DensityMatrix, rho0: &DensityMatrix) -> Result<f64> {
    same_shape(rho, rho0)?;
    let s = psd_sqrt(rho0.hermitized())?;
    let inner = &s * rho.hermitized() * &s;
    let inner = (&inner + inner.adjoint()) * C64::new(0.5, 0.0);
    let spectrum = hermitian_spectrum(inner);
    let floor = spectral_floor(spectrum.len(), spectrum[0].abs());
    spectrum
        .into_iter()
        .map(|l| clamp_nonnegative(l).map(|l| floored_sqrt(l, floor)))
        .sum()
}

/// `Σ √|λ_i|` over the (generally complex) eigenvalues of `ρ·ρ₀`.
///
/// Exact when `ρ₀` is pure.
pub fn fidelity_approx(rho: &DensityMatrix, rho0: &DensityMatrix) -> Result<f64> {
    same_shape(rho, rho0)?;
    let product = &rho.m * &rho0.m;
    let schur = product
        .try_schur(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Solver("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let moduli: Vec<f64> = t.diagonal().iter().map(|l| l.norm()).collect();
    let floor = spectral_floor(moduli.len(), moduli.iter().fold(0.0, |a, &b| a.max(b)));
    Ok(moduli.into_iter().map(|l| floored_sqrt(l, floor)).sum())
}

fn compose_index(
    nq: usize,
    keep: &[usize],
    kept_bits: usize,
    rest: &[usize],
    rest_bits: usize,
) -> usize {
    let mut n = 0usize;
    for (j, &q) in keep.iter().enumerate() {
        n |= ((kept_bits >> (keep.len() - 1 - j)) & 1) << (nq - q);
    }
    for (j, &q) in rest.iter().enumerate() {
        n |= ((rest_bits >> (rest.len() - 1 - j)) & 1) << (nq - q);
    }
    n
}

/// Reduced density matrix on the strictly increasing qubit subset `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let nq = rho.nq;
    if keep.is_empty() {
        return Err(Error::InvalidSubset("empty subset".into()));
    }
    for (i, &q) in keep.iter().enumerate() {
        check_qubit(nq, q)?;
        if i > 0 && keep[i - 1] >= q {
            return Err(Error::InvalidSubset(format!(
                "{keep:?} is not strictly increasing"
            )));
        }
    }
    let rest: Vec<usize> = (1..=nq).filter(|q| !keep.contains(q)).collect();
    let k = keep.len();
    let kd = 1usize << k;
    let rd = 1usize << rest.len();
    let mut out = DMatrix::<C64>::zeros(kd, kd);
    for c in 0..kd {
        for r in 0..kd {
            out[(r, c)] = (0..rd)
                .map(|t| {
                    rho.m[(
                        compose_index(nq, keep, r, &rest, t),
                        compose_index(nq, keep, c, &rest, t),
                    )]
                })
                .sum();
        }
    }
    Ok(DensityMatrix { nq: k, m: out })
}

/// `Tr[A ρ]` for a small dense operator `A` given row-major.
fn expectation(op: &[C64], rho: &DMatrix<C64>) -> f64 {
    let d = rho.nrows();
    let mut s = C64::new(0.0, 0.0);
    for r in 0..d {
        for c in 0..d {
            s += op[r * d + c] * rho[(c, r)];
        }
    }
    s.re
}

fn paulis() -> [Vec<C64>; 3] {
    [1, 2, 3].map(|k| pauli(k).expect("valid").entries().to_vec())
}

/// Polarization `P = Tr[σ ρ_q]` of qubit `qubit`.
pub fn bloch_vector(rho: &DensityMatrix, qubit: usize) -> Result<[f64; 3]> {
    let reduced = partial_trace(rho, &[qubit])?;
    let s = paulis();
    Ok([0, 1, 2].map(|i| expectation(&s[i], &reduced.m)))
}

fn kron2(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); 16];
    for (ar, ac, br, bc) in (0..2).flat_map(|ar| {
        (0..2).flat_map(move |ac| (0..2).flat_map(move |br| (0..2).map(move |bc| (ar, ac, br, bc))))
    }) {
        out[(2 * ar + br) * 4 + 2 * ac + bc] = a[ar * 2 + ac] * b[br * 2 + bc];
    }
    out
}

/// Spin correlation tensor `C_ij = Tr[σ_i^(q1) σ_j^(q2) ρ]`.
pub fn correlation_tensor(rho: &DensityMatrix, q1: usize, q2: usize) -> Result<CorrelationTensor> {
    if q1 == q2 {
        return Err(Error::DuplicateQubit(q1));
    }
    let (lo, hi) = (q1.min(q2), q1.max(q2));
    let reduced = partial_trace(rho, &[lo, hi])?;
    let s = paulis();
    let mut c = [[0.0; 3]; 3];
    for (i, row) in c.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            // σ_i sits on q1, σ_j on q2; the reduced basis orders (lo, hi).
            let op = if q1 < q2 {
                kron2(&s[i], &s[j])
            } else {
                kron2(&s[j], &s[i])
            };
            *v = expectation(&op, &reduced.m);
        }
    }
    Ok(c)
}

pub fn bloch_data(rho: &DensityMatrix) -> Result<BlochData> {
    let nq = rho.nq;
    let polarization = (1..=nq)
        .map(|q| bloch_vector(rho, q))
        .collect::<Result<_>>()?;
    let mut correlation = Vec::new();
    for a in 1..=nq {
        for b in a + 1..=nq {
            correlation.push(((a, b), correlation_tensor(rho, a, b)?));
        }
    }
    Ok(BlochData {
        polarization,
        correlation,
    })
}
