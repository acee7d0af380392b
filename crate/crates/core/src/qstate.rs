//! Register states, basis labelling and partner-index enumeration.
//!
//! The decimal label of a basis state is `n = Σ q_i · 2^(nq−i)` with `q_1`
//! the most significant bit. Flipping qubit `is` moves the label by its
//! stride `2^(nq−is)`, which is what the gate kernels use to find the
//! amplitudes a k-qubit operator couples.

use rand::Rng;

use crate::{Error, Result, C64, STATE_TOL};

/// Largest register size the crate will index (amplitude counts must fit a `usize` shift).
pub const MAX_QUBITS: usize = 30;

/// Array of `2^nq` complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    nq: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Builds a state from raw amplitudes, checking length and normalization.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let state = Self::from_amplitudes_unnormalized(amps)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Like [`StateVector::from_amplitudes`] but without the norm check; used
    /// for the output of non-unitary kernels such as projectors.
    pub fn from_amplitudes_unnormalized(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let nq = len.trailing_zeros() as usize;
        if nq > MAX_QUBITS {
            return Err(Error::NotPowerOfTwo(len));
        }
        Ok(Self { nq, amps })
    }

    pub fn nq(&self) -> usize {
        self.nq
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn amplitude(&self, n: usize) -> C64 {
        self.amps[n]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`, the pure-state fidelity.
    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }
}

/// Bit string `q_1 … q_nq`, most significant first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QubitLabel {
    bits: Vec<u8>,
}

impl QubitLabel {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::ZeroQubits);
        }
        if bits.len() > MAX_QUBITS {
            return Err(Error::QubitOutOfRange {
                qubit: bits.len(),
                nq: MAX_QUBITS,
            });
        }
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidBit(b));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn nq(&self) -> usize {
        self.bits.len()
    }
}

impl std::fmt::Display for QubitLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Outcome of a single-qubit projective measurement.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    pub bit: u8,
    pub probability: f64,
    pub collapsed: StateVector,
}

fn check_nq(nq: usize) -> Result<()> {
    if nq == 0 {
        Err(Error::ZeroQubits)
    } else if nq > MAX_QUBITS {
        Err(Error::QubitOutOfRange {
            qubit: nq,
            nq: MAX_QUBITS,
        })
    } else {
        Ok(())
    }
}

pub(crate) fn check_qubit(nq: usize, qubit: usize) -> Result<()> {
    if qubit == 0 || qubit > nq {
        Err(Error::QubitOutOfRange { qubit, nq })
    } else {
        Ok(())
    }
}

/// Computational basis state `|n⟩` on `nq` qubits.
pub fn basis_state(nq: usize, n: usize) -> Result<StateVector> {
    check_nq(nq)?;
    let dim = 1usize << nq;
    if n >= dim {
        return Err(Error::IndexOutOfRange { index: n, nq });
    }
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    amps[n] = C64::new(1.0, 0.0);
    Ok(StateVector { nq, amps })
}

pub fn decimal_to_bits(n: usize, nq: usize) -> Result<QubitLabel> {
    check_nq(nq)?;
    if n >> nq != 0 {
        return Err(Error::IndexOutOfRange { index: n, nq });
    }
    let bits = (1..=nq).map(|i| ((n >> (nq - i)) & 1) as u8).collect();
    Ok(QubitLabel { bits })
}

pub fn bits_to_decimal(label: &QubitLabel) -> usize {
    label
        .bits
        .iter()
        .fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

/// `2^(nq−is)`, the index distance between states differing only in qubit `is`.
pub fn stride(nq: usize, is: usize) -> Result<usize> {
    check_nq(nq)?;
    check_qubit(nq, is)?;
    Ok(1usize << (nq - is))
}

/// Index layout shared by all partner groups of a k-qubit operator.
///
/// `offsets[t]` is the displacement of the group member whose target bits
/// read `t` (first listed qubit most significant) from the group's base
/// index. Base indices are the labels with every target bit cleared.
#[derive(Debug, Clone)]
pub struct GroupLayout {
    nq: usize,
    offsets: Vec<usize>,
    /// Bit positions (0 = least significant) of the target qubits, ascending.
    cleared: Vec<u32>,
}

impl GroupLayout {
    pub fn new(nq: usize, qubits: &[usize]) -> Result<Self> {
        check_nq(nq)?;
        if qubits.is_empty() || qubits.len() > nq {
            return Err(Error::InvalidSubset(format!(
                "{} target qubits on a {nq}-qubit register",
                qubits.len()
            )));
        }
        for (i, &q) in qubits.iter().enumerate() {
            check_qubit(nq, q)?;
            if qubits[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        let k = qubits.len();
        let strides: Vec<usize> = qubits.iter().map(|&q| 1usize << (nq - q)).collect();
        let offsets = (0..1usize << k)
            .map(|t| {
                strides
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| (t >> (k - 1 - j)) & 1 == 1)
                    .map(|(_, s)| s)
                    .sum()
            })
            .collect();
        let mut cleared: Vec<u32> = qubits.iter().map(|&q| (nq - q) as u32).collect();
        cleared.sort_unstable();
        Ok(Self {
            nq,
            offsets,
            cleared,
        })
    }

    pub fn group_size(&self) -> usize {
        self.offsets.len()
    }

    pub fn group_count(&self) -> usize {
        (1usize << self.nq) / self.offsets.len()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Base index of the `k`-th group, ascending in `k`.
    #[inline]
    pub fn base(&self, k: usize) -> usize {
        let mut n = k;
        for &p in &self.cleared {
            let low = n & ((1usize << p) - 1);
            n = ((n ^ low) << 1) | low;
        }
        n
    }

    pub fn bases(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.group_count()).map(move |k| self.base(k))
    }

    /// All groups as index lists, ascending by base index.
    pub fn groups(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.bases()
            .map(move |b| self.offsets.iter().map(|o| b + o).collect())
    }
}

/// Pairs `(n0, n1)` of labels differing only in qubit `is`, with `q_is(n0) = 0`.
pub fn pick1(nq: usize, is: usize) -> Result<Vec<(usize, usize)>> {
    let layout = GroupLayout::new(nq, &[is])?;
    let s = layout.offsets()[1];
    Ok(layout.bases().map(|b| (b, b + s)).collect())
}

/// Quartets `(n00, n01, n10, n11)` ordered by the bits of `(is1, is2)`.
pub fn pick2(nq: usize, is1: usize, is2: usize) -> Result<Vec<[usize; 4]>> {
    let layout = GroupLayout::new(nq, &[is1, is2])?;
    let o = layout.offsets();
    Ok(layout
        .bases()
        .map(|b| [b + o[0], b + o[1], b + o[2], b + o[3]])
        .collect())
}

/// Octets ordered by the bit pattern of `(is1, is2, is3)` from 000 to 111.
pub fn pick3(nq: usize, is1: usize, is2: usize, is3: usize) -> Result<Vec<[usize; 8]>> {
    let layout = GroupLayout::new(nq, &[is1, is2, is3])?;
    let o = layout.offsets();
    Ok(layout
        .bases()
        .map(|b| std::array::from_fn(|t| b + o[t]))
        .collect())
}

/// `|a⟩ ⊗ |b⟩`, with the qubits of `a` more significant.
pub fn tensor_product(a: &StateVector, b: &StateVector) -> StateVector {
    let mut amps = Vec::with_capacity(a.dim() * b.dim());
    for &x in &a.amps {
        amps.extend(b.amps.iter().map(|&y| x * y));
    }
    StateVector {
        nq: a.nq + b.nq,
        amps,
    }
}

/// Probability that qubit `is` reads 1.
pub fn probability_one(psi: &StateVector, is: usize) -> Result<f64> {
    check_qubit(psi.nq, is)?;
    let shift = psi.nq - is;
    Ok(psi
        .amps
        .iter()
        .enumerate()
        .filter(|(n, _)| (n >> shift) & 1 == 1)
        .map(|(_, c)| c.norm_sqr())
        .sum())
}

/// Projectively measures qubit `is` and collapses the state onto the outcome.
pub fn measure_qubit<R: Rng + ?Sized>(
    psi: &StateVector,
    is: usize,
    rng: &mut R,
) -> Result<MeasurementOutcome> {
    let p1 = probability_one(psi, is)?;
    let total = psi.norm_sqr();
    let p1 = (p1 / total).clamp(0.0, 1.0);
    let draw: f64 = rng.random();
    // draw ∈ [0,1): a zero-probability branch can never be selected.
    let bit = u8::from(draw < p1);
    let probability = if bit == 1 { p1 } else { 1.0 - p1 };
    let scale = 1.0 / (probability * total).sqrt();
    let shift = psi.nq - is;
    let amps = psi
        .amps
        .iter()
        .enumerate()
        .map(|(n, &c)| {
            if ((n >> shift) & 1) as u8 == bit {
                c * scale
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(MeasurementOutcome {
        bit,
        probability,
        collapsed: StateVector { nq: psi.nq, amps },
    })
}
