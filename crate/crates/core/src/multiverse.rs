//! Ensemble ("multiverse") evolution of a density matrix under sampled noise.
//!
//! At every step the ideal path keeps weight `p`, and each of `paths` noisy
//! paths contributes a single-hit event (weight `ε·p1/paths`) and a
//! double-hit event (weight `ε·p2/paths`). The averaged matrix is then
//! conjugated by the step's algorithm gate, if any:
//!
//! ```text
//! ρ_{n+1} = Ω_A ( p ρ_n + ε/np Σ_k Σ_s p_s Ω_ks ρ_n Ω_ks† ) Ω_A†
//! ```
//!
//! All events are sampled up front from per-event random substreams, so a
//! rerun with some channels suppressed sees exactly the same event stream.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;

use crate::densitylab::{self, BlochData, DensityMatrix};
use crate::gatekit::{self, GateMatrix};
use crate::qstate::{GroupLayout, StateVector};
use crate::{rng, Error, Result, C64, STATE_TOL};

const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    X,
    Y,
    Z,
    /// Random single-qubit rotation.
    General,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::X, Channel::Y, Channel::Z, Channel::General];

    pub fn name(self) -> &'static str {
        match self {
            Channel::X => "x",
            Channel::Y => "y",
            Channel::Z => "z",
            Channel::General => "general",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "x" => Some(Channel::X),
            "y" => Some(Channel::Y),
            "z" => Some(Channel::Z),
            "general" | "g" | "rotation" => Some(Channel::General),
            _ => None,
        }
    }

    fn bit(self) -> u8 {
        1 << self as u8
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Small set of channels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ChannelSet(u8);

impl ChannelSet {
    pub const PAULI: ChannelSet = ChannelSet(0b0111);

    pub fn empty() -> Self {
        Self(0)
    }

    pub fn contains(self, c: Channel) -> bool {
        self.0 & c.bit() != 0
    }

    pub fn insert(&mut self, c: Channel) {
        self.0 |= c.bit();
    }

    pub fn remove(&mut self, c: Channel) {
        self.0 &= !c.bit();
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Members in the fixed order X, Y, Z, General.
    pub fn iter(self) -> impl Iterator<Item = Channel> {
        Channel::ALL.into_iter().filter(move |c| self.contains(*c))
    }
}

impl FromIterator<Channel> for ChannelSet {
    fn from_iter<I: IntoIterator<Item = Channel>>(iter: I) -> Self {
        let mut s = Self::empty();
        for c in iter {
            s.insert(c);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    /// Weight of the ideal path.
    pub p: f64,
    /// Total weight of the noisy paths, `1 − p`.
    pub epsilon: f64,
    /// Fraction of noise that is a single one-qubit hit.
    pub p1: f64,
    /// Fraction of noise that is two one-qubit hits on distinct qubits.
    pub p2: f64,
    /// Number of noisy paths.
    pub paths: usize,
    /// Channels that noise hits are drawn from.
    pub channels: ChannelSet,
    /// Channels whose hits are replaced by the identity when applied.
    pub suppressed: ChannelSet,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            p: 0.8,
            epsilon: 0.2,
            p1: 0.95,
            p2: 0.05,
            paths: 8,
            channels: ChannelSet::PAULI,
            suppressed: ChannelSet::empty(),
            seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn noiseless(seed: u64) -> Self {
        Self {
            p: 1.0,
            epsilon: 0.0,
            seed,
            ..Self::default()
        }
    }

    /// Sets `p` (and `ε = 1 − p`).
    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self.epsilon = 1.0 - p;
        self
    }

    /// Sets `p1` (and `p2 = 1 − p1`).
    pub fn with_p1(mut self, p1: f64) -> Self {
        self.p1 = p1;
        self.p2 = 1.0 - p1;
        self
    }

    pub fn with_paths(mut self, paths: usize) -> Self {
        self.paths = paths;
        self
    }

    pub fn with_channels(mut self, channels: ChannelSet) -> Self {
        self.channels = channels;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn is_noiseless(&self) -> bool {
        self.epsilon == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidNoiseModel(msg));
        for (name, v) in [
            ("p", self.p),
            ("epsilon", self.epsilon),
            ("p1", self.p1),
            ("p2", self.p2),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} is not a probability"));
            }
        }
        if (self.p + self.epsilon - 1.0).abs() > PROB_TOL {
            return bad(format!("p + epsilon = {}", self.p + self.epsilon));
        }
        if (self.p1 + self.p2 - 1.0).abs() > PROB_TOL {
            return bad(format!("p1 + p2 = {}", self.p1 + self.p2));
        }
        if self.paths == 0 || self.paths as u64 > rng::MAX_PATH {
            return bad(format!("path count {} out of range", self.paths));
        }
        if !self.is_noiseless() && self.channels.is_empty() {
            return bad("no noise channel enabled".into());
        }
        Ok(())
    }

    /// Weight of a single event of the given branch.
    pub fn event_weight(&self, branch: u8) -> f64 {
        let ps = if branch == 1 { self.p1 } else { self.p2 };
        self.epsilon * ps / self.paths as f64
    }
}

/// Copy of `model` in which hits on `channel` act as the identity. The
/// sampled event stream is unchanged.
pub fn suppress_channel(model: &NoiseModel, channel: Channel) -> NoiseModel {
    let mut out = model.clone();
    if model.channels.contains(channel) {
        out.suppressed.insert(channel);
    }
    out
}

/// A one-qubit noise operator acting on `qubit`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseHit {
    pub qubit: usize,
    pub channel: Channel,
    /// Sampled rotation for [`Channel::General`] hits.
    pub rotation: Option<GateMatrix>,
}

impl NoiseHit {
    pub fn operator(&self) -> GateMatrix {
        match (self.channel, &self.rotation) {
            (Channel::General, Some(u)) => u.clone(),
            (Channel::General, None) => GateMatrix::identity(1),
            (c, _) => gatekit::pauli(c as usize + 1).expect("pauli component in range"),
        }
    }
}

/// Noise hits on one path at one step; `branch` 1 has one hit, branch 2 two.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEvent {
    pub step: usize,
    /// 1-based path number.
    pub path: usize,
    pub branch: u8,
    pub hits: Vec<NoiseHit>,
}

impl NoiseEvent {
    /// Hits that survive suppression, as `(qubit, operator)` in application order.
    pub fn active_factors(&self, model: &NoiseModel) -> Vec<(usize, GateMatrix)> {
        self.hits
            .iter()
            .filter(|h| !model.suppressed.contains(h.channel))
            .map(|h| (h.qubit, h.operator()))
            .collect()
    }
}

fn sample_event(
    model: &NoiseModel,
    nq: usize,
    step: usize,
    path: usize,
    branch: u8,
) -> Result<NoiseEvent> {
    let mut rng = rng::substream(model.seed, step as u64, path as u64, branch)?;
    let enabled: Vec<Channel> = model.channels.iter().collect();
    let mut hits: Vec<NoiseHit> = Vec::with_capacity(branch as usize);
    for _ in 0..branch {
        let qubit = match hits.first() {
            // A one-qubit register takes both hits on its only qubit.
            Some(first) if nq > 1 => {
                let q = rng.random_range(1..nq);
                if q >= first.qubit {
                    q + 1
                } else {
                    q
                }
            }
            _ => rng.random_range(1..=nq),
        };
        let channel = enabled[rng.random_range(0..enabled.len())];
        let rotation = (channel == Channel::General).then(|| gatekit::random_rotation(&mut rng));
        hits.push(NoiseHit {
            qubit,
            channel,
            rotation,
        });
    }
    Ok(NoiseEvent {
        step,
        path,
        branch,
        hits,
    })
}

/// Noise events for one step: per path, the single-hit event and then the
/// double-hit event (branches with zero weight are skipped).
pub fn sample_noise_operators(
    model: &NoiseModel,
    nq: usize,
    step: usize,
) -> Result<Vec<NoiseEvent>> {
    model.validate()?;
    if nq == 0 {
        return Err(Error::ZeroQubits);
    }
    if model.is_noiseless() {
        return Ok(Vec::new());
    }
    let branches: Vec<u8> = [(1u8, model.p1), (2u8, model.p2)]
        .into_iter()
        .filter(|(_, w)| *w > 0.0)
        .map(|(b, _)| b)
        .collect();
    let mut events = Vec::with_capacity(model.paths * branches.len());
    for path in 1..=model.paths {
        for &b in &branches {
            events.push(sample_event(model, nq, step, path, b)?);
        }
    }
    Ok(events)
}

/// Events for steps `1..=steps`, one list per step.
pub fn sample_run_events(
    model: &NoiseModel,
    nq: usize,
    steps: usize,
) -> Result<Vec<Vec<NoiseEvent>>> {
    (1..=steps)
        .into_par_iter()
        .map(|s| sample_noise_operators(model, nq, s))
        .collect()
}

/// One gate of the algorithm being run.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmOp {
    pub label: String,
    pub gate: GateMatrix,
    pub qubits: Vec<usize>,
}

impl AlgorithmOp {
    pub fn new(label: impl Into<String>, gate: GateMatrix, qubits: Vec<usize>) -> Result<Self> {
        if gate.arity() != qubits.len() {
            return Err(Error::ArityMismatch {
                gate: gate.arity(),
                targets: qubits.len(),
            });
        }
        Ok(Self {
            label: label.into(),
            gate,
            qubits,
        })
    }

    pub fn hadamard(q: usize) -> Self {
        Self {
            label: "H".into(),
            gate: gatekit::hadamard(),
            qubits: vec![q],
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self {
            label: "CNOT".into(),
            gate: gatekit::cnot(),
            qubits: vec![control, target],
        }
    }

    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Self {
        Self {
            label: "TOFFOLI".into(),
            gate: gatekit::toffoli(),
            qubits: vec![c1, c2, target],
        }
    }

    pub fn apply_to_state(&self, psi: &StateVector) -> Result<StateVector> {
        gatekit::op_k(&self.gate, &self.qubits, psi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Algorithm(AlgorithmOp),
    /// A step where only noise acts.
    NoiseOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    nq: usize,
    steps: Vec<Step>,
}

impl Schedule {
    pub fn new(nq: usize, steps: Vec<Step>) -> Result<Self> {
        if nq == 0 {
            return Err(Error::ZeroQubits);
        }
        for (i, step) in steps.iter().enumerate() {
            if let Step::Algorithm(op) = step {
                GroupLayout::new(nq, &op.qubits)
                    .map_err(|e| Error::InvalidSchedule(format!("step {}: {e}", i + 1)))?;
            }
        }
        Ok(Self { nq, steps })
    }

    pub fn nq(&self) -> usize {
        self.nq
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Noiseless output of the algorithm gates applied to `initial`.
    pub fn ideal_output(&self, initial: &StateVector) -> Result<StateVector> {
        let mut psi = initial.clone();
        for step in &self.steps {
            if let Step::Algorithm(op) = step {
                psi = op.apply_to_state(&psi)?;
            }
        }
        Ok(psi)
    }
}

/// `coefficient · F_last ⋯ F_first`, each factor a one-qubit operator.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausOperator {
    pub coefficient: f64,
    pub factors: Vec<(usize, GateMatrix)>,
}

impl KrausOperator {
    /// `K ρ K†`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let mut m = conjugate_factors(&self.factors, rho)?;
        m *= C64::new(self.coefficient * self.coefficient, 0.0);
        Ok(DensityMatrix::from_matrix_unchecked(rho.nq(), m))
    }
}

fn conjugate_factors(
    factors: &[(usize, GateMatrix)],
    rho: &DensityMatrix,
) -> Result<nalgebra::DMatrix<C64>> {
    let mut m = rho.matrix().clone();
    for (q, g) in factors {
        let layout = GroupLayout::new(rho.nq(), &[*q])?;
        gatekit::conjugate_matrix_in_place(g, &layout, &mut m);
    }
    Ok(m)
}

/// Kraus form of one storage step: `√p·1` followed by `√(ε p_s / np)·Ω_ks`.
pub fn povm_decomposition(model: &NoiseModel, events: &[NoiseEvent]) -> Vec<KrausOperator> {
    let mut ops = vec![KrausOperator {
        coefficient: model.p.sqrt(),
        factors: Vec::new(),
    }];
    ops.extend(events.iter().map(|e| KrausOperator {
        coefficient: model.event_weight(e.branch).sqrt(),
        factors: e.active_factors(model),
    }));
    ops
}

/// `Σ K ρ K†`.
pub fn apply_kraus(ops: &[KrausOperator], rho: &DensityMatrix) -> Result<DensityMatrix> {
    let mut acc = nalgebra::DMatrix::<C64>::zeros(rho.dim(), rho.dim());
    for k in ops {
        acc += k.apply(rho)?.matrix();
    }
    Ok(DensityMatrix::from_matrix_unchecked(rho.nq(), acc))
}

/// One step of the ensemble recurrence.
///
/// Evaluated as `ρ + Σ_e w_e (Ω_e ρ Ω_e† − ρ)`, which equals
/// `p ρ + Σ_e w_e Ω_e ρ Ω_e†` because the weights sum to `ε = 1 − p`;
/// events whose hits are all suppressed drop out exactly.
pub fn evolve_step(
    rho: &DensityMatrix,
    algo: Option<&AlgorithmOp>,
    events: &[NoiseEvent],
    model: &NoiseModel,
) -> Result<DensityMatrix> {
    let active: Vec<(f64, Vec<(usize, GateMatrix)>)> = events
        .iter()
        .map(|e| (model.event_weight(e.branch), e.active_factors(model)))
        .filter(|(w, f)| *w > 0.0 && !f.is_empty())
        .collect();
    let terms: Vec<nalgebra::DMatrix<C64>> = active
        .par_iter()
        .map(|(_, f)| conjugate_factors(f, rho))
        .collect::<Result<_>>()?;

    let mut m = rho.matrix().clone();
    for ((w, _), term) in active.iter().zip(terms) {
        m += (term - rho.matrix()) * C64::new(*w, 0.0);
    }
    if let Some(op) = algo {
        if op.gate.arity() != op.qubits.len() {
            return Err(Error::ArityMismatch {
                gate: op.gate.arity(),
                targets: op.qubits.len(),
            });
        }
        let layout = GroupLayout::new(rho.nq(), &op.qubits)?;
        gatekit::conjugate_matrix_in_place(&op.gate, &layout, &mut m);
    }
    let out = DensityMatrix::from_matrix_unchecked(rho.nq(), m);
    out.validate(STATE_TOL)
        .map_err(|e| Error::InvariantViolation(format!("ensemble step: {e}")))?;
    Ok(out)
}

/// Diagnostics of the ensemble state after one step.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    /// 0 for the initial state.
    pub step: usize,
    /// Fidelity against the initial state.
    pub fidelity: f64,
    pub purity: f64,
    /// Entropy in bits.
    pub entropy: f64,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub bloch: BlochData,
}

impl MetricsRecord {
    pub fn measure(step: usize, rho: &DensityMatrix, rho0: &DensityMatrix) -> Result<Self> {
        Ok(Self {
            step,
            fidelity: densitylab::fidelity(rho, rho0)?,
            purity: densitylab::purity(rho),
            entropy: densitylab::entropy(rho),
            eigenvalues: densitylab::eigenvalues(rho)?,
            bloch: densitylab::bloch_data(rho)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTrace {
    pub nq: usize,
    /// Metrics of the initial state, before step 1.
    pub initial: MetricsRecord,
    /// One record per schedule step, in order.
    pub steps: Vec<MetricsRecord>,
}

impl MetricsTrace {
    pub fn last(&self) -> &MetricsRecord {
        self.steps.last().unwrap_or(&self.initial)
    }

    pub fn fidelities(&self) -> Vec<f64> {
        self.steps.iter().map(|r| r.fidelity).collect()
    }
}

#[derive(Debug, Clone)]
pub struct MultiverseRun {
    pub trace: MetricsTrace,
    pub final_rho: DensityMatrix,
}

/// Runs `schedule` from `initial`, sampling every noise event up front.
pub fn run_multiverse(
    initial: &StateVector,
    schedule: &Schedule,
    model: &NoiseModel,
) -> Result<MultiverseRun> {
    model.validate()?;
    let events = sample_run_events(model, schedule.nq(), schedule.len())?;
    run_with_events(initial, schedule, model, &events)
}

/// [`run_multiverse`] on a dedicated pool of `workers` threads.
pub fn run_multiverse_with_workers(
    initial: &StateVector,
    schedule: &Schedule,
    model: &NoiseModel,
    workers: usize,
) -> Result<MultiverseRun> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvariantViolation(format!("thread pool: {e}")))?;
    pool.install(|| run_multiverse(initial, schedule, model))
}

/// Runs `schedule` against a pre-sampled event stream (`events[n]` is step `n + 1`).
pub fn run_with_events(
    initial: &StateVector,
    schedule: &Schedule,
    model: &NoiseModel,
    events: &[Vec<NoiseEvent>],
) -> Result<MultiverseRun> {
    model.validate()?;
    if initial.nq() != schedule.nq() {
        return Err(Error::DimensionMismatch(initial.dim(), 1 << schedule.nq()));
    }
    if !model.is_noiseless() && events.len() < schedule.len() {
        return Err(Error::InvalidSchedule(format!(
            "{} event lists for {} steps",
            events.len(),
            schedule.len()
        )));
    }
    let rho0 = DensityMatrix::pure(initial);
    let initial_record = MetricsRecord::measure(0, &rho0, &rho0)?;
    let mut rho = rho0.clone();
    let mut records = Vec::with_capacity(schedule.len());
    for (i, step) in schedule.steps().iter().enumerate() {
        let algo = match step {
            Step::Algorithm(op) => Some(op),
            Step::NoiseOnly => None,
        };
        let step_events = events.get(i).map(Vec::as_slice).unwrap_or(&[]);
        rho = evolve_step(&rho, algo, step_events, model)?;
        records.push(MetricsRecord::measure(i + 1, &rho, &rho0)?);
    }
    Ok(MultiverseRun {
        trace: MetricsTrace {
            nq: schedule.nq(),
            initial: initial_record,
            steps: records,
        },
        final_rho: rho,
    })
}
