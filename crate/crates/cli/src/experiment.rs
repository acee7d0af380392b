//! Schedules for the named experiments and the run driver.

use std::path::Path;

use mvsim_core::multiverse::{run_multiverse, run_multiverse_with_workers};
use mvsim_core::qstate::basis_state;
use mvsim_core::{AlgorithmOp, Channel, ChannelSet, MultiverseRun, Schedule, StateVector, Step};

use crate::config::{ExperimentConfig, ExperimentKind, OutputFormat};
use crate::error::{CliError, CliResult};
use crate::export;

fn padded(nq: usize, mut steps: Vec<Step>, total: usize) -> CliResult<Schedule> {
    if steps.len() > total {
        return Err(CliError::Config(format!(
            "schedule needs {} steps, only {total} requested",
            steps.len()
        )));
    }
    steps.resize(total, Step::NoiseOnly);
    Ok(Schedule::new(nq, steps)?)
}

/// Hadamard, one noise interlude, Hadamard, then a noise tail.
pub fn mv1_schedule(steps: usize) -> CliResult<Schedule> {
    let h = || Step::Algorithm(AlgorithmOp::hadamard(1));
    padded(1, vec![h(), Step::NoiseOnly, h()], steps)
}

/// Bell preparation `CNOT₁₂ H₁` then its inverse `H₁ CNOT₁₂`, with a noise
/// interlude after every gate and a noise tail at the end.
pub fn mv2_schedule(steps: usize) -> CliResult<Schedule> {
    let ops = [
        AlgorithmOp::hadamard(1),
        AlgorithmOp::cnot(1, 2),
        AlgorithmOp::cnot(1, 2),
        AlgorithmOp::hadamard(1),
    ];
    padded(2, interleave(ops), steps)
}

/// `H₁` then `CNOT₁ₖ` for `k = 2..=nq` with noise in between and after.
pub fn mvn_schedule(nq: usize, steps: usize) -> CliResult<Schedule> {
    if nq < 2 {
        return Err(CliError::Config(format!("mvn needs nq >= 2, got {nq}")));
    }
    let ops =
        std::iter::once(AlgorithmOp::hadamard(1)).chain((2..=nq).map(|k| AlgorithmOp::cnot(1, k)));
    padded(nq, interleave(ops), steps)
}

fn interleave(ops: impl IntoIterator<Item = AlgorithmOp>) -> Vec<Step> {
    let mut steps = Vec::new();
    for op in ops {
        if !steps.is_empty() {
            steps.push(Step::NoiseOnly);
        }
        steps.push(Step::Algorithm(op));
    }
    steps
}

pub fn build_schedule(config: &ExperimentConfig) -> CliResult<Schedule> {
    match config.kind {
        ExperimentKind::Mv1 => mv1_schedule(config.steps),
        ExperimentKind::Mv2 => mv2_schedule(config.steps),
        ExperimentKind::Mvn => mvn_schedule(config.nq, config.steps),
        ExperimentKind::Custom => padded(config.nq, config.circuit.clone(), config.steps),
    }
}

pub fn initial_state(config: &ExperimentConfig) -> CliResult<StateVector> {
    Ok(basis_state(config.nq, config.initial)?)
}

/// Runs the configured experiment. The seed must be set.
pub fn run_experiment(config: &ExperimentConfig) -> CliResult<MultiverseRun> {
    config.require_seed()?;
    let schedule = build_schedule(config)?;
    let psi = initial_state(config)?;
    let run = match config.workers {
        Some(w) => run_multiverse_with_workers(&psi, &schedule, &config.model, w)?,
        None => run_multiverse(&psi, &schedule, &config.model)?,
    };
    Ok(run)
}

/// Cumulative suppression sets: nothing, then X, X+Y, X+Y+Z, and finally
/// every enabled channel if that adds anything.
pub fn suppression_ladder(enabled: ChannelSet) -> Vec<ChannelSet> {
    let mut rungs = vec![ChannelSet::empty()];
    let mut current = ChannelSet::empty();
    for c in [Channel::X, Channel::Y, Channel::Z] {
        current.insert(c);
        rungs.push(current);
    }
    if enabled.iter().any(|c| !current.contains(c)) {
        rungs.push(Channel::ALL.into_iter().collect());
    }
    rungs
}

/// Runs [`run_experiment`] once per rung of [`suppression_ladder`].
pub fn run_ladder(config: &ExperimentConfig) -> CliResult<Vec<(ChannelSet, MultiverseRun)>> {
    suppression_ladder(config.model.channels)
        .into_iter()
        .map(|set| {
            let mut c = config.clone();
            c.model.suppressed = set;
            run_experiment(&c).map(|r| (set, r))
        })
        .collect()
}

pub fn render_trace(run: &MultiverseRun, format: OutputFormat) -> Vec<u8> {
    let mut buf = Vec::new();
    export::write_trace(&run.trace, format, &mut buf).expect("writing to memory");
    buf
}

/// Writes `bytes` to `path`, or to standard output when `path` is `None`.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> CliResult<()> {
    use std::io::Write;
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => match std::io::stdout().write_all(bytes) {
            // A closed reader (e.g. `| head`) is not a failure of the run.
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r.map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RawConfig;

    fn gate_positions(s: &Schedule) -> Vec<(usize, String, Vec<usize>)> {
        s.steps()
            .iter()
            .enumerate()
            .filter_map(|(i, st)| match st {
                Step::Algorithm(op) => Some((i + 1, op.label.clone(), op.qubits.clone())),
                Step::NoiseOnly => None,
            })
            .collect()
    }

    #[test]
    fn mv1_layout() {
        let s = mv1_schedule(6).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(
            gate_positions(&s),
            vec![(1, "H".into(), vec![1]), (3, "H".into(), vec![1])]
        );
        assert!(mv1_schedule(2).is_err());
    }

    #[test]
    fn mv2_layout() {
        let s = mv2_schedule(10).unwrap();
        let g = gate_positions(&s);
        assert_eq!(g.iter().map(|x| x.0).collect::<Vec<_>>(), vec![1, 3, 5, 7]);
        assert_eq!(g[1].2, vec![1, 2]);
    }

    #[test]
    fn mvn_ends_chain_on_ninth_step_for_five_qubits() {
        let s = mvn_schedule(5, 12).unwrap();
        let g = gate_positions(&s);
        assert_eq!(g.len(), 5);
        assert_eq!(g.last().unwrap(), &(9, "CNOT".into(), vec![1, 5]));
        assert!(matches!(s.steps()[9], Step::NoiseOnly));
    }

    #[test]
    fn mvn_ideal_output_is_ghz() {
        let s = mvn_schedule(4, 7).unwrap();
        let out = s.ideal_output(&basis_state(4, 0).unwrap()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitude(0).re - h).abs() < 1e-12);
        assert!((out.amplitude(15).re - h).abs() < 1e-12);
    }

    #[test]
    fn ladder_rungs() {
        let rungs = suppression_ladder(ChannelSet::PAULI);
        assert_eq!(rungs.len(), 4);
        assert!(rungs[0].is_empty());
        assert_eq!(rungs[3].len(), 3);
        let all: ChannelSet = Channel::ALL.into_iter().collect();
        assert_eq!(suppression_ladder(all).len(), 5);
    }

    #[test]
    fn unseeded_runs_are_rejected() {
        let c = RawConfig::parse("experiment = mv1")
            .unwrap()
            .resolve()
            .unwrap();
        assert!(matches!(run_experiment(&c), Err(CliError::Config(_))));
    }

    #[test]
    fn trace_has_one_row_per_step() {
        let c = RawConfig::parse("experiment = mv2\nsteps = 12\nseed = 5\npaths = 3")
            .unwrap()
            .resolve()
            .unwrap();
        let run = run_experiment(&c).unwrap();
        let csv = String::from_utf8(render_trace(&run, OutputFormat::Csv)).unwrap();
        assert_eq!(csv.lines().count(), 13);
    }
}
