//! ASCII circuit sketches: one wire per qubit, time running left to right.

use mvsim_core::gatekit;
use mvsim_core::{AlgorithmOp, Schedule, Step};

/// Symbols for one step, indexed by qubit (0-based). `None` is bare wire.
fn column(step: &Step, nq: usize) -> Vec<Option<String>> {
    let mut cells = vec![None; nq];
    match step {
        Step::NoiseOnly => cells.iter_mut().for_each(|c| *c = Some("N".to_string())),
        Step::Algorithm(op) => {
            let marks = marks(op);
            let lo = *op.qubits.iter().min().expect("non-empty");
            let hi = *op.qubits.iter().max().expect("non-empty");
            for q in lo + 1..hi {
                cells[q - 1] = Some("│".to_string());
            }
            for (&q, m) in op.qubits.iter().zip(marks) {
                cells[q - 1] = Some(m);
            }
        }
    }
    cells
}

fn marks(op: &AlgorithmOp) -> Vec<String> {
    let k = op.qubits.len();
    let controlled_not =
        (k == 2 && op.gate == gatekit::cnot()) || (k == 3 && op.gate == gatekit::toffoli());
    if controlled_not {
        let mut m = vec!["●".to_string(); k - 1];
        m.push("⊕".to_string());
        m
    } else {
        vec![format!("[{}]", op.label); k]
    }
}

pub fn ascii_circuit(schedule: &Schedule) -> String {
    let nq = schedule.nq();
    let columns: Vec<Vec<Option<String>>> =
        schedule.steps().iter().map(|s| column(s, nq)).collect();
    let widths: Vec<usize> = columns
        .iter()
        .map(|col| {
            col.iter()
                .flatten()
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(1)
        })
        .collect();
    let tag_width = format!("q{nq}").len();
    let mut out = String::new();
    for q in 0..nq {
        let tag = format!("q{}", q + 1);
        out.push_str(&format!("{tag:<tag_width$}: ─"));
        for (col, &w) in columns.iter().zip(&widths) {
            let cell = col[q].as_deref().unwrap_or("─");
            let len = cell.chars().count();
            let left = (w - len) / 2;
            out.push('─');
            out.push_str(&"─".repeat(left));
            out.push_str(cell);
            out.push_str(&"─".repeat(w - len - left));
            out.push('─');
        }
        out.push_str("─\n");
    }
    out
}
