//! Metrics-trace files.
//!
//! Both formats carry the same table: one row per schedule step, columns
//! `step, fidelity, purity, entropy, eig_0.., px_q,py_q,pz_q per qubit, then
//! c{a}{b}_{ij}` row-major per qubit pair. Every value is rendered once with
//! six significant digits and JSON numbers are parsed back from that text, so
//! the two exports agree digit for digit. JSON additionally carries the
//! step-0 record under `initial`; it is not one of the rows.

use std::io::Write;

use mvsim_core::{MetricsRecord, MetricsTrace};
use serde::Serialize;

use crate::config::OutputFormat;
use crate::numfmt;

const AXES: [char; 3] = ['x', 'y', 'z'];

pub fn columns(nq: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["step", "fidelity", "purity", "entropy"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend((0..1usize << nq).map(|k| format!("eig_{k}")));
    for q in 1..=nq {
        cols.extend(AXES.iter().map(|a| format!("p{a}_q{q}")));
    }
    for a in 1..=nq {
        for b in a + 1..=nq {
            for i in AXES {
                for j in AXES {
                    cols.push(format!("c{i}{j}_q{a}q{b}"));
                }
            }
        }
    }
    cols
}

/// Formatted cells of one record, in [`columns`] order.
pub fn row(record: &MetricsRecord) -> Vec<String> {
    let f = |x: f64| numfmt::general(x, 6);
    let mut cells = vec![
        record.step.to_string(),
        f(record.fidelity),
        f(record.purity),
        f(record.entropy),
    ];
    cells.extend(record.eigenvalues.iter().map(|&e| f(e)));
    for p in &record.bloch.polarization {
        cells.extend(p.iter().map(|&v| f(v)));
    }
    for (_, c) in &record.bloch.correlation {
        cells.extend(c.iter().flatten().map(|&v| f(v)));
    }
    cells
}

pub fn rows(trace: &MetricsTrace) -> Vec<Vec<String>> {
    trace.steps.iter().map(row).collect()
}

pub fn write_csv<W: Write>(trace: &MetricsTrace, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{}", columns(trace.nq).join(","))?;
    for r in rows(trace) {
        writeln!(out, "{}", r.join(","))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonTrace {
    nq: usize,
    columns: Vec<String>,
    /// The step-0 record, before any gate or noise.
    initial: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

fn parsed(cells: &[String]) -> Vec<f64> {
    cells
        .iter()
        .map(|c| c.parse::<f64>().expect("formatted number"))
        .collect()
}

pub fn write_json<W: Write>(trace: &MetricsTrace, out: &mut W) -> std::io::Result<()> {
    let doc = JsonTrace {
        nq: trace.nq,
        columns: columns(trace.nq),
        initial: parsed(&row(&trace.initial)),
        rows: rows(trace).iter().map(|r| parsed(r)).collect(),
    };
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)
}

pub fn write_trace<W: Write>(
    trace: &MetricsTrace,
    format: OutputFormat,
    out: &mut W,
) -> std::io::Result<()> {
    match format {
        OutputFormat::Csv => write_csv(trace, out),
        OutputFormat::Json => write_json(trace, out),
    }
}
