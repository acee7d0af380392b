//! Text renderings of state vectors.

use std::f64::consts::PI;

use mvsim_core::qstate::decimal_to_bits;
use mvsim_core::{StateVector, C64};

use crate::numfmt;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

fn label(n: usize, nq: usize) -> String {
    decimal_to_bits(n, nq)
        .expect("index within register")
        .to_string()
}

/// Coefficient text and whether it carries a leading minus that can be
/// folded into the term separator.
fn coefficient(c: C64, tol: f64) -> (bool, String) {
    let s = |x: f64| numfmt::significant(x, 5);
    let (re, im) = (c.re.abs() >= tol, c.im.abs() >= tol);
    match (re, im) {
        (true, false) | (false, false) => (c.re < 0.0, s(c.re.abs())),
        (false, true) => (c.im < 0.0, format!("{}i", s(c.im.abs()))),
        (true, true) => {
            let sign = if c.im < 0.0 { '-' } else { '+' };
            (false, format!("({}{sign}{}i)", s(c.re), s(c.im.abs())))
        }
    }
}

/// `Σ C_n |bits⟩` over amplitudes with `|C_n| ≥ tol`, five significant digits.
pub fn dirac_form(psi: &StateVector, tol: f64) -> String {
    let mut out = String::new();
    for (n, &c) in psi.amplitudes().iter().enumerate() {
        if c.norm() < tol {
            continue;
        }
        let (negative, text) = coefficient(c, tol);
        match (out.is_empty(), negative) {
            (true, false) => {}
            (true, true) => out.push('-'),
            (false, false) => out.push_str(" + "),
            (false, true) => out.push_str(" - "),
        }
        out.push_str(&text);
        out.push('|');
        out.push_str(&label(n, psi.nq()));
        out.push('⟩');
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Reads back the `(index, amplitude)` pairs printed by [`dirac_form`].
pub fn parse_dirac(text: &str) -> Option<Vec<(usize, C64)>> {
    let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if text == "0" {
        return Some(Vec::new());
    }
    let mut terms = Vec::new();
    for chunk in text.split('⟩').filter(|s| !s.is_empty()) {
        let (sign, body) = match chunk.as_bytes()[0] {
            b'+' => (1.0, &chunk[1..]),
            b'-' => (-1.0, &chunk[1..]),
            _ => (1.0, chunk),
        };
        let (coef, bits) = body.split_once('|')?;
        if bits.is_empty() || !bits.bytes().all(|b| b == b'0' || b == b'1') {
            return None;
        }
        let index = usize::from_str_radix(bits, 2).ok()?;
        terms.push((index, parse_coefficient(coef)? * sign));
    }
    Some(terms)
}

fn parse_coefficient(s: &str) -> Option<C64> {
    if let Some(inner) = s.strip_prefix('(').and_then(|t| t.strip_suffix("i)")) {
        let split = inner
            .char_indices()
            .skip(1)
            .filter(|&(i, c)| (c == '+' || c == '-') && !inner[..i].ends_with('e'))
            .map(|(i, _)| i)
            .last()?;
        let re: f64 = inner[..split].parse().ok()?;
        let im: f64 = inner[split..].parse().ok()?;
        return Some(C64::new(re, im));
    }
    if let Some(im) = s.strip_suffix('i') {
        return Some(C64::new(0.0, im.parse().ok()?));
    }
    Some(C64::new(s.parse().ok()?, 0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeRow {
    pub index: usize,
    pub bits: String,
    pub magnitude: f64,
    /// Radians in `(−π, π]`.
    pub phase: f64,
}

/// Folds `atan2` output onto `(−π, π]`.
pub fn principal_phase(c: C64) -> f64 {
    let phi = c.im.atan2(c.re);
    if phi <= -PI {
        phi + 2.0 * PI
    } else {
        phi
    }
}

/// Rows for amplitudes with `|C_n| ≥ tol`.
pub fn amplitude_rows(psi: &StateVector, tol: f64) -> Vec<AmplitudeRow> {
    psi.amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() >= tol)
        .map(|(n, &c)| AmplitudeRow {
            index: n,
            bits: label(n, psi.nq()),
            magnitude: c.norm(),
            phase: principal_phase(c),
        })
        .collect()
}

pub fn amplitude_table(psi: &StateVector, tol: f64) -> String {
    let rows = amplitude_rows(psi, tol);
    let bits_width = psi.nq().max(4);
    let index_width = (psi.dim() - 1).to_string().len().max(5);
    let mut out = format!(
        "{:>iw$}  {:<bw$}  {:>12}  {:>12}\n",
        "index",
        "bits",
        "magnitude",
        "phase",
        iw = index_width,
        bw = bits_width
    );
    for r in rows {
        out.push_str(&format!(
            "{:>iw$}  {:<bw$}  {:>12}  {:>12}\n",
            r.index,
            r.bits,
            numfmt::general(r.magnitude, 6),
            numfmt::general(r.phase, 6),
            iw = index_width,
            bw = bits_width
        ));
    }
    out
}
