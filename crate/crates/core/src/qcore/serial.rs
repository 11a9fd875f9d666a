//! Line-oriented circuit text format:
//!
//! ```text
//! n <qubits> g <gates>
//! <q1> <q2> <re,im> × 16     (one line per gate, row-major)
//! ```
//!
//! Entries are written with 17 significant digits so parsing restores the
//! exact bits.

use std::fmt::Write as _;

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::qcore::gate::{Circuit, GatePlacement};
use crate::scalar::{Real, C};

pub(crate) fn fmt_real<R: Real>(x: R) -> String {
    format!("{:.16e}", x.as_f64())
}

pub(crate) fn fmt_complex<R: Real>(z: C<R>) -> String {
    format!("{},{}", fmt_real(z.re), fmt_real(z.im))
}

pub(crate) fn parse_complex<R: Real>(tok: &str, line: usize) -> Result<C<R>> {
    let (re, im) = tok.split_once(',').ok_or_else(|| Error::parse(line, format!("expected re,im but found {tok:?}")))?;
    let p = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::parse(line, format!("{s:?}: {e}")));
    Ok(C::new(R::lit(p(re)?), R::lit(p(im)?)))
}

pub fn write_circuit<R: Real>(circuit: &Circuit<R>) -> String {
    let mut out = String::new();
    writeln!(out, "n {} g {}", circuit.n_qubits(), circuit.len()).unwrap();
    for g in circuit.gates() {
        let (a, b) = g.targets();
        write!(out, "{a} {b}").unwrap();
        for r in 0..4 {
            for col in 0..4 {
                write!(out, " {}", fmt_complex(g.matrix()[(r, col)])).unwrap();
            }
        }
        out.push('\n');
    }
    out
}

pub fn read_circuit<R: Real>(text: &str) -> Result<Circuit<R>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (ln, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let (n, g) = match h.as_slice() {
        ["n", n, "g", g] => (
            n.parse::<usize>().map_err(|e| Error::parse(ln, e.to_string()))?,
            g.parse::<usize>().map_err(|e| Error::parse(ln, e.to_string()))?,
        ),
        _ => return Err(Error::parse(ln, "header must read `n <int> g <int>`")),
    };
    let mut gates = Vec::with_capacity(g);
    for (ln, line) in lines.by_ref().take(g) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 18 {
            return Err(Error::parse(ln, format!("expected 18 fields, found {}", toks.len())));
        }
        let q = |s: &str| s.parse::<usize>().map_err(|e| Error::parse(ln, e.to_string()));
        let entries: Vec<C<R>> = toks[2..].iter().map(|t| parse_complex(t, ln)).collect::<Result<_>>()?;
        let m = Matrix4::from_row_slice(&entries);
        gates.push(GatePlacement::new(m, q(toks[0])?, q(toks[1])?)?);
    }
    if gates.len() != g {
        return Err(Error::parse(ln, format!("header promises {g} gates, found {}", gates.len())));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::parse(ln, "trailing content after the last gate"));
    }
    Circuit::new(n, gates)
}
