//! Exact unitary reconstruction from classically described input/output
//! pairs on system ⊗ ancilla (`2n` qubits, index `system·d + ancilla`).

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::qcore::serial::{fmt_complex, fmt_real, parse_complex};
use crate::qcore::unitary::DenseUnitary;
use crate::scalar::{czero, modulus, Real, C};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataMode {
    /// Pure inputs `Σ_{i∈block} |i⟩|i⟩/√|block|`.
    Entangled,
    /// Mixtures of labelled basis inputs `|i⟩|i⟩`, described as weighted
    /// pure components.
    Mixed,
}

/// A pure component: input and output amplitudes on system ⊗ ancilla.
#[derive(Clone, Debug, PartialEq)]
pub struct Component<R: Real> {
    pub weight: R,
    pub input: DVector<C<R>>,
    pub output: DVector<C<R>>,
}

/// One data point: a single pure component in entangled mode, several in
/// mixed mode.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSample<R: Real> {
    pub components: Vec<Component<R>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalDataset<R: Real> {
    pub mode: DataMode,
    pub n: usize,
    pub r: usize,
    pub samples: Vec<DataSample<R>>,
}

/// Column blocks `[j·r, min((j+1)·r, d))`.
fn blocks(d: usize, r: usize) -> Vec<std::ops::Range<usize>> {
    (0..d.div_ceil(r)).map(|j| j * r..((j + 1) * r).min(d)).collect()
}

fn apply_system<R: Real>(u: &DenseUnitary<R>, input: &DVector<C<R>>) -> DVector<C<R>> {
    let d = u.dim();
    let m = DMatrix::from_column_slice(d, d, input.as_slice()).transpose();
    let out = u.matrix() * m;
    DVector::from_iterator(d * d, out.transpose().iter().cloned())
}

impl<R: Real> ClassicalDataset<R> {
    /// The `⌈2^n/r⌉` canonical entangled samples for `u`.
    pub fn canonical_entangled(u: &DenseUnitary<R>, r: usize) -> Result<Self> {
        let d = u.dim();
        check_rank(r, d)?;
        let samples = blocks(d, r)
            .into_iter()
            .map(|b| {
                let s = R::lit((b.len() as f64).sqrt());
                let mut input = DVector::from_element(d * d, czero());
                for i in b {
                    input[i * d + i] = C::new(R::one() / s, R::zero());
                }
                let output = apply_system(u, &input);
                DataSample { components: vec![Component { weight: R::one(), input, output }] }
            })
            .collect();
        Ok(Self { mode: DataMode::Entangled, n: u.qubits(), r, samples })
    }

    /// The `⌈2^n/r⌉` canonical mixed samples for `u`.
    pub fn canonical_mixed(u: &DenseUnitary<R>, r: usize) -> Result<Self> {
        let d = u.dim();
        check_rank(r, d)?;
        let samples = blocks(d, r)
            .into_iter()
            .map(|b| {
                let w = R::one() / R::lit(b.len() as f64);
                let components = b
                    .map(|i| {
                        let mut input = DVector::from_element(d * d, czero());
                        input[i * d + i] = C::new(R::one(), R::zero());
                        let output = apply_system(u, &input);
                        Component { weight: w, input, output }
                    })
                    .collect();
                DataSample { components }
            })
            .collect();
        Ok(Self { mode: DataMode::Mixed, n: u.qubits(), r, samples })
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mode = match self.mode {
            DataMode::Entangled => "entangled",
            DataMode::Mixed => "mixed",
        };
        writeln!(out, "mode {mode}").unwrap();
        writeln!(out, "n {}", self.n).unwrap();
        writeln!(out, "r {}", self.r).unwrap();
        writeln!(out, "samples {}", self.samples.len()).unwrap();
        let vec_line = |tag: &str, v: &DVector<C<R>>| {
            let entries: Vec<String> = v.iter().map(|z| fmt_complex(*z)).collect();
            format!("{tag} {}\n", entries.join(" "))
        };
        for s in &self.samples {
            writeln!(out, "sample {}", s.components.len()).unwrap();
            for c in &s.components {
                writeln!(out, "weight {}", fmt_real(c.weight)).unwrap();
                out.push_str(&vec_line("input", &c.input));
                out.push_str(&vec_line("output", &c.output));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        let mut next = |key: &str| -> Result<(usize, String)> {
            let (ln, l) = lines.next().ok_or_else(|| Error::parse(0, format!("unexpected end of file, expected `{key}`")))?;
            let rest = l.strip_prefix(key).ok_or_else(|| Error::parse(ln, format!("expected `{key}`")))?;
            Ok((ln, rest.trim().to_string()))
        };
        let num = |(ln, s): (usize, String)| s.parse::<usize>().map_err(|e| Error::parse(ln, e.to_string()));
        let (ln, mode) = next("mode")?;
        let mode = match mode.as_str() {
            "entangled" => DataMode::Entangled,
            "mixed" => DataMode::Mixed,
            other => return Err(Error::parse(ln, format!("unknown mode {other:?}"))),
        };
        let n = num(next("n")?)?;
        let r = num(next("r")?)?;
        let count = num(next("samples")?)?;
        let d2 = 1usize << (2 * n);
        let mut samples = Vec::with_capacity(count);
        for _ in 0..count {
            let comps = num(next("sample")?)?;
            let mut components = Vec::with_capacity(comps);
            for _ in 0..comps {
                let (ln, w) = next("weight")?;
                let weight = R::lit(w.parse::<f64>().map_err(|e| Error::parse(ln, e.to_string()))?);
                let mut vector = |key: &str| -> Result<DVector<C<R>>> {
                    let (ln, body) = next(key)?;
                    let v = body.split_whitespace().map(|t| parse_complex(t, ln)).collect::<Result<Vec<_>>>()?;
                    if v.len() != d2 {
                        return Err(Error::parse(ln, format!("expected {d2} amplitudes, found {}", v.len())));
                    }
                    Ok(DVector::from_vec(v))
                };
                let input = vector("input")?;
                let output = vector("output")?;
                components.push(Component { weight, input, output });
            }
            samples.push(DataSample { components });
        }
        Ok(Self { mode, n, r, samples })
    }
}

fn check_rank(r: usize, d: usize) -> Result<()> {
    if r == 0 || r > d {
        return Err(Error::InvalidDataset(format!("rank {r} outside 1..={d}")));
    }
    Ok(())
}

const AMP_FLOOR: f64 = 1e-12;

/// Fills `cols[i]` from one pure component whose input is diagonal
/// (`Σ a_i |i⟩|i⟩`): column `i` of `U` is `output[·, i] / a_i`.
fn read_columns<R: Real>(d: usize, c: &Component<R>, cols: &mut [Option<DVector<C<R>>>], single_only: bool) -> Result<()> {
    if c.input.len() != d * d || c.output.len() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, found: c.input.len().min(c.output.len()) });
    }
    let mut found = 0;
    for (idx, a) in c.input.iter().enumerate() {
        if modulus(*a).as_f64() <= AMP_FLOOR {
            continue;
        }
        let (s, anc) = (idx / d, idx % d);
        if s != anc {
            return Err(Error::InvalidDataset(format!("input amplitude off the |i⟩|i⟩ diagonal at ({s}, {anc})")));
        }
        found += 1;
        cols[s] = Some(DVector::from_fn(d, |k, _| c.output[k * d + s] / *a));
    }
    if single_only && found != 1 {
        return Err(Error::InvalidDataset(format!("mixed component must be a single labelled basis state, found {found} terms")));
    }
    Ok(())
}

fn assemble<R: Real>(d: usize, cols: Vec<Option<DVector<C<R>>>>) -> Result<DenseUnitary<R>> {
    let missing: Vec<usize> = cols.iter().enumerate().filter(|(_, c)| c.is_none()).map(|(i, _)| i).collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteDataset(format!("no data for columns {missing:?}")));
    }
    let cols: Vec<DVector<C<R>>> = cols.into_iter().map(Option::unwrap).collect();
    DenseUnitary::new(DMatrix::from_columns(&cols).resize(d, d, czero()))
}

/// Reads `U` column by column from entangled input/output pairs.
pub fn learn_from_entangled_data<R: Real>(dataset: &ClassicalDataset<R>) -> Result<DenseUnitary<R>> {
    if dataset.mode != DataMode::Entangled {
        return Err(Error::InvalidDataset("expected an entangled dataset".into()));
    }
    let d = dataset.dim();
    let mut cols = vec![None; d];
    for s in &dataset.samples {
        if s.components.len() != 1 {
            return Err(Error::InvalidDataset("entangled samples are pure".into()));
        }
        read_columns(d, &s.components[0], &mut cols, false)?;
    }
    assemble(d, cols)
}

/// Reads `U|i⟩` from each labelled component of the mixed samples.
pub fn learn_from_mixed_data<R: Real>(dataset: &ClassicalDataset<R>) -> Result<DenseUnitary<R>> {
    if dataset.mode != DataMode::Mixed {
        return Err(Error::InvalidDataset("expected a mixed dataset".into()));
    }
    let d = dataset.dim();
    let mut cols = vec![None; d];
    for s in &dataset.samples {
        for c in &s.components {
            read_columns(d, c, &mut cols, true)?;
        }
    }
    assemble(d, cols)
}
