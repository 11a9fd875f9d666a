//! Candidate nets for hypothesis selection.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metrics::{davg, df_prime, diamond_distance, trace_distance_pure};
use crate::qcore::gate::{circuit_unitary, Circuit, GatePlacement};
use crate::qcore::random::sample_haar_unitary;
use crate::qcore::serial::{fmt_complex, read_circuit, write_circuit};
use crate::qcore::state::{run_circuit, PureState};
use crate::qcore::unitary::DenseUnitary;
use crate::scalar::Real;

pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// Finite set of two-qubit gates.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSet<R: Real> {
    names: Vec<String>,
    gates: Vec<DenseUnitary<R>>,
}

impl<R: Real> GateSet<R> {
    pub fn new(gates: Vec<DenseUnitary<R>>) -> Result<Self> {
        let names = (0..gates.len()).map(|i| format!("g{i}")).collect();
        Self::named(names, gates)
    }

    pub fn named(names: Vec<String>, gates: Vec<DenseUnitary<R>>) -> Result<Self> {
        if gates.is_empty() {
            return Err(Error::Config("gate set is empty".into()));
        }
        if names.len() != gates.len() {
            return Err(Error::LengthMismatch { expected: gates.len(), found: names.len() });
        }
        if let Some(g) = gates.iter().find(|g| g.dim() != 4) {
            return Err(Error::DimensionMismatch { expected: 4, found: g.dim() });
        }
        Ok(Self { names, gates })
    }

    /// `g` independent Haar-random two-qubit gates.
    pub fn random_haar<G: Rng + ?Sized>(g: usize, rng: &mut G) -> Self {
        let gates = (0..g).map(|_| sample_haar_unitary(4, rng)).collect();
        Self::new(gates).expect("non-empty Haar gate set")
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gates(&self) -> &[DenseUnitary<R>] {
        &self.gates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// SHA-256 over the serialized gate entries, hex encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for g in &self.gates {
            for z in g.matrix().iter() {
                h.update(fmt_complex(*z).as_bytes());
                h.update(b";");
            }
            h.update(b"|");
        }
        h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
            write!(s, "{b:02x}").unwrap();
            s
        })
    }
}

/// Ordered target pairs of a G-gate circuit.
pub type Configuration = Vec<(usize, usize)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NetMode {
    State,
    Unitary,
}

#[derive(Clone, Debug)]
pub enum NetCache<R: Real> {
    /// Output states `C|0⟩`.
    States(Vec<PureState<R>>),
    /// Unitaries restricted to the ordered `support`.
    Unitaries { support: Vec<usize>, unitaries: Vec<DenseUnitary<R>> },
}

/// Candidate list with cached images. `circuits` is empty for nets built
/// directly from states or unitaries.
#[derive(Clone, Debug)]
pub struct CandidateNet<R: Real> {
    circuits: Vec<Circuit<R>>,
    cache: NetCache<R>,
    complete: bool,
}

impl<R: Real> CandidateNet<R> {
    /// Builds caches for `circuits`. In unitary mode the support is the
    /// union of all gate targets.
    pub fn from_circuits(circuits: Vec<Circuit<R>>, mode: NetMode, cap: usize) -> Result<Self> {
        let first = circuits.first().ok_or(Error::EmptyNet)?;
        let n = first.n_qubits();
        if let Some(c) = circuits.iter().find(|c| c.n_qubits() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: c.n_qubits() });
        }
        let cache = match mode {
            NetMode::State => {
                let zero = PureState::zero(n).with_cap(cap)?;
                NetCache::States(circuits.par_iter().map(|c| run_circuit(c, &zero)).collect::<Result<_>>()?)
            }
            NetMode::Unitary => {
                let mut support: Vec<usize> = circuits.iter().flat_map(|c| c.support()).collect();
                support.sort_unstable();
                support.dedup();
                let unitaries = circuits.par_iter().map(|c| circuit_unitary(c, &support, cap)).collect::<Result<_>>()?;
                NetCache::Unitaries { support, unitaries }
            }
        };
        Ok(Self { circuits, cache, complete: true })
    }

    pub fn from_states(states: Vec<PureState<R>>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptyNet);
        }
        Ok(Self { circuits: Vec::new(), cache: NetCache::States(states), complete: true })
    }

    pub fn from_unitaries(support: Vec<usize>, unitaries: Vec<DenseUnitary<R>>) -> Result<Self> {
        if unitaries.is_empty() {
            return Err(Error::EmptyNet);
        }
        if let Some(u) = unitaries.iter().find(|u| u.qubits() != support.len()) {
            return Err(Error::DimensionMismatch { expected: 1 << support.len(), found: u.dim() });
        }
        Ok(Self { circuits: Vec::new(), cache: NetCache::Unitaries { support, unitaries }, complete: true })
    }

    pub fn len(&self) -> usize {
        match &self.cache {
            NetCache::States(s) => s.len(),
            NetCache::Unitaries { unitaries, .. } => unitaries.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mode(&self) -> NetMode {
        match self.cache {
            NetCache::States(_) => NetMode::State,
            NetCache::Unitaries { .. } => NetMode::Unitary,
        }
    }

    pub fn circuits(&self) -> &[Circuit<R>] {
        &self.circuits
    }

    pub fn circuit(&self, i: usize) -> Option<&Circuit<R>> {
        self.circuits.get(i)
    }

    pub fn cache(&self) -> &NetCache<R> {
        &self.cache
    }

    pub fn states(&self) -> Option<&[PureState<R>]> {
        match &self.cache {
            NetCache::States(s) => Some(s),
            NetCache::Unitaries { .. } => None,
        }
    }

    pub fn unitaries(&self) -> Option<(&[usize], &[DenseUnitary<R>])> {
        match &self.cache {
            NetCache::States(_) => None,
            NetCache::Unitaries { support, unitaries } => Some((support, unitaries)),
        }
    }

    /// False when a sampled net ran out of budget before covering its probes.
    pub fn is_complete(&self) -> bool {
        self.complete
    }
}

/// Number of candidates an enumeration would produce.
pub fn enumeration_size(gate_count: usize, g: usize, configurations: usize) -> u128 {
    (gate_count as u128).saturating_pow(g as u32).saturating_mul(configurations as u128)
}

/// One candidate per (configuration, gate assignment); configuration-major,
/// with the first gate of the circuit as the most significant digit of the
/// assignment index.
pub fn enumerate_net<R: Real>(
    gate_set: &GateSet<R>,
    n_qubits: usize,
    configurations: &[Configuration],
    g: usize,
    mode: NetMode,
    enumeration_cap: usize,
    cap: usize,
) -> Result<CandidateNet<R>> {
    if configurations.is_empty() {
        return Err(Error::EmptyNet);
    }
    if let Some(c) = configurations.iter().find(|c| c.len() != g) {
        return Err(Error::LengthMismatch { expected: g, found: c.len() });
    }
    let size = enumeration_size(gate_set.len(), g, configurations.len());
    if size > enumeration_cap as u128 {
        return Err(Error::EnumerationCapExceeded { size, cap: enumeration_cap });
    }
    let per_config = gate_set.len().pow(g as u32);
    let total = size as usize;
    let circuits = (0..total)
        .into_par_iter()
        .map(|idx| {
            let config = &configurations[idx / per_config];
            build_circuit(gate_set, n_qubits, config, &assignment(idx % per_config, gate_set.len(), g))
        })
        .collect::<Result<Vec<_>>>()?;
    CandidateNet::from_circuits(circuits, mode, cap)
}

/// Digits of `index` in base `base`, `len` digits, most significant first.
pub fn assignment(mut index: usize, base: usize, len: usize) -> Vec<usize> {
    let mut v = vec![0; len];
    for slot in v.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    v
}

/// Circuit with gate `gate_set[assign[i]]` on `config[i]`.
pub fn build_circuit<R: Real>(gate_set: &GateSet<R>, n_qubits: usize, config: &[(usize, usize)], assign: &[usize]) -> Result<Circuit<R>> {
    if config.len() != assign.len() {
        return Err(Error::LengthMismatch { expected: config.len(), found: assign.len() });
    }
    let gates = config
        .iter()
        .zip(assign)
        .map(|(&(a, b), &gi)| {
            let u = gate_set.gates.get(gi).ok_or_else(|| Error::Config(format!("gate index {gi} outside the gate set")))?;
            GatePlacement::from_unitary(u, a, b)
        })
        .collect::<Result<_>>()?;
    Circuit::new(n_qubits, gates)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    /// Pure-state trace distance (state nets).
    Trace,
    Davg,
    DfPrime,
    Diamond,
}

pub enum Target<'a, R: Real> {
    State(&'a PureState<R>),
    Unitary(&'a DenseUnitary<R>),
}

/// Distance between two unitaries under a unitary metric.
pub fn unitary_distance<R: Real>(a: &DenseUnitary<R>, b: &DenseUnitary<R>, metric: Metric) -> Result<R> {
    match metric {
        Metric::Davg => davg(a, b),
        Metric::DfPrime => df_prime(a, b),
        Metric::Diamond => diamond_distance(a, b),
        Metric::Trace => Err(Error::Config("trace distance applies to state nets".into())),
    }
}

/// Exhaustive argmin; ties go to the lowest index.
pub fn net_min_distance<R: Real>(net: &CandidateNet<R>, target: Target<'_, R>, metric: Metric) -> Result<(usize, R)> {
    let dists: Vec<R> = match (&net.cache, target) {
        (NetCache::States(states), Target::State(t)) => {
            if metric != Metric::Trace {
                return Err(Error::Config("state nets are compared in trace distance".into()));
            }
            states.iter().map(|s| trace_distance_pure(s, t)).collect::<Result<_>>()?
        }
        (NetCache::Unitaries { unitaries, .. }, Target::Unitary(t)) => {
            unitaries.iter().map(|u| unitary_distance(u, t, metric)).collect::<Result<_>>()?
        }
        _ => return Err(Error::Config("target kind does not match the net mode".into())),
    };
    let mut best: Option<(usize, R)> = None;
    for (i, d) in dists.into_iter().enumerate() {
        if best.is_none_or(|(_, b)| d < b) {
            best = Some((i, d));
        }
    }
    best.ok_or(Error::EmptyNet)
}

/// Random net of `k`-qubit unitaries grown one Haar sample at a time until
/// every one of 200 held-out Haar probes has a member within `epsilon`, or
/// `budget` members exist. An exhausted budget is reported through
/// [`CandidateNet::is_complete`].
pub fn sample_epsilon_net<R: Real, G: Rng + ?Sized>(k: usize, epsilon: f64, metric: Metric, rng: &mut G, budget: usize) -> Result<CandidateNet<R>> {
    const PROBES: usize = 200;
    if k > 3 {
        return Err(Error::SupportCapExceeded { requested: k, cap: 3 });
    }
    if budget == 0 {
        return Err(Error::Config("net budget must be positive".into()));
    }
    let d = 1 << k;
    let probes: Vec<DenseUnitary<R>> = (0..PROBES).map(|_| sample_haar_unitary(d, rng)).collect();
    let mut nearest = vec![f64::INFINITY; PROBES];
    let mut members = Vec::new();
    let mut complete = false;
    while members.len() < budget {
        let u = sample_haar_unitary::<R, G>(d, rng);
        for (p, best) in probes.iter().zip(nearest.iter_mut()) {
            *best = best.min(unitary_distance(p, &u, metric)?.as_f64());
        }
        members.push(u);
        if nearest.iter().all(|&x| x <= epsilon) {
            complete = true;
            break;
        }
    }
    let mut net = CandidateNet::from_unitaries((0..k).collect(), members)?;
    net.complete = complete;
    Ok(net)
}

/// Net manifest: candidate count, gate-set hash, configurations and the
/// serialized candidate circuits.
#[derive(Clone, Debug, PartialEq)]
pub struct NetManifest<R: Real> {
    pub gate_set_hash: String,
    pub configurations: Vec<Configuration>,
    pub circuits: Vec<Circuit<R>>,
}

impl<R: Real> NetManifest<R> {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "candidates {}", self.circuits.len()).unwrap();
        writeln!(out, "gate_set {}", self.gate_set_hash).unwrap();
        writeln!(out, "configurations {}", self.configurations.len()).unwrap();
        for c in &self.configurations {
            let pairs: Vec<String> = c.iter().map(|(a, b)| format!("{a}-{b}")).collect();
            writeln!(out, "{}", pairs.join(" ")).unwrap();
        }
        for (i, c) in self.circuits.iter().enumerate() {
            writeln!(out, "circuit {i}").unwrap();
            out.push_str(&write_circuit(c));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let field = |i: usize, key: &str| -> Result<&str> {
            let l = lines.get(i).ok_or_else(|| Error::parse(i + 1, format!("missing `{key}` line")))?;
            l.strip_prefix(key).map(str::trim).ok_or_else(|| Error::parse(i + 1, format!("expected `{key}`")))
        };
        let count: usize = field(0, "candidates")?.parse().map_err(|e| Error::parse(1, format!("{e}")))?;
        let gate_set_hash = field(1, "gate_set")?.to_string();
        let n_conf: usize = field(2, "configurations")?.parse().map_err(|e| Error::parse(3, format!("{e}")))?;
        let mut configurations = Vec::with_capacity(n_conf);
        for i in 3..3 + n_conf {
            let l = lines.get(i).ok_or_else(|| Error::parse(i + 1, "missing configuration"))?;
            let conf = l
                .split_whitespace()
                .map(|p| {
                    let (a, b) = p.split_once('-').ok_or_else(|| Error::parse(i + 1, format!("bad pair {p:?}")))?;
                    let n = |s: &str| s.parse::<usize>().map_err(|e| Error::parse(i + 1, format!("{e}")));
                    Ok((n(a)?, n(b)?))
                })
                .collect::<Result<_>>()?;
            configurations.push(conf);
        }
        let mut circuits = Vec::with_capacity(count);
        let mut i = 3 + n_conf;
        while i < lines.len() {
            if lines[i].trim().is_empty() {
                i += 1;
                continue;
            }
            if !lines[i].starts_with("circuit ") {
                return Err(Error::parse(i + 1, "expected `circuit <index>`"));
            }
            let header = lines.get(i + 1).ok_or_else(|| Error::parse(i + 2, "missing circuit header"))?;
            let g: usize = header
                .split_whitespace()
                .nth(3)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(i + 2, "bad circuit header"))?;
            let block = lines[i + 1..(i + 2 + g).min(lines.len())].join("\n");
            circuits.push(read_circuit(&block).map_err(|e| match e {
                Error::Parse { line, msg } => Error::parse(i + 1 + line, msg),
                other => other,
            })?);
            i += 2 + g;
        }
        if circuits.len() != count {
            return Err(Error::parse(lines.len(), format!("manifest promises {count} circuits, found {}", circuits.len())));
        }
        Ok(Self { gate_set_hash, configurations, circuits })
    }
}
