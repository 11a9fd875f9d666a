//! `bgtomo` command-line interface.

use std::path::PathBuf;
use std::process::ExitCode;

use bgtomo::harness::{self, Format, Statistic, SweepConfig};
use bgtomo::learners::{learn_state, learn_unitary_choi, learn_unitary_no_ancilla, LearnConfig, SelectionRule};
use bgtomo::metrics::{davg, d2_prime, df_prime, diamond_distance, trace_distance_pure};
use bgtomo::nets::{assignment, build_circuit, enumerate_net, CandidateNet, Configuration, GateSet, NetManifest, NetMode};
use bgtomo::oracle::{FixedStateOracle, LocalUnitaryOracle};
use bgtomo::qcore::{circuit_unitary, read_circuit, run_circuit, write_circuit, DEFAULT_CAP};
use bgtomo::shadows::{MedianOfMeansConfig, ShadowScheme};
use bgtomo::{Circuit, Error, PureState};
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "bgtomo", version, about = "Learning bounded-gate states and unitaries from shadows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Choi,
    NoAncilla,
}

#[derive(clap::Args)]
struct LearnArgs {
    /// Net manifest written by `gen-net`.
    #[arg(long)]
    net: PathBuf,
    /// Circuit preparing the unknown state or unitary.
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "overlap_argmax")]
    rule: SelectionRule,
    #[arg(long, default_value = "haar_direct")]
    scheme: ShadowScheme,
    /// Fix the budget to `batches` × `batch_size` snapshots.
    #[arg(long, requires = "batch_size")]
    batches: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
}

impl LearnArgs {
    fn config(&self) -> Result<LearnConfig, Error> {
        let mut cfg = LearnConfig::new(self.epsilon, self.delta)?.with_rule(self.rule).with_scheme(self.scheme);
        if let (Some(k), Some(b)) = (self.batches, self.batch_size) {
            cfg = cfg.with_mom(MedianOfMeansConfig::new(b, k)?);
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a sample-complexity sweep and export records, summaries and curves.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: Format,
    },
    /// Select the net member closest to the state prepared by a circuit.
    LearnState(LearnArgs),
    /// Select the net member closest to a circuit's unitary.
    LearnUnitary {
        #[command(flatten)]
        args: LearnArgs,
        #[arg(long, value_enum, default_value = "choi")]
        method: Method,
    },
    /// Distances between two serialized circuits.
    Metrics {
        a: PathBuf,
        b: PathBuf,
    },
    /// Enumerate a net over a random gate set and write its manifest.
    GenNet {
        #[arg(long, default_value_t = 1)]
        gate_set_seed: u64,
        #[arg(long, default_value_t = 2)]
        gate_set_size: usize,
        #[arg(long)]
        n_qubits: usize,
        /// Gate placement, e.g. `0-1 1-2 0-1`; repeat for several.
        #[arg(long = "placement", required = true)]
        placements: Vec<String>,
        #[arg(long, default_value = "net.txt")]
        out: PathBuf,
        /// Also write one randomly chosen member as a circuit file.
        #[arg(long)]
        sample_target: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_placement(s: &str) -> Result<Configuration, Error> {
    s.split_whitespace()
        .map(|p| {
            let (a, b) = p.split_once('-').ok_or_else(|| Error::Config(format!("bad gate placement {p:?}")))?;
            let n = |t: &str| t.parse::<usize>().map_err(|e| Error::Config(format!("bad qubit {t:?}: {e}")));
            Ok((n(a)?, n(b)?))
        })
        .collect()
}

fn read_net(path: &PathBuf, mode: NetMode) -> Result<CandidateNet<f64>, Error> {
    let manifest = NetManifest::<f64>::parse(&std::fs::read_to_string(path)?)?;
    CandidateNet::from_circuits(manifest.circuits, mode, DEFAULT_CAP)
}

fn read_target(path: &PathBuf) -> Result<Circuit, Error> {
    read_circuit(&std::fs::read_to_string(path)?)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Sweep { config, out, format } => {
            let cfg = SweepConfig::parse(&std::fs::read_to_string(&config)?)?;
            let result = harness::run_sweep(&cfg)?;
            for p in harness::export(&result, &out, format)? {
                println!("wrote {}", p.display());
            }
            for &t in &cfg.fidelity_thresholds {
                if let Some(c) = result.curve(Statistic::Median, t) {
                    let pts: Vec<String> = c.points.iter().map(|(g, n)| format!("{g}:{}", n.map_or("-".into(), |v| v.to_string()))).collect();
                    println!("N* (median ≥ {t}) by G: {}", pts.join(" "));
                }
            }
        }
        Command::LearnState(args) => {
            let net = read_net(&args.net, NetMode::State)?;
            let target = read_target(&args.target)?;
            let oracle = FixedStateOracle::from_circuit(&target, DEFAULT_CAP)?;
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let out = learn_state(&oracle, &net, &args.config()?, &mut rng)?;
            let truth = run_circuit(&target, &PureState::zero(target.n_qubits()))?;
            let chosen = &net.states().expect("state net")[out.index];
            println!("selected {}", out.index);
            println!("copies {}", out.oracle_calls);
            println!("trace_distance {}", trace_distance_pure(&truth, chosen)?);
        }
        Command::LearnUnitary { args, method } => {
            let net = read_net(&args.net, NetMode::Unitary)?;
            let target = read_target(&args.target)?;
            let (support, unitaries) = net.unitaries().expect("unitary net");
            let truth = circuit_unitary(&target, support, DEFAULT_CAP)?;
            let oracle = LocalUnitaryOracle::new(target.n_qubits(), support.to_vec(), truth.clone())?;
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let cfg = args.config()?;
            let out = match method {
                Method::Choi => learn_unitary_choi(&oracle, &net, &cfg, &mut rng)?,
                Method::NoAncilla => learn_unitary_no_ancilla(&oracle, &net, &cfg, &mut rng)?,
            };
            println!("selected {}", out.index);
            println!("queries {}", out.oracle_calls);
            println!("d_avg {}", davg(&truth, &unitaries[out.index])?);
        }
        Command::Metrics { a, b } => {
            let (ca, cb) = (read_target(&a)?, read_target(&b)?);
            if ca.n_qubits() != cb.n_qubits() {
                return Err(Error::DimensionMismatch { expected: ca.n_qubits(), found: cb.n_qubits() });
            }
            let zero = PureState::zero(ca.n_qubits());
            println!("state_trace_distance {}", trace_distance_pure(&run_circuit(&ca, &zero)?, &run_circuit(&cb, &zero)?)?);
            let mut support: Vec<usize> = ca.support().into_iter().chain(cb.support()).collect();
            support.sort_unstable();
            support.dedup();
            let (ua, ub) = (circuit_unitary(&ca, &support, DEFAULT_CAP)?, circuit_unitary(&cb, &support, DEFAULT_CAP)?);
            println!("d_avg {}", davg(&ua, &ub)?);
            println!("d_F' {}", df_prime(&ua, &ub)?);
            println!("d_2' {}", d2_prime(&ua, &ub)?);
            println!("d_diamond {}", diamond_distance(&ua, &ub)?);
        }
        Command::GenNet { gate_set_seed, gate_set_size, n_qubits, placements, out, sample_target, seed } => {
            let gate_set = GateSet::<f64>::random_haar(gate_set_size, &mut ChaCha8Rng::seed_from_u64(gate_set_seed));
            let configurations = placements.iter().map(|p| parse_placement(p)).collect::<Result<Vec<_>, _>>()?;
            let g = configurations.first().map_or(0, Vec::len);
            let net = enumerate_net(&gate_set, n_qubits, &configurations, g, NetMode::State, bgtomo::nets::DEFAULT_ENUMERATION_CAP, DEFAULT_CAP)?;
            let manifest = NetManifest { gate_set_hash: gate_set.hash(), configurations: configurations.clone(), circuits: net.circuits().to_vec() };
            std::fs::write(&out, manifest.to_text())?;
            println!("wrote {} candidates to {}", net.len(), out.display());
            if let Some(path) = sample_target {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let conf = &configurations[rng.random_range(0..configurations.len())];
                let idx = rng.random_range(0..gate_set.len().pow(g as u32));
                let c = build_circuit(&gate_set, n_qubits, conf, &assignment(idx, gate_set.len(), g))?;
                std::fs::write(&path, write_circuit(&c))?;
                println!("wrote target to {}", path.display());
            }
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse { .. } | Error::InvalidRegime(_) => 2,
        Error::SupportCapExceeded { .. } | Error::EnumerationCapExceeded { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("BGC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
