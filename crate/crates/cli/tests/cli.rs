use std::path::Path;
use std::process::{Command, Output};

fn bgtomo(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bgtomo")).args(args).current_dir(dir).env("BGC_THREADS", "2").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(out: &str, key: &str) -> f64 {
    out.lines().find_map(|l| l.strip_prefix(key)).unwrap_or_else(|| panic!("no {key} in {out}")).trim().parse().unwrap()
}

#[test]
fn gen_net_then_learn() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = bgtomo(&["gen-net", "--n-qubits", "5", "--placement", "0-1 1-2", "--placement", "2-3 1-2", "--sample-target", "t.txt", "--seed", "4"], p);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("wrote 8 candidates"));
    assert!(p.join("net.txt").exists() && p.join("t.txt").exists());

    let o = bgtomo(&["learn-state", "--net", "net.txt", "--target", "t.txt", "--batches", "5", "--batch-size", "200", "--seed", "1"], p);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(value(&out, "copies "), 1000.0);
    assert!(value(&out, "trace_distance ") < 1e-9, "{out}");

    for method in ["choi", "no-ancilla"] {
        let o = bgtomo(
            &["learn-unitary", "--net", "net.txt", "--target", "t.txt", "--method", method, "--batches", "5", "--batch-size", "300"],
            p,
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(value(&stdout(&o), "d_avg ") < 1e-9, "{method}: {}", stdout(&o));
    }

    let o = bgtomo(&["metrics", "t.txt", "t.txt"], p);
    assert!(o.status.success());
    let out = stdout(&o);
    for key in ["state_trace_distance ", "d_avg ", "d_F' ", "d_2' ", "d_diamond "] {
        assert!(value(&out, key).abs() < 1e-7, "{key}: {out}");
    }
}

#[test]
fn sweep_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("cfg.txt"), "g_range = 1..=2\nn_range = 1,10,50\ntrials = 5\n").unwrap();
    let o = bgtomo(&["sweep", "--config", "cfg.txt", "--out", "s.csv"], p);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("N* (median ≥ 0.999) by G:"));
    let records = std::fs::read_to_string(p.join("s.csv")).unwrap();
    assert_eq!(records.lines().count(), 1 + 2 * 3 * 5);
    assert!(p.join("s_summary.csv").exists() && p.join("s_curves.csv").exists());

    let o = bgtomo(&["sweep", "--config", "cfg.txt", "--out", "s.json", "--format", "json"], p);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(p.join("s.json")).unwrap().contains("\"records\""));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("bad.txt"), "colour = red\n").unwrap();
    assert_eq!(bgtomo(&["sweep", "--config", "bad.txt"], p).status.code(), Some(2));
    std::fs::write(p.join("bad_circuit.txt"), "this is not a circuit\n").unwrap();
    assert_eq!(bgtomo(&["metrics", "bad_circuit.txt", "bad_circuit.txt"], p).status.code(), Some(2));
    // 2^20 assignments exceed the enumeration cap.
    let long = vec!["0-1"; 20].join(" ");
    let o = bgtomo(&["gen-net", "--n-qubits", "2", "--placement", &long], p);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(bgtomo(&["metrics", "missing.txt", "missing.txt"], p).status.code(), Some(1));
    // Bad command-line usage is reported by the parser.
    assert_eq!(bgtomo(&["learn-state"], p).status.code(), Some(2));
}
