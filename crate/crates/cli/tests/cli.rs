use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

use qicost_cli::format::{
    classical_to, distribution_to, function_pair_to, save_protocol, save_state, write_document, AnyState, Document,
};
use qicost_core::classical::{ClassicalFunctionPair, ClassicalProtocol};
use qicost_core::fuzz::{random_protocol, RandomProtocolConfig};
use qicost_core::hilbert::{rng_from_seed, JointDistribution};
use qicost_core::protocol::library::{and_bits, relay, send_input};
use qicost_core::{Holder, Register, RegisterSystem, C64};

fn qicost(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qicost")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixtures {
    dir: TempDir,
}

impl Fixtures {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn protocol(&self, name: &str, p: &qicost_core::ProtocolSpec) -> PathBuf {
        let path = self.path(name);
        save_protocol(&path, p).unwrap();
        path
    }

    fn doc(&self, name: &str, d: &Document) -> PathBuf {
        let path = self.path(name);
        write_document(&path, d).unwrap();
        path
    }

    fn raw(&self, name: &str, v: &Value) -> PathBuf {
        let path = self.path(name);
        std::fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
        path
    }

    /// Diagonal state on `xa` (Alice) and `xb` (Bob) qubits.
    fn diag_state(&self, name: &str, diag: [f64; 4]) -> PathBuf {
        let regs: Vec<Value> = [("xa", "alice"), ("xb", "bob")]
            .iter()
            .map(|(n, h)| json!({"name": n, "dim": 2, "holder": h}))
            .collect();
        let matrix: Vec<Vec<[f64; 2]>> = (0..4)
            .map(|i| (0..4).map(|j| if i == j { [diag[i], 0.0] } else { [0.0, 0.0] }).collect())
            .collect();
        self.raw(name, &json!({"state": {"registers": regs, "matrix": matrix}}))
    }
}

#[test]
fn qcc_of_relay() {
    let fx = Fixtures::new();
    let p = fx.protocol("relay.json", &relay(2, 2));
    let (code, out, _) = qicost(&["qcc", path_str(&p)]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "QCC 2");
}

#[test]
fn validate_names_the_failing_step() {
    let fx = Fixtures::new();
    let p = fx.protocol("relay.json", &relay(2, 2));
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    // Make Bob's relabel expect a 3-dimensional message.
    let op = &mut v["protocol"]["steps"][1]["ops"][0];
    op["inputs"][0]["dim"] = json!(3);
    op["outputs"][0]["dim"] = json!(3);
    let id3: Vec<Vec<[f64; 2]>> = (0..3)
        .map(|i| (0..3).map(|j| if i == j { [1.0, 0.0] } else { [0.0, 0.0] }).collect())
        .collect();
    op["matrix"] = json!(id3);
    let bad = fx.raw("bad.json", &v);
    let (code, out, _) = qicost(&["validate", path_str(&bad)]);
    assert_eq!(code, 1);
    assert!(out.contains("U_2"), "{out}");
    // Other commands refuse to load it and say why.
    let (code, _, err) = qicost(&["qcc", path_str(&bad)]);
    assert_eq!(code, 2);
    assert!(err.contains("U_2"), "{err}");
}

#[test]
fn tolerance_gate_on_state_files() {
    let fx = Fixtures::new();
    let p = fx.protocol("relay.json", &relay(2, 2));
    let s = fx.diag_state("s.json", [0.5 + 1e-6, 0.5, 0.0, 0.0]);
    let (code, _, err) = qicost(&["qic", path_str(&p), path_str(&s)]);
    assert_eq!(code, 2, "{err}");
    let (code, out, err) = qicost(&["qic", path_str(&p), path_str(&s), "--tol", "1e-5"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("QIC"));
}

#[test]
fn parse_errors_point_at_the_field() {
    let fx = Fixtures::new();
    let f = fx.raw("d.json", &json!({"distribution": {"nx": 2, "ny": 1, "probs": "half"}}));
    let p = fx.protocol("send.json", &send_input(2));
    let (code, _, err) = qicost(&["failure-prob", path_str(&p), path_str(&f), path_str(&f)]);
    assert_eq!(code, 2);
    assert!(err.contains("function_pair") || err.contains("distribution.probs"), "{err}");
}

#[test]
fn budget_for_sending_a_bit() {
    let fx = Fixtures::new();
    let p = fx.protocol("send.json", &send_input(2));
    let s = fx.raw(
        "x.json",
        &json!({"state": {"registers": [{"name": "x", "dim": 2}], "matrix": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]}}),
    );
    let (code, out, err) = qicost(&["budget", path_str(&p), path_str(&s), "--delta", "0.01", "--report", "structured"]);
    assert_eq!(code, 0, "{err}");
    let rec: Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
    assert!((rec["total_rate"].as_f64().unwrap() - 1.01).abs() < 1e-8);
    let (_, out, _) = qicost(&["qic", path_str(&p), path_str(&s), "--report", "structured"]);
    let rec: Value = serde_json::from_str(out.trim()).unwrap();
    assert!((rec["qic"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn run_writes_a_loadable_output() {
    let fx = Fixtures::new();
    let p = fx.protocol("relay.json", &relay(2, 2));
    let s = fx.diag_state("s.json", [0.25; 4]);
    let out = fx.path("out.json");
    let (code, text, err) = qicost(&["run", path_str(&p), path_str(&s), "--out", path_str(&out)]);
    assert_eq!(code, 0, "{err}");
    assert!(text.contains("ya"));
    let back = qicost_cli::format::load_state(&out, &Default::default()).unwrap();
    assert!((back.density().trace() - 1.0).abs() < 1e-12);
}

#[test]
fn max_dim_guard() {
    let fx = Fixtures::new();
    let p = fx.protocol("relay.json", &relay(2, 2));
    let s = fx.diag_state("s.json", [0.25; 4]);
    let (code, _, err) = qicost(&["qic", path_str(&p), path_str(&s), "--max-dim", "4"]);
    assert_eq!(code, 2);
    assert!(err.contains("max-dim"), "{err}");
}

#[test]
fn error_against_identity_channel() {
    let fx = Fixtures::new();
    let p = fx.protocol("relay.json", &relay(2, 2));
    let s = fx.diag_state("s.json", [0.1, 0.2, 0.3, 0.4]);
    let id4: Vec<Vec<[f64; 2]>> = (0..4)
        .map(|i| (0..4).map(|j| if i == j { [1.0, 0.0] } else { [0.0, 0.0] }).collect())
        .collect();
    let ch = fx.raw(
        "id.json",
        &json!({"channel": {
            "inputs": [{"name": "xa", "dim": 2}, {"name": "xb", "dim": 2}],
            "outputs": [{"name": "ya", "dim": 2}, {"name": "yb", "dim": 2}],
            "kraus": [id4],
        }}),
    );
    let (code, out, err) = qicost(&["error", path_str(&p), path_str(&ch), path_str(&s), "--epsilon", "1e-9"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("error 0.0000"), "{out}");
}

#[test]
fn constructions_write_valid_protocols() {
    let fx = Fixtures::new();
    let a = fx.protocol("a.json", &relay(2, 2));
    let b = fx.protocol("b.json", &relay(2, 2));
    let composed = fx.path("ab.json");
    let (code, _, err) = qicost(&["compose", path_str(&a), path_str(&b), "--prefix", "q.", "--out", path_str(&composed)]);
    assert_eq!(code, 0, "{err}");
    let (code, out, _) = qicost(&["qcc", path_str(&composed)]);
    assert_eq!((code, out.trim()), (0, "QCC 4"));

    let mixed = fx.path("mix.json");
    let (code, _, err) = qicost(&["mix", path_str(&a), path_str(&b), "--p", "0.3", "--out", path_str(&mixed)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(qicost(&["validate", path_str(&mixed)]).0, 0);

    // Freeze the second relay inside the composition.
    let frozen_state = fx.raw(
        "f.json",
        &json!({"state": {
            "registers": [{"name": "q.xa", "dim": 2}, {"name": "q.xb", "dim": 2}],
            "amplitudes": [[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
        }}),
    );
    let frozen = fx.path("frozen.json");
    let (code, _, err) = qicost(&[
        "fix-input",
        path_str(&composed),
        path_str(&frozen_state),
        "--a-in",
        "q.xa",
        "--b-in",
        "q.xb",
        "--a-out",
        "q.ya",
        "--b-out",
        "q.yb",
        "--side",
        "second",
        "--out",
        path_str(&frozen),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(qicost(&["validate", path_str(&frozen)]).0, 0);
}

#[test]
fn concavity_command() {
    let fx = Fixtures::new();
    let p = fx.protocol("relay.json", &relay(2, 2));
    let s1 = fx.diag_state("s1.json", [1.0, 0.0, 0.0, 0.0]);
    let s2 = fx.diag_state("s2.json", [0.0, 0.0, 0.0, 1.0]);
    let (code, out, err) = qicost(&["concavity", path_str(&p), path_str(&s1), path_str(&s2), "--p", "0.5"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("slack"));
}

#[test]
fn disj_and_small_instance() {
    let fx = Fixtures::new();
    let cfg = RandomProtocolConfig {
        a_in: vec![Register::new("x1", 2), Register::new("x2", 2)],
        b_in: vec![Register::new("y1", 2), Register::new("y2", 2)],
        a_out: vec![Register::new("oa", 2)],
        b_out: vec![Register::new("ob", 2)],
        t_a: 1,
        t_b: 1,
        message_dims: vec![2, 2],
        prefix: String::new(),
    };
    let pd = random_protocol(&cfg, &mut rng_from_seed(6)).unwrap();
    let p = fx.protocol("pd.json", &pd);
    let mu = JointDistribution::new(2, 2, vec![0.6, 0.0, 0.4, 0.0]).unwrap();
    let m = fx.doc("mu.json", &Document::Distribution(distribution_to(&mu)));
    let out = fx.path("pa.json");
    let (code, text, err) = qicost(&[
        "disj-and",
        path_str(&p),
        "--slot",
        "x1:y1",
        "--slot",
        "x2:y2",
        "--mu",
        path_str(&m),
        "--out",
        path_str(&out),
        "--check",
    ]);
    assert_eq!(code, 0, "{err}\n{text}");
    assert!(text.contains("difference"));
    assert_eq!(qicost(&["validate", path_str(&out)]).0, 0);
}

#[test]
fn classical_commands() {
    let fx = Fixtures::new();
    // Alice sends x verbatim.
    let cp = ClassicalProtocol::deterministic(2, 2, vec![1.0], &[2], |_, input, _, _| input).unwrap();
    let c = fx.doc("cp.json", &Document::ClassicalProtocol(classical_to(&cp)));
    let mu = JointDistribution::new(2, 2, vec![0.25; 4]).unwrap();
    let m = fx.doc("mu.json", &Document::Distribution(distribution_to(&mu)));
    let (code, out, err) = qicost(&["ic", path_str(&c), path_str(&m)]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("IC 1.000000000000"), "{out}");
    let (code, out, _) = qicost(&["ic-prime", path_str(&c), path_str(&m)]);
    assert_eq!(code, 0);
    assert!(out.contains("IC' 1.000000000000"), "{out}");

    let f = fx.doc("and.json", &Document::FunctionPair(function_pair_to(&ClassicalFunctionPair::and())));
    let p = fx.protocol("and_bits.json", &and_bits());
    let (code, out, err) = qicost(&["failure-prob", path_str(&p), path_str(&f), path_str(&m)]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("failure probability 0.000000000000"), "{out}");
}

#[test]
fn redist_rates_on_a_bell_pair() {
    let fx = Fixtures::new();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sys = RegisterSystem::uniform(vec![Register::new("c", 2), Register::new("r", 2)], Holder::Alice).unwrap();
    let s = qicost_core::StateVector::new(sys, vec![C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)])
        .unwrap();
    let path = fx.path("bell.json");
    save_state(&path, &AnyState::Pure(s)).unwrap();
    let (code, out, err) = qicost(&["redist-rates", path_str(&path), "--c", "c", "--r", "r"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("q_min 1.000000000000"), "{out}");
}

#[test]
fn suite_single_check_passes() {
    let (code, out, err) = qicost(&["suite", "qic-vs-qcc"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("PASS qic-vs-qcc"), "{out}");
    assert!(out.contains("seed"));
}

#[test]
fn suite_corrupted_tolerance_fails() {
    let (code, out, _) = qicost(&["suite", "chain-rule", "--tol", "1e-20"]);
    assert_eq!(code, 1, "{out}");
    assert!(out.starts_with("FAIL chain-rule"), "{out}");
}

#[test]
fn suite_unknown_check() {
    let (code, _, err) = qicost(&["suite", "no-such-check"]);
    assert_eq!(code, 2);
    assert!(err.contains("no-such-check"));
}

#[test]
fn suite_is_deterministic() {
    // The averaging check is skipped under this dimension cap; everything
    // else runs.
    let args = ["suite", "--report", "structured", "--seed", "7", "--max-dim", "1000000"];
    let (c1, o1, _) = qicost(&args);
    let (c2, o2, _) = qicost(&args);
    assert_eq!(c1, 0, "{o1}");
    assert_eq!(c2, 0);
    let strip = |s: &str| -> Vec<Value> {
        s.lines()
            .map(|l| {
                let mut v: Value = serde_json::from_str(l).unwrap();
                v.as_object_mut().unwrap().remove("runtime_ms");
                v
            })
            .collect()
    };
    let (r1, r2) = (strip(&o1), strip(&o2));
    assert_eq!(r1, r2);
    assert_eq!(r1.len(), qicost_cli::suite::check_ids().len());
    let ids: Vec<&str> = r1.iter().map(|v| v["check_id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    let avg = r1.iter().find(|v| v["check_id"] == "and-average").unwrap();
    assert_eq!(avg["status"], "skip");
    assert!(r1.iter().all(|v| v["anchor"].as_str().is_some_and(|a| !a.is_empty())));
}

#[test]
fn suite_list() {
    let (code, out, _) = qicost(&["suite", "--list"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), qicost_cli::suite::check_ids().len());
}
