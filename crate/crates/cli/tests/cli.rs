use std::path::Path;
use std::process::{Command, Output};

fn wpcsma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpcsma"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn optimize_writes_results_and_a_reusable_point() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("opt");
    let r = wpcsma(&[
        "optimize",
        "--scenario",
        "bundled:example1",
        "--out",
        s(&out),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    for f in [
        "results.csv",
        "results.json",
        "utility_trace.csv",
        "point.json",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("# status: converged")));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("results.json")).unwrap()).unwrap();
    assert!(json.is_object());

    let a = wpcsma(&[
        "analyze",
        "--scenario",
        "bundled:example1",
        "--point",
        s(&out.join("point.json")),
    ]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let text = String::from_utf8(a.stdout).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("id,n,alpha,tau,"), "{header}");
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 7);
}

#[test]
fn reproduce_emits_every_series() {
    let tmp = tempfile::tempdir().unwrap();
    for (exp, files) in [
        (
            "1",
            vec!["exp1_optimal_n.csv", "exp1_energy.csv", "exp1_airtime.csv"],
        ),
        ("2", vec!["exp2_energy.csv", "exp2_airtime.csv"]),
    ] {
        let out = tmp.path().join(exp);
        let r = wpcsma(&["reproduce", "--exp", exp, "--out", s(&out)]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
        for f in files {
            assert!(out.join(f).is_file(), "{f}");
        }
    }
    assert!(
        !wpcsma(&["reproduce", "--exp", "3", "--out", s(tmp.path())])
            .status
            .success()
    );
}

#[test]
fn iteration_cap_exits_with_four() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"max_outer_iters": 1, "outer_tol": 1e-300, "outer_step_tol": 1e-300}"#,
    )
    .unwrap();
    let r = wpcsma(&[
        "optimize",
        "--scenario",
        "bundled:example1",
        "--config",
        s(&cfg),
        "--out",
        s(&tmp.path().join("o")),
    ]);
    assert_eq!(r.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&r.stderr).contains("iteration cap"));
}

#[test]
fn malformed_inputs_exit_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"name": "x"}"#).unwrap();
    let r = wpcsma(&[
        "optimize",
        "--scenario",
        s(&bad),
        "--out",
        s(&tmp.path().join("o")),
    ]);
    assert_eq!(r.status.code(), Some(3));

    let point = tmp.path().join("p.json");
    std::fs::write(&point, r#"{"n": [1, 2], "alpha": [0.1, 0.1], "w": [4, 4]}"#).unwrap();
    let r = wpcsma(&[
        "analyze",
        "--scenario",
        "bundled:example1",
        "--point",
        s(&point),
    ]);
    assert_eq!(r.status.code(), Some(3));

    let r = wpcsma(&[
        "analyze",
        "--scenario",
        s(&tmp.path().join("missing.json")),
        "--point",
        s(&point),
    ]);
    assert_eq!(r.status.code(), Some(3));

    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"inner_tol": -1}"#).unwrap();
    let r = wpcsma(&[
        "optimize",
        "--scenario",
        "bundled:example1",
        "--config",
        s(&cfg),
        "--out",
        s(&tmp.path().join("o")),
    ]);
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn show_scenario_prints_a_loadable_file() {
    let tmp = tempfile::tempdir().unwrap();
    let r = wpcsma(&["show-scenario", "example2"]);
    assert!(r.status.success());
    let path = tmp.path().join("e2.json");
    std::fs::write(&path, &r.stdout).unwrap();
    let point = tmp.path().join("p.json");
    std::fs::write(
        &point,
        r#"{"n": [10, 10, 10, 10, 10, 10], "w": [16, 16, 16, 16, 16, 16]}"#,
    )
    .unwrap();
    let a = wpcsma(&[
        "analyze",
        "--scenario",
        s(&path),
        "--point",
        s(&point),
        "--out",
        s(&tmp.path().join("a")),
    ]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert!(tmp.path().join("a/analysis.csv").is_file());
    assert_eq!(wpcsma(&["show-scenario", "nope"]).status.code(), Some(3));
}

#[test]
fn simulate_reports_slot_probabilities_and_energy() {
    let tmp = tempfile::tempdir().unwrap();
    let point = tmp.path().join("p.json");
    std::fs::write(
        &point,
        r#"{"n": [10, 10, 10, 10, 10, 10], "w": [16, 16, 16, 16, 16, 16]}"#,
    )
    .unwrap();
    let out = tmp.path().join("sim");
    let r = wpcsma(&[
        "simulate",
        "--scenario",
        "bundled:example2",
        "--point",
        s(&point),
        "--slots",
        "20000",
        "--seed",
        "3",
        "--out",
        s(&out),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    for f in [
        "simulation.csv",
        "slot_probabilities.csv",
        "energy_check.csv",
        "simulation.json",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
    assert!(!out.join("trace.csv").exists());
    let slots = std::fs::read_to_string(out.join("slot_probabilities.csv")).unwrap();
    assert!(slots.lines().any(|l| l.starts_with("idle,")), "{slots}");
}
