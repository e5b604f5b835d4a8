//! End-to-end checks of the command surface: exit codes, report files, and
//! byte-identical CSV bodies across repeated runs.

use ergowalk_cli::{run_from_args, EXIT_ASSERTION, EXIT_CONFIG, EXIT_OK};

fn run(args: &[&str]) -> u8 {
    let mut full = vec!["ergowalk"];
    full.extend_from_slice(args);
    run_from_args(full)
}

#[test]
fn walk_writes_series_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run(&[
        "walk", "--space", "f:2", "--driver", "srw", "-T", "500", "--seed", "9", "--out", out,
    ]);
    assert_eq!(code, EXIT_OK);
    let csv = std::fs::read_to_string(dir.path().join("walk.csv")).unwrap();
    assert!(csv.starts_with("k,a_k\n"));
    assert_eq!(csv.lines().count(), 501);
    let header: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("walk.json")).unwrap())
            .unwrap();
    assert_eq!(header["space"], "f:2");
    assert_eq!(header["seed"], 9);
    assert_eq!(header["schema_version"], "1");
    assert!(header["generated_at_unix"].is_number());
}

#[test]
fn identical_runs_produce_identical_csv_bodies() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let code = run(&[
            "drift",
            "--space",
            "z:1",
            "--driver",
            "biased:0.7",
            "-T",
            "5000",
            "--seeds",
            "4",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
    }
    let a = std::fs::read(dir_a.path().join("drift_per_seed.csv")).unwrap();
    let b = std::fs::read(dir_b.path().join("drift_per_seed.csv")).unwrap();
    assert_eq!(a, b, "CSV bodies must be byte-identical for equal configs");
}

#[test]
fn invalid_space_and_driver_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["walk", "--space", "moon:3", "--out", out]), EXIT_CONFIG);
    assert_eq!(
        run(&["walk", "--space", "z:1", "--driver", "unknown", "--out", out]),
        EXIT_CONFIG
    );
    // biased driver on the wrong space names the field
    assert_eq!(
        run(&["walk", "--space", "f:2", "--driver", "biased:0.7", "--out", out]),
        EXIT_CONFIG
    );
}

#[test]
fn drift_assertion_gates_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let ok = run(&[
        "drift", "--space", "z:1", "--driver", "biased:0.7", "-T", "20000", "--seeds", "4",
        "--expect", "0.4", "--tolerance", "0.05", "--out", out,
    ]);
    assert_eq!(ok, EXIT_OK);
    let bad = run(&[
        "drift", "--space", "z:1", "--driver", "biased:0.7", "-T", "20000", "--seeds", "4",
        "--expect", "0.9", "--tolerance", "0.01", "--out", out,
    ]);
    assert_eq!(bad, EXIT_ASSERTION);
}

#[test]
fn lln_refuses_driftless_walk() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run(&[
        "lln", "--space", "z:1", "--driver", "biased:0.5", "-T", "200000", "--seed", "3",
        "--out", out,
    ]);
    assert_eq!(code, EXIT_ASSERTION);
}

#[test]
fn shadows_finds_witness_on_ballistic_walk() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run(&[
        "shadows", "--space", "z:1", "--driver", "biased:0.7", "-T", "50000", "--eps", "0.2,0.5",
        "--out", out,
    ]);
    assert_eq!(code, EXIT_OK);
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("shadows_eps0_2.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["found"], true);
    assert!(report["margin_min"].as_f64().unwrap() >= 0.0);
}

#[test]
fn catzero_check_both_ways() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["catzero-check", "--space", "h2", "--samples", "50", "--out", out]), EXIT_OK);
    assert_eq!(run(&["catzero-check", "--space", "pos:2", "--samples", "50", "--out", out]), EXIT_OK);
    assert_eq!(run(&["catzero-check", "--space", "z:2", "--out", out]), EXIT_OK);
    assert_eq!(run(&["catzero-check", "--space", "f:2", "--out", out]), EXIT_CONFIG);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs");
    let cfg_path = dir.path().join("config.json");
    std::fs::write(
        &cfg_path,
        serde_json::json!({
            "space": "f:2",
            "driver": "srw",
            "steps": 400,
            "seed": 5,
            "out": out.to_str().unwrap(),
        })
        .to_string(),
    )
    .unwrap();
    let code = run(&["walk", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.join("walk.csv").exists());
    // explicit flag overrides the config
    let code = run(&["walk", "--config", cfg_path.to_str().unwrap(), "-T", "10"]);
    assert_eq!(code, EXIT_OK);
    let csv = std::fs::read_to_string(out.join("walk.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn lyapunov_and_oseledec_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run(&[
        "lyapunov", "--driver", "diag:2,0.5", "-T", "2000", "--seeds", "2", "--out", out,
    ]);
    assert_eq!(code, EXIT_OK);
    let spec: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("lyapunov.json")).unwrap())
            .unwrap();
    let l1 = spec["exponents"][0].as_f64().unwrap();
    assert!((l1 - (2.0_f64).ln()).abs() < 1e-9);

    let code = run(&["oseledec", "--driver", "conjdiag:0.7", "-T", "3000", "--out", out]);
    assert_eq!(code, EXIT_OK);
    let csv = std::fs::read_to_string(dir.path().join("oseledec_residuals.csv")).unwrap();
    assert!(csv.starts_with("n,r_n\n"));
}

#[test]
fn goodtimes_and_rayapprox_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run(&[
        "goodtimes", "--space", "z:1", "--driver", "biased:0.7", "-T", "4000", "--seed", "3",
        "--eps", "0.05", "--k-cutoff", "50", "--expect", "0.4", "--out", out,
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(dir.path().join("goodtimes.json").exists());
    let code = run(&["rayapprox", "-T", "2000", "--out", out]);
    assert_eq!(code, EXIT_OK);
    let csv = std::fs::read_to_string(dir.path().join("rayapprox.csv")).unwrap();
    assert!(csv.starts_with("n,premise,conclusion\n"));
}

#[test]
fn demo_runs_clean() {
    assert_eq!(run(&["demo"]), EXIT_OK);
}
