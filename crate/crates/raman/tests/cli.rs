//! End-to-end tests of the command-line interface: file contracts, exit
//! codes, determinism, and the binary matrix dump format.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_raman")
}

fn scenario() -> String {
    format!("{}/scenarios/default.json", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write_scenario(dir: &Path, name: &str, edit: impl FnOnce(&mut serde_json::Value)) -> PathBuf {
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(scenario()).unwrap()).unwrap();
    edit(&mut doc);
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    path
}

#[test]
fn simulate_writes_contracted_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["simulate", &scenario(), "--out", "run"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(tmp.path().join("run/timeseries.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "tau,P1,P2,P3,fid_eff,fid_factored");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 401);
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 6);
        for f in fields {
            let v: f64 = f.parse().unwrap();
            assert!(v.is_finite());
        }
    }
    // probability columns sum to one
    for row in &rows {
        let f: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((f[1] + f[2] + f[3] - 1.0).abs() < 1e-9);
    }

    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("run/error_report.json")).unwrap(),
    )
    .unwrap();
    assert!(report["truncation_leakage"].as_f64().unwrap() < 1e-6);
    assert_eq!(report["err_factored"].as_array().unwrap().len(), 401);

    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("run/run_meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["command"], "simulate");
    assert_eq!(meta["order"], 2);
}

#[test]
fn simulate_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        assert!(run(&["simulate", &scenario(), "--out", out], tmp.path())
            .status
            .success());
    }
    for file in ["timeseries.csv", "error_report.json", "run_meta.json"] {
        let a = std::fs::read(tmp.path().join("a").join(file)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between runs");
    }
}

#[test]
fn dry_run_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["simulate", &scenario(), "--out", "dry", "--dry-run"], tmp.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("scenario: valid"));
    assert!(stdout.contains("lambda:"));
    assert!(!tmp.path().join("dry").exists());
}

#[test]
fn exit_code_1_on_malformed_input() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = run(&["simulate", bad.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());

    let missing_eta = write_scenario(tmp.path(), "short.json", |d| {
        d["lasers"]["eta13"] = serde_json::json!([]);
    });
    let out = run(&["simulate", missing_eta.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(1));

    // too few lambda values for a scaling fit
    let out = run(
        &["scaling", &scenario(), "--lambdas", "0.02,0.04", "--out", "s"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(">=3"));
}

#[test]
fn exit_code_2_on_zero_detuning() {
    let tmp = tempfile::tempdir().unwrap();
    let zero = write_scenario(tmp.path(), "zero.json", |d| {
        d["lasers"]["delta"] = serde_json::json!(0.0);
    });
    let out = run(&["simulate", zero.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("detuning"));
}

#[test]
fn exit_code_3_on_strict_truncation() {
    let tmp = tempfile::tempdir().unwrap();
    let hot = write_scenario(tmp.path(), "hot.json", |d| {
        d["trap"]["axes"] = serde_json::json!([4]);
        d["lasers"]["eta13"] = serde_json::json!([1.5]);
        d["lasers"]["eta23"] = serde_json::json!([-1.5]);
    });
    let args = ["simulate", hot.to_str().unwrap(), "--out", "hot"];
    // without the flag the run succeeds (with a warning)
    assert!(run(&args, tmp.path()).status.success());
    let out = run(
        &["simulate", hot.to_str().unwrap(), "--out", "hot2", "--strict-truncation"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("leakage"));
    assert!(!tmp.path().join("hot2").exists());
}

#[test]
fn exit_code_4_on_failed_cubic_assert() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "scaling",
            &scenario(),
            "--lambdas",
            "0.3,0.4,0.5",
            "--tau",
            "50",
            "--assert-cubic",
            "--out",
            "s",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(4));
    // non-perturbative values draw a warning but the sweep still runs
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside perturbative regime"));
    assert!(tmp.path().join("s/scaling.csv").exists());
}

#[test]
fn scaling_passes_cubic_assert_in_regime() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "scaling",
            &scenario(),
            "--lambdas",
            "0.02,0.04,0.08",
            "--tau",
            "50",
            "--assert-cubic",
            "--out",
            "s",
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("s/scaling.json")).unwrap(),
    )
    .unwrap();
    let exp = json["fit_factored"]["exponent"].as_f64().unwrap();
    assert!((2.6..=3.4).contains(&exp));
    let csv = std::fs::read_to_string(tmp.path().join("s/scaling.csv")).unwrap();
    assert!(csv.starts_with("lambda,err_factored,err_prime_factored,err_effective\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn decompose_report_and_matrix_dump() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        &["decompose", &scenario(), "--out", "d", "--dump-matrices"],
        tmp.path(),
    );
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("d/decomposition.json")).unwrap(),
    )
    .unwrap();
    assert!(json["closed_form_deviation"].as_f64().unwrap() < 1e-10);
    assert_eq!(json["orders"].as_array().unwrap().len(), 2);
    let dim = json["dimension"].as_u64().unwrap() as usize;
    assert_eq!(dim, 24);

    // binary layout: 8-byte magic, u64 LE dim, then row-major re/im pairs
    for name in ["c1.bin", "z1.bin", "c2.bin", "z2.bin"] {
        let bytes = std::fs::read(tmp.path().join("d").join(name)).unwrap();
        assert_eq!(&bytes[..8], b"RAMANMAT");
        let d = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        assert_eq!(d, dim);
        assert_eq!(bytes.len(), 16 + 16 * dim * dim);
    }
    // c1 is hermitian: spot-check the (0,0) entry is real
    let bytes = std::fs::read(tmp.path().join("d/c1.bin")).unwrap();
    let im00 = f64::from_le_bytes(bytes[24..32].try_into().unwrap());
    assert_eq!(im00, 0.0);
}

#[test]
fn decompose_order_one_only_reports_first_order() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["decompose", &scenario(), "--out", "d1", "--order", "1"], tmp.path());
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("d1/decomposition.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(json["orders"].as_array().unwrap().len(), 1);
}

#[test]
fn decompose_trivial_config_has_zero_norms() {
    let tmp = tempfile::tempdir().unwrap();
    let trivial = write_scenario(tmp.path(), "trivial.json", |d| {
        d["trap"]["nu"] = serde_json::json!(0.0);
        d["lasers"]["g13"]["mag"] = serde_json::json!(0.0);
        d["lasers"]["g23"]["mag"] = serde_json::json!(0.0);
    });
    let out = run(&["decompose", trivial.to_str().unwrap(), "--out", "t"], tmp.path());
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("t/decomposition.json")).unwrap(),
    )
    .unwrap();
    for o in json["orders"].as_array().unwrap() {
        assert_eq!(o["c_norm"].as_f64().unwrap(), 0.0);
        assert_eq!(o["z_norm"].as_f64().unwrap(), 0.0);
    }
}

#[test]
fn dim_cap_env_override() {
    let tmp = tempfile::tempdir().unwrap();
    // a cap smaller than the default scenario's dimension (24) must reject
    let out = Command::new(bin())
        .args(["simulate", &scenario(), "--dry-run"])
        .env("RAMAN_DIM_CAP", "10")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));

    let out = Command::new(bin())
        .args(["simulate", &scenario(), "--dry-run"])
        .env("RAMAN_DIM_CAP", "1000000")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
}
