use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_wrinkleplate");

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> i32 {
    Command::new(BIN).args(args).output().unwrap().status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const FLAT_DIPOLE: &str = r#"{
  "shape": {"catalog": {"name": "flat"}},
  "material": {"isotropic": {"mu": 1.0, "lambda": 0.5}},
  "cell": {"n": 2},
  "plate": {"m1": 9, "m2": 9, "load": {"catalog": {"name": "dipole", "amplitude": 3.0}},
            "minimizer": {"n_starts": 2, "seed": 11}}
}"#;

const EGGBOX: &str = r#"{
  "shape": {"catalog": {"name": "eggbox", "params": {"amplitude": 0.8}}},
  "material": {"isotropic": {"mu": 1.0, "lambda": 1.0}},
  "cell": {"n": 4},
  "plate": {"m1": 9, "m2": 9, "load": {"catalog": {"name": "checker", "amplitude": 1.0}},
            "minimizer": {"n_starts": 2}}
}"#;

#[test]
fn solve_is_byte_deterministic() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", FLAT_DIPOLE);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run(&["solve", s(&cfg), "--out", s(&a)]), 0);
    assert_eq!(run(&["solve", s(&cfg), "--out", s(&b)]), 0);
    for f in ["energy.json", "plate_solution.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", FLAT_DIPOLE);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run(&["solve", s(&cfg), "--out", s(&a), "--seed", "11"]), 0);
    assert_eq!(run(&["solve", s(&cfg), "--out", s(&b), "--seed", "12"]), 0);
    let ea: serde_json::Value = serde_json::from_slice(&fs::read(a.join("energy.json")).unwrap()).unwrap();
    let eb: serde_json::Value = serde_json::from_slice(&fs::read(b.join("energy.json")).unwrap()).unwrap();
    // the zero start is seed independent, the random start is not
    assert_eq!(ea["starts"][0], eb["starts"][0]);
    assert_ne!(ea["starts"][1], eb["starts"][1]);
}

#[test]
fn effective_form_round_trips_into_solve() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", EGGBOX);
    let (eff, fresh, reused) = (tmp.path().join("eff"), tmp.path().join("fresh"), tmp.path().join("reused"));
    assert_eq!(run(&["effective", s(&cfg), "--out", s(&eff)]), 0);
    let form_path = eff.join("effective_form.json");
    let form: serde_json::Value = serde_json::from_slice(&fs::read(&form_path).unwrap()).unwrap();
    assert_eq!(form["kernel_dim"], 1);
    for b in ["G11", "G22", "G12", "F11", "F22", "F12"] {
        let csv = fs::read_to_string(eff.join(format!("correctors_{b}.csv"))).unwrap();
        assert!(csv.starts_with("y1,y2,u1,u2,v\n"));
        assert_eq!(csv.lines().count(), 1 + 32 * 32);
    }
    assert_eq!(run(&["solve", s(&cfg), "--out", s(&fresh)]), 0);
    assert_eq!(run(&["solve", s(&cfg), "--out", s(&reused), "--reuse-effective", s(&form_path)]), 0);
    assert_eq!(
        fs::read(fresh.join("energy.json")).unwrap(),
        fs::read(reused.join("energy.json")).unwrap()
    );
}

#[test]
fn flat_effective_form_is_the_plane_form() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", FLAT_DIPOLE);
    let out = tmp.path().join("o");
    assert_eq!(run(&["effective", s(&cfg), "--out", s(&out)]), 0);
    let form: serde_json::Value = serde_json::from_slice(&fs::read(out.join("effective_form.json")).unwrap()).unwrap();
    let m: Vec<Vec<f64>> = serde_json::from_value(form["m"].clone()).unwrap();
    // mu = 1, lambda = 0.5: lambda' = 2 mu lambda / (2 mu + lambda) = 0.4
    let a = [[2.4, 0.4, 0.0], [0.4, 2.4, 0.0], [0.0, 0.0, 2.0]];
    for i in 0..6 {
        for j in 0..6 {
            let want = if i < 3 && j < 3 { a[i][j] } else { 0.0 };
            assert!((m[i][j] - want).abs() <= 1e-12, "M[{i}][{j}] = {}", m[i][j]);
        }
    }
    assert_eq!(form["kernel_dim"], 3);
}

#[test]
fn zero_load_gives_zero_energy() {
    let tmp = TempDir::new().unwrap();
    let rows = vec![vec![0.0; 7]; 7];
    let text = format!(
        r#"{{"shape": {{"catalog": {{"name": "eggbox"}}}},
            "material": {{"isotropic": {{"mu": 1.0, "lambda": 1.0}}}},
            "cell": {{"n": 3}},
            "plate": {{"m1": 7, "m2": 7, "load": {{"grid": {}}}, "sign": 1}}}}"#,
        serde_json::to_string(&rows).unwrap()
    );
    let cfg = write_config(tmp.path(), "c.json", &text);
    let out = tmp.path().join("o");
    assert_eq!(run(&["solve", s(&cfg), "--out", s(&out)]), 0);
    let e: serde_json::Value = serde_json::from_slice(&fs::read(out.join("energy.json")).unwrap()).unwrap();
    assert!(e["total"].as_f64().unwrap().abs() <= 1e-12);
    assert_eq!(e["s_chosen"], 1);
}

#[test]
fn non_hermitian_shape_exits_1_without_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"shape": {"custom": [{"k1": 1, "k2": 0, "re": 0.5, "im": 0.0},
                                  {"k1": -1, "k2": 0, "re": 0.25, "im": 0.0}]},
            "material": {"isotropic": {"mu": 1.0, "lambda": 1.0}}}"#,
    );
    let out = tmp.path().join("o");
    assert_eq!(run(&["effective", s(&cfg), "--out", s(&out)]), 1);
    assert!(!out.exists());
}

#[test]
fn band_below_shape_band_exits_1() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"shape": {"custom": [{"k1": 2, "k2": 1, "re": 0.0, "im": 0.1},
                                  {"k1": -2, "k2": -1, "re": 0.0, "im": -0.1}]},
            "material": {"isotropic": {"mu": 1.0, "lambda": 1.0}},
            "cell": {"n": 1}}"#,
    );
    let out = tmp.path().join("o");
    for verb in ["effective", "validate"] {
        assert_eq!(run(&[verb, s(&cfg), "--out", s(&out)]), 1);
    }
    assert!(!out.exists());
}

#[test]
fn config_errors_exit_1() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    let bad = [
        ("unknown_field.json", r#"{"shape": {"catalog": {"name": "flat"}}, "material": {"isotropic": {"mu": 1, "lambda": 1}}, "extra": 1}"#),
        ("unknown_shape.json", r#"{"shape": {"catalog": {"name": "zigzag"}}, "material": {"isotropic": {"mu": 1, "lambda": 1}}}"#),
        ("bad_material.json", r#"{"shape": {"catalog": {"name": "flat"}}, "material": {"isotropic": {"mu": -1, "lambda": 1}}}"#),
        ("short_tensor.json", r#"{"shape": {"catalog": {"name": "flat"}}, "material": {"tensor": [1, 2, 3]}}"#),
        ("not_json.json", "shape = flat"),
    ];
    for (name, text) in bad {
        let cfg = write_config(tmp.path(), name, text);
        assert_eq!(run(&["effective", s(&cfg), "--out", s(&out)]), 1, "{name}");
    }
    assert_eq!(run(&["effective", "/nonexistent/config.json", "--out", s(&out)]), 1);
    assert_eq!(run(&["frobnicate"]), 1);
    assert_eq!(run(&["solve"]), 1);
    assert!(!out.exists());
}

#[test]
fn unbalanced_load_and_missing_plate_exit_1() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    let rows = vec![vec![1.0; 5]; 5];
    let text = format!(
        r#"{{"shape": {{"catalog": {{"name": "flat"}}}},
            "material": {{"isotropic": {{"mu": 1.0, "lambda": 1.0}}}},
            "plate": {{"m1": 5, "m2": 5, "load": {{"grid": {}}}}}}}"#,
        serde_json::to_string(&rows).unwrap()
    );
    let cfg = write_config(tmp.path(), "c.json", &text);
    assert_eq!(run(&["solve", s(&cfg), "--out", s(&out)]), 1);
    let cfg = write_config(
        tmp.path(),
        "d.json",
        r#"{"shape": {"catalog": {"name": "flat"}}, "material": {"isotropic": {"mu": 1, "lambda": 1}}}"#,
    );
    assert_eq!(run(&["solve", s(&cfg), "--out", s(&out)]), 1);
    assert!(!out.exists());
}

#[test]
fn cell_nonconvergence_exits_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"shape": {"catalog": {"name": "eggbox"}},
            "material": {"isotropic": {"mu": 1.0, "lambda": 1.0}},
            "cell": {"n": 4, "max_iter": 1}}"#,
    );
    let out = tmp.path().join("o");
    assert_eq!(run(&["effective", s(&cfg), "--out", s(&out)]), 2);
    assert!(!out.exists());
}

#[test]
fn starved_descent_exits_3_with_best_state() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"shape": {"catalog": {"name": "flat"}},
            "material": {"isotropic": {"mu": 1.0, "lambda": 1.0}},
            "cell": {"n": 1},
            "plate": {"m1": 7, "m2": 7, "load": {"catalog": {"name": "checker"}},
                      "minimizer": {"max_iter": 2, "n_starts": 1}}}"#,
    );
    let out = tmp.path().join("o");
    assert_eq!(run(&["solve", s(&cfg), "--out", s(&out)]), 3);
    let e: serde_json::Value = serde_json::from_slice(&fs::read(out.join("energy.json")).unwrap()).unwrap();
    assert_eq!(e["converged"], false);
    assert!(e["total"].as_f64().unwrap() < 0.0);
    assert!(out.join("plate_solution.csv").exists());
}

#[test]
fn validate_passes_on_flat_and_reports_each_check() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", FLAT_DIPOLE);
    let out = tmp.path().join("o");
    assert_eq!(run(&["validate", s(&cfg), "--out", s(&out)]), 0);
    let r: serde_json::Value = serde_json::from_slice(&fs::read(out.join("validate_report.json")).unwrap()).unwrap();
    assert_eq!(r["passed"], true);
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for want in ["flat_reduction", "oracle_agreement", "corrector_linearity", "plate_gradient_fd"] {
        assert!(names.contains(&want), "{want} missing from {names:?}");
    }
}

#[test]
fn validate_fails_with_exit_4_on_a_coarse_oracle() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"shape": {"catalog": {"name": "eggbox"}},
            "material": {"isotropic": {"mu": 1.0, "lambda": 1.0}},
            "cell": {"n": 4},
            "validate": {"oracle_n": 4, "oracle_loads": 1, "linearity_trials": 0, "gradient_states": 0}}"#,
    );
    let out = tmp.path().join("o");
    assert_eq!(run(&["validate", s(&cfg), "--out", s(&out)]), 4);
    let r: serde_json::Value = serde_json::from_slice(&fs::read(out.join("validate_report.json")).unwrap()).unwrap();
    assert_eq!(r["passed"], false);
    let oracle = r["checks"].as_array().unwrap().iter().find(|c| c["name"] == "oracle_agreement").unwrap();
    assert_eq!(oracle["pass"], false);
}

#[test]
fn library_entry_point_matches_binary() {
    assert_eq!(wrinkleplate_cli::run(["wrinkleplate", "--version"]), 0);
    assert_eq!(wrinkleplate_cli::run(["wrinkleplate", "effective"]), 1);
}
