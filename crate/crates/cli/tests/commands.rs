//! End-to-end runs of the `hyperstab` binary against the shipped recipes.

use hyperstab::io::read_flux_table_csv;
use hyperstab::models::{build_flux_table, PlfParams, ProfileOptions};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn recipe(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn hyperstab(args: &[&str], out: &Path) -> Output {
    let dir = format!("output_dir={:?}", out.display().to_string());
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hyperstab"));
    cmd.args(args).args(["--set", &dir]);
    cmd.output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr_report(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn check_on_psystem_recipe_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = hyperstab(&["check", recipe("psystem.toml").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&dir.path().join("assumptions.json"));
    assert_eq!(report["all_pass"], Value::Bool(true));
    assert_eq!(report["points_outside_domain"], 0);
}

#[test]
fn equal_states_give_zero_strength_solution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = recipe("psystem.toml");
    let o = hyperstab(&["solve", cfg.to_str().unwrap(), "--set", "riemann.right=[0.8, 1.0]"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let sol = json(&dir.path().join("solution.json"));
    assert_eq!(sol["type"], "SingleRarefaction1");
    assert_eq!(sol["intermediate"], Value::Null);
    let w = &sol["waves"][0];
    assert_eq!(w["endpoints"][0], w["endpoints"][1]);
    assert_eq!(w["speed_or_lambda_range"][0], w["speed_or_lambda_range"][1]);
    let fan = std::fs::read_to_string(dir.path().join("fan.csv")).unwrap();
    let states: std::collections::BTreeSet<_> = fan.lines().skip(1).map(|l| l.split_once(',').unwrap().1.to_string()).collect();
    assert_eq!(states.len(), 1, "fan is not constant");
}

#[test]
fn fit_on_fine_table_meets_constraints() {
    let dir = tempfile::tempdir().unwrap();
    let o = hyperstab(&["fit", recipe("plf_fit.toml").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let fit = json(&dir.path().join("fit.json"));
    assert_eq!(fit["lambda"].as_f64(), Some(0.03));
    let res = fit["max_constraint_residual"].as_f64().unwrap();
    assert!(res <= 1e-10, "constraint residual {res}");
    assert!(fit["f"].is_object() && fit["g"].is_object());
    assert!(fit["f_error"]["value"].as_f64().unwrap().is_finite());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cfg = recipe("psystem.toml");
    let gen = recipe("psystem_genericity.toml");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [a.path(), b.path()] {
        for (cmd, cfg) in [("solve", &cfg), ("trace", &cfg), ("genericity", &gen)] {
            let o = hyperstab(&[cmd, cfg.to_str().unwrap(), "--set", "genericity.samples=60"], dir);
            assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        }
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 6);
    for n in names {
        let x = std::fs::read(a.path().join(&n)).unwrap();
        let y = std::fs::read(b.path().join(&n)).unwrap();
        assert!(x == y, "{n:?} differs between runs");
    }
}

#[test]
fn unknown_key_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = recipe("psystem.toml");
    for bad in ["bogus=1", "window.middle=0.5", "model.gamma=1.4", "solve..x=1"] {
        let o = hyperstab(&["solve", cfg.to_str().unwrap(), "--set", bad], dir.path());
        assert_eq!(o.status.code(), Some(2), "{bad}");
        let r = stderr_report(&o);
        assert_eq!(r["kind"], "validation", "{bad}");
        assert_eq!(r["status"], 2);
    }
}

#[test]
fn missing_solution_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = recipe("psystem.toml");
    let o = hyperstab(
        &["solve", cfg.to_str().unwrap(), "--set", "riemann.left=[-1.9, 2.9]", "--set", "riemann.right=[1.9, 2.9]"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_report(&o)["kind"], "numerical");
}

#[test]
fn exported_table_reloads_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = recipe("plf_fit.toml");
    let o = hyperstab(&["plf-table", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let path = dir.path().join("flux_table.csv");
    let read = read_flux_table_csv(std::fs::File::open(&path).unwrap()).unwrap();
    let params = PlfParams { mu_l: 0.971, rho_s: 1.549, b1: 3.0244, b2: 1.80036, phi_c: 0.50297, phi_m: 0.61, alpha_deg: Some(25.0) };
    let built = build_flux_table(&params, 610, &ProfileOptions::default()).unwrap();
    assert_eq!(read.phi0, built.phi0);
    assert_eq!(read.f, built.f);
    assert_eq!(read.g, built.g);

    // the bare-table model kind solves with the same closure as the spline recipe
    let table_cfg = dir.path().join("table.toml");
    let spline_cfg = std::fs::read_to_string(recipe("plf_case1_spline.toml")).unwrap();
    let model_end = spline_cfg.find("[window]").unwrap();
    let rest = &spline_cfg[model_end..];
    std::fs::write(&table_cfg, format!("[model]\nkind = \"table\"\npath = \"flux_table.csv\"\n\n{rest}")).unwrap();
    let (x, y) = (dir.path().join("x"), dir.path().join("y"));
    assert_eq!(hyperstab(&["solve", table_cfg.to_str().unwrap()], &x).status.code(), Some(0));
    assert_eq!(hyperstab(&["solve", recipe("plf_case1_spline.toml").to_str().unwrap()], &y).status.code(), Some(0));
    assert_eq!(std::fs::read(x.join("solution.json")).unwrap(), std::fs::read(y.join("solution.json")).unwrap());
}
