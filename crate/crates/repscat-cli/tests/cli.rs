use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const FREE: &str = "seed = 5\n[potential]\nalpha = 1.0\ndim = 1\n[spectral]\nlambdas = [0.5, 1.0]\n";

fn run(args: &[&str], config: &str, dir: &Path) -> Output {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_repscat"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(name)).unwrap()).unwrap()
}

fn csv_rows(dir: &Path, name: &str) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(dir.join("out").join(name)).unwrap();
    assert_eq!(&r.headers().unwrap()[0], "schema_version");
    r.records().map(|x| x.unwrap()).collect()
}

fn column(dir: &Path, name: &str, col: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(dir.join("out").join(name)).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == col).unwrap();
    r.records().map(|x| x.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn missing_alpha_exits_2_and_names_the_field() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["solve"], "[spectral]\nlambdas = [1.0]\n", d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("potential.alpha"), "{}", stderr(&o));
}

#[test]
fn alpha_out_of_range_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["solve"], "[potential]\nalpha = 2.5\n[spectral]\nlambdas = [1.0]\n", d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alpha"));
}

#[test]
fn empty_lambda_list_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["smatrix"], "[potential]\nalpha = 1.0\n[spectral]\nlambdas = []\n", d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_flag_exits_2() {
    let o = Command::new(env!("CARGO_BIN_EXE_repscat")).arg("audit").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_writes_parseval_report() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["solve"], FREE, d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j = json(d.path(), "solve.json");
    assert_eq!(j["schema_version"], 1);
    for row in j["rows"].as_array().unwrap() {
        assert!(row["parseval_rel_error"].as_f64().unwrap() <= 1e-4);
    }
    assert_eq!(csv_rows(d.path(), "solve.csv").len(), 2);
    let dump = fs::read(d.path().join("out/field_000_00.rsfd")).unwrap();
    assert_eq!(&dump[..4], b"RSFD");
    assert_eq!(u32::from_le_bytes(dump[4..8].try_into().unwrap()), 1);
}

#[test]
fn free_smatrix_sweep_matches_airy() {
    let d = tempfile::tempdir().unwrap();
    let cfg = "[potential]\nalpha = 1.0\n[spectral]\nlambda_start = 0.5\nlambda_stop = 2.0\nlambda_count = 4\n";
    let o = run(&["smatrix", "--workers", "2"], cfg, d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let diffs = column(d.path(), "smatrix.csv", "oracle_diff");
    let defects = column(d.path(), "smatrix.csv", "unitarity_defect");
    assert_eq!(diffs.len(), 4);
    assert!(diffs.iter().all(|v| *v <= 1e-6), "{diffs:?}");
    assert!(defects.iter().all(|v| *v <= 1e-5), "{defects:?}");
    assert_eq!(csv_rows(d.path(), "smatrix_entries.csv").len(), 16);
}

#[test]
fn tolerance_overrides_can_flag_a_run() {
    let d = tempfile::tempdir().unwrap();
    let tol = d.path().join("tol.toml");
    fs::write(&tol, "unitarity = 1e-14\n").unwrap();
    let o = run(&["smatrix", "--tol-overrides", tol.to_str().unwrap()], FREE, d.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(d.path().join("out/smatrix.json").exists());
    fs::write(&tol, "unitarty = 1e-14\n").unwrap();
    let o = run(&["smatrix", "--tol-overrides", tol.to_str().unwrap()], FREE, d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn default_audit_passes_and_reports_predicted_orders() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["audit"], "[potential]\nalpha = 1.0\n[spectral]\nlambdas = [0.5]\n", d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j = json(d.path(), "audit.json");
    assert_eq!(j["all_pass"], true);
    let rows = j["rows"].as_array().unwrap();
    let eik = rows.iter().find(|r| r["name"] == "eikonal_order").unwrap();
    assert!((eik["predicted"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    for name in ["factorization_order", "parseval", "round_trip", "norm_equality", "shell_average", "weight_lower"] {
        assert!(rows.iter().any(|r| r["name"] == name), "missing {name}");
    }
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().all(|l| l.starts_with("PASS")), "{stdout}");
}

#[test]
fn broken_phase_fails_only_the_eikonal_row() {
    let d = tempfile::tempdir().unwrap();
    let cfg = "[potential]\nalpha = 1.0\n[spectral]\nlambdas = [0.5]\n[job]\nphase = \"exponent_shift\"\nphase_shift = 0.25\n";
    let o = run(&["audit"], cfg, d.path());
    assert_eq!(o.status.code(), Some(3));
    let j = json(d.path(), "audit.json");
    for r in j["rows"].as_array().unwrap() {
        assert_eq!(r["pass"].as_bool().unwrap(), r["name"] != "eikonal_order", "{r}");
    }
    let verdicts: Vec<String> = csv_rows(d.path(), "audit.csv").iter().map(|r| r[7].to_string()).collect();
    assert!(verdicts.contains(&"FAIL".to_string()));
}

#[test]
fn eigenfun_and_sweep_run_on_the_free_line() {
    let d = tempfile::tempdir().unwrap();
    let cfg = "[potential]\nalpha = 1.0\n[spectral]\nlambdas = [0.5]\n";
    let o = run(&["eigenfun"], cfg, d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rt = column(d.path(), "eigenfun.csv", "round_trip");
    assert!(rt[0] <= 1e-4);
    assert!(!csv_rows(d.path(), "eigenfun_profiles.csv").is_empty());
    let o = run(&["sweep"], "[potential]\nalpha = 1.0\n[spectral]\nlambdas = [0.5, 0.75, 1.0]\n", d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j = json(d.path(), "sweep.json");
    assert!(j["lambda_holder"][0]["omega"].as_f64().unwrap() > 0.0);
    assert_eq!(csv_rows(d.path(), "sweep_quotients.csv").len(), 3 * 7);
}

#[test]
fn radial_smatrix_uses_the_shooting_oracle() {
    let d = tempfile::tempdir().unwrap();
    let cfg = "[potential]\nalpha = 1.3\ndim = 3\nq = \"gauss\"\ncoupling = 0.8\nwidth = 2.0\n[grid]\nell_max = 1\n[spectral]\nlambdas = [1.0]\n";
    let o = run(&["smatrix"], cfg, d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j = json(d.path(), "smatrix.json");
    assert_eq!(j["rows"][0]["oracle"]["method"], "ode_shooting");
    assert!(column(d.path(), "smatrix.csv", "oracle_diff")[0] <= 1e-5);
}

#[test]
fn outputs_are_reproducible_and_versioned() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = format!("{FREE}[grid]\nlength = 1600.0\n");
    assert_eq!(run(&["audit", "--workers", "1"], &cfg, a.path()).status.code(), Some(0));
    assert_eq!(run(&["audit", "--workers", "4"], &cfg, b.path()).status.code(), Some(0));
    for name in ["audit.json", "audit.csv"] {
        let x = fs::read(a.path().join("out").join(name)).unwrap();
        let y = fs::read(b.path().join("out").join(name)).unwrap();
        assert!(x == y, "{name} differs between runs");
    }
    for entry in fs::read_dir(a.path().join("out")).unwrap() {
        let p = entry.unwrap().path();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.contains("schema_version"), "{}", p.display());
    }
}
