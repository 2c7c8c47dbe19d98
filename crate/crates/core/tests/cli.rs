use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

const LC_SPEED: &str = r#"{"kind": "oseen_frank", "k1": 2.0, "k3": 1.0, "c0": 1.0, "c1": 1.4142135623730951}"#;
const FLAT_SPEED: &str = r#"{"kind": "constant", "c": 1.0, "c0": 1.0, "c1": 1.0}"#;

fn config(speed: &str, d: u32, u0: f64, eps: f64, profile: Value, n: usize, experiment: Value) -> Value {
    json!({
        "setup": {"d": d, "r0": 1.0, "eps": eps, "u0": u0,
                  "speed": serde_json::from_str::<Value>(speed).unwrap(), "profile": profile},
        "grid": {"n": n, "domain": "auto"},
        "scheme": {"cfl": 0.9, "scheme": "upwind1"},
        "output": {"snapshot_stride": 50},
        "experiment": experiment
    })
}

fn canonical(eps: f64, n: usize, experiment: Value) -> Value {
    config(LC_SPEED, 3, std::f64::consts::FRAC_PI_4, eps, json!("theorem"), n, experiment)
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p
}

fn varwave(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_varwave"));
    cmd.args(args).env_remove("VARWAVE_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn run_cmd(sub: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    varwave(&args, &[])
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

/// Data rows of a CSV artifact, skipping the config line and the column header.
fn csv_rows(p: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(p)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn sorted_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).filter(|p| p.is_file()).collect();
    v.sort();
    v
}

#[test]
fn zero_amplitude_simulation_writes_zero_energy() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(FLAT_SPEED, 3, 0.0, 0.1, json!({"polynomial": {"amplitude": 0.0}}), 256, json!({"kind": "simulate"}));
    let path = write_config(tmp.path(), "zero.json", &cfg);
    let out = tmp.path().join("out");
    let o = run_cmd("simulate", &path, &out, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("energy.csv"));
    assert!(rows.len() > 10);
    for row in &rows {
        for cell in &row[1..] {
            assert_eq!(cell.parse::<f64>().unwrap(), 0.0);
        }
    }
    let diag = read_json(&out.join("diagnostics.json"));
    assert_eq!(diag["blowup"]["detected"], json!(false));
    assert_eq!(diag["blowup"]["verdict"], json!("FAIL-AS-EXPECTED"));
    assert!(diag["constants"].is_null(), "flat speed has no blow-up constants");
}

#[test]
fn every_artifact_starts_with_the_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = canonical(0.05, 512, json!({"kind": "simulate"}));
    let path = write_config(tmp.path(), "c.json", &cfg);
    let out = tmp.path().join("out");
    assert_eq!(code(&run_cmd("simulate", &path, &out, &["--svg"])), 0);
    let files = sorted_files(&out);
    let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    for want in [
        "diagnostics.json",
        "energy.csv",
        "energy.svg",
        "hat_path.csv",
        "initial.csv",
        "inv_s.csv",
        "inv_s.svg",
        "snapshots.csv",
        "u_snapshots.svg",
    ] {
        assert!(names.iter().any(|n| n == want), "missing {want}: {names:?}");
    }
    let normalised: Value = read_json(&out.join("diagnostics.json"))["config"].clone();
    assert_eq!(normalised["setup"]["eps"], json!(0.05));
    let compact = serde_json::to_string(&normalised).unwrap();
    for f in &files {
        let text = fs::read_to_string(f).unwrap();
        let first = text.lines().next().unwrap();
        match f.extension().unwrap().to_str().unwrap() {
            "csv" => assert_eq!(first, format!("# config: {compact}")),
            "svg" => assert!(first.starts_with("<!-- config: {") && first.ends_with("-->")),
            "json" => assert!(text.trim_start().starts_with("{\n  \"config\"")),
            other => panic!("unexpected artifact type {other}"),
        }
    }
    let init = csv_rows(&out.join("initial.csv"));
    assert_eq!(init.len(), 512);
    let header = fs::read_to_string(out.join("snapshots.csv")).unwrap();
    assert_eq!(header.lines().nth(1), Some("t,r,u,R,S,u_r"));
    // Every value carries 17 significant digits.
    assert!(init[3].iter().all(|c| c.split('e').next().unwrap().trim_start_matches('-').len() == 18));
}

#[test]
fn diagnostics_json_has_report_shape() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "c.json", &canonical(0.05, 1024, json!({"kind": "simulate"})));
    let out = tmp.path().join("out");
    assert_eq!(code(&run_cmd("simulate", &path, &out, &[])), 0);
    let d = read_json(&out.join("diagnostics.json"));
    for k in ["K_measured", "K_envelope", "M", "eps0", "S0_lower", "t_star_bound"] {
        assert!(d["constants"][k].as_f64().unwrap() > 0.0, "{k}");
    }
    assert!(d["energy"].as_array().unwrap().len() > 10);
    assert!(d.get("triangle").is_some());
    let b = &d["blowup"];
    for k in ["detected", "t_detect", "t_star_extrapolated"] {
        assert!(b.get(k).is_some(), "{k}");
    }
    for k in ["u_drift_ok", "c_prime_sign_ok", "inv_S_inequality_ok", "t_star_within_paper_bound"] {
        assert!(b["flags"].get(k).is_some(), "{k}");
    }
}

#[test]
fn auto_domain_follows_the_margin_rule() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "c.json", &canonical(0.1, 256, json!({"kind": "simulate"})));
    let out = tmp.path().join("out");
    assert_eq!(code(&run_cmd("simulate", &path, &out, &[])), 0);
    let d = read_json(&out.join("diagnostics.json"));
    let (r0, eps, c1) = (1.0f64, 0.1f64, std::f64::consts::SQRT_2);
    let t_final = (r0 - eps) / c1;
    let lo = (r0 - eps - c1 * t_final - 0.05 * r0).max(0.02 * r0);
    let hi = r0 + eps + c1 * t_final + 0.05 * r0;
    assert_eq!(d["setup"]["domain"]["lo"].as_f64().unwrap(), lo);
    assert_eq!(d["setup"]["domain"]["hi"].as_f64().unwrap(), hi);
    let first_r: f64 = csv_rows(&out.join("initial.csv"))[0][0].parse().unwrap();
    assert_eq!(first_r, lo);
}

#[test]
fn triangle_command_reports_identity() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(
        LC_SPEED,
        3,
        std::f64::consts::FRAC_PI_4,
        0.1,
        json!({"smooth": {"amplitude": 1.0}}),
        2048,
        json!({"kind": "triangle", "r1": 0.85, "r2": 1.15}),
    );
    let path = write_config(tmp.path(), "t.json", &cfg);
    let out = tmp.path().join("out");
    let o = run_cmd("triangle", &path, &out, &["--svg"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = &read_json(&out.join("triangle.json"))["triangle"];
    let (lhs, rhs, res) = (t["lhs"].as_f64().unwrap(), t["rhs"].as_f64().unwrap(), t["residual"].as_f64().unwrap());
    assert!(((lhs - rhs).abs() / rhs - res).abs() < 1e-15);
    assert!(res < 0.08);
    assert!(csv_rows(&out.join("triangle_plus.csv")).len() > 10);
    assert!(csv_rows(&out.join("triangle_minus.csv")).len() > 10);
    assert!(out.join("triangle.svg").exists());
}

#[test]
fn triangle_command_needs_triangle_experiment() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "c.json", &canonical(0.1, 256, json!({"kind": "simulate"})));
    assert_eq!(code(&run_cmd("triangle", &path, &tmp.path().join("o"), &[])), 1);
}

#[test]
fn flat_speed_sweep_detects_nothing() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(
        FLAT_SPEED,
        3,
        0.0,
        0.1,
        json!({"polynomial": {"amplitude": 50.0}}),
        512,
        json!({"kind": "eps_sweep", "eps_list": [0.02, 0.05, 0.1]}),
    );
    let path = write_config(tmp.path(), "s.json", &cfg);
    let out = tmp.path().join("out");
    let o = run_cmd("eps-sweep", &path, &out, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("eps_sweep.csv"));
    assert_eq!(rows.len(), 3);
    for row in &rows {
        assert_eq!(row[1], "0");
        assert_eq!(row[2], "nan");
    }
    let summary = read_json(&out.join("eps_sweep.json"));
    assert!(summary["largest_eps_detected"].is_null());
    for k in 0..3 {
        assert!(out.join(format!("eps_{k:02}")).join("diagnostics.json").exists());
    }
}

#[test]
fn single_eps_sweep_matches_simulate() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "s.json", &canonical(0.05, 512, json!({"kind": "eps_sweep", "eps_list": [0.05]})));
    let (sim, sweep) = (tmp.path().join("sim"), tmp.path().join("sweep"));
    assert_eq!(code(&run_cmd("simulate", &path, &sim, &[])), 0);
    assert_eq!(code(&run_cmd("eps-sweep", &path, &sweep, &[])), 0);
    let a = sorted_files(&sim);
    let b = sorted_files(&sweep.join("eps_00"));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.file_name(), y.file_name());
        assert!(fs::read(x).unwrap() == fs::read(y).unwrap(), "{:?} differs", x.file_name());
    }
}

#[test]
fn convergence_of_zero_data_is_exact() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(
        FLAT_SPEED,
        1,
        0.0,
        0.1,
        json!({"polynomial": {"amplitude": 0.0}}),
        256,
        json!({"kind": "convergence", "n_list": [256, 512, 1024], "t_end": 0.2}),
    );
    let path = write_config(tmp.path(), "z.json", &cfg);
    let out = tmp.path().join("out");
    assert_eq!(code(&run_cmd("convergence", &path, &out, &[])), 0);
    let rep = read_json(&out.join("convergence.json"));
    assert_eq!(rep["self_rates"], json!(["exact"]));
    assert_eq!(rep["exact_rates"], json!(["exact", "exact"]));
    for l in rep["levels"].as_array().unwrap() {
        assert_eq!(l["l1_exact"].as_f64().unwrap(), 0.0);
    }
}

#[test]
fn convergence_of_flat_upwind_transport_is_first_order() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(
        FLAT_SPEED,
        1,
        0.0,
        0.25,
        json!({"smooth": {"amplitude": 1.0}}),
        2048,
        json!({"kind": "convergence", "n_list": [2048, 4096, 8192], "t_end": 0.3}),
    );
    let path = write_config(tmp.path(), "c.json", &cfg);
    let out = tmp.path().join("out");
    assert_eq!(code(&run_cmd("convergence", &path, &out, &["--svg"])), 0);
    let rep = read_json(&out.join("convergence.json"));
    for r in rep["exact_rates"].as_array().unwrap() {
        let p = r.as_f64().unwrap();
        assert!((0.9..=1.1).contains(&p), "{rep}");
    }
    assert_eq!(csv_rows(&out.join("convergence.csv")).len(), 3);
    assert!(out.join("convergence.svg").exists());
}

#[test]
fn convergence_of_smooth_muscl_run_is_second_order() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = config(
        LC_SPEED,
        3,
        std::f64::consts::FRAC_PI_4,
        0.45,
        json!({"smooth": {"amplitude": 1.0}}),
        2048,
        json!({"kind": "convergence", "n_list": [2048, 4096, 8192], "t_end": 0.3}),
    );
    cfg["scheme"]["scheme"] = json!("muscl2");
    let path = write_config(tmp.path(), "m.json", &cfg);
    let out = tmp.path().join("out");
    assert_eq!(code(&run_cmd("convergence", &path, &out, &[])), 0);
    let rep = read_json(&out.join("convergence.json"));
    assert!(rep["exact_rates"].is_null());
    let p = rep["self_rates"][0].as_f64().unwrap();
    assert!(p >= 1.7, "{rep}");
}

#[test]
fn validation_errors_exit_with_one() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    let bad_json = tmp.path().join("bad.json");
    fs::write(&bad_json, "{ not json").unwrap();
    assert_eq!(code(&run_cmd("simulate", &bad_json, &out, &[])), 1);
    assert_eq!(code(&run_cmd("simulate", &tmp.path().join("missing.json"), &out, &[])), 1);

    let too_wide = write_config(tmp.path(), "eps.json", &canonical(0.6, 256, json!({"kind": "simulate"})));
    assert_eq!(code(&run_cmd("simulate", &too_wide, &out, &[])), 1);

    let mut flat_theorem = canonical(0.1, 256, json!({"kind": "simulate"}));
    flat_theorem["setup"]["speed"] = serde_json::from_str(FLAT_SPEED).unwrap();
    let p = write_config(tmp.path(), "flat.json", &flat_theorem);
    assert_eq!(code(&run_cmd("simulate", &p, &out, &[])), 1);

    let not_doubling = write_config(
        tmp.path(),
        "conv.json",
        &canonical(0.1, 256, json!({"kind": "convergence", "n_list": [256, 512, 1000]})),
    );
    assert_eq!(code(&run_cmd("convergence", &not_doubling, &out, &[])), 1);

    let mut bad_cfl = canonical(0.1, 256, json!({"kind": "simulate"}));
    bad_cfl["scheme"]["cfl"] = json!(1.5);
    let p = write_config(tmp.path(), "cfl.json", &bad_cfl);
    assert_eq!(code(&run_cmd("simulate", &p, &out, &[])), 1);

    let sweep = write_config(tmp.path(), "sw.json", &canonical(0.1, 256, json!({"kind": "eps_sweep", "eps_list": [0.1]})));
    let args = ["eps-sweep", "--config", sweep.to_str().unwrap(), "--out-dir", out.to_str().unwrap()];
    assert_eq!(code(&varwave(&args, &[("VARWAVE_THREADS", "zero")])), 1);

    assert_eq!(code(&varwave(&["explode"], &[])), 1);
    assert_eq!(code(&varwave(&["simulate"], &[])), 1);
    assert_eq!(code(&varwave(&["--help"], &[])), 0);
}

#[test]
fn runtime_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    // A tiny absolute ceiling stops every member before the comparison time.
    let mut cfg = canonical(0.1, 256, json!({"kind": "convergence", "n_list": [256, 512, 1024]}));
    cfg["scheme"]["gradient_ceiling"] = json!({"absolute": 1e-3});
    let p = write_config(tmp.path(), "c.json", &cfg);
    let o = run_cmd("convergence", &p, &tmp.path().join("o"), &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("before the requested time"));
}

#[test]
fn outputs_are_bit_identical_across_runs_and_thread_counts() {
    let tmp = TempDir::new().unwrap();
    let p = write_config(
        tmp.path(),
        "s.json",
        &canonical(0.05, 512, json!({"kind": "eps_sweep", "eps_list": [0.02, 0.05, 0.1]})),
    );
    let mut trees = Vec::new();
    for (k, threads) in ["1", "3", "3"].iter().enumerate() {
        let out = tmp.path().join(format!("run{k}"));
        let args = ["eps-sweep", "--config", p.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--svg"];
        assert_eq!(code(&varwave(&args, &[("VARWAVE_THREADS", threads)])), 0);
        let mut files: Vec<(String, Vec<u8>)> = Vec::new();
        for dir in [out.clone(), out.join("eps_00"), out.join("eps_01"), out.join("eps_02")] {
            for f in sorted_files(&dir) {
                let rel = f.strip_prefix(&out).unwrap().to_string_lossy().into_owned();
                files.push((rel, fs::read(&f).unwrap()));
            }
        }
        trees.push(files);
    }
    assert!(trees[0].len() > 20);
    assert!(trees[0] == trees[1] && trees[1] == trees[2]);
}
