use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bellconc(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellconc"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("BELLCONC_OUT")
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn classical_bound_of_catalog_entries() {
    let dir = scratch("classical");
    let o = bellconc(&dir, &["classical-bound", "--catalog", "i3322"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("(3, 6)"), "{}", stdout(&o));
    let o = bellconc(&dir, &["classical-bound", "--catalog", "chsh"]);
    assert!(stdout(&o).contains("(-2, 2)"));
    let normalized = std::fs::read_to_string(dir.join("chsh.normalized.json")).unwrap();
    let back = bellconc::io::functional_from_json(&normalized).unwrap();
    assert_eq!(back.bounds(), Some((-1.0, 1.0)));
    assert!(dir.join("classical-bound.manifest.json").exists());
}

#[test]
fn malformed_functional_file_reports_position() {
    let dir = scratch("malformed");
    let file = dir.join("bad.json");
    std::fs::write(&file, "{\"scenario\": {\"N\": 2,\n \"m\": 2 \"v\": 2}}").unwrap();
    let o = bellconc(&dir, &["classical-bound", "--file", file.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn unknown_catalog_name_fails() {
    let dir = scratch("unknown");
    let o = bellconc(&dir, &["classical-bound", "--catalog", "cglmp"]);
    assert!(!o.status.success());
}

#[test]
fn positivize_writes_unit_cube_form() {
    let dir = scratch("positivize");
    let o = bellconc(&dir, &["positivize", "--catalog", "chsh"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("Θ = 10"));
    let text = std::fs::read_to_string(dir.join("chsh.positive.json")).unwrap();
    let p = bellconc::io::functional_from_json(&text).unwrap();
    assert!(p.coeffs().iter().all(|&c| (0.0..=1.0).contains(&c)));
    assert_eq!(p.bounds().unwrap().1, 1.0);
}

#[test]
fn tail_is_reproducible_and_bounded_by_tsirelson() {
    let dir = scratch("tail");
    let cfg = dir.join("chsh.cfg");
    std::fs::write(&cfg, "# CHSH only\nfunctionals = chsh\nc = 1.5\nsamples = 100\nseed = 7\nrestarts = 5\n").unwrap();
    let run = |sub: &str| {
        let out = dir.join(sub);
        let o = bellconc(&out, &["tail", "--config", cfg.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        (stdout(&o), std::fs::read(out.join("tail.jsonl")).unwrap())
    };
    let (text, first) = run("a");
    let (_, second) = run("b");
    assert_eq!(first, second);
    assert!(text.contains("p̂ = 0 "), "{text}");
    assert!(text.contains("lower-bound estimator"));
    let jsonl = String::from_utf8(first).unwrap();
    assert_eq!(jsonl.lines().next().unwrap(), r#"{"manifest":"tail.manifest.json"}"#);
    assert_eq!(jsonl.lines().count(), 102);
    let summary: serde_json::Value = serde_json::from_str(jsonl.lines().last().unwrap()).unwrap();
    assert_eq!(summary["summary"]["exceedances"], 0);
    assert!(summary["summary"]["interval"][1].as_f64().unwrap() > 0.0);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = scratch("seed");
    let cfg = dir.join("t.json");
    std::fs::write(&cfg, r#"{"functionals": ["chsh"], "c": 1.2, "samples": 5, "restarts": 2, "seed": 1}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bellconc"))
        .args(["--seed", "99", "tail", "--config", cfg.to_str().unwrap()])
        .env("BELLCONC_OUT", &dir)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("tail.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 99);
    assert_eq!(manifest["outputs"][0], "tail.jsonl");
}

#[test]
fn tail_missing_key_is_named() {
    let dir = scratch("missing");
    let cfg = dir.join("t.cfg");
    std::fs::write(&cfg, "c = 1.5\n").unwrap();
    let o = bellconc(&dir, &["tail", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("`samples`"), "{}", stderr(&o));
}

#[test]
fn bound_records_and_sweep() {
    let dir = scratch("bound");
    let o = bellconc(&dir, &["bound", "-N", "3", "-d", "37", "--variant", "theorem", "--variant", "appendix"]);
    assert!(o.status.success());
    let records: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0]["variant"], "theorem");
    for key in ["params", "variant", "log_value", "terms"] {
        assert!(records[1].get(key).is_some(), "{key}");
    }
    assert!(records[1]["log_value"].as_f64() >= records[0]["log_value"].as_f64());

    let o = bellconc(&dir, &["bound", "-d", "37", "--sweep-parties", "20:30:5"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.join("bound_sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# manifest: bound.manifest.json"));
    assert_eq!(lines.next(), Some("N,m,v,d,b,c,delta,variant,log_value"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    let value: f64 = rows[0].rsplit(',').next().unwrap().parse().unwrap();
    assert!((value - 4.645_932_018_823_029e13).abs() < 1e-12 * value);
}

#[test]
fn bound_rejects_small_threshold() {
    let dir = scratch("hypothesis");
    let o = bellconc(&dir, &["bound", "-c", "1.05", "--delta", "0.1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("c > δ + 1"), "{}", stderr(&o));
}

#[test]
fn concentration_and_net_demo_write_data() {
    let dir = scratch("concentration");
    let o = bellconc(&dir, &["concentration", "--parties", "2,3", "--samples", "500"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.join("concentration.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 2 * 10);
    assert_eq!(std::fs::read_to_string(dir.join("concentration.jsonl")).unwrap().lines().count(), 2);

    let o = bellconc(&dir, &["net-demo", "-n", "2", "--epsilon", "0.5", "--budget", "2000"]);
    assert!(o.status.success());
    let net = bellconc::nets::HypercubeNet::from_json(&std::fs::read_to_string(dir.join("net.json")).unwrap()).unwrap();
    assert_eq!(net.len(), 16);
}

#[test]
fn verify_passes_and_detects_corruption() {
    let dir = scratch("verify");
    let o = bellconc(&dir, &["verify"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
    assert!(text.contains("20 random normalized"));
    let o = bellconc(&dir, &["verify", "--corrupt-fixture"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL catalog"));
}

#[test]
fn env_var_overrides_out_flag() {
    let flag = scratch("flag");
    let env = scratch("env");
    let o = Command::new(env!("CARGO_BIN_EXE_bellconc"))
        .args(["--out", flag.to_str().unwrap(), "classical-bound", "--catalog", "pent1"])
        .env("BELLCONC_OUT", &env)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(env.join("pent1.normalized.json").exists());
    assert!(!flag.join("pent1.normalized.json").exists());
}
