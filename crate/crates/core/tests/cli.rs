use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_blowuplab"));
    c.env_remove("BLOWUPLAB_SEED");
    c
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn equilibria_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin().args(["run"]).arg(config("equilibria.json")).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("3/3 PASS"), "{stdout}");
    let summary = fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().filter(|l| l.ends_with(",PASS")).count(), 3);
    assert!(tmp.path().join("axis_frozen/trajectory.csv").exists());
    assert!(tmp.path().join("odd_frozen/positivity.json").exists());
    // no temporaries left behind
    assert!(tree(tmp.path()).keys().all(|k| !k.ends_with(".tmp")));
}

#[test]
fn monotone_reports_carry_bounds() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin().arg("run").arg(config("monotone.json")).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(code(&o), 0);
    for a in [1.0f64, 2.0, 4.0] {
        let text = fs::read_to_string(tmp.path().join(format!("monotone_a{a}/monotone_pressure.json"))).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let bound = v["predicted_bound"].as_f64().unwrap();
        assert!((bound - 1.0 / (a * a - 0.5).sqrt()).abs() < 1e-15);
        assert!(v["observed"].as_f64().unwrap() <= bound + 1e-6);
    }
}

#[test]
fn failed_expectation_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(config("equilibria.json")).unwrap()).unwrap();
    cfg["runs"][1]["expect"]["collapse"] = true.into();
    let path = tmp.path().join("cfg.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let o = bin().arg("run").arg(&path).arg("--out").arg(tmp.path().join("out")).output().unwrap();
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("2/3 PASS"));
}

#[test]
fn config_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{\n  \"runs\": [\n    {\"name\": \"x\",}\n  ]\n}").unwrap();
    let o = bin().arg("run").arg(&bad).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("column"), "{err}");

    let q = config("quarter.json");
    for (param, values) in [("H", ""), ("H", " , "), ("no_such_field", "1"), ("location", "1")] {
        let o = bin()
            .args(["sweep"])
            .arg(&q)
            .args(["--param", param, "--values", values, "--out"])
            .arg(tmp.path().join("s"))
            .output()
            .unwrap();
        assert_eq!(code(&o), 2, "{param} {values:?}");
    }
    let o = bin().arg("run").arg(tmp.path().join("missing.json")).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn invalid_scenario_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(config("equilibria.json")).unwrap()).unwrap();
    cfg["runs"][0]["scenario"]["t_end"] = (-1.0).into();
    let path = tmp.path().join("cfg.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let o = bin().arg("run").arg(&path).arg("--out").arg(tmp.path().join("out")).output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("t_end"));
}

#[test]
fn quarter_sweep_shows_transition() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("sweep")
        .arg(config("quarter.json"))
        .args(["--param", "H", "--values", "0.20,0.25,0.30", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][6], "pass");
    assert_eq!(rows[1][6], "indeterminate");
    assert_eq!(rows[2][6], "pass");
    let zeros: Vec<u64> = rows.iter().map(|r| r[7].parse().unwrap()).collect();
    assert_eq!(zeros[0], 0);
    assert!(zeros[2] >= 2);
}

#[test]
fn monotone_sweep_crosses_nu_sign() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("sweep")
        .arg(config("monotone_sweep.json"))
        .args(["--param", "a", "--values", "0.5,2", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let outcomes: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(6).unwrap()).collect();
    assert_eq!(outcomes, ["hypothesis_not_met", "pass"]);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &str, jobs: &str| {
        let o = bin()
            .arg("run")
            .arg(config("equilibria.json"))
            .args(["--jobs", jobs, "--out"])
            .arg(tmp.path().join(dir))
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        tree(&tmp.path().join(dir))
    };
    let a = run("a", "1");
    let b = run("b", "4");
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn seed_env_and_tol_override() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin()
        .env("BLOWUPLAB_SEED", "42")
        .args(["--tol", "1e-9", "run"])
        .arg(config("equilibria.json"))
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(v["seed"], 42);
    assert_eq!(v["runs"][2]["seed"], 44);

    let o = bin().env("BLOWUPLAB_SEED", "x").arg("run").arg(config("equilibria.json")).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(code(&o), 2);
    let o = bin().args(["--tol", "-1", "run"]).arg(config("equilibria.json")).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(code(&o), 2);
}
