use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use wave_lab::ExperimentConfig;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn wave_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wave-lab")).args(args).output().unwrap()
}

fn run_config(sub: &str, config: &Path, out: &Path) -> Output {
    wave_lab(&[sub, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn summary(out: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join(format!("{name}.summary.json"))).unwrap()).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

const SMALL: &str = r#"
schema_version = 1
[domain]
length = 3.141592653589793
final_time = 0.5
dt = 0.01
modes = 4
[u0]
kind = "eigenmode"
k = 1
"#;

#[test]
fn exact_mode_energy_is_one() {
    let out = TempDir::new().unwrap();
    let o = run_config("solve", &configs().join("exact_mode.toml"), out.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.path().join("exact_mode.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,eta,gronwall_bound"));
    let mut rows = 0;
    for line in lines {
        let eta: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((eta - 1.0).abs() <= 1e-6, "{line}");
        rows += 1;
    }
    assert!(rows > 6000);
}

#[test]
fn smooth_existence_sweep_is_moderate_with_zero_exponent() {
    let out = TempDir::new().unwrap();
    let o = run_config("sweep-existence", &configs().join("smooth_existence.toml"), out.path());
    assert_eq!(o.status.code(), Some(0));
    let s = summary(out.path(), "smooth_existence");
    assert_eq!(s["results"]["verdict"]["verdict"], "moderate");
    assert!(num(&s["results"]["fit"]["fitted_n"]).abs() < 1e-6);
    assert_eq!(s["results"]["fit"]["eps_grid"].as_array().unwrap().len(), 8);
    let csv = fs::read_to_string(out.path().join("smooth_existence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 8);
    assert!(csv.starts_with("eps,m_norm,laplacian_sq,accel_sq,weighted_sq,"));
    assert_eq!(s["results"]["boundary_regularized"], false);
}

#[test]
fn constant_potential_oracle_agrees() {
    let out = TempDir::new().unwrap();
    let o = run_config("oracle-compare", &configs().join("unit_potential_oracle.toml"), out.path());
    assert_eq!(o.status.code(), Some(0));
    let s = summary(out.path(), "constant_potential_oracle");
    assert!(num(&s["results"]["max_discrepancy"]) <= 2e-4);
    let v = &s["verdicts"][0];
    assert_eq!(v["name"], "oracle_agreement");
    assert!(v["invariant"].as_str().unwrap().contains("L2"));
    assert_eq!(num(&v["tolerance"]), 2e-4);
}

#[test]
fn lifted_sine_boundary_passes_every_check() {
    let out = TempDir::new().unwrap();
    let o = run_config("lift-solve", &configs().join("lift_sine.toml"), out.path());
    assert_eq!(o.status.code(), Some(0));
    let s = summary(out.path(), "lift_sine");
    assert!(num(&s["results"]["trace_error"]) <= 1e-6);
    assert!(num(&s["results"]["oracle"]["max_l2"]) <= 1e-3);
}

#[test]
fn failed_verdict_exits_one() {
    let dir = TempDir::new().unwrap();
    let text = fs::read_to_string(configs().join("unit_potential_oracle.toml"))
        .unwrap()
        .replace("tolerance = 2e-4", "tolerance = 1e-12");
    let cfg = write_config(&dir, "strict.toml", &text);
    let o = run_config("oracle-compare", &cfg, dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL oracle_agreement"));
    let s = summary(dir.path(), "constant_potential_oracle");
    assert_eq!(s["passed"], false);
}

#[test]
fn schema_errors_exit_two_with_location() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.toml", &format!("{SMALL}\n[potential]\nkind = \"const\"\nvalue = 1.0\nscale = 2.0\n"));
    let o = run_config("solve", &cfg, dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("scale") && err.contains("line"), "{err}");

    let cfg = write_config(&dir, "neg.toml", &format!("{SMALL}\n[potential]\nkind = \"dirac\"\nlocation = 1.0\nweight = -2.0\n"));
    let o = run_config("solve", &cfg, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("potential.weight"));

    let cfg = write_config(&dir, "kind.toml", &format!("experiment = \"lift-solve\"\n{SMALL}"));
    assert_eq!(run_config("solve", &cfg, dir.path()).status.code(), Some(2));
}

#[test]
fn step_size_guard_exits_three_with_its_name() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "coarse.toml", &SMALL.replace("dt = 0.01", "dt = 0.5"));
    let o = run_config("solve", &cfg, dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("verlet-stability"));
}

#[test]
fn unresolved_mollifier_on_fd_grid_exits_three() {
    let dir = TempDir::new().unwrap();
    let text = format!(
        "{SMALL}\n[potential]\nkind = \"dirac\"\nlocation = 1.5\n[regularization]\neps = 0.0625\n[oracle]\nnx = 20\n"
    );
    let cfg = write_config(&dir, "fd.toml", &text);
    let o = run_config("oracle-compare", &cfg, dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("fd-resolution"));
}

#[test]
fn unwritable_output_exits_four() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "small.toml", SMALL);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = run_config("solve", &cfg, &blocker.join("out"));
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn name_defaults_to_the_config_stem() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "tiny_case.toml", SMALL);
    assert_eq!(run_config("solve", &cfg, dir.path()).status.code(), Some(0));
    assert!(dir.path().join("tiny_case.csv").exists());
    assert!(dir.path().join("tiny_case.summary.json").exists());
}

#[test]
fn reruns_and_thread_counts_give_identical_files() {
    let cfg = configs().join("smooth_existence.toml");
    let outs: Vec<TempDir> = (0..3).map(|_| TempDir::new().unwrap()).collect();
    let threads = ["1", "1", "3"];
    for (out, n) in outs.iter().zip(threads) {
        let o = wave_lab(&[
            "sweep-existence",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.path().to_str().unwrap(),
            "--threads",
            n,
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    for file in ["smooth_existence.csv", "smooth_existence.summary.json"] {
        let first = fs::read_to_string(outs[0].path().join(file)).unwrap();
        for out in &outs[1..] {
            assert_eq!(first, fs::read_to_string(out.path().join(file)).unwrap(), "{file}");
        }
    }
}

#[test]
fn config_echo_reproduces_the_run() {
    let out = TempDir::new().unwrap();
    let o = run_config("oracle-compare", &configs().join("unit_potential_oracle.toml"), out.path());
    assert_eq!(o.status.code(), Some(0));
    let s = summary(out.path(), "constant_potential_oracle");
    let echoed: ExperimentConfig = serde_json::from_value(s["config"].clone()).unwrap();
    let again = TempDir::new().unwrap();
    let cfg = write_config(&again, "echo.toml", &toml::to_string(&echoed).unwrap());
    assert_eq!(run_config("oracle-compare", &cfg, again.path()).status.code(), Some(0));
    for file in ["constant_potential_oracle.csv", "constant_potential_oracle.summary.json"] {
        assert_eq!(
            fs::read_to_string(out.path().join(file)).unwrap(),
            fs::read_to_string(again.path().join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn sweeps_write_their_documented_columns() {
    let dir = TempDir::new().unwrap();
    let base = r#"
schema_version = 1
[domain]
length = 3.141592653589793
final_time = 0.5
dt = 0.01
modes = 12
[potential]
kind = "sum"
terms = [{ kind = "const", value = 1.0 }, { kind = "sin", k = 1.0 }]
[u0]
kind = "bubble"
[sweep]
first_exponent = 3
last_exponent = 6
mollify = ["potential"]
alternative = { potential = "quadratic_spline" }
"#;
    let cfg = write_config(&dir, "sw.toml", base);
    let o = run_config("sweep-uniqueness", &cfg, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = fs::read_to_string(dir.path().join("sw.csv")).unwrap();
    assert!(csv.starts_with("eps,difference,laplacian_sq,accel_sq,weighted_sq\n"));
    assert_eq!(csv.lines().count(), 5);

    let o = run_config("sweep-consistency", &cfg, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = fs::read_to_string(dir.path().join("sw.csv")).unwrap();
    assert!(csv.starts_with("eps,difference\n"));
    let s = summary(dir.path(), "sw");
    assert!(num(&s["results"]["slope"]) > 1.5);
}

#[test]
fn identical_mollifiers_give_an_identically_zero_difference() {
    let dir = TempDir::new().unwrap();
    let text = r#"
schema_version = 1
[domain]
length = 3.141592653589793
final_time = 0.5
dt = 0.005
modes = 16
[potential]
kind = "dirac"
location = 1.5707963267948966
[u0]
kind = "eigenmode"
k = 1
[sweep]
first_exponent = 3
last_exponent = 5
mollifier = "triangle"
alternative = { potential = "triangle" }
"#;
    let cfg = write_config(&dir, "same.toml", text);
    assert_eq!(run_config("sweep-uniqueness", &cfg, dir.path()).status.code(), Some(0));
    let s = summary(dir.path(), "same");
    assert_eq!(s["results"]["fit"]["identically_zero"], true);
    let csv = fs::read_to_string(dir.path().join("same.csv")).unwrap();
    for line in csv.lines().skip(1) {
        assert_eq!(line.split(',').nth(1), Some("0.0000000000000000e0"));
    }
}

#[test]
fn verify_energy_reports_corollary_checks() {
    let dir = TempDir::new().unwrap();
    let text = format!("{SMALL}\n[[source]]\ntime = {{ kind = \"cos\", omega = 2.0 }}\nspace = {{ kind = \"bubble\" }}\n[potential]\nkind = \"const\"\nvalue = 2.0\n");
    let cfg = write_config(&dir, "ve.toml", &text);
    let o = run_config("verify-energy", &cfg, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let s = summary(dir.path(), "ve");
    assert_eq!(s["results"]["corollary"]["ratios"].as_array().unwrap().len(), 7);
    let names: Vec<&str> = s["verdicts"].as_array().unwrap().iter().map(|v| v["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"differentiated_matches_u_t"));
    assert!(fs::read_to_string(dir.path().join("ve.csv")).unwrap().starts_with("t,eta,xi,gronwall_bound\n"));
}
