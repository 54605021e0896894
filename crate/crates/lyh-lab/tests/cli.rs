use lyh_lab::report::csv_body;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn lab(args: &[&str], config: Option<&str>, dir: &TempDir) -> (Output, PathBuf) {
    let out = dir.path().join(format!("out-{}", args.join("-").replace(['/', ' '], "_")));
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lyh-lab"));
    cmd.args(args).arg("--out").arg(&out);
    if let Some(src) = config {
        let path = dir.path().join(format!("cfg-{}.toml", args[0]));
        std::fs::write(&path, src).unwrap();
        cmd.arg("--config").arg(path);
    }
    (cmd.output().expect("spawn lyh-lab"), out)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(dir, "manifest.json")).unwrap()
}

#[test]
fn oracle_suite_quick_passes() {
    let dir = TempDir::new().unwrap();
    let (o, out) = lab(&["oracle-suite"], Some("[oracle]\nscale = \"quick\"\n"), &dir);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["rng"], "ChaCha20");
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(m["seed"], 20_240_601);
    assert!(m.get("generated_unix").is_none());
    let csv = read(&out, "oracle_suite.csv");
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("seed,version,tol,"), "{header}");
    assert!(csv.lines().skip(1).all(|l| l.starts_with(&format!("20240601,{},", env!("CARGO_PKG_VERSION")))));
}

#[test]
fn negatively_curved_model_expected_out() {
    let dir = TempDir::new().unwrap();
    let cfg = "suite = \"cone-check\"\n[dims]\nm = 2\n[model]\nkind = \"const_hol_sec\"\nc = -1.0\n[expect]\nstatus = \"Out\"\n";
    let (o, out) = lab(&["cone-check"], Some(cfg), &dir);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out, "cone_check.csv");
    assert!(csv.lines().nth(1).unwrap().contains(",Out,"), "{csv}");
    let verdicts: serde_json::Value = serde_json::from_str(&read(&out, "verdicts.json")).unwrap();
    assert!(verdicts.as_array().is_some_and(|v| v.len() == 1));
}

#[test]
fn failed_expectation_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = "[model]\nkind = \"const_hol_sec\"\nc = -1.0\n[expect]\nstatus = \"In\"\n";
    let (o, _) = lab(&["cone-check"], Some(cfg), &dir);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("expected In, got Out"));
}

#[test]
fn inconclusive_over_quota_exits_three() {
    let dir = TempDir::new().unwrap();
    let starved = "[model]\nkind = \"engineered_non_psd\"\n[dims]\nm = 3\n[budgets]\ntrials = 2\nrestarts = 1\nmax_steps = 3\n";
    let (o, _) = lab(&["cone-check"], Some(starved), &dir);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stdout));
    let tolerant = format!("{starved}inconclusive_quota = 2\n");
    let (o, out) = lab(&["cone-check", "--seed", "1"], Some(&tolerant), &dir);
    assert_eq!(code(&o), 0);
    assert_eq!(manifest(&out)["outcome"]["inconclusive"], 2);
}

#[test]
fn malformed_config_exits_two() {
    let dir = TempDir::new().unwrap();
    let (o, _) = lab(&["cone-check"], Some("[dims\nm = 2\n"), &dir);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains(":1:"));

    let (o, out) = lab(&["identities"], Some("[tolerances]\nresidual = 1e-10\ncone = -1e-8\n"), &dir);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(":3:1: tolerances.cone"), "{err}");
    assert!(!out.exists());

    let (o, _) = lab(&["heat-run"], Some("[torus]\ncutof = 4\n"), &dir);
    assert_eq!(code(&o), 2);
    let (o, _) = lab(&["heat-run"], Some("suite = \"cone-check\"\n"), &dir);
    assert_eq!(code(&o), 2);
    let (o, _) = lab(&["heat-run", "--jobs", "0"], None, &dir);
    assert_eq!(code(&o), 2);
    let (o, _) = lab(&["heat-run", "--tol", "nan"], None, &dir);
    assert_eq!(code(&o), 2);
}

fn deterministic(suite: &str, table: &str, cfg: &str) {
    let dir = TempDir::new().unwrap();
    let (a, out_a) = lab(&[suite, "--jobs", "4"], Some(cfg), &dir);
    let (b, out_b) = lab(&[suite, "--jobs", "1", "--timestamps"], Some(cfg), &dir);
    assert_eq!((code(&a), code(&b)), (0, 0), "{}", String::from_utf8_lossy(&a.stderr));
    let (x, y) = (read(&out_a, table), read(&out_b, table));
    assert!(y.starts_with("# generated_unix="));
    assert_eq!(csv_body(&x), csv_body(&y));
    assert_eq!(x, csv_body(&x));
    assert_eq!(manifest(&out_a)["cell_seeds"], manifest(&out_b)["cell_seeds"]);
    assert!(manifest(&out_b)["generated_unix"].is_u64());
}

#[test]
fn evolve_ode_is_deterministic() {
    deterministic("evolve-ode", "trajectory.csv", "[model]\nkind = \"psd_generated\"\n[budgets]\ntrials = 3\n[ode]\nt_max = 0.05\n");
}

#[test]
fn heat_run_is_deterministic() {
    deterministic("heat-run", "q_report.csv", "[budgets]\ntrials = 2\n[torus]\ncutoff = 4\npoints = 6\n");
}

#[test]
fn seed_changes_cells() {
    let dir = TempDir::new().unwrap();
    let cfg = "[model]\nkind = \"random_symmetric\"\n[budgets]\ntrials = 2\n";
    let (_, a) = lab(&["cone-check", "--seed", "7"], Some(cfg), &dir);
    let (_, b) = lab(&["cone-check", "--seed", "8"], Some(cfg), &dir);
    assert_ne!(manifest(&a)["cell_seeds"], manifest(&b)["cell_seeds"]);
}
