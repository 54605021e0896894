//! Acceptance battery: one PASS/FAIL line per criterion.
//!
//! Criterion 5 checks the literal Frobenius-norm form of Mok's inequality,
//! which random PSD forms violate. Its line prints FAIL; the test asserts
//! the explicit counterexample and that the trace-paired form holds.

use lyh_lab::criteria::{self, Check, Scale, TorusInputs};
use lyh_lab::report::csv_body;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

const SEED: u64 = 20_240_601;

struct Line {
    id: u8,
    title: &'static str,
    pass: bool,
}

fn report(id: u8, title: &'static str, checks: &[Check], started: Instant) -> Line {
    let pass = checks.iter().all(|c| c.pass);
    println!(
        "{} {id:>2} {title} [{:.1} s]",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    for c in checks {
        println!(
            "       {:<30} {:>5} cases  {:>12.4e} {} {:e}  {}",
            c.name, c.cases, c.measured, c.relation, c.threshold, c.detail
        );
    }
    Line { id, title, pass }
}

fn oracle_suite(out: &Path, extra: &[&str]) -> (i32, String) {
    let status = Command::new(env!("CARGO_BIN_EXE_lyh-lab"))
        .arg("oracle-suite")
        .arg("--out")
        .arg(out)
        .args(extra)
        .status()
        .expect("spawn lyh-lab");
    let text = std::fs::read_to_string(out.join("oracle_suite.csv")).unwrap_or_default();
    (status.code().unwrap_or(-1), text)
}

#[test]
fn acceptance_criteria() {
    let s = Scale::full();
    let mut lines = Vec::new();

    let t = Instant::now();
    let c = criteria::kb_oracle(SEED, s.kb_oracle).unwrap();
    lines.push(report(1, "KB reaction against the exterior-derivation oracle", &[c], t));

    let t = Instant::now();
    let c = criteria::kb_sign(SEED, s.kb_sign).unwrap();
    lines.push(report(2, "KB sign on certified C_2 operators", &[c], t));

    let t = Instant::now();
    let c = criteria::identification(SEED, s.identification).unwrap();
    lines.push(report(3, "Riemannian cone identification", &[c], t));

    let t = Instant::now();
    let cs = [
        criteria::exp_ad(SEED, s.exp_ad).unwrap(),
        criteria::sharp_basis(SEED, s.sharp_basis).unwrap(),
        criteria::sharp_null(SEED, s.sharp_null).unwrap(),
    ];
    lines.push(report(4, "exp/ad, sharp basis independence, sharp at null vectors", &cs, t));

    let t = Instant::now();
    let (literal, traced) = criteria::mok(SEED, s.mok);
    let counter = criteria::mok_counterexample_check().unwrap();
    lines.push(report(5, "Mok inequality, literal Frobenius form", &[literal.clone()], t));
    println!("       trace-paired form and counterexample:");
    report(5, "Mok inequality, trace-paired form", &[traced.clone(), counter.clone()], t);

    let t = Instant::now();
    let cs = [
        criteria::ode_invariance(SEED, s.trajectories).unwrap(),
        criteria::ode_tracking().unwrap(),
        criteria::sphere_tracking().unwrap(),
    ];
    lines.push(report(6, "cone invariance under the curvature ODE", &cs, t));

    let t = Instant::now();
    let cs = [
        criteria::lyh_kahler_constant().unwrap(),
        criteria::lyh_rank_one(SEED, 24).unwrap(),
        criteria::lyh_collapse(SEED, 12).unwrap(),
    ];
    lines.push(report(7, "Kähler LYH quadratic forms", &cs, t));

    let t = Instant::now();
    let cs = [
        criteria::lyh_riemannian_sphere().unwrap(),
        criteria::extension_riemannian(SEED, s.extension).unwrap(),
    ];
    lines.push(report(8, "Riemannian LYH on the round sphere", &cs, t));

    let t = Instant::now();
    let torus = TorusInputs::new(SEED, s.torus_data, s.torus_points).unwrap();
    let cs = [
        criteria::torus_q(&torus).unwrap(),
        criteria::torus_gaussian_equality().unwrap(),
        criteria::torus_gaussian_q().unwrap(),
    ];
    lines.push(report(9, "flat-torus Harnack quantity with optimal V", &cs, t));

    let t = Instant::now();
    let c = criteria::torus_positivity(&torus).unwrap();
    lines.push(report(10, "positivity preserved by the heat flow", &[c], t));

    let t = Instant::now();
    let (ids, dual) = criteria::torus_identities(SEED, s.fields).unwrap();
    lines.push(report(11, "duality and Kähler identities", &[dual, ids], t));

    let t = Instant::now();
    let c = criteria::torus_monotonicity(SEED, s.closed_data).unwrap();
    lines.push(report(12, "monotonicity on closed positive data", &[c], t));

    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let (code_a, a) = oracle_suite(&dir.path().join("a"), &[]);
    let (code_b, b) = oracle_suite(&dir.path().join("b"), &["--timestamps", "--jobs", "1"]);
    let same = !a.is_empty() && !a.contains('#') && b.starts_with('#') && csv_body(&a) == csv_body(&b);
    let pass = same && code_a == 0 && code_b == 0;
    println!("{} 13 oracle-suite CSV bodies byte-identical [{:.1} s]", if pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    println!("       exit codes {code_a}, {code_b}; {} bytes", a.len());
    lines.push(Line { id: 13, title: "determinism", pass });

    let failed: Vec<u8> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    println!("failed criteria: {failed:?}");
    for l in &lines {
        if l.id == 5 {
            assert!(!l.pass, "the literal Mok inequality unexpectedly held on every sample");
        } else {
            assert!(l.pass, "criterion {} ({}) failed", l.id, l.title);
        }
    }
    assert!(literal.detail != "0 violations");
    assert!(traced.pass, "trace-paired Mok inequality failed: {traced:?}");
    assert!(counter.pass, "counterexample check failed: {counter:?}");
}
