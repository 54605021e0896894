use lyh_core::cones::{
    certify_kahler, cone_perturbed, engineered_non_psd, kb_sign_check, membership, nesting_check,
    pairs_from_witness, skew_to_pairs, witness_value, ConeBudget, ConeSpec, CurvatureOp,
    VerdictReport,
};
use lyh_core::curvature::models::{const_hol_sec, psd_generated, random_symmetric};
use lyh_core::curvature::{KahlerCurvature, RiemCurvature};
use lyh_core::rng;
use lyh_core::scalar::C64;
use lyh_core::tensor::linalg::min_eigen;
use lyh_core::tensor::SkewC;
use lyh_core::Status;

fn budget(restarts: usize) -> ConeBudget {
    ConeBudget { restarts, ..ConeBudget::default() }
}

fn kahler(rm: &KahlerCurvature) -> CurvatureOp {
    CurvatureOp::Kahler(rm.clone())
}

fn assert_witness_valid(op: &CurvatureOp, v: &lyh_core::ConeVerdict) {
    let pairs = pairs_from_witness(v.witness.as_ref().expect("Out carries a witness")).unwrap();
    let again = witness_value(op, &pairs).unwrap();
    assert!((again - v.min_value).abs() <= 1e-10, "{again} vs {}", v.min_value);
}

#[test]
fn zero_operator_is_in_everywhere() {
    for spec in [ConeSpec::kahler(3, 1), ConeSpec::kahler(3, 2), ConeSpec::psd(3)] {
        let v = membership(&kahler(&KahlerCurvature::zeros(3)), &spec, &budget(4)).unwrap();
        assert_eq!(v.status, Status::In);
    }
    let v = membership(
        &CurvatureOp::Riem(RiemCurvature::zeros(5)),
        &ConeSpec::riem(5, 1),
        &budget(4),
    )
    .unwrap();
    assert_eq!(v.status, Status::In);
}

#[test]
fn constant_model_in_every_cone() {
    for m in 2..=3 {
        for p in 1..=m * m {
            let v = membership(&kahler(&const_hol_sec(1.0, m)), &ConeSpec::kahler(m, p), &budget(8))
                .unwrap();
            assert_eq!(v.status, Status::In, "m={m} p={p}");
        }
    }
}

#[test]
fn negative_constant_model_is_out_with_e1_witness_value() {
    let rm = const_hol_sec(-1.0, 2);
    let op = kahler(&rm);
    let v1 = membership(&op, &ConeSpec::kahler(2, 1), &budget(16)).unwrap();
    assert_eq!(v1.status, Status::Out);
    assert!((v1.min_value + 2.0).abs() < 1e-9, "{}", v1.min_value);
    assert_witness_valid(&op, &v1);
    // Full rank reaches −(m+1) on α = Id/√m.
    let v2 = membership(&op, &ConeSpec::kahler(2, 2), &budget(16)).unwrap();
    assert!(v2.exact);
    assert!((v2.min_value + 3.0).abs() < 1e-12);
    assert_witness_valid(&op, &v2);
}

#[test]
fn out_witnesses_reevaluate() {
    for seed in 0..6 {
        let op = kahler(&random_symmetric(3, seed));
        for p in 1..=3 {
            let v = membership(&op, &ConeSpec::kahler(3, p), &budget(32)).unwrap();
            if v.status == Status::Out {
                assert_witness_valid(&op, &v);
            }
        }
    }
}

/// Minimum of the bisectional quotient over a grid on `CP¹ × CP¹`.
fn grid_min_c1(rm: &KahlerCurvature, steps: usize) -> f64 {
    let pts: Vec<Vec<C64>> = (0..=steps)
        .flat_map(|a| {
            (0..2 * steps).map(move |b| {
                let th = std::f64::consts::PI * a as f64 / (2 * steps) as f64;
                let ph = std::f64::consts::PI * b as f64 / steps as f64;
                vec![C64::new(th.cos(), 0.0), C64::from_polar(th.sin(), ph)]
            })
        })
        .collect();
    let mut best = f64::INFINITY;
    for x in &pts {
        for y in &pts {
            best = best.min(rm.bisectional(x, y).re);
        }
    }
    best
}

#[test]
fn search_agrees_with_grid_oracle_at_m2() {
    for seed in 0..4 {
        let rm = random_symmetric(2, 40 + seed);
        let v = membership(&kahler(&rm), &ConeSpec::kahler(2, 1), &budget(32)).unwrap();
        let grid = grid_min_c1(&rm, 24);
        assert!(v.min_value <= grid + 1e-12, "seed {seed}: {} vs {grid}", v.min_value);
        assert!(v.min_value >= grid - 0.05, "seed {seed}: {} vs {grid}", v.min_value);
    }
}

#[test]
fn scaling_and_unitary_invariance() {
    let mut r = rng::stream(5, 0);
    for seed in 0..3 {
        let rm = random_symmetric(3, seed).axpy(0.4, &const_hol_sec(1.0, 3)).unwrap();
        let base = membership(&kahler(&rm), &ConeSpec::kahler(3, 1), &budget(32)).unwrap();
        let scaled =
            membership(&kahler(&rm.scale(7.5)), &ConeSpec::kahler(3, 1), &budget(32)).unwrap();
        assert_eq!(base.status, scaled.status);
        assert!((scaled.min_value - 7.5 * base.min_value).abs() < 1e-8);
        let u = rng::unitary_frame(&mut r, 3, 3);
        let turned = membership(
            &kahler(&rm.conjugate_by(&u).unwrap()),
            &ConeSpec::kahler(3, 1),
            &budget(32),
        )
        .unwrap();
        assert_eq!(base.status, turned.status);
        assert!((turned.min_value - base.min_value).abs() < 1e-8);
    }
}

#[test]
fn engineered_operator_in_c2_not_psd() {
    let base = const_hol_sec(1.0, 3);
    let rm = engineered_non_psd(&base, 3, 1e-3);
    let (lam, _) = min_eigen(&rm.operator_matrix());
    assert!(lam < 0.0);
    let op = kahler(&rm);
    let (holds, v2, v3) = nesting_check(&op, &ConeSpec::kahler(3, 2), &budget(64)).unwrap();
    assert!(holds);
    assert_eq!(v3.status, Status::Out);
    assert!(v3.exact);
    assert_eq!(v2.status, Status::In);
    assert!(certify_kahler(&rm, 2, &budget(64)).is_ok());
}

#[test]
fn nesting_holds_on_psd_and_zero() {
    for op in [kahler(&psd_generated(3, 3, 1)), kahler(&KahlerCurvature::zeros(3))] {
        for p in 1..3 {
            let (holds, vp, vq) = nesting_check(&op, &ConeSpec::kahler(3, p), &budget(8)).unwrap();
            assert!(holds);
            assert_eq!(vp.status, Status::In);
            assert_eq!(vq.status, Status::In);
        }
    }
    for seed in 0..4 {
        let op = kahler(&random_symmetric(3, seed).axpy(0.5, &const_hol_sec(1.0, 3)).unwrap());
        let (holds, _, _) = nesting_check(&op, &ConeSpec::kahler(3, 1), &budget(32)).unwrap();
        assert!(holds, "seed {seed}");
    }
}

#[test]
fn psd_generated_in_c1() {
    for seed in 0..100 {
        let op = kahler(&psd_generated(2, 2, seed));
        let v = membership(&op, &ConeSpec::kahler(2, 1), &budget(4)).unwrap();
        assert_eq!(v.status, Status::In, "seed {seed}");
    }
}

#[test]
fn certificates_gate_kb_sign_check() {
    let bad = const_hol_sec(-1.0, 3);
    assert!(certify_kahler(&bad, 2, &budget(8)).is_err());
    let good = certify_kahler(&const_hol_sec(1.0, 3), 2, &budget(8)).unwrap();
    let phi = lyh_core::PPForm::omega_pow(3, 2);
    assert!(kb_sign_check(&good, &phi).unwrap().abs() < 1e-12);
    let weak = certify_kahler(&const_hol_sec(1.0, 3), 1, &budget(8)).unwrap();
    assert!(kb_sign_check(&weak, &phi).is_err());
}

#[test]
fn cone_perturbed_reports_large_eps() {
    let base = const_hol_sec(1.0, 3);
    assert!(cone_perturbed(&base, 1e-3, 2, 2, &budget(16)).is_ok());
    assert!(cone_perturbed(&base, 50.0, 2, 2, &budget(16)).is_err());
}

#[test]
fn riemannian_cones() {
    let sphere = CurvatureOp::Riem(RiemCurvature::sphere(5, 1.0));
    assert_eq!(
        membership(&sphere, &ConeSpec::riem(5, 1), &budget(8)).unwrap().status,
        Status::In
    );
    let neg = RiemCurvature::sphere(5, -1.0);
    let op = CurvatureOp::Riem(neg);
    let v = membership(&op, &ConeSpec::riem(5, 1), &budget(16)).unwrap();
    assert_eq!(v.status, Status::Out);
    assert!((v.min_value + 1.0).abs() < 1e-9);
    assert_witness_valid(&op, &v);
    for seed in 0..4 {
        let mut r = rng::stream(seed, 3);
        let rr = RiemCurvature::from_fn_projected(5, |_, _, _, _| rng::normal(&mut r));
        let op = CurvatureOp::Riem(rr);
        let v1 = membership(&op, &ConeSpec::riem(5, 1), &budget(32)).unwrap();
        let v2 = membership(&op, &ConeSpec::riem(5, 2), &budget(32)).unwrap();
        assert!(v2.exact);
        assert!(v2.min_value <= v1.min_value + 1e-10);
        if v1.status == Status::Out {
            assert_witness_valid(&op, &v1);
        }
    }
}

#[test]
fn skew_decomposition_reassembles() {
    let mut r = rng::stream(1, 1);
    for n in 2..=7 {
        let g = rng::complex_matrix(&mut r, n, n);
        let s = SkewC::skew_part(&g);
        let pairs = skew_to_pairs(&s);
        assert!(pairs.len() <= n / 2);
        let back = pairs.iter().fold(SkewC::zero(n), |acc, (z, w)| acc.add(&SkewC::wedge(z, w)));
        assert!((back.matrix() - s.matrix()).max_abs() < 1e-10);
    }
}

#[test]
fn wrong_spec_is_rejected_and_report_serializes() {
    let op = kahler(&const_hol_sec(1.0, 2));
    assert!(membership(&op, &ConeSpec::kahler(3, 1), &budget(2)).is_err());
    assert!(membership(&op, &ConeSpec::riem(4, 1), &budget(2)).is_err());
    assert!(membership(&op, &ConeSpec::kahler(2, 0), &budget(2)).is_err());
    let v = membership(&kahler(&const_hol_sec(-1.0, 2)), &ConeSpec::kahler(2, 1), &budget(4))
        .unwrap();
    let json = serde_json::to_value(VerdictReport::new(&v, 11)).unwrap();
    assert_eq!(json["status"], "Out");
    assert_eq!(json["seed"], 11);
    assert!(json["witness"]["pairs"].is_array());
}

#[test]
fn verdicts_are_deterministic() {
    let op = kahler(&random_symmetric(3, 77));
    let a = membership(&op, &ConeSpec::kahler(3, 2), &budget(16)).unwrap();
    let b = membership(&op, &ConeSpec::kahler(3, 2), &budget(16)).unwrap();
    assert_eq!(a, b);
}
