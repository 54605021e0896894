use lyh_core::ppform::{
    calibrate_dominance_constant, lambda_dominance_check, lelong_positivity, random_positive,
    PositivityBudget, Side,
};
use lyh_core::rng;
use lyh_core::scalar::C64;
use lyh_core::tensor::linalg::hermitian_eigen;
use lyh_core::{CxMat, Form, FrameTuple, PPForm, Status};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_real_form(seed: u64, m: usize, p: usize) -> PPForm {
    let mut r = rng::stream(seed, 77);
    let n = lyh_core::tensor::multi_index::binomial(m, p);
    PPForm::from_matrix_realified(m, p, &rng::hermitian(&mut r, n)).unwrap()
}

/// `(−i)^p ι_{v̄_p} ι_{v_p} .. ι_{v̄_1} ι_{v_1}` on the exterior representation.
fn contraction_oracle(phi: &PPForm, frame: &FrameTuple) -> C64 {
    let mut f = phi.to_ext();
    for v in frame.vectors() {
        f = f.iota_holo(v).iota_anti(v);
    }
    let p = phi.p() as i64;
    f.get(0) * lyh_core::scalar::i_pow::<f64>(-p)
}

fn budget() -> PositivityBudget {
    PositivityBudget {
        restarts: 16,
        ..PositivityBudget::default()
    }
}

#[test]
fn eval_of_omega_power_is_factorial() {
    for (m, p) in [(2, 1), (2, 2), (3, 2), (4, 2), (4, 3)] {
        let om = PPForm::omega_pow(m, p);
        let mut r = rng::stream(1, (m * 10 + p) as u64);
        for _ in 0..5 {
            let f = FrameTuple::from_matrix(&rng::unitary_frame(&mut r, m, p));
            let expect = (1..=p).product::<usize>() as f64;
            assert!((om.eval(&f).unwrap() - expect).abs() < 1e-12);
            assert!((contraction_oracle(&om, &f) - c(expect, 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn omega_power_matches_exterior_power() {
    for (m, p) in [(2, 2), (3, 2), (4, 3)] {
        let mut pow = Form::basis(m, 0, c(1.0, 0.0));
        for _ in 0..p {
            pow = pow.wedge(&Form::omega(m));
        }
        let from = PPForm::from_ext(&pow, p, 1e-12).unwrap();
        assert!(from.sub(&PPForm::omega_pow(m, p)).unwrap().max_abs() < 1e-12);
    }
}

#[test]
fn eval_single_coefficient_and_zero() {
    let mut phi = PPForm::zero(2, 2);
    phi.set_pair(&[0, 1], &[0, 1], c(1.0, 0.0)).unwrap();
    assert_eq!(phi.eval(&FrameTuple::standard(2, 2)).unwrap(), 1.0);
    assert_eq!(
        PPForm::zero(3, 2)
            .eval(&FrameTuple::standard(3, 2))
            .unwrap(),
        0.0
    );
    assert!(phi.eval(&FrameTuple::standard(2, 1)).is_err());
}

#[test]
fn eval_matches_contraction_oracle() {
    for seed in 0..10 {
        let phi = random_real_form(seed, 4, 2);
        let mut r = rng::stream(seed, 3);
        let f = FrameTuple::new((0..2).map(|_| rng::complex_vec(&mut r, 4)).collect()).unwrap();
        let z = contraction_oracle(&phi, &f);
        assert!((phi.eval(&f).unwrap() - z.re).abs() < 1e-11);
        assert!(z.im.abs() < 1e-11);
    }
}

#[test]
fn eval_invariant_under_unitary_mix_and_degenerate_frames_vanish() {
    let phi = random_real_form(5, 4, 3);
    let mut r = rng::stream(5, 0);
    let v = rng::unitary_frame(&mut r, 4, 3);
    let u = rng::unitary_frame(&mut r, 3, 3);
    let a = phi.eval(&FrameTuple::from_matrix(&v)).unwrap();
    let b = phi.eval(&FrameTuple::from_matrix(&(&v * &u))).unwrap();
    assert!((a - b).abs() < 1e-11 * phi.norm());
    let x = rng::complex_vec(&mut r, 4);
    let y = rng::complex_vec(&mut r, 4);
    let dependent =
        FrameTuple::new(vec![x.clone(), y, x.iter().map(|z| z * 2.0).collect()]).unwrap();
    assert!(phi.eval(&dependent).unwrap().abs() < 1e-12);
}

#[test]
fn gram_schmidt_keeps_sign() {
    for seed in 0..20 {
        let phi = random_real_form(seed, 4, 2);
        let mut r = rng::stream(seed, 8);
        let f = FrameTuple::new((0..2).map(|_| rng::complex_vec(&mut r, 4)).collect()).unwrap();
        let a = phi.eval(&f).unwrap();
        let b = phi.eval(&f.gram_schmidt()).unwrap();
        assert_eq!(a.signum(), b.signum());
    }
}

#[test]
fn lambda_matches_exterior_contraction() {
    for (m, p) in [(2, 1), (3, 1), (3, 2), (4, 2), (4, 3), (4, 4)] {
        let phi = random_real_form((m * 7 + p) as u64, m, p);
        let coeff = phi.lambda_contract().unwrap();
        let ext = PPForm::from_ext(&phi.to_ext().lambda(), p - 1, 1e-12).unwrap();
        assert!(coeff.sub(&ext).unwrap().max_abs() < 1e-12, "m={m} p={p}");
    }
}

#[test]
fn lambda_of_omega_and_linearity() {
    for m in 2..=3 {
        let l = PPForm::omega_pow(m, 1).lambda_contract().unwrap();
        assert_eq!(l.p(), 0);
        assert!((l.get_ranked(0, 0) - c(m as f64, 0.0)).norm() < 1e-14);
    }
    assert_eq!(PPForm::zero(3, 2).lambda_contract().unwrap().max_abs(), 0.0);
    assert!(PPForm::zero(3, 0).lambda_contract().is_err());
    let phi = random_real_form(11, 4, 2);
    let lhs = phi.scale(-2.5).lambda_contract().unwrap();
    let rhs = phi.lambda_contract().unwrap().scale(-2.5);
    assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
}

#[test]
fn lambda_power_of_omega_power() {
    // Λ ω^p = p (m − p + 1) ω^{p−1}.
    for (m, p) in [(3, 2), (4, 2), (4, 3)] {
        let l = PPForm::omega_pow(m, p).lambda_contract().unwrap();
        let expect = PPForm::omega_pow(m, p - 1).scale((p * (m - p + 1)) as f64);
        assert!(l.sub(&expect).unwrap().max_abs() < 1e-12);
    }
}

#[test]
fn star_of_omega_power() {
    // Exhaustive expansion at m = 2: *1 = ω²/2, *ω = ω, *ω² = 2.
    let s0 = PPForm::omega_pow(2, 0).hodge_star().unwrap();
    assert!(
        s0.sub(&PPForm::omega_pow(2, 2).scale(0.5))
            .unwrap()
            .max_abs()
            < 1e-14
    );
    let s1 = PPForm::omega_pow(2, 1).hodge_star().unwrap();
    assert!(s1.sub(&PPForm::omega_pow(2, 1)).unwrap().max_abs() < 1e-14);
    let s2 = PPForm::omega_pow(2, 2).hodge_star().unwrap();
    assert!((s2.get_ranked(0, 0) - c(2.0, 0.0)).norm() < 1e-14);
    // General ratio p!/(m−p)!.
    for (m, p) in [(3, 1), (4, 1), (4, 2), (4, 3)] {
        let s = PPForm::omega_pow(m, p).hodge_star().unwrap();
        let f = |k: usize| (1..=k).product::<usize>() as f64;
        let expect = PPForm::omega_pow(m, m - p).scale(f(p) / f(m - p));
        assert!(s.sub(&expect).unwrap().max_abs() < 1e-12);
    }
}

#[test]
fn star_is_involution_on_pp_forms() {
    for (m, p) in [(2, 1), (3, 1), (3, 2), (4, 2)] {
        let phi = random_real_form((m + p) as u64, m, p);
        let ss = phi.hodge_star().unwrap().hodge_star().unwrap();
        assert!(ss.sub(&phi).unwrap().max_abs() < 1e-12);
    }
}

#[test]
fn star_transports_positivity() {
    let b = budget();
    for (m, p) in [(3, 1), (3, 2)] {
        for k in 0..50 {
            let mut r = rng::stream(900 + p as u64, k);
            let phi = random_positive(&mut r, m, p);
            assert_eq!(lelong_positivity(&phi, &b).status, Status::In);
            let v = lelong_positivity(&phi.hodge_star().unwrap(), &b);
            assert_eq!(v.status, Status::In, "k={k} min={}", v.min_value);
        }
    }
}

#[test]
fn iota_conventions() {
    let m = 2;
    let mut f = Form::zero(m);
    f.set(0b0101, c(1.0, 0.0));
    let e1 = vec![c(1.0, 0.0), c(0.0, 0.0)];
    let got = f.iota_holo(&e1);
    assert_eq!(got, Form::basis(m, 0b0100, c(1.0, 0.0)));
    let phi = random_real_form(3, 3, 2);
    let zero = vec![c(0.0, 0.0); 3];
    assert!(phi.iota(&zero, Side::Holomorphic).unwrap().is_zero());
    let v = vec![c(0.2, 1.0), c(-0.3, 0.4), c(1.0, 0.0)];
    let once = phi.iota(&v, Side::Holomorphic).unwrap();
    assert!(once.iota_holo(&v).max_abs() < 1e-12);
    assert!(PPForm::zero(3, 0)
        .iota(&zero, Side::Antiholomorphic)
        .is_err());
}

#[test]
fn phi_vv_is_double_interior_product() {
    let phi = random_real_form(4, 4, 3);
    let v = vec![c(0.2, 1.0), c(-0.3, 0.4), c(1.0, 0.0), c(0.0, -0.7)];
    let direct = phi.phi_vv(&v).unwrap();
    let ext = phi.to_ext().iota_anti(&v).iota_holo(&v).scale(c(0.0, 1.0));
    let via = PPForm::from_ext(&ext, 2, 1e-12).unwrap();
    assert!(direct.sub(&via).unwrap().max_abs() < 1e-12);
}

#[test]
fn norms() {
    for m in 2..=4 {
        assert!((PPForm::omega_pow(m, 1).norm() - (m as f64).sqrt()).abs() < 1e-14);
    }
    assert_eq!(PPForm::zero(3, 2).norm(), 0.0);
}

#[test]
fn lelong_on_omega_powers() {
    let b = budget();
    for (m, p) in [(2, 1), (3, 1), (3, 2), (4, 2), (4, 4)] {
        let v = lelong_positivity(&PPForm::omega_pow(m, p), &b);
        assert_eq!(v.status, Status::In);
        let f = (1..=p).product::<usize>() as f64;
        assert!((v.min_value - f).abs() < 1e-8);
        let neg = lelong_positivity(&PPForm::omega_pow(m, p).scale(-1.0), &b);
        assert_eq!(neg.status, Status::Out);
        let w = FrameTuple::from_witness(neg.witness.as_ref().unwrap()).unwrap();
        assert!(
            (PPForm::omega_pow(m, p).scale(-1.0).eval(&w).unwrap() - neg.min_value).abs() < 1e-10
        );
    }
}

#[test]
fn lelong_perturbation_below_gap() {
    let m = 2;
    let eta = random_real_form(21, m, 1);
    // Gap of ω at p = 1 is 1; the perturbation size is estimated by frame sampling.
    let mut r = rng::stream(21, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..4000 {
        let f = FrameTuple::new(vec![rng::unit_vector(&mut r, m)]).unwrap();
        worst = worst.max(eta.eval(&f).unwrap().abs());
    }
    let eps = 0.5 / worst;
    let phi = PPForm::omega_pow(m, 1).axpy(eps, &eta).unwrap();
    assert_eq!(lelong_positivity(&phi, &budget()).status, Status::In);
}

#[test]
fn lelong_search_finds_planted_negative_frame() {
    let m = 4;
    let e = |k: usize| {
        (0..m)
            .map(|a| c(if a == k { 1.0 } else { 0.0 }, 0.0))
            .collect::<Vec<_>>()
    };
    let planted = PPForm::elementary_positive(m, &[e(0), e(1)]);
    let phi = PPForm::omega_pow(m, 2).axpy(-3.0, &planted).unwrap();
    let v = lelong_positivity(&phi, &budget());
    assert_eq!(v.status, Status::Out);
    assert!(v.min_value <= -1.0 + 1e-9);
    let w = FrameTuple::from_witness(v.witness.as_ref().unwrap()).unwrap();
    assert!(w.is_orthonormal());
    assert!((phi.eval(&w).unwrap() - v.min_value).abs() < 1e-10);
}

#[test]
fn lelong_search_beats_sampling() {
    for seed in 0..5 {
        let phi = random_real_form(seed + 40, 4, 2);
        let v = lelong_positivity(&phi, &budget());
        let mut r = rng::stream(seed, 2);
        for _ in 0..500 {
            let f = FrameTuple::from_matrix(&rng::unitary_frame(&mut r, 4, 2));
            assert!(v.min_value <= phi.eval(&f).unwrap() + 1e-9);
        }
    }
}

#[test]
fn j_matrix_is_hermitian_and_psd_at_a_minimum() {
    let m = 3;
    let e = |k: usize| {
        (0..m)
            .map(|a| c(if a == k { 1.0 } else { 0.0 }, 0.0))
            .collect::<Vec<_>>()
    };
    let phi = PPForm::elementary_positive(m, &[e(0), e(1)]);
    let frame = FrameTuple::new(vec![e(0), e(2)]).unwrap();
    assert!(phi.eval(&frame).unwrap().abs() < 1e-15);
    let a = phi.j_matrix(&frame).unwrap();
    assert!(a.is_hermitian(1e-12));
    let (vals, _) = hermitian_eigen(&a);
    assert!(vals[0] >= -1e-12);
    // Entry check against the definition with X_μ := w.
    let rand = random_real_form(9, m, 2);
    let a = rand.j_matrix(&frame).unwrap();
    assert!(a.is_hermitian(1e-12));
    let mut r = rng::stream(9, 9);
    let w: Vec<C64> = rng::complex_vec(&mut r, 2 * m);
    let mut direct = c(0.0, 0.0);
    for mu in 0..2 {
        for nu in 0..2 {
            let mut vm = frame.matrix();
            let mut vn = frame.matrix();
            for x in 0..m {
                vm[(x, mu)] = w[mu * m + x];
                vn[(x, nu)] = w[nu * m + x];
            }
            direct += rand.eval_pair(&vm, &vn).unwrap();
        }
    }
    let aw = a.mul_vec(&w);
    let quad: C64 = w.iter().zip(&aw).map(|(x, y)| x.conj() * y).sum();
    assert!((quad - direct).norm() < 1e-11);
}

#[test]
fn dominance_constant_is_finite() {
    let cst = calibrate_dominance_constant(3, 2, 500, 17);
    assert!(cst.is_finite() && cst > 0.0);
    let mut r = rng::stream(3, 3);
    let phi = random_positive(&mut r, 3, 2);
    let rep = lambda_dominance_check(&phi, cst, &budget()).unwrap();
    assert!(rep.holds && rep.ratio <= cst);
    assert!(lambda_dominance_check(&PPForm::omega_pow(3, 2).scale(-1.0), cst, &budget()).is_err());
}

#[test]
fn reality_is_enforced() {
    let bad = PPForm::from_fn(2, 1, |i, j| {
        if i[0] == 0 && j[0] == 1 {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    assert!(bad.is_err());
    let m = CxMat::identity(3);
    assert!(PPForm::from_matrix_realified(3, 2, &m).is_ok());
    assert!(PPForm::from_matrix_realified(3, 1, &CxMat::identity(2)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn json_round_trip_is_bit_exact(seed in 0u64..10_000, p in 1usize..=3) {
        let phi = random_real_form(seed, 4, p);
        let s = serde_json::to_string(&phi).unwrap();
        let back: PPForm = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, phi);
    }

    #[test]
    fn eval_is_real(seed in 0u64..10_000) {
        let phi = random_real_form(seed, 4, 2);
        let mut r = rng::stream(seed, 5);
        let v = rng::complex_matrix(&mut r, 4, 2);
        let z = phi.eval_pair(&v, &v).unwrap();
        prop_assert!(z.im.abs() <= 1e-12 * phi.norm() * 100.0);
    }

    #[test]
    fn lambda_commutes_with_iota(seed in 0u64..10_000) {
        let phi = random_real_form(seed, 3, 2).to_ext();
        let mut r = rng::stream(seed, 6);
        let v = rng::complex_vec(&mut r, 3);
        let a = phi.iota_holo(&v).lambda().sub(&phi.lambda().iota_holo(&v));
        let b = phi.iota_anti(&v).lambda().sub(&phi.lambda().iota_anti(&v));
        prop_assert!(a.max_abs() < 1e-12 && b.max_abs() < 1e-12);
    }

    #[test]
    fn lambda_is_signed_star_l_star(seed in 0u64..10_000, p in 0usize..=3) {
        let phi = random_real_form(seed, 3, p);
        let lhs = phi.to_ext().lambda();
        let rhs = phi.to_ext().star().lefschetz().star();
        prop_assert!(lhs.sub(&rhs).max_abs() < 1e-12);
    }
}
