use lyh_core::curvature::identify::{
    ctilde_to_c2p, oneone_part, pairing_equality_check, two_vector,
};
use lyh_core::curvature::kb::{b_matrix_check, impose_first_variation, trace_identity};
use lyh_core::curvature::models::{const_hol_sec, product, psd_generated, random_symmetric};
use lyh_core::curvature::riem::real_basis;
use lyh_core::curvature::sharp::{hermitian_value, rm_sharp_in_basis, sharp_trace_route};
use lyh_core::curvature::{
    kb_pairing, kb_reaction, rm_sharp, second_variation_positivity, sharp_nonneg_at_null,
    KahlerCurvature, OneOneVector, RiemCurvature,
};
use lyh_core::rng;
use lyh_core::scalar::C64;
use lyh_core::tensor::linalg::{hermitian_eigen, min_eigen};
use lyh_core::tensor::skew::{ad, so_dim};
use lyh_core::tensor::{CxMatrix, SkewC};
use lyh_core::{CxMat, Form, PPForm};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn e(m: usize, a: usize) -> Vec<C64> {
    (0..m)
        .map(|x| if x == a { c(1.0, 0.0) } else { c(0.0, 0.0) })
        .collect()
}

fn random_real_form(seed: u64, m: usize, p: usize) -> PPForm {
    let mut r = rng::stream(seed, 91);
    let n = lyh_core::tensor::multi_index::binomial(m, p);
    PPForm::from_matrix_realified(m, p, &rng::hermitian(&mut r, n)).unwrap()
}

/// KB through derivations of the exterior algebra:
/// `Σ R_{ij̄lk̄} D_{ik} D̄_{jl} − ½ Σ (R_{lj̄} D̄_{jl} + R_{ik̄} D_{ik})` with
/// `D_{ik} = dz^i ∧ ι_k` and `D̄_{jl} = dz̄^j ∧ ι_l̄`.
fn kb_oracle(rm: &KahlerCurvature, phi: &PPForm) -> PPForm {
    let m = rm.m();
    let f = phi.to_ext();
    let d = |g: &Form, to: usize, from: usize| g.iota_gen(from).wedge_gen(to);
    let ric = rm.ricci();
    let mut out = Form::zero(m);
    for j in 0..m {
        for l in 0..m {
            let bar = d(&f, m + j, m + l);
            out.axpy(ric[(l, j)] * -0.5, &bar);
            for i in 0..m {
                for k in 0..m {
                    let r = rm.get(i, j, l, k);
                    if r != c(0.0, 0.0) {
                        out.axpy(r, &d(&bar, i, k));
                    }
                }
            }
        }
    }
    for i in 0..m {
        for k in 0..m {
            out.axpy(ric[(i, k)] * -0.5, &d(&f, i, k));
        }
    }
    PPForm::from_ext(&out, phi.p(), 1e-9).unwrap()
}

#[test]
fn constant_model_index_values() {
    let rm = const_hol_sec(1.0, 2);
    assert!((rm.get(0, 0, 1, 1) - c(1.0, 0.0)).norm() < 1e-15);
    assert!((rm.get(0, 0, 0, 0) - c(2.0, 0.0)).norm() < 1e-15);
    assert!((rm.bisectional(&e(2, 0), &e(2, 1)) - c(1.0, 0.0)).norm() < 1e-15);
    assert_eq!(const_hol_sec(0.0, 3).max_abs(), 0.0);
    let ric = const_hol_sec(1.0, 2).ricci();
    let id3 = CxMatrix::identity(2).scale_re(3.0);
    assert!((&ric - &id3).max_abs() < 1e-15);
    let ric3 = const_hol_sec(0.7, 3).ricci();
    assert!((&ric3 - &CxMatrix::identity(3).scale_re(0.7 * 4.0)).max_abs() < 1e-14);
    assert!((const_hol_sec(0.7, 3).scalar() - 0.7 * 12.0).abs() < 1e-13);
}

#[test]
fn pairing_on_e1_e1bar_is_2c() {
    for &cc in &[1.0, -0.5, 3.0] {
        let rm = const_hol_sec(cc, 3);
        let a = OneOneVector::from_pairs(3, vec![(e(3, 0), e(3, 0))]).unwrap();
        assert!((rm.pairing(&a, &a).unwrap() - c(2.0 * cc, 0.0)).norm() < 1e-14);
    }
    let zero = KahlerCurvature::zeros(2);
    let a = OneOneVector::from_pairs(2, vec![(e(2, 0), e(2, 1))]).unwrap();
    assert_eq!(zero.pairing(&a, &a).unwrap(), c(0.0, 0.0));
}

#[test]
fn constant_model_pairing_formula() {
    let m = 3;
    let rm = const_hol_sec(1.0, m);
    let mut r = rng::stream(4, 0);
    for _ in 0..20 {
        let a = rng::complex_matrix(&mut r, m, m);
        let alpha = OneOneVector::from_matrix(a.clone()).unwrap();
        let expect = a.frobenius_norm().powi(2) + a.trace().norm_sqr();
        assert!((rm.pairing(&alpha, &alpha).unwrap() - c(expect, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn pairing_is_hermitian_and_bisectional_real() {
    for seed in 0..20 {
        let rm = random_symmetric(3, seed);
        let mut r = rng::stream(seed, 1);
        let a = OneOneVector::from_matrix(rng::complex_matrix(&mut r, 3, 3)).unwrap();
        let b = OneOneVector::from_matrix(rng::complex_matrix(&mut r, 3, 3)).unwrap();
        let ab = rm.pairing(&a, &b).unwrap();
        let ba = rm.pairing(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-12);
        let (x, y) = (rng::complex_vec(&mut r, 3), rng::complex_vec(&mut r, 3));
        let bis = rm.bisectional(&x, &y);
        assert!(bis.im.abs() < 1e-12);
        let xy = OneOneVector::from_pairs(3, vec![(x, y)]).unwrap();
        assert!((rm.pairing(&xy, &xy).unwrap() - bis).norm() < 1e-12);
        let k = rm.operator_matrix();
        let v = a.vec();
        assert!((hermitian_value(&k, &v) - rm.pairing(&a, &a).unwrap()).norm() < 1e-12);
    }
}

#[test]
fn projection_is_idempotent_and_fixes_models() {
    for seed in 0..10 {
        let rm = random_symmetric(3, seed);
        assert!(rm.symmetry_residual() < 1e-12);
        let again = rm.project();
        assert!(again.axpy(-1.0, &rm).unwrap().max_abs() < 1e-14);
        let ric = rm.ricci();
        assert!((&ric - &ric.adjoint()).max_abs() < 1e-12);
    }
    let k = const_hol_sec(1.3, 3);
    assert!(k.project().axpy(-1.0, &k).unwrap().max_abs() < 1e-15);
    let mut r = rng::stream(3, 3);
    let raw = |_: usize, _: usize, _: usize, _: usize| rng::complex_normal(&mut r);
    assert!(KahlerCurvature::from_fn_checked(2, raw).is_err());
}

#[test]
fn product_and_conjugation_keep_invariants() {
    let p = product(&const_hol_sec(1.0, 1), &const_hol_sec(2.0, 2));
    assert_eq!(p.m(), 3);
    assert!(p.symmetry_residual() < 1e-15);
    assert!((p.get(0, 0, 1, 1)).norm() < 1e-15);
    assert!((p.get(1, 1, 1, 1) - c(4.0, 0.0)).norm() < 1e-15);
    let mut r = rng::stream(8, 0);
    let u = rng::unitary_frame(&mut r, 3, 3);
    let rm = const_hol_sec(1.0, 3);
    assert!(
        rm.conjugate_by(&u)
            .unwrap()
            .axpy(-1.0, &rm)
            .unwrap()
            .max_abs()
            < 1e-13
    );
    let q = random_symmetric(3, 5);
    let qu = q.conjugate_by(&u).unwrap();
    assert!(qu.symmetry_residual() < 1e-12);
    let (l0, _) = min_eigen(&q.operator_matrix());
    let (l1, _) = min_eigen(&qu.operator_matrix());
    assert!((l0 - l1).abs() < 1e-12);
}

#[test]
fn json_round_trip_bit_exact() {
    let rm = random_symmetric(3, 17);
    let s = serde_json::to_string(&rm.to_json()).unwrap();
    let back = KahlerCurvature::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
    assert_eq!(back, rm);
}

#[test]
fn psd_generated_is_psd() {
    for seed in 0..30 {
        let rm = psd_generated(3, 4, seed);
        assert!(rm.symmetry_residual() < 1e-12);
        let (vals, _) = hermitian_eigen(&rm.operator_matrix());
        assert!(vals[0] >= -1e-12 * vals[vals.len() - 1]);
    }
}

#[test]
fn kb_matches_exterior_oracle() {
    for seed in 0..40 {
        let m = 2 + (seed as usize % 2);
        let p = 1 + (seed as usize / 2) % 2;
        let rm = random_symmetric(m, seed);
        let phi = random_real_form(seed, m, p);
        let a = kb_reaction(&rm, &phi).unwrap();
        let b = kb_oracle(&rm, &phi);
        assert!(a.sub(&b).unwrap().max_abs() < 1e-12, "seed {seed}");
    }
}

#[test]
fn kb_kills_parallel_forms() {
    for seed in 0..6 {
        let rm = random_symmetric(3, seed);
        for p in 1..=3 {
            let kb = kb_reaction(&rm, &PPForm::omega_pow(3, p)).unwrap();
            assert!(kb.max_abs() < 1e-12, "p={p}");
        }
    }
}

#[test]
fn kb_constant_model_at_p1() {
    let m = 3;
    let cc = 0.8;
    let rm = const_hol_sec(cc, m);
    let phi = random_real_form(2, m, 1);
    let kb = kb_reaction(&rm, &phi).unwrap();
    let tr: C64 = (0..m).map(|i| phi.coeff(&[i], &[i])).sum();
    for i in 0..m {
        for j in 0..m {
            let delta = if i == j { tr } else { c(0.0, 0.0) };
            let expect = (delta - phi.coeff(&[i], &[j]) * m as f64) * cc;
            assert!((kb.coeff(&[i], &[j]) - expect).norm() < 1e-13);
        }
    }
}

#[test]
fn kb_superposition() {
    let (m, p) = (3, 2);
    let (r1, r2) = (random_symmetric(m, 1), random_symmetric(m, 2));
    let (f1, f2) = (random_real_form(1, m, p), random_real_form(2, m, p));
    let lhs = kb_reaction(&r1.axpy(0.3, &r2).unwrap(), &f1.axpy(-1.7, &f2).unwrap()).unwrap();
    let parts = [
        kb_reaction(&r1, &f1).unwrap(),
        kb_reaction(&r1, &f2).unwrap().scale(-1.7),
        kb_reaction(&r2, &f1).unwrap().scale(0.3),
        kb_reaction(&r2, &f2).unwrap().scale(-0.51),
    ];
    let rhs = parts
        .iter()
        .skip(1)
        .fold(parts[0].clone(), |acc, x| acc.add(x).unwrap());
    assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
    assert_eq!(
        kb_reaction(&KahlerCurvature::zeros(m), &f1)
            .unwrap()
            .max_abs(),
        0.0
    );
    assert!(kb_reaction(&KahlerCurvature::zeros(2), &f1).is_err());
}

#[test]
fn kb_sign_on_psd_and_constant_models() {
    let models = [const_hol_sec(1.0, 3), psd_generated(3, 3, 9)];
    for rm in &models {
        for seed in 0..100 {
            let p = 1 + seed as usize % 2;
            let phi = random_real_form(seed, 3, p);
            assert!(kb_pairing(rm, &phi).unwrap() <= 1e-10);
        }
    }
}

#[test]
fn trace_identity_under_first_variation() {
    for seed in 0..20 {
        let m = 3;
        let p = 1 + seed as usize % 3;
        let rm = random_symmetric(m, 100 + seed);
        let phi = impose_first_variation(&random_real_form(seed, m, p));
        let (lhs, tr) = trace_identity(&rm, &phi).unwrap();
        assert!((lhs - tr).norm() < 1e-12, "seed {seed}: {lhs} vs {tr}");
    }
}

#[test]
fn b_matrix_matches_pairing() {
    let mut r = rng::stream(12, 0);
    for seed in 0..20 {
        let rm = random_symmetric(3, seed);
        let p = 1 + seed as usize % 3;
        let w: Vec<Vec<C64>> = (0..p).map(|_| rng::complex_vec(&mut r, 3)).collect();
        let (quad, pair) = b_matrix_check(&rm, &w).unwrap();
        assert!((quad - pair).norm() < 1e-12);
    }
}

#[test]
fn real_extension_symmetries_and_values() {
    let cc = 0.6;
    let rm = const_hol_sec(cc, 2);
    let riem = RiemCurvature::from_kahler(&rm);
    assert!(riem.symmetry_residual() < 1e-14);
    // Holomorphic sectional curvature 2c on the plane x_1 ∧ y_1.
    assert!((riem.get(0, 2, 0, 2) - 2.0 * cc).abs() < 1e-14);
    // Totally real plane x_1 ∧ x_2 has curvature c/2.
    assert!((riem.get(0, 1, 0, 1) - 0.5 * cc).abs() < 1e-14);
    for seed in 0..5 {
        let k = random_symmetric(3, seed);
        let rr = RiemCurvature::from_kahler(&k);
        assert!(rr.symmetry_residual() < 1e-12);
        let basis = real_basis(3);
        let mut r = rng::stream(seed, 6);
        let (x, y) = (rng::complex_vec(&mut r, 3), rng::complex_vec(&mut r, 3));
        let lift = |v: &[C64]| -> Vec<C64> {
            // real coordinates of a (1,0) vector in (x, y) basis, complexified
            let mut out = vec![c(0.0, 0.0); 6];
            for b in 0..6 {
                for j in 0..3 {
                    out[b] += basis[b][j].conj() * v[j];
                }
            }
            out
        };
        let (xr, yr) = (lift(&x), lift(&y));
        let cj = |v: &[C64]| v.iter().map(|z| z.conj()).collect::<Vec<_>>();
        let val = rr.eval4(&xr, &cj(&yr), &cj(&xr), &yr);
        assert!((val - k.bisectional(&x, &y)).norm() < 1e-12, "seed {seed}");
    }
}

#[test]
fn sphere_model() {
    let s = RiemCurvature::sphere(4, 1.0);
    assert!(s.symmetry_residual() < 1e-15);
    let ric = s.ricci();
    assert!((ric[0][0] - 3.0).abs() < 1e-15);
    assert!((s.scalar() - 12.0).abs() < 1e-14);
    let op = s.operator_matrix();
    assert!((&op - &CxMatrix::identity(so_dim(4))).max_abs() < 1e-15);
    let back = RiemCurvature::from_operator(4, &op).unwrap();
    assert_eq!(back, s);
}

#[test]
fn ctilde_identification_residuals() {
    let zero = vec![(vec![c(0.0, 0.0); 4], vec![c(0.0, 0.0); 4])];
    assert_eq!(
        pairing_equality_check(&const_hol_sec(1.0, 2), &zero).unwrap(),
        0.0
    );
    for seed in 0..40 {
        let (m, p) = if seed % 2 == 0 { (2, 1) } else { (3, 2) };
        let rm = if seed % 4 < 2 {
            const_hol_sec(1.0, m)
        } else {
            random_symmetric(m, seed)
        };
        let mut r = rng::stream(seed, 2);
        let zw: Vec<_> = (0..p)
            .map(|_| {
                (
                    rng::complex_vec(&mut r, 2 * m),
                    rng::complex_vec(&mut r, 2 * m),
                )
            })
            .collect();
        let res = pairing_equality_check(&rm, &zw).unwrap();
        let scale = two_vector(&zw).norm().powi(2).max(1.0);
        assert!(res <= 1e-12 * scale, "seed {seed}: {res}");
        let xy = ctilde_to_c2p(m, &zw).unwrap();
        assert_eq!(xy.len(), 2 * p);
        let direct = OneOneVector::from_pairs(m, xy).unwrap();
        assert!((direct.matrix() - oneone_part(&zw, m).matrix()).max_abs() < 1e-12);
    }
    assert!(ctilde_to_c2p(2, &[(vec![c(0.0, 0.0); 3], vec![c(0.0, 0.0); 4])]).is_err());
}

fn random_so_operator(n: usize, seed: u64) -> CxMat {
    let mut r = rng::stream(seed, 4);
    let d = so_dim(n);
    let a = CxMatrix::from_fn(d, d, |_, _| c(rng::normal(&mut r), 0.0));
    (&a + &a.transpose()).scale_re(0.5)
}

#[test]
fn sharp_of_identity() {
    for n in 3..=5 {
        let d = so_dim(n);
        let s = rm_sharp(&CxMatrix::identity(d), n).unwrap();
        let expect = CxMatrix::identity(d).scale_re((n - 2) as f64);
        assert!((&s - &expect).max_abs() < 1e-13, "n={n}");
    }
    assert_eq!(rm_sharp(&CxMatrix::zeros(3, 3), 3).unwrap().max_abs(), 0.0);
    assert!(rm_sharp(&CxMatrix::zeros(3, 3), 4).is_err());
}

#[test]
fn sharp_is_basis_independent() {
    for seed in 0..4 {
        let n = 4;
        let d = so_dim(n);
        let op = random_so_operator(n, seed);
        let s = rm_sharp(&op, n).unwrap();
        // Rotated orthonormal basis b^α = Σ_β Q_βα E_β with Q real orthogonal.
        let mut r = rng::stream(seed, 5);
        let g = CxMatrix::from_fn(d, d, |_, _| c(rng::normal(&mut r), 0.0));
        let q = lyh_core::tensor::linalg::orthonormalize(&g);
        let basis: Vec<SkewC<f64>> = (0..d)
            .map(|a| SkewC::from_coords(n, &(0..d).map(|b| q[(b, a)]).collect::<Vec<_>>()))
            .collect();
        let op_b = &(&q.transpose() * &op) * &q;
        let s_b = rm_sharp_in_basis(&op_b, &basis).unwrap();
        let s_back = &(&q * &s_b) * &q.transpose();
        assert!((&s - &s_back).max_abs() < 1e-10 * s.max_abs().max(1.0));
    }
}

#[test]
fn sharp_trace_route_agrees() {
    for seed in 0..6 {
        let n = 3 + seed as usize % 3;
        let op = random_so_operator(n, seed);
        let mut r = rng::stream(seed, 8);
        let v = SkewC::from_coords(n, &rng::complex_vec(&mut r, so_dim(n)));
        let direct = hermitian_value(&rm_sharp(&op, n).unwrap(), &v.coords());
        let route = sharp_trace_route(&op, &v).unwrap();
        assert!(
            (direct - route).norm() < 1e-11 * direct.norm().max(1.0),
            "n={n}"
        );
    }
}

#[test]
fn sharp_matches_curvature_contraction() {
    // 8 ⟨Rm^#(U), Ū⟩ = 4 Σ R_{aecf} R_{bedf} U^{ab} Ū^{cd} for algebraic curvature tensors.
    for seed in 0..3 {
        let n = 4;
        let mut r = rng::stream(seed, 9);
        let rr = RiemCurvature::from_fn_projected(n, |_, _, _, _| rng::normal(&mut r));
        let op = rr.operator_matrix();
        let u = SkewC::from_coords(n, &rng::complex_vec(&mut r, so_dim(n)));
        let um = u.matrix();
        let mut acc = c(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                for cc in 0..n {
                    for d in 0..n {
                        let w = um[(a, b)] * um[(cc, d)].conj();
                        for e2 in 0..n {
                            for f in 0..n {
                                acc += w * rr.get(a, e2, cc, f) * rr.get(b, e2, d, f);
                            }
                        }
                    }
                }
            }
        }
        let sharp = hermitian_value(&rm_sharp(&op, n).unwrap(), &u.coords());
        assert!(
            (acc * 4.0 - sharp * 8.0).norm() < 1e-10 * acc.norm().max(1.0),
            "seed {seed}"
        );
    }
}

/// PSD operator vanishing on a decomposable `v₀`.
fn psd_null_at(n: usize, seed: u64) -> (CxMat, SkewC<f64>) {
    let mut r = rng::stream(seed, 10);
    let v0 = SkewC::wedge(&rng::complex_vec(&mut r, n), &rng::complex_vec(&mut r, n));
    let v = v0.coords();
    let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let d = so_dim(n);
    let proj = CxMatrix::from_fn(d, d, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        c(id, 0.0) - v[i] * v[j].conj() / nv
    });
    let g = rng::complex_matrix(&mut r, d, d);
    let h = &(&(&proj * &g) * &g.adjoint()) * &proj;
    (h, v0)
}

#[test]
fn second_variation_chain_on_psd_nulls() {
    for seed in 0..20 {
        let n = 3 + seed as usize % 3;
        let (op, v0) = psd_null_at(n, seed);
        assert!(second_variation_positivity(&op, &v0).unwrap());
        assert!(sharp_nonneg_at_null(&op, &v0).unwrap() >= -1e-10);
    }
    let zero = CxMatrix::zeros(3, 3);
    let v = SkewC::elementary(3, 0, 1);
    assert!(second_variation_positivity(&zero, &v).unwrap());
    assert_eq!(sharp_nonneg_at_null(&zero, &v).unwrap(), 0.0);
}

#[test]
fn engineered_negative_direction_fails() {
    for seed in 0..5 {
        let n = 4;
        let (op, v0) = psd_null_at(n, seed);
        let v = v0.coords();
        let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let mut r = rng::stream(seed, 11);
        let x = SkewC::from_coords(n, &rng::complex_vec(&mut r, so_dim(n)));
        let w = ad(&v0, &x).unwrap().coords();
        // Remove the v₀ component so the operator stays null at v₀.
        let proj: C64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum::<C64>() / nv;
        let w: Vec<C64> = w.iter().zip(&v).map(|(a, b)| a - proj * b).collect();
        let d = so_dim(n);
        let dip = CxMatrix::from_fn(d, d, |i, j| w[i] * w[j].conj());
        let s = 10.0 * lyh_core::tensor::linalg::hermitian_norm(&op) / dip.max_abs();
        let bad = &op - &dip.scale_re(s);
        assert!(
            !second_variation_positivity(&bad, &v0).unwrap(),
            "seed {seed}"
        );
    }
    let (op, v0) = psd_null_at(4, 0);
    let not_null = &op + &CxMatrix::identity(so_dim(4));
    assert!(second_variation_positivity(&not_null, &v0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kb_reality_and_oracle(seed in 0u64..10_000, m in 2usize..=3, p in 1usize..=2) {
        let rm = random_symmetric(m, seed);
        let phi = random_real_form(seed, m, p);
        let kb = kb_reaction(&rm, &phi).unwrap();
        let h = kb.matrix();
        prop_assert!((&h - &h.adjoint()).max_abs() < 1e-12);
        prop_assert!(kb.sub(&kb_oracle(&rm, &phi)).unwrap().max_abs() < 1e-11);
    }

    #[test]
    fn projection_idempotent(seed in 0u64..10_000) {
        let mut r = rng::stream(seed, 0);
        let t = KahlerCurvature::from_fn_projected(2, |_, _, _, _| rng::complex_normal(&mut r));
        prop_assert!(t.symmetry_residual() < 1e-12);
        prop_assert!(t.project().axpy(-1.0, &t).unwrap().max_abs() < 1e-14);
    }
}
