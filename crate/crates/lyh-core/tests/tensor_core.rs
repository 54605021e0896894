use lyh_core::rng;
use lyh_core::scalar::C64;
use lyh_core::tensor::exterior::bidegree;
use lyh_core::tensor::multi_index::{sort_with_sign, SubsetTable};
use lyh_core::tensor::skew::{ad_matrix, complex_structure, exp_ad_residual, so_dim};
use lyh_core::tensor::{ad, exp_ad_consistency, oneone_to_skew, CxMatrix, SkewC};
use lyh_core::{CxMat, Form, Skew};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_skew(seed: u64, n: usize) -> Skew {
    let mut r = rng::stream(seed, 0);
    Skew::skew_part(&rng::complex_matrix(&mut r, n, n))
}

fn random_form(seed: u64, m: usize) -> Form {
    let mut r = rng::stream(seed, 1);
    let mut f = Form::zero(m);
    for k in 0..(1usize << (2 * m)) {
        f.set(k as u32, rng::complex_normal(&mut r));
    }
    f
}

fn max_diff(a: &Form, b: &Form) -> f64 {
    a.sub(b).max_abs()
}

#[test]
fn ad_of_elementary_generators() {
    let e12 = Skew::elementary(3, 0, 1);
    let e23 = Skew::elementary(3, 1, 2);
    let e13 = Skew::elementary(3, 0, 2);
    let got = ad(&e12, &e23).unwrap();
    let direct = &(e12.matrix() * e23.matrix()) - &(e23.matrix() * e12.matrix());
    assert_eq!(got.matrix(), &direct);
    assert_eq!(got, e13);
    assert!(ad(&e12, &e12).unwrap().matrix().max_abs() == 0.0);
}

#[test]
fn ad_rejects_dimension_mismatch() {
    assert!(ad(&Skew::zero(3), &Skew::zero(4)).is_err());
}

#[test]
fn ad_is_traceless_bilinear_and_jacobi() {
    for seed in 0..20 {
        let (u, v, w) = (
            random_skew(seed, 5),
            random_skew(seed + 100, 5),
            random_skew(seed + 200, 5),
        );
        let uv = ad(&u, &v).unwrap();
        assert!(uv.matrix().trace().norm() < 1e-12);
        assert!(uv.is_skew(1e-12));
        let jac = ad(&u, &ad(&v, &w).unwrap())
            .unwrap()
            .add(&ad(&v, &ad(&w, &u).unwrap()).unwrap())
            .add(&ad(&w, &uv).unwrap());
        assert!(
            jac.matrix().max_abs() < 1e-12,
            "jacobi {}",
            jac.matrix().max_abs()
        );
        let s = c(0.3, -1.2);
        let lhs = ad(&u.scale(s).add(&v), &w).unwrap();
        let rhs = ad(&u, &w).unwrap().scale(s).add(&ad(&v, &w).unwrap());
        assert!((lhs.matrix() - rhs.matrix()).max_abs() < 1e-12);
    }
}

#[test]
fn ad_hermitian_adjoint_is_minus_ad_of_conjugate() {
    let v = random_skew(7, 5);
    let a = ad_matrix(&v);
    let b = ad_matrix(&v.conj()).scale(c(-1.0, 0.0));
    assert!((&a.adjoint() - &b).max_abs() < 1e-12);
}

#[test]
fn exp_ad_matches_conjugation() {
    assert!(exp_ad_consistency(&Skew::zero(4), 1e-14));
    for seed in 0..10 {
        let v = random_skew(seed, 6);
        let v = v.scale(c(1.0 / v.matrix().frobenius_norm(), 0.0));
        assert!(exp_ad_residual(&v).unwrap() <= 1e-10);
        assert!(exp_ad_consistency(&v.scale(c(10.0, 0.0)), 1e-6));
    }
    assert!(exp_ad_residual(&Skew::zero(9)).is_err());
}

#[test]
fn expm_of_rotation_generator() {
    let e = Skew::elementary(2, 0, 1);
    let t = 0.7f64;
    let g = e.matrix().scale(c(t, 0.0)).expm().unwrap();
    assert!((g[(0, 0)] - c(t.cos(), 0.0)).norm() < 1e-14);
    assert!((g[(0, 1)] - c(t.sin(), 0.0)).norm() < 1e-14);
}

#[test]
fn oneone_identity_block() {
    let m = 3;
    let z = oneone_to_skew(&CxMat::zeros(m, m));
    assert_eq!(z.matrix().max_abs(), 0.0);
    let s = oneone_to_skew(&CxMat::identity(m));
    let j = complex_structure::<f64>(m);
    for a in 0..m {
        for b in 0..m {
            assert_eq!(s.matrix()[(a, b)], c(0.0, 0.0));
            let expect = if a == b { c(0.0, -2.0) } else { c(0.0, 0.0) };
            assert_eq!(s.matrix()[(a + m, b)], expect);
            assert_eq!(s.matrix()[(a, b + m)], -expect);
        }
    }
    assert_eq!(s.matrix().commutator(&j).unwrap().max_abs(), 0.0);
}

#[test]
fn oneone_commutes_with_j_and_is_injective() {
    let m = 3;
    let j = complex_structure::<f64>(m);
    let mut r = rng::stream(3, 0);
    for _ in 0..10 {
        let cm = rng::complex_matrix(&mut r, m, m);
        let s = oneone_to_skew(&cm);
        assert!(s.is_skew(1e-14));
        assert!(s.matrix().commutator(&j).unwrap().max_abs() <= 1e-12);
    }
    // Rank of the linear map on the m² basis matrices.
    let cols: Vec<Vec<C64>> = (0..m * m)
        .map(|k| {
            let e = CxMat::from_fn(m, m, |a, b| {
                if a * m + b == k {
                    c(1.0, 0.0)
                } else {
                    c(0.0, 0.0)
                }
            });
            oneone_to_skew(&e).coords()
        })
        .collect();
    let d = cols[0].len();
    let mat = CxMat::from_fn(m * m, d, |k, x| cols[k][x]);
    let gram = &mat * &mat.adjoint();
    let (vals, _) = lyh_core::tensor::linalg::hermitian_eigen(&gram);
    assert!(vals[0] > 1e-8, "kernel detected");
}

#[test]
fn skew_pairing_orthonormal_basis() {
    let n = 4;
    for a in 0..so_dim(n) {
        for b in 0..so_dim(n) {
            let mut ca = vec![c(0.0, 0.0); so_dim(n)];
            let mut cb = ca.clone();
            ca[a] = c(1.0, 0.0);
            cb[b] = c(1.0, 0.0);
            let p = Skew::from_coords(n, &ca).pair(&Skew::from_coords(n, &cb));
            assert_eq!(p, c(if a == b { 1.0 } else { 0.0 }, 0.0));
        }
    }
    assert!(SkewC::new(CxMat::identity(2), 1e-12).is_err());
}

#[test]
fn matrix_shape_errors() {
    let a = CxMat::zeros(2, 3);
    assert!(a.matmul(&a).is_err());
    assert!(CxMatrix::<f64>::from_row_major(2, 2, vec![c(0.0, 0.0); 3]).is_err());
    assert!(CxMat::from_fn(2, 2, |i, j| c(i as f64, j as f64))
        .into_hermitian(1e-12)
        .is_err());
}

#[test]
fn permuted_lookup_signs() {
    assert_eq!(sort_with_sign(&[2, 0, 1]), Some((vec![0, 1, 2], 1)));
    assert_eq!(sort_with_sign(&[1, 0, 2]), Some((vec![0, 1, 2], -1)));
    assert_eq!(sort_with_sign(&[1, 1]), None);
    let t = SubsetTable::new(4, 2);
    assert_eq!(t.len(), 6);
    assert_eq!(t.indices(0), vec![0, 1]);
    assert_eq!(
        t.locate(&[3, 1]),
        Some((t.rank_of_mask(0b1010).unwrap(), -1))
    );
}

#[test]
fn star_is_signed_involution() {
    for m in 1..=3 {
        let f = random_form(m as u64, m);
        let ss = f.star().star();
        for mask in 0..(1u32 << (2 * m)) {
            let (p, q) = bidegree(m, mask);
            let k = p + q;
            let sign = if (k * (2 * m - k)) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            assert!((ss.get(mask) - f.get(mask) * sign).norm() < 1e-12);
        }
    }
}

#[test]
fn star_pairs_against_bilinear_inner_product() {
    // α ∧ *β = ⟨α, conj β⟩ vol with the Hermitian ⟨·,·⟩.
    let m = 2;
    let vol = Form::volume(m);
    let full = (1u32 << (2 * m)) - 1;
    for seed in 0..5 {
        let a = random_form(seed, m).project(1, 1);
        let b = random_form(seed + 50, m).project(1, 1);
        let lhs = a.wedge(&b.star()).get(full);
        let rhs = a.inner(&b.conj()) * vol.get(full);
        assert!((lhs - rhs).norm() < 1e-12);
    }
}

#[test]
fn volume_is_omega_power_over_factorial() {
    for m in 1..=4 {
        let om = Form::omega(m);
        let mut pow = Form::basis(m, 0, c(1.0, 0.0));
        let mut fact = 1.0;
        for k in 1..=m {
            pow = pow.wedge(&om);
            fact *= k as f64;
        }
        assert!(max_diff(&pow.scale(c(1.0 / fact, 0.0)), &Form::volume(m)) < 1e-12);
    }
}

#[test]
fn lambda_is_signed_conjugate_of_lefschetz() {
    for m in 1..=3 {
        let f = random_form(10 + m as u64, m);
        for p in 0..=m {
            for q in 0..=m {
                let fpq = f.project(p, q);
                let sign = if (p + q) % 2 == 0 { 1.0 } else { -1.0 };
                let other = fpq.star().lefschetz().star().scale(c(sign, 0.0));
                assert!(max_diff(&fpq.lambda(), &other) < 1e-12, "m={m} ({p},{q})");
            }
        }
    }
}

#[test]
fn lambda_is_adjoint_of_lefschetz() {
    let m = 3;
    let a = random_form(20, m);
    let b = random_form(21, m);
    assert!((a.lefschetz().inner(&b) - a.inner(&b.lambda())).norm() < 1e-12);
}

#[test]
fn lefschetz_commutator_is_degree_counter() {
    let m = 3;
    let f = random_form(30, m);
    for p in 0..=m {
        for q in 0..=m {
            let fpq = f.project(p, q);
            let comm = fpq.lefschetz().lambda().sub(&fpq.lambda().lefschetz());
            let k = (p + q) as f64;
            assert!(max_diff(&comm, &fpq.scale(c(m as f64 - k, 0.0))) < 1e-12);
        }
    }
}

#[test]
fn iota_duality_with_star() {
    // ι_V = *(V̄* ∧ *·) in every bidegree, V* = Σ conj(V^i) dz^i.
    let m = 3;
    let mut r = rng::stream(40, 0);
    let v = rng::complex_vec(&mut r, m);
    let f = random_form(41, m);
    let zero = vec![c(0.0, 0.0); m];
    let vstar_holo: Vec<C64> = v.iter().map(|z| z.conj()).collect();
    let vstar = Form::one_form(m, &vstar_holo, &zero);
    let vbar_star = vstar.conj();
    for p in 0..=m {
        for q in 0..=m {
            let fpq = f.project(p, q);
            let via_star = vbar_star.wedge(&fpq.star()).star();
            assert!(max_diff(&fpq.iota_holo(&v), &via_star) < 1e-12, "({p},{q})");
            let via_star_anti = vstar.wedge(&fpq.star()).star();
            assert!(
                max_diff(&fpq.iota_anti(&v), &via_star_anti) < 1e-12,
                "({p},{q})"
            );
        }
    }
}

#[test]
fn lambda_commutes_with_interior_products() {
    let m = 3;
    let mut r = rng::stream(50, 0);
    let v = rng::complex_vec(&mut r, m);
    let f = random_form(51, m);
    let a = f.iota_holo(&v).lambda().sub(&f.lambda().iota_holo(&v));
    let b = f.iota_anti(&v).lambda().sub(&f.lambda().iota_anti(&v));
    assert!(a.max_abs() < 1e-12 && b.max_abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permuted_access_carries_sign(perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle()) {
        let (sorted, sign) = sort_with_sign(&perm).unwrap();
        prop_assert_eq!(sorted, vec![0, 1, 2, 3]);
        let mut inversions = 0;
        for a in 0..4 {
            for b in a + 1..4 {
                if perm[a] > perm[b] {
                    inversions += 1;
                }
            }
        }
        prop_assert_eq!(sign, if inversions % 2 == 0 { 1 } else { -1 });
    }

    #[test]
    fn interior_products_anticommute(seed in 0u64..1000) {
        let m = 3;
        let mut r = rng::stream(seed, 9);
        let v = rng::complex_vec(&mut r, m);
        let w = rng::complex_vec(&mut r, m);
        let f = random_form(seed, m);
        let s = f.iota_holo(&v).iota_holo(&w).add(&f.iota_holo(&w).iota_holo(&v));
        prop_assert!(s.max_abs() < 1e-12);
        prop_assert!(f.iota_anti(&v).iota_anti(&v).max_abs() < 1e-12);
    }

    #[test]
    fn jacobi_on_random_triples(seed in 0u64..1000) {
        let (u, v, w) = (random_skew(seed, 4), random_skew(seed + 1, 4), random_skew(seed + 2, 4));
        let jac = ad(&u, &ad(&v, &w).unwrap()).unwrap()
            .add(&ad(&v, &ad(&w, &u).unwrap()).unwrap())
            .add(&ad(&w, &ad(&u, &v).unwrap()).unwrap());
        prop_assert!(jac.matrix().max_abs() < 1e-12);
    }
}
