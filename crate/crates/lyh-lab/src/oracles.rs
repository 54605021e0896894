//! Brute-force oracles and random input generators shared by the suites.

use lyh_core::cones::{certify_kahler, engineered_non_psd, CertifiedKahler, ConeBudget};
use lyh_core::curvature::models::{const_hol_sec, psd_generated};
use lyh_core::curvature::{KahlerCurvature, RiemCurvature};
use lyh_core::lyh::DerivativeData;
use lyh_core::rng::{self, Stream};
use lyh_core::tensor::multi_index::binomial;
use lyh_core::tensor::skew::so_dim;
use lyh_core::tensor::{CxMatrix, SkewC};
use lyh_core::{CxMat, Form, PPForm, Result, C64};

pub type Pairs = Vec<(Vec<C64>, Vec<C64>)>;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Real `(p,p)`-form with a random Hermitian coefficient matrix.
pub fn random_real_form(r: &mut Stream, m: usize, p: usize) -> PPForm {
    PPForm::from_matrix_realified(m, p, &rng::hermitian(r, binomial(m, p))).expect("p <= m")
}

/// `KB(φ)` through derivations of the exterior algebra:
/// `Σ R_{ij̄lk̄} D_{ik} D̄_{jl} − ½ Σ (R_{lj̄} D̄_{jl} + R_{ik̄} D_{ik})` with
/// `D_{ik} = dz^i ∧ ι_k` and `D̄_{jl} = dz̄^j ∧ ι_l̄`.
pub fn kb_exterior(rm: &KahlerCurvature, phi: &PPForm) -> Result<PPForm> {
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
                    let c = rm.get(i, j, l, k);
                    if c != ZERO {
                        out.axpy(c, &d(&bar, i, k));
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
    PPForm::from_ext(&out, phi.p(), 1e-9 * out.max_abs().max(1.0))
}

/// Random real symmetric operator on `so(n)` in the `E_ab` basis.
pub fn random_so_operator(r: &mut Stream, n: usize) -> CxMat {
    let d = so_dim(n);
    let a = CxMatrix::from_fn(d, d, |_, _| C64::new(rng::normal(r), 0.0));
    (&a + &a.transpose()).scale_re(0.5)
}

/// Random real orthogonal `d×d` matrix.
pub fn random_orthogonal(r: &mut Stream, d: usize) -> CxMat {
    let g = CxMatrix::from_fn(d, d, |_, _| C64::new(rng::normal(r), 0.0));
    lyh_core::tensor::linalg::orthonormalize(&g)
}

/// PSD operator on `so(n, C)` vanishing on a random decomposable `v₀`.
pub fn psd_null_at(r: &mut Stream, n: usize) -> (CxMat, SkewC<f64>) {
    let v0 = SkewC::wedge(&rng::complex_vec(r, n), &rng::complex_vec(r, n));
    let v = v0.coords();
    let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let d = so_dim(n);
    let proj = CxMatrix::from_fn(d, d, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        C64::new(id, 0.0) - v[i] * v[j].conj() / nv
    });
    let g = rng::complex_matrix(r, d, d);
    let h = &(&(&proj * &g) * &g.adjoint()) * &proj;
    (h, v0)
}

pub fn random_pairs(r: &mut Stream, dim: usize, p: usize) -> Pairs {
    (0..p).map(|_| (rng::complex_vec(r, dim), rng::complex_vec(r, dim))).collect()
}

pub fn random_riem(r: &mut Stream, n: usize) -> RiemCurvature {
    RiemCurvature::from_fn_projected(n, |_, _, _, _| rng::normal(r))
}

/// Random `P_{αβ̄γ}` symmetric in `α, γ`, with a random Hermitian `ΔRic`.
pub fn kahler_derivative_data(r: &mut Stream, m: usize) -> DerivativeData {
    let lap_ric = rng::hermitian(r, m);
    let raw: Vec<C64> = (0..m * m * m).map(|_| rng::complex_normal(r)).collect();
    let at = |a: usize, b: usize, c: usize| raw[(a * m + b) * m + c];
    let mut p = Vec::with_capacity(m * m * m);
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                p.push((at(a, b, c) + at(c, b, a)) * 0.5);
            }
        }
    }
    DerivativeData::Kahler { lap_ric, p }
}

/// Random `P_{ijk}` antisymmetric in `i, j`, with a random symmetric Laplacian part.
pub fn riem_derivative_data(r: &mut Stream, n: usize) -> DerivativeData {
    let g = rng::complex_matrix(r, n, n);
    let lap_part = CxMatrix::from_fn(n, n, |i, j| C64::new(g[(i, j)].re + g[(j, i)].re, 0.0));
    let raw: Vec<f64> = (0..n * n * n).map(|_| rng::normal(r)).collect();
    let at = |a: usize, b: usize, c: usize| raw[(a * n + b) * n + c];
    let mut p = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                p.push(0.5 * (at(a, b, c) - at(b, a, c)));
            }
        }
    }
    DerivativeData::Riemannian { lap_part, p }
}

/// Certified `C_p` members at dimension `m` that are not PSD, found by
/// pushing the constant model just past the PSD boundary along random
/// directions and keeping the directions that stay inside `C_p`.
pub fn non_psd_pool(m: usize, p: usize, size: usize, seed: u64, budget: &ConeBudget) -> Vec<CertifiedKahler> {
    let base = const_hol_sec(1.0, m);
    let mut pool = Vec::with_capacity(size);
    let mut s = 0u64;
    while pool.len() < size && s < 64 * size as u64 {
        let rm = engineered_non_psd(&base, rng::derive_seed(seed, &format!("pool/{s}")), 1e-3);
        if let Ok(c) = certify_kahler(&rm, p, budget) {
            pool.push(c);
        }
        s += 1;
    }
    pool
}

/// Random member of `C_p`: a positive combination of pool members and a
/// PSD-generated operator, conjugated by a random unitary frame change. The
/// certificate follows from convexity and unitary invariance of the cone.
pub fn certified_combination(
    r: &mut Stream,
    pool: &[CertifiedKahler],
    m: usize,
    p: usize,
    budget: &ConeBudget,
) -> Result<CertifiedKahler> {
    let psd = psd_generated(m, 3, r_seed(r));
    let psd_cert = certify_kahler(&psd, p, budget)?;
    let mut rm = psd.scale(rng::uniform(r, 0.0, 0.2));
    let mut sources = vec![&psd_cert];
    for _ in 0..2 {
        let j = (rng::uniform(r, 0.0, pool.len() as f64) as usize).min(pool.len() - 1);
        rm = rm.axpy(rng::uniform(r, 0.1, 1.0), pool[j].rm())?;
        sources.push(&pool[j]);
    }
    let u = rng::unitary_frame(r, m, m);
    CertifiedKahler::from_preserving_map(rm.conjugate_by(&u)?, p, &sources)
}

fn r_seed(r: &mut Stream) -> u64 {
    (rng::uniform(r, 0.0, 1.0) * (1u64 << 53) as f64) as u64
}
