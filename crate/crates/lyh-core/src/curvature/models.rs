//! Model curvature operators.

use super::kahler::KahlerCurvature;
use crate::error::{LyhError, Result};
use crate::rng;
use crate::scalar::C64;
use crate::tensor::linalg::CMat;

/// Constant holomorphic sectional curvature `2c`: `R_{ij̄kl̄} = c(δ_ij δ_kl + δ_il δ_kj)`.
pub fn const_hol_sec(c: f64, m: usize) -> KahlerCurvature {
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    KahlerCurvature::from_fn_checked(m, |i, j, k, l| {
        C64::new(c * (d(i, j) * d(k, l) + d(i, l) * d(k, j)), 0.0)
    })
    .expect("model has the Kähler symmetries")
}

/// Product curvature on `C^{m_a} × C^{m_b}`.
pub fn product(a: &KahlerCurvature, b: &KahlerCurvature) -> KahlerCurvature {
    let (ma, mb) = (a.m(), b.m());
    KahlerCurvature::from_fn_checked(ma + mb, |i, j, k, l| {
        let idx = [i, j, k, l];
        if idx.iter().all(|&x| x < ma) {
            a.get(i, j, k, l)
        } else if idx.iter().all(|&x| x >= ma) {
            b.get(i - ma, j - ma, k - ma, l - ma)
        } else {
            C64::new(0.0, 0.0)
        }
    })
    .expect("block sum keeps the symmetries")
}

/// `Σ_s λ_s (h_s ⊗ h_s + swap)`, i.e. `R_{ij̄kl̄} = Σ λ_s (h_{ij̄} h_{kl̄} + h_{il̄} h_{kj̄})`,
/// for random positive semidefinite Hermitian `h_s` and `λ_s ≥ 0`. Each term
/// pairs with `α` as `λ (‖Gᴴ αᵀ G‖² + |tr(hᵀα)|²)` where `h = G Gᴴ`, so the
/// operator is positive semidefinite on all of `Λ^{1,1}`.
pub fn psd_generated(m: usize, terms: usize, seed: u64) -> KahlerCurvature {
    let mut r = rng::stream(rng::derive_seed(seed, "psd_generated"), 0);
    let mut acc = KahlerCurvature::zeros(m);
    for _ in 0..terms.max(1) {
        let rank = 1 + (rng::uniform(&mut r, 0.0, m as f64) as usize).min(m - 1);
        let g = rng::complex_matrix(&mut r, m, rank);
        let h: CMat = &g * &g.adjoint();
        let lam = rng::uniform(&mut r, 0.1, 1.0);
        let term = KahlerCurvature::from_fn_checked(m, |i, j, k, l| {
            (h[(i, j)] * h[(k, l)] + h[(i, l)] * h[(k, j)]) * lam
        })
        .expect("symmetric by construction");
        acc = acc.axpy(1.0, &term).expect("same dimension");
    }
    acc
}

/// Random tensor with the Kähler symmetries (projected Gaussian), unit operator norm.
pub fn random_symmetric(m: usize, seed: u64) -> KahlerCurvature {
    let mut r = rng::stream(rng::derive_seed(seed, "random_symmetric"), 0);
    let t = KahlerCurvature::from_fn_projected(m, |_, _, _, _| rng::complex_normal(&mut r));
    let n = t.op_norm();
    t.scale(1.0 / n)
}

/// `base + Σ t_k G_k` style combination checked for matching dimension.
pub fn combine(parts: &[(f64, &KahlerCurvature)]) -> Result<KahlerCurvature> {
    let m = parts
        .first()
        .map(|(_, k)| k.m())
        .ok_or_else(|| LyhError::Parameter("empty combination".into()))?;
    parts
        .iter()
        .try_fold(KahlerCurvature::zeros(m), |acc, (c, k)| acc.axpy(*c, k))
}
