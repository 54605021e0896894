//! The curvature reaction term `KB(φ)` of the Hodge-Laplacian heat equation on
//! `(p,p)`-forms, and the Hermitian transforms `K`, `J` on `⊕^p C^m`.

use super::kahler::KahlerCurvature;
use crate::error::{LyhError, Result};
use crate::ppform::{FrameTuple, PPForm};
use crate::scalar::C64;
use crate::tensor::linalg::CMat;
use crate::tensor::CxMatrix;

const ZERO: C64 = C64::new(0.0, 0.0);

fn replaced(idx: &[usize], pos: usize, v: usize) -> Vec<usize> {
    let mut out = idx.to_vec();
    out[pos] = v;
    out
}

/// `KB(φ)_{I,J} = Σ_{μ,ν} R_{i_μ j̄_ν l k̄} φ_{..(k)_μ.., ..(l̄)_ν..}
///   − ½ (Σ_ν R_{l j̄_ν} φ_{I, ..(l̄)_ν..} + Σ_μ R_{i_μ k̄} φ_{..(k)_μ.., J})`
/// in a unitary frame, on comma-convention coefficients.
pub fn kb_reaction(rm: &KahlerCurvature, phi: &PPForm) -> Result<PPForm> {
    let (m, p) = (phi.m(), phi.p());
    if rm.m() != m {
        return Err(LyhError::Dimension(format!(
            "curvature on C^{} against form on C^{m}",
            rm.m()
        )));
    }
    let ric = rm.ricci();
    PPForm::from_fn(m, p, |i, j| {
        let mut acc = ZERO;
        for mu in 0..p {
            for nu in 0..p {
                for k in 0..m {
                    let ik = replaced(i, mu, k);
                    for l in 0..m {
                        let r = rm.get(i[mu], j[nu], l, k);
                        if r != ZERO {
                            acc += r * phi.coeff(&ik, &replaced(j, nu, l));
                        }
                    }
                }
            }
        }
        let mut half = ZERO;
        for nu in 0..p {
            for l in 0..m {
                half += ric[(l, j[nu])] * phi.coeff(i, &replaced(j, nu, l));
            }
        }
        for mu in 0..p {
            for k in 0..m {
                half += ric[(i[mu], k)] * phi.coeff(&replaced(i, mu, k), j);
            }
        }
        acc - half * 0.5
    })
}

/// `Re ⟨KB(φ), φ̄⟩ = Re Σ KB(φ)_{IJ} conj(φ_{IJ})` over sorted indices.
pub fn kb_pairing(rm: &KahlerCurvature, phi: &PPForm) -> Result<f64> {
    kb_reaction(rm, phi)?.inner(phi)
}

/// The transform `K` of a frame `X_1..X_p`:
/// `𝔷̄ᵀ K 𝔴 = Σ_{μ,ν} R_{X_μ X̄_ν w_ν z̄_μ}`, rows and columns stacked as `(μ, a)`.
pub fn k_matrix(rm: &KahlerCurvature, frame: &FrameTuple) -> Result<CMat> {
    let m = rm.m();
    let p = frame.len();
    if frame.vectors().iter().any(|v| v.len() != m) {
        return Err(LyhError::Dimension("frame vectors must lie in C^m".into()));
    }
    let e = |a: usize| {
        (0..m)
            .map(|x| if x == a { C64::new(1.0, 0.0) } else { ZERO })
            .collect::<Vec<_>>()
    };
    let x = frame.vectors();
    Ok(CxMatrix::from_fn(p * m, p * m, |row, col| {
        let (mu, a) = (row / m, row % m);
        let (nu, b) = (col / m, col % m);
        rm.eval4(&x[mu], &x[nu], &e(b), &e(a))
    }))
}

/// Zeroes the coefficients `φ_{I,[p]}` and `φ_{[p],J}` (and their partners)
/// for every `I`, `J` within one index of `[p] = {0..p}`, so that the first
/// variation identities hold at the frame `e_1..e_p`.
pub fn impose_first_variation(phi: &PPForm) -> PPForm {
    let (m, p) = (phi.m(), phi.p());
    let base: Vec<usize> = (0..p).collect();
    let near = |idx: &[usize]| idx.iter().filter(|x| !base.contains(x)).count() <= 1;
    PPForm::from_fn(m, p, |i, j| {
        if (j == base.as_slice() && near(i)) || (i == base.as_slice() && near(j)) {
            ZERO
        } else {
            phi.coeff(i, j)
        }
    })
    .expect("zeroing conjugate pairs keeps reality")
}

/// `KB(φ)_{1..p, 1̄..p̄}` and `trace(K·J)` at the standard frame.
pub fn trace_identity(rm: &KahlerCurvature, phi: &PPForm) -> Result<(C64, C64)> {
    let p = phi.p();
    let frame = FrameTuple::standard(phi.m(), p);
    let kb = kb_reaction(rm, phi)?;
    let base: Vec<usize> = (0..p).collect();
    let lhs = kb.coeff(&base, &base);
    let k = k_matrix(rm, &frame)?;
    let j = phi.j_matrix(&frame)?;
    Ok((lhs, (&k * &j).trace()))
}

/// `𝔴̄ᵀ B 𝔴` against `⟨Rm(α), ᾱ⟩` for `α = Σ_i e_i ∧ w̄_i`; returns both values.
pub fn b_matrix_check(rm: &KahlerCurvature, w: &[Vec<C64>]) -> Result<(C64, C64)> {
    let m = rm.m();
    let p = w.len();
    let k = k_matrix(rm, &FrameTuple::standard(m, p))?;
    let flat: Vec<C64> = w.iter().flatten().copied().collect();
    let kw = k.mul_vec(&flat);
    let quad: C64 = flat.iter().zip(&kw).map(|(a, b)| a.conj() * b).sum();
    let pairs = (0..p)
        .map(|i| {
            let e = (0..m)
                .map(|x| if x == i { C64::new(1.0, 0.0) } else { ZERO })
                .collect();
            (e, w[i].clone())
        })
        .collect();
    let alpha = super::OneOneVector::from_pairs(m, pairs)?;
    Ok((quad, rm.pairing(&alpha, &alpha)?))
}
