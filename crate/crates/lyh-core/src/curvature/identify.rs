//! Rewriting complex two-vectors `Σ Z_i ∧ W_i` of `R^{2m} ⊗ C` as Kähler
//! `(1,1)`-vectors `Σ X_j ∧ Ȳ_j` with twice as many terms.

use super::kahler::{KahlerCurvature, OneOneVector};
use super::riem::RiemCurvature;
use crate::error::{LyhError, Result};
use crate::scalar::C64;
use crate::tensor::SkewC;

type Pair = (Vec<C64>, Vec<C64>);

/// `(1,0)` and `(0,1)` parts of a vector given in the real basis
/// `(x_1..x_m, y_1..y_m)`: `ζ = (a + ib)/√2` on `ε`, `η = (a − ib)/√2` on `ε̄`.
pub fn split_types(v: &[C64]) -> (Vec<C64>, Vec<C64>) {
    let m = v.len() / 2;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let i = C64::new(0.0, 1.0);
    let hol = (0..m).map(|j| (v[j] + i * v[m + j]) * s).collect();
    let anti = (0..m).map(|j| (v[j] - i * v[m + j]) * s).collect();
    (hol, anti)
}

/// `Z_i = X_{2i−1} + Ȳ_{2i}`, `W_i = Ȳ_{2i−1} − X_{2i}` solved for the `X`, `Y`.
pub fn ctilde_to_c2p(m: usize, zw: &[Pair]) -> Result<Vec<Pair>> {
    let mut out = Vec::with_capacity(2 * zw.len());
    for (z, w) in zw {
        if z.len() != 2 * m || w.len() != 2 * m {
            return Err(LyhError::Dimension(format!("Z, W must lie in C^{}", 2 * m)));
        }
        let (zh, za) = split_types(z);
        let (wh, wa) = split_types(w);
        let conj = |v: Vec<C64>| v.into_iter().map(|x| x.conj()).collect::<Vec<_>>();
        out.push((zh, conj(wa)));
        out.push((wh.into_iter().map(|x| -x).collect(), conj(za)));
    }
    Ok(out)
}

/// The complex skew matrix of `Σ Z_i ∧ W_i` in the real basis.
pub fn two_vector(zw: &[Pair]) -> SkewC<f64> {
    let n = zw.first().map_or(0, |(z, _)| z.len());
    zw.iter()
        .fold(SkewC::zero(n), |acc, (z, w)| acc.add(&SkewC::wedge(z, w)))
}

/// `|⟨Rm(Σ Z_i∧W_i), conj⟩ − ⟨Rm(Σ X_j∧Ȳ_j), conj⟩|` with the left side
/// evaluated through the underlying real curvature tensor.
pub fn pairing_equality_check(rm: &KahlerCurvature, zw: &[Pair]) -> Result<f64> {
    let m = rm.m();
    let xy = ctilde_to_c2p(m, zw)?;
    let riem = RiemCurvature::from_kahler(rm);
    let u = if zw.is_empty() {
        SkewC::zero(2 * m)
    } else {
        two_vector(zw)
    };
    let lhs = riem.pairing(&u, &u)?;
    let alpha = OneOneVector::from_pairs(m, xy)?;
    let rhs = rm.pairing(&alpha, &alpha)?;
    Ok((lhs - rhs).norm())
}

/// The `(1,1)` part of `Σ Z_i ∧ W_i`: coefficient of `ε_i ∧ ε̄_l`.
pub fn oneone_part(zw: &[Pair], m: usize) -> OneOneVector {
    let mut c = crate::tensor::CxMatrix::zeros(m, m);
    for (z, w) in zw {
        let (zh, za) = split_types(z);
        let (wh, wa) = split_types(w);
        for i in 0..m {
            for l in 0..m {
                c[(i, l)] += zh[i] * wa[l] - wh[i] * za[l];
            }
        }
    }
    OneOneVector::from_matrix(c).expect("square")
}
