//! Li-Yau-Hamilton quadratic forms: `Q` and `Z` for the Kähler-Ricci flow,
//! `Q̃` and `𝒵_Z` for the Ricci flow, the admissible minimization, and the
//! trace-form reduction of the evolved forms.
//!
//! Kähler index conventions: `M[(α, β)] = M_{αβ̄}`, `P_{αβ̄γ}` is stored at
//! `(α·m + β)·m + γ`, and the other chirality is `P_{αβ̄γ̄} = conj P_{βᾱγ}`.
//! `U^{αβ̄}` is the matrix `Σ X Yᴴ` of a [`OneOneVector`] and
//! `Ū^{β̄γ} = conj U^{βγ̄}`.
//!
//! Riemannian: `⟨Rm(U), Ū⟩ = ¼ R_{abcd} U^{ab} Ū^{cd}` and
//! `⟨P(W), Ū⟩ = ½ P_{ijk} W^k Ū^{ij}`, both sums over all indices, so that each
//! antisymmetric pair is counted once. With `U = W ∧ Z` this makes
//! `Q̃(W ⊕ U) = ⟨𝒵_Z W, W̄⟩`.

use crate::cones::{block_map, membership, witness_pairs, ConeBudget, ConeSpec, CurvatureOp};
use crate::curvature::riem::pair_list;
use crate::curvature::{KahlerCurvature, OneOneVector, RiemCurvature};
use crate::error::{LyhError, Result};
use crate::flow::{Trajectory, TrajectoryRow};
use crate::rng;
use crate::scalar::C64;
use crate::tensor::linalg::{hermitian_norm, min_eigen, min_generalized, CMat};
use crate::tensor::{CxMatrix, SkewC};
use crate::verdict::{ConeVerdict, Status, Witness};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Relative size below which a normalized `min Q` is reported as a soliton candidate.
pub const SOLITON_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LyhVariant {
    Kahler,
    Riemannian,
}

/// Spatial derivative data entering `M` and `P`.
#[derive(Clone, Debug, Default)]
pub enum DerivativeData {
    /// `∇R = 0`, `ΔR = 0`.
    #[default]
    Homogeneous,
    /// `ΔR_{αβ̄}` and `P_{αβ̄γ} = ∇_γ R_{αβ̄}`.
    Kahler { lap_ric: CMat, p: Vec<C64> },
    /// `ΔR_{ij} − ½∇_i∇_j R` and `P_{ijk} = ∇_i R_{jk} − ∇_j R_{ik}`.
    Riemannian { lap_part: CMat, p: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct LyhTensors {
    pub variant: LyhVariant,
    pub dim: usize,
    pub t: f64,
    pub m: CMat,
    pub p: Vec<C64>,
    pub homogeneous: bool,
}

impl LyhTensors {
    #[inline]
    fn p_at(&self, a: usize, b: usize, c: usize) -> C64 {
        self.p[(a * self.dim + b) * self.dim + c]
    }

    /// `P_{αβ̄γ̄}`.
    #[inline]
    fn p_bar(&self, a: usize, b: usize, c: usize) -> C64 {
        self.p_at(b, a, c).conj()
    }

    fn check(&self) -> Result<()> {
        let n = self.dim;
        let scale = self.m.max_abs().max(1.0);
        if !self.m.is_hermitian(1e-12 * scale) {
            return Err(LyhError::Invariant("M is not Hermitian".into()));
        }
        let pscale = self.p.iter().fold(1.0f64, |a, z| a.max(z.norm()));
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let bad = match self.variant {
                        LyhVariant::Kahler => (self.p_at(a, b, c) - self.p_at(c, b, a)).norm(),
                        LyhVariant::Riemannian => {
                            (self.p_at(a, b, c) + self.p_at(b, a, c)).norm() + self.p_at(a, b, c).im.abs()
                        }
                    };
                    if bad > 1e-12 * pscale {
                        return Err(LyhError::Invariant(format!("P breaks its symmetry at ({a},{b},{c})")));
                    }
                }
            }
        }
        if self.variant == LyhVariant::Riemannian && self.m.as_slice().iter().any(|z| z.im.abs() > 1e-12 * scale) {
            return Err(LyhError::Invariant("Riemannian M must be real".into()));
        }
        Ok(())
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(LyhError::Parameter(format!("time must be positive, got {t}")))
    }
}

/// `M_{αβ̄} = ΔR_{αβ̄} + R_{αβ̄γδ̄}R_{δγ̄} + R_{αβ̄}/t` and `P_{αβ̄γ}`.
pub fn build_m_p_kahler(rm: &KahlerCurvature, t: f64, data: &DerivativeData) -> Result<LyhTensors> {
    check_t(t)?;
    let m = rm.m();
    let ric = rm.ricci();
    let mut mm = CxMatrix::from_fn(m, m, |a, b| {
        let mut acc = ric[(a, b)] / t;
        for g in 0..m {
            for d in 0..m {
                acc += rm.get(a, b, g, d) * ric[(d, g)];
            }
        }
        acc
    });
    let mut p = vec![ZERO; m * m * m];
    let homogeneous = match data {
        DerivativeData::Homogeneous => true,
        DerivativeData::Kahler { lap_ric, p: dp } => {
            if lap_ric.rows() != m || lap_ric.cols() != m || dp.len() != m * m * m {
                return Err(LyhError::Dimension("derivative data does not match C^m".into()));
            }
            mm = &mm + lap_ric;
            p.clone_from(dp);
            false
        }
        DerivativeData::Riemannian { .. } => {
            return Err(LyhError::Parameter("Riemannian derivative data for a Kähler curvature".into()))
        }
    };
    let ten = LyhTensors { variant: LyhVariant::Kahler, dim: m, t, m: mm, p, homogeneous };
    ten.check()?;
    Ok(ten)
}

/// `M_{ij} = ΔR_{ij} − ½∇_i∇_jR + 2R_{ikjl}R_{kl} − R_{ik}R_{jk} + R_{ij}/(2t)` and `P_{ijk}`.
pub fn build_m_p_riem(rm: &RiemCurvature, t: f64, data: &DerivativeData) -> Result<LyhTensors> {
    check_t(t)?;
    let n = rm.n();
    let ric = rm.ricci();
    let mut mm = CxMatrix::from_fn(n, n, |i, j| {
        let mut acc = ric[i][j] / (2.0 * t);
        for k in 0..n {
            acc -= ric[i][k] * ric[j][k];
            for l in 0..n {
                acc += 2.0 * rm.get(i, k, j, l) * ric[k][l];
            }
        }
        C64::new(acc, 0.0)
    });
    let mut p = vec![ZERO; n * n * n];
    let homogeneous = match data {
        DerivativeData::Homogeneous => true,
        DerivativeData::Riemannian { lap_part, p: dp } => {
            if lap_part.rows() != n || lap_part.cols() != n || dp.len() != n * n * n {
                return Err(LyhError::Dimension("derivative data does not match R^n".into()));
            }
            mm = &mm + lap_part;
            p = dp.iter().map(|&x| C64::new(x, 0.0)).collect();
            false
        }
        DerivativeData::Kahler { .. } => {
            return Err(LyhError::Parameter("Kähler derivative data for a Riemannian curvature".into()))
        }
    };
    let ten = LyhTensors { variant: LyhVariant::Riemannian, dim: n, t, m: mm, p, homogeneous };
    ten.check()?;
    Ok(ten)
}

fn expect_variant(ten: &LyhTensors, v: LyhVariant, dim: usize) -> Result<()> {
    if ten.variant != v {
        return Err(LyhError::Parameter(format!("expected {v:?} tensors, got {:?}", ten.variant)));
    }
    if ten.dim != dim {
        return Err(LyhError::Dimension(format!("tensors on dimension {} used with {dim}", ten.dim)));
    }
    Ok(())
}

fn reality(z: C64, scale: f64) -> Result<f64> {
    if z.im.abs() > 1e-12 * scale.max(1.0) {
        return Err(LyhError::Invariant(format!("quadratic form has imaginary part {:.3e}", z.im)));
    }
    Ok(z.re)
}

fn close(a: &[C64], b: &[C64]) -> bool {
    let scale = a.iter().chain(b).fold(1.0f64, |s, z| s.max(z.norm()));
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= 1e-12 * scale)
}

fn kahler_q_raw(ten: &LyhTensors, rm: &KahlerCurvature, u: &CMat, w: &[C64]) -> (C64, f64) {
    let m = ten.dim;
    let (mut mw, mut p1, mut p2, mut ru) = (ZERO, ZERO, ZERO, ZERO);
    for a in 0..m {
        for b in 0..m {
            mw += ten.m[(a, b)] * w[a] * w[b].conj();
            for g in 0..m {
                p1 += ten.p_at(a, b, g) * u[(b, g)].conj() * w[a];
                p2 += ten.p_bar(a, b, g) * u[(a, g)] * w[b].conj();
                for d in 0..m {
                    ru += rm.get(a, b, g, d) * u[(a, b)] * u[(d, g)].conj();
                }
            }
        }
    }
    let scale = mw.norm() + p1.norm() + p2.norm() + ru.norm();
    (mw + p1 + p2 + ru, scale)
}

/// `Q(U ⊕ W)` for `U = Σ_{i<p} X_i ∧ Ȳ_i + W ∧ V̄`; the last pair of `u` must be `(W, V)`.
pub fn eval_q_krf(ten: &LyhTensors, rm: &KahlerCurvature, u: &OneOneVector, w: &[C64]) -> Result<f64> {
    expect_variant(ten, LyhVariant::Kahler, rm.m())?;
    let pairs = u
        .pairs()
        .ok_or_else(|| LyhError::Precondition("U needs its decomposable representation".into()))?;
    match pairs.last() {
        Some((x, _)) if close(x, w) => {}
        _ => return Err(LyhError::Precondition("the last pair of U must be W ∧ V̄".into())),
    }
    let (q, scale) = kahler_q_raw(ten, rm, u.matrix(), w);
    reality(q, scale)
}

/// `Z_{αβ̄} = M_{αβ̄} + P_{αβ̄γ}V^γ + P_{αβ̄γ̄}V̄^γ + R_{αβ̄γδ̄}V^γV̄^δ`.
pub fn z_matrix(ten: &LyhTensors, rm: &KahlerCurvature, v: &[C64]) -> CMat {
    let m = ten.dim;
    CxMatrix::from_fn(m, m, |a, b| {
        let mut acc = ten.m[(a, b)];
        for g in 0..m {
            acc += ten.p_at(a, b, g) * v[g] + ten.p_bar(a, b, g) * v[g].conj();
            for d in 0..m {
                acc += rm.get(a, b, g, d) * v[g] * v[d].conj();
            }
        }
        acc
    })
}

/// `Z_{αβ̄} W^α W̄^β`.
pub fn eval_z(ten: &LyhTensors, rm: &KahlerCurvature, w: &[C64], v: &[C64]) -> Result<f64> {
    expect_variant(ten, LyhVariant::Kahler, rm.m())?;
    let z = z_matrix(ten, rm, v);
    let m = ten.dim;
    let mut acc = ZERO;
    for a in 0..m {
        for b in 0..m {
            acc += z[(a, b)] * w[a] * w[b].conj();
        }
    }
    reality(acc, z.max_abs() * w.iter().map(|x| x.norm_sqr()).sum::<f64>())
}

fn wedge_sum(n: usize, pairs: &[(Vec<C64>, Vec<C64>)]) -> SkewC<f64> {
    pairs.iter().fold(SkewC::zero(n), |acc, (w, z)| acc.add(&SkewC::wedge(w, z)))
}

fn riem_q_raw(ten: &LyhTensors, rm: &RiemCurvature, u: &SkewC<f64>, w: &[C64]) -> (C64, f64) {
    let n = ten.dim;
    let um = u.matrix();
    let (mut mw, mut pw, mut ru) = (ZERO, ZERO, ZERO);
    for i in 0..n {
        for j in 0..n {
            mw += ten.m[(i, j)] * w[i] * w[j].conj();
            for k in 0..n {
                pw += ten.p_at(i, j, k) * w[k] * um[(i, j)].conj() * 0.5;
                for l in 0..n {
                    ru += um[(i, j)] * um[(k, l)].conj() * (0.25 * rm.get(i, j, k, l));
                }
            }
        }
    }
    let scale = mw.norm() + 2.0 * pw.norm() + ru.norm();
    (mw + pw + pw.conj() + ru, scale)
}

/// `Q̃(W ⊕ U) = ⟨M(W), W̄⟩ + 2 Re⟨P(W), Ū⟩ + ⟨Rm(U), Ū⟩` for
/// `U = Σ_μ W_μ ∧ Z_μ` given as pairs `(W_μ, Z_μ)` with the last `W_μ = W`.
pub fn eval_qtilde_rf(
    ten: &LyhTensors,
    rm: &RiemCurvature,
    w: &[C64],
    pairs: &[(Vec<C64>, Vec<C64>)],
) -> Result<f64> {
    expect_variant(ten, LyhVariant::Riemannian, rm.n())?;
    match pairs.last() {
        Some((x, _)) if close(x, w) => {}
        _ => return Err(LyhError::Precondition("the last pair of U must be W ∧ Z".into())),
    }
    let (q, scale) = riem_q_raw(ten, rm, &wedge_sum(rm.n(), pairs), w);
    reality(q, scale)
}

/// `(𝒵_Z)_{cd} = M_{cd} + P_{dac} Z̄^a + P_{cad} Z^a + R_{Z c Z̄ d}`.
pub fn z_matrix_riem(ten: &LyhTensors, rm: &RiemCurvature, z: &[C64]) -> CMat {
    let n = ten.dim;
    CxMatrix::from_fn(n, n, |c, d| {
        let mut acc = ten.m[(c, d)];
        for a in 0..n {
            acc += ten.p_at(d, a, c) * z[a].conj() + ten.p_at(c, a, d) * z[a];
            for b in 0..n {
                acc += z[a] * z[b].conj() * rm.get(a, c, b, d);
            }
        }
        acc
    })
}

/// `(𝒵_Z)_{cd} W^c W̄^d`.
pub fn eval_z_riem(ten: &LyhTensors, rm: &RiemCurvature, w: &[C64], z: &[C64]) -> Result<f64> {
    expect_variant(ten, LyhVariant::Riemannian, rm.n())?;
    let zz = z_matrix_riem(ten, rm, z);
    let n = ten.dim;
    let mut acc = ZERO;
    for c in 0..n {
        for d in 0..n {
            acc += zz[(c, d)] * w[c] * w[d].conj();
        }
    }
    reality(acc, zz.max_abs() * w.iter().map(|x| x.norm_sqr()).sum::<f64>())
}

/// Hermitian matrix of the form on `(vec U, W)`: `Q = zᴴ H z`.
pub fn q_matrix(ten: &LyhTensors, rm: &CurvatureOp) -> Result<CMat> {
    let n = ten.dim;
    let (k, rows): (CMat, Vec<(usize, usize)>) = match (ten.variant, rm) {
        (LyhVariant::Kahler, CurvatureOp::Kahler(r)) if r.m() == n => {
            (r.operator_matrix(), (0..n * n).map(|x| (x / n, x % n)).collect())
        }
        (LyhVariant::Riemannian, CurvatureOp::Riem(r)) if r.n() == n => (r.operator_matrix(), pair_list(n)),
        _ => return Err(LyhError::Parameter("curvature does not match the LYH tensors".into())),
    };
    let du = rows.len();
    // ⟨P(W), Ū⟩ = Σ conj(u_x) C[x, k] W^k.
    let cross = |x: usize, k: usize| {
        let (i, j) = rows[x];
        match ten.variant {
            LyhVariant::Kahler => ten.p_at(k, i, j),
            LyhVariant::Riemannian => ten.p_at(i, j, k),
        }
    };
    Ok(CxMatrix::from_fn(du + n, du + n, |x, y| match (x < du, y < du) {
        (true, true) => k[(x, y)],
        (true, false) => cross(x, y - du),
        (false, true) => cross(y, x - du).conj(),
        // Σ M_{αβ̄} W^α W̄^β = Wᴴ Mᵀ W; the Riemannian M is real symmetric.
        (false, false) => ten.m[(y - du, x - du)],
    }))
}

/// Admissible vector as blocks: column `k` of `first` and `second` is the pair
/// `(X_k, Y_k)` (Kähler) or `(W_k, Z_k)` (Riemannian), the last column being `(W, V)` / `(W, Z_p)`.
struct LyhState {
    first: CMat,
    second: CMat,
}

struct LyhRun {
    value: f64,
    state: LyhState,
    converged: bool,
}

fn state_vector(kahler: bool, dim: usize, st: &LyhState) -> Vec<C64> {
    let rank = st.first.cols();
    let mut z = if kahler {
        (&st.first * &st.second.adjoint()).as_slice().to_vec()
    } else {
        let pairs: Vec<_> = (0..rank)
            .map(|k| {
                let a: Vec<C64> = (0..dim).map(|i| st.first[(i, k)]).collect();
                let b: Vec<C64> = (0..dim).map(|i| st.second[(i, k)]).collect();
                (a, b)
            })
            .collect();
        wedge_sum(dim, &pairs).coords()
    };
    z.extend((0..dim).map(|i| st.first[(i, rank - 1)]));
    z
}

fn rayleigh(h: &CMat, z: &[C64]) -> f64 {
    let n2: f64 = z.iter().map(|x| x.norm_sqr()).sum();
    if n2 == 0.0 {
        return f64::INFINITY;
    }
    let hz = h.mul_vec(z);
    z.iter().zip(&hz).map(|(a, b)| (a.conj() * b).re).sum::<f64>() / n2
}

#[allow(clippy::too_many_arguments)]
fn lyh_search(
    h: &CMat,
    kahler: bool,
    dim: usize,
    rank: usize,
    fixed_w: Option<&[C64]>,
    mut st: LyhState,
    budget: &ConeBudget,
    scale: f64,
) -> LyhRun {
    let du = h.rows() - dim;
    let last = rank - 1;
    let mut value = rayleigh(h, &state_vector(kahler, dim, &st));
    let mut converged = false;
    for _ in 0..budget.max_steps {
        let before = value;
        // Free the first block; with W fixed its last column is s·w.
        let top = block_map(kahler, dim, rank, &st.second, true);
        let free_cols = if fixed_w.is_some() { dim * last + 1 } else { dim * rank };
        let l = CxMatrix::from_fn(du + dim, free_cols, |row, col| {
            let embed = |full_col: usize| {
                if row < du {
                    top[(row, full_col)]
                } else if full_col == (row - du) * rank + last {
                    C64::new(1.0, 0.0)
                } else {
                    ZERO
                }
            };
            match fixed_w {
                None => embed(col),
                Some(w) if col == free_cols - 1 => (0..dim).map(|i| embed(i * rank + last) * w[i]).sum(),
                Some(_) => {
                    let (i, k) = (col / last, col % last);
                    embed(i * rank + k)
                }
            }
        });
        let lh = l.adjoint();
        if let Some((_, x)) = min_generalized(&(&(&lh * h) * &l), &(&lh * &l), 1e-12) {
            let mut first = st.first.clone();
            for i in 0..dim {
                match fixed_w {
                    None => {
                        for k in 0..rank {
                            first[(i, k)] = x[i * rank + k];
                        }
                    }
                    Some(w) => {
                        for k in 0..last {
                            first[(i, k)] = x[i * last + k];
                        }
                        first[(i, last)] = w[i] * x[free_cols - 1];
                    }
                }
            }
            let cand = LyhState { first, second: st.second.clone() };
            let v = rayleigh(h, &state_vector(kahler, dim, &cand));
            if v <= value {
                st = cand;
                value = v;
            }
        }
        // Free the second block together with a scale s on W.
        let top = block_map(kahler, dim, rank, &st.first, false);
        let nc = dim * rank + 1;
        let l = CxMatrix::from_fn(du + dim, nc, |row, col| match (row < du, col < nc - 1) {
            (true, true) => top[(row, col)],
            (false, false) => st.first[(row - du, last)],
            _ => ZERO,
        });
        let lh = l.adjoint();
        if let Some((_, x)) = min_generalized(&(&(&lh * h) * &l), &(&lh * &l), 1e-12) {
            let s = x[nc - 1];
            let xn = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if s.norm() > 1e-10 * xn {
                let y = CxMatrix::from_fn(dim, rank, |i, k| x[i * rank + k]);
                let mut second = if kahler { y.conj() } else { y };
                let mut first = st.first.clone();
                for i in 0..dim {
                    first[(i, last)] *= s;
                    second[(i, last)] /= if kahler { s.conj() } else { s };
                }
                let cand = LyhState { first, second };
                let v = rayleigh(h, &state_vector(kahler, dim, &cand));
                if v <= value {
                    st = cand;
                    value = v;
                }
            }
        }
        for k in 0..last {
            let nf: f64 = (0..dim).map(|i| st.first[(i, k)].norm_sqr()).sum::<f64>().sqrt();
            let ns: f64 = (0..dim).map(|i| st.second[(i, k)].norm_sqr()).sum::<f64>().sqrt();
            if nf > 0.0 && ns > 0.0 {
                let r = (ns / nf).sqrt();
                for i in 0..dim {
                    st.first[(i, k)] *= r;
                    st.second[(i, k)] /= r;
                }
            }
        }
        if (before - value).abs() <= 1e-13 * scale.max(1e-300) {
            converged = true;
            break;
        }
    }
    LyhRun { value, state: st, converged }
}

fn in_verdict(value: f64, exact: bool, restarts: usize) -> ConeVerdict {
    ConeVerdict { status: Status::In, min_value: value, witness: None, restarts_used: restarts, exact }
}

/// Minimizes `Q(U ⊕ W) / (‖U‖² + ‖W‖²)` over admissible pairs: `U` has `p − 1`
/// free decomposable terms plus `W ∧ V̄` (Kähler) or `W ∧ Z_p` (Riemannian).
/// With `fixed_w` the direction of `W` is held fixed.
///
/// The closure of the admissible set contains `W = 0` with `U` of rank `p`,
/// where `Q` reduces to the curvature pairing; that limit is covered by the
/// cone search on `Rm`.
pub fn min_q_admissible(
    ten: &LyhTensors,
    rm: &CurvatureOp,
    p: usize,
    fixed_w: Option<&[C64]>,
    budget: &ConeBudget,
) -> Result<ConeVerdict> {
    let h = q_matrix(ten, rm)?;
    let dim = ten.dim;
    if p == 0 {
        return Err(LyhError::Parameter("rank p must be at least 1".into()));
    }
    if let Some(w) = fixed_w {
        if w.len() != dim || w.iter().all(|z| z.norm() == 0.0) {
            return Err(LyhError::Parameter("fixed W must be a nonzero vector of the right size".into()));
        }
    }
    let norm = hermitian_norm(&h);
    let tol = budget.tol_rel * norm;
    if norm == 0.0 {
        return Ok(in_verdict(0.0, true, 0));
    }
    let du = h.rows() - dim;
    // Restrict to the subspace where W lies along the fixed direction.
    let sub = fixed_w.map(|w| {
        let wn = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        CxMatrix::from_fn(du + dim, du + 1, |r, c| match (r < du, c < du) {
            (true, true) if r == c => C64::new(1.0, 0.0),
            (false, false) => w[r - du] / wn,
            _ => ZERO,
        })
    });
    let restricted = match &sub {
        Some(e) => &(&e.adjoint() * &h) * e,
        None => h.clone(),
    };
    let (lam, v) = min_eigen(&restricted);
    let kahler = ten.variant == LyhVariant::Kahler;
    let collapses = if kahler { p >= dim } else { p > dim / 2 };
    if lam >= -tol || collapses {
        if lam >= -tol {
            return Ok(in_verdict(lam, true, 0));
        }
        let z = match &sub {
            Some(e) => e.mul_vec(&v),
            None => v,
        };
        return Ok(ConeVerdict {
            status: Status::Out,
            min_value: lam,
            witness: Some(Witness::Vector { vector: crate::verdict::vec_to_json(&z) }),
            restarts_used: 0,
            exact: true,
        });
    }
    min_q_search(ten, rm, p, fixed_w, budget)
}

/// The random-restart search behind [`min_q_admissible`] without the exact
/// shortcuts; used to compare the search against the exact collapse.
pub fn min_q_search(
    ten: &LyhTensors,
    rm: &CurvatureOp,
    p: usize,
    fixed_w: Option<&[C64]>,
    budget: &ConeBudget,
) -> Result<ConeVerdict> {
    let h = q_matrix(ten, rm)?;
    let dim = ten.dim;
    if p == 0 {
        return Err(LyhError::Parameter("rank p must be at least 1".into()));
    }
    let norm = hermitian_norm(&h);
    let tol = budget.tol_rel * norm;
    if norm == 0.0 {
        return Ok(in_verdict(0.0, true, 0));
    }
    let kahler = ten.variant == LyhVariant::Kahler;
    let runs: Vec<LyhRun> = (0..budget.restarts)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(budget.seed ^ 0x1f_e5, k as u64);
            let mut first = rng::complex_matrix(&mut r, dim, p);
            let second = rng::complex_matrix(&mut r, dim, p);
            if let Some(w) = fixed_w {
                for i in 0..dim {
                    first[(i, p - 1)] = w[i];
                }
            }
            lyh_search(&h, kahler, dim, p, fixed_w, LyhState { first, second }, budget, norm)
        })
        .collect();
    let converged = runs.iter().any(|r| r.converged);
    let best = runs.into_iter().min_by(|a, b| a.value.total_cmp(&b.value)).expect("restarts >= 1");
    let spec = if kahler { ConeSpec::kahler(dim, p) } else { ConeSpec::riem(dim, p) };
    let boundary = membership(rm, &spec, budget)?;
    let (value, witness) = if boundary.min_value < best.value {
        (boundary.min_value, boundary.witness.clone())
    } else {
        let z = state_vector(kahler, dim, &best.state);
        let zn = z.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let pairs: Vec<(Vec<C64>, Vec<C64>)> = (0..p)
            .map(|k| {
                let a = (0..dim).map(|i| best.state.first[(i, k)] / zn).collect();
                let b = (0..dim).map(|i| best.state.second[(i, k)]).collect();
                (a, b)
            })
            .collect();
        (rayleigh(&h, &z), Some(witness_pairs(&pairs)))
    };
    let status = if value <= -tol {
        Status::Out
    } else if value >= tol && converged && boundary.status == Status::In {
        Status::In
    } else {
        Status::Inconclusive
    };
    Ok(ConeVerdict {
        status,
        min_value: value,
        witness: (status == Status::Out).then_some(witness).flatten(),
        restarts_used: budget.restarts,
        exact: false,
    })
}

/// Normalized value of the LYH form at an admissible witness `[(X_k, Y_k).., (W, V)]`.
pub fn q_witness_value(ten: &LyhTensors, rm: &CurvatureOp, pairs: &[(Vec<C64>, Vec<C64>)]) -> Result<f64> {
    let h = q_matrix(ten, rm)?;
    let dim = ten.dim;
    let kahler = ten.variant == LyhVariant::Kahler;
    let first = CxMatrix::from_fn(dim, pairs.len(), |i, k| pairs[k].0[i]);
    let second = CxMatrix::from_fn(dim, pairs.len(), |i, k| pairs[k].1[i]);
    Ok(rayleigh(&h, &state_vector(kahler, dim, &LyhState { first, second })))
}

/// Whether a normalized minimum is small enough to flag a soliton candidate.
pub fn soliton_candidate(v: &ConeVerdict) -> bool {
    v.status != Status::Out && v.min_value.abs() < SOLITON_THRESHOLD
}

/// Trajectory rows with the homogeneous `min Q` at every snapshot with `t > 0`.
pub fn annotate_min_q(
    traj: &Trajectory<KahlerCurvature>,
    p: usize,
    budget: &ConeBudget,
) -> Result<Vec<TrajectoryRow>> {
    let mut rows = traj.rows();
    for (row, snap) in rows.iter_mut().zip(&traj.snapshots) {
        if snap.t <= 0.0 {
            continue;
        }
        let ten = build_m_p_kahler(&snap.rm, snap.t, &DerivativeData::Homogeneous)?;
        let v = min_q_admissible(&ten, &CurvatureOp::Kahler(snap.rm.clone()), p, None, budget)?;
        row.min_q = Some(v.min_value);
        let mut flags = Vec::new();
        if soliton_candidate(&v) {
            flags.push("soliton-candidate");
        }
        if v.status == Status::Out {
            flags.push("lyh-violated");
        }
        row.flags = flags.join(";");
    }
    Ok(rows)
}

/// Both sides of the reduction of the evolved LYH form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExtensionCheck {
    /// Direct index-sum evaluation of the reaction terms.
    pub direct: f64,
    /// The block trace expression.
    pub trace_form: f64,
    /// `trace(A₁A₂)` (Kähler) or `trace(B₁B₂)` (Riemannian).
    pub trace_12: f64,
    /// `trace(A₃Ā₃)` or `trace(B₃B̄₃)`.
    pub trace_33: f64,
    /// The square term (Kähler; zero in the Riemannian reduction).
    pub square: f64,
    pub defect: f64,
}

fn trace_prod(a: &CMat, b: &CMat) -> C64 {
    let n = a.rows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Kähler reduction at `U = Σ_μ X_μ ∧ Ȳ_μ`, `W = X_p`, `V = Y_p` (pairs in that order).
pub fn extension_consistency_kahler(
    ten: &LyhTensors,
    rm: &KahlerCurvature,
    pairs: &[(Vec<C64>, Vec<C64>)],
) -> Result<ExtensionCheck> {
    expect_variant(ten, LyhVariant::Kahler, rm.m())?;
    let m = ten.dim;
    let p = pairs.len();
    if p == 0 {
        return Err(LyhError::Parameter("need at least the pair (W, V)".into()));
    }
    let u = OneOneVector::from_pairs(m, pairs.to_vec())?;
    let u = u.matrix();
    let w = &pairs[p - 1].0;
    let r = |a, b, c, d| rm.get(a, b, c, d);
    let pp = |a, b, c| ten.p_at(a, b, c);
    let pb = |a, b, c| ten.p_bar(a, b, c);

    let mut d = ZERO;
    for a in 0..m {
        for b in 0..m {
            for g in 0..m {
                for x in 0..m {
                    d += r(a, b, g, x) * ten.m[(x, g)] * w[a] * w[b].conj();
                    d -= pb(a, x, g) * pp(x, b, g) * w[a] * w[b].conj();
                    for y in 0..m {
                        d += r(a, b, x, y) * pp(y, x, g) * u[(b, g)].conj() * w[a];
                        d += r(a, b, x, y) * pb(y, x, g) * u[(a, g)] * w[b].conj();
                        d -= r(a, x, g, y) * pp(x, b, y) * u[(b, g)].conj() * w[a];
                        d -= r(x, b, y, g) * pb(a, x, y) * u[(a, g)] * w[b].conj();
                        for e in 0..m {
                            d += r(a, e, x, y) * r(y, x, g, b) * u[(a, b)] * u[(e, g)].conj();
                            d -= r(a, x, g, y) * r(x, b, y, e) * u[(a, b)] * u[(e, g)].conj();
                        }
                    }
                }
            }
        }
    }
    for x in 0..m {
        for g in 0..m {
            let mut tt = ZERO;
            for a in 0..m {
                tt += pp(a, x, g) * w[a];
                for e in 0..m {
                    tt += r(a, x, g, e) * u[(a, e)];
                }
            }
            d += tt.norm_sqr();
        }
    }

    let (xs, ys): (Vec<&Vec<C64>>, Vec<&Vec<C64>>) = pairs.iter().map(|(x, y)| (x, y)).unzip();
    let r4 = |x: &[C64], y: &[C64], g: usize, e: usize| {
        let mut acc = ZERO;
        for a in 0..m {
            for b in 0..m {
                acc += x[a] * y[b].conj() * r(a, b, g, e);
            }
        }
        acc
    };
    let n = p * m;
    let a1 = CxMatrix::from_fn(n, n, |i, j| r4(xs[i / m], xs[j / m], i % m, j % m));
    let z = z_matrix(ten, rm, ys[p - 1]);
    let a2 = CxMatrix::from_fn(n, n, |i, j| {
        let (nu, dd, mu, gg) = (i / m, i % m, j / m, j % m);
        let mut v = r4(ys[nu], ys[mu], dd, gg);
        if nu == p - 1 && mu == p - 1 {
            return z[(dd, gg)];
        }
        if mu == p - 1 {
            v += (0..m).map(|e| pp(dd, gg, e) * ys[nu][e]).sum::<C64>();
        }
        if nu == p - 1 {
            v += (0..m).map(|e| pb(dd, gg, e) * ys[mu][e].conj()).sum::<C64>();
        }
        v
    });
    let a3 = CxMatrix::from_fn(n, n, |i, j| {
        let (mu, gg, nu, dd) = (i / m, i % m, j / m, j % m);
        let mut v = ZERO;
        for a in 0..m {
            for c in 0..m {
                v += xs[mu][a] * ys[nu][c] * r(a, gg, c, dd);
            }
            if nu == p - 1 {
                v += xs[mu][a] * pb(a, gg, dd);
            }
        }
        v
    });
    let t12 = trace_prod(&a1, &a2);
    let t33 = trace_prod(&a3, &a3.conj());
    let mut square = 0.0;
    for a in 0..m {
        for b in 0..m {
            let mut v = (0..m).map(|e| w[e] * pp(e, b, a)).sum::<C64>();
            for (x, y) in pairs {
                v += r4(x, y, a, b);
            }
            square += v.norm_sqr();
        }
    }
    let trace_form = t12 - t33 + square;
    let scale = d.norm().max(t12.norm()).max(t33.norm()).max(1.0);
    Ok(ExtensionCheck {
        direct: reality(d, scale)?,
        trace_form: reality(trace_form, scale)?,
        trace_12: t12.re,
        trace_33: t33.re,
        square,
        defect: (d - trace_form).norm(),
    })
}

/// Riemannian reduction at `U = Σ_μ W_μ ∧ Z_μ` with `W_p = W` (pairs `(W_μ, Z_μ)`):
/// the four reaction terms against `2(trace(B₁B₂) − trace(B₃B̄₃))`.
pub fn extension_consistency_riem(
    ten: &LyhTensors,
    rm: &RiemCurvature,
    pairs: &[(Vec<C64>, Vec<C64>)],
) -> Result<ExtensionCheck> {
    expect_variant(ten, LyhVariant::Riemannian, rm.n())?;
    let n = ten.dim;
    let p = pairs.len();
    if p == 0 {
        return Err(LyhError::Parameter("need at least the pair (W, Z)".into()));
    }
    // The reaction terms use `U^{ab}` of the half-normalized wedge `½(W^aZ^b − W^bZ^a)`,
    // the convention under which `R_{abcd}U^{ab}Ū^{cd}` is the pairing above.
    let u = wedge_sum(n, pairs).matrix().scale_re(0.5);
    let w = &pairs[p - 1].0;
    let r = |a, b, c, d| rm.get(a, b, c, d);
    let pp = |a, b, c| ten.p_at(a, b, c);

    let mut d = ZERO;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for e in 0..n {
                    d += ten.m[(c, e)] * (2.0 * r(a, c, b, e)) * w[a] * w[b].conj();
                    d -= pp(a, c, e) * pp(b, e, c) * w[a] * w[b].conj() * 2.0;
                    for f in 0..n {
                        let x = pp(e, b, f) * (8.0 * r(a, e, c, f)) * w[c] * u[(a, b)].conj();
                        d += C64::new(x.re, 0.0);
                        for g in 0..n {
                            d += u[(a, b)] * u[(c, e)].conj() * (4.0 * r(a, f, c, g) * r(b, f, e, g));
                        }
                    }
                }
            }
        }
    }

    let (ws, zs): (Vec<&Vec<C64>>, Vec<&Vec<C64>>) = pairs.iter().map(|(x, y)| (x, y)).unzip();
    let r4 = |x: &[C64], c: usize, y: &[C64], e: usize| {
        let mut acc = ZERO;
        for a in 0..n {
            for b in 0..n {
                acc += x[a] * y[b] * r(a, c, b, e);
            }
        }
        acc
    };
    let conj = |v: &[C64]| v.iter().map(|z| z.conj()).collect::<Vec<_>>();
    let zbar: Vec<Vec<C64>> = zs.iter().map(|z| conj(z)).collect();
    let wbar: Vec<Vec<C64>> = ws.iter().map(|z| conj(z)).collect();
    let hat = |v: &[C64], dd: usize, cc: usize| (0..n).map(|a| pp(dd, a, cc) * v[a]).sum::<C64>();
    let dim = p * n;
    let b1 = CxMatrix::from_fn(dim, dim, |i, j| r4(ws[i / n], i % n, &wbar[j / n], j % n));
    let zz = z_matrix_riem(ten, rm, zs[p - 1]);
    let b2 = CxMatrix::from_fn(dim, dim, |i, j| {
        let (nu, dd, mu, cc) = (i / n, i % n, j / n, j % n);
        if nu == p - 1 && mu == p - 1 {
            return zz[(cc, dd)];
        }
        let mut v = r4(&zbar[nu], dd, zs[mu], cc);
        if mu == p - 1 {
            v += hat(&zbar[nu], dd, cc);
        }
        if nu == p - 1 {
            v += hat(zs[mu], cc, dd);
        }
        v
    });
    let b3 = CxMatrix::from_fn(dim, dim, |i, j| {
        let (mu, cc, nu, dd) = (i / n, i % n, j / n, j % n);
        let mut v = r4(ws[mu], cc, &zbar[nu], dd);
        if nu == p - 1 {
            v += hat(ws[mu], cc, dd);
        }
        v
    });
    let t12 = trace_prod(&b1, &b2);
    let t33 = trace_prod(&b3, &b3.conj());
    let trace_form = (t12 - t33) * 2.0;
    let scale = d.norm().max(t12.norm()).max(t33.norm()).max(1.0);
    Ok(ExtensionCheck {
        direct: reality(d, scale)?,
        trace_form: reality(trace_form, scale)?,
        trace_12: t12.re,
        trace_33: t33.re,
        square: 0.0,
        defect: (d - trace_form).norm(),
    })
}
