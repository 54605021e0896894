//! Real algebraic curvature tensors `R_{abcd}` on `R^n`, with the sign
//! convention `R_{abab}` = sectional curvature of the plane `e_a ∧ e_b`.

use super::kahler::KahlerCurvature;
use crate::error::{LyhError, Result};
use crate::scalar::C64;
use crate::tensor::linalg::CMat;
use crate::tensor::skew::so_dim;
use crate::tensor::{CxMatrix, SkewC};

#[derive(Clone, Debug, PartialEq)]
pub struct RiemCurvature {
    n: usize,
    r: Vec<f64>,
}

impl RiemCurvature {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            r: vec![0.0; n * n * n * n],
        }
    }

    #[inline]
    fn at(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.n + b) * self.n + c) * self.n + d
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.r[self.at(a, b, c, d)]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn from_fn_projected(
        n: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> f64,
    ) -> Self {
        let mut out = Self::zeros(n);
        for idx in 0..out.r.len() {
            let (a, b, c, d) = (
                idx / (n * n * n),
                (idx / (n * n)) % n,
                (idx / n) % n,
                idx % n,
            );
            out.r[idx] = f(a, b, c, d);
        }
        out.project()
    }

    /// Constant sectional curvature `κ`: `R_{abcd} = κ(δ_ac δ_bd − δ_ad δ_bc)`.
    pub fn sphere(n: usize, kappa: f64) -> Self {
        let d = |x: usize, y: usize| if x == y { 1.0 } else { 0.0 };
        let mut out = Self::zeros(n);
        for idx in 0..out.r.len() {
            let (a, b, c, e) = (
                idx / (n * n * n),
                (idx / (n * n)) % n,
                (idx / n) % n,
                idx % n,
            );
            out.r[idx] = kappa * (d(a, c) * d(b, e) - d(a, e) * d(b, c));
        }
        out
    }

    /// Projection onto algebraic curvature tensors: skew in each pair,
    /// symmetric under pair exchange, then `R − ⅓ b(R)` for the Bianchi map `b`.
    pub fn project(&self) -> Self {
        let n = self.n;
        let mut s = Self::zeros(n);
        for idx in 0..s.r.len() {
            let (a, b, c, d) = (
                idx / (n * n * n),
                (idx / (n * n)) % n,
                (idx / n) % n,
                idx % n,
            );
            let g = |w, x, y, z| self.get(w, x, y, z);
            let skew =
                |w, x, y, z| (g(w, x, y, z) - g(x, w, y, z) - g(w, x, z, y) + g(x, w, z, y)) * 0.25;
            s.r[idx] = 0.5 * (skew(a, b, c, d) + skew(c, d, a, b));
        }
        let mut out = Self::zeros(n);
        for idx in 0..out.r.len() {
            let (a, b, c, d) = (
                idx / (n * n * n),
                (idx / (n * n)) % n,
                (idx / n) % n,
                idx % n,
            );
            let bianchi = s.get(a, b, c, d) + s.get(a, c, d, b) + s.get(a, d, b, c);
            out.r[idx] = s.get(a, b, c, d) - bianchi / 3.0;
        }
        out
    }

    /// Largest violation of the skew, pair and first Bianchi symmetries.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for idx in 0..self.r.len() {
            let (a, b, c, d) = (
                idx / (n * n * n),
                (idx / (n * n)) % n,
                (idx / n) % n,
                idx % n,
            );
            let v = self.get(a, b, c, d);
            worst = worst
                .max((v + self.get(b, a, c, d)).abs())
                .max((v + self.get(a, b, d, c)).abs())
                .max((v - self.get(c, d, a, b)).abs())
                .max((v + self.get(a, c, d, b) + self.get(a, d, b, c)).abs());
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.r.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            n: self.n,
            r: self.r.iter().map(|x| x * c).collect(),
        }
    }

    /// `self + c·o`; panics when the dimensions differ.
    pub fn add_scaled(&self, c: f64, o: &Self) -> Self {
        assert_eq!(self.n, o.n, "curvatures of different dimension");
        Self {
            n: self.n,
            r: self.r.iter().zip(&o.r).map(|(a, b)| a + b * c).collect(),
        }
    }

    /// Symmetric operator on `Λ²` in the basis `E_ab` (`a < b`): `Rop[(ab),(cd)] = R_{abcd}`.
    pub fn operator_matrix(&self) -> CMat {
        let pairs = pair_list(self.n);
        let d = pairs.len();
        CxMatrix::from_fn(d, d, |x, y| {
            let ((a, b), (c, e)) = (pairs[x], pairs[y]);
            C64::new(self.get(a, b, c, e), 0.0)
        })
    }

    /// Inverse of [`Self::operator_matrix`] for operators satisfying Bianchi.
    pub fn from_operator(n: usize, op: &CMat) -> Result<Self> {
        let pairs = pair_list(n);
        if op.rows() != pairs.len() || op.cols() != pairs.len() {
            return Err(LyhError::Dimension(format!(
                "operator on so({n}) must be {0}x{0}",
                pairs.len()
            )));
        }
        let mut out = Self::zeros(n);
        for (x, &(a, b)) in pairs.iter().enumerate() {
            for (y, &(c, d)) in pairs.iter().enumerate() {
                let v = op[(x, y)].re;
                for (s, (p, q)) in [(1.0, (a, b)), (-1.0, (b, a))] {
                    for (t, (u, w)) in [(1.0, (c, d)), (-1.0, (d, c))] {
                        let i = out.at(p, q, u, w);
                        out.r[i] = s * t * v;
                    }
                }
            }
        }
        let res = out.symmetry_residual();
        if res > 1e-10 * out.max_abs().max(1.0) {
            return Err(LyhError::Invariant(format!(
                "operator breaks curvature symmetries by {res:.3e}"
            )));
        }
        Ok(out)
    }

    /// `⟨Rm(U), V̄⟩ = ¼ Σ R_{ijkl} U^{ij} conj(V^{kl})`.
    pub fn pairing(&self, u: &SkewC<f64>, v: &SkewC<f64>) -> Result<C64> {
        if u.n() != self.n || v.n() != self.n {
            return Err(LyhError::Dimension(
                "two-vector and curvature dimensions differ".into(),
            ));
        }
        let (su, sv) = (u.coords(), v.coords());
        let op = self.operator_matrix();
        let opv = op.mul_vec(&sv.iter().map(|z| z.conj()).collect::<Vec<_>>());
        Ok(su.iter().zip(&opv).map(|(a, b)| a * b).sum())
    }

    /// `R(Z, W, Z̄, W̄)`-type multilinear evaluation `Σ R_{abcd} A^a B^b C^c D^d`.
    pub fn eval4(&self, a: &[C64], b: &[C64], c: &[C64], d: &[C64]) -> C64 {
        let n = self.n;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let ab = a[i] * b[j];
                for k in 0..n {
                    for l in 0..n {
                        let r = self.get(i, j, k, l);
                        if r != 0.0 {
                            acc += ab * c[k] * d[l] * r;
                        }
                    }
                }
            }
        }
        acc
    }

    /// `Ric_{ac} = Σ_b R_{abcb}`.
    pub fn ricci(&self) -> Vec<Vec<f64>> {
        let n = self.n;
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|c| (0..n).map(|b| self.get(a, b, c, b)).sum())
                    .collect()
            })
            .collect()
    }

    pub fn scalar(&self) -> f64 {
        let ric = self.ricci();
        (0..self.n).map(|a| ric[a][a]).sum()
    }

    /// The underlying real tensor of a Kähler curvature on `R^{2m}` with the
    /// orthonormal basis `(x_1..x_m, y_1..y_m)`, `E_{x_j} = (ε_j + ε̄_j)/√2`,
    /// `E_{y_j} = i(ε_j − ε̄_j)/√2`, `ε_j = ∂/∂z_j`.
    pub fn from_kahler(k: &KahlerCurvature) -> Self {
        let m = k.m();
        let n = 2 * m;
        let basis = real_basis(m);
        let mut out = Self::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let v = complex_extension(k, &basis[a], &basis[b], &basis[c], &basis[d]);
                        let i = out.at(a, b, c, d);
                        out.r[i] = v.re;
                    }
                }
            }
        }
        out
    }
}

/// Real basis vectors expressed in the `(ε_1..ε_m, ε̄_1..ε̄_m)` frame of `C^{2m}`.
pub fn real_basis(m: usize) -> Vec<Vec<C64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(2 * m);
    for j in 0..m {
        let mut v = vec![C64::new(0.0, 0.0); 2 * m];
        v[j] = C64::new(s, 0.0);
        v[m + j] = C64::new(s, 0.0);
        out.push(v);
    }
    for j in 0..m {
        let mut v = vec![C64::new(0.0, 0.0); 2 * m];
        v[j] = C64::new(0.0, s);
        v[m + j] = C64::new(0.0, -s);
        out.push(v);
    }
    out
}

/// Complex-multilinear extension of a Kähler curvature to `C^{2m} = T^{1,0} ⊕ T^{0,1}`,
/// vectors given by their `(ε, ε̄)` components. Only slot patterns with one
/// `(1,0)` and one `(0,1)` vector in each pair survive:
/// `F(ε_i, ε̄_j, ε̄_l, ε_k) = F(ε̄_j, ε_i, ε_k, ε̄_l) = R_{ij̄kl̄}` and the two
/// patterns with the second pair reversed carry a minus sign.
pub fn complex_extension(k: &KahlerCurvature, a: &[C64], b: &[C64], c: &[C64], d: &[C64]) -> C64 {
    let m = k.m();
    let hol = |v: &[C64]| v[..m].to_vec();
    let anti = |v: &[C64]| v[m..].to_vec();
    // eval4(A, B̄, C, D̄) conjugates its 2nd and 4th arguments, so pass conjugates.
    let cj = |v: Vec<C64>| v.into_iter().map(|z| z.conj()).collect::<Vec<_>>();
    let t = |x: &[C64], y: &[C64], z: &[C64], w: &[C64]| {
        k.eval4(x, &cj(y.to_vec()), z, &cj(w.to_vec()))
    };
    // (h, a, a, h): F(A_h, B_a, C_a, D_h) = R(A, B̄, D, C̄)
    let hah = t(&hol(a), &anti(b), &hol(d), &anti(c));
    // (a, h, h, a): F(A_a, B_h, C_h, D_a) = R(B, Ā, C, D̄)
    let ahha = t(&hol(b), &anti(a), &hol(c), &anti(d));
    // (h, a, h, a) and (a, h, a, h) carry a minus sign.
    let haha = t(&hol(a), &anti(b), &hol(c), &anti(d));
    let ahah = t(&hol(b), &anti(a), &hol(d), &anti(c));
    hah + ahha - haha - ahah
}

/// `(a, b)` with `a < b` in lexicographic order: the `E_ab` coordinate order.
pub fn pair_list(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(so_dim(n));
    for a in 0..n {
        for b in a + 1..n {
            out.push((a, b));
        }
    }
    out
}
