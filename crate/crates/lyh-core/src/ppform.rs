//! Real `(p,p)`-forms at a point, Lelong positivity, and the pointwise algebra
//! (`Λ`, `L`, `ι`, `*`, norms) on them.
//!
//! Coefficients follow the comma convention: `φ_{I,J}` on sorted multi-indices,
//! with
//!
//! ```text
//! φ = (1/(p!)²) Σ φ_{i1..ip, j̄1..j̄p} (i dz^{i1}∧dz̄^{j1}) ∧ .. ∧ (i dz^{ip}∧dz̄^{jp})
//!   = i^p (−1)^{p(p−1)/2} Σ_{I<, J<} φ_{I,J} dz^I ∧ dz̄^J .
//! ```
//!
//! In this convention `ω^p` has coefficients `p! δ_{IJ}` and a unitary frame
//! evaluates it to `p!`. The plain exterior coefficient of `dz^I∧dz̄^J` differs
//! by the factor [`plain_factor`]; [`PPForm::to_ext`] and [`PPForm::from_ext`]
//! are the only places the two conventions meet.

use crate::error::{LyhError, Result};
use crate::rng;
use crate::scalar::{i_pow, sign_pow, C64};
use crate::tensor::exterior::{bidegree, ExtForm};
use crate::tensor::linalg::{min_eigen, min_generalized, orthonormalize, CMat};
use crate::tensor::multi_index::{binomial, factorial, SubsetTable};
use crate::tensor::CxMatrix;
use crate::verdict::{vec_from_json, vec_to_json, ConeVerdict, Status, Witness};
use crate::Form;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// `i^p (−1)^{p(p−1)/2}`: plain exterior coefficient per comma-convention coefficient.
pub fn plain_factor(p: usize) -> C64 {
    i_pow::<f64>(p as i64) * sign_pow::<f64>((p * p.saturating_sub(1) / 2) as i64)
}

/// Which slots an interior product contracts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Holomorphic,
    Antiholomorphic,
}

#[derive(Clone, Debug)]
pub struct PPForm {
    m: usize,
    p: usize,
    table: SubsetTable,
    /// Row-major `N×N`, `N = C(m,p)`; entry `(r, s)` is `φ_{I_r, J_s}`.
    coeffs: Vec<C64>,
}

impl PartialEq for PPForm {
    fn eq(&self, o: &Self) -> bool {
        self.m == o.m && self.p == o.p && self.coeffs == o.coeffs
    }
}

impl PPForm {
    pub fn zero(m: usize, p: usize) -> Self {
        assert!(p <= m && m <= 8, "need p <= m <= 8");
        let table = SubsetTable::new(m, p);
        let n = table.len();
        Self {
            m,
            p,
            table,
            coeffs: vec![ZERO; n * n],
        }
    }

    /// Builds from sorted-index coefficients, checking the reality condition
    /// `conj φ_{I,J} = φ_{J,I}` to `1e-10` relative.
    pub fn from_fn(
        m: usize,
        p: usize,
        mut f: impl FnMut(&[usize], &[usize]) -> C64,
    ) -> Result<Self> {
        if p > m || m > 8 {
            return Err(LyhError::Degree(format!("(p,p) = ({p},{p}) on C^{m}")));
        }
        let mut out = Self::zero(m, p);
        let n = out.table.len();
        for r in 0..n {
            let i = out.table.indices(r);
            for s in 0..n {
                out.coeffs[r * n + s] = f(&i, &out.table.indices(s));
            }
        }
        out.check_real()?;
        Ok(out)
    }

    /// `(φ + φ^†)/2` on the coefficient matrix; the identity on real forms.
    pub fn from_matrix_realified(m: usize, p: usize, h: &CMat) -> Result<Self> {
        let mut out = Self::zero(m, p);
        let n = out.table.len();
        if h.rows() != n || h.cols() != n {
            return Err(LyhError::Dimension(format!(
                "expected {n}x{n} coefficient matrix"
            )));
        }
        for r in 0..n {
            for s in 0..n {
                out.coeffs[r * n + s] = (h[(r, s)] + h[(s, r)].conj()) * 0.5;
            }
        }
        Ok(out)
    }

    /// `ω^p`.
    pub fn omega_pow(m: usize, p: usize) -> Self {
        let mut out = Self::zero(m, p);
        let n = out.table.len();
        let f = factorial(p);
        for r in 0..n {
            out.coeffs[r * n + r] = C64::new(f, 0.0);
        }
        out
    }

    /// `∧_k (i α_k ∧ ᾱ_k)` for `(1,0)`-forms `α_k = Σ a_k^j dz^j`; strongly positive.
    pub fn elementary_positive(m: usize, alphas: &[Vec<C64>]) -> Self {
        let p = alphas.len();
        let a = CxMatrix::from_fn(m, p, |j, k| alphas[k][j]);
        let mut out = Self::zero(m, p);
        let d = minors(&out.table, &a);
        let n = out.table.len();
        for r in 0..n {
            for s in 0..n {
                out.coeffs[r * n + s] = d[r] * d[s].conj();
            }
        }
        out
    }

    fn check_real(&self) -> Result<()> {
        let n = self.table.len();
        let scale = self.max_abs().max(1.0);
        for r in 0..n {
            for s in r..n {
                if (self.coeffs[r * n + s].conj() - self.coeffs[s * n + r]).norm() > 1e-10 * scale {
                    return Err(LyhError::Invariant(format!(
                        "reality fails at ({:?}, {:?})",
                        one_based(&self.table.indices(r)),
                        one_based(&self.table.indices(s))
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn table(&self) -> &SubsetTable {
        &self.table
    }

    /// Number of sorted multi-indices `C(m, p)`.
    pub fn dim(&self) -> usize {
        self.table.len()
    }

    pub fn get_ranked(&self, r: usize, s: usize) -> C64 {
        self.coeffs[r * self.dim() + s]
    }

    /// `φ_{I,J}` for arbitrary ordered (0-based) index lists, with the permutation sign.
    pub fn coeff(&self, i: &[usize], j: &[usize]) -> C64 {
        match (self.table.locate(i), self.table.locate(j)) {
            (Some((r, a)), Some((s, b))) => self.get_ranked(r, s) * (a * b) as f64,
            _ => ZERO,
        }
    }

    /// Sets `φ_{I,J}` and its conjugate partner `φ_{J,I}`.
    pub fn set_pair(&mut self, i: &[usize], j: &[usize], v: C64) -> Result<()> {
        let (r, a) = self
            .table
            .locate(i)
            .ok_or_else(|| LyhError::Degree(format!("bad index {i:?}")))?;
        let (s, b) = self
            .table
            .locate(j)
            .ok_or_else(|| LyhError::Degree(format!("bad index {j:?}")))?;
        let v = v * (a * b) as f64;
        if r == s && v.im.abs() > 1e-12 * v.norm().max(1.0) {
            return Err(LyhError::Invariant(
                "diagonal coefficient must be real".into(),
            ));
        }
        let n = self.dim();
        self.coeffs[r * n + s] = v;
        self.coeffs[s * n + r] = v.conj();
        Ok(())
    }

    /// The Hermitian coefficient matrix `H_{rs} = φ_{I_r, J_s}`.
    pub fn matrix(&self) -> CMat {
        let n = self.dim();
        CxMatrix::from_fn(n, n, |r, s| self.coeffs[r * n + s])
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    fn same_shape(&self, o: &Self) -> Result<()> {
        if self.m != o.m || self.p != o.p {
            return Err(LyhError::Dimension(format!(
                "({},{}) form on C^{} against ({},{}) on C^{}",
                self.p, self.p, self.m, o.p, o.p, o.m
            )));
        }
        Ok(())
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|z| *z *= c);
        out
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.axpy(1.0, o)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.axpy(-1.0, o)
    }

    /// `self + c·o`.
    pub fn axpy(&self, c: f64, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&o.coeffs) {
            *a += b * c;
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// `|φ|² = Σ_{I,J sorted} |φ_{I,J}|²`, so that `|ω| = √m`.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Real inner product `Σ φ_{IJ} conj(ψ_{IJ})` (real for real forms).
    pub fn inner(&self, o: &Self) -> Result<f64> {
        self.same_shape(o)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&o.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum())
    }

    /// Exterior-algebra representation (plain coefficients).
    pub fn to_ext(&self) -> Form {
        let mut out = ExtForm::zero(self.m);
        let f = plain_factor(self.p);
        let n = self.dim();
        for r in 0..n {
            for s in 0..n {
                let c = self.coeffs[r * n + s];
                if c != ZERO {
                    out.set(self.table.mask(r) | (self.table.mask(s) << self.m), c * f);
                }
            }
        }
        out
    }

    /// Reads the `(p,p)` component of an exterior form, rejecting other
    /// components larger than `tol` and non-real results.
    pub fn from_ext(form: &Form, p: usize, tol: f64) -> Result<Self> {
        let m = form.m();
        if p > m {
            return Err(LyhError::Degree(format!("p = {p} > m = {m}")));
        }
        let mut out = Self::zero(m, p);
        let f = plain_factor(p).inv();
        let lo = (1u32 << m) - 1;
        for (mask, &c) in form.coeffs().iter().enumerate() {
            let mask = mask as u32;
            if c == ZERO {
                continue;
            }
            if bidegree(m, mask) != (p, p) {
                if c.norm() > tol {
                    return Err(LyhError::Degree(format!(
                        "form has a {:?} component of size {:.3e}",
                        bidegree(m, mask),
                        c.norm()
                    )));
                }
                continue;
            }
            let r = out.table.rank_of_mask(mask & lo).expect("p-subset");
            let s = out.table.rank_of_mask(mask >> m).expect("p-subset");
            let n = out.dim();
            out.coeffs[r * n + s] = c * f;
        }
        out.check_real()?;
        Ok(out)
    }

    /// `Σ φ_{IJ} det(V_I) conj(det(W_J))`: the Lelong pairing extended
    /// sesquilinearly to independent frames `V` (holomorphic) and `W`.
    pub fn eval_pair(&self, v: &CMat, w: &CMat) -> Result<C64> {
        for f in [v, w] {
            if f.rows() != self.m || f.cols() != self.p {
                return Err(LyhError::Dimension(format!(
                    "frame is {}x{}, need {}x{}",
                    f.rows(),
                    f.cols(),
                    self.m,
                    self.p
                )));
            }
        }
        let dv = minors(&self.table, v);
        let dw = minors(&self.table, w);
        Ok(quad(&self.coeffs, &dv, &dw))
    }

    /// `φ(v_1..v_p; v̄_1..v̄_p)`. The imaginary residue is asserted below `1e-12`
    /// relative to `|φ|·Π|v_k|²`.
    pub fn eval(&self, frame: &FrameTuple) -> Result<f64> {
        let v = frame.matrix();
        let z = self.eval_pair(&v, &v)?;
        let scale = self.norm() * frame.vectors().iter().map(|x| norm2(x)).product::<f64>();
        if z.im.abs() > 1e-12 * scale.max(1.0) {
            return Err(LyhError::Invariant(format!(
                "imaginary evaluation residue {:.3e}",
                z.im
            )));
        }
        Ok(z.re)
    }

    /// `Λφ` via `(Λφ)_{I',J'} = Σ_i φ_{iI', iJ'}` in the flat unitary frame.
    pub fn lambda_contract(&self) -> Result<Self> {
        if self.p == 0 {
            return Err(LyhError::Degree("Λ of a (0,0)-form".into()));
        }
        let mut out = Self::zero(self.m, self.p - 1);
        let n = out.dim();
        for r in 0..n {
            let ip = out.table.indices(r);
            for s in 0..n {
                let jp = out.table.indices(s);
                let mut acc = ZERO;
                for i in 0..self.m {
                    let mut a = vec![i];
                    a.extend_from_slice(&ip);
                    let mut b = vec![i];
                    b.extend_from_slice(&jp);
                    acc += self.coeff(&a, &b);
                }
                out.coeffs[r * n + s] = acc;
            }
        }
        Ok(out)
    }

    /// `Λ^k φ`.
    pub fn lambda_pow(&self, k: usize) -> Result<Self> {
        (0..k).try_fold(self.clone(), |f, _| f.lambda_contract())
    }

    /// `ω ∧ φ`.
    pub fn lefschetz(&self) -> Result<Self> {
        if self.p >= self.m {
            return Ok(Self::zero(self.m, self.p));
        }
        Self::from_ext(&self.to_ext().lefschetz(), self.p + 1, 1e-12)
    }

    /// `*φ`, a real `(m−p, m−p)`-form.
    pub fn hodge_star(&self) -> Result<Self> {
        Self::from_ext(&self.to_ext().star(), self.m - self.p, 1e-12)
    }

    /// `ι_V φ` (holomorphic) or `ι_V̄ φ` (antiholomorphic).
    pub fn iota(&self, v: &[C64], side: Side) -> Result<Form> {
        if v.len() != self.m {
            return Err(LyhError::Dimension(format!(
                "vector of length {} on C^{}",
                v.len(),
                self.m
            )));
        }
        if self.p == 0 {
            return Err(LyhError::Degree("interior product of a (0,0)-form".into()));
        }
        let e = self.to_ext();
        Ok(match side {
            Side::Holomorphic => e.iota_holo(v),
            Side::Antiholomorphic => e.iota_anti(v),
        })
    }

    /// `φ_{V,V̄}`: coefficients `φ_{VI, V̄J} = Σ V^a conj(V^b) φ_{aI, bJ}`; equals `i ι_V ι_V̄ φ`.
    pub fn phi_vv(&self, v: &[C64]) -> Result<Self> {
        if self.p == 0 {
            return Err(LyhError::Degree("φ_{V,V̄} of a (0,0)-form".into()));
        }
        let mut out = Self::zero(self.m, self.p - 1);
        let n = out.dim();
        for r in 0..n {
            let ip = out.table.indices(r);
            for s in 0..n {
                let jp = out.table.indices(s);
                let mut acc = ZERO;
                for a in 0..self.m {
                    if v[a] == ZERO {
                        continue;
                    }
                    let mut ia = vec![a];
                    ia.extend_from_slice(&ip);
                    for b in 0..self.m {
                        let mut jb = vec![b];
                        jb.extend_from_slice(&jp);
                        acc += v[a] * v[b].conj() * self.coeff(&ia, &jb);
                    }
                }
                out.coeffs[r * n + s] = acc;
            }
        }
        Ok(out)
    }

    /// The Hermitian matrix `A` of the `J` form on `⊕^p C^m` at the frame `X`:
    /// `A[(ν,l),(μ,k)] = φ_{X_1..(e_k)_μ..X_p, X̄_1..(ē_l)_ν..X̄_p}`, so that
    /// `J(𝔴, 𝔷̄) = 𝔷̄ᵀ A 𝔴`.
    pub fn j_matrix(&self, frame: &FrameTuple) -> Result<CMat> {
        let (m, p) = (self.m, self.p);
        let x = frame.matrix();
        if x.cols() != p || x.rows() != m {
            return Err(LyhError::Dimension("frame length must equal p".into()));
        }
        let subst = |col: usize, e: usize| {
            let mut y = x.clone();
            for a in 0..m {
                y[(a, col)] = if a == e { ONE } else { ZERO };
            }
            minors(&self.table, &y)
        };
        let d: Vec<Vec<Vec<C64>>> = (0..p)
            .map(|mu| (0..m).map(|k| subst(mu, k)).collect())
            .collect();
        Ok(CxMatrix::from_fn(p * m, p * m, |row, col| {
            let (nu, l) = (row / m, row % m);
            let (mu, k) = (col / m, col % m);
            quad(&self.coeffs, &d[mu][k], &d[nu][l])
        }))
    }

    /// Plain exterior coefficient of `dz^I∧dz̄^J`.
    pub fn plain_coeff(&self, i: &[usize], j: &[usize]) -> C64 {
        self.coeff(i, j) * plain_factor(self.p)
    }

    pub fn to_json(&self) -> PPFormJson {
        let n = self.dim();
        let mut entries = Vec::new();
        for r in 0..n {
            for s in 0..n {
                let c = self.coeffs[r * n + s];
                if c != ZERO {
                    entries.push((
                        one_based(&self.table.indices(r)),
                        one_based(&self.table.indices(s)),
                        c.re,
                        c.im,
                    ));
                }
            }
        }
        PPFormJson {
            m: self.m,
            p: self.p,
            entries,
        }
    }

    pub fn from_json(j: &PPFormJson) -> Result<Self> {
        if j.p > j.m || j.m > 8 {
            return Err(LyhError::Serde(format!(
                "invalid (m, p) = ({}, {})",
                j.m, j.p
            )));
        }
        let mut out = Self::zero(j.m, j.p);
        let n = out.dim();
        for (i, jj, re, im) in &j.entries {
            let zi = zero_based(i, j.m)?;
            let zj = zero_based(jj, j.m)?;
            let r = out
                .table
                .locate(&zi)
                .filter(|(_, s)| *s == 1 && is_sorted(&zi));
            let s = out
                .table
                .locate(&zj)
                .filter(|(_, s)| *s == 1 && is_sorted(&zj));
            match (r, s) {
                (Some((r, _)), Some((s, _))) => out.coeffs[r * n + s] = C64::new(*re, *im),
                _ => {
                    return Err(LyhError::Serde(format!(
                        "entry {i:?},{jj:?} is not a sorted {}-index",
                        j.p
                    )))
                }
            }
        }
        out.check_real()?;
        Ok(out)
    }
}

/// Wire format `{m, p, entries: [[I, J, re, im], ...]}` with 1-based sorted indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PPFormJson {
    pub m: usize,
    pub p: usize,
    pub entries: Vec<(Vec<usize>, Vec<usize>, f64, f64)>,
}

impl Serialize for PPForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PPForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PPFormJson::deserialize(d)?;
        PPForm::from_json(&j).map_err(serde::de::Error::custom)
    }
}

fn one_based(idx: &[usize]) -> Vec<usize> {
    idx.iter().map(|i| i + 1).collect()
}

fn zero_based(idx: &[usize], m: usize) -> Result<Vec<usize>> {
    idx.iter()
        .map(|&i| {
            if i == 0 || i > m {
                Err(LyhError::Serde(format!("index {i} outside 1..={m}")))
            } else {
                Ok(i - 1)
            }
        })
        .collect()
}

fn is_sorted(idx: &[usize]) -> bool {
    idx.windows(2).all(|w| w[0] < w[1])
}

fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `Σ_{r,s} c_{rs} a_r conj(b_s)`.
fn quad(c: &[C64], a: &[C64], b: &[C64]) -> C64 {
    let n = a.len();
    let mut acc = ZERO;
    for r in 0..n {
        if a[r] == ZERO {
            continue;
        }
        let row = &c[r * n..(r + 1) * n];
        let inner: C64 = row.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
        acc += a[r] * inner;
    }
    acc
}

/// Determinant of a small dense matrix (row-major, `k×k`) by partial pivoting.
pub fn small_det(a: &mut [C64], k: usize) -> C64 {
    let mut det = ONE;
    for c in 0..k {
        let piv = (c..k)
            .max_by(|&x, &y| a[x * k + c].norm().total_cmp(&a[y * k + c].norm()))
            .unwrap();
        if a[piv * k + c] == ZERO {
            return ZERO;
        }
        if piv != c {
            for j in 0..k {
                a.swap(piv * k + j, c * k + j);
            }
            det = -det;
        }
        let d = a[c * k + c];
        det *= d;
        for r in c + 1..k {
            let f = a[r * k + c] / d;
            if f != ZERO {
                for j in c..k {
                    let t = a[c * k + j];
                    a[r * k + j] -= f * t;
                }
            }
        }
    }
    det
}

/// Plücker coordinates `det(V_I)` of an `m×p` frame over the sorted `p`-subsets.
pub fn minors(table: &SubsetTable, v: &CMat) -> Vec<C64> {
    let p = table.p();
    let mut buf = vec![ZERO; p * p];
    (0..table.len())
        .map(|r| {
            let rows = table.indices(r);
            for (a, &i) in rows.iter().enumerate() {
                for b in 0..p {
                    buf[a * p + b] = v[(i, b)];
                }
            }
            small_det(&mut buf, p)
        })
        .collect()
}

/// A list of `p` vectors in `C^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameTuple {
    vectors: Vec<Vec<C64>>,
    orthonormal: bool,
}

impl FrameTuple {
    /// Unchecked frame; `orthonormal` is computed to `1e-12`.
    pub fn new(vectors: Vec<Vec<C64>>) -> Result<Self> {
        if let Some(first) = vectors.first() {
            if vectors.iter().any(|v| v.len() != first.len()) {
                return Err(LyhError::Dimension(
                    "frame vectors of unequal length".into(),
                ));
            }
        }
        let orthonormal = gram_deviation(&vectors) <= 1e-12;
        Ok(Self {
            vectors,
            orthonormal,
        })
    }

    /// Requires a Gram matrix equal to the identity to `1e-12`.
    pub fn orthonormal(vectors: Vec<Vec<C64>>) -> Result<Self> {
        let f = Self::new(vectors)?;
        if !f.orthonormal {
            return Err(LyhError::Invariant("frame is not orthonormal".into()));
        }
        Ok(f)
    }

    /// Columns of an `m×p` matrix.
    pub fn from_matrix(v: &CMat) -> Self {
        let vectors = (0..v.cols())
            .map(|k| (0..v.rows()).map(|a| v[(a, k)]).collect())
            .collect();
        Self::new(vectors).expect("columns have equal length")
    }

    /// The first `p` standard basis vectors of `C^m`.
    pub fn standard(m: usize, p: usize) -> Self {
        Self::from_matrix(&CxMatrix::from_fn(
            m,
            p,
            |a, k| if a == k { ONE } else { ZERO },
        ))
    }

    /// Gram–Schmidt of the columns (Q factor of a thin QR).
    pub fn gram_schmidt(&self) -> Self {
        Self::from_matrix(&orthonormalize(&self.matrix()))
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn is_orthonormal(&self) -> bool {
        self.orthonormal
    }

    /// `m×p` matrix whose columns are the frame vectors.
    pub fn matrix(&self) -> CMat {
        let p = self.vectors.len();
        let m = self.vectors.first().map_or(0, |v| v.len());
        CxMatrix::from_fn(m, p, |a, k| self.vectors[k][a])
    }

    pub fn to_witness(&self) -> Witness {
        Witness::Frame {
            vectors: self.vectors.iter().map(|v| vec_to_json(v)).collect(),
        }
    }

    pub fn from_witness(w: &Witness) -> Option<Self> {
        match w {
            Witness::Frame { vectors } => {
                Self::new(vectors.iter().map(vec_from_json).collect()).ok()
            }
            _ => None,
        }
    }
}

fn gram_deviation(v: &[Vec<C64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, x) in v.iter().enumerate() {
        for (b, y) in v.iter().enumerate() {
            let g: C64 = x.iter().zip(y).map(|(s, t)| s * t.conj()).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    worst
}

/// Search budget for [`lelong_positivity`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityBudget {
    pub restarts: usize,
    pub max_sweeps: usize,
    /// Stop a restart once a sweep improves the value by less than this (relative).
    pub conv_tol: f64,
    /// Certificate tolerance relative to `max(|φ|, 1e-300)`.
    pub cert_tol: f64,
    pub seed: u64,
}

impl Default for PositivityBudget {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_sweeps: 500,
            conv_tol: 1e-10,
            cert_tol: 1e-8,
            seed: 0x5eed,
        }
    }
}

struct Descent {
    value: f64,
    frame: CMat,
    converged: bool,
}

/// Block-coordinate descent over unitary frames. Replacing one column `v_k`
/// by `v`, the evaluation is the Hermitian form `conj(v)ᴴ H conj(v)` and the
/// squared norm of the Plücker vector is `conj(v)ᴴ N conj(v)`; the best column
/// is the minimal generalized eigenvector, restricted to the range of `N`.
fn lelong_descent(phi: &PPForm, start: CMat, budget: &PositivityBudget) -> Descent {
    let (m, p) = (phi.m, phi.p);
    let sub = SubsetTable::new(m, p - 1);
    let n = phi.dim();
    let mut v = start;
    let mut value = phi.eval_pair(&v, &v).map(|z| z.re).unwrap_or(f64::INFINITY);
    let scale = phi.norm().max(1e-300);
    let mut converged = false;
    for _ in 0..budget.max_sweeps {
        let before = value;
        for k in 0..p {
            let others = CxMatrix::from_fn(m, p - 1, |a, c| v[(a, if c < k { c } else { c + 1 })]);
            let dm = minors(&sub, &others);
            // z_a[I] = det of V_I with column k replaced by e_a (cofactor expansion).
            let mut z = vec![vec![ZERO; n]; m];
            for (r, zr) in (0..n).map(|r| (r, phi.table.indices(r))) {
                for (pos, &a) in zr.iter().enumerate() {
                    let rest: Vec<usize> = zr.iter().copied().filter(|&x| x != a).collect();
                    let (q, _) = sub.locate(&rest).expect("sorted");
                    let sign = if (pos + k) % 2 == 0 { 1.0 } else { -1.0 };
                    z[a][r] = dm[q] * sign;
                }
            }
            // With u = conj(v): eval = Σ conj(u_a) u_b quad(z_a, z_b).
            let h = CxMatrix::from_fn(m, m, |a, b| quad(&phi.coeffs, &z[a], &z[b]));
            let nn = CxMatrix::from_fn(m, m, |a, b| {
                z[a].iter().zip(&z[b]).map(|(x, y)| x * y.conj()).sum()
            });
            if let Some((lam, u)) = min_generalized(&h, &nn, 1e-12) {
                if lam < value {
                    for a in 0..m {
                        v[(a, k)] = u[a].conj();
                    }
                    v = orthonormalize(&v);
                    value = phi.eval_pair(&v, &v).map(|z| z.re).unwrap_or(value);
                }
            }
        }
        if (before - value).abs() <= budget.conv_tol * scale {
            converged = true;
            break;
        }
    }
    Descent {
        value,
        frame: v,
        converged,
    }
}

/// Minimizes `eval` over unitary frames. `p = 0`, `p = 1`, and `p = m` are
/// decided exactly; other degrees use random-restart descent.
pub fn lelong_positivity(phi: &PPForm, budget: &PositivityBudget) -> ConeVerdict {
    let (m, p) = (phi.m, phi.p);
    let tol = budget.cert_tol * phi.norm().max(1e-300);
    let verdict = |value: f64, frame: CMat, restarts: usize, exact: bool, converged: bool| {
        let status = if value < -tol {
            Status::Out
        } else if exact || converged || value > tol {
            Status::In
        } else {
            Status::Inconclusive
        };
        let witness = (status == Status::Out).then(|| FrameTuple::from_matrix(&frame).to_witness());
        ConeVerdict {
            status,
            min_value: value,
            witness,
            restarts_used: restarts,
            exact,
        }
    };
    if p == 0 {
        return verdict(phi.coeffs[0].re, CxMatrix::zeros(m, 0), 0, true, true);
    }
    if p == m {
        let id = CxMatrix::identity(m);
        return verdict(phi.coeffs[0].re, id, 0, true, true);
    }
    if p == 1 {
        let (lam, u) = min_eigen(&phi.matrix());
        let frame = CxMatrix::from_fn(m, 1, |a, _| u[a].conj());
        let value = phi.eval_pair(&frame, &frame).map(|z| z.re).unwrap_or(lam);
        return verdict(value, frame, 0, true, true);
    }
    let runs: Vec<Descent> = (0..budget.restarts)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(budget.seed, k as u64);
            lelong_descent(phi, rng::unitary_frame(&mut r, m, p), budget)
        })
        .collect();
    let converged = runs.iter().any(|d| d.converged);
    let best = runs
        .into_iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one restart");
    verdict(best.value, best.frame, budget.restarts, false, converged)
}

/// Result of the `|φ| ≤ C_{p,m} |Λφ|` check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub ratio: f64,
    pub constant: f64,
    pub holds: bool,
}

/// Checks `|φ| ≤ c |Λφ|` for a Lelong-positive `φ`; errors on non-positive input.
pub fn lambda_dominance_check(
    phi: &PPForm,
    constant: f64,
    budget: &PositivityBudget,
) -> Result<DominanceReport> {
    let v = lelong_positivity(phi, budget);
    if v.status != Status::In {
        return Err(LyhError::Precondition(format!(
            "dominance check needs a positive form (verdict {}, min {:.3e})",
            v.status, v.min_value
        )));
    }
    let num = phi.norm();
    let den = phi.lambda_contract()?.norm();
    let ratio = if num == 0.0 { 0.0 } else { num / den };
    Ok(DominanceReport {
        ratio,
        constant,
        holds: ratio <= constant,
    })
}

/// Random positive `(p,p)`-form whose coefficient matrix is positive
/// semidefinite (hence Lelong positive): a Wishart matrix of random rank,
/// or a random strongly positive decomposable sum.
pub fn random_positive(r: &mut rng::Stream, m: usize, p: usize) -> PPForm {
    let n = binomial(m, p);
    if rng::uniform(r, 0.0, 1.0) < 0.5 {
        let rank = 1 + (rng::uniform(r, 0.0, n as f64) as usize).min(n - 1);
        let g = rng::complex_matrix(r, n, rank);
        PPForm::from_matrix_realified(m, p, &(&g * &g.adjoint())).expect("square")
    } else {
        let terms = 1 + (rng::uniform(r, 0.0, 4.0) as usize);
        let mut acc = PPForm::zero(m, p);
        for _ in 0..terms {
            let alphas: Vec<Vec<C64>> = (0..p).map(|_| rng::complex_vec(r, m)).collect();
            let w = rng::uniform(r, 0.0, 1.0);
            acc = acc
                .axpy(w, &PPForm::elementary_positive(m, &alphas))
                .expect("same shape");
        }
        acc
    }
}

/// Largest observed `|φ|/|Λφ|` over `samples` random positive forms.
pub fn calibrate_dominance_constant(m: usize, p: usize, samples: usize, seed: u64) -> f64 {
    (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(seed, k as u64);
            let phi = random_positive(&mut r, m, p);
            let den = phi.lambda_contract().expect("p >= 1").norm();
            if den == 0.0 {
                0.0
            } else {
                phi.norm() / den
            }
        })
        .reduce(|| 0.0, f64::max)
}
