//! Algebraic Kähler curvature tensors `R_{ij̄kl̄}` in a unitary frame.

use crate::error::{LyhError, Result};
use crate::scalar::C64;
use crate::tensor::linalg::CMat;
use crate::tensor::CxMatrix;
use serde::{Deserialize, Serialize};

const ZERO: C64 = C64::new(0.0, 0.0);

/// `R_{ij̄kl̄}` with `R_{ij̄kl̄} = R_{kj̄il̄} = R_{il̄kj̄}` and `conj R_{ij̄kl̄} = R_{jīlk̄}`.
#[derive(Clone, Debug, PartialEq)]
pub struct KahlerCurvature {
    m: usize,
    r: Vec<C64>,
}

/// An element `α = Σ α^{il̄} e_i ∧ ē_l` of `Λ^{1,1}`, optionally with a
/// decomposable representation `Σ X_k ∧ Ȳ_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneOneVector {
    coeffs: CMat,
    pairs: Option<Vec<(Vec<C64>, Vec<C64>)>>,
}

impl OneOneVector {
    pub fn from_matrix(coeffs: CMat) -> Result<Self> {
        if !coeffs.is_square() {
            return Err(LyhError::Dimension(
                "(1,1)-vector coefficients must be square".into(),
            ));
        }
        Ok(Self {
            coeffs,
            pairs: None,
        })
    }

    /// `Σ X_k ∧ Ȳ_k`, i.e. `α^{il̄} = Σ_k X_k^i conj(Y_k^l)`.
    pub fn from_pairs(m: usize, pairs: Vec<(Vec<C64>, Vec<C64>)>) -> Result<Self> {
        if pairs.iter().any(|(x, y)| x.len() != m || y.len() != m) {
            return Err(LyhError::Dimension(format!(
                "pair vectors must lie in C^{m}"
            )));
        }
        let coeffs = CxMatrix::from_fn(m, m, |i, l| {
            pairs.iter().map(|(x, y)| x[i] * y[l].conj()).sum()
        });
        Ok(Self {
            coeffs,
            pairs: Some(pairs),
        })
    }

    pub fn m(&self) -> usize {
        self.coeffs.rows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.coeffs
    }

    pub fn pairs(&self) -> Option<&[(Vec<C64>, Vec<C64>)]> {
        self.pairs.as_deref()
    }

    /// Largest deviation between the stored coefficients and the reassembled pairs.
    pub fn reassembly_residual(&self) -> f64 {
        match &self.pairs {
            None => 0.0,
            Some(p) => {
                let again = Self::from_pairs(self.m(), p.clone()).expect("validated");
                (&again.coeffs - &self.coeffs).max_abs()
            }
        }
    }

    /// Row-major coefficient vector `a_{(i,l)} = α^{il̄}`.
    pub fn vec(&self) -> Vec<C64> {
        self.coeffs.as_slice().to_vec()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.frobenius_norm()
    }
}

impl KahlerCurvature {
    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            r: vec![ZERO; m * m * m * m],
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.m + j) * self.m + k) * self.m + l
    }

    /// Fills from `f(i, j, k, l)` and projects onto the symmetry subspace.
    pub fn from_fn_projected(
        m: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> C64,
    ) -> Self {
        let mut out = Self::zeros(m);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let a = out.at(i, j, k, l);
                        out.r[a] = f(i, j, k, l);
                    }
                }
            }
        }
        out.project()
    }

    /// Fills from `f` and rejects the result unless it already has the symmetries.
    pub fn from_fn_checked(
        m: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> C64,
    ) -> Result<Self> {
        let mut out = Self::zeros(m);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let a = out.at(i, j, k, l);
                        out.r[a] = f(i, j, k, l);
                    }
                }
            }
        }
        out.check()?;
        Ok(out)
    }

    /// Orthogonal projection onto the tensors with the Kähler symmetries: the
    /// average over the group generated by `i↔k`, `j↔l` and the conjugate swap,
    /// written orbit by orbit so that related entries agree bit for bit.
    pub fn project(&self) -> Self {
        let m = self.m;
        let mut out = Self::zeros(m);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let key = [i, j, k, l];
                        let orb = orbit(key);
                        if orb.iter().map(|(x, _)| *x).min() != Some(key) {
                            continue;
                        }
                        let mut v = orb
                            .iter()
                            .map(|&(q, c)| {
                                let x = self.get(q[0], q[1], q[2], q[3]);
                                if c {
                                    x.conj()
                                } else {
                                    x
                                }
                            })
                            .sum::<C64>()
                            / 8.0;
                        if orb
                            .iter()
                            .any(|&(q, c)| c && orb.iter().any(|&(q2, c2)| !c2 && q2 == q))
                        {
                            v.im = 0.0;
                        }
                        for (q, c) in orb {
                            let a = out.at(q[0], q[1], q[2], q[3]);
                            out.r[a] = if c { v.conj() } else { v };
                        }
                    }
                }
            }
        }
        out
    }

    /// Largest violation of the pair symmetries and the reality condition.
    pub fn symmetry_residual(&self) -> f64 {
        let m = self.m;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let v = self.get(i, j, k, l);
                        worst = worst
                            .max((v - self.get(k, j, i, l)).norm())
                            .max((v - self.get(i, l, k, j)).norm())
                            .max((v.conj() - self.get(j, i, l, k)).norm());
                    }
                }
            }
        }
        worst
    }

    fn check(&self) -> Result<()> {
        let res = self.symmetry_residual();
        if res > 1e-12 * self.max_abs().max(1.0) {
            return Err(LyhError::Invariant(format!(
                "Kähler curvature symmetries violated by {res:.3e}"
            )));
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.r[self.at(i, j, k, l)]
    }

    pub fn max_abs(&self) -> f64 {
        self.r.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Wraps raw components without any symmetry check.
    pub(crate) fn from_raw(m: usize, r: Vec<C64>) -> Self {
        debug_assert_eq!(r.len(), m * m * m * m);
        Self { m, r }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            m: self.m,
            r: self.r.iter().map(|z| z * c).collect(),
        }
    }

    pub fn axpy(&self, c: f64, o: &Self) -> Result<Self> {
        if self.m != o.m {
            return Err(LyhError::Dimension(format!(
                "curvatures on C^{} and C^{}",
                self.m, o.m
            )));
        }
        Ok(Self {
            m: self.m,
            r: self.r.iter().zip(&o.r).map(|(a, b)| a + b * c).collect(),
        })
    }

    /// Hermitian operator matrix on `Λ^{1,1} ≅ C^{m²}`: `pairing(α, α) = aᴴ K a`
    /// with `a = α.vec()`, `K[(i,l),(j,k)] = conj R_{ij̄kl̄} = R_{jīlk̄}`.
    pub fn operator_matrix(&self) -> CMat {
        let m = self.m;
        CxMatrix::from_fn(m * m, m * m, |row, col| {
            let (i, l) = (row / m, row % m);
            let (j, k) = (col / m, col % m);
            self.get(j, i, l, k)
        })
    }

    /// Operator norm of [`Self::operator_matrix`].
    pub fn op_norm(&self) -> f64 {
        crate::tensor::linalg::hermitian_norm(&self.operator_matrix())
    }

    /// `⟨Rm(α), β̄⟩ = Σ R_{ij̄kl̄} α^{il̄} conj(β^{jk̄})`.
    pub fn pairing(&self, a: &OneOneVector, b: &OneOneVector) -> Result<C64> {
        if a.m() != self.m || b.m() != self.m {
            return Err(LyhError::Dimension(
                "(1,1)-vector and curvature dimensions differ".into(),
            ));
        }
        let (am, bm) = (a.matrix(), b.matrix());
        let m = self.m;
        let mut acc = ZERO;
        for i in 0..m {
            for l in 0..m {
                let x = am[(i, l)];
                if x == ZERO {
                    continue;
                }
                for j in 0..m {
                    for k in 0..m {
                        acc += self.get(i, j, k, l) * x * bm[(j, k)].conj();
                    }
                }
            }
        }
        Ok(acc)
    }

    /// `R_{XX̄YȲ}`.
    pub fn bisectional(&self, x: &[C64], y: &[C64]) -> C64 {
        let m = self.m;
        let mut acc = ZERO;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        acc += self.get(i, j, k, l) * x[i] * x[j].conj() * y[k] * y[l].conj();
                    }
                }
            }
        }
        acc
    }

    /// Multilinear evaluation `R(A, B̄, C, D̄) = Σ R_{ij̄kl̄} A^i conj(B^j) C^k conj(D^l)`.
    pub fn eval4(&self, a: &[C64], b: &[C64], c: &[C64], d: &[C64]) -> C64 {
        let m = self.m;
        let mut acc = ZERO;
        for i in 0..m {
            for j in 0..m {
                let ab = a[i] * b[j].conj();
                if ab == ZERO {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        acc += self.get(i, j, k, l) * ab * c[k] * d[l].conj();
                    }
                }
            }
        }
        acc
    }

    /// `R_{ij̄} = Σ_k R_{ij̄kk̄}`.
    pub fn ricci(&self) -> CMat {
        let m = self.m;
        CxMatrix::from_fn(m, m, |i, j| (0..m).map(|k| self.get(i, j, k, k)).sum())
    }

    pub fn scalar(&self) -> f64 {
        self.ricci().trace().re
    }

    /// Curvature in the frame `e'_i = Σ_a U_{ai} e_a`.
    pub fn conjugate_by(&self, u: &CMat) -> Result<Self> {
        let m = self.m;
        if u.rows() != m || u.cols() != m {
            return Err(LyhError::Dimension("frame change must be m×m".into()));
        }
        // Contract one slot at a time.
        let mut cur = self.r.clone();
        for slot in 0..4 {
            let mut next = vec![ZERO; cur.len()];
            for idx in 0..cur.len() {
                let mut digits = [
                    idx / (m * m * m),
                    (idx / (m * m)) % m,
                    (idx / m) % m,
                    idx % m,
                ];
                let new = digits[slot];
                let mut acc = ZERO;
                for a in 0..m {
                    digits[slot] = a;
                    let src = ((digits[0] * m + digits[1]) * m + digits[2]) * m + digits[3];
                    let w = if slot % 2 == 0 {
                        u[(a, new)]
                    } else {
                        u[(a, new)].conj()
                    };
                    acc += w * cur[src];
                }
                next[idx] = acc;
            }
            cur = next;
        }
        Ok(Self { m, r: cur })
    }

    /// Wire format storing one representative per symmetry orbit.
    pub fn to_json(&self) -> KahlerJson {
        let m = self.m;
        let mut entries = Vec::new();
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let key = [i, j, k, l];
                        if orbit(key).iter().map(|(x, _)| *x).min() != Some(key) {
                            continue;
                        }
                        let v = self.get(i, j, k, l);
                        if v != ZERO {
                            entries.push((i + 1, j + 1, k + 1, l + 1, v.re, v.im));
                        }
                    }
                }
            }
        }
        KahlerJson { m, entries }
    }

    pub fn from_json(j: &KahlerJson) -> Result<Self> {
        let m = j.m;
        let mut out = Self::zeros(m);
        for &(i, jj, k, l, re, im) in &j.entries {
            if [i, jj, k, l].iter().any(|&x| x == 0 || x > m) {
                return Err(LyhError::Serde(format!("index outside 1..={m}")));
            }
            let v = C64::new(re, im);
            for (key, conj) in orbit([i - 1, jj - 1, k - 1, l - 1]) {
                let a = out.at(key[0], key[1], key[2], key[3]);
                out.r[a] = if conj { v.conj() } else { v };
            }
        }
        out.check()?;
        Ok(out)
    }
}

/// The symmetry orbit of an index tuple, flagging images related by conjugation.
fn orbit(k: [usize; 4]) -> [([usize; 4], bool); 8] {
    let [i, j, a, l] = k;
    [
        ([i, j, a, l], false),
        ([a, j, i, l], false),
        ([i, l, a, j], false),
        ([a, l, i, j], false),
        ([j, i, l, a], true),
        ([l, i, j, a], true),
        ([j, a, l, i], true),
        ([l, a, j, i], true),
    ]
}

/// `{m, entries: [[i, j, k, l, re, im], ...]}`, 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KahlerJson {
    pub m: usize,
    pub entries: Vec<(usize, usize, usize, usize, f64, f64)>,
}

impl Serialize for KahlerCurvature {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for KahlerCurvature {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        KahlerCurvature::from_json(&KahlerJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}
