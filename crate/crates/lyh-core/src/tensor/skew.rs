//! Complexified skew matrices `so(n, C) ≅ Λ²(C^n)` and their Lie calculus.
//!
//! `Λ²(C^n)` is identified with `so(n, C)` by `Z ∧ W ↦ Z Wᵀ − W Zᵀ`. The
//! bilinear pairing is `⟨A, B⟩ = −½ tr(AB)`, for which the elementary
//! generators `E_ab = e_a e_bᵀ − e_b e_aᵀ` (`a < b`) are orthonormal.

use crate::error::{LyhError, Result};
use crate::scalar::{ci, cone, czero, Cx, Real};
use crate::tensor::matrix::CxMatrix;

/// Complex `n×n` matrix with `A = −Aᵀ` (plain transpose).
#[derive(Clone, Debug, PartialEq)]
pub struct SkewC<T: Real> {
    mat: CxMatrix<T>,
}

impl<T: Real> SkewC<T> {
    /// Wraps `mat` after checking `A + Aᵀ = 0` to `tol`.
    pub fn new(mat: CxMatrix<T>, tol: T) -> Result<Self> {
        if !mat.is_square() {
            return Err(LyhError::Dimension("skew matrix must be square".into()));
        }
        let n = mat.rows();
        for i in 0..n {
            for j in 0..=i {
                if (mat[(i, j)] + mat[(j, i)]).norm() > tol {
                    return Err(LyhError::Invariant(format!(
                        "entry ({i},{j}) breaks skew symmetry"
                    )));
                }
            }
        }
        Ok(Self { mat })
    }

    /// Skew part `(A − Aᵀ)/2` of any square matrix.
    pub fn skew_part(mat: &CxMatrix<T>) -> Self {
        let half = T::lit(0.5);
        let n = mat.rows();
        Self {
            mat: CxMatrix::from_fn(n, n, |i, j| (mat[(i, j)] - mat[(j, i)]) * half),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            mat: CxMatrix::zeros(n, n),
        }
    }

    /// `Z ∧ W ↦ Z Wᵀ − W Zᵀ`.
    pub fn wedge(z: &[Cx<T>], w: &[Cx<T>]) -> Self {
        let n = z.len();
        Self {
            mat: CxMatrix::from_fn(n, n, |i, j| z[i] * w[j] - w[i] * z[j]),
        }
    }

    /// Elementary generator `E_ab` for `a < b`.
    pub fn elementary(n: usize, a: usize, b: usize) -> Self {
        let mut mat = CxMatrix::zeros(n, n);
        mat[(a, b)] = cone();
        mat[(b, a)] = -cone::<T>();
        Self { mat }
    }

    /// Vector of coordinates in the orthonormal basis `E_ab`, `a < b` lexicographic.
    pub fn coords(&self) -> Vec<Cx<T>> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for a in 0..n {
            for b in a + 1..n {
                out.push(self.mat[(a, b)]);
            }
        }
        out
    }

    pub fn from_coords(n: usize, c: &[Cx<T>]) -> Self {
        let mut mat = CxMatrix::zeros(n, n);
        let mut k = 0;
        for a in 0..n {
            for b in a + 1..n {
                mat[(a, b)] = c[k];
                mat[(b, a)] = -c[k];
                k += 1;
            }
        }
        Self { mat }
    }

    pub fn n(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &CxMatrix<T> {
        &self.mat
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        Self {
            mat: self.mat.scale(s),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            mat: &self.mat + &o.mat,
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            mat: self.mat.conj(),
        }
    }

    /// Bilinear pairing `−½ tr(AB)`.
    pub fn pair(&self, o: &Self) -> Cx<T> {
        (&self.mat * &o.mat).trace() * T::lit(-0.5)
    }

    pub fn norm(&self) -> T {
        self.pair(&self.conj()).re.max(T::zero()).sqrt()
    }

    pub fn is_skew(&self, tol: T) -> bool {
        Self::new(self.mat.clone(), tol).is_ok()
    }
}

/// Dimension of `so(n)`.
pub fn so_dim(n: usize) -> usize {
    n * (n - 1) / 2
}

/// `ad_v(w) = [v, w] = vw − wv`.
pub fn ad<T: Real>(v: &SkewC<T>, w: &SkewC<T>) -> Result<SkewC<T>> {
    if v.n() != w.n() {
        return Err(LyhError::Dimension(format!(
            "ad of so({}) on so({})",
            v.n(),
            w.n()
        )));
    }
    Ok(SkewC {
        mat: v.mat.commutator(&w.mat)?,
    })
}

/// Matrix of `ad_v` in the basis `E_ab`: column `α` holds the coordinates of `[v, b^α]`.
pub fn ad_matrix<T: Real>(v: &SkewC<T>) -> CxMatrix<T> {
    let n = v.n();
    let d = so_dim(n);
    let mut out = CxMatrix::zeros(d, d);
    let mut col = 0;
    for a in 0..n {
        for b in a + 1..n {
            let img = ad(v, &SkewC::elementary(n, a, b))
                .expect("same dimension")
                .coords();
            for (row, z) in img.into_iter().enumerate() {
                out[(row, col)] = z;
            }
            col += 1;
        }
    }
    out
}

/// Largest deviation `‖e^{ad_v}(w) − Exp(v) w Exp(−v)‖` over the basis `w = E_ab`.
pub fn exp_ad_residual<T: Real>(v: &SkewC<T>) -> Result<T> {
    let n = v.n();
    if n > 8 {
        return Err(LyhError::Dimension(format!(
            "dense exponentials limited to n <= 8, got {n}"
        )));
    }
    let lhs = ad_matrix(v).expm()?;
    let g = v.mat.expm()?;
    let g_inv = v.mat.scale_re(-T::one()).expm()?;
    let mut worst = T::zero();
    let mut col = 0;
    for a in 0..n {
        for b in a + 1..n {
            let w = SkewC::elementary(n, a, b);
            let conj = SkewC {
                mat: &(&g * &w.mat) * &g_inv,
            }
            .coords();
            let err = conj
                .iter()
                .enumerate()
                .fold(T::zero(), |acc, (row, z)| {
                    acc + (*z - lhs[(row, col)]).norm_sqr()
                })
                .sqrt();
            worst = worst.max(err);
            col += 1;
        }
    }
    Ok(worst)
}

/// `e^{ad_v} = Ad(Exp v)` checked on a basis of test elements.
pub fn exp_ad_consistency<T: Real>(v: &SkewC<T>, tol: T) -> bool {
    matches!(exp_ad_residual(v), Ok(r) if r <= tol)
}

/// Real `(1,1)`-vector with coefficients `c` as a `2m×2m` skew matrix commuting with `J`:
/// `[[a, −b], [b, a]]`, `a = c − cᵀ`, `b = −i(c + cᵀ)`.
pub fn oneone_to_skew<T: Real>(c: &CxMatrix<T>) -> SkewC<T> {
    let m = c.rows();
    let a = |i: usize, j: usize| c[(i, j)] - c[(j, i)];
    let b = |i: usize, j: usize| -ci::<T>() * (c[(i, j)] + c[(j, i)]);
    let mat = CxMatrix::from_fn(2 * m, 2 * m, |i, j| match (i < m, j < m) {
        (true, true) => a(i, j),
        (true, false) => -b(i, j - m),
        (false, true) => b(i - m, j),
        (false, false) => a(i - m, j - m),
    });
    SkewC { mat }
}

/// The complex structure `J = [[0, Id], [−Id, 0]]` on `R^{2m}`.
pub fn complex_structure<T: Real>(m: usize) -> CxMatrix<T> {
    CxMatrix::from_fn(2 * m, 2 * m, |i, j| {
        if i < m && j == i + m {
            cone()
        } else if i >= m && j + m == i {
            -cone::<T>()
        } else {
            czero()
        }
    })
}
