//! Trace inequalities for Hermitian forms on `C^N ⊕ C^N` of the shape
//! `S(X, Y) = A_{ij̄}X^iX̄^j + 2 Re(B_{ij}X^iY^j + D_{ij̄}X^iȲ^j) + C_{ij̄}Y^iȲ^j`.
//!
//! [`mok_check`] reports the Frobenius form `Σ A_{ij̄}C_{jī}` against
//! `max(Σ|B_{ij}|², Σ|D_{ij̄}|²)`; [`mok_check_traced`] the trace-paired form,
//! which is the one that follows from positivity of `S`.

use crate::error::{LyhError, Result};
use crate::rng;
use crate::scalar::C64;
use crate::tensor::linalg::CMat;
use crate::tensor::CxMatrix;
use nalgebra::DMatrix;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Debug)]
pub struct MokForm {
    pub a: CMat,
    pub b: CMat,
    pub d: CMat,
    pub c: CMat,
}

impl MokForm {
    pub fn new(a: CMat, b: CMat, d: CMat, c: CMat) -> Result<Self> {
        let n = a.rows();
        if [&a, &b, &d, &c].iter().any(|x| x.rows() != n || x.cols() != n) {
            return Err(LyhError::Dimension("all four blocks must be N×N".into()));
        }
        let scale = [&a, &c].iter().fold(1.0f64, |s, x| s.max(x.max_abs()));
        if !a.is_hermitian(1e-12 * scale) || !c.is_hermitian(1e-12 * scale) {
            return Err(LyhError::Invariant("A and C must be Hermitian".into()));
        }
        Ok(Self { a, b, d, c })
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn value(&self, x: &[C64], y: &[C64]) -> f64 {
        let n = self.n();
        let (mut diag, mut cross) = (ZERO, ZERO);
        for i in 0..n {
            for j in 0..n {
                diag += self.a[(i, j)] * x[i] * x[j].conj() + self.c[(i, j)] * y[i] * y[j].conj();
                cross += self.b[(i, j)] * x[i] * y[j] + self.d[(i, j)] * x[i] * y[j].conj();
            }
        }
        diag.re + 2.0 * cross.re
    }

    /// Symmetric matrix of `S` as a real quadratic form on `(Re X, Im X, Re Y, Im Y)`, by polarization.
    pub fn real_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let dim = 4 * n;
        let eval = |v: &[f64]| {
            let x: Vec<C64> = (0..n).map(|i| C64::new(v[i], v[n + i])).collect();
            let y: Vec<C64> = (0..n).map(|i| C64::new(v[2 * n + i], v[3 * n + i])).collect();
            self.value(&x, &y)
        };
        let unit = |k: usize| {
            let mut v = vec![0.0; dim];
            v[k] = 1.0;
            v
        };
        let diag: Vec<f64> = (0..dim).map(|k| eval(&unit(k))).collect();
        DMatrix::from_fn(dim, dim, |k, l| {
            if k == l {
                diag[k]
            } else {
                let mut v = unit(k);
                v[l] = 1.0;
                0.5 * (eval(&v) - diag[k] - diag[l])
            }
        })
    }

    /// Smallest eigenvalue of [`Self::real_matrix`].
    pub fn min_eigenvalue(&self) -> f64 {
        self.real_matrix().symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn scale(&self) -> f64 {
        [&self.a, &self.b, &self.d, &self.c].iter().fold(0.0f64, |s, x| s.max(x.max_abs()))
    }

    /// Random positive form `Σ|a·X + b·Ȳ|² + Σ|a'·X + b'·Y|²`; the first family
    /// feeds `B`, the second `D`, with random ranks up to `2N` each.
    pub fn random_psd(n: usize, seed: u64) -> Self {
        let mut r = rng::stream(rng::derive_seed(seed, "mok"), 0);
        let (mut a, mut b, mut d, mut c) =
            (CxMatrix::zeros(n, n), CxMatrix::zeros(n, n), CxMatrix::zeros(n, n), CxMatrix::zeros(n, n));
        let k1 = (rng::uniform(&mut r, 0.0, (2 * n + 1) as f64) as usize).min(2 * n);
        let k2 = (rng::uniform(&mut r, 0.0, (2 * n + 1) as f64) as usize).min(2 * n);
        for family in 0..2 {
            for _ in 0..if family == 0 { k1 } else { k2 } {
                let u = rng::complex_vec(&mut r, n);
                let v = rng::complex_vec(&mut r, n);
                for i in 0..n {
                    for j in 0..n {
                        a[(i, j)] += u[i] * u[j].conj();
                        if family == 0 {
                            // |u·X + v·Ȳ|²
                            c[(j, i)] += v[i] * v[j].conj();
                            b[(i, j)] += u[i] * v[j].conj();
                        } else {
                            // |u·X + v·Y|²
                            c[(i, j)] += v[i] * v[j].conj();
                            d[(i, j)] += u[i] * v[j].conj();
                        }
                    }
                }
            }
        }
        Self { a, b, d, c }
    }
}

/// `(Σ A_{ij̄}C_{jī}, max(Σ|B_{ij}|², Σ|D_{ij̄}|²))`.
pub fn mok_check(s: &MokForm) -> (f64, f64) {
    let n = s.n();
    let mut lhs = ZERO;
    for i in 0..n {
        for j in 0..n {
            lhs += s.a[(i, j)] * s.c[(j, i)];
        }
    }
    let sq = |m: &CMat| m.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>();
    (lhs.re, sq(&s.b).max(sq(&s.d)))
}

/// The trace-paired form of the inequality:
/// `(Σ A_{ij̄}C_{jī}, max(Re Σ B_{ij} conj(B_{ji}), |Σ D_{ij̄} D_{jī}|))`.
///
/// Unlike the Frobenius form of [`mok_check`], this holds for every positive
/// `S`; `|X¹ + Y²|²` has `Σ A_{ij̄}C_{jī} = 0` but `Σ|D|² = 1`.
pub fn mok_check_traced(s: &MokForm) -> (f64, f64) {
    let n = s.n();
    let (lhs, _) = mok_check(s);
    let (mut bb, mut dd) = (ZERO, ZERO);
    for i in 0..n {
        for j in 0..n {
            bb += s.b[(i, j)] * s.b[(j, i)].conj();
            dd += s.d[(i, j)] * s.d[(j, i)];
        }
    }
    (lhs, bb.re.max(dd.norm()))
}
