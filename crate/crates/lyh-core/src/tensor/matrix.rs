//! Dense complex matrices over a generic real scalar.

use crate::error::{LyhError, Result};
use crate::scalar::{cone, czero, Cx, Real};
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CxMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Cx<T>>,
    hermitian: bool,
}

impl<T: Real> CxMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![czero(); rows * cols],
            hermitian: false,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cx<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self {
            rows,
            cols,
            data,
            hermitian: false,
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Cx<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LyhError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            data,
            hermitian: false,
        })
    }

    /// Marks the matrix Hermitian after checking `a_ij = conj(a_ji)` to `tol`.
    pub fn into_hermitian(mut self, tol: T) -> Result<Self> {
        if !self.is_hermitian(tol) {
            return Err(LyhError::Invariant("matrix is not Hermitian".into()));
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn hermitian_flag(&self) -> bool {
        self.hermitian
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        Self {
            data: self.data.iter().map(|&z| z * s).collect(),
            hermitian: false,
            ..*self
        }
    }

    pub fn scale_re(&self, s: T) -> Self {
        Self {
            data: self.data.iter().map(|&z| z * s).collect(),
            ..*self
        }
    }

    pub fn trace(&self) -> Cx<T> {
        (0..self.rows.min(self.cols)).fold(czero(), |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(T::zero(), |acc, j| acc + self[(i, j)].norm()))
            .fold(T::zero(), T::max)
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (0..=i).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol))
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(LyhError::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == czero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] = out.data[i * rhs.cols + j] + a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(v.len(), self.cols, "vector length");
        (0..self.rows)
            .map(|i| (0..self.cols).fold(czero(), |acc, j| acc + self[(i, j)] * v[j]))
            .collect()
    }

    /// `self * rhs - rhs * self`.
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        Ok(&self.matmul(rhs)? - &rhs.matmul(self)?)
    }

    /// Matrix exponential by Taylor series with scaling and squaring.
    pub fn expm(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(LyhError::Dimension("expm of a non-square matrix".into()));
        }
        let n = self.rows;
        let norm = self.norm_inf();
        let mut squarings = 0u32;
        let mut scaled = self.clone();
        if norm > T::lit(0.5) {
            squarings = (norm / T::lit(0.5)).log2().ceil().to_u32().unwrap_or(0);
            scaled = self.scale_re(T::lit(0.5).powi(squarings as i32));
        }
        let mut result = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..=30 {
            term = term
                .matmul(&scaled)?
                .scale_re(T::one() / T::from(k).unwrap());
            result = &result + &term;
            if term.max_abs() <= T::epsilon() * result.max_abs() {
                break;
            }
        }
        for _ in 0..squarings {
            result = result.matmul(&result)?;
        }
        Ok(result)
    }
}

impl<T: Real> Index<(usize, usize)> for CxMatrix<T> {
    type Output = Cx<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Cx<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for CxMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx<T> {
        self.hermitian = false;
        &mut self.data[i * self.cols + j]
    }
}

fn zip_with<T: Real>(
    a: &CxMatrix<T>,
    b: &CxMatrix<T>,
    f: impl Fn(Cx<T>, Cx<T>) -> Cx<T>,
) -> CxMatrix<T> {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols), "shape mismatch");
    CxMatrix {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect(),
        hermitian: false,
    }
}

impl<T: Real> Add for &CxMatrix<T> {
    type Output = CxMatrix<T>;
    fn add(self, rhs: Self) -> CxMatrix<T> {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl<T: Real> Sub for &CxMatrix<T> {
    type Output = CxMatrix<T>;
    fn sub(self, rhs: Self) -> CxMatrix<T> {
        zip_with(self, rhs, |x, y| x - y)
    }
}

impl<T: Real> Neg for &CxMatrix<T> {
    type Output = CxMatrix<T>;
    fn neg(self) -> CxMatrix<T> {
        self.scale_re(-T::one())
    }
}

impl<T: Real> Mul for &CxMatrix<T> {
    type Output = CxMatrix<T>;
    fn mul(self, rhs: Self) -> CxMatrix<T> {
        self.matmul(rhs).expect("matmul shape")
    }
}
