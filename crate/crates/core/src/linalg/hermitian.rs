use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense Hermitian matrix. Writes go through [`HermitianMatrix::set`], which
/// keeps `X[j][i] = conj(X[i][j])` and a real diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> HermitianMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex::new(T::zero(), T::zero()); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, Complex::new(T::one(), T::zero()));
        }
        m
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, Complex::new(d, T::zero()));
        }
        m
    }

    /// Builds from the upper triangle: `f(i, j)` is called for `i <= j`.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds from full rows, rejecting inputs that are not Hermitian to `1e-12`.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("rows must form a square matrix".into()));
        }
        let tol = T::floor_tol(1e-12);
        for i in 0..n {
            for j in i..n {
                let d = rows[i][j] - rows[j][i].conj();
                if d.norm() > tol * (T::one() + rows[i][j].norm()) {
                    return Err(Error::Dimension(format!("entry ({i},{j}) breaks Hermitian symmetry")));
                }
            }
        }
        Ok(Self::from_upper(n, |i, j| rows[i][j]))
    }

    /// `sum_i w_i q_i q_i^*`.
    pub fn from_outer_sum<'a>(n: usize, terms: impl IntoIterator<Item = (T, &'a [Complex<T>])>) -> Self {
        let mut m = Self::zeros(n);
        for (w, q) in terms {
            for i in 0..n {
                for j in i..n {
                    let v = m.get(i, j) + q[i] * q[j].conj() * w;
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.n + j]
    }

    /// Sets entry `(i, j)` and its mirror. Diagonal imaginary parts are dropped.
    pub fn set(&mut self, i: usize, j: usize, z: Complex<T>) {
        let n = self.n;
        if i == j {
            self.data[i * n + i] = Complex::new(z.re, T::zero());
        } else {
            self.data[i * n + j] = z;
            self.data[j * n + i] = z.conj();
        }
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self.get(i, i).re)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    /// Real Frobenius inner product `trace(A^* B)`.
    pub fn inner(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).fold(T::zero(), |acc, (a, b)| acc + (a.conj() * b).re)
    }

    /// `q^* X q`, real for Hermitian `X`.
    pub fn quadratic_form(&self, q: &[Complex<T>]) -> T {
        let xq = self.mul_vec(q);
        q.iter().zip(&xq).fold(T::zero(), |acc, (a, b)| acc + (a.conj() * b).re)
    }

    pub fn mul_vec(&self, q: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|i| (0..self.n).fold(Complex::new(T::zero(), T::zero()), |acc, j| acc + self.get(i, j) * q[j]))
            .collect()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, s: T) -> Self {
        Self { n: self.n, data: self.data.iter().map(|z| z * s).collect() }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect() }
    }

    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        Self::from_upper(idx.len(), |i, j| self.get(idx[i], idx[j]))
    }
}

/// Dense real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSymmetric<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> RealSymmetric<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// `F^T F` for a row-major `rows x n` factor.
    pub fn gram(factor: &[T], rows: usize, n: usize) -> Self {
        Self::from_upper(n, |i, j| (0..rows).fold(T::zero(), |acc, r| acc + factor[r * n + i] * factor[r * n + j]))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, v| acc + *v * *v).sqrt()
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.n).map(|i| (0..self.n).fold(T::zero(), |acc, j| acc + self.get(i, j) * v[j])).collect()
    }

    pub(crate) fn as_slice(&self) -> &[T] {
        &self.data
    }
}

/// Realification `L(X) = [[Re X, -Im X], [Im X, Re X]]`.
pub fn realify<T: Scalar>(x: &HermitianMatrix<T>) -> RealSymmetric<T> {
    let n = x.dim();
    let mut out = RealSymmetric::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = x.get(i, j);
            out.data[i * 2 * n + j] = z.re;
            out.data[i * 2 * n + (j + n)] = -z.im;
            out.data[(i + n) * 2 * n + j] = z.im;
            out.data[(i + n) * 2 * n + (j + n)] = z.re;
        }
    }
    out
}

/// Maps a `2n x 2n` real symmetric `W` to the Hermitian `X^W`:
/// `X_kk = W_kk + W_k'k'`, `Re X_km = W_km + W_k'm'`, `Im X_km = W_mk' - W_km'`
/// with `k' = k + n`.
///
/// The imaginary sign matches `s_km = W_mk' - W_km'` of the rectangular
/// formulation, so `W = u u^T` with `u = (e, f)` gives `X^W = V V^*` for
/// `V = e + jf`.
pub fn w_to_x<T: Scalar>(w: &RealSymmetric<T>) -> Result<HermitianMatrix<T>> {
    if !w.dim().is_multiple_of(2) {
        return Err(Error::Dimension(format!("W must have even dimension, got {}", w.dim())));
    }
    let n = w.dim() / 2;
    Ok(HermitianMatrix::from_upper(n, |k, m| {
        let re = w.get(k, m) + w.get(k + n, m + n);
        let im = w.get(m, k + n) - w.get(k, m + n);
        Complex::new(re, im)
    }))
}
