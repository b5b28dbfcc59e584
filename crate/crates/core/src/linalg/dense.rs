use num_complex::Complex;

use crate::scalar::Scalar;

/// Row-major dense real matrix, used where symmetry is not available.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, v| acc + *v * *v).sqrt()
    }
}

/// Block realification of an arbitrary (not necessarily Hermitian) square
/// complex matrix given row-major.
pub fn realify_general<T: Scalar>(n: usize, x: &[Complex<T>]) -> DenseMatrix<T> {
    assert_eq!(x.len(), n * n, "expected an n x n matrix");
    let mut out = DenseMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = x[i * n + j];
            out.set(i, j, z.re);
            out.set(i, j + n, -z.im);
            out.set(i + n, j, z.im);
            out.set(i + n, j + n, z.re);
        }
    }
    out
}
