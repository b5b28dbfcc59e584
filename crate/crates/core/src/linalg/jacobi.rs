use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{DenseMatrix, RealSymmetric};

pub const JACOBI_MAX_SWEEPS: usize = 40;
const JACOBI_REL_TOL: f64 = 1e-12;

/// Eigenpairs of a real symmetric matrix, eigenvalues nonincreasing.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    /// Column-major: eigenvector `i` is `vectors[i * n .. (i + 1) * n]`.
    pub vectors: Vec<T>,
    pub sweeps: usize,
}

impl<T: Scalar> SymmetricEigen<T> {
    pub fn vector(&self, i: usize) -> &[T] {
        let n = self.values.len();
        &self.vectors[i * n..(i + 1) * n]
    }
}

/// Cyclic Jacobi eigenvalue iteration.
///
/// Stops once the off-diagonal Frobenius norm falls below
/// `1e-12 * ||A||_F`; fails after [`JACOBI_MAX_SWEEPS`] sweeps.
pub fn symmetric_eigen<T: Scalar>(a: &RealSymmetric<T>) -> Result<SymmetricEigen<T>> {
    let n = a.dim();
    let mut m = a.as_slice().to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let norm = a.frobenius_norm();
    let target = T::floor_tol(JACOBI_REL_TOL) * norm;
    let two = T::of(2.0);

    let off = |m: &[T]| {
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    let mut residual = off(&m);
    while residual > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Numerical(format!(
                "Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps (off-diagonal norm {residual:e}, target {target:e})"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (two * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(T::one()));
                let c = T::one() / t.hypot(T::one());
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                m[p * n + q] = T::zero();
                m[q * n + p] = T::zero();
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        residual = off(&m);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].partial_cmp(&m[i * n + i]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &i in &order {
        vectors.extend((0..n).map(|k| v[k * n + i]));
    }
    Ok(SymmetricEigen { values, vectors, sweeps })
}

/// Singular values by one-sided (Hestenes) Jacobi, nonincreasing.
///
/// Works on columns directly, so exactly rank-deficient inputs produce
/// singular values at roundoff level instead of the square root of roundoff
/// that an eigensolve of `A^T A` would give.
pub fn singular_values<T: Scalar>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    let (rows, cols) = (a.rows, a.cols);
    // column-major working copy
    let mut u: Vec<T> = (0..cols).flat_map(|j| (0..rows).map(move |i| (i, j))).map(|(i, j)| a.get(i, j)).collect();
    let eps = T::epsilon();
    let two = T::of(2.0);
    // columns below this squared norm are numerically zero
    let negligible = {
        let f = a.frobenius_norm() * eps;
        f * f
    };
    let max_sweeps = 4 * JACOBI_MAX_SWEEPS;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for r in 0..rows {
                    let x = u[i * rows + r];
                    let y = u[j * rows + r];
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if alpha <= negligible || beta <= negligible || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (two * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(T::one()));
                let c = T::one() / t.hypot(T::one());
                let s = c * t;
                for r in 0..rows {
                    let x = u[i * rows + r];
                    let y = u[j * rows + r];
                    u[i * rows + r] = c * x - s * y;
                    u[j * rows + r] = s * x + c * y;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical("one-sided Jacobi SVD did not converge".into()));
    }
    let mut sv: Vec<T> = (0..cols)
        .map(|j| (0..rows).fold(T::zero(), |acc, r| acc + u[j * rows + r] * u[j * rows + r]).sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(sv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_is_fixed_point() {
        let a = RealSymmetric::<f64>::from_upper(3, |i, j| if i == j { [2.0, -1.0, 5.0][i] } else { 0.0 });
        let e = symmetric_eigen(&a).unwrap();
        assert_eq!(e.values, vec![5.0, 2.0, -1.0]);
        assert_eq!(e.sweeps, 0);
    }

    #[test]
    fn two_by_two_closed_form() {
        let a = RealSymmetric::<f64>::from_upper(2, |i, j| if i == j { 1.0 } else { 2.0 });
        let e = symmetric_eigen(&a).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] + 1.0).abs() < 1e-14);
        let v = e.vector(1);
        assert!((v[0] + v[1]).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_random_matrix() {
        let vals = [0.3, -1.7, 2.2, 0.9, -0.4, 1.1, 0.05, -2.5, 0.6, 1.9];
        let a = RealSymmetric::<f64>::from_upper(4, |i, j| vals[(i * 3 + j * 7) % vals.len()]);
        let e = symmetric_eigen(&a).unwrap();
        for i in 0..4 {
            let v = e.vector(i);
            let av = a.mul_vec(v);
            for k in 0..4 {
                assert!((av[k] - e.values[i] * v[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_values_of_rank_one() {
        let mut a = DenseMatrix::<f64>::zeros(3, 3);
        let (x, y) = ([1.0, 2.0, -1.0], [0.5, -0.3, 2.0]);
        for i in 0..3 {
            for j in 0..3 {
                a.set(i, j, x[i] * y[j]);
            }
        }
        let sv = singular_values(&a).unwrap();
        let expected = (6.0f64).sqrt() * (0.25f64 + 0.09 + 4.0).sqrt();
        assert!((sv[0] - expected).abs() < 1e-12);
        assert!(sv[1] < 1e-14 && sv[2] < 1e-14);
    }

    #[test]
    fn f32_converges() {
        let a = RealSymmetric::<f32>::from_upper(3, |i, j| if i == j { 2.0 } else { 0.5 });
        let e = symmetric_eigen(&a).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-5);
    }
}
