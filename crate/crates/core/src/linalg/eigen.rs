use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{realify, singular_values, symmetric_eigen, DenseMatrix, HermitianMatrix, RealSymmetric};

const PAIR_MATCH_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-9;

/// Normalized eigendecomposition `X = Q diag(lambda) Q^*`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T> {
    /// Nonincreasing.
    pub values: Vec<T>,
    /// Unit eigenvectors, one per value.
    pub vectors: Vec<Vec<Complex<T>>>,
}

impl<T: Scalar> EigenDecomposition<T> {
    pub fn min_value(&self) -> T {
        *self.values.last().expect("nonempty spectrum")
    }

    pub fn negative_count(&self, threshold: T) -> usize {
        self.values.iter().filter(|&&v| v < -threshold).count()
    }
}

/// Hermitian eigendecomposition via Jacobi on the realification.
///
/// Each eigenvalue of `L(X)` appears twice; within a cluster of (near-)equal
/// eigenvalues the real eigenvectors `(x, y)` are mapped to `x + jy` and
/// complex Gram-Schmidt keeps one representative per complex dimension.
pub fn eigen<T: Scalar>(x: &HermitianMatrix<T>) -> Result<EigenDecomposition<T>> {
    let n = x.dim();
    if n == 0 {
        return Ok(EigenDecomposition { values: vec![], vectors: vec![] });
    }
    let real = symmetric_eigen(&realify(x))?;
    let scale = T::one().max(x.frobenius_norm());
    let match_tol = T::floor_tol(PAIR_MATCH_TOL) * scale;

    let candidates: Vec<Vec<Complex<T>>> = (0..2 * n)
        .map(|i| {
            let v = real.vector(i);
            (0..n).map(|k| Complex::new(v[k], v[k + n])).collect()
        })
        .collect();

    let mut chosen: Vec<Vec<Complex<T>>> = Vec::with_capacity(n);
    let mut used = vec![false; 2 * n];
    let mut start = 0;
    while start < 2 * n && chosen.len() < n {
        let mut end = start + 1;
        while end < 2 * n && real.values[end - 1] - real.values[end] <= match_tol {
            end += 1;
        }
        let want = ((end - start) / 2).max(1).min(n - chosen.len());
        for _ in 0..want {
            // pick the cluster member with the largest component outside the
            // span of the vectors accepted so far
            let mut best: Option<(T, usize, Vec<Complex<T>>)> = None;
            for idx in start..end {
                if used[idx] {
                    continue;
                }
                let r = orthogonalize(&candidates[idx], &chosen);
                let norm = norm2(&r);
                if best.as_ref().is_none_or(|(b, _, _)| norm > *b) {
                    best = Some((norm, idx, r));
                }
            }
            let Some((norm, idx, mut r)) = best else { break };
            if norm <= T::of(0.1) {
                break;
            }
            used[idx] = true;
            for z in &mut r {
                *z /= norm;
            }
            chosen.push(r);
        }
        start = end;
    }
    if chosen.len() != n {
        return Err(Error::Numerical(format!(
            "eigenvector pairing recovered {} of {} vectors",
            chosen.len(),
            n
        )));
    }

    let mut pairs: Vec<(T, Vec<Complex<T>>)> = chosen
        .into_iter()
        .map(|mut q| {
            fix_phase(&mut q);
            (x.quadratic_form(&q), q)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));

    let tol = T::floor_tol(RESIDUAL_TOL) * (T::one() + x.frobenius_norm());
    for (lambda, q) in &pairs {
        let xq = x.mul_vec(q);
        let res = xq.iter().zip(q).fold(T::zero(), |acc, (a, b)| acc.max((*a - *b * *lambda).norm()));
        if !(res <= tol) {
            return Err(Error::Numerical(format!("eigenpair residual {res:e} exceeds {tol:e}")));
        }
    }
    let (values, vectors) = pairs.into_iter().unzip();
    Ok(EigenDecomposition { values, vectors })
}

fn norm2<T: Scalar>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

fn orthogonalize<T: Scalar>(v: &[Complex<T>], basis: &[Vec<Complex<T>>]) -> Vec<Complex<T>> {
    let mut r = v.to_vec();
    // two passes for numerical orthogonality
    for _ in 0..2 {
        for b in basis {
            let proj = b.iter().zip(&r).fold(Complex::new(T::zero(), T::zero()), |acc, (bi, ri)| acc + bi.conj() * ri);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= *bi * proj;
            }
        }
    }
    r
}

/// Rotates `q` so its first non-negligible entry is real and positive.
fn fix_phase<T: Scalar>(q: &mut [Complex<T>]) {
    let big = q.iter().fold(T::zero(), |acc, z| acc.max(z.norm()));
    let cutoff = big * T::of(1e-8);
    if let Some(pivot) = q.iter().find(|z| z.norm() > cutoff).copied() {
        let phase = pivot.conj() / pivot.norm();
        for z in q.iter_mut() {
            *z *= phase;
        }
    }
}

/// Outcome of a PSD test.
#[derive(Debug, Clone)]
pub enum PsdStatus<T> {
    Psd,
    /// Eigenpairs below the negative threshold, most negative last.
    Indefinite(Vec<(T, Vec<Complex<T>>)>),
}

impl<T> PsdStatus<T> {
    pub fn is_psd(&self) -> bool {
        matches!(self, PsdStatus::Psd)
    }
}

/// PSD iff `lambda_min >= -tol * max(1, trace X)`.
pub fn psd_status<T: Scalar>(x: &HermitianMatrix<T>, tol: T) -> Result<PsdStatus<T>> {
    let e = eigen(x)?;
    let threshold = tol * T::one().max(x.trace());
    let negative: Vec<_> =
        e.values.into_iter().zip(e.vectors).filter(|(l, _)| *l < -threshold).collect();
    Ok(if negative.is_empty() { PsdStatus::Psd } else { PsdStatus::Indefinite(negative) })
}

/// Frobenius projection onto the PSD cone: `sum_{lambda_i > 0} lambda_i q_i q_i^*`.
pub fn psd_project<T: Scalar>(x: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
    let e = eigen(x)?;
    Ok(HermitianMatrix::from_outer_sum(
        x.dim(),
        e.values.iter().zip(&e.vectors).filter(|(l, _)| **l > T::zero()).map(|(l, q)| (*l, q.as_slice())),
    ))
}

/// Numerical rank: count of spectral values above `tol * max(1, ||.||_F)`.
pub trait Ranked<T: Scalar> {
    fn numerical_rank(&self, tol: T) -> Result<usize>;
}

impl<T: Scalar> Ranked<T> for HermitianMatrix<T> {
    fn numerical_rank(&self, tol: T) -> Result<usize> {
        let cutoff = tol * T::one().max(self.frobenius_norm());
        Ok(eigen(self)?.values.iter().filter(|v| v.abs() > cutoff).count())
    }
}

impl<T: Scalar> Ranked<T> for RealSymmetric<T> {
    fn numerical_rank(&self, tol: T) -> Result<usize> {
        let cutoff = tol * T::one().max(self.frobenius_norm());
        Ok(symmetric_eigen(self)?.values.iter().filter(|v| v.abs() > cutoff).count())
    }
}

impl<T: Scalar> Ranked<T> for DenseMatrix<T> {
    fn numerical_rank(&self, tol: T) -> Result<usize> {
        let cutoff = tol * T::one().max(self.frobenius_norm());
        Ok(singular_values(self)?.iter().filter(|v| **v > cutoff).count())
    }
}

pub fn rank_of<T: Scalar, M: Ranked<T>>(m: &M, tol: T) -> Result<usize> {
    m.numerical_rank(tol)
}
