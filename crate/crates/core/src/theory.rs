//! Randomized checks of the structural facts the cuts rely on: the `W -> X^W`
//! map preserves PSD-ness, its Jabr consequences under index permutations,
//! the rank doubling of realification, and the spectral gap between rank-one
//! `W` and `L(X)`.

use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{eigen, rank_of, realify, realify_general, symmetric_eigen, w_to_x, HermitianMatrix, RealSymmetric};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryCheckResult {
    pub name: &'static str,
    pub trials: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl TheoryCheckResult {
    fn new(name: &'static str, trials: usize, max_violation: f64, tolerance: f64) -> Self {
        Self { name, trials, max_violation, tolerance, passed: max_violation <= tolerance }
    }
}

fn normal<T: Scalar>(rng: &mut ChaCha8Rng) -> T {
    T::of(rng.sample::<f64, _>(StandardNormal))
}

fn complex_normal<T: Scalar>(rng: &mut ChaCha8Rng) -> Complex<T> {
    Complex::new(normal(rng), normal(rng))
}

/// `F^T F` with `F` a `k x dim` Gaussian matrix, `k` drawn from `1..=dim`.
pub fn random_psd<T: Scalar>(rng: &mut ChaCha8Rng, dim: usize) -> RealSymmetric<T> {
    let k = rng.gen_range(1..=dim);
    let factor: Vec<T> = (0..k * dim).map(|_| normal(rng)).collect();
    RealSymmetric::gram(&factor, k, dim)
}

/// `X^W` is PSD for PSD `W`; violation is `-lambda_min / max(1, trace)`.
/// Trial `i` uses `n = dims[i % dims.len()]`, so `W` has order `2n`.
pub fn check_theorem1<T: Scalar>(trials: usize, dims: &[usize], seed: u64) -> Result<TheoryCheckResult> {
    assert!(dims.iter().all(|&d| d >= 2), "dimensions start at 2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for i in 0..trials {
        let n = dims[i % dims.len()];
        let w = random_psd::<T>(&mut rng, 2 * n);
        let x = w_to_x(&w)?;
        let e = eigen(&x)?;
        let scale = x.trace().max(T::one());
        worst = worst.max((-e.min_value() / scale).to_f64_lossy());
    }
    Ok(TheoryCheckResult::new("theorem1", trials, worst, T::floor_tol(1e-8).to_f64_lossy()))
}

/// `(c, s, r, t)` of the Jabr form for the ordered quadruple `(a, b, c, d)`.
pub fn jabr_terms<T: Scalar>(w: &RealSymmetric<T>, q: [usize; 4]) -> (T, T, T, T) {
    let [a, b, c, d] = q;
    (w.get(a, b) + w.get(c, d), w.get(b, c) - w.get(a, d), w.get(a, a) + w.get(c, c), w.get(b, b) + w.get(d, d))
}

fn all_permutations(q: [usize; 4]) -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    if i != j && i != k && i != l && j != k && j != l && k != l {
                        out.push([q[i], q[j], q[k], q[l]]);
                    }
                }
            }
        }
    }
    out
}

/// `c^2 + s^2 <= r t` for all 24 orderings of a random index quadruple, plus
/// the base ordering `(k, m, k', m')`. Violation relative to `max(1, r t)`.
pub fn check_permuted_jabr<T: Scalar>(trials: usize, seed: u64) -> Result<TheoryCheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut measure = |w: &RealSymmetric<T>, q: [usize; 4]| {
        let (c, s, r, t) = jabr_terms(w, q);
        let v = (c * c + s * s - r * t) / (r * t).max(T::one());
        worst = worst.max(v.to_f64_lossy());
    };
    for i in 0..trials {
        let n = 2 + i % 5;
        let w = random_psd::<T>(&mut rng, 2 * n);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let (k, m) = (idx[0], idx[1]);
        measure(&w, [k, m, k + n, m + n]);
        let mut quad: Vec<usize> = (0..2 * n).collect();
        quad.shuffle(&mut rng);
        for p in all_permutations([quad[0], quad[1], quad[2], quad[3]]) {
            measure(&w, p);
        }
    }
    Ok(TheoryCheckResult::new("permuted_jabr", trials, worst, T::floor_tol(1e-9).to_f64_lossy()))
}

/// `rank L(X) = 2 rank X` for general complex `X` of planted rank.
/// Violation counts trials where either rank misses its expected value.
pub fn check_rank_lemma<T: Scalar>(trials: usize, seed: u64) -> Result<TheoryCheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = T::floor_tol(1e-9);
    let mut misses = 0usize;
    for i in 0..trials {
        let n = 2 + i % 5;
        let r = rng.gen_range(0..=n);
        let us: Vec<Vec<Complex<T>>> = (0..r).map(|_| (0..n).map(|_| complex_normal(&mut rng)).collect()).collect();
        let vs: Vec<Vec<Complex<T>>> = (0..r).map(|_| (0..n).map(|_| complex_normal(&mut rng)).collect()).collect();
        let mut x = vec![Complex::new(T::zero(), T::zero()); n * n];
        for (u, v) in us.iter().zip(&vs) {
            for a in 0..n {
                for b in 0..n {
                    x[a * n + b] += u[a] * v[b].conj();
                }
            }
        }
        // rank X = rank X^* X, a Hermitian matrix
        let gram = HermitianMatrix::from_upper(n, |a, b| {
            (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, k| acc + x[k * n + a].conj() * x[k * n + b])
        });
        let rank_x = rank_of(&gram, tol)?;
        let rank_l = rank_of(&realify_general(n, &x), tol)?;
        if rank_x != r || rank_l != 2 * r {
            misses += 1;
        }
    }
    Ok(TheoryCheckResult::new("rank_lemma", trials, misses as f64, 0.0))
}

/// Rank-one `W` and `L(X)` for rank-one Hermitian `X` never share a spectrum,
/// so no orthogonal similarity links them. Violation counts trials where the
/// sorted spectra agree within tolerance or a rank hypothesis fails.
pub fn check_no_orthogonal_similarity<T: Scalar>(trials: usize, seed: u64) -> Result<TheoryCheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = T::floor_tol(1e-9);
    let mut misses = 0usize;
    for i in 0..trials {
        let n = 1 + i % 6;
        let v: Vec<Complex<T>> = (0..n).map(|_| complex_normal(&mut rng)).collect();
        let x = HermitianMatrix::from_outer_sum(n, [(T::one(), v.as_slice())]);
        let u: Vec<T> = (0..2 * n).map(|_| normal(&mut rng)).collect();
        let w = RealSymmetric::gram(&u, 1, 2 * n);
        let lx = realify(&x);
        if rank_of(&w, tol)? != 1 || rank_of(&x, tol)? != 1 {
            misses += 1;
            continue;
        }
        let a = symmetric_eigen(&lx)?.values;
        let b = symmetric_eigen(&w)?.values;
        let scale = lx.frobenius_norm().max(w.frobenius_norm()).max(T::one());
        let gap = a.iter().zip(&b).map(|(p, q)| (*p - *q).abs()).fold(T::zero(), |m, d| m.max(d));
        if gap <= tol * scale {
            misses += 1;
        }
    }
    Ok(TheoryCheckResult::new("no_orthogonal_similarity", trials, misses as f64, 0.0))
}

/// For PSD `W`, the pair quantities defined from `W` (`v2 = W_kk + W_k'k'`,
/// `c = W_km + W_k'm'`, `s = W_mk' - W_km'`) are the entries of `X^W`, so any
/// constraint written in `(v2, c, s)` takes the same value on both sides.
pub fn check_map_consistency<T: Scalar>(trials: usize, seed: u64) -> Result<TheoryCheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for i in 0..trials {
        let n = 2 + i % 5;
        let w = random_psd::<T>(&mut rng, 2 * n);
        let x = w_to_x(&w)?;
        let scale = w.frobenius_norm().max(T::one());
        for k in 0..n {
            let v2 = w.get(k, k) + w.get(k + n, k + n);
            worst = worst.max(((x.get(k, k).re - v2).abs() / scale).to_f64_lossy());
            for m in k + 1..n {
                let c = w.get(k, m) + w.get(k + n, m + n);
                let s = w.get(m, k + n) - w.get(k, m + n);
                let z = x.get(k, m);
                worst = worst.max(((z.re - c).abs().max((z.im - s).abs()) / scale).to_f64_lossy());
            }
        }
    }
    Ok(TheoryCheckResult::new("map_consistency", trials, worst, T::floor_tol(1e-12).to_f64_lossy()))
}

/// Every check at `trials` trials with seeds derived from `seed`.
pub fn run_all<T: Scalar>(trials: usize, seed: u64) -> Result<Vec<TheoryCheckResult>> {
    Ok(vec![
        check_theorem1::<T>(trials, &[2, 3, 4, 5, 6], seed)?,
        check_permuted_jabr::<T>(trials, seed.wrapping_add(1))?,
        check_rank_lemma::<T>(trials, seed.wrapping_add(2))?,
        check_no_orthogonal_similarity::<T>(trials, seed.wrapping_add(3))?,
        check_map_consistency::<T>(trials, seed.wrapping_add(4))?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_jabr_terms() {
        let w = RealSymmetric::<f64>::identity(4);
        for p in all_permutations([0, 1, 2, 3]) {
            assert_eq!(jabr_terms(&w, p), (0.0, 0.0, 2.0, 2.0));
        }
        assert_eq!(all_permutations([0, 1, 2, 3]).len(), 24);
    }

    #[test]
    fn rank_one_w_satisfies_every_ordering() {
        let u = [0.3, -1.2, 0.7, 2.0];
        let w = RealSymmetric::gram(&u, 1, 4);
        for p in all_permutations([0, 1, 2, 3]) {
            let (c, s, r, t) = jabr_terms(&w, p);
            assert!(c * c + s * s <= r * t + 1e-12, "{p:?}");
        }
    }

    #[test]
    fn zero_w_maps_to_zero() {
        let x = w_to_x(&RealSymmetric::<f64>::zeros(6)).unwrap();
        assert_eq!(x.frobenius_norm(), 0.0);
    }

    #[test]
    fn scalar_case_spectra_differ() {
        // X = [1] gives L(X) = I_2; W = diag(1, 0)
        let lx = realify(&HermitianMatrix::from_real_diagonal(&[1.0f64]));
        let w = RealSymmetric::from_upper(2, |i, j| if i == 0 && j == 0 { 1.0f64 } else { 0.0 });
        assert_eq!(symmetric_eigen(&lx).unwrap().values, vec![1.0, 1.0]);
        assert_eq!(symmetric_eigen(&w).unwrap().values, vec![1.0, 0.0]);
    }

    #[test]
    fn small_runs_pass_in_both_precisions() {
        for r in run_all::<f64>(40, 11).unwrap() {
            assert!(r.passed, "{r:?}");
        }
        for r in run_all::<f32>(40, 11).unwrap() {
            assert!(r.passed, "{r:?}");
        }
    }
}
