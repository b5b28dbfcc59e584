#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use acopf_cutplane::case_io::{parse_case, BusId, CaseData};
use acopf_cutplane::relaxation::{RelaxationModel, VarKey};
use acopf_cutplane::{Complex, HermitianMatrix};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const CASE14_AC: f64 = 8081.18;
pub const CASE14_PRIOR: f64 = 8074.70;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

pub fn case14() -> CaseData {
    parse_case(&std::fs::read_to_string(data_path("case14.m")).unwrap()).unwrap()
}

pub fn to_nalgebra(x: &HermitianMatrix) -> DMatrix<Complex> {
    let n = x.dim();
    DMatrix::from_fn(n, n, |i, j| x.get(i, j))
}

/// Eigenvalues in ascending order, from nalgebra.
pub fn oracle_eigenvalues(x: &HermitianMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = to_nalgebra(x).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
    HermitianMatrix::from_upper(n, |i, j| {
        if i == j {
            Complex::new(normal(rng), 0.0)
        } else {
            Complex::new(normal(rng), normal(rng))
        }
    })
}

pub fn random_phasor(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Complex {
    Complex::from_polar(rng.gen_range(lo..=hi), rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
}

/// Random phasors at every bus of the model, magnitudes inside the voltage box.
pub fn random_voltages(model: &RelaxationModel, rng: &mut ChaCha8Rng) -> BTreeMap<BusId, Complex> {
    model
        .case
        .buses
        .iter()
        .filter(|b| b.in_service())
        .map(|b| (b.id, random_phasor(rng, b.v_min, b.v_max)))
        .collect()
}

/// `v2`, `c`, `s` from phasors; every other column left at zero.
pub fn rank_one_point(model: &RelaxationModel, v: &BTreeMap<BusId, Complex>) -> Vec<f64> {
    let mut x = vec![0.0; model.space.len()];
    for col in 0..model.space.len() {
        x[col] = match model.space.key(col) {
            VarKey::V2(k) => v[&k].norm_sqr(),
            VarKey::C(k, m) => (v[&k] * v[&m].conj()).re,
            VarKey::S(k, m) => (v[&k] * v[&m].conj()).im,
            _ => 0.0,
        };
    }
    x
}
