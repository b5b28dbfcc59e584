//! Violated valid inequalities at a relaxation solution.
//!
//! PSD cuts are built as `<A, X> >= 0` with `A` PSD and then written in the
//! LP variables: `sum A_ii v2[b_i] + sum_{i<j} 2 (Re A_ij c + Im A_ij s)`, the
//! `s` coefficient flipping sign when `b_i > b_j` in the clique order.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::case_io::{BusId, CostFunction};
use crate::error::Result;
use crate::linalg::{eigen, HermitianMatrix};
use crate::lp::{Row, Sense};
use crate::network::CliqueSet;
use crate::relaxation::{clique_matrix, End, RelaxationModel, VarKey, VariableSpace};
use crate::scalar::Scalar;

const QUANTUM: f64 = 1e12;
const ZERO_COEFF: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutKind {
    Eigen,
    Projection,
    Jabr,
    Limit,
    CostTangent,
}

/// What a cut was separated from; also the grouping key for per-source caps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CutOrigin {
    Clique(Vec<BusId>),
    Pair(BusId, BusId),
    Branch(usize, End),
    Generator(usize),
    Extra(String),
    Loaded,
}

/// `sum terms >= rhs`, scaled so the largest coefficient has magnitude 1.
#[derive(Debug, Clone)]
pub struct LinearCut {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
    pub kind: CutKind,
    pub origin: CutOrigin,
    pub birth_round: usize,
    pub violation: f64,
    pub hash: u64,
}

impl LinearCut {
    /// Merges repeated columns, normalizes, and records the violation at
    /// `point`. `None` if every coefficient vanishes.
    pub fn new(
        raw: impl IntoIterator<Item = (usize, f64)>,
        rhs: f64,
        kind: CutKind,
        origin: CutOrigin,
        point: &[f64],
        round: usize,
    ) -> Option<Self> {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (col, a) in raw {
            *merged.entry(col).or_insert(0.0) += a;
        }
        let scale = merged.values().fold(0.0f64, |m, a| m.max(a.abs()));
        if !(scale > 0.0) || !scale.is_finite() {
            return None;
        }
        let terms: Vec<(usize, f64)> =
            merged.into_iter().map(|(c, a)| (c, a / scale)).filter(|(_, a)| a.abs() > ZERO_COEFF).collect();
        let rhs = rhs / scale;
        let mut cut = LinearCut { terms, rhs, kind, origin, birth_round: round, violation: 0.0, hash: 0 };
        cut.violation = cut.violation_at(point);
        cut.hash = cut.content_hash();
        Some(cut)
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(c, a)| a * x[c]).sum()
    }

    /// `rhs - activity`; positive when `x` violates the cut.
    pub fn violation_at(&self, x: &[f64]) -> f64 {
        self.rhs - self.activity(x)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().map(|&(c, _)| c)
    }

    pub fn same_support(&self, other: &Self) -> bool {
        self.terms.len() == other.terms.len() && self.support().eq(other.support())
    }

    /// Cosine between coefficient vectors (rhs excluded).
    pub fn cosine(&self, other: &Self) -> f64 {
        let (mut i, mut j, mut dot) = (0, 0, 0.0);
        while i < self.terms.len() && j < other.terms.len() {
            let (ca, a) = self.terms[i];
            let (cb, b) = other.terms[j];
            if ca == cb {
                dot += a * b;
                i += 1;
                j += 1;
            } else if ca < cb {
                i += 1;
            } else {
                j += 1;
            }
        }
        let na = self.terms.iter().map(|t| t.1 * t.1).sum::<f64>().sqrt();
        let nb = other.terms.iter().map(|t| t.1 * t.1).sum::<f64>().sqrt();
        dot / (na * nb)
    }

    pub fn to_row(&self) -> Row {
        Row::new(self.terms.clone(), Sense::Ge, self.rhs)
    }

    fn content_hash(&self) -> u64 {
        let q = |a: f64| (a * QUANTUM).round() as i64;
        let mut h = DefaultHasher::new();
        for &(c, a) in &self.terms {
            c.hash(&mut h);
            q(a).hash(&mut h);
        }
        q(self.rhs).hash(&mut h);
        h.finish()
    }
}

/// `A` of a PSD cut `<A, X> >= 0` together with its violation `-<A, X0>`.
#[derive(Debug, Clone)]
pub struct CutMatrix<T> {
    pub a: HermitianMatrix<T>,
    pub violation: T,
}

/// `A = q q^*` for the eigenvector of the most negative eigenvalue.
pub fn eigen_cut_matrix<T: Scalar>(x0: &HermitianMatrix<T>, tol: T) -> Result<Option<CutMatrix<T>>> {
    let e = eigen(x0)?;
    let threshold = tol * T::one().max(x0.trace());
    if e.values.is_empty() || e.min_value() >= -threshold {
        return Ok(None);
    }
    let q = e.vectors.last().expect("nonempty spectrum");
    let a = HermitianMatrix::from_outer_sum(x0.dim(), [(T::one(), q.as_slice())]);
    let violation = -a.inner(x0);
    Ok(Some(CutMatrix { a, violation }))
}

/// `A = sum_{lambda_i < 0} (-lambda_i) q_i q_i^*`.
pub fn projection_cut_matrix<T: Scalar>(x0: &HermitianMatrix<T>, tol: T) -> Result<Option<CutMatrix<T>>> {
    let e = eigen(x0)?;
    let threshold = tol * T::one().max(x0.trace());
    let neg: Vec<_> = e.values.iter().zip(&e.vectors).filter(|(l, _)| **l < -threshold).collect();
    if neg.is_empty() {
        return Ok(None);
    }
    let a = HermitianMatrix::from_outer_sum(x0.dim(), neg.iter().map(|(l, q)| (-**l, q.as_slice())));
    let violation = -a.inner(x0);
    Ok(Some(CutMatrix { a, violation }))
}

/// Writes `<A, X(y)>` over the clique as sparse LP terms.
pub fn linearize(a: &HermitianMatrix<f64>, clique: &[BusId], space: &VariableSpace) -> Result<Vec<(usize, f64)>> {
    use crate::error::Error;
    let mut terms = Vec::with_capacity(clique.len() * clique.len());
    for i in 0..clique.len() {
        let v = space.v2(clique[i]).ok_or_else(|| Error::Invariant(format!("bus {} has no v2 column", clique[i])))?;
        terms.push((v, a.get(i, i).re));
        for j in i + 1..clique.len() {
            let (bi, bj) = (clique[i], clique[j]);
            let (c, s) = space.pair(bi, bj).ok_or_else(|| Error::Invariant(format!("pair {bi}-{bj} has no columns")))?;
            let aij: Complex<f64> = a.get(i, j);
            let sign = if bi < bj { 1.0 } else { -1.0 };
            terms.push((c, 2.0 * aij.re));
            terms.push((s, 2.0 * sign * aij.im));
        }
    }
    Ok(terms)
}

#[derive(Debug, Clone, Copy)]
pub struct SeparationSettings {
    /// Relative PSD tolerance, scaled by `max(1, trace)`.
    pub psd_tol: f64,
    /// Cuts touching more variables than this are discarded.
    pub max_density: usize,
}

impl Default for SeparationSettings {
    fn default() -> Self {
        Self { psd_tol: 1e-8, max_density: 25 }
    }
}

fn psd_cut(
    m: CutMatrix<f64>,
    kind: CutKind,
    clique: &[BusId],
    space: &VariableSpace,
    point: &[f64],
    round: usize,
    settings: &SeparationSettings,
) -> Result<Option<LinearCut>> {
    let origin = if kind == CutKind::Jabr {
        CutOrigin::Pair(clique[0].min(clique[1]), clique[0].max(clique[1]))
    } else {
        let mut sorted = clique.to_vec();
        sorted.sort();
        CutOrigin::Clique(sorted)
    };
    let terms = linearize(&m.a, clique, space)?;
    Ok(LinearCut::new(terms, 0.0, kind, origin, point, round).filter(|c| c.terms.len() <= settings.max_density))
}

/// Eigen-cut on the clique matrix at `point`.
pub fn eigen_cut(
    space: &VariableSpace,
    point: &[f64],
    clique: &[BusId],
    round: usize,
    settings: &SeparationSettings,
) -> Result<Option<LinearCut>> {
    let x0 = clique_matrix(space, point, clique)?;
    match eigen_cut_matrix(&x0, settings.psd_tol)? {
        Some(m) => psd_cut(m, CutKind::Eigen, clique, space, point, round, settings),
        None => Ok(None),
    }
}

pub fn projection_cut(
    space: &VariableSpace,
    point: &[f64],
    clique: &[BusId],
    round: usize,
    settings: &SeparationSettings,
) -> Result<Option<LinearCut>> {
    let x0 = clique_matrix(space, point, clique)?;
    match projection_cut_matrix(&x0, settings.psd_tol)? {
        Some(m) => psd_cut(m, CutKind::Projection, clique, space, point, round, settings),
        None => Ok(None),
    }
}

/// Separates `c^2 + s^2 <= v2_a v2_b` through the 2x2 eigen-cut.
pub fn jabr_cut(
    space: &VariableSpace,
    point: &[f64],
    pair: (BusId, BusId),
    round: usize,
    settings: &SeparationSettings,
) -> Result<Option<LinearCut>> {
    let clique = [pair.0, pair.1];
    let x0 = clique_matrix(space, point, &clique)?;
    match eigen_cut_matrix(&x0, settings.psd_tol)? {
        Some(m) => psd_cut(m, CutKind::Jabr, &clique, space, point, round, settings),
        None => Ok(None),
    }
}

/// Tangent to `P^2 + Q^2 <= U^2` at the radial projection of `(p, q)`.
pub fn limit_cut(
    p: f64,
    q: f64,
    limit: f64,
    cols: (usize, usize),
    origin: CutOrigin,
    point: &[f64],
    round: usize,
) -> Option<LinearCut> {
    let norm = p.hypot(q);
    if !limit.is_finite() || norm <= limit * (1.0 + 1e-8) || norm == 0.0 {
        return None;
    }
    // -(p P + q Q) >= -U |(p, q)|
    LinearCut::new([(cols.0, -p), (cols.1, -q)], -limit * norm, CutKind::Limit, origin, point, round)
}

/// Tangent `t >= F(p) + F'(p)(pg - p)` when the epigraph undercuts a curved cost.
pub fn cost_cut(
    p: f64,
    t: f64,
    cost: &CostFunction,
    cols: (usize, usize),
    origin: CutOrigin,
    point: &[f64],
    round: usize,
) -> Option<LinearCut> {
    if !cost.is_curved() {
        return None;
    }
    let f = cost.value(p);
    if t >= f - 1e-9 * f.abs().max(1.0) {
        return None;
    }
    let slope = cost.derivative(p);
    LinearCut::new([(cols.1, 1.0), (cols.0, -slope)], f - slope * p, CutKind::CostTangent, origin, point, round)
}

/// Extension point for further cut families (for example i2 inequalities).
pub trait ExtraSeparator: Send + Sync {
    fn name(&self) -> &str;
    fn separate(&self, model: &RelaxationModel, point: &[f64], round: usize) -> Vec<LinearCut>;
}

#[derive(Debug, Clone)]
pub struct CliqueSummary {
    pub buses: Vec<BusId>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda_min: f64,
    pub psd: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SeparationReport {
    pub cuts: Vec<LinearCut>,
    pub max_violation: f64,
    pub cliques: Vec<CliqueSummary>,
    pub psd_cliques: usize,
}

impl SeparationReport {
    /// `min lambda_1 / max(lambda_2, 1e-12)` over the summarized cliques.
    pub fn eig_ratio(&self) -> Option<f64> {
        self.cliques.iter().map(|c| c.lambda1 / c.lambda2.max(1e-12)).reduce(f64::min)
    }
}

fn separate_clique(
    space: &VariableSpace,
    point: &[f64],
    buses: &[BusId],
    round: usize,
    settings: &SeparationSettings,
) -> Result<(CliqueSummary, Vec<LinearCut>)> {
    let x0 = clique_matrix(space, point, buses)?;
    let e = eigen(&x0)?;
    let threshold = settings.psd_tol * x0.trace().max(1.0);
    let negatives: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i] < -threshold).collect();
    let summary = CliqueSummary {
        buses: buses.to_vec(),
        lambda1: e.values[0],
        lambda2: e.values.get(1).copied().unwrap_or(0.0),
        lambda_min: e.min_value(),
        psd: negatives.is_empty(),
    };
    let mut cuts = Vec::new();
    for &i in &negatives {
        let a = HermitianMatrix::from_outer_sum(x0.dim(), [(1.0, e.vectors[i].as_slice())]);
        let violation = -a.inner(&x0);
        if let Some(c) = psd_cut(CutMatrix { a, violation }, CutKind::Eigen, buses, space, point, round, settings)? {
            cuts.push(c);
        }
    }
    if negatives.len() == 2 {
        let a = HermitianMatrix::from_outer_sum(
            x0.dim(),
            negatives.iter().map(|&i| (-e.values[i], e.vectors[i].as_slice())),
        );
        let violation = -a.inner(&x0);
        if let Some(c) = psd_cut(CutMatrix { a, violation }, CutKind::Projection, buses, space, point, round, settings)? {
            cuts.push(c);
        }
    }
    Ok((summary, cuts))
}

/// One round of separation at `point`: Jabr on every modeled pair, thermal
/// limits, cost tangents, PSD cuts on every clique of `cliques`, and any
/// registered extra families. Cliques are processed in parallel.
pub fn separate(
    model: &RelaxationModel,
    point: &[f64],
    cliques: &CliqueSet,
    round: usize,
    settings: &SeparationSettings,
    extra: &[&dyn ExtraSeparator],
) -> Result<SeparationReport> {
    let space = &model.space;
    let mut cuts = Vec::new();
    for pair in space.pairs() {
        if let Some(c) = jabr_cut(space, point, pair, round, settings)? {
            cuts.push(c);
        }
    }
    for (idx, br) in model.case.active_branches() {
        let Some(u) = br.rate_a else { continue };
        for end in [End::From, End::To] {
            let pc = space.col(&VarKey::P { branch: idx, end }).expect("flow column");
            let qc = space.col(&VarKey::Q { branch: idx, end }).expect("flow column");
            if let Some(c) = limit_cut(point[pc], point[qc], u, (pc, qc), CutOrigin::Branch(idx, end), point, round) {
                cuts.push(c);
            }
        }
    }
    for (g, gen) in model.case.active_generators() {
        if !matches!(gen.cost, CostFunction::Polynomial(_)) {
            continue;
        }
        let pc = space.col(&VarKey::Pg(g)).expect("pg column");
        let tc = space.col(&VarKey::Cost(g)).expect("cost column");
        if let Some(c) = cost_cut(point[pc], point[tc], &gen.cost, (pc, tc), CutOrigin::Generator(g), point, round) {
            cuts.push(c);
        }
    }

    let per_clique: Vec<(CliqueSummary, Vec<LinearCut>)> = cliques
        .cliques
        .par_iter()
        .map(|cl| separate_clique(space, point, &cl.buses, round, settings))
        .collect::<Result<_>>()?;
    let mut summaries = Vec::with_capacity(per_clique.len());
    for (summary, found) in per_clique {
        summaries.push(summary);
        cuts.extend(found);
    }
    for sep in extra {
        cuts.extend(sep.separate(model, point, round));
    }

    let max_violation = cuts.iter().map(|c| c.violation).fold(0.0, f64::max);
    let psd_cliques = summaries.iter().filter(|s| s.psd).count();
    Ok(SeparationReport { cuts, max_violation, cliques: summaries, psd_cliques })
}
