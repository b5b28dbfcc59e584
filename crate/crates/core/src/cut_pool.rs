//! Active cut bookkeeping: admission filters, aging, slack-based removal and
//! the JSON-lines warm-start format.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LpProblem, RowId};
use crate::relaxation::{RelaxationModel, VarKey};
use crate::separation::{CutKind, CutOrigin, LinearCut};

#[derive(Debug, Clone, Copy)]
pub struct PoolSettings {
    /// Minimum violation (normalized units) for admission.
    pub min_violation: f64,
    /// `|cos|` above which a candidate counts as parallel to an active cut.
    pub parallel_cosine: f64,
    /// Admissions per separation source (clique, pair, branch end, generator) per round.
    pub max_per_source: usize,
    /// Rounds of slack before a cut may be dropped.
    pub max_age: usize,
    /// Slack below which a cut counts as tight.
    pub slack_tol: f64,
    /// Skip the parallelism test for cost tangents, limit and Jabr cuts. These
    /// refine one fixed convex set on a support of two or four variables, so
    /// successive tangents near the optimum are nearly parallel.
    pub exempt_tangents: bool,
}

impl Default for PoolSettings {
    fn default() -> Self {
        Self {
            min_violation: 1e-5,
            parallel_cosine: 0.999,
            max_per_source: 5,
            max_age: 5,
            slack_tol: 1e-5,
            exempt_tangents: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PoolEntry {
    pub cut: LinearCut,
    pub row: RowId,
    pub age: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RoundStats {
    pub added: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, Default)]
pub struct CutPool {
    pub settings: PoolSettings,
    entries: Vec<PoolEntry>,
    hashes: HashSet<u64>,
    pub stats: Vec<RoundStats>,
}

impl CutPool {
    pub fn new(settings: PoolSettings) -> Self {
        Self { settings, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn cuts(&self) -> impl Iterator<Item = &LinearCut> {
        self.entries.iter().map(|e| &e.cut)
    }

    pub fn contains_hash(&self, hash: u64) -> bool {
        self.hashes.contains(&hash)
    }

    fn exempt(&self, cut: &LinearCut) -> bool {
        self.settings.exempt_tangents && matches!(cut.kind, CutKind::CostTangent | CutKind::Limit | CutKind::Jabr)
    }

    /// Filters `candidates` and installs the survivors as rows of `lp`.
    /// Returns the admitted cuts, most violated first.
    pub fn admit(&mut self, lp: &mut LpProblem, mut candidates: Vec<LinearCut>) -> Vec<LinearCut> {
        let s = self.settings;
        let offered = candidates.len();
        candidates.retain(|c| c.violation >= s.min_violation);
        let weak = offered - candidates.len();
        candidates.retain(|c| !self.hashes.contains(&c.hash));
        let (mut duplicate, mut capped, mut parallel_rejects) = (offered - weak - candidates.len(), 0, 0);
        candidates.sort_by(|a, b| b.violation.total_cmp(&a.violation));

        let mut by_support: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for (i, e) in self.entries.iter().enumerate() {
            by_support.entry(e.cut.support().collect()).or_default().push(i);
        }
        let mut per_source: HashMap<CutOrigin, usize> = HashMap::new();
        let mut admitted: Vec<LinearCut> = Vec::new();
        let mut batch_support: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for cut in candidates {
            if self.hashes.contains(&cut.hash) {
                duplicate += 1;
                continue;
            }
            let used = per_source.entry(cut.origin.clone()).or_insert(0);
            if *used >= s.max_per_source {
                capped += 1;
                continue;
            }
            let support: Vec<usize> = cut.support().collect();
            if !self.exempt(&cut) {
                let near = |c: &LinearCut| cut.cosine(c).abs() > s.parallel_cosine;
                let in_pool = by_support.get(&support).is_some_and(|ids| ids.iter().any(|&i| near(&self.entries[i].cut)));
                let in_batch = batch_support.get(&support).is_some_and(|ids| ids.iter().any(|&i| near(&admitted[i])));
                if in_pool || in_batch {
                    log::trace!("parallel reject {:?} {:?} viol {:.3e}", cut.kind, cut.origin, cut.violation);
                    parallel_rejects += 1;
                    continue;
                }
            }
            *used += 1;
            self.hashes.insert(cut.hash);
            batch_support.entry(support).or_default().push(admitted.len());
            admitted.push(cut);
        }
        log::debug!(
            "admit: {offered} offered, {} admitted, {weak} weak, {duplicate} duplicate, {capped} capped, {parallel_rejects} parallel",
            admitted.len()
        );
        for cut in &admitted {
            let row = lp.add_row(cut.to_row());
            self.entries.push(PoolEntry { cut: cut.clone(), row, age: 0 });
        }
        self.stats.push(RoundStats { added: admitted.len(), dropped: 0 });
        admitted
    }

    /// Ages every cut against the slacks at `point`, resetting tight ones, and
    /// removes cuts that have been slack for `max_age` rounds.
    pub fn age_and_drop(&mut self, lp: &mut LpProblem, point: &[f64]) -> Result<Vec<LinearCut>> {
        let s = self.settings;
        let mut kept = Vec::with_capacity(self.entries.len());
        let mut dropped = Vec::new();
        for mut e in std::mem::take(&mut self.entries) {
            let slack = -e.cut.violation_at(point);
            if slack < s.slack_tol {
                e.age = 0;
                kept.push(e);
                continue;
            }
            e.age += 1;
            if e.age >= s.max_age {
                lp.remove_row(e.row)?;
                self.hashes.remove(&e.cut.hash);
                dropped.push(e.cut);
            } else {
                kept.push(e);
            }
        }
        self.entries = kept;
        match self.stats.last_mut() {
            Some(st) => st.dropped += dropped.len(),
            None => self.stats.push(RoundStats { added: 0, dropped: dropped.len() }),
        }
        Ok(dropped)
    }

    /// Writes the header line followed by one record per active cut.
    pub fn save_cuts<W: Write>(&self, model: &RelaxationModel, mut out: W) -> Result<()> {
        let header = serde_json::json!({"fmt": "cutpool", "v": 1});
        writeln!(out, "{header}")?;
        for e in &self.entries {
            let record = CutRecord {
                kind: e.cut.kind,
                support: e.cut.terms.iter().map(|&(c, _)| model.space.key(c).to_string()).collect(),
                coeffs: e.cut.terms.iter().map(|&(_, a)| a).collect(),
                rhs: e.cut.rhs,
            };
            let line = serde_json::to_string(&record).map_err(|err| Error::Invariant(err.to_string()))?;
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CutRecord {
    kind: CutKind,
    support: Vec<String>,
    coeffs: Vec<f64>,
    rhs: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub loaded: usize,
    pub skipped: usize,
    /// Pair columns created for cuts that reference non-branch pairs.
    pub pairs_added: usize,
}

/// Reads a cut file into a fresh pool whose rows are installed in `model`.
///
/// Pair variables of non-branch pairs are created on demand when both buses
/// exist; records naming any other unknown variable are skipped.
pub fn load_cuts<R: BufRead>(input: R, model: &mut RelaxationModel, settings: PoolSettings) -> Result<(CutPool, LoadStats)> {
    let mut lines = input.lines();
    let bad = |record: usize, message: String| Error::CutFile { record, message };
    let header = lines.next().ok_or_else(|| bad(0, "empty cut file".into()))??;
    let header: serde_json::Value = serde_json::from_str(&header).map_err(|e| bad(0, format!("header: {e}")))?;
    if header.get("fmt").and_then(|v| v.as_str()) != Some("cutpool") || header.get("v").and_then(|v| v.as_u64()) != Some(1) {
        return Err(bad(0, format!("unsupported header {header}")));
    }

    let mut stats = LoadStats::default();
    let mut pool = CutPool::new(settings);
    let mut last_good = 0;
    for (i, line) in lines.enumerate() {
        let record_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CutRecord = serde_json::from_str(&line)
            .map_err(|e| bad(record_no, format!("{e} (last good record {last_good})")))?;
        if rec.support.len() != rec.coeffs.len() {
            return Err(bad(record_no, format!("support and coeffs differ in length (last good record {last_good})")));
        }
        let keys = rec
            .support
            .iter()
            .map(|s| s.parse::<VarKey>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(record_no, e))?;
        last_good = record_no;

        let mut new_pairs = BTreeMap::new();
        for key in &keys {
            if let VarKey::C(a, b) | VarKey::S(a, b) = *key {
                if model.space.pair(a, b).is_none() && model.space.v2(a).is_some() && model.space.v2(b).is_some() {
                    new_pairs.insert((a, b), ());
                }
            }
        }
        stats.pairs_added += model.add_aux_pairs(new_pairs.into_keys());
        let cols: Option<Vec<usize>> = keys.iter().map(|k| model.space.col(k)).collect();
        let Some(cols) = cols else {
            stats.skipped += 1;
            continue;
        };
        let point = model.solution.clone().unwrap_or_else(|| vec![0.0; model.space.len()]);
        let Some(mut cut) =
            LinearCut::new(cols.into_iter().zip(rec.coeffs), rec.rhs, rec.kind, CutOrigin::Loaded, &point, 0)
        else {
            stats.skipped += 1;
            continue;
        };
        if model.solution.is_none() {
            cut.violation = 0.0;
        }
        if pool.hashes.insert(cut.hash) {
            let row = model.lp.add_row(cut.to_row());
            pool.entries.push(PoolEntry { cut, row, age: 0 });
            stats.loaded += 1;
        }
    }
    Ok((pool, stats))
}
