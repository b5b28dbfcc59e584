//! Branch admittances, the bus-pair graph, and the clique families that index
//! the PSD submatrices.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::case_io::{Branch, BusId, CaseData};
use crate::error::{Error, Result};

/// Real and imaginary parts of the Pi-model admittance entries of one branch,
/// oriented from `from_bus` (k) to `to_bus` (m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchAdmittance {
    pub g_kk: f64,
    pub b_kk: f64,
    pub g_km: f64,
    pub b_km: f64,
    pub g_mk: f64,
    pub b_mk: f64,
    pub g_mm: f64,
    pub b_mm: f64,
}

pub fn branch_admittance(branch: &Branch) -> Result<BranchAdmittance> {
    let z = Complex64::new(branch.r, branch.x);
    if z.norm_sqr() == 0.0 {
        return Err(Error::SingularBranch { from: branch.from_bus.0, to: branch.to_bus.0 });
    }
    let y = z.inv();
    let y_sh = Complex64::new(0.0, branch.b_charge / 2.0);
    let tau = branch.tap;
    let ratio = Complex64::from_polar(tau, branch.shift);
    let y_ff = (y + y_sh) / (tau * tau);
    let y_ft = -y / ratio.conj();
    let y_tf = -y / ratio;
    let y_tt = y + y_sh;
    Ok(BranchAdmittance {
        g_kk: y_ff.re,
        b_kk: y_ff.im,
        g_km: y_ft.re,
        b_km: y_ft.im,
        g_mk: y_tf.re,
        b_mk: y_tf.im,
        g_mm: y_tt.re,
        b_mm: y_tt.im,
    })
}

impl BranchAdmittance {
    /// `(P_km, Q_km, P_mk, Q_mk)` as linear functions of
    /// `(v_k, v_m, c, s)` where `c + js = V_k V_m^*`.
    pub fn flows(&self, v_k: f64, v_m: f64, c: f64, s: f64) -> [f64; 4] {
        [
            self.g_kk * v_k + self.g_km * c + self.b_km * s,
            -self.b_kk * v_k - self.b_km * c + self.g_km * s,
            self.g_mm * v_m + self.g_mk * c - self.b_mk * s,
            -self.b_mm * v_m - self.b_mk * c - self.g_mk * s,
        ]
    }
}

/// Orders a pair as `(low, high)`.
#[inline]
pub fn canonical(a: BusId, b: BusId) -> (BusId, BusId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Simple undirected graph over in-service buses; parallel branches collapse
/// onto one canonical pair.
#[derive(Debug, Clone, Default)]
pub struct PairGraph {
    pub vertices: Vec<BusId>,
    adjacency: BTreeMap<BusId, BTreeSet<BusId>>,
    parallel: BTreeMap<(BusId, BusId), Vec<usize>>,
}

impl PairGraph {
    pub fn from_case(case: &CaseData) -> Self {
        let mut g = Self::default();
        for bus in case.buses.iter().filter(|b| b.in_service()) {
            g.add_vertex(bus.id);
        }
        for (idx, br) in case.active_branches() {
            if br.from_bus == br.to_bus {
                continue;
            }
            g.add_vertex(br.from_bus);
            g.add_vertex(br.to_bus);
            g.add_edge(br.from_bus, br.to_bus);
            g.parallel.entry(canonical(br.from_bus, br.to_bus)).or_default().push(idx);
        }
        g
    }

    pub fn from_edges(edges: &[(u32, u32)]) -> Self {
        let mut g = Self::default();
        for &(a, b) in edges {
            g.add_vertex(BusId(a));
            g.add_vertex(BusId(b));
            g.add_edge(BusId(a), BusId(b));
        }
        g
    }

    fn add_vertex(&mut self, v: BusId) {
        if let std::collections::btree_map::Entry::Vacant(e) = self.adjacency.entry(v) {
            e.insert(BTreeSet::new());
            self.vertices.push(v);
            self.vertices.sort();
        }
    }

    fn add_edge(&mut self, a: BusId, b: BusId) {
        self.adjacency.entry(a).or_default().insert(b);
        self.adjacency.entry(b).or_default().insert(a);
    }

    pub fn has_edge(&self, a: BusId, b: BusId) -> bool {
        self.adjacency.get(&a).is_some_and(|n| n.contains(&b))
    }

    pub fn neighbors(&self, v: BusId) -> impl Iterator<Item = BusId> + '_ {
        self.adjacency.get(&v).into_iter().flat_map(|n| n.iter().copied())
    }

    /// Canonical pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (BusId, BusId)> + '_ {
        self.adjacency.iter().flat_map(|(&a, n)| n.range(a..).filter(move |&&b| b != a).map(move |&b| (a, b)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Branch indices behind a canonical pair.
    pub fn branches_of(&self, pair: (BusId, BusId)) -> &[usize] {
        self.parallel.get(&pair).map_or(&[], Vec::as_slice)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CliqueOrigin {
    ThreeCycle,
    Chordal,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clique {
    /// Sorted ascending.
    pub buses: Vec<BusId>,
    pub origin: CliqueOrigin,
}

impl Clique {
    pub fn pairs(&self) -> impl Iterator<Item = (BusId, BusId)> + '_ {
        let b = &self.buses;
        (0..b.len()).flat_map(move |i| (i + 1..b.len()).map(move |j| (b[i], b[j])))
    }
}

/// A family of cliques plus the non-edge pairs (chordal fill) they use.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CliqueSet {
    pub cliques: Vec<Clique>,
    pub aux_pairs: BTreeSet<(BusId, BusId)>,
}

impl CliqueSet {
    /// Number of cliques of size 3, 4 and 5.
    pub fn counts(&self) -> (usize, usize, usize) {
        let count = |k| self.cliques.iter().filter(|c| c.buses.len() == k).count();
        (count(3), count(4), count(5))
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn contains(&self, buses: &[BusId]) -> bool {
        self.cliques.iter().any(|c| c.buses == buses)
    }

    /// Adds the cliques of `other` not already present (compared by bus set).
    pub fn merge(&mut self, other: CliqueSet) {
        for c in other.cliques {
            if !self.contains(&c.buses) {
                self.cliques.push(c);
            }
        }
        self.aux_pairs.extend(other.aux_pairs);
    }
}

/// Formats clique counts as `(n3,n4,n5)`.
pub fn format_counts((n3, n4, n5): (usize, usize, usize)) -> String {
    format!("({n3},{n4},{n5})")
}

/// All triangles of the graph, each once, as sorted triples.
pub fn enumerate_three_cycles(g: &PairGraph) -> CliqueSet {
    let mut cliques = Vec::new();
    for (a, b) in g.edges() {
        for c in g.neighbors(b).filter(|&c| c > b) {
            if g.has_edge(a, c) {
                cliques.push(Clique { buses: vec![a, b, c], origin: CliqueOrigin::ThreeCycle });
            }
        }
    }
    CliqueSet { cliques, aux_pairs: BTreeSet::new() }
}

/// Cliques of a minimum-degree chordal extension, capped at `max_size`.
///
/// Maximal cliques of size below 3 are dropped. A maximal clique larger than
/// `max_size` is replaced by a greedy family of `max_size`-subsets that covers
/// every original edge inside it. Fill pairs used by emitted cliques are
/// returned as auxiliary pairs.
pub fn chordal_cliques(g: &PairGraph, max_size: usize) -> CliqueSet {
    assert!((3..=5).contains(&max_size), "max_size must be 3, 4 or 5");
    let maximal = chordal_maximal_cliques(g);
    let mut out = CliqueSet::default();
    for members in maximal {
        if members.len() < 3 {
            continue;
        }
        let family = if members.len() <= max_size { vec![members] } else { greedy_cover(g, &members, max_size) };
        for buses in family {
            if out.contains(&buses) {
                continue;
            }
            let clique = Clique { buses, origin: CliqueOrigin::Chordal };
            for (a, b) in clique.pairs() {
                if !g.has_edge(a, b) {
                    out.aux_pairs.insert((a, b));
                }
            }
            out.cliques.push(clique);
        }
    }
    out
}

/// Maximal cliques (sorted) of the minimum-degree elimination extension.
pub fn chordal_maximal_cliques(g: &PairGraph) -> Vec<Vec<BusId>> {
    let mut adj: BTreeMap<BusId, BTreeSet<BusId>> =
        g.vertices.iter().map(|&v| (v, g.neighbors(v).collect())).collect();
    let mut candidates: Vec<Vec<BusId>> = Vec::new();
    while !adj.is_empty() {
        // min degree, lowest id on ties (BTreeMap iterates ascending)
        let v = adj.iter().min_by_key(|(_, n)| n.len()).map(|(&v, _)| v).expect("nonempty");
        let nbrs = adj.remove(&v).expect("present");
        for &a in &nbrs {
            let set = adj.get_mut(&a).expect("symmetric adjacency");
            set.remove(&v);
            set.extend(nbrs.iter().copied().filter(|&b| b != a));
        }
        let mut clique: Vec<BusId> = nbrs.into_iter().collect();
        clique.push(v);
        clique.sort();
        candidates.push(clique);
    }
    let mut maximal: Vec<Vec<BusId>> = Vec::new();
    for c in &candidates {
        let dominated = candidates.iter().any(|d| d.len() > c.len() && c.iter().all(|x| d.contains(x)));
        if !dominated && !maximal.contains(c) {
            maximal.push(c.clone());
        }
    }
    maximal
}

fn greedy_cover(g: &PairGraph, members: &[BusId], size: usize) -> Vec<Vec<BusId>> {
    let mut uncovered: BTreeSet<(BusId, BusId)> = BTreeSet::new();
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i + 1..] {
            if g.has_edge(a, b) {
                uncovered.insert((a, b));
            }
        }
    }
    let mut family = Vec::new();
    while let Some(&(a, b)) = uncovered.iter().next() {
        let mut pick = vec![a, b];
        while pick.len() < size {
            let gain = |v: BusId| pick.iter().filter(|&&u| uncovered.contains(&canonical(u, v))).count();
            let next = members.iter().copied().filter(|v| !pick.contains(v)).max_by(|&x, &y| {
                // more newly covered edges first, then the lower id
                gain(x).cmp(&gain(y)).then(y.cmp(&x))
            });
            match next {
                Some(v) => pick.push(v),
                None => break,
            }
        }
        pick.sort();
        for (i, &u) in pick.iter().enumerate() {
            for &v in &pick[i + 1..] {
                uncovered.remove(&(u, v));
            }
        }
        family.push(pick);
    }
    family
}

#[cfg(test)]
mod tests {
    use super::*;

    fn branch(r: f64, x: f64, tap: f64) -> Branch {
        Branch {
            from_bus: BusId(1),
            to_bus: BusId(2),
            r,
            x,
            b_charge: 0.0,
            tap,
            shift: 0.0,
            rate_a: None,
            in_service: true,
        }
    }

    #[test]
    fn admittance_pure_reactance() {
        let a = branch_admittance(&branch(0.0, 0.1, 1.0)).unwrap();
        assert!(a.g_kk.abs() < 1e-12 && (a.b_kk + 10.0).abs() < 1e-12);
        assert!(a.g_km.abs() < 1e-12 && (a.b_km - 10.0).abs() < 1e-12);
        assert!((a.b_mk - 10.0).abs() < 1e-12 && (a.b_mm + 10.0).abs() < 1e-12);
    }

    #[test]
    fn admittance_pure_resistance() {
        let a = branch_admittance(&branch(1.0, 0.0, 1.0)).unwrap();
        assert!((a.g_kk - 1.0).abs() < 1e-12 && a.b_kk.abs() < 1e-12);
        assert!((a.g_km + 1.0).abs() < 1e-12 && a.b_km.abs() < 1e-12);
    }

    #[test]
    fn admittance_tap() {
        let a = branch_admittance(&branch(0.0, 0.1, 2.0)).unwrap();
        assert!(a.g_kk.abs() < 1e-12 && (a.b_kk + 2.5).abs() < 1e-12);
        assert!((a.b_km - 5.0).abs() < 1e-12);
        assert!((a.b_mm + 10.0).abs() < 1e-12);
    }

    #[test]
    fn admittance_singular() {
        assert!(matches!(branch_admittance(&branch(0.0, 0.0, 1.0)), Err(Error::SingularBranch { .. })));
    }

    #[test]
    fn k3_has_one_triangle() {
        let g = PairGraph::from_edges(&[(1, 2), (2, 3), (1, 3)]);
        let t = enumerate_three_cycles(&g);
        assert_eq!(t.cliques.len(), 1);
        assert_eq!(t.cliques[0].buses, vec![BusId(1), BusId(2), BusId(3)]);
    }

    #[test]
    fn tree_has_no_triangles_and_no_chordal_cliques() {
        let g = PairGraph::from_edges(&[(1, 2), (2, 3), (2, 4), (4, 5)]);
        assert!(enumerate_three_cycles(&g).is_empty());
        let ch = chordal_cliques(&g, 3);
        assert!(ch.is_empty() && ch.aux_pairs.is_empty());
    }

    #[test]
    fn four_cycle_gets_one_chord() {
        let g = PairGraph::from_edges(&[(1, 2), (2, 3), (3, 4), (4, 1)]);
        let ch = chordal_cliques(&g, 3);
        assert_eq!(ch.cliques.len(), 2);
        assert_eq!(ch.aux_pairs.len(), 1);
        let chord = *ch.aux_pairs.iter().next().unwrap();
        assert!(!g.has_edge(chord.0, chord.1));
        for c in &ch.cliques {
            assert!(c.buses.contains(&chord.0) && c.buses.contains(&chord.1));
        }
    }

    #[test]
    fn k6_covered_by_five_subsets() {
        let mut edges = vec![];
        for a in 1..=6 {
            for b in a + 1..=6 {
                edges.push((a, b));
            }
        }
        let g = PairGraph::from_edges(&edges);
        let ch = chordal_cliques(&g, 5);
        assert!(ch.cliques.iter().all(|c| c.buses.len() == 5));
        let covered: BTreeSet<_> = ch.cliques.iter().flat_map(|c| c.pairs().collect::<Vec<_>>()).collect();
        assert_eq!(covered.len(), 15);
        assert!(ch.aux_pairs.is_empty());
    }

    #[test]
    fn triangles_survive_extension() {
        // two triangles sharing an edge plus a pendant cycle
        let g = PairGraph::from_edges(&[(1, 2), (2, 3), (1, 3), (3, 4), (2, 4), (4, 5), (5, 6), (6, 7), (7, 4)]);
        let tri = enumerate_three_cycles(&g);
        let maximal = chordal_maximal_cliques(&g);
        for t in &tri.cliques {
            assert!(maximal.iter().any(|m| t.buses.iter().all(|b| m.contains(b))), "{:?}", t.buses);
        }
    }
}
