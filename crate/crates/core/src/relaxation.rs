//! The base linear relaxation and its variable space.
//!
//! Every nonconvex link to the voltage phasors is dropped: `v2[k]` stands for
//! `|V_k|^2` and `c + js` for `V_k V_m^*` on each canonical pair `(k < m)`.
//! Flow definitions, power balance, generator boxes and cost supports are the
//! only constraints at the start; everything else arrives as cuts.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_complex::{Complex, Complex64};

use crate::case_io::{BusId, CaseData, CostFunction};
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::lp::{LpProblem, Row, RowId, Sense};
use crate::network::{branch_admittance, canonical, BranchAdmittance, PairGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    From,
    To,
}

/// Symbolic name of an LP column, stable across model rebuilds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    V2(BusId),
    C(BusId, BusId),
    S(BusId, BusId),
    P { branch: usize, end: End },
    Q { branch: usize, end: End },
    Pg(usize),
    Qg(usize),
    Cost(usize),
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let end = |e: &End| if *e == End::From { 'f' } else { 't' };
        match self {
            VarKey::V2(k) => write!(f, "v2:{k}"),
            VarKey::C(k, m) => write!(f, "c:{k}:{m}"),
            VarKey::S(k, m) => write!(f, "s:{k}:{m}"),
            VarKey::P { branch, end: e } => write!(f, "p:{branch}:{}", end(e)),
            VarKey::Q { branch, end: e } => write!(f, "q:{branch}:{}", end(e)),
            VarKey::Pg(g) => write!(f, "pg:{g}"),
            VarKey::Qg(g) => write!(f, "qg:{g}"),
            VarKey::Cost(g) => write!(f, "t:{g}"),
        }
    }
}

impl FromStr for VarKey {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.parse::<u32>().map_err(|_| format!("bad number `{t}` in `{s}`"));
        let idx = |t: &str| t.parse::<usize>().map_err(|_| format!("bad index `{t}` in `{s}`"));
        let end = |t: &str| match t {
            "f" => Ok(End::From),
            "t" => Ok(End::To),
            _ => Err(format!("bad branch end `{t}` in `{s}`")),
        };
        match parts.as_slice() {
            ["v2", k] => Ok(VarKey::V2(BusId(num(k)?))),
            ["c", k, m] => Ok(VarKey::C(BusId(num(k)?), BusId(num(m)?))),
            ["s", k, m] => Ok(VarKey::S(BusId(num(k)?), BusId(num(m)?))),
            ["p", b, e] => Ok(VarKey::P { branch: idx(b)?, end: end(e)? }),
            ["q", b, e] => Ok(VarKey::Q { branch: idx(b)?, end: end(e)? }),
            ["pg", g] => Ok(VarKey::Pg(idx(g)?)),
            ["qg", g] => Ok(VarKey::Qg(idx(g)?)),
            ["t", g] => Ok(VarKey::Cost(idx(g)?)),
            _ => Err(format!("unrecognized variable `{s}`")),
        }
    }
}

/// Column bookkeeping: one home per modeled quantity.
#[derive(Debug, Clone, Default)]
pub struct VariableSpace {
    keys: Vec<VarKey>,
    index: HashMap<VarKey, usize>,
    pairs: BTreeMap<(BusId, BusId), (usize, usize)>,
}

impl VariableSpace {
    fn insert(&mut self, key: VarKey, col: usize) {
        debug_assert_eq!(col, self.keys.len());
        self.keys.push(key);
        self.index.insert(key, col);
        match key {
            VarKey::C(k, m) => self.pairs.entry((k, m)).or_insert((usize::MAX, usize::MAX)).0 = col,
            VarKey::S(k, m) => self.pairs.entry((k, m)).or_insert((usize::MAX, usize::MAX)).1 = col,
            _ => {}
        }
    }

    /// Space with columns numbered in iteration order.
    pub fn from_keys(keys: impl IntoIterator<Item = VarKey>) -> Self {
        let mut space = Self::default();
        for key in keys {
            let col = space.len();
            space.insert(key, col);
        }
        space
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key(&self, col: usize) -> VarKey {
        self.keys[col]
    }

    pub fn col(&self, key: &VarKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn v2(&self, bus: BusId) -> Option<usize> {
        self.col(&VarKey::V2(bus))
    }

    /// `(c, s)` columns of a canonical pair.
    pub fn pair(&self, a: BusId, b: BusId) -> Option<(usize, usize)> {
        self.pairs.get(&canonical(a, b)).copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (BusId, BusId)> + '_ {
        self.pairs.keys().copied()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ModelOptions {
    /// Restrict `c >= 0` (valid when angle differences stay below 90 degrees).
    pub c_nonneg: bool,
    /// Tangent points installed per quadratic cost at build time.
    pub cost_support_points: usize,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self { c_nonneg: false, cost_support_points: 5 }
    }
}

/// The dynamic LP: base rows plus whatever the cut pool installs.
#[derive(Debug, Clone)]
pub struct RelaxationModel {
    pub case: CaseData,
    pub graph: PairGraph,
    pub admittances: Vec<Option<BranchAdmittance>>,
    pub space: VariableSpace,
    pub lp: LpProblem,
    pub base_rows: Vec<RowId>,
    pub options: ModelOptions,
    pub solution: Option<Vec<f64>>,
    pub round: usize,
    v_max: BTreeMap<BusId, f64>,
}

impl RelaxationModel {
    pub fn build(case: &CaseData, options: ModelOptions) -> Result<Self> {
        let adm = case
            .branches
            .iter()
            .map(|b| if b.in_service { branch_admittance(b).map(Some) } else { Ok(None) })
            .collect::<Result<Vec<_>>>()?;
        build_m0(case, adm, PairGraph::from_case(case), options)
    }

    pub fn value(&self, key: &VarKey) -> Option<f64> {
        let col = self.space.col(key)?;
        self.solution.as_ref().map(|x| x[col])
    }

    /// Adds `(c, s)` columns for pairs that are not branch pairs (chordal fill).
    pub fn add_aux_pairs(&mut self, pairs: impl IntoIterator<Item = (BusId, BusId)>) -> usize {
        let mut added = 0;
        for (a, b) in pairs {
            let (a, b) = canonical(a, b);
            if self.space.pair(a, b).is_some() {
                continue;
            }
            self.add_pair_columns(a, b);
            added += 1;
        }
        if added > 0 {
            if let Some(x) = &mut self.solution {
                x.resize(self.space.len(), 0.0);
            }
        }
        added
    }

    fn add_pair_columns(&mut self, a: BusId, b: BusId) {
        let bound = self.v_max[&a] * self.v_max[&b];
        let c_lo = if self.options.c_nonneg { 0.0 } else { -bound };
        let c = self.lp.add_column(c_lo, bound, 0.0);
        self.space.insert(VarKey::C(a, b), c);
        let s = self.lp.add_column(-bound, bound, 0.0);
        self.space.insert(VarKey::S(a, b), s);
    }

    /// Variable vector induced by voltage phasors and generator dispatch;
    /// flows follow the branch equations, cost epigraphs sit on the cost.
    pub fn point_from_voltages(
        &self,
        voltages: &BTreeMap<BusId, Complex64>,
        dispatch: &[(f64, f64)],
    ) -> Vec<f64> {
        let mut x = vec![0.0; self.space.len()];
        for (col, key) in self.space.keys.iter().enumerate() {
            x[col] = match *key {
                VarKey::V2(k) => voltages[&k].norm_sqr(),
                VarKey::C(k, m) => (voltages[&k] * voltages[&m].conj()).re,
                VarKey::S(k, m) => (voltages[&k] * voltages[&m].conj()).im,
                VarKey::P { branch, end } | VarKey::Q { branch, end } => {
                    let br = &self.case.branches[branch];
                    let adm = self.admittances[branch].expect("active branch");
                    let (vk, vm) = (voltages[&br.from_bus], voltages[&br.to_bus]);
                    let prod = vk * vm.conj();
                    let f = adm.flows(vk.norm_sqr(), vm.norm_sqr(), prod.re, prod.im);
                    let p_side = matches!(key, VarKey::P { .. });
                    match (end, p_side) {
                        (End::From, true) => f[0],
                        (End::From, false) => f[1],
                        (End::To, true) => f[2],
                        (End::To, false) => f[3],
                    }
                }
                VarKey::Pg(g) => dispatch[g].0,
                VarKey::Qg(g) => dispatch[g].1,
                VarKey::Cost(g) => self.case.generators[g].cost.value(dispatch[g].0),
            };
        }
        x
    }

    /// `X_i(y)` for the buses of `clique`, in the order given.
    pub fn clique_matrix(&self, point: &[f64], clique: &[BusId]) -> Result<HermitianMatrix<f64>> {
        clique_matrix(&self.space, point, clique)
    }
}

/// Assembles M0: voltage, generator and pair bounds, flow definitions, bus
/// balances, thermal boxes and initial cost supports, minimizing total cost.
pub fn build_m0(
    case: &CaseData,
    admittances: Vec<Option<BranchAdmittance>>,
    graph: PairGraph,
    options: ModelOptions,
) -> Result<RelaxationModel> {
    let mut lp = LpProblem::new();
    let mut space = VariableSpace::default();
    let mut base_rows = Vec::new();
    let v_max: BTreeMap<BusId, f64> = case.buses.iter().map(|b| (b.id, b.v_max)).collect();

    for bus in case.buses.iter().filter(|b| b.in_service()) {
        let col = lp.add_column(bus.v_min * bus.v_min, bus.v_max * bus.v_max, 0.0);
        space.insert(VarKey::V2(bus.id), col);
    }
    let mut model = RelaxationModel {
        case: case.clone(),
        graph,
        admittances,
        space,
        lp,
        base_rows: Vec::new(),
        options,
        solution: None,
        round: 0,
        v_max,
    };
    let edges: Vec<_> = model.graph.edges().collect();
    for (a, b) in edges {
        model.add_pair_columns(a, b);
    }
    let RelaxationModel { lp, space, admittances, .. } = &mut model;

    // flows, with per-bus incidence for the balance rows
    let mut p_out: BTreeMap<BusId, Vec<usize>> = BTreeMap::new();
    let mut q_out: BTreeMap<BusId, Vec<usize>> = BTreeMap::new();
    for (idx, br) in case.active_branches() {
        let adm = admittances[idx].ok_or_else(|| Error::Invariant(format!("branch {idx} lacks admittance")))?;
        let (k, m) = (br.from_bus, br.to_bus);
        let vk = space.v2(k).ok_or_else(|| Error::Invariant(format!("bus {k} out of service but branch active")))?;
        let vm = space.v2(m).ok_or_else(|| Error::Invariant(format!("bus {m} out of service but branch active")))?;
        let (c, s) = space.pair(k, m).ok_or_else(|| Error::Invariant(format!("pair {k}-{m} missing")))?;
        // s of the branch orientation, relative to the canonical pair
        let sign = if k < m { 1.0 } else { -1.0 };
        let u = br.rate_a.unwrap_or(f64::INFINITY);
        let (lo, hi) = if u.is_finite() { (-u, u) } else { (f64::NEG_INFINITY, f64::INFINITY) };

        let mut flow = |lp: &mut LpProblem, space: &mut VariableSpace, key: VarKey, diag: (usize, f64), cc: f64, sc: f64| {
            let col = lp.add_column(lo, hi, 0.0);
            space.insert(key, col);
            base_rows.push(lp.add_row(Row::new(
                vec![(col, 1.0), (diag.0, -diag.1), (c, -cc), (s, -sc * sign)],
                Sense::Eq,
                0.0,
            )));
            col
        };
        let pf = flow(lp, space, VarKey::P { branch: idx, end: End::From }, (vk, adm.g_kk), adm.g_km, adm.b_km);
        let qf = flow(lp, space, VarKey::Q { branch: idx, end: End::From }, (vk, -adm.b_kk), -adm.b_km, adm.g_km);
        let pt = flow(lp, space, VarKey::P { branch: idx, end: End::To }, (vm, adm.g_mm), adm.g_mk, -adm.b_mk);
        let qt = flow(lp, space, VarKey::Q { branch: idx, end: End::To }, (vm, -adm.b_mm), -adm.b_mk, -adm.g_mk);
        p_out.entry(k).or_default().push(pf);
        q_out.entry(k).or_default().push(qf);
        p_out.entry(m).or_default().push(pt);
        q_out.entry(m).or_default().push(qt);
    }

    let mut objective_cols = Vec::new();
    let mut gens_at: BTreeMap<BusId, Vec<(usize, usize)>> = BTreeMap::new();
    for (g, gen) in case.active_generators() {
        let pg = lp.add_column(gen.p_min, gen.p_max, 0.0);
        space.insert(VarKey::Pg(g), pg);
        let qg = lp.add_column(gen.q_min, gen.q_max, 0.0);
        space.insert(VarKey::Qg(g), qg);
        let t = lp.add_column(f64::NEG_INFINITY, f64::INFINITY, 1.0);
        space.insert(VarKey::Cost(g), t);
        objective_cols.push(t);
        gens_at.entry(gen.bus).or_default().push((pg, qg));

        let supports: Vec<(f64, f64)> = match &gen.cost {
            CostFunction::Polynomial(_) if gen.cost.is_curved() => {
                support_points(gen.p_min, gen.p_max, options.cost_support_points)
                    .into_iter()
                    .map(|p| {
                        let slope = gen.cost.derivative(p);
                        (slope, gen.cost.value(p) - slope * p)
                    })
                    .collect()
            }
            _ => gen.cost.segments(),
        };
        for (slope, icpt) in supports {
            // t - slope * p >= icpt
            base_rows.push(lp.add_row(Row::new(vec![(t, 1.0), (pg, -slope)], Sense::Ge, icpt)));
        }
    }

    for bus in case.buses.iter().filter(|b| b.in_service()) {
        let v = space.v2(bus.id).expect("in-service bus has v2");
        let gens = gens_at.get(&bus.id).map_or(&[][..], Vec::as_slice);
        let mut p_terms: Vec<(usize, f64)> = p_out.get(&bus.id).map_or(vec![], |c| c.iter().map(|&j| (j, 1.0)).collect());
        let mut q_terms: Vec<(usize, f64)> = q_out.get(&bus.id).map_or(vec![], |c| c.iter().map(|&j| (j, 1.0)).collect());
        if bus.shunt_g != 0.0 {
            p_terms.push((v, bus.shunt_g));
        }
        if bus.shunt_b != 0.0 {
            q_terms.push((v, -bus.shunt_b));
        }
        p_terms.extend(gens.iter().map(|&(pg, _)| (pg, -1.0)));
        q_terms.extend(gens.iter().map(|&(_, qg)| (qg, -1.0)));
        if p_terms.is_empty() && bus.p_load == 0.0 {
            continue;
        }
        base_rows.push(lp.add_row(Row::new(p_terms, Sense::Eq, -bus.p_load)));
        base_rows.push(lp.add_row(Row::new(q_terms, Sense::Eq, -bus.q_load)));
    }

    if case.buses.iter().all(|b| b.kind != 3) {
        log::warn!("case has no reference bus; bounds remain valid");
    }
    debug_assert!(objective_cols.iter().all(|&c| lp.columns()[c].cost == 1.0));
    model.base_rows = base_rows;
    Ok(model)
}

fn support_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if !(hi > lo) || count <= 1 {
        return vec![lo.max(f64::MIN)];
    }
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}

/// `X(y)` on `clique`: `v2` on the diagonal and `c + js` off it, with the
/// imaginary part negated when the local order opposes the canonical pair.
pub fn clique_matrix(space: &VariableSpace, point: &[f64], clique: &[BusId]) -> Result<HermitianMatrix<f64>> {
    let n = clique.len();
    let mut x = HermitianMatrix::zeros(n);
    for i in 0..n {
        let v = space.v2(clique[i]).ok_or_else(|| Error::Invariant(format!("bus {} has no v2 column", clique[i])))?;
        x.set(i, i, Complex::new(point[v], 0.0));
        for j in i + 1..n {
            let (a, b) = (clique[i], clique[j]);
            let (c, s) = space
                .pair(a, b)
                .ok_or_else(|| Error::Invariant(format!("pair {a}-{b} has no (c, s) columns")))?;
            let im = if a < b { point[s] } else { -point[s] };
            x.set(i, j, Complex::new(point[c], im));
        }
    }
    Ok(x)
}
