mod common;

use std::collections::BTreeMap;

use acopf_cutplane::case_io::{Branch, Bus, BusId, CaseData, CostFunction, Generator};
use acopf_cutplane::network::{branch_admittance, canonical, chordal_cliques, chordal_maximal_cliques, enumerate_three_cycles, PairGraph};
use acopf_cutplane::relaxation::{End, ModelOptions, RelaxationModel, VarKey};
use acopf_cutplane::Complex;
use common::random_phasor;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Complex power leaving each end of a pi-model branch.
fn oracle_flows(br: &Branch, vk: Complex, vm: Complex) -> (Complex, Complex) {
    let y = Complex::new(1.0, 0.0) / Complex::new(br.r, br.x);
    let ysh = Complex::new(0.0, br.b_charge / 2.0);
    let t = Complex::from_polar(br.tap, br.shift);
    let ik = (y + ysh) / (br.tap * br.tap) * vk - y / t.conj() * vm;
    let im = (y + ysh) * vm - y / t * vk;
    (vk * ik.conj(), vm * im.conj())
}

fn random_branch(rng: &mut ChaCha8Rng, from: BusId, to: BusId) -> Branch {
    Branch {
        from_bus: from,
        to_bus: to,
        r: rng.gen_range(0.0..0.1),
        x: rng.gen_range(0.01..0.5),
        b_charge: rng.gen_range(0.0..0.3),
        tap: if rng.gen_bool(0.3) { rng.gen_range(0.9..1.1) } else { 1.0 },
        shift: if rng.gen_bool(0.2) { rng.gen_range(-0.2..0.2) } else { 0.0 },
        rate_a: None,
        in_service: true,
    }
}

#[test]
fn admittance_reproduces_complex_power() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..100 {
        let br = random_branch(&mut rng, BusId(1), BusId(2));
        let adm = branch_admittance(&br).unwrap();
        let (vk, vm) = (random_phasor(&mut rng, 0.8, 1.2), random_phasor(&mut rng, 0.8, 1.2));
        let p = vk * vm.conj();
        let f = adm.flows(vk.norm_sqr(), vm.norm_sqr(), p.re, p.im);
        let (sk, sm) = oracle_flows(&br, vk, vm);
        for (got, want) in f.iter().zip([sk.re, sk.im, sm.re, sm.im]) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }
}

/// A connected grid on 2-4 buses with scattered ids, random orientation and
/// a feasible operating point built from random phasors.
fn random_grid(rng: &mut ChaCha8Rng) -> (CaseData, BTreeMap<BusId, Complex>, Vec<(f64, f64)>) {
    let n = rng.gen_range(2..=4);
    let mut ids: Vec<u32> = (1..=9).collect();
    ids.shuffle(rng);
    let ids: Vec<BusId> = ids[..n].iter().map(|&i| BusId(i)).collect();
    let mut branches = Vec::new();
    let mut link = |rng: &mut ChaCha8Rng, a: BusId, b: BusId| {
        let (f, t) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
        branches.push(random_branch(rng, f, t));
    };
    for w in ids.windows(2) {
        link(rng, w[0], w[1]);
    }
    for i in 0..n {
        for j in i + 2..n {
            if rng.gen_bool(0.6) {
                link(rng, ids[i], ids[j]);
            }
        }
    }
    if rng.gen_bool(0.5) {
        link(rng, ids[0], ids[1]);
    }

    let v: BTreeMap<BusId, Complex> = ids.iter().map(|&b| (b, random_phasor(rng, 0.92, 1.08))).collect();
    let mut injection: BTreeMap<BusId, Complex> = ids.iter().map(|&b| (b, Complex::new(0.0, 0.0))).collect();
    for br in &mut branches {
        let (sk, sm) = oracle_flows(br, v[&br.from_bus], v[&br.to_bus]);
        *injection.get_mut(&br.from_bus).unwrap() += sk;
        *injection.get_mut(&br.to_bus).unwrap() += sm;
        if rng.gen_bool(0.5) {
            br.rate_a = Some(sk.norm().max(sm.norm()) * rng.gen_range(1.0..1.5) + 1e-6);
        }
    }
    let mut buses = Vec::new();
    let mut generators = Vec::new();
    let mut dispatch = Vec::new();
    for (i, &id) in ids.iter().enumerate() {
        let (gs, bs) = (rng.gen_range(0.0..0.05), rng.gen_range(-0.2..0.2));
        let v2 = v[&id].norm_sqr();
        let net = injection[&id] + Complex::new(gs * v2, -bs * v2);
        let load = Complex::new(rng.gen_range(0.0..1.0), rng.gen_range(-0.3..0.3));
        buses.push(Bus {
            id,
            kind: if i == 0 { 3 } else { 1 },
            p_load: load.re,
            q_load: load.im,
            v_min: 0.9,
            v_max: 1.1,
            shunt_g: gs,
            shunt_b: bs,
        });
        let pg = net.re + load.re;
        let qg = net.im + load.im;
        generators.push(Generator {
            bus: id,
            p_min: pg - rng.gen_range(0.0..1.0),
            p_max: pg + rng.gen_range(0.0..1.0),
            q_min: qg - 1.0,
            q_max: qg + 1.0,
            cost: CostFunction::Polynomial([1.0, rng.gen_range(0.0..40.0), rng.gen_range(0.0..100.0)]),
            in_service: true,
        });
        dispatch.push((pg, qg));
    }
    let case = CaseData { name: "random".into(), base_mva: 100.0, buses, branches, generators };
    (case, v, dispatch)
}

#[test]
fn base_model_admits_every_feasible_operating_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..300 {
        let (case, v, dispatch) = random_grid(&mut rng);
        case.validate().unwrap();
        let model = RelaxationModel::build(&case, ModelOptions::default()).unwrap();
        let x = model.point_from_voltages(&v, &dispatch);
        // the flow columns hold the oracle flows
        for (idx, br) in case.branches.iter().enumerate() {
            let (sk, sm) = oracle_flows(br, v[&br.from_bus], v[&br.to_bus]);
            let get = |k: VarKey| x[model.space.col(&k).unwrap()];
            assert!((get(VarKey::P { branch: idx, end: End::From }) - sk.re).abs() < 1e-10);
            assert!((get(VarKey::Q { branch: idx, end: End::To }) - sm.im).abs() < 1e-10);
        }
        let viol = model.lp.max_violation(&x);
        assert!(viol < 1e-9, "trial {trial}: row violation {viol}");
        for (j, col) in model.lp.columns().iter().enumerate() {
            assert!(x[j] >= col.lower - 1e-9 && x[j] <= col.upper + 1e-9, "trial {trial}: column {} out of bounds", model.space.key(j));
        }
    }
}

fn graph_strategy() -> impl Strategy<Value = Vec<(u32, u32)>> {
    proptest::collection::vec((1u32..=9, 1u32..=9), 0..25)
        .prop_map(|e| e.into_iter().filter(|(a, b)| a != b).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn three_cycles_match_brute_force(edges in graph_strategy()) {
        let g = PairGraph::from_edges(&edges);
        let found = enumerate_three_cycles(&g);
        let verts: Vec<BusId> = g.vertices.to_vec();
        let mut expected = Vec::new();
        for i in 0..verts.len() {
            for j in i + 1..verts.len() {
                for k in j + 1..verts.len() {
                    let (a, b, c) = (verts[i], verts[j], verts[k]);
                    if g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c) {
                        expected.push(vec![a, b, c]);
                    }
                }
            }
        }
        let mut got: Vec<Vec<BusId>> = found.cliques.iter().map(|c| c.buses.clone()).collect();
        got.sort();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn triangles_survive_chordal_extension(edges in graph_strategy(), size in 3usize..=5) {
        let g = PairGraph::from_edges(&edges);
        let maximal = chordal_maximal_cliques(&g);
        for t in enumerate_three_cycles(&g).cliques {
            prop_assert!(maximal.iter().any(|m| t.buses.iter().all(|b| m.contains(b))));
        }
        let family = chordal_cliques(&g, size);
        let mut covered = std::collections::BTreeSet::new();
        for c in &family.cliques {
            prop_assert!(c.buses.len() >= 3 && c.buses.len() <= size);
            for (a, b) in c.pairs() {
                prop_assert!(g.has_edge(a, b) || family.aux_pairs.contains(&canonical(a, b)));
                covered.insert(canonical(a, b));
            }
        }
        // every original edge inside a maximal clique of size >= 3 is covered
        for m in maximal.iter().filter(|m| m.len() >= 3) {
            for i in 0..m.len() {
                for j in i + 1..m.len() {
                    if g.has_edge(m[i], m[j]) {
                        prop_assert!(covered.contains(&canonical(m[i], m[j])));
                    }
                }
            }
        }
    }
}
