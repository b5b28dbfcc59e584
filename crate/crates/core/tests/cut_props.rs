mod common;

use std::io::{BufReader, Cursor};

use acopf_cutplane::case_io::{perturb_loads, BusId};
use acopf_cutplane::cut_pool::{load_cuts, CutPool, PoolSettings};
use acopf_cutplane::driver::{cutplane, RunConfig};
use acopf_cutplane::lp::LpProblem;
use acopf_cutplane::relaxation::{clique_matrix, ModelOptions, RelaxationModel, VarKey, VariableSpace};
use acopf_cutplane::separation::{eigen_cut, eigen_cut_matrix, jabr_cut, projection_cut, projection_cut_matrix, CutKind, CutOrigin, LinearCut, SeparationSettings};
use acopf_cutplane::{Error, HermitianMatrix};
use common::{case14, oracle_eigenvalues, random_hermitian, random_phasor};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Space over buses 1..=n with every pair modeled.
fn clique_space(n: u32) -> VariableSpace {
    let mut keys: Vec<VarKey> = (1..=n).map(|b| VarKey::V2(BusId(b))).collect();
    for a in 1..=n {
        for b in a + 1..=n {
            keys.push(VarKey::C(BusId(a), BusId(b)));
            keys.push(VarKey::S(BusId(a), BusId(b)));
        }
    }
    VariableSpace::from_keys(keys)
}

/// Writes the Hermitian matrix `x` (indexed by `order`) into the space.
fn point_of(space: &VariableSpace, x: &HermitianMatrix, order: &[BusId]) -> Vec<f64> {
    let mut p = vec![0.0; space.len()];
    for i in 0..order.len() {
        p[space.v2(order[i]).unwrap()] = x.get(i, i).re;
        for j in i + 1..order.len() {
            let (c, s) = space.pair(order[i], order[j]).unwrap();
            let z = if order[i] < order[j] { x.get(i, j) } else { x.get(i, j).conj() };
            p[c] = z.re;
            p[s] = z.im;
        }
    }
    p
}

fn rank_one(space: &VariableSpace, n: u32, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let v: Vec<_> = (0..n).map(|_| random_phasor(rng, 0.5, 1.5)).collect();
    let order: Vec<BusId> = (1..=n).map(BusId).collect();
    let x = HermitianMatrix::from_outer_sum(n as usize, [(1.0, v.as_slice())]);
    point_of(space, &x, &order)
}

#[test]
fn sign_flipped_triangle_cut() {
    let space = clique_space(3);
    let order = [BusId(1), BusId(2), BusId(3)];
    let mut p = vec![0.0; space.len()];
    for b in order {
        p[space.v2(b).unwrap()] = 1.0;
    }
    for (a, b, c) in [(1, 2, 1.0), (1, 3, 1.0), (2, 3, -1.0)] {
        p[space.pair(BusId(a), BusId(b)).unwrap().0] = c;
    }
    let x = clique_matrix(&space, &p, &order).unwrap();
    let lmin = oracle_eigenvalues(&x)[0];
    let m = eigen_cut_matrix(&x, 1e-8).unwrap().unwrap();
    assert!((m.violation + lmin).abs() < 1e-12);
    let cut = eigen_cut(&space, &p, &order, 0, &SeparationSettings::default()).unwrap().unwrap();
    assert!(cut.violation > 0.0);
}

#[test]
fn psd_cuts_hold_on_rank_one_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let settings = SeparationSettings::default();
    for n in 2..=5u32 {
        let space = clique_space(n);
        let mut order: Vec<BusId> = (1..=n).map(BusId).collect();
        let mut cuts = Vec::new();
        while cuts.len() < 40 {
            order.shuffle(&mut rng);
            let x = random_hermitian(&mut rng, n as usize);
            let p = point_of(&space, &x, &order);
            cuts.extend(eigen_cut(&space, &p, &order, 0, &settings).unwrap());
            cuts.extend(projection_cut(&space, &p, &order, 0, &settings).unwrap());
            if n >= 2 {
                cuts.extend(jabr_cut(&space, &p, (order[0], order[1]), 0, &settings).unwrap());
            }
        }
        for _ in 0..200 {
            let y = rank_one(&space, n, &mut rng);
            for cut in &cuts {
                assert!(cut.violation_at(&y) <= 1e-9, "{:?} violated by {}", cut.kind, cut.violation_at(&y));
            }
        }
    }
}

#[test]
fn clique_order_does_not_change_the_cut() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let settings = SeparationSettings::default();
    for _ in 0..200 {
        let n = rng.gen_range(2..=5u32);
        let space = clique_space(n);
        let order: Vec<BusId> = (1..=n).map(BusId).collect();
        let p = point_of(&space, &random_hermitian(&mut rng, n as usize), &order);
        let Some(base) = eigen_cut(&space, &p, &order, 0, &settings).unwrap() else { continue };
        let mut perm = order.clone();
        perm.shuffle(&mut rng);
        let other = eigen_cut(&space, &p, &perm, 0, &settings).unwrap().unwrap();
        assert!(base.cosine(&other) > 1.0 - 1e-9, "cosine {}", base.cosine(&other));
        assert!((base.violation - other.violation).abs() < 1e-9);
    }
}

#[test]
fn identities_against_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    while checked < 200 {
        let n = rng.gen_range(2..=5);
        let x = random_hermitian(&mut rng, n);
        let ev = oracle_eigenvalues(&x);
        if ev[0] >= 0.0 {
            continue;
        }
        let e = eigen_cut_matrix(&x, 0.0).unwrap().unwrap();
        let p = projection_cut_matrix(&x, 0.0).unwrap().unwrap();
        let sq: f64 = ev.iter().filter(|l| **l < 0.0).map(|l| l * l).sum();
        assert!((e.violation + ev[0]).abs() < 1e-9);
        assert!((p.violation - sq).abs() < 1e-9);
        checked += 1;
    }
}

fn random_cut(rng: &mut ChaCha8Rng, ncols: usize) -> LinearCut {
    let k = rng.gen_range(1..=3);
    let terms: Vec<(usize, f64)> = (0..k).map(|_| (rng.gen_range(0..ncols), rng.gen_range(-1.0..1.0))).collect();
    let origin = CutOrigin::Pair(BusId(rng.gen_range(1..4)), BusId(9));
    LinearCut::new(terms, rng.gen_range(0.0..1.0), CutKind::Eigen, origin, &vec![0.0; ncols], 0)
        .unwrap_or_else(|| LinearCut::new([(0, 1.0)], 0.5, CutKind::Eigen, CutOrigin::Loaded, &vec![0.0; ncols], 0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pool_and_rows_stay_in_bijection(seed in 0u64..100_000, steps in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ncols = 6;
        let mut lp = LpProblem::new();
        for _ in 0..ncols {
            lp.add_column(-1.0, 1.0, 0.0);
        }
        let mut pool = CutPool::new(PoolSettings { max_age: rng.gen_range(1..4), ..PoolSettings::default() });
        for _ in 0..steps {
            let cands: Vec<LinearCut> = (0..rng.gen_range(0..6)).map(|_| random_cut(&mut rng, ncols)).collect();
            pool.admit(&mut lp, cands);
            let x: Vec<f64> = (0..ncols).map(|_| rng.gen_range(-1.0..1.0)).collect();
            pool.age_and_drop(&mut lp, &x).unwrap();
            prop_assert_eq!(lp.row_count(), pool.len());
            for e in pool.entries() {
                let row = lp.row(e.row).expect("pool row present in model");
                prop_assert_eq!(&row.terms, &e.cut.terms);
            }
            let mut hashes: Vec<u64> = pool.cuts().map(|c| c.hash).collect();
            hashes.sort();
            hashes.dedup();
            prop_assert_eq!(hashes.len(), pool.len());
        }
    }
}

#[test]
fn save_load_round_trip_and_perturbed_reload() {
    let case = case14();
    let run = cutplane(&case, &RunConfig::default(), None).unwrap();
    let mut bytes = Vec::new();
    run.pool.save_cuts(&run.model, &mut bytes).unwrap();

    let mut fresh = RelaxationModel::build(&case, ModelOptions::default()).unwrap();
    let (loaded, stats) = load_cuts(BufReader::new(Cursor::new(&bytes)), &mut fresh, PoolSettings::default()).unwrap();
    assert_eq!(stats.loaded, run.pool.len());
    assert_eq!(stats.skipped, 0);
    for (a, b) in run.pool.entries().iter().zip(loaded.entries()) {
        assert_eq!(a.cut.kind, b.cut.kind);
        assert_eq!(a.cut.rhs, b.cut.rhs);
        let named = |m: &RelaxationModel, c: &LinearCut| -> Vec<(String, f64)> {
            let mut t: Vec<(String, f64)> = c.terms.iter().map(|&(j, v)| (m.space.key(j).to_string(), v)).collect();
            t.sort_by(|a, b| a.0.cmp(&b.0));
            t
        };
        assert_eq!(named(&run.model, &a.cut), named(&fresh, &b.cut));
        assert_eq!(b.age, 0);
    }

    let perturbed = perturb_loads(&case, 9, 0.0, 0.01);
    let mut other = RelaxationModel::build(&perturbed, ModelOptions::default()).unwrap();
    let (_, stats) = load_cuts(BufReader::new(Cursor::new(&bytes)), &mut other, PoolSettings::default()).unwrap();
    assert_eq!(stats.loaded, run.pool.len());
    assert_eq!(stats.skipped, 0);
}

#[test]
fn truncated_and_foreign_files() {
    let case = case14();
    let run = cutplane(&case, &RunConfig::default(), None).unwrap();
    let mut bytes = Vec::new();
    run.pool.save_cuts(&run.model, &mut bytes).unwrap();
    let text = String::from_utf8(bytes).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let cut_at = lines[..4].join("\n").len() + 1 + lines[4].len() / 2;
    let truncated = &text[..cut_at];
    let mut model = RelaxationModel::build(&case, ModelOptions::default()).unwrap();
    match load_cuts(BufReader::new(Cursor::new(truncated)), &mut model, PoolSettings::default()) {
        Err(Error::CutFile { record, message }) => {
            assert_eq!(record, 4);
            assert!(message.contains("last good record 3"), "{message}");
        }
        other => panic!("expected a cut-file error, got {other:?}"),
    }

    let foreign = "{\"fmt\":\"cutpool\",\"v\":1}\n{\"kind\":\"jabr\",\"support\":[\"v2:99\",\"v2:1\"],\"coeffs\":[1.0,1.0],\"rhs\":0.0}\n";
    let mut model = RelaxationModel::build(&case, ModelOptions::default()).unwrap();
    let (pool, stats) = load_cuts(BufReader::new(Cursor::new(foreign)), &mut model, PoolSettings::default()).unwrap();
    assert_eq!((pool.len(), stats.skipped), (0, 1));
    assert!(load_cuts(BufReader::new(Cursor::new("{\"fmt\":\"other\"}\n")), &mut model, PoolSettings::default()).is_err());
}
