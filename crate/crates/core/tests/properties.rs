mod common {
    pub mod lattice_model;
}

use common::lattice_model::{random_model, Model};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tatetrace_core::diagram::VertexSet;
use tatetrace_core::equiv::{
    check_motequiv, pattern_from_towers, splitting_pattern, splitting_tower, DiagramIso, EquivError, TitsTable,
};
use tatetrace_core::motive::{ExtensionLattice, LatticeNode};
use tatetrace_core::{DynkinDiagram, StarAction};

fn model(seed: u64) -> (Model, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = random_model(&mut rng, 4);
    (m, rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn iso_iff_traces_agree(seed in any::<u64>(), perturb in any::<bool>()) {
        let (m, mut rng) = model(seed);
        let a = m.random_terms(&mut rng, 4);
        let b = if perturb { m.perturb(&mut rng, &a) } else { m.rewrite(&mut rng, &a) };
        let (x, y) = (m.motive(a), m.motive(b));
        let c = &m.catalog;
        let iso = c.is_isomorphic(&x, &y).unwrap();
        prop_assert_eq!(iso.isomorphic, c.trace_equal_everywhere(&x, &y).unwrap());
        prop_assert_eq!(iso.isomorphic, c.trace_equal_on_partial_splitting_nodes(&x, &y).unwrap());
        if !perturb {
            prop_assert!(iso.isomorphic);
        }
        prop_assert_eq!(iso.isomorphic, c.is_isomorphic(&y, &x).unwrap().isomorphic);
    }

    #[test]
    fn cancellation_never_fails(seed in any::<u64>()) {
        let (m, mut rng) = model(seed);
        let n = m.random_terms(&mut rng, 3);
        let n2 = m.rewrite(&mut rng, &n);
        let mm = m.dominated_terms(&mut rng, &n);
        let c = &m.catalog;
        let v = c.cancellation_check(&m.motive(mm), &m.motive(n), &m.motive(n2)).unwrap();
        prop_assert!(v.holds);
        prop_assert_eq!(v.certificate.len(), c.lattice().len());
    }

    #[test]
    fn towers_reach_every_trace(seed in any::<u64>()) {
        let (m, mut rng) = model(seed);
        let x = m.motive(m.complete_terms(&mut rng));
        let c = &m.catalog;
        let tower = splitting_tower(c, &x).unwrap();
        let sums: Vec<u64> = tower.iter().map(|&e| c.tate_trace(&x, e).unwrap().coeff_sum()).collect();
        prop_assert!(sums.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(*sums.last().unwrap(), c.rank(&x).unwrap());
        prop_assert!(tower.len() <= m.classes.len() + 1);
        prop_assert_eq!(pattern_from_towers(c, &x).unwrap(), splitting_pattern(c, &x).unwrap());
    }

    #[test]
    fn tower_pattern_is_a_subset(seed in any::<u64>()) {
        let (m, mut rng) = model(seed);
        let x = m.motive(m.random_terms(&mut rng, 3));
        let c = &m.catalog;
        match pattern_from_towers(c, &x) {
            Ok(p) => prop_assert!(p.is_subset(&splitting_pattern(c, &x).unwrap())),
            Err(e) => prop_assert!(matches!(e, EquivError::TowerStalled(_)), "{e}"),
        }
    }
}

fn b3_star() -> StarAction {
    StarAction::trivial(DynkinDiagram::parse("B3").unwrap())
}

/// A chain of `n` nodes with random p-special flags and a random monotone
/// table of distinguished sets.
fn random_table(rng: &mut ChaCha8Rng, lattice: &ExtensionLattice) -> TitsTable {
    use rand::Rng;
    let mut current = VertexSet::new();
    let mut sets = Vec::new();
    for _ in 0..lattice.len() {
        for l in 1..=3u32 {
            if rng.gen_bool(0.3) {
                current.insert(l);
            }
        }
        sets.push(current.clone());
    }
    TitsTable::new(b3_star(), lattice, sets).unwrap()
}

fn chain(rng: &mut ChaCha8Rng, n: usize) -> ExtensionLattice {
    use rand::Rng;
    let nodes = (0..n)
        .map(|i| {
            let node = LatticeNode::new(format!("E{i}"));
            if i == 0 || rng.gen_bool(0.5) {
                node.p_special()
            } else {
                node
            }
        })
        .collect();
    ExtensionLattice::new(2, nodes, (1..n).map(|i| (i - 1, i)).collect(), 0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn motequiv_properties(seed in any::<u64>(), len in 1usize..6, mask in 0u32..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = chain(&mut rng, len);
        let t = random_table(&mut rng, &lat);
        let t2 = random_table(&mut rng, &lat);
        let phi = DiagramIso::identity(&b3_star());
        let theta0: VertexSet = (1..=3u32).filter(|l| mask >> (l - 1) & 1 == 1).collect();
        prop_assert!(check_motequiv(&t, &t, &phi, &VertexSet::new()).unwrap().holds);
        let v = check_motequiv(&t, &t2, &phi, &theta0).unwrap();
        prop_assert_eq!(v.holds, check_motequiv(&t2, &t, &phi.inverse(), &theta0).unwrap().holds);

        // Dropping the other nodes does not change the verdict.
        let special = lat.p_special_nodes();
        let nodes = special.iter().map(|&e| lat.nodes()[e].clone()).collect();
        let sub = ExtensionLattice::new(2, nodes, (1..special.len()).map(|i| (i - 1, i)).collect(), 0).unwrap();
        let restrict = |t: &TitsTable| {
            TitsTable::new(b3_star(), &sub, special.iter().map(|&e| t.distinguished(e).clone()).collect()).unwrap()
        };
        prop_assert_eq!(v.holds, check_motequiv(&restrict(&t), &restrict(&t2), &phi, &theta0).unwrap().holds);
    }

    #[test]
    fn shrinking_tables_rejected(seed in any::<u64>(), len in 2usize..6) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = chain(&mut rng, len);
        let t = random_table(&mut rng, &lat);
        let mut sets = t.table().to_vec();
        let i = rng.gen_range(1..len);
        sets[i - 1].insert(1);
        sets[i - 1].insert(2);
        sets[i - 1].insert(3);
        let shrinks = sets[i] != sets[i - 1];
        let result = TitsTable::new(b3_star(), &lat, sets);
        prop_assert_eq!(result.is_err(), shrinks);
    }
}
