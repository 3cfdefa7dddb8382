//! Random consistent catalogs: atom classes with a random implication order
//! ("isotropic for `a` implies isotropic for `b`"), nodes = the closed sets
//! of classes ordered by inclusion, and a generic point for every class over
//! every node where it is still anisotropic.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use tatetrace_core::motive::{AtomCatalog, AtomId, ExtensionLattice, FormalMotive, GenericPoint, LatticeNode};
use tatetrace_core::LaurentPoly;

pub struct Model {
    pub catalog: AtomCatalog,
    /// Atoms of each class; atoms of one class carry identical tables.
    pub classes: Vec<Vec<AtomId>>,
    /// Class sets of the nodes.
    pub nodes: Vec<BTreeSet<usize>>,
}

fn closure(implies: &[Vec<bool>], seed: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut out = seed.clone();
    let mut stack: Vec<usize> = seed.iter().copied().collect();
    while let Some(a) = stack.pop() {
        for (b, &yes) in implies[a].iter().enumerate() {
            if yes && out.insert(b) {
                stack.push(b);
            }
        }
    }
    out
}

pub fn random_model<R: Rng>(rng: &mut R, max_classes: usize) -> Model {
    let k = rng.gen_range(1..=max_classes);
    // Implications only go from higher to lower index, so there are no cycles.
    let mut implies = vec![vec![false; k]; k];
    for (a, row) in implies.iter_mut().enumerate() {
        for flag in row.iter_mut().take(a) {
            *flag = rng.gen_bool(0.3);
        }
    }
    let mut nodes: Vec<BTreeSet<usize>> = (0u32..1 << k)
        .map(|mask| (0..k).filter(|i| mask >> i & 1 == 1).collect::<BTreeSet<_>>())
        .filter(|s| closure(&implies, s) == *s)
        .collect();
    nodes.sort_by_key(|s| (s.len(), s.iter().copied().collect::<Vec<_>>()));
    let index: BTreeMap<BTreeSet<usize>, usize> = nodes.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();

    let counts: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=2)).collect();
    let atom_name = |c: usize, j: usize| format!("c{c}_{j}");
    let mut lattice_nodes: Vec<LatticeNode> = nodes
        .iter()
        .map(|s| {
            let name: Vec<String> = s.iter().map(|c| c.to_string()).collect();
            LatticeNode::new(format!("E[{}]", name.join(","))).p_special()
        })
        .collect();
    for (e, s) in nodes.iter().enumerate() {
        for (c, &count) in counts.iter().enumerate() {
            if s.contains(&c) {
                continue;
            }
            let mut up = s.clone();
            up.insert(c);
            let g = index[&closure(&implies, &up)];
            let j = rng.gen_range(0..count);
            lattice_nodes[g].generic_points.push(GenericPoint { atom: atom_name(c, j), over: e });
        }
    }
    let mut edges = Vec::new();
    for (a, s) in nodes.iter().enumerate() {
        for (b, t) in nodes.iter().enumerate() {
            if a != b && s.is_subset(t) {
                edges.push((a, b));
            }
        }
    }
    let lattice = ExtensionLattice::new(2, lattice_nodes, edges, 0).expect("model lattice");
    let mut catalog = AtomCatalog::new(lattice);

    let mut classes = Vec::new();
    for (c, &count) in counts.iter().enumerate() {
        let pieces: Vec<(usize, i32)> =
            (0..rng.gen_range(0..=3)).map(|_| (rng.gen_range(0..k), rng.gen_range(0..=4))).collect();
        let rank = 1 + pieces.len() as u64;
        let traces: BTreeMap<usize, LaurentPoly> = nodes
            .iter()
            .enumerate()
            .filter(|(_, s)| s.contains(&c))
            .map(|(e, s)| {
                let mut t = LaurentPoly::one();
                for &(d, x) in &pieces {
                    if s.contains(&d) {
                        t.add_term(x, 1);
                    }
                }
                (e, t)
            })
            .collect();
        let ids = (0..count)
            .map(|j| catalog.add_atom(&atom_name(c, j), rank, traces.clone()).expect("model atom"))
            .collect();
        classes.push(ids);
    }
    catalog.check_consistency().expect("model consistency");
    Model { catalog, classes, nodes }
}

impl Model {
    pub fn unit(&self) -> AtomId {
        self.catalog.unit()
    }

    pub fn class_of(&self, atom: AtomId) -> Option<usize> {
        self.classes.iter().position(|ids| ids.contains(&atom))
    }

    fn random_atom<R: Rng>(&self, rng: &mut R) -> AtomId {
        if rng.gen_bool(0.2) {
            return self.unit();
        }
        let c = rng.gen_range(0..self.classes.len());
        self.classes[c][rng.gen_range(0..self.classes[c].len())]
    }

    pub fn random_terms<R: Rng>(&self, rng: &mut R, max_len: usize) -> Vec<(AtomId, i32)> {
        (0..rng.gen_range(1..=max_len)).map(|_| (self.random_atom(rng), rng.gen_range(0..=3))).collect()
    }

    /// Same summands up to order, with atoms replaced by equivalent ones.
    pub fn rewrite<R: Rng>(&self, rng: &mut R, terms: &[(AtomId, i32)]) -> Vec<(AtomId, i32)> {
        let mut out: Vec<(AtomId, i32)> = terms
            .iter()
            .map(|&(a, k)| match self.class_of(a) {
                Some(c) => (self.classes[c][rng.gen_range(0..self.classes[c].len())], k),
                None => (a, k),
            })
            .collect();
        for i in (1..out.len()).rev() {
            out.swap(i, rng.gen_range(0..=i));
        }
        out
    }

    /// A small change: a shifted twist, another atom, or a dropped or extra
    /// summand. The result may still be isomorphic.
    pub fn perturb<R: Rng>(&self, rng: &mut R, terms: &[(AtomId, i32)]) -> Vec<(AtomId, i32)> {
        let mut out = self.rewrite(rng, terms);
        let i = rng.gen_range(0..out.len());
        match rng.gen_range(0..4) {
            0 => out[i].1 += 1,
            1 => out[i].0 = self.random_atom(rng),
            2 if out.len() > 1 => {
                out.remove(i);
            }
            _ => out.push((self.random_atom(rng), rng.gen_range(0..=3))),
        }
        out
    }

    pub fn motive(&self, terms: Vec<(AtomId, i32)>) -> FormalMotive {
        self.catalog.motive(terms).expect("model motive")
    }

    /// One atom of every class plus random extras, so that every trace
    /// piece refers to a class occurring in the motive.
    pub fn complete_terms<R: Rng>(&self, rng: &mut R) -> Vec<(AtomId, i32)> {
        let mut out: Vec<(AtomId, i32)> =
            self.classes.iter().map(|ids| (ids[rng.gen_range(0..ids.len())], rng.gen_range(0..=2))).collect();
        out.extend(self.random_terms(rng, 3));
        out
    }

    /// Atoms isotropic wherever every atom of `terms` is: the unit, or a
    /// class implied by all of them.
    pub fn dominated_terms<R: Rng>(&self, rng: &mut R, terms: &[(AtomId, i32)]) -> Vec<(AtomId, i32)> {
        let c = &self.catalog;
        let mut candidates = vec![self.unit()];
        for ids in &self.classes {
            let a = ids[0];
            if terms.iter().all(|&(b, _)| c.dominates(b, a).expect("atoms")) {
                candidates.extend(ids.iter().copied());
            }
        }
        (0..rng.gen_range(1..=3))
            .map(|_| (candidates[rng.gen_range(0..candidates.len())], rng.gen_range(0..=2)))
            .collect()
    }
}
