//! Formal motives built from upper atoms over a finite lattice of field
//! extensions.
//!
//! A lattice node stands for a field extension `E/F`; the order is "E′
//! extends E". An atom records, for each node, the Tate trace of an upper
//! motive over that node. A [`FormalMotive`] is a multiset of twisted atoms
//! kept in sorted normal form.
//!
//! Atoms isotropic over the base collapse to the built-in unit atom `Λ`.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::laurent::LaurentPoly;

pub type NodeId = usize;
pub type AtomId = usize;

/// Name of the built-in unit atom.
pub const UNIT_ATOM: &str = "unit";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MotiveError {
    #[error("node {0} not in lattice")]
    UnknownNode(String),
    #[error("duplicate node name {0:?}")]
    DuplicateNode(String),
    #[error("lattice order has a cycle through node {0:?}")]
    Cycle(String),
    #[error("base node {base:?} is not below node {node:?}")]
    BaseNotMinimal { base: String, node: String },
    #[error("node {node:?}: {reason}")]
    BadNode { node: String, reason: String },
    #[error("duplicate atom {0:?}")]
    DuplicateAtom(String),
    #[error("unknown atom {0:?}")]
    UnknownAtom(String),
    #[error("atom {atom:?} at node {node:?}: {reason}")]
    InvalidAtom { atom: String, node: String, reason: String },
    #[error("atoms {0:?} and {1:?} have the same isotropy set but different data")]
    InconsistentEquivalence(String, String),
    #[error("generic point of {atom:?} over {over:?} at node {node:?}: {reason}")]
    GenericPointLaw { atom: String, over: String, node: String, reason: String },
    #[error("motives belong to different catalogs")]
    LatticeMismatch,
    #[error("hook undefined for the zero motive")]
    ZeroMotive,
    #[error("anisotropic part only defined at the base")]
    NotBase,
    #[error("cancellation hypotheses not satisfied: {0}")]
    CancellationHypotheses(String),
    #[error("lattice lacks function-field node for atom {0}")]
    MissingGenericNode(String),
}

/// Tag marking a node as the function field of an atom's variety over `over`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GenericPoint {
    pub atom: String,
    pub over: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeNode {
    pub name: String,
    pub p_special: bool,
    /// A p-special closure of this node, if modelled.
    pub p_closure: Option<NodeId>,
    pub generic_points: Vec<GenericPoint>,
}

impl LatticeNode {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), p_special: false, p_closure: None, generic_points: Vec::new() }
    }

    pub fn p_special(mut self) -> Self {
        self.p_special = true;
        self
    }

    pub fn generic_point(mut self, atom: impl Into<String>, over: NodeId) -> Self {
        self.generic_points.push(GenericPoint { atom: atom.into(), over });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionLattice {
    prime: u32,
    nodes: Vec<LatticeNode>,
    edges: Vec<(NodeId, NodeId)>,
    base: NodeId,
    /// `below[a][b]` iff `a ≤ b`.
    below: Vec<Vec<bool>>,
}

impl ExtensionLattice {
    /// Builds and validates a lattice. Edges `(lower, upper)` generate the
    /// order.
    pub fn new(
        prime: u32,
        nodes: Vec<LatticeNode>,
        edges: Vec<(NodeId, NodeId)>,
        base: NodeId,
    ) -> Result<Self, MotiveError> {
        let n = nodes.len();
        let mut names = BTreeSet::new();
        for node in &nodes {
            if !names.insert(node.name.as_str()) {
                return Err(MotiveError::DuplicateNode(node.name.clone()));
            }
        }
        let name = |i: usize| nodes.get(i).map(|x| x.name.clone()).unwrap_or_else(|| i.to_string());
        if base >= n {
            return Err(MotiveError::UnknownNode(base.to_string()));
        }
        let mut succ = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(MotiveError::UnknownNode(name(a.max(b))));
            }
            if a == b {
                return Err(MotiveError::Cycle(name(a)));
            }
            succ[a].push(b);
            indeg[b] += 1;
        }
        // Kahn's algorithm; leftover nodes lie on a cycle.
        let mut order = Vec::with_capacity(n);
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &succ[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push_back(w);
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n).find(|&i| indeg[i] > 0).expect("cycle member");
            return Err(MotiveError::Cycle(name(stuck)));
        }
        let mut below = vec![vec![false; n]; n];
        for &v in order.iter().rev() {
            below[v][v] = true;
            for &w in &succ[v] {
                let reach = below[w].clone();
                for (flag, r) in below[v].iter_mut().zip(reach) {
                    *flag |= r;
                }
            }
        }
        if let Some(i) = below[base].iter().position(|&b| !b) {
            return Err(MotiveError::BaseNotMinimal { base: name(base), node: name(i) });
        }
        for (i, node) in nodes.iter().enumerate() {
            if let Some(c) = node.p_closure {
                let bad = |reason: &str| MotiveError::BadNode { node: name(i), reason: reason.to_string() };
                if c >= n {
                    return Err(bad("p-closure is not a node"));
                }
                if !below[i][c] {
                    return Err(bad("p-closure does not extend the node"));
                }
                if !nodes[c].p_special {
                    return Err(bad("p-closure is not p-special"));
                }
            }
            for g in &node.generic_points {
                if g.over >= n || !below[g.over][i] {
                    return Err(MotiveError::BadNode {
                        node: name(i),
                        reason: alloc::format!("generic point of {:?} must lie above the node it is taken over", g.atom),
                    });
                }
            }
        }
        Ok(Self { prime, nodes, edges, base, below })
    }

    /// A single node: the base field only.
    pub fn trivial(prime: u32) -> Self {
        Self::new(prime, vec![LatticeNode::new("F")], Vec::new(), 0).expect("valid")
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn base(&self) -> NodeId {
        self.base
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[LatticeNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Result<&LatticeNode, MotiveError> {
        self.nodes.get(id).ok_or_else(|| MotiveError::UnknownNode(id.to_string()))
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.nodes[id].name
    }

    pub fn node_by_name(&self, name: &str) -> Result<NodeId, MotiveError> {
        self.nodes.iter().position(|n| n.name == name).ok_or_else(|| MotiveError::UnknownNode(name.to_string()))
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn node_ids(&self) -> core::ops::Range<NodeId> {
        0..self.nodes.len()
    }

    /// `a ≤ b`: the field of `b` extends the field of `a`.
    pub fn is_below(&self, a: NodeId, b: NodeId) -> bool {
        self.below[a][b]
    }

    pub fn up_set(&self, a: NodeId) -> BTreeSet<NodeId> {
        self.node_ids().filter(|&b| self.below[a][b]).collect()
    }

    pub fn p_special_nodes(&self) -> Vec<NodeId> {
        self.node_ids().filter(|&i| self.nodes[i].p_special).collect()
    }

    pub fn check_node(&self, id: NodeId) -> Result<(), MotiveError> {
        self.node(id).map(|_| ())
    }
}

/// An upper motive given by its traces over the lattice nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpperAtom {
    name: String,
    rank: u64,
    traces: Vec<LaurentPoly>,
}

impl UpperAtom {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rank(&self) -> u64 {
        self.rank
    }

    pub fn trace(&self, node: NodeId) -> &LaurentPoly {
        &self.traces[node]
    }

    pub fn traces(&self) -> &[LaurentPoly] {
        &self.traces
    }

    pub fn is_isotropic_at(&self, node: NodeId) -> bool {
        !self.traces[node].is_zero()
    }

    pub fn isotropy_set(&self) -> BTreeSet<NodeId> {
        (0..self.traces.len()).filter(|&e| self.is_isotropic_at(e)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CatalogId(u64);

static NEXT_CATALOG: AtomicU64 = AtomicU64::new(1);

/// The lattice together with the atoms defined over it.
#[derive(Debug, Clone)]
pub struct AtomCatalog {
    id: CatalogId,
    lattice: ExtensionLattice,
    atoms: Vec<UpperAtom>,
    names: BTreeMap<String, AtomId>,
}

/// A direct sum of twisted atoms in sorted normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FormalMotive {
    catalog: CatalogId,
    terms: Vec<(AtomId, i32)>,
}

impl FormalMotive {
    pub fn catalog(&self) -> CatalogId {
        self.catalog
    }

    pub fn terms(&self) -> &[(AtomId, i32)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn hook(&self) -> Result<i32, MotiveError> {
        self.terms.iter().map(|&(_, k)| k).min().ok_or(MotiveError::ZeroMotive)
    }

    /// `M{k}`.
    pub fn shift(&self, k: i32) -> Self {
        Self { catalog: self.catalog, terms: self.terms.iter().map(|&(a, t)| (a, t + k)).collect() }
    }

    /// `M ⊕ N`.
    pub fn direct_sum(&self, other: &Self) -> Result<Self, MotiveError> {
        if self.catalog != other.catalog {
            return Err(MotiveError::LatticeMismatch);
        }
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        terms.sort_unstable();
        Ok(Self { catalog: self.catalog, terms })
    }
}

/// Result of [`AtomCatalog::is_isomorphic`]; `matching` pairs term indices
/// of the two motives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoVerdict {
    pub isomorphic: bool,
    pub matching: Option<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CancellationVerdict {
    pub holds: bool,
    /// Common trace of `N` and `N′` per node when the verdict holds.
    pub certificate: Vec<(NodeId, LaurentPoly)>,
    /// First node where `N` and `N′` differ; a model inconsistency.
    pub violation: Option<NodeId>,
}

impl AtomCatalog {
    pub fn new(lattice: ExtensionLattice) -> Self {
        let unit = UpperAtom { name: UNIT_ATOM.to_string(), rank: 1, traces: vec![LaurentPoly::one(); lattice.len()] };
        let names = BTreeMap::from([(UNIT_ATOM.to_string(), 0)]);
        Self { id: CatalogId(NEXT_CATALOG.fetch_add(1, Ordering::Relaxed)), lattice, atoms: vec![unit], names }
    }

    pub fn id(&self) -> CatalogId {
        self.id
    }

    pub fn lattice(&self) -> &ExtensionLattice {
        &self.lattice
    }

    pub fn unit(&self) -> AtomId {
        0
    }

    pub fn atoms(&self) -> &[UpperAtom] {
        &self.atoms
    }

    pub fn atom(&self, id: AtomId) -> &UpperAtom {
        &self.atoms[id]
    }

    pub fn atom_by_name(&self, name: &str) -> Result<AtomId, MotiveError> {
        self.names.get(name).copied().ok_or_else(|| MotiveError::UnknownAtom(name.to_string()))
    }

    /// Every registered name with the atom it resolves to (aliases of the
    /// unit included).
    pub fn names(&self) -> &BTreeMap<String, AtomId> {
        &self.names
    }

    /// Adds an atom; nodes missing from `traces` get the zero trace. An atom
    /// isotropic over the base must be the unit and becomes an alias of it.
    pub fn add_atom(
        &mut self,
        name: &str,
        rank: u64,
        traces: BTreeMap<NodeId, LaurentPoly>,
    ) -> Result<AtomId, MotiveError> {
        if self.names.contains_key(name) {
            return Err(MotiveError::DuplicateAtom(name.to_string()));
        }
        let lat = &self.lattice;
        let mut table = vec![LaurentPoly::zero(); lat.len()];
        for (node, poly) in traces {
            lat.check_node(node)?;
            table[node] = poly;
        }
        let invalid = |node: NodeId, reason: String| MotiveError::InvalidAtom {
            atom: name.to_string(),
            node: lat.name(node).to_string(),
            reason,
        };
        if rank == 0 {
            return Err(invalid(lat.base(), "rank must be positive".into()));
        }
        for e in lat.node_ids() {
            let t = &table[e];
            if t.is_zero() {
                continue;
            }
            if t.min_exp() != Some(0) {
                return Err(invalid(e, alloc::format!("isotropic trace {t} must have hook 0")));
            }
            if t.coeff_sum() > rank {
                return Err(invalid(e, alloc::format!("trace {t} exceeds rank {rank}")));
            }
        }
        for &(a, b) in lat.edges() {
            if !table[a].is_contained_in(&table[b]) {
                return Err(invalid(
                    b,
                    alloc::format!("trace {} does not contain the trace {} over {:?}", table[b], table[a], lat.name(a)),
                ));
            }
        }
        for e in lat.node_ids() {
            if let Some(c) = lat.nodes()[e].p_closure {
                if table[e] != table[c] {
                    return Err(invalid(e, alloc::format!("trace differs from the p-closure {:?}", lat.name(c))));
                }
            }
        }
        if !table[lat.base()].is_zero() {
            if rank != 1 || table.iter().any(|t| *t != LaurentPoly::one()) {
                return Err(invalid(lat.base(), "isotropic over the base but not the unit motive".into()));
            }
            self.names.insert(name.to_string(), 0);
            return Ok(0);
        }
        let id = self.atoms.len();
        self.atoms.push(UpperAtom { name: name.to_string(), rank, traces: table });
        self.names.insert(name.to_string(), id);
        Ok(id)
    }

    /// Cross-atom checks: generic-point tags resolve and obey the generic
    /// point law, and equivalent atoms carry identical data.
    pub fn check_consistency(&self) -> Result<(), MotiveError> {
        for (i, a) in self.atoms.iter().enumerate() {
            for b in &self.atoms[i + 1..] {
                if a.isotropy_set() == b.isotropy_set() && (a.rank != b.rank || a.traces != b.traces) {
                    return Err(MotiveError::InconsistentEquivalence(a.name.clone(), b.name.clone()));
                }
            }
        }
        let lat = &self.lattice;
        for g in lat.node_ids() {
            for tag in &lat.nodes()[g].generic_points {
                let a = self.atom_by_name(&tag.atom)?;
                let law = |reason: String| MotiveError::GenericPointLaw {
                    atom: tag.atom.clone(),
                    over: lat.name(tag.over).to_string(),
                    node: lat.name(g).to_string(),
                    reason,
                };
                if !self.atoms[a].is_isotropic_at(g) {
                    return Err(law("the atom is anisotropic at its own generic point".into()));
                }
                let targets: Vec<NodeId> =
                    lat.up_set(tag.over).into_iter().filter(|&e| self.atoms[a].is_isotropic_at(e)).collect();
                for b in &self.atoms {
                    if !b.is_isotropic_at(g) {
                        continue;
                    }
                    if let Some(&e) = targets.iter().find(|&&e| !b.is_isotropic_at(e)) {
                        return Err(law(alloc::format!(
                            "{:?} is isotropic at the generic point but not at {:?}",
                            b.name,
                            lat.name(e)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_atom(&self, id: AtomId) -> Result<(), MotiveError> {
        if id < self.atoms.len() {
            Ok(())
        } else {
            Err(MotiveError::UnknownAtom(id.to_string()))
        }
    }

    /// `a ⪰ b`: `b` is isotropic wherever `a` is.
    pub fn dominates(&self, a: AtomId, b: AtomId) -> Result<bool, MotiveError> {
        self.check_atom(a)?;
        self.check_atom(b)?;
        Ok(self.lattice.node_ids().all(|e| !self.atoms[a].is_isotropic_at(e) || self.atoms[b].is_isotropic_at(e)))
    }

    pub fn equivalent(&self, a: AtomId, b: AtomId) -> Result<bool, MotiveError> {
        Ok(self.dominates(a, b)? && self.dominates(b, a)?)
    }

    /// The generic point of `atom` (or of an equivalent atom) over `over`.
    /// For the unit this is `over` itself.
    pub fn generic_node(&self, atom: AtomId, over: NodeId) -> Result<Option<NodeId>, MotiveError> {
        self.check_atom(atom)?;
        self.lattice.check_node(over)?;
        if atom == self.unit() {
            return Ok(Some(over));
        }
        for g in self.lattice.node_ids() {
            for tag in &self.lattice.nodes()[g].generic_points {
                if tag.over != over {
                    continue;
                }
                if let Ok(b) = self.atom_by_name(&tag.atom) {
                    if self.equivalent(atom, b)? {
                        return Ok(Some(g));
                    }
                }
            }
        }
        Ok(None)
    }

    pub fn motive(&self, terms: impl IntoIterator<Item = (AtomId, i32)>) -> Result<FormalMotive, MotiveError> {
        let mut terms: Vec<(AtomId, i32)> = terms.into_iter().collect();
        for &(a, _) in &terms {
            self.check_atom(a)?;
        }
        terms.sort_unstable();
        Ok(FormalMotive { catalog: self.id, terms })
    }

    pub fn motive_by_names<'a>(
        &self,
        terms: impl IntoIterator<Item = (&'a str, i32)>,
    ) -> Result<FormalMotive, MotiveError> {
        let resolved: Result<Vec<_>, _> = terms.into_iter().map(|(n, k)| Ok((self.atom_by_name(n)?, k))).collect();
        self.motive(resolved?)
    }

    pub fn zero_motive(&self) -> FormalMotive {
        FormalMotive { catalog: self.id, terms: Vec::new() }
    }

    fn check(&self, m: &FormalMotive) -> Result<(), MotiveError> {
        if m.catalog != self.id {
            return Err(MotiveError::LatticeMismatch);
        }
        Ok(())
    }

    pub fn rank(&self, m: &FormalMotive) -> Result<u64, MotiveError> {
        self.check(m)?;
        Ok(m.terms.iter().map(|&(a, _)| self.atoms[a].rank).sum())
    }

    pub fn tate_trace(&self, m: &FormalMotive, node: NodeId) -> Result<LaurentPoly, MotiveError> {
        self.check(m)?;
        self.lattice.check_node(node)?;
        Ok(m.terms.iter().map(|&(a, k)| self.atoms[a].traces[node].shift(k)).sum())
    }

    /// The summands anisotropic over the base.
    pub fn anisotropic_part(&self, m: &FormalMotive, node: NodeId) -> Result<FormalMotive, MotiveError> {
        self.check(m)?;
        self.lattice.check_node(node)?;
        if node != self.lattice.base() {
            return Err(MotiveError::NotBase);
        }
        let terms = m.terms.iter().copied().filter(|&(a, _)| !self.atoms[a].is_isotropic_at(node)).collect();
        Ok(FormalMotive { catalog: self.id, terms })
    }

    pub fn tensor_trace(&self, m: &FormalMotive, n: &FormalMotive, node: NodeId) -> Result<LaurentPoly, MotiveError> {
        Ok(&self.tate_trace(m, node)? * &self.tate_trace(n, node)?)
    }

    /// Motive-level domination `N ⪰ M`: wherever `N` has a nonzero trace,
    /// so does `M`. Returns the first violating node.
    pub fn motive_domination_failure(&self, n: &FormalMotive, m: &FormalMotive) -> Result<Option<NodeId>, MotiveError> {
        for e in self.lattice.node_ids() {
            if !self.tate_trace(n, e)?.is_zero() && self.tate_trace(m, e)?.is_zero() {
                return Ok(Some(e));
            }
        }
        Ok(None)
    }

    /// First node where the traces of `m` and `n` differ.
    pub fn first_trace_difference(
        &self,
        m: &FormalMotive,
        n: &FormalMotive,
        nodes: impl IntoIterator<Item = NodeId>,
    ) -> Result<Option<NodeId>, MotiveError> {
        self.check(m)?;
        self.check(n)?;
        for e in nodes {
            if self.tate_trace(m, e)? != self.tate_trace(n, e)? {
                return Ok(Some(e));
            }
        }
        Ok(None)
    }

    pub fn trace_equal_everywhere(&self, m: &FormalMotive, n: &FormalMotive) -> Result<bool, MotiveError> {
        Ok(self.first_trace_difference(m, n, self.lattice.node_ids())?.is_none())
    }

    /// Function fields of the summands of `m` and `n`: the generic point
    /// over the base of every atom occurring, and the base itself for Tate
    /// summands.
    pub fn partial_splitting_nodes(&self, m: &FormalMotive, n: &FormalMotive) -> Result<BTreeSet<NodeId>, MotiveError> {
        self.check(m)?;
        self.check(n)?;
        let mut out = BTreeSet::new();
        for &(a, _) in m.terms.iter().chain(&n.terms) {
            match self.generic_node(a, self.lattice.base())? {
                Some(g) => out.insert(g),
                None => return Err(MotiveError::MissingGenericNode(self.atoms[a].name.clone())),
            };
        }
        Ok(out)
    }

    /// Trace comparison over the partial splitting nodes only.
    pub fn trace_equal_on_partial_splitting_nodes(&self, m: &FormalMotive, n: &FormalMotive) -> Result<bool, MotiveError> {
        let nodes = self.partial_splitting_nodes(m, n)?;
        Ok(self.first_trace_difference(m, n, nodes)?.is_none())
    }

    /// Decides `M ≅ N` by peeling matching summands: first the Tate part
    /// over the base, then, layer by layer from the hook, an atom with the
    /// largest isotropy set against a partner isotropic over its generic
    /// point. Returns the matching of term indices on success.
    pub fn is_isomorphic(&self, m: &FormalMotive, n: &FormalMotive) -> Result<IsoVerdict, MotiveError> {
        self.check(m)?;
        self.check(n)?;
        let no = IsoVerdict { isomorphic: false, matching: None };
        let base = self.lattice.base();
        if self.tate_trace(m, base)? != self.tate_trace(n, base)? {
            return Ok(no);
        }
        let unit = self.unit();
        let mut matching = Vec::new();
        let units = |x: &FormalMotive| -> Vec<(usize, i32)> {
            x.terms.iter().enumerate().filter(|(_, t)| t.0 == unit).map(|(i, t)| (i, t.1)).collect()
        };
        // Equal traces over the base give equal sorted twist lists.
        for ((i, _), (j, _)) in units(m).into_iter().zip(units(n)) {
            matching.push((i, j));
        }
        let pool = |x: &FormalMotive| -> Vec<(usize, AtomId, i32)> {
            x.terms.iter().enumerate().filter(|(_, t)| t.0 != unit).map(|(i, t)| (i, t.0, t.1)).collect()
        };
        let mut left = pool(m);
        let mut right = pool(n);
        loop {
            match (left.is_empty(), right.is_empty()) {
                (true, true) => break,
                (false, false) => {}
                _ => return Ok(no),
            }
            let hook = left.iter().map(|t| t.2).min().expect("nonempty");
            if right.iter().map(|t| t.2).min() != Some(hook) {
                return Ok(no);
            }
            let isotropy = |a: AtomId| self.atoms[a].isotropy_set().len();
            let layer = left.iter().map(|t| (0, t)).chain(right.iter().map(|t| (1, t))).filter(|(_, t)| t.2 == hook);
            let (side, &(_, pick, _)) = layer.max_by_key(|(s, t)| (isotropy(t.1), core::cmp::Reverse((*s, t.0)))).expect("layer");
            let (mine, other) = if side == 0 { (&mut left, &mut right) } else { (&mut right, &mut left) };
            let partner = match self.generic_node(pick, base)? {
                Some(g) => other.iter().position(|t| t.2 == hook && self.atoms[t.1].is_isotropic_at(g)),
                None => other.iter().position(|t| t.2 == hook && self.equivalent(pick, t.1).unwrap_or(false)),
            };
            let Some(q) = partner else { return Ok(no) };
            if !self.equivalent(pick, other[q].1)? {
                return Ok(no);
            }
            let p = mine.iter().position(|t| t.2 == hook && t.1 == pick).expect("picked term");
            let a = mine.remove(p).0;
            let b = other.remove(q).0;
            matching.push(if side == 0 { (a, b) } else { (b, a) });
        }
        matching.sort_unstable();
        Ok(IsoVerdict { isomorphic: true, matching: Some(matching) })
    }

    /// Checks cancellation `M ⊗ N ≅ M ⊗ N′ ⟹ N ≅ N′` at the level of traces,
    /// under the hypotheses `N ⪰ M`, `N′ ⪰ M` and equal tensor traces.
    pub fn cancellation_check(
        &self,
        m: &FormalMotive,
        n: &FormalMotive,
        n2: &FormalMotive,
    ) -> Result<CancellationVerdict, MotiveError> {
        self.check(m)?;
        self.check(n)?;
        self.check(n2)?;
        let lat = &self.lattice;
        for (label, x) in [("N", n), ("N'", n2)] {
            if let Some(e) = self.motive_domination_failure(x, m)? {
                return Err(MotiveError::CancellationHypotheses(alloc::format!(
                    "{label} does not dominate M at node {:?}",
                    lat.name(e)
                )));
            }
        }
        for e in lat.node_ids() {
            if self.tensor_trace(m, n, e)? != self.tensor_trace(m, n2, e)? {
                return Err(MotiveError::CancellationHypotheses(alloc::format!(
                    "tensor traces differ at node {:?}",
                    lat.name(e)
                )));
            }
        }
        let mut certificate = Vec::new();
        for e in lat.node_ids() {
            let t = self.tate_trace(n, e)?;
            if t != self.tate_trace(n2, e)? {
                return Ok(CancellationVerdict { holds: false, certificate: Vec::new(), violation: Some(e) });
            }
            certificate.push((e, t));
        }
        Ok(CancellationVerdict { holds: true, certificate, violation: None })
    }

    /// `"A{0} + B{3}"`, or `"0"`.
    pub fn describe(&self, m: &FormalMotive) -> String {
        if m.terms.is_empty() {
            return "0".to_string();
        }
        let parts: Vec<String> =
            m.terms.iter().map(|&(a, k)| alloc::format!("{}{{{}}}", self.atoms[a].name, k)).collect();
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn poly(terms: &[(i32, u64)]) -> LaurentPoly {
        terms.iter().copied().collect()
    }

    /// base < e1 < e2, base < e3; e1 is the generic point of `a`, e3 of `b`.
    fn catalog() -> (AtomCatalog, AtomId, AtomId, AtomId) {
        let nodes = vec![
            LatticeNode::new("F").p_special(),
            LatticeNode::new("E1").p_special().generic_point("a", 0),
            LatticeNode::new("E2").p_special(),
            LatticeNode::new("E3").p_special().generic_point("b", 0).generic_point("a2", 0),
        ];
        let lat = ExtensionLattice::new(2, nodes, vec![(0, 1), (1, 2), (0, 3)], 0).unwrap();
        let mut c = AtomCatalog::new(lat);
        let a = c.add_atom("a", 2, BTreeMap::from([(1, poly(&[(0, 1)])), (2, poly(&[(0, 1), (1, 1)]))])).unwrap();
        let b = c.add_atom("b", 2, BTreeMap::from([(3, poly(&[(0, 1), (1, 1)]))])).unwrap();
        let a2 = c.add_atom("a2", 2, BTreeMap::from([(3, poly(&[(0, 1), (1, 1)]))])).unwrap();
        c.check_consistency().unwrap();
        (c, a, b, a2)
    }

    #[test]
    fn lattice_validation() {
        let two = || vec![LatticeNode::new("F"), LatticeNode::new("E")];
        assert!(matches!(ExtensionLattice::new(2, two(), vec![(0, 1), (1, 0)], 0), Err(MotiveError::Cycle(_))));
        assert!(matches!(ExtensionLattice::new(2, two(), vec![], 0), Err(MotiveError::BaseNotMinimal { .. })));
        let dup = vec![LatticeNode::new("F"), LatticeNode::new("F")];
        assert!(matches!(ExtensionLattice::new(2, dup, vec![(0, 1)], 0), Err(MotiveError::DuplicateNode(_))));
        let mut closed = two();
        closed[0].p_closure = Some(1);
        assert!(ExtensionLattice::new(2, closed.clone(), vec![(0, 1)], 0).is_err());
        closed[1].p_special = true;
        let lat = ExtensionLattice::new(2, closed, vec![(0, 1)], 0).unwrap();
        assert!(lat.is_below(0, 1) && !lat.is_below(1, 0));
    }

    #[test]
    fn atom_validation() {
        let (mut c, ..) = catalog();
        // Not up-closed.
        let err = c.add_atom("x", 2, BTreeMap::from([(1, poly(&[(0, 1)]))])).unwrap_err();
        assert!(err.to_string().contains("\"E2\""), "{err}");
        // Rank bound.
        let err = c.add_atom("y", 1, BTreeMap::from([(3, poly(&[(0, 1), (2, 1)]))])).unwrap_err();
        assert!(err.to_string().contains("exceeds rank"), "{err}");
        // Hook must be 0.
        assert!(c.add_atom("z", 3, BTreeMap::from([(3, poly(&[(1, 1)]))])).is_err());
        // Base-isotropic collapses to the unit.
        let all: BTreeMap<_, _> = (0..4).map(|e| (e, LaurentPoly::one())).collect();
        assert_eq!(c.add_atom("point", 1, all.clone()).unwrap(), c.unit());
        assert!(c.add_atom("fat point", 2, all).is_err());
        assert!(matches!(c.add_atom("a", 2, BTreeMap::new()), Err(MotiveError::DuplicateAtom(_))));
    }

    #[test]
    fn generic_point_law_is_checked() {
        let nodes = vec![LatticeNode::new("F"), LatticeNode::new("E1").generic_point("a", 0), LatticeNode::new("E2")];
        let lat = ExtensionLattice::new(2, nodes, vec![(0, 1), (0, 2)], 0).unwrap();
        let mut c = AtomCatalog::new(lat);
        c.add_atom("a", 2, BTreeMap::from([(1, poly(&[(0, 1)])), (2, poly(&[(0, 1)]))])).unwrap();
        c.add_atom("b", 2, BTreeMap::from([(1, poly(&[(0, 1)]))])).unwrap();
        assert!(matches!(c.check_consistency(), Err(MotiveError::GenericPointLaw { .. })));
    }

    #[test]
    fn hook_and_rank() {
        let (c, a, b, _) = catalog();
        let m = c.motive([(a, 0), (b, 3)]).unwrap();
        assert_eq!(m.hook().unwrap(), 0);
        assert_eq!(c.motive([(a, 5)]).unwrap().hook().unwrap(), 5);
        assert_eq!(m.shift(2).hook().unwrap(), 2);
        assert_eq!(c.zero_motive().hook(), Err(MotiveError::ZeroMotive));
        assert_eq!(c.rank(&c.zero_motive()).unwrap(), 0);
        assert_eq!(c.rank(&c.motive([(a, 0), (a, 1)]).unwrap()).unwrap(), 4);
        let n = c.motive([(b, 1), (c.unit(), 2)]).unwrap();
        assert_eq!(c.rank(&m.direct_sum(&n).unwrap()).unwrap(), c.rank(&m).unwrap() + c.rank(&n).unwrap());
    }

    #[test]
    fn traces() {
        let (c, a, b, _) = catalog();
        assert_eq!(c.tate_trace(&c.motive([(c.unit(), 4)]).unwrap(), 2).unwrap(), LaurentPoly::monomial(4, 1));
        assert!(c.tate_trace(&c.motive([(a, 0)]).unwrap(), 0).unwrap().is_zero());
        let m = c.motive([(a, 1), (b, 0)]).unwrap();
        assert_eq!(c.tate_trace(&m, 2).unwrap(), poly(&[(1, 1), (2, 1)]));
        assert!(matches!(c.tate_trace(&m, 9), Err(MotiveError::UnknownNode(_))));
        let n = c.motive([(c.unit(), 0), (a, 1)]).unwrap();
        assert_eq!(c.anisotropic_part(&n, 0).unwrap(), c.motive([(a, 1)]).unwrap());
        assert_eq!(c.anisotropic_part(&m, 1), Err(MotiveError::NotBase));
        assert!(c.anisotropic_part(&c.motive([(c.unit(), 0)]).unwrap(), 0).unwrap().is_zero());
        let t = c.tensor_trace(&c.motive([(c.unit(), 1)]).unwrap(), &c.motive([(c.unit(), 2)]).unwrap(), 0).unwrap();
        assert_eq!(t, LaurentPoly::monomial(3, 1));
        assert!(c.tensor_trace(&m, &n, 0).unwrap().is_zero());
    }

    #[test]
    fn domination() {
        let (c, a, b, a2) = catalog();
        assert!(c.dominates(a, a).unwrap());
        assert!(!c.dominates(c.unit(), a).unwrap());
        assert!(c.dominates(a, c.unit()).unwrap());
        assert!(c.equivalent(b, a2).unwrap());
        assert!(!c.equivalent(c.unit(), a).unwrap());
        assert!(!c.dominates(a, b).unwrap() && !c.dominates(b, a).unwrap());
    }

    #[test]
    fn isomorphism_examples() {
        let (c, a, b, a2) = catalog();
        let m = c.motive([(a, 0), (b, 1), (c.unit(), 0)]).unwrap();
        let n = c.motive([(c.unit(), 0), (b, 1), (a, 0)]).unwrap();
        assert!(c.is_isomorphic(&m, &n).unwrap().isomorphic);
        assert!(!c.is_isomorphic(&c.motive([(a, 0)]).unwrap(), &c.motive([(a, 1)]).unwrap()).unwrap().isomorphic);
        let x = c.motive([(b, 0), (a, 1)]).unwrap();
        let y = c.motive([(a2, 0), (a, 1)]).unwrap();
        let v = c.is_isomorphic(&x, &y).unwrap();
        assert!(v.isomorphic);
        assert_eq!(v.matching.unwrap().len(), 2);
        assert!(c.trace_equal_everywhere(&x, &y).unwrap());
        assert!(!c.trace_equal_everywhere(&x, &m).unwrap());
        assert!(c.trace_equal_on_partial_splitting_nodes(&x, &y).unwrap());
        assert_eq!(c.partial_splitting_nodes(&x, &y).unwrap(), BTreeSet::from([1, 3]));
    }

    #[test]
    fn cancellation_examples() {
        let (c, a, b, a2) = catalog();
        let unit = c.unit();
        let n = c.motive([(b, 0), (unit, 1)]).unwrap();
        let m = c.motive([(unit, 0)]).unwrap();
        assert!(c.cancellation_check(&m, &n, &n).unwrap().holds);
        let n2 = c.motive([(unit, 1), (a2, 0)]).unwrap();
        assert!(c.cancellation_check(&m, &n, &n2).unwrap().holds);
        // a does not dominate b{0}: at E3 the trace of b is nonzero.
        let err = c.cancellation_check(&c.motive([(a, 0)]).unwrap(), &n, &n2).unwrap_err();
        assert!(matches!(err, MotiveError::CancellationHypotheses(_)));
    }

    #[test]
    fn catalogs_do_not_mix() {
        let (c1, a, ..) = catalog();
        let (c2, ..) = catalog();
        let m = c1.motive([(a, 0)]).unwrap();
        assert_eq!(c2.rank(&m), Err(MotiveError::LatticeMismatch));
    }
}
