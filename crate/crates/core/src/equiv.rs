//! Higher Tits indexes, motivic equivalence of groups, and motivic
//! splitting patterns and towers of formal motives.
//!
//! Verdicts are relative to the supplied lattice: a finite lattice can
//! witness a failure of motivic equivalence but cannot certify it over all
//! field extensions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::cgm::fmt_set;
use crate::diagram::{DiagramError, DynkinDiagram, StarAction, VertexSet};
use crate::laurent::LaurentPoly;
use crate::motive::{AtomCatalog, ExtensionLattice, FormalMotive, MotiveError, NodeId};
use crate::weyl::{poincare_closed, WeylError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EquivError {
    #[error("node {node:?}: distinguished set {set} is not a union of *-orbits")]
    NotUnionOfOrbits { node: String, set: String },
    #[error("distinguished set shrinks from {from:?} to {to:?}")]
    NotMonotone { from: String, to: String },
    #[error("table has {got} entries, lattice has {expected} nodes")]
    TableSize { expected: usize, got: usize },
    #[error("tables are over different lattices")]
    LatticeMismatch,
    #[error("invalid diagram isomorphism: {0}")]
    BadIso(String),
    #[error("{0} is not *-invariant")]
    NotInvariant(String),
    #[error("conclusions requested for a false verdict")]
    FalseVerdict,
    #[error("splitting tower stalls at node {0:?}: every atom is isotropic but the motive is not split")]
    TowerStalled(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Motive(#[from] MotiveError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
}

/// Distinguished vertices of the Tits index of `G_E` for every node `E`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TitsTable {
    star: StarAction,
    lattice: ExtensionLattice,
    distinguished: Vec<VertexSet>,
}

impl TitsTable {
    pub fn new(star: StarAction, lattice: &ExtensionLattice, distinguished: Vec<VertexSet>) -> Result<Self, EquivError> {
        if distinguished.len() != lattice.len() {
            return Err(EquivError::TableSize { expected: lattice.len(), got: distinguished.len() });
        }
        for (e, set) in distinguished.iter().enumerate() {
            if !star.is_invariant(set)? {
                return Err(EquivError::NotUnionOfOrbits { node: lattice.name(e).to_string(), set: fmt_set(set) });
            }
        }
        for &(a, b) in lattice.edges() {
            if !distinguished[a].is_subset(&distinguished[b]) {
                return Err(EquivError::NotMonotone {
                    from: lattice.name(a).to_string(),
                    to: lattice.name(b).to_string(),
                });
            }
        }
        Ok(Self { star, lattice: lattice.clone(), distinguished })
    }

    pub fn star(&self) -> &StarAction {
        &self.star
    }

    pub fn diagram(&self) -> &DynkinDiagram {
        self.star.diagram()
    }

    pub fn lattice(&self) -> &ExtensionLattice {
        &self.lattice
    }

    pub fn prime(&self) -> u32 {
        self.lattice.prime()
    }

    pub fn distinguished(&self, node: NodeId) -> &VertexSet {
        &self.distinguished[node]
    }

    pub fn table(&self) -> &[VertexSet] {
        &self.distinguished
    }
}

/// A bijection of diagram vertices preserving the Cartan matrix and
/// carrying one `*`-action onto the other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramIso {
    source: StarAction,
    target: StarAction,
    /// Vertex index in the source ↦ vertex index in the target.
    map: Vec<usize>,
}

impl DiagramIso {
    pub fn new(source: &StarAction, target: &StarAction, labels: &BTreeMap<u32, u32>) -> Result<Self, EquivError> {
        let (a, b) = (source.diagram(), target.diagram());
        if a.rank() != b.rank() || labels.len() != a.rank() {
            return Err(EquivError::BadIso("not a bijection of the vertex sets".into()));
        }
        let mut map = Vec::with_capacity(a.rank());
        for &l in a.labels() {
            let to = labels.get(&l).ok_or_else(|| EquivError::BadIso(alloc::format!("vertex {l} is not mapped")))?;
            map.push(b.index_of(*to)?);
        }
        if map.iter().collect::<BTreeSet<_>>().len() != map.len() {
            return Err(EquivError::BadIso("not injective".into()));
        }
        for i in 0..map.len() {
            for j in 0..map.len() {
                if a.cartan_entry(i, j) != b.cartan_entry(map[i], map[j]) {
                    return Err(EquivError::BadIso(alloc::format!(
                        "edge between {} and {} is not preserved",
                        a.labels()[i],
                        a.labels()[j]
                    )));
                }
            }
        }
        // φ G φ⁻¹ must be the target's group.
        let mut inv = alloc::vec![0; map.len()];
        for (i, &j) in map.iter().enumerate() {
            inv[j] = i;
        }
        let conjugated: BTreeSet<Vec<usize>> =
            source.elements().into_iter().map(|s| (0..map.len()).map(|k| map[s[inv[k]]]).collect()).collect();
        let other: BTreeSet<Vec<usize>> = target.elements().into_iter().collect();
        if conjugated != other {
            return Err(EquivError::BadIso("does not intertwine the *-actions".into()));
        }
        Ok(Self { source: source.clone(), target: target.clone(), map })
    }

    /// Identity of a diagram with itself.
    pub fn identity(star: &StarAction) -> Self {
        Self { source: star.clone(), target: star.clone(), map: (0..star.diagram().rank()).collect() }
    }

    pub fn source(&self) -> &StarAction {
        &self.source
    }

    pub fn target(&self) -> &StarAction {
        &self.target
    }

    pub fn apply(&self, label: u32) -> Result<u32, EquivError> {
        let i = self.source.diagram().index_of(label)?;
        Ok(self.target.diagram().labels()[self.map[i]])
    }

    pub fn apply_set(&self, set: &VertexSet) -> Result<VertexSet, EquivError> {
        set.iter().map(|&l| self.apply(l)).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut map = alloc::vec![0; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            map[j] = i;
        }
        Self { source: self.target.clone(), target: self.source.clone(), map }
    }

    pub fn label_map(&self) -> BTreeMap<u32, u32> {
        let (a, b) = (self.source.diagram(), self.target.diagram());
        self.map.iter().enumerate().map(|(i, &j)| (a.labels()[i], b.labels()[j])).collect()
    }
}

/// Which condition failed in [`check_motequiv`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotequivClause {
    /// `Θ₀` is distinguished on exactly one side.
    Distinguishedness,
    /// Both distinguished but `φ(δ₀) ≠ δ₀′`.
    Bijection,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotequivVerdict {
    pub holds: bool,
    pub failure: Option<(NodeId, MotequivClause)>,
    /// The p-special nodes that were examined.
    pub checked: Vec<NodeId>,
}

/// At every p-special node: `Θ₀ ⊆ δ₀(E) ⟺ φ(Θ₀) ⊆ δ₀′(E)`, and when both
/// hold, `φ(δ₀(E)) = δ₀′(E)`.
pub fn check_motequiv(
    t: &TitsTable,
    t2: &TitsTable,
    phi: &DiagramIso,
    theta0: &VertexSet,
) -> Result<MotequivVerdict, EquivError> {
    if t.lattice != t2.lattice {
        return Err(EquivError::LatticeMismatch);
    }
    if phi.source != t.star || phi.target != t2.star {
        return Err(EquivError::BadIso("does not connect the two tables' diagrams".into()));
    }
    if !t.star.is_invariant(theta0)? {
        return Err(EquivError::NotInvariant(fmt_set(theta0)));
    }
    let image = phi.apply_set(theta0)?;
    let checked = t.lattice.p_special_nodes();
    for &e in &checked {
        let (d, d2) = (&t.distinguished[e], &t2.distinguished[e]);
        let (here, there) = (theta0.is_subset(d), image.is_subset(d2));
        if here != there {
            return Ok(MotequivVerdict { holds: false, failure: Some((e, MotequivClause::Distinguishedness)), checked });
        }
        if here && phi.apply_set(d)? != *d2 {
            return Ok(MotequivVerdict { holds: false, failure: Some((e, MotequivClause::Bijection)), checked });
        }
    }
    Ok(MotequivVerdict { holds: true, failure: None, checked })
}

/// The isomorphisms `M(X_Θ) ≅ M(X_{φ(Θ)})` implied by a true verdict, for
/// every nonempty `*`-invariant `Θ ⊇ Θ₀`.
pub fn conclusions(
    verdict: &MotequivVerdict,
    phi: &DiagramIso,
    theta0: &VertexSet,
) -> Result<Vec<(VertexSet, VertexSet)>, EquivError> {
    if !verdict.holds {
        return Err(EquivError::FalseVerdict);
    }
    phi.source
        .invariant_subsets()
        .into_iter()
        .filter(|s| !s.is_empty() && theta0.is_subset(s))
        .map(|s| {
            let image = phi.apply_set(&s)?;
            Ok((s, image))
        })
        .collect()
}

/// Hypotheses of the generically-split criterion. They are not checked;
/// reports carry them along with the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CritborelHypotheses {
    pub inner_type: bool,
    pub generically_split: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CritborelReport {
    pub holds: bool,
    pub poincare_equal: bool,
    pub first_difference: Option<NodeId>,
    pub hypotheses: CritborelHypotheses,
}

fn check_upward(lattice: &ExtensionLattice, s: &[bool]) -> Result<(), EquivError> {
    if s.len() != lattice.len() {
        return Err(EquivError::TableSize { expected: lattice.len(), got: s.len() });
    }
    for &(a, b) in lattice.edges() {
        if s[a] && !s[b] {
            return Err(EquivError::NotMonotone { from: lattice.name(a).to_string(), to: lattice.name(b).to_string() });
        }
    }
    Ok(())
}

/// For generically split `X`, `X′`: `M(X) ≅ M(X′)` iff the Poincaré
/// polynomials agree and, at every node, `G_E` is split by a prime-to-p
/// extension exactly when `G′_E` is.
pub fn critborel_check(
    lattice: &ExtensionLattice,
    p: &LaurentPoly,
    p2: &LaurentPoly,
    s: &[bool],
    s2: &[bool],
    hypotheses: CritborelHypotheses,
) -> Result<CritborelReport, EquivError> {
    check_upward(lattice, s)?;
    check_upward(lattice, s2)?;
    let poincare_equal = p == p2;
    let first_difference = lattice.node_ids().find(|&e| s[e] != s2[e]);
    Ok(CritborelReport { holds: poincare_equal && first_difference.is_none(), poincare_equal, first_difference, hypotheses })
}

/// A type and prime for which splitting by a prime-to-p extension is
/// detected by a cohomological invariant. The invariant is only a label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CohinvPreset {
    pub name: &'static str,
    pub diagram: &'static str,
    pub prime: u32,
    pub invariant: &'static str,
}

pub const COHINV_PRESETS: [CohinvPreset; 5] = [
    CohinvPreset { name: "F4/p=3", diagram: "F4", prime: 3, invariant: "g3" },
    CohinvPreset { name: "E8/p=5", diagram: "E8", prime: 5, invariant: "e5" },
    CohinvPreset { name: "G2/p=2", diagram: "G2", prime: 2, invariant: "e3" },
    CohinvPreset { name: "1E6/p=2", diagram: "E6", prime: 2, invariant: "f3" },
    CohinvPreset { name: "E7/p=3", diagram: "E7", prime: 3, invariant: "g3" },
];

impl CohinvPreset {
    pub fn by_name(name: &str) -> Option<&'static CohinvPreset> {
        COHINV_PRESETS.iter().find(|p| p.name == name)
    }

    pub fn diagram(&self) -> DynkinDiagram {
        DynkinDiagram::parse(self.diagram).expect("preset diagrams are valid")
    }

    /// Poincaré polynomial of `X_Θ` for the preset's type, from the
    /// fundamental degrees.
    pub fn poincare(&self, theta: &VertexSet) -> Result<LaurentPoly, EquivError> {
        Ok(poincare_closed(&self.diagram(), theta)?)
    }
}

/// `{ Tr(M_E) : E ∈ lattice }`.
pub fn splitting_pattern(catalog: &AtomCatalog, m: &FormalMotive) -> Result<BTreeSet<LaurentPoly>, EquivError> {
    catalog.lattice().node_ids().map(|e| Ok(catalog.tate_trace(m, e)?)).collect()
}

fn split_rank_reached(catalog: &AtomCatalog, m: &FormalMotive, node: NodeId) -> Result<bool, EquivError> {
    Ok(catalog.tate_trace(m, node)?.coeff_sum() == catalog.rank(m)?)
}

/// Distinct atom classes of `m` anisotropic at `node`, in canonical order.
fn anisotropic_classes(catalog: &AtomCatalog, m: &FormalMotive, node: NodeId) -> Result<Vec<usize>, EquivError> {
    let mut out: Vec<usize> = Vec::new();
    for &(a, _) in m.terms() {
        if catalog.atom(a).is_isotropic_at(node) {
            continue;
        }
        let mut fresh = true;
        for &b in &out {
            fresh &= !catalog.equivalent(a, b)?;
        }
        if fresh {
            out.push(a);
        }
    }
    Ok(out)
}

fn step(catalog: &AtomCatalog, atom: usize, node: NodeId) -> Result<NodeId, EquivError> {
    catalog.generic_node(atom, node)?.ok_or_else(|| MotiveError::MissingGenericNode(catalog.atom(atom).name().to_string()).into())
}

/// Greedy splitting tower: from the base, repeatedly pass to the generic
/// point of the first atom still anisotropic, until the motive is split.
pub fn splitting_tower(catalog: &AtomCatalog, m: &FormalMotive) -> Result<Vec<NodeId>, EquivError> {
    let mut node = catalog.lattice().base();
    let mut chain = alloc::vec![node];
    while !split_rank_reached(catalog, m, node)? {
        let Some(&a) = anisotropic_classes(catalog, m, node)?.first() else {
            return Err(EquivError::TowerStalled(catalog.lattice().name(node).to_string()));
        };
        node = step(catalog, a, node)?;
        chain.push(node);
    }
    Ok(chain)
}

/// Traces along every splitting tower, over all choices of atom at each
/// step.
pub fn pattern_from_towers(catalog: &AtomCatalog, m: &FormalMotive) -> Result<BTreeSet<LaurentPoly>, EquivError> {
    let mut seen = BTreeSet::new();
    let mut stack = alloc::vec![catalog.lattice().base()];
    let mut out = BTreeSet::new();
    while let Some(node) = stack.pop() {
        if !seen.insert(node) {
            continue;
        }
        out.insert(catalog.tate_trace(m, node)?);
        if split_rank_reached(catalog, m, node)? {
            continue;
        }
        let classes = anisotropic_classes(catalog, m, node)?;
        if classes.is_empty() {
            return Err(EquivError::TowerStalled(catalog.lattice().name(node).to_string()));
        }
        for a in classes {
            stack.push(step(catalog, a, node)?);
        }
    }
    Ok(out)
}
