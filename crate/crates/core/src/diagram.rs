//! Dynkin diagrams, root systems and the `*`-action.
//!
//! Vertices carry integer labels. Diagrams built from a type list use
//! Bourbaki numbering per component, offset so labels are globally unique:
//! `A3;G2` has vertices `1,2,3` (the `A3`) and `4,5` (the `G2`, with `4` the
//! short root). Subdiagrams keep the labels of their parent.
//!
//! The Cartan matrix is stored as `C[i][j] = <α_j, α_i^∨>`, so that the
//! simple reflection `s_i` sends `α_j` to `α_j - C[i][j] α_i`.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// A set of diagram vertices, by label.
pub type VertexSet = BTreeSet<u32>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiagramError {
    #[error("invalid Cartan type {letter}{rank}")]
    InvalidCartanType { letter: char, rank: usize },
    #[error("cannot parse diagram spec {0:?}")]
    Parse(String),
    #[error("vertex {0} is not in the diagram")]
    UnknownVertex(u32),
    #[error("duplicate vertex label {0}")]
    DuplicateLabel(u32),
    #[error("Cartan matrix is not of finite type: {0}")]
    NotFiniteType(String),
    #[error("permutation is not a diagram automorphism: {0}")]
    NotAutomorphism(String),
    #[error("subset {0} is not a union of *-orbits")]
    NotInvariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CartanType {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl CartanType {
    pub fn letter(self) -> char {
        match self {
            CartanType::A => 'A',
            CartanType::B => 'B',
            CartanType::C => 'C',
            CartanType::D => 'D',
            CartanType::E => 'E',
            CartanType::F => 'F',
            CartanType::G => 'G',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        Some(match c.to_ascii_uppercase() {
            'A' => CartanType::A,
            'B' => CartanType::B,
            'C' => CartanType::C,
            'D' => CartanType::D,
            'E' => CartanType::E,
            'F' => CartanType::F,
            'G' => CartanType::G,
            _ => return None,
        })
    }

    /// Admissible ranks. `D3` is rejected: write `A3`.
    pub fn admits_rank(self, rank: usize) -> bool {
        match self {
            CartanType::A => rank >= 1,
            CartanType::B | CartanType::C => rank >= 2,
            CartanType::D => rank >= 4,
            CartanType::E => (6..=8).contains(&rank),
            CartanType::F => rank == 4,
            CartanType::G => rank == 2,
        }
    }

    /// Order of the Weyl group of a connected diagram of this type.
    pub fn weyl_order(self, rank: usize) -> u128 {
        let n = rank as u128;
        let fact = |k: u128| (1..=k).product::<u128>();
        match self {
            CartanType::A => fact(n + 1),
            CartanType::B | CartanType::C => (1u128 << n) * fact(n),
            CartanType::D => (1u128 << (n - 1)) * fact(n),
            CartanType::E => match rank {
                6 => 51_840,
                7 => 2_903_040,
                _ => 696_729_600,
            },
            CartanType::F => 1152,
            CartanType::G => 12,
        }
    }

    /// Fundamental degrees of the Weyl group.
    pub fn degrees(self, rank: usize) -> Vec<u32> {
        let r = rank as u32;
        match self {
            CartanType::A => (2..=r + 1).collect(),
            CartanType::B | CartanType::C => (1..=r).map(|k| 2 * k).collect(),
            CartanType::D => {
                let mut d: Vec<u32> = (1..r).map(|k| 2 * k).collect();
                d.push(r);
                d.sort_unstable();
                d
            }
            CartanType::E => match rank {
                6 => alloc::vec![2, 5, 6, 8, 9, 12],
                7 => alloc::vec![2, 6, 8, 10, 12, 14, 18],
                _ => alloc::vec![2, 8, 12, 14, 18, 20, 24, 30],
            },
            CartanType::F => alloc::vec![2, 6, 8, 12],
            CartanType::G => alloc::vec![2, 6],
        }
    }

    /// Number of positive roots of a connected diagram of this type.
    pub fn positive_root_count(self, rank: usize) -> usize {
        match self {
            CartanType::A => rank * (rank + 1) / 2,
            CartanType::B | CartanType::C => rank * rank,
            CartanType::D => rank * (rank - 1),
            CartanType::E => match rank {
                6 => 36,
                7 => 63,
                _ => 120,
            },
            CartanType::F => 24,
            CartanType::G => 6,
        }
    }

    /// Squared root lengths (up to scale) of the simple roots, Bourbaki order.
    fn root_lengths(self, rank: usize) -> Vec<u8> {
        match self {
            CartanType::A | CartanType::D | CartanType::E => vec![1; rank],
            CartanType::B => {
                let mut v = vec![2; rank];
                v[rank - 1] = 1;
                v
            }
            CartanType::C => {
                let mut v = vec![1; rank];
                v[rank - 1] = 2;
                v
            }
            CartanType::F => vec![2, 2, 1, 1],
            CartanType::G => vec![1, 3],
        }
    }

    /// Edges `(i, j)` between 0-based Bourbaki positions.
    fn bourbaki_edges(self, rank: usize) -> Vec<(usize, usize)> {
        match self {
            CartanType::A | CartanType::B | CartanType::C | CartanType::F | CartanType::G => {
                (0..rank - 1).map(|i| (i, i + 1)).collect()
            }
            CartanType::D => {
                let mut e: Vec<_> = (0..rank - 2).map(|i| (i, i + 1)).collect();
                e.push((rank - 3, rank - 1));
                e
            }
            CartanType::E => {
                let mut e = vec![(0, 2), (2, 3), (1, 3)];
                e.extend((3..rank - 1).map(|i| (i, i + 1)));
                e
            }
        }
    }

    /// Cartan matrix in Bourbaki order.
    pub fn cartan_matrix(self, rank: usize) -> Vec<Vec<i32>> {
        let lengths = self.root_lengths(rank);
        let mut c = vec![vec![0i32; rank]; rank];
        for (i, row) in c.iter_mut().enumerate() {
            row[i] = 2;
        }
        for (i, j) in self.bourbaki_edges(rank) {
            let (li, lj) = (lengths[i] as i32, lengths[j] as i32);
            let m = li.max(lj) / li.min(lj);
            c[i][j] = if li >= lj { -1 } else { -m };
            c[j][i] = if lj >= li { -1 } else { -m };
        }
        c
    }
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A connected component: its type and its vertex labels in Bourbaki order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Component {
    pub cartan_type: CartanType,
    pub vertices: Vec<u32>,
}

impl Component {
    pub fn rank(&self) -> usize {
        self.vertices.len()
    }
}

/// An edge of the diagram. For multiple edges the arrow points from the long
/// root to the short root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    pub multiplicity: u8,
    /// `(long, short)` for multiplicity 2 or 3.
    pub arrow: Option<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DynkinDiagram {
    labels: Vec<u32>,
    cartan: Vec<Vec<i32>>,
    components: Vec<Component>,
}

impl DynkinDiagram {
    /// Builds the diagram of a list of `(type, rank)` components with globally
    /// offset Bourbaki labels.
    pub fn build(spec: &[(CartanType, usize)]) -> Result<Self, DiagramError> {
        let n: usize = spec.iter().map(|&(_, r)| r).sum();
        let mut cartan = vec![vec![0i32; n]; n];
        let mut components = Vec::new();
        let mut offset = 0;
        for &(ty, rank) in spec {
            if !ty.admits_rank(rank) {
                return Err(DiagramError::InvalidCartanType { letter: ty.letter(), rank });
            }
            let block = ty.cartan_matrix(rank);
            for i in 0..rank {
                for j in 0..rank {
                    cartan[offset + i][offset + j] = block[i][j];
                }
            }
            components.push(Component {
                cartan_type: ty,
                vertices: (offset as u32 + 1..=(offset + rank) as u32).collect(),
            });
            offset += rank;
        }
        Ok(Self { labels: (1..=n as u32).collect(), cartan, components })
    }

    /// Parses `"A3;G2"`-style specs. The empty string is the empty diagram.
    pub fn parse(spec: &str) -> Result<Self, DiagramError> {
        let mut parts = Vec::new();
        for token in spec.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            let mut chars = token.chars();
            let letter = chars.next().ok_or_else(|| DiagramError::Parse(spec.to_string()))?;
            let ty = CartanType::from_letter(letter).ok_or_else(|| DiagramError::Parse(spec.to_string()))?;
            let rank: usize = chars.as_str().parse().map_err(|_| DiagramError::Parse(spec.to_string()))?;
            parts.push((ty, rank));
        }
        Self::build(&parts)
    }

    /// Builds a diagram from arbitrary labels and a Cartan matrix, recognising
    /// the type of each connected component.
    pub fn from_cartan(labels: Vec<u32>, cartan: Vec<Vec<i32>>) -> Result<Self, DiagramError> {
        let n = labels.len();
        let mut seen = BTreeSet::new();
        for &l in &labels {
            if !seen.insert(l) {
                return Err(DiagramError::DuplicateLabel(l));
            }
        }
        if cartan.len() != n || cartan.iter().any(|r| r.len() != n) {
            return Err(DiagramError::NotFiniteType("matrix shape does not match labels".into()));
        }
        for i in 0..n {
            if cartan[i][i] != 2 {
                return Err(DiagramError::NotFiniteType(format!("diagonal entry at {} is not 2", labels[i])));
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (a, b) = (cartan[i][j], cartan[j][i]);
                if (a == 0) != (b == 0) || a > 0 || !(0..=3).contains(&(a * b)) || a < -3 {
                    return Err(DiagramError::NotFiniteType(format!(
                        "bad entries between {} and {}",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        let mut components = Vec::new();
        let mut visited = vec![false; n];
        for start in 0..n {
            if visited[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([start]);
            visited[start] = true;
            while let Some(v) = queue.pop_front() {
                comp.push(v);
                for w in 0..n {
                    if w != v && cartan[v][w] != 0 && !visited[w] {
                        visited[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            let (ty, order) = classify_component(&comp, &cartan, &labels)?;
            components.push(Component { cartan_type: ty, vertices: order.iter().map(|&i| labels[i]).collect() });
        }
        Ok(Self { labels, cartan, components })
    }

    /// The induced subdiagram on `vertices`, keeping labels.
    pub fn subdiagram(&self, vertices: &VertexSet) -> Result<Self, DiagramError> {
        let idx: Vec<usize> = vertices.iter().map(|&l| self.index_of(l)).collect::<Result<_, _>>()?;
        let labels = idx.iter().map(|&i| self.labels[i]).collect();
        let cartan = idx.iter().map(|&i| idx.iter().map(|&j| self.cartan[i][j]).collect()).collect();
        Self::from_cartan(labels, cartan)
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn vertex_set(&self) -> VertexSet {
        self.labels.iter().copied().collect()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn index_of(&self, label: u32) -> Result<usize, DiagramError> {
        self.labels.iter().position(|&l| l == label).ok_or(DiagramError::UnknownVertex(label))
    }

    /// Checks that every label of `set` is a vertex.
    pub fn check_subset(&self, set: &VertexSet) -> Result<(), DiagramError> {
        set.iter().try_for_each(|&l| self.index_of(l).map(|_| ()))
    }

    /// `C[i][j]` by vertex index.
    pub fn cartan_entry(&self, i: usize, j: usize) -> i32 {
        self.cartan[i][j]
    }

    pub fn cartan_matrix(&self) -> &[Vec<i32>] {
        &self.cartan
    }

    pub fn edges(&self) -> Vec<Edge> {
        let n = self.rank();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let (cij, cji) = (self.cartan[i][j], self.cartan[j][i]);
                if cij == 0 {
                    continue;
                }
                let m = (cij * cji) as u8;
                // C[i][j] = -m exactly when i is the short root.
                let arrow = match m {
                    1 => None,
                    _ if cij == -(m as i32) => Some((self.labels[j], self.labels[i])),
                    _ => Some((self.labels[i], self.labels[j])),
                };
                out.push(Edge { a: self.labels[i], b: self.labels[j], multiplicity: m, arrow });
            }
        }
        out
    }

    /// `"A3;G2"`-style type string (ranks only, labels dropped).
    pub fn type_string(&self) -> String {
        let parts: Vec<String> =
            self.components.iter().map(|c| format!("{}{}", c.cartan_type, c.rank())).collect();
        parts.join(";")
    }

    /// Order of the Weyl group, from the classical formulas.
    pub fn weyl_order(&self) -> u128 {
        self.components.iter().map(|c| c.cartan_type.weyl_order(c.rank())).product()
    }

    /// Whether the index permutation `perm` preserves the Cartan matrix.
    pub fn is_automorphism(&self, perm: &[usize]) -> bool {
        let n = self.rank();
        if perm.len() != n || !is_permutation(perm) {
            return false;
        }
        (0..n).all(|i| (0..n).all(|j| self.cartan[perm[i]][perm[j]] == self.cartan[i][j]))
    }

    /// The full automorphism group of the diagram, as a `*`-action.
    pub fn automorphisms(&self) -> StarAction {
        let n = self.rank();
        let mut found = Vec::new();
        let mut perm = vec![usize::MAX; n];
        let mut used = vec![false; n];
        self.extend_automorphism(0, &mut perm, &mut used, &mut found);
        let mut action = StarAction::trivial(self.clone());
        let mut elements: BTreeSet<Vec<usize>> = action.elements().into_iter().collect();
        for p in found {
            if !elements.contains(&p) {
                action.generators.push(p);
                elements = action.elements().into_iter().collect();
            }
        }
        action
    }

    fn extend_automorphism(&self, k: usize, perm: &mut [usize], used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let n = self.rank();
        if k == n {
            out.push(perm.to_vec());
            return;
        }
        for cand in 0..n {
            if used[cand] {
                continue;
            }
            let ok = (0..k).all(|i| {
                self.cartan[perm[i]][cand] == self.cartan[i][k] && self.cartan[cand][perm[i]] == self.cartan[k][i]
            });
            if ok {
                perm[k] = cand;
                used[cand] = true;
                self.extend_automorphism(k + 1, perm, used, out);
                used[cand] = false;
            }
        }
        perm[k] = usize::MAX;
    }

    /// The positive roots, by reflection closure of the simple roots.
    pub fn positive_roots(&self) -> RootSystem {
        RootSystem::new(self.clone())
    }
}

impl fmt::Display for DynkinDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "∅");
        }
        for (k, c) in self.components.iter().enumerate() {
            if k > 0 {
                write!(f, " x ")?;
            }
            let labels: Vec<String> = c.vertices.iter().map(|l| l.to_string()).collect();
            write!(f, "{}{}({})", c.cartan_type, c.rank(), labels.join(","))?;
        }
        Ok(())
    }
}

fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    perm.iter().all(|&p| p < perm.len() && !core::mem::replace(&mut seen[p], true))
}

/// Identifies the type of a connected component and returns its vertices in
/// Bourbaki order.
fn classify_component(
    comp: &[usize],
    cartan: &[Vec<i32>],
    labels: &[u32],
) -> Result<(CartanType, Vec<usize>), DiagramError> {
    let n = comp.len();
    let neighbors = |v: usize| -> Vec<usize> { comp.iter().copied().filter(|&w| w != v && cartan[v][w] != 0).collect() };
    let mult = |a: usize, b: usize| cartan[a][b] * cartan[b][a];
    let edge_count: usize = comp.iter().map(|&v| neighbors(v).len()).sum::<usize>() / 2;
    let describe = || {
        let ls: Vec<String> = comp.iter().map(|&i| labels[i].to_string()).collect();
        format!("component {{{}}}", ls.join(","))
    };
    if edge_count + 1 != n {
        return Err(DiagramError::NotFiniteType(format!("{} contains a cycle", describe())));
    }
    // Walks a path from `start` away from `prev`.
    let walk = |start: usize, prev: Option<usize>| -> Vec<usize> {
        let mut out = vec![start];
        let mut prev = prev;
        let mut cur = start;
        loop {
            let next: Vec<usize> = neighbors(cur).into_iter().filter(|&w| Some(w) != prev).collect();
            match next.as_slice() {
                [w] => {
                    prev = Some(cur);
                    cur = *w;
                    out.push(cur);
                }
                _ => return out,
            }
        }
    };
    let is_short = |a: usize, b: usize| cartan[a][b] < -1;

    let (ty, order) = if n == 1 {
        (CartanType::A, vec![comp[0]])
    } else {
        let max_degree = comp.iter().map(|&v| neighbors(v).len()).max().unwrap_or(0);
        let multiple: Vec<(usize, usize)> = comp
            .iter()
            .flat_map(|&a| comp.iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| a < b && cartan[a][b] != 0 && mult(a, b) > 1)
            .collect();
        let ends: Vec<usize> = comp.iter().copied().filter(|&v| neighbors(v).len() == 1).collect();
        match (multiple.as_slice(), max_degree) {
            ([], 2) | ([], 1) => (CartanType::A, walk(ends[0], None)),
            ([], 3) => {
                let branches: Vec<usize> = comp.iter().copied().filter(|&v| neighbors(v).len() == 3).collect();
                if branches.len() != 1 {
                    return Err(DiagramError::NotFiniteType(format!("{} has several branch points", describe())));
                }
                let b = branches[0];
                let mut arms: Vec<Vec<usize>> = neighbors(b).into_iter().map(|w| walk(w, Some(b))).collect();
                arms.sort_by_key(|a| (a.len(), labels[*a.last().unwrap()]));
                let lens: Vec<usize> = arms.iter().map(Vec::len).collect();
                match lens.as_slice() {
                    [1, 1, _] => {
                        // Long arm last; for D4 prefer the smallest end label as α1.
                        let long_pos = if lens[1] == lens[2] {
                            (0..3).min_by_key(|&k| labels[*arms[k].last().unwrap()]).unwrap()
                        } else {
                            2
                        };
                        let long = arms.remove(long_pos);
                        arms.sort_by_key(|a| labels[a[0]]);
                        let mut order: Vec<usize> = long.iter().rev().copied().collect();
                        order.push(b);
                        order.push(arms[0][0]);
                        order.push(arms[1][0]);
                        (CartanType::D, order)
                    }
                    [1, 2, 2..=4] => {
                        let (short, mid, long) = (&arms[0], &arms[1], &arms[2]);
                        let mut order = vec![mid[1], short[0], mid[0], b];
                        order.extend(long.iter().copied());
                        (CartanType::E, order)
                    }
                    _ => return Err(DiagramError::NotFiniteType(format!("{} has an affine or hyperbolic shape", describe()))),
                }
            }
            ([(a, b)], 1) if mult(*a, *b) == 3 => {
                let (short, long) = if is_short(*a, *b) { (*a, *b) } else { (*b, *a) };
                (CartanType::G, vec![short, long])
            }
            ([(a, b)], 1) if mult(*a, *b) == 2 => {
                let (short, long) = if is_short(*a, *b) { (*a, *b) } else { (*b, *a) };
                (CartanType::B, vec![long, short])
            }
            ([(a, b)], 2) if mult(*a, *b) == 2 => {
                let (a, b) = (*a, *b);
                let a_end = neighbors(a).len() == 1;
                let b_end = neighbors(b).len() == 1;
                if a_end || b_end {
                    let (end, inner) = if a_end { (a, b) } else { (b, a) };
                    let mut order = walk(inner, Some(end));
                    order.reverse();
                    order.push(end);
                    let ty = if is_short(end, inner) { CartanType::B } else { CartanType::C };
                    (ty, order)
                } else if n == 4 {
                    let (short, long) = if is_short(a, b) { (a, b) } else { (b, a) };
                    let mut order = walk(long, Some(short));
                    order.reverse();
                    order.extend(walk(short, Some(long)));
                    (CartanType::F, order)
                } else {
                    return Err(DiagramError::NotFiniteType(format!("{} has an interior double edge", describe())));
                }
            }
            _ => return Err(DiagramError::NotFiniteType(format!("{} is not a finite Dynkin diagram", describe()))),
        }
    };
    if !ty.admits_rank(order.len()) {
        return Err(DiagramError::NotFiniteType(format!("{} classifies as {}{}", describe(), ty, order.len())));
    }
    let expected = ty.cartan_matrix(order.len());
    for (i, &vi) in order.iter().enumerate() {
        for (j, &vj) in order.iter().enumerate() {
            if cartan[vi][vj] != expected[i][j] {
                return Err(DiagramError::NotFiniteType(format!("{} has inconsistent root lengths", describe())));
            }
        }
    }
    Ok((ty, order))
}

/// A group of diagram automorphisms given by generators (index permutations).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarAction {
    diagram: DynkinDiagram,
    generators: Vec<Vec<usize>>,
}

impl StarAction {
    pub fn trivial(diagram: DynkinDiagram) -> Self {
        Self { diagram, generators: Vec::new() }
    }

    /// Builds an action from generators given as index permutations.
    pub fn new(diagram: DynkinDiagram, generators: Vec<Vec<usize>>) -> Result<Self, DiagramError> {
        for g in &generators {
            if !diagram.is_automorphism(g) {
                return Err(DiagramError::NotAutomorphism(format!("{:?}", g)));
            }
        }
        Ok(Self { diagram, generators })
    }

    /// Builds an action from generators given as label maps; unmapped
    /// vertices are fixed.
    pub fn from_label_maps(diagram: DynkinDiagram, maps: &[BTreeMap<u32, u32>]) -> Result<Self, DiagramError> {
        let mut gens = Vec::new();
        for m in maps {
            let mut perm: Vec<usize> = (0..diagram.rank()).collect();
            for (&from, &to) in m {
                perm[diagram.index_of(from)?] = diagram.index_of(to)?;
            }
            gens.push(perm);
        }
        Self::new(diagram, gens)
    }

    pub fn diagram(&self) -> &DynkinDiagram {
        &self.diagram
    }

    pub fn generators(&self) -> &[Vec<usize>] {
        &self.generators
    }

    /// Generators as label maps listing only moved vertices.
    pub fn generator_label_maps(&self) -> Vec<BTreeMap<u32, u32>> {
        let l = self.diagram.labels();
        self.generators
            .iter()
            .map(|g| g.iter().enumerate().filter(|(i, &j)| *i != j).map(|(i, &j)| (l[i], l[j])).collect())
            .collect()
    }

    /// All group elements, identity first.
    pub fn elements(&self) -> Vec<Vec<usize>> {
        let id: Vec<usize> = (0..self.diagram.rank()).collect();
        let mut seen = BTreeSet::from([id.clone()]);
        let mut out = vec![id.clone()];
        let mut queue = VecDeque::from([id]);
        while let Some(p) = queue.pop_front() {
            for g in &self.generators {
                let q: Vec<usize> = p.iter().map(|&i| g[i]).collect();
                if seen.insert(q.clone()) {
                    out.push(q.clone());
                    queue.push_back(q);
                }
            }
        }
        out
    }

    pub fn order(&self) -> usize {
        self.elements().len()
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.iter().all(|g| g.iter().enumerate().all(|(i, &j)| i == j))
    }

    /// Image of a label under an index permutation.
    pub fn apply(&self, perm: &[usize], label: u32) -> Result<u32, DiagramError> {
        Ok(self.diagram.labels()[perm[self.diagram.index_of(label)?]])
    }

    pub fn orbit_of(&self, label: u32) -> Result<VertexSet, DiagramError> {
        let i = self.diagram.index_of(label)?;
        let l = self.diagram.labels();
        let mut orbit = BTreeSet::from([label]);
        let mut queue = VecDeque::from([i]);
        let mut seen = BTreeSet::from([i]);
        while let Some(v) = queue.pop_front() {
            for g in &self.generators {
                if seen.insert(g[v]) {
                    orbit.insert(l[g[v]]);
                    queue.push_back(g[v]);
                }
            }
        }
        Ok(orbit)
    }

    /// All orbits of the diagram, ordered by smallest label.
    pub fn all_orbits(&self) -> Vec<VertexSet> {
        let mut out: Vec<VertexSet> = Vec::new();
        for &l in self.diagram.labels() {
            if !out.iter().any(|o| o.contains(&l)) {
                out.push(self.orbit_of(l).expect("label of own diagram"));
            }
        }
        out.sort();
        out
    }

    /// Partitions `subset` by orbits, and reports whether `subset` is a union
    /// of whole orbits.
    pub fn star_orbits(&self, subset: &VertexSet) -> Result<(Vec<VertexSet>, bool), DiagramError> {
        self.diagram.check_subset(subset)?;
        let mut parts: Vec<VertexSet> = Vec::new();
        let mut invariant = true;
        for &l in subset {
            if parts.iter().any(|p| p.contains(&l)) {
                continue;
            }
            let orbit = self.orbit_of(l)?;
            let part: VertexSet = orbit.intersection(subset).copied().collect();
            invariant &= part.len() == orbit.len();
            parts.push(part);
        }
        Ok((parts, invariant))
    }

    pub fn is_invariant(&self, subset: &VertexSet) -> Result<bool, DiagramError> {
        Ok(self.star_orbits(subset)?.1)
    }

    /// Restriction to an invariant vertex subset, acting on the subdiagram.
    pub fn restrict(&self, subset: &VertexSet) -> Result<Self, DiagramError> {
        if !self.is_invariant(subset)? {
            return Err(DiagramError::NotInvariant(format!("{:?}", subset)));
        }
        let sub = self.diagram.subdiagram(subset)?;
        let maps: Vec<BTreeMap<u32, u32>> = self
            .generator_label_maps()
            .into_iter()
            .map(|m| m.into_iter().filter(|(k, _)| subset.contains(k)).collect())
            .collect();
        Self::from_label_maps(sub, &maps)
    }

    /// Every `*`-invariant subset (unions of orbits), in size-then-lex order.
    pub fn invariant_subsets(&self) -> Vec<VertexSet> {
        let orbits = self.all_orbits();
        let mut out: Vec<VertexSet> = (0u64..1 << orbits.len())
            .map(|mask| {
                orbits
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .flat_map(|(_, o)| o.iter().copied())
                    .collect()
            })
            .collect();
        out.sort_by(|a: &VertexSet, b| (a.len(), a).cmp(&(b.len(), b)));
        out
    }
}

/// Positive roots in the simple-root basis together with the diagram.
///
/// Root indices: the simple roots come first in vertex-index order, then the
/// remaining positive roots; negative roots are not stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootSystem {
    diagram: DynkinDiagram,
    positive: Vec<Vec<i32>>,
}

impl RootSystem {
    fn new(diagram: DynkinDiagram) -> Self {
        let n = diagram.rank();
        let mut positive: Vec<Vec<i32>> = (0..n)
            .map(|i| {
                let mut v = vec![0; n];
                v[i] = 1;
                v
            })
            .collect();
        let mut seen: BTreeSet<Vec<i32>> = positive.iter().cloned().collect();
        let mut k = 0;
        while k < positive.len() {
            let beta = positive[k].clone();
            for i in 0..n {
                let image = reflect(&diagram, i, &beta);
                if image.iter().all(|&c| c >= 0) && seen.insert(image.clone()) {
                    positive.push(image);
                }
            }
            k += 1;
        }
        Self { diagram, positive }
    }

    pub fn diagram(&self) -> &DynkinDiagram {
        &self.diagram
    }

    pub fn positive_roots(&self) -> &[Vec<i32>] {
        &self.positive
    }

    pub fn len(&self) -> usize {
        self.positive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty()
    }

    pub fn cartan_matrix(&self) -> &[Vec<i32>] {
        self.diagram.cartan_matrix()
    }

    /// `s_i(β)` in the simple-root basis.
    pub fn reflect(&self, i: usize, beta: &[i32]) -> Vec<i32> {
        reflect(&self.diagram, i, beta)
    }
}

fn reflect(diagram: &DynkinDiagram, i: usize, beta: &[i32]) -> Vec<i32> {
    let pairing: i32 = beta.iter().enumerate().map(|(j, &c)| diagram.cartan_entry(i, j) * c).sum();
    let mut out = beta.to_vec();
    out[i] -= pairing;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_permutations(n: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut p: Vec<usize> = (0..n).collect();
        fn rec(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if k == p.len() {
                out.push(p.clone());
                return;
            }
            for i in k..p.len() {
                p.swap(k, i);
                rec(k + 1, p, out);
                p.swap(k, i);
            }
        }
        rec(0, &mut p, &mut out);
        out
    }

    /// Oracle: count permutations preserving the Cartan matrix.
    fn brute_force_aut_order(d: &DynkinDiagram) -> usize {
        all_permutations(d.rank()).iter().filter(|p| d.is_automorphism(p)).count()
    }

    #[test]
    fn build_examples() {
        let a2 = DynkinDiagram::parse("A2").unwrap();
        assert_eq!(a2.rank(), 2);
        assert_eq!(a2.edges(), vec![Edge { a: 1, b: 2, multiplicity: 1, arrow: None }]);

        let g2 = DynkinDiagram::parse("G2").unwrap();
        // α1 short, α2 long: the arrow goes 2 -> 1.
        assert_eq!(g2.edges(), vec![Edge { a: 1, b: 2, multiplicity: 3, arrow: Some((2, 1)) }]);

        let a1a1 = DynkinDiagram::parse("A1;A1").unwrap();
        assert_eq!(a1a1.rank(), 2);
        assert!(a1a1.edges().is_empty());
        assert_eq!(a1a1.labels(), &[1, 2]);
    }

    #[test]
    fn b_and_c_arrows_differ() {
        let b3 = DynkinDiagram::parse("B3").unwrap();
        let c3 = DynkinDiagram::parse("C3").unwrap();
        assert_eq!(b3.edges()[1].arrow, Some((2, 3)));
        assert_eq!(c3.edges()[1].arrow, Some((3, 2)));
    }

    #[test]
    fn invalid_types_rejected() {
        for bad in ["D3", "E5", "E9", "F3", "G3", "B1", "A0", "X2", "A"] {
            assert!(DynkinDiagram::parse(bad).is_err(), "{bad}");
        }
        assert_eq!(
            DynkinDiagram::parse("D3"),
            Err(DiagramError::InvalidCartanType { letter: 'D', rank: 3 })
        );
    }

    #[test]
    fn automorphism_examples() {
        assert_eq!(DynkinDiagram::parse("A3").unwrap().automorphisms().order(), 2);
        assert_eq!(DynkinDiagram::parse("G2").unwrap().automorphisms().order(), 1);
        assert_eq!(DynkinDiagram::parse("D4").unwrap().automorphisms().order(), 6);
        assert_eq!(DynkinDiagram::parse("A1;A1").unwrap().automorphisms().order(), 2);
        assert_eq!(DynkinDiagram::parse("A2;A2").unwrap().automorphisms().order(), 8);
    }

    #[test]
    fn automorphism_orders_match_brute_force_and_table() {
        let table = [
            ("A1", 1),
            ("A2", 2),
            ("A3", 2),
            ("A4", 2),
            ("A5", 2),
            ("B2", 1),
            ("B3", 1),
            ("C3", 1),
            ("C4", 1),
            ("D4", 6),
            ("D5", 2),
            ("D6", 2),
            ("E6", 2),
            ("E7", 1),
            ("E8", 1),
            ("F4", 1),
            ("G2", 1),
        ];
        for (spec, order) in table {
            let d = DynkinDiagram::parse(spec).unwrap();
            let brute = if d.rank() <= 8 { brute_force_aut_order(&d) } else { order };
            assert_eq!(brute, order, "{spec} brute force");
            assert_eq!(d.automorphisms().order(), order, "{spec}");
        }
    }

    #[test]
    fn positive_root_examples_and_counts() {
        assert_eq!(DynkinDiagram::parse("A2").unwrap().positive_roots().len(), 3);
        assert_eq!(DynkinDiagram::parse("B2").unwrap().positive_roots().len(), 4);
        assert_eq!(DynkinDiagram::parse("G2").unwrap().positive_roots().len(), 6);
        for spec in ["A1", "A4", "B3", "B4", "C3", "C4", "D4", "D5", "E6", "E7", "E8", "F4", "G2"] {
            let d = DynkinDiagram::parse(spec).unwrap();
            let c = &d.components()[0];
            assert_eq!(d.positive_roots().len(), c.cartan_type.positive_root_count(c.rank()), "{spec}");
        }
    }

    #[test]
    fn reflections_permute_positive_roots() {
        for spec in ["B3", "C3", "F4", "G2", "D4", "E6"] {
            let d = DynkinDiagram::parse(spec).unwrap();
            let rs = d.positive_roots();
            let set: BTreeSet<Vec<i32>> = rs.positive_roots().iter().cloned().collect();
            for beta in rs.positive_roots() {
                for i in 0..d.rank() {
                    let mut simple = vec![0; d.rank()];
                    simple[i] = 1;
                    if *beta == simple {
                        continue;
                    }
                    assert!(set.contains(&rs.reflect(i, beta)), "{spec}");
                }
            }
        }
    }

    #[test]
    fn star_orbit_examples() {
        let a2 = DynkinDiagram::parse("A2").unwrap();
        let trivial = StarAction::trivial(a2);
        let (parts, inv) = trivial.star_orbits(&VertexSet::from([1, 2])).unwrap();
        assert_eq!(parts, vec![VertexSet::from([1]), VertexSet::from([2])]);
        assert!(inv);

        let a3 = DynkinDiagram::parse("A3").unwrap();
        let act = a3.automorphisms();
        let (parts, inv) = act.star_orbits(&VertexSet::from([1, 3])).unwrap();
        assert_eq!(parts, vec![VertexSet::from([1, 3])]);
        assert!(inv);
        assert!(!act.is_invariant(&VertexSet::from([1])).unwrap());
    }

    #[test]
    fn star_orbits_idempotent() {
        let d4 = DynkinDiagram::parse("D4").unwrap();
        let act = d4.automorphisms();
        for s in act.invariant_subsets() {
            let (parts, inv) = act.star_orbits(&s).unwrap();
            assert!(inv);
            let union: VertexSet = parts.iter().flatten().copied().collect();
            let (again, _) = act.star_orbits(&union).unwrap();
            assert_eq!(parts, again);
        }
    }

    #[test]
    fn a3_invariant_subsets() {
        let act = DynkinDiagram::parse("A3").unwrap().automorphisms();
        assert_eq!(
            act.invariant_subsets(),
            vec![VertexSet::new(), VertexSet::from([2]), VertexSet::from([1, 3]), VertexSet::from([1, 2, 3])]
        );
    }

    #[test]
    fn subdiagram_classification() {
        let e6 = DynkinDiagram::parse("E6").unwrap();
        let d5 = e6.subdiagram(&VertexSet::from([2, 3, 4, 5, 6])).unwrap();
        assert_eq!(d5.type_string(), "D5");
        let a5 = e6.subdiagram(&VertexSet::from([1, 3, 4, 5, 6])).unwrap();
        assert_eq!(a5.type_string(), "A5");
        let f4 = DynkinDiagram::parse("F4").unwrap();
        assert_eq!(f4.subdiagram(&VertexSet::from([2, 3, 4])).unwrap().type_string(), "C3");
        assert_eq!(f4.subdiagram(&VertexSet::from([1, 2, 3])).unwrap().type_string(), "B3");
        let d4 = DynkinDiagram::parse("D4").unwrap();
        assert_eq!(d4.subdiagram(&VertexSet::from([1, 3, 4])).unwrap().type_string(), "A1;A1;A1");
        let b2 = DynkinDiagram::parse("B2").unwrap();
        assert_eq!(b2.subdiagram(&VertexSet::from([2])).unwrap().type_string(), "A1");
        assert_eq!(b2.subdiagram(&VertexSet::new()).unwrap().rank(), 0);
    }

    #[test]
    fn rebuilt_diagrams_match_canonical() {
        for spec in ["A4", "B4", "C4", "D4", "D5", "E6", "E7", "E8", "F4", "G2", "A3;B2"] {
            let d = DynkinDiagram::parse(spec).unwrap();
            let again = DynkinDiagram::from_cartan(d.labels().to_vec(), d.cartan_matrix().to_vec()).unwrap();
            assert_eq!(again, d, "{spec}");
        }
    }

    #[test]
    fn affine_matrix_rejected() {
        // Affine A2: a triangle.
        let c = vec![vec![2, -1, -1], vec![-1, 2, -1], vec![-1, -1, 2]];
        assert!(matches!(DynkinDiagram::from_cartan(vec![1, 2, 3], c), Err(DiagramError::NotFiniteType(_))));
    }
}
