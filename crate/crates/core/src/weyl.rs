//! Weyl groups as permutations of the root system.
//!
//! An element is stored as the permutation it induces on all roots (positive
//! roots at indices `0..P`, their negatives at `P..2P`), so multiplication is
//! composition of index tables and the length is the number of positive roots
//! sent to negative ones.
//!
//! Conventions used throughout:
//!
//! * cosets are right cosets `wW_J`, with minimal representatives
//!   characterised by `w(α_j) > 0` for `j ∈ J`;
//! * a parabolic *type* `Θ` corresponds to the Levi subset `J = Δ ∖ Θ`, so the
//!   Borel subgroup has type `Δ` and `Θ = ∅` is the point.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::diagram::{DiagramError, DynkinDiagram, RootSystem, VertexSet};
use crate::laurent::LaurentPoly;

/// Default limit on the number of enumerated elements. Covers `E6`; `E7`
/// and `E8` need an explicit larger bound.
pub const DEFAULT_ENUMERATION_BOUND: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WeylError {
    #[error("group too large: order {order} exceeds the enumeration bound {bound}")]
    TooLarge { order: u128, bound: u128 },
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeylElement {
    perm: Vec<u16>,
    length: u32,
}

impl WeylElement {
    pub fn length(&self) -> u32 {
        self.length
    }

    /// Image of root index `r`.
    pub fn image(&self, r: usize) -> usize {
        self.perm[r] as usize
    }

    pub fn as_root_permutation(&self) -> &[u16] {
        &self.perm
    }
}

#[derive(Debug, Clone)]
pub struct WeylGroup {
    roots: RootSystem,
    root_index: BTreeMap<Vec<i32>, usize>,
    reflections: Vec<WeylElement>,
    elements: Vec<WeylElement>,
    lookup: BTreeMap<Vec<u16>, usize>,
}

impl WeylGroup {
    /// Enumerates the whole group, refusing orders above the default bound.
    pub fn generate(roots: &RootSystem) -> Result<Self, WeylError> {
        Self::generate_with_bound(roots, DEFAULT_ENUMERATION_BOUND)
    }

    pub fn of_diagram(diagram: &DynkinDiagram) -> Result<Self, WeylError> {
        Self::generate(&diagram.positive_roots())
    }

    pub fn generate_with_bound(roots: &RootSystem, bound: u128) -> Result<Self, WeylError> {
        let order = roots.diagram().weyl_order();
        if order > bound {
            return Err(WeylError::TooLarge { order, bound });
        }
        let n = roots.diagram().rank();
        let p = roots.len();
        let root_index: BTreeMap<Vec<i32>, usize> =
            roots.positive_roots().iter().enumerate().map(|(i, r)| (r.clone(), i)).collect();
        let reflections: Vec<WeylElement> = (0..n)
            .map(|i| {
                let mut perm = vec![0u16; 2 * p];
                for (r, beta) in roots.positive_roots().iter().enumerate() {
                    let image = roots.reflect(i, beta);
                    let target = match root_index.get(&image) {
                        Some(&k) => k,
                        None => {
                            let neg: Vec<i32> = image.iter().map(|c| -c).collect();
                            root_index[&neg] + p
                        }
                    };
                    perm[r] = target as u16;
                    perm[r + p] = ((target + p) % (2 * p)) as u16;
                }
                let length = count_inversions(&perm, p);
                WeylElement { perm, length }
            })
            .collect();

        let identity = WeylElement { perm: (0..2 * p as u16).collect(), length: 0 };
        let mut elements = vec![identity.clone()];
        let mut lookup = BTreeMap::new();
        lookup.insert(identity.perm[..n].to_vec(), 0usize);
        let mut k = 0;
        // Breadth-first from the identity: lengths come out nondecreasing.
        while k < elements.len() {
            for s in &reflections {
                let perm: Vec<u16> = elements[k].perm.iter().map(|&r| s.perm[r as usize]).collect();
                let key = perm[..n].to_vec();
                if let alloc::collections::btree_map::Entry::Vacant(slot) = lookup.entry(key) {
                    slot.insert(elements.len());
                    let length = count_inversions(&perm, p);
                    elements.push(WeylElement { perm, length });
                }
            }
            k += 1;
        }
        Ok(Self { roots: roots.clone(), root_index, reflections, elements, lookup })
    }

    pub fn diagram(&self) -> &DynkinDiagram {
        self.roots.diagram()
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.roots
    }

    pub fn rank(&self) -> usize {
        self.diagram().rank()
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn positive_count(&self) -> usize {
        self.roots.len()
    }

    /// All elements, in nondecreasing length.
    pub fn elements(&self) -> &[WeylElement] {
        &self.elements
    }

    pub fn identity(&self) -> &WeylElement {
        &self.elements[0]
    }

    pub fn simple_reflection(&self, i: usize) -> &WeylElement {
        &self.reflections[i]
    }

    pub fn is_positive(&self, root: usize) -> bool {
        root < self.positive_count()
    }

    /// `a ∘ b`.
    pub fn compose(&self, a: &WeylElement, b: &WeylElement) -> WeylElement {
        let perm: Vec<u16> = b.perm.iter().map(|&r| a.perm[r as usize]).collect();
        let length = count_inversions(&perm, self.positive_count());
        WeylElement { perm, length }
    }

    pub fn inverse(&self, w: &WeylElement) -> WeylElement {
        let mut perm = vec![0u16; w.perm.len()];
        for (r, &img) in w.perm.iter().enumerate() {
            perm[img as usize] = r as u16;
        }
        WeylElement { perm, length: w.length }
    }

    /// Position of `w` in [`Self::elements`].
    pub fn position(&self, w: &WeylElement) -> Option<usize> {
        self.lookup.get(&w.perm[..self.rank()]).copied()
    }

    /// Vertex indices of a label set.
    pub fn indices(&self, set: &VertexSet) -> Result<Vec<usize>, WeylError> {
        Ok(set.iter().map(|&l| self.diagram().index_of(l)).collect::<Result<_, _>>()?)
    }

    /// The simple roots `α_j` (as vertex labels) that `w` maps to simple roots,
    /// restricted to `from`, together with their images inside `within`.
    pub fn simple_images(&self, w: &WeylElement, from: &VertexSet, within: &VertexSet) -> Result<VertexSet, WeylError> {
        let labels = self.diagram().labels();
        let within_idx = self.indices(within)?;
        let mut out = VertexSet::new();
        for j in self.indices(from)? {
            let img = w.image(j);
            if img < self.rank() && within_idx.contains(&img) {
                out.insert(labels[img]);
            }
        }
        Ok(out)
    }

    /// Order of the parabolic subgroup `W_I`.
    pub fn parabolic_order(&self, set: &VertexSet) -> Result<u128, WeylError> {
        Ok(self.diagram().subdiagram(set)?.weyl_order())
    }

    /// Minimal-length representatives of the cosets `wW_J`.
    pub fn min_coset_reps(&self, levi: &VertexSet) -> Result<Vec<&WeylElement>, WeylError> {
        let j = self.indices(levi)?;
        let p = self.positive_count();
        Ok(self.elements.iter().filter(|w| j.iter().all(|&k| (w.perm[k] as usize) < p)).collect())
    }

    /// Minimal representatives of the double cosets `W_J δ W_K`, with the size
    /// of each double coset.
    pub fn min_double_coset_reps(
        &self,
        left: &VertexSet,
        right: &VertexSet,
    ) -> Result<Vec<(WeylElement, u128)>, WeylError> {
        let j = self.indices(left)?;
        let k = self.indices(right)?;
        let p = self.positive_count();
        let order_left = self.parabolic_order(left)?;
        let order_right = self.parabolic_order(right)?;
        let mut out = Vec::new();
        for w in &self.elements {
            if !k.iter().all(|&i| (w.perm[i] as usize) < p) {
                continue;
            }
            let inv = self.inverse(w);
            if !j.iter().all(|&i| (inv.perm[i] as usize) < p) {
                continue;
            }
            // W_J ∩ δ W_K δ⁻¹ = W_{J ∩ δ(K)} for minimal δ.
            let meet = self.simple_images(w, right, left)?;
            let size = order_left * order_right / self.parabolic_order(&meet)?;
            out.push((w.clone(), size));
        }
        Ok(out)
    }

    /// Poincaré polynomial of the flag variety of parabolic type `theta`:
    /// `Σ_{w ∈ W^J} t^{l(w)}` with `J = Δ ∖ Θ`.
    pub fn poincare(&self, theta: &VertexSet) -> Result<LaurentPoly, WeylError> {
        self.diagram().check_subset(theta)?;
        let levi: VertexSet = self.diagram().vertex_set().difference(theta).copied().collect();
        Ok(self.min_coset_reps(&levi)?.into_iter().map(|w| (w.length as i32, 1)).collect())
    }

    /// Root permutation induced by a diagram automorphism (index permutation).
    pub fn diagram_root_permutation(&self, sigma: &[usize]) -> Vec<u16> {
        let p = self.positive_count();
        let mut perm = vec![0u16; 2 * p];
        for (r, beta) in self.roots.positive_roots().iter().enumerate() {
            let mut image = vec![0; beta.len()];
            for (j, &c) in beta.iter().enumerate() {
                image[sigma[j]] = c;
            }
            let t = self.root_index[&image];
            perm[r] = t as u16;
            perm[r + p] = (t + p) as u16;
        }
        perm
    }

    /// `σ w σ⁻¹` for a diagram automorphism `σ`.
    pub fn conjugate_by_automorphism(&self, sigma: &[usize], w: &WeylElement) -> WeylElement {
        let s = self.diagram_root_permutation(sigma);
        let mut s_inv = vec![0u16; s.len()];
        for (r, &img) in s.iter().enumerate() {
            s_inv[img as usize] = r as u16;
        }
        let perm: Vec<u16> = (0..s.len()).map(|r| s[w.perm[s_inv[r] as usize] as usize]).collect();
        WeylElement { perm, length: w.length }
    }
}

fn count_inversions(perm: &[u16], positive: usize) -> u32 {
    perm[..positive].iter().filter(|&&r| r as usize >= positive).count() as u32
}

/// Convenience: the Poincaré polynomial of `X_Θ` for a diagram.
pub fn poincare(diagram: &DynkinDiagram, theta: &VertexSet) -> Result<LaurentPoly, WeylError> {
    WeylGroup::of_diagram(diagram)?.poincare(theta)
}

/// `Π [d_i]_t` over the fundamental degrees of every component.
pub fn weyl_poincare_closed(diagram: &DynkinDiagram) -> LaurentPoly {
    diagram
        .components()
        .iter()
        .flat_map(|c| c.cartan_type.degrees(c.rank()))
        .map(LaurentPoly::geometric)
        .fold(LaurentPoly::one(), |a, b| &a * &b)
}

/// Poincaré polynomial of `X_Θ` as `P_W / P_{W_J}`, without enumerating
/// the group. Works for E8.
pub fn poincare_closed(diagram: &DynkinDiagram, theta: &VertexSet) -> Result<LaurentPoly, WeylError> {
    diagram.check_subset(theta)?;
    let levi: VertexSet = diagram.vertex_set().difference(theta).copied().collect();
    let sub = weyl_poincare_closed(&diagram.subdiagram(&levi)?);
    Ok(weyl_poincare_closed(diagram).checked_div(&sub).expect("parabolic Poincaré polynomial divides"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;
    use alloc::vec::Vec;

    fn group(spec: &str) -> WeylGroup {
        WeylGroup::of_diagram(&DynkinDiagram::parse(spec).unwrap()).unwrap()
    }

    fn set(v: &[u32]) -> VertexSet {
        v.iter().copied().collect()
    }

    fn lengths(ws: &[&WeylElement]) -> Vec<u32> {
        let mut v: Vec<u32> = ws.iter().map(|w| w.length()).collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn generate_examples() {
        let a2 = group("A2");
        assert_eq!(a2.order(), 6);
        let all: Vec<&WeylElement> = a2.elements().iter().collect();
        assert_eq!(lengths(&all), vec![0, 1, 1, 2, 2, 3]);
        let b2 = group("B2");
        assert_eq!(b2.order(), 8);
        assert_eq!(b2.elements().iter().map(|w| w.length()).max(), Some(4));
        assert_eq!(group("A1").order(), 2);
    }

    #[test]
    fn classical_orders() {
        for spec in ["A1", "A2", "A3", "A4", "B2", "B3", "C3", "D4", "G2", "F4", "A1;A1", "A2;G2"] {
            let w = group(spec);
            assert_eq!(w.order() as u128, w.diagram().weyl_order(), "{spec}");
        }
    }

    #[test]
    fn bound_is_enforced() {
        let e7 = DynkinDiagram::parse("E7").unwrap();
        let err = WeylGroup::of_diagram(&e7).unwrap_err();
        assert_eq!(err, WeylError::TooLarge { order: 2_903_040, bound: DEFAULT_ENUMERATION_BOUND });
        assert!(WeylGroup::generate_with_bound(&DynkinDiagram::parse("F4").unwrap().positive_roots(), 100).is_err());
    }

    #[test]
    fn lengths_invariant_under_inverse() {
        let w = group("B3");
        for e in w.elements() {
            assert_eq!(w.inverse(e), {
                let inv = w.inverse(e);
                assert_eq!(inv.length(), e.length());
                inv
            });
            let prod = w.compose(e, &w.inverse(e));
            assert_eq!(&prod, w.identity());
        }
    }

    #[test]
    fn braid_and_involution_relations() {
        for spec in ["A3", "B3", "C3", "G2", "F4", "D4"] {
            let w = group(spec);
            let n = w.rank();
            for i in 0..n {
                let s = w.simple_reflection(i);
                assert_eq!(&w.compose(s, s), w.identity());
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let c = w.diagram().cartan_entry(i, j) * w.diagram().cartan_entry(j, i);
                    let m = [2, 3, 4, 6][c as usize];
                    let st = w.compose(s, w.simple_reflection(j));
                    let mut power = w.identity().clone();
                    for k in 1..=m {
                        power = w.compose(&power, &st);
                        assert_eq!(&power == w.identity(), k == m, "{spec} ({i},{j})");
                    }
                }
            }
        }
    }

    #[test]
    fn min_coset_examples() {
        let a2 = group("A2");
        let reps = a2.min_coset_reps(&set(&[2])).unwrap();
        assert_eq!(lengths(&reps), vec![0, 1, 2]);
        let all = a2.min_coset_reps(&set(&[1, 2])).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0], a2.identity());
        assert_eq!(a2.min_coset_reps(&VertexSet::new()).unwrap().len(), 6);
    }

    /// Oracle for double cosets: closure of `{w}` under left multiplication
    /// by `s_j (j ∈ J)` and right multiplication by `s_k (k ∈ K)`.
    fn explicit_double_cosets(w: &WeylGroup, left: &VertexSet, right: &VertexSet) -> Vec<BTreeSet<usize>> {
        let j = w.indices(left).unwrap();
        let k = w.indices(right).unwrap();
        let mut assigned = vec![false; w.order()];
        let mut out = Vec::new();
        for start in 0..w.order() {
            if assigned[start] {
                continue;
            }
            let mut coset = BTreeSet::from([start]);
            let mut stack = vec![start];
            assigned[start] = true;
            while let Some(x) = stack.pop() {
                let e = &w.elements()[x];
                let mut next = Vec::new();
                for &i in &j {
                    next.push(w.compose(w.simple_reflection(i), e));
                }
                for &i in &k {
                    next.push(w.compose(e, w.simple_reflection(i)));
                }
                for y in next {
                    let pos = w.position(&y).unwrap();
                    if !assigned[pos] {
                        assigned[pos] = true;
                        coset.insert(pos);
                        stack.push(pos);
                    }
                }
            }
            out.push(coset);
        }
        out
    }

    #[test]
    fn double_coset_examples() {
        let a1 = group("A1");
        let reps = a1.min_double_coset_reps(&VertexSet::new(), &VertexSet::new()).unwrap();
        assert_eq!(reps.iter().map(|(w, _)| w.length()).collect::<Vec<_>>(), vec![0, 1]);

        let a2 = group("A2");
        let reps = a2.min_double_coset_reps(&set(&[2]), &set(&[2])).unwrap();
        assert_eq!(reps.iter().map(|(w, s)| (w.length(), *s)).collect::<Vec<_>>(), vec![(0, 2), (1, 4)]);

        let b2 = group("B2");
        let reps = b2.min_double_coset_reps(&set(&[2]), &set(&[2])).unwrap();
        assert_eq!(reps.iter().map(|(w, s)| (w.length(), *s)).collect::<Vec<_>>(), vec![(0, 2), (1, 4), (3, 2)]);
    }

    #[test]
    fn double_cosets_match_explicit_partition() {
        for spec in ["A3", "B3", "G2", "C3", "F4"] {
            let w = group(spec);
            let verts: Vec<u32> = w.diagram().labels().to_vec();
            let n = verts.len();
            for jm in 0u32..1 << n {
                for km in [0u32, (1 << n) - 1, jm, jm ^ ((1 << n) - 1)] {
                    let left: VertexSet = (0..n).filter(|i| jm >> i & 1 == 1).map(|i| verts[i]).collect();
                    let right: VertexSet = (0..n).filter(|i| km >> i & 1 == 1).map(|i| verts[i]).collect();
                    let reps = w.min_double_coset_reps(&left, &right).unwrap();
                    let cosets = explicit_double_cosets(&w, &left, &right);
                    assert_eq!(reps.len(), cosets.len(), "{spec} {left:?} {right:?}");
                    let total: u128 = reps.iter().map(|(_, s)| s).sum();
                    assert_eq!(total, w.order() as u128);
                    for (rep, size) in &reps {
                        let pos = w.position(rep).unwrap();
                        let coset = cosets.iter().find(|c| c.contains(&pos)).unwrap();
                        assert_eq!(coset.len() as u128, *size);
                        let min_len = coset.iter().map(|&x| w.elements()[x].length()).min().unwrap();
                        assert_eq!(rep.length(), min_len);
                    }
                }
            }
        }
    }

    #[test]
    fn poincare_examples() {
        let g2 = group("G2");
        assert_eq!(g2.poincare(&set(&[1])).unwrap(), LaurentPoly::geometric(6));
        assert_eq!(g2.poincare(&set(&[1])).unwrap().to_text(), "1 + t + t^2 + t^3 + t^4 + t^5");
        let a2 = group("A2");
        let borel = a2.poincare(&set(&[1, 2])).unwrap();
        assert_eq!(borel, &LaurentPoly::geometric(2) * &LaurentPoly::geometric(3));
        assert_eq!(borel.to_text(), "1 + 2t + 2t^2 + t^3");
        assert_eq!(a2.poincare(&VertexSet::new()).unwrap(), LaurentPoly::one());
    }

    /// Fundamental degrees, used as the closed-form oracle.
    fn degrees(spec: &str) -> Vec<u32> {
        match spec {
            "A1" => vec![2],
            "A2" => vec![2, 3],
            "A3" => vec![2, 3, 4],
            "A4" => vec![2, 3, 4, 5],
            "B2" => vec![2, 4],
            "B3" | "C3" => vec![2, 4, 6],
            "D4" => vec![2, 4, 4, 6],
            "G2" => vec![2, 6],
            "F4" => vec![2, 6, 8, 12],
            _ => unreachable!(),
        }
    }

    #[test]
    fn borel_poincare_is_degree_product() {
        for spec in ["A1", "A2", "A3", "A4", "B2", "B3", "C3", "D4", "G2", "F4"] {
            let w = group(spec);
            let closed = degrees(spec).into_iter().map(LaurentPoly::geometric).fold(LaurentPoly::one(), |a, b| &a * &b);
            assert_eq!(w.poincare(&w.diagram().vertex_set()).unwrap(), closed, "{spec}");
        }
    }

    #[test]
    fn closed_form_degrees_match_enumeration() {
        for spec in ["A1", "A2", "A3", "A4", "B2", "B3", "C3", "D4", "G2", "F4"] {
            assert_eq!(component_degrees(spec), degrees(spec), "{spec}");
        }
        for spec in ["A3", "B3", "G2", "D4", "A2;A1", "D5", "E6"] {
            let w = group(spec);
            for theta in w.diagram().vertex_set().iter().map(|&l| set(&[l])).chain([w.diagram().vertex_set(), set(&[])]) {
                assert_eq!(poincare_closed(w.diagram(), &theta).unwrap(), w.poincare(&theta).unwrap(), "{spec} {theta:?}");
            }
        }
        let e8 = DynkinDiagram::parse("E8").unwrap();
        let full = poincare_closed(&e8, &e8.vertex_set()).unwrap();
        assert_eq!(full.coeff_sum() as u128, e8.weyl_order());
        assert_eq!(full.max_exp(), Some(120));
    }

    fn component_degrees(spec: &str) -> Vec<u32> {
        let d = DynkinDiagram::parse(spec).unwrap();
        let c = &d.components()[0];
        c.cartan_type.degrees(c.rank())
    }

    #[test]
    fn parabolic_factorization_and_palindromes() {
        for spec in ["A3", "B3", "G2", "D4", "A2;A1"] {
            let w = group(spec);
            let verts: Vec<u32> = w.diagram().labels().to_vec();
            let full = w.poincare(&w.diagram().vertex_set()).unwrap();
            for mask in 0u32..1 << verts.len() {
                let levi: VertexSet = (0..verts.len()).filter(|i| mask >> i & 1 == 1).map(|i| verts[i]).collect();
                let theta: VertexSet = w.diagram().vertex_set().difference(&levi).copied().collect();
                let quotient = w.poincare(&theta).unwrap();
                assert!(quotient.is_palindromic());
                assert_eq!(quotient.coeff_sum() as u128 * w.parabolic_order(&levi).unwrap(), w.order() as u128);
                let sub = WeylGroup::of_diagram(&w.diagram().subdiagram(&levi).unwrap()).unwrap();
                let levi_poly = sub.poincare(&levi).unwrap();
                assert_eq!(&quotient * &levi_poly, full, "{spec} {levi:?}");
                let reps = w.min_coset_reps(&levi).unwrap();
                let dim = w.positive_count() - sub.positive_count();
                assert_eq!(quotient.max_exp(), Some(dim as i32));
                assert_eq!(reps.len() as u64, quotient.coeff_sum());
            }
        }
    }

    #[test]
    fn automorphism_conjugation_preserves_length() {
        let w = group("A3");
        let sigma = vec![2, 1, 0];
        for e in w.elements() {
            let c = w.conjugate_by_automorphism(&sigma, e);
            assert_eq!(c.length(), e.length());
            assert!(w.position(&c).is_some());
            assert_eq!(&w.conjugate_by_automorphism(&sigma, &c), e);
        }
    }
}
