//! Decomposition of isotropic projective homogeneous varieties into shifted
//! pieces attached to the Levi subgroup.
//!
//! For a variety `X_Θ` with a rational point and Levi subset `J = Δ ∖ Θ`, the
//! pieces are indexed by minimal double-coset representatives
//! `δ ∈ W_J \ W / W_J`. The piece of `δ` sits at shift `l(δ)` and is the
//! variety of the Levi of type `J ∖ (J ∩ δ(J))`. Representatives related by
//! the `*`-action (acting on `W` through diagram automorphisms) are merged
//! into one row with a multiplicity.
//!
//! The piece-type formula is checked against the Poincaré polynomial of
//! `X_Θ` by [`cgm_poincare_identity`].

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::diagram::{CartanType, DiagramError, DynkinDiagram, StarAction, VertexSet};
use crate::laurent::{LaurentPoly, PolyDifference};
use crate::qform::RostPiece;
use crate::weyl::{WeylError, WeylGroup};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CgmError {
    #[error("parabolic type {0} is not *-invariant")]
    NotInvariant(String),
    #[error("CGM requires a rational point: {0} is not distinguished")]
    NotDistinguished(String),
    #[error("distinguished set {0} is not a union of *-orbits")]
    BadTitsIndex(String),
    #[error("Witt index {i0} out of range for half-dimension {m}")]
    WittIndexRange { m: u32, i0: u32 },
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// A semisimple group up to what the decomposition needs: diagram,
/// `*`-action and the distinguished vertices of its Tits index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupDatum {
    star: StarAction,
    distinguished: VertexSet,
}

impl GroupDatum {
    pub fn new(star: StarAction, distinguished: VertexSet) -> Result<Self, CgmError> {
        if !star.is_invariant(&distinguished)? {
            return Err(CgmError::BadTitsIndex(fmt_set(&distinguished)));
        }
        Ok(Self { star, distinguished })
    }

    /// The split group: trivial action, everything distinguished.
    pub fn split(diagram: DynkinDiagram) -> Self {
        let distinguished = diagram.vertex_set();
        Self { star: StarAction::trivial(diagram), distinguished }
    }

    /// Quasi-split group with the given action.
    pub fn quasi_split(star: StarAction) -> Self {
        let distinguished = star.diagram().vertex_set();
        Self { star, distinguished }
    }

    pub fn diagram(&self) -> &DynkinDiagram {
        self.star.diagram()
    }

    pub fn star(&self) -> &StarAction {
        &self.star
    }

    pub fn distinguished(&self) -> &VertexSet {
        &self.distinguished
    }

    /// Distinguished orbits.
    pub fn distinguished_orbits(&self) -> Vec<VertexSet> {
        self.star.all_orbits().into_iter().filter(|o| o.is_subset(&self.distinguished)).collect()
    }

    pub fn is_quasi_split(&self) -> bool {
        self.distinguished == self.diagram().vertex_set()
    }

    pub fn is_anisotropic(&self) -> bool {
        self.distinguished.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CgmPiece {
    /// The Levi subgroup's datum (diagram on `J`, restricted `*`-action).
    pub levi: StarAction,
    /// Parabolic type of the piece inside the Levi diagram.
    pub piece_type: VertexSet,
    pub shift: u32,
    /// Size of the `*`-orbit of representatives merged into this row.
    pub multiplicity: u32,
}

impl CgmPiece {
    pub fn levi_diagram(&self) -> &DynkinDiagram {
        self.levi.diagram()
    }

    pub fn is_point(&self) -> bool {
        self.piece_type.is_empty()
    }

    /// Poincaré polynomial of the piece over a separable closure.
    pub fn poincare(&self) -> Result<LaurentPoly, CgmError> {
        Ok(WeylGroup::of_diagram(self.levi.diagram())?.poincare(&self.piece_type)?)
    }
}

/// Decomposes `X_Θ` for a group in which `Θ` is distinguished.
pub fn cgm_decompose(group: &GroupDatum, theta: &VertexSet) -> Result<Vec<CgmPiece>, CgmError> {
    check_invariant(group, theta)?;
    if !theta.is_subset(&group.distinguished) {
        return Err(CgmError::NotDistinguished(fmt_set(theta)));
    }
    decompose(group.star(), theta)
}

fn check_invariant(group: &GroupDatum, theta: &VertexSet) -> Result<(), CgmError> {
    if !group.star.is_invariant(theta)? {
        return Err(CgmError::NotInvariant(fmt_set(theta)));
    }
    Ok(())
}

fn decompose(star: &StarAction, theta: &VertexSet) -> Result<Vec<CgmPiece>, CgmError> {
    let diagram = star.diagram();
    let levi_set: VertexSet = diagram.vertex_set().difference(theta).copied().collect();
    let w = WeylGroup::of_diagram(diagram)?;
    let levi = star.restrict(&levi_set)?;
    let reps = w.min_double_coset_reps(&levi_set, &levi_set)?;
    let automorphisms: Vec<Vec<usize>> = star.elements();

    let mut done = BTreeSet::new();
    let mut pieces = Vec::new();
    for (delta, _) in &reps {
        let pos = w.position(delta).expect("representative is a group element");
        if done.contains(&pos) {
            continue;
        }
        let mut orbit = BTreeSet::new();
        for sigma in &automorphisms {
            let c = w.conjugate_by_automorphism(sigma, delta);
            orbit.insert(w.position(&c).expect("conjugate is a group element"));
        }
        done.extend(orbit.iter().copied());
        let fixed = w.simple_images(delta, &levi_set, &levi_set)?;
        let piece_type: VertexSet = levi_set.difference(&fixed).copied().collect();
        pieces.push(CgmPiece {
            levi: levi.clone(),
            piece_type,
            shift: delta.length(),
            multiplicity: orbit.len() as u32,
        });
    }
    Ok(pieces)
}

/// Outcome of comparing the decomposition against `P(X_Θ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub holds: bool,
    pub lhs: LaurentPoly,
    pub rhs: LaurentPoly,
    /// `lhs − rhs`; zero exactly when the identity holds.
    pub residual: PolyDifference,
}

/// Checks `Σ mult · t^shift · P(piece) = P(X_Θ)`. The identity is
/// combinatorial, so it is evaluated without the rational-point hypothesis.
pub fn cgm_poincare_identity(group: &GroupDatum, theta: &VertexSet) -> Result<IdentityCheck, CgmError> {
    check_invariant(group, theta)?;
    let pieces = decompose(group.star(), theta)?;
    let mut lhs = LaurentPoly::zero();
    for p in &pieces {
        lhs += &p.poincare()?.shift(p.shift as i32).scale(p.multiplicity as u64);
    }
    let rhs = WeylGroup::of_diagram(group.diagram())?.poincare(theta)?;
    let residual = lhs.difference(&rhs);
    Ok(IdentityCheck { holds: residual.is_zero(), lhs, rhs, residual })
}

/// The split quadric of a `2m`-dimensional form as `(diagram, Θ)`.
fn split_quadric(m: u32) -> (DynkinDiagram, VertexSet) {
    match m {
        2 => (DynkinDiagram::parse("A1;A1").expect("valid"), [1, 2].into()),
        3 => (DynkinDiagram::parse("A3").expect("valid"), [2].into()),
        _ => (DynkinDiagram::build(&[(CartanType::D, m as usize)]).expect("valid"), [1].into()),
    }
}

/// Shape of the motive of a `2m`-dimensional form with Witt index `i₀`,
/// obtained by repeatedly decomposing split quadrics: an isotropic quadric
/// peels off a point at the bottom and at the top, leaving the quadric of the
/// form with one hyperbolic plane removed, shifted by the middle piece's
/// shift.
pub fn rost_from_cgm(m: u32, i0: u32) -> Result<Vec<RostPiece>, CgmError> {
    if m == 0 || i0 > m {
        return Err(CgmError::WittIndexRange { m, i0 });
    }
    let mut out = Vec::new();
    peel(m, i0, 0, &mut out)?;
    out.sort_by_key(|p| p.sort_key());
    Ok(out)
}

fn peel(m: u32, i0: u32, offset: i32, out: &mut Vec<RostPiece>) -> Result<(), CgmError> {
    if i0 == 0 {
        out.push(RostPiece::AnisotropicQuadric { twist: offset, form_dim: 2 * m });
        return Ok(());
    }
    if m == 1 {
        // Two rational points.
        out.extend([RostPiece::Tate(offset), RostPiece::Tate(offset)]);
        return Ok(());
    }
    let (diagram, theta) = split_quadric(m);
    let mut pieces = decompose(&StarAction::trivial(diagram), &theta)?;
    pieces.sort_by_key(|p| p.shift);
    let top = pieces.pop().expect("nonempty decomposition");
    let bottom = pieces.remove(0);
    debug_assert!(bottom.shift == 0 && bottom.is_point() && top.is_point());
    out.push(RostPiece::Tate(offset));
    out.push(RostPiece::Tate(offset + top.shift as i32));
    // What remains is the quadric of the next smaller split form, shifted.
    let inner = pieces.iter().map(|p| p.shift).min().expect("middle pieces");
    peel(m - 1, i0 - 1, offset + inner as i32, out)
}

pub(crate) fn fmt_set(s: &VertexSet) -> String {
    use core::fmt::Write;
    let mut out = String::from("{");
    for (k, v) in s.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v}");
    }
    out.push('}');
    out
}
