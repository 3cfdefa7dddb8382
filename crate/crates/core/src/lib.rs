//! Exact combinatorics behind motivic isomorphism criteria for projective
//! homogeneous varieties.
//!
//! The crate is `no_std` (it needs `alloc`). It provides:
//!
//! * [`laurent`]: Laurent polynomials with nonnegative integer coefficients,
//!   used both for Poincaré polynomials and for Tate traces.
//! * [`diagram`]: Dynkin diagrams in Bourbaki numbering, root systems,
//!   diagram automorphisms and the `*`-action.
//! * [`weyl`]: Weyl groups as permutations of roots, minimal coset and
//!   double-coset representatives, Poincaré polynomials of flag varieties.
//! * [`cgm`]: decompositions of isotropic homogeneous varieties into shifted
//!   Levi pieces, gated by the Poincaré identity.
//! * [`motive`]: formal motives over a finite lattice of field extensions,
//!   with Tate traces, domination and the isomorphism decision.
//! * [`qform`]: quadratic forms over the rationals and over multiquadratic
//!   extensions, Witt indexes and the quadric Tate traces.
//! * [`equiv`]: higher Tits-index tables, motivic equivalence of groups and
//!   motivic splitting patterns.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cgm;
pub mod diagram;
pub mod equiv;
pub mod laurent;
pub mod motive;
pub mod qform;
pub mod weyl;

pub use diagram::{CartanType, DynkinDiagram, StarAction};
pub use laurent::LaurentPoly;
pub use weyl::WeylGroup;
