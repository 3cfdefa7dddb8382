//! Diagonal quadratic forms over the rationals, their Witt indexes, and the
//! Tate traces of the associated quadrics.
//!
//! Witt indexes are computed exactly. Over a number field `K` the index of
//! `q` is the minimum of its local indexes (Hasse–Minkowski plus Witt
//! cancellation), and local indexes follow from dimension, discriminant and
//! Hasse invariant. `K` is either `Q` or a multiquadratic field
//! `Q(√d₁, …, √d_k)`; both go through [`witt_index_over`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::laurent::LaurentPoly;
use crate::motive::{AtomCatalog, ExtensionLattice, FormalMotive, MotiveError, NodeId};

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QformError {
    #[error("quadratic form needs at least one coefficient")]
    Empty,
    #[error("zero coefficient at position {0}")]
    ZeroCoefficient(usize),
    #[error("cannot parse form literal {0:?}")]
    Parse(String),
    #[error("dimension {0} is not even")]
    OddDimension(u32),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("Witt index {index} out of range for dimension {dim}")]
    IndexRange { dim: u32, index: u32 },
    #[error("node {0:?}: node semantics not computable")]
    NotComputable(String),
    #[error("node {node:?}: Witt index {value} exceeds the bound {bound}")]
    TableBound { node: String, value: u32, bound: u32 },
    #[error("Witt index drops from {lower} at {from:?} to {upper} at {to:?}")]
    NotMonotone { from: String, to: String, lower: u32, upper: u32 },
    #[error("table has {got} entries, lattice has {expected} nodes")]
    TableSize { expected: usize, got: usize },
    #[error("node {node:?}: field does not contain the field of {below:?}")]
    RecipeNotComposable { node: String, below: String },
    #[error("Witt tables are over different lattices")]
    LatticeMismatch,
    #[error(transparent)]
    Motive(#[from] MotiveError),
}

/// `⟨a₁, …, a_n⟩` with nonzero rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadraticForm {
    coeffs: Vec<Rational>,
}

impl QuadraticForm {
    pub fn new(coeffs: Vec<Rational>) -> Result<Self, QformError> {
        if coeffs.is_empty() {
            return Err(QformError::Empty);
        }
        if let Some(i) = coeffs.iter().position(Zero::is_zero) {
            return Err(QformError::ZeroCoefficient(i));
        }
        Ok(Self { coeffs })
    }

    pub fn from_integers(coeffs: &[i64]) -> Result<Self, QformError> {
        Self::new(coeffs.iter().map(|&c| Rational::from_integer(c)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn dim(&self) -> u32 {
        self.coeffs.len() as u32
    }

    /// Orthogonal sum.
    pub fn orthogonal_sum(&self, other: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.extend_from_slice(&other.coeffs);
        Self { coeffs }
    }

    /// `q ⊥ ⟨1, −1⟩`.
    pub fn add_hyperbolic_plane(&self) -> Self {
        self.orthogonal_sum(&Self::from_integers(&[1, -1]).expect("valid"))
    }

    /// Squarefree integer representatives of the coefficient square classes.
    pub fn square_classes(&self) -> Vec<i64> {
        self.coeffs.iter().map(|&c| square_class(c)).collect()
    }

    /// Signed discriminant `∏ aᵢ` as a squarefree integer.
    pub fn discriminant(&self) -> i64 {
        self.square_classes().into_iter().fold(1, sf_mul)
    }

    /// Hasse invariant `∏_{i<j} (aᵢ, aⱼ)_p`; `p = 0` is the real place.
    pub fn hasse_invariant(&self, p: u64) -> i8 {
        hasse(&self.square_classes(), p)
    }

    /// `(positive, negative)` counts.
    pub fn signature(&self) -> (u32, u32) {
        let pos = self.coeffs.iter().filter(|c| c.is_positive()).count() as u32;
        (pos, self.dim() - pos)
    }

    /// Integer coefficients of a positive rational multiple of the form.
    fn integral_coeffs(&self) -> Vec<i128> {
        let l = self.coeffs.iter().fold(1i128, |acc, c| acc.lcm(&(*c.denom() as i128)));
        self.coeffs.iter().map(|c| *c.numer() as i128 * (l / *c.denom() as i128)).collect()
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(">")
    }
}

impl FromStr for QuadraticForm {
    type Err = QformError;

    /// Parses `<1,1,-1,-7>`; entries may be `p/q`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || QformError::Parse(s.to_string());
        let inner = s.trim().strip_prefix('<').and_then(|r| r.strip_suffix('>')).ok_or_else(bad)?;
        let coeffs = inner
            .split(',')
            .map(|t| parse_rational(t.trim()).ok_or_else(bad))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(coeffs)
    }
}

/// Parses an integer or `p/q`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    match s.split_once('/') {
        Some((p, q)) => {
            let q: i64 = q.trim().parse().ok()?;
            let p: i64 = p.trim().parse().ok()?;
            (q != 0).then(|| Rational::new(p, q))
        }
        None => Some(Rational::from_integer(s.parse().ok()?)),
    }
}

/// Squarefree part of a nonzero integer, sign kept.
pub fn squarefree(n: i128) -> i64 {
    assert!(n != 0, "squarefree part of zero");
    let sign = n.signum();
    let mut m = n.unsigned_abs();
    let mut out: u128 = 1;
    let mut p: u128 = 2;
    while p * p <= m {
        let mut e = 0;
        while m.is_multiple_of(p) {
            m /= p;
            e += 1;
        }
        if e % 2 == 1 {
            out *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    out *= m;
    (sign * out as i128) as i64
}

/// Square class of a nonzero rational as a squarefree integer.
pub fn square_class(c: Rational) -> i64 {
    squarefree(*c.numer() as i128 * *c.denom() as i128)
}

/// Product of two squarefree integers, reduced to its squarefree part.
fn sf_mul(a: i64, b: i64) -> i64 {
    let g = a.gcd(&b);
    let (a, b) = (a as i128 / g as i128, b as i128 / g as i128);
    (a * b) as i64
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Local symbols at a place of `Q`. Arguments are squarefree integers; the
/// place `p = 0` is the real one.
pub mod local {
    fn mod_pow(b: u64, mut e: u64, m: u64) -> u64 {
        let m = m as u128;
        let mut r = 1u128;
        let mut b = b as u128 % m;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % m;
            }
            b = b * b % m;
            e >>= 1;
        }
        r as u64
    }

    /// Legendre symbol of a `p`-adic unit, `p` odd.
    pub fn legendre(a: i64, p: u64) -> i8 {
        let r = a.rem_euclid(p as i64) as u64;
        if mod_pow(r, (p - 1) / 2, p) == 1 {
            1
        } else {
            -1
        }
    }

    /// `(v, u)` with `x = p^v · u`.
    pub fn split_valuation(x: i64, p: u64) -> (u32, i64) {
        let mut v = 0;
        let mut u = x;
        while u % p as i64 == 0 {
            u /= p as i64;
            v += 1;
        }
        (v, u)
    }

    pub fn is_square(x: i64, p: u64) -> bool {
        if p == 0 {
            return x > 0;
        }
        let (v, u) = split_valuation(x, p);
        if v % 2 == 1 {
            return false;
        }
        if p == 2 {
            u.rem_euclid(8) == 1
        } else {
            legendre(u, p) == 1
        }
    }

    /// The Hilbert symbol `(a, b)_p`.
    pub fn hilbert(a: i64, b: i64, p: u64) -> i8 {
        if p == 0 {
            return if a < 0 && b < 0 { -1 } else { 1 };
        }
        let (alpha, u) = split_valuation(a, p);
        let (beta, v) = split_valuation(b, p);
        if p == 2 {
            let eps = |x: i64| ((x.rem_euclid(4) - 1) / 2) as u32 & 1;
            let omega = |x: i64| {
                let r = x.rem_euclid(8);
                u32::from(r == 3 || r == 5)
            };
            let e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u);
            return if e % 2 == 0 { 1 } else { -1 };
        }
        let mut s: i8 = if (alpha * beta) % 2 == 1 && p % 4 == 3 { -1 } else { 1 };
        if beta % 2 == 1 {
            s *= legendre(u, p);
        }
        if alpha % 2 == 1 {
            s *= legendre(v, p);
        }
        s
    }
}

fn hasse(classes: &[i64], p: u64) -> i8 {
    let mut e = 1;
    for i in 0..classes.len() {
        for j in i + 1..classes.len() {
            e *= local::hilbert(classes[i], classes[j], p);
        }
    }
    e
}

/// Whether `x` lies in the subgroup generated by `ext` modulo squares, tested
/// by `test` on each candidate product.
fn in_span(x: i64, ext: &[i64], test: impl Fn(i64) -> bool) -> bool {
    (0u32..1 << ext.len()).any(|mask| {
        let prod = ext.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).fold(x, |acc, (_, &d)| sf_mul(acc, d));
        test(prod)
    })
}

/// Isotropy over `Q_p` from rank, discriminant and Hasse invariant.
fn locally_isotropic(n: u32, d: i64, eps: i8, p: u64) -> bool {
    match n {
        0 | 1 => false,
        2 => local::is_square(-d, p),
        3 => local::hilbert(-1, -d, p) == eps,
        4 => !local::is_square(d, p) || eps == local::hilbert(-1, -1, p),
        _ => true,
    }
}

/// Witt index over the completion of `Q(√ext)` at a place above `p`.
fn local_index(classes: &[i64], p: u64, ext: &[i64]) -> u32 {
    let n = classes.len() as u32;
    if p == 0 {
        if ext.iter().any(|&d| d < 0) {
            return n / 2;
        }
        let pos = classes.iter().filter(|&&c| c > 0).count() as u32;
        return pos.min(n - pos);
    }
    let disc = classes.iter().copied().fold(1, sf_mul);
    if ext.iter().any(|&d| !local::is_square(d, p)) {
        // A proper extension of Q_p: Hilbert symbols of Q_p-elements become
        // trivial, so only the discriminant matters.
        if n % 2 == 1 {
            return n / 2;
        }
        let signed = if (n / 2) % 2 == 1 { -disc } else { disc };
        return if in_span(signed, ext, |x| local::is_square(x, p)) { n / 2 } else { n / 2 - 1 };
    }
    let (mut n, mut d, mut eps) = (n, disc, hasse(classes, p));
    let mut index = 0;
    while locally_isotropic(n, d, eps, p) {
        // q = H ⊥ q′: d(q′) = −d(q), ε(q′) = ε(q)·(−1, −d(q)).
        eps *= local::hilbert(-1, -d, p);
        d = -d;
        n -= 2;
        index += 1;
    }
    index
}

/// Witt index of `q` over `Q(√d₁, …, √d_k)`; `ext = []` is `Q`.
pub fn witt_index_over(q: &QuadraticForm, ext: &[Rational]) -> u32 {
    let classes = q.square_classes();
    let ext: Vec<i64> = ext.iter().map(|&d| square_class(d)).filter(|&d| d != 1).collect();
    let n = q.dim();
    let mut places = BTreeSet::from([0u64, 2]);
    for &c in classes.iter().chain(&ext) {
        places.extend(prime_factors(c.unsigned_abs()));
    }
    // At all remaining places the form is unimodular and the index is
    // maximal unless the discriminant's class obstructs the last plane,
    // which then happens at infinitely many places.
    let good = if n % 2 == 1 {
        n / 2
    } else {
        let disc = q.discriminant();
        let signed = if (n / 2) % 2 == 1 { -disc } else { disc };
        if in_span(signed, &ext, |x| x == 1) {
            n / 2
        } else {
            n / 2 - 1
        }
    };
    places.into_iter().map(|p| local_index(&classes, p, &ext)).fold(good, u32::min)
}

/// Witt index over the rationals.
#[allow(non_snake_case)]
pub fn witt_index_Q(q: &QuadraticForm) -> u32 {
    witt_index_over(q, &[])
}

/// Coordinates `0, 1, −1, 2, −2, …, B, −B`.
fn coordinate_sequence(bound: u32) -> Vec<i64> {
    let mut out = vec![0];
    for k in 1..=bound as i64 {
        out.extend([k, -k]);
    }
    out
}

/// Visits the vectors of `coords^n` in lexicographic order until `f` says
/// stop; returns the stopping vector.
fn search(n: usize, coords: &[i64], mut f: impl FnMut(&[i64]) -> bool) -> Option<Vec<i64>> {
    let mut idx = vec![0usize; n];
    loop {
        let v: Vec<i64> = idx.iter().map(|&i| coords[i]).collect();
        if f(&v) {
            return Some(v);
        }
        let mut k = n;
        loop {
            if k == 0 {
                return None;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < coords.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Brute-force search for a nonzero integer vector `v` with `q(v) = 0` and
/// `|vᵢ| ≤ bound`, first nonzero entry positive. Failure proves nothing.
pub fn isotropy_oracle(q: &QuadraticForm, bound: u32) -> Option<Vec<i64>> {
    let a = q.integral_coeffs();
    let coords = coordinate_sequence(bound);
    search(a.len(), &coords, |v| {
        match v.iter().find(|&&x| x != 0) {
            Some(&x) if x > 0 => {}
            _ => return false,
        }
        v.iter().zip(&a).map(|(&x, &c)| c * (x as i128) * (x as i128)).sum::<i128>() == 0
    })
}

/// Value `Σ aᵢ xᵢ yᵢ` of the polar form over `Q(√d)`, for vectors with entries
/// `x + y√d` given as integer pairs; returned as `(rational part, √d part)`
/// of a positive multiple.
pub fn polar_over_quadratic(
    q: &QuadraticForm,
    d: i64,
    u: &[(i64, i64)],
    v: &[(i64, i64)],
) -> (i128, i128) {
    let a = q.integral_coeffs();
    let mut re = 0i128;
    let mut im = 0i128;
    for ((&c, &(x1, y1)), &(x2, y2)) in a.iter().zip(u).zip(v) {
        let (x1, y1, x2, y2) = (x1 as i128, y1 as i128, x2 as i128, y2 as i128);
        re += c * (x1 * x2 + d as i128 * y1 * y2);
        im += c * (x1 * y2 + x2 * y1);
    }
    (re, im)
}

/// Search as in [`isotropy_oracle`] over `Q(√d)`, entries `x + y√d` with
/// `|x|, |y| ≤ bound`.
pub fn isotropy_oracle_quadratic(q: &QuadraticForm, d: i64, bound: u32) -> Option<Vec<(i64, i64)>> {
    let coords = coordinate_sequence(bound);
    let n = q.coeffs.len();
    search(2 * n, &coords, |flat| {
        if flat.iter().all(|&x| x == 0) {
            return false;
        }
        let v: Vec<(i64, i64)> = flat.chunks(2).map(|c| (c[0], c[1])).collect();
        polar_over_quadratic(q, d, &v, &v) == (0, 0)
    })
    .map(|flat| flat.chunks(2).map(|c| (c[0], c[1])).collect())
}

/// A summand in the motive of a quadric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RostPiece {
    Tate(i32),
    /// The quadric of the anisotropic part (of form dimension `form_dim`),
    /// twisted.
    AnisotropicQuadric { twist: i32, form_dim: u32 },
}

impl RostPiece {
    pub fn twist(&self) -> i32 {
        match *self {
            RostPiece::Tate(k) => k,
            RostPiece::AnisotropicQuadric { twist, .. } => twist,
        }
    }

    pub fn tate_twist(&self) -> Option<i32> {
        match *self {
            RostPiece::Tate(k) => Some(k),
            RostPiece::AnisotropicQuadric { .. } => None,
        }
    }

    /// Number of Tate summands over a splitting field.
    pub fn rank(&self) -> u32 {
        match *self {
            RostPiece::Tate(_) => 1,
            RostPiece::AnisotropicQuadric { form_dim, .. } => quadric_rank(form_dim),
        }
    }

    /// Canonical order: by twist, Tate classes first.
    pub fn sort_key(&self) -> (i32, u8) {
        (self.twist(), u8::from(self.tate_twist().is_none()))
    }
}

impl fmt::Display for RostPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RostPiece::Tate(k) => write!(f, "Λ{{{k}}}"),
            RostPiece::AnisotropicQuadric { twist, form_dim } => write!(f, "Q_an[{form_dim}]{{{twist}}}"),
        }
    }
}

/// Rank of the Chow group of the split quadric of a form of dimension `n`.
pub fn quadric_rank(n: u32) -> u32 {
    if n.is_multiple_of(2) {
        n
    } else {
        n - 1
    }
}

fn check_index(n: u32, i0: u32) -> Result<(), QformError> {
    if n == 0 {
        return Err(QformError::ZeroDimension);
    }
    if i0 > n / 2 {
        return Err(QformError::IndexRange { dim: n, index: i0 });
    }
    Ok(())
}

fn check_even(n: u32, i0: u32) -> Result<(), QformError> {
    if n % 2 == 1 {
        return Err(QformError::OddDimension(n));
    }
    check_index(n, i0)
}

/// Motive of the quadric of a `dim2m`-dimensional form of Witt index `i₀`:
/// `Λ{0..i₀−1}`, the anisotropic part at `i₀`, and `Λ{2m−1−i₀..2m−2}`.
pub fn rost_decomposition(dim2m: u32, i0: u32) -> Result<Vec<RostPiece>, QformError> {
    check_even(dim2m, i0)?;
    rost_decomposition_any(dim2m, i0)
}

/// As [`rost_decomposition`], for any dimension. For odd `n` the same shape
/// is used with the middle class belonging to the anisotropic part; this
/// goes beyond the even-dimensional formula.
pub fn rost_decomposition_any(n: u32, i0: u32) -> Result<Vec<RostPiece>, QformError> {
    check_index(n, i0)?;
    let n_i = n as i32;
    let mut out: Vec<RostPiece> = (0..i0 as i32).map(RostPiece::Tate).collect();
    let an = n - 2 * i0;
    // A form of dimension 1 defines the empty quadric.
    if an >= 2 {
        out.push(RostPiece::AnisotropicQuadric { twist: i0 as i32, form_dim: an });
    }
    out.extend((n_i - 1 - i0 as i32..=n_i - 2).map(RostPiece::Tate));
    out.sort_by_key(RostPiece::sort_key);
    Ok(out)
}

/// `Σ_{k<i₀} (t^k + t^{2m−2−k})`.
pub fn quadric_tate_trace(dim2m: u32, i0: u32) -> Result<LaurentPoly, QformError> {
    check_even(dim2m, i0)?;
    quadric_tate_trace_any(dim2m, i0)
}

/// The same sum for a form of any dimension `n`.
pub fn quadric_tate_trace_any(n: u32, i0: u32) -> Result<LaurentPoly, QformError> {
    check_index(n, i0)?;
    let mut p = LaurentPoly::zero();
    for k in 0..i0 as i32 {
        p.add_term(k, 1);
        p.add_term(n as i32 - 2 - k, 1);
    }
    Ok(p)
}

/// Tate trace of the involution variety of a degree-`2m` algebra with
/// orthogonal involution of Witt index `i_w`: zero unless the algebra is
/// split, in which case it is the quadric trace.
pub fn involution_trace(split: bool, i_w: u32, deg2m: u32) -> Result<LaurentPoly, QformError> {
    check_even(deg2m, i_w)?;
    if !split {
        return Ok(LaurentPoly::zero());
    }
    quadric_tate_trace(deg2m, i_w)
}

/// `{ quadric_tate_trace(2m, i) : i ∈ pattern }`.
pub fn motivic_splitting_pattern(dim2m: u32, pattern: &BTreeSet<u32>) -> Result<BTreeSet<LaurentPoly>, QformError> {
    pattern.iter().map(|&i| quadric_tate_trace(dim2m, i)).collect()
}

/// Splitting pattern of an anisotropic `n`-fold Pfister form: `{0, 2^{n−1}}`.
pub fn pfister_pattern(n: u32) -> BTreeSet<u32> {
    BTreeSet::from([0, 1 << (n - 1)])
}

/// Splitting pattern of a generic form of dimension `2m` or `2m+1`.
pub fn generic_pattern(m: u32) -> BTreeSet<u32> {
    (0..=m).collect()
}

/// How the field of a lattice node is known.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeRecipe {
    /// `Q(√d₁, …, √d_k)`; the empty list is `Q` itself.
    Adjoin(Vec<Rational>),
    /// Not computable here; the Witt index must be asserted.
    Asserted,
}

impl NodeRecipe {
    pub fn base() -> Self {
        NodeRecipe::Adjoin(Vec::new())
    }
}

/// Checks that the fields of computable nodes grow along the lattice order.
pub fn check_recipes(lattice: &ExtensionLattice, recipes: &BTreeMap<NodeId, NodeRecipe>) -> Result<(), QformError> {
    for a in lattice.node_ids() {
        for b in lattice.node_ids() {
            if a == b || !lattice.is_below(a, b) {
                continue;
            }
            let (Some(NodeRecipe::Adjoin(da)), Some(NodeRecipe::Adjoin(db))) = (recipes.get(&a), recipes.get(&b)) else {
                continue;
            };
            let gens: Vec<i64> = db.iter().map(|&d| square_class(d)).collect();
            if da.iter().any(|&d| !in_span(square_class(d), &gens, |x| x == 1)) {
                return Err(QformError::RecipeNotComposable {
                    node: lattice.name(b).to_string(),
                    below: lattice.name(a).to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Witt indexes of a form of dimension `dim` at every node of a lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WittIndexTable {
    lattice: ExtensionLattice,
    dim: u32,
    values: Vec<u32>,
}

impl WittIndexTable {
    /// Validates monotonicity along edges and the bound `⌊dim/2⌋`.
    pub fn new(lattice: &ExtensionLattice, dim: u32, values: Vec<u32>) -> Result<Self, QformError> {
        if dim == 0 {
            return Err(QformError::ZeroDimension);
        }
        if values.len() != lattice.len() {
            return Err(QformError::TableSize { expected: lattice.len(), got: values.len() });
        }
        for (e, &v) in values.iter().enumerate() {
            if v > dim / 2 {
                return Err(QformError::TableBound { node: lattice.name(e).to_string(), value: v, bound: dim / 2 });
            }
        }
        for &(a, b) in lattice.edges() {
            if values[b] < values[a] {
                return Err(QformError::NotMonotone {
                    from: lattice.name(a).to_string(),
                    to: lattice.name(b).to_string(),
                    lower: values[a],
                    upper: values[b],
                });
            }
        }
        Ok(Self { lattice: lattice.clone(), dim, values })
    }

    pub fn lattice(&self) -> &ExtensionLattice {
        &self.lattice
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn get(&self, node: NodeId) -> u32 {
        self.values[node]
    }

    /// The set of Witt indexes attained over the lattice.
    pub fn pattern(&self) -> BTreeSet<u32> {
        self.values.iter().copied().collect()
    }
}

/// Computes the Witt index of `q` at each node from its recipe; nodes
/// without a computable recipe take the value in `asserted`.
pub fn quadric_witt_table(
    q: &QuadraticForm,
    lattice: &ExtensionLattice,
    recipes: &BTreeMap<NodeId, NodeRecipe>,
    asserted: &BTreeMap<NodeId, u32>,
) -> Result<WittIndexTable, QformError> {
    check_recipes(lattice, recipes)?;
    let mut values = Vec::with_capacity(lattice.len());
    for e in lattice.node_ids() {
        let v = match (recipes.get(&e), asserted.get(&e)) {
            (Some(NodeRecipe::Adjoin(ds)), _) => witt_index_over(q, ds),
            (_, Some(&v)) => v,
            _ => return Err(QformError::NotComputable(lattice.name(e).to_string())),
        };
        values.push(v);
    }
    WittIndexTable::new(lattice, q.dim(), values)
}

/// Verdict of [`vishik_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VishikVerdict {
    pub isomorphic: bool,
    pub dims_differ: bool,
    pub first_difference: Option<NodeId>,
}

/// Quadrics of the two forms have isomorphic motives (mod 2) iff the forms
/// have the same dimension and the same Witt index over every node.
pub fn vishik_check(t: &WittIndexTable, t2: &WittIndexTable) -> Result<VishikVerdict, QformError> {
    if t.lattice != t2.lattice {
        return Err(QformError::LatticeMismatch);
    }
    let dims_differ = t.dim != t2.dim;
    let first_difference = t.lattice.node_ids().find(|&e| t.values[e] != t2.values[e]);
    Ok(VishikVerdict { isomorphic: !dims_differ && first_difference.is_none(), dims_differ, first_difference })
}

/// Adds the motive of the quadric with Witt table `table` to a catalog: the
/// Tate part over the base plus one atom `name` for the anisotropic part,
/// whose traces follow the table.
pub fn add_quadric_motive(catalog: &mut AtomCatalog, name: &str, table: &WittIndexTable) -> Result<FormalMotive, QformError> {
    if *table.lattice() != *catalog.lattice() {
        return Err(QformError::LatticeMismatch);
    }
    let base = catalog.lattice().base();
    let i0 = table.get(base);
    let pieces = rost_decomposition_any(table.dim(), i0)?;
    let mut terms = Vec::new();
    for piece in pieces {
        match piece {
            RostPiece::Tate(k) => terms.push((catalog.unit(), k)),
            RostPiece::AnisotropicQuadric { twist, form_dim } => {
                let traces = catalog
                    .lattice()
                    .node_ids()
                    .map(|e| Ok((e, quadric_tate_trace_any(form_dim, table.get(e) - i0)?)))
                    .collect::<Result<BTreeMap<_, _>, QformError>>()?;
                let atom = catalog.add_atom(name, quadric_rank(form_dim) as u64, traces)?;
                terms.push((atom, twist));
            }
        }
    }
    Ok(catalog.motive(terms)?)
}
