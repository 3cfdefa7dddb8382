//! Laurent polynomials with nonnegative integer coefficients.
//!
//! A [`LaurentPoly`] is a finitely supported map from integer twists to
//! positive multiplicities. It is the value type of Poincaré polynomials and of
//! Tate traces: the pure Tate motive `Λ{i_1} + … + Λ{i_r}` is stored as
//! `t^{i_1} + … + t^{i_r}`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt;
use core::ops::{Add, AddAssign, Mul};

/// Finitely supported map `twist -> multiplicity`, zero entries never stored.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i32, u64>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 1)
    }

    /// `coeff * t^exp`.
    pub fn monomial(exp: i32, coeff: u64) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, coeff);
        p
    }

    /// `1 + t + ... + t^{n-1}`.
    pub fn geometric(n: u32) -> Self {
        (0..n as i32).map(|e| (e, 1)).collect()
    }

    pub fn add_term(&mut self, exp: i32, coeff: u64) {
        if coeff == 0 {
            return;
        }
        *self.coeffs.entry(exp).or_insert(0) += coeff;
    }

    pub fn coeff(&self, exp: i32) -> u64 {
        self.coeffs.get(&exp).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Sum of coefficients, i.e. the rank of the pure Tate motive.
    pub fn coeff_sum(&self) -> u64 {
        self.coeffs.values().sum()
    }

    /// Smallest exponent with nonzero coefficient (the hook).
    pub fn min_exp(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    /// Iterates `(exponent, coefficient)` in increasing exponent order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i32, u64)> + '_ {
        self.coeffs.iter().map(|(&e, &c)| (e, c))
    }

    /// Multiplication by `t^k`.
    pub fn shift(&self, k: i32) -> Self {
        self.terms().map(|(e, c)| (e + k, c)).collect()
    }

    pub fn scale(&self, factor: u64) -> Self {
        self.terms().map(|(e, c)| (e, c * factor)).collect()
    }

    /// Coefficient-wise `self <= other`: `self` is a sub-multiset of Tate
    /// summands of `other`.
    pub fn is_contained_in(&self, other: &Self) -> bool {
        self.terms().all(|(e, c)| c <= other.coeff(e))
    }

    /// `coeff(e) == coeff(max + min - e)` for every `e`.
    pub fn is_palindromic(&self) -> bool {
        match (self.min_exp(), self.max_exp()) {
            (Some(lo), Some(hi)) => self.terms().all(|(e, c)| self.coeff(lo + hi - e) == c),
            _ => true,
        }
    }

    /// Signed difference `self - other`.
    pub fn difference(&self, other: &Self) -> PolyDifference {
        let mut coeffs: BTreeMap<i32, i64> = BTreeMap::new();
        for (e, c) in self.terms() {
            *coeffs.entry(e).or_insert(0) += c as i64;
        }
        for (e, c) in other.terms() {
            *coeffs.entry(e).or_insert(0) -= c as i64;
        }
        coeffs.retain(|_, c| *c != 0);
        PolyDifference { coeffs }
    }

    /// Largest `q` with `q * divisor == self`, when it exists.
    ///
    /// Exact division of polynomials with nonnegative coefficients; returns
    /// `None` if `divisor` is zero or does not divide `self`.
    pub fn checked_div(&self, divisor: &Self) -> Option<Self> {
        let lead_exp = divisor.min_exp()?;
        let lead = divisor.coeff(lead_exp);
        let mut rem: BTreeMap<i32, i64> = self.terms().map(|(e, c)| (e, c as i64)).collect();
        let mut quot = Self::zero();
        while let Some((&e, &c)) = rem.iter().next() {
            if c % lead as i64 != 0 || c < 0 {
                return None;
            }
            let q = c / lead as i64;
            let qe = e - lead_exp;
            quot.add_term(qe, q as u64);
            for (de, dc) in divisor.terms() {
                let slot = rem.entry(qe + de).or_insert(0);
                *slot -= q * dc as i64;
                if *slot == 0 {
                    rem.remove(&(qe + de));
                }
            }
            if let Some((_, &c)) = rem.iter().next() {
                if c < 0 {
                    return None;
                }
            }
        }
        Some(quot)
    }

    /// Plain-text rendering, e.g. `1 + 2t + t^3` or `t^-1 + 1`.
    pub fn to_text(&self) -> String {
        alloc::format!("{}", self)
    }
}

impl FromIterator<(i32, u64)> for LaurentPoly {
    fn from_iter<I: IntoIterator<Item = (i32, u64)>>(iter: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in iter {
            p.add_term(e, c);
        }
        p
    }
}

impl AddAssign<&LaurentPoly> for LaurentPoly {
    fn add_assign(&mut self, rhs: &LaurentPoly) {
        for (e, c) in rhs.terms() {
            self.add_term(e, c);
        }
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(mut self, rhs: LaurentPoly) -> LaurentPoly {
        self += &rhs;
        self
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in rhs.terms() {
                out.add_term(a + b, ca * cb);
            }
        }
        out
    }
}

impl Mul for LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: LaurentPoly) -> LaurentPoly {
        &self * &rhs
    }
}

impl core::iter::Sum for LaurentPoly {
    fn sum<I: Iterator<Item = LaurentPoly>>(iter: I) -> Self {
        let mut out = LaurentPoly::zero();
        for p in iter {
            out += &p;
        }
        out
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, exp: i32, coeff: i64) -> fmt::Result {
    let magnitude = coeff.unsigned_abs();
    match exp {
        0 => write!(f, "{}", magnitude),
        _ => {
            if magnitude != 1 {
                write!(f, "{}", magnitude)?;
            }
            if exp == 1 {
                write!(f, "t")
            } else {
                write!(f, "t^{}", exp)
            }
        }
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write_monomial(f, e, c as i64)?;
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({})", self)
    }
}

/// Signed difference of two [`LaurentPoly`] values; used as a residual.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct PolyDifference {
    coeffs: BTreeMap<i32, i64>,
}

impl PolyDifference {
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, i64)> + '_ {
        self.coeffs.iter().map(|(&e, &c)| (e, c))
    }
}

impl fmt::Display for PolyDifference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms().enumerate() {
            match (i, c < 0) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            write_monomial(f, e, c)?;
        }
        Ok(())
    }
}

impl fmt::Debug for PolyDifference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyDifference({})", self)
    }
}
