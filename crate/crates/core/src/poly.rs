//! Dense univariate polynomials in `q` over an arbitrary coefficient ring.
//!
//! `QPoly<C>` is the exact symbolic ground layer: coefficients are stored by
//! degree, the highest stored coefficient is nonzero (the zero polynomial is
//! an empty list), and all arithmetic is exact. The two instantiations used
//! throughout are [`IntQPoly`] (arbitrary-precision integers) and
//! [`RatQPoly`] (arbitrary-precision rationals, stored reduced).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Exact polynomial in `q` with big-integer coefficients.
pub type IntQPoly = QPoly<BigInt>;
/// Exact polynomial in `q` with big-rational coefficients.
pub type RatQPoly = QPoly<BigRational>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QPoly<C> {
    /// Coefficients indexed by degree; invariant: last entry is nonzero.
    coeffs: Vec<C>,
}

impl<C> QPoly<C>
where
    C: Clone + Zero + One + Neg<Output = C> + Add<Output = C> + Sub<Output = C> + Mul<Output = C>,
{
    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        QPoly::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        let mut p = QPoly { coeffs: vec![c] };
        p.normalize();
        p
    }

    /// The monomial `c * q^k`.
    pub fn monomial(c: C, k: usize) -> Self {
        let mut coeffs = vec![C::zero(); k + 1];
        coeffs[k] = c;
        let mut p = QPoly { coeffs };
        p.normalize();
        p
    }

    /// The variable `q`.
    pub fn q() -> Self {
        QPoly::monomial(C::one(), 1)
    }

    pub fn from_coeffs(coeffs: Vec<C>) -> Self {
        let mut p = QPoly { coeffs };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while self.coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && {
            let d = self.coeffs[0].clone() - C::one();
            d.is_zero()
        }
    }

    /// Degree of the polynomial; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Coefficient of `q^k` (zero beyond the stored degree).
    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    pub fn leading(&self) -> Option<&C> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading()
            .map(|c| (c.clone() - C::one()).is_zero())
            .unwrap_or(false)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(self.coeff(k) + rhs.coeff(k));
        }
        QPoly::from_coeffs(coeffs)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(self.coeff(k) - rhs.coeff(k));
        }
        QPoly::from_coeffs(coeffs)
    }

    pub fn neg(&self) -> Self {
        QPoly::from_coeffs(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return QPoly::zero();
        }
        let mut coeffs = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                let t = std::mem::replace(&mut coeffs[i + j], C::zero());
                coeffs[i + j] = t + a.clone() * b.clone();
            }
        }
        QPoly::from_coeffs(coeffs)
    }

    pub fn scale(&self, c: &C) -> Self {
        QPoly::from_coeffs(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    /// Multiply by `q^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return QPoly::zero();
        }
        let mut coeffs = vec![C::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        QPoly { coeffs }
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = QPoly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Substitute `q -> q^r` (re-indexing; `r >= 1`).
    pub fn substitute_qpow(&self, r: usize) -> Self {
        assert!(r >= 1, "substitute_qpow needs r >= 1");
        if self.is_zero() {
            return QPoly::zero();
        }
        let mut coeffs = vec![C::zero(); (self.coeffs.len() - 1) * r + 1];
        for (k, a) in self.coeffs.iter().enumerate() {
            coeffs[k * r] = a.clone();
        }
        QPoly { coeffs }
    }

    /// Substitute another polynomial for `q` (Horner).
    pub fn compose(&self, inner: &Self) -> Self {
        let mut acc = QPoly::zero();
        for a in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&QPoly::constant(a.clone()));
        }
        acc
    }

    pub fn eval(&self, x: &C) -> C {
        let mut acc = C::zero();
        for a in self.coeffs.iter().rev() {
            acc = acc * x.clone() + a.clone();
        }
        acc
    }

    /// Euclidean division by a monic divisor, returning (quotient, remainder).
    pub fn div_rem_monic(&self, d: &Self) -> Result<(Self, Self)> {
        if !d.is_monic() {
            return Err(Error::NotMonic);
        }
        let dd = d.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((QPoly::zero(), self.clone()));
        }
        let qlen = rem.len() - dd;
        let mut quot = vec![C::zero(); qlen];
        for k in (0..qlen).rev() {
            let lead = rem[k + dd].clone();
            if lead.is_zero() {
                continue;
            }
            for (i, c) in d.coeffs.iter().enumerate().take(dd) {
                let t = std::mem::replace(&mut rem[k + i], C::zero());
                rem[k + i] = t - lead.clone() * c.clone();
            }
            rem[k + dd] = C::zero();
            quot[k] = lead;
        }
        Ok((QPoly::from_coeffs(quot), QPoly::from_coeffs(rem)))
    }

    /// Exact Euclidean division by a monic divisor. The remainder must be
    /// identically zero; a nonzero remainder signals genuine non-divisibility.
    pub fn euclid_div_exact(&self, d: &Self) -> Result<Self> {
        let (q, r) = self.div_rem_monic(d)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(Error::NonzeroRemainder)
        }
    }

    /// Remainder of Euclidean division by a monic divisor.
    pub fn rem_monic(&self, d: &Self) -> Result<Self> {
        Ok(self.div_rem_monic(d)?.1)
    }
}

impl IntQPoly {
    pub fn from_i64s(coeffs: &[i64]) -> Self {
        QPoly::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn to_rational(&self) -> RatQPoly {
        QPoly::from_coeffs(
            self.coeffs
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect(),
        )
    }

    /// Parse an integer combination of powers of `q`, e.g. `q^2 - 3q + 1`.
    pub fn parse(input: &str) -> Result<Self> {
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial literal".into()));
        }
        let bytes = s.as_bytes();
        let mut acc = IntQPoly::zero();
        let mut i = 0usize;
        while i < bytes.len() {
            let mut sign = BigInt::one();
            while i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                if bytes[i] == b'-' {
                    sign = -sign;
                }
                i += 1;
            }
            if i >= bytes.len() {
                return Err(Error::Parse(format!("dangling sign in `{input}`")));
            }
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let mut coeff = if start == i {
                BigInt::one()
            } else {
                s[start..i]
                    .parse::<BigInt>()
                    .map_err(|e| Error::Parse(e.to_string()))?
            };
            coeff *= sign;
            let mut exp = 0usize;
            if i < bytes.len() && (bytes[i] == b'q' || bytes[i] == b'Q') {
                i += 1;
                exp = 1;
                if i < bytes.len() && bytes[i] == b'^' {
                    i += 1;
                    let estart = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if estart == i {
                        return Err(Error::Parse(format!("missing exponent in `{input}`")));
                    }
                    exp = s[estart..i]
                        .parse::<usize>()
                        .map_err(|e| Error::Parse(e.to_string()))?;
                }
            } else if start == i {
                return Err(Error::Parse(format!(
                    "expected coefficient or q at byte {i} of `{input}`"
                )));
            }
            if i < bytes.len() && bytes[i] != b'+' && bytes[i] != b'-' {
                return Err(Error::Parse(format!(
                    "unexpected character `{}` in `{input}`",
                    &s[i..i + 1]
                )));
            }
            acc = acc.add(&IntQPoly::monomial(coeff, exp));
        }
        Ok(acc)
    }
}

impl RatQPoly {
    /// True iff every coefficient's denominator is coprime to `p`.
    pub fn is_p_integral(&self, p: u32) -> bool {
        let p = BigInt::from(p);
        self.coeffs.iter().all(|c| !(c.denom() % &p).is_zero())
    }

    /// Clear denominators; panics if a coefficient is not an integer.
    pub fn to_integer(&self) -> IntQPoly {
        QPoly::from_coeffs(
            self.coeffs
                .iter()
                .map(|c| {
                    assert!(c.is_integer(), "coefficient {c} is not an integer");
                    c.to_integer()
                })
                .collect(),
        )
    }
}

/// Display with ascending powers of q, e.g. `1 + q + 2q^2`.
impl<C> fmt::Display for QPoly<C>
where
    C: Clone + Zero + One + Neg<Output = C> + Add<Output = C> + Sub<Output = C> + Mul<Output = C>,
    C: fmt::Display + Signed,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (sign, mag) = if c.is_negative() {
                ("-", -c.clone())
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            let mag_is_one = (mag.clone() - C::one()).is_zero();
            match (k, mag_is_one) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "q")?,
                (1, false) => write!(f, "{mag}q")?,
                (_, true) => write!(f, "q^{k}")?,
                (_, false) => write!(f, "{mag}q^{k}")?,
            }
        }
        Ok(())
    }
}

impl<C> fmt::Debug for QPoly<C>
where
    C: Clone + Zero + One + Neg<Output = C> + Add<Output = C> + Sub<Output = C> + Mul<Output = C>,
    C: fmt::Display + Signed,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(cs: &[i64]) -> IntQPoly {
        IntQPoly::from_i64s(cs)
    }

    #[test]
    fn canonical_form_trims_zeros() {
        let p = poly(&[1, 2, 0, 0]);
        assert_eq!(p.degree(), Some(1));
        assert!(poly(&[0, 0]).is_zero());
    }

    #[test]
    fn euclid_exact_simple() {
        // (q^2 - 1) / (q - 1) = q + 1
        let n = poly(&[-1, 0, 1]);
        let d = poly(&[-1, 1]);
        assert_eq!(n.euclid_div_exact(&d).unwrap(), poly(&[1, 1]));
    }

    #[test]
    fn euclid_nonzero_remainder_is_error() {
        // (q - 1)^2 is not divisible by q + 1
        let n = poly(&[1, -2, 1]);
        let d = poly(&[1, 1]);
        assert_eq!(n.euclid_div_exact(&d), Err(Error::NonzeroRemainder));
    }

    #[test]
    fn euclid_requires_monic() {
        let n = poly(&[1, 1]);
        let d = poly(&[1, 2]);
        assert_eq!(n.euclid_div_exact(&d), Err(Error::NotMonic));
    }

    #[test]
    fn parse_literals() {
        assert_eq!(IntQPoly::parse("q^2").unwrap(), poly(&[0, 0, 1]));
        assert_eq!(IntQPoly::parse("1+2q-q^3").unwrap(), poly(&[1, 2, 0, -1]));
        assert_eq!(IntQPoly::parse("-q").unwrap(), poly(&[0, -1]));
        assert_eq!(IntQPoly::parse(" 7 ").unwrap(), poly(&[7]));
        assert!(IntQPoly::parse("q^").is_err());
        assert!(IntQPoly::parse("x").is_err());
    }

    #[test]
    fn p_integrality() {
        use num_bigint::BigInt;
        use num_rational::BigRational;
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        let a = RatQPoly::from_coeffs(vec![half, BigRational::from_integer(BigInt::from(1))]);
        assert!(a.is_p_integral(3));
        let b = RatQPoly::from_coeffs(vec![third, BigRational::from_integer(BigInt::from(1))]);
        assert!(!b.is_p_integral(3));
    }

    proptest! {
        #[test]
        fn divide_round_trips(b in proptest::collection::vec(-20i64..20, 0..10),
                              d in proptest::collection::vec(-20i64..20, 0..9)) {
            let b = poly(&b);
            // force d monic
            let mut d = poly(&d);
            d = d.add(&IntQPoly::monomial(num_bigint::BigInt::from(1), d.degree().map(|k| k + 1).unwrap_or(0)));
            let prod = b.mul(&d);
            prop_assert_eq!(prod.euclid_div_exact(&d).unwrap(), b);
        }

        #[test]
        fn mul_commutes(a in proptest::collection::vec(-9i64..9, 0..8),
                        b in proptest::collection::vec(-9i64..9, 0..8)) {
            let a = poly(&a);
            let b = poly(&b);
            prop_assert_eq!(a.mul(&b), b.mul(&a));
        }
    }
}
