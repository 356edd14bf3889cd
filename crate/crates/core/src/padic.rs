//! The truncated p-adic working ring `(Z/p^M)[t]/(t^N)` with `t = q - 1`.
//!
//! Precision is data: every value carries its own `(p, M, N)` and operations
//! that lose t-adic precision (division by `t`, the Delta-derivation) return
//! results at the reduced precision. Mixed-precision arithmetic reduces to
//! the coarser operand; combining different primes is a programming error.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt;

use crate::error::{Error, Result};
use crate::poly::IntQPoly;
use crate::qcomb::q_integer;

/// `(p, M, N)`: residues mod `p^M`, series truncated at `t^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Precision {
    pub p: u32,
    pub m: u32,
    pub n: u32,
}

impl Precision {
    pub fn new(p: u32, m: u32, n: u32) -> Self {
        assert!(m >= 1 && n >= 1, "precision exponents must be >= 1");
        assert!(is_prime(p), "p = {p} is not prime");
        Precision { p, m, n }
    }

    pub fn modulus(&self) -> BigUint {
        BigUint::from(self.p).pow(self.m)
    }

    /// Componentwise minimum; panics on different primes.
    pub fn meet(&self, other: &Precision) -> Precision {
        assert_eq!(self.p, other.p, "cannot mix primes {} and {}", self.p, other.p);
        Precision {
            p: self.p,
            m: self.m.min(other.m),
            n: self.n.min(other.n),
        }
    }

    fn with_n(&self, n: u32) -> Precision {
        Precision { n, ..*self }
    }
}

pub(crate) fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Element of `(Z/p^M)[t]/(t^N)`, `t = q - 1`.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncSeries {
    prec: Precision,
    /// exactly `prec.n` residues in `[0, p^M)`, indexed by degree in t
    coeffs: Vec<BigUint>,
}

impl TruncSeries {
    pub fn zero(prec: Precision) -> Self {
        TruncSeries {
            prec,
            coeffs: vec![BigUint::zero(); prec.n as usize],
        }
    }

    pub fn constant(c: &BigInt, prec: Precision) -> Self {
        let mut s = TruncSeries::zero(prec);
        s.coeffs[0] = reduce_int(c, &prec.modulus());
        s
    }

    pub fn one(prec: Precision) -> Self {
        TruncSeries::constant(&BigInt::one(), prec)
    }

    /// `t` itself (requires N >= 2 to be visible).
    pub fn t(prec: Precision) -> Self {
        let mut s = TruncSeries::zero(prec);
        if prec.n >= 2 {
            s.coeffs[1] = BigUint::one();
        }
        s
    }

    /// `q = 1 + t`.
    pub fn q(prec: Precision) -> Self {
        let mut s = TruncSeries::one(prec);
        if prec.n >= 2 {
            s.coeffs[1] = BigUint::one();
        }
        s
    }

    /// Round a p-integral rational polynomial into the truncated ring:
    /// denominators invert mod `p^M`, then `q = 1 + t` as in `from_qpoly`.
    pub fn from_ratpoly(a: &crate::poly::RatQPoly, prec: Precision) -> Result<Self> {
        let modulus = prec.modulus();
        let mi = BigInt::from_biguint(num_bigint::Sign::Plus, modulus.clone());
        let mut int_coeffs = Vec::with_capacity(a.coeffs().len());
        for c in a.coeffs() {
            let dinv = match c.denom().extended_gcd(&mi) {
                e if e.gcd.is_one() => e.x.mod_floor(&mi),
                _ => return Err(Error::NotPIntegral),
            };
            int_coeffs.push((c.numer() * dinv).mod_floor(&mi));
        }
        Ok(TruncSeries::from_qpoly(
            &IntQPoly::from_coeffs(int_coeffs),
            prec,
        ))
    }

    /// Rewrite an exact polynomial in `q` on the t-basis via `q = 1 + t`,
    /// then reduce mod `(p^M, t^N)`.
    pub fn from_qpoly(a: &IntQPoly, prec: Precision) -> Self {
        // Horner: acc <- acc * (1 + t) + a_k, from the top degree down
        let modulus = prec.modulus();
        let n = prec.n as usize;
        let mut acc = vec![BigUint::zero(); n];
        for k in (0..a.coeffs().len()).rev() {
            // multiply by (1 + t): shift-add, truncating at t^N
            for j in (1..n).rev() {
                let t = std::mem::take(&mut acc[j]);
                acc[j] = (t + &acc[j - 1]) % &modulus;
            }
            let c = reduce_int(&a.coeff(k), &modulus);
            acc[0] = (std::mem::take(&mut acc[0]) + c) % &modulus;
        }
        TruncSeries { prec, coeffs: acc }
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigUint {
        self.coeffs.get(k).cloned().unwrap_or_else(BigUint::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Reduce to a coarser precision (same prime; M, N can only shrink).
    pub fn reduce_to(&self, prec: Precision) -> Self {
        assert_eq!(self.prec.p, prec.p);
        assert!(prec.m <= self.prec.m && prec.n <= self.prec.n);
        let modulus = prec.modulus();
        TruncSeries {
            prec,
            coeffs: self.coeffs[..prec.n as usize]
                .iter()
                .map(|c| c % &modulus)
                .collect(),
        }
    }

    fn meet_with(&self, other: &TruncSeries) -> (TruncSeries, TruncSeries) {
        let prec = self.prec.meet(&other.prec);
        (self.reduce_to(prec), other.reduce_to(prec))
    }

    pub fn add(&self, other: &TruncSeries) -> TruncSeries {
        let (a, b) = self.meet_with(other);
        let modulus = a.prec.modulus();
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| (x + y) % &modulus)
            .collect();
        TruncSeries { prec: a.prec, coeffs }
    }

    pub fn neg(&self) -> TruncSeries {
        let modulus = self.prec.modulus();
        TruncSeries {
            prec: self.prec,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| {
                    if c.is_zero() {
                        BigUint::zero()
                    } else {
                        &modulus - c
                    }
                })
                .collect(),
        }
    }

    pub fn sub(&self, other: &TruncSeries) -> TruncSeries {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &TruncSeries) -> TruncSeries {
        let (a, b) = self.meet_with(other);
        let modulus = a.prec.modulus();
        let n = a.prec.n as usize;
        let mut coeffs = vec![BigUint::zero(); n];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                let t = std::mem::take(&mut coeffs[i + j]);
                coeffs[i + j] = (t + x * y) % &modulus;
            }
        }
        TruncSeries { prec: a.prec, coeffs }
    }

    pub fn scale_int(&self, c: &BigInt) -> TruncSeries {
        let modulus = self.prec.modulus();
        let c = reduce_int(c, &modulus);
        TruncSeries {
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|x| (x * &c) % &modulus).collect(),
        }
    }

    pub fn pow(&self, e: usize) -> TruncSeries {
        let mut acc = TruncSeries::one(self.prec);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiplicative inverse; the constant coefficient must be a unit mod p.
    pub fn invert(&self) -> Result<TruncSeries> {
        let modulus = self.prec.modulus();
        if (&self.coeffs[0] % self.prec.p).is_zero() {
            return Err(Error::NotAUnit);
        }
        let c0_inv = modinv(&self.coeffs[0], &modulus, self.prec.p)?;
        let mut x = TruncSeries::constant(&BigInt::from(c0_inv), self.prec);
        // Newton: x <- x(2 - a x), doubling the correct t-order each round
        let two = TruncSeries::constant(&BigInt::from(2), self.prec);
        let mut correct = 1u32;
        while correct < self.prec.n {
            x = x.mul(&two.sub(&self.mul(&x)));
            correct *= 2;
        }
        Ok(x)
    }

    /// Exact division by `t`; every admissible input has zero constant term.
    /// Loses one t-digit of precision.
    pub fn div_t_exact(&self) -> Result<TruncSeries> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::NonzeroRemainder);
        }
        if self.prec.n < 2 {
            return Err(Error::PrecisionTooLow { needed: 2, have: self.prec.n as usize });
        }
        let prec = self.prec.with_n(self.prec.n - 1);
        Ok(TruncSeries {
            prec,
            coeffs: self.coeffs[1..].to_vec(),
        })
    }

    /// `g_r`: the continuous endomorphism with `q -> q^r`, i.e.
    /// `t -> (1+t)^r - 1`; negative `r` goes through the inverse of `q`.
    pub fn substitute_gr(&self, r: i64) -> TruncSeries {
        let prec = self.prec;
        let q_pow_r = q_power(prec, r);
        let u = q_pow_r.sub(&TruncSeries::one(prec)); // image of t
        // compose by Horner
        let mut acc = TruncSeries::zero(prec);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&u);
            acc.coeffs[0] = (std::mem::take(&mut acc.coeffs[0]) + c) % prec.modulus();
        }
        acc
    }

    /// The Delta-derivation of the base ring:
    /// `partial_delta(t^n) = (p)_q (n)_{(p+1)_q} t^{n-1}`, W-linear.
    /// The result carries t-precision `N - 1` (Griffiths loss).
    pub fn partial_delta(&self) -> TruncSeries {
        let p = self.prec.p;
        if self.prec.n < 2 {
            // only constants are visible; their image is 0 at the zero ring
            return TruncSeries::zero(self.prec.with_n(1));
        }
        let prec = self.prec.with_n(self.prec.n - 1);
        let pq = TruncSeries::from_qpoly(&q_integer(p as usize, 1), prec);
        let pp1q = TruncSeries::from_qpoly(&q_integer(p as usize + 1, 1), prec);
        let mut acc = TruncSeries::zero(prec);
        let mut tpow = TruncSeries::one(prec); // t^{n-1}
        let mut gamma_pow = TruncSeries::one(prec); // (p+1)_q^k accumulator
        let mut twisted_n = TruncSeries::zero(prec); // (n)_{(p+1)_q}
        for n in 1..self.prec.n as usize {
            twisted_n = twisted_n.add(&gamma_pow);
            gamma_pow = gamma_pow.mul(&pp1q);
            let c = BigInt::from_biguint(num_bigint::Sign::Plus, self.coeffs[n].clone());
            acc = acc.add(&twisted_n.mul(&tpow).scale_int(&c));
            tpow = tpow.mul(&TruncSeries::t(prec));
        }
        acc.mul(&pq)
    }

    /// Constant term as an integer in `[0, p^M)`.
    pub fn constant_term(&self) -> BigUint {
        self.coeffs[0].clone()
    }

    /// Reduction mod `(p, t)`, an element of `F_p`.
    pub fn residue_fp(&self) -> u32 {
        (&self.coeffs[0] % self.prec.p).to_u32().unwrap()
    }
}

/// `q^r` at the given precision, any `r` in `Z`.
pub fn q_power(prec: Precision, r: i64) -> TruncSeries {
    let q = TruncSeries::q(prec);
    if r >= 0 {
        q.pow(r as usize)
    } else {
        q.pow((-r) as usize)
            .invert()
            .expect("q is a unit in the truncated ring")
    }
}

/// `(r)_q` at the given precision for any `r` in `Z`, via
/// `(-n)_q = -q^{-n} (n)_q`.
pub fn q_analog(prec: Precision, r: i64) -> TruncSeries {
    if r >= 0 {
        TruncSeries::from_qpoly(&q_integer(r as usize, 1), prec)
    } else {
        let n = (-r) as usize;
        let nq = TruncSeries::from_qpoly(&q_integer(n, 1), prec);
        q_power(prec, r).mul(&nq).neg()
    }
}

/// Exact rational t-expansion of a polynomial in `q` (via `q = 1 + t`),
/// truncated at `t^len`.
pub fn rat_t_expansion(a: &crate::poly::RatQPoly, len: usize) -> Vec<num_rational::BigRational> {
    use num_rational::BigRational;
    let mut out = vec![BigRational::zero(); len];
    // Horner: acc <- acc (1 + t) + a_k
    for k in (0..a.coeffs().len()).rev() {
        for j in (1..len).rev() {
            let prev = out[j - 1].clone();
            out[j] += prev;
        }
        out[0] += a.coeff(k);
    }
    out
}

/// Exact division of power series in `t = q - 1`: computes `num/den` to
/// t-order `prec.n` with exact rational coefficients, verifies every
/// coefficient is p-integral, and reduces mod `p^M`. The constant term of
/// `den` at `q = 1` must be nonzero. This is how divisibility theorems
/// (`theta`-images of twisted integers, divided comultiplication) are
/// reduced into the truncated layer without p-adic precision decay.
pub fn series_div_qpoly(
    num: &crate::poly::RatQPoly,
    den: &IntQPoly,
    prec: Precision,
) -> Result<TruncSeries> {
    use num_rational::BigRational;
    let n = prec.n as usize;
    let a = rat_t_expansion(num, n);
    let b = rat_t_expansion(&den.to_rational(), n);
    if b[0].is_zero() {
        return Err(Error::NotAUnit);
    }
    let mut rem = a;
    let mut h: Vec<BigRational> = Vec::with_capacity(n);
    for i in 0..n {
        let c = &rem[i] / &b[0];
        for j in 0..(n - i) {
            let s = &c * &b[j];
            rem[i + j] -= s;
        }
        h.push(c);
    }
    let p = BigInt::from(prec.p);
    let modulus = prec.modulus();
    let mi = BigInt::from_biguint(num_bigint::Sign::Plus, modulus.clone());
    let mut coeffs = Vec::with_capacity(n);
    for c in &h {
        if (c.denom() % &p).is_zero() {
            return Err(Error::NotPIntegral);
        }
        let dinv = match c.denom().extended_gcd(&mi) {
            e if e.gcd.is_one() => e.x.mod_floor(&mi),
            _ => return Err(Error::NotPIntegral),
        };
        coeffs.push(((c.numer() * dinv).mod_floor(&mi)).to_biguint().unwrap());
    }
    Ok(TruncSeries { prec, coeffs })
}

/// `lambda = 1 + (q^2 - q) partial_qp((p)_q)` as an exact polynomial;
/// satisfies `(p)_{q^{p+1}} = lambda (p)_q` and is a unit in the truncated ring.
pub fn lambda_poly(p: u32) -> IntQPoly {
    let pq = q_integer(p as usize, 1);
    let q2_minus_q = IntQPoly::from_i64s(&[0, -1, 1]);
    IntQPoly::one().add(&q2_minus_q.mul(&crate::qcomb::partial_qp(&pq, p as usize)))
}

fn reduce_int(c: &BigInt, modulus: &BigUint) -> BigUint {
    let m = BigInt::from_biguint(num_bigint::Sign::Plus, modulus.clone());
    let r = c.mod_floor(&m);
    r.to_biguint().expect("mod_floor is nonnegative")
}

fn modinv(a: &BigUint, modulus: &BigUint, p: u32) -> Result<BigUint> {
    let a = BigInt::from_biguint(num_bigint::Sign::Plus, a.clone());
    let m = BigInt::from_biguint(num_bigint::Sign::Plus, modulus.clone());
    let e = a.extended_gcd(&m);
    if !e.gcd.is_one() {
        let _ = p;
        return Err(Error::NotAUnit);
    }
    let inv = e.x.mod_floor(&m);
    Ok(inv.to_biguint().unwrap())
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 if c.is_one() => write!(f, "t")?,
                1 => write!(f, "{c}t")?,
                _ if c.is_one() => write!(f, "t^{k}")?,
                _ => write!(f, "{c}t^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(
            f,
            "  (mod {}^{}, t^{})",
            self.prec.p, self.prec.m, self.prec.n
        )
    }
}

impl fmt::Debug for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcomb::q_integer;

    fn prec(p: u32, m: u32, n: u32) -> Precision {
        Precision::new(p, m, n)
    }

    #[test]
    fn from_qpoly_examples() {
        // q -> 1 + t
        let s = TruncSeries::from_qpoly(&IntQPoly::q(), prec(3, 3, 4));
        assert_eq!(s, TruncSeries::q(prec(3, 3, 4)));
        // (2)_q = 1 + q -> 2 + t at p = 2, M = 4, N = 4
        let s = TruncSeries::from_qpoly(&q_integer(2, 1), prec(2, 4, 4));
        assert_eq!(s.coeff(0), 2u32.into());
        assert_eq!(s.coeff(1), 1u32.into());
        assert!(s.coeff(2).is_zero());
        // (3)_q -> 3 + 3t + t^2 (binomial expansion oracle)
        let s = TruncSeries::from_qpoly(&q_integer(3, 1), prec(3, 3, 5));
        assert_eq!(s.coeff(0), 3u32.into());
        assert_eq!(s.coeff(1), 3u32.into());
        assert_eq!(s.coeff(2), 1u32.into());
        assert!(s.coeff(3).is_zero());
    }

    #[test]
    fn invert_geometric_series() {
        // (1 + t)^{-1} = 1 - t + t^2 - ... = 1 + 8t + t^2 mod (9, t^3)
        let q = TruncSeries::q(prec(3, 2, 3));
        let inv = q.invert().unwrap();
        assert_eq!(inv.coeff(0), 1u32.into());
        assert_eq!(inv.coeff(1), 8u32.into());
        assert_eq!(inv.coeff(2), 1u32.into());
        assert!(q.mul(&inv).sub(&TruncSeries::one(prec(3, 2, 3))).is_zero());
        assert!(TruncSeries::one(prec(5, 3, 4)).invert().unwrap().is_zero() == false);
    }

    #[test]
    fn invert_rejects_nonunit() {
        let pq = TruncSeries::from_qpoly(&q_integer(3, 1), prec(3, 3, 4));
        assert_eq!(pq.invert(), Err(Error::NotAUnit));
    }

    #[test]
    fn gr_examples() {
        // g_1 = id
        let t = TruncSeries::t(prec(5, 2, 4));
        assert_eq!(t.substitute_gr(1), t);
        // g_{p+1}(t) = (p+1)_q t at p = 2: (3 + 3t + t^2) t
        let pr = prec(2, 4, 5);
        let got = TruncSeries::t(pr).substitute_gr(3);
        let want = TruncSeries::from_qpoly(&q_integer(3, 1), pr).mul(&TruncSeries::t(pr));
        assert_eq!(got, want);
        // g_{-1}(q) = 1 + 7t + t^2 mod (8, t^3)
        let pr = prec(2, 3, 3);
        let got = TruncSeries::q(pr).substitute_gr(-1);
        assert_eq!(got.coeff(0), 1u32.into());
        assert_eq!(got.coeff(1), 7u32.into());
        assert_eq!(got.coeff(2), 1u32.into());
    }

    #[test]
    fn gamma_on_tn_is_twisted_power() {
        // gamma(t^n) = (p+1)_q^n t^n, from g_{p+1}(t) = (p+1)_q t
        let pr = prec(3, 3, 6);
        let t = TruncSeries::t(pr);
        let pp1 = TruncSeries::from_qpoly(&q_integer(4, 1), pr);
        for n in 1..4usize {
            let got = t.pow(n).substitute_gr(4);
            let want = pp1.pow(n).mul(&t.pow(n));
            assert_eq!(got, want, "n = {n}");
        }
    }

    #[test]
    fn partial_delta_examples() {
        let pr = prec(2, 4, 5);
        // constants die
        assert!(TruncSeries::one(pr).partial_delta().is_zero());
        // partial_delta(q) = (p)_q
        let got = TruncSeries::q(pr).partial_delta();
        let want = TruncSeries::from_qpoly(&q_integer(2, 1), pr.with_n(4));
        assert_eq!(got, want);
        // partial_delta(t^2) = (2)_q (1 + (3)_q) t at p = 2
        let t = TruncSeries::t(pr);
        let got = t.mul(&t).partial_delta();
        let pq = TruncSeries::from_qpoly(&q_integer(2, 1), pr.with_n(4));
        let n2 = TruncSeries::one(pr.with_n(4))
            .add(&TruncSeries::from_qpoly(&q_integer(3, 1), pr.with_n(4)));
        let want = pq.mul(&n2).mul(&TruncSeries::t(pr.with_n(4)));
        assert_eq!(got, want);
    }

    #[test]
    fn partial_delta_cross_check_via_linearity() {
        // partial_delta(q^2) = (2p)_q q, checked against the t-basis formula
        for p in [2u32, 3, 5] {
            let pr = prec(p, 3, 6);
            let q2 = TruncSeries::q(pr).pow(2);
            let got = q2.partial_delta();
            let want = TruncSeries::from_qpoly(
                &q_integer(2 * p as usize, 1),
                pr.with_n(pr.n - 1),
            )
            .mul(&TruncSeries::q(pr.with_n(pr.n - 1)));
            assert_eq!(got, want, "p = {p}");
        }
    }

    #[test]
    fn twisted_leibniz_and_buium_symmetry() {
        // partial(ab) = partial(a) b + gamma(a) partial(b)
        // partial(ab) = partial(a) b + a partial(b) + (q^2-q) partial(a) partial(b)
        let pr = prec(3, 3, 5);
        let a = TruncSeries::from_qpoly(&IntQPoly::from_i64s(&[2, 5, 0, 1, 7]), pr);
        let b = TruncSeries::from_qpoly(&IntQPoly::from_i64s(&[1, 0, 3, 2]), pr);
        let lhs = a.mul(&b).partial_delta();
        let da = a.partial_delta();
        let db = b.partial_delta();
        let gamma_a = a.substitute_gr(4).reduce_to(da.precision());
        let rhs = da.mul(&b).add(&gamma_a.mul(&db));
        assert_eq!(lhs, rhs);
        let q2q = TruncSeries::from_qpoly(&IntQPoly::from_i64s(&[0, -1, 1]), pr);
        let rhs2 = da.mul(&b).add(&a.mul(&db)).add(&q2q.mul(&da).mul(&db));
        assert_eq!(lhs, rhs2);
    }

    #[test]
    fn gamma_equals_id_plus_q2q_partial() {
        for p in [2u32, 3] {
            let pr = prec(p, 3, 5);
            let a = TruncSeries::from_qpoly(&IntQPoly::from_i64s(&[4, 1, 2, 0, 3]), pr);
            let lhs = a.substitute_gr(p as i64 + 1).reduce_to(pr.with_n(pr.n - 1));
            let q2q = TruncSeries::from_qpoly(&IntQPoly::from_i64s(&[0, -1, 1]), pr);
            let rhs = a
                .reduce_to(pr.with_n(pr.n - 1))
                .add(&q2q.mul(&a.partial_delta()));
            assert_eq!(lhs, rhs, "p = {p}");
        }
    }

    #[test]
    fn griffiths_transversality() {
        // partial_delta of (t^{n+1}) lies in (t^n)
        let pr = prec(3, 2, 6);
        let t = TruncSeries::t(pr);
        for n in 0..4usize {
            let a = t.pow(n + 1).mul(&TruncSeries::from_qpoly(
                &IntQPoly::from_i64s(&[3, 1, 4, 1, 5]),
                pr,
            ));
            let d = a.partial_delta();
            for k in 0..n {
                assert!(d.coeff(k).is_zero(), "n = {n}, k = {k}");
            }
        }
    }

    #[test]
    fn nygaard_graded_action() {
        // partial_delta(t^{n+1}) = ((p+1)^{n+1} - 1) t^n mod t^{n+1}
        for p in [2u32, 3, 5] {
            let pr = prec(p, 3, 6);
            let t = TruncSeries::t(pr);
            for n in 0..(pr.n as usize - 1) {
                let d = t.pow(n + 1).partial_delta();
                let want = BigInt::from(p as i64 + 1).pow(n as u32 + 1) - BigInt::one();
                let want = reduce_int(&want, &pr.modulus());
                assert_eq!(d.coeff(n), want, "p = {p}, n = {n}");
            }
        }
    }

    #[test]
    fn lambda_is_a_unit_and_factors_p_qp1() {
        for p in [2u32, 3, 5] {
            let pr = prec(p, 4, 6);
            let lam = TruncSeries::from_qpoly(&lambda_poly(p), pr);
            assert!(lam.invert().is_ok(), "lambda not a unit at p = {p}");
            // (p)_{q^{p+1}} = lambda (p)_q, exact polynomial identity
            let lhs = q_integer(p as usize, p as usize + 1);
            let rhs = lambda_poly(p).mul(&q_integer(p as usize, 1));
            assert_eq!(lhs, rhs, "p = {p}");
        }
    }

    #[test]
    fn exact_congruence_pr_plus_one() {
        // (p^{r+1})_q = p (p^r)_q mod (p^r)_q^2, by exact polynomial division
        for p in [2usize, 3] {
            for r in 0..=2usize {
                let a = q_integer(p.pow(r as u32 + 1) as usize, 1);
                let b = q_integer(p.pow(r as u32) as usize, 1);
                let diff = a.sub(&b.scale(&BigInt::from(p as i64)));
                let sq = b.mul(&b);
                assert!(
                    diff.euclid_div_exact(&sq).is_ok(),
                    "p = {p}, r = {r}"
                );
            }
        }
    }

    #[test]
    fn mixed_precision_meets() {
        let a = TruncSeries::q(prec(3, 4, 6));
        let b = TruncSeries::q(prec(3, 2, 3));
        let c = a.add(&b);
        assert_eq!(c.precision(), prec(3, 2, 3));
    }
}
