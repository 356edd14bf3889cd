//! Twisted (q-analog) combinatorics: q-integers, Gaussian binomials,
//! q-factorials and twisted Stirling numbers of both kinds.
//!
//! All values are exact polynomials in `q`. The `r` parameter everywhere
//! replaces `q` by `q^r`, so `q_integer(n, r)` is the q^r-analog
//! `(n)_{q^r} = 1 + q^r + ... + q^{r(n-1)}`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::poly::IntQPoly;

/// The twisted integer `(n)_{q^r} = sum_{k<n} q^{rk}`.
pub fn q_integer(n: usize, r: usize) -> IntQPoly {
    assert!(r >= 1, "q_integer needs r >= 1");
    if n == 0 {
        return IntQPoly::zero();
    }
    let mut coeffs = vec![BigInt::zero(); r * (n - 1) + 1];
    for k in 0..n {
        coeffs[r * k] = BigInt::one();
    }
    IntQPoly::from_coeffs(coeffs)
}

/// The twisted factorial `(n)_{q^r}! = (n)_{q^r} (n-1)_{q^r} ... (1)_{q^r}`.
pub fn q_factorial(n: usize, r: usize) -> IntQPoly {
    let mut acc = IntQPoly::one();
    for j in 1..=n {
        acc = acc.mul(&q_integer(j, r));
    }
    acc
}

/// Gaussian binomial `binom(n, k)_{q^r}` via the twisted Pascal identity
/// `binom(n+1, k) = binom(n, k-1) + q^{rk} binom(n, k)`, with
/// `binom(n, 0) = 1` for all `n` and `binom(0, k) = 0` for `k > 0`.
pub fn q_binomial(n: usize, k: usize, r: usize) -> IntQPoly {
    if k > n {
        return IntQPoly::zero();
    }
    // row-by-row Pascal; row m holds binom(m, j) for j <= k
    let mut row: Vec<IntQPoly> = vec![IntQPoly::one()];
    for m in 1..=n {
        let width = k.min(m);
        let mut next = Vec::with_capacity(width + 1);
        next.push(IntQPoly::one());
        for j in 1..=width {
            let left = &row[j - 1];
            let up = if j < row.len() {
                row[j].shift(r * j)
            } else {
                IntQPoly::zero()
            };
            next.push(left.add(&up));
        }
        row = next;
    }
    row.get(k).cloned().unwrap_or_else(IntQPoly::zero)
}

/// Ordinary binomial coefficient as a big integer.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Which kind of Stirling numbers a table holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StirlingKind {
    First,
    Second,
}

/// Memoized triangular table of twisted Stirling numbers `s_{q^r}(n, k)`
/// (first kind) or `S_{q^r}(n, k)` (second kind), grown on demand.
///
/// Recursions: `s(n+1, k) = s(n, k-1) - (n)_{q^r} s(n, k)` and
/// `S(n+1, k) = S(n, k-1) + (k)_{q^r} S(n, k)`, with `s(0,0) = S(0,0) = 1`
/// and zero on the rest of row/column 0.
pub struct StirlingTable {
    kind: StirlingKind,
    r: usize,
    rows: Vec<Vec<IntQPoly>>,
}

impl StirlingTable {
    pub fn new(kind: StirlingKind, r: usize) -> Self {
        assert!(r >= 1);
        StirlingTable {
            kind,
            r,
            rows: vec![vec![IntQPoly::one()]],
        }
    }

    pub fn kind(&self) -> StirlingKind {
        self.kind
    }

    fn grow_to(&mut self, n: usize) {
        while self.rows.len() <= n {
            let m = self.rows.len(); // building row m from row m-1
            let prev = &self.rows[m - 1];
            let mut row = Vec::with_capacity(m + 1);
            for k in 0..=m {
                let diag = if k >= 1 { prev[k - 1].clone() } else { IntQPoly::zero() };
                let up = if k < prev.len() { &prev[k] } else { return_zero() };
                let weight = match self.kind {
                    StirlingKind::First => q_integer(m - 1, self.r).neg(),
                    StirlingKind::Second => q_integer(k, self.r),
                };
                row.push(diag.add(&weight.mul(up)));
            }
            self.rows.push(row);
        }
    }

    pub fn get(&mut self, n: usize, k: usize) -> IntQPoly {
        if k > n {
            return IntQPoly::zero();
        }
        self.grow_to(n);
        self.rows[n][k].clone()
    }
}

fn return_zero() -> &'static IntQPoly {
    use std::sync::OnceLock;
    static ZERO: OnceLock<IntQPoly> = OnceLock::new();
    ZERO.get_or_init(IntQPoly::zero)
}

/// Single twisted Stirling number; builds a fresh table (use
/// [`StirlingTable`] directly inside loops).
pub fn stirling_q(kind: StirlingKind, n: usize, k: usize, r: usize) -> IntQPoly {
    StirlingTable::new(kind, r).get(n, k)
}

/// Ordinary (untwisted) Stirling numbers as big integers, signed for the
/// first kind.
pub fn stirling_int(kind: StirlingKind, n: usize, k: usize) -> BigInt {
    // q = 1 specialization of the twisted recursion
    if n == 0 && k == 0 {
        return BigInt::one();
    }
    if k > n || k == 0 || n == 0 {
        return BigInt::zero();
    }
    let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
    for m in 1..=n {
        let prev = &rows[m - 1];
        let mut row = Vec::with_capacity(m + 1);
        for j in 0..=m {
            let diag = if j >= 1 { prev[j - 1].clone() } else { BigInt::zero() };
            let up = if j < prev.len() { prev[j].clone() } else { BigInt::zero() };
            let weight = match kind {
                StirlingKind::First => -BigInt::from(m - 1),
                StirlingKind::Second => BigInt::from(j),
            };
            row.push(diag + weight * up);
        }
        rows.push(row);
    }
    rows[n][k].clone()
}

/// Elementary symmetric polynomial `e_k(xs)` of exact polynomial arguments.
pub fn elementary_symmetric(k: usize, xs: &[IntQPoly]) -> IntQPoly {
    // e_j(x_1..x_m) built by one pass of the defining recurrence
    let mut e: Vec<IntQPoly> = vec![IntQPoly::zero(); k + 1];
    e[0] = IntQPoly::one();
    for x in xs {
        for j in (1..=k).rev() {
            let t = e[j - 1].mul(x);
            e[j] = e[j].add(&t);
        }
    }
    e[k].clone()
}

/// The higher q^p-derivative on polynomials:
/// `partial_qp_higher(a, k, p)` sends `q^n` to `binom(n, k)_{q^p} q^{n-k}`.
pub fn partial_qp_higher(a: &IntQPoly, k: usize, p: usize) -> IntQPoly {
    let mut acc = IntQPoly::zero();
    for (n, c) in a.coeffs().iter().enumerate() {
        if c.is_zero() || n < k {
            continue;
        }
        acc = acc.add(&q_binomial(n, k, p).scale(c).shift(n - k));
    }
    acc
}

/// The basic q^p-derivation `partial_qp(q^n) = (n)_{q^p} q^{n-1}`.
pub fn partial_qp(a: &IntQPoly, p: usize) -> IntQPoly {
    partial_qp_higher(a, 1, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(cs: &[i64]) -> IntQPoly {
        IntQPoly::from_i64s(cs)
    }

    #[test]
    fn q_integer_examples() {
        assert!(q_integer(0, 1).is_zero());
        assert_eq!(q_integer(3, 1), poly(&[1, 1, 1]));
        assert_eq!(q_integer(2, 3), poly(&[1, 0, 0, 1]));
    }

    #[test]
    fn q_factorial_examples() {
        assert!(q_factorial(0, 1).is_one());
        // (1)(1+q)(1+q+q^2) = 1 + 2q + 2q^2 + q^3
        assert_eq!(q_factorial(3, 1), poly(&[1, 2, 2, 1]));
        // (2)_{q^p}! = 1 + q^p, here p = 5
        assert_eq!(q_factorial(2, 5), q_integer(2, 5));
    }

    #[test]
    fn q_binomial_examples() {
        for n in 0..8 {
            assert!(q_binomial(n, 0, 1).is_one());
            assert_eq!(q_binomial(n, 1, 1), q_integer(n, 1));
        }
        assert_eq!(q_binomial(2, 1, 1), poly(&[1, 1]));
        // hand-unrolled Pascal: binom(4,2)_q = 1 + q + 2q^2 + q^3 + q^4
        assert_eq!(q_binomial(4, 2, 1), poly(&[1, 1, 2, 1, 1]));
    }

    #[test]
    fn pascal_identity_holds() {
        for r in [1usize, 3] {
            for n in 0..12 {
                for k in 1..=n + 1 {
                    let lhs = q_binomial(n + 1, k, r);
                    let rhs = q_binomial(n, k - 1, r)
                        .add(&q_binomial(n, k, r).shift(r * k));
                    assert_eq!(lhs, rhs, "n={n} k={k} r={r}");
                }
            }
        }
    }

    #[test]
    fn stirling_examples() {
        // s(2,1) = s(1,0) - (1)_q s(1,1) = -1
        assert_eq!(stirling_q(StirlingKind::First, 2, 1, 1), poly(&[-1]));
        // s(3,1) = e_2((1)_q, (2)_q) = (1)(1+q) = 1 + q
        assert_eq!(stirling_q(StirlingKind::First, 3, 1, 1), poly(&[1, 1]));
        // S(3,2) = S(2,1) + (2)_q S(2,2) = 1 + (1+q) = 2 + q
        assert_eq!(stirling_q(StirlingKind::Second, 3, 2, 1), poly(&[2, 1]));
    }

    #[test]
    fn q1_specialization_recovers_classical_values() {
        let one = num_bigint::BigInt::from(1);
        for n in 0..=9usize {
            for k in 0..=n {
                let qb = q_binomial(n, k, 1).eval(&one);
                assert_eq!(qb, binomial(n, k));
                let s1 = stirling_q(StirlingKind::First, n, k, 1).eval(&one);
                assert_eq!(s1, stirling_int(StirlingKind::First, n, k));
                let s2 = stirling_q(StirlingKind::Second, n, k, 1).eval(&one);
                assert_eq!(s2, stirling_int(StirlingKind::Second, n, k));
            }
        }
    }

    #[test]
    fn partial_qp_basics() {
        // partial_qp(q) = (1)_{q^p} = 1
        assert!(partial_qp(&IntQPoly::q(), 2).is_one());
        // partial_qp(q^3, p=2) = (3)_{q^2} q^2
        assert_eq!(
            partial_qp(&IntQPoly::monomial(1.into(), 3), 2),
            q_integer(3, 2).shift(2)
        );
    }
}
