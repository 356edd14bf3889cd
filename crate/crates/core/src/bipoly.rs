//! Integer polynomials in two commuting indeterminates X, Y with exact
//! q-polynomial coefficients, in canonical sparse form.

use std::collections::BTreeMap;

use crate::poly::IntQPoly;
use crate::qcomb::{q_integer, StirlingKind, StirlingTable};

/// Sparse bivariate polynomial: `(i, j) -> coefficient of X^i Y^j`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct BiPoly {
    terms: BTreeMap<(usize, usize), IntQPoly>,
}

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly::default()
    }

    pub fn one() -> Self {
        BiPoly::term(IntQPoly::one(), 0, 0)
    }

    pub fn term(c: IntQPoly, xdeg: usize, ydeg: usize) -> Self {
        let mut b = BiPoly::default();
        if !c.is_zero() {
            b.terms.insert((xdeg, ydeg), c);
        }
        b
    }

    pub fn x() -> Self {
        BiPoly::term(IntQPoly::one(), 1, 0)
    }

    pub fn y() -> Self {
        BiPoly::term(IntQPoly::one(), 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, key: (usize, usize), c: IntQPoly) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.insert(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.insert(*k, c.neg());
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = BiPoly::default();
        for ((i1, j1), c1) in &self.terms {
            for ((i2, j2), c2) in &rhs.terms {
                out.insert((i1 + i2, j1 + j2), c1.mul(c2));
            }
        }
        out
    }
}

/// `X_n = prod_{k=0}^{n-1} (X - (k)_{q^r} Y)`.
pub fn falling_twisted_power(n: usize, r: usize) -> BiPoly {
    let mut acc = BiPoly::one();
    for k in 0..n {
        let factor = BiPoly::x().sub(&BiPoly::term(q_integer(k, r), 0, 1));
        acc = acc.mul(&factor);
    }
    acc
}

/// Both halves of the fundamental Stirling identity at a given `n`:
/// `X_n = sum_k s(n,k) X^k Y^{n-k}` and `X^n = sum_k S(n,k) X_k Y^{n-k}`.
pub fn fundamental_stirling_holds(n: usize, r: usize) -> bool {
    let mut first = StirlingTable::new(StirlingKind::First, r);
    let mut second = StirlingTable::new(StirlingKind::Second, r);
    let xn = falling_twisted_power(n, r);
    let mut rhs = BiPoly::zero();
    for k in 0..=n {
        rhs = rhs.add(&BiPoly::term(first.get(n, k), k, n - k));
    }
    if xn != rhs {
        return false;
    }
    let mut rhs2 = BiPoly::zero();
    for k in 0..=n {
        let base = falling_twisted_power(k, r);
        rhs2 = rhs2.add(&base.mul(&BiPoly::term(second.get(n, k), 0, n - k)));
    }
    let xpow = BiPoly::x().pow(n);
    xpow == rhs2
}

impl BiPoly {
    pub fn pow(&self, e: usize) -> Self {
        let mut acc = BiPoly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcomb::stirling_q;

    #[test]
    fn x2_expansion() {
        // X_2 = X(X - (1)_q Y) = X^2 - XY
        let x2 = falling_twisted_power(2, 1);
        let want = BiPoly::x()
            .pow(2)
            .sub(&BiPoly::term(IntQPoly::one(), 1, 1));
        assert_eq!(x2, want);
    }

    #[test]
    fn fundamental_identity_small() {
        for r in [1usize, 2] {
            for n in 0..=5 {
                assert!(fundamental_stirling_holds(n, r), "n = {n}, r = {r}");
            }
        }
    }

    #[test]
    fn mutated_stirling_breaks_identity() {
        // replacing s(n,k) by s(n,k) + 1 must break the expansion
        let n = 3;
        let xn = falling_twisted_power(n, 1);
        let mut rhs = BiPoly::zero();
        for k in 0..=n {
            let mut c = stirling_q(StirlingKind::First, n, k, 1);
            if k == 1 {
                c = c.add(&IntQPoly::one());
            }
            rhs = rhs.add(&BiPoly::term(c, k, n - k));
        }
        assert_ne!(xn, rhs);
    }
}
