//! Smith normal form of integer matrices by unimodular row/column
//! operations, exact over arbitrary-precision integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Diagonal of the Smith normal form (nonnegative, each dividing the next,
/// zeros dropped) plus the count of zero diagonal entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithInvariants {
    pub diagonal: Vec<BigInt>,
    pub nullity: usize,
}

/// Compute the Smith invariants of a rectangular integer matrix.
pub fn smith_invariants(mat: &[Vec<BigInt>]) -> SmithInvariants {
    let rows = mat.len();
    let cols = if rows == 0 { 0 } else { mat[0].len() };
    let mut a: Vec<Vec<BigInt>> = mat.to_vec();
    let n = rows.min(cols);
    let mut diag: Vec<BigInt> = Vec::new();

    for t in 0..n {
        // find a pivot with minimal nonzero absolute value in the submatrix
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero() {
                    match pivot {
                        None => pivot = Some((i, j)),
                        Some((pi, pj)) => {
                            if a[i][j].abs() < a[pi][pj].abs() {
                                pivot = Some((i, j));
                            }
                        }
                    }
                }
            }
        }
        let Some((pi, pj)) = pivot else {
            break;
        };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }

        // clear row and column t, restarting whenever a remainder shrinks the pivot
        loop {
            let mut done = true;
            for i in (t + 1)..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                for j in t..cols {
                    let s = &a[t][j] * &q;
                    a[i][j] -= s;
                }
                if !a[i][t].is_zero() {
                    // remainder is smaller than the pivot; swap it up
                    a.swap(t, i);
                    done = false;
                }
            }
            for j in (t + 1)..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                for row in a.iter_mut().skip(t) {
                    let s = &row[t] * &q;
                    row[j] -= s;
                }
                if !a[t][j].is_zero() {
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                    done = false;
                }
            }
            if done {
                break;
            }
        }

        // enforce divisibility d_t | entries of the remaining block
        let mut clean = false;
        while !clean {
            clean = true;
            'scan: for i in (t + 1)..rows {
                for j in (t + 1)..cols {
                    if !(&a[i][j] % &a[t][t]).is_zero() {
                        // add row i to row t and redo the elimination step
                        for j2 in t..cols {
                            let v = a[i][j2].clone();
                            a[t][j2] += v;
                        }
                        clean = false;
                        break 'scan;
                    }
                }
            }
            if !clean {
                // re-clear row/column t
                loop {
                    let mut done = true;
                    for i in (t + 1)..rows {
                        if a[i][t].is_zero() {
                            continue;
                        }
                        let q = a[i][t].div_floor(&a[t][t]);
                        for j in t..cols {
                            let s = &a[t][j] * &q;
                            a[i][j] -= s;
                        }
                        if !a[i][t].is_zero() {
                            a.swap(t, i);
                            done = false;
                        }
                    }
                    for j in (t + 1)..cols {
                        if a[t][j].is_zero() {
                            continue;
                        }
                        let q = a[t][j].div_floor(&a[t][t]);
                        for row in a.iter_mut().skip(t) {
                            let s = &row[t] * &q;
                            row[j] -= s;
                        }
                        if !a[t][j].is_zero() {
                            for row in a.iter_mut() {
                                row.swap(t, j);
                            }
                            done = false;
                        }
                    }
                    if done {
                        break;
                    }
                }
            }
        }
        diag.push(a[t][t].abs());
    }

    let nullity = n - diag.len();
    SmithInvariants {
        diagonal: diag,
        nullity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    #[test]
    fn identity_and_zero() {
        let inv = smith_invariants(&m(&[&[1, 0], &[0, 1]]));
        assert_eq!(inv.diagonal, vec![BigInt::from(1), BigInt::from(1)]);
        let inv = smith_invariants(&m(&[&[0, 0], &[0, 0]]));
        assert!(inv.diagonal.is_empty());
        assert_eq!(inv.nullity, 2);
    }

    #[test]
    fn classic_example() {
        // diag 2, 6 for [[2,4],[4,10]]? gcd 2, det 4 => 2, 2
        let inv = smith_invariants(&m(&[&[2, 4], &[4, 10]]));
        assert_eq!(inv.diagonal, vec![BigInt::from(2), BigInt::from(2)]);
        // [[2,0],[0,3]] ~ [1,6]
        let inv = smith_invariants(&m(&[&[2, 0], &[0, 3]]));
        assert_eq!(inv.diagonal, vec![BigInt::from(1), BigInt::from(6)]);
    }

    #[test]
    fn divisibility_chain_holds() {
        let inv = smith_invariants(&m(&[&[6, 4, 8], &[2, 10, 2], &[4, 4, 12]]));
        for w in inv.diagonal.windows(2) {
            assert!((&w[1] % &w[0]).is_zero(), "{:?}", inv.diagonal);
        }
        // determinant magnitude is the product of invariants
        let det: BigInt = inv.diagonal.iter().product();
        assert_eq!(det, BigInt::from(6 * (10 * 12 - 2 * 4) - 4 * (2 * 12 - 2 * 4) + 8 * (2 * 4 - 10 * 4)).abs());
    }
}
