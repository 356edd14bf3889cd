//! Finite free modules with a Delta-connection, presented by the matrix of
//! the derivation on a fixed basis: `d(s_j) = sum_i A[i][j] s_i`. The induced
//! operator on coordinate vectors is `v -> A gamma(v) + d_Delta(v)`.
//!
//! Hosts the rank-1 example zoo, weak nilpotency, tensor/dual/Hom/pullback,
//! frobenius structures, and the hyperstratification solver that reconstructs
//! the Taylor expansion of a weakly nilpotent connection.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::coalg::{l_delta_apply, l_delta_basis_trunc};
use crate::error::{Error, Result};
use crate::omega::{taylor_theta, OmegaElt};
use crate::padic::{lambda_poly, q_power, Precision, TruncSeries};
use crate::poly::IntQPoly;
use crate::qcomb::{binomial, partial_qp, q_integer};

/// Re-export: cohomology of reduced rank-1 modules is computed on the exact
/// cyclotomic lattice by integer Smith normal form.
pub use crate::cyclo::{rank1_cohomology, CohomologyInvariants};

pub type Mat = Vec<Vec<TruncSeries>>;

/// Finite free module with a Delta-connection, column-action matrix.
#[derive(Clone)]
pub struct NablaModule {
    prec: Precision,
    mat: Mat,
}

/// `alpha_n = sum_{k=1}^{n} binom(n,k) (q^2-q)^{k-1} d_{q^p}((p)_q)^k`,
/// the scalar of the rank-1 module carried by `(p)_q^n R`.
pub fn alpha_n(n: usize, p: u32) -> IntQPoly {
    let dpq = partial_qp(&q_integer(p as usize, 1), p as usize);
    let q2q = IntQPoly::from_i64s(&[0, -1, 1]);
    let mut acc = IntQPoly::zero();
    for k in 1..=n {
        let c = dpq.pow(k).mul(&q2q.pow(k - 1)).scale(&binomial(n, k));
        acc = acc.add(&c);
    }
    acc
}

impl NablaModule {
    pub fn new(prec: Precision, mat: Mat) -> Self {
        let r = mat.len();
        assert!(mat.iter().all(|row| row.len() == r), "matrix must be square");
        NablaModule { prec, mat }
    }

    pub fn rank(&self) -> usize {
        self.mat.len()
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn matrix(&self) -> &Mat {
        &self.mat
    }

    pub fn p(&self) -> u32 {
        self.prec.p
    }

    /// The trivial connection of a given rank.
    pub fn trivial(prec: Precision, rank: usize) -> Self {
        let z = TruncSeries::zero(prec);
        NablaModule::new(prec, vec![vec![z; rank]; rank])
    }

    /// Rank-1 module with scalar `alpha_n` (the `(p)_q`-adic filtration step).
    pub fn f_example(n: usize, prec: Precision) -> Self {
        let a = TruncSeries::from_qpoly(&alpha_n(n, prec.p), prec);
        NablaModule::new(prec, vec![vec![a]])
    }

    /// Breuil-Kisin twist of weight `n`: the rank-1 scalar
    /// `((p+1)^n / (p+1)_q^n - 1) / (q^2 - q)`. Costs one t-digit.
    pub fn bk_example(n: usize, prec: Precision) -> Result<Self> {
        let p = prec.p;
        let pp1q = TruncSeries::from_qpoly(&q_integer(p as usize + 1, 1), prec);
        let unit = pp1q.invert()?.pow(n);
        let num = unit
            .scale_int(&BigInt::from(p as i64 + 1).pow(n as u32))
            .sub(&TruncSeries::one(prec));
        let shifted = num.div_t_exact()?;
        let q_inv = TruncSeries::q(shifted.precision()).invert()?;
        Ok(NablaModule::new(
            shifted.precision(),
            vec![vec![shifted.mul(&q_inv)]],
        ))
    }

    /// Coordinate action `v -> A gamma(v) + partial_delta(v)`; the result
    /// carries the reduced (Griffiths) precision.
    pub fn apply(&self, v: &[TruncSeries]) -> Vec<TruncSeries> {
        assert_eq!(v.len(), self.rank());
        let out_prec = Precision {
            n: self.prec.n - 1,
            ..self.prec
        };
        let mut out = vec![TruncSeries::zero(out_prec); self.rank()];
        for i in 0..self.rank() {
            let mut acc = v[i].partial_delta();
            for (j, vj) in v.iter().enumerate() {
                let g = vj.substitute_gr(self.prec.p as i64 + 1);
                acc = acc.add(&self.mat[i][j].mul(&g));
            }
            out[i] = acc.reduce_to(out_prec.meet(&acc.precision()));
        }
        out
    }

    /// `gamma_M = I + (q^2 - q) A`, the semilinear endomorphism matrix.
    pub fn gamma_matrix(&self) -> Mat {
        let q2q = TruncSeries::from_qpoly(&IntQPoly::from_i64s(&[0, -1, 1]), self.prec);
        let mut g = self.mat.clone();
        for (i, row) in g.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = e.mul(&q2q);
                if i == j {
                    *e = e.add(&TruncSeries::one(self.prec));
                }
            }
        }
        g
    }

    /// Weak nilpotency: the reduction of A mod `(p, q-1)` is nilpotent
    /// (p odd), or `Abar^2 - Abar` is (p = 2).
    pub fn is_weakly_nilpotent(&self) -> bool {
        let p = self.prec.p;
        let r = self.rank();
        let abar: Vec<Vec<u64>> = self
            .mat
            .iter()
            .map(|row| row.iter().map(|e| e.residue_fp() as u64).collect())
            .collect();
        let target = if p == 2 {
            // Abar^2 - Abar = Abar (Abar - I)
            let mut shifted = abar.clone();
            for i in 0..r {
                shifted[i][i] = (shifted[i][i] + p as u64 - 1) % p as u64;
            }
            fp_mat_mul(&abar, &shifted, p as u64)
        } else {
            abar
        };
        let mut acc = fp_identity(r);
        for _ in 0..r {
            acc = fp_mat_mul(&acc, &target, p as u64);
        }
        acc.iter().flatten().all(|&x| x == 0)
    }

    /// Tensor product: `A = A1 (x) I + gamma_1 (x) A2`.
    pub fn tensor(&self, other: &NablaModule) -> NablaModule {
        let prec = self.prec.meet(&other.prec);
        let r1 = self.rank();
        let r2 = other.rank();
        let g1 = self.gamma_matrix();
        let mut mat = vec![vec![TruncSeries::zero(prec); r1 * r2]; r1 * r2];
        for i1 in 0..r1 {
            for j1 in 0..r1 {
                for i2 in 0..r2 {
                    for j2 in 0..r2 {
                        let row = i1 * r2 + i2;
                        let col = j1 * r2 + j2;
                        let mut acc = TruncSeries::zero(prec);
                        if i2 == j2 {
                            acc = acc.add(&self.mat[i1][j1]);
                        }
                        acc = acc.add(&g1[i1][j1].mul(&other.mat[i2][j2]));
                        mat[row][col] = acc.reduce_to(prec);
                    }
                }
            }
        }
        NablaModule::new(prec, mat)
    }

    /// Dual connection: `D = -(A gamma_M^{-1})^T`.
    pub fn dual(&self) -> Result<NablaModule> {
        let g_inv = mat_invert(&self.gamma_matrix(), self.prec)?;
        let prod = mat_mul(&self.mat, &g_inv, self.prec);
        let r = self.rank();
        let mut d = vec![vec![TruncSeries::zero(self.prec); r]; r];
        for i in 0..r {
            for j in 0..r {
                d[i][j] = prod[j][i].neg();
            }
        }
        Ok(NablaModule::new(self.prec, d))
    }

    /// Internal Hom as `dual (x) target`.
    pub fn hom(&self, other: &NablaModule) -> Result<NablaModule> {
        Ok(self.dual()?.tensor(other))
    }

    /// Pullback along `g_r` (`q -> q^r`): entries transported by `g_r` and
    /// scaled by `(r)_q q^{r-1}`.
    pub fn pullback_gr(&self, r: i64) -> NablaModule {
        let scale = crate::padic::q_analog(self.prec, r).mul(&q_power(self.prec, r - 1));
        let mat = self
            .mat
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| e.substitute_gr(r).mul(&scale))
                    .collect()
            })
            .collect();
        NablaModule::new(self.prec, mat)
    }
}

fn fp_identity(r: usize) -> Vec<Vec<u64>> {
    let mut m = vec![vec![0u64; r]; r];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    m
}

fn fp_mat_mul(a: &[Vec<u64>], b: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let r = a.len();
    let mut out = vec![vec![0u64; r]; r];
    for i in 0..r {
        for k in 0..r {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..r {
                out[i][j] = (out[i][j] + a[i][k] * b[k][j]) % p;
            }
        }
    }
    out
}

pub fn mat_mul(a: &Mat, b: &Mat, prec: Precision) -> Mat {
    let r = a.len();
    let mut out = vec![vec![TruncSeries::zero(prec); r]; r];
    for i in 0..r {
        for j in 0..r {
            let mut acc = TruncSeries::zero(prec);
            for (k, bk) in b.iter().enumerate() {
                acc = acc.add(&a[i][k].mul(&bk[j]));
            }
            out[i][j] = acc;
        }
    }
    out
}

/// Invert a matrix over the truncated ring by Gaussian elimination
/// (pivot entries must be units).
pub fn mat_invert(a: &Mat, prec: Precision) -> Result<Mat> {
    let r = a.len();
    let mut work = a.clone();
    let mut inv: Mat = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    if i == j {
                        TruncSeries::one(prec)
                    } else {
                        TruncSeries::zero(prec)
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..r {
        // find a unit pivot
        let piv = (col..r)
            .find(|&row| work[row][col].invert().is_ok())
            .ok_or(Error::NotAUnit)?;
        work.swap(col, piv);
        inv.swap(col, piv);
        let pinv = work[col][col].invert()?;
        for j in 0..r {
            work[col][j] = work[col][j].mul(&pinv);
            inv[col][j] = inv[col][j].mul(&pinv);
        }
        for row in 0..r {
            if row == col {
                continue;
            }
            let f = work[row][col].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..r {
                work[row][j] = work[row][j].sub(&f.mul(&work[col][j]));
                inv[row][j] = inv[row][j].sub(&f.mul(&inv[col][j]));
            }
        }
    }
    Ok(inv)
}

/// Frobenius structure: the phi-linear map `s -> Phi phi(s) / (p)_q^{pole}`.
/// `Phi` is kept exact so the isogeny condition (determinant equals a
/// `(p)_q`-power times a unit) can be checked by exact division.
#[derive(Clone)]
pub struct FrobStructure {
    pub base: NablaModule,
    pub phi: Vec<Vec<IntQPoly>>,
    pub pole: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrobReport {
    /// per-basis-vector horizontality of the frobenius
    pub horizontal: Vec<bool>,
    /// Lemma-level consequence: the base is weakly nilpotent
    pub weakly_nilpotent: bool,
    /// isogeny condition on the determinant
    pub isogeny_ok: bool,
}

impl FrobReport {
    pub fn pass(&self) -> bool {
        self.horizontal.iter().all(|&b| b) && self.weakly_nilpotent && self.isogeny_ok
    }
}

impl FrobStructure {
    pub fn new(base: NablaModule, phi: Vec<Vec<IntQPoly>>, pole: usize) -> Self {
        assert_eq!(phi.len(), base.rank());
        FrobStructure { base, phi, pole }
    }

    /// Exact-layer isogeny check: `det(Phi) = (p)_q^a * unit`.
    fn isogeny_ok(&self) -> bool {
        let det = int_det(&self.phi);
        if det.is_zero() {
            return false;
        }
        let pq = q_integer(self.base.p() as usize, 1);
        let mut d = det;
        loop {
            match d.euclid_div_exact(&pq) {
                Ok(q) => d = q,
                Err(_) => break,
            }
        }
        // unit in Z_p[[t]]: value at q = 1 prime to p
        let v = d.eval(&BigInt::one());
        !(&v % BigInt::from(self.base.p())).is_zero()
    }

    /// Horizontality `d o phi_M = (p)_q q^{p-1} phi_M o d_M` on basis
    /// vectors, with the pole handled by the twisted-coordinate matrix
    /// `lambda^{-pole} (A - alpha_pole I)`.
    pub fn frobenius_check(&self) -> Result<FrobReport> {
        let prec = self.base.precision();
        let p = self.base.p();
        let r = self.base.rank();
        let lam_inv_pow = TruncSeries::from_qpoly(&lambda_poly(p), prec)
            .invert()?
            .pow(self.pole);
        let alpha_pole = TruncSeries::from_qpoly(&alpha_n(self.pole, p), prec);
        // twisted-coordinate connection matrix
        let mut a_tw = self.base.matrix().clone();
        for (i, row) in a_tw.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                if i == j {
                    *e = e.sub(&alpha_pole);
                }
                *e = e.mul(&lam_inv_pow);
            }
        }
        let twisted = NablaModule::new(prec, a_tw);
        let phi_tr: Mat = self
            .phi
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| TruncSeries::from_qpoly(e, prec))
                    .collect()
            })
            .collect();
        let factor = TruncSeries::from_qpoly(&q_integer(p as usize, 1), prec)
            .mul(&q_power(prec, p as i64 - 1));
        let mut horizontal = Vec::with_capacity(r);
        for j in 0..r {
            // phi_M(e_j) in twisted coordinates is column j of Phi with
            // entries pushed through g_p
            let col: Vec<TruncSeries> = (0..r).map(|i| phi_tr[i][j].clone()).collect();
            let lhs = twisted.apply(&col);
            // d_M(e_j) = column j of A; then phi entrywise, then Phi
            let mut rhs = Vec::with_capacity(r);
            for i in 0..r {
                let mut acc = TruncSeries::zero(prec);
                for l in 0..r {
                    let img = self.base.matrix()[l][j].substitute_gr(p as i64);
                    acc = acc.add(&phi_tr[i][l].mul(&img));
                }
                rhs.push(acc.mul(&factor));
            }
            let ok = lhs
                .iter()
                .zip(&rhs)
                .all(|(a, b)| {
                    let m = a.precision().meet(&b.precision());
                    a.reduce_to(m).sub(&b.reduce_to(m)).is_zero()
                });
            horizontal.push(ok);
        }
        Ok(FrobReport {
            horizontal,
            weakly_nilpotent: self.base.is_weakly_nilpotent(),
            isogeny_ok: self.isogeny_ok(),
        })
    }
}

fn int_det(m: &[Vec<IntQPoly>]) -> IntQPoly {
    let r = m.len();
    if r == 0 {
        return IntQPoly::one();
    }
    if r == 1 {
        return m[0][0].clone();
    }
    // Laplace expansion; ranks here are tiny
    let mut det = IntQPoly::zero();
    for j in 0..r {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<IntQPoly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let mut term = m[0][j].mul(&int_det(&minor));
        if j % 2 == 1 {
            term = term.neg();
        }
        det = det.add(&term);
    }
    det
}

/// Checks on `gamma_M = I + (q^2-q) A`: gamma-semilinearity on a probe
/// vector, reduction to the identity mod `q - 1`, and exact recovery of `A`
/// by the inverse formula.
pub fn gamma_roundtrip(m: &NablaModule, probe: &[TruncSeries]) -> Result<bool> {
    let prec = m.precision();
    let g = m.gamma_matrix();
    // gamma_M(alpha v) = gamma(alpha) gamma_M(v) for a scalar alpha
    let alpha = TruncSeries::from_qpoly(&IntQPoly::from_i64s(&[2, 1, 0, 3]), prec);
    let galpha = alpha.substitute_gr(m.p() as i64 + 1);
    let gv = apply_semilinear(&g, probe, m.p());
    let lhs = apply_semilinear(
        &g,
        &probe.iter().map(|v| v.mul(&alpha)).collect::<Vec<_>>(),
        m.p(),
    );
    for i in 0..m.rank() {
        if !lhs[i].sub(&galpha.mul(&gv[i])).is_zero() {
            return Ok(false);
        }
    }
    // identity mod q-1
    for (i, row) in g.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            if e.coeff(0) != num_bigint::BigUint::from(u64::from(i == j)) {
                return Ok(false);
            }
        }
    }
    // recover A = (gamma_M - I)/(q^2 - q)
    for (i, row) in g.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let mut d = e.clone();
            if i == j {
                d = d.sub(&TruncSeries::one(prec));
            }
            let shifted = d.div_t_exact()?;
            let qinv = TruncSeries::q(shifted.precision()).invert()?;
            let back = shifted.mul(&qinv);
            let want = m.matrix()[i][j].reduce_to(back.precision());
            if back != want {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn apply_semilinear(g: &Mat, v: &[TruncSeries], p: u32) -> Vec<TruncSeries> {
    let r = g.len();
    let mut out = Vec::with_capacity(r);
    for i in 0..r {
        let mut acc = TruncSeries::zero(v[0].precision());
        for (j, vj) in v.iter().enumerate() {
            acc = acc.add(&g[i][j].mul(&vj.substitute_gr(p as i64 + 1)));
        }
        out.push(acc);
    }
    out
}

/// Matrices `B^{(k)}` of the higher divided derivatives of a weakly
/// nilpotent connection: the Taylor matrix generating function
/// `B(w) = sum_k B^{(k)} w{k}` solves `L_Delta(B) = B theta(A)` with
/// `B^{(0)} = I`, by successive approximation over the triangular
/// mod-(p, q-1) structure.
pub struct HyperstratExpansion {
    /// `taylor[k][i][j]`: entry (i,j) of `B^{(k)}`
    pub taylor: Vec<Mat>,
    pub rounds: usize,
}

pub fn hyperstrat_matrices(m: &NablaModule, cap: usize) -> Result<HyperstratExpansion> {
    let p = m.p();
    if cap as u32 > p - 1 {
        return Err(Error::OrderCapTooHigh { cap, p });
    }
    if !m.is_weakly_nilpotent() {
        return Err(Error::NotWeaklyNilpotent);
    }
    let prec = m.precision();
    let r = m.rank();
    let proto = TruncSeries::zero(prec);
    let basis = l_delta_basis_trunc(cap, cap, prec)?;
    let theta_a: Vec<Vec<OmegaElt<TruncSeries>>> = m
        .matrix()
        .iter()
        .map(|row| row.iter().map(|e| taylor_theta(e, p, cap)).collect())
        .collect();

    // B[i][j] as omega elements, seeded with the identity
    let mut b: Vec<Vec<OmegaElt<TruncSeries>>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    if i == j {
                        OmegaElt::one(p, cap, &proto)
                    } else {
                        OmegaElt::zero(p, cap, &proto)
                    }
                })
                .collect()
        })
        .collect();

    let residual = |b: &Vec<Vec<OmegaElt<TruncSeries>>>| -> Vec<Vec<OmegaElt<TruncSeries>>> {
        let mut res = vec![vec![OmegaElt::zero(p, cap, &proto); r]; r];
        for i in 0..r {
            for j in 0..r {
                let mut acc = l_delta_apply(&basis, &b[i][j]);
                for l in 0..r {
                    acc = acc.sub(&b[i][l].mul(&theta_a[l][j]));
                }
                res[i][j] = acc;
            }
        }
        res
    };
    let window_zero = |res: &Vec<Vec<OmegaElt<TruncSeries>>>| -> bool {
        res.iter().flatten().all(|e| {
            (0..cap).all(|k| e.coeff(k).is_zero())
        })
    };

    let max_rounds = (prec.m + prec.n) as usize + 4;
    let mut rounds = 0;
    'outer: for round in 0..=max_rounds {
        rounds = round;
        let res = residual(&b);
        if window_zero(&res) {
            break 'outer;
        }
        if round == max_rounds {
            return Err(Error::NoConvergence(max_rounds));
        }
        // forward sweep: correct B^{(m+1)} from residual order m
        for m_ord in 0..cap {
            let res = residual(&b);
            for i in 0..r {
                for j in 0..r {
                    let c = res[i][j].coeff(m_ord).clone();
                    if c.is_zero() {
                        continue;
                    }
                    let t = b[i][j].coeff(m_ord + 1).sub(&c);
                    b[i][j].set_coeff(m_ord + 1, t);
                }
            }
        }
    }

    let taylor = (0..=cap)
        .map(|k| {
            (0..r)
                .map(|i| (0..r).map(|j| b[i][j].coeff(k).clone()).collect())
                .collect()
        })
        .collect();
    Ok(HyperstratExpansion { taylor, rounds })
}

/// Taylor expansion coefficients `d^{<k>}_M(s)` of a coordinate vector:
/// the divided components of `B(w) theta(s)`.
pub fn hyperstrat_solve(
    m: &NablaModule,
    s: &[TruncSeries],
    cap: usize,
) -> Result<Vec<Vec<TruncSeries>>> {
    assert_eq!(s.len(), m.rank());
    let p = m.p();
    let exp = hyperstrat_matrices(m, cap)?;
    let prec = m.precision();
    let proto = TruncSeries::zero(prec);
    let r = m.rank();
    // theta(s_j) as omega elements
    let theta_s: Vec<OmegaElt<TruncSeries>> =
        s.iter().map(|v| taylor_theta(v, p, cap)).collect();
    let mut rows: Vec<OmegaElt<TruncSeries>> = Vec::with_capacity(r);
    for i in 0..r {
        let mut acc = OmegaElt::zero(p, cap, &proto);
        for (j, ts) in theta_s.iter().enumerate() {
            // B_{ij}(w) theta(s_j)
            let mut bij = OmegaElt::zero(p, cap, &proto);
            for (k, mat) in exp.taylor.iter().enumerate() {
                let mut e = OmegaElt::basis(p, cap, k, &proto);
                e = e.mul_scalar(&mat[i][j]);
                bij = bij.add(&e);
            }
            acc = acc.add(&bij.mul(ts));
        }
        rows.push(acc);
    }
    Ok((0..=cap)
        .map(|k| rows.iter().map(|row| row.coeff(k).clone()).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::omega::{l_of_omega, log_q_omega};

    fn prec(p: u32, m: u32, n: u32) -> Precision {
        Precision::new(p, m, n)
    }

    #[test]
    fn delta_derivation_law_on_basis() {
        // d(q v) = (p)_q v + q^{p+1} d(v) on basis vectors
        for p in [2u32, 3] {
            let pr = prec(p, 3, 5);
            let m = NablaModule::f_example(1, pr);
            let e = vec![TruncSeries::one(pr)];
            let q = TruncSeries::q(pr);
            let lhs = m.apply(&[q.clone()]);
            let d_e = m.apply(&e);
            let out_pr = d_e[0].precision();
            let rhs = TruncSeries::from_qpoly(&q_integer(p as usize, 1), out_pr)
                .add(&q_power(out_pr, p as i64 + 1).mul(&d_e[0]));
            assert!(lhs[0].sub(&rhs).is_zero(), "p = {p}");
        }
    }

    #[test]
    fn f1_scalar_is_dpq() {
        let pr = prec(3, 3, 5);
        let m = NablaModule::f_example(1, pr);
        let want = TruncSeries::from_qpoly(&partial_qp(&q_integer(3, 1), 3), pr);
        assert_eq!(m.matrix()[0][0], want);
    }

    #[test]
    fn bk1_hand_value_at_p2() {
        // A = -(q+2)/(q (3)_q) at p = 2: validate by re-multiplying out
        let pr = prec(2, 4, 6);
        let m = NablaModule::bk_example(1, pr).unwrap();
        let a = &m.matrix()[0][0];
        let out_pr = a.precision();
        let lhs = a
            .mul(&TruncSeries::q(out_pr))
            .mul(&TruncSeries::from_qpoly(&q_integer(3, 1), out_pr));
        let rhs = TruncSeries::from_qpoly(&IntQPoly::from_i64s(&[-2, -1]), out_pr);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn weak_nilpotency_examples() {
        for p in [2u32, 3, 5] {
            let pr = prec(p, 3, 4);
            assert!(NablaModule::trivial(pr, 2).is_weakly_nilpotent());
            assert!(NablaModule::f_example(1, pr).is_weakly_nilpotent());
            assert!(NablaModule::f_example(3, pr).is_weakly_nilpotent());
            assert!(NablaModule::bk_example(1, pr).unwrap().is_weakly_nilpotent());
        }
        // rank-1 module with A = 1 is not weakly nilpotent for p odd
        let pr = prec(3, 3, 4);
        let m = NablaModule::new(pr, vec![vec![TruncSeries::one(pr)]]);
        assert!(!m.is_weakly_nilpotent());
    }

    #[test]
    fn tensor_of_f1_is_alpha_n() {
        // tensor-power scalar of F_1 equals alpha_n, symbolically and at
        // truncation
        for p in [2u32, 3] {
            for n in 2..=3usize {
                let pr = prec(p, 3, 6);
                let f1 = NablaModule::f_example(1, pr);
                let mut t = f1.clone();
                for _ in 1..n {
                    t = t.tensor(&f1);
                }
                let want = TruncSeries::from_qpoly(&alpha_n(n, p), pr);
                assert_eq!(t.matrix()[0][0], want, "p = {p}, n = {n}");
            }
        }
    }

    #[test]
    fn alpha_recursion_and_filtration() {
        // alpha_{n+1} = d_qp((p)_q) + lambda alpha_n, and
        // d_Delta((p)_q^n) = (p)_q^n alpha_n by exact division
        for p in [2u32, 3] {
            let pu = p as usize;
            let dpq = partial_qp(&q_integer(pu, 1), pu);
            for n in 0..4usize {
                let lhs = alpha_n(n + 1, p);
                let rhs = dpq.add(&lambda_poly(p).mul(&alpha_n(n, p)));
                assert_eq!(lhs, rhs, "recursion p = {p} n = {n}");
            }
            for n in 1..4usize {
                // d_Delta((p)_q^n) = (p)_q (n)-fold product rule; exact:
                // (p)_q d_qp((p)_q^n) = (p)_q^n alpha_n
                let pq = q_integer(pu, 1);
                let d = pq.mul(&crate::qcomb::partial_qp(&pq.pow(n), pu));
                let quot = d.euclid_div_exact(&pq.pow(n)).unwrap();
                assert_eq!(quot, alpha_n(n, p), "filtration p = {p} n = {n}");
            }
        }
    }

    #[test]
    fn dual_of_f1_and_involution() {
        let pr = prec(3, 3, 6);
        let f1 = NablaModule::f_example(1, pr);
        let dual = f1.dual().unwrap();
        // -lambda^{-1} d_qp((p)_q)
        let lam_inv = TruncSeries::from_qpoly(&lambda_poly(3), pr).invert().unwrap();
        let want = TruncSeries::from_qpoly(&partial_qp(&q_integer(3, 1), 3), pr)
            .mul(&lam_inv)
            .neg();
        assert_eq!(dual.matrix()[0][0], want);
        // dual of dual recovers the scalar
        let back = dual.dual().unwrap();
        assert_eq!(back.matrix()[0][0], f1.matrix()[0][0]);
    }

    #[test]
    fn bk_tensor_powers() {
        // scalar of BK(1)^{(x) n} = ((p+1)^n/(p+1)_q^n - 1)/(q^2 - q)
        let pr = prec(3, 3, 7);
        let bk1 = NablaModule::bk_example(1, pr).unwrap();
        let t = bk1.tensor(&bk1).tensor(&bk1);
        let want = NablaModule::bk_example(3, pr).unwrap();
        let m = t.precision().meet(&want.precision());
        assert!(t.matrix()[0][0]
            .reduce_to(m)
            .sub(&want.matrix()[0][0].reduce_to(m))
            .is_zero());
    }

    #[test]
    fn pullback_composes_and_fixes_identity() {
        let pr = prec(3, 3, 5);
        let m = NablaModule::f_example(1, pr);
        let id = m.pullback_gr(1);
        assert_eq!(id.matrix()[0][0], m.matrix()[0][0]);
        let a = m.pullback_gr(2).pullback_gr(3);
        let b = m.pullback_gr(6);
        // g_3 after g_2 equals g_6 on entries; compare matrices
        assert_eq!(a.matrix()[0][0], b.matrix()[0][0]);
    }

    #[test]
    fn gamma_roundtrip_examples() {
        let pr = prec(3, 4, 6);
        let probe = vec![TruncSeries::from_qpoly(&IntQPoly::from_i64s(&[1, 4, 2]), pr)];
        // F_n: gamma_M = lambda^n
        for n in 1..=2usize {
            let m = NablaModule::f_example(n, pr);
            assert!(gamma_roundtrip(&m, &probe).unwrap());
            let g = m.gamma_matrix();
            let lam = TruncSeries::from_qpoly(&lambda_poly(3), pr);
            assert_eq!(g[0][0], lam.pow(n), "n = {n}");
        }
        // BK(1): gamma_M = (p+1)/(p+1)_q
        let bk = NablaModule::bk_example(1, pr).unwrap();
        let g = bk.gamma_matrix();
        let want = TruncSeries::from_qpoly(&q_integer(4, 1), bk.precision())
            .invert()
            .unwrap()
            .scale_int(&BigInt::from(4));
        assert_eq!(g[0][0], want);
    }

    #[test]
    fn frobenius_trivial_and_bk() {
        for p in [2u32, 3, 5] {
            let pr = prec(p, 3, 6);
            let triv = FrobStructure::new(
                NablaModule::trivial(pr, 1),
                vec![vec![IntQPoly::one()]],
                0,
            );
            assert!(triv.frobenius_check().unwrap().pass(), "trivial p = {p}");
            let bk = FrobStructure::new(
                NablaModule::bk_example(1, pr).unwrap(),
                vec![vec![IntQPoly::one()]],
                1,
            );
            assert!(bk.frobenius_check().unwrap().pass(), "bk p = {p}");
            // negative control: Phi = q breaks horizontality
            let bad = FrobStructure::new(
                NablaModule::bk_example(1, pr).unwrap(),
                vec![vec![IntQPoly::q()]],
                1,
            );
            assert!(!bad.frobenius_check().unwrap().pass(), "control p = {p}");
        }
    }

    #[test]
    fn hyperstrat_trivial_and_f1() {
        let pr = prec(3, 3, 6);
        // trivial: horizontal basis
        let triv = NablaModule::trivial(pr, 1);
        let out = hyperstrat_solve(&triv, &[TruncSeries::one(pr)], 2).unwrap();
        assert!(out[0][0].sub(&TruncSeries::one(pr)).is_zero());
        assert!(out[1][0].is_zero());
        assert!(out[2][0].is_zero());
        // F_1: theta(s) = s (x) L(w)
        let f1 = NablaModule::f_example(1, pr);
        let exp = hyperstrat_matrices(&f1, 2).unwrap();
        let proto = TruncSeries::zero(pr);
        let l = l_of_omega(3, 2, &proto).unwrap();
        for k in 0..=2usize {
            assert_eq!(exp.taylor[k][0][0], *l.coeff(k), "k = {k}");
        }
    }

    #[test]
    fn hyperstrat_bk_matches_log_series() {
        // theta((q-1) e) = (q - 1 + log_q(1 + (p)_q w / q)) e at p = 5
        let p = 5u32;
        let pr = prec(p, 4, 8);
        let bk = NablaModule::bk_example(1, pr).unwrap();
        let bk_pr = bk.precision();
        let cap = 4usize;
        let s = vec![TruncSeries::t(bk_pr)]; // (q-1) e
        let out = hyperstrat_solve(&bk, &s, cap).unwrap();
        let logw = log_q_omega(cap, bk_pr);
        // order 0: q - 1
        assert!(out[0][0].sub(&TruncSeries::t(bk_pr)).is_zero());
        for k in 1..=cap {
            assert!(
                out[k][0].sub(logw.coeff(k)).is_zero(),
                "log coefficient mismatch at k = {k}"
            );
        }
    }
}
