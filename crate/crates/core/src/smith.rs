//! Smith normal form over the integers, with unimodular transforms.
//!
//! `U * M * V = D` where D is diagonal with d_1 | d_2 | ... and U, V have
//! determinant +-1. Also derived lattice routines: integer kernel, membership
//! in a column span, and invariant factors of finitely presented groups.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::scalar::{Scalar, ScalarKind};

#[derive(Debug, Clone)]
pub struct ZMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

impl ZMat {
    pub fn zero(rows: usize, cols: usize) -> ZMat {
        ZMat { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> ZMat {
        let mut m = ZMat::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::from(1));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> ZMat {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend(row);
        }
        ZMat { rows: r, cols: c, data }
    }

    pub fn from_cols(rows: usize, cols: Vec<Vec<BigInt>>) -> ZMat {
        let c = cols.len();
        let mut m = ZMat::zero(rows, c);
        for (j, col) in cols.into_iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, v) in col.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn mul(&self, other: &ZMat) -> ZMat {
        assert_eq!(self.cols, other.rows);
        let mut out = ZMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn hcat(&self, other: &ZMat) -> ZMat {
        assert_eq!(self.rows, other.rows);
        let mut out = ZMat::zero(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    pub fn transpose(&self) -> ZMat {
        let mut t = ZMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn to_mat(&self, kind: &ScalarKind) -> Result<Mat> {
        let mut m = Mat::zero(kind.clone(), self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = match kind {
                    ScalarKind::Integer => Scalar::Int(self.get(i, j).clone()),
                    ScalarKind::IntegerMod(md) => Scalar::Mod {
                        m: *md,
                        v: self.get(i, j).mod_floor(&BigInt::from(*md)),
                    },
                    ScalarKind::Rational => {
                        Scalar::Rat(num_rational::BigRational::from(self.get(i, j).clone()))
                    }
                    ScalarKind::PrimeField(p) => {
                        let r = self.get(i, j).mod_floor(&BigInt::from(*p));
                        let (_, digits) = r.to_u64_digits();
                        Scalar::Fp { p: *p, v: digits.first().copied().unwrap_or(0) }
                    }
                };
                m.set(i, j, v);
            }
        }
        Ok(m)
    }
}

pub fn mat_to_zmat(m: &Mat) -> Result<ZMat> {
    let mut out = ZMat::zero(m.rows, m.cols);
    for i in 0..m.rows {
        for j in 0..m.cols {
            out.set(i, j, m.get(i, j).as_bigint()?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Snf {
    /// Diagonal entries (nonnegative, d_1 | d_2 | ...), padded with zeros up to min(rows, cols).
    pub diag: Vec<BigInt>,
    pub u: ZMat,
    pub v: ZMat,
    pub d: ZMat,
}

/// Smith normal form with transforms. Entries must be Integer or IntegerMod
/// scalars when called through [`smith_normal_form`].
pub fn snf(m: &ZMat) -> Snf {
    let mut a = m.clone();
    let mut u = ZMat::identity(m.rows);
    let mut v = ZMat::identity(m.cols);
    let n = m.rows.min(m.cols);

    for t in 0..n {
        loop {
            // locate a minimal nonzero entry in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..a.rows {
                for j in t..a.cols {
                    let x = a.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    match &best {
                        None => best = Some((i, j)),
                        Some((bi, bj)) => {
                            if x.abs() < a.get(*bi, *bj).abs() {
                                best = Some((i, j));
                            }
                        }
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            swap_rows(&mut a, &mut u, t, pi);
            swap_cols(&mut a, &mut v, t, pj);

            // clear column t below the pivot, then row t
            let mut dirty = false;
            for i in t + 1..a.rows {
                if a.get(i, t).is_zero() {
                    continue;
                }
                let q = div_round(a.get(i, t), a.get(t, t));
                row_op(&mut a, &mut u, i, t, &q);
                if !a.get(i, t).is_zero() {
                    dirty = true;
                }
            }
            for j in t + 1..a.cols {
                if a.get(t, j).is_zero() {
                    continue;
                }
                let q = div_round(a.get(t, j), a.get(t, t));
                col_op(&mut a, &mut v, j, t, &q);
                if !a.get(t, j).is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            let cleared = (t + 1..a.rows).all(|i| a.get(i, t).is_zero())
                && (t + 1..a.cols).all(|j| a.get(t, j).is_zero());
            if !cleared {
                continue;
            }
            // enforce divisibility of the rest of the block by the pivot
            let piv = a.get(t, t).clone();
            let mut offender = None;
            'outer: for i in t + 1..a.rows {
                for j in t + 1..a.cols {
                    if !a.get(i, j).mod_floor(&piv.abs()).is_zero() {
                        offender = Some(i);
                        break 'outer;
                    }
                }
            }
            match offender {
                Some(i) => {
                    // add row i to row t and restart the pivot step
                    add_row(&mut a, &mut u, t, i);
                }
                None => break,
            }
        }
        if a.get(t, t).is_negative() {
            negate_row(&mut a, &mut u, t);
        }
    }
    let diag: Vec<BigInt> = (0..n).map(|i| a.get(i, i).clone()).collect();
    Snf { diag, u, v, d: a }
}

fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    // quotient minimizing |a - q b|
    let (q, r) = a.div_mod_floor(b);
    if &(r.clone() + r) > &b.abs() {
        q + 1
    } else {
        q
    }
}

fn swap_rows(a: &mut ZMat, u: &mut ZMat, i: usize, j: usize) {
    if i == j {
        return;
    }
    for c in 0..a.cols {
        let x = a.get(i, c).clone();
        let y = a.get(j, c).clone();
        a.set(i, c, y);
        a.set(j, c, x);
    }
    for c in 0..u.cols {
        let x = u.get(i, c).clone();
        let y = u.get(j, c).clone();
        u.set(i, c, y);
        u.set(j, c, x);
    }
}

fn swap_cols(a: &mut ZMat, v: &mut ZMat, i: usize, j: usize) {
    if i == j {
        return;
    }
    for r in 0..a.rows {
        let x = a.get(r, i).clone();
        let y = a.get(r, j).clone();
        a.set(r, i, y);
        a.set(r, j, x);
    }
    for r in 0..v.rows {
        let x = v.get(r, i).clone();
        let y = v.get(r, j).clone();
        v.set(r, i, y);
        v.set(r, j, x);
    }
}

fn row_op(a: &mut ZMat, u: &mut ZMat, i: usize, t: usize, q: &BigInt) {
    for c in 0..a.cols {
        let v = a.get(i, c) - q * a.get(t, c);
        a.set(i, c, v);
    }
    for c in 0..u.cols {
        let v = u.get(i, c) - q * u.get(t, c);
        u.set(i, c, v);
    }
}

fn col_op(a: &mut ZMat, v: &mut ZMat, j: usize, t: usize, q: &BigInt) {
    for r in 0..a.rows {
        let x = a.get(r, j) - q * a.get(r, t);
        a.set(r, j, x);
    }
    for r in 0..v.rows {
        let x = v.get(r, j) - q * v.get(r, t);
        v.set(r, j, x);
    }
}

fn add_row(a: &mut ZMat, u: &mut ZMat, t: usize, i: usize) {
    for c in 0..a.cols {
        let v = a.get(t, c) + a.get(i, c);
        a.set(t, c, v);
    }
    for c in 0..u.cols {
        let v = u.get(t, c) + u.get(i, c);
        u.set(t, c, v);
    }
}

fn negate_row(a: &mut ZMat, u: &mut ZMat, t: usize) {
    for c in 0..a.cols {
        let v = -a.get(t, c);
        a.set(t, c, v);
    }
    for c in 0..u.cols {
        let v = -u.get(t, c);
        u.set(t, c, v);
    }
}

/// Spec-facing wrapper: SNF of a matrix of Integer/IntegerMod scalars.
pub fn smith_normal_form(m: &Mat) -> Result<Snf> {
    match m.kind {
        ScalarKind::Integer | ScalarKind::IntegerMod(_) => Ok(snf(&mat_to_zmat(m)?)),
        _ => Err(Error::UnsupportedScalar(format!(
            "smith normal form needs integral scalars, got {:?}",
            m.kind
        ))),
    }
}

/// Basis (as columns) of { x : M x = 0 } over Z.
pub fn z_kernel(m: &ZMat) -> ZMat {
    let s = snf(m);
    let r = s.diag.iter().filter(|d| !d.is_zero()).count();
    // columns r..cols of V span the kernel
    let mut cols = Vec::new();
    for j in r..m.cols {
        cols.push(s.v.col(j));
    }
    ZMat::from_cols(m.cols, cols)
}

/// Does b lie in the integer column span of M? If so return one solution.
pub fn z_solve(m: &ZMat, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(b.len(), m.rows);
    let s = snf(m);
    // U M V = D, so M x = b  <=>  D y = U b with x = V y
    let ub = {
        let bm = ZMat::from_cols(m.rows, vec![b.to_vec()]);
        s.u.mul(&bm)
    };
    let n = s.diag.len();
    let mut y = vec![BigInt::zero(); m.cols];
    for i in 0..m.rows {
        let rhs = ub.get(i, 0).clone();
        if i < n && !s.diag[i].is_zero() {
            let (q, r) = rhs.div_mod_floor(&s.diag[i]);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !rhs.is_zero() {
            return None;
        }
    }
    let ym = ZMat::from_cols(m.cols, vec![y]);
    Some(s.v.mul(&ym).col(0))
}

/// Invariant factors of coker(M : Z^cols -> Z^rows): torsion entries > 1 plus free rank.
pub fn cokernel_invariants(m: &ZMat) -> (Vec<BigInt>, usize) {
    let s = snf(m);
    let mut torsion = Vec::new();
    let mut rank = m.rows;
    for d in &s.diag {
        if d.is_zero() {
            continue;
        }
        rank -= 1;
        if !d.abs().is_one() {
            torsion.push(d.abs());
        }
    }
    torsion.sort();
    (torsion, rank)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zm(rows: Vec<Vec<i64>>) -> ZMat {
        ZMat::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(BigInt::from).collect())
                .collect(),
        )
    }

    fn check_transforms(m: &ZMat) {
        let s = snf(m);
        let umv = s.u.mul(m).mul(&s.v);
        for i in 0..m.rows {
            for j in 0..m.cols {
                if i == j && i < s.diag.len() {
                    assert_eq!(umv.get(i, j), &s.diag[i]);
                } else {
                    assert!(umv.get(i, j).is_zero());
                }
            }
        }
        for w in s.diag.windows(2) {
            if !w[0].is_zero() {
                assert!(w[1].mod_floor(&w[0]).is_zero() || w[1].is_zero());
            }
        }
    }

    #[test]
    fn diag_2_3_gives_1_6() {
        let m = zm(vec![vec![2, 0], vec![0, 3]]);
        let s = snf(&m);
        assert_eq!(s.diag, vec![BigInt::from(1), BigInt::from(6)]);
        check_transforms(&m);
    }

    #[test]
    fn identity_case() {
        let m = zm(vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        let s = snf(&m);
        assert_eq!(s.diag, vec![BigInt::from(1); 3]);
    }

    #[test]
    fn rank_one_case() {
        // [[2,4],[4,8]] has factors (2, 0): rank 1
        let m = zm(vec![vec![2, 4], vec![4, 8]]);
        let s = snf(&m);
        assert_eq!(s.diag, vec![BigInt::from(2), BigInt::from(0)]);
        check_transforms(&m);
    }

    #[test]
    fn kernel_and_solve() {
        let m = zm(vec![vec![2, 4]]);
        let k = z_kernel(&m);
        assert_eq!(k.cols, 1);
        assert!(m.mul(&k).is_zero());
        assert!(z_solve(&m, &[BigInt::from(6)]).is_some());
        assert!(z_solve(&m, &[BigInt::from(3)]).is_none());
    }

    #[test]
    fn coker_invariants() {
        // Z^2 / <(4,0),(0,2)> = Z/4 + Z/2 -> invariants (2,4)
        let m = zm(vec![vec![4, 0], vec![0, 2]]);
        let (t, r) = cokernel_invariants(&m);
        assert_eq!(t, vec![BigInt::from(2), BigInt::from(4)]);
        assert_eq!(r, 0);
    }
}
