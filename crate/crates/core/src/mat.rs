//! Dense exact matrices over [`Scalar`], with field elimination.
//!
//! Matrices are row-major. Field routines (rref, kernel, solve) require a
//! field scalar kind; integer routines live in [`crate::smith`].

use crate::error::{Error, Result};
use crate::scalar::{Scalar, ScalarKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub kind: ScalarKind,
    data: Vec<Scalar>,
}

impl Mat {
    pub fn zero(kind: ScalarKind, rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            data: vec![kind.zero(); rows * cols],
            kind,
        }
    }

    pub fn identity(kind: ScalarKind, n: usize) -> Mat {
        let mut m = Mat::zero(kind.clone(), n, n);
        for i in 0..n {
            m.set(i, i, kind.one());
        }
        m
    }

    pub fn from_rows(kind: ScalarKind, rows: Vec<Vec<Scalar>>) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix");
            data.extend(row);
        }
        Mat { rows: r, cols: c, kind, data }
    }

    pub fn from_cols(kind: ScalarKind, rows: usize, cols: Vec<Vec<Scalar>>) -> Mat {
        let c = cols.len();
        let r = rows;
        let mut m = Mat::zero(kind, r, c);
        for (j, col) in cols.into_iter().enumerate() {
            assert_eq!(col.len(), r, "ragged matrix");
            for (i, v) in col.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zero(self.kind.clone(), self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows || self.kind != other.kind {
            return Err(Error::Internal(format!(
                "matrix product shape mismatch {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Mat::zero(self.kind.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(i, j).add(&a.mul(b)?)?;
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Mat) -> Result<Mat> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Internal("matrix sum shape mismatch".into()));
        }
        let mut out = self.clone();
        for i in 0..self.rows * self.cols {
            out.data[i] = out.data[i].add(&other.data[i])?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Mat {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = v.neg();
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> Result<Mat> {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = v.mul(s)?;
        }
        Ok(out)
    }

    /// Horizontal concatenation [self | other].
    pub fn hcat(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        let mut out = Mat::zero(self.kind.clone(), self.rows, self.cols + other.cols);
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

    pub fn vcat(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols);
        let mut rows = Vec::with_capacity(self.rows + other.rows);
        for i in 0..self.rows {
            rows.push((0..self.cols).map(|j| self.get(i, j).clone()).collect());
        }
        for i in 0..other.rows {
            rows.push((0..other.cols).map(|j| other.get(i, j).clone()).collect());
        }
        Mat::from_rows(self.kind.clone(), rows)
    }

    pub fn apply(&self, v: &[Scalar]) -> Result<Vec<Scalar>> {
        if v.len() != self.cols {
            return Err(Error::Internal("matrix apply shape mismatch".into()));
        }
        let mut out = vec![self.kind.zero(); self.rows];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() || v[j].is_zero() {
                    continue;
                }
                out[i] = out[i].add(&a.mul(&v[j])?)?;
            }
        }
        Ok(out)
    }
}

/// Result of row reduction: row echelon form together with pivot columns.
pub struct Rref {
    pub mat: Mat,
    pub pivots: Vec<usize>,
}

/// Reduced row echelon form over a field.
pub fn rref(m: &Mat) -> Result<Rref> {
    if !m.kind.is_field() {
        return Err(Error::UnsupportedScalar(
            "row reduction requires a field".into(),
        ));
    }
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        // prefer a unit-like pivot to keep entries small
        let mut piv = None;
        for i in r..a.rows {
            if !a.get(i, c).is_zero() {
                piv = Some(i);
                if a.get(i, c).is_one() {
                    break;
                }
            }
        }
        let Some(p) = piv else { continue };
        if p != r {
            for j in 0..a.cols {
                let x = a.get(r, j).clone();
                let y = a.get(p, j).clone();
                a.set(r, j, y);
                a.set(p, j, x);
            }
        }
        let inv = a.get(r, c).inv()?;
        for j in c..a.cols {
            let v = a.get(r, j).mul(&inv)?;
            a.set(r, j, v);
        }
        for i in 0..a.rows {
            if i == r || a.get(i, c).is_zero() {
                continue;
            }
            let f = a.get(i, c).clone();
            for j in c..a.cols {
                let v = a.get(i, j).sub(&a.get(r, j).mul(&f)?)?;
                a.set(i, j, v);
            }
        }
        pivots.push(c);
        r += 1;
    }
    Ok(Rref { mat: a, pivots })
}

pub fn rank(m: &Mat) -> Result<usize> {
    Ok(rref(m)?.pivots.len())
}

/// Basis of the right kernel, as columns of a matrix.
pub fn kernel_basis(m: &Mat) -> Result<Mat> {
    let Rref { mat: a, pivots } = rref(m)?;
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    let mut out = Mat::zero(m.kind.clone(), m.cols, free.len());
    for (k, &fc) in free.iter().enumerate() {
        out.set(fc, k, m.kind.one());
        for (r, &pc) in pivots.iter().enumerate() {
            out.set(pc, k, a.get(r, fc).neg());
        }
    }
    Ok(out)
}

/// Solve m x = b; returns None when inconsistent.
pub fn solve(m: &Mat, b: &[Scalar]) -> Result<Option<Vec<Scalar>>> {
    let bm = Mat::from_cols(m.kind.clone(), m.rows, vec![b.to_vec()]);
    let aug = m.hcat(&bm);
    let Rref { mat: a, pivots } = rref(&aug)?;
    if pivots.contains(&m.cols) {
        return Ok(None);
    }
    let mut x = vec![m.kind.zero(); m.cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = a.get(r, m.cols).clone();
    }
    Ok(Some(x))
}

/// Solve m X = B columnwise; None when any column is inconsistent.
pub fn solve_many(m: &Mat, b: &Mat) -> Result<Option<Mat>> {
    let mut cols = Vec::with_capacity(b.cols);
    for j in 0..b.cols {
        match solve(m, &b.col(j))? {
            Some(x) => cols.push(x),
            None => return Ok(None),
        }
    }
    Ok(Some(Mat::from_cols(m.kind.clone(), m.cols, cols)))
}

/// A basis for the column space, as column indices into `m`.
pub fn column_space_pivots(m: &Mat) -> Result<Vec<usize>> {
    Ok(rref(m)?.pivots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Scalar {
        ScalarKind::Rational.from_i64(n)
    }

    #[test]
    fn rref_rank_kernel() {
        let m = Mat::from_rows(
            ScalarKind::Rational,
            vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)]],
        );
        assert_eq!(rank(&m).unwrap(), 1);
        let k = kernel_basis(&m).unwrap();
        assert_eq!(k.cols, 2);
        assert!(m.mul(&k).unwrap().is_zero());
    }

    #[test]
    fn solve_consistent_and_not() {
        let m = Mat::from_rows(ScalarKind::Rational, vec![vec![q(2), q(0)], vec![q(0), q(3)]]);
        let x = solve(&m, &[q(4), q(9)]).unwrap().unwrap();
        assert_eq!(x, vec![q(2), q(3)]);
        let m2 = Mat::from_rows(ScalarKind::Rational, vec![vec![q(1), q(1)], vec![q(2), q(2)]]);
        assert!(solve(&m2, &[q(0), q(1)]).unwrap().is_none());
    }

    #[test]
    fn prime_field_elimination() {
        let k = ScalarKind::PrimeField(5);
        let m = Mat::from_rows(k.clone(), vec![vec![k.from_i64(2), k.from_i64(1)]]);
        let ker = kernel_basis(&m).unwrap();
        assert_eq!(ker.cols, 1);
        assert!(m.mul(&ker).unwrap().is_zero());
    }
}
