//! Exact integer and rational linear algebra.
//!
//! Everything here works over `BigInt`/`BigRational`. The Hermite form is
//! row-style (see [`hnf`]) and the Smith form has a nonnegative diagonal.

mod matrix;
mod normal_form;

pub use matrix::{dot, is_unimodular, IntMatrix, RatMatrix};
pub use normal_form::{hnf, is_primitive, kernel_saturated, rank, row_basis, smith_diagonal, snf};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Determinant by fraction-free Bareiss elimination.
pub fn det(m: &IntMatrix) -> Result<BigInt> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut a = m.clone();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a.get(k, k).is_zero() {
            match (k + 1..n).find(|&r| !a.get(r, k).is_zero()) {
                Some(r) => {
                    a.swap_rows(k, r);
                    negate = !negate;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        let akk = a.get(k, k).clone();
        for i in k + 1..n {
            let aik = a.get(i, k).clone();
            for j in k + 1..n {
                let v = (a.get(i, j) * &akk - &aik * a.get(k, j)) / &prev;
                a.set(i, j, v);
            }
            a.set(i, k, BigInt::zero());
        }
        prev = akk;
    }
    let d = a.get(n - 1, n - 1).clone();
    Ok(if negate { -d } else { d })
}

/// Exact solution of `A x = b` for square nonsingular `A`; `b` may have
/// several columns.
pub fn solve_rational(a: &IntMatrix, b: &IntMatrix) -> Result<RatMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "system has {} rows, right-hand side {}",
            a.rows(),
            b.rows()
        )));
    }
    let n = a.rows();
    let k = b.cols();
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            a.row(i)
                .iter()
                .chain(b.row(i))
                .map(|x| BigRational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero()).ok_or(Error::Singular)?;
        m.swap(c, p);
        let piv = m[c][c].clone();
        for v in m[c].iter_mut() {
            *v /= &piv;
        }
        for r in 0..n {
            if r == c || m[r][c].is_zero() {
                continue;
            }
            let f = m[r][c].clone();
            for j in c..n + k {
                let d = &f * &m[c][j];
                m[r][j] -= d;
            }
        }
    }
    RatMatrix::from_rows(m.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Characteristic polynomial `det(xI - M)` by Faddeev-LeVerrier.
/// Coefficients are returned from the constant term up; the leading
/// coefficient is 1.
pub fn char_poly(m: &IntMatrix) -> Result<Vec<BigInt>> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    let mut mk = IntMatrix::zeros(n, n);
    let ident = IntMatrix::identity(n);
    for k in 1..=n {
        let prev = coeffs[n - k + 1].clone();
        let t = &(m * &mk) + &ident.scale(&prev);
        mk = t;
        let am = m * &mk;
        let c = -(am.trace()) / BigInt::from(k);
        coeffs[n - k] = c;
    }
    Ok(coeffs)
}
