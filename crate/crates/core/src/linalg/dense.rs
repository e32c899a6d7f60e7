//! Small dense routines, kept as independent reference implementations for
//! checking the banded solvers. O(n³); intended for systems of a few dozen
//! unknowns.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn matmul<T: Real>(a: &[Vec<T>], b: &[Vec<T>]) -> Vec<Vec<T>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(T::zero(), |acc, k| acc + row[k] * b[k][j]))
                .collect()
        })
        .collect()
}

pub fn matvec<T: Real>(a: &[Vec<T>], v: &[T]) -> Vec<T> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(T::zero(), |acc, (&x, &y)| acc + x * y))
        .collect()
}

pub fn transpose<T: Real>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

/// Gaussian elimination with partial pivoting.
pub fn solve<T: Real>(a: &[Vec<T>], b: &[T]) -> Result<Vec<T>> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let mut m: Vec<Vec<T>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[piv][col] == T::zero() {
            return Err(Error::SingularPivot { index: col });
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            if f != T::zero() {
                for c in col..n {
                    let v = m[col][c];
                    m[r][c] = m[r][c] - f * v;
                }
                rhs[r] = rhs[r] - f * rhs[col];
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let s = ((i + 1)..n).fold(rhs[i], |acc, k| acc - m[i][k] * x[k]);
        x[i] = s / m[i][i];
    }
    Ok(x)
}

/// Dense Cholesky–Banachiewicz factorization.
pub fn cholesky<T: Real>(a: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let n = a.len();
    let mut l = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s = (0..j).fold(a[i][j], |acc, k| acc - l[i][k] * l[j][k]);
            if i == j {
                if !(s > T::zero()) {
                    return Err(Error::NotPositiveDefinite { index: i });
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Solves `L·x = b` (`upper = false`) or `Lᵀ·x = b` (`upper = true`) for dense lower-triangular `L`.
pub fn triangular_solve<T: Real>(l: &[Vec<T>], b: &[T], upper: bool) -> Vec<T> {
    let n = l.len();
    let mut x = vec![T::zero(); n];
    if upper {
        for i in (0..n).rev() {
            let s = ((i + 1)..n).fold(b[i], |acc, k| acc - l[k][i] * x[k]);
            x[i] = s / l[i][i];
        }
    } else {
        for i in 0..n {
            let s = (0..i).fold(b[i], |acc, k| acc - l[i][k] * x[k]);
            x[i] = s / l[i][i];
        }
    }
    x
}

/// Dense inverse via column-by-column solves.
pub fn inverse<T: Real>(a: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        cols.push(solve(a, &e)?);
    }
    Ok(transpose(&cols))
}
