use super::banded::{check_len, BandedMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

const PIVOT_RTOL: f64 = 1e-14;

/// Solves `A·x = b` for tridiagonal `A` by forward elimination and back
/// substitution, without pivoting.
///
/// A pivot smaller than `1e-14` times the largest magnitude in its original row
/// is reported as [`Error::SingularPivot`] with the row index.
pub fn thomas_solve<T: Real>(a: &BandedMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    if a.kl() > 1 || a.ku() > 1 {
        return Err(Error::Unsupported {
            what: "a tridiagonal matrix (kl, ku <= 1)",
        });
    }
    let n = a.n();
    check_len(n, b.len())?;
    let tol = T::lit(PIVOT_RTOL);

    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    for i in 0..n {
        let sub = if i > 0 { a.get(i, i - 1) } else { T::zero() };
        let (c_prev, d_prev) = if i > 0 {
            (c[i - 1], d[i - 1])
        } else {
            (T::zero(), T::zero())
        };
        let pivot = a.get(i, i) - sub * c_prev;
        if !(pivot.abs() > tol * a.row_scale(i)) || !pivot.is_finite() {
            return Err(Error::SingularPivot { index: i });
        }
        if i + 1 < n {
            c[i] = a.get(i, i + 1) / pivot;
        }
        d[i] = (b[i] - sub * d_prev) / pivot;
    }

    let mut x = d;
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] = x[i] - c[i] * x[i + 1];
    }
    Ok(x)
}
