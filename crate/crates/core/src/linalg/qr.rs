use super::banded::BandedMatrix;
use super::cholesky::BandedCholeskyFactor;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Cholesky factor of `XᵀX` computed from a Givens QR of `X`, without
/// forming `XᵀX`.
///
/// `X = QR` gives `XᵀX = RᵀR`; with the rows of `R` sign-flipped to a positive
/// diagonal, `L = Rᵀ` is the Cholesky factor. Its bandwidth is `kl + ku`
/// (capped at `n − 1`). Working on `X` directly keeps the factor accurate when
/// `X` is badly scaled, where the normal equations would square the condition
/// number and lose positive definiteness in rounding.
pub fn normal_factor<T: Real>(x: &BandedMatrix<T>) -> Result<BandedCholeskyFactor<T>> {
    let n = x.n();
    let (kl, ku) = (x.kl(), x.ku());
    let bw = (kl + ku).min(n.saturating_sub(1));
    // Row i of the working matrix spans columns i − kl ..= i + bw.
    let width = kl + bw + 1;
    let mut w = vec![T::zero(); n * width];
    let at = |i: usize, j: usize| i * width + (j + kl - i);
    for i in 0..n {
        for j in x.row_range(i) {
            w[at(i, j)] = x.get(i, j);
        }
    }
    let col_norm: Vec<T> = (0..n)
        .map(|j| {
            let lo = j.saturating_sub(ku);
            let hi = (j + kl + 1).min(n);
            (lo..hi).map(|i| x.get(i, j) * x.get(i, j)).sum::<T>().sqrt()
        })
        .collect();

    for j in 0..n {
        let last_col = (j + bw).min(n - 1);
        for i in (j + 1)..(j + kl + 1).min(n) {
            let b = w[at(i, j)];
            if b == T::zero() {
                continue;
            }
            let a = w[at(j, j)];
            let r = a.hypot(b);
            let (c, s) = (a / r, b / r);
            for col in j..=last_col {
                let top = w[at(j, col)];
                // Row i only reaches column i + ku <= j + bw.
                let bottom = if col <= i + bw { w[at(i, col)] } else { T::zero() };
                w[at(j, col)] = c * top + s * bottom;
                if col <= i + bw {
                    w[at(i, col)] = c * bottom - s * top;
                }
            }
            w[at(i, j)] = T::zero();
        }
        let rjj = w[at(j, j)];
        let floor = T::epsilon() * T::from_count(bw + 1) * col_norm[j];
        if !(rjj.abs() > floor) || !rjj.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j });
        }
        if rjj < T::zero() {
            for col in j..=last_col {
                w[at(j, col)] = -w[at(j, col)];
            }
        }
    }

    let mut bands = vec![T::zero(); (bw + 1) * n];
    for j in 0..n {
        for c in j..(j + bw + 1).min(n) {
            // L[c][j] = R[j][c]
            bands[(c - j) * n + j] = w[at(j, c)];
        }
    }
    Ok(BandedCholeskyFactor::from_bands(n, bw, bands))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{banded_cholesky, dense, normal_equations};

    #[test]
    fn matches_cholesky_of_normal_equations() {
        let x = BandedMatrix::<f64>::tridiagonal(
            &[1.0, -0.5, 2.0, 0.3],
            &[4.0, -3.0, 5.0, 2.5, -6.0],
            &[0.7, 1.0, -1.5, 0.2],
        )
        .unwrap();
        let q = normal_factor(&x).unwrap();
        let c = banded_cholesky(&normal_equations(&x)).unwrap();
        assert_eq!(q.kl(), 2);
        for i in 0..5 {
            for j in 0..5 {
                assert!((q.get(i, j) - c.get(i, j)).abs() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn reproduces_gram_matrix_for_wider_bands() {
        let rows: Vec<Vec<f64>> = vec![
            vec![2.0, 1.0, 0.5, 0.0, 0.0, 0.0],
            vec![-1.0, 3.0, 0.0, 0.2, 0.0, 0.0],
            vec![0.4, 1.0, -2.0, 1.0, 0.3, 0.0],
            vec![0.0, 0.3, 1.0, 5.0, 1.0, -0.4],
            vec![0.0, 0.0, 0.2, -1.0, 2.0, 1.0],
            vec![0.0, 0.0, 0.0, 0.7, 1.0, 3.0],
        ];
        let x = BandedMatrix::from_dense(&rows, 2, 2).unwrap();
        let l = normal_factor(&x).unwrap().to_dense();
        let gram = dense::matmul(&dense::transpose(&rows), &rows);
        let rebuilt = dense::matmul(&l, &dense::transpose(&l));
        for i in 0..6 {
            assert!(l[i][i] > 0.0);
            for j in 0..6 {
                assert!((gram[i][j] - rebuilt[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn survives_scaling_that_breaks_normal_equations() {
        // Rows scaled over nine orders of magnitude: cond(XᵀX) is past 1/ε,
        // cond(X) is not.
        let n = 6;
        let scales = [1.0, 1e3, 1e6, 1e9, 1.0, 1.0];
        let sub: Vec<f64> = (1..n).map(|i| -scales[i]).collect();
        let diag: Vec<f64> = (0..n).map(|i| 2.0 * scales[i]).collect();
        let sup: Vec<f64> = (0..n - 1).map(|i| -scales[i]).collect();
        let x = BandedMatrix::tridiagonal(&sub, &diag, &sup).unwrap();
        let l = normal_factor(&x).unwrap();
        // Rows of L⁻ᵀ and of X⁻¹ have the same norms: both square to (XᵀX)⁻¹.
        let xinv = dense::inverse(&x.to_dense()).unwrap();
        let linv_t = dense::inverse(&dense::transpose(&l.to_dense())).unwrap();
        for i in 0..n {
            let a: f64 = xinv[i].iter().map(|v| v * v).sum();
            let b: f64 = linv_t[i].iter().map(|v| v * v).sum();
            assert!((a - b).abs() <= 1e-6 * a, "row {i}: {a} vs {b}");
        }
    }

    #[test]
    fn singular_input_rejected() {
        let x = BandedMatrix::<f64>::tridiagonal(&[1.0, 1.0], &[1.0, 1.0, 1.0], &[1.0, 1.0]).unwrap();
        let y =
            BandedMatrix::from_dense(&[vec![1.0, 1.0, 0.0], vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]], 1, 1).unwrap();
        assert!(normal_factor(&x).is_ok());
        assert!(matches!(normal_factor(&y), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn one_by_one() {
        let x = BandedMatrix::from_diagonal(&[-3.0f64]).unwrap();
        assert_eq!(normal_factor(&x).unwrap().get(0, 0), 3.0);
    }
}
