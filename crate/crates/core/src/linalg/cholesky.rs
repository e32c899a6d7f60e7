use super::banded::{check_len, BandedMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

const SYMMETRY_TOL: f64 = 1e-12;

/// Lower-triangular banded factor `L` with `S = L·Lᵀ`.
///
/// Entry `(i, j)` with `0 <= i - j <= kl` is stored at `bands[(i - j) * n + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedCholeskyFactor<T> {
    n: usize,
    kl: usize,
    bands: Vec<T>,
}

impl<T: Real> BandedCholeskyFactor<T> {
    pub(crate) fn from_bands(n: usize, kl: usize, bands: Vec<T>) -> Self {
        debug_assert_eq!(bands.len(), (kl + 1) * n);
        Self { n, kl, bands }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn kl(&self) -> usize {
        self.kl
    }

    /// Entry `L[i][j]`; zero above the diagonal and outside the band.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        if j <= i && i - j <= self.kl && i < self.n {
            self.bands[(i - j) * self.n + j]
        } else {
            T::zero()
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Solves `S·x = b` with the two triangular sweeps.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let y = solve_lower_banded(self, b)?;
        solve_upper_banded(self, &y)
    }

    /// Back substitution `Lᵀ·x = b` restricted to the trailing unknowns
    /// `x[from..]`, written into `x` in place. `b` must already hold the
    /// right-hand side for those rows.
    ///
    /// Rows `from..n` of the triangular system depend only on unknowns with
    /// index `>= from`, so the sweep can stop early.
    pub(crate) fn back_substitute_tail(&self, x: &mut [T], from: usize) {
        let n = self.n;
        for i in (from..n).rev() {
            let mut acc = x[i];
            for k in (i + 1)..(i + self.kl + 1).min(n) {
                acc = acc - self.bands[(k - i) * n + i] * x[k];
            }
            x[i] = acc / self.bands[i];
        }
    }
}

/// Cholesky factorization of a symmetric positive definite banded matrix.
///
/// The factor keeps the bandwidth of `S`. Asymmetry beyond `1e-12` (relative
/// to the larger of the two entries, floor 1) is rejected, as is any pivot
/// that is not comfortably positive.
pub fn banded_cholesky<T: Real>(s: &BandedMatrix<T>) -> Result<BandedCholeskyFactor<T>> {
    let n = s.n();
    let bw = s.kl().max(s.ku());
    let tol = T::lit(SYMMETRY_TOL);
    for i in 0..n {
        for j in (i + 1)..(i + bw + 1).min(n) {
            let (a, b) = (s.get(i, j), s.get(j, i));
            let scale = a.abs().max(b.abs()).max(T::one());
            if (a - b).abs() > tol * scale {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }

    let mut bands = vec![T::zero(); (bw + 1) * n];
    let idx = |i: usize, j: usize| (i - j) * n + j;
    for j in 0..n {
        let k0 = j.saturating_sub(bw);
        let mut diag = s.get(j, j);
        for k in k0..j {
            let l = bands[idx(j, k)];
            diag = diag - l * l;
        }
        let floor = T::epsilon() * T::from_count(bw + 1) * s.get(j, j).abs();
        if !(diag > floor) || !diag.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j });
        }
        let ljj = diag.sqrt();
        bands[idx(j, j)] = ljj;
        for i in (j + 1)..(j + bw + 1).min(n) {
            let mut acc = s.get(i, j);
            for k in i.saturating_sub(bw)..j {
                acc = acc - bands[idx(i, k)] * bands[idx(j, k)];
            }
            bands[idx(i, j)] = acc / ljj;
        }
    }
    Ok(BandedCholeskyFactor { n, kl: bw, bands })
}

/// Forward substitution `L·y = b`.
pub fn solve_lower_banded<T: Real>(l: &BandedCholeskyFactor<T>, b: &[T]) -> Result<Vec<T>> {
    check_len(l.n, b.len())?;
    let n = l.n;
    let mut y = b.to_vec();
    for i in 0..n {
        let mut acc = y[i];
        for k in i.saturating_sub(l.kl)..i {
            acc = acc - l.bands[(i - k) * n + k] * y[k];
        }
        y[i] = acc / l.bands[i];
    }
    Ok(y)
}

/// Back substitution `Lᵀ·x = b`.
pub fn solve_upper_banded<T: Real>(l: &BandedCholeskyFactor<T>, b: &[T]) -> Result<Vec<T>> {
    check_len(l.n, b.len())?;
    let mut x = b.to_vec();
    l.back_substitute_tail(&mut x, 0);
    Ok(x)
}
