use crate::error::{Error, Result};
use crate::scalar::Real;

/// Square matrix with `kl` sub-diagonals and `ku` super-diagonals.
///
/// Storage is one dense row per diagonal: diagonal offset `d = ku + i - j`
/// lives in row `d`, indexed by column `j`, so entry `(i, j)` sits at
/// `bands[(ku + i - j) * n + j]`. Slots that fall outside the matrix (the
/// top-left corner of super-diagonal rows and the bottom-right corner of
/// sub-diagonal rows) are kept at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    bands: Vec<T>,
}

impl<T: Real> BandedMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Result<Self> {
        if n == 0 || kl >= n || ku >= n {
            return Err(Error::InvalidBandShape { n, kl, ku });
        }
        Ok(Self {
            n,
            kl,
            ku,
            bands: vec![T::zero(); (kl + ku + 1) * n],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, 0, 0)?;
        m.bands.iter_mut().for_each(|x| *x = T::one());
        Ok(m)
    }

    pub fn from_diagonal(diag: &[T]) -> Result<Self> {
        let mut m = Self::zeros(diag.len(), 0, 0)?;
        m.bands.copy_from_slice(diag);
        Ok(m)
    }

    /// Builds a tridiagonal matrix from its sub-diagonal (`a[i] = A[i+1][i]`),
    /// diagonal and super-diagonal (`c[i] = A[i][i+1]`).
    ///
    /// A 1×1 input (empty `sub`/`sup`) produces a matrix with zero bandwidth.
    pub fn tridiagonal(sub: &[T], diag: &[T], sup: &[T]) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidBandShape { n, kl: 1, ku: 1 });
        }
        for side in [sub, sup] {
            if side.len() + 1 != n {
                return Err(Error::DimensionMismatch {
                    expected: n - 1,
                    got: side.len(),
                });
            }
        }
        if n == 1 {
            return Self::from_diagonal(diag);
        }
        let mut m = Self::zeros(n, 1, 1)?;
        for i in 0..n {
            m.set(i, i, diag[i]);
            if i + 1 < n {
                m.set(i + 1, i, sub[i]);
                m.set(i, i + 1, sup[i]);
            }
        }
        Ok(m)
    }

    pub fn from_dense(rows: &[Vec<T>], kl: usize, ku: usize) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n, kl, ku)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for j in m.row_range(i) {
                m.set(i, j, row[j]);
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn kl(&self) -> usize {
        self.kl
    }

    #[inline]
    pub fn ku(&self) -> usize {
        self.ku
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && i + self.ku >= j
    }

    /// Column indices with stored entries in row `i`.
    #[inline]
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n)
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        (self.ku + i - j) * self.n + j
    }

    /// Entry `(i, j)`; zero outside the band.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        if self.in_band(i, j) {
            self.bands[self.offset(i, j)]
        } else {
            T::zero()
        }
    }

    /// Sets entry `(i, j)`.
    ///
    /// # Panics
    /// If `(i, j)` lies outside the stored band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        assert!(
            self.in_band(i, j),
            "entry ({i}, {j}) outside band (n={}, kl={}, ku={})",
            self.n,
            self.kl,
            self.ku
        );
        let k = self.offset(i, j);
        self.bands[k] = value;
    }

    pub fn scale(&mut self, factor: T) {
        self.bands.iter_mut().for_each(|x| *x = *x * factor);
    }

    pub fn scaled(mut self, factor: T) -> Self {
        self.scale(factor);
        self
    }

    pub fn scale_row(&mut self, i: usize, factor: T) {
        for j in self.row_range(i) {
            let k = self.offset(i, j);
            self.bands[k] = self.bands[k] * factor;
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Largest absolute entry in row `i`.
    pub fn row_scale(&self, i: usize) -> T {
        self.row_range(i).map(|j| self.get(i, j).abs()).fold(T::zero(), T::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn matvec(&self, v: &[T]) -> Result<Vec<T>> {
        band_matvec(self, v)
    }

    /// Transposed product `Aᵀ·v`.
    pub fn matvec_transpose(&self, v: &[T]) -> Result<Vec<T>> {
        check_len(self.n, v.len())?;
        let mut out = vec![T::zero(); self.n];
        for i in 0..self.n {
            for j in self.row_range(i) {
                out[j] = out[j] + self.get(i, j) * v[i];
            }
        }
        Ok(out)
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// `A·v`, touching only stored bands.
pub fn band_matvec<T: Real>(a: &BandedMatrix<T>, v: &[T]) -> Result<Vec<T>> {
    check_len(a.n, v.len())?;
    Ok((0..a.n)
        .map(|i| a.row_range(i).fold(T::zero(), |acc, j| acc + a.get(i, j) * v[j]))
        .collect())
}

/// Forms `XᵀX` for a square banded `X`.
///
/// The result has bandwidth `kl + ku` on both sides (capped at `n - 1`). Only
/// the upper triangle is computed; the lower triangle is a copy, so the result
/// is symmetric bit for bit.
pub fn normal_equations<T: Real>(x: &BandedMatrix<T>) -> BandedMatrix<T> {
    let n = x.n;
    let bw = (x.kl + x.ku).min(n - 1);
    let mut s = BandedMatrix::zeros(n, bw, bw).expect("bandwidth capped below n");
    for i in 0..n {
        for j in i..(i + bw + 1).min(n) {
            // (XᵀX)_ij = Σ_k X_ki X_kj over rows k where both columns are stored.
            let lo = j.saturating_sub(x.ku);
            let hi = (i + x.kl + 1).min(n);
            let mut acc = T::zero();
            for k in lo..hi {
                acc = acc + x.get(k, i) * x.get(k, j);
            }
            s.set(i, j, acc);
            if i != j {
                s.set(j, i, acc);
            }
        }
    }
    s
}
