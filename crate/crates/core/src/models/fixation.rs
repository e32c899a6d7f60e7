use crate::bayes::{credible_band, PosteriorBand, PosteriorConfig, RegressionProblem};
use crate::error::{Error, Result};
use crate::linalg::{band_matvec, thomas_solve, BandedMatrix};
use crate::randgen::RngState;
use crate::scalar::Real;

// Crank–Nicolson coefficients of the fixation equation on the canonical mesh,
// in units of α_n.
const SUB: f64 = 249.25;
const SUP: f64 = 250.75;
const DIAG: f64 = 500.0;
const BOUNDARY: f64 = 501.5;

/// Probability of fixation `u(x, t)` of an allele at initial frequency `x`,
/// with `u(0, t) = 0`, `u(1, t) = 1`, stepped one generation at a time by
/// `A·u^{m+1} = B·u^m + b`.
///
/// The scheme's coefficients are fixed to the canonical mesh
/// `Δx = 0.0005`, `N = 2000`, `Δt = 1`, `M = 6000`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixationModel<T> {
    dx: T,
    n: usize,
    m: usize,
}

impl<T: Real> Default for FixationModel<T> {
    fn default() -> Self {
        Self::canonical()
    }
}

impl<T: Real> FixationModel<T> {
    pub fn canonical() -> Self {
        Self {
            dx: T::lit(0.0005),
            n: 2000,
            m: 6000,
        }
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    /// Space steps `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Generations covered by the mesh, `M`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// `α_k = 10⁻³·k·(1 − 0.0005k)`.
    pub fn alpha(&self, k: usize) -> T {
        let k = T::from_count(k);
        T::lit(1e-3) * k * (T::one() - T::lit(0.0005) * k)
    }

    /// Interior frequencies `kΔx`, `k = 1..N−1`.
    pub fn frequencies(&self) -> Vec<T> {
        (1..self.n).map(|k| T::from_count(k) * self.dx).collect()
    }

    /// Population size and selection coefficient implied by the coefficients:
    /// the diffusion weight is `1/(16·S·Δx²)` and the drift weight `s/(8Δx)`.
    pub fn derived_parameters(&self) -> (T, T) {
        let two = T::lit(2.0);
        let diffusion = T::lit(SUB + SUP) / two;
        let drift = T::lit(SUP - SUB) / two;
        let s_pop = T::one() / (T::lit(16.0) * self.dx * self.dx * diffusion);
        let s = T::lit(8.0) * self.dx * drift;
        (s_pop, s)
    }

    /// `A`, `B` and the constant boundary vector `b`.
    pub fn assemble(&self) -> Result<(BandedMatrix<T>, BandedMatrix<T>, Vec<T>)> {
        let n = self.n;
        let (sub, sup, diag) = (T::lit(SUB), T::lit(SUP), T::lit(DIAG));
        let alpha: Vec<T> = (1..n).map(|k| self.alpha(k)).collect();
        let a = BandedMatrix::tridiagonal(
            &alpha[1..].iter().map(|&al| -sub * al).collect::<Vec<_>>(),
            &alpha.iter().map(|&al| T::one() + diag * al).collect::<Vec<_>>(),
            &alpha[..n - 2].iter().map(|&al| -sup * al).collect::<Vec<_>>(),
        )?;
        let b_mat = BandedMatrix::tridiagonal(
            &alpha[1..].iter().map(|&al| sub * al).collect::<Vec<_>>(),
            &alpha.iter().map(|&al| T::one() - diag * al).collect::<Vec<_>>(),
            &alpha[..n - 2].iter().map(|&al| sup * al).collect::<Vec<_>>(),
        )?;
        let mut b = vec![T::zero(); n - 1];
        b[n - 2] = T::lit(BOUNDARY) * alpha[n - 2];
        Ok((a, b_mat, b))
    }

    /// `u⁰`: zero at every interior frequency.
    pub fn initial(&self) -> Vec<T> {
        vec![T::zero(); self.n - 1]
    }

    /// `u⁰, u¹, …, u^generations`.
    pub fn history(&self, generations: usize) -> Result<Vec<Vec<T>>> {
        if generations > self.m {
            return Err(Error::InvalidConfig(format!(
                "{generations} generations exceed M = {}",
                self.m
            )));
        }
        let (a, b_mat, b) = self.assemble()?;
        let mut out = Vec::with_capacity(generations + 1);
        out.push(self.initial());
        for g in 0..generations {
            let next = thomas_solve(&a, &self.rhs_with(&b_mat, &b, &out[g])?)?;
            out.push(next);
        }
        Ok(out)
    }

    /// `u^generations`.
    pub fn run(&self, generations: usize) -> Result<Vec<T>> {
        Ok(self.history(generations)?.pop().expect("history holds u⁰"))
    }

    fn rhs_with(&self, b_mat: &BandedMatrix<T>, b: &[T], u: &[T]) -> Result<Vec<T>> {
        let mut y = band_matvec(b_mat, u)?;
        y.iter_mut().zip(b).for_each(|(yi, &bi)| *yi = *yi + bi);
        Ok(y)
    }

    /// `X = A`, `Y = B·u_prev + b`, for the values one generation after `u_prev`.
    pub fn regression(&self, u_prev: &[T]) -> Result<RegressionProblem<T>> {
        let (a, b_mat, b) = self.assemble()?;
        let y = self.rhs_with(&b_mat, &b, u_prev)?;
        RegressionProblem::new(a, y)
    }

    /// Credible band for the generation after `u_prev`, clamped to `[0, 1]`.
    pub fn band(&self, u_prev: &[T], cfg: &PosteriorConfig, rng: &RngState) -> Result<PosteriorBand<T>> {
        let cfg = cfg.clone().with_clamp(0.0, 1.0);
        credible_band(&self.regression(u_prev)?, &cfg, rng)
    }

    /// Interior index of `p0` if it sits on a mesh node.
    pub fn node_index(&self, p0: T) -> Option<usize> {
        let k = (p0 / self.dx).round();
        let on_node = (p0 - k * self.dx).abs() <= T::lit(1e-9) * self.dx;
        let k = k.to_usize()?;
        (on_node && k >= 1 && k < self.n).then(|| k - 1)
    }

    /// `u(p0)` from interior values `u`, linear between mesh nodes and using
    /// the boundary values 0 and 1 at the ends.
    pub fn value_at(&self, u: &[T], p0: T) -> Result<T> {
        if !(p0 >= T::zero() && p0 <= T::one()) {
            return Err(Error::Domain(format!("frequency {p0} outside [0, 1]")));
        }
        let full: Vec<T> = std::iter::once(T::zero())
            .chain(u.iter().copied())
            .chain(std::iter::once(T::one()))
            .collect();
        let pos = p0 / self.dx;
        let k = pos.floor().to_usize().unwrap_or(0).min(self.n - 1);
        let frac = pos - T::from_count(k);
        Ok(full[k] + frac * (full[k + 1] - full[k]))
    }
}
