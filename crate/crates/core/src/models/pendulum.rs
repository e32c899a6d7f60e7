use crate::error::Result;
use crate::linalg::BandedMatrix;
use crate::nonlinear::{NewtonConfig, NonConvergence};
use crate::scalar::Real;
use crate::specfun::{pendulum_exact, PendulumConstants};

use super::grid::{piecewise_grid, uniform_grid, Grid};
use super::{check_interior_len, rounding_floor, stencils, tridiagonal_from_rows, NonlinearBvp};

/// `θ'' = −sin θ` on `[0, T]` with `θ(0) = α`, `θ(T) = β`.
#[derive(Debug, Clone, PartialEq)]
pub struct PendulumModel<T> {
    grid: Grid<T>,
    alpha: T,
    beta: T,
    constants: Option<PendulumConstants<T>>,
}

impl<T: Real> PendulumModel<T> {
    pub fn new(grid: Grid<T>, alpha: T, beta: T) -> Self {
        Self {
            grid: grid.with_boundary(alpha, beta),
            alpha,
            beta,
            constants: None,
        }
    }

    /// `α = β = 1.2` on `[0, 2π]` with `m` uniform interior points, compared
    /// against the exact swing with the reference constants.
    pub fn canonical(m: usize) -> Result<Self> {
        let grid = uniform_grid(T::zero(), T::TAU(), m)?;
        Ok(Self::new(grid, T::lit(1.2), T::lit(1.2)).with_constants(PendulumConstants::reference()))
    }

    /// Canonical boundary data on the piecewise grid: step 5.3/80 on
    /// `[0, π/2] ∪ [π, 3π/2]` and 3.3/80 on `[π/2, π] ∪ [3π/2, 2π]`.
    pub fn canonical_piecewise() -> Result<Self> {
        let canonical = Self::canonical(1)?;
        canonical.regridded(piecewise_grid(&Self::piecewise_segments())?)
    }

    pub fn piecewise_segments() -> [(T, T, T); 4] {
        let q = T::FRAC_PI_2();
        let coarse = T::lit(5.3 / 80.0);
        let fine = T::lit(3.3 / 80.0);
        let three = T::lit(3.0);
        [
            (T::zero(), q, coarse),
            (q, T::PI(), fine),
            (T::PI(), three * q, coarse),
            (three * q, T::TAU(), fine),
        ]
    }

    pub fn with_constants(mut self, constants: PendulumConstants<T>) -> Self {
        self.constants = Some(constants);
        self
    }

    pub fn constants(&self) -> Option<&PendulumConstants<T>> {
        self.constants.as_ref()
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// `θ⁽⁰⁾(t) = α·cos t + (β − 0.2)·sin t`.
    pub fn initial_value(&self, t: T) -> T {
        self.alpha * t.cos() + (self.beta - T::lit(0.2)) * t.sin()
    }
}

impl<T: Real> NonlinearBvp<T> for PendulumModel<T> {
    fn name(&self) -> &'static str {
        "pendulum"
    }

    fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    fn regridded(&self, grid: Grid<T>) -> Result<Self> {
        Ok(Self {
            grid: grid.with_boundary(self.alpha, self.beta),
            ..self.clone()
        })
    }

    /// `G_i = D²θ_i + sin θ_i`; `J` row `i` is `(w₋, w₀ + cos θ_i, w₊)`.
    fn assemble(&self, theta: &[T]) -> Result<(Vec<T>, BandedMatrix<T>)> {
        check_interior_len(&self.grid, theta)?;
        let full = self.grid.with_boundary_values(theta);
        let st = stencils(&self.grid);
        let mut g = Vec::with_capacity(theta.len());
        let mut rows = Vec::with_capacity(theta.len());
        for (i, s) in st.iter().enumerate() {
            let th = full[i + 1];
            g.push(s.lo * full[i] + s.di * th + s.up * full[i + 2] + th.sin());
            rows.push((s.lo, s.di + th.cos(), s.up));
        }
        Ok((g, tridiagonal_from_rows(&rows)?))
    }

    fn initial_guess(&self) -> Vec<T> {
        self.grid.interior().iter().map(|&t| self.initial_value(t)).collect()
    }

    fn reference(&self, t: T) -> Option<T> {
        self.constants.as_ref().map(|c| pendulum_exact(t, c))
    }

    /// 1e-12, or the rounding floor of the grid when that is larger.
    fn newton_config(&self) -> NewtonConfig {
        let scale = self.alpha.abs().max(self.beta.abs()).max(T::one());
        let tol = rounding_floor(&self.grid, scale).max(1e-12);
        NewtonConfig::new(tol, 50, NonConvergence::Error)
    }
}
