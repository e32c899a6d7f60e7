use crate::error::{Error, Result};
use crate::linalg::BandedMatrix;
use crate::nonlinear::{NewtonConfig, NonConvergence};
use crate::scalar::Real;

use super::grid::{uniform_grid, Grid};
use super::{check_interior_len, rounding_floor, stencils, tridiagonal_from_rows, NonlinearBvp};

/// `δu'' + u(u' − 1) = 0` on `[a, b]`, `u(a) = γ₁`, `u(b) = γ₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorLayerModel<T> {
    grid: Grid<T>,
    delta: T,
    gamma1: T,
    gamma2: T,
}

impl<T: Real> InteriorLayerModel<T> {
    pub fn new(grid: Grid<T>, delta: T, gamma1: T, gamma2: T) -> Result<Self> {
        if !(delta > T::zero()) {
            return Err(Error::InvalidConfig(format!("delta must be positive, got {delta}")));
        }
        Ok(Self {
            grid: grid.with_boundary(gamma1, gamma2),
            delta,
            gamma1,
            gamma2,
        })
    }

    /// `[0, 1]`, `γ₁ = −1`, `γ₂ = 1.5`, `m` uniform interior points.
    pub fn canonical(delta: T, m: usize) -> Result<Self> {
        Self::new(uniform_grid(T::zero(), T::one(), m)?, delta, -T::one(), T::lit(1.5))
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// `w₀ = ½(a − b + γ₂ − γ₁)`.
    pub fn w0(&self) -> T {
        (self.grid.lo() - self.grid.hi() + self.gamma2 - self.gamma1) / T::lit(2.0)
    }

    /// `x̄ = ½(a + b − γ₁ − γ₂)`, the layer location.
    pub fn x_bar(&self) -> T {
        (self.grid.lo() + self.grid.hi() - self.gamma1 - self.gamma2) / T::lit(2.0)
    }

    /// Matched-asymptotics approximation `x − x̄ + w₀·tanh(w₀(x − x̄)/2δ)`.
    pub fn perturbation_approx(&self, x: T) -> T {
        let w0 = self.w0();
        let s = x - self.x_bar();
        s + w0 * (w0 * s / (T::lit(2.0) * self.delta)).tanh()
    }
}

impl<T: Real> NonlinearBvp<T> for InteriorLayerModel<T> {
    fn name(&self) -> &'static str {
        "interior-layer"
    }

    fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    fn regridded(&self, grid: Grid<T>) -> Result<Self> {
        Self::new(grid, self.delta, self.gamma1, self.gamma2)
    }

    /// `G_i = δ·D²U_i + U_i(D¹U_i − 1)`; `J` row `i` is
    /// `(δw₋ − U_i/s, δw₀ + D¹U_i − 1, δw₊ + U_i/s)` with `s = h₋ + h₊`.
    fn assemble(&self, u: &[T]) -> Result<(Vec<T>, BandedMatrix<T>)> {
        check_interior_len(&self.grid, u)?;
        let full = self.grid.with_boundary_values(u);
        let d = self.delta;
        let mut g = Vec::with_capacity(u.len());
        let mut rows = Vec::with_capacity(u.len());
        for (i, s) in stencils(&self.grid).iter().enumerate() {
            let (um, ui, up) = (full[i], full[i + 1], full[i + 2]);
            let d1 = (up - um) / s.span;
            g.push(d * (s.lo * um + s.di * ui + s.up * up) + ui * (d1 - T::one()));
            let adv = ui / s.span;
            rows.push((d * s.lo - adv, d * s.di + d1 - T::one(), d * s.up + adv));
        }
        Ok((g, tridiagonal_from_rows(&rows)?))
    }

    fn initial_guess(&self) -> Vec<T> {
        self.grid
            .interior()
            .iter()
            .map(|&x| self.perturbation_approx(x))
            .collect()
    }

    fn reference(&self, x: T) -> Option<T> {
        Some(self.perturbation_approx(x))
    }

    /// 500 iterations, returning the last iterate if the tolerance is not met.
    /// The residual carries a `δ/h²` factor, so its rounding floor sits near
    /// 1e-12 already on a 200-point grid. The tolerance is 1e-10 or that
    /// floor, whichever is larger.
    fn newton_config(&self) -> NewtonConfig {
        let scale = self.gamma1.abs().max(self.gamma2.abs()).max(T::one()) * self.delta;
        let tol = rounding_floor(&self.grid, scale).max(1e-10);
        NewtonConfig::new(tol, 500, NonConvergence::ReturnLastIterate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{reference_values, solve_bvp};
    use crate::scalar::sup_norm;

    #[test]
    fn layer_constants() {
        let m = InteriorLayerModel::<f64>::canonical(0.01, 10).unwrap();
        assert!((m.w0() - 0.75).abs() < 1e-15);
        assert!((m.x_bar() - 0.25).abs() < 1e-15);
        assert_eq!(m.perturbation_approx(0.25), 0.0);
        assert!((m.perturbation_approx(1.0) - 1.5).abs() < 1e-6);
        assert!((m.perturbation_approx(0.0) + 1.0).abs() < 1e-6);
        assert!(InteriorLayerModel::canonical(0.0, 10).is_err());
    }

    #[test]
    fn jacobian_rows_on_uniform_grid() {
        let m = InteriorLayerModel::<f64>::canonical(0.01, 200).unwrap();
        let h = 1.0 / 201.0;
        let u = m.initial_guess();
        let (_, j) = m.assemble(&u).unwrap();
        let i = 60;
        let d = 0.01;
        assert!((j.get(i, i - 1) - (d / (h * h) - u[i] / (2.0 * h))).abs() < 1e-8);
        assert!((j.get(i, i + 1) - (d / (h * h) + u[i] / (2.0 * h))).abs() < 1e-8);
        let d1 = (u[i + 1] - u[i - 1]) / (2.0 * h);
        assert!((j.get(i, i) - (-2.0 * d / (h * h) + d1 - 1.0)).abs() < 1e-8);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let g = Grid::<f64>::from_nodes(vec![0.0, 0.1, 0.15, 0.3, 0.5, 0.55, 1.0]).unwrap();
        let m = InteriorLayerModel::new(g, 0.05, -1.0, 1.5).unwrap();
        let u = m.initial_guess();
        let (g0, j) = m.assemble(&u).unwrap();
        let eps = 1e-7;
        for k in 0..u.len() {
            let mut v = u.clone();
            v[k] += eps;
            let (g1, _) = m.assemble(&v).unwrap();
            for i in 0..u.len() {
                let fd = (g1[i] - g0[i]) / eps;
                assert!((fd - j.get(i, k)).abs() < 1e-4 * (1.0 + fd.abs()), "({i},{k})");
            }
        }
    }

    #[test]
    fn approximation_residual_shrinks_with_refinement() {
        // ũ solves the equation only up to a residual of size ~w₀ inside the
        // layer, so the discrete residual falls towards that floor, not zero.
        let res = |m: usize| {
            let mdl = InteriorLayerModel::<f64>::canonical(0.01, m).unwrap();
            sup_norm(&mdl.assemble(&reference_values(&mdl).unwrap()).unwrap().0)
        };
        let r: Vec<f64> = [50, 100, 200, 400].iter().map(|&m| res(m)).collect();
        assert!(r.windows(2).all(|w| w[1] < w[0]), "{r:?}");
        assert!(r[3] > 0.3);
    }

    #[test]
    fn moderate_delta_converges() {
        let mdl = InteriorLayerModel::<f64>::canonical(0.1, 200).unwrap();
        let rep = solve_bvp(&mdl).unwrap();
        assert!(rep.converged);
    }

    #[test]
    fn thin_layer_returns_last_iterate() {
        let mdl = InteriorLayerModel::<f64>::canonical(0.01, 200).unwrap();
        let rep = solve_bvp(&mdl).unwrap();
        assert_eq!(rep.solution.len(), 200);
        assert!(rep.solution.iter().all(|v| v.is_finite()));
        // The discrete solution stays close to the asymptotic profile.
        let approx = reference_values(&mdl).unwrap();
        let gap = rep
            .solution
            .iter()
            .zip(&approx)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(gap < 0.1, "gap {gap}");
    }
}
