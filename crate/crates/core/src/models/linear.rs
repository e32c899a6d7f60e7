use crate::bayes::RegressionProblem;
use crate::error::{Error, Result};
use crate::linalg::{thomas_solve, BandedMatrix};
use crate::scalar::Real;

use super::grid::{uniform_grid, Grid};

/// `u'' = sin x` with Dirichlet data taken from the exact solution
/// `u = −sin x + x + 1`; on `[0, π]` that is `u(0) = 1`, `u(π) = π + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearBvpModel<T> {
    grid: Grid<T>,
}

impl<T: Real> LinearBvpModel<T> {
    /// `m` interior points on `[0, π]`, `h = π/(m+1)`.
    pub fn new(m: usize) -> Result<Self> {
        Ok(Self::on_grid(uniform_grid(T::zero(), T::PI(), m)?))
    }

    /// Any grid; boundary values are set from the exact solution.
    /// [`assemble`](Self::assemble) still rejects non-uniform grids.
    pub fn on_grid(grid: Grid<T>) -> Self {
        let (lo, hi) = (Self::exact(grid.lo()), Self::exact(grid.hi()));
        Self {
            grid: grid.with_boundary(lo, hi),
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn h(&self) -> Result<T> {
        self.grid
            .uniform_step()
            .ok_or_else(|| Error::InvalidGrid("the linear model is assembled on uniform grids only".into()))
    }

    /// `A = tridiag(1, −2, 1)` (without the `1/h²`) and
    /// `F_j = sin x_j`, with `u(lo)/h²` and `u(hi)/h²` subtracted from the
    /// first and last entries. The discrete system is `(1/h²)·A·Û = F`.
    pub fn assemble(&self) -> Result<(BandedMatrix<T>, Vec<T>)> {
        let h = self.h()?;
        let m = self.grid.m();
        let inv = T::one() / (h * h);
        let a = BandedMatrix::tridiagonal(&vec![T::one(); m - 1], &vec![T::lit(-2.0); m], &vec![T::one(); m - 1])?;
        let mut f: Vec<T> = self.grid.interior().iter().map(|x| x.sin()).collect();
        let (lo, hi) = self.grid.boundary();
        f[0] = f[0] - lo * inv;
        f[m - 1] = f[m - 1] - hi * inv;
        Ok((a, f))
    }

    /// `X = (1/h²)·A`, `Y = F`.
    pub fn regression(&self) -> Result<RegressionProblem<T>> {
        let h = self.h()?;
        let (a, f) = self.assemble()?;
        RegressionProblem::new(a.scaled(T::one() / (h * h)), f)
    }

    /// Finite difference solution `Û`.
    pub fn solve(&self) -> Result<Vec<T>> {
        let p = self.regression()?;
        thomas_solve(p.x(), p.y())
    }

    pub fn exact(x: T) -> T {
        -x.sin() + x + T::one()
    }

    /// `−(h²/12)·sin x`, the leading local truncation term at `x`.
    pub fn truncation_leading(x: T, h: T) -> T {
        -(h * h) / T::lit(12.0) * x.sin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense;
    use std::f64::consts::PI;

    #[test]
    fn boundary_terms_in_rhs() {
        let mdl = LinearBvpModel::<f64>::new(99).unwrap();
        let h = PI / 100.0;
        let (a, f) = mdl.assemble().unwrap();
        let x = mdl.grid().interior();
        assert!((f[0] - (x[0].sin() - 1.0 / (h * h))).abs() < 1e-9);
        assert!((f[98] - (x[98].sin() - (PI + 1.0) / (h * h))).abs() < 1e-9);
        assert_eq!((a.get(3, 3), a.get(3, 4), a.get(4, 3)), (-2.0, 1.0, 1.0));
        for i in 0..99 {
            for j in 0..99 {
                assert_eq!(a.get(i, j), a.get(j, i));
            }
        }
    }

    #[test]
    fn one_interior_point_by_hand() {
        // (1/h²)(1 − 2U + (π+1)) = sin(π/2) with h = π/2.
        let h = PI / 2.0;
        let expected = (PI + 2.0 - h * h) / 2.0;
        let u = LinearBvpModel::<f64>::new(1).unwrap().solve().unwrap();
        assert!((u[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn solution_matches_dense_oracle() {
        let mdl = LinearBvpModel::<f64>::new(20).unwrap();
        let p = mdl.regression().unwrap();
        let oracle = dense::solve(&p.x().to_dense(), p.y()).unwrap();
        for (a, b) in mdl.solve().unwrap().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_solution_values() {
        assert_eq!(LinearBvpModel::exact(0.0), 1.0);
        assert!((LinearBvpModel::exact(PI) - (PI + 1.0)).abs() < 1e-15);
        assert!((LinearBvpModel::exact(PI / 2.0) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn truncation_term() {
        assert_eq!(LinearBvpModel::truncation_leading(0.0, 0.1), 0.0);
        let h = PI / 100.0;
        assert!((LinearBvpModel::truncation_leading(PI / 2.0, h) + h * h / 12.0).abs() < 1e-18);
        for i in 1..10 {
            assert!(LinearBvpModel::truncation_leading(i as f64 * PI / 10.0, h) < 0.0);
        }
    }

    #[test]
    fn second_order_convergence() {
        let err = |m: usize| {
            let mdl = LinearBvpModel::<f64>::new(m).unwrap();
            let u = mdl.solve().unwrap();
            mdl.grid()
                .interior()
                .iter()
                .zip(&u)
                .map(|(&x, &v)| (v - LinearBvpModel::exact(x)).abs())
                .fold(0.0, f64::max)
        };
        let (e49, e99, e199) = (err(49), err(99), err(199));
        for ratio in [e49 / e99, e99 / e199] {
            assert!((3.2..=4.8).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn nonuniform_grid_rejected() {
        let g = Grid::from_nodes(vec![0.0, 1.0, 1.5, PI]).unwrap();
        assert!(LinearBvpModel::on_grid(g).assemble().is_err());
    }
}
