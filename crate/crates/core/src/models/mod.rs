//! The worked examples: grids, assembly of the discrete systems, reference
//! solutions and the regression problem each one hands to [`crate::bayes`].

mod black_scholes;
mod fixation;
mod grid;
mod interior;
mod linear;
mod pendulum;

pub use black_scholes::{BlackScholesModel, ProxyMode};
pub use fixation::FixationModel;
pub use grid::{clustered_grid, piecewise_grid, uniform_grid, Grid, MERGE_TOL};
pub use interior::InteriorLayerModel;
pub use linear::LinearBvpModel;
pub use pendulum::PendulumModel;

use crate::bayes::RegressionProblem;
use crate::error::{Error, Result};
use crate::linalg::{band_matvec, BandedMatrix};
use crate::nonlinear::{newton_solve, BandedSystem, NewtonConfig, NewtonReport};
use crate::scalar::Real;

/// Three-point weights at one interior node: `u'' ≈ lo·u₋ + di·u + up·u₊`
/// and `u' ≈ (u₊ − u₋)/span`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Stencil<T> {
    pub lo: T,
    pub di: T,
    pub up: T,
    pub span: T,
}

/// Per-node stencils. A uniform grid gets the textbook `(1, −2, 1)/h²` and
/// `2h` exactly; otherwise the non-uniform weights
/// `2/(h₋(h₋+h₊))`, `−2/(h₋h₊)`, `2/(h₊(h₋+h₊))`.
pub(crate) fn stencils<T: Real>(grid: &Grid<T>) -> Vec<Stencil<T>> {
    let two = T::lit(2.0);
    if let Some(h) = grid.uniform_step() {
        let inv = T::one() / (h * h);
        let s = Stencil {
            lo: inv,
            di: -two * inv,
            up: inv,
            span: two * h,
        };
        return vec![s; grid.m()];
    }
    (0..grid.m())
        .map(|i| {
            let (hm, hp) = grid.spacing(i);
            let span = hm + hp;
            Stencil {
                lo: two / (hm * span),
                di: -two / (hm * hp),
                up: two / (hp * span),
                span,
            }
        })
        .collect()
}

/// Size below which the residual cannot be pushed in `T` arithmetic:
/// `2ε·scale·max_i(|lo| + |di| + |up|)`, with `scale` bounding `|u|` times
/// any coefficient on `u''`. Tiny spacings raise it sharply.
pub(crate) fn rounding_floor<T: Real>(grid: &Grid<T>, scale: T) -> f64 {
    let row = stencils(grid)
        .iter()
        .map(|s| s.lo.abs() + s.di.abs() + s.up.abs())
        .fold(T::zero(), T::max);
    (T::lit(2.0) * T::epsilon() * scale * row).as_f64()
}

/// A two-point boundary value problem whose discretization on any grid is a
/// nonlinear system with tridiagonal Jacobian.
pub trait NonlinearBvp<T: Real>: Sized {
    fn name(&self) -> &'static str;

    fn grid(&self) -> &Grid<T>;

    /// Same problem on a different grid over the same interval.
    fn regridded(&self, grid: Grid<T>) -> Result<Self>;

    /// Residual `G(u)` and Jacobian `J(u)` at interior values `u`.
    fn assemble(&self, u: &[T]) -> Result<(Vec<T>, BandedMatrix<T>)>;

    fn initial_guess(&self) -> Vec<T>;

    /// Exact or approximate solution used to report errors, when one exists.
    fn reference(&self, _x: T) -> Option<T> {
        None
    }

    fn newton_config(&self) -> NewtonConfig {
        NewtonConfig::default()
    }
}

/// Adapts a [`NonlinearBvp`] to the Newton solver.
pub struct BvpSystem<'a, M>(pub &'a M);

impl<T: Real, M: NonlinearBvp<T>> BandedSystem<T> for BvpSystem<'_, M> {
    fn dim(&self) -> usize {
        self.0.grid().m()
    }

    fn residual(&self, x: &[T]) -> Vec<T> {
        self.0.assemble(x).expect("dimension fixed by the grid").0
    }

    fn jacobian(&self, x: &[T]) -> BandedMatrix<T> {
        self.0.assemble(x).expect("dimension fixed by the grid").1
    }
}

/// Newton from the model's own starting values with its own settings.
pub fn solve_bvp<T: Real, M: NonlinearBvp<T>>(model: &M) -> Result<NewtonReport<T>> {
    solve_bvp_with(model, &model.newton_config())
}

pub fn solve_bvp_with<T: Real, M: NonlinearBvp<T>>(model: &M, cfg: &NewtonConfig) -> Result<NewtonReport<T>> {
    newton_solve(&BvpSystem(model), &model.initial_guess(), cfg)
}

/// Linearization at the computed solution: `X = J(û)`, `Y = J(û)·û`.
pub fn linearized_regression<T: Real, M: NonlinearBvp<T>>(model: &M, u_hat: &[T]) -> Result<RegressionProblem<T>> {
    let (_, j) = model.assemble(u_hat)?;
    let y = band_matvec(&j, u_hat)?;
    RegressionProblem::new(j, y)
}

/// Reference values at the interior nodes, if the model has a reference.
pub fn reference_values<T: Real, M: NonlinearBvp<T>>(model: &M) -> Option<Vec<T>> {
    model.grid().interior().iter().map(|&x| model.reference(x)).collect()
}

pub(crate) fn check_interior_len<T: Real>(grid: &Grid<T>, u: &[T]) -> Result<()> {
    if u.len() != grid.m() {
        return Err(Error::DimensionMismatch {
            expected: grid.m(),
            got: u.len(),
        });
    }
    Ok(())
}

/// Tridiagonal matrix from per-row `(sub, diag, sup)` triples; the first
/// row's `sub` and last row's `sup` are ignored.
pub(crate) fn tridiagonal_from_rows<T: Real>(rows: &[(T, T, T)]) -> Result<BandedMatrix<T>> {
    let n = rows.len();
    let sub: Vec<T> = rows.iter().skip(1).map(|r| r.0).collect();
    let diag: Vec<T> = rows.iter().map(|r| r.1).collect();
    let sup: Vec<T> = rows.iter().take(n.saturating_sub(1)).map(|r| r.2).collect();
    BandedMatrix::tridiagonal(&sub, &diag, &sup)
}
