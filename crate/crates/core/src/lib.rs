//! Finite-difference solvers with Bayesian credible bands.
//!
//! Each discretized model is recast as a linear regression `Y = Xβ + ε`; the
//! posterior of `β` under a flat prior gives pointwise bands whose width tracks
//! the local discretization error.

pub mod adaptive;
pub mod bayes;
pub mod error;
pub mod linalg;
pub mod models;
pub mod nonlinear;
pub mod randgen;
pub mod scalar;
pub mod specfun;

pub use adaptive::{adapt_loop, flag_intervals, refine, RefineHistory, RefinePolicy};
pub use bayes::{
    credible_band, identity_diagnostic, posterior_mean, PosteriorBand, PosteriorConfig, RegressionProblem,
};
pub use error::{Error, Result};
pub use linalg::{banded_cholesky, thomas_solve, BandedCholeskyFactor, BandedMatrix};
pub use models::{
    BlackScholesModel, FixationModel, Grid, InteriorLayerModel, LinearBvpModel, NonlinearBvp, PendulumModel, ProxyMode,
};
pub use nonlinear::{newton_solve, BandedSystem, FnSystem, NewtonConfig, NewtonReport, NonConvergence};
pub use randgen::{PercentileSpec, RngState};
pub use scalar::Real;
pub use specfun::{jacobi_sn, pendulum_exact, solve_pendulum_constants, std_normal_cdf, PendulumConstants};

pub type BandedMatrixF64 = BandedMatrix<f64>;
pub type RegressionProblemF64 = RegressionProblem<f64>;
pub type PosteriorBandF64 = PosteriorBand<f64>;
pub type NewtonReportF64 = NewtonReport<f64>;
pub type GridF64 = Grid<f64>;
pub type LinearBvpModelF64 = LinearBvpModel<f64>;
pub type PendulumModelF64 = PendulumModel<f64>;
pub type InteriorLayerModelF64 = InteriorLayerModel<f64>;
pub type BlackScholesModelF64 = BlackScholesModel<f64>;
pub type FixationModelF64 = FixationModel<f64>;
pub type PendulumConstantsF64 = PendulumConstants<f64>;
pub type RefineHistoryF64 = RefineHistory<f64>;
