//! Banded matrix storage and the direct solvers built on it.
//!
//! Every discretization in the crate produces tridiagonal systems, and the
//! posterior sampler needs the Cholesky factor of `XᵀX`, which it gets from a
//! Givens QR of `X`. Nothing here pivots; the callers' systems are (near) diagonally
//! dominant or symmetric positive definite.

mod banded;
mod cholesky;
pub mod dense;
mod qr;
mod thomas;

pub use banded::{band_matvec, normal_equations, BandedMatrix};
pub use cholesky::{banded_cholesky, solve_lower_banded, solve_upper_banded, BandedCholeskyFactor};
pub use qr::normal_factor;
pub use thomas::thomas_solve;
