//! Plain Newton iteration for nonlinear systems `G(x) = 0` with a tridiagonal
//! Jacobian. No damping or line search: callers supply good starting values,
//! and a run that stalls is a reportable outcome rather than a failure when
//! the policy says so.

use crate::error::{Error, Result};
use crate::linalg::{thomas_solve, BandedMatrix};
use crate::scalar::{sup_norm, Real};

/// A square nonlinear system with a banded Jacobian.
pub trait BandedSystem<T: Real> {
    fn dim(&self) -> usize;

    fn residual(&self, x: &[T]) -> Vec<T>;

    fn jacobian(&self, x: &[T]) -> BandedMatrix<T>;
}

/// Adapts a pair of closures to [`BandedSystem`].
pub struct FnSystem<G, J> {
    dim: usize,
    residual: G,
    jacobian: J,
}

impl<G, J> FnSystem<G, J> {
    pub fn new(dim: usize, residual: G, jacobian: J) -> Self {
        Self {
            dim,
            residual,
            jacobian,
        }
    }
}

impl<T, G, J> BandedSystem<T> for FnSystem<G, J>
where
    T: Real,
    G: Fn(&[T]) -> Vec<T>,
    J: Fn(&[T]) -> BandedMatrix<T>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn residual(&self, x: &[T]) -> Vec<T> {
        (self.residual)(x)
    }

    fn jacobian(&self, x: &[T]) -> BandedMatrix<T> {
        (self.jacobian)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonConvergence {
    Error,
    ReturnLastIterate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonConfig {
    /// Sup-norm tolerance on the residual.
    pub tol: f64,
    pub max_iter: usize,
    pub on_nonconverge: NonConvergence,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-14,
            max_iter: 50,
            on_nonconverge: NonConvergence::Error,
        }
    }
}

impl NewtonConfig {
    pub fn new(tol: f64, max_iter: usize, on_nonconverge: NonConvergence) -> Self {
        Self {
            tol,
            max_iter,
            on_nonconverge,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "Newton tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("Newton needs max_iter >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport<T> {
    pub solution: Vec<T>,
    /// Sup-norm of `G` at the starting point.
    pub initial_residual: T,
    /// Sup-norm of `G` after each Newton update.
    pub residual_norms: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real> NewtonReport<T> {
    pub fn final_residual(&self) -> T {
        self.residual_norms.last().copied().unwrap_or(self.initial_residual)
    }

    pub fn to_f64(&self) -> NewtonReport<f64> {
        NewtonReport {
            solution: self.solution.iter().map(|v| v.as_f64()).collect(),
            initial_residual: self.initial_residual.as_f64(),
            residual_norms: self.residual_norms.iter().map(|v| v.as_f64()).collect(),
            iterations: self.iterations,
            converged: self.converged,
        }
    }
}

/// Iterates `x ← x − J(x)⁻¹·G(x)` until `‖G(x)‖∞ <= tol` or `max_iter` updates.
///
/// A non-finite residual stops the iteration early and is treated as
/// non-convergence.
pub fn newton_solve<T: Real, S: BandedSystem<T> + ?Sized>(
    system: &S,
    x0: &[T],
    cfg: &NewtonConfig,
) -> Result<NewtonReport<T>> {
    cfg.validate()?;
    if x0.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            got: x0.len(),
        });
    }
    let tol = T::lit(cfg.tol);
    let mut x = x0.to_vec();
    let mut g = system.residual(&x);
    let initial_residual = sup_norm(&g);
    let mut residual_norms = Vec::new();
    let mut r = initial_residual;
    let mut converged = r <= tol;

    while !converged && residual_norms.len() < cfg.max_iter && r.is_finite() {
        let iteration = residual_norms.len();
        let jac = system.jacobian(&x);
        let step = thomas_solve(&jac, &g).map_err(|e| match e {
            Error::SingularPivot { index } => Error::SingularJacobian { iteration, row: index },
            other => other,
        })?;
        for (xi, di) in x.iter_mut().zip(&step) {
            *xi = *xi - *di;
        }
        g = system.residual(&x);
        r = sup_norm(&g);
        residual_norms.push(r);
        converged = r <= tol;
    }

    let report = NewtonReport {
        solution: x,
        initial_residual,
        iterations: residual_norms.len(),
        residual_norms,
        converged,
    };
    if !converged && cfg.on_nonconverge == NonConvergence::Error {
        return Err(Error::NotConverged {
            report: Box::new(report.to_f64()),
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_system(m: usize) -> (BandedMatrix<f64>, Vec<f64>) {
        let a = BandedMatrix::tridiagonal(&vec![1.0; m - 1], &vec![-2.0; m], &vec![1.0; m - 1]).unwrap();
        let b: Vec<f64> = (0..m).map(|i| (i as f64 * 0.3).sin()).collect();
        (a, b)
    }

    #[test]
    fn linear_system_converges_in_one_step() {
        let (a, b) = linear_system(9);
        let sys = FnSystem::new(
            9,
            |x: &[f64]| a.matvec(x).unwrap().iter().zip(&b).map(|(p, q)| p - q).collect(),
            |_: &[f64]| a.clone(),
        );
        let cfg = NewtonConfig::new(1e-12, 10, NonConvergence::Error);
        let rep = newton_solve(&sys, &[0.0; 9], &cfg).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        let direct = thomas_solve(&a, &b).unwrap();
        for (p, q) in rep.solution.iter().zip(&direct) {
            assert!((p - q).abs() < 1e-13);
        }
    }

    #[test]
    fn already_converged_start_takes_no_steps() {
        let sys = FnSystem::new(
            1,
            |x: &[f64]| vec![x[0] - 2.0],
            |_: &[f64]| BandedMatrix::identity(1).unwrap(),
        );
        let rep = newton_solve(&sys, &[2.0], &NewtonConfig::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 0);
        assert!(rep.residual_norms.is_empty());
    }

    fn cubic() -> impl BandedSystem<f64> {
        // x³ − 2x + 2 = 0 cycles between 0 and 1 from x0 = 0.
        FnSystem::new(
            1,
            |x: &[f64]| vec![x[0].powi(3) - 2.0 * x[0] + 2.0],
            |x: &[f64]| BandedMatrix::from_diagonal(&[3.0 * x[0] * x[0] - 2.0]).unwrap(),
        )
    }

    #[test]
    fn non_convergence_policies() {
        let keep = NewtonConfig::new(1e-12, 7, NonConvergence::ReturnLastIterate);
        let rep = newton_solve(&cubic(), &[0.0], &keep).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 7);
        assert_eq!(rep.residual_norms.len(), 7);

        let strict = NewtonConfig::new(1e-12, 7, NonConvergence::Error);
        match newton_solve(&cubic(), &[0.0], &strict) {
            Err(Error::NotConverged { report }) => assert_eq!(report.iterations, 7),
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn singular_jacobian_names_iteration() {
        let sys = FnSystem::new(
            1,
            |x: &[f64]| vec![x[0] * x[0] - 1.0],
            |x: &[f64]| BandedMatrix::from_diagonal(&[2.0 * x[0]]).unwrap(),
        );
        assert_eq!(
            newton_solve(&sys, &[0.0], &NewtonConfig::default()),
            Err(Error::SingularJacobian { iteration: 0, row: 0 })
        );
    }

    #[test]
    fn invalid_config_and_dimensions() {
        let (a, _) = linear_system(3);
        let sys = FnSystem::new(3, |x: &[f64]| x.to_vec(), move |_: &[f64]| a.clone());
        assert!(newton_solve(&sys, &[0.0; 2], &NewtonConfig::default()).is_err());
        let cfg = NewtonConfig::new(0.0, 5, NonConvergence::Error);
        assert!(matches!(
            newton_solve(&sys, &[1.0; 3], &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }
}
