use crate::bayes::{PosteriorBand, RegressionProblem};
use crate::error::{Error, Result};
use crate::linalg::{thomas_solve, BandedMatrix};
use crate::scalar::Real;
use crate::specfun::std_normal_cdf;

/// European call under Black–Scholes, stepped implicitly in time to expiry
/// on `S_n = nΔS`, `n = 0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlackScholesModel<T> {
    pub expiry: T,
    pub strike: T,
    pub rate: T,
    pub sigma: T,
    pub s_max: T,
    /// Space steps `N`.
    pub n: usize,
    /// Time steps `M`.
    pub m: usize,
}

/// Denominator of the relative-error proxy `width / (D + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProxyMode {
    /// `D` is the posterior mean.
    Mean,
    /// `D` is the sum of the lower and upper limits.
    LimitSum,
}

impl<T: Real> BlackScholesModel<T> {
    pub fn new(expiry: T, strike: T, rate: T, sigma: T, s_max: T, n: usize, m: usize) -> Result<Self> {
        let positive = [expiry, strike, rate, sigma, s_max]
            .iter()
            .all(|&v| v > T::zero() && v.is_finite());
        if !positive {
            return Err(Error::InvalidConfig(
                "expiry, strike, rate, volatility and price cap must be positive".into(),
            ));
        }
        if n < 3 || m < 1 {
            return Err(Error::InvalidConfig(format!(
                "need N >= 3 and M >= 1, got N={n}, M={m}"
            )));
        }
        Ok(Self {
            expiry,
            strike,
            rate,
            sigma,
            s_max,
            n,
            m,
        })
    }

    /// `T = 0.25`, `E = 10`, `r = 0.1`, `σ = 0.4`, `S_max = 40`, `N = 200`, `M = 2000`.
    pub fn canonical() -> Self {
        Self::new(
            T::lit(0.25),
            T::lit(10.0),
            T::lit(0.1),
            T::lit(0.4),
            T::lit(40.0),
            200,
            2000,
        )
        .expect("canonical parameters are valid")
    }

    pub fn ds(&self) -> T {
        self.s_max / T::from_count(self.n)
    }

    pub fn dt(&self) -> T {
        self.expiry / T::from_count(self.m)
    }

    /// `α = σ²Δt`.
    pub fn alpha(&self) -> T {
        self.sigma * self.sigma * self.dt()
    }

    /// `β = rΔt`.
    pub fn beta(&self) -> T {
        self.rate * self.dt()
    }

    /// Interior prices `S_1, …, S_{N−1}`.
    pub fn prices(&self) -> Vec<T> {
        (1..self.n).map(|k| T::from_count(k) * self.ds()).collect()
    }

    /// `d_k = 1 + β + αk²`.
    pub fn d(&self, k: usize) -> T {
        let kk = T::from_count(k);
        T::one() + self.beta() + self.alpha() * kk * kk
    }

    /// `u_k = −½(β(k−1) + α(k−1)²)`, the entry in row `k−1`, column `k`.
    pub fn u(&self, k: usize) -> T {
        let j = T::from_count(k) - T::one();
        -(self.beta() * j + self.alpha() * j * j) / T::lit(2.0)
    }

    /// `l_k = ½(β(k+1) − α(k+1)²)`, the entry in row `k+1`, column `k`.
    pub fn l(&self, k: usize) -> T {
        let j = T::from_count(k + 1);
        (self.beta() * j - self.alpha() * j * j) / T::lit(2.0)
    }

    /// The `(N−1)×(N−1)` implicit-step matrix: row `k` holds
    /// `(l_{k−1}, d_k, u_{k+1})`.
    pub fn assemble(&self) -> Result<BandedMatrix<T>> {
        let n = self.n;
        let sub: Vec<T> = (1..n - 1).map(|k| self.l(k)).collect();
        let diag: Vec<T> = (1..n).map(|k| self.d(k)).collect();
        let sup: Vec<T> = (2..n).map(|k| self.u(k)).collect();
        BandedMatrix::tridiagonal(&sub, &diag, &sup)
    }

    /// `v_k⁰ = max(kΔS − E, 0)`.
    pub fn payoff(&self) -> Vec<T> {
        self.prices()
            .into_iter()
            .map(|s| (s - self.strike).max(T::zero()))
            .collect()
    }

    /// Far-field value `S_max − E·e^{−rτ}` after `steps` steps (`τ = steps·Δt`).
    pub fn upper_boundary(&self, steps: usize) -> T {
        self.s_max - self.strike * (-self.rate * T::from_count(steps) * self.dt()).exp()
    }

    /// `b^m`: `v^m` with the known boundary values at step `m+1` moved to the
    /// right-hand side. The lower boundary value is 0.
    pub fn rhs(&self, v: &[T], step: usize) -> Result<Vec<T>> {
        if v.len() != self.n - 1 {
            return Err(Error::DimensionMismatch {
                expected: self.n - 1,
                got: v.len(),
            });
        }
        let mut b = v.to_vec();
        let last = b.len() - 1;
        b[last] = b[last] - self.u(self.n) * self.upper_boundary(step + 1);
        Ok(b)
    }

    /// `v^{m+1}` from `v^m`.
    pub fn step(&self, a: &BandedMatrix<T>, v: &[T], step: usize) -> Result<Vec<T>> {
        thomas_solve(a, &self.rhs(v, step)?)
    }

    /// `v⁰, v¹, …, v^steps`.
    pub fn run(&self, steps: usize) -> Result<Vec<Vec<T>>> {
        if steps > self.m {
            return Err(Error::InvalidConfig(format!("{steps} steps exceed M = {}", self.m)));
        }
        let a = self.assemble()?;
        let mut history = Vec::with_capacity(steps + 1);
        history.push(self.payoff());
        for k in 0..steps {
            let next = self.step(&a, &history[k], k)?;
            history.push(next);
        }
        Ok(history)
    }

    /// `X = A`, `Y = b^m`; the posterior mean is `v^{m+1}`.
    pub fn regression(&self, v: &[T], step: usize) -> Result<RegressionProblem<T>> {
        RegressionProblem::new(self.assemble()?, self.rhs(v, step)?)
    }

    /// Calendar time of the values after `steps` steps, `t = T − steps·Δt`.
    pub fn calendar_time(&self, steps: usize) -> T {
        self.expiry - T::from_count(steps) * self.dt()
    }

    /// Closed-form price `SΦ(d₁) − Ee^{−r(T−t)}Φ(d₂)` at calendar time `t`,
    /// `d₁ = (ln(S/E) + (r + σ²/2)(T−t)) / (σ√(T−t))`, `d₂ = d₁ − σ√(T−t)`.
    pub fn exact(&self, s: T, t: T) -> T {
        let tau = self.expiry - t;
        if s <= T::zero() {
            return T::zero();
        }
        if tau <= T::zero() {
            return (s - self.strike).max(T::zero());
        }
        let vol = self.sigma * tau.sqrt();
        let half = T::lit(0.5);
        let d1 = ((s / self.strike).ln() + (self.rate + half * self.sigma * self.sigma) * tau) / vol;
        let d2 = d1 - vol;
        s * std_normal_cdf(d1) - self.strike * (-self.rate * tau).exp() * std_normal_cdf(d2)
    }

    /// `width / (D + 1)`.
    pub fn relative_error_proxy(band: &PosteriorBand<T>, mode: ProxyMode) -> Vec<T> {
        (0..band.len())
            .map(|i| {
                let d = match mode {
                    ProxyMode::Mean => band.mean[i],
                    ProxyMode::LimitSum => band.lower[i] + band.upper[i],
                };
                band.width[i] / (d + T::one())
            })
            .collect()
    }
}
