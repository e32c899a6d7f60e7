//! Credible bands for finite difference solutions viewed as a linear
//! regression `Y = X·β + ε`.
//!
//! With a flat prior on β and `σ² ~ IG(a, b)` the conditional posterior is
//! `β | σ² ~ N(μ, σ²(XᵀX)⁻¹)` with `μ = (XᵀX)⁻¹XᵀY`. The sampler draws σ²
//! from the inverse-gamma prior, then β from that normal, discards the
//! burn-in draws and reads pointwise percentiles off the rest.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{normal_factor, thomas_solve, BandedCholeskyFactor, BandedMatrix};
use crate::randgen::{draw_inverse_gamma, percentile_select, RngState};
use crate::scalar::Real;

/// Normal quantile used to turn a 95% band width into a standard-error scale.
pub const Z_975: f64 = 1.96;

/// Default upper bound on the retained-draw buffer (bytes). Larger problems
/// are sampled in several passes over column blocks.
pub const DEFAULT_SAMPLE_BUFFER_BYTES: usize = 512 << 20;

/// The pair `(X, Y)` of one linear solve or one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionProblem<T> {
    x: BandedMatrix<T>,
    y: Vec<T>,
}

impl<T: Real> RegressionProblem<T> {
    pub fn new(x: BandedMatrix<T>, y: Vec<T>) -> Result<Self> {
        if y.len() != x.n() {
            return Err(Error::DimensionMismatch {
                expected: x.n(),
                got: y.len(),
            });
        }
        Ok(Self { x, y })
    }

    /// `X = I`, `Y = values`.
    pub fn identity(values: Vec<T>) -> Result<Self> {
        let x = BandedMatrix::identity(values.len())?;
        Self::new(x, values)
    }

    pub fn x(&self) -> &BandedMatrix<T> {
        &self.x
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    /// Number of unknowns (interior nodes).
    pub fn m(&self) -> usize {
        self.y.len()
    }

    pub fn into_parts(self) -> (BandedMatrix<T>, Vec<T>) {
        (self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorConfig {
    pub draws: usize,
    pub burn_in: usize,
    /// Inverse-gamma shape.
    pub a: f64,
    /// Inverse-gamma scale.
    pub b: f64,
    pub q_low: f64,
    pub q_high: f64,
    pub seed: u64,
    /// Physical range the reported limits are clamped to, if any.
    pub clamp: Option<(f64, f64)>,
    pub sample_buffer_bytes: usize,
}

impl PosteriorConfig {
    /// 50500 draws, 500 burn-in, `a = m/2`, `b = a + 1`, 2.5%/97.5% limits.
    pub fn for_interior_count(m: usize, seed: u64) -> Self {
        let a = m as f64 / 2.0;
        Self {
            draws: 50_500,
            burn_in: 500,
            a,
            b: a + 1.0,
            q_low: 0.025,
            q_high: 0.975,
            seed,
            clamp: None,
            sample_buffer_bytes: DEFAULT_SAMPLE_BUFFER_BYTES,
        }
    }

    pub fn with_draws(mut self, draws: usize, burn_in: usize) -> Self {
        self.draws = draws;
        self.burn_in = burn_in;
        self
    }

    pub fn with_prior(mut self, a: f64, b: f64) -> Self {
        self.a = a;
        self.b = b;
        self
    }

    pub fn with_clamp(mut self, lo: f64, hi: f64) -> Self {
        self.clamp = Some((lo, hi));
        self
    }

    pub fn kept(&self) -> usize {
        self.draws.saturating_sub(self.burn_in)
    }

    pub fn rng(&self) -> RngState {
        RngState::new(self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.burn_in >= self.draws {
            return bad(format!(
                "burn-in ({}) must be smaller than the draw count ({})",
                self.burn_in, self.draws
            ));
        }
        if !(self.a > 0.0 && self.b > 0.0 && self.a.is_finite() && self.b.is_finite()) {
            return bad(format!(
                "inverse-gamma parameters must be positive, got a={}, b={}",
                self.a, self.b
            ));
        }
        if !(0.0 < self.q_low && self.q_low < self.q_high && self.q_high < 1.0) {
            return bad(format!(
                "need 0 < q_low < q_high < 1, got {} and {}",
                self.q_low, self.q_high
            ));
        }
        if let Some((lo, hi)) = self.clamp {
            if !(lo < hi) {
                return bad(format!("empty clamp range [{lo}, {hi}]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorBand<T> {
    pub mean: Vec<T>,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    pub width: Vec<T>,
    /// `width / (2 · 1.96)`, a standard-error scale under normal errors.
    pub scaled_width: Vec<T>,
    pub config: PosteriorConfig,
}

impl<T: Real> PosteriorBand<T> {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn max_width(&self) -> T {
        self.width.iter().copied().fold(T::zero(), T::max)
    }
}

/// Posterior mean `μ = (XᵀX)⁻¹XᵀY`.
///
/// For the square nonsingular `X` used throughout this equals `X⁻¹Y`, which
/// is what gets computed (a tridiagonal solve when `X` is tridiagonal, the
/// factor of `XᵀX` from a QR of `X` otherwise).
pub fn posterior_mean<T: Real>(p: &RegressionProblem<T>) -> Result<Vec<T>> {
    if p.x.kl() <= 1 && p.x.ku() <= 1 {
        thomas_solve(&p.x, &p.y)
    } else {
        let rhs = p.x.matvec_transpose(&p.y)?;
        normal_factor(&p.x)?.solve(&rhs)
    }
}

/// Pointwise credible band for β.
///
/// Draw `d` (`0 <= d < cfg.draws`) uses generator `rng.substream(d)`: first
/// σ² ~ IG(a, b), then standard normals `z`, and β = μ + σ·L⁻ᵀz with
/// `L·Lᵀ = XᵀX`, where `L` comes from a QR factorization of `X`. Draws
/// `d < cfg.burn_in` are discarded. Because every draw has its own stream
/// the band is identical for any thread count.
pub fn credible_band<T: Real>(
    p: &RegressionProblem<T>,
    cfg: &PosteriorConfig,
    rng: &RngState,
) -> Result<PosteriorBand<T>> {
    cfg.validate()?;
    let mean = posterior_mean(p)?;
    let factor = normal_factor(&p.x)?;
    let (lower, upper) = sample_limits(&mean, &factor, cfg, rng)?;
    Ok(assemble_band(mean, lower, upper, cfg))
}

/// Band with `X = I` and `Y = θ̂`. The spread then only reflects the σ² prior
/// and sampling variation, which makes it a baseline for the truncation-driven
/// bands.
pub fn identity_diagnostic<T: Real>(
    theta_hat: &[T],
    cfg: &PosteriorConfig,
    rng: &RngState,
) -> Result<PosteriorBand<T>> {
    if theta_hat.is_empty() {
        return Err(Error::Empty("identity diagnostic needs at least one value"));
    }
    credible_band(&RegressionProblem::identity(theta_hat.to_vec())?, cfg, rng)
}

fn sample_limits<T: Real>(
    mean: &[T],
    factor: &BandedCholeskyFactor<T>,
    cfg: &PosteriorConfig,
    root: &RngState,
) -> Result<(Vec<T>, Vec<T>)> {
    let n = mean.len();
    let kept = cfg.kept();
    let per_col = kept * std::mem::size_of::<T>();
    let block = (cfg.sample_buffer_bytes / per_col.max(1)).clamp(1, n);
    let (a, b) = (T::lit(cfg.a), T::lit(cfg.b));

    let mut lower = vec![T::zero(); n];
    let mut upper = vec![T::zero(); n];
    let mut buf = vec![T::zero(); kept * block];

    let mut c0 = 0;
    while c0 < n {
        let c1 = (c0 + block).min(n);
        let width = c1 - c0;
        let buf = &mut buf[..kept * width];

        buf.par_chunks_mut(width).enumerate().try_for_each_init(
            || vec![T::zero(); n],
            |scratch, (row, out)| -> Result<()> {
                let mut rng = root.substream((cfg.burn_in + row) as u64);
                let sigma = draw_inverse_gamma(&mut rng, a, b)?.sqrt();
                // Normals are assigned from the last index down so that a
                // pass only needs the trailing part of the sweep.
                for z in scratch[c0..].iter_mut().rev() {
                    *z = T::sample_standard_normal(rng.rng());
                }
                factor.back_substitute_tail(scratch, c0);
                for (k, o) in out.iter_mut().enumerate() {
                    *o = mean[c0 + k] + sigma * scratch[c0 + k];
                }
                Ok(())
            },
        )?;

        let limits: Vec<(T, T)> = (0..width)
            .into_par_iter()
            .map_init(
                || vec![T::zero(); kept],
                |col, k| {
                    for (r, slot) in col.iter_mut().enumerate() {
                        *slot = buf[r * width + k];
                    }
                    let lo = percentile_select(col, cfg.q_low);
                    let hi = percentile_select(col, cfg.q_high);
                    (lo, hi)
                },
            )
            .collect();
        for (k, (lo, hi)) in limits.into_iter().enumerate() {
            lower[c0 + k] = lo;
            upper[c0 + k] = hi;
        }
        c0 = c1;
    }
    Ok((lower, upper))
}

fn assemble_band<T: Real>(
    mean: Vec<T>,
    mut lower: Vec<T>,
    mut upper: Vec<T>,
    cfg: &PosteriorConfig,
) -> PosteriorBand<T> {
    if let Some((lo, hi)) = cfg.clamp {
        let (lo, hi) = (T::lit(lo), T::lit(hi));
        for v in lower.iter_mut().chain(upper.iter_mut()) {
            *v = v.max(lo).min(hi);
        }
    }
    let width: Vec<T> = upper.iter().zip(&lower).map(|(&u, &l)| u - l).collect();
    let scale = T::lit(2.0 * Z_975);
    let scaled_width = width.iter().map(|&w| w / scale).collect();
    PosteriorBand {
        mean,
        lower,
        upper,
        width,
        scaled_width,
        config: cfg.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(m: usize, seed: u64) -> PosteriorConfig {
        PosteriorConfig::for_interior_count(m, seed).with_draws(5_500, 500)
    }

    #[test]
    fn mean_identity_and_diagonal() {
        let p = RegressionProblem::identity(vec![1.0, 2.0]).unwrap();
        assert_eq!(posterior_mean(&p).unwrap(), vec![1.0, 2.0]);
        let d = BandedMatrix::from_diagonal(&[2.0, 4.0]).unwrap();
        let p = RegressionProblem::new(d, vec![2.0, 8.0]).unwrap();
        assert_eq!(posterior_mean(&p).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn mean_via_factor_for_wide_band() {
        let mut x = BandedMatrix::<f64>::zeros(4, 2, 0).unwrap();
        for i in 0..4 {
            for j in x.row_range(i) {
                x.set(i, j, if i == j { 3.0 } else { 0.5 });
            }
        }
        let truth = [1.0, -1.0, 2.0, 0.5];
        let y = x.matvec(&truth).unwrap();
        let mu = posterior_mean(&RegressionProblem::new(x, y).unwrap()).unwrap();
        for (a, b) in mu.iter().zip(truth) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let x = BandedMatrix::<f64>::identity(3).unwrap();
        assert!(RegressionProblem::new(x, vec![1.0]).is_err());
    }

    #[test]
    fn degenerate_configs_rejected() {
        let p = RegressionProblem::identity(vec![0.0]).unwrap();
        let cfg = small_cfg(1, 1).with_draws(500, 500);
        assert!(matches!(
            credible_band(&p, &cfg, &cfg.rng()),
            Err(Error::InvalidConfig(_))
        ));
        let mut cfg = small_cfg(1, 1);
        cfg.q_low = 0.9;
        cfg.q_high = 0.1;
        assert!(cfg.validate().is_err());
        assert!(small_cfg(1, 1).with_prior(0.0, 1.0).validate().is_err());
    }

    #[test]
    fn singular_design_is_an_error() {
        let x = BandedMatrix::tridiagonal(&[1.0], &[1.0, 1.0], &[1.0]).unwrap();
        let p = RegressionProblem::new(x, vec![1.0, 1.0]).unwrap();
        let cfg = small_cfg(2, 1);
        assert!(credible_band(&p, &cfg, &cfg.rng()).is_err());
    }

    #[test]
    fn width_matches_normal_quantile_when_sigma_concentrates() {
        let p = RegressionProblem::identity(vec![0.0]).unwrap();
        let cfg = PosteriorConfig::for_interior_count(1, 8)
            .with_draws(50_500, 500)
            .with_prior(1e6, 1e6);
        let band = credible_band(&p, &cfg, &cfg.rng()).unwrap();
        let expected = 2.0 * Z_975;
        assert!(
            (band.width[0] - expected).abs() < 0.05 * expected,
            "width {}",
            band.width[0]
        );
    }

    #[test]
    fn band_structure_invariants() {
        let x = BandedMatrix::<f64>::tridiagonal(&[1.0; 5], &[-3.0; 6], &[1.0; 5]).unwrap();
        let p = RegressionProblem::new(x, vec![1.0, 0.0, 2.0, -1.0, 0.5, 0.0]).unwrap();
        let cfg = small_cfg(6, 4);
        let band = credible_band(&p, &cfg, &cfg.rng()).unwrap();
        for i in 0..6 {
            assert!(band.lower[i] <= band.mean[i] && band.mean[i] <= band.upper[i]);
            assert_eq!(band.width[i], band.upper[i] - band.lower[i]);
            assert!((band.scaled_width[i] - band.width[i] / 3.92).abs() < 1e-15);
        }
    }

    #[test]
    fn multi_pass_sampling_matches_single_pass() {
        let x = BandedMatrix::tridiagonal(&[0.5; 9], &[2.0; 10], &[-1.0; 9]).unwrap();
        let p = RegressionProblem::new(x, (0..10).map(f64::from).collect()).unwrap();
        let cfg = small_cfg(10, 21);
        let one = credible_band(&p, &cfg, &cfg.rng()).unwrap();
        let mut split = cfg.clone();
        split.sample_buffer_bytes = 3 * cfg.kept() * 8;
        let many = credible_band(&p, &split, &split.rng()).unwrap();
        assert_eq!(one.lower, many.lower);
        assert_eq!(one.upper, many.upper);
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let x = BandedMatrix::tridiagonal(&[1.0; 7], &[-2.5; 8], &[1.0; 7]).unwrap();
        let p = RegressionProblem::new(x, vec![0.3; 8]).unwrap();
        let cfg = small_cfg(8, 2);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| credible_band(&p, &cfg, &cfg.rng()).unwrap());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let multi = pool.install(|| credible_band(&p, &cfg, &cfg.rng()).unwrap());
        assert_eq!(single, multi);
    }

    #[test]
    fn clamp_limits_to_range() {
        let p = RegressionProblem::identity(vec![0.01, 0.5, 0.99]).unwrap();
        let cfg = small_cfg(3, 5).with_clamp(0.0, 1.0);
        let band = credible_band(&p, &cfg, &cfg.rng()).unwrap();
        assert_eq!(band.lower[0], 0.0);
        assert_eq!(band.upper[2], 1.0);
        assert!(band.lower.iter().chain(&band.upper).all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn identity_diagnostic_mean_is_input() {
        let theta = vec![0.25, -1.0, 3.5];
        let cfg = small_cfg(3, 6);
        let band = identity_diagnostic(&theta, &cfg, &cfg.rng()).unwrap();
        assert_eq!(band.mean, theta);
        let zero = identity_diagnostic(&[0.0], &small_cfg(1, 1), &RngState::new(1)).unwrap();
        assert_eq!(zero.mean, vec![0.0]);
        assert!(identity_diagnostic::<f64>(&[], &small_cfg(1, 1), &RngState::new(1)).is_err());
    }
}
