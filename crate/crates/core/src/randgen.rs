//! Seedable sampling for the posterior protocol: standard normals, gamma and
//! inverse-gamma variates, and order-statistic percentiles.
//!
//! Generators are ChaCha8 streams keyed by `(seed, stream)`. Parallel work
//! takes substreams derived from the parent seed and an index, so results do
//! not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Explicit generator state. Nothing in the crate draws from a global RNG.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    /// Independent generator for work item `index`; stream `index + 1` under the same seed.
    pub fn substream(&self, index: u64) -> Self {
        Self::with_stream(self.seed, index.wrapping_add(1))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub(crate) fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Probability level for [`percentile`], strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PercentileSpec(f64);

impl PercentileSpec {
    pub fn new(q: f64) -> Result<Self> {
        if q > 0.0 && q < 1.0 {
            Ok(Self(q))
        } else {
            Err(Error::Domain(format!("percentile level {q} outside (0, 1)")))
        }
    }

    pub fn q(self) -> f64 {
        self.0
    }
}

pub fn draw_standard_normal<T: Real>(rng: &mut RngState, n: usize) -> Vec<T> {
    (0..n).map(|_| T::sample_standard_normal(rng.rng())).collect()
}

/// One `Gamma(shape, rate = 1)` variate.
pub fn draw_gamma<T: Real>(rng: &mut RngState, shape: T) -> Result<T> {
    if !(shape > T::zero()) || !shape.is_finite() {
        return Err(Error::Domain(format!("gamma shape must be positive, got {shape}")));
    }
    Ok(gamma_variate(rng.rng(), shape))
}

/// One inverse-gamma variate in shape–scale form: density ∝ x^(−a−1)·exp(−b/x).
pub fn draw_inverse_gamma<T: Real>(rng: &mut RngState, a: T, b: T) -> Result<T> {
    if !(b > T::zero()) || !b.is_finite() {
        return Err(Error::Domain(format!("inverse-gamma scale must be positive, got {b}")));
    }
    Ok(b / draw_gamma(rng, a)?)
}

/// Marsaglia–Tsang squeeze sampler. Shapes below one are boosted through
/// `Gamma(shape + 1)·U^(1/shape)`.
pub(crate) fn gamma_variate<T: Real, R: Rng + ?Sized>(rng: &mut R, shape: T) -> T {
    if shape < T::one() {
        let boost = T::sample_open01(rng).powf(shape.recip());
        return gamma_variate(rng, shape + T::one()) * boost;
    }
    let third = T::lit(1.0 / 3.0);
    let d = shape - third;
    let c = (T::lit(9.0) * d).sqrt().recip();
    let half = T::lit(0.5);
    loop {
        let x = T::sample_standard_normal(rng);
        let v = T::one() + c * x;
        if v <= T::zero() {
            continue;
        }
        let v = v * v * v;
        let u = T::sample_open01(rng);
        let x2 = x * x;
        if u < T::one() - T::lit(0.0331) * x2 * x2 {
            return d * v;
        }
        if u.ln() < half * x2 + d * (T::one() - v + v.ln()) {
            return d * v;
        }
    }
}

/// Sample percentile: sort ascending, take rank `r = q·(len − 1)` and
/// interpolate linearly between the order statistics at `floor(r)` and `ceil(r)`.
pub fn percentile<T: Real>(samples: &[T], spec: PercentileSpec) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::Empty("percentile of an empty sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let (lo, hi, frac) = rank(sorted.len(), spec.q());
    Ok(interpolate(sorted[lo], sorted[hi], frac))
}

/// Same rule as [`percentile`] via selection instead of a full sort. Reorders `samples`.
pub(crate) fn percentile_select<T: Real>(samples: &mut [T], q: f64) -> T {
    let (lo, hi, frac) = rank(samples.len(), q);
    let cmp = |a: &T, b: &T| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal);
    let (_, &mut at_lo, right) = samples.select_nth_unstable_by(lo, cmp);
    if hi == lo {
        return at_lo;
    }
    let at_hi = right.iter().copied().fold(T::infinity(), T::min);
    interpolate(at_lo, at_hi, frac)
}

fn rank(len: usize, q: f64) -> (usize, usize, f64) {
    let r = q * (len - 1) as f64;
    let lo = r.floor() as usize;
    let hi = (r.ceil() as usize).min(len - 1);
    (lo, hi, r - lo as f64)
}

fn interpolate<T: Real>(lo: T, hi: T, frac: f64) -> T {
    if frac == 0.0 {
        lo
    } else {
        lo + (hi - lo) * T::lit(frac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(q: f64) -> PercentileSpec {
        PercentileSpec::new(q).unwrap()
    }

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn same_seed_same_sequence() {
        let a: Vec<f64> = draw_standard_normal(&mut RngState::new(9), 50);
        let b: Vec<f64> = draw_standard_normal(&mut RngState::new(9), 50);
        assert_eq!(a, b);
        let c: Vec<f64> = draw_standard_normal(&mut RngState::new(10), 50);
        assert_ne!(a, c);
    }

    #[test]
    fn substreams_differ_and_are_reproducible() {
        let root = RngState::new(3);
        let a: Vec<f64> = draw_standard_normal(&mut root.substream(0), 8);
        let b: Vec<f64> = draw_standard_normal(&mut root.substream(1), 8);
        let a2: Vec<f64> = draw_standard_normal(&mut RngState::new(3).substream(0), 8);
        assert_ne!(a, b);
        assert_eq!(a, a2);
    }

    #[test]
    fn normal_moments() {
        let n = 100_000;
        let z: Vec<f64> = draw_standard_normal(&mut RngState::new(1), n);
        let m = mean(&z);
        let var = z.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
        assert!(m.abs() < 3.0 / (n as f64).sqrt(), "mean {m}");
        assert!((0.985..=1.015).contains(&var), "variance {var}");
    }

    #[test]
    fn gamma_moments() {
        let n = 100_000;
        for (shape, seed) in [(1.0, 2u64), (49.5, 3), (0.3, 4)] {
            let mut rng = RngState::new(seed);
            let x: Vec<f64> = (0..n).map(|_| draw_gamma(&mut rng, shape).unwrap()).collect();
            let se = shape.sqrt() / (n as f64).sqrt();
            assert!((mean(&x) - shape).abs() < 3.0 * se, "shape {shape}: mean {}", mean(&x));
        }
    }

    #[test]
    fn gamma_rejects_non_positive_shape() {
        let mut rng = RngState::new(1);
        assert!(draw_gamma(&mut rng, 0.0f64).is_err());
        assert!(draw_gamma(&mut rng, -1.0f64).is_err());
        assert!(draw_inverse_gamma(&mut rng, 1.0f64, 0.0).is_err());
    }

    #[test]
    fn inverse_gamma_moments() {
        let n = 100_000;
        let mut rng = RngState::new(5);
        let x: Vec<f64> = (0..n)
            .map(|_| draw_inverse_gamma(&mut rng, 3.0, 2.0).unwrap())
            .collect();
        // Var = b²/((a−1)²(a−2)) = 1 for a=3, b=2.
        assert!((mean(&x) - 1.0).abs() < 3.0 / (n as f64).sqrt());
        let recip: Vec<f64> = x.iter().map(|v| v.recip()).collect();
        // 1/X ~ Gamma(3, rate 2): mean 1.5, sd sqrt(3)/2.
        assert!((mean(&recip) - 1.5).abs() < 3.0 * 3f64.sqrt() / 2.0 / (n as f64).sqrt());
    }

    #[test]
    fn percentile_rules() {
        assert_eq!(percentile(&[7.0], spec(0.3)).unwrap(), 7.0);
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert!((percentile(&v, spec(0.5)).unwrap() - 50.5).abs() < 1e-12);
        assert!((percentile(&v, spec(0.025)).unwrap() - 3.475).abs() < 1e-12);
        assert!(percentile::<f64>(&[], spec(0.5)).is_err());
        assert!(PercentileSpec::new(0.0).is_err());
        assert!(PercentileSpec::new(1.0).is_err());
    }

    #[test]
    fn selection_matches_sort() {
        let mut rng = RngState::new(11);
        let v: Vec<f64> = draw_standard_normal(&mut rng, 1001);
        for q in [0.025, 0.5, 0.975, 0.3333] {
            let mut w = v.clone();
            assert_eq!(percentile_select(&mut w, q), percentile(&v, spec(q)).unwrap());
        }
    }

    #[test]
    fn single_precision_sampling() {
        let mut rng = RngState::new(2);
        let x: Vec<f32> = (0..20_000).map(|_| draw_gamma(&mut rng, 2.0f32).unwrap()).collect();
        let m = x.iter().sum::<f32>() / x.len() as f32;
        assert!((m - 2.0).abs() < 0.05);
    }
}
