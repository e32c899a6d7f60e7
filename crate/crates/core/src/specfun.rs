//! Special functions for the reference solutions: the standard normal CDF
//! (Black–Scholes) and the Jacobi elliptic sine (exact pendulum motion).

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Standard normal cumulative distribution function.
///
/// Hart's double-precision rational approximation (as arranged by West),
/// absolute error well below 1e-14 on the real line.
pub fn std_normal_cdf<T: Real>(x: T) -> T {
    let z = x.abs().as_f64();
    let tail = if z > 37.0 {
        0.0
    } else {
        let e = (-0.5 * z * z).exp();
        if z < 7.071_067_811_865_47 {
            let num = (((((0.035_262_496_599_891_1 * z + 0.700_383_064_443_688) * z + 6.373_962_203_531_65) * z
                + 33.912_866_078_383)
                * z
                + 112.079_291_497_871)
                * z
                + 221.213_596_169_931)
                * z
                + 220.206_867_912_376;
            let den = ((((((0.088_388_347_648_318_4 * z + 1.755_667_163_182_64) * z + 16.064_177_579_207) * z
                + 86.780_732_202_946_1)
                * z
                + 296.564_248_779_674)
                * z
                + 637.333_633_378_831)
                * z
                + 793.826_512_519_948)
                * z
                + 440.413_735_824_752;
            e * num / den
        } else {
            let mut cf = z + 0.65;
            cf = z + 4.0 / cf;
            cf = z + 3.0 / cf;
            cf = z + 2.0 / cf;
            cf = z + 1.0 / cf;
            e / cf / 2.506_628_274_631
        }
    };
    let cdf = if x.as_f64() > 0.0 { 1.0 - tail } else { tail };
    T::lit(cdf)
}

const AGM_MAX_STEPS: usize = 64;

fn check_modulus<T: Real>(k: T) -> Result<()> {
    if k >= T::zero() && k <= T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("elliptic modulus {k} outside [0, 1]")))
    }
}

/// Jacobi elliptic sine `sn(u, k)` for modulus `k` (parameter `k²`).
///
/// Descending Landen transformation: run the AGM from `(1, √(1−k²))`, scale the
/// amplitude by `2^N·a_N`, then recover it with
/// `φ_{n−1} = (φ_n + asin(c_n/a_n · sin φ_n)) / 2`.
pub fn jacobi_sn<T: Real>(u: T, k: T) -> Result<T> {
    check_modulus(k)?;
    if k == T::zero() {
        return Ok(u.sin());
    }
    if k == T::one() {
        return Ok(u.tanh());
    }
    let mut a = vec![T::one()];
    let mut c = vec![k];
    let mut b = (T::one() - k * k).sqrt();
    let eps = T::epsilon();
    while c.last().unwrap().abs() > eps && a.len() < AGM_MAX_STEPS {
        let an = *a.last().unwrap();
        a.push((an + b) / T::lit(2.0));
        c.push((an - b) / T::lit(2.0));
        b = (an * b).sqrt();
    }
    let steps = a.len() - 1;
    let mut phi = T::lit(2f64.powi(steps as i32)) * a[steps] * u;
    for nidx in (1..=steps).rev() {
        phi = (phi + (c[nidx] / a[nidx] * phi.sin()).asin()) / T::lit(2.0);
    }
    Ok(phi.sin())
}

/// Complete elliptic integral of the first kind, `K(k) = π / (2·AGM(1, √(1−k²)))`.
pub fn complete_elliptic_k<T: Real>(k: T) -> Result<T> {
    check_modulus(k)?;
    if k == T::one() {
        return Ok(T::infinity());
    }
    let mut a = T::one();
    let mut b = (T::one() - k * k).sqrt();
    for _ in 0..AGM_MAX_STEPS {
        if (a - b).abs() <= T::epsilon() * a {
            break;
        }
        let next = (a + b) / T::lit(2.0);
        b = (a * b).sqrt();
        a = next;
    }
    Ok(T::FRAC_PI_2() / a)
}

/// `t0` is the time the pendulum passes the bottom; `k` is the elliptic
/// modulus, `k² = ½ − ½cos θ + ¼θ̇²` (the conserved energy).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumConstants<T> {
    pub t0: T,
    pub k: T,
}

impl<T: Real> PendulumConstants<T> {
    pub fn new(t0: T, k: T) -> Result<Self> {
        if k > T::zero() && k < T::one() {
            Ok(Self { t0, k })
        } else {
            Err(Error::Domain(format!("pendulum modulus {k} outside (0, 1)")))
        }
    }

    /// Constants of the swing from 1.2 rad back to 1.2 rad over `[0, 2π]`.
    pub fn reference() -> Self {
        Self {
            t0: T::lit(4.882_567_374),
            k: T::lit(0.587_076_141_3),
        }
    }
}

/// Exact pendulum angle `θ(t) = 2·asin(k·sn(t − t0, k))`.
pub fn pendulum_exact<T: Real>(t: T, c: &PendulumConstants<T>) -> T {
    let sn = jacobi_sn(t - c.t0, c.k).expect("modulus validated on construction");
    T::lit(2.0) * (c.k * sn).asin()
}

/// Energy invariant `½ − ½cos θ + ¼θ̇²`; equals `k²` along an exact trajectory.
pub fn pendulum_energy<T: Real>(theta: T, theta_dot: T) -> T {
    let half = T::lit(0.5);
    half - half * theta.cos() + T::lit(0.25) * theta_dot * theta_dot
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsSolution<T> {
    pub constants: PendulumConstants<T>,
    pub iterations: usize,
    pub residual: T,
}

const CONSTANTS_TOL: f64 = 1e-10;
const CONSTANTS_MAX_ITER: usize = 100;

/// Fits `(t0, k)` so that the exact trajectory meets `θ(0) = alpha` and
/// `θ(horizon) = beta`, by 2-D Newton with a central-difference Jacobian.
pub fn solve_pendulum_constants<T: Real>(
    alpha: T,
    beta: T,
    horizon: T,
    guess: PendulumConstants<T>,
) -> Result<ConstantsSolution<T>> {
    let residual = |c: &PendulumConstants<T>| -> [T; 2] {
        [pendulum_exact(T::zero(), c) - alpha, pendulum_exact(horizon, c) - beta]
    };
    let norm = |r: &[T; 2]| r[0].abs().max(r[1].abs());
    let tol = T::lit(CONSTANTS_TOL);
    let step = T::lit(1e-6);
    let two = T::lit(2.0);

    let mut c = PendulumConstants::new(guess.t0, guess.k)?;
    let mut r = residual(&c);
    for iteration in 0..=CONSTANTS_MAX_ITER {
        if norm(&r) <= tol {
            return Ok(ConstantsSolution {
                constants: c,
                iterations: iteration,
                residual: norm(&r),
            });
        }
        if iteration == CONSTANTS_MAX_ITER || !norm(&r).is_finite() {
            break;
        }
        let hk = step.min((T::one() - c.k) / two).min(c.k / two);
        let shift = |dt0: T, dk: T| PendulumConstants {
            t0: c.t0 + dt0,
            k: c.k + dk,
        };
        let (rp, rm) = (residual(&shift(step, T::zero())), residual(&shift(-step, T::zero())));
        let d_t0 = [(rp[0] - rm[0]) / (two * step), (rp[1] - rm[1]) / (two * step)];
        let (rp, rm) = (residual(&shift(T::zero(), hk)), residual(&shift(T::zero(), -hk)));
        let d_k = [(rp[0] - rm[0]) / (two * hk), (rp[1] - rm[1]) / (two * hk)];
        let det = d_t0[0] * d_k[1] - d_k[0] * d_t0[1];
        if det == T::zero() || !det.is_finite() {
            break;
        }
        let delta_t0 = (r[0] * d_k[1] - d_k[0] * r[1]) / det;
        let delta_k = (d_t0[0] * r[1] - r[0] * d_t0[1]) / det;
        let mut k_next = c.k - delta_k;
        // Keep the modulus inside (0, 1); halve towards the boundary instead of crossing it.
        if k_next <= T::zero() {
            k_next = c.k / two;
        } else if k_next >= T::one() {
            k_next = (c.k + T::one()) / two;
        }
        c = PendulumConstants {
            t0: c.t0 - delta_t0,
            k: k_next,
        };
        r = residual(&c);
    }
    Err(Error::ConstantsNotConverged {
        iterations: CONSTANTS_MAX_ITER,
        residual: norm(&r).as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Adaptive Simpson quadrature, used as an independent oracle for Φ.
    fn simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn step<F: Fn(f64) -> f64 + Copy>(
            f: F,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
    }

    fn density(x: f64) -> f64 {
        (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
    }

    #[test]
    fn normal_cdf_symmetry_and_center() {
        assert_eq!(std_normal_cdf(0.0f64), 0.5);
        for x in [0.5, 1.0, 2.0] {
            assert!((std_normal_cdf(x) + std_normal_cdf(-x) - 1.0f64).abs() < 1e-15);
        }
    }

    #[test]
    fn normal_cdf_matches_quadrature() {
        for x in [-3.0, -1.0, 0.3, 1.96, 4.0, 8.0] {
            let oracle = 0.5 + simpson(density, 0.0, x, 1e-15);
            let got: f64 = std_normal_cdf(x);
            assert!((got - oracle).abs() <= 1e-7, "x={x}: {got} vs {oracle}");
        }
    }

    #[test]
    fn normal_cdf_is_monotone() {
        let mut prev = 0.0f64;
        for i in -400..=400 {
            let v: f64 = std_normal_cdf(i as f64 * 0.025);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn sn_degenerate_moduli() {
        for u in [0.3, 1.0, 2.5] {
            assert!((jacobi_sn(u, 0.0f64).unwrap() - f64::sin(u)).abs() < 1e-10);
        }
        for u in [0.3, 1.0] {
            assert!((jacobi_sn(u, 1.0f64).unwrap() - f64::tanh(u)).abs() < 1e-8);
            // Just below the degenerate modulus the AGM route must agree closely.
            assert!((jacobi_sn(u, 1.0 - 1e-12f64).unwrap() - f64::tanh(u)).abs() < 1e-6);
        }
        for k in [0.1, 0.5, 0.99] {
            assert_eq!(jacobi_sn(0.0f64, k).unwrap(), 0.0);
        }
        assert!(jacobi_sn(1.0f64, 1.5).is_err());
        assert!(jacobi_sn(1.0f64, -0.1).is_err());
    }

    #[test]
    fn sn_satisfies_its_differential_equation() {
        // (sn')² = (1 − sn²)(1 − k²sn²); checked with a central difference.
        let k = 0.7f64;
        let h = 1e-5;
        for i in 0..20 {
            let u = -3.0 + 0.3 * i as f64;
            let s = jacobi_sn(u, k).unwrap();
            let ds = (jacobi_sn(u + h, k).unwrap() - jacobi_sn(u - h, k).unwrap()) / (2.0 * h);
            let rhs = (1.0 - s * s) * (1.0 - k * k * s * s);
            assert!((ds * ds - rhs).abs() < 1e-8, "u={u}");
        }
    }

    #[test]
    fn sn_odd_and_periodic() {
        for k in [0.2, 0.587_076_141_3, 0.9, 0.99] {
            let period = 4.0 * complete_elliptic_k(k).unwrap();
            for i in 0..25 {
                let u = -4.0 + 0.37 * i as f64;
                let s = jacobi_sn(u, k).unwrap();
                assert!((jacobi_sn(-u, k).unwrap() + s).abs() < 1e-12);
                assert!((jacobi_sn(u + period, k).unwrap() - s).abs() < 1e-8);
            }
            assert!((jacobi_sn(period / 4.0, k).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn complete_integral_limits() {
        assert!((complete_elliptic_k(0.0f64).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(complete_elliptic_k(1.0f64).unwrap().is_infinite());
    }

    #[test]
    fn pendulum_reference_constants_hit_boundaries() {
        let c = PendulumConstants::<f64>::reference();
        assert_eq!(pendulum_exact(c.t0, &c), 0.0);
        assert!((pendulum_exact(0.0, &c) - 1.2).abs() < 1e-6);
        assert!((pendulum_exact(2.0 * PI, &c) - 1.2).abs() < 1e-6);
    }

    #[test]
    fn energy_is_conserved_along_exact_solution() {
        let c = PendulumConstants::<f64>::reference();
        let h = 1e-5;
        for i in 0..30 {
            let t = 0.2 * i as f64;
            let th = pendulum_exact(t, &c);
            let dth = (pendulum_exact(t + h, &c) - pendulum_exact(t - h, &c)) / (2.0 * h);
            assert!((pendulum_energy(th, dth) - c.k * c.k).abs() < 1e-8);
        }
    }

    #[test]
    fn solves_reference_constants_from_nearby_guess() {
        let guess = PendulumConstants::new(4.9, 0.6).unwrap();
        let sol = solve_pendulum_constants(1.2, 1.2, 2.0 * PI, guess).unwrap();
        assert!((sol.constants.t0 - 4.882_567_374).abs() < 1e-6);
        assert!((sol.constants.k - 0.587_076_141_3).abs() < 1e-6);
        assert!(sol.residual <= 1e-10);
    }

    #[test]
    fn reference_constants_are_nearly_a_fixed_point() {
        let sol = solve_pendulum_constants(1.2, 1.2, 2.0 * PI, PendulumConstants::reference()).unwrap();
        assert!(sol.iterations <= 2);
    }

    #[test]
    fn small_amplitude_swing_is_harmonic() {
        let alpha = 0.01;
        let guess = PendulumConstants::new(1.5 * PI, alpha / 2.0).unwrap();
        let sol = solve_pendulum_constants(alpha, alpha, 2.0 * PI, guess).unwrap();
        let c = sol.constants;
        assert!((pendulum_exact(0.0, &c) - alpha).abs() <= 1e-10);
        assert!((c.k - alpha / 2.0).abs() < 1e-5);
        for i in 0..=40 {
            let t = 2.0 * PI * i as f64 / 40.0;
            assert!((pendulum_exact(t, &c) - alpha * t.cos()).abs() < 1e-5, "t={t}");
        }
    }

    #[test]
    fn single_precision_sn() {
        let s = jacobi_sn(0.8f32, 0.5).unwrap();
        assert!((s as f64 - jacobi_sn(0.8f64, 0.5).unwrap()).abs() < 1e-6);
    }
}
