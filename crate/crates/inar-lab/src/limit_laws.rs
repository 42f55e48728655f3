//! Reference limit distributions for the scaled estimation errors.
//!
//! In the drifted-walk case the errors are asymptotically a one
//! dimensional Gaussian spread along the line `x + y = 0`; in the
//! interleaved-walks case they follow a unit-root functional of Brownian
//! motion along the same line. This module provides the Gaussian limit
//! parameters, a sampler for the Brownian functional, and the standard
//! normal distribution function used by the test statistics.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

/// Parameters of the Gaussian limit of the drifted-walk case.
///
/// The scaled error vector converges to `scale * Z * (-1, 1)` with `Z`
/// standard normal, so each coordinate is `N(0, scale^2)` and the
/// covariance matrix is `scale^2 * [[1, -1], [-1, 1]]` (rank one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CltLimit {
    /// Marginal standard deviation `2 sigma / sqrt(mu^2 + 4 sigma^2)`.
    pub scale: f64,
    /// Covariance matrix of the limit vector, row major.
    pub covariance: [[f64; 2]; 2],
}

/// Gaussian limit parameters from the innovation mean and variance.
///
/// Rejects `mu <= 0` (no drift) and `sigma2 <= 0` (the limit degenerates
/// to a point mass).
pub fn clt_limit(mu: f64, sigma2: f64) -> Result<CltLimit> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "innovation mean must be positive, got {mu}"
        )));
    }
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "innovation variance must be positive, got {sigma2}"
        )));
    }
    let variance = 4.0 * sigma2 / (mu * mu + 4.0 * sigma2);
    let scale = variance.sqrt();
    Ok(CltLimit {
        scale,
        covariance: [[variance, -variance], [-variance, variance]],
    })
}

/// One draw of the unit-root limit functional
/// `int_0^1 W dW / int_0^1 W^2 dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfSample {
    /// Ratio of the two integrals.
    pub value: f64,
    /// `(W(1)^2 - 1) / 2`, the stochastic integral in closed form.
    pub numerator: f64,
    /// Left endpoint Riemann sum of `W^2` on the grid.
    pub denominator: f64,
    /// Grid resolution the draw used.
    pub steps: u32,
}

/// Numerator and denominator of the functional from one vector of
/// Brownian increments (each `N(0, 1/steps)`). Returns `None` when the
/// Riemann sum is not strictly positive and the draw must be rejected;
/// with real Gaussian increments that has probability zero, but forced
/// all-zero increments exercise the rejection path.
fn df_from_increments(increments: &[f64]) -> Option<(f64, f64)> {
    let steps = increments.len();
    let mut w = 0.0f64;
    let mut sum_sq = 0.0f64;
    for &g in increments {
        sum_sq += w * w; // left endpoint: includes W_0, excludes W_1
        w += g;
    }
    let numerator = (w * w - 1.0) / 2.0;
    let denominator = sum_sq / steps as f64;
    if denominator > 0.0 {
        Some((numerator, denominator))
    } else {
        None
    }
}

/// Samples the functional on a grid of `steps` points (at least 100).
///
/// The numerator uses the closed form `(W(1)^2 - 1) / 2`, which is exact
/// in distribution; only the denominator carries discretization error.
/// Degenerate denominators are rejected and redrawn.
pub fn sample_df<R: Rng + ?Sized>(steps: u32, rng: &mut R) -> DfSample {
    assert!(steps >= 100, "grid must have at least 100 steps");
    let sd = (1.0 / steps as f64).sqrt();
    let mut increments = vec![0.0f64; steps as usize];
    loop {
        for slot in increments.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *slot = z * sd;
        }
        if let Some((numerator, denominator)) = df_from_increments(&increments) {
            return DfSample {
                value: numerator / denominator,
                numerator,
                denominator,
                steps,
            };
        }
    }
}

/// Standard normal distribution function, absolute error below `1e-7`
/// (the underlying complementary error function is faithful to double
/// precision).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::innovations::stream_rng;

    #[test]
    fn clt_limit_matches_closed_form() {
        // mu = sigma^2 = 1: variance 4 / (1 + 4) = 0.8.
        let limit = clt_limit(1.0, 1.0).unwrap();
        assert!((limit.scale - 0.8f64.sqrt()).abs() < 1e-15);
        assert!((limit.covariance[0][0] - 0.8).abs() < 1e-15);
        assert!((limit.covariance[0][1] + 0.8).abs() < 1e-15);
        assert!((limit.covariance[1][0] + 0.8).abs() < 1e-15);
        assert!((limit.covariance[1][1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn clt_limit_rejects_degenerate_inputs() {
        assert!(clt_limit(0.0, 1.0).is_err());
        assert!(clt_limit(-1.0, 1.0).is_err());
        assert!(clt_limit(1.0, 0.0).is_err());
        assert!(clt_limit(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn clt_covariance_concentrates_on_the_antidiagonal_line() {
        // The rank-one covariance has eigenpairs (2 scale^2, (1, -1)) and
        // (0, (1, 1)): all mass sits on the line x + y = 0.
        let limit = clt_limit(2.0, 0.5).unwrap();
        let c = limit.covariance;
        let v = [1.0, -1.0];
        let cv = [
            c[0][0] * v[0] + c[0][1] * v[1],
            c[1][0] * v[0] + c[1][1] * v[1],
        ];
        let lambda = 2.0 * limit.scale * limit.scale;
        assert!((cv[0] - lambda * v[0]).abs() < 1e-14);
        assert!((cv[1] - lambda * v[1]).abs() < 1e-14);
        let u = [1.0, 1.0];
        let cu = [
            c[0][0] * u[0] + c[0][1] * u[1],
            c[1][0] * u[0] + c[1][1] * u[1],
        ];
        assert!(cu[0].abs() < 1e-14 && cu[1].abs() < 1e-14);
        // Determinant of a rank-one matrix vanishes.
        assert!((c[0][0] * c[1][1] - c[0][1] * c[1][0]).abs() < 1e-14);
    }

    #[test]
    fn df_parts_match_hand_computation() {
        // Four constant increments of 0.5: W = (0.5, 1, 1.5, 2),
        // numerator (4 - 1) / 2, denominator (0 + 0.25 + 1 + 2.25) / 4.
        let (num, den) = df_from_increments(&[0.5; 4]).unwrap();
        assert_eq!(num, 1.5);
        assert_eq!(den, 0.875);
    }

    #[test]
    fn zero_increments_are_rejected() {
        assert_eq!(df_from_increments(&[0.0; 256]), None);
    }

    #[test]
    #[should_panic(expected = "at least 100 steps")]
    fn coarse_grids_are_refused() {
        let mut rng = stream_rng(50, 0);
        sample_df(99, &mut rng);
    }

    #[test]
    fn df_draws_are_reproducible() {
        let mut a = stream_rng(51, 0);
        let mut b = stream_rng(51, 0);
        for _ in 0..5 {
            assert_eq!(sample_df(500, &mut a), sample_df(500, &mut b));
        }
    }

    #[test]
    fn df_numerator_is_centered_and_denominator_positive() {
        // E[(W(1)^2 - 1) / 2] = 0 with variance 1/2; 20000 draws give a
        // standard error of 0.005.
        let mut rng = stream_rng(52, 0);
        let draws = 20_000;
        let mut sum = 0.0;
        for _ in 0..draws {
            let s = sample_df(1000, &mut rng);
            assert!(s.denominator > 0.0);
            sum += s.numerator;
        }
        let mean = sum / draws as f64;
        assert!(mean.abs() < 0.02, "numerator mean {mean}");
    }

    #[test]
    fn df_value_sign_probability_matches_the_functional() {
        // value < 0 iff W(1)^2 < 1, which has probability
        // Phi(1) - Phi(-1) = 0.6827.
        let mut rng = stream_rng(53, 0);
        let draws = 20_000;
        let neg = (0..draws)
            .filter(|_| sample_df(400, &mut rng).value < 0.0)
            .count();
        let frac = neg as f64 / draws as f64;
        assert!((frac - 0.6827).abs() < 0.015, "negative fraction {frac}");
    }

    #[test]
    fn df_distribution_is_stable_under_grid_refinement() {
        // Kolmogorov-Smirnov distance between samples at steps and
        // 2 * steps stays within sampling noise plus a small bias term.
        let draws = 20_000;
        let sample = |steps: u32, seed: u64| -> Vec<f64> {
            let mut rng = stream_rng(seed, 0);
            (0..draws)
                .map(|_| sample_df(steps, &mut rng).value)
                .collect()
        };
        let coarse = sample(200, 54);
        let fine = sample(400, 55);
        let (stat, _) = crate::montecarlo::ks_two_sample(&coarse, &fine).unwrap();
        let bound = 2.0 / (draws as f64).sqrt() + 0.01;
        assert!(stat < bound, "KS {stat} vs bound {bound}");
    }

    #[test]
    fn normal_cdf_matches_reference_points() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.959964) - 0.975).abs() < 1e-6);
        assert!((normal_cdf(-1.959964) - 0.025).abs() < 1e-6);
        assert!((normal_cdf(1.0) - 0.841344746068543).abs() < 1e-9);
        assert!(normal_cdf(-40.0).abs() < 1e-300);
        assert_eq!(normal_cdf(40.0), 1.0);
    }

    #[test]
    fn normal_cdf_agrees_with_quadrature_oracle() {
        // Simpson's rule on the density from 0 to x, an independent route
        // to the same function.
        let simpson = |x: f64| -> f64 {
            let steps = 20_000usize; // even
            let h = x / steps as f64;
            let density = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let mut acc = density(0.0) + density(x);
            for i in 1..steps {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * density(i as f64 * h);
            }
            0.5 + acc * h / 3.0
        };
        for x in [-6.0, -3.0, -1.5, -0.1, 0.2, 0.5, 1.0, 2.5, 4.0, 6.0] {
            let want = simpson(x);
            let got = normal_cdf(x);
            assert!((got - want).abs() < 1e-9, "x = {x}: {got} vs {want}");
        }
    }

    #[test]
    fn normal_cdf_is_symmetric_and_monotone() {
        let grid = 10_000;
        let mut prev = 0.0;
        for i in 0..=grid {
            let x = -8.0 + 16.0 * i as f64 / grid as f64;
            let p = normal_cdf(x);
            assert!((p + normal_cdf(-x) - 1.0).abs() < 1e-7, "symmetry at {x}");
            assert!(p >= prev, "monotonicity at {x}");
            prev = p;
        }
    }
}
