//! Conditional least squares for the INAR(2) coefficients.
//!
//! With the innovation mean `mu` known, the criterion
//! `Q_n(a, b) = sum_{k=1}^n (X_k - a X_{k-1} - b X_{k-2} - mu)^2`
//! is minimized in closed form. The normal equations are accumulated in
//! exact integer arithmetic; only the final division by the determinant
//! and the multiplications involving `mu` are floating point, so branch
//! decisions (positivity of the lag-2 sum of squares, singularity of the
//! system) never suffer rounding.
//!
//! Three branches cover every path:
//! - full rank: the lag-2 regressor is not identically zero; the 2x2
//!   system has a unique solution,
//! - lag-1 only: the lag-2 regressor vanishes but `X_{n-1} > 0`; only the
//!   lag-1 coefficient is identified,
//! - degenerate: both regressors vanish; the criterion is constant.
//!
//! A fourth outcome, exactly collinear regressors with a nonzero lag-2
//! regressor, is reported as an error. Under the zero-start convention it
//! cannot arise from data (proportionality would force the whole path to
//! zero), but the solver checks for it rather than divide by zero.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::process::{split_even_odd, SamplePath};

/// Bound on the exact accumulators that keeps every downstream product
/// (entries times entries, at most `2^124`) inside `i128`.
const MAX_ACCUMULATOR: i128 = 1 << 62;

/// Which regressor column a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Lag {
    One,
    Two,
}

/// Exact sufficient statistics of the least squares problem.
///
/// `s11, s12, s22` are the Gram matrix entries of the lag-1 and lag-2
/// regressors; `t1, t2` and `u1, u2` are the cross products with the
/// response and the plain regressor sums, so that the right hand side is
/// `b_i = t_i - mu * u_i`. All integer fields are exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalEquations {
    pub n: usize,
    pub s11: i128,
    pub s12: i128,
    pub s22: i128,
    pub t1: i128,
    pub t2: i128,
    pub u1: i128,
    pub u2: i128,
    pub mu: f64,
}

impl NormalEquations {
    /// Exact determinant `s11 * s22 - s12^2`. Nonnegative by the
    /// Cauchy-Schwarz inequality.
    pub fn det_exact(&self) -> i128 {
        self.s11 * self.s22 - self.s12 * self.s12
    }

    pub fn det(&self) -> f64 {
        self.det_exact() as f64
    }

    /// Right hand side entry for the lag-1 column.
    pub fn b1(&self) -> f64 {
        self.t1 as f64 - self.mu * self.u1 as f64
    }

    /// Right hand side entry for the lag-2 column.
    pub fn b2(&self) -> f64 {
        self.t2 as f64 - self.mu * self.u2 as f64
    }

    /// Gram matrix as floating point, row major.
    pub fn gram(&self) -> [[f64; 2]; 2] {
        [
            [self.s11 as f64, self.s12 as f64],
            [self.s12 as f64, self.s22 as f64],
        ]
    }
}

/// Closed form minimizer of the least squares criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClsEstimate {
    /// Unique minimizer of the full 2x2 system.
    FullRank { alpha_hat: f64, beta_hat: f64 },
    /// The lag-2 regressor vanishes; only `alpha_hat` is identified and
    /// the criterion does not depend on the lag-2 coefficient.
    Lag1Only { alpha_hat: f64 },
    /// Both regressors vanish; the criterion is constant in `(a, b)`.
    Degenerate,
}

impl ClsEstimate {
    pub fn branch_name(&self) -> &'static str {
        match self {
            Self::FullRank { .. } => "full_rank",
            Self::Lag1Only { .. } => "lag1_only",
            Self::Degenerate => "degenerate",
        }
    }

    pub fn alpha_hat(&self) -> Option<f64> {
        match *self {
            Self::FullRank { alpha_hat, .. } | Self::Lag1Only { alpha_hat } => Some(alpha_hat),
            Self::Degenerate => None,
        }
    }

    pub fn beta_hat(&self) -> Option<f64> {
        match *self {
            Self::FullRank { beta_hat, .. } => Some(beta_hat),
            _ => None,
        }
    }
}

fn checked_term(acc: &mut i128, a: u64, b: u64, n: usize) -> Result<()> {
    let prod = (a as i128)
        .checked_mul(b as i128)
        .ok_or(Error::AccumulatorOverflow { n })?;
    *acc = acc
        .checked_add(prod)
        .ok_or(Error::AccumulatorOverflow { n })?;
    Ok(())
}

/// Accumulates the exact normal equations of a path in one pass.
///
/// `mu` is the known innovation mean and must be positive and finite.
pub fn accumulate(path: &SamplePath, mu: f64) -> Result<NormalEquations> {
    assert!(mu.is_finite() && mu > 0.0, "mu must be positive and finite");
    let n = path.len();
    let (mut s11, mut s12, mut s22) = (0i128, 0i128, 0i128);
    let (mut t1, mut t2) = (0i128, 0i128);
    let (mut u1, mut u2) = (0i128, 0i128);
    for k in 1..=n as i64 {
        let x0 = path.x(k);
        let x1 = path.x(k - 1);
        let x2 = path.x(k - 2);
        checked_term(&mut s11, x1, x1, n)?;
        checked_term(&mut s12, x1, x2, n)?;
        checked_term(&mut s22, x2, x2, n)?;
        checked_term(&mut t1, x0, x1, n)?;
        checked_term(&mut t2, x0, x2, n)?;
        checked_term(&mut u1, x1, 1, n)?;
        checked_term(&mut u2, x2, 1, n)?;
    }
    // s11 bounds every other accumulator via Cauchy-Schwarz except t2,
    // which is bounded by sqrt(s00 * s22) with s00 the response sum of
    // squares; checking the three diagonals plus t2 keeps all products
    // representable.
    let s00_bound = [s11, s22, t1, t2, s12];
    if s00_bound.iter().any(|&s| s > MAX_ACCUMULATOR) {
        return Err(Error::AccumulatorOverflow { n });
    }
    Ok(NormalEquations {
        n,
        s11,
        s12,
        s22,
        t1,
        t2,
        u1,
        u2,
        mu,
    })
}

/// The least squares criterion evaluated term by term.
pub fn objective(path: &SamplePath, mu: f64, alpha: f64, beta: f64) -> f64 {
    (1..=path.len() as i64)
        .map(|k| {
            let d =
                path.x(k) as f64 - alpha * path.x(k - 1) as f64 - beta * path.x(k - 2) as f64 - mu;
            d * d
        })
        .sum()
}

/// Solves accumulated normal equations, given the last two path values
/// (needed by the reduced branch).
///
/// The full-rank solution is the adjoint formula
/// `(s22 * b1 - s12 * b2, s11 * b2 - s12 * b1) / det`, evaluated with all
/// integer products carried out exactly before the single floating point
/// combination with `mu`.
pub fn solve_normal_equations(
    neq: &NormalEquations,
    x_last: u64,
    x_prev: u64,
) -> Result<ClsEstimate> {
    if neq.s22 > 0 {
        let det = neq.det_exact();
        if det == 0 {
            return Err(Error::CollinearRegressors { s22: neq.s22 });
        }
        debug_assert!(det > 0, "Gram determinant must be nonnegative");
        let alpha_num = (neq.s22 * neq.t1 - neq.s12 * neq.t2) as f64
            - neq.mu * (neq.s22 * neq.u1 - neq.s12 * neq.u2) as f64;
        let beta_num = (neq.s11 * neq.t2 - neq.s12 * neq.t1) as f64
            - neq.mu * (neq.s11 * neq.u2 - neq.s12 * neq.u1) as f64;
        let det = det as f64;
        Ok(ClsEstimate::FullRank {
            alpha_hat: alpha_num / det,
            beta_hat: beta_num / det,
        })
    } else if x_prev != 0 {
        Ok(ClsEstimate::Lag1Only {
            alpha_hat: (x_last as f64 - neq.mu) / x_prev as f64,
        })
    } else {
        Ok(ClsEstimate::Degenerate)
    }
}

/// Closed form conditional least squares estimate for a path.
pub fn estimate(path: &SamplePath, mu: f64) -> Result<ClsEstimate> {
    assert!(
        !path.is_empty(),
        "estimation needs at least one observation"
    );
    let neq = accumulate(path, mu)?;
    let n = path.len() as i64;
    solve_normal_equations(&neq, path.x(n), path.x(n - 1))
}

/// Estimation errors scaled by `n^rate`:
/// `[n^rate (alpha_hat - alpha), n^rate (beta_hat - beta)]`.
///
/// Only defined for full-rank estimates.
pub fn scaled_error(est: &ClsEstimate, truth: (f64, f64), n: usize, rate: f64) -> Result<[f64; 2]> {
    match *est {
        ClsEstimate::FullRank {
            alpha_hat,
            beta_hat,
        } => {
            let scale = (n as f64).powf(rate);
            Ok([scale * (alpha_hat - truth.0), scale * (beta_hat - truth.1)])
        }
        ref other => Err(Error::NotFullRank {
            branch: other.branch_name(),
        }),
    }
}

/// Gram determinant divided by `n^exponent`.
pub fn det_scaling(neq: &NormalEquations, exponent: f64) -> f64 {
    neq.det() / (neq.n as f64).powf(exponent)
}

/// Exact `sum_{k=1}^n X_{k-lag}^2` divided by `n^exponent`.
pub fn sum_sq_scaling(path: &SamplePath, lag: Lag, exponent: f64) -> Result<f64> {
    let n = path.len();
    let shift = match lag {
        Lag::One => 1,
        Lag::Two => 2,
    };
    let mut sum = 0i128;
    for k in 1..=n as i64 {
        let x = path.x(k - shift);
        checked_term(&mut sum, x, x, n)?;
    }
    Ok(sum as f64 / (n as f64).powf(exponent))
}

/// Normalized functionals of the interleaved walks extracted from a path.
///
/// The path is split into its even and odd subsequences `U` and `V`
/// (truncated to a common length `m`), centered by the drift `k * mu`,
/// and summarized as, writing `cU_k = U_k - k mu` and `cV_k = V_k - k mu`:
///
/// index | value
/// ----- | -----
/// 0     | `m^{-1/2} cU_m`
/// 1     | `m^{-1/2} cV_m`
/// 2     | `m^{-5/2} sum k cU_k`
/// 3     | `m^{-5/2} sum k cV_k`
/// 4     | `m^{-2} sum cU_k^2`
/// 5     | `m^{-2} sum cV_k^2`
/// 6     | `m^{-3/2} sum cU_k`
/// 7     | `m^{-3/2} sum cV_k`
/// 8     | `m^{-2} sum cU_k cV_k`
///
/// For paths shorter than 2 the common length is zero and all entries are
/// zero.
pub fn building_blocks(path: &SamplePath, mu: f64) -> [f64; 9] {
    let (even, odd) = split_even_odd(path);
    let m = even.len().min(odd.len());
    if m == 0 {
        return [0.0; 9];
    }
    let center = |walk: &[u64]| -> Vec<f64> {
        walk[..m]
            .iter()
            .enumerate()
            .map(|(i, &v)| v as f64 - (i + 1) as f64 * mu)
            .collect()
    };
    let cu = center(&even);
    let cv = center(&odd);
    let mf = m as f64;
    let weighted = |c: &[f64]| {
        c.iter()
            .enumerate()
            .map(|(i, &v)| (i + 1) as f64 * v)
            .sum::<f64>()
    };
    let sum = |c: &[f64]| c.iter().sum::<f64>();
    let sum_sq = |c: &[f64]| c.iter().map(|v| v * v).sum::<f64>();
    let cross = cu.iter().zip(&cv).map(|(a, b)| a * b).sum::<f64>();
    [
        cu[m - 1] / mf.sqrt(),
        cv[m - 1] / mf.sqrt(),
        weighted(&cu) / mf.powf(2.5),
        weighted(&cv) / mf.powf(2.5),
        sum_sq(&cu) / (mf * mf),
        sum_sq(&cv) / (mf * mf),
        sum(&cu) / mf.powf(1.5),
        sum(&cv) / mf.powf(1.5),
        cross / (mf * mf),
    ]
}
