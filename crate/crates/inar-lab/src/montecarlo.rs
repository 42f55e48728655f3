//! Monte Carlo verification of the two limit theorems.
//!
//! Each experiment simulates many independent paths of one unstable
//! nonprimitive parameter case, computes the scaled estimation errors,
//! and compares their empirical distribution against the corresponding
//! reference law with a Kolmogorov-Smirnov statistic. Replication `r`
//! draws from stream `(master_seed, r)`, so reports are bit-identical
//! however the replications are scheduled across worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cls::{estimate, scaled_error, ClsEstimate};
use crate::error::{Error, Result};
use crate::innovations::{stream_rng, InnovationSpec};
use crate::limit_laws::{clt_limit, normal_cdf, sample_df};
use crate::process::{simulate_with_rng, InarParams, SamplePath};

/// Asymptotic 5 percent Kolmogorov-Smirnov critical coefficient.
pub const KS_FIVE_PERCENT_COEFF: f64 = 1.358;

/// Additive slack on the Gaussian-limit KS threshold, covering the
/// finite-length bias of the simulated paths at the documented sizes.
pub const CLT_FINITE_N_ALLOWANCE: f64 = 0.017;

/// Additive slack on the unit-root KS threshold, covering both path
/// length bias and oracle grid discretization.
pub const DF_FINITE_N_ALLOWANCE: f64 = 0.035;

/// Upper bound on [`McReport::line_concentration`] for a passing
/// Gaussian-limit experiment.
pub const LINE_CONCENTRATION_LIMIT: f64 = 0.2;

/// Default grid resolution for the unit-root oracle sampler.
pub const DEFAULT_DF_STEPS: u32 = 10_000;

/// Default number of oracle draws for the unit-root comparison.
pub const DEFAULT_DF_ORACLE_SIZE: usize = 10_000;

/// Oracle draws use streams under `master_seed ^ DF_ORACLE_SEED_TAG` so
/// they never collide with replication streams.
const DF_ORACLE_SEED_TAG: u64 = u64::from_be_bytes(*b"DFORACLE");

/// Which limit theorem an experiment exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McCase {
    /// Coefficients `(1, 0)`: errors scaled by `sqrt(n)` approach a
    /// Gaussian on the line `x + y = 0`.
    Clt,
    /// Coefficients `(0, 1)`: errors scaled by `n` approach the
    /// Dickey-Fuller functional on the same line.
    DickeyFuller,
}

/// Full configuration of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub case: McCase,
    pub innovation: InnovationSpec,
    /// Path length per replication.
    pub n: usize,
    /// Number of replications.
    pub reps: usize,
    pub master_seed: u64,
    /// Oracle grid resolution (unit-root case only).
    pub df_steps: u32,
    /// Number of oracle draws (unit-root case only).
    pub df_oracle_size: usize,
}

impl McConfig {
    /// Gaussian-limit experiment with default oracle settings.
    pub fn clt(innovation: InnovationSpec, n: usize, reps: usize, master_seed: u64) -> Self {
        Self {
            case: McCase::Clt,
            innovation,
            n,
            reps,
            master_seed,
            df_steps: DEFAULT_DF_STEPS,
            df_oracle_size: DEFAULT_DF_ORACLE_SIZE,
        }
    }

    /// Unit-root experiment with default oracle settings.
    pub fn dickey_fuller(
        innovation: InnovationSpec,
        n: usize,
        reps: usize,
        master_seed: u64,
    ) -> Self {
        Self {
            case: McCase::DickeyFuller,
            ..Self::clt(innovation, n, reps, master_seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.innovation.validate()?;
        if self.reps < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 replications, got {}",
                self.reps
            )));
        }
        if self.n < 10 {
            return Err(Error::InvalidConfig(format!(
                "need paths of length at least 10, got {}",
                self.n
            )));
        }
        if self.innovation.mean() <= 0.0 {
            return Err(Error::InvalidConfig(
                "innovation law must have positive mean".into(),
            ));
        }
        match self.case {
            McCase::Clt => {
                if !self.innovation.has_finite_fourth_moment() {
                    return Err(Error::InvalidConfig(
                        "the Gaussian limit requires a finite fourth moment".into(),
                    ));
                }
                if self.innovation.variance() <= 0.0 {
                    return Err(Error::InvalidConfig(
                        "the Gaussian limit degenerates for zero-variance innovations".into(),
                    ));
                }
            }
            McCase::DickeyFuller => {
                if self.df_steps < 100 {
                    return Err(Error::InvalidConfig(format!(
                        "oracle grid needs at least 100 steps, got {}",
                        self.df_steps
                    )));
                }
                if self.df_oracle_size < 2 {
                    return Err(Error::InvalidConfig(format!(
                        "oracle needs at least 2 draws, got {}",
                        self.df_oracle_size
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Outcome of one experiment.
///
/// `samples` holds the scaled error pair of every full-rank replication in
/// replication order; replications whose estimate was not full rank are
/// only counted in `skipped`. `line_concentration` is the mean squared
/// coordinate sum over the variance of the first coordinate; it is
/// infinite (serialized as null) when fewer than two samples exist or the
/// first coordinate is constant.
#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub config: McConfig,
    pub samples: Vec<[f64; 2]>,
    pub skipped: usize,
    pub ks_stat: f64,
    pub ks_threshold: f64,
    pub line_concentration: f64,
    pub passed: bool,
}

fn line_concentration(samples: &[[f64; 2]]) -> f64 {
    if samples.len() < 2 {
        return f64::INFINITY;
    }
    let m = samples.len() as f64;
    let mean_sq_sum = samples.iter().map(|s| (s[0] + s[1]).powi(2)).sum::<f64>() / m;
    let mean1 = samples.iter().map(|s| s[0]).sum::<f64>() / m;
    let var1 = samples.iter().map(|s| (s[0] - mean1).powi(2)).sum::<f64>() / (m - 1.0);
    if var1 > 0.0 {
        mean_sq_sum / var1
    } else {
        f64::INFINITY
    }
}

/// Runs all replications of a case in parallel and collects the scaled
/// errors of the full-rank ones, in replication order.
fn collect_samples(
    config: &McConfig,
    params: &InarParams,
    truth: (f64, f64),
    rate: f64,
) -> Result<(Vec<[f64; 2]>, usize)> {
    let mu = config.innovation.mean();
    let outcomes: Vec<Result<Option<[f64; 2]>>> = (0..config.reps)
        .into_par_iter()
        .map(|r| {
            let run = || -> Result<Option<[f64; 2]>> {
                let mut rng = stream_rng(config.master_seed, r as u64);
                let values = simulate_with_rng(params, &config.innovation, config.n, &mut rng)?;
                let path = SamplePath::from_values(values);
                match estimate(&path, mu)? {
                    est @ ClsEstimate::FullRank { .. } => {
                        Ok(Some(scaled_error(&est, truth, config.n, rate)?))
                    }
                    _ => Ok(None),
                }
            };
            run().map_err(|e| Error::Replication {
                rep: r,
                source: Box::new(e),
            })
        })
        .collect();
    let mut samples = Vec::with_capacity(config.reps);
    let mut skipped = 0;
    for outcome in outcomes {
        match outcome? {
            Some(pair) => samples.push(pair),
            None => skipped += 1,
        }
    }
    Ok((samples, skipped))
}

/// Gaussian-limit experiment for the drifted-walk case `(1, 0)`.
///
/// The first coordinate of each sample is `sqrt(n) (alpha_hat - 1)` and
/// the second is `sqrt(n) beta_hat`; the first is tested against the
/// Gaussian marginal of the limit. Passing requires the KS statistic
/// within threshold and the samples concentrated on the line `x + y = 0`.
pub fn run_clt_experiment(config: &McConfig) -> Result<McReport> {
    config.validate()?;
    if config.case != McCase::Clt {
        return Err(Error::InvalidConfig(
            "run_clt_experiment needs a clt-case config".into(),
        ));
    }
    let limit = clt_limit(config.innovation.mean(), config.innovation.variance())?;
    let params = InarParams::new(1.0, 0.0).expect("constants in range");
    let (samples, skipped) = collect_samples(config, &params, (1.0, 0.0), 0.5)?;
    if samples.is_empty() {
        return Ok(McReport {
            config: config.clone(),
            samples,
            skipped,
            ks_stat: 1.0,
            ks_threshold: 0.0,
            line_concentration: f64::INFINITY,
            passed: false,
        });
    }
    let first: Vec<f64> = samples.iter().map(|s| s[0]).collect();
    let (ks_stat, _) = ks_one_sample(&first, |x| normal_cdf(x / limit.scale))?;
    let ks_threshold = KS_FIVE_PERCENT_COEFF / (first.len() as f64).sqrt() + CLT_FINITE_N_ALLOWANCE;
    let concentration = line_concentration(&samples);
    let passed = ks_stat <= ks_threshold && concentration <= LINE_CONCENTRATION_LIMIT;
    Ok(McReport {
        config: config.clone(),
        samples,
        skipped,
        ks_stat,
        ks_threshold,
        line_concentration: concentration,
        passed,
    })
}

/// Unit-root experiment for the interleaved-walks case `(0, 1)`.
///
/// The first coordinate of each sample is `n * alpha_hat` and the second
/// is `n (beta_hat - 1)`; the second is compared against fresh draws of
/// the Dickey-Fuller functional by a two-sample KS statistic.
pub fn run_df_experiment(config: &McConfig) -> Result<McReport> {
    config.validate()?;
    if config.case != McCase::DickeyFuller {
        return Err(Error::InvalidConfig(
            "run_df_experiment needs a dickey-fuller-case config".into(),
        ));
    }
    let params = InarParams::new(0.0, 1.0).expect("constants in range");
    let (samples, skipped) = collect_samples(config, &params, (0.0, 1.0), 1.0)?;
    let oracle_master = config.master_seed ^ DF_ORACLE_SEED_TAG;
    let oracle: Vec<f64> = (0..config.df_oracle_size)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream_rng(oracle_master, j as u64);
            sample_df(config.df_steps, &mut rng).value
        })
        .collect();
    if samples.is_empty() {
        return Ok(McReport {
            config: config.clone(),
            samples,
            skipped,
            ks_stat: 1.0,
            ks_threshold: 0.0,
            line_concentration: f64::INFINITY,
            passed: false,
        });
    }
    let second: Vec<f64> = samples.iter().map(|s| s[1]).collect();
    let (ks_stat, base_threshold) = ks_two_sample(&second, &oracle)?;
    let ks_threshold = base_threshold + DF_FINITE_N_ALLOWANCE;
    let passed = ks_stat <= ks_threshold;
    let line = line_concentration(&samples);
    Ok(McReport {
        config: config.clone(),
        samples,
        skipped,
        ks_stat,
        ks_threshold,
        line_concentration: line,
        passed,
    })
}

/// One-sample Kolmogorov-Smirnov statistic against a distribution
/// function, with both one-sided gaps evaluated at each sorted point.
/// Returns `(statistic, p_value)` where the p-value comes from the
/// asymptotic Kolmogorov series.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<(f64, f64)> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let mut stat = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        stat = stat.max((i + 1) as f64 / m - f).max(f - i as f64 / m);
    }
    Ok((stat, kolmogorov_q(m.sqrt() * stat)))
}

/// Asymptotic Kolmogorov survival function
/// `Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)`, truncated
/// once terms drop below `1e-10` in absolute value.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..100_000 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        if term < 1e-10 {
            break;
        }
        sum += sign * term;
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov statistic. Returns
/// `(statistic, threshold)` with the classical 5 percent threshold
/// `1.358 sqrt((m + n) / (m n))`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (m, n) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut stat = 0.0f64;
    while i < m || j < n {
        let v = match (xs.get(i), ys.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < m && xs[i] <= v {
            i += 1;
        }
        while j < n && ys[j] <= v {
            j += 1;
        }
        stat = stat.max((i as f64 / m as f64 - j as f64 / n as f64).abs());
    }
    let threshold = KS_FIVE_PERCENT_COEFF * ((m + n) as f64 / (m as f64 * n as f64)).sqrt();
    Ok((stat, threshold))
}
