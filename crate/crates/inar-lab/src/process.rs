//! The INAR(2) recursion and sample path utilities.
//!
//! The process starts from zero initial values and evolves as
//! `X_k = alpha ∘ X_{k-1} + beta ∘ X_{k-2} + eps_k`, where `∘` is binomial
//! thinning and `eps_k` are i.i.d. innovations. Everywhere in this crate
//! the convention `X_0 = X_{-1} = 0` applies, so a path is just the values
//! `X_1, ..., X_n`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::innovations::{sample_innovation, stream_rng, thin, InnovationSpec};

/// Autoregressive coefficient pair, validated to lie in `[0, 1]^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InarParams {
    alpha: f64,
    beta: f64,
}

/// Position of `alpha + beta` relative to the unit threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Explosive,
}

impl InarParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let check = |name, value: f64| {
            if value.is_finite() && (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(Error::InvalidCoefficient { name, value })
            }
        };
        check("alpha", alpha)?;
        check("beta", beta)?;
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Stable when `alpha + beta < 1`, unstable when `alpha + beta = 1`,
    /// explosive when `alpha + beta > 1`.
    pub fn classify(&self) -> Stability {
        let sum = self.alpha + self.beta;
        if sum < 1.0 {
            Stability::Stable
        } else if sum == 1.0 {
            Stability::Unstable
        } else {
            Stability::Explosive
        }
    }

    /// Primitive means both thinning coefficients are strictly positive.
    pub fn is_primitive(&self) -> bool {
        self.alpha > 0.0 && self.beta > 0.0
    }
}

/// Resolved configuration a path was simulated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathOrigin {
    pub alpha: f64,
    pub beta: f64,
    pub innovation: InnovationSpec,
    pub n: usize,
    pub seed: u64,
}

/// Observations `X_1, ..., X_n` of one path, with optional origin metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    values: Vec<u64>,
    origin: Option<PathOrigin>,
}

impl SamplePath {
    /// Wraps raw observations; indices before the first one read as zero.
    pub fn from_values(values: Vec<u64>) -> Self {
        Self {
            values,
            origin: None,
        }
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn origin(&self) -> Option<&PathOrigin> {
        self.origin.as_ref()
    }

    /// `X_k` under the zero-start convention: zero for `k <= 0`.
    ///
    /// Panics when `k` exceeds the path length.
    pub fn x(&self, k: i64) -> u64 {
        if k <= 0 {
            0
        } else {
            self.values[(k - 1) as usize]
        }
    }
}

/// Simulates `n` steps from zero initial values on stream `(seed, 0)`.
///
/// Per step the lag-1 thinning is drawn first, then the lag-2 thinning,
/// then the innovation; the order is part of the reproducibility contract.
/// Rejects innovation laws with mean zero (the drift would vanish) and
/// `n = 0`.
pub fn simulate(
    params: &InarParams,
    spec: &InnovationSpec,
    n: usize,
    seed: u64,
) -> Result<SamplePath> {
    let mut rng = stream_rng(seed, 0);
    let values = simulate_with_rng(params, spec, n, &mut rng)?;
    Ok(SamplePath {
        values,
        origin: Some(PathOrigin {
            alpha: params.alpha,
            beta: params.beta,
            innovation: *spec,
            n,
            seed,
        }),
    })
}

/// Same recursion as [`simulate`] but drawing from a caller-owned
/// generator, for code that manages its own streams.
pub fn simulate_with_rng<R: Rng + ?Sized>(
    params: &InarParams,
    spec: &InnovationSpec,
    n: usize,
    rng: &mut R,
) -> Result<Vec<u64>> {
    spec.validate()?;
    if spec.mean() <= 0.0 {
        return Err(Error::ZeroMeanInnovation);
    }
    if n == 0 {
        return Err(Error::InvalidConfig(
            "path length must be at least 1".into(),
        ));
    }
    let mut values = Vec::with_capacity(n);
    let (mut x1, mut x2) = (0u64, 0u64); // X_{k-1}, X_{k-2}
    for k in 1..=n {
        let kept1 = thin(x1, params.alpha, rng)?;
        let kept2 = thin(x2, params.beta, rng)?;
        let eps = sample_innovation(spec, rng);
        let next = kept1
            .checked_add(kept2)
            .and_then(|s| s.checked_add(eps))
            .ok_or(Error::CountOverflow { k })?;
        values.push(next);
        x2 = x1;
        x1 = next;
    }
    Ok(values)
}

/// Martingale differences `X_k - alpha X_{k-1} - beta X_{k-2} - mu`
/// for `k = 1, ..., n`.
pub fn residuals(path: &SamplePath, params: &InarParams, mu: f64) -> Vec<f64> {
    (1..=path.len() as i64)
        .map(|k| {
            path.x(k) as f64
                - params.alpha * path.x(k - 1) as f64
                - params.beta * path.x(k - 2) as f64
                - mu
        })
        .collect()
}

/// Splits a path into the even-index subsequence `X_2, X_4, ...` and the
/// odd-index subsequence `X_1, X_3, ...` (in that order). When the lag-1
/// coefficient vanishes and the lag-2 coefficient is one, these are two
/// independent random walks.
pub fn split_even_odd(path: &SamplePath) -> (Vec<u64>, Vec<u64>) {
    let mut even = Vec::with_capacity(path.len() / 2);
    let mut odd = Vec::with_capacity(path.len().div_ceil(2));
    for (i, &v) in path.values().iter().enumerate() {
        if (i + 1) % 2 == 0 {
            even.push(v);
        } else {
            odd.push(v);
        }
    }
    (even, odd)
}
