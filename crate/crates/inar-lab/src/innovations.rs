//! Innovation laws, binomial thinning, and seedable random streams.
//!
//! All innovation laws live on the nonnegative integers and have finite
//! moments of every order. Thinning marks each of `x` units independently
//! with probability `prob` and returns the survivor count; it is sampled
//! as a single binomial draw rather than `x` Bernoulli draws.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution, Geometric, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution of the innovation term.
///
/// Values of this type are validated on construction (`poisson`,
/// `bernoulli`, `geometric`, `deterministic`) or on parse; code that
/// builds variants directly must uphold the same parameter ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum InnovationSpec {
    /// Poisson with rate `lambda > 0`.
    Poisson { lambda: f64 },
    /// Bernoulli with success probability `p` in `[0, 1]`.
    Bernoulli { p: f64 },
    /// Geometric on `{0, 1, 2, ...}` counting failures before the first
    /// success, with success probability `p` in `(0, 1]`.
    Geometric { p: f64 },
    /// Point mass at `value`.
    Deterministic { value: u64 },
}

impl InnovationSpec {
    pub fn poisson(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidInnovation {
                name: "lambda",
                value: lambda,
                reason: "must be finite and positive",
            });
        }
        Ok(Self::Poisson { lambda })
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidInnovation {
                name: "p",
                value: p,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(Self::Bernoulli { p })
    }

    pub fn geometric(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidInnovation {
                name: "p",
                value: p,
                reason: "must lie in (0, 1]",
            });
        }
        Ok(Self::Geometric { p })
    }

    pub fn deterministic(value: u64) -> Self {
        Self::Deterministic { value }
    }

    /// Mean of the law.
    pub fn mean(&self) -> f64 {
        match *self {
            Self::Poisson { lambda } => lambda,
            Self::Bernoulli { p } => p,
            Self::Geometric { p } => (1.0 - p) / p,
            Self::Deterministic { value } => value as f64,
        }
    }

    /// Variance of the law.
    pub fn variance(&self) -> f64 {
        match *self {
            Self::Poisson { lambda } => lambda,
            Self::Bernoulli { p } => p * (1.0 - p),
            Self::Geometric { p } => (1.0 - p) / (p * p),
            Self::Deterministic { .. } => 0.0,
        }
    }

    /// Whether the fourth moment is finite. True for every built-in law;
    /// kept explicit because some asymptotic results require it.
    pub fn has_finite_fourth_moment(&self) -> bool {
        match *self {
            Self::Poisson { .. }
            | Self::Bernoulli { .. }
            | Self::Geometric { .. }
            | Self::Deterministic { .. } => true,
        }
    }

    /// `(mean, variance, fourth moment finite)` in one call.
    pub fn moments(&self) -> (f64, f64, bool) {
        (
            self.mean(),
            self.variance(),
            self.has_finite_fourth_moment(),
        )
    }

    /// Re-checks the parameter ranges, for values built directly as
    /// enum literals.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Poisson { lambda } => Self::poisson(lambda).map(|_| ()),
            Self::Bernoulli { p } => Self::bernoulli(p).map(|_| ()),
            Self::Geometric { p } => Self::geometric(p).map(|_| ()),
            Self::Deterministic { .. } => Ok(()),
        }
    }
}

impl fmt::Display for InnovationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Poisson { lambda } => write!(f, "poisson:{lambda}"),
            Self::Bernoulli { p } => write!(f, "bernoulli:{p}"),
            Self::Geometric { p } => write!(f, "geometric:{p}"),
            Self::Deterministic { value } => write!(f, "det:{value}"),
        }
    }
}

impl FromStr for InnovationSpec {
    type Err = Error;

    /// Parses the `law:parameter` grammar, e.g. `poisson:1.0`,
    /// `bernoulli:0.5`, `geometric:0.5`, `det:3`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |detail: String| Error::Parse {
            what: "innovation spec",
            detail,
        };
        let (name, param) = s
            .split_once(':')
            .ok_or_else(|| bad(format!("expected law:parameter, got {s:?}")))?;
        let float = |p: &str| {
            p.parse::<f64>()
                .map_err(|_| bad(format!("{p:?} is not a number")))
        };
        match name {
            "poisson" => Self::poisson(float(param)?),
            "bernoulli" => Self::bernoulli(float(param)?),
            "geometric" => Self::geometric(float(param)?),
            "det" => param
                .parse::<u64>()
                .map(Self::deterministic)
                .map_err(|_| bad(format!("{param:?} is not a nonnegative integer"))),
            other => Err(bad(format!("unknown law {other:?}"))),
        }
    }
}

impl From<InnovationSpec> for String {
    fn from(spec: InnovationSpec) -> String {
        spec.to_string()
    }
}

impl TryFrom<String> for InnovationSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Deterministic generator for stream `stream` under `master_seed`.
///
/// Streams with distinct indices are independent, so replication `r` of an
/// experiment can draw from stream `(master_seed, r)` in any order, which
/// keeps parallel and serial runs bit-identical.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// One draw from the innovation law.
pub fn sample_innovation<R: Rng + ?Sized>(spec: &InnovationSpec, rng: &mut R) -> u64 {
    match *spec {
        InnovationSpec::Poisson { lambda } => {
            let draw: f64 = Poisson::new(lambda)
                .expect("validated on construction")
                .sample(rng);
            draw as u64
        }
        InnovationSpec::Bernoulli { p } => u64::from(rng.random_bool(p)),
        InnovationSpec::Geometric { p } => Geometric::new(p)
            .expect("validated on construction")
            .sample(rng),
        InnovationSpec::Deterministic { value } => value,
    }
}

/// Binomial thinning: survivors among `x` units kept independently with
/// probability `prob`. Always at most `x`; exactly `0` when `x = 0` and
/// exactly `x` when `prob = 1`.
pub fn thin<R: Rng + ?Sized>(x: u64, prob: f64, rng: &mut R) -> Result<u64> {
    if !(prob.is_finite() && (0.0..=1.0).contains(&prob)) {
        return Err(Error::InvalidProbability { value: prob });
    }
    if x == 0 || prob == 0.0 {
        return Ok(0);
    }
    if prob == 1.0 {
        return Ok(x);
    }
    Ok(Binomial::new(x, prob)
        .expect("arguments checked above")
        .sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha12Rng {
        stream_rng(seed, 0)
    }

    #[test]
    fn parse_round_trips() {
        for text in ["poisson:1", "bernoulli:0.5", "geometric:0.5", "det:3"] {
            let spec: InnovationSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
            assert_eq!(spec.to_string().parse::<InnovationSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn parse_rejects_malformed_input() {
        for text in [
            "poisson",
            "poisson:",
            "poisson:abc",
            "poisson:0",
            "poisson:-1",
            "bernoulli:1.5",
            "geometric:0",
            "geometric:1.1",
            "det:-1",
            "det:1.5",
            "normal:1",
            "",
        ] {
            assert!(text.parse::<InnovationSpec>().is_err(), "accepted {text:?}");
        }
    }

    #[test]
    fn moments_match_closed_forms() {
        let cases = [
            ("poisson:2", 2.0, 2.0),
            ("bernoulli:0.25", 0.25, 0.1875),
            // mean (1-p)/p = 1, variance (1-p)/p^2 = 2 at p = 0.5
            ("geometric:0.5", 1.0, 2.0),
            ("det:3", 3.0, 0.0),
        ];
        for (text, mean, var) in cases {
            let spec: InnovationSpec = text.parse().unwrap();
            let (m, v, fourth) = spec.moments();
            assert_eq!(m, mean, "{text}");
            assert!((v - var).abs() < 1e-15, "{text}");
            assert!(fourth);
        }
    }

    #[test]
    fn deterministic_sampling_is_constant() {
        let spec = InnovationSpec::deterministic(3);
        let mut r = rng(1);
        for _ in 0..10 {
            assert_eq!(sample_innovation(&spec, &mut r), 3);
        }
    }

    #[test]
    fn bernoulli_zero_never_fires() {
        let spec = InnovationSpec::bernoulli(0.0).unwrap();
        let mut r = rng(2);
        for _ in 0..100 {
            assert_eq!(sample_innovation(&spec, &mut r), 0);
        }
    }

    #[test]
    fn poisson_sample_mean_matches_rate() {
        let spec = InnovationSpec::poisson(1.0).unwrap();
        let mut r = rng(3);
        let reps = 1_000_000u64;
        let total: u64 = (0..reps).map(|_| sample_innovation(&spec, &mut r)).sum();
        let mean = total as f64 / reps as f64;
        // CLT bound: 3 sigma / sqrt(reps) with sigma = 1
        assert!((mean - 1.0).abs() < 0.004, "mean {mean}");
    }

    #[test]
    fn geometric_sample_mean_matches_closed_form() {
        let spec = InnovationSpec::geometric(0.5).unwrap();
        let mut r = rng(4);
        let reps = 200_000u64;
        let total: u64 = (0..reps).map(|_| sample_innovation(&spec, &mut r)).sum();
        let mean = total as f64 / reps as f64;
        // 4 sigma bound with sigma = sqrt(2)
        assert!((mean - 1.0).abs() < 4.0 * (2.0f64).sqrt() / (reps as f64).sqrt());
    }

    #[test]
    fn thin_edge_cases_are_exact() {
        let mut r = rng(5);
        assert_eq!(thin(0, 0.7, &mut r).unwrap(), 0);
        assert_eq!(thin(9, 0.0, &mut r).unwrap(), 0);
        for x in [1u64, 7, 1000] {
            assert_eq!(thin(x, 1.0, &mut r).unwrap(), x);
        }
    }

    #[test]
    fn thin_rejects_bad_probabilities() {
        let mut r = rng(6);
        for p in [-0.1, 1.2, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                thin(5, p, &mut r),
                Err(Error::InvalidProbability { .. })
            ));
        }
    }

    #[test]
    fn thin_moments_match_binomial() {
        let mut r = rng(7);
        for (x, p) in [(1u64, 0.5), (10, 0.3), (100, 0.9)] {
            let reps = 100_000usize;
            let draws: Vec<u64> = (0..reps).map(|_| thin(x, p, &mut r).unwrap()).collect();
            let mean = draws.iter().sum::<u64>() as f64 / reps as f64;
            let expected_mean = x as f64 * p;
            let expected_var = x as f64 * p * (1.0 - p);
            let bound = 4.0 * (expected_var / reps as f64).sqrt();
            assert!(
                (mean - expected_mean).abs() < bound,
                "x={x} p={p} mean {mean}"
            );
            let var = draws
                .iter()
                .map(|&d| (d as f64 - mean).powi(2))
                .sum::<f64>()
                / (reps as f64 - 1.0);
            assert!(
                (var - expected_var).abs() < 0.1 * expected_var,
                "x={x} p={p} var {var}"
            );
        }
    }

    #[test]
    fn thin_never_exceeds_input() {
        let mut r = rng(8);
        for x in 0..60u64 {
            for _ in 0..50 {
                assert!(thin(x, 0.37, &mut r).unwrap() <= x);
            }
        }
    }

    #[test]
    fn thin_is_stochastically_monotone_in_prob() {
        // Empirical CDF at p = 0.2 dominates the one at p = 0.8 pointwise.
        let x = 50u64;
        let reps = 10_000usize;
        let mut r_low = rng(9);
        let mut r_high = rng(10);
        let mut low: Vec<u64> = (0..reps)
            .map(|_| thin(x, 0.2, &mut r_low).unwrap())
            .collect();
        let mut high: Vec<u64> = (0..reps)
            .map(|_| thin(x, 0.8, &mut r_high).unwrap())
            .collect();
        low.sort_unstable();
        high.sort_unstable();
        for t in 0..=x {
            let cdf = |sorted: &[u64]| sorted.partition_point(|&v| v <= t) as f64 / reps as f64;
            assert!(cdf(&low) >= cdf(&high), "crossing at t = {t}");
        }
    }

    #[test]
    fn identical_seeds_reproduce_draws() {
        let spec: InnovationSpec = "poisson:2.5".parse().unwrap();
        let draw = |seed| {
            let mut r = rng(seed);
            (0..64)
                .map(|_| {
                    (
                        sample_innovation(&spec, &mut r),
                        thin(20, 0.4, &mut r).unwrap(),
                    )
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }

    #[test]
    fn streams_are_independent_and_reproducible() {
        let take = |master, stream| {
            let mut r = stream_rng(master, stream);
            (0..8).map(|_| r.random::<u64>()).collect::<Vec<_>>()
        };
        assert_eq!(take(7, 0), take(7, 0));
        assert_eq!(take(7, 3), take(7, 3));
        assert_ne!(take(7, 0), take(7, 1));
        assert_ne!(take(7, 0), take(8, 0));
    }

    #[test]
    fn serde_uses_grammar_strings() {
        let spec: InnovationSpec = "geometric:0.25".parse().unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, "\"geometric:0.25\"");
        let back: InnovationSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        assert!(serde_json::from_str::<InnovationSpec>("\"poisson:-1\"").is_err());
    }
}
