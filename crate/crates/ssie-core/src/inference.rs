//! Estimating a generating probability from a sample, and the group-level
//! underprediction metric.
//!
//! Given `K` successes in `N` trials and nothing else, the statistically
//! optimal estimate of the underlying probability is not the sample
//! proportion `K/N` but the mean of the distribution of probabilities that
//! could have generated the sample. Under a uniform prior that mean is the
//! rule of succession `(K+1)/(N+2)`; under a `Beta(a,b)` prior it is
//! `(K+a)/(N+a+b)`. Both are regressive toward the prior mean, more
//! strongly so for small `N` — the mechanism behind every model in this
//! crate.
//!
//! [`simulate_generating_probabilities`] reproduces the same result by
//! brute force: draw a probability uniformly, draw a sample from it, and
//! average the drawn probabilities within each observed success count.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec;

/// An observation of `successes` out of `trials`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleCount {
    successes: u64,
    trials: u64,
}

impl SampleCount {
    pub fn new(successes: u64, trials: u64) -> Result<Self> {
        if successes > trials {
            return Err(Error::InvalidArgument(format!(
                "successes ({successes}) exceed trials ({trials})"
            )));
        }
        Ok(Self { successes, trials })
    }

    pub fn successes(&self) -> u64 {
        self.successes
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }
}

/// Pseudo-count pair `(a, b)` of a Beta prior; both must be positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaPrior {
    a: f64,
    b: f64,
}

impl BetaPrior {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Beta prior requires finite a > 0 and b > 0, got a = {a}, b = {b}"
            )));
        }
        Ok(Self { a, b })
    }

    /// The uniform prior `Beta(1, 1)`.
    pub fn uniform() -> Self {
        Self { a: 1.0, b: 1.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Prior mean `a / (a + b)`.
    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    /// Integer pseudo-counts, when both are whole numbers. Exact-rational
    /// posterior means are only available in that case.
    pub fn integer_counts(&self) -> Option<(u64, u64)> {
        if self.a.fract() == 0.0 && self.b.fract() == 0.0 && self.a <= u64::MAX as f64 {
            Some((self.a as u64, self.b as u64))
        } else {
            None
        }
    }
}

/// The sample proportion `K / N`.
///
/// Undefined for an empty sample.
pub fn sample_proportion(s: SampleCount) -> Result<f64> {
    if s.trials == 0 {
        return Err(Error::UndefinedProportion);
    }
    Ok(s.successes as f64 / s.trials as f64)
}

/// The rule of succession `(K + 1) / (N + 2)`.
///
/// Valid for every sample including the empty one, which yields 1/2.
pub fn rule_of_succession(s: SampleCount) -> f64 {
    (s.successes + 1) as f64 / (s.trials + 2) as f64
}

/// [`rule_of_succession`] as an exact reduced rational.
pub fn rule_of_succession_exact(s: SampleCount) -> Ratio<u64> {
    Ratio::new(s.successes + 1, s.trials + 2)
}

/// Posterior mean `(K + a) / (N + a + b)` under a `Beta(a, b)` prior.
///
/// With `a = b = 1` this is exactly the rule of succession.
pub fn beta_posterior_mean(prior: BetaPrior, s: SampleCount) -> f64 {
    (s.successes as f64 + prior.a) / (s.trials as f64 + prior.a + prior.b)
}

/// [`beta_posterior_mean`] as an exact reduced rational for integer
/// pseudo-counts.
pub fn beta_posterior_mean_exact(a: u64, b: u64, s: SampleCount) -> Ratio<u64> {
    Ratio::new(s.successes + a, s.trials + a + b)
}

/// Actual and model-predicted target rates for one group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRates {
    pub label: String,
    pub actual: f64,
    pub predicted: f64,
}

impl GroupRates {
    pub fn new(label: impl Into<String>, actual: f64, predicted: f64) -> Result<Self> {
        for (name, v) in [("actual", actual), ("predicted", predicted)] {
            if !(0.0..=1.0).contains(&v) || v.is_nan() {
                return Err(Error::InvalidArgument(format!(
                    "{name} rate must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(Self {
            label: label.into(),
            actual,
            predicted,
        })
    }
}

/// Relative underprediction `(actual - predicted) / actual`.
///
/// Positive values mean the group's target rate is underpredicted.
/// Undefined when the actual rate is zero.
pub fn underprediction_metric(g: &GroupRates) -> Result<f64> {
    if g.actual == 0.0 {
        return Err(Error::UndefinedMetric);
    }
    Ok((g.actual - g.predicted) / g.actual)
}

/// One success count's bucket in a [`GeneratingProbabilityTable`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GeneratingProbabilityRow {
    /// Observed success count `K`.
    pub successes: u64,
    /// Sample proportion `K / N`.
    pub sample_proportion: f64,
    /// Mean of the probabilities that generated samples with this `K`.
    /// Absent (never zero) when no simulated sample hit the bucket.
    pub mean_generating_probability: Option<f64>,
    /// Number of simulated samples that landed in the bucket.
    pub hits: u64,
}

/// Simulated mean generating probability for each `K` in `0..=N`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GeneratingProbabilityTable {
    pub trials: u64,
    pub iterations: u64,
    pub seed: u64,
    pub rows: Vec<GeneratingProbabilityRow>,
}

impl GeneratingProbabilityTable {
    /// Plain CSV: one header row, then one row per `K`. Empty buckets leave
    /// the mean cell blank.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "successes,sample_proportion,mean_generating_probability,hits")?;
        for row in &self.rows {
            let mean = row
                .mean_generating_probability
                .map(|m| m.to_string())
                .unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{}",
                row.successes, row.sample_proportion, mean, row.hits
            )?;
        }
        Ok(())
    }
}

/// Iterations per PRNG shard. Each shard draws from its own ChaCha8 stream
/// derived from (seed, shard index), so the table is identical for the
/// sequential and parallel paths and for any thread count.
const SHARD_ITERATIONS: u64 = 8192;

/// Estimate the mean generating probability for each success count by
/// simulation: every iteration draws `p` uniformly from [0, 1], draws an
/// `N`-trial Bernoulli(`p`) sample, and files `p` under the observed count.
///
/// Deterministic for a fixed seed.
pub fn simulate_generating_probabilities(
    trials: u64,
    iterations: u64,
    seed: u64,
) -> Result<GeneratingProbabilityTable> {
    simulate_impl(trials, iterations, seed, true)
}

/// Sequential twin of [`simulate_generating_probabilities`]; same result
/// bit for bit. Kept public so the bench suite can compare both paths.
pub fn simulate_generating_probabilities_seq(
    trials: u64,
    iterations: u64,
    seed: u64,
) -> Result<GeneratingProbabilityTable> {
    simulate_impl(trials, iterations, seed, false)
}

fn simulate_impl(
    trials: u64,
    iterations: u64,
    seed: u64,
    parallel: bool,
) -> Result<GeneratingProbabilityTable> {
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "simulation requires at least one trial per sample".into(),
        ));
    }
    if iterations == 0 {
        return Err(Error::InvalidArgument(
            "simulation requires at least one iteration".into(),
        ));
    }

    let shards = iterations.div_ceil(SHARD_ITERATIONS) as usize;
    let shard_fn = move |shard: usize| {
        let start = shard as u64 * SHARD_ITERATIONS;
        let count = SHARD_ITERATIONS.min(iterations - start);
        simulate_shard(trials, seed, shard as u64, count)
    };
    let partials = if parallel {
        exec::map_indexed(shards, shard_fn)
    } else {
        exec::map_indexed_seq(shards, shard_fn)
    };

    // Merge in shard order so float accumulation is order-stable.
    let mut acc = vec![(0.0f64, 0u64); trials as usize + 1];
    for partial in partials {
        for (slot, (sum, hits)) in acc.iter_mut().zip(partial) {
            slot.0 += sum;
            slot.1 += hits;
        }
    }

    let rows = acc
        .iter()
        .enumerate()
        .map(|(k, &(sum, hits))| GeneratingProbabilityRow {
            successes: k as u64,
            sample_proportion: k as f64 / trials as f64,
            mean_generating_probability: (hits > 0).then(|| sum / hits as f64),
            hits,
        })
        .collect();

    Ok(GeneratingProbabilityTable {
        trials,
        iterations,
        seed,
        rows,
    })
}

fn simulate_shard(trials: u64, seed: u64, shard: u64, count: u64) -> Vec<(f64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    let mut acc = vec![(0.0f64, 0u64); trials as usize + 1];
    for _ in 0..count {
        let p: f64 = rng.gen();
        let mut k = 0usize;
        for _ in 0..trials {
            if rng.gen::<f64>() < p {
                k += 1;
            }
        }
        acc[k].0 += p;
        acc[k].1 += 1;
    }
    acc
}
