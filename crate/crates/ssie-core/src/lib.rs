//! Models and measurements of the systematic underprediction that appears
//! when probability estimates are formed from small similarity subsets of a
//! dataset.
//!
//! The crate has three layers:
//!
//! * [`inference`] — estimating a generating probability from a sample
//!   (sample proportion, rule of succession, Beta-Binomial posterior means)
//!   plus a seeded Monte Carlo simulation of the generating-probability
//!   distribution and the group-level underprediction metric.
//! * [`analytic`] — closed-form and numerical bias models: the single-PVC
//!   worked scenario, exponential spread over leaf-size histograms,
//!   power-law aggregation of per-leaf bias, the decision-threshold
//!   binomial model, and discrete power-law fitting.
//! * [`pipeline`], [`tree`], [`audit`] — the empirical side: CSV ingestion
//!   with declarative binning/one-hot schemas, a from-scratch CART-style
//!   tree on binary features, and the subset audit that correlates observed
//!   underprediction with its Tr / ES / ES+Tr predictors.
//!
//! With the default `parallel` feature the Monte Carlo simulation, curve
//! sweeps, and subset audit shard work across a rayon pool; results are
//! bit-identical to the sequential fallback (`--no-default-features`)
//! because shard boundaries and merge order are fixed independently of the
//! thread count.

pub mod analytic;
pub mod audit;
pub mod error;
mod exec;
pub mod inference;
pub mod pipeline;
pub mod stats;
pub mod synthetic;
pub mod tree;

pub use error::{Error, ErrorCategory, Result};

/// Cap the size of the rayon pool used by parallel entry points.
///
/// Returns an error if a global pool was already installed. With the
/// `parallel` feature disabled this is a no-op.
pub fn configure_threads(threads: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}
