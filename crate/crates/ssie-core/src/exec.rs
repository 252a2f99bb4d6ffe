//! Feature-dispatched execution of independent work items.
//!
//! Both paths produce output in index order, so callers get identical
//! results regardless of the `parallel` feature or the pool size.

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<U, F>(count: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<U, F>(count: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..count).map(f).collect()
}

/// Sequential twin of [`map_indexed`], always available; the criterion
/// bench uses it to compare against the rayon path in a single build.
pub(crate) fn map_indexed_seq<U, F>(count: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..count).map(f).collect()
}
