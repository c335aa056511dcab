//! Data-parallel helpers with a sequential fallback when the `parallel`
//! feature is disabled.
//!
//! Every helper preserves input order, so reports assembled from the results
//! are byte-identical at any worker count.

#[cfg(feature = "parallel")]
pub(crate) fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}

/// Order-preserving map over a `u64` range (inclusive bounds).
pub(crate) fn map_range<U, F>(lo: u64, hi: u64, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(u64) -> U + Sync + Send,
{
    if lo > hi {
        return Vec::new();
    }
    map_collect((lo..=hi).collect(), f)
}
