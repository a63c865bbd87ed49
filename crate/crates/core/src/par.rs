//! Data-parallel driver with a sequential fallback.
//!
//! Sample sweeps, character scans and evaluation grids in this crate are
//! embarrassingly parallel: every work item is independent and all shared
//! state is immutable after construction.  With the `parallel` feature
//! (default) they fan out over rayon; without it the same entry points run
//! sequentially.  `map_seq` is always available so benchmarks can compare
//! the two paths in a single build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
pub fn map_items<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Sequential reference implementation of [`map_items`].
pub fn map_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// True when the parallel code path is compiled in.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let f = |x: u64| x.wrapping_mul(x) ^ 0x5bd1e995;
        assert_eq!(map_items(items.clone(), f), map_seq(items, f));
    }
}
