//! Data-parallel driving of independent work items.
//!
//! Sweeps, batch checks and mesh ladders are embarrassingly parallel. With
//! the `parallel` feature (default) they fan out over rayon; without it they
//! run sequentially. Output order always matches input order, so results are
//! deterministic either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over the items, parallel when the `parallel` feature is enabled.
pub fn map_items<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_items_parallel(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_items_sequential(items, f)
    }
}

/// Sequential reference path; always available, used by the benches to
/// compare against the rayon path.
pub fn map_items_sequential<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_items_parallel<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}
