//! Execution policy for data-parallel loops.
//!
//! Every parallel loop in the crate goes through this module so that the
//! sequential path and the rayon path share one definition. Work items are
//! indexed, each index owns its random stream, and reductions are either
//! order-preserving collects or integer sums, so the two paths agree bit for
//! bit.

/// How to run an indexed loop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    /// Plain iterator on the calling thread.
    Sequential,
    /// Rayon work-stealing pool. Falls back to [`Exec::Sequential`] when the
    /// crate is built without the `parallel` feature.
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this build can actually run in parallel.
    pub const fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Maps `f` over `0..len` and collects results in index order.
pub fn map_collect<T, F>(exec: Exec, len: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..len).into_par_iter().map(f).collect()
        }
        _ => (0..len).map(f).collect(),
    }
}

/// Maps `f` over `0..len` and folds with an associative, commutative `merge`.
///
/// Callers must only use this with exact (integer) accumulators; floating
/// point sums should go through [`map_collect`] and be summed in order.
pub fn map_reduce<T, F, M>(exec: Exec, len: u64, f: F, merge: M) -> T
where
    T: Send + Default,
    F: Fn(u64) -> T + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..len).into_par_iter().map(f).reduce(T::default, merge)
        }
        _ => (0..len).map(f).fold(T::default(), merge),
    }
}
