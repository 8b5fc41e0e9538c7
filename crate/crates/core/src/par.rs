//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) [`Execution::Auto`] runs on the rayon
//! global pool. Without it, or with [`Execution::Sequential`], everything runs
//! on the calling thread. Results are always returned in input order, so the
//! two paths produce identical output.

/// How a data-parallel loop should be executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    /// Use the rayon pool when the `parallel` feature is enabled.
    #[default]
    Auto,
    /// Always run on the calling thread.
    Sequential,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Auto
    }
}

pub use self::actual::{map_collect, map_range, sum_range};

#[cfg(feature = "parallel")]
mod actual {
    use super::Execution;
    use rayon::prelude::*;

    /// Maps a slice and collects the results in order.
    pub fn map_collect<T, R, F>(exec: Execution, items: &[T], op: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        if exec.is_parallel() {
            items.par_iter().map(op).collect()
        } else {
            items.iter().map(op).collect()
        }
    }

    /// Maps an index range and collects the results in order.
    pub fn map_range<R, F>(exec: Execution, n: usize, op: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        if exec.is_parallel() {
            (0..n).into_par_iter().map(op).collect()
        } else {
            (0..n).map(op).collect()
        }
    }

    /// Sums an integer-valued map over an index range. Integer addition keeps
    /// the result independent of scheduling.
    pub fn sum_range<F>(exec: Execution, n: usize, op: F) -> u64
    where
        F: Fn(usize) -> u64 + Sync + Send,
    {
        if exec.is_parallel() {
            (0..n).into_par_iter().map(op).sum()
        } else {
            (0..n).map(op).sum()
        }
    }
}

#[cfg(not(feature = "parallel"))]
mod actual {
    use super::Execution;

    pub fn map_collect<T, R, F>(_exec: Execution, items: &[T], op: F) -> Vec<R>
    where
        F: Fn(&T) -> R,
    {
        items.iter().map(op).collect()
    }

    pub fn map_range<R, F>(_exec: Execution, n: usize, op: F) -> Vec<R>
    where
        F: Fn(usize) -> R,
    {
        (0..n).map(op).collect()
    }

    pub fn sum_range<F>(_exec: Execution, n: usize, op: F) -> u64
    where
        F: Fn(usize) -> u64,
    {
        (0..n).map(op).sum()
    }
}
