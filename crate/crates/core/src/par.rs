//! Data-parallel helpers. With the `parallel` feature these dispatch to
//! rayon; without it, or when [`Execution::Sequential`] is requested, they
//! run on the calling thread. Results are always returned in input order.

use std::ops::Range;

/// How an exhaustive or per-instance loop is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub fn map_vec<T, R, F>(exec: Execution, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.into_par_iter().map(f).collect();
    }
    let _ = exec;
    items.into_iter().map(f).collect()
}

pub fn map_range<R, F>(exec: Execution, range: Range<u64>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().map(f).collect();
    }
    let _ = exec;
    range.map(f).collect()
}

/// Smallest index in `range` satisfying `pred`, if any.
pub fn find_first<F>(exec: Execution, range: Range<u64>, pred: F) -> Option<u64>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().find_first(|&i| pred(i));
    }
    let _ = exec;
    range.into_iter().find(|&i| pred(i))
}

pub fn count<F>(exec: Execution, range: Range<u64>, pred: F) -> u64
where
    F: Fn(u64) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().filter(|&i| pred(i)).count() as u64;
    }
    let _ = exec;
    range.filter(|&i| pred(i)).count() as u64
}
