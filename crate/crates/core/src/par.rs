//! Order-preserving map over independent work items.
//!
//! With the `parallel` feature the items are spread over rayon's pool;
//! otherwise, or when [`Exec::Sequential`] is requested, they run in order.
//! Results always come back in item order, so reductions are reproducible.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    #[default]
    Parallel,
    Sequential,
}

pub fn map<T, R, F>(items: Vec<T>, exec: Exec, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            items.into_par_iter().map(f).collect()
        }
        _ => items.into_iter().map(f).collect(),
    }
}

/// `map` over `0..n`.
pub fn map_range<R, F>(n: usize, exec: Exec, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    map((0..n).collect(), exec, f)
}
