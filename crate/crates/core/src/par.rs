//! Data-parallel helpers. With the `parallel` feature the work is spread
//! over the rayon pool; otherwise, or when a caller asks for sequential
//! execution, the same closures run in order on the calling thread.
//! Results are always returned in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Whether callers that do not choose explicitly run in parallel.
pub const DEFAULT_PARALLEL: bool = cfg!(feature = "parallel");

/// `(0..n).map(f)` collected in order.
pub fn map_range<T, F>(n: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel && n > 1 {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

/// Smallest index in `0..n` satisfying `pred`, if any.
pub fn find_first<F>(n: usize, parallel: bool, pred: F) -> Option<usize>
where
    F: Fn(usize) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel && n > 1 {
        return (0..n).into_par_iter().find_first(|&i| pred(i));
    }
    let _ = parallel;
    (0..n).find(|&i| pred(i))
}
