//! Data-parallel helpers. With the `parallel` feature the work is spread over
//! the rayon pool; without it the same closures run sequentially. Results are
//! always collected in index order, so both paths return identical values.

/// `(0..len).map(f).collect()`, possibly in parallel.
pub fn map_range<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_range_sequential(len, f)
    }
}

/// Sequential counterpart of [`map_range`], available regardless of features.
pub fn map_range_sequential<T, F>(len: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..len).map(f).collect()
}

/// Whether this build uses the rayon pool.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
