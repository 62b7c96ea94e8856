//! Sequential / data-parallel execution switch.
//!
//! Grid fills, randomized sweeps and Gram assembly are embarrassingly
//! parallel: every cell is an independent pure computation written into its
//! own slot, so results are bitwise identical whichever strategy runs them.
//! With the `parallel` feature (default) the parallel strategy dispatches to
//! rayon; without it both strategies run sequentially.

/// Execution strategy for index-parallel maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    /// Rayon work-stealing when the `parallel` feature is enabled; falls
    /// back to sequential otherwise.
    Parallel,
}

impl ExecMode {
    /// The default strategy for this build of the crate.
    pub fn auto() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// Maps `f` over `0..n` with the requested strategy, collecting results in
/// index order.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}

/// Convenience wrapper using [`ExecMode::auto`].
pub fn auto_map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed(ExecMode::auto(), n, f)
}
