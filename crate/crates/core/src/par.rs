//! Data-parallel helpers. With the `parallel` feature (on by default) the
//! indexed maps run on rayon; without it, or with [`Execution::Sequential`],
//! they run in a plain loop. Results are always returned in index order, so
//! output never depends on the execution mode or thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Result, TomoError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this mode will actually run on multiple threads in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `(0..n).map(f)` collected in index order.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Fallible variant of [`map_indexed`]; the error of the lowest failing index
/// is returned.
pub fn try_map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    map_indexed(exec, n, f).into_iter().collect()
}

/// Run `op` inside a pool limited to `jobs` threads. `None` or a build
/// without the `parallel` feature runs `op` directly.
pub fn with_jobs<T, F>(jobs: Option<usize>, op: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match jobs {
        Some(0) => Err(TomoError::InvalidArgument("--jobs must be at least 1".into())),
        #[cfg(feature = "parallel")]
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| TomoError::Numerical(format!("thread pool: {e}")))?;
            Ok(pool.install(op))
        }
        _ => Ok(op()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let f = |i: usize| (i * i) as u64;
        assert_eq!(
            map_indexed(Execution::Parallel, 1000, f),
            map_indexed(Execution::Sequential, 1000, f)
        );
    }

    #[test]
    fn lowest_error_wins() {
        let out = try_map_indexed(Execution::Parallel, 100, |i| {
            if i % 30 == 29 {
                Err(TomoError::Numerical(format!("{i}")))
            } else {
                Ok(i)
            }
        });
        match out {
            Err(TomoError::Numerical(msg)) => assert_eq!(msg, "29"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn jobs_zero_rejected() {
        assert!(with_jobs(Some(0), || 1).is_err());
        assert_eq!(with_jobs(Some(2), || 5).unwrap(), 5);
    }
}
