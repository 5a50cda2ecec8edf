//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) work items run on the rayon pool;
//! without it, or with [`Execution::Sequential`], they run in index order on
//! the calling thread. Outputs are always collected in index order, so any
//! reduction over them is deterministic.

use crate::error::Result;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    /// Parallel when the `parallel` feature is compiled in.
    #[default]
    Auto,
    Sequential,
    /// Falls back to sequential if the feature is off.
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && !matches!(self, Execution::Sequential)
    }
}

/// `(0..count).map(f).collect()`, possibly in parallel.
pub fn map_indexed<T, F>(count: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..count).map(f).collect()
}

/// Fallible [`map_indexed`]. The error reported is the one with the lowest
/// index, independent of scheduling.
pub fn try_map_indexed<T, F>(count: usize, exec: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    map_indexed(count, exec, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = map_indexed(1000, Execution::Sequential, |i| i * i);
        let par = map_indexed(1000, Execution::Parallel, |i| i * i);
        assert_eq!(seq, par);
    }

    #[test]
    fn first_error_wins() {
        let r: Result<Vec<usize>> = try_map_indexed(100, Execution::Parallel, |i| {
            if i % 10 == 7 {
                Err(crate::Error::Parameter(format!("{i}")))
            } else {
                Ok(i)
            }
        });
        match r {
            Err(crate::Error::Parameter(s)) => assert_eq!(s, "7"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
