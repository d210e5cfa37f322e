//! Chain-level parallelism. With the `parallel` feature, independent work
//! items run on a rayon pool; without it, or in `Sequential` mode, they run
//! in order on the calling thread. Results come back in input order either
//! way, so outputs do not depend on the execution mode.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecMode {
    Sequential,
    /// `workers = 0` uses the global pool size.
    Parallel { workers: usize },
    #[default]
    Auto,
}

impl ExecMode {
    pub fn from_workers(workers: usize) -> Self {
        match workers {
            0 => ExecMode::Auto,
            1 => ExecMode::Sequential,
            n => ExecMode::Parallel { workers: n },
        }
    }
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

/// Maps `f` over `items`, preserving order.
pub fn map_indexed<T, R, F>(items: Vec<T>, mode: ExecMode, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(usize, T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let run = |items: Vec<T>| -> Vec<R> {
            items
                .into_par_iter()
                .enumerate()
                .map(|(i, t)| f(i, t))
                .collect()
        };
        match mode {
            ExecMode::Sequential => {}
            ExecMode::Auto | ExecMode::Parallel { workers: 0 } => return run(items),
            ExecMode::Parallel { workers } => {
                match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                    Ok(pool) => return pool.install(|| run(items)),
                    Err(_) => return run(items),
                }
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = mode;
    items.into_iter().enumerate().map(|(i, t)| f(i, t)).collect()
}
